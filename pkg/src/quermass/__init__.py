"""Quermassintegral toolkit.

Computes quermassintegrals of convex bodies by several independent methods
(closed forms, Kubota projection averages, Steiner polynomial fits, mean
width) and numerically verifies a suite of integral-geometric identities and
double-sided inequalities relating a body's quermassintegrals to those of its
sections and projections.
"""

from quermass.core import RngStream, omega

__all__ = ["RngStream", "omega"]
