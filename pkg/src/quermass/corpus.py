"""Deterministic body corpus.

Bodies are chosen to exercise both hypotheses that appear in the checks:
centrally symmetric (balls, boxes, cross-polytopes, ellipsoids, symmetric
random polytopes) and merely centered (simplices).  The random entries are
generated from a fixed internal seed, so the corpus is identical across
runs and scenarios.
"""
from __future__ import annotations

import numpy as np

from quermass import bodies as bd
from quermass.core import RngStream

CORPUS_SEED = 20250810

CORPUS_NAMES = (
    "balls",
    "boxes",
    "crosspolytopes",
    "ellipsoids",
    "random-symmetric",
    "centered-simplices",
    "all",
)


def _balls() -> list[bd.ConvexBody]:
    return [
        bd.ball(np.zeros(n), 1.0, bd.Flags(symmetric=True)).with_name(f"ball-{n}d")
        for n in (2, 3, 4, 5)
    ]


def _boxes() -> list[bd.ConvexBody]:
    out = []
    for n in (3, 4):
        out.append(
            bd.box(np.zeros(n), np.full(n, 0.5), bd.Flags(symmetric=True))
            .with_name(f"cube-{n}d")
        )
        halves = 0.5 * (0.5 ** np.arange(n))
        out.append(
            bd.box(np.zeros(n), halves, bd.Flags(symmetric=True))
            .with_name(f"geombox-{n}d")
        )
    return out


def _crosspolytopes() -> list[bd.ConvexBody]:
    out = []
    for n in (3, 4):
        verts = np.vstack([np.eye(n), -np.eye(n)])
        out.append(
            bd.vpolytope(verts, bd.Flags(symmetric=True)).with_name(f"crosspoly-{n}d")
        )
    return out


def _ellipsoids() -> list[bd.ConvexBody]:
    out = []
    for n in (3, 4):
        semiaxes = np.logspace(np.log10(0.5), np.log10(2.0), n)
        out.append(
            bd.ellipsoid(np.zeros(n), np.diag(semiaxes ** 2),
                         bd.Flags(symmetric=True)).with_name(f"ellipsoid-{n}d")
        )
    return out


def _random_symmetric() -> list[bd.ConvexBody]:
    out = []
    for i, n in enumerate((3, 4)):
        gen = RngStream(CORPUS_SEED, i).generator()
        g = gen.standard_normal((20, n))
        out.append(
            bd.vpolytope(np.vstack([g, -g]), bd.Flags(symmetric=True))
            .with_name(f"randsym-{n}d")
        )
    return out


def _centered_simplices() -> list[bd.ConvexBody]:
    out = []
    for n in (3, 4):
        verts = np.vstack([np.zeros(n), np.eye(n)])
        simplex = bd.translate_to_centered(bd.vpolytope(verts))
        out.append(simplex.with_name(f"simplex-{n}d"))
    return out


def corpus(name: str) -> list[bd.ConvexBody]:
    """Named deterministic body families; `all` concatenates every family."""
    if name == "balls":
        return _balls()
    if name == "boxes":
        return _boxes()
    if name == "crosspolytopes":
        return _crosspolytopes()
    if name == "ellipsoids":
        return _ellipsoids()
    if name == "random-symmetric":
        return _random_symmetric()
    if name == "centered-simplices":
        return _centered_simplices()
    if name == "all":
        out = []
        for sub in CORPUS_NAMES[:-1]:
            out.extend(corpus(sub))
        return out
    raise KeyError(f"unknown corpus {name!r}; choose from {CORPUS_NAMES}")
