"""Target functions on ``[0,1]^d`` with known norms.

Each built-in carries closed forms for ``||f||_inf``, the Lipschitz
constant (Euclidean) and ``||f||_{C^2} = max(||f||_inf, max_{|a|=2} ||d^a f||_inf)``.
Functions loaded from sample tensors get finite-difference estimates
instead, flagged with ``norms_estimated = True``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .bernstein import check_unit_point
from .errors import DomainError

__all__ = ["TargetFunction", "BUILTIN_NAMES", "builtin", "builtin_suite", "from_samples", "GAUSS_WIDTH"]

GAUSS_WIDTH = 0.2


@dataclass(frozen=True)
class TargetFunction:
    """A callable ``(P, d) -> (P,)`` plus its norm data.

    ``smoothness`` is the largest ``s`` for which ``||f||_{C^s}`` is finite
    (``math.inf`` for analytic functions). ``c2_norm`` is ``None`` for
    functions that are only Lipschitz.
    """

    name: str
    d: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    sup_norm: float
    lip: float
    c2_norm: float | None
    smoothness: float
    scale: float = 1.0
    norms_estimated: bool = False

    def __call__(self, pts) -> np.ndarray:
        arr = np.asarray(pts, dtype=float).reshape(-1, self.d)
        return np.asarray(self.func(arr), dtype=float).reshape(-1)


def _sine(c, d, freq):
    w = freq * math.pi

    def f(p):
        return c * np.prod(np.sin(w * p), axis=1)

    return f, abs(c), abs(c) * w, abs(c) * w * w


def _poly(c, d):
    def f(p):
        return c * np.prod(p * p, axis=1)

    c2 = max(abs(c), 2 * abs(c), 4 * abs(c) if d >= 2 else 0.0)
    return f, abs(c), 2 * abs(c) * math.sqrt(d), c2


def _gauss(c, d):
    w = GAUSS_WIDTH

    def f(p):
        return c * np.exp(-np.sum((p - 0.5) ** 2, axis=1) / (2 * w * w))

    return f, abs(c), abs(c) / (w * math.sqrt(math.e)), abs(c) / (w * w)


def _tent(c, d):
    def f(p):
        return c * (1.0 - (2.0 / d) * np.sum(np.abs(p - 0.5), axis=1))

    return f, abs(c), 2 * abs(c) / math.sqrt(d), None


BUILTIN_NAMES = ("sine", "sin2pi", "poly", "gauss", "tent")


def builtin(name: str, d: int = 1, scale: float = 0.4) -> TargetFunction:
    """Built-in target by name.

    ``sine``: ``c prod sin(pi x_i)``; ``sin2pi``: ``c prod sin(2 pi x_i)``;
    ``poly``: ``c prod x_i^2``; ``gauss``: ``c exp(-|x - 1/2|^2 / (2 w^2))``
    with ``w = 0.2``; ``tent``: ``c (1 - (2/d) sum |x_i - 1/2|)``.
    """
    if int(d) != d or d < 1:
        raise DomainError(f"d must be an integer >= 1, got {d!r}")
    c = float(scale)
    if name == "sine":
        f, sup, lip, c2 = _sine(c, d, 1)
    elif name == "sin2pi":
        f, sup, lip, c2 = _sine(c, d, 2)
    elif name == "poly":
        f, sup, lip, c2 = _poly(c, d)
    elif name == "gauss":
        f, sup, lip, c2 = _gauss(c, d)
    elif name == "tent":
        f, sup, lip, c2 = _tent(c, d)
    else:
        raise DomainError(f"unknown built-in {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    smooth = 1.0 if name == "tent" else math.inf
    return TargetFunction(name, int(d), f, sup, lip, c2, smooth, c)


def builtin_suite(d: int = 1, scale: float = 0.4) -> list[TargetFunction]:
    return [builtin(name, d, scale) for name in BUILTIN_NAMES]


def from_samples(values, name: str = "samples") -> TargetFunction:
    """Wrap grid samples ``values[k] = f(k/n)``; off-grid values are multilinear interpolants.

    Norms come from finite differences on the grid and are flagged as estimates.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim < 1 or vals.shape[0] < 2 or any(s != vals.shape[0] for s in vals.shape):
        raise DomainError(f"samples must have shape (n+1,)*d, got {vals.shape}")
    n, d = vals.shape[0] - 1, vals.ndim
    axes = [np.arange(n + 1) / n] * d
    interp = RegularGridInterpolator(axes, vals, method="linear")
    h = 1.0 / n
    grads = [np.diff(vals, axis=j) / h for j in range(d)]
    lip = 0.0
    # the interpolant's gradient norm peaks at a cell corner, where each partial is an edge difference
    for corner in itertools.product((0, 1), repeat=d):
        sq = np.zeros((n,) * d)
        for j, g in enumerate(grads):
            idx = tuple(slice(None) if i == j else slice(corner[i], corner[i] + n) for i in range(d))
            sq = sq + g[idx] ** 2
        lip = max(lip, float(np.sqrt(np.max(sq))))
    seconds = [0.0]
    if n >= 2:
        for i in range(d):
            for j in range(d):
                seconds.append(float(np.max(np.abs(np.diff(np.diff(vals, axis=i), axis=j)))) / (h * h))
    sup = float(np.max(np.abs(vals)))
    c2 = max(sup, max(seconds))

    def f(p):
        return interp(check_unit_point(p))

    return TargetFunction(name, d, f, sup, lip, c2, 2.0, 1.0, norms_estimated=True)
