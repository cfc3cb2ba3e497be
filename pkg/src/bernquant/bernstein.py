"""Bernstein basis evaluation, central moments and the grid Bernstein operator.

All evaluation goes through the Pascal recurrence

    p_{m+1,k}(x) = x p_{m,k-1}(x) + (1 - x) p_{m,k}(x),

so no binomial coefficient is ever formed. Indices outside ``0..n`` map to
the zero polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "GridSamples",
    "basis_matrix",
    "basis_tensor",
    "eval_basis_1d",
    "eval_basis_md",
    "central_moment",
    "moment_closed_form",
    "operator_matrix",
    "apply_along_axes",
    "grid_operator_apply",
    "adjoint_difference",
    "variation",
    "check_unit_point",
]


def _check_degree(n):
    if int(n) != n or n < 1:
        raise DomainError(f"degree n must be an integer >= 1, got {n!r}")
    return int(n)


def check_unit_point(x, d=None):
    """Return ``x`` as a float array after checking it lies in the unit cube."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if d is not None and arr.shape[-1] != d:
        raise DomainError(f"expected {d} coordinates, got {arr.shape[-1]}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("evaluation point outside [0,1]^d")
    return arr


def basis_matrix(n: int, x) -> np.ndarray:
    """All degree-``n`` basis values at the points ``x``.

    Returns an array of shape ``(len(x), n + 1)`` with entry ``[i, k] = p_{n,k}(x_i)``.
    Cost is O(n^2) per point.
    """
    n = _check_degree(n)
    xs = check_unit_point(x).reshape(-1, 1)
    one_minus = 1.0 - xs
    row = np.ones((xs.shape[0], 1))
    for m in range(1, n + 1):
        nxt = np.zeros((xs.shape[0], m + 1))
        nxt[:, :m] += one_minus * row
        nxt[:, 1:] += xs * row
        row = nxt
    return row


def eval_basis_1d(n: int, k: int, x: float) -> float:
    """Value of ``p_{n,k}(x)``; zero when ``k`` is outside ``0..n``."""
    n = _check_degree(n)
    check_unit_point(x)
    if k < 0 or k > n:
        return 0.0
    return float(basis_matrix(n, [x])[0, k])


def eval_basis_md(n: int, k: Sequence[int], x: Sequence[float]) -> float:
    """Tensor-product basis value ``prod_j p_{n,k_j}(x_j)``."""
    n = _check_degree(n)
    k = tuple(int(v) for v in k)
    xs = check_unit_point(x)
    if len(k) != xs.shape[0]:
        raise DomainError(f"multi-index has {len(k)} entries but point has {xs.shape[0]}")
    if any(kj < 0 or kj > n for kj in k):
        return 0.0
    rows = basis_matrix(n, xs)
    return float(np.prod([rows[j, kj] for j, kj in enumerate(k)]))


def basis_tensor(n: int, x: Sequence[float]) -> np.ndarray:
    """All ``(n+1)^d`` basis values at a single point, as a d-dimensional array."""
    xs = check_unit_point(x)
    rows = basis_matrix(n, xs)
    out = rows[0]
    for j in range(1, xs.shape[0]):
        out = np.multiply.outer(out, rows[j])
    return out


def central_moment(n: int, s: int, x):
    """``T_{n,s}(x) = sum_k (k - n x)^s p_{n,k}(x)`` by direct summation.

    ``x`` may be a scalar (returns a float) or an array of points.
    """
    n = _check_degree(n)
    if int(s) != s or s < 0:
        raise DomainError(f"moment order must be a non-negative integer, got {s!r}")
    xs = check_unit_point(x).reshape(-1)
    p = basis_matrix(n, xs)
    dev = np.arange(n + 1)[None, :] - n * xs[:, None]
    out = np.sum(dev ** int(s) * p, axis=1)
    return float(out[0]) if np.ndim(x) == 0 else out


def moment_closed_form(n: int, s: int, x):
    """Closed forms of ``T_{n,s}`` for ``s <= 4`` (with ``X = x(1-x)``); scalar or array ``x``."""
    if s not in (0, 1, 2, 3, 4):
        raise DomainError(f"closed form only known for s <= 4, got {s}")
    x = np.asarray(x, dtype=float)
    X = x * (1.0 - x)
    if s == 0:
        out = np.ones_like(x)
    elif s == 1:
        out = np.zeros_like(x)
    elif s == 2:
        out = n * X
    elif s == 3:
        out = n * (1.0 - 2.0 * x) * X
    else:
        out = 3.0 * n * n * X * X + n * (X - 6.0 * X * X)
    return float(out) if out.ndim == 0 else out


def operator_matrix(n: int) -> np.ndarray:
    """The (n+1)x(n+1) matrix ``M[j, k] = p_{n,k}(j/n)`` of the 1-D grid operator."""
    n = _check_degree(n)
    return basis_matrix(n, np.arange(n + 1) / n)


def apply_along_axes(mat: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Apply ``mat`` along every axis of ``values`` (``out = mat x_1 mat x_2 ... values``)."""
    out = np.asarray(values, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out


@dataclass(frozen=True)
class GridSamples:
    """Function samples ``values[k] = f(k/n)`` on the uniform grid of ``[0,1]^d``."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim < 1 or vals.shape[0] < 2 or any(s != vals.shape[0] for s in vals.shape):
            raise DomainError(f"grid samples must have shape (n+1,)*d with n >= 1, got {vals.shape}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def d(self) -> int:
        return self.values.ndim

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n: int, d: int) -> "GridSamples":
        """Sample ``func`` (mapping an ``(P, d)`` array to ``(P,)``) on the degree-``n`` grid."""
        n = _check_degree(n)
        axes = [np.arange(n + 1) / n] * d
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        return cls(np.asarray(func(pts), dtype=float).reshape((n + 1,) * d))


def grid_operator_apply(samples: GridSamples) -> GridSamples:
    """``B_n`` restricted to the grid: ``out[j] = sum_k samples[k] p_{n,k}(j/n)``."""
    return GridSamples(apply_along_axes(operator_matrix(samples.n), samples.values))


def adjoint_difference(values: np.ndarray, r: int) -> np.ndarray:
    """``r``-fold adjoint difference ``(D* v)_k = v_k - v_{k+1}`` with zero padding on the right."""
    v = np.concatenate([np.asarray(values, dtype=float), np.zeros(r)])
    for _ in range(r):
        v = v - np.concatenate([v[1:], [0.0]])
    return v[: len(values)]


def variation(n: int, r: int, ell: int, x: Sequence[float]) -> float:
    """``r``-th order variation of the basis in direction ``ell`` (1-based) at ``x``.

    By the tensor structure only the ``ell``-th coordinate matters:
    ``V = sum_{k=0}^{n} |((D*)^r p_{n,.}(x_ell))_k|``.
    """
    xs = check_unit_point(x)
    if not 1 <= ell <= xs.shape[0]:
        raise DomainError(f"direction {ell} outside 1..{xs.shape[0]}")
    if r < 1:
        raise DomainError(f"order r must be >= 1, got {r}")
    p = basis_matrix(n, [xs[ell - 1]])[0]
    return float(np.abs(adjoint_difference(p, r)).sum())
