"""Bounded Bernstein coefficients from grid samples via iterated Bernstein operators.

The iterated operator ``U_{n,r} = I - (I - B_n)^r`` reaches the rate
``n^{-s/2}`` for ``C^s`` functions when ``r = ceil(s/2)``. Its output is an
ordinary Bernstein polynomial ``B_n(f_{n,r})`` with

    f_{n,r} = B_n^{r-1} f + P_{r-2}(B_n)(I - B_n) f,
    P_{r-2}(t) = sum_{j=0}^{r-2} (t^j + (1-t)^j),

so the coefficients of the approximant are ``a_k = f_{n,r}(k/n)``. Because
``B_n(g)`` only reads ``g`` on the grid, everything here is a matrix
polynomial in the 1-D operator matrix applied along each axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bernstein import GridSamples, apply_along_axes, basis_matrix, check_unit_point, operator_matrix
from .errors import CoefficientOverflow, DomainError, PreconditionError

__all__ = [
    "SmoothnessSpec",
    "CoeffTensor",
    "pr_poly_eval",
    "iterated_operator_grid",
    "fnr_grid",
    "iterated_coeffs",
    "min_degree",
    "eval_combination",
    "eval_combination_grid",
    "eval_combination_points",
]


@dataclass(frozen=True)
class SmoothnessSpec:
    """Smoothness order ``s``, sup-norm bound ``mu`` and (optionally) ``||f||_{C^2}``."""

    s: int
    mu: float
    c2_norm: float | None = None

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 1:
            raise DomainError(f"smoothness s must be an integer >= 1, got {self.s!r}")
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu!r}")
        if self.c2_norm is not None and self.c2_norm < 0:
            raise DomainError("c2_norm must be non-negative")

    @property
    def r(self) -> int:
        return -(-int(self.s) // 2)


@dataclass(frozen=True)
class CoeffTensor:
    """Real Bernstein coefficients indexed by ``0 <= k <= n`` in ``d`` dimensions."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim < 1 or vals.shape[0] < 2 or any(s != vals.shape[0] for s in vals.shape):
            raise DomainError(f"coefficients must have shape (n+1,)*d with n >= 1, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def pr_poly_eval(r: int, t: float) -> float:
    """``P_{r-2}(t) = sum_{j=0}^{r-2} (t^j + (1-t)^j)``; its maximum on [0,1] is ``r``."""
    if r < 2:
        raise DomainError(f"P_(r-2) needs r >= 2, got {r}")
    return float(sum(t**j + (1.0 - t) ** j for j in range(r - 1)))


def _as_array(samples) -> np.ndarray:
    if isinstance(samples, GridSamples):
        return samples.values
    return GridSamples(samples).values


def _powers(mat, values, upto):
    """``[values, B values, B^2 values, ..., B^upto values]``."""
    out = [np.asarray(values, dtype=float)]
    for _ in range(upto):
        out.append(apply_along_axes(mat, out[-1]))
    return out


def iterated_operator_grid(samples, r: int) -> np.ndarray:
    """``U_{n,r}(f)`` on the grid via ``sum_{j=1}^r (-1)^{j-1} C(r,j) B_n^j f``."""
    f = _as_array(samples)
    mat = operator_matrix(f.shape[0] - 1)
    pw = _powers(mat, f, r)
    return sum((-1) ** (j - 1) * math.comb(r, j) * pw[j] for j in range(1, r + 1))


def fnr_grid(samples, r: int) -> np.ndarray:
    """``f_{n,r}`` on the grid, built from the ``P_{r-2}`` factorisation."""
    f = _as_array(samples)
    if r == 1:
        return f.copy()
    mat = operator_matrix(f.shape[0] - 1)
    head = _powers(mat, f, r - 1)[r - 1]
    resid = f - apply_along_axes(mat, f)
    poly = np.zeros_like(f)
    b_pow = resid
    c_pow = resid
    for j in range(r - 1):
        poly += b_pow + c_pow
        b_pow = apply_along_axes(mat, b_pow)
        c_pow = c_pow - apply_along_axes(mat, c_pow)
    return head + poly


def _binomial_coeffs(f: np.ndarray, r: int) -> np.ndarray:
    # U_{n,r} = B_n * sum_j (-1)^{j-1} C(r,j) B_n^{j-1}
    mat = operator_matrix(f.shape[0] - 1)
    pw = _powers(mat, f, r - 1)
    return sum((-1) ** (j - 1) * math.comb(r, j) * pw[j - 1] for j in range(1, r + 1))


def min_degree(s: int, d: int, c2_norm: float, mu: float) -> int:
    """Smallest ``n`` with ``n >= s d^2 ||f||_{C^2} / (2 (1 - mu))`` (at least 1)."""
    return max(1, math.ceil(s * d * d * c2_norm / (2.0 * (1.0 - mu)) - 1e-12))


def iterated_coeffs(samples, spec: SmoothnessSpec, method: str = "binomial", certify: bool = False) -> CoeffTensor:
    """Coefficients ``a`` with ``sum_k a_k p_{n,k} = U_{n,ceil(s/2)}(f)``.

    ``method="binomial"`` expands ``(1 - (1-B)^r) / B`` into powers of ``B``;
    ``method="fnr"`` goes through ``f_{n,r}``. Both agree to rounding. With
    ``certify=True`` the degree threshold is enforced (needs ``spec.c2_norm``).
    Raises :class:`CoefficientOverflow` when ``||a||_inf >= 1``.
    """
    f = _as_array(samples)
    n, d = f.shape[0] - 1, f.ndim
    if certify:
        if spec.c2_norm is None:
            raise PreconditionError("certification needs a C^2 norm for the target function")
        need = min_degree(spec.s, d, spec.c2_norm, spec.mu)
        if n < need:
            raise PreconditionError(f"degree n={n} is below the minimum n={need} for s={spec.s}, d={d}")
    r = spec.r
    if method == "binomial":
        a = _binomial_coeffs(f, r)
    elif method == "fnr":
        a = fnr_grid(f, r)
    else:
        raise DomainError(f"unknown method {method!r}")
    coeffs = CoeffTensor(a)
    if coeffs.inf_norm >= 1.0:
        raise CoefficientOverflow(coeffs.inf_norm)
    return coeffs


def _coeff_array(a) -> np.ndarray:
    return a.values if isinstance(a, CoeffTensor) else np.asarray(a, dtype=float)


def eval_combination(a, x: Sequence[float]) -> float:
    """``sum_k a_k p_{n,k}(x)`` at one point."""
    vals = _coeff_array(a)
    xs = check_unit_point(x, d=vals.ndim)
    return float(eval_combination_points(vals, xs.reshape(1, -1))[0])


def eval_combination_points(a, points) -> np.ndarray:
    """Vectorised :func:`eval_combination` over an ``(P, d)`` array of points."""
    vals = _coeff_array(a)
    n, d = vals.shape[0] - 1, vals.ndim
    pts = check_unit_point(points).reshape(-1, d)
    out = np.broadcast_to(vals, (pts.shape[0],) + vals.shape)
    # contract the last axis repeatedly, keeping the point axis in front
    for j in reversed(range(d)):
        rows = basis_matrix(n, pts[:, j])
        out = np.einsum("p...k,pk->p...", out, rows)
    return np.asarray(out)


def eval_combination_grid(a, axes: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate on the tensor grid ``axes[0] x ... x axes[d-1]`` (separable, cheap)."""
    vals = _coeff_array(a)
    n = vals.shape[0] - 1
    if len(axes) != vals.ndim:
        raise DomainError("need one axis of points per dimension")
    out = vals
    for j, ax in enumerate(axes):
        out = np.moveaxis(np.tensordot(basis_matrix(n, ax), out, axes=([1], [j])), 0, j)
    return out
