"""Greedy r-th order sigma-delta quantization, 1-D and directional.

The scheme solves ``y - q = Delta^r u`` recursively with ``u`` zero before
index 0:

    v_k = sum_{j=1}^r (-1)^{j-1} C(r,j) u_{k-j} + y_k
    q_k = round_A(v_k)
    u_k = v_k - q_k

Ties in ``round_A`` go to the larger level so runs are reproducible. For a
d-dimensional coefficient tensor the 1-D scheme runs independently on every
fiber along one axis (the "directional" scheme).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bernstein import check_unit_point
from .errors import AlphabetViolation, DomainError, StabilityOverflow

__all__ = [
    "Alphabet",
    "ONE_BIT",
    "TWO_BIT",
    "THREE_BIT",
    "SdState",
    "SignTensor",
    "quantize_1d",
    "quantize_directional",
    "difference",
    "quantization_error_envelope",
    "DEFAULT_U_BOUND",
]

DEFAULT_U_BOUND = 50.0


class Alphabet:
    """A finite set of allowed values, symmetric about zero."""

    def __init__(self, levels: Iterable[float]):
        lv = sorted({float(v) for v in levels})
        if not lv:
            raise DomainError("alphabet must be non-empty")
        if any(-v not in lv for v in lv):
            raise DomainError(f"alphabet {lv} is not symmetric about 0")
        self.levels = tuple(lv)
        self._arr = np.array(lv)

    def __repr__(self):
        return f"Alphabet({list(self.levels)})"

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.levels == other.levels

    def __hash__(self):
        return hash(self.levels)

    def __len__(self):
        return len(self.levels)

    def __contains__(self, value) -> bool:
        return float(value) in self.levels

    def contains_all(self, values) -> bool:
        vals = np.asarray(values, dtype=float).ravel()
        return bool(np.isin(vals, self._arr).all())

    def check(self, values, what="value"):
        vals = np.asarray(values, dtype=float).ravel()
        bad = vals[~np.isin(vals, self._arr)]
        if bad.size:
            raise AlphabetViolation(f"{what} {bad[0]!r} is not in alphabet {list(self.levels)}")

    def round(self, v):
        """Nearest level to ``v``; ties resolve to the larger level."""
        v = np.asarray(v, dtype=float)
        dist = np.abs(v[..., None] - self._arr[::-1])
        return self._arr[::-1][np.argmin(dist, axis=-1)]

    def code(self, values) -> np.ndarray:
        """Integer code (index into ``levels``) of each value."""
        self.check(values)
        return np.searchsorted(self._arr, np.asarray(values, dtype=float))


ONE_BIT = Alphabet((-1.0, 1.0))
TWO_BIT = Alphabet((-1.0, -0.5, 0.5, 1.0))
THREE_BIT = Alphabet((-2.0, -1.0, -0.5, 0.5, 1.0, 2.0))


@dataclass(frozen=True)
class SdState:
    """State of a sigma-delta run.

    ``u`` carries ``order`` zero entries before index 0 along the scan axis,
    so ``u.shape[axis] == n + 1 + order``.
    """

    u: np.ndarray
    max_abs_u: float
    order: int
    direction: int

    @property
    def axis(self) -> int:
        return self.direction - 1

    def interior(self) -> np.ndarray:
        """``u`` without the virtual leading zeros."""
        return np.take(self.u, np.arange(self.order, self.u.shape[self.axis]), axis=self.axis)


@dataclass(frozen=True)
class SignTensor:
    """Quantized coefficients; every entry is an alphabet level."""

    values: np.ndarray
    alphabet: Alphabet = ONE_BIT

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        self.alphabet.check(vals, "sign")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def d(self) -> int:
        return self.values.ndim


def _feedback_weights(r: int) -> np.ndarray:
    return np.array([(-1) ** (j - 1) * math.comb(r, j) for j in range(1, r + 1)], dtype=float)


def _run_fibers(y: np.ndarray, r: int, alphabet: Alphabet, u_bound: float):
    """Greedy scheme along the last axis of a 2-D array ``(fibers, length)``."""
    nfib, length = y.shape
    weights = _feedback_weights(r)
    u = np.zeros((nfib, length + r))
    q = np.empty_like(y)
    for k in range(length):
        # u[:, k + r - j] is u_{k-j}
        v = y[:, k] + u[:, k : k + r][:, ::-1] @ weights
        qk = alphabet.round(v)
        uk = v - qk
        q[:, k] = qk
        u[:, k + r] = uk
        over = np.abs(uk) > u_bound
        if over.any():
            fib = int(np.argmax(over))
            raise StabilityOverflow((fib,), k, uk[fib], u_bound)
    return q, u


def quantize_1d(y: Sequence[float], r: int = 1, alphabet: Alphabet = ONE_BIT, u_bound: float = DEFAULT_U_BOUND):
    """Quantize a real sequence with the greedy ``r``-th order rule.

    Returns ``(q, state)``; ``state.u`` has ``r`` leading zeros. Raises
    :class:`StabilityOverflow` as soon as ``|u_k| > u_bound``.
    """
    y = np.asarray(y, dtype=float).ravel()
    if r < 1:
        raise DomainError(f"order r must be >= 1, got {r}")
    if y.size and np.max(np.abs(y)) > 1.0:
        raise DomainError("input sequence must satisfy |y_k| <= 1")
    try:
        q, u = _run_fibers(y[None, :], r, alphabet, u_bound)
    except StabilityOverflow as exc:
        raise StabilityOverflow((), exc.step, exc.value, exc.bound) from None
    u = u[0]
    return q[0], SdState(u=u, max_abs_u=float(np.max(np.abs(u))) if u.size else 0.0, order=r, direction=1)


def quantize_directional(a, r: int, ell: int = 1, alphabet: Alphabet = ONE_BIT, u_bound: float = DEFAULT_U_BOUND):
    """Run the 1-D scheme on every fiber of ``a`` along axis ``ell`` (1-based).

    Fibers are independent; they are scanned in ascending order along the
    axis and processed together. ``StabilityOverflow.fiber`` reports the
    offending fiber's multi-index over the remaining axes, in their original
    order.
    """
    vals = np.asarray(getattr(a, "values", a), dtype=float)
    d = vals.ndim
    if not 1 <= ell <= d:
        raise DomainError(f"direction {ell} outside 1..{d}")
    if r < 1:
        raise DomainError(f"order r must be >= 1, got {r}")
    peak = np.max(np.abs(vals))
    if peak > 1.0 or (r > 1 and peak >= 1.0):
        raise DomainError("directional sigma-delta needs ||a||_inf < 1 (or <= 1 when r = 1)")
    axis = ell - 1
    moved = np.moveaxis(vals, axis, -1)
    fiber_shape = moved.shape[:-1]
    flat = moved.reshape(-1, moved.shape[-1])
    try:
        q, u = _run_fibers(flat, r, alphabet, u_bound)
    except StabilityOverflow as exc:
        fiber = np.unravel_index(exc.fiber[0], fiber_shape) if fiber_shape else ()
        raise StabilityOverflow(fiber, exc.step, exc.value, exc.bound) from None
    q = np.moveaxis(q.reshape(moved.shape), -1, axis)
    u = np.moveaxis(u.reshape(fiber_shape + (u.shape[-1],)), -1, axis)
    state = SdState(u=u, max_abs_u=float(np.max(np.abs(u))), order=r, direction=ell)
    return SignTensor(q, alphabet), state


def difference(u: np.ndarray, r: int, axis: int = 0) -> np.ndarray:
    """``Delta^r u`` along ``axis`` for ``u`` that already carries ``r`` leading zeros.

    The result drops the padding and has the shape of the quantized input.
    """
    out = np.asarray(u, dtype=float)
    for _ in range(r):
        out = np.diff(out, axis=axis)
    return out


def quantization_error_envelope(n: int, r: int, ell: int, mu: float, x: Sequence[float]) -> float:
    """Pointwise envelope of the quantization error.

    For ``r = 1`` this is the certified bound ``min(2, ((n+1) x(1-x))^{-1/2})``
    in coordinate ``ell``; for ``r >= 2`` the constant-free shape
    ``min(1, n^{-r/2} (x(1-x))^{-r})`` used for slope fits.
    """
    xs = check_unit_point(x)
    if not 1 <= ell <= xs.shape[0]:
        raise DomainError(f"direction {ell} outside 1..{xs.shape[0]}")
    t = float(xs[ell - 1])
    X = t * (1.0 - t)
    if r == 1:
        if X == 0.0:
            return 2.0
        return min(2.0, ((n + 1) * X) ** -0.5)
    if X == 0.0:
        return 1.0
    return min(1.0, n ** (-r / 2.0) * X ** (-r))
