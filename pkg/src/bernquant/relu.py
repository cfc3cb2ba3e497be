"""Three-bit ReLU gadgets: tent, approximate squaring and products, Bernstein nets.

Weights and biases live in ``{+-1/2, +-1, +-2}``. Building blocks:

* tent ``phi(x) = sigma(2 sigma(x) - 2 sigma(x - 1/2) - 2 sigma(x - 1/2))``;
* squaring ``S(x) = sigma(x - sum_{k<=m} phi^k(x) / 4^k)`` with
  ``|S - x^2| <= 4^{-m}`` on ``[0, 1]``;
* products from ``xy = ((x+y)^2 - x^2 - y^2) / 2`` after shrinking the
  inputs into ``[0, 1]`` with weight-1/2 chains and growing back with
  weight-2 chains;
* a Pascal triangle of approximate products for ``b_{n,k} ~ p_{n,k}``.

``two_bit=True`` swaps every weight 2 for a doubled weight-1 edge so the
network only uses ``{+-1/2, +-1}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass


from .errors import DomainError, InfeasibleParameters, ResourceCapExceeded
from .qnn import NetBuilder, QuantNet
from .quad import DEFAULT_OUTPUT_CAP, attach_sign_layer
from .sigma_delta import THREE_BIT, TWO_BIT

__all__ = [
    "ReluBuildParams",
    "squaring_terms",
    "product_params",
    "multd_params",
    "check_multd_feasible",
    "build_phi_block",
    "build_squaring",
    "build_mult2_relu",
    "build_multd_relu",
    "build_bernstein_relu_1d",
    "build_bernstein_relu",
    "attach_sign_layer_relu",
    "theorem_epsilon",
]


@dataclass(frozen=True)
class ReluBuildParams:
    """Accuracy and range parameters of one gadget.

    ``k_range``: inputs lie in ``[0, 2^k_range]``. ``m_terms``: tent
    compositions in each squaring. ``ell_cap``: range exponent of the inner
    product blocks. ``delta``: accuracy of the sub-blocks.
    """

    epsilon: float
    k_range: int = 0
    m_terms: int = 1
    ell_cap: int = 0
    delta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.k_range < 0:
            raise DomainError("k_range must be >= 0")


def squaring_terms(eps: float) -> int:
    """Smallest ``m >= 1`` with ``4^{-m} <= eps``."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps!r}")
    return max(1, math.ceil(math.log2(1.0 / eps) / 2.0 - 1e-12))


def product_params(eps: float, k: int) -> ReluBuildParams:
    delta = eps * 2.0 ** (-2 * k - 2) / 3.0
    return ReluBuildParams(eps, k, squaring_terms(delta), k, delta)


def multd_params(eps: float, k: int, d: int) -> ReluBuildParams:
    """Inner accuracy and range for the chained ``d``-ary product.

    For ``k >= 1``: ``delta = (2^k - 1) 2^{-k(d-1)} eps`` and
    ``ell = k(d-1) + 1``. For ``k = 0`` the error recursion is a plain sum,
    so ``delta = eps / (d-1)`` and ``ell = 1``.
    """
    if k == 0:
        return ReluBuildParams(eps, 0, 0, 1, eps / (d - 1))
    return ReluBuildParams(eps, k, 0, k * (d - 1) + 1, (2.0**k - 1.0) * 2.0 ** (-k * (d - 1)) * eps)


def check_multd_feasible(delta: float, k: int, ell: int, d: int) -> None:
    """Every partial product must stay inside ``[0, 2^ell]``."""
    worst = delta * sum(2.0 ** (k * i) for i in range(max(0, d - 2))) + 2.0 ** (k * (d - 1))
    if worst > 2.0**ell or k > ell:
        raise InfeasibleParameters(
            f"partial products may reach {worst:.6g} > 2^{ell}; raise ell or lower delta (k={k}, d={d})"
        )


class _Gadgets:
    """Builder helpers bound to one alphabet."""

    def __init__(self, b: NetBuilder, two_bit: bool):
        self.b = b
        self.two_bit = two_bit

    def edges(self, pairs):
        out = []
        for src, w in pairs:
            if self.two_bit and abs(w) == 2.0:
                out += [(src, w / 2.0), (src, w / 2.0)]
            else:
                out.append((src, w))
        return out

    def add(self, pairs, activation="relu", bias=0.0):
        return self.b.add(self.edges(pairs), activation, bias)

    def phi(self, x: int) -> int:
        h1 = self.add([(x, 1.0)])
        h2 = self.add([(x, 1.0)], bias=-0.5)
        h3 = self.add([(x, 1.0)], bias=-0.5)
        return self.add([(h1, 2.0), (h2, -2.0), (h3, -2.0)])

    def square(self, x: int, m: int) -> int:
        taus = [x]
        for _ in range(m):
            taus.append(self.phi(taus[-1]))
        # Horner: h_k = (phi_k + h_{k+1}) / 4, so h_1 = sum_k phi_k / 4^k
        h = None
        for k in range(m, 0, -1):
            g = self.add([(taus[k], 0.5)] + ([(h, 0.5)] if h is not None else []))
            h = self.add([(g, 0.5)])
        return self.add([(x, 1.0), (h, -1.0)])

    def scale(self, node: int, power: int) -> int:
        """Multiply a non-negative value by ``2^power`` with a ReLU chain."""
        w = 2.0 if power > 0 else 0.5
        for _ in range(abs(power)):
            node = self.add([(node, w)])
        return node

    def product(self, x: int, y: int, k: int, delta: float) -> int:
        """Approximate ``xy`` for ``x, y`` in ``[0, 2^k]`` to within ``3 * 2^{2k+1} delta``."""
        m = squaring_terms(delta)
        s = self.scale(self.add([(x, 0.5), (y, 0.5)]), -k)
        a = self.scale(self.add([(x, 0.5)]), -k)
        c = self.scale(self.add([(y, 0.5)]), -k)
        sq = [self.square(t, m) for t in (s, a, c)]
        z = self.add([(sq[0], 1.0), (sq[1], -1.0), (sq[2], -1.0)])
        return self.scale(z, 2 * k + 1)

    def chain_product(self, xs, delta: float, ell: int) -> int:
        acc = xs[-1]
        for xj in reversed(xs[:-1]):
            acc = self.product(xj, acc, ell, delta)
        return acc

    def triangle(self, x: int, n: int, eps: float) -> list[int]:
        one_minus = self.add([(x, -1.0)], bias=1.0)
        row = [one_minus, self.add([(x, 1.0)])]
        if n == 1:
            return row
        # products of values in [0, 2] with error eps / (2(n-1)) each
        delta = eps / (2.0 * (n - 1)) * 2.0 ** (-4) / 3.0
        for m in range(1, n):
            nxt = [self.product(one_minus, row[0], 1, delta)]
            for k in range(1, m + 1):
                left = self.product(x, row[k - 1], 1, delta)
                right = self.product(one_minus, row[k], 1, delta)
                nxt.append(self.add([(left, 1.0), (right, 1.0)]))
            nxt.append(self.product(x, row[m], 1, delta))
            row = nxt
        return row


def _alphabet(two_bit: bool):
    return TWO_BIT if two_bit else THREE_BIT


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps!r}")


def build_phi_block(two_bit: bool = False) -> QuantNet:
    """The tent function on ``[0, 1]``; size ``(2, 4, 6)``."""
    b = NetBuilder(1, _alphabet(two_bit))
    out = _Gadgets(b, two_bit).phi(0)
    return b.build([out], metadata={"builder": "phi_block"})


def build_squaring(eps: float | None = None, m: int | None = None, two_bit: bool = False) -> QuantNet:
    """``S`` with ``|S(x) - x^2| <= 4^{-m} <= eps`` on ``[0, 1]``.

    Pass either ``eps`` (then ``m = ceil(log2(1/eps) / 2)``) or ``m`` directly.
    """
    if m is None:
        if eps is None:
            raise DomainError("give eps or m")
        m = squaring_terms(eps)
    if m < 1:
        raise DomainError("m must be >= 1")
    b = NetBuilder(1, _alphabet(two_bit))
    out = _Gadgets(b, two_bit).square(0, m)
    return b.build([out], metadata={"builder": "squaring", "m": m})


def build_mult2_relu(eps: float, k: int = 0, two_bit: bool = False) -> QuantNet:
    """``|P(x, y) - xy| <= eps`` for ``x, y`` in ``[0, 2^k]``; output is non-negative."""
    _check_eps(eps)
    if k < 0:
        raise DomainError("k must be >= 0")
    p = product_params(eps, k)
    b = NetBuilder(2, _alphabet(two_bit))
    out = _Gadgets(b, two_bit).product(0, 1, k, p.delta)
    return b.build([out], metadata={"builder": "mult2_relu", "eps": eps, "k": k})


def build_multd_relu(
    eps: float, k: int, d: int, delta: float | None = None, ell: int | None = None, two_bit: bool = False
) -> QuantNet:
    """``|P(x_1, ..., x_d) - x_1 ... x_d| <= eps`` on ``[0, 2^k]^d`` via ``u_j = P(x_j, u_{j+1})``.

    ``delta`` and ``ell`` override the inner accuracy and range; the
    combination is checked and :class:`InfeasibleParameters` is raised when
    partial products could leave ``[0, 2^ell]``.
    """
    _check_eps(eps)
    if d < 2:
        raise DomainError(f"d-ary product needs d >= 2, got {d}")
    if k < 0:
        raise DomainError("k must be >= 0")
    p = multd_params(eps, k, d)
    delta = p.delta if delta is None else float(delta)
    ell = p.ell_cap if ell is None else int(ell)
    check_multd_feasible(delta, k, ell, d)
    inner = product_params(delta, ell).delta
    b = NetBuilder(d, _alphabet(two_bit))
    out = _Gadgets(b, two_bit).chain_product(list(range(d)), inner, ell)
    return b.build([out], metadata={"builder": "multd_relu", "eps": eps, "k": k, "d": d, "ell": ell})


def build_bernstein_relu_1d(n: int, eps: float, two_bit: bool = False) -> QuantNet:
    """Outputs ``b_{n,0..n}`` with ``|b_{n,k} - p_{n,k}| <= eps`` on ``[0, 1]``.

    ``n = 1`` gives the exact pair ``(1 - x, x)``.
    """
    _check_eps(eps)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    b = NetBuilder(1, _alphabet(two_bit))
    outs = _Gadgets(b, two_bit).triangle(0, int(n), eps)
    return b.build(outs, metadata={"builder": "bernstein_relu", "n": int(n), "d": 1, "eps": eps})


def build_bernstein_relu(
    n: int, d: int, eps: float, cap: int = DEFAULT_OUTPUT_CAP, two_bit: bool = False
) -> QuantNet:
    """``(n+1)^d`` non-negative outputs within ``eps`` of ``p_{n,k}``, C order over ``k``.

    Each variable gets a triangle with accuracy ``eps / (d 2^d)``; each output
    multiplies its ``d`` factors (all in ``[0, 2]``) with accuracy ``eps / 2``.
    """
    _check_eps(eps)
    if int(d) != d or d < 1:
        raise DomainError(f"d must be an integer >= 1, got {d!r}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    n, d = int(n), int(d)
    if d == 1:
        return build_bernstein_relu_1d(n, eps, two_bit)
    if (n + 1) ** d > cap:
        raise ResourceCapExceeded(f"(n+1)^d = {(n + 1) ** d} outputs exceeds the cap of {cap}")
    gamma = eps / (d * 2**d)
    p = multd_params(eps / 2.0, 1, d)
    check_multd_feasible(p.delta, 1, p.ell_cap, d)
    inner = product_params(p.delta, p.ell_cap).delta
    b = NetBuilder(d, _alphabet(two_bit))
    g = _Gadgets(b, two_bit)
    rows = [g.triangle(var, n, gamma) for var in range(d)]
    outputs = [
        g.chain_product([rows[j][kj] for j, kj in enumerate(k)], inner, p.ell_cap)
        for k in itertools.product(range(n + 1), repeat=d)
    ]
    return b.build(outputs, metadata={"builder": "bernstein_relu", "n": n, "d": d, "eps": eps})


def attach_sign_layer_relu(net: QuantNet, sigma) -> QuantNet:
    """Linear read-out with ``+-1`` weights; same contract as the quadratic version."""
    if 1.0 not in net.alphabet or -1.0 not in net.alphabet:
        raise DomainError("network alphabet must contain +-1")
    return attach_sign_layer(net, sigma)


def theorem_epsilon(n: int, d: int, s: int) -> float:
    """Implementation budget ``(n+1)^{-d} n^{-s/2}`` that keeps the sign-layer error below ``n^{-s/2}``."""
    return float((n + 1.0) ** (-d) * n ** (-s / 2.0))
