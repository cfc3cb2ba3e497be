"""One-bit quadratic networks that implement Bernstein polynomials exactly.

With ``rho(t) = t^2 / 2`` the identity ``ab = rho(a + b) - rho(a) - rho(b)``
gives an exact product from three quadratic neurons and a linear read-out,
all weights in ``{+1, -1}``. Each variable runs its own Pascal triangle

    p_{m+1,0}   = (1 - x) p_{m,0}
    p_{m+1,k}   = x p_{m,k-1} + (1 - x) p_{m,k}
    p_{m+1,m+1} = x p_{m,m}

where ``x`` and ``1 - x`` are reached through skip connections. The
multivariate basis is then a left-to-right chain of binary products.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DomainError, ResourceCapExceeded
from .qnn import NetBuilder, QuantNet
from .sigma_delta import ONE_BIT, SignTensor

__all__ = [
    "DEFAULT_OUTPUT_CAP",
    "product_quad",
    "build_mult2_quad",
    "build_multd_quad",
    "pascal_triangle_quad",
    "build_bernstein_quad",
    "attach_sign_layer",
]

DEFAULT_OUTPUT_CAP = 1 << 20


def product_quad(b: NetBuilder, a1: int, a2: int) -> int:
    """Append the exact product block ``a1 * a2`` (3 quadratic nodes + 1 linear)."""
    s = b.add([(a1, 1.0), (a2, 1.0)], "quadratic")
    r1 = b.add([(a1, 1.0)], "quadratic")
    r2 = b.add([(a2, 1.0)], "quadratic")
    return b.add([(s, 1.0), (r1, -1.0), (r2, -1.0)], "identity")


def build_mult2_quad() -> QuantNet:
    """Stand-alone product network, size ``(2, 4, 7)``."""
    b = NetBuilder(2, ONE_BIT)
    out = product_quad(b, 0, 1)
    return b.build([out], metadata={"builder": "mult2_quad"})


def _chain_product(b: NetBuilder, factors) -> int:
    acc = factors[0]
    for f in factors[1:]:
        acc = product_quad(b, acc, f)
    return acc


def build_multd_quad(d: int) -> QuantNet:
    """``x_1 x_2 ... x_d`` as ``((x_1 x_2) x_3) ...``, size ``(2d-2, 4d-4, 7d-7)``."""
    if d < 2:
        raise DomainError(f"a product chain needs d >= 2, got {d}")
    b = NetBuilder(d, ONE_BIT)
    out = _chain_product(b, list(range(d)))
    return b.build([out], metadata={"builder": "multd_quad", "d": d})


def pascal_triangle_quad(b: NetBuilder, x: int, n: int) -> list[int]:
    """Append the triangle for one variable and return the ids of ``p_{n,0..n}(x)``.

    Row 1 is ``1 - x`` (weight -1, bias +1) and an identity copy of ``x``.
    """
    one_minus = b.add([(x, -1.0)], "identity", bias=1.0)
    row = [one_minus, b.add([(x, 1.0)], "identity")]
    for m in range(1, n):
        nxt = [product_quad(b, one_minus, row[0])]
        for k in range(1, m + 1):
            left = product_quad(b, x, row[k - 1])
            right = product_quad(b, one_minus, row[k])
            nxt.append(b.add([(left, 1.0), (right, 1.0)], "identity"))
        nxt.append(product_quad(b, x, row[m]))
        row = nxt
    return row


def build_bernstein_quad(n: int, d: int = 1, cap: int = DEFAULT_OUTPUT_CAP) -> QuantNet:
    """Network whose ``(n+1)^d`` outputs are ``p_{n,k}(x)``, ``k`` in C (row-major) order."""
    if int(n) != n or n < 1 or int(d) != d or d < 1:
        raise DomainError(f"need integers n >= 1 and d >= 1, got n={n!r}, d={d!r}")
    n, d = int(n), int(d)
    if (n + 1) ** d > cap:
        raise ResourceCapExceeded(f"(n+1)^d = {(n + 1) ** d} outputs exceeds the cap of {cap}")
    b = NetBuilder(d, ONE_BIT)
    rows = [pascal_triangle_quad(b, var, n) for var in range(d)]
    if d == 1:
        outputs = rows[0]
    else:
        outputs = [
            _chain_product(b, [rows[j][kj] for j, kj in enumerate(k)])
            for k in itertools.product(range(n + 1), repeat=d)
        ]
    return b.build(outputs, metadata={"builder": "bernstein_quad", "n": n, "d": d})


def attach_sign_layer(net: QuantNet, sigma) -> QuantNet:
    """Append one identity node computing ``sum_k sigma_k * output_k``.

    ``sigma`` is a :class:`SignTensor` (or array) over the network's output
    index set in C order; the size grows by exactly ``(1, 1, (n+1)^d)``.
    """
    vals = np.asarray(sigma.values if isinstance(sigma, SignTensor) else sigma, dtype=float).ravel()
    if vals.size != len(net.outputs):
        raise DomainError(f"sign tensor has {vals.size} entries but the network has {len(net.outputs)} outputs")
    if not ONE_BIT.contains_all(vals):
        raise DomainError("sign layer weights must be +1 or -1")
    b = NetBuilder.from_net(net)
    depth = max(b.layer_of(o) for o in net.outputs)
    out = b.add(list(zip(net.outputs, vals.tolist())), "identity", layer=depth + 1)
    meta = dict(net.metadata)
    meta["sign_layer"] = True
    return b.build([out], metadata=meta)
