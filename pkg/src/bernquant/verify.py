"""Error decomposition, explicit-bound certification and rate fits.

The total error of a quantized network splits as

    f - f_NN = (f - f_B) + (f_B - f_Q) + (f_Q - f_NN)

with ``f_B = sum a_k p_{n,k}``, ``f_Q = sum sigma_k p_{n,k}`` and ``f_NN`` the
network output. All three terms are evaluated once on the same grid, so the
identity holds pointwise up to rounding. Sup-norms are grid maxima and
therefore under-estimate the true norms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bernstein import GridSamples, apply_along_axes, operator_matrix
from .errors import DomainError, PreconditionError
from .functions import TargetFunction
from .qnn import QuantNet, SizeTriple, save_net
from .sigma_delta import DEFAULT_U_BOUND, ONE_BIT, quantize_directional
from .smoothing import (
    SmoothnessSpec,
    eval_combination_grid,
    fnr_grid,
    iterated_coeffs,
    iterated_operator_grid,
    min_degree,
)

__all__ = [
    "ErrorReport",
    "RateFit",
    "BoundCheck",
    "region_axes",
    "default_resolution",
    "decompose_error",
    "certify_explicit_bounds",
    "fit_rate",
    "run_binary_bernstein",
    "SATURATION_LEVEL",
]

SATURATION_LEVEL = 1e-13
INTERIOR = (0.25, 0.75)


@dataclass
class ErrorReport:
    approx_sup: float
    quant_sup: float
    impl_sup: float
    total_sup: float
    region: str
    grid_resolution: int
    max_abs_u: float
    net_size: SizeTriple | None
    n: int = 0
    d: int = 1
    direction: int = 1
    pointwise: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("pointwise", "net_size")}
        s = self.net_size
        out["net_size"] = None if s is None else {"L": s.layers, "N": s.neurons, "P": s.params}
        return out

    def csv_row(self) -> list:
        s = self.net_size or SizeTriple(0, 0, 0)
        return [
            self.n,
            self.approx_sup,
            self.quant_sup,
            self.impl_sup,
            self.total_sup,
            self.max_abs_u,
            s.layers,
            s.neurons,
            s.params,
        ]


CSV_COLUMNS = ("n", "approx_sup", "quant_sup", "impl_sup", "total_sup", "max_abs_u", "L", "N", "P")


@dataclass(frozen=True)
class RateFit:
    n_values: tuple
    errors: tuple
    slope: float
    intercept: float
    r2: float
    excluded: tuple = ()
    saturated: bool = False

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class BoundCheck:
    kind: str
    n: int
    bound: float
    observed: float
    passed: bool
    witness: tuple


def default_resolution(d: int) -> int:
    return 401 if d <= 2 else 51


def region_axes(region: str, resolution: int, d: int) -> list[np.ndarray]:
    if region == "interior":
        lo, hi = INTERIOR
    elif region == "full":
        lo, hi = 0.0, 1.0
    else:
        raise DomainError(f"region must be 'interior' or 'full', got {region!r}")
    if resolution < 2:
        raise DomainError("grid resolution must be >= 2")
    return [np.linspace(lo, hi, resolution)] * d


def _grid_points(axes) -> np.ndarray:
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))


def _values(obj) -> np.ndarray:
    return np.asarray(getattr(obj, "values", obj), dtype=float)


def decompose_error(
    f: TargetFunction,
    a,
    sigma,
    net: QuantNet | None = None,
    region: str = "interior",
    grid_resolution: int | None = None,
    max_abs_u: float = 0.0,
    direction: int = 1,
) -> ErrorReport:
    """Grid sup-norms of the three error terms (``net=None`` means ``f_NN = f_Q``)."""
    av, sv = _values(a), _values(sigma)
    if av.shape != sv.shape:
        raise DomainError(f"coefficient shape {av.shape} differs from sign shape {sv.shape}")
    d, n = av.ndim, av.shape[0] - 1
    if f.d != d:
        raise DomainError(f"function has d={f.d} but coefficients have d={d}")
    res = grid_resolution or default_resolution(d)
    axes = region_axes(region, res, d)
    fv = f(_grid_points(axes))
    fb = eval_combination_grid(av, axes).ravel()
    fq = eval_combination_grid(sv, axes).ravel()
    if net is None:
        fnn = fq
    else:
        if net.input_arity != d or len(net.outputs) != 1:
            raise DomainError("network must map d inputs to one output")
        fnn = net.evaluate(_grid_points(axes))[:, 0]
    e_a, e_q, e_i = fv - fb, fb - fq, fq - fnn
    return ErrorReport(
        approx_sup=float(np.max(np.abs(e_a))),
        quant_sup=float(np.max(np.abs(e_q))),
        impl_sup=float(np.max(np.abs(e_i))),
        total_sup=float(np.max(np.abs(fv - fnn))),
        region=region,
        grid_resolution=res,
        max_abs_u=float(max_abs_u),
        net_size=None if net is None else net.size(),
        n=n,
        d=d,
        direction=direction,
        pointwise={"f": fv, "f_B": fb, "f_Q": fq, "f_NN": fnn, "axes": axes},
    )


def _check_row(kind, n, bound, err, pts):
    idx = int(np.argmax(err - bound))
    worst = float(np.max(err)) if np.ndim(bound) == 0 else float(err[idx])
    b = float(bound if np.ndim(bound) == 0 else bound[idx])
    ok = bool(np.all(err <= bound + 1e-12))
    return BoundCheck(kind, n, b, worst, ok, tuple(float(v) for v in pts[idx]))


def certify_explicit_bounds(
    f: TargetFunction,
    n_values: Sequence[int],
    lip_const: float = 0.5,
    c2_const: float = 0.25,
    grid_resolution: int | None = None,
    include_sigma_delta: bool = True,
) -> list[BoundCheck]:
    """Evaluate every explicit-constant inequality on the full cube, per ``n``.

    * ``lipschitz``: ``||f - B_n f|| <= lip_const |f|_Lip sqrt(d/n)``
    * ``c2``: ``||f - B_n f|| <= c2_const d^2/n ||f||_{C^2}`` (skipped when ``C^2`` norm is unknown)
    * ``iterate_identity``: ``U_{n,2}(f) = B_n(f_{n,2})`` on the grid to ``1e-10``
    * ``sigma_delta_r1``: first-order quantization error below
      ``min(2, ((n+1) x(1-x))^{-1/2})`` pointwise (needs ``||f|| <= 1``)

    A failing row reports the witness point where the margin is worst.
    """
    d = f.d
    res = grid_resolution or (401 if d == 1 else 101)
    axes = region_axes("full", res, d)
    pts = _grid_points(axes)
    fv = f(pts)
    rows = []
    for n in n_values:
        samples = GridSamples.from_function(f, n, d)
        err = np.abs(fv - eval_combination_grid(samples.values, axes).ravel())
        rows.append(_check_row("lipschitz", n, lip_const * f.lip * math.sqrt(d / n), err, pts))
        if f.c2_norm is not None:
            rows.append(_check_row("c2", n, c2_const * d * d / n * f.c2_norm, err, pts))
        fnr = fnr_grid(samples, 2)
        gap = np.abs(iterated_operator_grid(samples, 2) - apply_along_axes(operator_matrix(n), fnr)).ravel()
        grid_pts = _grid_points([np.arange(n + 1) / n] * d)
        rows.append(_check_row("iterate_identity", n, 1e-10, gap, grid_pts))
        if include_sigma_delta and f.sup_norm <= 1.0:
            q, _ = quantize_directional(samples.values, 1, 1, ONE_BIT, DEFAULT_U_BOUND)
            qerr = np.abs(
                eval_combination_grid(samples.values, axes) - eval_combination_grid(q.values, axes)
            ).ravel()
            x1 = pts[:, 0]
            X = x1 * (1.0 - x1)
            with np.errstate(divide="ignore"):
                env = np.minimum(2.0, np.where(X > 0, ((n + 1) * X) ** -0.5, np.inf))
            rows.append(_check_row("sigma_delta_r1", n, env, qerr, pts))
    return rows


def fit_rate(n_values: Sequence[int], errors: Sequence[float], floor: float = SATURATION_LEVEL) -> RateFit:
    """Least-squares slope of ``log(error)`` against ``log(n)``.

    Errors at or below ``floor`` are treated as saturated at machine
    precision and excluded; ``saturated`` flags that this happened. If fewer
    than two points survive the slope is NaN.
    """
    ns = np.asarray(n_values, dtype=float)
    es = np.asarray(errors, dtype=float)
    if ns.shape != es.shape:
        raise DomainError("n_values and errors differ in length")
    if ns.size < 4:
        raise DomainError("a rate fit needs at least 4 points")
    if np.any(np.diff(ns) <= 0):
        raise DomainError("n_values must be strictly increasing")
    keep = es > floor
    excluded = tuple(int(v) for v in ns[~keep])
    if keep.sum() < 2:
        return RateFit(tuple(int(v) for v in ns), tuple(es.tolist()), math.nan, math.nan, math.nan, excluded, True)
    lx, ly = np.log(ns[keep]), np.log(es[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if tot == 0.0 else 1.0 - float(np.sum(resid**2)) / tot
    return RateFit(
        tuple(int(v) for v in ns),
        tuple(es.tolist()),
        float(slope),
        float(intercept),
        r2,
        excluded,
        bool(excluded),
    )


def run_binary_bernstein(
    f: TargetFunction,
    n: int,
    s: int,
    mu: float,
    activation: str = "quad",
    ell: int = 1,
    region: str = "interior",
    grid_resolution: int | None = None,
    eps: float | None = None,
    u_bound: float = DEFAULT_U_BOUND,
    output_dir=None,
    certify: bool = True,
    cap: int | None = None,
):
    """Samples, coefficients, sigma-delta signs, network, error report.

    Returns ``(report, artifacts)`` where ``artifacts`` holds the coefficient
    tensor, sign tensor, sigma-delta state and network. With ``output_dir``
    the network is written as ``net_n{n}.qnn``.
    """
    from .quad import DEFAULT_OUTPUT_CAP, attach_sign_layer, build_bernstein_quad
    from .relu import attach_sign_layer_relu, build_bernstein_relu, theorem_epsilon

    d = f.d
    spec = SmoothnessSpec(s, mu, f.c2_norm)
    samples = GridSamples.from_function(f, n, d)
    if float(np.max(np.abs(samples.values))) > mu:
        raise PreconditionError(f"samples reach {np.max(np.abs(samples.values)):.6g} > mu={mu}")
    if certify and f.c2_norm is not None and n < min_degree(s, d, f.c2_norm, mu):
        raise PreconditionError(
            f"degree n={n} is below the minimum n={min_degree(s, d, f.c2_norm, mu)} for s={s}, d={d}, mu={mu}"
        )
    a = iterated_coeffs(samples, spec)
    sigma, state = quantize_directional(a, s, ell, ONE_BIT, u_bound)
    cap = cap or DEFAULT_OUTPUT_CAP
    if activation == "quad":
        net = attach_sign_layer(build_bernstein_quad(n, d, cap), sigma)
    elif activation == "relu":
        budget = eps if eps is not None else theorem_epsilon(n, d, s)
        net = attach_sign_layer_relu(build_bernstein_relu(n, d, budget, cap), sigma)
    else:
        raise DomainError(f"activation must be 'quad' or 'relu', got {activation!r}")
    report = decompose_error(f, a, sigma, net, region, grid_resolution, state.max_abs_u, ell)
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_net(net, out / f"net_n{n}.qnn")
    return report, {"coeffs": a, "signs": sigma, "state": state, "net": net}
