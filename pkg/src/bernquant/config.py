"""Run configuration: JSON schema, defaults and field-level validation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError, NetFormatError
from .functions import BUILTIN_NAMES, TargetFunction, builtin, from_samples
from .tensorio import load_tensor

__all__ = ["SCHEMA_VERSION", "Config", "parse_config", "config_from_dict", "DEFAULTS"]

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "function": {"name": "sine", "scale": 0.4},
    "d": 1,
    "s": 2,
    "mu": 0.5,
    "n": None,
    "n_sweep": None,
    "ell": 1,
    "activation": "quad",
    "eps": None,
    "grid_resolution": 401,
    "region": "interior",
    "output_dir": "bernquant_out",
    "seed": 0,
    "caps": {"max_d": 3, "max_outputs": 1 << 20},
    "u_bound": 50.0,
}


@dataclass(frozen=True)
class Config:
    function: dict
    d: int
    s: int
    mu: float
    n_values: tuple
    ell: int = 1
    activation: str = "quad"
    eps: float | None = None
    grid_resolution: int = 401
    region: str = "interior"
    output_dir: str = "bernquant_out"
    seed: int = 0
    caps: dict = field(default_factory=lambda: dict(DEFAULTS["caps"]))
    u_bound: float = 50.0
    schema_version: int = SCHEMA_VERSION
    base_dir: str = "."

    def target(self) -> TargetFunction:
        fn = self.function
        if "sample_file" in fn:
            return from_samples(load_tensor(Path(self.base_dir) / fn["sample_file"]), name=fn["sample_file"])
        return builtin(fn["name"], self.d, fn.get("scale", 0.4))

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("base_dir")
        out["n_values"] = list(self.n_values)
        return out

    def with_overrides(self, **kw) -> "Config":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "n" in kw:
            kw["n_values"] = (int(kw.pop("n")),)
        return config_from_dict({**self.to_dict(), **kw}, self.base_dir)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def config_from_dict(raw: dict, base_dir=".") -> Config:
    """Fill defaults and validate; every problem is reported as ``field: message``."""
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: config must be a JSON object"])
    known = set(DEFAULTS) | {"n_values"}
    problems = [f"{k}: unknown field" for k in sorted(raw) if k not in known]
    cfg = {**DEFAULTS, **raw}
    caps = {**DEFAULTS["caps"], **(cfg.get("caps") or {})}

    if cfg["schema_version"] != SCHEMA_VERSION:
        problems.append(f"schema_version: expected {SCHEMA_VERSION}, got {cfg['schema_version']!r}")
    d = cfg["d"]
    if not _is_int(d) or d < 1:
        problems.append("d: must be an integer >= 1")
    elif d > caps["max_d"]:
        problems.append(f"d: {d} exceeds the cap max_d={caps['max_d']}")
    s = cfg["s"]
    if not _is_int(s) or s < 1:
        problems.append("s: must be an integer >= 1")
    mu = cfg["mu"]
    if not _is_num(mu) or not 0.0 < mu < 1.0:
        problems.append(f"mu: must lie in (0, 1), got {mu!r}")

    if "n_values" in raw:
        ns = raw["n_values"]
    elif cfg["n_sweep"] is not None:
        ns = cfg["n_sweep"]
    elif cfg["n"] is not None:
        ns = [cfg["n"]]
    else:
        ns = [64]
    if not isinstance(ns, (list, tuple)) or not ns or not all(_is_int(v) and v >= 1 for v in ns):
        problems.append("n_sweep: must be a non-empty list of integers >= 1")
        ns = []
    elif sorted(set(ns)) != list(ns):
        problems.append("n_sweep: must be strictly increasing")
    if cfg["n"] is not None and cfg["n_sweep"] is not None:
        problems.append("n: give either n or n_sweep, not both")

    ell = cfg["ell"]
    if not _is_int(ell) or (_is_int(d) and not 1 <= ell <= d):
        problems.append(f"ell: must be an integer in 1..d, got {ell!r}")
    if cfg["activation"] not in ("quad", "relu"):
        problems.append(f"activation: must be 'quad' or 'relu', got {cfg['activation']!r}")
    eps = cfg["eps"]
    if eps is not None and (not _is_num(eps) or not 0.0 < eps < 1.0):
        problems.append("eps: must lie in (0, 1)")
    if not _is_int(cfg["grid_resolution"]) or cfg["grid_resolution"] < 2:
        problems.append("grid_resolution: must be an integer >= 2")
    if cfg["region"] not in ("interior", "full"):
        problems.append("region: must be 'interior' or 'full'")
    if not _is_int(cfg["seed"]):
        problems.append("seed: must be an integer")
    if not _is_num(cfg["u_bound"]) or cfg["u_bound"] <= 0:
        problems.append("u_bound: must be positive")

    fn = cfg["function"]
    if not isinstance(fn, dict):
        problems.append("function: must be an object with 'name' or 'sample_file'")
    elif "sample_file" in fn:
        path = Path(base_dir) / fn["sample_file"]
        try:
            vals = load_tensor(path)
        except OSError as exc:
            problems.append(f"function.sample_file: cannot read {path}: {exc.strerror}")
        except NetFormatError as exc:
            problems.append(f"function.sample_file: {exc}")
        else:
            if len(ns) != 1:
                problems.append("n_sweep: a sample file fixes a single n")
            elif _is_int(d):
                want = (ns[0] + 1,) * d
                if vals.shape != want:
                    problems.append(
                        f"function.sample_file: shape {vals.shape} does not match expected (n+1)^d = {want}"
                    )
    else:
        if fn.get("name") not in BUILTIN_NAMES:
            problems.append(f"function.name: must be one of {', '.join(BUILTIN_NAMES)}")
        if not _is_num(fn.get("scale", 0.4)):
            problems.append("function.scale: must be a number")
    if problems:
        raise ConfigError(problems)
    return Config(
        function=dict(fn),
        d=d,
        s=s,
        mu=float(mu),
        n_values=tuple(ns),
        ell=ell,
        activation=cfg["activation"],
        eps=eps,
        grid_resolution=cfg["grid_resolution"],
        region=cfg["region"],
        output_dir=cfg["output_dir"],
        seed=cfg["seed"],
        caps=caps,
        u_bound=float(cfg["u_bound"]),
        base_dir=str(base_dir),
    )


def parse_config(path) -> Config:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError([f"<file>: cannot read {path}: {exc.strerror}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"<file>: invalid JSON at line {exc.lineno}: {exc.msg}"]) from None
    return config_from_dict(raw, path.parent)
