"""Flat key = value experiment configuration.

The format is line oriented on purpose (diffs and manifests stay readable):
`#` starts a comment, sections are dotted prefixes, lists are comma separated.

    experiment = berman
    generator.family = fbm
    generator.hurst = 0.5
    generator.n_steps = 4096
    params.alpha = -0.3
    params.p = 2
    seeds = 1,2,3
    refinements = 2
    output_dir = out

Exponent ranges are validated eagerly against the target operation's
preconditions before any compute; a bad config never starts a run.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .bvfun import BVFunction
from .pathgen import FAMILIES, GeneratorSpec

EXPERIMENTS = (
    "occupation",
    "potential",
    "variability",
    "compose",
    "seminorm",
    "key_estimate",
    "integrate",
    "berman",
    "verify",
)


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _parse_scalar(raw: str):
    low = raw.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _floats(raw: str):
    return [float(_parse_scalar(tok)) for tok in raw.split(",") if tok.strip()]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    generator: GeneratorSpec
    bv: BVFunction | None
    params: dict
    seeds: tuple
    refinements: int
    output_dir: str
    raw: dict = field(default_factory=dict)

    def canonical_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in sorted(self.raw.items())) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def _build_generator(kv: dict) -> GeneratorSpec:
    family = kv.get("generator.family")
    if family is None:
        raise ConfigError("missing key generator.family")
    if family not in FAMILIES:
        raise ConfigError(f"unknown generator.family {family!r}")
    params: dict = {}
    if family == "fbm":
        if "generator.hurst" not in kv:
            raise ConfigError("fbm requires generator.hurst")
        params["hurst"] = float(kv["generator.hurst"])
        if not 0.0 < params["hurst"] < 1.0:
            raise ConfigError("generator.hurst must be in (0, 1)")
    if family == "stable_levy":
        if "generator.alpha" not in kv:
            raise ConfigError("stable_levy requires generator.alpha")
        params["alpha"] = float(kv["generator.alpha"])
        if not 0.0 < params["alpha"] <= 2.0:
            raise ConfigError("generator.alpha must be in (0, 2]")
    if family == "linear" and "generator.slopes" in kv:
        params["slopes"] = _floats(kv["generator.slopes"])
    if family == "step" and "generator.jumps" in kv:
        try:
            params["jumps"] = [
                (float(pair.split(":")[0]), float(pair.split(":")[1]))
                for pair in kv["generator.jumps"].split(",")
            ]
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"generator.jumps must be time:height pairs ({exc})")
    if family == "piecewise_linear":
        if "generator.breakpoints" not in kv or "generator.levels" not in kv:
            raise ConfigError("piecewise_linear requires generator.breakpoints and generator.levels")
        params["breakpoints"] = _floats(kv["generator.breakpoints"])
        params["levels"] = _floats(kv["generator.levels"])
    if family == "weierstrass":
        for name in ("a", "b", "lam"):
            if f"generator.{name}" in kv:
                params[name] = float(kv[f"generator.{name}"])
    try:
        return GeneratorSpec(
            family=family,
            T=float(kv.get("generator.T", 1.0)),
            n_steps=int(kv.get("generator.n_steps", 1024)),
            dim=int(kv.get("generator.dim", 1)),
            params=params,
            seed=0,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _build_bv(kv: dict) -> BVFunction | None:
    kind = kv.get("bv.kind")
    if kind is None:
        return None
    try:
        if kind == "indicator_interval":
            return BVFunction.indicator_interval(float(kv["bv.a"]), float(kv["bv.b"]))
        if kind == "staircase":
            return BVFunction.staircase(_floats(kv["bv.locations"]), _floats(kv["bv.heights"]))
        if kind == "indicator_box":
            return BVFunction.indicator_box(_floats(kv["bv.lo"]), _floats(kv["bv.hi"]))
        if kind == "indicator_ball":
            return BVFunction.indicator_ball(_floats(kv["bv.center"]), float(kv["bv.radius"]))
        if kind == "smooth_bump":
            return BVFunction.smooth_bump(
                _floats(kv["bv.center"]), float(kv["bv.radius"]), float(kv.get("bv.height", 1.0))
            )
        if kind == "riesz_kernel_kind":
            return BVFunction.riesz_kernel_kind(
                float(kv["bv.gamma"]), int(kv["bv.dim"]), float(kv.get("bv.cutoff", 4.0))
            )
    except KeyError as exc:
        raise ConfigError(f"bv.kind {kind!r} is missing field {exc}")
    except ValueError as exc:
        raise ConfigError(str(exc))
    raise ConfigError(f"unknown bv.kind {kind!r}")


def _validate_params(experiment: str, params: dict, generator: GeneratorSpec, bv) -> None:
    n = generator.dim

    def need(name):
        if name not in params:
            raise ConfigError(f"experiment {experiment!r} requires params.{name}")
        return params[name]

    if experiment == "occupation":
        pass
    elif experiment == "potential":
        gamma, q = need("gamma"), need("q")
        if not 0.0 < gamma < n:
            raise ConfigError("params.gamma must be in (0, dim)")
        if q < 1.0:
            raise ConfigError("params.q must be >= 1")
        p = params.get("p")
        if p is not None and not (p > 1.0 and gamma < n / p):
            raise ConfigError("params.p must satisfy p > 1 and gamma < dim/p")
    elif experiment in ("variability", "compose"):
        if bv is None:
            raise ConfigError(f"experiment {experiment!r} requires a bv.* section")
        s = need("s")
        if not (0.0 < s < 1.0 and 0.0 < 1.0 - s < n):
            raise ConfigError("params.s must be in (0, 1) with 1 - s < dim")
        if need("p") < 1.0:
            raise ConfigError("params.p must be >= 1")
    elif experiment == "seminorm":
        theta, p = need("theta"), need("p")
        if not 0.0 < theta < 1.0:
            raise ConfigError("params.theta must be in (0, 1)")
        if p < 1.0:
            raise ConfigError("params.p must be >= 1")
    elif experiment == "key_estimate":
        if bv is None:
            raise ConfigError("experiment 'key_estimate' requires a bv.* section")
        s, theta, p, q, beta, r = (need(k) for k in ("s", "theta", "p", "q", "beta", "r"))
        inv_q = 0.0 if math.isinf(q) else 1.0 / q
        if 1.0 / p + s * inv_q > 1.0 / r + 1e-12:
            raise ConfigError("key estimate requires 1/p + s/q <= 1/r")
        if not beta < s * theta:
            raise ConfigError("key estimate requires beta < s * theta")
    elif experiment == "integrate":
        gamma, p, delta, q = (need(k) for k in ("gamma", "p", "delta", "q"))
        for name, v in (("gamma", gamma), ("delta", delta)):
            if not 0.0 < v < 1.0:
                raise ConfigError(f"params.{name} must be in (0, 1)")
        if p < 1.0 or q < 1.0:
            raise ConfigError("params.p and params.q must be >= 1")
    elif experiment == "berman":
        alpha, p = need("alpha"), need("p")
        inv_p = 0.0 if math.isinf(p) else 1.0 / p
        if not p > 1.0:
            raise ConfigError("params.p must be > 1")
        if not -n * inv_p < alpha < n - n * inv_p:
            raise ConfigError("params.alpha outside the admissible range (-n/p, n - n/p)")
    elif experiment == "verify":
        pass
    else:
        raise ConfigError(f"unknown experiment {experiment!r}")


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_text(fh.read())


def config_from_text(text: str) -> ExperimentConfig:
    kv = parse_config_text(text)
    experiment = kv.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    generator = _build_generator(kv) if experiment != "verify" else _default_generator(kv)
    bv = _build_bv(kv)
    params = {
        key.split(".", 1)[1]: _parse_scalar(val) for key, val in kv.items() if key.startswith("params.")
    }
    _validate_params(experiment, params, generator, bv)
    seeds = tuple(int(s) for s in kv.get("seeds", "0").split(",") if s.strip())
    if not seeds:
        raise ConfigError("need at least one seed")
    refinements = int(kv.get("refinements", 1))
    if refinements < 1:
        raise ConfigError("refinements must be >= 1")
    return ExperimentConfig(
        experiment=experiment,
        generator=generator,
        bv=bv,
        params=params,
        seeds=seeds,
        refinements=refinements,
        output_dir=kv.get("output_dir", "fracpath_out"),
        raw=kv,
    )


def _default_generator(kv: dict) -> GeneratorSpec:
    if "generator.family" in kv:
        return _build_generator(kv)
    return GeneratorSpec("linear", n_steps=256)
