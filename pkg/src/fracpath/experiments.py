"""Experiment orchestration: seeds x refinements fan out over a worker pool,
results land in CSV files plus rendered figures.

Determinism contract: every task is a pure function of (config, seed,
refinement); tasks are gathered in declared order and all writes happen on
the main thread, so output bytes are identical at any worker count.  Floats
serialize at 17 significant digits; every CSV has a header row; the manifest
records enough (config hash, code version, RNG stream convention) to re-run
any row in isolation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import berman as bm
from . import fracint as fi
from . import occupation as oc
from . import potential as pt
from . import seminorm as sn
from . import varcomp as vc
from .config import ExperimentConfig
from .core import TimeWindow, fmt, write_csv
from .figures import render_all
from .pathgen import GeneratorSpec, generate, stream
from .verify import run_checks

WINDOW_STREAM_OFFSET = 301  # substream for random window sweeps


def _with_seed(spec: GeneratorSpec, seed: int, level: int) -> GeneratorSpec:
    return GeneratorSpec(spec.family, spec.T, spec.n_steps * (1 << level), spec.dim, spec.params, seed)


def _parallel_map(fn, keys, threads: int):
    if threads <= 1:
        return [fn(k) for k in keys]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, keys))  # map preserves input order


def _summary_rows(rows, columns):
    out = []
    for col in columns:
        vals = [r[col] for r in rows if col in r and np.isfinite(r[col])]
        if not vals:
            continue
        out.append(
            {
                "statistic": col,
                "min": float(np.min(vals)),
                "median": float(np.median(vals)),
                "max": float(np.max(vals)),
                "count": len(vals),
            }
        )
    return out


def _write_rows(path, rows):
    if not rows:
        write_csv(path, ["empty"], [])
        return
    header = list(rows[0].keys())
    write_csv(path, header, [[row.get(k, math.nan) for k in header] for row in rows])


def _write_plotdata(out_dir, name, xlabel, ylabel, pairs):
    write_csv(os.path.join(out_dir, f"plotdata_{name}.csv"), [xlabel, ylabel], pairs)


# ---------------------------------------------------------------- occupation


def _run_occupation(cfg: ExperimentConfig, threads: int, out_dir: str):
    r_lo = cfg.params.get("r_min", 2.0**-7)
    r_hi = cfg.params.get("r_max", 2.0**-2)
    n_r = int(cfg.params.get("n_radii", 6))
    radii = np.geomspace(r_lo, r_hi, n_r)

    def task(key):
        seed, level = key
        path = generate(_with_seed(cfg.generator, seed, level))
        mu = oc.occupation_measure(path)
        centers = path.values[:: max(1, path.n_steps // 64)]
        rep = oc.upper_regularity_exponent(mu, centers, radii)
        sup = np.zeros(len(radii))
        for x in centers:
            sup = np.maximum(sup, oc.ball_mass_profile(mu, x, radii))
        row = {
            "seed": seed,
            "refinement": level,
            "n_steps": path.n_steps,
            "regularity_slope": rep.value,
            "total_mass": mu.total_mass,
            "cell_width": mu.cell_width,
        }
        return row, sup

    keys = [(s, l) for s in cfg.seeds for l in range(cfg.refinements)]
    results = _parallel_map(task, keys, threads)
    rows = [r for r, _ in results]
    sup = results[-1][1]
    _write_plotdata(out_dir, "ball_mass_loglog", "radius", "sup_ball_mass", list(zip(radii, sup)))
    return rows, ["regularity_slope", "total_mass"]


# ----------------------------------------------------------------- potential


def _run_potential(cfg: ExperimentConfig, threads: int, out_dir: str):
    gamma = cfg.params["gamma"]
    q = cfg.params["q"]
    p = cfg.params.get("p")

    def task(key):
        seed, level = key
        path = generate(_with_seed(cfg.generator, seed, level))
        mu = oc.occupation_measure(path)
        dx = cfg.params.get("dx", 0.01) / (1 << level)
        rep = pt.energy(mu, gamma, q, dx=dx)
        row = {
            "seed": seed,
            "refinement": level,
            "n_steps": path.n_steps,
            "dx": dx,
            "energy": rep.value,
            "refinement_delta": rep.refinement_delta if rep.refinement_delta is not None else math.nan,
        }
        if p is not None:
            lhs, rhs = pt.wolff_energy_comparison(mu, gamma, p, dx=dx)
            row["wolff_lhs"] = lhs
            row["wolff_rhs"] = rhs
            row["wolff_ratio"] = lhs / rhs if rhs > 0 else math.nan
        return row

    keys = [(s, l) for s in cfg.seeds for l in range(cfg.refinements)]
    rows = _parallel_map(task, keys, threads)
    pairs = [(r["dx"], r["energy"]) for r in rows if r["seed"] == cfg.seeds[0]]
    _write_plotdata(out_dir, "energy_refinement_loglog", "dx", "energy", pairs)
    cols = ["energy", "wolff_ratio"] if p is not None else ["energy"]
    return rows, cols


# --------------------------------------------------------------- variability


def _run_variability(cfg: ExperimentConfig, threads: int, out_dir: str):
    s = cfg.params["s"]
    p = cfg.params["p"]
    levels = max(cfg.refinements, 3)

    def task(seed):
        # one realization at the finest grid, coarsened for the ladder, so the
        # growth trend measures refinement and not realization variance
        finest = generate(_with_seed(cfg.generator, seed, levels - 1))
        paths = [finest.decimate(1 << (levels - 1 - l)) if l < levels - 1 else finest for l in range(levels)]
        rep = vc.variability_dichotomy(cfg.bv, paths, s, p)
        return {
            "seed": seed,
            "s": s,
            "p": p,
            "value": rep.value,
            "verdict_divergent": 1 if rep.notes["verdict"] == "divergent" else 0,
            "refinement_delta": rep.refinement_delta,
            "singular_fraction_finest": rep.notes["singular_fractions"][-1],
        }, rep.notes["norms"]

    results = _parallel_map(task, list(cfg.seeds), threads)
    rows = [r for r, _ in results]
    norms = results[0][1]
    ns = [cfg.generator.n_steps * (1 << l) for l in range(levels)]
    _write_plotdata(out_dir, "variability_norm_loglog", "n_steps", "norm", list(zip(ns, norms)))
    return rows, ["value", "verdict_divergent"]


# ------------------------------------------------------------------- compose


def _run_compose(cfg: ExperimentConfig, threads: int, out_dir: str):
    def task(key):
        seed, level = key
        path = generate(_with_seed(cfg.generator, seed, level))
        comp = vc.compose(cfg.bv, path)
        finite = np.isfinite(comp.raw_values)
        l2 = float(np.sqrt((comp.raw_values[finite] ** 2).mean())) if finite.any() else math.nan
        return {
            "seed": seed,
            "refinement": level,
            "n_steps": path.n_steps,
            "singular_fraction": comp.singular_fraction,
            "rms_value": l2,
        }, comp

    keys = [(s, l) for s in cfg.seeds for l in range(cfg.refinements)]
    results = _parallel_map(task, keys, threads)
    rows = []
    for (seed, level), (row, comp) in zip(keys, results):
        comp.to_csv(os.path.join(out_dir, f"composition_s{seed}_r{level}.csv"))
        rows.append(row)
    first = results[0][1]
    times = first.t0 + np.arange(len(first.raw_values)) * (first.T / (len(first.raw_values) - 1))
    _write_plotdata(out_dir, "composition_series", "t", "value", list(zip(times, first.raw_values)))
    return rows, ["singular_fraction", "rms_value"]


# ------------------------------------------------------------------ seminorm


def _run_seminorm(cfg: ExperimentConfig, threads: int, out_dir: str):
    params = sn.SeminormParams(cfg.params["theta"], cfg.params["p"])

    def task(key):
        seed, level = key
        path = generate(_with_seed(cfg.generator, seed, level))
        semi = sn.gagliardo_seminorm(path, params)
        full = sn.sobolev_norm(path, params)
        return {
            "seed": seed,
            "refinement": level,
            "n_steps": path.n_steps,
            "gagliardo": semi.value,
            "sobolev": full.value,
            "divergent": 1 if semi.notes["verdict"] == "divergent" else 0,
            "refinement_delta": semi.refinement_delta,
        }

    keys = [(s, l) for s in cfg.seeds for l in range(cfg.refinements)]
    rows = _parallel_map(task, keys, threads)
    pairs = [(r["n_steps"], r["gagliardo"]) for r in rows if r["seed"] == cfg.seeds[0]]
    _write_plotdata(out_dir, "seminorm_refinement_loglog", "n_steps", "gagliardo", pairs)
    return rows, ["gagliardo", "sobolev"]


# -------------------------------------------------------------- key estimate


def _run_key_estimate(cfg: ExperimentConfig, threads: int, out_dir: str):
    p_ = cfg.params

    def one(path):
        lhs, rhs = sn.key_estimate_report(
            cfg.bv, path, p_["s"], p_["theta"], p_["p"], p_["q"], p_["beta"], p_["r"]
        )
        ratio = lhs.value / rhs.value if rhs.value > 0 else math.nan
        return lhs.value, rhs.value, ratio

    def task(seed):
        base = generate(_with_seed(cfg.generator, seed, 0))
        fine = generate(_with_seed(cfg.generator, seed, 1))
        l0, r0, q0 = one(base)
        l1, r1, q1 = one(fine)
        return {
            "seed": seed,
            "lhs": l0,
            "rhs": r0,
            "ratio": q0,
            "lhs_refined": l1,
            "rhs_refined": r1,
            "ratio_refined": q1,
        }

    rows = _parallel_map(task, list(cfg.seeds), threads)
    _write_plotdata(out_dir, "key_estimate_ratio", "seed", "ratio", [(r["seed"], r["ratio"]) for r in rows])
    return rows, ["ratio", "ratio_refined"]


# ----------------------------------------------------------------- integrate


def _run_integrate(cfg: ExperimentConfig, threads: int, out_dir: str):
    p_ = cfg.params

    def task(key):
        seed, level = key
        path = generate(_with_seed(cfg.generator, seed, level))
        if cfg.bv is not None:
            f = vc.compose(cfg.bv, path).path
        else:
            f = path
        rep = fi.zahle_existence_check(f, path, p_["gamma"], p_["p"], p_["delta"], p_["q"])
        return {
            "seed": seed,
            "refinement": level,
            "case_id": f"s{seed}_r{level}",
            "hypothesis_pass": 1 if rep.notes["hypotheses_pass"] else 0,
            "integral": rep.value,
            "ratio": rep.notes["ratio"],
            "refinement_delta": rep.refinement_delta,
            "alpha": rep.resolution["alpha"],
        }, rep

    keys = [(s, l) for s in cfg.seeds for l in range(cfg.refinements)]
    results = _parallel_map(task, keys, threads)
    rows = [r for r, _ in results]
    fi.verdict_rows_to_csv(
        os.path.join(out_dir, "verdicts.csv"), [(row["case_id"], rep) for row, rep in results]
    )
    # alpha sweep of the first case for the report
    path = generate(_with_seed(cfg.generator, cfg.seeds[0], 0))
    f = vc.compose(cfg.bv, path).path if cfg.bv is not None else path
    alphas = np.linspace(0.25, 0.75, 9)
    sweep = []
    for a in alphas:
        try:
            sweep.append((float(a), fi.zahle_integral(f, path, float(a)).value))
        except (ValueError, AssertionError):
            continue
    _write_plotdata(out_dir, "alpha_independence", "alpha", "integral", sweep)
    return rows, ["integral", "ratio"]


# -------------------------------------------------------------------- berman


def _run_berman(cfg: ExperimentConfig, threads: int, out_dir: str):
    p_ = cfg.params
    alpha, p = p_["alpha"], p_["p"]
    n_windows = int(p_.get("n_windows", 50))
    len_lo = p_.get("window_min", 2.0**-6)
    len_hi = p_.get("window_max", 2.0**-3)

    def task(key):
        seed, level = key
        path = generate(_with_seed(cfg.generator, seed, level))
        rng = stream(seed, WINDOW_STREAM_OFFSET)
        window_rows = []
        ks = []
        for _ in range(n_windows):
            length = float(rng.uniform(len_lo, len_hi)) * cfg.generator.T
            start = float(rng.uniform(0.0, cfg.generator.T - length))
            w = TimeWindow(start, start + length)
            try:
                rep = bm.berman_ratio(path, w, alpha, p)
                tau, sigma = bm.tau_sigma(path, w, p, alpha) if p != math.inf else (math.nan, math.nan)
            except ValueError:
                continue
            window_rows.append((w.t_start, w.t_end, tau, sigma, rep.value))
            ks.append(rep.value)
        row = {
            "seed": seed,
            "refinement": level,
            "n_steps": path.n_steps,
            "n_windows": len(ks),
            "min_K": float(np.min(ks)) if ks else math.nan,
            "median_K": float(np.median(ks)) if ks else math.nan,
            "max_K": float(np.max(ks)) if ks else math.nan,
        }
        return row, window_rows

    keys = [(s, l) for s in cfg.seeds for l in range(cfg.refinements)]
    results = _parallel_map(task, keys, threads)
    rows = []
    for (seed, level), (row, window_rows) in zip(keys, results):
        bm.window_sweep_to_csv(os.path.join(out_dir, f"windows_s{seed}_r{level}.csv"), window_rows)
        rows.append(row)
    first_windows = results[0][1]
    pairs = [(t1 - t0, tau) for t0, t1, tau, _, _ in first_windows if np.isfinite(tau)]
    _write_plotdata(out_dir, "tau_scaling_loglog", "window_length", "tau", sorted(pairs))
    return rows, ["min_K", "median_K", "max_K"]


# -------------------------------------------------------------------- verify


def _run_verify(cfg: ExperimentConfig, threads: int, out_dir: str):
    pattern = str(cfg.params.get("filter", "*"))
    results = run_checks(pattern, seed=cfg.seeds[0])
    rows = [
        {
            "check_id": r.check_id,
            "status": "pass" if r.passed else "FAIL",
            "value": r.value,
            "bound": r.bound,
        }
        for r in results
    ]
    # runtimes are for the interactive table only; files must be byte-stable
    with open(os.path.join(out_dir, "verify.csv"), "w", newline="\n") as fh:
        fh.write("check_id,status,value,bound\n")
        for r in rows:
            fh.write(f"{r['check_id']},{r['status']},{fmt(r['value'])},{fmt(r['bound'])}\n")
    return rows, []


_RUNNERS = {
    "occupation": _run_occupation,
    "potential": _run_potential,
    "variability": _run_variability,
    "compose": _run_compose,
    "seminorm": _run_seminorm,
    "key_estimate": _run_key_estimate,
    "integrate": _run_integrate,
    "berman": _run_berman,
    "verify": _run_verify,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1, out_dir: str | None = None) -> str:
    """Run one configured experiment; returns the output directory.

    Emits results.csv (one row per task), summary.csv (family statistics),
    plotdata_*.csv with PNG renderings, experiment-specific files, and
    manifest.txt.  Thread count influences wall time only, never bytes.
    """
    out = out_dir if out_dir is not None else cfg.output_dir
    os.makedirs(out, exist_ok=True)
    rows, summary_cols = _RUNNERS[cfg.experiment](cfg, threads, out)
    _write_rows(os.path.join(out, "results.csv"), rows)
    summary = _summary_rows(rows, summary_cols) if summary_cols else []
    _write_rows(os.path.join(out, "summary.csv"), summary)
    render_all(out)
    _write_manifest(cfg, out)
    return out


def _write_manifest(cfg: ExperimentConfig, out_dir: str) -> None:
    lines = [
        f"config_hash = {cfg.config_hash()}",
        f"code_version = fracpath {__version__}",
        f"numpy_version = {np.__version__}",
        "rng = Philox4x64 keyed by seed; coordinate j uses stream jumped(j); "
        f"estimator substreams: pairs={vc.PAIR_STREAM_OFFSET}, windows={WINDOW_STREAM_OFFSET}",
        f"seeds = {','.join(str(s) for s in cfg.seeds)}",
        f"refinements = {cfg.refinements}",
        "config_begin",
    ]
    lines.extend(cfg.canonical_text().splitlines())
    lines.append("config_end")
    with open(os.path.join(out_dir, "manifest.txt"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
