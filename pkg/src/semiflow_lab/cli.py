"""Configuration-driven experiment runner.

Every laboratory check is a subcommand reading a JSON config and writing
machine-readable reports: report.json (verdicts and summary numbers), one
CSV per table, and metadata.json (wall clock; kept separate so reruns with
the same config produce byte-identical report and CSV bodies).  Exit code
0 iff every verdict passes.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import hashlib
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .analytic import GridSpec, fn_from_json
from .blaschke import BlaschkeProduct, gpv_bound_check, radial_zeros
from .cocycles import (
    BlochGridNorm,
    H2Norm,
    WeightedSemigroup,
    check_cocycle_identity,
    coboundary_similarity_check,
    generator_consistency,
    transfer_conjugation_check,
    weight_fn,
    weight_from_json,
    weight_generator_fd,
)
from .errors import ConfigError, SemiflowError
from .flows import check_semigroup, flow_from_json, flow_trace, generator_fd, map_from_json
from .gap import bloch_gap, construct_case1, construct_case2, separability_witness

SUBCOMMANDS = (
    "flow-trace",
    "flow-check",
    "cocycle-check",
    "generator-check",
    "coboundary-check",
    "transfer-check",
    "gpv",
    "bloch-gap",
    "bloch-gap-auto",
    "separability",
)


def _worker_cap() -> int:
    # Parallel sweeps are currently executed on a single worker; the variable
    # is validated so configs stay portable.
    raw = os.environ.get("SEMIFLOW_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"SEMIFLOW_THREADS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ConfigError("SEMIFLOW_THREADS must be >= 1")
    return cap


def _digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _require(config: dict, key: str):
    if key not in config:
        raise ConfigError(f"config missing required key {key!r}")
    return config[key]


def _pair(v) -> complex:
    return complex(v[0], v[1])


def _random_points(rng, n: int, radius: float):
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if abs(z) <= radius:
            pts.append(z)
    return pts


class Verdicts:
    def __init__(self):
        self.items = []

    def add(self, name: str, passed: bool, value=None, threshold=None):
        self.items.append(
            {
                "name": name,
                "passed": bool(passed),
                "value": value,
                "threshold": threshold,
            }
        )

    @property
    def all_passed(self) -> bool:
        return all(v["passed"] for v in self.items)


def run_flow_trace(config, rng):
    flow = flow_from_json(_require(config, "flow"))
    z0 = _pair(_require(config, "z0"))
    t_max = float(config.get("t_max", 2.0))
    n = int(config.get("samples", 50))
    traj = flow_trace(flow, z0, t_max, n, config.get("tol"))
    verdicts = Verdicts()
    inside = all(abs(complex(row[1], row[2])) < 1.0 for row in traj.to_csv_rows())
    verdicts.add("trajectory-inside-disc", inside)
    tables = {"trajectory": (["t", "re", "im", "dre", "dim"], list(traj.to_csv_rows()))}
    return verdicts, tables


def run_flow_check(config, rng):
    flow = flow_from_json(_require(config, "flow"))
    n = int(config.get("n_points", 50))
    radius = float(config.get("z_radius", 0.8))
    t_lo, t_hi = config.get("t_range", [0.0, 2.0])
    thr_semi = float(config.get("semigroup_threshold", 1e-8))
    ladder = config.get("generator_ladder", [5e-3, 2.5e-3, 1.25e-3])
    thr_gen = float(config.get("generator_threshold", 1e-6))

    rows = []
    worst_semi = 0.0
    for z in _random_points(rng, n, radius):
        s = rng.uniform(t_lo, t_hi)
        t = rng.uniform(t_lo, t_hi)
        resid = check_semigroup(flow, z, s, t)
        worst_semi = max(worst_semi, resid)
        rows.append([z.real, z.imag, s, t, resid])
    verdicts = Verdicts()
    verdicts.add("semigroup-identity", worst_semi <= thr_semi, worst_semi, thr_semi)

    G = flow.generator_fn()
    gen_rows = []
    if G is not None:
        worst_gen = 0.0
        for z in _random_points(rng, min(n, 30), radius):
            est = generator_fd(flow, z, ladder)
            mismatch = abs(est - G.eval(z))
            worst_gen = max(worst_gen, mismatch)
            gen_rows.append([z.real, z.imag, est.real, est.imag, mismatch])
        verdicts.add("generator-round-trip", worst_gen <= thr_gen, worst_gen, thr_gen)
    tables = {
        "semigroup_residuals": (["z_re", "z_im", "s", "t", "residual"], rows),
    }
    if gen_rows:
        tables["generator_roundtrip"] = (
            ["z_re", "z_im", "fd_re", "fd_im", "mismatch"],
            gen_rows,
        )
    return verdicts, tables


def run_cocycle_check(config, rng):
    flow = flow_from_json(_require(config, "flow"))
    weight = weight_from_json(_require(config, "weight"))
    wsg = WeightedSemigroup(flow, weight, int(config.get("quadrature_order", 16)))
    n = int(config.get("n_points", 50))
    radius = float(config.get("z_radius", 0.8))
    t_lo, t_hi = config.get("t_range", [0.0, 1.0])
    thr_id = float(config.get("identity_threshold", 1e-8))
    ladder = config.get("fd_ladder", [1e-2, 5e-3, 2.5e-3])
    thr_fd = float(config.get("fd_threshold", 1e-6))

    rows = []
    worst = 0.0
    for z in _random_points(rng, n, radius):
        s = rng.uniform(t_lo, t_hi)
        t = rng.uniform(t_lo, t_hi)
        resid = check_cocycle_identity(wsg, z, s, t)
        worst = max(worst, resid)
        rows.append([z.real, z.imag, s, t, resid])
    verdicts = Verdicts()
    verdicts.add("cocycle-identity", worst <= thr_id, worst, thr_id)

    g_tree = weight_fn(wsg)
    worst_fd = 0.0
    fd_rows = []
    for z in _random_points(rng, min(n, 20), radius):
        est = weight_generator_fd(wsg, z, ladder)
        mismatch = abs(est - g_tree.eval(z))
        worst_fd = max(worst_fd, mismatch)
        fd_rows.append([z.real, z.imag, est.real, est.imag, mismatch])
    verdicts.add("weight-derivative-round-trip", worst_fd <= thr_fd, worst_fd, thr_fd)
    tables = {
        "cocycle_identity": (["z_re", "z_im", "s", "t", "residual"], rows),
        "weight_roundtrip": (["z_re", "z_im", "fd_re", "fd_im", "mismatch"], fd_rows),
    }
    return verdicts, tables


def _norm_from_config(obj):
    kind = obj.get("type", "h2")
    if kind == "h2":
        return H2Norm(N=int(obj.get("N", 64)), r=float(obj.get("r", 0.9)))
    if kind == "bloch":
        return BlochGridNorm(GridSpec.from_json(obj["grid"]))
    raise ConfigError(f"unknown norm type {kind!r}")


def run_generator_check(config, rng):
    flow = flow_from_json(_require(config, "flow"))
    weight = weight_from_json(_require(config, "weight"))
    f = fn_from_json(_require(config, "function"))
    wsg = WeightedSemigroup(flow, weight, int(config.get("quadrature_order", 16)))
    norm = _norm_from_config(config.get("norm", {}))
    ladder = config.get("t_ladder", [0.1 * 2 ** (-k) for k in range(7)])
    lo, hi = config.get("ratio_window", [0.3, 0.7])
    table = generator_consistency(wsg, f, norm, ladder)
    verdicts = Verdicts()
    ratios = table.ratios()
    if table.max_residual() <= 1e-9:
        # residuals at the integration-noise floor carry no decay rate
        verdicts.add("consistency-trivial-zero", True, table.max_residual(), 1e-9)
    else:
        ok = bool(ratios) and all(lo <= q <= hi for q in ratios)
        worst = max((abs(q - 0.5) for q in ratios), default=None)
        verdicts.add("consistency-first-order-decay", ok, worst, hi - 0.5)
    tables = {"consistency": (["t", "residual", "ratio"], list(table.to_csv_rows()))}
    return verdicts, tables


def run_coboundary_check(config, rng):
    flow = flow_from_json(_require(config, "flow"))
    alpha = fn_from_json(_require(config, "alpha"))
    f = fn_from_json(_require(config, "function"))
    n = int(config.get("n_points", 50))
    radius = float(config.get("z_radius", 0.8))
    t_lo, t_hi = config.get("t_range", [0.0, 1.0])
    thr = float(config.get("threshold", 1e-12))
    rows = []
    worst = 0.0
    for z in _random_points(rng, n, radius):
        t = rng.uniform(t_lo, t_hi)
        resid = coboundary_similarity_check(alpha, flow, f, z, t)
        worst = max(worst, resid)
        rows.append([z.real, z.imag, t, resid])
    verdicts = Verdicts()
    verdicts.add("coboundary-similarity", worst <= thr, worst, thr)
    return verdicts, {"similarity": (["z_re", "z_im", "t", "residual"], rows)}


def run_transfer_check(config, rng):
    h = map_from_json(config.get("map", "cayley"))
    flow = flow_from_json(_require(config, "flow"))
    weight = weight_from_json(_require(config, "weight"))
    f = fn_from_json(_require(config, "function"))
    wsg = WeightedSemigroup(flow, weight, int(config.get("quadrature_order", 16)))
    n = int(config.get("n_points", 20))
    radius = float(config.get("z_radius", 0.7))
    t = float(config.get("t", 0.5))
    thr = float(config.get("threshold", 1e-9))
    rows = []
    worst = 0.0
    for z in _random_points(rng, n, radius):
        resid = transfer_conjugation_check(h, wsg, f, z, t)
        worst = max(worst, resid)
        rows.append([z.real, z.imag, t, resid])
    verdicts = Verdicts()
    verdicts.add("conjugation-round-trip", worst <= thr, worst, thr)
    return verdicts, {"transfer": (["z_re", "z_im", "t", "residual"], rows)}


def _zeros_from_config(config):
    if "zeros" in config:
        return tuple(_pair(p) for p in config["zeros"])
    fam = config.get("family", {"kind": "geometric", "count": 12})
    if fam.get("kind", "geometric") == "geometric":
        return radial_zeros(int(fam.get("count", 12)), float(fam.get("ratio", 0.5)))
    raise ConfigError("provide either 'zeros' or a geometric 'family'")


def run_gpv(config, rng):
    zeros = _zeros_from_config(config)
    alpha = float(config.get("alpha", 0.1))
    samples = int(config.get("samples_per_disc", 80))
    B = BlaschkeProduct(zeros)
    report = gpv_bound_check(B, alpha=alpha, samples_per_disc=samples)
    verdicts = Verdicts()
    verdicts.add("pseudo-discs-disjoint", report.disjoint, report.min_pairwise_rho, report.rho_threshold)
    verdicts.add("derivative-lower-bound-positive", report.beta_hat > 0.0, report.beta_hat, 0.0)
    stab = config.get("stability_counts")
    if stab:
        betas = []
        for count in stab:
            rep = gpv_bound_check(
                BlaschkeProduct(radial_zeros(int(count))), alpha=alpha, samples_per_disc=samples
            )
            betas.append(rep.beta_hat)
        factor = max(betas) / min(betas)
        verdicts.add("beta-hat-stable", factor < 2.0, factor, 2.0)
    rows = [
        [r.index, r.center.real, r.center.imag, r.deflated, r.beta_local]
        for r in report.per_zero
    ]
    tables = {"gpv": (["index", "re", "im", "deflated", "beta_local"], rows)}
    return verdicts, tables, {"gpv_report": report.to_json()}


def run_bloch_gap(config, rng):
    flow = flow_from_json(_require(config, "flow"))
    weights = [weight_from_json(w) for w in _require(config, "weights")]
    gamma0 = _pair(config.get("gamma0", [1.0, 0.0]))
    N = int(config.get("N", 6))
    t_start = float(config.get("t_start", 0.5))
    gc = construct_case1(flow, gamma0, N, t_start)
    base = config.get("grid", {"radii": [0.0, 0.3, 0.6, 0.85], "angular": [1, 8, 16, 16], "points": []})
    pts = [ [lv.r, 0.0] for lv in gc.levels ]
    grid = GridSpec.from_json(
        {**base, "points": list(base.get("points", [])) + pts}
    )
    verdicts = Verdicts()
    margins = gc.geom_margins()
    worst_margin = min(
        [m["first"] for m in margins]
        + [m["second"] for m in margins if m["second"] is not None]
    )
    verdicts.add("geometric-inequality-margins", worst_margin >= 1e-3, worst_margin, 1e-3)
    verdicts.add(
        "time-vanishing", gc.levels[-1].t <= gc.levels[0].t / 32.0,
        gc.levels[-1].t / gc.levels[0].t, 1.0 / 32.0,
    )

    tables = {}
    bound_sets = []
    for idx, weight in enumerate(weights):
        wsg = WeightedSemigroup(flow, weight, int(config.get("quadrature_order", 16)))
        rep = bloch_gap(gc, wsg, grid)
        bound_sets.append(tuple(r.lower_bound for r in rep.rows))
        worst_cancel = max(
            r.cancellation / max(abs(r.lower_bound / (1.0 - r.r)), 1e-300)
            for r in rep.rows
        )
        verdicts.add(f"cancellation-weight-{idx}", worst_cancel <= 1e-8, worst_cancel, 1e-8)
        slack = 1e-6
        verdicts.add(
            f"grid-gap-dominates-bound-weight-{idx}",
            all(r.grid_gap >= r.lower_bound - slack for r in rep.rows),
        )
        verdicts.add(f"uniform-gap-weight-{idx}", rep.delta_hat > 0.0, rep.delta_hat, 0.0)
        tables[f"gap_weight_{idx}"] = (
            ["n", "t_n", "r_n", "w_re", "w_im", "lower_bound", "grid_gap", "cancellation_residual"],
            list(rep.to_csv_rows()),
        )
    identical = all(bs == bound_sets[0] for bs in bound_sets)
    verdicts.add("lower-bounds-weight-independent", identical)
    return verdicts, tables


def run_bloch_gap_auto(config, rng):
    flow = flow_from_json(_require(config, "flow"))
    N = int(config.get("N", 6))
    gc = construct_case2(flow, N, float(config.get("t_first_cap", 1.0)))
    angle_thr = float(config.get("angle_threshold", 1e-9))
    lo, hi = config.get("ratio_window", [0.8, 1.2])
    from_n = int(config.get("ratio_from_n", 4))
    sep_thr = float(config.get("min_separation", 0.1))
    verdicts = Verdicts()
    worst_angle = max(
        abs(cmath.phase(lv.w - 1.0) - gc.target_angle) for lv in gc.levels
    )
    verdicts.add("angle-equation-solved", worst_angle <= angle_thr, worst_angle, angle_thr)
    late = [q for lv, q in zip(gc.levels, gc.ratios) if lv.n >= from_n]
    verdicts.add(
        "depth-ratio-window",
        all(lo <= q <= hi for q in late) and len(late) > 0,
        max(late) if late else None,
        hi,
    )
    verdicts.add(
        "pseudohyperbolic-separation", gc.min_separation >= sep_thr, gc.min_separation, sep_thr
    )
    rows = [
        [lv.n, lv.t, lv.r, lv.w.real, lv.w.imag, q]
        for lv, q in zip(gc.levels, gc.ratios)
    ]
    return verdicts, {"case2": (["n", "t", "r", "w_re", "w_im", "depth_ratio"], rows)}


def run_separability(config, rng):
    zeros = _zeros_from_config(config)
    B = BlaschkeProduct(zeros)
    rot_cfg = config.get("rotations", {"count": 8})
    if isinstance(rot_cfg, list):
        rotations = [float(v) for v in rot_cfg]
    else:
        count = int(rot_cfg.get("count", 8))
        rotations = [2.0 * math.pi * k / count for k in range(count)]
    base = config.get("grid", {"radii": [0.0, 0.3, 0.6, 0.85], "angular": [1, 16, 32, 32], "points": []})
    pts = list(base.get("points", []))
    for a in zeros:
        for th in rotations:
            q = complex(a) * cmath.exp(1j * th)
            pts.append([q.real, q.imag])
    grid = GridSpec.from_json({**base, "points": pts})
    rep = separability_witness(B, rotations, grid)
    verdicts = Verdicts()
    if rep.eps_hat is None:
        verdicts.add("pairwise-gaps-positive", True, None, 0.0)
        return verdicts, {"separability": (["theta_i", "theta_j", "gap"], [])}
    verdicts.add("pairwise-gaps-positive", rep.eps_hat > 0.0, rep.eps_hat, 0.0)
    if config.get("refine", True):
        rep2 = separability_witness(B, rotations, grid.refine())
        drift = abs(rep2.eps_hat - rep.eps_hat) / rep.eps_hat
        verdicts.add("eps-hat-grid-stable", drift <= 0.2, drift, 0.2)
    return verdicts, {
        "separability": (["theta_i", "theta_j", "gap"], list(rep.to_csv_rows()))
    }


RUNNERS = {
    "flow-trace": run_flow_trace,
    "flow-check": run_flow_check,
    "cocycle-check": run_cocycle_check,
    "generator-check": run_generator_check,
    "coboundary-check": run_coboundary_check,
    "transfer-check": run_transfer_check,
    "gpv": run_gpv,
    "bloch-gap": run_bloch_gap,
    "bloch-gap-auto": run_bloch_gap_auto,
    "separability": run_separability,
}


def _format_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write_atomic(path: str, data: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_outputs(out_dir, subcommand, config, verdicts, tables, extras, wall_clock):
    os.makedirs(out_dir, exist_ok=True)
    report = {
        "experiment": subcommand,
        "config_digest": _digest(config),
        "passed": verdicts.all_passed,
        "verdicts": verdicts.items,
        "tables": sorted(tables),
        "version": __version__,
    }
    _write_atomic(
        os.path.join(out_dir, "report.json"),
        json.dumps(report, indent=2, sort_keys=True) + "\n",
    )
    for name, (header, rows) in tables.items():
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
        _write_atomic(os.path.join(out_dir, f"{name}.csv"), buf.getvalue())
    for name, payload in extras.items():
        _write_atomic(
            os.path.join(out_dir, f"{name}.json"),
            json.dumps(payload, indent=2, sort_keys=True) + "\n",
        )
    meta = {"wall_clock_seconds": wall_clock, "timestamp": time.time()}
    _write_atomic(
        os.path.join(out_dir, "metadata.json"), json.dumps(meta, indent=2) + "\n"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="semiflow-lab",
        description="Run semiflow/cocycle laboratory experiments from JSON configs.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for random test points")
    args = parser.parse_args(argv)

    try:
        _worker_cap()
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    rng = np.random.RandomState(args.seed)
    start = time.perf_counter()
    try:
        result = RUNNERS[args.subcommand](config, rng)
        verdicts, tables = result[0], result[1]
        extras = result[2] if len(result) > 2 else {}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SemiflowError as exc:
        verdicts = Verdicts()
        verdicts.add("execution", False)
        report = {
            "experiment": args.subcommand,
            "config_digest": _digest(config),
            "passed": False,
            "error": {"type": type(exc).__name__, "message": str(exc)},
            "verdicts": verdicts.items,
            "tables": [],
            "version": __version__,
        }
        os.makedirs(args.out, exist_ok=True)
        _write_atomic(
            os.path.join(args.out, "report.json"),
            json.dumps(report, indent=2, sort_keys=True) + "\n",
        )
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - start

    _write_outputs(args.out, args.subcommand, config, verdicts, tables, extras, wall)
    for v in verdicts.items:
        status = "PASS" if v["passed"] else "FAIL"
        print(f"[{status}] {v['name']}" + (f" value={v['value']}" if v["value"] is not None else ""))
    return 0 if verdicts.all_passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
