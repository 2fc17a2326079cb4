"""CSV/JSON artifacts for experiment results.

CSV numbers use 17 significant digits so values round-trip bit-exactly. Each
CSV has a JSON sidecar holding the master seed, package versions and the full
resolved config.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .dynamics import ModelParams, Trajectory
from .experiments import DIRECTIONS, DistReport, LazarusReport, SweepReport
from .stats import Histogram


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n")


def artifact_meta(master_seed: int, config: dict | None = None) -> dict:
    return {
        "master_seed": int(master_seed),
        "versions": {"predtrade": __version__, "numpy": np.__version__},
        "config": config,
    }


def _outdir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def emit_curve(traj: Trajectory, path, params: ModelParams, master_seed: int,
               config: dict | None = None) -> list[Path]:
    out = _outdir(path)
    csv_path, json_path = out / "curve.csv", out / "summary.json"
    write_csv(csv_path, ["s", "survival_ratio"], zip(traj.s, traj.survival_ratio))
    summary = {
        "s1": traj.s1, "s_inf": traj.s_inf, "terminated_by": traj.terminated_by,
        "n": traj.n, "alpha": params.alpha, "g": params.g, "seed": master_seed,
        "mode": params.mode, "s_end": traj.final_state.s,
    }
    write_json(json_path, {**summary, **artifact_meta(master_seed, config)})
    return [csv_path, json_path]


SWEEP_COLUMNS = ["p", "scheme", "dimension", "s_inf_mean", "s_inf_stderr", "n_configs"]


def emit_sweep(report: SweepReport, path, master_seed: int, config: dict | None = None) -> list[Path]:
    out = _outdir(path)
    csv_path, json_path = out / "sweep.csv", out / "sweep.json"
    rows = [(e.p, e.scheme.value, e.dimension.value, e.s_inf_mean, e.s_inf_stderr, e.n_configs)
            for e in report.sorted().entries]
    write_csv(csv_path, SWEEP_COLUMNS, rows)
    entries = [{"p": e.p, "scheme": e.scheme, "dimension": e.dimension, "s_inf_mean": e.s_inf_mean,
                "s_inf_stderr": e.s_inf_stderr, "n_configs": e.n_configs,
                "s_inf_values": list(e.s_inf_values)} for e in report.sorted().entries]
    write_json(json_path, {"entries": entries, **artifact_meta(master_seed, config)})
    return [csv_path, json_path]


def _hist_rows(h: Histogram):
    e = h.bin_edges
    yield (-math.inf, e[0], h.underflow)
    for lo, hi, c in zip(e[:-1], e[1:], h.counts):
        yield (lo, hi, c)
    yield (e[-1], math.inf, h.overflow)


def read_histogram_csv(path) -> Histogram:
    rows = [line.split(",") for line in Path(path).read_text().splitlines()[1:] if line]
    lo = [float(r[0]) for r in rows]
    hi = [float(r[1]) for r in rows]
    counts = [int(r[2]) for r in rows]
    edges = np.array(lo[1:])
    return Histogram(edges, np.array(counts[1:-1], dtype=np.int64), counts[0], counts[-1])


def emit_distributions(report: DistReport, path, master_seed: int,
                       config: dict | None = None) -> list[Path]:
    out = _outdir(path)
    written = []
    for d in DIRECTIONS:
        p = out / f"pairwise_{d}.csv"
        write_csv(p, ["bin_lo", "bin_hi", "count"], _hist_rows(report.pairwise[d]))
        written.append(p)
    p = out / "cumulative.csv"
    write_csv(p, ["bin_lo", "bin_hi", "count"], _hist_rows(report.cumulative))
    written.append(p)
    p = out / "distributions.json"
    write_json(p, {
        "mu": report.mu, "s1_target": report.s1_target,
        "frac_against_odds_pairwise": report.frac_against_odds_pairwise,
        "frac_against_odds_cumulative": report.frac_against_odds_cumulative,
        "n_survivors": report.n_survivors, "s_inf": report.s_inf,
        **artifact_meta(master_seed, config),
    })
    written.append(p)
    return written


def emit_lazarus(report: LazarusReport, path, master_seed: int, config: dict | None = None) -> list[Path]:
    out = _outdir(path)
    csv_path, json_path = out / "xcm.csv", out / "lazarus.json"
    write_csv(csv_path, ["s", "x_cm"], report.xcm_series)
    write_json(json_path, {
        "center": report.center, "class_used": report.class_used, "n_links": report.n_links,
        "baseline_fate": report.baseline_fate, "new_fate": report.new_fate,
        "asymptotic_log_slope": report.asymptotic_log_slope, "targets": list(report.targets),
        **artifact_meta(master_seed, config),
    })
    return [csv_path, json_path]


def emit_crossover(fates: list, flip: int | None, path, center: int, master_seed: int,
                   config: dict | None = None) -> list[Path]:
    out = _outdir(path)
    csv_path, json_path = out / "crossover.csv", out / "crossover.json"
    write_csv(csv_path, ["n_links", "fate"], [(n, f.value) for n, f in fates])
    write_json(json_path, {"center": center, "flip_n": flip, **artifact_meta(master_seed, config)})
    return [csv_path, json_path]
