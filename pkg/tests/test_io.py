import csv
import json

import numpy as np
import pytest

from predtrade import io
from predtrade.cli import main
from predtrade.dynamics import ModelParams, run
from predtrade.experiments import DIRECTIONS, Scheme, SweepEntry, SweepReport, survivor_distributions
from predtrade.topology import GraphKind, read_edge_list, ring


def _cli(tmp_path, *args):
    return main([*args, "--out", str(tmp_path / "out"), "--threads", "1"])


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 2.0 ** -1074, 1.7976931348623157e308, -0.0):
        assert float(io.fmt(v)) == v
    assert io.fmt(float("inf")) == "inf" and io.fmt(3) == "3"


def test_emit_curve_no_deaths(tmp_path):
    tr = run([2.0, 3.0, 4.0], ring(3), ModelParams(g=0.0))
    csv_path, json_path = io.emit_curve(tr, tmp_path, ModelParams(g=0.0), 9)
    rows = _rows(csv_path)
    assert rows[0] == ["s", "survival_ratio"]
    assert {r[1] for r in rows[1:]} == {"1"}
    meta = json.loads(json_path.read_text())
    assert meta["s1"] == 1.0 and meta["master_seed"] == 9 and meta["terminated_by"] == "stable_window"
    for key in ("s_inf", "n", "alpha", "g", "seed", "mode", "versions"):
        assert key in meta


def test_emit_sweep_sorted_by_scheme_then_p(tmp_path):
    entries = [SweepEntry(p, s, GraphKind.RING_1D, 0.5, 0.01, 10)
               for s in (Scheme.FIVE_CYCLE, Scheme.ONE_CYCLE) for p in (1.0, 0.8, 0.6, 0.4, 0.2, 0.0)]
    csv_path, _ = io.emit_sweep(SweepReport(entries), tmp_path, 1)
    rows = _rows(csv_path)
    assert rows[0] == io.SWEEP_COLUMNS
    body = rows[1:]
    assert len(body) == 12
    rank = {"one_cycle": 0, "five_cycle": 1}
    keys = [(rank[r[1]], float(r[0])) for r in body]
    assert keys == sorted(keys)
    assert body[0][1] == "one_cycle"


def test_emit_distributions_zero_survivors(tmp_path):
    rep = survivor_distributions(5, 5, 0.8, 1.0, ModelParams(), x0=np.full(25, 0.5))
    paths = io.emit_distributions(rep, tmp_path, 4)
    meta = json.loads(paths[-1].read_text())
    assert meta["frac_against_odds_pairwise"] is None
    assert meta["frac_against_odds_cumulative"] is None
    assert meta["n_survivors"] == 0
    for p in paths[:-1]:
        assert all(r[2] == "0" for r in _rows(p)[1:])


@pytest.fixture(scope="module")
def dist_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("dist")
    code = main(["distributions", "--grid-width", "100", "--grid-height", "100", "--alpha", "0.75",
                 "--s1-targets", "0.8", "--seed", "3", "--out", str(out), "--threads", "1"])
    assert code == 0
    return out / "s1_0.8"


def test_distribution_csvs_share_edges(dist_dir):
    edges = [[r[:2] for r in _rows(dist_dir / f"pairwise_{d}.csv")] for d in DIRECTIONS]
    assert all(e == edges[0] for e in edges)


def test_distribution_fractions_recount_from_csv(dist_dir):
    meta = json.loads((dist_dir / "distributions.json").read_text())
    hists = [io.read_histogram_csv(dist_dir / f"pairwise_{d}.csv") for d in DIRECTIONS]
    neg = sum(h.mass_below(0.0) for h in hists)
    tot = sum(h.total for h in hists)
    assert meta["frac_against_odds_pairwise"] == neg / tot
    cum = io.read_histogram_csv(dist_dir / "cumulative.csv")
    assert meta["frac_against_odds_cumulative"] == cum.mass_below(0.0) / cum.total
    assert cum.total == meta["n_survivors"] == hists[0].total
    assert meta["master_seed"] == 3 and meta["config"]["model"]["alpha"] == 0.75


def test_curve_rerun_byte_identical(tmp_path):
    args = ["simulate", "--topology", "ring", "--n", "300", "--seed", "5", "--out", str(tmp_path)]
    snaps = []
    for _ in range(2):
        assert main(args) == 0
        snaps.append({n: (tmp_path / n).read_bytes() for n in ("curve.csv", "summary.json")})
    assert snaps[0] == snaps[1]


def test_sweep_cli(tmp_path):
    code = _cli(tmp_path, "sweep-p", "--topology", "ring", "--n", "60", "--n-configs", "2",
                "--p-values", "0,0.5,1")
    assert code == 0
    rows = _rows(tmp_path / "out" / "sweep.csv")
    assert len(rows) == 7 and rows[0] == io.SWEEP_COLUMNS


def test_lazarus_and_crossover_cli(tmp_path):
    assert _cli(tmp_path, "lazarus", "--topology", "grid", "--width", "10", "--height", "10",
                "--n-links", "3") == 0
    meta = json.loads((tmp_path / "out" / "lazarus.json").read_text())
    assert meta["center"] == 55 and len(meta["targets"]) == 3
    assert _cli(tmp_path, "crossover", "--topology", "grid", "--width", "10", "--height", "10",
                "--n-max", "3", "--class", "would_be_survivor_richer") == 0
    rows = _rows(tmp_path / "out" / "crossover.csv")
    assert rows[0] == ["n_links", "fate"]


def test_validate_config_prints_resolved(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("experiment: Curve\ntopology: ring n=100\n")
    assert main(["validate-config", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "alpha: 1.0" in out and "eps_death" in out


def test_flag_overrides_file(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("experiment: curve\ntopology: ring n=100\nmodel: {g: 0.2}\n")
    assert main(["validate-config", "--config", str(cfg), "--g", "0.3"]) == 0
    assert "g: 0.3" in capsys.readouterr().out


def test_export_graph(tmp_path):
    target = tmp_path / "g.edges"
    assert main(["export-graph", "--topology", "ring", "--n", "20", "--p", "0.5",
                 "--output", str(target)]) == 0
    g = read_edge_list(target)
    assert g.n == 20 and g.n_edges >= 20


def test_wealth_file_flag(tmp_path):
    wf = tmp_path / "w.txt"
    wf.write_text("2.0\n0.5\n3.0\n")
    assert _cli(tmp_path, "simulate", "--topology", "ring", "--n", "3", "--wealth-file", str(wf)) == 0
    meta = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert meta["n"] == 3 and meta["config"]["wealth"]["kind"] == "explicit"


@pytest.mark.parametrize("args,code", [
    (["simulate", "--topology", "ring", "--n", "10", "--alpha", "0.4"], 2),
    (["simulate", "--n", "10"], 2),
    (["simulate", "--topology", "ring", "--n", "2"], 2),
    (["simulate", "--topology", "complete", "--n", "2", "--wealth", "constant", "--value", "2.0",
      "--mode", "implicit", "--g", "0.5"], 3),
    (["simulate", "--topology", "ring", "--n", "10", "--wealth-file", "/nonexistent/w.txt"], 4),
])
def test_exit_codes(tmp_path, args, code):
    assert _cli(tmp_path, *args) == code


def test_subcommand_mismatch(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("experiment: lazarus\ntopology: ring n=10\n")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", "--topology", "ring", "--n", "10", "--out", str(blocker / "sub")]) == 4
