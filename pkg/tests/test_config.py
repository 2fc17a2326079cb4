import math

import pytest

from config_corpus import CORPUS
from predtrade.config import (ConfigError, build_graph, emit_config, model_params, parse_config,
                              wealth_spec)
from predtrade.dynamics import Mode
from predtrade.topology import GraphKind


def test_minimal_config_fills_defaults():
    cfg = parse_config("experiment: Curve\ntopology: ring n=100\n")
    assert (cfg.model.alpha, cfg.model.g, cfg.model.ds) == (1.0, 0.05, 1e-3)
    assert cfg.model.eps_death == pytest.approx(1e-4 * math.sqrt(2))
    assert cfg.experiment.kind == "curve"
    assert cfg.topology.kind == "ring" and cfg.topology.n == 100
    assert cfg.wealth.s1_target == 0.8
    assert cfg.wealth.rate == pytest.approx(-math.log(0.8) / math.sqrt(2))
    text = emit_config(cfg)
    for key in ("alpha: 1.0", "g: 0.05", "ds: 0.001", "master_seed: 1"):
        assert key in text


def test_alpha_out_of_range():
    with pytest.raises(ConfigError, match="alpha must exceed 1/2"):
        parse_config("experiment: curve\ntopology: ring n=10\nmodel: {alpha: 0.4}\n")


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="unknown key 'alfa'"):
        parse_config("experiment: curve\ntopology: ring n=10\nmodel: {alfa: 1.0}\n")


def test_error_carries_path():
    with pytest.raises(ConfigError, match=r"topology\.n"):
        parse_config("experiment: curve\ntopology: ring n=2\n")


@pytest.mark.parametrize("text", [
    "experiment: curve\n",
    "topology: ring n=10\n",
    "experiment: nonsense\ntopology: ring n=10\n",
    "experiment: curve\ntopology: ring n=10\nwealth: {s1_target: 1.5}\n",
    "experiment: curve\ntopology: ring n=10\nwealth: {s1_target: 0.8, rate: 3.0}\n",
    "experiment: {kind: crossover, trader_class: eventual_non_survivor}\ntopology: ring n=10\n",
    "experiment: {kind: sweep_p, p_values: [0.5, 2.0]}\ntopology: ring n=10\n",
    "experiment: curve\ntopology: ring n=10\nmodel: {ds: 20}\n",
    "experiment: curve\ntopology: ring n=10\nmodel: {g: -1}\n",
    "- just\n- a list\n",
    "experiment: [unclosed\n",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_center_defaults_to_middle_site():
    cfg = parse_config({"experiment": "lazarus", "topology": "grid width=50 height=50"})
    assert cfg.experiment.center == 25 * 50 + 25


def test_model_params_and_graph():
    cfg = parse_config({"experiment": "curve", "topology": {"kind": "ring", "n": 100,
                        "rewire": {"scheme": "five_cycle", "p": 0.4}},
                        "model": {"mode": "implicit"}, "output": {"sample_every": 3}})
    p = model_params(cfg)
    assert p.mode == Mode.IMPLICIT and p.sample_every == 3
    g = build_graph(cfg)
    assert g.kind == GraphKind.AUGMENTED and g.meta["cycles"] == 5
    assert build_graph(cfg) == g
    assert wealth_spec(cfg).seed == cfg.master_seed


def test_corpus_size():
    assert len(CORPUS) == 25


@pytest.mark.parametrize("raw", CORPUS, ids=range(len(CORPUS)))
def test_round_trip(raw):
    cfg = parse_config(raw)
    again = parse_config(emit_config(cfg))
    assert again == cfg
    assert emit_config(again) == emit_config(cfg)
