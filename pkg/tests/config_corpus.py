"""Valid configs used for round-trip checks."""

CORPUS = [
    {"experiment": "Curve", "topology": "ring n=100"},
    {"experiment": "curve", "topology": {"kind": "ring", "n": 2000}, "master_seed": 7},
    {"experiment": "simulate", "topology": {"kind": "grid", "width": 50, "height": 50}},
    {"experiment": "curve", "topology": {"kind": "grid", "width": 10, "height": 12, "periodic": False}},
    {"experiment": "curve", "topology": {"kind": "complete", "n": 50}, "model": {"g": 1.6}},
    {"experiment": "curve", "topology": "ring n=30",
     "wealth": {"kind": "uniform", "lo": 0.5, "hi": 4.0}},
    {"experiment": "curve", "topology": "ring n=5", "wealth": {"kind": "constant", "value": 2.0}},
    {"experiment": "curve", "topology": "ring n=3",
     "wealth": {"kind": "explicit", "values": [1.0, 2.0, 3.0]}},
    {"experiment": "curve", "topology": "ring n=100",
     "model": {"alpha": 0.75, "mode": "implicit", "ds": 0.01}},
    {"experiment": "curve", "topology": "ring n=100", "wealth": {"rate": 0.25}},
    {"experiment": "curve", "topology": "ring n=100", "wealth": {"s1_target": 0.6}},
    {"experiment": "curve", "topology": {"kind": "ring", "n": 100,
                                         "rewire": {"scheme": "five_cycle", "p": 0.4}}},
    {"experiment": "curve", "topology": "edgelist path=graph.edges"},
    {"experiment": "curve", "topology": "ring n=100", "output": {"dir": "runs/a", "sample_every": 1}},
    {"experiment": "SweepP", "topology": "ring n=2000"},
    {"experiment": {"kind": "sweep-p", "p_values": [0.0, 0.5], "n_configs": 3,
                    "schemes": ["one_cycle"]}, "topology": "grid width=50 height=50"},
    {"experiment": "lazarus", "topology": "grid width=50 height=50"},
    {"experiment": {"kind": "lazarus", "center": 3, "n_links": 0,
                    "trader_class": "would_be_survivor_richer"}, "topology": "ring n=40"},
    {"experiment": "crossover", "topology": "grid width=20 height=20"},
    {"experiment": {"kind": "crossover", "n_max": 5, "trader_class": "would_be_survivor_richer",
                    "center": 0}, "topology": "grid width=20 height=20"},
    {"experiment": "distributions"},
    {"experiment": {"kind": "distributions", "width": 40, "height": 30, "s1_targets": [0.7],
                    "n_bins": 20}, "model": {"alpha": 0.75}},
    {"experiment": "curve", "topology": "ring n=100", "master_seed": 2 ** 64 - 1},
    {"experiment": "curve", "topology": "ring n=100",
     "model": {"eps_death": 1e-3, "stable_window": 5, "stage_gap": 1.5, "s_max": 100}},
    {"experiment": "curve", "topology": "complete n=2", "model": {"g": 0.0, "alpha": 2.0}},
]
