"""Run configuration: YAML schema, validation and default filling.

A config has six top-level keys (``master_seed``, ``model``, ``topology``,
``wealth``, ``experiment``, ``output``); only ``topology`` and ``experiment``
are required. Unknown keys are rejected. Every default is written back into
the resolved config, so ``emit_config`` output fully describes a run.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .dynamics import Mode, ModelParams, critical_wealth
from .experiments import Scheme, TraderClass
from .sampling import WealthDistSpec, exponential_rate_for_s1, read_wealth_file, substream
from .topology import Graph, complete, grid2d, read_edge_list, rewire_cycles, ring


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=False)


class ModelConfig(_Strict):
    alpha: float = 1.0
    g: float = Field(0.05, ge=0)
    mode: Mode = Mode.FIRST_ORDER
    ds: float = Field(1e-3, gt=0)
    s_max: float = Field(50.0, gt=0)
    eps_death: Optional[float] = None
    stable_window: float = Field(10.0, gt=0)
    stage_gap: float = Field(2.0, gt=0)

    @field_validator("alpha")
    @classmethod
    def _alpha(cls, v):
        if not v > 0.5:
            raise ValueError("alpha must exceed 1/2")
        return v

    @model_validator(mode="after")
    def _fill(self):
        if self.eps_death is None:
            self.eps_death = 1e-4 * critical_wealth(self.alpha)
        try:
            ModelParams(**self.model_dump())
        except ValueError as e:
            raise ValueError(str(e)) from None
        return self


class RewireConfig(_Strict):
    scheme: Scheme = Scheme.ONE_CYCLE
    p: float = Field(0.0, ge=0, le=1)


class RingConfig(_Strict):
    kind: Literal["ring"] = "ring"
    n: int = Field(ge=3)
    rewire: Optional[RewireConfig] = None


class GridConfig(_Strict):
    kind: Literal["grid"] = "grid"
    width: int = Field(ge=3)
    height: int = Field(ge=3)
    periodic: bool = True
    rewire: Optional[RewireConfig] = None


class CompleteConfig(_Strict):
    kind: Literal["complete"] = "complete"
    n: int = Field(ge=2)
    rewire: Optional[RewireConfig] = None


class EdgeListConfig(_Strict):
    kind: Literal["edgelist"] = "edgelist"
    path: str
    rewire: Optional[RewireConfig] = None


TopologyConfig = Annotated[Union[RingConfig, GridConfig, CompleteConfig, EdgeListConfig],
                           Field(discriminator="kind")]


class WealthConfig(_Strict):
    kind: Literal["exponential", "uniform", "constant", "explicit"] = "exponential"
    s1_target: Optional[float] = None
    rate: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    value: Optional[float] = None
    values: Optional[list[float]] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "exponential":
            if self.rate is None and self.s1_target is None:
                self.s1_target = 0.8
            if self.s1_target is not None and not 0 < self.s1_target < 1:
                raise ValueError("s1_target must lie in (0, 1)")
        elif self.kind == "explicit" and self.values is None and self.path is None:
            raise ValueError("explicit wealth needs 'values' or 'path'")
        return self


class CurveExperiment(_Strict):
    kind: Literal["curve"] = "curve"


class SweepExperiment(_Strict):
    kind: Literal["sweep_p"] = "sweep_p"
    p_values: list[float] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    n_configs: int = Field(10, ge=1)
    schemes: list[Scheme] = [Scheme.ONE_CYCLE, Scheme.FIVE_CYCLE]

    @field_validator("p_values")
    @classmethod
    def _p(cls, v):
        if not v or any(not 0 <= p <= 1 for p in v):
            raise ValueError("p_values must be a non-empty list within [0, 1]")
        return v


class LazarusExperiment(_Strict):
    kind: Literal["lazarus"] = "lazarus"
    center: Optional[int] = None
    trader_class: TraderClass = TraderClass.EVENTUAL_NON_SURVIVOR
    n_links: int = Field(100, ge=0)


class CrossoverExperiment(_Strict):
    kind: Literal["crossover"] = "crossover"
    center: Optional[int] = None
    trader_class: TraderClass = TraderClass.WOULD_BE_SURVIVOR_POORER
    n_max: int = Field(30, ge=0)

    @field_validator("trader_class")
    @classmethod
    def _cls(cls, v):
        if v == TraderClass.EVENTUAL_NON_SURVIVOR:
            raise ValueError("crossover needs a would-be-survivor class")
        return v


class DistributionsExperiment(_Strict):
    kind: Literal["distributions"] = "distributions"
    width: int = Field(200, ge=3)
    height: int = Field(200, ge=3)
    s1_targets: list[float] = [0.6, 0.7, 0.8, 0.9]
    n_bins: int = Field(100, ge=2)

    @field_validator("s1_targets")
    @classmethod
    def _s1(cls, v):
        if not v or any(not 0 < s < 1 for s in v):
            raise ValueError("s1_targets must lie in (0, 1)")
        return v


ExperimentConfig = Annotated[Union[CurveExperiment, SweepExperiment, LazarusExperiment,
                                   CrossoverExperiment, DistributionsExperiment],
                             Field(discriminator="kind")]


class OutputConfig(_Strict):
    dir: str = "out"
    sample_every: int = Field(10, ge=1)


_EXPERIMENT_ALIASES = {"simulate": "curve", "sweepp": "sweep_p"}


class RunConfig(_Strict):
    master_seed: int = Field(1, ge=0, lt=2 ** 64)
    model: ModelConfig = ModelConfig()
    topology: Optional[TopologyConfig] = None
    wealth: WealthConfig = WealthConfig()
    experiment: ExperimentConfig
    output: OutputConfig = OutputConfig()

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        exp = data.get("experiment")
        if isinstance(exp, str):
            exp = {"kind": exp}
        if isinstance(exp, dict) and isinstance(exp.get("kind"), str):
            exp = dict(exp, kind=normalize_experiment_kind(exp["kind"]))
        if exp is not None:
            data["experiment"] = exp
        topo = data.get("topology")
        if isinstance(topo, str):
            data["topology"] = parse_short_topology(topo)
        return data

    @model_validator(mode="after")
    def _fill(self):
        w = self.wealth
        if w.kind == "exponential":
            expected = (exponential_rate_for_s1(w.s1_target, self.model.alpha)
                        if w.s1_target is not None else None)
            if w.rate is None:
                w.rate = expected
            elif expected is not None and not math.isclose(w.rate, expected, rel_tol=1e-12):
                raise ValueError("wealth.rate disagrees with wealth.s1_target")
        exp = self.experiment
        if self.topology is None and not isinstance(exp, DistributionsExperiment):
            raise ValueError(f"topology is required for the {exp.kind} experiment")
        if isinstance(exp, (LazarusExperiment, CrossoverExperiment)) and exp.center is None:
            exp.center = _middle_site(self.topology)
        return self


def normalize_experiment_kind(kind: str) -> str:
    """Map spellings such as 'Curve', 'SweepP' or 'sweep-p' to schema names."""
    key = kind.lower().replace("-", "_")
    return _EXPERIMENT_ALIASES.get(key, key)


def parse_short_topology(text: str) -> dict:
    """Accept shorthand like 'ring n=100' or 'grid width=50 height=50'."""
    parts = text.split()
    out: dict[str, Any] = {"kind": parts[0]}
    for item in parts[1:]:
        key, _, value = item.partition("=")
        out[key] = yaml.safe_load(value)
    return out


def _middle_site(topo) -> int:
    if isinstance(topo, GridConfig):
        return (topo.height // 2) * topo.width + topo.width // 2
    if isinstance(topo, (RingConfig, CompleteConfig)):
        return topo.n // 2
    return 0


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"] if not str(p).endswith("Config")
                       and not str(p).endswith("Experiment") and p not in
                       ("ring", "grid", "complete", "edgelist", "curve", "sweep_p", "lazarus",
                        "crossover", "distributions"))
        msg = e["msg"]
        if e["type"] == "extra_forbidden":
            msg = f"unknown key '{e['loc'][-1]}'"
        elif msg.startswith("Value error, "):
            msg = msg[len("Value error, "):]
        lines.append(f"{loc or '<root>'}: {msg}")
    return "; ".join(lines)


def parse_config(text: str | dict) -> RunConfig:
    """Parse and validate a YAML document (or an already-loaded mapping)."""
    if isinstance(text, str):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"malformed YAML: {e}") from None
    else:
        data = text
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_error(e)) from None


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


def config_dict(cfg: RunConfig) -> dict:
    return cfg.model_dump(mode="json")


def emit_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_dict(cfg), sort_keys=False)


def model_params(cfg: RunConfig) -> ModelParams:
    m = cfg.model
    return ModelParams(alpha=m.alpha, g=m.g, mode=m.mode, ds=m.ds, s_max=m.s_max,
                       eps_death=m.eps_death, stable_window=m.stable_window,
                       stage_gap=m.stage_gap, sample_every=cfg.output.sample_every)


def base_graph(cfg: RunConfig) -> Graph:
    t = cfg.topology
    if isinstance(t, RingConfig):
        return ring(t.n)
    if isinstance(t, GridConfig):
        return grid2d(t.width, t.height, t.periodic)
    if isinstance(t, CompleteConfig):
        return complete(t.n)
    return read_edge_list(t.path)


def build_graph(cfg: RunConfig, index: int = 0) -> Graph:
    """Base graph plus the configured link augmentation (topology sub-stream ``index``)."""
    g = base_graph(cfg)
    rw = cfg.topology.rewire
    if rw is not None and rw.p > 0:
        g = rewire_cycles(g, rw.p, 1 if rw.scheme == Scheme.ONE_CYCLE else 5,
                          substream(cfg.master_seed, "topology", index))
    return g


def wealth_spec(cfg: RunConfig) -> WealthDistSpec:
    w = cfg.wealth
    seed = cfg.master_seed
    if w.kind == "exponential":
        return WealthDistSpec.exponential(w.rate, seed=seed)
    if w.kind == "uniform":
        return WealthDistSpec.uniform(w.lo, w.hi, seed=seed)
    if w.kind == "constant":
        return WealthDistSpec.constant(w.value)
    values = w.values if w.values is not None else read_wealth_file(w.path)
    return WealthDistSpec.explicit(values)
