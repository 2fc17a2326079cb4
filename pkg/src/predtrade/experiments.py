"""Experiment drivers: survival curves, p-sweeps, selective networking
(Lazarus) runs and survivor wealth-difference distributions."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .dynamics import ModelParams, Trajectory, critical_wealth, run
from .sampling import WealthDistSpec, exponential_rate_for_s1, sample_initial_wealth, substream
from .stats import Histogram, against_odds_fraction, mean_stderr
from .topology import Graph, GraphKind, add_links, grid2d, grid_neighbor, rewire_cycles

log = logging.getLogger(__name__)

DIRECTIONS = ("right", "left", "bottom", "top")


class Scheme(str, Enum):
    ONE_CYCLE = "one_cycle"
    FIVE_CYCLE = "five_cycle"

    @property
    def cycles(self) -> int:
        return 1 if self is Scheme.ONE_CYCLE else 5


class TraderClass(str, Enum):
    EVENTUAL_NON_SURVIVOR = "eventual_non_survivor"
    WOULD_BE_SURVIVOR_POORER = "would_be_survivor_poorer"
    WOULD_BE_SURVIVOR_RICHER = "would_be_survivor_richer"


class Fate(str, Enum):
    SURVIVES = "survives"
    DIES = "dies"


def parallel_map(fn: Callable, items: Iterable, threads: int = 1) -> list:
    """Map ``fn`` over ``items``; results come back in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def survival_curve(graph: Graph, wealth: WealthDistSpec, params: ModelParams,
                   index: int = 0) -> Trajectory:
    x0 = sample_initial_wealth(graph.n, wealth, index=index, floor=params.eps_death)
    return run(x0, graph, params)


@dataclass
class SweepEntry:
    p: float
    scheme: Scheme
    dimension: GraphKind
    s_inf_mean: float
    s_inf_stderr: float
    n_configs: int
    s_inf_values: tuple[float, ...] = ()


@dataclass
class SweepReport:
    entries: list[SweepEntry] = field(default_factory=list)

    def sorted(self) -> "SweepReport":
        order = {Scheme.ONE_CYCLE: 0, Scheme.FIVE_CYCLE: 1}
        return SweepReport(sorted(self.entries, key=lambda e: (e.dimension.value, order[e.scheme], e.p)))

    def select(self, scheme: Scheme, dimension: GraphKind | None = None) -> list[SweepEntry]:
        return sorted((e for e in self.entries if e.scheme == scheme
                       and (dimension is None or e.dimension == dimension)), key=lambda e: e.p)


def sweep_p(base: Graph, scheme: Scheme, p_values: Sequence[float], n_configs: int,
            wealth: WealthDistSpec, params: ModelParams, seed: int = 0,
            threads: int = 1) -> SweepReport:
    """Asymptotic survival ratio versus link-addition probability.

    Config ``k`` uses topology sub-stream ``k`` and wealth sub-stream ``k`` at
    every p, so the comparison across p (and across schemes) is paired.
    """
    if n_configs < 1:
        raise ValueError("n_configs must be >= 1")
    if any(not 0.0 <= p <= 1.0 for p in p_values):
        raise ValueError("p values must lie in [0, 1]")
    scheme = Scheme(scheme)
    wealths = [sample_initial_wealth(base.n, wealth, index=k, floor=params.eps_death)
               for k in range(n_configs)]
    jobs = [(p, k) for p in p_values for k in range(n_configs)]

    def one(job):
        p, k = job
        graph = rewire_cycles(base, p, scheme.cycles, substream(seed, "topology", k))
        return run(wealths[k], graph, params).s_inf

    results = parallel_map(one, jobs, threads)
    report = SweepReport()
    for i, p in enumerate(p_values):
        vals = results[i * n_configs:(i + 1) * n_configs]
        mean, se = mean_stderr(vals)
        report.entries.append(SweepEntry(float(p), scheme, base.kind, mean, se, n_configs, tuple(vals)))
    return report


def classify_traders(x0: Sequence[float], alpha: float, center: int) -> list[TraderClass]:
    x0 = np.asarray(x0, dtype=float)
    if not 0 <= center < len(x0):
        raise ValueError(f"center {center} out of range")
    xs = critical_wealth(alpha)
    xcm = x0[center]
    out = []
    for i, x in enumerate(x0):
        if x < xs:
            out.append(TraderClass.EVENTUAL_NON_SURVIVOR)
        elif x > xcm:
            out.append(TraderClass.WOULD_BE_SURVIVOR_RICHER)
        else:
            if x == xcm and i != center:
                log.warning("site %d ties the center's wealth %r; classed as poorer", i, xcm)
            out.append(TraderClass.WOULD_BE_SURVIVOR_POORER)
    return out


def link_candidates(base: Graph, x0, center: int, class_filter: TraderClass,
                    alpha: float, seed: int) -> np.ndarray:
    """Class members eligible for linking, in the order they are added."""
    classes = classify_traders(x0, alpha, center)
    adjacent = set(base.neighbors_of(center).tolist())
    pool = np.array([i for i, c in enumerate(classes)
                     if c == class_filter and i != center and i not in adjacent], dtype=np.int64)
    return substream(seed, "experiment", center).permutation(pool)


@dataclass
class LazarusReport:
    center: int
    class_used: TraderClass
    n_links: int
    baseline_fate: Fate
    new_fate: Fate
    xcm_series: list[tuple[float, float]]
    asymptotic_log_slope: float | None
    targets: tuple[int, ...] = ()
    baseline_xcm_series: list[tuple[float, float]] = field(default_factory=list)

    def xcm_at(self, s: float, baseline: bool = False) -> float:
        series = self.baseline_xcm_series if baseline else self.xcm_series
        ss, xx = np.array(series).T
        return float(np.interp(s, ss, xx))


def _fate(traj: Trajectory, center: int) -> Fate:
    return Fate.SURVIVES if traj.final_state.alive[center] else Fate.DIES


def _series(traj: Trajectory) -> list[tuple[float, float]]:
    return list(zip(traj.s.tolist(), traj.tracked_x[:, 0].tolist()))


def log_slope(traj: Trajectory, window: float) -> float:
    """Least-squares slope of ln x of the first tracked site over the final ``window``."""
    s = traj.s
    x = traj.tracked_x[:, 0]
    keep = (s >= s[-1] - window) & (x > 0)
    return float(np.polyfit(s[keep], np.log(x[keep]), 1)[0])


def lazarus_run(base: Graph, x0: Sequence[float], center: int, class_filter: TraderClass,
                n_links: int, params: ModelParams, seed: int = 0,
                baseline: Trajectory | None = None) -> LazarusReport:
    """Compare the center's fate with and without ``n_links`` extra class links."""
    x0 = np.asarray(x0, dtype=float)
    class_filter = TraderClass(class_filter)
    pool = link_candidates(base, x0, center, class_filter, params.alpha, seed)
    if len(pool) < n_links:
        raise ValueError(f"only {len(pool)} {class_filter.value} sites available, need {n_links}")
    targets = pool[:n_links]
    if baseline is None:
        baseline = run(x0, base, params, track=[center])
    graph = add_links(base, center, targets)
    traj = baseline if n_links == 0 else run(x0, graph, params, track=[center])
    slope = None
    if traj.final_state.alive[center] and not traj.final_state.alive[graph.neighbors_of(center)].any():
        slope = log_slope(traj, params.stable_window)
    return LazarusReport(center, class_filter, n_links, _fate(baseline, center), _fate(traj, center),
                         _series(traj), slope, tuple(int(t) for t in targets), _series(baseline))


def crossover_scan(base: Graph, x0: Sequence[float], center: int, class_filter: TraderClass,
                   n_max: int, params: ModelParams, seed: int = 0) -> Iterator[tuple[int, Fate]]:
    """Yield (n, fate of the center) for n = 0, 1, ..., n_max with nested link sets."""
    x0 = np.asarray(x0, dtype=float)
    pool = link_candidates(base, x0, center, TraderClass(class_filter), params.alpha, seed)
    for n in range(0, min(n_max, len(pool)) + 1):
        traj = run(x0, add_links(base, center, pool[:n]), params, track=[center])
        yield n, _fate(traj, center)


def lazarus_crossover(base: Graph, x0: Sequence[float], center: int, class_filter: TraderClass,
                      n_max: int, params: ModelParams, seed: int = 0) -> int | None:
    """Smallest link count at which the center goes from surviving to dying."""
    class_filter = TraderClass(class_filter)
    if class_filter == TraderClass.EVENTUAL_NON_SURVIVOR:
        raise ValueError("crossover search needs a would-be-survivor class")
    if n_max <= 0:
        return None
    prev = None
    for n, fate in crossover_scan(base, x0, center, class_filter, n_max, params, seed):
        if prev == Fate.SURVIVES and fate == Fate.DIES:
            return n
        prev = fate
    return None


@dataclass
class DistReport:
    pairwise: dict[str, Histogram]
    cumulative: Histogram
    frac_against_odds_pairwise: float | None
    frac_against_odds_cumulative: float | None
    mu: float
    s1_target: float
    survivors: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    deltas: np.ndarray = field(default_factory=lambda: np.empty((0, 4)))
    s_inf: float = 0.0

    @property
    def n_survivors(self) -> int:
        return len(self.survivors)


def wealth_differences(graph: Graph, x0: np.ndarray, survivors: np.ndarray) -> np.ndarray:
    """Rows of x0[survivor] - x0[neighbor] over right/left/bottom/top lattice neighbors."""
    out = np.empty((len(survivors), 4))
    for j, d in enumerate(DIRECTIONS):
        nb = np.array([grid_neighbor(graph, int(i), d) for i in survivors], dtype=np.int64)
        out[:, j] = x0[survivors] - x0[nb] if len(nb) else 0.0
    return out


def survivor_distributions(width: int, height: int, s1_target: float, alpha: float,
                           params: ModelParams, seed: int = 0, n_bins: int = 100,
                           x0: np.ndarray | None = None) -> DistReport:
    """Initial wealth differences between asymptotic survivors and their lattice neighbors.

    Wealth is Exponential(mu) with mu chosen so a fraction ``s1_target`` starts
    above the critical wealth, unless ``x0`` is given explicitly.
    """
    if params.alpha != alpha:
        params = params.with_(alpha=alpha, eps_death=None)
    mu = exponential_rate_for_s1(s1_target, alpha)
    graph = grid2d(width, height, periodic=True)
    if x0 is None:
        x0 = sample_initial_wealth(graph.n, WealthDistSpec.exponential(mu, seed=seed),
                                   floor=params.eps_death)
    x0 = np.asarray(x0, dtype=float)
    traj = run(x0, graph, params)
    survivors = traj.survivors()
    deltas = wealth_differences(graph, x0, survivors)
    pair_span, cum_span = 5.0 / mu, 20.0 / mu
    pairwise = {d: Histogram.of(deltas[:, j], -pair_span, pair_span, n_bins)
                for j, d in enumerate(DIRECTIONS)}
    cum = deltas.sum(axis=1)
    cumulative = Histogram.of(cum, -cum_span, cum_span, n_bins)
    fp = against_odds_fraction(deltas) if len(survivors) else None
    fc = against_odds_fraction(cum) if len(survivors) else None
    return DistReport(pairwise, cumulative, fp, fc, mu, s1_target, survivors, deltas, traj.s_inf)
