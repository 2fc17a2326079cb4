"""Scaled wealth dynamics of predatory traders.

Wealth ``X`` and reduced time ``s`` are the scaled variables
``X = m / sqrt(t)`` and ``s = ln(t / t0)``. Two right-hand sides are offered:

* ``Mode.FIRST_ORDER`` -- the weak-coupling lattice form
  ``X'_n = ((2a-1)/2 + g * sum_m (1/X_m - a X_m)) X_n - 1/X_n``;
* ``Mode.IMPLICIT`` -- the full form where neighbor derivatives appear on the
  right, solved per RK stage as ``(I + diag(X) G) X' = b``.

Both are integrated with fixed-step classical RK4. Traders whose wealth falls
below ``eps_death`` are bankrupt: their wealth is pinned to 0 and they drop
out of all neighbor sums for good.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .topology import Graph, complete

log = logging.getLogger(__name__)

COND_LIMIT = 1e12
DENSE_LIMIT = 800


class Mode(str, Enum):
    FIRST_ORDER = "first_order"
    IMPLICIT = "implicit"


class Termination(str, Enum):
    STABLE_WINDOW = "stable_window"
    HORIZON = "horizon"


class IntegrationError(RuntimeError):
    def __init__(self, message: str, site: int | None = None):
        super().__init__(message if site is None else f"{message} (site {site})")
        self.site = site


def critical_wealth(alpha: float) -> float:
    """Survival threshold sqrt(2 / (2 alpha - 1)) of an isolated trader."""
    if not alpha > 0.5:
        raise ValueError(f"alpha must exceed 1/2 (no finite survival threshold), got {alpha}")
    return math.sqrt(2.0 / (2.0 * alpha - 1.0))


def to_scaled(m: float, t: float, t0: float) -> tuple[float, float]:
    """Convert physical wealth and time to (X, s)."""
    if t0 <= 0 or t < t0:
        raise ValueError(f"need t >= t0 > 0, got t={t}, t0={t0}")
    if m < 0:
        raise ValueError(f"wealth must be non-negative, got {m}")
    return m / math.sqrt(t), math.log(t / t0)


def single_trader_closed_form(x0: float, alpha: float, s: float) -> float:
    """Exact wealth of an isolated trader at reduced time ``s``.

    From d(X^2)/ds = (2a-1) X^2 - 2; returns 0 at and after bankruptcy.
    """
    if x0 < 0 or s < 0:
        raise ValueError("need x0 >= 0 and s >= 0")
    xs2 = critical_wealth(alpha) ** 2
    if x0 < math.sqrt(xs2) and s >= single_trader_death_time(x0, alpha):
        return 0.0
    r = (x0 * x0 - xs2) * math.exp((2.0 * alpha - 1.0) * s) + xs2
    return math.sqrt(r) if r > 0 else 0.0


def single_trader_death_time(x0: float, alpha: float) -> float:
    """Reduced time at which an isolated sub-threshold trader goes bankrupt."""
    xs2 = critical_wealth(alpha) ** 2
    if x0 * x0 >= xs2:
        return math.inf
    if x0 <= 0:
        return 0.0
    return math.log(xs2 / (xs2 - x0 * x0)) / (2.0 * alpha - 1.0)


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 1.0
    g: float = 0.05
    mode: Mode = Mode.FIRST_ORDER
    ds: float = 1e-3
    s_max: float = 50.0
    eps_death: float | None = None
    stable_window: float = 10.0
    stage_gap: float = 2.0
    sample_every: int = 10

    def __post_init__(self):
        xs = critical_wealth(self.alpha)
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.eps_death is None:
            object.__setattr__(self, "eps_death", 1e-4 * xs)
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if not self.ds > 0:
            raise ValueError("ds must be > 0")
        if not (self.ds < self.stable_window and self.ds < self.s_max):
            raise ValueError("ds must be smaller than stable_window and s_max")
        if not 0 < self.eps_death < xs:
            raise ValueError(f"eps_death must lie in (0, {xs}), got {self.eps_death}")
        if not self.stage_gap > 0:
            raise ValueError("stage_gap must be > 0")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")

    @property
    def x_star(self) -> float:
        return critical_wealth(self.alpha)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass
class TraderState:
    x: np.ndarray
    alive: np.ndarray
    s: float = 0.0

    @classmethod
    def initial(cls, x0: Sequence[float]) -> "TraderState":
        x = np.array(x0, dtype=float)
        return cls(x, np.ones(len(x), dtype=bool), 0.0)

    def copy(self) -> "TraderState":
        return TraderState(self.x.copy(), self.alive.copy(), self.s)

    @property
    def n_alive(self) -> int:
        return int(self.alive.sum())


@dataclass
class Trajectory:
    s: np.ndarray
    survival_ratio: np.ndarray
    death_time: np.ndarray
    s1: float
    s_inf: float
    final_state: TraderState
    terminated_by: Termination
    tracked_sites: tuple[int, ...] = ()
    tracked_x: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.s.tolist(), self.survival_ratio.tolist()))

    @property
    def n(self) -> int:
        return len(self.death_time)

    def survivors(self) -> np.ndarray:
        return np.flatnonzero(self.final_state.alive)


def apply_bankruptcy(state: TraderState, eps_death: float) -> TraderState:
    """Mark every alive site with wealth below ``eps_death`` (or non-finite) as dead."""
    out = state.copy()
    with np.errstate(invalid="ignore"):
        bad = out.alive & ~(np.isfinite(out.x) & (out.x >= eps_death))
    out.alive &= ~bad
    out.x[~out.alive] = 0.0
    return out


class _FirstOrderStepper:
    def __init__(self, graph: Graph, params: ModelParams):
        self.indptr = np.ascontiguousarray(graph.indptr)
        self.indices = np.ascontiguousarray(graph.indices)
        self.growth = (2.0 * params.alpha - 1.0) / 2.0
        self.p = params
        self.work = _kernels.workspace(graph.n)

    def advance(self, x, alive, max_steps):
        p = self.p
        return _kernels.advance(x, alive, self.indptr, self.indices, self.growth, p.g,
                                p.alpha, p.ds, p.eps_death, max_steps, *self.work)


class _ImplicitStepper:
    def __init__(self, graph: Graph, params: ModelParams):
        n = graph.n
        self.adj = sp.csr_matrix((np.ones(len(graph.indices)), graph.indices, graph.indptr),
                                 shape=(n, n))
        self.growth = (2.0 * params.alpha - 1.0) / 2.0
        self.p = params
        self._sub_key = None

    def _submatrix(self, idx):
        key = idx.tobytes()
        if key != self._sub_key:
            self._sub = self.adj[idx][:, idx].tocsr()
            self._dense = self._sub.toarray() if idx.size <= DENSE_LIMIT else None
            self._sub_key = key
        return self._sub

    def rates(self, y, live):
        out = np.zeros_like(y)
        idx = np.flatnonzero(live)
        if idx.size == 0:
            return out
        g = self.p.g
        yl = y[idx]
        adj = self._submatrix(idx)
        b = (self.growth - 0.5 * g * (adj @ yl)) * yl - 1.0 / yl
        if g == 0.0 or adj.nnz == 0:
            out[idx] = b
            return out
        if self._dense is not None:
            a = g * yl[:, None] * self._dense
            a[np.diag_indices_from(a)] += 1.0
            try:
                inv = np.linalg.inv(a)
            except np.linalg.LinAlgError:
                raise IntegrationError("implicit coupling matrix singular") from None
            cond = np.abs(a).sum(axis=0).max() * np.abs(inv).sum(axis=0).max()
            if not cond < COND_LIMIT:
                raise IntegrationError("implicit coupling matrix singular")
            out[idx] = inv @ b
        else:
            a = sp.identity(idx.size, format="csr") + g * sp.diags(yl) @ adj
            lu = spla.splu(a.tocsc())
            inv = spla.LinearOperator(a.shape, matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="T"))
            cond = spla.onenormest(a) * spla.onenormest(inv)
            if not cond < COND_LIMIT:
                raise IntegrationError("implicit coupling matrix singular")
            out[idx] = lu.solve(b)
        return out

    def _step(self, x, alive):
        p = self.p
        ds, eps = p.ds, p.eps_death
        live = alive.copy()

        def drop(y):
            with np.errstate(invalid="ignore"):
                live[:] &= ~(y < eps)

        k1 = self.rates(x, live)
        y = x + 0.5 * ds * k1
        drop(y)
        k2 = self.rates(y, live)
        y = x + 0.5 * ds * k2
        drop(y)
        k3 = self.rates(y, live)
        y = x + ds * k3
        drop(y)
        k4 = self.rates(y, live)
        with np.errstate(invalid="ignore", over="ignore"):
            xn = x + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            blown = live & ~(xn < np.inf)
            ok = live & (xn >= eps) & (xn < np.inf)
        if blown.any():
            x[blown] = xn[blown]
            return -(int(np.flatnonzero(blown)[0]) + 1)
        dead = alive & ~ok
        x[ok] = xn[ok]
        x[dead] = 0.0
        alive[dead] = False
        return int(dead.sum())

    def advance(self, x, alive, max_steps):
        for step in range(max_steps):
            d = self._step(x, alive)
            if d != 0:
                return step + 1, d
        return max_steps, 0


def _stepper(graph: Graph, params: ModelParams):
    if params.mode == Mode.IMPLICIT:
        return _ImplicitStepper(graph, params)
    return _FirstOrderStepper(graph, params)


def _check_state(state: TraderState, graph: Graph):
    if len(state.x) != graph.n or len(state.alive) != graph.n:
        raise ValueError(f"state has {len(state.x)} sites, graph has {graph.n}")


def _advance_checked(stepper, x, alive, max_steps):
    taken, deaths = stepper.advance(x, alive, max_steps)
    if deaths < 0:
        raise IntegrationError("non-finite wealth", -deaths - 1)
    return taken, deaths


def advance(state: TraderState, graph: Graph, params: ModelParams, n_steps: int) -> TraderState:
    """Advance ``state`` by ``n_steps`` steps of size ``params.ds``."""
    _check_state(state, graph)
    out = state.copy()
    stepper = _stepper(graph, params)
    done = 0
    while done < n_steps:
        k, _ = _advance_checked(stepper, out.x, out.alive, n_steps - done)
        done += k
    out.s = state.s + n_steps * params.ds
    return out


def step(state: TraderState, graph: Graph, params: ModelParams) -> TraderState:
    """One first-order RK4 step followed by bankruptcy detection."""
    if params.mode != Mode.FIRST_ORDER:
        raise ValueError("step() integrates the first-order mode; use step_implicit()")
    return advance(state, graph, params, 1)


def step_implicit(state: TraderState, graph: Graph, params: ModelParams) -> TraderState:
    """One RK4 step of the implicit dynamics (one linear solve per stage)."""
    if params.mode != Mode.IMPLICIT:
        raise ValueError("step_implicit() requires Mode.IMPLICIT")
    return advance(state, graph, params, 1)


def _steps_for(length: float, ds: float) -> int:
    return max(1, math.ceil(length / ds - 1e-9))


def run(x0: Sequence[float], graph: Graph, params: ModelParams,
        track: Sequence[int] = ()) -> Trajectory:
    """Integrate from s = 0 until no bankruptcy for ``stable_window`` or ``s_max``.

    ``track`` lists sites whose wealth is recorded at every sample.
    """
    x0 = np.asarray(x0, dtype=float)
    if graph.n == 0:
        raise ValueError("empty lattice")
    if len(x0) != graph.n:
        raise ValueError(f"x0 has {len(x0)} entries, graph has {graph.n} sites")
    if not np.all(x0 > 0):
        raise ValueError("initial wealth must be strictly positive")
    n = graph.n
    track = tuple(int(t) for t in track)
    ds = params.ds
    state = apply_bankruptcy(TraderState.initial(x0), params.eps_death)
    x, alive = state.x, state.alive
    death_time = np.full(n, np.nan)
    death_time[~alive] = 0.0

    gap_steps = _steps_for(params.stage_gap, ds)
    window_steps = _steps_for(params.stable_window, ds)
    horizon_steps = _steps_for(params.s_max, ds)
    every = params.sample_every

    n_alive = int(alive.sum())
    samples_s, samples_r, samples_x = [0.0], [n_alive / n], [x[list(track)].copy()]
    stepper = _stepper(graph, params)
    step_i = 0
    last_death = 0
    died_ever = n_alive < n
    s1 = None

    while True:
        targets = [(step_i // every + 1) * every, last_death + window_steps, horizon_steps]
        if died_ever and s1 is None:
            targets.append(last_death + gap_steps)
        stop = min(targets)
        taken, deaths = _advance_checked(stepper, x, alive, stop - step_i)
        step_i += taken
        s = step_i * ds
        if deaths:
            # the death-free gap closes on this step if it had already reached its length
            if died_ever and s1 is None and step_i - last_death >= gap_steps:
                s1 = n_alive / n
            newly = ~alive & np.isnan(death_time)
            death_time[newly] = s
            n_alive -= int(deaths)
            last_death = step_i
            died_ever = True
        elif died_ever and s1 is None and step_i - last_death >= gap_steps:
            s1 = n_alive / n
        at_end = step_i - last_death >= window_steps or step_i >= horizon_steps
        if step_i % every == 0 or at_end:
            samples_s.append(s)
            samples_r.append(n_alive / n)
            samples_x.append(x[list(track)].copy())
        if step_i - last_death >= window_steps:
            terminated = Termination.STABLE_WINDOW
            break
        if step_i >= horizon_steps:
            terminated = Termination.HORIZON
            break

    s_inf = n_alive / n
    if s1 is None:
        s1 = 1.0 if not died_ever else s_inf
    final = TraderState(x.copy(), alive.copy(), step_i * ds)
    return Trajectory(
        s=np.asarray(samples_s), survival_ratio=np.asarray(samples_r),
        death_time=death_time, s1=s1, s_inf=s_inf, final_state=final,
        terminated_by=terminated, tracked_sites=track,
        tracked_x=np.asarray(samples_x).reshape(len(samples_s), len(track)),
    )


def find_critical_coupling(alpha: float, x0: float, tol: float,
                           params: ModelParams | None = None) -> float:
    """Bisect the coupling at which two equal traders stop both surviving.

    Uses the implicit dynamics on a single linked pair.
    """
    xs = critical_wealth(alpha)
    if not x0 > xs:
        raise ValueError(f"x0={x0} must exceed the critical wealth {xs}")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    base = params or ModelParams(alpha=alpha)
    if base.alpha != alpha:
        base = base.with_(alpha=alpha, eps_death=None)
    base = base.with_(mode=Mode.IMPLICIT)
    pair = complete(2)

    def both_survive(g):
        # The equal pair follows a one-dimensional flow, so joint survival is
        # the same as wealth rising above x0. A slow decay near g_c can
        # outlast the stable window without a death, hence the growth check.
        try:
            fin = run([x0, x0], pair, base.with_(g=g)).final_state
        except IntegrationError:
            # g*x0 == 1 makes the antisymmetric mode exactly singular; step off it
            fin = run([x0, x0], pair, base.with_(g=g * (1 + 1e-9))).final_state
        return fin.n_alive == 2 and fin.x[0] > x0

    lo, hi = 0.0, 1.0
    for _ in range(60):
        if not both_survive(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise IntegrationError("no critical coupling found")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if both_survive(mid):
            lo = mid
        else:
            hi = mid
    log.debug("critical coupling bracket [%g, %g]", lo, hi)
    return 0.5 * (lo + hi)
