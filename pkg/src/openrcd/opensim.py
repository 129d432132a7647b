"""Open-system simulation: pair updates interleaved with agent swaps.

Each iteration is one of two events: with probability ``p_update`` a
uniformly chosen pair performs a coordinate-descent update; otherwise a
uniformly chosen agent has its cost replaced by a fresh draw (the
agent's estimate survives, the constrained minimizer moves).  The
tracked error is ``C_k = ||x_k - x*_k||^2`` against the minimizer of
the *current* roster.

Randomness is consumed in a canonical order so that runs are exactly
reproducible and batch execution matches sequential execution bit for
bit: a trajectory with seed ``s`` first draws two uniforms per agent
for the initial roster, then five uniforms per iteration (event coin,
edge pick, agent pick, theta quantile, mu quantile); draws not needed
by the realized event are discarded.  ``run_ensemble`` exploits this by
simulating all replications of a quadratic-family experiment in
lockstep with vectorized arithmetic that is operation-for-operation
identical to the scalar path.

The environment variable ``OPENRCD_THREADS`` caps how many replication
batches run concurrently (0 or unset = auto); results are independent
of the thread count by construction.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .allocation import (
    Allocation,
    closed_form_quadratic_minimizer,
    dual_bisection_minimizer,
)
from .functions import (
    CostFunction,
    LogCoshQuadratic,
    QuadraticFunction,
    logcosh_quantiles,
    quadratic_quantiles,
    sample_logcosh_replacement,
    sample_replacement,
)
from .rcd import PairSelection, StepConfig, complete_graph_edges, rcd_pair_step

__all__ = [
    "EventSchedule",
    "SystemState",
    "TrajectoryRecord",
    "ReplicationStats",
    "initial_system_state",
    "step",
    "run_trajectory",
    "run_ensemble",
]

#: two-sided 95% normal quantile used for confidence half-widths
Z95 = 1.959963984540054

#: replication rows simulated per vectorized batch (memory cap)
_BATCH_ROWS = 1024


@dataclass(frozen=True)
class EventSchedule:
    """Per-iteration event mix of the open system."""

    p_update: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p_update <= 1.0):
            raise ValueError(f"p_update={self.p_update} outside [0, 1]")

    @property
    def p_replace(self):
        return 1.0 - self.p_update

    def edge_probability(self, n):
        """Chance a given pair updates this iteration: ``2 p_U / (n(n-1))``."""
        return 2.0 * self.p_update / (n * (n - 1))

    def agent_probability(self, n):
        """Chance a given agent is replaced this iteration: ``p_R / n``."""
        return self.p_replace / n


@dataclass(frozen=True)
class SystemState:
    """Estimates plus the current cost roster."""

    allocation: Allocation
    roster: tuple

    def __post_init__(self):
        if len(self.roster) != self.allocation.n:
            raise ValueError("roster size must match the allocation")

    @property
    def n(self):
        return self.allocation.n

    @property
    def certificate(self):
        return self.roster[0].certificate


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-iteration log of a single run; row 0 is the initial state."""

    k: np.ndarray
    event: tuple
    error: np.ndarray
    suboptimality: np.ndarray
    minimizer_shift: np.ndarray
    final_state: SystemState


@dataclass(frozen=True)
class ReplicationStats:
    """Per-iteration ensemble mean of the error with CI half-widths."""

    mean_error: np.ndarray
    ci_halfwidth: np.ndarray
    replications: int
    replacement_count: int
    max_replacement_shift: float


def _solver_for(family):
    if family == "quadratic":
        return closed_form_quadratic_minimizer
    return dual_bisection_minimizer


def _sampler_for(family):
    return sample_replacement if family == "quadratic" else sample_logcosh_replacement


def _function_from_uniforms(family, certificate, u_theta, u_mu):
    if family == "quadratic":
        theta, mu = quadratic_quantiles(certificate, u_theta, u_mu)
        return QuadraticFunction(float(theta), float(mu), certificate)
    theta, mu, weight = logcosh_quantiles(certificate, u_theta, u_mu)
    return LogCoshQuadratic(float(theta), float(mu), float(weight), certificate)


def initial_system_state(config, rng):
    """Draw the starting roster and build the configured initial point.

    Consumes exactly ``2 n`` uniforms from ``rng`` (theta and mu
    quantiles per agent, in agent order).
    """
    cert = config.certificate
    sampler = _sampler_for(config.function_family)
    roster = tuple(sampler(rng, cert) for _ in range(config.n))
    if config.initial_state == "uniform_budget":
        x0 = np.full(config.n, config.budget / config.n)
    elif config.initial_state == "minimizer":
        solved = _solver_for(config.function_family)(roster, config.budget)
        x0 = solved.point.values.copy()
    else:
        x0 = np.array(config.initial_state, dtype=np.float64)
    return SystemState(Allocation(x0, config.budget), roster)


def step(state, schedule, rng, step_config=None, family="quadratic",
         replacement_sampler=None):
    """Advance the open system by one iteration.

    Consumes exactly five uniforms from ``rng`` regardless of the
    realized event (unused draws are discarded), unless a custom
    ``replacement_sampler`` takes extra draws of its own.

    Parameters
    ----------
    state : SystemState
    schedule : EventSchedule
    rng : numpy.random.Generator
    step_config : StepConfig, optional
        Defaults to ``h = 1/beta`` for the roster's certificate.
    family : str
        Which built-in family replacements are drawn from.
    replacement_sampler : callable, optional
        ``sampler(rng, certificate) -> CostFunction`` overriding the
        built-in draw.

    Returns
    -------
    (SystemState, tuple)
        The new state and the realized event, either
        ``("update", i, j)`` or ``("replace", agent)``.
    """
    if step_config is None:
        step_config = StepConfig.default(state.certificate.beta)
    u = rng.random(5)
    n = state.n
    if u[0] < schedule.p_update:
        ei, ej = complete_graph_edges(n)
        e = int(u[1] * ei.size)
        sel = PairSelection(int(ei[e]), int(ej[e]), 2.0 / (n * (n - 1)))
        after = rcd_pair_step(state.allocation, state.roster, sel, step_config)
        return SystemState(after, state.roster), ("update", sel.i, sel.j)
    agent = int(u[2] * n)
    if replacement_sampler is not None:
        fresh = replacement_sampler(rng, state.certificate)
    else:
        fresh = _function_from_uniforms(family, state.certificate, u[3], u[4])
    roster = state.roster[:agent] + (fresh,) + state.roster[agent + 1:]
    return SystemState(state.allocation, roster), ("replace", agent)


def _roster_value(roster, values):
    return math.fsum(f.value(v) for f, v in zip(roster, values))


def run_trajectory(config, seed=None, replacement_sampler=None):
    """Simulate one run and log it per iteration.

    Parameters
    ----------
    config : ExperimentConfig
    seed : int, optional
        Defaults to ``config.seed``.
    replacement_sampler : callable, optional
        Passed through to :func:`step`.

    Returns
    -------
    TrajectoryRecord
        Arrays of length ``horizon + 1``; row 0 is the initial state
        with event ``"init"``.  ``error`` is ``||x_k - x*_k||^2``,
        ``suboptimality`` the roster-value gap to the constrained
        minimizer, and ``minimizer_shift`` the squared minimizer jump
        (zero except on replacement rows).
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    schedule = EventSchedule(config.p_update)
    step_config = StepConfig(config.h, config.beta)
    solver = _solver_for(config.function_family)
    state = initial_system_state(config, rng)

    horizon = config.horizon
    ks = np.arange(horizon + 1)
    events = ["init"]
    error = np.empty(horizon + 1)
    subopt = np.empty(horizon + 1)
    shift = np.zeros(horizon + 1)

    solved = solver(state.roster, config.budget)
    xstar = solved.point.values

    d = state.allocation.values - xstar
    error[0] = (d * d).sum()
    subopt[0] = _roster_value(state.roster, state.allocation.values) - _roster_value(
        state.roster, xstar
    )

    for k in range(1, horizon + 1):
        state, event = step(
            state,
            schedule,
            rng,
            step_config,
            family=config.function_family,
            replacement_sampler=replacement_sampler,
        )
        events.append(event[0])
        if event[0] == "replace":
            solved = solver(state.roster, config.budget)
            moved = solved.point.values
            ds = moved - xstar
            shift[k] = (ds * ds).sum()
            xstar = moved
        d = state.allocation.values - xstar
        error[k] = (d * d).sum()
        subopt[k] = _roster_value(state.roster, state.allocation.values) - _roster_value(
            state.roster, xstar
        )
    return TrajectoryRecord(ks, tuple(events), error, subopt, shift, state)


@dataclass
class _BatchOutcome:
    error: np.ndarray                 # (rows, horizon+1)
    final_values: np.ndarray          # (rows, n)
    replacement_count: int
    max_replacement_shift: float
    update_mask: np.ndarray | None    # (rows, horizon) when collected


def _simulate_quadratic_batch(config, seeds, collect_update_mask=False):
    """Lockstep simulation of many quadratic-family replications.

    Row ``r`` reproduces ``run_trajectory(config, seed=seeds[r])``
    exactly: the same uniforms feed the same arithmetic in the same
    order, only batched across rows.
    """
    n, horizon, budget = config.n, config.horizon, config.budget
    cert = config.certificate
    rows = len(seeds)
    init_u = np.empty((rows, n, 2))
    tape = np.empty((rows, horizon, 5))
    for r, s in enumerate(seeds):
        g = np.random.default_rng(int(s))
        init_u[r] = g.random((n, 2))
        tape[r] = g.random((horizon, 5))

    theta, mu = quadratic_quantiles(cert, init_u[..., 0], init_u[..., 1])
    inv_theta = 1.0 / theta
    t = (budget - mu.sum(axis=1)) / inv_theta.sum(axis=1)
    xstar = mu + t[:, None] * inv_theta

    if config.initial_state == "uniform_budget":
        x = np.full((rows, n), budget / n)
    elif config.initial_state == "minimizer":
        x = xstar.copy()
    else:
        x = np.tile(np.array(config.initial_state, dtype=np.float64), (rows, 1))

    error = np.empty((rows, horizon + 1))
    d = x - xstar
    error[:, 0] = (d * d).sum(axis=1)

    ei, ej = complete_graph_edges(n)
    ei = ei.astype(np.intp)
    ej = ej.astype(np.intp)
    edge_count = ei.size
    half_h = 0.5 * config.h
    row_index = np.arange(rows)
    update_mask = np.empty((rows, horizon), dtype=bool) if collect_update_mask else None
    replacement_count = 0
    max_shift = 0.0

    for k in range(horizon):
        u = tape[:, k, :]
        is_update = u[:, 0] < config.p_update
        if update_mask is not None:
            update_mask[:, k] = is_update

        urows = row_index[is_update]
        if urows.size:
            e = (u[urows, 1] * edge_count).astype(np.intp)
            ii, jj = ei[e], ej[e]
            xi = x[urows, ii]
            xj = x[urows, jj]
            gi = 2.0 * theta[urows, ii] * (xi - mu[urows, ii])
            gj = 2.0 * theta[urows, jj] * (xj - mu[urows, jj])
            dstep = half_h * (gi - gj)
            x[urows, ii] = xi - dstep
            x[urows, jj] = xj + dstep

        rrows = row_index[~is_update]
        if rrows.size:
            replacement_count += rrows.size
            agents = (u[rrows, 2] * n).astype(np.intp)
            theta_new, mu_new = quadratic_quantiles(cert, u[rrows, 3], u[rrows, 4])
            theta[rrows, agents] = theta_new
            inv_theta[rrows, agents] = 1.0 / theta_new
            mu[rrows, agents] = mu_new
            t = (budget - mu[rrows].sum(axis=1)) / inv_theta[rrows].sum(axis=1)
            moved = mu[rrows] + t[:, None] * inv_theta[rrows]
            ds = moved - xstar[rrows]
            shift = (ds * ds).sum(axis=1)
            if shift.size:
                max_shift = max(max_shift, float(shift.max()))
            xstar[rrows] = moved

        d = x - xstar
        error[:, k + 1] = (d * d).sum(axis=1)

    return _BatchOutcome(error, x, replacement_count, max_shift, update_mask)


def _thread_count():
    raw = os.environ.get("OPENRCD_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value <= 0:
        value = min(8, os.cpu_count() or 1)
    return value


def _batch_seed_ranges(base_seed, replications):
    starts = range(0, replications, _BATCH_ROWS)
    return [
        range(base_seed + lo, base_seed + min(lo + _BATCH_ROWS, replications))
        for lo in starts
    ]


def run_ensemble(config, replications=None, base_seed=None):
    """Run independent replications and aggregate the error curves.

    Replication ``r`` is seeded ``base_seed + r`` and reproduces the
    corresponding :func:`run_trajectory` exactly.  Quadratic-family
    experiments run through the vectorized batch engine (optionally on
    a thread pool, see ``OPENRCD_THREADS``); batches are merged in
    deterministic order, so the statistics never depend on scheduling.

    Parameters
    ----------
    config : ExperimentConfig
    replications : int, optional
        Defaults to ``config.replications``.
    base_seed : int, optional
        Defaults to ``config.seed``.

    Returns
    -------
    ReplicationStats
        ``mean_error[k]`` estimates ``E[C_k]``; ``ci_halfwidth`` holds
        95% normal-approximation half-widths (zero when only one
        replication ran).
    """
    replications = config.replications if replications is None else int(replications)
    base_seed = config.seed if base_seed is None else int(base_seed)
    if replications < 1:
        raise ValueError("need at least one replication")

    if config.function_family == "quadratic":
        ranges = _batch_seed_ranges(base_seed, replications)
        workers = min(_thread_count(), len(ranges))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(
                    pool.map(lambda rng_: _simulate_quadratic_batch(config, rng_), ranges)
                )
        else:
            outcomes = [_simulate_quadratic_batch(config, r) for r in ranges]
        error = np.concatenate([o.error for o in outcomes], axis=0)
        replacement_count = sum(o.replacement_count for o in outcomes)
        max_shift = max((o.max_replacement_shift for o in outcomes), default=0.0)
    else:
        curves = []
        replacement_count = 0
        max_shift = 0.0
        for r in range(replications):
            record = run_trajectory(config, seed=base_seed + r)
            curves.append(record.error)
            replacement_count += sum(1 for e in record.event if e == "replace")
            if record.minimizer_shift.size:
                max_shift = max(max_shift, float(record.minimizer_shift.max()))
        error = np.vstack(curves)

    mean = error.mean(axis=0)
    if replications > 1:
        halfwidth = Z95 * error.std(axis=0, ddof=1) / math.sqrt(replications)
    else:
        halfwidth = np.zeros_like(mean)
    return ReplicationStats(mean, halfwidth, replications, replacement_count, max_shift)
