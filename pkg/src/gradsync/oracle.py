"""Brute-force reference simulator for cross-validating the event engine.

The oracle advances every logical clock by forward-Euler steps of a fixed
dt (rate sampled at the start of each substep) instead of the engine's
exact piecewise-linear evaluation, and re-implements the reception rules
inline instead of calling the protocol module. It consumes the identical
communication schedule and drift realizations, honors message times
exactly, and is intended for desk-scale instances only.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .engine import ConfigError, RunConfig, _make_clocks, _validate, generate_schedule
from .metrics import Trace

__all__ = ["oracle_run", "compare", "Comparison"]


@dataclass(frozen=True)
class Comparison:
    """Result of matching two traces sample by sample."""

    max_deviation: float
    first_exceedance: tuple[float, int, float] | None
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.first_exceedance is None


def oracle_run(config: RunConfig, dt: float) -> Trace:
    """Re-simulate a config with fixed-step integration.

    dt must be positive and at most max_gap / 10. The returned trace uses
    the same sample grid and conventions as the engine's, so the two can
    be compared entry by entry.
    """
    violations, topology = _validate(config)
    if violations:
        raise ConfigError(violations)
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > config.max_gap / 10.0:
        raise ValueError(f"dt {dt} exceeds max_gap/10 = {config.max_gap / 10.0}")

    n = topology.node_count
    diameter_bound = (
        config.diameter_bound if config.diameter_bound is not None else topology.diameter
    )
    horizon = (
        config.horizon
        if config.horizon is not None
        else 4.0 * topology.diameter * config.max_gap
    )
    threshold = config.skew_threshold
    if config.variant == "large_c":
        threshold = (1.0 + config.drift_bound) * math.sqrt(diameter_bound + 1)
    slowdown = config.variant == "gradient"
    reduced = 1.0 / diameter_bound

    clocks = _make_clocks(config, n, horizon)
    breaks = [list(c.schedule.breakpoints) for c in clocks]
    drifts = [list(c.schedule.rates) for c in clocks]
    schedule = generate_schedule(
        topology,
        config.max_gap,
        config.schedule_mode,
        config.seed,
        horizon,
        gap_min=config.gap_min,
        scripted=config.scripted_sends,
    )
    events = schedule.events()

    started = [False] * n
    level = [0.0] * n
    upto = [0.0] * n
    views = [{j: 0.0 for j in topology.neighbors(i)} for i in range(n)]
    factors = [{j: 1.0 for j in topology.neighbors(i)} for i in range(n)]
    start_times = np.full(n, np.inf)
    reduced_open: dict[tuple[int, int], float] = {}
    reduced_done: dict[tuple[int, int], list[tuple[float, float]]] = {}

    def clock_rate(i: int, t: float) -> float:
        k = bisect_right(breaks[i], t) - 1
        k = min(max(k, 0), len(drifts[i]) - 1)
        return 1.0 + drifts[i][k]

    def advance(i: int, target: float):
        cur = upto[i]
        if target <= cur:
            return
        if not started[i]:
            upto[i] = target
            return
        factor = min(factors[i].values())
        while cur < target:
            nxt = (math.floor(cur / dt) + 1) * dt
            if nxt <= cur:
                nxt = (math.floor(cur / dt) + 2) * dt
            if nxt > target:
                nxt = target
            level[i] += factor * clock_rate(i, cur) * (nxt - cur)
            cur = nxt
        upto[i] = target

    def deliver(i: int, sender: int, value: float, apply_step2: bool, t: float):
        views[i][sender] = value
        if not apply_step2:
            return
        if slowdown and level[i] >= value + threshold:
            if factors[i][sender] == 1.0:
                reduced_open[(i, sender)] = t
            factors[i][sender] = reduced
        else:
            if factors[i][sender] != 1.0:
                opened = reduced_open.pop((i, sender))
                reduced_done.setdefault((i, sender), []).append((opened, t))
            factors[i][sender] = 1.0
        lo = min(views[i].values())
        hi = max(views[i].values())
        target = min(lo + threshold, hi)
        if target > level[i]:
            level[i] = target

    for i in sorted(config.initiators):
        started[i] = True
        start_times[i] = 0.0

    sample_set = {0.0, horizon}
    sample_set.update(ev.time for ev in events)
    for clock in clocks:
        sample_set.update(b for b in clock.schedule.breakpoints if 0.0 < b < horizon)
    grid = np.array(sorted(sample_set))

    S = grid.size
    logical = np.full((n, S), np.nan)
    rates = np.full((n, S), np.nan)
    alphas = np.full((n, S), np.nan)
    ei = 0
    for col, s in enumerate(grid):
        s = float(s)
        while ei < len(events) and events[ei].time <= s:
            ev = events[ei]
            ei += 1
            advance(ev.src, ev.time)
            advance(ev.dst, ev.time)
            if not started[ev.src]:
                continue
            value = level[ev.src]
            if not started[ev.dst]:
                started[ev.dst] = True
                level[ev.dst] = 0.0
                start_times[ev.dst] = ev.time
                deliver(ev.dst, ev.src, value, config.process_on_start, ev.time)
            else:
                deliver(ev.dst, ev.src, value, True, ev.time)
        for i in range(n):
            advance(i, s)
            if started[i]:
                factor = min(factors[i].values())
                logical[i, col] = level[i]
                alphas[i, col] = factor
                rates[i, col] = factor * clock_rate(i, s)
    rates[:, -1] = np.nan

    for key, opened in sorted(reduced_open.items()):
        reduced_done.setdefault(key, []).append((opened, horizon))

    return Trace(
        config=config,
        topology=topology,
        diameter_bound=diameter_bound,
        effective_skew_threshold=threshold,
        horizon=horizon,
        sample_times=grid,
        logical=logical,
        rates=rates,
        alphas=alphas,
        start_times=start_times,
        events=(),
        reduced_intervals={k: tuple(v) for k, v in sorted(reduced_done.items())},
        clocks=clocks,
        history=None,
    )


def compare(trace_a: Trace, trace_b: Trace, tol: float) -> Comparison:
    """Max |logical difference| over common samples and nodes.

    Both traces must come from the same config (hence the same schedule
    and sample grid). A point where one trace has a value and the other
    does not counts as an infinite deviation.
    """
    if trace_a.config != trace_b.config:
        raise ValueError("traces come from different configs")
    if not np.array_equal(trace_a.sample_times, trace_b.sample_times):
        raise ValueError("traces have different sample grids")
    nan_a = np.isnan(trace_a.logical)
    nan_b = np.isnan(trace_b.logical)
    dev = np.where(
        nan_a & nan_b,
        0.0,
        np.where(nan_a != nan_b, np.inf, np.abs(trace_a.logical - trace_b.logical)),
    )
    max_dev = float(dev.max()) if dev.size else 0.0
    first = None
    over = np.argwhere(dev.T > tol)
    if over.size:
        col, node = over[0]
        first = (float(trace_a.sample_times[col]), int(node), float(dev[node, col]))
    return Comparison(max_deviation=max_dev, first_exceedance=first, tolerance=tol)
