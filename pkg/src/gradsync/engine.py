"""Deterministic discrete-event executor.

The engine enforces the two communication assumptions exactly: messages
are delivered at the instant they are sent, and on every directed edge
consecutive sends are at most max_gap apart. Application traffic exists on
every directed edge from the beginning of the run; synchronization
payloads ride on it once the sender has started.

Events at equal times are processed in a fixed order: descending source
id, then ascending destination id, then per-edge sequence. Any fixed order
is admissible under instantaneous processing, and this one prevents a
message relay chain from collapsing a whole path's start-up into a single
instant on the canonical chain scenarios. Within one instant a sender's
payload reflects updates from events already processed at that instant.

Two runs with the same RunConfig produce bit-identical traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import topology as topo_mod
from .clocks import DRIFT_MODES, HardwareClock, make_drift_schedule
from .metrics import NodeHistory, Trace, TraceEvent
from .protocol import (
    VARIANTS,
    ProtocolParams,
    emit_payload,
    fresh_state,
    on_receive,
    on_start,
    rate_factor,
)

__all__ = [
    "TopologySpec",
    "RunConfig",
    "CommSchedule",
    "Event",
    "ConfigError",
    "SCHEDULE_MODES",
    "generate_schedule",
    "validate_config",
    "run",
    "build_wait_chain_scenario",
    "wait_chain_length",
    "config_to_dict",
    "config_from_dict",
]

SCHEDULE_MODES = ("periodic", "random_uniform", "scripted")


class ConfigError(ValueError):
    """Raised when a configuration fails validation; carries all violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class TopologySpec:
    """Declarative topology description, serializable with the run config."""

    kind: str
    n: int | None = None
    rows: int | None = None
    cols: int | None = None
    radius: float | None = None
    seed: int | None = None
    retries: int = 50
    edges: tuple[tuple[int, int], ...] | None = None

    def build(self, default_seed: int = 0) -> "topo_mod.Topology":
        if self.kind == "chain":
            return topo_mod.chain(self.n)
        if self.kind == "ring":
            return topo_mod.ring(self.n)
        if self.kind == "grid":
            return topo_mod.grid(self.rows, self.cols)
        if self.kind == "random_geometric":
            seed = self.seed if self.seed is not None else default_seed
            return topo_mod.random_geometric(self.n, self.radius, seed, self.retries)
        if self.kind == "edge_list":
            return topo_mod.from_edges(self.edges)
        raise topo_mod.TopologyError(f"unknown topology kind {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; two equal configs replay identically.

    diameter_bound is what nodes are told about the diameter (defaults to
    the true one); horizon defaults to 4 * diameter * max_gap, covering
    start-up plus the relaxation window. drift_signs directs the
    adversarial_extreme drift mode per node (+1 fast, -1 slow).
    """

    topology: TopologySpec
    drift_bound: float
    max_gap: float
    skew_threshold: float
    diameter_bound: int | None = None
    horizon: float | None = None
    initiators: tuple[int, ...] = (0,)
    drift_mode: str = "constant"
    drift_dwell: float = 1.0
    drift_value: float = 0.0
    drift_signs: tuple[int, ...] | None = None
    schedule_mode: str = "periodic"
    gap_min: float | None = None
    scripted_sends: dict | None = None
    variant: str = "gradient"
    seed: int = 0
    process_on_start: bool = True
    label: str = ""


@dataclass(frozen=True)
class Event:
    """A send on a directed edge; reception happens at the same instant."""

    time: float
    src: int
    dst: int
    seq: int

    @property
    def order_key(self):
        return (self.time, -self.src, self.dst, self.seq)


@dataclass(frozen=True)
class CommSchedule:
    """Per-directed-edge send times within [0, horizon].

    On every edge the first send is at most max_gap after 0 and every
    consecutive gap is positive and at most max_gap, both as exact float
    comparisons.
    """

    max_gap: float
    horizon: float
    sends: dict = field(default_factory=dict)

    def violations(self) -> list[str]:
        found = []
        for (src, dst), times in sorted(self.sends.items()):
            prev = 0.0
            for t in times:
                gap = t - prev
                if gap <= 0.0:
                    found.append(
                        f"edge {src}->{dst}: send times not increasing at {t}"
                    )
                elif gap > self.max_gap:
                    found.append(
                        f"edge {src}->{dst}: gap {gap} exceeds max_gap {self.max_gap}"
                    )
                prev = t
            if times and self.horizon - times[-1] > self.max_gap:
                found.append(
                    f"edge {src}->{dst}: no send in the last {self.horizon - times[-1]}"
                    f" before the horizon (max_gap {self.max_gap})"
                )
            if not times and self.horizon > self.max_gap:
                found.append(f"edge {src}->{dst}: no sends scheduled")
        return found

    def events(self) -> tuple[Event, ...]:
        out = [
            Event(t, src, dst, k)
            for (src, dst), times in sorted(self.sends.items())
            for k, t in enumerate(times)
        ]
        out.sort(key=lambda e: e.order_key)
        return tuple(out)


def _capped_step(t: float, gap: float, cap: float) -> float:
    """t + gap, nudged down by ulps until the float difference is <= cap."""
    nxt = t + gap
    while nxt - t > cap:
        nxt = math.nextafter(nxt, -math.inf)
    return nxt


def generate_schedule(
    topology: "topo_mod.Topology",
    max_gap: float,
    mode: str,
    seed: int,
    horizon: float,
    gap_min: float | None = None,
    scripted: dict | None = None,
) -> CommSchedule:
    """Build the communication schedule for every directed edge.

    periodic: sends at max_gap, 2*max_gap, ... up to the horizon.
    random_uniform: successive gaps drawn uniformly from (gap_min, max_gap],
        gap_min defaulting to max_gap / 4.
    scripted: explicit per-edge lists, validated against the gap bound.
    """
    if max_gap <= 0:
        raise ConfigError([f"max_gap must be positive, got {max_gap}"])
    sends = {}
    if mode == "periodic":
        times = []
        k = 1
        prev = 0.0
        while True:
            t = _capped_step(prev, (k * max_gap) - prev, max_gap)
            if t > horizon:
                break
            times.append(t)
            prev = t
            k += 1
        shared = tuple(times)
        for edge in topology.directed_edges():
            sends[edge] = shared
    elif mode == "random_uniform":
        low = max_gap / 4.0 if gap_min is None else gap_min
        if not 0.0 <= low < max_gap:
            raise ConfigError(
                [f"gap_min must lie in [0, max_gap), got {low} with max_gap {max_gap}"]
            )
        for src, dst in topology.directed_edges():
            rng = np.random.default_rng((seed, 0x5C4ED, src, dst))
            times = []
            t = 0.0
            while True:
                gap = max_gap - rng.uniform(0.0, max_gap - low)
                t = _capped_step(t, gap, max_gap)
                if t > horizon:
                    break
                times.append(t)
            sends[(src, dst)] = tuple(times)
    elif mode == "scripted":
        if scripted is None:
            raise ConfigError(["scripted schedule mode needs explicit send times"])
        known = set(topology.directed_edges())
        for edge, times in sorted(scripted.items()):
            if tuple(edge) not in known:
                raise ConfigError(
                    [f"scripted edge {edge[0]}->{edge[1]} is not in the topology"]
                )
            sends[tuple(edge)] = tuple(float(t) for t in times)
        for edge in topology.directed_edges():
            sends.setdefault(edge, ())
    else:
        raise ConfigError([f"unknown schedule mode {mode!r}"])

    schedule = CommSchedule(max_gap=max_gap, horizon=horizon, sends=sends)
    problems = schedule.violations()
    if problems:
        raise ConfigError(problems)
    return schedule


def wait_chain_length(
    diameter: int, drift_bound: float, max_gap: float, skew_threshold: float
) -> float:
    """Number of edges a wait chain can span:
    min(diameter, (1 + drift_bound) * diameter * max_gap / skew_threshold).

    Whenever skew_threshold <= (1 + drift_bound) * max_gap, the ratio is at
    least the diameter, so the minimum is exactly the diameter; that case
    is returned directly to keep the result exact in floats.
    """
    if skew_threshold <= (1.0 + drift_bound) * max_gap:
        return float(diameter)
    return min(
        float(diameter),
        (1.0 + drift_bound) * diameter * max_gap / skew_threshold,
    )


def build_wait_chain_scenario(
    diameter: int,
    drift_bound: float,
    max_gap: float,
    skew_threshold: float,
    variant: str = "gradient",
    horizon: float | None = None,
    seed: int = 0,
    process_on_start: bool = True,
) -> RunConfig:
    """Worst-case start-up scenario on a chain of diameter+1 nodes.

    Node 0 initiates and runs fast (+drift_bound); everyone else runs slow
    (-drift_bound). With the periodic schedule each hop starts max_gap
    after its predecessor, so the chain builds the maximal gradient of
    skew_threshold per hop and the head must slow down for about one full
    chain length before relaxation returns. The default horizon
    (2*diameter + 4) * max_gap covers build-up and relaxation.
    """
    if diameter < 1:
        raise ConfigError([f"diameter must be >= 1, got {diameter}"])
    if horizon is None:
        horizon = (2 * diameter + 4) * max_gap
    return RunConfig(
        topology=TopologySpec(kind="chain", n=diameter + 1),
        drift_bound=drift_bound,
        max_gap=max_gap,
        skew_threshold=skew_threshold,
        diameter_bound=diameter,
        horizon=horizon,
        initiators=(0,),
        drift_mode="adversarial_extreme",
        drift_signs=(1,) + (-1,) * diameter,
        schedule_mode="periodic",
        variant=variant,
        seed=seed,
        process_on_start=process_on_start,
        label="wait_chain",
    )


def validate_config(config: RunConfig) -> list[str]:
    """Check every configuration invariant; returns all violations found.

    An empty list means the config is runnable. Validation is the product
    here: every violation names the offending value.
    """
    violations, _ = _validate(config)
    return violations


def _validate(config: RunConfig):
    v: list[str] = []
    if not 0.0 <= config.drift_bound < 1.0:
        v.append(f"drift_bound must be in [0, 1), got {config.drift_bound}")
    if config.max_gap <= 0:
        v.append(f"max_gap must be positive, got {config.max_gap}")
    if config.skew_threshold <= 0:
        v.append(f"skew_threshold must be positive, got {config.skew_threshold}")
    elif config.variant in ("gradient", "no_slowdown") and 0.0 <= config.drift_bound < 1.0:
        limit = (1.0 + config.drift_bound) * config.max_gap
        if config.max_gap > 0 and config.skew_threshold > limit:
            v.append(
                f"skew_threshold {config.skew_threshold} exceeds "
                f"(1+drift_bound)*max_gap = {limit}"
            )
    if config.variant not in VARIANTS:
        v.append(f"unknown variant {config.variant!r}")
    if config.drift_mode not in DRIFT_MODES:
        v.append(f"unknown drift mode {config.drift_mode!r}")
    if config.schedule_mode not in SCHEDULE_MODES:
        v.append(f"unknown schedule mode {config.schedule_mode!r}")
    if config.drift_dwell <= 0:
        v.append(f"drift_dwell must be positive, got {config.drift_dwell}")
    if abs(config.drift_value) > config.drift_bound:
        v.append(
            f"drift_value {config.drift_value} exceeds drift_bound {config.drift_bound}"
        )
    if config.horizon is not None and config.horizon <= 0:
        v.append(f"horizon must be positive, got {config.horizon}")
    if config.gap_min is not None and not 0.0 <= config.gap_min < config.max_gap:
        v.append(
            f"gap_min must lie in [0, max_gap), got {config.gap_min} "
            f"with max_gap {config.max_gap}"
        )

    topology = None
    try:
        topology = config.topology.build(default_seed=config.seed)
    except topo_mod.TopologyError as exc:
        v.append(str(exc))
    if topology is not None:
        n = topology.node_count
        if not config.initiators:
            v.append("initiators must be nonempty")
        else:
            bad = [i for i in config.initiators if not 0 <= i < n]
            if bad:
                v.append(f"initiators out of range: {bad}")
            if len(set(config.initiators)) != len(config.initiators):
                v.append(f"duplicate initiators: {config.initiators}")
        if config.diameter_bound is not None and config.diameter_bound < topology.diameter:
            v.append(
                f"diameter_bound {config.diameter_bound} is below the "
                f"topology diameter {topology.diameter}"
            )
        if config.drift_signs is not None:
            if len(config.drift_signs) != n:
                v.append(
                    f"drift_signs has {len(config.drift_signs)} entries for {n} nodes"
                )
            elif any(s not in (-1, 1) for s in config.drift_signs):
                v.append(f"drift_signs must be +1 or -1, got {config.drift_signs}")
        if config.schedule_mode == "scripted":
            if config.scripted_sends is None:
                v.append("scripted schedule mode needs scripted_sends")
            else:
                horizon = _resolved_horizon(config, topology)
                try:
                    generate_schedule(
                        topology,
                        config.max_gap,
                        "scripted",
                        config.seed,
                        horizon,
                        scripted=config.scripted_sends,
                    )
                except ConfigError as exc:
                    v.extend(exc.violations)
    return v, topology


def _resolved_horizon(config: RunConfig, topology) -> float:
    if config.horizon is not None:
        return config.horizon
    return 4.0 * topology.diameter * config.max_gap


def _make_clocks(config: RunConfig, n: int, horizon: float) -> tuple[HardwareClock, ...]:
    clocks = []
    for i in range(n):
        if config.drift_mode == "constant":
            sched = make_drift_schedule(
                "constant", config.drift_bound, horizon=horizon, value=config.drift_value
            )
        elif config.drift_mode == "adversarial_extreme":
            sign = config.drift_signs[i] if config.drift_signs is not None else 1
            sched = make_drift_schedule(
                "adversarial_extreme", config.drift_bound, horizon=horizon, sign=sign
            )
        else:
            sched = make_drift_schedule(
                "piecewise_random",
                config.drift_bound,
                horizon=horizon,
                dwell=config.drift_dwell,
                seed=(config.seed, 0xD1F7, i),
            )
        clocks.append(HardwareClock(sched))
    return tuple(clocks)


def run(config: RunConfig) -> Trace:
    """Execute one run and record its complete trace.

    At each send on edge (i, j) at time t: if i has started, j receives
    i's logical value at that same t, starting first if this is the first
    payload to reach it; if i has not started, the application message
    carries nothing and j is unaffected. Initiators start at t = 0.
    """
    violations, topology = _validate(config)
    if violations:
        raise ConfigError(violations)
    n = topology.node_count
    diameter_bound = (
        config.diameter_bound if config.diameter_bound is not None else topology.diameter
    )
    horizon = _resolved_horizon(config, topology)
    params = ProtocolParams.for_variant(
        config.skew_threshold, diameter_bound, config.variant, config.drift_bound
    )
    clocks = _make_clocks(config, n, horizon)
    schedule = generate_schedule(
        topology,
        config.max_gap,
        config.schedule_mode,
        config.seed,
        horizon,
        gap_min=config.gap_min,
        scripted=config.scripted_sends,
    )

    states = [fresh_state(i, topology.neighbors(i)) for i in range(n)]
    start_times = np.full(n, np.inf)
    hist_times: list[list[float]] = [[] for _ in range(n)]
    hist_values: list[list[float]] = [[] for _ in range(n)]
    hist_factors: list[list[float]] = [[] for _ in range(n)]
    event_log: list[TraceEvent] = []
    reduced_open: dict[tuple[int, int], float] = {}
    reduced_done: dict[tuple[int, int], list[tuple[float, float]]] = {}

    def record(node: int, t: float):
        hist_times[node].append(t)
        hist_values[node].append(states[node].l_base)
        hist_factors[node].append(rate_factor(states[node]))

    for i in sorted(config.initiators):
        states[i] = on_start(states[i], 0.0, "initiator")
        start_times[i] = 0.0
        record(i, 0.0)

    for ev in schedule.events():
        h_src = clocks[ev.src].hardware_time(ev.time)
        payload = emit_payload(states[ev.src], h_src)
        if payload is None:
            event_log.append(
                TraceEvent(ev.time, ev.time, ev.src, ev.dst, None, False, 0.0)
            )
            continue
        h_dst = clocks[ev.dst].hardware_time(ev.time)
        started_now = False
        if not states[ev.dst].started:
            states[ev.dst] = on_start(states[ev.dst], h_dst, "first_message")
            start_times[ev.dst] = ev.time
            started_now = True
            record(ev.dst, ev.time)
            apply_step2 = config.process_on_start
        else:
            apply_step2 = True
        before = states[ev.dst]
        level_before = before.l_base + rate_factor(before) * (h_dst - before.h_base)
        after = on_receive(
            before, params, ev.src, payload, h_dst, apply_step2=apply_step2
        )
        states[ev.dst] = after
        jump = 0.0
        if after.h_base == h_dst and apply_step2:
            jump = after.l_base - level_before
            record(ev.dst, ev.time)
        old_factor = before.rate_factors[ev.src]
        new_factor = after.rate_factors[ev.src]
        if new_factor != old_factor:
            key = (ev.dst, ev.src)
            if new_factor < 1.0:
                reduced_open[key] = ev.time
            else:
                opened = reduced_open.pop(key)
                reduced_done.setdefault(key, []).append((opened, ev.time))
        event_log.append(
            TraceEvent(ev.time, ev.time, ev.src, ev.dst, payload.value, started_now, jump)
        )

    for key, opened in sorted(reduced_open.items()):
        reduced_done.setdefault(key, []).append((opened, horizon))

    sample_set = {0.0, horizon}
    sample_set.update(ev.send_time for ev in event_log)
    for clock in clocks:
        sample_set.update(b for b in clock.schedule.breakpoints if 0.0 < b < horizon)
    grid = np.array(sorted(sample_set))

    S = grid.size
    logical = np.full((n, S), np.nan)
    rates = np.full((n, S), np.nan)
    alphas = np.full((n, S), np.nan)
    history = []
    for i in range(n):
        ht = np.array(hist_times[i])
        hv = np.array(hist_values[i])
        hf = np.array(hist_factors[i])
        history.append(NodeHistory(times=ht, values=hv, factors=hf))
        if ht.size == 0:
            continue
        idx = np.searchsorted(ht, grid, side="right") - 1
        mask = idx >= 0
        h_grid = clocks[i].hardware_time(grid[mask])
        h_base = clocks[i].hardware_time(ht[idx[mask]])
        logical[i, mask] = hv[idx[mask]] + hf[idx[mask]] * (h_grid - h_base)
        alphas[i, mask] = hf[idx[mask]]
        rates[i, mask] = alphas[i, mask] * clocks[i].rate_at(grid[mask], side="right")
    rates[:, -1] = np.nan

    return Trace(
        config=config,
        topology=topology,
        diameter_bound=diameter_bound,
        effective_skew_threshold=params.skew_threshold,
        horizon=horizon,
        sample_times=grid,
        logical=logical,
        rates=rates,
        alphas=alphas,
        start_times=start_times,
        events=tuple(event_log),
        reduced_intervals={k: tuple(iv) for k, iv in sorted(reduced_done.items())},
        clocks=clocks,
        history=tuple(history),
    )


def _topology_to_dict(spec: TopologySpec) -> dict:
    out = {"kind": spec.kind}
    for name in ("n", "rows", "cols", "radius", "seed"):
        value = getattr(spec, name)
        if value is not None:
            out[name] = value
    if spec.kind == "random_geometric":
        out["retries"] = spec.retries
    if spec.edges is not None:
        out["edges"] = [list(e) for e in spec.edges]
    return out


def _topology_from_dict(data: dict) -> TopologySpec:
    edges = data.get("edges")
    return TopologySpec(
        kind=data["kind"],
        n=data.get("n"),
        rows=data.get("rows"),
        cols=data.get("cols"),
        radius=data.get("radius"),
        seed=data.get("seed"),
        retries=data.get("retries", 50),
        edges=tuple(tuple(e) for e in edges) if edges is not None else None,
    )


def config_to_dict(config: RunConfig) -> dict:
    scripted = None
    if config.scripted_sends is not None:
        scripted = {
            f"{src}->{dst}": list(times)
            for (src, dst), times in sorted(config.scripted_sends.items())
        }
    return {
        "topology": _topology_to_dict(config.topology),
        "drift_bound": config.drift_bound,
        "max_gap": config.max_gap,
        "skew_threshold": config.skew_threshold,
        "diameter_bound": config.diameter_bound,
        "horizon": config.horizon,
        "initiators": list(config.initiators),
        "drift": {
            "mode": config.drift_mode,
            "dwell": config.drift_dwell,
            "value": config.drift_value,
            "signs": list(config.drift_signs) if config.drift_signs else None,
        },
        "schedule": {
            "mode": config.schedule_mode,
            "gap_min": config.gap_min,
            "scripted": scripted,
        },
        "variant": config.variant,
        "seed": config.seed,
        "process_on_start": config.process_on_start,
        "label": config.label,
    }


def config_from_dict(data: dict) -> RunConfig:
    """Parse a config document; raises ConfigError naming any bad field."""
    try:
        drift = data.get("drift", {})
        sched = data.get("schedule", {})
        scripted = sched.get("scripted")
        scripted_sends = None
        if scripted is not None:
            scripted_sends = {}
            for key, times in scripted.items():
                src, dst = key.split("->")
                scripted_sends[(int(src), int(dst))] = tuple(float(t) for t in times)
        signs = drift.get("signs")
        return RunConfig(
            topology=_topology_from_dict(data["topology"]),
            drift_bound=float(data["drift_bound"]),
            max_gap=float(data["max_gap"]),
            skew_threshold=float(data["skew_threshold"]),
            diameter_bound=(
                None if data.get("diameter_bound") is None else int(data["diameter_bound"])
            ),
            horizon=None if data.get("horizon") is None else float(data["horizon"]),
            initiators=tuple(int(i) for i in data.get("initiators", [0])),
            drift_mode=drift.get("mode", "constant"),
            drift_dwell=float(drift.get("dwell", 1.0)),
            drift_value=float(drift.get("value", 0.0)),
            drift_signs=tuple(int(s) for s in signs) if signs is not None else None,
            schedule_mode=sched.get("mode", "periodic"),
            gap_min=None if sched.get("gap_min") is None else float(sched["gap_min"]),
            scripted_sends=scripted_sends,
            variant=data.get("variant", "gradient"),
            seed=int(data.get("seed", 0)),
            process_on_start=bool(data.get("process_on_start", True)),
            label=data.get("label", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([f"malformed config: {exc!r}"]) from exc
