"""Continuous-time rewiring processes on ``[n]``.

The jump measure is a finite atomic mixture of i.i.d. rewiring laws (global
rewirings, each atom with rate ``lambda_k``) plus single-edge updates that
set a pair to 0 at rate ``c0`` and to 1 at rate ``c1``.  Only atoms that act
as a non-identity map on ``[n]`` matter, so the event stream on ``[n]`` is a
superposition of finitely many Poisson streams, simulated by competing
exponential clocks.

RNG consumption per event (stable across releases, relied on by replays):

1. one exponential waiting time with the total event rate;
2. one uniform choosing the event class (set-to-0, set-to-1, atom k) in
   proportion to the class rates;
3. a local event then draws one integer (the pair); a global event draws
   its map by rejection on the identity (see
   :func:`rewiring.measures.sample_rewiring`).

The event stream does not depend on the state, which is what makes two
trajectories driven by one stream a coupling.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .graph import (
    Graph,
    RewiringMap,
    all_graphs,
    all_maps,
    apply_rewiring,
    distance,
    num_pairs,
    pair_arrays,
    pair_index,
    parse_edge_list,
    format_edge_list,
    restrict,
)
from .measures import RewiringMeasureSpec, er_transition_prob, iid_limit_density, pair_stat, sample_rewiring

log = logging.getLogger(__name__)

MAX_GENERATOR_ORDER = 4


@dataclass(frozen=True)
class Event:
    """One atom of the thinned event stream.

    Local events carry a 0-based ``pair`` ``(i, j)`` with ``i < j`` and the
    target ``bit``; global events carry the 0-based atom index
    ``component`` and the map drawn for it.
    """

    time: float
    kind: str
    pair: Optional[tuple[int, int]] = None
    bit: Optional[int] = None
    component: Optional[int] = None
    map: Optional[RewiringMap] = None

    def as_map(self, n: int) -> RewiringMap:
        if self.kind == "global":
            return self.map
        return RewiringMap.single_edge_update(n, self.pair[0], self.pair[1], self.bit)


@dataclass
class CtmcTrajectory:
    initial: Graph
    events: list[Event]
    horizon: float
    snapshots: list[tuple[float, Graph]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.initial.n

    def path(self) -> Iterator[tuple[float, Graph]]:
        """``(t, state)`` at time 0 and after every event."""
        bits = self.initial.bits.copy()
        yield 0.0, self.initial
        for ev in self.events:
            _apply_event(bits, ev)
            yield ev.time, Graph(self.n, bits)

    def final(self) -> Graph:
        bits = self.initial.bits.copy()
        for ev in self.events:
            _apply_event(bits, ev)
        return Graph(self.n, bits)

    def states_at(self, times: Sequence[float]) -> list[Graph]:
        return _states_at(self.initial, self.events, times)


def _apply_event(bits: np.ndarray, ev: Event) -> None:
    if ev.kind == "local":
        bits[pair_index(*ev.pair)] = ev.bit
    else:
        bits[:] = np.where(bits == 1, ev.map.w1, ev.map.w0)


def _states_at(initial: Graph, events: Sequence[Event], times: Sequence[float]) -> list[Graph]:
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot times must be nondecreasing")
    bits = initial.bits.copy()
    out = []
    k = 0
    for t in times:
        while k < len(events) and events[k].time <= t:
            _apply_event(bits, events[k])
            k += 1
        out.append(Graph(initial.n, bits))
    return out


@dataclass
class RateSummary:
    n: int
    local_total: float
    global_total: float
    atom_rates: list[float]
    spec: RewiringMeasureSpec

    @property
    def total(self) -> float:
        return self.local_total + self.global_total

    def exit_rate(self, g: Graph):
        """Total rate of jumps that change ``g``."""
        n1 = g.n_edges
        n0 = num_pairs(g.n) - n1
        out = self.spec.c0 * n1 + self.spec.c1 * n0
        for atom in self.spec.global_atoms:
            stay = (1 - atom.limit.p0) ** n0 * atom.limit.p1**n1
            out += atom.rate * (1 - stay)
        return out


def rate_summary(spec: RewiringMeasureSpec, n: int) -> RateSummary:
    npairs = num_pairs(n)
    atom_rates = [atom.event_rate(n) for atom in spec.global_atoms]
    return RateSummary(n, npairs * (spec.c0 + spec.c1), sum(atom_rates, 0), atom_rates, spec)


def sample_events(spec: RewiringMeasureSpec, n: int, horizon: float, rng: np.random.Generator) -> list[Event]:
    """Event stream on ``[n]`` over ``[0, horizon]``."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    rates = rate_summary(spec, n)
    npairs = num_pairs(n)
    class_rates = np.array([npairs * spec.c0, npairs * spec.c1] + rates.atom_rates, dtype=float)
    total = float(class_rates.sum())
    events: list[Event] = []
    if total <= 0 or horizon == 0:
        return events
    for k, atom in enumerate(spec.global_atoms, start=1):
        # rejection on the identity accepts with probability 1 - ((1-p0) p1)^N
        log.debug("atom %d: non-identity acceptance probability %.6g", k, float(1 - atom.limit.identity_prob(n)))
    cumulative = np.cumsum(class_rates) / total
    rows, cols = pair_arrays(n)
    t = 0.0
    while True:
        t += rng.exponential(1.0 / total)
        if t > horizon:
            return events
        cls = min(int(np.searchsorted(cumulative, rng.random(), side="right")), len(class_rates) - 1)
        if cls < 2:
            p = int(rng.integers(npairs))
            events.append(Event(t, "local", pair=(int(rows[p]), int(cols[p])), bit=cls))
        else:
            k = cls - 2
            w = sample_rewiring(spec.global_atoms[k].limit, n, rng, condition_nonidentity=True)
            events.append(Event(t, "global", component=k, map=w))


def simulate_ctmc(
    g0: Graph,
    spec: RewiringMeasureSpec,
    horizon: float,
    rng: np.random.Generator,
    snapshot_times: Optional[Sequence[float]] = None,
) -> CtmcTrajectory:
    events = sample_events(spec, g0.n, horizon, rng)
    snaps = []
    if snapshot_times is not None:
        snapshot_times = list(snapshot_times)
        snaps = list(zip(snapshot_times, _states_at(g0, events, snapshot_times)))
    return CtmcTrajectory(g0, events, horizon, snaps)


def hitting_time(
    g0: Graph,
    spec: RewiringMeasureSpec,
    target: Graph,
    rng: np.random.Generator,
    max_time: float = math.inf,
) -> float:
    """First time the process started at ``g0`` is in ``target`` (``inf`` if not by ``max_time``)."""
    if g0 == target:
        return 0.0
    n = g0.n
    rates = rate_summary(spec, n)
    npairs = num_pairs(n)
    class_rates = np.array([npairs * spec.c0, npairs * spec.c1] + rates.atom_rates, dtype=float)
    total = float(class_rates.sum())
    if total <= 0:
        return math.inf
    cumulative = np.cumsum(class_rates) / total
    bits = g0.bits.copy()
    goal = target.bits
    t = 0.0
    while True:
        t += rng.exponential(1.0 / total)
        if t > max_time:
            return math.inf
        cls = min(int(np.searchsorted(cumulative, rng.random(), side="right")), len(class_rates) - 1)
        if cls < 2:
            bits[int(rng.integers(npairs))] = cls
        else:
            w = sample_rewiring(spec.global_atoms[cls - 2].limit, n, rng, condition_nonidentity=True)
            bits = np.where(bits == 1, w.w1, w.w0)
        if np.array_equal(bits, goal):
            return t


def time_average_edge_density(traj: CtmcTrajectory, burn_in: float = 0.0) -> float:
    """Fraction of pair-time spent on, over ``[burn_in, horizon]``."""
    npairs = num_pairs(traj.n)
    if npairs == 0 or traj.horizon <= burn_in:
        raise ValueError("empty averaging window")
    acc = 0.0
    prev_t, prev_edges = 0.0, traj.initial.n_edges
    for t, g in list(traj.path())[1:] + [(traj.horizon, None)]:
        lo, hi = max(prev_t, burn_in), t
        if hi > lo:
            acc += prev_edges * (hi - lo)
        if g is not None:
            prev_t, prev_edges = t, g.n_edges
    return acc / (npairs * (traj.horizon - burn_in))


def _local_rate(spec: RewiringMeasureSpec, g: Graph, g2: Graph):
    diff = np.flatnonzero(g.bits != g2.bits)
    if diff.size != 1:
        return 0
    return spec.c1 if g2.bits[diff[0]] == 1 else spec.c0


def jump_rate(spec: RewiringMeasureSpec, g: Graph, g2: Graph, method: str = "closed"):
    """Rate of jumping from ``g`` to a different graph ``g2``.

    ``method="brute"`` sums the atom laws over every rewiring map of
    ``[n]`` (``n <= 3``); ``"closed"`` uses the independent-edge kernel.
    """
    if g.n != g2.n:
        raise ValueError(f"order mismatch: {g.n} vs {g2.n}")
    if g == g2:
        raise ValueError("jump rate is only defined between distinct states")
    rate = _local_rate(spec, g, g2)
    if method == "closed":
        for atom in spec.global_atoms:
            rate += atom.rate * er_transition_prob(atom.limit.p0, atom.limit.p1, g, g2)
    elif method == "brute":
        if g.n > 3:
            raise ValueError("brute-force map sums are limited to n <= 3")
        hits = [w for w in all_maps(g.n) if apply_rewiring(w, g) == g2]
        for atom in spec.global_atoms:
            rate += atom.rate * sum(iid_limit_density(atom.limit, w) for w in hits)
    else:
        raise ValueError(f"unknown method {method!r}")
    return rate


def generator_row(spec: RewiringMeasureSpec, g: Graph, method: str = "closed") -> dict[Graph, float]:
    if g.n > MAX_GENERATOR_ORDER:
        raise ValueError(f"generator rows are limited to n <= {MAX_GENERATOR_ORDER}")
    row = {}
    for g2 in all_graphs(g.n):
        if g2 != g:
            row[g2] = jump_rate(spec, g, g2, method)
    row[g] = -sum(row.values())
    return row


def generator_matrix(spec: RewiringMeasureSpec, n: int, method: str = "closed") -> np.ndarray:
    """Dense generator over all graphs of order ``n``, indexed by graph index."""
    graphs = all_graphs(n)
    probe = generator_row(spec, graphs[0], method)[graphs[0]]
    exact = isinstance(probe, Fraction)
    q = np.empty((len(graphs), len(graphs)), dtype=object if exact else float)
    for a, g in enumerate(graphs):
        for g2, r in generator_row(spec, g, method).items():
            q[a, g2.index] = r
    return q


def generator_family(spec: RewiringMeasureSpec, method: str = "closed"):
    """Callable ``n -> generator matrix`` for the lumping and permutation verifiers."""
    return lambda n: generator_matrix(spec, n, method)


@dataclass
class CoupledTrajectory:
    first: CtmcTrajectory
    second: CtmcTrajectory
    distances: list[Fraction]

    @property
    def nonincreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.distances, self.distances[1:]))


def couple(
    g0: Graph,
    g0_other: Graph,
    spec: RewiringMeasureSpec,
    horizon: float,
    rng: np.random.Generator,
) -> CoupledTrajectory:
    """Drive two initial states with one event stream.

    ``distances[0]`` is the initial distance and ``distances[k]`` the distance
    right after event ``k``.
    """
    if g0.n != g0_other.n:
        raise ValueError(f"order mismatch: {g0.n} vs {g0_other.n}")
    events = sample_events(spec, g0.n, horizon, rng)
    a = CtmcTrajectory(g0, events, horizon)
    b = CtmcTrajectory(g0_other, events, horizon)
    dists = [distance(x, y) for (_, x), (_, y) in zip(a.path(), b.path())]
    return CoupledTrajectory(a, b, dists)


def restrict_trajectory(traj: CtmcTrajectory, m: int) -> CtmcTrajectory:
    """Project onto ``[m]``, dropping events that act as the identity there."""
    kept = []
    for ev in traj.events:
        if ev.kind == "local":
            if ev.pair[1] < m:
                kept.append(ev)
            continue
        w = restrict(ev.map, m)
        if not w.is_identity():
            kept.append(Event(ev.time, "global", component=ev.component, map=w))
    return CtmcTrajectory(restrict(traj.initial, m), kept, traj.horizon)


def flip_count(traj: CtmcTrajectory, i: int = 0, j: int = 1) -> int:
    """Number of state changes of pair ``{i, j}`` (0-based) along the trajectory."""
    p = pair_index(i, j)
    count = 0
    prev = traj.initial.bits[p]
    for _, g in list(traj.path())[1:]:
        if g.bits[p] != prev:
            count += 1
            prev = g.bits[p]
    return count


def event_record(ev: Event) -> dict:
    if ev.kind == "local":
        return {"t": ev.time, "kind": "local", "pair": [ev.pair[0] + 1, ev.pair[1] + 1], "bit": ev.bit}
    return {"t": ev.time, "kind": "global", "component": ev.component + 1, "map": ev.map.to_hex()}


def write_event_log(traj: CtmcTrajectory, path) -> None:
    """JSON-lines; pairs and components are 1-based, maps are hex base-4 codes."""
    with open(path, "w") as fh:
        for ev in traj.events:
            fh.write(json.dumps(event_record(ev), separators=(",", ":")) + "\n")


def read_event_log(path, n: int) -> list[Event]:
    events = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if rec["kind"] == "local":
                    i, j = rec["pair"]
                    events.append(Event(float(rec["t"]), "local", pair=(i - 1, j - 1), bit=int(rec["bit"])))
                elif rec["kind"] == "global":
                    w = RewiringMap.from_hex(n, rec["map"])
                    events.append(Event(float(rec["t"]), "global", component=int(rec["component"]) - 1, map=w))
                else:
                    raise ValueError(f"unknown event kind {rec['kind']!r}")
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return events


def write_snapshots(snapshots: Sequence[tuple[float, Graph]], path) -> None:
    """Edge-list blocks, each preceded by a ``t <time>`` line, separated by blank lines."""
    blocks = [f"t {t!r}\n" + format_edge_list(g) for t, g in snapshots]
    with open(path, "w") as fh:
        fh.write("\n".join(blocks))


def read_snapshots(path) -> list[tuple[float, Graph]]:
    out = []
    with open(path) as fh:
        text = fh.read()
    for block in text.split("\n\n"):
        lines = [ln for ln in block.splitlines() if ln.strip()]
        if not lines:
            continue
        head = lines[0].split()
        if len(head) != 2 or head[0] != "t":
            raise ValueError(f"{path}: snapshot block must start with 't <time>'")
        out.append((float(head[1]), parse_edge_list("\n".join(lines[1:]))))
    return out
