"""Urn state machine for the network contagion process.

Each node holds an urn of red (infection) and black (health) mass.  A node
draws from its *super urn*, the pooled contents of its closed neighborhood,
and the drawn color's reinforcement mass is added to the node's own urn.
All mass arithmetic is type-agnostic: exact ``Fraction`` inputs stay exact,
floats stay floats.  States are values (copy, never mutate in place).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import HypothesisViolation, InvalidParameter, SizeMismatch
from .graph import Network


@dataclass(frozen=True)
class UrnInit:
    """Initial per-node urn contents; every node needs both colors present."""

    red: tuple
    black: tuple

    def __post_init__(self):
        if len(self.red) != len(self.black):
            raise SizeMismatch("red and black initial masses differ in length")
        for i, (r, b) in enumerate(zip(self.red, self.black)):
            if r <= 0 or b <= 0:
                raise InvalidParameter(
                    f"initial masses must be positive on both colors (node {i}: "
                    f"red={r}, black={b})"
                )

    @property
    def node_count(self) -> int:
        return len(self.red)

    @property
    def totals(self) -> tuple:
        return tuple(r + b for r, b in zip(self.red, self.black))


def uniform_init(n: int, red=1, black=1) -> UrnInit:
    return UrnInit(red=(red,) * n, black=(black,) * n)


class DeltaSchedule:
    """Reinforcement masses added after each draw, per node and time step.

    ``red_mass(i, t, ...)`` is the mass added to node i's urn when its draw
    at time t (t >= 1) is red, ``black_mass`` likewise for black.  Both are
    nonnegative; a schedule that is identically zero everywhere degenerates
    into sampling with replacement and is rejected where detectable.
    """

    def red_mass(self, i: int, t: int, state: "NetworkState | None" = None,
                 net: Network | None = None):
        raise NotImplementedError

    def black_mass(self, i: int, t: int, state: "NetworkState | None" = None,
                   net: Network | None = None):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def parameter_values(self) -> tuple:
        """Representative mass values, used to decide exact vs float arithmetic."""
        raise NotImplementedError


class ConstantDelta(DeltaSchedule):
    """Time-constant reinforcement; scalar applies to every node."""

    def __init__(self, red, black=None):
        self.red = red
        self.black = red if black is None else black
        for v in (self.red, self.black):
            for x in v if isinstance(v, (tuple, list)) else (v,):
                if x < 0:
                    raise InvalidParameter("reinforcement masses must be >= 0")

    def _get(self, v, i):
        return v[i] if isinstance(v, (tuple, list)) else v

    def red_mass(self, i, t, state=None, net=None):
        return self._get(self.red, i)

    def black_mass(self, i, t, state=None, net=None):
        return self._get(self.black, i)

    def describe(self):
        fmt = lambda v: [str(x) for x in v] if isinstance(v, (tuple, list)) else str(v)
        return {"kind": "constant", "red": fmt(self.red), "black": fmt(self.black)}

    def parameter_values(self):
        out = []
        for v in (self.red, self.black):
            out.extend(v if isinstance(v, (tuple, list)) else (v,))
        return tuple(out)


class TabulatedDelta(DeltaSchedule):
    """Explicit per-step tables; row t-1 holds the per-node masses for step t."""

    def __init__(self, red_rows: Sequence[Sequence], black_rows: Sequence[Sequence]):
        if len(red_rows) != len(black_rows):
            raise SizeMismatch("red and black tables differ in step count")
        self.red_rows = [tuple(r) for r in red_rows]
        self.black_rows = [tuple(r) for r in black_rows]
        for rows in (self.red_rows, self.black_rows):
            for row in rows:
                if any(x < 0 for x in row):
                    raise InvalidParameter("reinforcement masses must be >= 0")

    def red_mass(self, i, t, state=None, net=None):
        return self.red_rows[t - 1][i]

    def black_mass(self, i, t, state=None, net=None):
        return self.black_rows[t - 1][i]

    def describe(self):
        return {
            "kind": "tabulated",
            "red": [[str(x) for x in row] for row in self.red_rows],
            "black": [[str(x) for x in row] for row in self.black_rows],
        }

    def parameter_values(self):
        return tuple(x for rows in (self.red_rows, self.black_rows)
                     for row in rows for x in row)


class CuringDelta(DeltaSchedule):
    """Black mass tied to the balance threshold of the current state.

    Adds ``multiplier`` times the curing bound (see :func:`curing_delta_bound`)
    of black mass per black draw; multiplier 1 balances the expected added
    red mass against the expected urn growth, larger multipliers push each
    node's urn proportion down, smaller ones let it rise.
    """

    def __init__(self, delta_red, multiplier=1):
        if delta_red < 0 or multiplier < 0:
            raise InvalidParameter("delta_red and multiplier must be >= 0")
        self.delta_red = delta_red
        self.multiplier = multiplier

    def red_mass(self, i, t, state=None, net=None):
        return self.delta_red

    def black_mass(self, i, t, state=None, net=None):
        if state is None or net is None:
            raise InvalidParameter("curing schedule needs the current state and network")
        return self.multiplier * curing_delta_bound(state, net, i, self.delta_red)

    def describe(self):
        return {
            "kind": "curing",
            "red": str(self.delta_red),
            "multiplier": str(self.multiplier),
        }

    def parameter_values(self):
        return (self.delta_red, self.multiplier)


@dataclass
class NetworkState:
    """Urn masses after ``time`` completed draw steps.

    ``red_mass[i] / total_mass[i]`` is node i's individual urn proportion.
    With finite memory M, ``window`` keeps the last M per-step additions so
    they can be expired; base masses (the initial urns) never expire and are
    kept separately for window-based recomputation.
    """

    time: int
    red_mass: list
    total_mass: list
    base_red: tuple
    base_total: tuple
    memory: int | None = None
    window: deque = field(default_factory=deque)

    @property
    def node_count(self) -> int:
        return len(self.red_mass)

    def copy(self) -> "NetworkState":
        return NetworkState(
            time=self.time,
            red_mass=list(self.red_mass),
            total_mass=list(self.total_mass),
            base_red=self.base_red,
            base_total=self.base_total,
            memory=self.memory,
            window=deque((list(r), list(b)) for r, b in self.window),
        )

    def urn_proportion(self, i: int):
        return self.red_mass[i] / self.total_mass[i]

    def urn_proportions(self) -> list:
        return [r / x for r, x in zip(self.red_mass, self.total_mass)]

    def snapshot(self) -> dict:
        """JSON-ready summary of the state."""
        return {
            "time": self.time,
            "red_mass": [str(v) for v in self.red_mass],
            "total_mass": [str(v) for v in self.total_mass],
            "memory": self.memory,
        }


def initial_state(net: Network, init: UrnInit, memory: int | None = None) -> NetworkState:
    if init.node_count != net.node_count:
        raise SizeMismatch(
            f"urn init has {init.node_count} nodes, network has {net.node_count}"
        )
    if memory is not None and memory < 1:
        raise InvalidParameter(f"finite memory must be >= 1, got {memory}")
    return NetworkState(
        time=0,
        red_mass=list(init.red),
        total_mass=list(init.totals),
        base_red=tuple(init.red),
        base_total=init.totals,
        memory=memory,
    )


def super_urn_proportion(state: NetworkState, net: Network, i: int):
    """Red fraction of node i's super urn (pooled closed neighborhood)."""
    nbrs = net.closed_neighbors[i]
    red = sum(state.red_mass[j] for j in nbrs)
    total = sum(state.total_mass[j] for j in nbrs)
    return red / total


def conditional_draw_probabilities(state: NetworkState, net: Network) -> list:
    """P(next draw is red | full history), one entry per node."""
    return [super_urn_proportion(state, net, i) for i in range(net.node_count)]


def apply_draws(state: NetworkState, net: Network, draws: Sequence[int],
                sched: DeltaSchedule) -> NetworkState:
    """Advance one step deterministically given the draw outcomes.

    Node i gains its red mass for the step if draws[i] is 1, else its black
    mass.  In finite-memory mode the additions made M steps ago are expired
    first, so the returned state's masses cover only the trailing window.
    """
    if len(draws) != net.node_count:
        raise SizeMismatch(f"need {net.node_count} draws, got {len(draws)}")
    new = state.copy()
    t = state.time + 1
    red_add = []
    black_add = []
    for i, d in enumerate(draws):
        if d:
            r, b = sched.red_mass(i, t, state, net), 0
        else:
            r, b = 0, sched.black_mass(i, t, state, net)
        red_add.append(r)
        black_add.append(b)
        new.red_mass[i] = new.red_mass[i] + r
        new.total_mass[i] = new.total_mass[i] + r + b
    if state.memory is not None:
        if len(new.window) == state.memory:
            old_r, old_b = new.window.popleft()
            for i in range(net.node_count):
                new.red_mass[i] = new.red_mass[i] - old_r[i]
                new.total_mass[i] = new.total_mass[i] - old_r[i] - old_b[i]
        new.window.append((red_add, black_add))
    new.time = t
    return new


def sample_step(state: NetworkState, net: Network, sched: DeltaSchedule, rng):
    """Draw one step: independent Bernoulli(super-urn proportion) per node.

    Consumes exactly ``node_count`` uniforms from ``rng`` in node order, so
    trajectories are reproducible from the generator stream.
    """
    probs = conditional_draw_probabilities(state, net)
    u = rng.random(net.node_count)
    draws = tuple(1 if u[i] < probs[i] else 0 for i in range(net.node_count))
    return draws, apply_draws(state, net, draws, sched)


@dataclass(frozen=True)
class DrawRecord:
    """Time-indexed draw outcomes; ``steps[t-1][i]`` is node i's draw at time t."""

    steps: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.steps)

    def node_sequence(self, i: int) -> tuple[int, ...]:
        return tuple(step[i] for step in self.steps)


def simulate_path(net: Network, init: UrnInit, sched: DeltaSchedule, horizon: int,
                  rng, memory: int | None = None):
    """Reference scalar sampler: returns (DrawRecord, final NetworkState)."""
    state = initial_state(net, init, memory=memory)
    steps = []
    for _ in range(horizon):
        draws, state = sample_step(state, net, sched, rng)
        steps.append(draws)
    return DrawRecord(steps=tuple(steps)), state


def finite_memory_conditional(state: NetworkState, net: Network, i: int):
    """P(next draw red) for a finite-memory state, recomputed from the window.

    Independent of the incrementally maintained masses: starts from the base
    (initial) neighborhood totals and adds only the windowed additions, so it
    depends on nothing but the last M draws.  While the window is not yet
    full (time <= M) this coincides with the full-history value.
    """
    if state.memory is None:
        raise InvalidParameter("state has infinite memory; use super_urn_proportion")
    nbrs = net.closed_neighbors[i]
    red = sum(state.base_red[j] for j in nbrs)
    total = sum(state.base_total[j] for j in nbrs)
    for red_add, black_add in state.window:
        for j in nbrs:
            red = red + red_add[j]
            total = total + red_add[j] + black_add[j]
    return red / total


def expected_urn_increment(state: NetworkState, net: Network, i: int, delta):
    """One-step conditional drift of node i's urn proportion.

    Valid only under equal urn totals and a constant equal red/black
    reinforcement mass ``delta``; the drift is then
    delta * sum_{j ~ i} (U_j - U_i) / ((X + delta) * (deg_i + 1)),
    which vanishes exactly when node i's neighbors average to its own
    proportion (and hence for every node of a network where all proportions
    agree).
    """
    totals = state.total_mass
    if any(x != totals[0] for x in totals):
        raise HypothesisViolation(
            "equal urn totals across nodes are required for the drift formula"
        )
    if delta < 0:
        raise InvalidParameter("delta must be >= 0")
    u = state.urn_proportions()
    diff_sum = sum(u[j] - u[i] for j in net.neighbors[i])
    denom = (totals[i] + delta) * (net.degrees[i] + 1)
    return delta * diff_sum / denom


def curing_delta_bound(state: NetworkState, net: Network, i: int, delta_red):
    """Black-mass threshold delta_red * (1 - U_i) * S_i / (U_i * (1 - S_i)).

    Adding exactly this much black mass per black draw makes the one-step
    ratio of conditional expectations E[red mass] / E[total mass] equal the
    current proportion U_i; the conditional expectation of the proportion
    itself crosses U_i at this threshold only when U_i = S_i, and in the
    limit of urn totals large against the added masses.  E[U'] is strictly
    decreasing in the black mass, and zero black mass always gives a
    nonnegative drift.
    """
    u = state.urn_proportion(i)
    s = super_urn_proportion(state, net, i)
    return delta_red * (1 - u) * s / (u * (1 - s))


def network_susceptibility(state: NetworkState):
    """Average individual urn proportion over all nodes."""
    u = state.urn_proportions()
    return sum(u) / len(u)
