"""Exact finite-horizon distributions of the contagion draw process.

The reference path enumerates every draw assignment with ``Fraction``
arithmetic, so distribution identities can be asserted with ``==`` instead
of tolerances.  A float path covers assignment spaces too large for exact
mode, and a dynamic program provides node marginals on complete networks
far beyond the enumeration cap.  Classical single-urn joints, divergence
rates, and the limiting Beta density/CDF live here as well.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.special import betainc

from . import contagion
from .contagion import DeltaSchedule, UrnInit
from .errors import (
    CapExceeded,
    DomainError,
    InvalidParameter,
    SupportMismatch,
)
from .graph import Network

ENUMERATION_CAP = 24  # max node_count * horizon, i.e. at most 2^24 assignments


@dataclass(frozen=True)
class PolyaParams:
    """Classical single-urn process parameters: initial red fraction and
    reinforcement mass normalized by the urn total."""

    rho: object
    delta: object

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise InvalidParameter(f"rho must lie in (0, 1), got {self.rho}")
        if self.delta < 0:
            raise InvalidParameter(f"delta must be >= 0, got {self.delta}")


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise InvalidParameter("Beta parameters must be positive")

    @classmethod
    def from_polya(cls, params: PolyaParams) -> "BetaParams":
        if params.delta <= 0:
            raise InvalidParameter("the limit distribution needs delta > 0")
        return cls(
            alpha=float(params.rho / params.delta),
            beta=float((1 - params.rho) / params.delta),
        )


def _check_cap(node_count: int, horizon: int, cap: int) -> int:
    bits = node_count * horizon
    if bits > cap:
        raise CapExceeded(
            f"{node_count} nodes x {horizon} steps = 2^{bits} assignments "
            f"exceeds the cap of 2^{cap}"
        )
    return bits


@dataclass
class JointTable:
    """Probability of every draw assignment up to a fixed horizon.

    Assignments are encoded as integers with bit (t-1)*N + i holding node
    i's draw at time t.  ``probs`` is a list of Fractions in exact mode or a
    float ndarray otherwise, indexed by that code.
    """

    node_count: int
    horizon: int
    probs: object
    exact: bool

    def __post_init__(self):
        self._bits = self.node_count * self.horizon

    def code_of(self, assignment: Sequence[Sequence[int]]) -> int:
        if len(assignment) != self.node_count:
            raise SupportMismatch(f"assignment must cover {self.node_count} nodes")
        code = 0
        for i, seq in enumerate(assignment):
            if len(seq) != self.horizon:
                raise SupportMismatch(f"node {i} sequence must have length {self.horizon}")
            for t, a in enumerate(seq, start=1):
                if a:
                    code |= 1 << ((t - 1) * self.node_count + i)
        return code

    def probability(self, assignment: Sequence[Sequence[int]]):
        return self.probs[self.code_of(assignment)]

    def total(self):
        if self.exact:
            return sum(self.probs)
        return float(np.sum(self.probs))

    def items(self):
        return enumerate(self.probs)

    def node_marginal(self, i: int, window: tuple[int, int] | None = None) -> dict:
        """Distribution of node i's draws over the window (1-indexed, inclusive),
        summing out all other coordinates.  Defaults to the full horizon."""
        lo, hi = window if window is not None else (1, self.horizon)
        if not (1 <= lo <= hi <= self.horizon):
            raise InvalidParameter(f"window {window} not within horizon {self.horizon}")
        shifts = [(t - 1) * self.node_count + i for t in range(lo, hi + 1)]
        out: dict = {}
        for code, p in enumerate(self.probs):
            key = tuple((code >> s) & 1 for s in shifts)
            if key in out:
                out[key] = out[key] + p
            else:
                out[key] = p
        return out

    def event_probability(self, fixed: Mapping[tuple[int, int], int]):
        """Probability that each (node, time) in ``fixed`` drew the given bit."""
        shifts = {}
        for (i, t), bit in fixed.items():
            if not (0 <= i < self.node_count and 1 <= t <= self.horizon):
                raise InvalidParameter(f"(node={i}, time={t}) outside the table")
            shifts[(t - 1) * self.node_count + i] = bit
        total = None
        for code, p in enumerate(self.probs):
            if all((code >> s) & 1 == bit for s, bit in shifts.items()):
                total = p if total is None else total + p
        return 0 if total is None else total

    def write_csv(self, target, header_lines: Sequence[str] = ()) -> None:
        """One row per assignment: a_i_t columns node-major, then the
        probability as num/den (exact) or a float column.  ``target`` is a
        path or a text stream."""
        if hasattr(target, "write"):
            self._write_csv(target, header_lines)
        else:
            with open(target, "w", newline="") as fh:
                self._write_csv(fh, header_lines)

    def _write_csv(self, fh, header_lines) -> None:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        cols = [f"a_{i + 1}_{t + 1}" for i in range(self.node_count)
                for t in range(self.horizon)]
        writer.writerow(cols + (["p_num", "p_den"] if self.exact else ["p"]))
        for code, p in enumerate(self.probs):
            bits = [
                (code >> ((t * self.node_count) + i)) & 1
                for i in range(self.node_count)
                for t in range(self.horizon)
            ]
            if self.exact:
                frac = Fraction(p)
                writer.writerow(bits + [frac.numerator, frac.denominator])
            else:
                writer.writerow(bits + [repr(float(p))])


def joint_probability(net: Network, init: UrnInit, sched: DeltaSchedule,
                      assignment: Sequence[Sequence[int]],
                      memory: int | None = None):
    """Chain-rule probability of one full assignment (node-major sequences)."""
    n = len(assignment[0])
    state = contagion.initial_state(net, init, memory=memory)
    prob = Fraction(1) if _is_exact(init, sched) else 1.0
    for t in range(1, n + 1):
        draws = tuple(assignment[i][t - 1] for i in range(net.node_count))
        s = contagion.conditional_draw_probabilities(state, net)
        for i, d in enumerate(draws):
            prob = prob * (s[i] if d else 1 - s[i])
        state = contagion.apply_draws(state, net, draws, sched)
    return prob


def _is_exact(init: UrnInit, sched: DeltaSchedule) -> bool:
    probe = [*init.red, *init.black, *sched.parameter_values()]
    return all(isinstance(v, (int, Fraction)) for v in probe)


def enumerate_joint(net: Network, init: UrnInit, sched: DeltaSchedule, horizon: int,
                    exact: bool = True, cap: int = ENUMERATION_CAP,
                    memory: int | None = None) -> JointTable:
    """Full assignment table at the given horizon.

    Exact mode requires rational inputs and produces a table with total mass
    exactly 1.  Float mode expands level by level with numpy and handles the
    full default cap (2^24) in bounded memory.
    """
    if horizon < 1:
        raise InvalidParameter("horizon must be >= 1")
    bits = _check_cap(net.node_count, horizon, cap)
    if exact:
        probs: list = [None] * (1 << bits)
        start = contagion.initial_state(net, init, memory=memory)
        _enumerate_exact(net, sched, start, Fraction(1), 0, horizon, probs)
        return JointTable(net.node_count, horizon, probs, exact=True)
    return _enumerate_float(net, init, sched, horizon, memory=memory)


def _combo_products(prob, s):
    """prob * prod_i (s_i or 1-s_i) for every draw combo, built by doubling."""
    products = [prob]
    for si in s:
        fail = 1 - si
        products = [p * fail for p in products] + [p * si for p in products]
    return products


def _enumerate_exact(net, sched, state, prob, code, remaining, probs):
    n = net.node_count
    s = contagion.conditional_draw_probabilities(state, net)
    shift = state.time * n
    products = _combo_products(prob, s)
    if remaining == 1:
        for combo in range(1 << n):
            probs[code | (combo << shift)] = products[combo]
        return
    for combo in range(1 << n):
        draws = tuple((combo >> i) & 1 for i in range(n))
        child = contagion.apply_draws(state, net, draws, sched)
        _enumerate_exact(net, sched, child, products[combo],
                         code | (combo << shift), remaining - 1, probs)


def _enumerate_float(net, init, sched, horizon, memory=None):
    """Vectorized level-by-level expansion in float64.

    Finite memory is supported for time-only schedules by replaying the
    expiring step's additions, which are then reconstructable from the code
    itself; state-dependent (curing) schedules require infinite memory here.
    """
    n = net.node_count
    state_dependent = isinstance(sched, contagion.CuringDelta)
    if state_dependent and memory is not None:
        raise InvalidParameter(
            "float enumeration does not support curing schedules with finite memory"
        )
    closed = net.closed_adjacency
    probs = np.array([1.0], dtype=np.float64)
    red = np.array([[float(r) for r in init.red]])
    total = np.array([[float(v) for v in init.totals]])
    combos = np.array([[(c >> i) & 1 for i in range(n)] for c in range(1 << n)],
                      dtype=np.float64)
    for t in range(1, horizon + 1):
        s = (red @ closed) / (total @ closed)
        width = probs.shape[0]
        new_probs = np.empty(width << n, dtype=np.float64)
        new_red = np.empty((width << n, n), dtype=np.float64)
        new_total = np.empty_like(new_red)
        if state_dependent:
            dr = float(sched.delta_red) * np.ones_like(red)
            u = red / total
            db = float(sched.multiplier) * float(sched.delta_red) \
                * (1 - u) * s / (u * (1 - s))
        else:
            dr = np.array([float(sched.red_mass(i, t)) for i in range(n)])[None, :]
            db = np.array([float(sched.black_mass(i, t)) for i in range(n)])[None, :]
        for c in range(1 << n):
            z = combos[c]
            factor = np.prod(np.where(z > 0, s, 1.0 - s), axis=1)
            block = slice(c * width, (c + 1) * width)
            new_probs[block] = probs * factor
            new_red[block] = red + z * dr
            new_total[block] = total + z * dr + (1 - z) * db
        if memory is not None and t > memory:
            expire_t = t - memory
            er = np.array([float(sched.red_mass(i, expire_t)) for i in range(n)])
            eb = np.array([float(sched.black_mass(i, expire_t)) for i in range(n)])
            codes = np.arange(width << n, dtype=np.int64)
            for i in range(n):
                bit = ((codes >> ((expire_t - 1) * n + i)) & 1).astype(np.float64)
                new_red[:, i] -= bit * er[i]
                new_total[:, i] -= bit * er[i] + (1 - bit) * eb[i]
        probs, red, total = new_probs, new_red, new_total
    return JointTable(n, horizon, probs, exact=False)


def iter_histories(net: Network, init: UrnInit, sched: DeltaSchedule, steps: int,
                   memory: int | None = None, cap: int = ENUMERATION_CAP):
    """Yield (draw steps, probability, state) for every history of the given length."""
    _check_cap(net.node_count, steps, cap)
    start = contagion.initial_state(net, init, memory=memory)
    one = Fraction(1) if _is_exact(init, sched) else 1.0
    yield from _iter_histories(net, sched, start, (), one, steps)


def _iter_histories(net, sched, state, prefix, prob, remaining):
    if remaining == 0:
        yield prefix, prob, state
        return
    n = net.node_count
    s = contagion.conditional_draw_probabilities(state, net)
    for combo in range(1 << n):
        draws = tuple((combo >> i) & 1 for i in range(n))
        p = prob
        for i, d in enumerate(draws):
            p = p * (s[i] if d else 1 - s[i])
        child = contagion.apply_draws(state, net, draws, sched)
        yield from _iter_histories(net, sched, child, prefix + (draws,), p, remaining - 1)


@dataclass(frozen=True)
class InfectionRate:
    value: object
    exact: bool
    trials: int | None = None


def average_infection_rate(net: Network, init: UrnInit, sched: DeltaSchedule, n: int,
                           mode: str = "exact", cap: int = ENUMERATION_CAP,
                           trials: int = 100_000, seed: int = 0,
                           memory: int | None = None) -> InfectionRate:
    """Average over nodes of P(draw at time n is red).

    ``mode='exact'`` enumerates and raises ``CapExceeded`` past the cap;
    ``mode='auto'`` falls back to a Monte Carlo estimate flagged as inexact.
    """
    try:
        _check_cap(net.node_count, n - 1, cap)
    except CapExceeded:
        if mode == "exact":
            raise
        from .montecarlo import RunConfig, run_trials

        cfg = RunConfig(net=net, init=init, sched=sched, horizon=n,
                        trials=trials, seed=seed, memory=memory)
        stats = run_trials(cfg)
        return InfectionRate(value=float(stats.infection_rate[n]), exact=False,
                             trials=trials)
    # P(Z_{i,n}=1) = E[S_{i,n-1}]: average the conditional over all histories
    # of length n-1.
    acc = [None] * net.node_count
    for _, prob, state in iter_histories(net, init, sched, n - 1, memory=memory, cap=cap):
        s = contagion.conditional_draw_probabilities(state, net)
        for i in range(net.node_count):
            term = prob * s[i]
            acc[i] = term if acc[i] is None else acc[i] + term
    value = sum(acc) / net.node_count
    return InfectionRate(value=value, exact=True)


# ----------------------------------------------------------------------
# Closed forms for complete networks
# ----------------------------------------------------------------------

def complete_marginal(rho):
    """P(any node's draw at any time is red) on a complete network."""
    if not 0 < rho < 1:
        raise InvalidParameter(f"rho must lie in (0, 1), got {rho}")
    return rho


def complete_n1_joint(rho, delta, node_count: int):
    """P(draws at times n and 1 are both red) on a complete network.

    Holds for every n >= 2 and for cross-node pairs as well:
    rho * (rho + (1 + (N-1) rho) delta / N) / (1 + delta).
    """
    if node_count < 1:
        raise InvalidParameter("node_count must be >= 1")
    n = node_count
    return rho * (rho + (1 + (n - 1) * rho) * delta / n) / (1 + delta)


def nonstationarity_witness(rho, delta):
    """Consecutive-pair probabilities at times (2,1) and (3,2), 2-node case.

    Returns (P(Z_2=1, Z_1=1), P(Z_3=1, Z_2=1)); the two differ whenever
    delta > 0, witnessing that the network draw process is not stationary.
    """
    p21 = rho * (rho + (1 + rho) * delta / 2) / (1 + delta)
    p32 = rho * (
        4 * rho
        + delta * (2 + 14 * rho)
        + delta ** 2 * (6 + 14 * rho)
        + delta ** 3 * (5 + 3 * rho)
    ) / (4 * (1 + delta) ** 2 * (1 + 2 * delta))
    return p21, p32


# ----------------------------------------------------------------------
# Classical single-urn process
# ----------------------------------------------------------------------

def classical_polya_joint(params: PolyaParams, draws: Sequence[int]):
    """Joint probability of a draw sequence under the classical urn process.

    Sequential-product form: at step t the red probability is
    (rho + delta * reds_so_far) / (1 + (t-1) * delta).  Exact for rational
    inputs; equals the Gamma-ratio closed form (see the _gamma variant).
    """
    rho, delta = params.rho, params.delta
    prob = Fraction(1) if isinstance(rho, (int, Fraction)) and isinstance(delta, (int, Fraction)) else 1.0
    reds = 0
    for t, a in enumerate(draws, start=1):
        denom = 1 + (t - 1) * delta
        p_red = (rho + delta * reds) / denom
        prob = prob * (p_red if a else 1 - p_red)
        reds += 1 if a else 0
    return prob


def classical_polya_joint_gamma(params: PolyaParams, draws: Sequence[int]) -> float:
    """Gamma-ratio form of the classical joint, via log-gamma (needs delta > 0)."""
    rho, delta = float(params.rho), float(params.delta)
    if delta <= 0:
        raise DomainError("the Gamma-ratio form requires delta > 0")
    n = len(draws)
    k = sum(draws)
    lg = math.lgamma
    log_q = (
        lg(1 / delta)
        + lg(rho / delta + k)
        + lg((1 - rho) / delta + n - k)
        - lg(1 / delta + n)
        - lg(rho / delta)
        - lg((1 - rho) / delta)
    )
    return math.exp(log_q)


def classical_polya_table(params: PolyaParams, n: int) -> dict:
    """Full joint over {0,1}^n as a dict keyed by draw tuples."""
    out = {}
    for code in range(1 << n):
        draws = tuple((code >> (t - 1)) & 1 for t in range(1, n + 1))
        out[draws] = classical_polya_joint(params, draws)
    return out


def classical_count_log_probs(params: PolyaParams, n: int) -> np.ndarray:
    """log Q(a^n) for each red count 0..n (the joint depends only on the count)."""
    rho, delta = float(params.rho), float(params.delta)
    reds = np.cumsum(np.log(rho + delta * np.arange(n))) if n else np.array([])
    blacks = np.cumsum(np.log(1 - rho + delta * np.arange(n)))
    denom = np.sum(np.log(1 + delta * np.arange(n)))
    out = np.empty(n + 1)
    for k in range(n + 1):
        r = reds[k - 1] if k else 0.0
        b = blacks[n - k - 1] if n - k else 0.0
        out[k] = r + b - denom
    return out


def kl_rate(p: Mapping, q: Mapping, n: int) -> float:
    """Per-step Kullback-Leibler divergence (1/n) sum p log(p/q), natural log."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    total = 0.0
    for key, pv in p.items():
        pf = float(pv)
        if pf == 0.0:
            continue
        qv = q.get(key)
        if qv is None or float(qv) <= 0.0:
            raise SupportMismatch(f"q vanishes on {key} where p is positive")
        total += pf * (math.log(pf) - math.log(float(qv)))
    return total / n


# ----------------------------------------------------------------------
# Beta limit distribution
# ----------------------------------------------------------------------

def beta_pdf(params: BetaParams, x: float) -> float:
    if not 0 < x < 1:
        raise DomainError(f"pdf is defined on (0, 1), got {x}")
    a, b = params.alpha, params.beta
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    return math.exp(log_norm + (a - 1) * math.log(x) + (b - 1) * math.log(1 - x))


def beta_cdf(params: BetaParams, x: float) -> float:
    """Regularized incomplete beta; accepts the closed interval [0, 1]."""
    if not 0 <= x <= 1:
        raise DomainError(f"cdf is defined on [0, 1], got {x}")
    return float(betainc(params.alpha, params.beta, x))


# ----------------------------------------------------------------------
# Complete-network node marginal beyond the enumeration cap
# ----------------------------------------------------------------------

def complete_node_marginal(rho: float, delta: float, node_count: int,
                           horizon: int) -> dict:
    """Exact-in-float marginal of one node's draw sequence, complete network.

    On a complete network every node shares one super urn whose red
    proportion depends on the history only through the total red-draw count,
    so the marginal is computable by a count-state dynamic program instead
    of full enumeration: per step, the other N-1 nodes contribute a
    binomial count transition.  Cost grows like 2^horizon * (N * horizon)^2
    rather than 2^(N * horizon).
    """
    from scipy.stats import binom

    if not 0 < rho < 1 or delta < 0:
        raise InvalidParameter("need 0 < rho < 1 and delta >= 0")
    n_nodes, n = node_count, horizon
    # rows: per own-draw-prefix (code bit t-1 = draw at time t) state vectors
    # over the total red count c
    level = np.ones((1, 1), dtype=np.float64)
    for t in range(1, n + 1):
        c_max = n_nodes * (t - 1)
        c = np.arange(c_max + 1, dtype=np.float64)
        s = (rho + (delta / n_nodes) * c) / (1 + (t - 1) * delta)
        pmf = binom.pmf(np.arange(n_nodes)[None, :], n_nodes - 1, s[:, None])
        width = n_nodes * t + 1
        k0 = np.zeros((c_max + 1, width))
        k1 = np.zeros((c_max + 1, width))
        rows = np.arange(c_max + 1)[:, None]
        cols = rows + np.arange(n_nodes)[None, :]
        k0[rows, cols] = (1 - s)[:, None] * pmf
        k1[rows, cols + 1] = s[:, None] * pmf
        level = np.concatenate([level @ k0, level @ k1], axis=0)
    out = {}
    mass = level.sum(axis=1)
    for code in range(1 << n):
        draws = tuple((code >> (t - 1)) & 1 for t in range(1, n + 1))
        out[draws] = float(mass[code])
    return out
