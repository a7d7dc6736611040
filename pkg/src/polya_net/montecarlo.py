"""Reproducible trial runner and trajectory statistics.

RNG scheme: trial k of a run with master seed s consumes uniforms from a
``Philox4x64-10`` counter-based generator keyed with the 128-bit key
(s mod 2^64, k), counter starting at zero, doubles taken in step-major,
node-minor order.  Streams therefore depend only on (master seed, trial
index): results are independent of chunking or thread scheduling, and a
single trial can be replayed in isolation.  Aggregation is associative
(integer draw counts, per-chunk float partials merged in chunk order), so
identical configurations produce bit-identical statistics.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import exact
from .contagion import (
    ConstantDelta,
    CuringDelta,
    DeltaSchedule,
    TabulatedDelta,
    UrnInit,
)
from .errors import DomainError, HypothesisViolation, InvalidParameter
from .graph import Network, classify

UNIFORM_BUFFER_BYTES = 64 << 20  # target per-chunk uniform block size


def trial_generator(master_seed: int, trial: int) -> np.random.Generator:
    """The documented per-trial stream; see the module docstring."""
    key = np.array([master_seed % (1 << 64), trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a batch of trials bit-for-bit."""

    net: Network
    init: UrnInit
    sched: DeltaSchedule
    horizon: int
    trials: int
    seed: int
    memory: int | None = None
    collect_sample_averages: bool = False
    collect_pair_freq: bool = False
    collect_assignments: bool = False
    chunk_size: int | None = None
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1 or self.horizon < 1:
            raise InvalidParameter("trials and horizon must be >= 1")
        if self.collect_assignments and self.net.node_count * self.horizon > 62:
            raise InvalidParameter(
                "assignment collection needs node_count * horizon <= 62"
            )

    def describe(self) -> dict:
        # chunking fixes the float accumulation order, so the resolved value
        # is part of what identifies an exactly reproducible run
        return {
            "nodes": self.net.node_count,
            "edges": [list(e) for e in self.net.edges],
            "red": [str(v) for v in self.init.red],
            "black": [str(v) for v in self.init.black],
            "schedule": self.sched.describe(),
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.seed,
            "memory": self.memory,
            "chunk": self.chunk_size or _auto_chunk(self),
        }


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.describe(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class TrialStatistics:
    """Aggregates over independent trials; time indices go 1..horizon
    (index 0 of per-step arrays is unused except for susceptibility, where
    it holds the deterministic initial value)."""

    trials: int
    horizon: int
    node_count: int
    red_draw_counts: np.ndarray          # (horizon+1, N) int64
    susceptibility_sum: np.ndarray       # (horizon+1,) sums over trials of mean urn fraction
    increment_sum: np.ndarray            # (horizon+1,) per-trial susceptibility increments
    increment_sumsq: np.ndarray
    pair_counts: np.ndarray | None = None      # (horizon+1, N) int64, t >= 2
    sample_averages: np.ndarray | None = None  # (trials, N)
    assignment_counts: np.ndarray | None = None

    @property
    def infection_rate(self) -> np.ndarray:
        """Empirical fraction of red draws averaged over nodes, per step."""
        out = self.red_draw_counts.sum(axis=1) / (self.trials * self.node_count)
        out[0] = np.nan
        return out

    @property
    def node_infection_rate(self) -> np.ndarray:
        out = self.red_draw_counts / self.trials
        out[0] = np.nan
        return out

    @property
    def susceptibility(self) -> np.ndarray:
        return self.susceptibility_sum / self.trials

    @property
    def increment_mean(self) -> np.ndarray:
        out = self.increment_sum / self.trials
        out[0] = np.nan
        return out

    @property
    def increment_sem(self) -> np.ndarray:
        n = self.trials
        mean = self.increment_sum / n
        var = (self.increment_sumsq - n * mean ** 2) / max(n - 1, 1)
        out = np.sqrt(np.maximum(var, 0.0) / n)
        out[0] = np.nan
        return out

    @property
    def pair_freq(self) -> np.ndarray:
        if self.pair_counts is None:
            raise InvalidParameter("pair frequencies were not collected")
        out = self.pair_counts / self.trials
        out[:2] = np.nan
        return out


def _auto_chunk(cfg: RunConfig) -> int:
    per_trial = 8 * cfg.horizon * cfg.net.node_count
    return max(16, min(cfg.trials, UNIFORM_BUFFER_BYTES // max(per_trial, 1)))


def _neighbor_op(net: Network):
    dense = net.closed_adjacency
    if net.node_count <= 32:
        return lambda m: m @ dense
    csr = sp.csr_matrix(dense)
    return lambda m: np.asarray(m @ csr)


def _mass_plan(sched: DeltaSchedule, n: int):
    """Step-mass closure: (t, u, s) -> (red, black) arrays, precomputing
    whatever the schedule kind allows."""
    if isinstance(sched, CuringDelta):
        dr = float(sched.delta_red)
        mult = float(sched.multiplier)

        def curing(t, u, s):
            return dr, mult * dr * (1.0 - u) * s / (u * (1.0 - s))

        return curing
    if isinstance(sched, ConstantDelta):
        dr = np.array([float(sched.red_mass(i, 1)) for i in range(n)])
        db = np.array([float(sched.black_mass(i, 1)) for i in range(n)])
        return lambda t, u, s: (dr, db)
    if isinstance(sched, TabulatedDelta):
        reds = [np.array([float(v) for v in row]) for row in sched.red_rows]
        blacks = [np.array([float(v) for v in row]) for row in sched.black_rows]
        return lambda t, u, s: (reds[t - 1], blacks[t - 1])

    def generic(t, u, s):
        dr = np.array([float(sched.red_mass(i, t)) for i in range(n)])
        db = np.array([float(sched.black_mass(i, t)) for i in range(n)])
        return dr, db

    return generic


@dataclass
class _ChunkResult:
    lo: int
    red_draw_counts: np.ndarray
    susceptibility_sum: np.ndarray
    increment_sum: np.ndarray
    increment_sumsq: np.ndarray
    pair_counts: np.ndarray | None
    sample_averages: np.ndarray | None
    assignment_counts: np.ndarray | None


def _run_chunk(cfg: RunConfig, lo: int, hi: int) -> _ChunkResult:
    net, n = cfg.net, cfg.net.node_count
    k = hi - lo
    h = cfg.horizon
    neighbor = _neighbor_op(net)
    uniforms = np.empty((k, h, n))
    for j in range(k):
        uniforms[j] = trial_generator(cfg.seed, lo + j).random((h, n))

    red = np.tile([float(v) for v in cfg.init.red], (k, 1))
    total = np.tile([float(v) for v in cfg.init.totals], (k, 1))
    buf_red = buf_black = None
    if cfg.memory is not None:
        buf_red = np.zeros((cfg.memory, k, n))
        buf_black = np.zeros((cfg.memory, k, n))

    red_counts = np.zeros((h + 1, n), dtype=np.int64)
    susc_sum = np.zeros(h + 1)
    inc_sum = np.zeros(h + 1)
    inc_sumsq = np.zeros(h + 1)
    pair = np.zeros((h + 1, n), dtype=np.int64) if cfg.collect_pair_freq else None
    z_count = np.zeros((k, n)) if cfg.collect_sample_averages else None
    codes = np.zeros(k, dtype=np.int64) if cfg.collect_assignments else None

    masses = _mass_plan(cfg.sched, n)
    u_mean = (red / total).mean(axis=1)
    susc_sum[0] = u_mean.sum()
    z_prev = None
    for t in range(1, h + 1):
        nbr_red = neighbor(red)
        nbr_total = neighbor(total)
        s = nbr_red / nbr_total
        z = uniforms[:, t - 1, :] < s
        dr, db = masses(t, red / total, s)
        add_red = np.where(z, dr, 0.0)
        add_black = np.where(z, 0.0, db)
        if cfg.memory is not None:
            slot = (t - 1) % cfg.memory
            if t > cfg.memory:
                red -= buf_red[slot]
                total -= buf_red[slot] + buf_black[slot]
            buf_red[slot] = add_red
            buf_black[slot] = add_black
        red += add_red
        total += add_red + add_black

        red_counts[t] = z.sum(axis=0)
        u_mean_next = (red / total).mean(axis=1)
        susc_sum[t] = u_mean_next.sum()
        inc = u_mean_next - u_mean
        inc_sum[t] = inc.sum()
        inc_sumsq[t] = (inc ** 2).sum()
        u_mean = u_mean_next
        if pair is not None and z_prev is not None:
            pair[t] = (z & z_prev).sum(axis=0)
        if z_count is not None:
            z_count += z
        if codes is not None:
            weights = (1 << (np.arange(n, dtype=np.int64) + n * (t - 1)))
            codes += z.astype(np.int64) @ weights
        z_prev = z

    counts = None
    if codes is not None:
        counts = np.bincount(codes, minlength=1 << (n * h)).astype(np.int64)
    return _ChunkResult(
        lo=lo,
        red_draw_counts=red_counts,
        susceptibility_sum=susc_sum,
        increment_sum=inc_sum,
        increment_sumsq=inc_sumsq,
        pair_counts=pair,
        sample_averages=None if z_count is None else z_count / h,
        assignment_counts=counts,
    )


def run_trials(cfg: RunConfig) -> TrialStatistics:
    """Run ``cfg.trials`` independent trajectories and aggregate statistics."""
    n, h = cfg.net.node_count, cfg.horizon
    chunk = cfg.chunk_size or _auto_chunk(cfg)
    bounds = [(lo, min(lo + chunk, cfg.trials)) for lo in range(0, cfg.trials, chunk)]

    stats = TrialStatistics(
        trials=cfg.trials,
        horizon=h,
        node_count=n,
        red_draw_counts=np.zeros((h + 1, n), dtype=np.int64),
        susceptibility_sum=np.zeros(h + 1),
        increment_sum=np.zeros(h + 1),
        increment_sumsq=np.zeros(h + 1),
        pair_counts=np.zeros((h + 1, n), dtype=np.int64) if cfg.collect_pair_freq else None,
        sample_averages=np.zeros((cfg.trials, n)) if cfg.collect_sample_averages else None,
        assignment_counts=(
            np.zeros(1 << (n * h), dtype=np.int64) if cfg.collect_assignments else None
        ),
    )

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda b: _run_chunk(cfg, *b), bounds))
    else:
        results = [_run_chunk(cfg, *b) for b in bounds]

    for res in results:  # merge in chunk order: scheduling cannot change output
        stats.red_draw_counts += res.red_draw_counts
        stats.susceptibility_sum += res.susceptibility_sum
        stats.increment_sum += res.increment_sum
        stats.increment_sumsq += res.increment_sumsq
        if stats.pair_counts is not None:
            stats.pair_counts += res.pair_counts
        if stats.sample_averages is not None:
            hi = res.lo + res.sample_averages.shape[0]
            stats.sample_averages[res.lo:hi] = res.sample_averages
        if stats.assignment_counts is not None:
            stats.assignment_counts += res.assignment_counts
    return stats


# ----------------------------------------------------------------------
# Derived statistics
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class HistogramResult:
    edges: np.ndarray
    density: np.ndarray


def histogram(samples: Sequence[float], bins: int) -> HistogramResult:
    """Density-normalized histogram on [0, 1] (total area 1)."""
    data = np.asarray(samples, dtype=np.float64)
    if bins < 1:
        raise InvalidParameter("bins must be >= 1")
    if len(data) < bins:
        raise InvalidParameter("need at least as many samples as bins")
    density, edges = np.histogram(data, bins=bins, range=(0.0, 1.0), density=True)
    return HistogramResult(edges=edges, density=density)


def ks_fit(samples: Sequence[float], beta: exact.BetaParams) -> float:
    """One-sample Kolmogorov-Smirnov distance to a Beta CDF."""
    data = np.sort(np.asarray(samples, dtype=np.float64))
    if data.size == 0:
        raise DomainError("need at least one sample")
    cdf = np.array([exact.beta_cdf(beta, x) for x in data])
    n = data.size
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


@dataclass(frozen=True)
class StationarityReport:
    node: int
    window: int
    max_successive_deviation: float
    settled_value: float


def stationarity_diagnostic(stats: TrialStatistics, node: int = 0,
                            window: int | None = None) -> StationarityReport:
    """Trailing-window report on consecutive-draw pair frequencies.

    ``window`` defaults to the last 20% of the horizon.  Reports the largest
    step-to-step change of P(Z_t=1, Z_{t-1}=1) over the window and the
    trailing mean as the settled value.
    """
    freq = stats.pair_freq[:, node]
    if window is None:
        window = max(2, stats.horizon // 5)
    if window < 2 or window > stats.horizon - 1:
        raise InvalidParameter(f"window {window} not usable for horizon {stats.horizon}")
    tail = freq[stats.horizon - window + 1:]
    deviations = np.abs(np.diff(tail))
    return StationarityReport(
        node=node,
        window=window,
        max_successive_deviation=float(np.max(deviations)),
        settled_value=float(np.mean(tail)),
    )


@dataclass(frozen=True)
class MartingaleResiduals:
    mean: np.ndarray  # per-step trial mean of susceptibility increments
    sem: np.ndarray


def martingale_residual(cfg: RunConfig) -> MartingaleResiduals:
    """Per-step empirical drift of the network susceptibility.

    Only meaningful under the conditions where the susceptibility is
    drift-free: regular network, equal urn totals, constant equal red/black
    reinforcement.  Violations raise ``HypothesisViolation``.
    """
    if classify(cfg.net) == "irregular":
        raise HypothesisViolation("the susceptibility drift vanishes only on regular networks")
    totals = cfg.init.totals
    if any(v != totals[0] for v in totals):
        raise HypothesisViolation("equal urn totals are required")
    sched = cfg.sched
    if not isinstance(sched, ConstantDelta):
        raise HypothesisViolation("a constant schedule is required")
    n = cfg.net.node_count
    values = {float(sched.red_mass(i, 1)) for i in range(n)}
    values |= {float(sched.black_mass(i, 1)) for i in range(n)}
    if len(values) != 1:
        raise HypothesisViolation("red and black masses must be one constant")
    stats = run_trials(cfg)
    return MartingaleResiduals(mean=stats.increment_mean, sem=stats.increment_sem)


def least_squares_trend(y: Sequence[float], t: Sequence[float] | None = None):
    """OLS slope and its standard error for a time series."""
    y = np.asarray(y, dtype=np.float64)
    x = np.arange(len(y), dtype=np.float64) if t is None else np.asarray(t, float)
    x_c = x - x.mean()
    denom = float(np.dot(x_c, x_c))
    slope = float(np.dot(x_c, y)) / denom
    resid = y - y.mean() - slope * x_c
    dof = max(len(y) - 2, 1)
    stderr = math.sqrt(float(np.dot(resid, resid)) / dof / denom)
    return slope, stderr


# ----------------------------------------------------------------------
# CSV output
# ----------------------------------------------------------------------

def _header(cfg: RunConfig) -> str:
    from . import __version__

    return (f"# config_sha256={config_hash(cfg)} master_seed={cfg.seed} "
            f"version={__version__}")


def write_trajectory_csv(stats: TrialStatistics, cfg: RunConfig, path,
                         pair_node: int | None = None) -> None:
    """Rows t, I_tilde, U_tilde and optionally the pair frequency of a node."""
    infection = stats.infection_rate
    susc = stats.susceptibility
    pair = stats.pair_freq[:, pair_node] if pair_node is not None else None
    with open(path, "w") as fh:
        fh.write(_header(cfg) + "\n")
        cols = "t,I_tilde,U_tilde" + (",pair_freq" if pair is not None else "")
        fh.write(cols + "\n")
        for t in range(1, stats.horizon + 1):
            row = f"{t},{float(infection[t])!r},{float(susc[t])!r}"
            if pair is not None:
                row += f",{float(pair[t])!r}" if t >= 2 else ","
            fh.write(row + "\n")


def write_histogram_csv(hist: HistogramResult, cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(_header(cfg) + "\n")
        fh.write("bin_left,bin_right,density\n")
        for k in range(len(hist.density)):
            fh.write(f"{float(hist.edges[k])!r},{float(hist.edges[k + 1])!r},"
                     f"{float(hist.density[k])!r}\n")
