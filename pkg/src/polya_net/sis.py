"""Discrete-time SIS comparator: mean-field probability recursion and the
spectral epidemic threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contagion import UrnInit
from .errors import ParameterOutOfRange, SizeMismatch
from .graph import Network, largest_eigenvalue


@dataclass(frozen=True)
class SisParams:
    """Per-contact infection probability and per-step recovery probability."""

    beta: float
    delta_sis: float

    def __post_init__(self):
        if not 0 <= self.beta <= 1 or not 0 <= self.delta_sis <= 1:
            raise ParameterOutOfRange(
                f"beta and delta_sis must lie in [0, 1], got "
                f"({self.beta}, {self.delta_sis})"
            )


@dataclass(frozen=True)
class SisState:
    time: int
    probs: np.ndarray  # per-node infection probability, values in [0, 1]


def default_initial_probs(init: UrnInit) -> np.ndarray:
    """Couple the comparator to an urn setup: P_i(0) = initial red fraction."""
    return np.array([float(r) / float(t) for r, t in zip(init.red, init.totals)])


def sis_step(state: SisState, net: Network, params: SisParams) -> SisState:
    """One update of the mean-field recursion.

    P_i(t+1) = P_i(t)(1 - delta_sis)
             + (1 - P_i(t)) (1 - prod_{j ~ i} (1 - beta P_j(t))).
    Preserves [0, 1] for valid parameters.
    """
    p = state.probs
    if p.shape[0] != net.node_count:
        raise SizeMismatch("probability vector does not match the network")
    escape = np.array([
        np.prod(1.0 - params.beta * p[list(net.neighbors[i])])
        for i in range(net.node_count)
    ])
    nxt = p * (1.0 - params.delta_sis) + (1.0 - p) * (1.0 - escape)
    return SisState(time=state.time + 1, probs=nxt)


@dataclass(frozen=True)
class SisTrajectory:
    probs: np.ndarray  # shape (horizon + 1, N); row t = state at time t
    mean: np.ndarray   # shape (horizon + 1,)

    @property
    def horizon(self) -> int:
        return self.probs.shape[0] - 1


def sis_run(net: Network, init_probs, params: SisParams, horizon: int) -> SisTrajectory:
    """Iterate the recursion, recording the per-node and mean probabilities."""
    p0 = np.asarray(init_probs, dtype=np.float64)
    if np.any(p0 < 0) or np.any(p0 > 1):
        raise ParameterOutOfRange("initial probabilities must lie in [0, 1]")
    state = SisState(time=0, probs=p0)
    rows = [p0]
    for _ in range(horizon):
        state = sis_step(state, net, params)
        rows.append(state.probs)
    probs = np.vstack(rows)
    return SisTrajectory(probs=probs, mean=probs.mean(axis=1))


def threshold_classify(net: Network, params: SisParams, tol: float = 1e-9) -> str:
    """'dies_out' when delta_sis > beta * lambda_max, 'endemic' when smaller,
    'critical' within tol of equality."""
    lam = largest_eigenvalue(net)
    gap = params.delta_sis - params.beta * lam
    if abs(gap) <= tol:
        return "critical"
    return "dies_out" if gap > 0 else "endemic"
