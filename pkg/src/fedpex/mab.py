"""State machines for the asynchronous federated MAB pure-exploration
algorithm: sampling rule, count-ratio upload trigger, server merge,
breaking-index stopping rule, and download synchronization.

Agents keep the server snapshot they last downloaded (mean_est, counts)
plus not-yet-uploaded local buffers (pending_sums, pending_counts). The
snapshot is frozen between downloads, so the targeted arm is recomputed
only at download events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass
class MabAgentState:
    mean_est: np.ndarray  # last-downloaded server estimates, length K
    counts: np.ndarray  # last-downloaded server counts, int64
    pending_sums: np.ndarray  # local not-yet-uploaded reward sums
    pending_counts: np.ndarray  # local not-yet-uploaded pull counts
    current_target: int  # 1-based arm pulled while the snapshot is frozen
    counts_total: int  # cached sum(counts), fixed between downloads
    pending_total: int  # cached sum(pending_counts)


@dataclass
class MabServerState:
    mean_est: np.ndarray
    counts: np.ndarray
    counts_total: int


def bonus_mab(t_k: int, t_sum: int, n_arms: int, delta: float, sigma: float, gamma_m: float) -> float:
    """Confidence width of one arm's mean estimate.

    sigma * sqrt( (2/t_k) * log( (4K/delta) * ((1+gamma_m) * t_sum)^2 ) )
    where t_k is the arm's count and t_sum the total count behind the
    estimate; gamma_m is the trigger parameter times the agent count.
    """
    if t_k <= 0:
        raise ZeroDivisionError("bonus undefined before the arm's first pull")
    arg = (4.0 * n_arms / delta) * ((1.0 + gamma_m) * t_sum) ** 2
    return sigma * math.sqrt((2.0 / t_k) * math.log(arg))


def bonuses_mab(counts: np.ndarray, t_sum: int, delta: float, sigma: float, gamma_m: float) -> np.ndarray:
    """Vector of bonus_mab over all arms (shared log argument)."""
    n_arms = len(counts)
    arg = (4.0 * n_arms / delta) * ((1.0 + gamma_m) * t_sum) ** 2
    return sigma * np.sqrt((2.0 / counts) * math.log(arg))


def select_pair_mab(mean_est: np.ndarray, bonuses: np.ndarray) -> tuple[int, int]:
    """Empirical best arm i and most ambiguous challenger j (1-based).

    i maximizes the mean estimate; j maximizes estimated-gap-to-i plus the
    pair bonus. Ties go to the lowest arm index (np.argmax convention).
    """
    i = int(np.argmax(mean_est))
    scores = mean_est - mean_est[i] + bonuses[i] + bonuses
    scores[i] = -np.inf
    j = int(np.argmax(scores))
    return i + 1, j + 1


def select_arm_mab(i: int, j: int, bonuses: np.ndarray) -> int:
    """The more uncertain of {i, j}; ties favor i."""
    return i if bonuses[i - 1] >= bonuses[j - 1] else j


def agent_target_mab(
    mean_est: np.ndarray, counts: np.ndarray, counts_total: int, delta: float, sigma: float, gamma_m: float
) -> int:
    """Arm an agent pulls under a frozen snapshot (composes the rules above)."""
    bon = bonuses_mab(counts, counts_total, delta, sigma, gamma_m)
    i, j = select_pair_mab(mean_est, bon)
    return select_arm_mab(i, j, bon)


def check_trigger_mab(agent: MabAgentState, gamma) -> bool:
    """True when pending local data exceeds the gamma fraction of the snapshot.

    Condition sum(counts + pending) > (1+gamma) * sum(counts), evaluated in
    exact integer arithmetic (gamma enters as an exact rational; floats
    convert exactly), so boundary cases are deterministic.
    """
    g = gamma if type(gamma) is Fraction else Fraction(gamma)
    lhs = (agent.counts_total + agent.pending_total) * g.denominator
    rhs = (g.denominator + g.numerator) * agent.counts_total
    return lhs > rhs


def server_merge_mab(server: MabServerState, pending_sums: np.ndarray, pending_counts: np.ndarray) -> MabServerState:
    """Fold one agent's local buffers into the server estimates.

    Arms with no pending observations keep their estimate bit-identical.
    """
    new_counts = server.counts + pending_counts
    mean = server.mean_est.copy()
    touched = pending_counts > 0
    mean[touched] = (server.mean_est[touched] * server.counts[touched] + pending_sums[touched]) / new_counts[touched]
    return MabServerState(
        mean_est=mean,
        counts=new_counts,
        counts_total=server.counts_total + int(pending_counts.sum()),
    )


def breaking_index(mean_est: np.ndarray, bonuses: np.ndarray) -> tuple[int, int, float]:
    """Candidate pair (i, j) and the stopping score B for the server state.

    B = gap_estimate(j, i) + bonus(i) + bonus(j); the run stops when B <= epsilon.
    """
    i, j = select_pair_mab(mean_est, bonuses)
    b = float(mean_est[j - 1] - mean_est[i - 1] + bonuses[i - 1] + bonuses[j - 1])
    return i, j, b


def _snapshot(server: MabServerState, delta: float, sigma: float, gamma_m: float) -> MabAgentState:
    k = len(server.mean_est)
    target = agent_target_mab(server.mean_est, server.counts, server.counts_total, delta, sigma, gamma_m)
    return MabAgentState(
        mean_est=server.mean_est.copy(),
        counts=server.counts.copy(),
        pending_sums=np.zeros(k),
        pending_counts=np.zeros(k, dtype=np.int64),
        current_target=target,
        counts_total=server.counts_total,
        pending_total=0,
    )


def download_mab(
    agent: MabAgentState, server: MabServerState, delta: float, sigma: float, gamma_m: float
) -> MabAgentState:
    """Replace the agent's snapshot with the server's: buffers cleared,
    target recomputed. The previous state is discarded entirely; the switch
    happened iff the returned target differs from agent.current_target."""
    del agent  # superseded wholesale by the fresh snapshot
    return _snapshot(server, delta, sigma, gamma_m)


def init_states_mab(
    init_rewards: np.ndarray, n_agents: int, delta: float, sigma: float, gamma_m: float
) -> tuple[MabServerState, list[MabAgentState]]:
    """Post-initialization states: arm k was pulled once with reward init_rewards[k-1]."""
    k = len(init_rewards)
    counts = np.ones(k, dtype=np.int64)
    server = MabServerState(mean_est=np.array(init_rewards, dtype=float), counts=counts.copy(), counts_total=k)
    agents = [_snapshot(server, delta, sigma, gamma_m) for _ in range(n_agents)]
    return server, agents
