"""State machines for the asynchronous federated linear pure-exploration
algorithm: regularized least squares, hybrid determinant+count trigger,
ellipsoid bonuses, LP/greedy informative-arm selection, and stopping.

An agent's snapshot is the (cov, resp, counts) triple last downloaded from
the server; local buffers accumulate the outer products, responses and
counts of pulls not yet uploaded. Snapshots freeze between downloads, so
pair selection and the informative-arm choice happen once per download.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .design_lp import InfeasibleTargetError, ZeroTargetError, informative_arm_lp, solve_l1


@dataclass
class LinAgentState:
    cov: np.ndarray  # ridge*I + downloaded outer products, d x d SPD
    resp: np.ndarray  # downloaded response vector, length d
    counts: np.ndarray  # downloaded per-arm counts, int64
    pending_cov: np.ndarray  # outer products not yet uploaded (PSD)
    pending_resp: np.ndarray
    pending_counts: np.ndarray
    current_target: int  # 1-based arm pinned until the next download
    counts_total: int
    pending_total: int
    logdet_cov: float  # cached log det(cov), fixed between downloads
    target_context: np.ndarray  # context row of current_target
    target_outer: np.ndarray  # outer product of that context


@dataclass
class LinServerState:
    cov: np.ndarray
    resp: np.ndarray
    counts: np.ndarray
    counts_total: int


def rls_estimate(cov: np.ndarray, resp: np.ndarray) -> np.ndarray:
    """Ridge least-squares parameter estimate cov^{-1} resp."""
    return linalg.solve(cov, resp)


def c_scalar(
    t_sum: int,
    dim: int,
    delta: float,
    sigma: float,
    ridge: float,
    gamma1,
    gamma2,
    n_agents: int,
) -> float:
    """Confidence-ellipsoid radius scalar for a state with t_sum samples.

    sqrt(ridge) + (sqrt(2 g1) M + sqrt(1 + g1 M)) *
        sigma * sqrt( d * log( (2/delta) * (1 + (1 + g2 M) t_sum / (min(g1,1) ridge)) ) )

    Strictly increasing in t_sum; collapses to sqrt(ridge) at sigma = 0.
    """
    g1 = float(gamma1)
    g2 = float(gamma2)
    coef = math.sqrt(2.0 * g1) * n_agents + math.sqrt(1.0 + g1 * n_agents)
    inner = 1.0 + ((1.0 + g2 * n_agents) * t_sum) / (min(g1, 1.0) * ridge)
    return math.sqrt(ridge) + coef * sigma * math.sqrt(dim * math.log((2.0 / delta) * inner))


def bonus_linear(cov: np.ndarray, y: np.ndarray, c: float) -> float:
    """Width ||y||_{cov^{-1}} * c of the gap estimate along direction y."""
    return math.sqrt(linalg.quad_form_inv(cov, y)) * c


def select_pair_linear(
    theta_hat: np.ndarray, contexts: np.ndarray, cov: np.ndarray, c: float
) -> tuple[int, int]:
    """Empirical best arm i and most ambiguous challenger j (1-based).

    j maximizes (x_k - x_i).theta_hat + ||x_i - x_k||_{cov^{-1}} * c over
    k != i; ties break to the lowest index.
    """
    rewards = contexts @ theta_hat
    i = int(np.argmax(rewards))
    lower = linalg.cholesky(cov)
    scores = np.empty(len(rewards))
    for k in range(len(rewards)):
        if k == i:
            scores[k] = -np.inf
            continue
        y = contexts[i] - contexts[k]
        width = math.sqrt(linalg.quad_form_inv_factored(lower, y)) * c
        scores[k] = rewards[k] - rewards[i] + width
    j = int(np.argmax(scores))
    return i + 1, j + 1


def select_arm_greedy(cov: np.ndarray, contexts: np.ndarray, y: np.ndarray, sense: str = "min") -> int:
    """Arm whose extra observation most shrinks y^T (cov + x x^T)^{-1} y.

    sense="min" picks the uncertainty-minimizing arm; sense="max" keeps the
    literal maximizing form for comparison runs. Ties break to the lowest
    index; y = 0 returns arm 1.
    """
    vals = np.empty(len(contexts))
    for k, x in enumerate(contexts):
        vals[k] = linalg.quad_form_inv(cov + np.outer(x, x), y)
    best = int(np.argmin(vals)) if sense == "min" else int(np.argmax(vals))
    return best + 1


def check_trigger_hybrid(agent: LinAgentState, gamma1, gamma2) -> bool:
    """True when the pending data moves the determinant or count ratio too far.

    Fires iff logdet(cov + pending_cov) > log(1+gamma1) + logdet(cov), OR the
    count condition sum(counts+pending) > (1+gamma2) sum(counts) holds (the
    latter in exact integer arithmetic as in the MAB trigger).
    """
    g2 = gamma2 if type(gamma2) is Fraction else Fraction(gamma2)
    lhs = (agent.counts_total + agent.pending_total) * g2.denominator
    rhs = (g2.denominator + g2.numerator) * agent.counts_total
    if lhs > rhs:
        return True
    if agent.pending_total == 0:
        return False
    grown = linalg.logdet(agent.cov + agent.pending_cov)
    return grown > math.log1p(float(gamma1)) + agent.logdet_cov


def server_merge_linear(
    server: LinServerState, pending_cov: np.ndarray, pending_resp: np.ndarray, pending_counts: np.ndarray
) -> LinServerState:
    """Fold one agent's local matrices/vector/counts into the server state."""
    return LinServerState(
        cov=server.cov + pending_cov,
        resp=server.resp + pending_resp,
        counts=server.counts + pending_counts,
        counts_total=server.counts_total + int(pending_counts.sum()),
    )


def stopping_linear(
    server: LinServerState,
    contexts: np.ndarray,
    dim: int,
    delta: float,
    sigma: float,
    ridge: float,
    gamma1,
    gamma2,
    n_agents: int,
    c_override: float | None = None,
) -> tuple[int, int, float]:
    """Server-side pair (i, j) and the stopping score B.

    B = (x_j - x_i).theta_ser + ||x_i - x_j||_{cov^{-1}} * C_ser; the run
    stops when B <= epsilon. c_override replaces the radius scalar (test hook).
    """
    lower = linalg.cholesky(server.cov)
    theta = linalg.solve_factored(lower, server.resp)
    c = c_override
    if c is None:
        c = c_scalar(server.counts_total, dim, delta, sigma, ridge, gamma1, gamma2, n_agents)
    rewards = contexts @ theta
    i = int(np.argmax(rewards))
    scores = np.empty(len(rewards))
    for k in range(len(rewards)):
        if k == i:
            scores[k] = -np.inf
            continue
        width = math.sqrt(linalg.quad_form_inv_factored(lower, contexts[i] - contexts[k])) * c
        scores[k] = rewards[k] - rewards[i] + width
    j = int(np.argmax(scores))
    return i + 1, j + 1, float(scores[j])


def choose_informative_arm(
    agent_cov: np.ndarray,
    agent_counts: np.ndarray,
    contexts: np.ndarray,
    i: int,
    j: int,
    arm_select: str,
    greedy_sense: str,
) -> tuple[int, bool]:
    """Arm to pull for the pair (i, j); returns (arm, fell_back_to_greedy).

    The LP selector falls back to the greedy rule when the direction is zero
    (duplicate contexts) or outside the span; both are impossible for
    generated instances but guarded so runs stay alive.
    """
    y = contexts[i - 1] - contexts[j - 1]
    if arm_select == "lp":
        try:
            sol = solve_l1(contexts, y)
        except (ZeroTargetError, InfeasibleTargetError):
            return select_arm_greedy(agent_cov, contexts, y, greedy_sense), True
        return informative_arm_lp(agent_counts, sol.p), False
    return select_arm_greedy(agent_cov, contexts, y, greedy_sense), False


def _snapshot(
    server: LinServerState,
    contexts: np.ndarray,
    dim: int,
    delta: float,
    sigma: float,
    ridge: float,
    gamma1,
    gamma2,
    n_agents: int,
    arm_select: str,
    greedy_sense: str,
) -> tuple[LinAgentState, bool]:
    k = len(server.counts)
    c = c_scalar(server.counts_total, dim, delta, sigma, ridge, gamma1, gamma2, n_agents)
    theta = rls_estimate(server.cov, server.resp)
    i, j = select_pair_linear(theta, contexts, server.cov, c)
    target, fallback = choose_informative_arm(
        server.cov, server.counts, contexts, i, j, arm_select, greedy_sense
    )
    x = contexts[target - 1]
    state = LinAgentState(
        cov=server.cov.copy(),
        resp=server.resp.copy(),
        counts=server.counts.copy(),
        pending_cov=np.zeros((dim, dim)),
        pending_resp=np.zeros(dim),
        pending_counts=np.zeros(k, dtype=np.int64),
        current_target=target,
        counts_total=server.counts_total,
        pending_total=0,
        logdet_cov=linalg.logdet(server.cov),
        target_context=x,
        target_outer=np.outer(x, x),
    )
    return state, fallback


def download_linear(
    agent: LinAgentState,
    server: LinServerState,
    contexts: np.ndarray,
    dim: int,
    delta: float,
    sigma: float,
    ridge: float,
    gamma1,
    gamma2,
    n_agents: int,
    arm_select: str,
    greedy_sense: str,
) -> tuple[LinAgentState, bool]:
    """Replace the agent's snapshot with the server's; see download_mab."""
    del agent
    return _snapshot(
        server, contexts, dim, delta, sigma, ridge, gamma1, gamma2, n_agents, arm_select, greedy_sense
    )


def init_states_linear(
    contexts: np.ndarray,
    init_rewards: np.ndarray,
    ridge: float,
    n_agents: int,
    dim: int,
    delta: float,
    sigma: float,
    gamma1,
    gamma2,
    arm_select: str,
    greedy_sense: str,
) -> tuple[LinServerState, list[LinAgentState], int]:
    """Post-initialization states after pulling each arm once.

    Returns (server, agents, lp_fallbacks_during_seeding).
    """
    k = len(init_rewards)
    cov = ridge * np.eye(dim)
    resp = np.zeros(dim)
    for a in range(k):
        x = contexts[a]
        cov += np.outer(x, x)
        resp += init_rewards[a] * x
    server = LinServerState(cov=cov, resp=resp, counts=np.ones(k, dtype=np.int64), counts_total=k)
    agents = []
    fallbacks = 0
    for _ in range(n_agents):
        st, fb = _snapshot(
            server, contexts, dim, delta, sigma, ridge, gamma1, gamma2, n_agents, arm_select, greedy_sense
        )
        agents.append(st)
        fallbacks += int(fb)
    return server, agents, fallbacks
