"""Monotone thresholding: noisy binary search with corrections.

``explore`` walks the implicit arm tree, backtracking to the parent whenever
the left/right empirical means fail to bracket the threshold. ``choose``
collects the arms that look close to the threshold (or straddle it at a
leaf) and returns the median. ``mtb_run`` glues the two together.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .core import (
    BudgetExhausted,
    Classification,
    DegenerateProblem,
    Environment,
    InvalidParameter,
    step_classification,
)
from .tree import TreeNode, children, is_leaf, span_root

LOG48 = math.log(48.0)
EPS_RULES = ("tau", "true_mean")


@dataclass(frozen=True)
class ExploreStep:
    node: TreeNode
    mu_l: float
    mu_m: float
    mu_r: float

    def means(self):
        return (self.mu_l, self.mu_m, self.mu_r)


@dataclass
class ExploreHistory:
    """Visited nodes (in local tree coordinates) and their empirical means.

    ``arms[j]`` is the environment index of local position ``j``; with
    sentinels, position 0 is the low sentinel and position n+1 the high one.
    """

    steps: List[ExploreStep]
    t1: int
    t2: int
    eps0: float
    arms: Tuple[int, ...]
    sentinels: bool = True

    @property
    def n_arms(self) -> int:
        return len(self.arms) - 2

    @property
    def pulls(self) -> int:
        return 3 * self.t2 * len(self.steps)


@dataclass(frozen=True)
class MtbConfig:
    tau: float
    budget: int
    sigma: float = 1.0
    direction: str = "increasing"
    eps_rule: str = "tau"
    sentinels: bool = True

    def __post_init__(self):
        if self.direction not in ("increasing", "decreasing"):
            raise InvalidParameter(f"unknown direction {self.direction!r}")
        if self.eps_rule not in EPS_RULES:
            raise InvalidParameter(f"unknown eps_rule {self.eps_rule!r}")
        if self.budget < 1:
            raise InvalidParameter("budget must be positive")


def explore_length(n_arms: int) -> int:
    """Number of walk steps, ceil(6 ln n)."""
    return math.ceil(6 * math.log(n_arms))


def pulls_per_node(budget: int, n_arms: int) -> int:
    return budget // (3 * explore_length(n_arms))


def base_epsilon(sigma: float, t2: int) -> float:
    return math.sqrt(2 * sigma ** 2 * LOG48 / t2)


def _arm_map(env: Environment, arms: Optional[Sequence[int]]) -> Tuple[int, ...]:
    if arms is None:
        arms = range(1, env.K + 1)
    return (env.LOW, *arms, env.HIGH)


def explore(env: Environment, tau: float, t1: int, t2: int, rng=None, *,
            arms: Optional[Sequence[int]] = None, sigma: Optional[float] = None,
            sentinels: bool = True) -> ExploreHistory:
    """Run the corrected random walk for ``t1`` steps, ``t2`` pulls per arm."""
    del rng  # the walk itself is deterministic given the samples
    amap = _arm_map(env, arms)
    n = len(amap) - 2
    if t1 < 0 or t2 < 1:
        raise InvalidParameter("need t1 >= 0 and t2 >= 1")
    sigma = env.instance.sigma if sigma is None else sigma

    v = span_root(0, n + 1) if sentinels else span_root(1, n)
    stack: List[TreeNode] = []
    steps: List[ExploreStep] = []
    for _ in range(t1):
        mu_l = env.sample_mean(amap[v.L], t2)
        mu_m = env.sample_mean(amap[v.M], t2)
        mu_r = env.sample_mean(amap[v.R], t2)
        steps.append(ExploreStep(v, mu_l, mu_m, mu_r))
        if not mu_l <= tau <= mu_r:
            if stack:
                v = stack.pop()
        elif is_leaf(v):
            pass
        elif mu_m <= tau <= mu_r:
            stack.append(v)
            v = children(v)[1]
        else:
            stack.append(v)
            v = children(v)[0]
    return ExploreHistory(steps, t1, t2, base_epsilon(sigma, t2), amap, sentinels)


def _candidates(step: ExploreStep, epsilon: float, tau: float) -> List[int]:
    v = step.node
    found = set()
    for pos, mu in zip(v, step.means()):
        if abs(mu - tau) <= epsilon:
            found.add(pos)
    if is_leaf(v) and step.mu_l + epsilon < tau <= step.mu_r - epsilon:
        found.add(v.R)
    return sorted(found)


def candidate_list(epsilon: float, history: ExploreHistory, tau: float, rng) -> List[int]:
    """The list S in visiting order, at most one arm per step."""
    out = []
    for step in history.steps:
        cands = _candidates(step, epsilon, tau)
        if len(cands) == 1:
            out.append(cands[0])
        elif cands:
            out.append(cands[int(rng.integers(len(cands)))])
    return out


def lower_median(values: Sequence[int]) -> int:
    s = sorted(values)
    return s[(len(s) + 1) // 2 - 1]


def choose(epsilon: float, history: ExploreHistory, tau: float, rng) -> Optional[int]:
    """Lower median (local position) of the candidate list, None if empty."""
    picks = candidate_list(epsilon, history, tau, rng)
    if not picks:
        return None
    return lower_median(picks)


def epsilon_hat(history: ExploreHistory, tau: float, rule: str = "tau",
                true_means=None) -> float:
    """Smallest choose-parameter above 2*eps0 that yields a nonempty list.

    ``rule="true_mean"`` evaluates the literal variant that measures the
    distance of each estimate to its arm's true mean (oracle, audit only).
    """
    floor = 2 * history.eps0
    for step in history.steps:
        if is_leaf(step.node) and step.mu_l <= tau <= step.mu_r:
            return floor
    if not history.steps:
        return floor
    if rule == "tau":
        dist = min(abs(mu - tau) for st in history.steps for mu in st.means())
    elif rule == "true_mean":
        if true_means is None:
            raise InvalidParameter("true_mean rule needs the true means")
        n = history.n_arms
        dist = min(
            (abs(mu - true_means[history.arms[pos] - 1])
             for st in history.steps for pos, mu in zip(st.node, st.means())
             if 1 <= pos <= n),
            default=math.inf)
    else:
        raise InvalidParameter(f"unknown eps rule {rule!r}")
    return max(floor, dist)


def _fallback(env: Environment, arms: Sequence[int], tau: float, budget: int):
    """Equal split over <= 2 arms; threshold the empirical means."""
    n = len(arms)
    per = budget // n
    if per < 1:
        raise BudgetExhausted(f"fallback needs {n} pulls, budget is {budget}")
    q = [1 if env.sample_mean(a, per) >= tau else -1 for a in arms]
    first = next((j + 1 for j, s in enumerate(q) if s == 1), n + 1)
    return first, q


def min_budget(n_arms: int) -> int:
    """Smallest budget accepted for a monotone search over ``n_arms`` arms."""
    if n_arms <= 2:
        return n_arms
    return 3 * explore_length(n_arms)


def monotone_search(env: Environment, arms: Sequence[int], tau: float, budget: int,
                    sigma: Optional[float] = None, rng=None, eps_rule: str = "tau",
                    sentinels: bool = True):
    """Core of MTB over an ordered arm list with increasing means.

    Returns ``(khat, empirical_q)`` where ``khat`` is a 1-based position in
    ``arms`` (n+1 meaning "no arm above"), and ``empirical_q`` is only set by
    the small-n fallback.
    """
    arms = list(arms)
    n = len(arms)
    if n == 0:
        raise DegenerateProblem("no arms to search")
    if n <= 2:
        return _fallback(env, arms, tau, budget)
    if budget < min_budget(n):
        raise BudgetExhausted(f"MTB over {n} arms needs budget >= {min_budget(n)}, got {budget}")
    rng = env.algo_rng if rng is None else rng
    t1 = explore_length(n)
    t2 = budget // (3 * t1)
    hist = explore(env, tau, t1, t2, arms=arms, sigma=sigma, sentinels=sentinels)
    true_means = env.instance.means if eps_rule == "true_mean" else None
    eps = epsilon_hat(hist, tau, eps_rule, true_means)
    pos = choose(eps, hist, tau, rng)
    if pos is None:
        pos = hist.steps[-1].node.M
    return min(max(pos, 1), n + 1), None


def mtb_run(env: Environment, config: MtbConfig, rng=None) -> Tuple[Optional[int], Classification]:
    """MTB (or DEC-MTB) on the whole environment.

    Returns ``(khat, qhat)``. For increasing means arms >= khat are
    classified +1; for decreasing means arms <= khat are. ``khat`` is None
    when every arm is classified -1.
    """
    K = env.K
    if K < 1:
        raise DegenerateProblem("K must be positive")
    arms = list(range(1, K + 1))
    if config.direction == "decreasing":
        arms.reverse()
    pos, emp = monotone_search(env, arms, config.tau, config.budget, config.sigma,
                               rng, config.eps_rule, config.sentinels)
    if emp is not None:
        if config.direction == "decreasing":
            emp = emp[::-1]
        khat = arms[pos - 1] if pos <= K else None
        return khat, tuple(emp)
    if pos > K:
        return None, (-1,) * K
    khat = arms[pos - 1]
    if config.direction == "increasing":
        return khat, step_classification(K, khat)
    return khat, tuple(1 if k <= khat else -1 for k in range(1, K + 1))


def mtb_fc_budget(K: int, epsilon: float, delta: float, sigma: float = 1.0) -> int:
    """Fixed-confidence budget making MTB (epsilon, delta)-PAC."""
    if not epsilon > 0 or not 0 < delta < 1 or sigma < 0:
        raise InvalidParameter("need epsilon > 0, 0 < delta < 1, sigma >= 0")
    if K < 2:
        raise InvalidParameter("K must be at least 2")
    logk = math.log(K)
    if delta >= K ** -0.75:
        return math.floor(21 * sigma ** 2 * logk / epsilon ** 2 + 12 * logk)
    return math.floor(432 * sigma ** 2 * logk * math.log(9 / delta) / epsilon ** 2 + 12 * logk)


@dataclass
class AnytimeTrace:
    budgets: List[int] = field(default_factory=list)
    completed: int = 0


def anytime_first_budget(K: int) -> int:
    """floor(6 ln K) + 1, raised to the smallest budget MTB accepts."""
    return max(math.floor(6 * math.log(K)) + 1, min_budget(K))


def mtb_anytime(env: Environment, tau: float, sigma: Optional[float] = None,
                stop_at: Optional[int] = None, max_runs: Optional[int] = None,
                direction: str = "increasing", trace: Optional[AnytimeTrace] = None):
    """Doubling-trick MTB: budgets B, 2B, 4B, ... from scratch.

    The learner is stopped once ``stop_at`` total pulls would be exceeded
    (or after ``max_runs`` complete runs); the answer of the last completed
    run is returned, or ``(None, all -1)`` if no run completed.
    """
    if stop_at is None and max_runs is None:
        raise InvalidParameter("anytime run needs stop_at or max_runs")
    sigma = env.instance.sigma if sigma is None else sigma
    trace = AnytimeTrace() if trace is None else trace
    budget = anytime_first_budget(env.K)
    answer = (None, (-1,) * env.K)
    saved_cap = env.budget_cap
    if stop_at is not None:
        env.budget_cap = stop_at if saved_cap is None else min(saved_cap, stop_at)
    try:
        while max_runs is None or trace.completed < max_runs:
            trace.budgets.append(budget)
            cfg = MtbConfig(tau, budget, sigma, direction)
            try:
                answer = mtb_run(env, cfg)
            except BudgetExhausted:
                break
            trace.completed += 1
            budget *= 2
    finally:
        env.budget_cap = saved_cap
    return answer
