"""Unstructured baseline and the best-arm subroutine used by UTB."""
from __future__ import annotations

import heapq
import math
from typing import Optional, Sequence

import numpy as np

from .core import BudgetExhausted, Classification, Environment, InvalidParameter


def uniform_run(env: Environment, tau: float, budget: int) -> Classification:
    """Pull every arm floor(budget/K) times and threshold the sample means."""
    K = env.K
    per = budget // K
    if per < 1:
        raise BudgetExhausted(f"uniform sampling needs budget >= K={K}, got {budget}")
    return tuple(1 if env.sample_mean(k, per) >= tau else -1 for k in range(1, K + 1))


def uniform_fc_budget(K: int, epsilon: float, delta: float, sigma: float = 1.0) -> int:
    if not epsilon > 0 or not 0 < delta < 1 or sigma < 0 or K < 1:
        raise InvalidParameter("need epsilon > 0, 0 < delta < 1, sigma >= 0, K >= 1")
    return math.floor(2 * sigma ** 2 * K * math.log(2 * K / delta) / epsilon ** 2) + K


def moss_index(mean: float, pulls: int, budget: int, n_arms: int, sigma: float) -> float:
    bonus = max(0.0, math.log(budget / (n_arms * pulls))) / pulls
    return mean + sigma * math.sqrt(bonus)


def moss_top1(env: Environment, budget: int, rng=None, arms: Optional[Sequence[int]] = None,
              sigma: Optional[float] = None) -> int:
    """MOSS run for ``budget`` pulls; recommends an arm drawn with
    probability proportional to its pull count.

    Ties in the index go to the lowest arm.
    """
    arms = list(range(1, env.K + 1)) if arms is None else list(arms)
    n = len(arms)
    if budget < n:
        raise BudgetExhausted(f"MOSS needs budget >= {n}, got {budget}")
    rng = env.algo_rng if rng is None else rng
    sigma = env.instance.sigma if sigma is None else sigma
    if n == 1:
        env.sample_mean(arms[0], budget)
        return arms[0]

    sums = [env.sample_arm(a) for a in arms]
    counts = [1] * n
    heap = [(-moss_index(sums[j], 1, budget, n, sigma), j) for j in range(n)]
    heapq.heapify(heap)
    for _ in range(budget - n):
        _, j = heapq.heappop(heap)
        sums[j] += env.sample_arm(arms[j])
        counts[j] += 1
        c = counts[j]
        heapq.heappush(heap, (-moss_index(sums[j] / c, c, budget, n, sigma), j))

    cum = np.cumsum(counts)
    pick = int(np.searchsorted(cum, rng.random() * budget, side="right"))
    return arms[min(pick, n - 1)]
