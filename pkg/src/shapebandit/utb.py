"""Unimodal thresholding: locate the peak, search both flanks, verify."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .baseline import moss_top1, uniform_run
from .core import Classification, Environment, interval_classification
from .mtb import min_budget, monotone_search


@dataclass(frozen=True)
class UtbTrace:
    mhat: Optional[int] = None
    lhat: Optional[int] = None
    rhat: Optional[int] = None
    accepted: bool = False
    fallback: bool = False


def stage_budgets(budget: int):
    """(peak search, left flank, right flank, per-arm verification)."""
    return budget // 4, budget // 8, budget // 8, budget // 10


def utb_feasible(K: int, budget: int) -> bool:
    peak, flank, _, check = stage_budgets(budget)
    return budget >= 40 and peak >= K and flank >= min_budget(K) and check >= 1


def flank_search(env, arms, tau, budget, sigma, rng, decreasing=False) -> Optional[int]:
    """Boundary arm of a monotone flank, None if the whole flank is below tau."""
    order = list(arms)[::-1] if decreasing else list(arms)
    pos, _ = monotone_search(env, order, tau, budget, sigma, rng)
    return order[pos - 1] if pos <= len(order) else None


def utb_run(env: Environment, tau: float, budget: int, sigma: Optional[float] = None,
            rng=None, trace: Optional[list] = None) -> Classification:
    K = env.K
    rng = env.algo_rng if rng is None else rng
    if not utb_feasible(K, budget):
        if trace is not None:
            trace.append(UtbTrace(fallback=True))
        return uniform_run(env, tau, budget)

    peak, flank, _, check = stage_budgets(budget)
    mhat = moss_top1(env, peak, rng, sigma=sigma)
    lhat = flank_search(env, range(1, mhat + 1), tau, flank, sigma, rng)
    rhat = flank_search(env, range(mhat, K + 1), tau, flank, sigma, rng, decreasing=True)
    if lhat is None or rhat is None:
        if trace is not None:
            trace.append(UtbTrace(mhat, lhat, rhat, False))
        return (-1,) * K

    # Both outer neighbours beyond the ends are below-threshold sentinels.
    left_out = lhat - 1
    right_out = rhat + 1 if rhat < K else env.LOW
    mu_m = env.sample_mean(mhat, check)
    mu_l = env.sample_mean(lhat, check)
    mu_r = env.sample_mean(rhat, check)
    mu_lo = env.sample_mean(left_out, check)
    mu_ro = env.sample_mean(right_out, check)

    margin = mu_m - tau
    left_ok = (mu_lo < tau < mu_l) or abs(mu_l - tau) <= margin
    right_ok = (mu_ro < tau < mu_r) or abs(mu_r - tau) <= margin
    accepted = left_ok and right_ok
    if trace is not None:
        trace.append(UtbTrace(mhat, lhat, rhat, accepted))
    if accepted:
        return interval_classification(K, lhat, rhat)
    return (-1,) * K
