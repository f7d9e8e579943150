"""Concave thresholding: phased two-sided refinement on log-spaced arm sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

from .baseline import uniform_run
from .core import Classification, Environment, InvalidParameter, InvalidRange, interval_classification
from .mtb import min_budget, monotone_search

PAPER_CONSTANT = 2 ** 14
# Five sampled arms plus two monotone sub-searches per phase.
COST_FACTOR = 7
SHRINK = 7 / 8


def log_set(l: int, r: int) -> List[int]:
    """{l, l+1, l+2, l+4, ..., l+2^a} capped at floor((l+r)/2), ascending."""
    if l > r:
        raise InvalidRange(f"log-set needs l <= r, got {l} > {r}")
    d = r - l
    if d == 0:
        return [l]
    a = 0
    while not (2 ** a <= d <= 2 ** (a + 1)):
        a += 1
    mid = (l + r) // 2
    return sorted({l} | {min(l + 2 ** j, mid) for j in range(a + 1)})


def mirrored_log_set(l: int, r: int) -> List[int]:
    """The log-set grown from r towards the middle, ascending."""
    return sorted(-x for x in log_set(-r, -l))


def loglog(K: int) -> float:
    return max(1.0, math.log(math.log(K))) if K > math.e else 1.0


def _phase_pulls(K: int, i: int, m: int, constant_c: float) -> int:
    eps = SHRINK ** i
    log_inv_delta_sq = 2 * (m - i) * math.log(2)
    return math.floor(constant_c * loglog(K) / eps ** 2 * log_inv_delta_sq)


def schedule_cost(K: int, m: int, constant_c: float) -> int:
    return COST_FACTOR * sum(_phase_pulls(K, i, m, constant_c) for i in range(1, m + 1))


@dataclass(frozen=True)
class CtbSchedule:
    m_phases: int
    eps: tuple
    delta: tuple
    t2: tuple
    constant_c: float

    def thresholds(self, tau: float) -> tuple:
        return tuple(tau - 0.75 * e for e in self.eps)

    @property
    def cost(self) -> int:
        return COST_FACTOR * sum(self.t2)


def ctb_schedule(K: int, budget: int, constant_c: float = PAPER_CONSTANT) -> CtbSchedule:
    """Largest phase count M whose total cost fits in ``budget``."""
    if K < 3:
        raise InvalidParameter("CTB schedule needs K >= 3")
    if constant_c <= 0:
        raise InvalidParameter("constant_c must be positive")
    m = 0
    while schedule_cost(K, m + 1, constant_c) <= budget:
        m += 1
        if m > 10_000:
            raise InvalidParameter("budget too large for the phase scan")
    eps = tuple(SHRINK ** i for i in range(1, m + 1))
    delta = tuple(2.0 ** (i - m) for i in range(1, m + 1))
    t2 = tuple(_phase_pulls(K, i, m, constant_c) for i in range(1, m + 1))
    return CtbSchedule(m, eps, delta, t2, constant_c)


@dataclass(frozen=True)
class PhaseState:
    i: int
    l: int
    m: int
    r: int
    eps: float
    mu_l: float
    mu_lo: float
    mu_r: float
    mu_ro: float
    mu_m: float


@dataclass
class CtbTrace:
    schedule: Optional[CtbSchedule] = None
    phases: List[PhaseState] = field(default_factory=list)
    lhat: Optional[int] = None
    rhat: Optional[int] = None
    fallback: bool = False


def phase_floor(K: int) -> int:
    """Per-phase pull count below which a phase cannot run."""
    return max(1, min_budget(len(log_set(1, K))), min_budget(len(mirrored_log_set(1, K))))


def decide(phases: List[PhaseState], tau: float):
    """Interval (lhat, rhat) from the collected phase statistics, or (None, None)."""
    i_m = [p.m for p in phases if p.mu_m >= tau + 2 * p.eps]
    if not i_m:
        return None, None
    i_l = [p.l for p in phases if p.mu_l >= tau - 2 * p.eps and p.mu_lo <= tau - p.eps / 4]
    i_r = [p.r for p in phases if p.mu_r >= tau - 2 * p.eps and p.mu_ro <= tau - p.eps / 4]
    lo, hi = min(i_m), max(i_m)
    left = [k for k in i_l if k <= lo]
    right = [k for k in i_r if k >= hi]
    if not left or not right:
        return None, None
    return max(left), min(right)


def ctb_run(env: Environment, tau: float, budget: int, constant_c: float = PAPER_CONSTANT,
            sigma: Optional[float] = None, rng=None,
            trace: Optional[CtbTrace] = None) -> Classification:
    K = env.K
    rng = env.algo_rng if rng is None else rng
    trace = CtbTrace() if trace is None else trace
    if K < 3:
        trace.fallback = True
        return uniform_run(env, tau, budget)
    sched = ctb_schedule(K, budget, constant_c)
    trace.schedule = sched
    floor = phase_floor(K)
    if not any(t >= floor for t in sched.t2):
        trace.fallback = True
        return uniform_run(env, tau, budget)

    low = env.LOW
    l, r = 1, K
    m = (l + r) // 2
    for i, (eps, tau_i, n2) in enumerate(zip(sched.eps, sched.thresholds(tau), sched.t2), 1):
        if n2 < floor:
            continue
        mu_l = env.sample_mean(l, n2)
        mu_lo = env.sample_mean(l - 1 if l > 1 else low, n2)
        mu_r = env.sample_mean(r, n2)
        mu_ro = env.sample_mean(r + 1 if r < K else low, n2)
        mu_m = env.sample_mean(m, n2)
        trace.phases.append(PhaseState(i, l, m, r, eps, mu_l, mu_lo, mu_r, mu_ro, mu_m))

        left = log_set(l, r)
        pos, _ = monotone_search(env, left, tau_i, n2, sigma, rng)
        new_l = left[pos - 1] if pos <= len(left) else m
        right = mirrored_log_set(l, r)[::-1]
        pos, _ = monotone_search(env, right, tau_i, n2, sigma, rng)
        new_r = right[pos - 1] if pos <= len(right) else m
        l, r = new_l, new_r
        m = (l + r) // 2

    trace.lhat, trace.rhat = decide(trace.phases, tau)
    return interval_classification(K, trace.lhat, trace.rhat)
