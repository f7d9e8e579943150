"""Episode runner, Monte Carlo estimates, rate sweeps and exponent fits."""
from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .baseline import uniform_run
from .core import (
    BanditInstance,
    BudgetExhausted,
    Environment,
    InvalidParameter,
    derive_seed,
    simple_regret,
)
from .ctb import PAPER_CONSTANT, ctb_run
from .instances import (
    FAMILY_SHAPE,
    default_epsilon,
    family_size,
    gen_lower_bound_instance,
    random_family_index,
)
from .mtb import MtbConfig, mtb_run
from .utb import utb_run

ALGORITHMS = ("uniform", "mtb", "dec_mtb", "utb", "ctb")
CSV_COLUMNS = ("algo", "shape", "family", "K", "T", "reps", "seed", "regret_mean",
               "regret_se", "regret_p90", "mean_pulls", "skipped")


@dataclass(frozen=True)
class RunResult:
    qhat: tuple
    regret: float
    pulls: int
    per_arm: tuple
    khat: Optional[int] = None


@dataclass
class SweepRow:
    algo: str
    shape: str
    family: str
    K: int
    T: int
    reps: int
    seed: int
    regret_mean: float = math.nan
    regret_se: float = math.nan
    regret_p90: float = math.nan
    mean_pulls: float = math.nan
    skipped: bool = False


@dataclass
class SlopeFit:
    slope: float
    slope_se: float
    intercept: float
    n_points: int
    excluded: List = field(default_factory=list)


def run_once(algo: str, instance: BanditInstance, budget: int, seed: int,
             config: Optional[dict] = None) -> RunResult:
    """One full episode against a budget-capped environment."""
    config = config or {}
    env = Environment(instance, seed=seed, budget_cap=budget)
    tau = instance.tau
    khat = None
    if algo == "uniform":
        qhat = uniform_run(env, tau, budget)
    elif algo in ("mtb", "dec_mtb"):
        cfg = MtbConfig(tau, budget, config.get("sigma", instance.sigma),
                        "decreasing" if algo == "dec_mtb" else "increasing",
                        config.get("eps_rule", "tau"))
        khat, qhat = mtb_run(env, cfg)
    elif algo == "utb":
        qhat = utb_run(env, tau, budget, config.get("sigma"))
    elif algo == "ctb":
        qhat = ctb_run(env, tau, budget, config.get("ctb_constant", PAPER_CONSTANT),
                       config.get("sigma"))
    else:
        raise InvalidParameter(f"unknown algorithm {algo!r}")
    assert env.pulls_used <= budget
    return RunResult(tuple(qhat), simple_regret(instance, qhat), env.pulls_used,
                     tuple(int(c) for c in env.counts), khat)


def mean_se(values: Sequence[float]) -> Tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        return float(x.mean()) if x.size else math.nan, math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _episode(task):
    algo, instance, family, K, budget, seed, config = task
    if instance is None:
        fam_rng = np.random.default_rng(derive_seed(seed, "family"))
        eps = config.get("epsilon") or default_epsilon(family, K, budget, config.get("family_sigma", 1.0))
        instance = gen_lower_bound_instance(
            family, K, eps, config.get("family_sigma", 1.0),
            random_family_index(family, K, fam_rng), config.get("variant", "gaussian"))
    res = run_once(algo, instance, budget, seed, config)
    return res.regret, res.pulls


def _map(tasks, workers: int):
    if workers <= 1:
        return [_episode(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_episode, tasks, chunksize=max(1, len(tasks) // (8 * workers))))


def rep_seeds(master_seed: int, algo: str, reps: int) -> List[int]:
    return [derive_seed(master_seed, algo, r) for r in range(reps)]


def episode_regrets(algo: str, instance: BanditInstance, budget: int, reps: int,
                    master_seed: int, config: Optional[dict] = None,
                    workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    config = dict(config or {})
    tasks = [(algo, instance, None, instance.K, budget, s, config)
             for s in rep_seeds(master_seed, algo, reps)]
    out = _map(tasks, workers)
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def estimate_regret(algo: str, instance: BanditInstance, budget: int, reps: int,
                    master_seed: int, config: Optional[dict] = None,
                    workers: int = 1) -> Tuple[float, float]:
    """Monte Carlo (mean, standard error) of the simple regret."""
    if reps < 2:
        raise InvalidParameter("need at least 2 repetitions")
    regrets, _ = episode_regrets(algo, instance, budget, reps, master_seed, config, workers)
    return mean_se(regrets)


def family_regrets(algo: str, family: str, K: int, budget: int, reps: int, master_seed: int,
                   config: Optional[dict] = None, workers: int = 1):
    """Regrets with the family member redrawn uniformly for every repetition."""
    config = dict(config or {})
    tasks = [(algo, None, family, K, budget, s, config)
             for s in rep_seeds(master_seed, algo, reps)]
    out = _map(tasks, workers)
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def fit_power_law(x, y) -> SlopeFit:
    """OLS slope of log(y) against log(x); nonpositive y are excluded."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (y > 0) & np.isfinite(y)
    excluded = [float(v) for v in x[~keep]]
    lx, ly = np.log(x[keep]), np.log(y[keep])
    if lx.size < 2:
        return SlopeFit(math.nan, math.nan, math.nan, int(lx.size), excluded)
    if lx.size == 2:
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        return SlopeFit(float(slope), math.nan, float(ly[0] - slope * lx[0]), 2, excluded)
    res = stats.linregress(lx, ly)
    return SlopeFit(float(res.slope), float(res.stderr), float(res.intercept),
                    int(lx.size), excluded)


def sweep_cell(algo: str, family: str, K: int, T: int, reps: int, master_seed: int,
               config: Optional[dict] = None, workers: int = 1) -> SweepRow:
    row = SweepRow(algo, FAMILY_SHAPE[family], family, K, T, reps, master_seed)
    try:
        regrets, pulls = family_regrets(algo, family, K, T, reps, master_seed, config, workers)
    except (InvalidParameter, BudgetExhausted, ValueError) as exc:
        warnings.warn(f"skipping cell {algo}/{family} K={K} T={T}: {exc}")
        row.skipped = True
        return row
    row.regret_mean, row.regret_se = mean_se(regrets)
    row.regret_p90 = float(np.quantile(regrets, 0.9))
    row.mean_pulls = float(pulls.mean())
    return row


def rate_sweep(algo: str, family: str, K_list: Sequence[int], T_list: Sequence[int],
               reps: int, master_seed: int, config: Optional[dict] = None,
               workers: int = 1):
    """Evaluate the (K, T) grid and fit log-log slopes.

    Returns ``(rows, fits)`` with ``fits["T"][K]`` the slope of log mean
    regret against log T and ``fits["K"][T]`` the slope against log K.
    """
    rows = [sweep_cell(algo, family, K, T, reps, master_seed, config, workers)
            for K in K_list for T in T_list]
    fits: Dict[str, Dict[int, SlopeFit]] = {"T": {}, "K": {}}
    for K in K_list:
        cells = [r for r in rows if r.K == K and not r.skipped]
        fits["T"][K] = fit_power_law([r.T for r in cells], [r.regret_mean for r in cells])
    for T in T_list:
        cells = [r for r in rows if r.T == T and not r.skipped]
        fits["K"][T] = fit_power_law([r.K for r in cells], [r.regret_mean for r in cells])
    return rows, fits


def lower_bound_stress(algo: str, family: str, K: int, T: int, reps: int, master_seed: int,
                       config: Optional[dict] = None, indices=None, epsilon=None,
                       safety: float = 0.5):
    """Max over family members of the mean regret, against safety * eps / 8.

    Falling short only warns: a max over noisy means is itself noisy.
    """
    eps = epsilon or default_epsilon(family, K, T)
    if indices is None:
        if family == "hypercube":
            rng = np.random.default_rng(derive_seed(master_seed, "stress"))
            indices = [random_family_index(family, K, rng) for _ in range(8)]
        else:
            indices = range(1, family_size(family, K) + 1)
    worst = 0.0
    for idx in indices:
        inst = gen_lower_bound_instance(family, K, eps, 1.0, idx)
        m, _ = estimate_regret(algo, inst, T, reps, master_seed, config)
        worst = max(worst, m)
    target = safety * eps / 8
    ok = worst >= target
    if not ok:
        warnings.warn(f"{algo} on {family}: max mean regret {worst:.4g} below {target:.4g}")
    return worst, target, ok


def write_csv(rows: Sequence[SweepRow], path) -> None:
    """Write rows to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(rows, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(rows, fh)


def _write_rows(rows, fh):
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
    w.writeheader()
    for r in rows:
        w.writerow({k: getattr(r, k) for k in CSV_COLUMNS})


def rows_to_json(rows: Sequence[SweepRow]) -> str:
    return json.dumps([{k: getattr(r, k) for k in CSV_COLUMNS} for r in rows], indent=2)
