"""Lower-bound instance families, random shaped instances, Holder discretization."""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .core import BanditInstance, InvalidParameter

FAMILIES = ("hypercube", "monotone_step", "unimodal_spike", "concave_ramp")
FAMILY_SHAPE = {
    "hypercube": "none",
    "monotone_step": "monotone",
    "unimodal_spike": "unimodal",
    "concave_ramp": "concave",
}
# Algorithm each family is built to stress.
FAMILY_ALGO = {
    "hypercube": "uniform",
    "monotone_step": "mtb",
    "unimodal_spike": "utb",
    "concave_ramp": "ctb",
}


def ramp_levels(K: int) -> int:
    """Number of ramp instances, floor(log2 K)."""
    return K.bit_length() - 1


def family_size(family: str, K: int) -> int:
    if family == "hypercube":
        return 2 ** K
    if family in ("monotone_step", "unimodal_spike"):
        return K
    if family == "concave_ramp":
        return ramp_levels(K)
    raise InvalidParameter(f"unknown family {family!r}")


def default_epsilon(family: str, K: int, budget: int, sigma: float = 1.0) -> float:
    """Gap scale that makes the family hardest at this budget."""
    s2 = sigma ** 2
    if family == "hypercube":
        return math.sqrt(K * s2 * max(2.0, math.log(K)) / (8 * budget))
    if family == "monotone_step":
        return math.sqrt(s2 * max(2.0, math.log(K)) / (8 * budget))
    if family == "unimodal_spike":
        return math.sqrt(4 * s2 * K / budget)
    if family == "concave_ramp":
        levels = ramp_levels(K)
        return math.sqrt(s2 * max(2.0, math.log(levels) if levels > 0 else 0.0) / (8 * budget))
    raise InvalidParameter(f"unknown family {family!r}")


def _build(means, tau, shape, variant, sigma):
    if variant == "gaussian":
        return BanditInstance.gaussian(means, tau, shape, sigma)
    if variant == "bernoulli":
        shifted = [0.5 + m for m in means]
        if min(shifted) < 0 or max(shifted) > 1:
            raise InvalidParameter("bernoulli variant needs means in [0, 1]")
        return BanditInstance.bernoulli(shifted, 0.5 + tau, shape, max(sigma, 0.5))
    raise InvalidParameter(f"unknown variant {variant!r}")


def gen_lower_bound_instance(family: str, K: int, epsilon: float, sigma: float = 1.0,
                             index=1, variant: str = "gaussian") -> BanditInstance:
    """Member ``index`` of a lower-bound family.

    ``index`` is a +/-1 vector for the hypercube, an arm in 1..K for the step
    and spike families, and a level in 1..floor(log2 K) for the ramp.
    """
    if not 0 < epsilon < 1:
        raise InvalidParameter("epsilon must lie in (0, 1)")
    if K < 1:
        raise InvalidParameter("K must be positive")
    if family == "hypercube":
        q = [int(v) for v in index]
        if len(q) != K or any(v not in (-1, 1) for v in q):
            raise InvalidParameter("hypercube index must be a +/-1 vector of length K")
        means = [v * epsilon for v in q]
        tau = 0.0
    elif family == "monotone_step":
        k = int(index)
        if not 1 <= k <= K:
            raise InvalidParameter(f"step position {k} outside 1..{K}")
        means = [0.0 if j < k else epsilon for j in range(1, K + 1)]
        tau = epsilon / 2
    elif family == "unimodal_spike":
        k = int(index)
        if not 1 <= k <= K:
            raise InvalidParameter(f"spike position {k} outside 1..{K}")
        means = [epsilon if j == k else 0.0 for j in range(1, K + 1)]
        tau = epsilon / 2
    elif family == "concave_ramp":
        lvl = int(index)
        if not 1 <= lvl <= ramp_levels(K):
            raise InvalidParameter(f"ramp level {lvl} outside 1..{ramp_levels(K)}")
        base = 2 ** lvl
        means = [j / base * epsilon if j <= 2 * base else 2 * epsilon for j in range(1, K + 1)]
        tau = epsilon
    else:
        raise InvalidParameter(f"unknown family {family!r}")
    return _build(means, tau, FAMILY_SHAPE[family], variant, sigma)


def random_family_index(family: str, K: int, rng: np.random.Generator):
    if family == "hypercube":
        return tuple(int(v) for v in rng.choice([-1, 1], size=K))
    return int(rng.integers(1, family_size(family, K) + 1))


def _shape_means(shape: str, K: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(K)
    if shape == "none":
        return u
    if shape == "monotone":
        return np.sort(u)
    if shape == "unimodal":
        mode = int(rng.integers(0, K))
        return np.concatenate([np.sort(u[:mode + 1]), np.sort(u[mode + 1:])[::-1]])
    if shape == "concave":
        if K < 3:
            return np.sort(u)
        steps = np.sort(rng.uniform(-1.0, 1.0, size=K - 1))[::-1]
        mu = np.concatenate([[0.0], np.cumsum(steps)])
        span = mu.max() - mu.min()
        return (mu - mu.min()) / span if span > 0 else np.zeros(K)
    raise InvalidParameter(f"unknown shape {shape!r}")


def gen_random_instance(shape: str, K: int, rng, variant: str = "bernoulli",
                        sigma: float = 1.0) -> BanditInstance:
    if K < 1:
        raise InvalidParameter("K must be positive")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    means = _shape_means(shape, K, rng)
    tau = float(rng.uniform(means.min(), means.max()))
    if variant == "bernoulli":
        return BanditInstance.bernoulli(np.clip(means, 0.0, 1.0), tau, shape, sigma)
    if variant == "gaussian":
        return BanditInstance.gaussian(means, tau, shape, sigma)
    if variant == "deterministic":
        return BanditInstance.deterministic(means, tau, shape, sigma)
    raise InvalidParameter(f"unknown variant {variant!r}")


def holder_bins(shape: str, beta: float, budget: float) -> int:
    """Number of arms used to discretize [0, 1] for a beta-Holder mean function."""
    if not beta > 0:
        raise InvalidParameter("beta must be positive")
    if budget < 2:
        raise InvalidParameter("budget must be at least 2")
    if shape in ("none", "unstructured"):
        m = (budget / math.log(budget)) ** (1 / (2 * beta + 1))
    elif shape in ("monotone", "concave"):
        m = budget ** (1 / beta)
    elif shape == "unimodal":
        m = budget ** (1 / (2 * beta + 1))
    else:
        raise InvalidParameter(f"unknown shape {shape!r}")
    return max(2, round(m))


def discretize_holder(f: Callable[[float], float], beta: float, budget: float, shape: str,
                      tau: float = 0.5, variant: str = "gaussian", sigma: float = 1.0,
                      max_arms: Optional[int] = 10 ** 6) -> BanditInstance:
    """Arms at the bin midpoints of an equal-width partition of [0, 1]."""
    K = holder_bins(shape, beta, budget)
    if max_arms is not None and K > max_arms:
        raise InvalidParameter(f"{K} bins exceed max_arms={max_arms}")
    means = [float(f((j - 0.5) / K)) for j in range(1, K + 1)]
    if min(means) < 0 or max(means) > 1:
        raise InvalidParameter("f must map into [0, 1]")
    shape = "none" if shape == "unstructured" else shape
    if variant == "bernoulli":
        return BanditInstance.bernoulli(means, tau, shape, sigma)
    return BanditInstance.gaussian(means, tau, shape, sigma)
