"""Bandit instances, the sampling environment, and classification regret."""
from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

SHAPES = ("none", "monotone", "unimodal", "concave")
KINDS = ("bernoulli", "gaussian", "deterministic")

# Value of the two virtual arms that bracket every threshold.
SENTINEL = 1e9

# Relative slack for the shape checks, so affine rescaling of a valid
# vector does not fail on rounding.
SHAPE_RTOL = 1e-12

Classification = tuple  # tuple of +1/-1 ints, one per arm


class ShapeBanditError(Exception):
    """Base class for all errors raised by this package."""


class BudgetExhausted(ShapeBanditError):
    pass


class InvalidArm(ShapeBanditError, IndexError):
    pass


class InvalidClassification(ShapeBanditError, ValueError):
    pass


class InvalidParameter(ShapeBanditError, ValueError):
    pass


class InvalidInstance(InvalidParameter):
    pass


class DegenerateProblem(ShapeBanditError, ValueError):
    pass


class InvalidRange(ShapeBanditError, ValueError):
    pass


@dataclass(frozen=True)
class ArmDistribution:
    kind: str
    value: float
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInstance(f"unknown arm kind {self.kind!r}")
        if not math.isfinite(self.value):
            raise InvalidInstance("arm parameter must be finite")
        if self.kind == "bernoulli" and not 0.0 <= self.value <= 1.0:
            raise InvalidInstance(f"bernoulli p={self.value} outside [0, 1]")
        if self.sigma < 0:
            raise InvalidInstance("gaussian sigma must be nonnegative")

    @classmethod
    def bernoulli(cls, p):
        return cls("bernoulli", float(p))

    @classmethod
    def gaussian(cls, mean, sigma=1.0):
        return cls("gaussian", float(mean), float(sigma))

    @classmethod
    def deterministic(cls, value):
        return cls("deterministic", float(value))

    @property
    def mean(self) -> float:
        return self.value

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "bernoulli":
            return float(rng.random() < self.value)
        if self.kind == "gaussian":
            return self.value + self.sigma * float(rng.standard_normal())
        return self.value

    def draw_mean(self, rng: np.random.Generator, n: int) -> float:
        """Empirical mean of ``n`` fresh draws, sampled in one shot.

        Uses the exact law of the sample mean (binomial / normal), so the
        cost does not grow with ``n``.
        """
        if self.kind == "bernoulli":
            return int(rng.binomial(n, self.value)) / n
        if self.kind == "gaussian":
            return self.value + self.sigma * float(rng.standard_normal()) / math.sqrt(n)
        return self.value


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple
    tau: float
    shape: str = "none"
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 1:
            raise InvalidInstance("an instance needs at least one arm")
        if self.shape not in SHAPES:
            raise InvalidInstance(f"unknown shape {self.shape!r}")
        if self.sigma < 0:
            raise InvalidInstance("sigma must be nonnegative")
        for arm in self.arms:
            if arm.kind == "gaussian" and arm.sigma > self.sigma:
                raise InvalidInstance(
                    f"declared sigma {self.sigma} below arm sigma {arm.sigma}")
            if arm.kind == "bernoulli" and self.sigma < 0.5:
                raise InvalidInstance("bernoulli arms need sigma >= 1/2")
        if self.shape != "none" and not validate_shape(self.means, self.shape):
            raise InvalidInstance(f"means do not satisfy shape {self.shape!r}")

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> np.ndarray:
        return np.array([a.mean for a in self.arms], dtype=float)

    @property
    def gaps(self) -> np.ndarray:
        return np.abs(self.tau - self.means)

    @classmethod
    def bernoulli(cls, means, tau, shape="none", sigma=1.0):
        return cls(tuple(ArmDistribution.bernoulli(p) for p in means), float(tau), shape, sigma)

    @classmethod
    def gaussian(cls, means, tau, shape="none", sigma=1.0, arm_sigmas=None):
        if arm_sigmas is None:
            arm_sigmas = [sigma] * len(means)
        arms = tuple(ArmDistribution.gaussian(m, s) for m, s in zip(means, arm_sigmas))
        return cls(arms, float(tau), shape, sigma)

    @classmethod
    def deterministic(cls, means, tau, shape="none", sigma=1.0):
        return cls(tuple(ArmDistribution.deterministic(v) for v in means), float(tau), shape, sigma)

    def reversed(self) -> "BanditInstance":
        """Same instance with arm labels i -> K+1-i."""
        shape = self.shape
        if shape == "monotone":
            shape = "none"  # a reversed increasing sequence is decreasing
        return BanditInstance(self.arms[::-1], self.tau, shape, self.sigma)

    def to_dict(self) -> dict:
        kinds = {a.kind for a in self.arms}
        if len(kinds) != 1:
            raise InvalidInstance("JSON form requires a single arm kind")
        kind = kinds.pop()
        out = {
            "kind": kind,
            "means": [a.mean for a in self.arms],
            "sigma": self.sigma,
            "tau": self.tau,
            "shape": self.shape,
        }
        if kind == "gaussian" and any(a.sigma != self.sigma for a in self.arms):
            out["arm_sigmas"] = [a.sigma for a in self.arms]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "BanditInstance":
        try:
            kind = data["kind"]
            means = data["means"]
            tau = data["tau"]
        except KeyError as exc:
            raise InvalidInstance(f"instance JSON missing field {exc}") from None
        shape = data.get("shape", "none")
        sigma = float(data.get("sigma", 1.0))
        if kind == "bernoulli":
            return cls.bernoulli(means, tau, shape, sigma)
        if kind == "gaussian":
            return cls.gaussian(means, tau, shape, sigma, data.get("arm_sigmas"))
        if kind == "deterministic":
            return cls.deterministic(means, tau, shape, sigma)
        raise InvalidInstance(f"unknown arm kind {kind!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "BanditInstance":
        return cls.from_dict(json.loads(text))


# -- seeding -----------------------------------------------------------------

def _tag(tag) -> int:
    if isinstance(tag, str):
        return zlib.crc32(tag.encode())
    return int(tag)


def derive_seed(master_seed: int, *path) -> int:
    """Deterministic 63-bit seed for the sub-stream named by ``path``.

    ``path`` items are ints or string tags; strings are hashed with CRC32 so
    the mapping is stable across processes and Python versions.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(_tag(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def episode_rngs(seed: int):
    """(reward stream, learner stream) for one episode."""
    return (np.random.default_rng(derive_seed(seed, "rewards")),
            np.random.default_rng(derive_seed(seed, "learner")))


# -- environment -------------------------------------------------------------

@dataclass
class Environment:
    """Budget-enforcing sampler over an instance.

    Real arms are indexed 1..K. Index 0 (``LOW``) and K+1 (``HIGH``) are
    deterministic sentinel arms at -SENTINEL and +SENTINEL; their pulls are
    counted like any other pull.
    """

    instance: BanditInstance
    seed: Optional[int] = 0
    budget_cap: Optional[int] = None
    rng: np.random.Generator = field(init=False, repr=False)
    algo_rng: np.random.Generator = field(init=False, repr=False)
    pulls_used: int = field(init=False, default=0)
    per_arm_counts: np.ndarray = field(init=False, repr=False)

    LOW = 0

    def __post_init__(self):
        if self.budget_cap is not None and self.budget_cap < 0:
            raise InvalidParameter("budget_cap must be nonnegative")
        self.rng, self.algo_rng = episode_rngs(0 if self.seed is None else self.seed)
        self.per_arm_counts = np.zeros(self.instance.K + 2, dtype=np.int64)

    @property
    def K(self) -> int:
        return self.instance.K

    @property
    def HIGH(self) -> int:
        return self.instance.K + 1

    @property
    def counts(self) -> np.ndarray:
        """Pull counts of the real arms 1..K."""
        return self.per_arm_counts[1:-1]

    @property
    def remaining(self) -> Optional[int]:
        if self.budget_cap is None:
            return None
        return self.budget_cap - self.pulls_used

    def _charge(self, k: int, n: int):
        if not 0 <= k <= self.instance.K + 1:
            raise InvalidArm(f"arm {k} outside 1..{self.instance.K}")
        if self.budget_cap is not None and self.pulls_used + n > self.budget_cap:
            raise BudgetExhausted(
                f"pulling arm {k} x{n} exceeds budget {self.budget_cap} "
                f"({self.pulls_used} used)")
        self.pulls_used += n
        self.per_arm_counts[k] += n

    def _arm(self, k: int):
        if k == 0:
            return None, -SENTINEL
        if k == self.instance.K + 1:
            return None, SENTINEL
        return self.instance.arms[k - 1], None

    def sample_arm(self, k: int) -> float:
        self._charge(k, 1)
        arm, fixed = self._arm(k)
        return fixed if arm is None else arm.draw(self.rng)

    def sample_mean(self, k: int, n: int) -> float:
        """Pull arm ``k`` ``n`` times and return the empirical mean."""
        if n < 1:
            raise InvalidParameter("need at least one pull")
        self._charge(k, n)
        arm, fixed = self._arm(k)
        return fixed if arm is None else arm.draw_mean(self.rng, n)


def sample_arm(env: Environment, k: int) -> float:
    return env.sample_arm(k)


# -- classification ------------------------------------------------------------

def true_classification(instance: BanditInstance) -> Classification:
    return tuple(1 if m >= instance.tau else -1 for m in instance.means)


def as_classification(values, K: Optional[int] = None) -> Classification:
    q = tuple(int(v) for v in values)
    if any(v not in (-1, 1) for v in q):
        raise InvalidClassification("classification entries must be +1 or -1")
    if K is not None and len(q) != K:
        raise InvalidClassification(f"expected {K} entries, got {len(q)}")
    return q


def simple_regret(instance: BanditInstance, qhat: Sequence[int]) -> float:
    """Largest gap among misclassified arms, 0 when nothing is misclassified."""
    qhat = as_classification(qhat, instance.K)
    worst = 0.0
    for mu, q in zip(instance.means, qhat):
        if (q == 1) != (mu >= instance.tau):
            worst = max(worst, abs(instance.tau - mu))
    return float(worst)


def step_classification(K: int, khat: Optional[int]) -> Classification:
    """+1 for arms k >= khat; all -1 when khat is None."""
    if khat is None:
        return (-1,) * K
    return tuple(1 if k >= khat else -1 for k in range(1, K + 1))


def interval_classification(K: int, lo: Optional[int], hi: Optional[int]) -> Classification:
    """+1 exactly on lo..hi (empty when either end is None or lo > hi)."""
    if lo is None or hi is None:
        return (-1,) * K
    return tuple(1 if lo <= k <= hi else -1 for k in range(1, K + 1))


# -- shapes --------------------------------------------------------------------

def _le(a, b, scale):
    return a <= b + SHAPE_RTOL * scale


def validate_shape(means, shape: str) -> bool:
    mu = np.asarray(means, dtype=float)
    if mu.ndim != 1 or mu.size < 1:
        return False
    if shape == "none":
        return True
    scale = max(1.0, float(np.max(np.abs(mu))))
    diffs = np.diff(mu)
    if shape == "monotone":
        return bool(np.all(diffs >= -SHAPE_RTOL * scale))
    if shape == "unimodal":
        # Nondecreasing then nonincreasing: no rise may follow a strict fall.
        falling = False
        for d in diffs:
            if d < -SHAPE_RTOL * scale:
                falling = True
            elif d > SHAPE_RTOL * scale and falling:
                return False
        return True
    if shape == "concave":
        for k in range(1, mu.size - 1):
            if not _le(0.5 * mu[k - 1] + 0.5 * mu[k + 1], mu[k], scale):
                return False
        return True
    raise InvalidParameter(f"unknown shape {shape!r}")
