"""Forrelation instances and the swap-test SMP protocol."""
import math
from typing import List, Optional, Sequence

import numpy as np

from entlab.core.config import settings
from entlab.core.exceptions import InvalidStateError, PlantingInfeasibleError
from entlab.core.logger import get_logger, log_execution_time
from entlab.core.seeding import make_rng
from entlab.models.instances import STAR, ForrInstance, ForrXorInstance, as_signs
from entlab.models.quantum import StateVector
from entlab.services.fourier_service import butterfly
from entlab.services.qcore_service import qcore

logger = get_logger(__name__)

# Mixing strengths tried when planting forrelated pairs
MIX_GRID = tuple(np.linspace(0.0, 1.0, 11))


def _check_length(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise InvalidStateError(f"Length {n} is not a power of two >= 2")


def _orthonormal_hadamard(vector: np.ndarray) -> np.ndarray:
    return butterfly(np.asarray(vector, dtype=np.float64)) / math.sqrt(len(vector))


class ForrelationService:
    """Forrelation values, promise classification, planting and the swap test."""

    @property
    def planting_constant(self) -> float:
        return settings.forr_planting_constant

    @property
    def max_rejections(self) -> int:
        return settings.forr_max_rejections

    @property
    def failure_budget(self) -> float:
        return settings.forr_failure_budget

    def forr_value(self, z: Sequence[int]) -> float:
        """
        (1/n) <z2, H z1> with H the orthonormal Hadamard of side n/2.

        Args:
            z: ±1 vector of power-of-two length n

        Returns:
            Value in [-1/2, 1/2]
        """
        values = np.asarray(z, dtype=np.float64)
        n = len(values)
        _check_length(n)
        half = n // 2
        return float(values[half:] @ _orthonormal_hadamard(values[:half])) / n

    def classify(self, x: Sequence[int], y: Sequence[int], epsilon: float) -> int:
        """-1 if forr(x*y) >= eps/4, +1 if forr(x*y) <= eps/8, STAR in between."""
        if len(x) != len(y):
            raise InvalidStateError("x and y must have the same length")
        value = self.forr_value(np.asarray(x) * np.asarray(y))
        if value >= epsilon / 4:
            return -1
        if value <= epsilon / 8:
            return 1
        return STAR

    def swap_overlap(self, x: Sequence[int], y: Sequence[int]) -> float:
        """<x~| H_n |y~> for the unit encodings x~ = x / sqrt(n), y~ = y / sqrt(n)."""
        xv = np.asarray(x, dtype=np.float64)
        _check_length(len(xv))
        return float(xv @ _orthonormal_hadamard(y)) / len(xv)

    def encodings(self, inst: ForrInstance) -> tuple:
        """Alice's |x~> and Bob's H_n |y~> as state vectors."""
        n = inst.n
        alice = StateVector(np.asarray(inst.x, dtype=np.float64) / math.sqrt(n))
        bob = StateVector(_orthonormal_hadamard(inst.y) / math.sqrt(n))
        return alice, bob

    def acceptance_probability(self, inst: ForrInstance) -> float:
        """Probability that one swap test between the two messages accepts."""
        return qcore.swap_test_prob(*self.encodings(inst))

    def threshold(self, epsilon: float) -> float:
        """Midpoint of the promised acceptance levels 1/2 + (eps/4)^2/2 and 1/2 + (eps/8)^2/2."""
        return 0.5 + 5.0 * epsilon**2 / 256.0

    def default_reps(self, epsilon: float, k: int) -> int:
        """
        Swap tests per copy so that all k copies are decided correctly with
        probability at least 1 - failure_budget.

        Hoeffding on a gap of 3 eps^2 / 256 around the threshold with a
        per-copy failure of failure_budget / k.
        """
        if epsilon <= 0 or k < 1:
            raise InvalidStateError("default_reps needs epsilon > 0 and k >= 1")
        gap = 3.0 * epsilon**2 / 256.0
        return math.ceil(math.log(k / self.failure_budget) / (2.0 * gap**2))

    def xor_gap_epsilon(self, k: int, n: int) -> float:
        """Gap 1/(60 k^2 ln n) of the k-fold XOR problem."""
        return 1.0 / (60.0 * k**2 * math.log(n))

    def min_epsilon(self, n: int) -> float:
        return 8.0 * self.planting_constant / math.sqrt(n)

    def _plant_forrelated(self, n: int, epsilon: float, rng: np.random.Generator) -> tuple:
        half = n // 2
        for attempt in range(1, self.max_rejections + 1):
            x = rng.choice((1, -1), size=n)
            z1 = rng.choice((1, -1), size=half)
            target = np.where(_orthonormal_hadamard(z1) >= 0, 1, -1)
            p = MIX_GRID[(attempt - 1) % len(MIX_GRID)]
            z2 = np.where(rng.random(half) < p, target, rng.choice((1, -1), size=half))
            y = x * np.concatenate([z1, z2])
            if self.forr_value(x * y) >= epsilon / 4 and self.swap_overlap(x, y) ** 2 >= (epsilon / 4) ** 2:
                return x, y, attempt
        raise PlantingInfeasibleError(f"No forrelated pair after {self.max_rejections} attempts")

    def _plant_uncorrelated(self, n: int, epsilon: float, rng: np.random.Generator) -> tuple:
        for attempt in range(1, self.max_rejections + 1):
            x = rng.choice((1, -1), size=n)
            y = rng.choice((1, -1), size=n)
            if abs(self.forr_value(x * y)) <= epsilon / 8 and self.swap_overlap(x, y) ** 2 <= (epsilon / 8) ** 2:
                return x, y, attempt
        raise PlantingInfeasibleError(f"No uncorrelated pair after {self.max_rejections} attempts")

    def plant_instance(self, n: int, epsilon: float, label: int, seed=None) -> ForrInstance:
        """
        Rejection-sample an instance whose label is fixed in advance.

        Forrelated (-1) pairs mix the second half of z = x*y toward
        sign(H z1). Both labels also enforce the matching promise on the
        swap-test overlap, so the swap test decides planted instances.

        Args:
            n: Power-of-two length
            epsilon: Promise gap, at least 8 C / sqrt(n)
            label: Target label, +1 or -1
            seed: Seed or generator

        Returns:
            Instance that classifies to ``label``

        Raises:
            PlantingInfeasibleError: epsilon below the feasibility bound or
                no success within the rejection budget
        """
        _check_length(n)
        if label not in (1, -1):
            raise InvalidStateError("Planted label must be +1 or -1")
        if epsilon < self.min_epsilon(n):
            raise PlantingInfeasibleError(
                f"epsilon={epsilon} below the planting bound {self.min_epsilon(n):.4f} at n={n}"
            )
        rng = make_rng(seed)
        planter = self._plant_forrelated if label == -1 else self._plant_uncorrelated
        x, y, attempts = planter(n, epsilon, rng)
        logger.debug("Planted instance", extra={"extra": {"n": n, "label": label, "attempts": attempts}})
        return ForrInstance(
            n=n,
            x=tuple(int(v) for v in x),
            y=tuple(int(v) for v in y),
            label=label,
            epsilon=epsilon,
            seed=seed if isinstance(seed, int) else None,
        )

    def instance(self, x: Sequence[int], y: Sequence[int], epsilon: float) -> ForrInstance:
        """Wrap a given pair with its classified label."""
        x, y = as_signs(x, "x"), as_signs(y, "y")
        return ForrInstance(n=len(x), x=x, y=y, label=self.classify(x, y, epsilon), epsilon=epsilon)

    @log_execution_time(logger)
    def plant_xor(self, n: int, k: int, epsilon: float, label: int, seed=None) -> ForrXorInstance:
        """k planted copies with uniformly random labels whose product is ``label``."""
        rng = make_rng(seed)
        labels = list(rng.choice((1, -1), size=k - 1)) if k > 1 else []
        labels.append(label * int(np.prod(labels)) if labels else label)
        copies = [self.plant_instance(n, epsilon, int(b), rng) for b in labels]
        return ForrXorInstance(tuple(copies))

    def copy_frequencies(self, inst: ForrXorInstance, reps: int, seed=None) -> List[float]:
        """Acceptance frequency of ``reps`` simulated swap tests per copy."""
        if reps < 1:
            raise InvalidStateError("reps must be positive")
        rng = make_rng(seed)
        return [rng.binomial(reps, self.acceptance_probability(c)) / reps for c in inst.copies]

    def swap_test_protocol(self, inst: ForrXorInstance, reps: Optional[int] = None, seed=None) -> int:
        """
        Decide every copy by thresholding its swap-test frequency and output
        the product of the copy decisions.

        Args:
            inst: XOR instance
            reps: Swap tests per copy; defaults to default_reps
            seed: Seed or generator

        Returns:
            -1 or +1
        """
        if reps is None:
            reps = self.default_reps(inst.epsilon, inst.k)
        cut = self.threshold(inst.epsilon)
        decision = 1
        for frequency in self.copy_frequencies(inst, reps, seed):
            decision *= -1 if frequency >= cut else 1
        return decision


# Global instance
forrelation_service = ForrelationService()
