"""Functions on the Boolean hypercube and their Fourier spectra.

Points x in {-1,1}^n and subsets S of [n] are both stored as bitmasks:
bit i of x set means x_i = -1, bit i of S set means i is in S. Coordinates
are 0-based.
"""
from typing import Callable, Optional, Sequence

import numpy as np

from entlab.core.exceptions import DimensionMismatchError, InvalidStateError
from entlab.models.quantum import DensityMatrix, num_qubits


def popcounts(n: int) -> np.ndarray:
    """Number of set bits of every mask in [0, 2^n)."""
    masks = np.arange(1 << n)
    counts = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        counts += (masks >> bit) & 1
    return counts


def points(n: int) -> np.ndarray:
    """All x in {-1,1}^n as rows, row index = bitmask."""
    masks = np.arange(1 << n)[:, None]
    return 1 - 2 * ((masks >> np.arange(n)[None, :]) & 1)


def mask_of(x: Sequence[int]) -> int:
    """Bitmask of a ±1 vector."""
    return sum(1 << i for i, v in enumerate(x) if v == -1)


def subset_mask(subset: Sequence[int]) -> int:
    return sum(1 << i for i in subset)


def members(mask: int) -> list:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


class BooleanFunctionTable:
    """Real values of f on every point of {-1,1}^n."""

    def __init__(self, n: int, values, bounded: bool = False):
        data = np.asarray(values, dtype=np.float64).reshape(-1)
        if data.size != 1 << n:
            raise DimensionMismatchError(f"Table of size {data.size} for n={n}")
        if not np.all(np.isfinite(data)):
            raise InvalidStateError("Function table has non-finite entries")
        if bounded and np.max(np.abs(data), initial=0.0) > 1.0 + 1e-12:
            raise InvalidStateError("Bounded function table leaves [-1, 1]")
        data = data.copy()
        data.setflags(write=False)
        self.n = n
        self.values = data
        self.bounded = bounded

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[np.ndarray], float], bounded: bool = False) -> "BooleanFunctionTable":
        return cls(n, [fn(x) for x in points(n)], bounded=bounded)

    def l1_mean(self) -> float:
        """E_x |f(x)|."""
        return float(np.mean(np.abs(self.values)))

    def __repr__(self) -> str:
        return f"BooleanFunctionTable(n={self.n})"


class FourierSpectrum:
    """Coefficients f_hat(S) indexed by subset bitmask."""

    def __init__(self, n: int, coefficients):
        data = np.asarray(coefficients, dtype=np.float64).reshape(-1)
        if data.size != 1 << n:
            raise DimensionMismatchError(f"Spectrum of size {data.size} for n={n}")
        data = data.copy()
        data.setflags(write=False)
        self.n = n
        self.coefficients = data

    def level(self, ell: int) -> np.ndarray:
        """Coefficients of every S with |S| = ell."""
        return self.coefficients[popcounts(self.n) == ell]

    def __getitem__(self, subset_mask_value: int) -> float:
        return float(self.coefficients[subset_mask_value])

    def __repr__(self) -> str:
        return f"FourierSpectrum(n={self.n})"


class MatrixValuedFunction:
    """A density matrix on c qubits for every point of {-1,1}^n."""

    def __init__(self, n: int, values: Sequence, validate: bool = True):
        mats = [v.data if isinstance(v, DensityMatrix) else np.asarray(v, dtype=np.complex128) for v in values]
        if len(mats) != 1 << n:
            raise DimensionMismatchError(f"{len(mats)} matrices for n={n}")
        if validate:
            mats = [DensityMatrix(m).data for m in mats]
        stack = np.array(mats, dtype=np.complex128)
        stack.setflags(write=False)
        self.n = n
        self.c = num_qubits(stack.shape[1])
        self.values = stack

    def __repr__(self) -> str:
        return f"MatrixValuedFunction(n={self.n}, c={self.c})"


class MatrixSpectrum:
    """Matrix coefficients rho_hat(S), shape (2^n, 2^c, 2^c)."""

    def __init__(self, n: int, coefficients):
        stack = np.asarray(coefficients, dtype=np.complex128)
        if stack.shape[0] != 1 << n:
            raise DimensionMismatchError(f"Matrix spectrum of length {stack.shape[0]} for n={n}")
        stack = stack.copy()
        stack.setflags(write=False)
        self.n = n
        self.coefficients = stack

    def level(self, ell: int) -> np.ndarray:
        return self.coefficients[popcounts(self.n) == ell]

    def __repr__(self) -> str:
        return f"MatrixSpectrum(n={self.n}, side={self.coefficients.shape[1]})"


def random_bounded_table(n: int, rng: np.random.Generator, density: Optional[float] = None) -> BooleanFunctionTable:
    """Uniform values in [-1, 1] with a random fraction of points zeroed."""
    keep = rng.random() if density is None else density
    values = rng.uniform(-1.0, 1.0, size=1 << n) * (rng.random(1 << n) < max(keep, 1.0 / (1 << n)))
    if not np.any(values):
        values[rng.integers(1 << n)] = rng.choice([-1.0, 1.0])
    return BooleanFunctionTable(n, values, bounded=True)
