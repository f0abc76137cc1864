"""Quantum state and operator types.

All types wrap an immutable complex128 array and validate their
invariants on construction. Basis indexing is lexicographic with qubit 0
as the most significant bit, so |q0 q1 ... q_{n-1}> has index
q0*2^{n-1} + ... + q_{n-1}.
"""
from typing import Hashable, Iterable, List, Optional, Sequence

import numpy as np

from entlab.core.config import settings
from entlab.core.exceptions import DimensionMismatchError, InvalidStateError


def num_qubits(dim: int) -> int:
    """Qubit count of a power-of-two dimension."""
    if dim < 1 or dim & (dim - 1):
        raise InvalidStateError(f"Dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def _frozen(array: np.ndarray) -> np.ndarray:
    data = np.array(array, dtype=np.complex128, copy=True)
    data.setflags(write=False)
    return data


def _square(matrix, name: str) -> np.ndarray:
    data = np.asarray(matrix, dtype=np.complex128)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise InvalidStateError(f"{name} must be a square matrix, got shape {data.shape}")
    return data


class StateVector:
    """Normalized pure state on ``qubits`` qubits."""

    def __init__(self, amplitudes, atol: Optional[float] = None):
        data = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        self._qubits = num_qubits(data.size)
        tol = settings.atol if atol is None else atol
        norm = float(np.vdot(data, data).real)
        if abs(norm - 1.0) > tol:
            raise InvalidStateError(f"State vector norm^2 is {norm}, expected 1")
        self._data = _frozen(data)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def qubits(self) -> int:
        return self._qubits

    @property
    def dim(self) -> int:
        return self._data.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._data, dtype=dtype)

    def __repr__(self) -> str:
        return f"StateVector(qubits={self._qubits})"

    @classmethod
    def basis(cls, index: int, qubits: int) -> "StateVector":
        data = np.zeros(1 << qubits, dtype=np.complex128)
        data[index] = 1.0
        return cls(data)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        data = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(data)
        if norm == 0:
            raise InvalidStateError("Cannot normalize the zero vector")
        return cls(data / norm)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Inner product of dimensions {self.dim} and {other.dim}")
        return complex(np.vdot(self._data, other._data))

    def probabilities(self) -> np.ndarray:
        return np.abs(self._data) ** 2

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self._data, self._data.conj()))


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator."""

    def __init__(self, entries, atol: Optional[float] = None):
        data = _square(entries, "Density matrix")
        self._qubits = num_qubits(data.shape[0])
        tol = settings.atol if atol is None else atol
        if not np.allclose(data, data.conj().T, rtol=0.0, atol=tol):
            raise InvalidStateError("Density matrix is not Hermitian")
        trace = np.trace(data)
        if abs(trace - 1.0) > tol:
            raise InvalidStateError(f"Density matrix trace is {trace}, expected 1")
        smallest = float(np.linalg.eigvalsh((data + data.conj().T) / 2)[0])
        if smallest < -tol:
            raise InvalidStateError(f"Density matrix has negative eigenvalue {smallest}")
        self._data = _frozen(data)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def qubits(self) -> int:
        return self._qubits

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._data, dtype=dtype)

    def __repr__(self) -> str:
        return f"DensityMatrix(qubits={self._qubits})"

    @classmethod
    def maximally_mixed(cls, qubits: int) -> "DensityMatrix":
        dim = 1 << qubits
        return cls(np.eye(dim) / dim)

    @classmethod
    def basis(cls, index: int, qubits: int) -> "DensityMatrix":
        return StateVector.basis(index, qubits).to_density_matrix()

    def trace(self) -> float:
        return float(np.trace(self._data).real)

    def purity(self) -> float:
        return float(np.trace(self._data @ self._data).real)

    def is_real(self, atol: Optional[float] = None) -> bool:
        tol = settings.atol if atol is None else atol
        return bool(np.max(np.abs(self._data.imag), initial=0.0) <= tol)


class UnitaryOp:
    """Square matrix with U^dagger U = I."""

    def __init__(self, entries, atol: Optional[float] = None):
        data = _square(entries, "Unitary")
        tol = settings.atol if atol is None else atol
        if not np.allclose(data.conj().T @ data, np.eye(data.shape[0]), rtol=0.0, atol=tol):
            raise InvalidStateError("Matrix is not unitary")
        self._data = _frozen(data)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def qubits(self) -> int:
        return num_qubits(self.dim)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._data, dtype=dtype)

    def __matmul__(self, other: "UnitaryOp") -> "UnitaryOp":
        return UnitaryOp(self._data @ other._data)

    def __repr__(self) -> str:
        return f"UnitaryOp(dim={self.dim})"

    @classmethod
    def identity(cls, qubits: int) -> "UnitaryOp":
        return cls(np.eye(1 << qubits))

    def dagger(self) -> "UnitaryOp":
        return UnitaryOp(self._data.conj().T)


class MeasurementFamily:
    """Indexed operators {M_i} with sum_i M_i^dagger M_i = I.

    Outcome probabilities on rho are Tr(M_i rho M_i^dagger).
    """

    def __init__(
        self,
        outcomes: Sequence[Hashable],
        operators: Iterable,
        atol: Optional[float] = None,
    ):
        ops = [_square(op, "Measurement operator") for op in operators]
        labels = list(outcomes)
        if len(labels) != len(ops) or not ops:
            raise InvalidStateError("Measurement family needs one operator per outcome")
        if len(set(labels)) != len(labels):
            raise InvalidStateError("Measurement outcomes must be distinct")
        dim = ops[0].shape[0]
        if any(op.shape != (dim, dim) for op in ops):
            raise InvalidStateError("Measurement operators must share one dimension")
        tol = settings.atol if atol is None else atol
        total = sum(op.conj().T @ op for op in ops)
        residual = float(np.max(np.abs(total - np.eye(dim))))
        if residual > tol:
            raise InvalidStateError(f"Measurement family is incomplete (residual {residual:.3e})")
        self._outcomes = tuple(labels)
        self._operators = tuple(_frozen(op) for op in ops)
        self._dim = dim

    @property
    def outcomes(self) -> tuple:
        return self._outcomes

    @property
    def operators(self) -> tuple:
        return self._operators

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._outcomes)

    def __repr__(self) -> str:
        return f"MeasurementFamily(outcomes={list(self._outcomes)}, dim={self._dim})"

    def operator(self, outcome: Hashable) -> np.ndarray:
        return self._operators[self._outcomes.index(outcome)]

    def effects(self) -> List[np.ndarray]:
        """POVM elements M_i^dagger M_i."""
        return [op.conj().T @ op for op in self._operators]

    def lift(self, left_dim: int = 1, right_dim: int = 1) -> "MeasurementFamily":
        """Act as I_left (x) M_i (x) I_right on a larger space."""
        return MeasurementFamily(
            self._outcomes,
            [np.kron(np.kron(np.eye(left_dim), op), np.eye(right_dim)) for op in self._operators],
        )
