"""Exact linear algebra for small quantum systems."""
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import hadamard
from scipy.stats import unitary_group

from entlab.core.config import settings
from entlab.core.exceptions import DimensionMismatchError, InvalidStateError
from entlab.core.logger import get_logger
from entlab.models.quantum import (
    DensityMatrix,
    MeasurementFamily,
    StateVector,
    UnitaryOp,
    num_qubits,
)

logger = get_logger(__name__)

QuantumObject = Union[DensityMatrix, StateVector, UnitaryOp]


class MeasurementOutcome(NamedTuple):
    """One branch of a measurement; ``state`` is None for degenerate outcomes."""
    outcome: object
    probability: float
    state: Optional[DensityMatrix]


def _matrix(value) -> np.ndarray:
    if isinstance(value, (DensityMatrix, StateVector, UnitaryOp)):
        return value.data
    return np.asarray(value, dtype=np.complex128)


class QCoreService:
    """States, channels, measurements and distances on a few qubits."""

    @property
    def atol(self) -> float:
        return settings.atol

    @property
    def probability_floor(self) -> float:
        return settings.probability_floor

    # ------------------------------------------------------------------
    # Composition
    # ------------------------------------------------------------------
    def tensor_product(self, a: QuantumObject, b: QuantumObject) -> QuantumObject:
        """
        Kronecker product of two objects of the same kind.

        Args:
            a: Left factor (most significant qubits)
            b: Right factor

        Returns:
            Object of the same kind on the combined register
        """
        if type(a) is not type(b):
            raise InvalidStateError(
                f"Cannot tensor {type(a).__name__} with {type(b).__name__}"
            )
        product = np.kron(a.data, b.data)
        if isinstance(a, StateVector):
            return StateVector(product)
        if isinstance(a, DensityMatrix):
            return DensityMatrix(product)
        return UnitaryOp(product)

    def kron_all(self, factors: Iterable) -> np.ndarray:
        result = np.ones((1, 1), dtype=np.complex128)
        for factor in factors:
            result = np.kron(result, _matrix(factor))
        return result

    def permute_qubits(self, matrix, order: Sequence[int]) -> np.ndarray:
        """
        Reorder the qubits of an operator.

        Qubit ``k`` of the result is qubit ``order[k]`` of the input.
        """
        data = _matrix(matrix)
        n = num_qubits(data.shape[0])
        if sorted(order) != list(range(n)):
            raise DimensionMismatchError(f"Order {list(order)} is not a permutation of {n} qubits")
        tensor = data.reshape([2] * (2 * n))
        axes = list(order) + [n + k for k in order]
        return tensor.transpose(axes).reshape(data.shape)

    def partial_trace(self, rho: DensityMatrix, keep: Sequence[bool]) -> DensityMatrix:
        """
        Trace out every qubit whose mask entry is False.

        Args:
            rho: Joint state
            keep: One flag per qubit

        Returns:
            Reduced state on the kept qubits, in their original order;
            a 1x1 unit matrix when nothing is kept
        """
        if len(keep) != rho.qubits:
            raise DimensionMismatchError(
                f"Mask of length {len(keep)} for a {rho.qubits}-qubit state"
            )
        kept = [q for q in range(rho.qubits) if keep[q]]
        traced = [q for q in range(rho.qubits) if not keep[q]]
        if not traced:
            return rho
        ordered = self.permute_qubits(rho.data, kept + traced)
        dk, dt = 1 << len(kept), 1 << len(traced)
        reduced = np.trace(ordered.reshape(dk, dt, dk, dt), axis1=1, axis2=3)
        return DensityMatrix(reduced)

    # ------------------------------------------------------------------
    # Gates and channels
    # ------------------------------------------------------------------
    def hadamard_all(self, q: int) -> UnitaryOp:
        """Normalized q-fold tensor power of the Hadamard gate."""
        if q < 1:
            raise InvalidStateError("Hadamard needs at least one qubit")
        return UnitaryOp(hadamard(1 << q) / np.sqrt(1 << q))

    def apply_unitary(self, rho: DensityMatrix, unitary: UnitaryOp) -> DensityMatrix:
        u = unitary.data
        if u.shape[0] != rho.dim:
            raise DimensionMismatchError(f"Unitary of side {u.shape[0]} on state of side {rho.dim}")
        return DensityMatrix(u @ rho.data @ u.conj().T)

    def apply_kraus(self, rho, kraus: Sequence[np.ndarray]) -> np.ndarray:
        """Apply a channel given by Kraus operators; returns the raw output matrix."""
        data = _matrix(rho)
        return sum(k @ data @ k.conj().T for k in (np.asarray(op) for op in kraus))

    def is_trace_preserving(self, kraus: Sequence[np.ndarray]) -> bool:
        ops = [np.asarray(k) for k in kraus]
        total = sum(k.conj().T @ k for k in ops)
        return bool(np.allclose(total, np.eye(total.shape[0]), atol=self.atol, rtol=0.0))

    # ------------------------------------------------------------------
    # Measurement
    # ------------------------------------------------------------------
    def measure(self, rho: DensityMatrix, fam: MeasurementFamily) -> List[MeasurementOutcome]:
        """
        Outcome distribution and post-measurement states.

        Args:
            rho: State being measured
            fam: Measurement family of matching dimension

        Returns:
            One entry per outcome with Tr(M rho M^dagger) and the normalized
            post-state, or None when the probability is below the floor
        """
        if fam.dim != rho.dim:
            raise DimensionMismatchError(f"Family of side {fam.dim} on state of side {rho.dim}")
        results = []
        for outcome, op in zip(fam.outcomes, fam.operators):
            branch = op @ rho.data @ op.conj().T
            probability = float(np.trace(branch).real)
            if probability > self.probability_floor:
                state = DensityMatrix(branch / probability, atol=max(self.atol, 1e-8))
            else:
                state = None
            results.append(MeasurementOutcome(outcome, max(probability, 0.0), state))
        return results

    def computational_family(self, q: int) -> MeasurementFamily:
        dim = 1 << q
        projectors = []
        for i in range(dim):
            p = np.zeros((dim, dim))
            p[i, i] = 1.0
            projectors.append(p)
        return MeasurementFamily(list(range(dim)), projectors)

    def projective_family(self, outcomes: Sequence, projectors: Sequence[np.ndarray]) -> MeasurementFamily:
        return MeasurementFamily(outcomes, projectors)

    def two_outcome_from_observable(self, observable: np.ndarray) -> MeasurementFamily:
        """
        Two-outcome family {N_1, N_-1} with N_1^dagger N_1 - N_-1^dagger N_-1 = F.

        Args:
            observable: Hermitian F with spectrum in [-1, 1]

        Returns:
            Family with outcomes (1, -1) and operators sqrt((I +/- F)/2)
        """
        f = np.asarray(observable, dtype=np.complex128)
        eye = np.eye(f.shape[0])
        plus = self.psd_sqrt((eye + f) / 2)
        minus = self.psd_sqrt((eye - f) / 2)
        return MeasurementFamily((1, -1), [plus, minus], atol=max(self.atol, 1e-9))

    def psd_sqrt(self, matrix: np.ndarray) -> np.ndarray:
        """Square root of a Hermitian PSD matrix via its eigendecomposition."""
        values, vectors = np.linalg.eigh((matrix + matrix.conj().T) / 2)
        values = np.clip(values, 0.0, None)
        return (vectors * np.sqrt(values)) @ vectors.conj().T

    # ------------------------------------------------------------------
    # Distances
    # ------------------------------------------------------------------
    def trace_norm(self, m) -> float:
        """Sum of singular values."""
        data = _matrix(m)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatchError("Trace norm needs a square matrix")
        return float(np.sum(np.linalg.svd(data, compute_uv=False)))

    def trace_distance(self, rho: DensityMatrix, sigma: DensityMatrix) -> float:
        if rho.dim != sigma.dim:
            raise DimensionMismatchError(f"Trace distance of sides {rho.dim} and {sigma.dim}")
        return min(1.0, 0.5 * self.trace_norm(rho.data - sigma.data))

    def operator_norm(self, m) -> float:
        return float(np.linalg.norm(_matrix(m), ord=2))

    def swap_test_prob(self, phi: StateVector, psi: StateVector) -> float:
        """Probability that a swap test between phi and psi accepts."""
        overlap = phi.inner(psi)
        return 0.5 + 0.5 * abs(overlap) ** 2

    def simulate_swap_test_circuit(self, phi: StateVector, psi: StateVector) -> float:
        """
        Run the swap-test circuit on the full register.

        An ancilla is prepared in |0>, Hadamarded, controls a SWAP of the
        two registers and is Hadamarded again; returns P(ancilla = 0).
        """
        if phi.dim != psi.dim:
            raise DimensionMismatchError("Swap test needs registers of equal dimension")
        dim = phi.dim
        swap = np.zeros((dim * dim, dim * dim))
        for i in range(dim):
            for j in range(dim):
                swap[j * dim + i, i * dim + j] = 1.0
        eye = np.eye(dim * dim)
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        cswap = np.kron(p0, eye) + np.kron(p1, swap)
        h = np.kron(self.hadamard_all(1).data, eye)
        state = np.kron(np.array([1.0, 0.0]), np.kron(phi.data, psi.data))
        state = h @ (cswap @ (h @ state))
        return float(np.sum(np.abs(state[: dim * dim]) ** 2))

    # ------------------------------------------------------------------
    # Canonical states and unitary completion
    # ------------------------------------------------------------------
    def epr_state(self, d: int) -> StateVector:
        """(|0>_A|0>_B + |1>_A|1>_B)/sqrt(2) on two d-qubit registers."""
        dim = 1 << d
        data = np.zeros(dim * dim, dtype=np.complex128)
        data[0] = 1.0
        data[1 * dim + 1] = 1.0
        return StateVector(data / np.sqrt(2))

    def complete_unitary(self, assignments: Sequence[Tuple[np.ndarray, int]], dim: int) -> UnitaryOp:
        """
        Unitary W with W v_k = e_{t_k} for orthonormal v_k.

        Columns of W^dagger at the assigned targets are the v_k; the other
        columns come from Gram-Schmidt on e_0, e_1, ... in index order.

        Args:
            assignments: Pairs (source vector, target basis index)
            dim: Side of the unitary

        Returns:
            The completed unitary W
        """
        columns: List[Optional[np.ndarray]] = [None] * dim
        for vector, target in assignments:
            columns[target] = np.asarray(vector, dtype=np.complex128).reshape(dim)
        basis = [c for c in columns if c is not None]
        candidates = iter(np.eye(dim, dtype=np.complex128))
        for slot in range(dim):
            if columns[slot] is not None:
                continue
            for candidate in candidates:
                residual = candidate - sum(np.vdot(b, candidate) * b for b in basis)
                norm = np.linalg.norm(residual)
                if norm > 1e-8:
                    columns[slot] = residual / norm
                    basis.append(columns[slot])
                    break
        w_dagger = np.column_stack(columns)
        return UnitaryOp(w_dagger.conj().T)

    # ------------------------------------------------------------------
    # Random instances
    # ------------------------------------------------------------------
    def random_unitary(self, dim: int, rng: np.random.Generator) -> UnitaryOp:
        if dim == 1:
            return UnitaryOp(np.exp(2j * np.pi * rng.random()) * np.eye(1))
        return UnitaryOp(unitary_group.rvs(dim, random_state=rng))

    def random_density_matrix(self, q: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
        """Ginibre-distributed mixed state."""
        dim = 1 << q
        k = dim if rank is None else rank
        g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
        rho = g @ g.conj().T
        return DensityMatrix(rho / np.trace(rho).real)

    def random_real_density_matrix(self, q: int, rng: np.random.Generator) -> DensityMatrix:
        dim = 1 << q
        g = rng.normal(size=(dim, dim))
        rho = g @ g.T
        return DensityMatrix(rho / np.trace(rho))

    def random_pure_state(self, q: int, rng: np.random.Generator) -> StateVector:
        dim = 1 << q
        return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))

    def random_observable(self, dim: int, rng: np.random.Generator) -> np.ndarray:
        """Hermitian matrix with spectrum drawn uniformly from [-1, 1]."""
        u = self.random_unitary(dim, rng).data
        return (u * rng.uniform(-1.0, 1.0, size=dim)) @ u.conj().T

    def random_two_outcome_family(self, dim: int, rng: np.random.Generator) -> MeasurementFamily:
        """Random non-projective family {W_1 sqrt(E), W_2 sqrt(I - E)}."""
        u = self.random_unitary(dim, rng).data
        effect = (u * rng.uniform(0.0, 1.0, size=dim)) @ u.conj().T
        w1 = self.random_unitary(dim, rng).data
        w2 = self.random_unitary(dim, rng).data
        return MeasurementFamily(
            (1, -1),
            [w1 @ self.psd_sqrt(effect), w2 @ self.psd_sqrt(np.eye(dim) - effect)],
            atol=max(self.atol, 1e-9),
        )


# Global instance
qcore = QCoreService()
