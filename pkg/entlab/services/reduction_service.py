"""Entanglement reduction: simple-state decompositions and entanglement-free compilers."""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from entlab.core.config import settings
from entlab.core.exceptions import BudgetExceededError, InvalidStateError, ProtocolError
from entlab.core.logger import get_logger, log_execution_time
from entlab.core.seeding import make_rng, shot_generator
from entlab.models.protocols import Bits, EntangledSmpProtocol, OneWayEntangledProtocol
from entlab.models.quantum import DensityMatrix, MeasurementFamily, UnitaryOp
from entlab.models.reduction import (
    ComponentKind,
    Decomposition,
    SimpleComponent,
    StrippedOneWay,
    StrippedSmp,
)
from entlab.models.schemas import AuditResult, DecompositionReport
from entlab.services.qcore_service import qcore

logger = get_logger(__name__)

MAX_SHARED_QUBITS = 2
MAX_MESSAGE_QUBITS = 3
WITNESS_TOLERANCE = 1e-10

FLAG = ("pattern", 0)


def split_index(index: int, d: int) -> Tuple[int, int]:
    """Basis index of 2d qubits as (Alice's d-bit half, Bob's d-bit half)."""
    return index >> d, index & ((1 << d) - 1)


def basis_vector(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def pair_state(i: int, j: int, dim: int, phase: bool = False) -> np.ndarray:
    """(1/2)(|i> + w|j>)(<i| + w*<j|), w = i when ``phase``; |i><i| when i = j."""
    if i == j:
        return np.outer(basis_vector(i, dim), basis_vector(i, dim))
    v = basis_vector(i, dim) + (1j if phase else 1.0) * basis_vector(j, dim)
    return np.outer(v, v.conj()) / 2


def quantize(value: float, bits: int) -> float:
    """Round to ``bits`` fractional bits, ties toward zero, clamped to [-1, 1]."""
    scale = float(1 << bits)
    rounded = math.copysign(math.ceil(abs(value) * scale - 0.5) / scale, value)
    return max(-1.0, min(1.0, rounded))


class ReductionService:
    """Decompositions of shared states and the two entanglement-removal compilers."""

    @property
    def atol(self) -> float:
        return settings.atol

    # ------------------------------------------------------------------
    # Decomposition
    # ------------------------------------------------------------------
    def canonical_state(self, kind: ComponentKind, d: int) -> np.ndarray:
        if kind == ComponentKind.ZERO:
            return DensityMatrix.basis(0, 2 * d).data
        return qcore.epr_state(d).to_density_matrix().data

    def classify_pair(self, i: int, j: int, d: int, phase: bool = False) -> Tuple[ComponentKind, UnitaryOp, UnitaryOp]:
        """
        Kind of the pair state on basis indices i = (a, b), j = (p, q) and its witnesses.

        a = p or b = q gives a product state and kind ZERO; otherwise the
        state is maximally entangled on a 2x2 subspace and kind EPR. The
        returned witnesses map the canonical state onto the pair state.
        """
        dim = 1 << d
        if not (0 <= i < dim * dim and 0 <= j < dim * dim):
            raise InvalidStateError(f"Pair ({i}, {j}) outside [0, {dim * dim})")
        a, b = split_index(i, d)
        p, q = split_index(j, d)
        w = 1j if phase and i != j else 1.0
        e = lambda k: basis_vector(k, dim)  # noqa: E731
        if a == p or b == q:
            if a == p and b == q:
                to_a, to_b = [(e(a), 0)], [(e(b), 0)]
            elif a == p:
                to_a, to_b = [(e(a), 0)], [((e(b) + w * e(q)) / math.sqrt(2), 0)]
            else:
                to_a, to_b = [((e(a) + w * e(p)) / math.sqrt(2), 0)], [(e(b), 0)]
            kind = ComponentKind.ZERO
        else:
            to_a = [(e(a), 0), (e(p), 1)]
            to_b = [(e(b), 0), (w * e(q), 1)]
            kind = ComponentKind.EPR
        u_a = qcore.complete_unitary(to_a, dim)
        v_b = qcore.complete_unitary(to_b, dim)
        return kind, u_a.dagger(), v_b.dagger()

    def decompose(self, rho: DensityMatrix, allow_complex: bool = False) -> Decomposition:
        """
        Write rho as sum_i alpha_i rho_i over all 2^{4d} ordered basis pairs.

        Off-diagonal pairs get alpha = Re rho_ij on the pair state and, on
        the complex path, -Im rho_ij on the phase pair state. Diagonal
        pairs get rho_ii - sum_{j != i} Re rho_ij.

        Args:
            rho: State on 2d qubits, d in {1, 2}
            allow_complex: Accept complex entries via phase components

        Returns:
            Decomposition with one component per pair (zero coefficients kept)

        Raises:
            InvalidStateError: Odd qubit count, d > 2, or complex entries on the real path
        """
        if rho.qubits % 2 or not 1 <= rho.qubits // 2 <= MAX_SHARED_QUBITS:
            raise InvalidStateError(f"Decomposition needs 2d qubits with d <= {MAX_SHARED_QUBITS}")
        d = rho.qubits // 2
        complex_path = not rho.is_real()
        if complex_path and not allow_complex:
            raise InvalidStateError("State has complex entries; pass allow_complex=True")
        data = rho.data
        dim = rho.dim
        components: List[SimpleComponent] = []
        for i in range(dim):
            for j in range(dim):
                if i == j:
                    coefficient = float(data[i, i].real - sum(data[i, k].real for k in range(dim) if k != i))
                else:
                    coefficient = float(data[i, j].real)
                kind, w_a, w_b = self.classify_pair(i, j, d)
                components.append(SimpleComponent(coefficient, kind, w_a, w_b, (i, j)))
        if complex_path:
            for i in range(dim):
                for j in range(dim):
                    if i == j:
                        continue
                    kind, w_a, w_b = self.classify_pair(i, j, d, phase=True)
                    components.append(SimpleComponent(float(-data[i, j].imag), kind, w_a, w_b, (i, j), phase=True))
        return Decomposition(d, tuple(components), complex_path)

    def component_state(self, component: SimpleComponent, d: int) -> DensityMatrix:
        i, j = component.source_pair
        return DensityMatrix(pair_state(i, j, 1 << (2 * d), component.phase))

    def witness_state(self, component: SimpleComponent, d: int) -> np.ndarray:
        """(W_A (x) W_B) canonical (W_A (x) W_B)^dagger."""
        local = np.kron(component.witness_a.data, component.witness_b.data)
        return local @ self.canonical_state(component.kind, d) @ local.conj().T

    def reconstruct(self, decomposition: Decomposition) -> np.ndarray:
        dim = 1 << (2 * decomposition.d)
        total = np.zeros((dim, dim), dtype=np.complex128)
        for c in decomposition.components:
            total += c.coefficient * pair_state(*c.source_pair, dim, c.phase)
        return total

    def verify_decomposition(self, rho: DensityMatrix, decomposition: Decomposition) -> DecompositionReport:
        """
        Reconstruction residual, coefficient bound and witness residuals.

        The bound is 2^d on the real path and 2^{d+1} on the complex path.
        """
        d = decomposition.d
        reconstruction = float(np.max(np.abs(self.reconstruct(decomposition) - rho.data)))
        witness = [
            float(np.max(np.abs(self.witness_state(c, d) - pair_state(*c.source_pair, 1 << (2 * d), c.phase))))
            for c in decomposition.components
        ]
        bound = float(2 ** (d + 1 if decomposition.complex_path else d))
        largest = float(np.max(np.abs(decomposition.coefficients)))
        worst = max(witness) if witness else 0.0
        return DecompositionReport(
            d=d,
            components=len(decomposition.components),
            reconstruction_residual=reconstruction,
            max_abs_coefficient=largest,
            coefficient_bound=bound,
            max_witness_residual=worst,
            witness_residuals=witness,
            complex_path=decomposition.complex_path,
            valid=reconstruction <= WITNESS_TOLERANCE and largest <= bound + self.atol and worst <= WITNESS_TOLERANCE,
        )

    # ------------------------------------------------------------------
    # SMP with shared entanglement
    # ------------------------------------------------------------------
    def _check_smp(self, p: EntangledSmpProtocol) -> None:
        if p.d > MAX_SHARED_QUBITS or max(p.c_a, p.c_b) > MAX_MESSAGE_QUBITS:
            raise BudgetExceededError(
                f"Stripping limited to d <= {MAX_SHARED_QUBITS} and messages of <= {MAX_MESSAGE_QUBITS} qubits"
            )

    def strip_entanglement_qsmp(self, p: EntangledSmpProtocol) -> StrippedSmp:
        """
        Compile an entangled SMP protocol into one without shared state.

        Alice sends U_x applied to her half of rho together with rho's other
        half. Bob sends the maximally correlated pair 2^{-2d} sum |b><q| (x) |b><q|
        with V_y on its second half, heralded by a qubit that keeps his
        message normalized. The referee's instrument succeeds only on the
        herald, on equal middle registers, and on the all-zero Hadamard
        pattern, which happens with probability 2^{-4d}.
        """
        self._check_smp(p)
        d = p.d
        mid = 1 << (2 * d)
        h = qcore.hadamard_all(2 * d).data
        equal = np.zeros((mid, mid))
        for v in range(1 << d):
            equal[(v << d) | v, (v << d) | v] = 1.0
        herald_off = np.diag([1.0, 0.0])
        herald_on = np.diag([0.0, 1.0])
        left = np.eye(1 << p.c_a)
        right = np.eye(1 << p.c_b)

        def embed(middle: np.ndarray, herald: np.ndarray) -> np.ndarray:
            return np.kron(np.kron(np.kron(left, middle), right), herald)

        outcomes = [("no-herald", 0), ("unequal", 0)]
        operators = [embed(np.eye(mid), herald_off), embed(np.eye(mid) - equal, herald_on)]
        for s in range(mid):
            outcomes.append(("pattern", s))
            operators.append(embed(np.outer(basis_vector(s, mid), basis_vector(s, mid)) @ h @ equal, herald_on))
        instrument = MeasurementFamily(outcomes, operators, atol=max(self.atol, 1e-9))
        return StrippedSmp(p, instrument, FLAG)

    def alice_message(self, s: StrippedSmp, x: Bits) -> DensityMatrix:
        p = s.original
        eye = np.eye(1 << p.d)
        return DensityMatrix(qcore.apply_kraus(p.shared, [np.kron(k, eye) for k in p.alice_channel(tuple(x))]))

    def bob_message(self, s: StrippedSmp, y: Bits) -> DensityMatrix:
        p = s.original
        d = p.d
        dim = 1 << d
        correlated = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
        for b in range(dim):
            for q in range(dim):
                correlated[b * dim + b, q * dim + q] = 1.0
        correlated /= dim * dim
        zero = np.zeros((dim * dim, dim * dim))
        zero[0, 0] = 1.0
        raw = np.kron(correlated, np.diag([0.0, 1.0])) + (1.0 - 1.0 / dim) * np.kron(zero, np.diag([1.0, 0.0]))
        kraus = [np.kron(np.kron(np.eye(dim), k), np.eye(2)) for k in p.bob_channel(tuple(y))]
        return DensityMatrix(qcore.apply_kraus(raw, kraus))

    def referee_input(self, s: StrippedSmp, x: Bits, y: Bits) -> DensityMatrix:
        return DensityMatrix(np.kron(self.alice_message(s, x).data, self.bob_message(s, y).data))

    def flag_probability(self, s: StrippedSmp, x: Bits, y: Bits) -> float:
        op = s.instrument.operator(s.flag_outcome)
        state = self.referee_input(s, x, y).data
        return float(np.real(np.trace(op @ state @ op.conj().T)))

    def conditional_state(self, s: StrippedSmp, x: Bits, y: Bits) -> DensityMatrix:
        """Referee's state on the two output registers given the flag."""
        flagged = next(o for o in qcore.measure(self.referee_input(s, x, y), s.instrument) if o.outcome == s.flag_outcome)
        if flagged.state is None:
            raise ProtocolError("Flag outcome has zero probability")
        return qcore.partial_trace(flagged.state, s.keep_mask())

    def stripped_smp_output(self, s: StrippedSmp, x: Bits, y: Bits) -> float:
        """Expected output; failures answer a fair coin and contribute 0."""
        effect = s.original.referee_effect
        return self.flag_probability(s, x, y) * float(np.real(np.trace(effect @ self.conditional_state(s, x, y).data)))

    def sample_stripped_smp(self, s: StrippedSmp, x: Bits, y: Bits, shots: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Simulated runs of the stripped protocol.

        Returns:
            (outputs in {-1, 1}, flag indicators) per shot
        """
        p_flag = self.flag_probability(s, x, y)
        bias = float(np.real(np.trace(s.original.referee_effect @ self.conditional_state(s, x, y).data)))
        u = shot_generator(seed).random((shots, 2))
        flags = u[:, 0] < p_flag
        p_plus = np.where(flags, (1.0 + bias) / 2.0, 0.5)
        outputs = np.where(u[:, 1] < p_plus, 1, -1)
        return outputs, flags

    # ------------------------------------------------------------------
    # One-way with shared entanglement
    # ------------------------------------------------------------------
    def branches(self, p: OneWayEntangledProtocol, x: Bits) -> List[Tuple[object, float, Optional[DensityMatrix]]]:
        """Alice's outcome z, its probability and the normalized joint post-state."""
        family = p.alice_povm(tuple(x)).lift(right_dim=1 << p.d)
        return [(o.outcome, o.probability, o.state) for o in qcore.measure(p.shared, family)]

    def bob_operator(self, p: OneWayEntangledProtocol, y: Bits, z) -> np.ndarray:
        """F' = I (x) F(y, z) on the joint register."""
        return np.kron(np.eye(1 << p.d), p.bob_effect(tuple(y), z))

    def strip_entanglement_oneway(self, p: OneWayEntangledProtocol, allow_complex: bool = False) -> StrippedOneWay:
        """
        Compile a one-way protocol with shared state into one without.

        Alice additionally sends a uniform position (i, j) and the entry
        sigma(x, z)[i, j] to 5d bits; Bob answers a ±1 coin with mean
        Re(F'[i, j] conj(entry)), whose average over positions is
        2^{-4d} Tr(F' sigma).
        """
        if p.d > MAX_SHARED_QUBITS:
            raise BudgetExceededError(f"Stripping limited to d <= {MAX_SHARED_QUBITS}")
        return StrippedOneWay(p, complex_path=allow_complex)

    def encode_entry(self, s: StrippedOneWay, value: complex) -> complex:
        bits = s.precision_bits
        if s.complex_path:
            return complex(quantize(value.real, bits), quantize(value.imag, bits))
        if abs(value.imag) > self.atol:
            raise InvalidStateError("Complex post-measurement entry on the real path")
        return complex(quantize(value.real, bits), 0.0)

    def coin_mean(self, bob_entry: complex, sent: complex) -> float:
        return float(np.clip((bob_entry * np.conj(sent)).real, -1.0, 1.0))

    def stripped_oneway_output(self, s: StrippedOneWay, x: Bits, y: Bits, quantized: bool = True) -> float:
        """Exact expected output, averaging over z and all entry positions."""
        p = s.original
        total = 0.0
        for z, probability, state in self.branches(p, x):
            if state is None:
                continue
            f_prime = self.bob_operator(p, y, z)
            sigma = state.data
            if quantized:
                sigma = np.vectorize(lambda v: self.encode_entry(s, complex(v)), otypes=[np.complex128])(sigma)
            total += probability * float(np.mean(np.clip(np.real(f_prime * np.conj(sigma)), -1.0, 1.0)))
        return total

    def sample_stripped_oneway(self, s: StrippedOneWay, x: Bits, y: Bits, shots: int, seed=None) -> np.ndarray:
        """Simulated outputs of the stripped protocol."""
        p = s.original
        rng = make_rng(seed)
        branches = [b for b in self.branches(p, x) if b[2] is not None]
        weights = np.array([b[1] for b in branches])
        picks = rng.choice(len(branches), size=shots, p=weights / weights.sum())
        side = 1 << (2 * p.d)
        rows = rng.integers(0, side, size=shots)
        cols = rng.integers(0, side, size=shots)
        coins = rng.random(shots)
        means = np.empty(shots)
        cache = {}
        for t in range(shots):
            k = int(picks[t])
            if k not in cache:
                z, _, state = branches[k]
                cache[k] = (self.bob_operator(p, y, z), state.data)
            f_prime, sigma = cache[k]
            i, j = rows[t], cols[t]
            means[t] = self.coin_mean(f_prime[i, j], self.encode_entry(s, complex(sigma[i, j])))
        return np.where(coins < (1.0 + means) / 2.0, 1, -1)

    def expectation_identity_audit(self, f_prime: np.ndarray, sigma: np.ndarray) -> AuditResult:
        """mean_{i,j} Re(F'[i,j] conj(sigma[i,j])) against 2^{-4d} Tr(F' sigma)."""
        side = sigma.shape[0]
        lhs = float(np.mean(np.real(f_prime * np.conj(sigma))))
        rhs = float(np.real(np.trace(f_prime @ sigma))) / (side * side)
        return AuditResult(
            check="entry_expectation_identity",
            lhs=lhs,
            rhs=rhs,
            holds=abs(lhs - rhs) <= 1e-12,
            details={"side": side},
        )

    def quantization_audit(self, s: StrippedOneWay, x: Bits, y: Bits) -> AuditResult:
        """|quantized - exact| expected output against 2^{-5d}."""
        exact = self.stripped_oneway_output(s, x, y, quantized=False)
        rounded = self.stripped_oneway_output(s, x, y, quantized=True)
        bound = 2.0 ** (-s.precision_bits)
        return AuditResult(
            check="quantization_error",
            lhs=abs(rounded - exact),
            rhs=bound,
            holds=abs(rounded - exact) <= bound,
            details={"d": s.original.d},
        )

    # ------------------------------------------------------------------
    # Test families
    # ------------------------------------------------------------------
    def flip_channel(self, bit: int) -> List[np.ndarray]:
        """X when the input is -1, identity otherwise."""
        return [np.array([[0.0, 1.0], [1.0, 0.0]]) if bit == -1 else np.eye(2)]

    def parity_smp(self) -> EntangledSmpProtocol:
        """
        One-bit inputs, shared EPR pair, each side flips on -1 and the
        referee measures (1/3) Z (x) Z; expected output x y / 3.
        """
        z = np.diag([1.0, -1.0])
        return EntangledSmpProtocol(
            n=1,
            d=1,
            c_a=1,
            c_b=1,
            shared=qcore.epr_state(1).to_density_matrix(),
            alice_channel=lambda x: self.flip_channel(x[0]),
            bob_channel=lambda y: self.flip_channel(y[0]),
            referee_effect=np.kron(z, z) / 3.0,
        )

    def parity_oneway(self) -> OneWayEntangledProtocol:
        """
        Shared EPR pair, Alice measures Z with outcome s and sends z = x s,
        Bob measures (1/3) z y Z; expected output x y / 3.
        """
        z_obs = np.diag([1.0, -1.0])
        zero, one = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])

        def alice(x: Bits) -> MeasurementFamily:
            return MeasurementFamily((x[0], -x[0]), [zero, one])

        def bob(y: Bits, z) -> np.ndarray:
            return z * y[0] * z_obs / 3.0

        return OneWayEntangledProtocol(n=1, d=1, c=1, shared=qcore.epr_state(1).to_density_matrix(), alice_povm=alice, bob_effect=bob)

    def random_entangled_smp(self, d: int, c: int, rng: np.random.Generator) -> EntangledSmpProtocol:
        """One-bit inputs, random shared state, random local unitaries and referee observable."""
        if c != d:
            raise InvalidStateError("Random unitary channels need c = d")
        alice = {(s,): [qcore.random_unitary(1 << d, rng).data] for s in (1, -1)}
        bob = {(s,): [qcore.random_unitary(1 << d, rng).data] for s in (1, -1)}
        return EntangledSmpProtocol(
            n=1,
            d=d,
            c_a=c,
            c_b=c,
            shared=qcore.random_density_matrix(2 * d, rng),
            alice_channel=alice.__getitem__,
            bob_channel=bob.__getitem__,
            referee_effect=qcore.random_observable(1 << (2 * c), rng),
        )

    @log_execution_time(logger)
    def decomposition_linearity(self, evaluate, rho: DensityMatrix, decomposition: Decomposition) -> AuditResult:
        """evaluate(rho) against sum_i alpha_i evaluate(rho_i)."""
        lhs = float(evaluate(rho))
        rhs = float(sum(c.coefficient * evaluate(self.component_state(c, decomposition.d)) for c in decomposition.components if c.coefficient))
        return AuditResult(
            check="decomposition_linearity",
            lhs=lhs,
            rhs=rhs,
            holds=abs(lhs - rhs) <= settings.completeness_atol,
        )


# Global instance
reduction_service = ReductionService()
