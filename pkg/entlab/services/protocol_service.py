"""Exact evaluation of communication protocols."""
import math
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from entlab.core.config import settings
from entlab.core.exceptions import BudgetExceededError, ProtocolError
from entlab.core.logger import get_logger, log_execution_time
from entlab.core.seeding import shot_generator
from entlab.models.protocols import (
    Bits,
    CompiledTwoWay,
    EntangledSmpProtocol,
    FunctionProtocol,
    OneWayEntangledProtocol,
    Schedule,
    SmpQuantumProtocol,
    TabulatedSchedule,
    Transcript,
    TranscriptHistogram,
    TwoWayEntangledProtocol,
    XorFiberTable,
    all_inputs,
    all_transcripts,
    resolve_family,
    transcript_from_mask,
)
from entlab.models.quantum import DensityMatrix, MeasurementFamily, UnitaryOp
from entlab.models.spectra import BooleanFunctionTable, MatrixValuedFunction, popcounts
from entlab.services.fourier_service import fourier_service
from entlab.services.qcore_service import qcore

logger = get_logger(__name__)

AnyProtocol = Union[
    SmpQuantumProtocol,
    TwoWayEntangledProtocol,
    OneWayEntangledProtocol,
    EntangledSmpProtocol,
    FunctionProtocol,
]

MAX_FIBER_INPUTS = 12
MAX_TWO_WAY_FIBER_INPUTS = 8


class ProtocolService:
    """Evaluation, compilation and Fourier-growth reporting for protocols."""

    @property
    def completeness_atol(self) -> float:
        return settings.completeness_atol

    @property
    def probability_floor(self) -> float:
        return settings.probability_floor

    # ------------------------------------------------------------------
    # SMP
    # ------------------------------------------------------------------
    def eval_smp(self, p: SmpQuantumProtocol, x: Bits, y: Bits) -> float:
        """Expected output Tr(E (rho(x) (x) sigma(y)))."""
        joint = np.kron(p.prep_a(tuple(x)).data, p.prep_b(tuple(y)).data)
        return float(np.real(np.trace(p.referee_effect @ joint)))

    def eval_entangled_smp(self, p: EntangledSmpProtocol, x: Bits, y: Bits) -> float:
        """Expected output Tr(E (U_x (x) V_y)(rho))."""
        return float(np.real(np.trace(p.referee_effect @ self.entangled_referee_state(p, x, y))))

    def entangled_referee_state(self, p: EntangledSmpProtocol, x: Bits, y: Bits) -> np.ndarray:
        """Joint state of the two messages when the players share rho."""
        kraus = [np.kron(a, b) for a in p.alice_channel(tuple(x)) for b in p.bob_channel(tuple(y))]
        return qcore.apply_kraus(p.shared, kraus)

    # ------------------------------------------------------------------
    # Two-way
    # ------------------------------------------------------------------
    def initial_state(self, p: TwoWayEntangledProtocol) -> np.ndarray:
        """
        rho' = shared (x) |0^m><0^m|_A (x) |0^m><0^m|_B.

        Qubits are ordered (A shared, A memory, B shared, B memory) so that
        E_z (x) F_z acts on it directly.
        """
        d, m = p.d, p.m
        memory = np.zeros((1 << m, 1 << m))
        memory[0, 0] = 1.0
        raw = np.kron(np.kron(p.shared.data, memory), memory)
        order = (
            list(range(d))
            + list(range(2 * d, 2 * d + m))
            + list(range(d, 2 * d))
            + list(range(2 * d + m, 2 * d + 2 * m))
        )
        return qcore.permute_qubits(raw, order)

    def _round_product(self, schedule: Schedule, rounds: int, inputs: Bits, z: Transcript, bob: bool, dim: int) -> np.ndarray:
        product = np.eye(dim, dtype=np.complex128)
        for t in range(rounds):
            position = 2 * t + (1 if bob else 0)
            family = resolve_family(schedule, t, inputs, z[:position], dim)
            product = family.operator(z[position]) @ product
        return product

    def compile_two_way(self, p: TwoWayEntangledProtocol, x: Bits, y: Bits) -> CompiledTwoWay:
        """
        Per-transcript effects E_z(x) = M_z^dagger M_z and F_z(y) = N_z^dagger N_z.

        M_z is the product of Alice's round operators selected by z, latest
        round leftmost; N_z likewise for Bob.

        Args:
            p: Two-way protocol
            x: Alice's input
            y: Bob's input

        Returns:
            Compiled operators with their completeness residual

        Raises:
            ProtocolError: sum_z E_z (x) F_z deviates from I
        """
        x, y = tuple(x), tuple(y)
        dim = p.local_dim
        transcripts = all_transcripts(p.c)
        alice: Dict[Transcript, np.ndarray] = {}
        bob: Dict[Transcript, np.ndarray] = {}
        for z in transcripts:
            m_z = self._round_product(p.alice, p.rounds, x, z, False, dim)
            n_z = self._round_product(p.bob, p.rounds, y, z, True, dim)
            alice[z] = m_z.conj().T @ m_z
            bob[z] = n_z.conj().T @ n_z
        total = sum(np.kron(alice[z], bob[z]) for z in transcripts)
        residual = qcore.operator_norm(total - np.eye(dim * dim))
        if residual > self.completeness_atol:
            raise ProtocolError(f"Compiled effects are incomplete (residual {residual:.3e})")
        return CompiledTwoWay(
            x=x,
            y=y,
            transcripts=transcripts,
            alice=alice,
            bob=bob,
            signs={z: p.sign(z) for z in transcripts},
            completeness_residual=residual,
        )

    def transcript_distribution(self, p: TwoWayEntangledProtocol, x: Bits, y: Bits) -> Dict[Transcript, float]:
        """Exact P(z) = Tr((E_z (x) F_z) rho') for every transcript."""
        compiled = self.compile_two_way(p, x, y)
        rho = self.initial_state(p)
        return {
            z: float(np.real(np.trace(np.kron(e, f) @ rho)))
            for z, e, f, _ in compiled.terms()
        }

    def eval_two_way(self, p: TwoWayEntangledProtocol, x: Bits, y: Bits) -> float:
        """Expected output sum_z Tr((E_z (x) F_z) rho') (-1)^{[z in A]}."""
        distribution = self.transcript_distribution(p, x, y)
        return float(sum(p.sign(z) * prob for z, prob in distribution.items()))

    def sequential_tree(self, p: TwoWayEntangledProtocol, x: Bits, y: Bits) -> Dict[Transcript, float]:
        """
        Probability of every transcript prefix by sequential collapse.

        Rounds are applied in order on the joint state: Alice measures with
        M (x) I, then Bob with I (x) N, each conditioned on the prefix so far.
        This path never forms the products used by compile_two_way.
        """
        x, y = tuple(x), tuple(y)
        dim = p.local_dim
        eye = np.eye(dim)
        probabilities: Dict[Transcript, float] = {(): 1.0}
        frontier = [((), self.initial_state(p))]
        for position in range(p.c):
            t, speaker = divmod(position, 2)
            schedule, inputs = (p.bob, y) if speaker else (p.alice, x)
            next_frontier = []
            for prefix, state in frontier:
                if state is None or probabilities[prefix] <= self.probability_floor:
                    # Dead prefixes still fill their subtree with zeros.
                    for outcome in (1, -1):
                        probabilities[prefix + (outcome,)] = 0.0
                        next_frontier.append((prefix + (outcome,), None))
                    continue
                family = resolve_family(schedule, t, inputs, prefix, dim)
                for outcome in (1, -1):
                    child = prefix + (outcome,)
                    op = family.operator(outcome)
                    lifted = np.kron(eye, op) if speaker else np.kron(op, eye)
                    branch = lifted @ state @ lifted.conj().T
                    probabilities[child] = max(float(np.real(np.trace(branch))), 0.0)
                    next_frontier.append((child, branch))
            frontier = next_frontier
        return probabilities

    @log_execution_time(logger)
    def monte_carlo_transcript(self, p: TwoWayEntangledProtocol, x: Bits, y: Bits, seed: int, shots: int) -> TranscriptHistogram:
        """
        Sample transcripts shot by shot from the sequential collapse.

        Args:
            p: Two-way protocol
            x: Alice's input
            y: Bob's input
            seed: Key of the counter-based shot stream
            shots: Number of simulated runs

        Returns:
            Histogram of sampled transcripts
        """
        if shots < 1:
            raise ProtocolError("Monte-Carlo needs at least one shot")
        tree = self.sequential_tree(p, x, y)
        uniforms = shot_generator(seed).random((shots, p.c))
        codes = np.zeros(shots, dtype=np.int64)
        for position in range(p.c):
            conditional = np.zeros(1 << position)
            for mask in range(1 << position):
                prefix = transcript_from_mask(mask, position)
                parent = tree[prefix]
                if parent > 0:
                    conditional[mask] = min(max(tree[prefix + (-1,)] / parent, 0.0), 1.0)
            bits = (uniforms[:, position] < conditional[codes]).astype(np.int64)
            codes = (codes << 1) | bits
        counts = np.bincount(codes, minlength=1 << p.c)
        return TranscriptHistogram(
            shots=shots,
            counts={transcript_from_mask(i, p.c): int(count) for i, count in enumerate(counts) if count},
        )

    def equivalent_protocol(self, p: TwoWayEntangledProtocol, u_a: UnitaryOp, v_b: UnitaryOp) -> TwoWayEntangledProtocol:
        """
        Conjugate the shared state by U_A (x) V_B and undo it in round 1.

        Every first-round operator M becomes M (U_A^-1 (x) I_memory), and
        likewise for Bob, so transcript distributions are unchanged.
        """
        memory_eye = np.eye(1 << p.m)
        undo_a = np.kron(u_a.dagger().data, memory_eye)
        undo_b = np.kron(v_b.dagger().data, memory_eye)
        local = np.kron(u_a.data, v_b.data)
        shared = DensityMatrix(local @ p.shared.data @ local.conj().T)

        def prepend(schedule: Schedule, undo: np.ndarray) -> Schedule:
            def wrapped(round_index: int, inputs: Bits, prefix: Transcript) -> MeasurementFamily:
                family = schedule(round_index, inputs, prefix)
                if round_index != 0:
                    return family
                return MeasurementFamily(family.outcomes, [op @ undo for op in family.operators])
            return wrapped

        return TwoWayEntangledProtocol(
            p.n, p.d, p.m, shared, p.rounds, prepend(p.alice, undo_a), prepend(p.bob, undo_b), p.accept
        )

    # ------------------------------------------------------------------
    # One-way
    # ------------------------------------------------------------------
    def eval_one_way(self, p: OneWayEntangledProtocol, x: Bits, y: Bits) -> float:
        """Expected output sum_z Tr((I (x) F(y, z)) (M_z (x) I) rho (M_z (x) I)^dagger)."""
        family = p.alice_povm(tuple(x))
        dim = 1 << p.d
        eye = np.eye(dim)
        total = 0.0
        for z, op in zip(family.outcomes, family.operators):
            lifted = np.kron(op, eye)
            branch = lifted @ p.shared.data @ lifted.conj().T
            effect = np.kron(eye, p.bob_effect(tuple(y), z))
            total += float(np.real(np.trace(effect @ branch)))
        return total

    # ------------------------------------------------------------------
    # Any protocol
    # ------------------------------------------------------------------
    def expected_output(self, p: AnyProtocol, x: Bits, y: Bits) -> float:
        if isinstance(p, SmpQuantumProtocol):
            return self.eval_smp(p, x, y)
        if isinstance(p, TwoWayEntangledProtocol):
            return self.eval_two_way(p, x, y)
        if isinstance(p, OneWayEntangledProtocol):
            return self.eval_one_way(p, x, y)
        if isinstance(p, EntangledSmpProtocol):
            return self.eval_entangled_smp(p, x, y)
        if isinstance(p, FunctionProtocol):
            return float(p.output(tuple(x), tuple(y)))
        raise ProtocolError(f"Unsupported protocol type {type(p).__name__}")

    def output_table(self, p: AnyProtocol) -> np.ndarray:
        """C[x, y] for every pair of input bitmasks."""
        inputs = all_inputs(p.n)
        if isinstance(p, SmpQuantumProtocol):
            side = 1 << p.c
            rho = np.array([p.prep_a(x).data for x in inputs])
            sigma = np.array([p.prep_b(y).data for y in inputs])
            effect = p.referee_effect.reshape(side, side, side, side)
            # Tr(E (rho (x) sigma)) = sum E[a,b,c,d] rho[c,a] sigma[d,b]
            return np.real(np.einsum("abcd,xca,ydb->xy", effect, rho, sigma, optimize=True))
        return np.array([[self.expected_output(p, x, y) for y in inputs] for x in inputs])

    @log_execution_time(logger)
    def xor_fiber(self, p: AnyProtocol) -> XorFiberTable:
        """
        H(z) = E_x[C(x, x*z)] for every z.

        Args:
            p: Protocol with equal-length inputs

        Returns:
            XOR-fiber table indexed by bitmask of z
        """
        limit = MAX_TWO_WAY_FIBER_INPUTS if isinstance(p, TwoWayEntangledProtocol) else MAX_FIBER_INPUTS
        if p.n > limit:
            raise BudgetExceededError(f"XOR-fiber of this protocol type limited to n <= {limit}")
        table = self.output_table(p)
        size = 1 << p.n
        xs = np.arange(size)
        values = np.array([table[xs, xs ^ z].mean() for z in range(size)])
        return XorFiberTable(p.n, values)

    def fiber_spectrum(self, fiber: XorFiberTable):
        return fourier_service.fourier(BooleanFunctionTable(fiber.n, fiber.values))

    def _smp_trace_norms(self, p: SmpQuantumProtocol) -> tuple:
        inputs = all_inputs(p.n)
        spectrum_a = fourier_service.matrix_fourier(MatrixValuedFunction(p.n, [p.prep_a(x) for x in inputs]))
        spectrum_b = fourier_service.matrix_fourier(MatrixValuedFunction(p.n, [p.prep_b(y) for y in inputs]))
        return (
            fourier_service.level_trace_norm_sums(spectrum_a),
            fourier_service.level_trace_norm_sums(spectrum_b),
        )

    @log_execution_time(logger)
    def fourier_growth_report(self, p: AnyProtocol, ell_max: int) -> pd.DataFrame:
        """
        Measured level masses of the XOR-fiber next to the proof quantities.

        For SMP protocols two explicit bounds are computed per level:
        2 sum Tr|rho_hat_S| Tr|sigma_hat_S| and its Cauchy-Schwarz relaxation
        2 sqrt(sum Tr|rho_hat_S|^2) sqrt(sum Tr|sigma_hat_S|^2). For other
        protocols only the reference growth c^ell 2^{5d} is reported.

        Args:
            p: Protocol
            ell_max: Highest level to report

        Returns:
            One row per level
        """
        spectrum = self.fiber_spectrum(self.xor_fiber(p))
        levels = popcounts(p.n)
        norms = self._smp_trace_norms(p) if isinstance(p, SmpQuantumProtocol) else None
        d = getattr(p, "d", 0)
        c = getattr(p, "c", 0)
        rows = []
        for ell in range(min(ell_max, p.n) + 1):
            mass = fourier_service.level_mass(spectrum, ell)
            row = {"level": ell, "l1_mass_xor_fiber": mass}
            if norms is not None:
                at_level = levels == ell
                t_a, t_b = norms[0][at_level], norms[1][at_level]
                chain = 2.0 * float(np.sum(t_a * t_b))
                cauchy = 2.0 * math.sqrt(float(np.sum(t_a**2))) * math.sqrt(float(np.sum(t_b**2)))
                row.update(
                    {
                        "chain_bound_trace_norm_products": chain,
                        "cauchy_schwarz_bound": cauchy,
                        "within_chain": mass <= chain + self.completeness_atol,
                        "chain_within_cauchy_schwarz": chain <= cauchy + self.completeness_atol,
                    }
                )
            else:
                row["reference_growth_c_pow_l_times_2_pow_5d"] = float(c**ell * 2 ** (5 * d))
            rows.append(row)
        return pd.DataFrame(rows)

    # ------------------------------------------------------------------
    # Generators
    # ------------------------------------------------------------------
    def random_smp(self, n: int, c: int, rng: np.random.Generator) -> SmpQuantumProtocol:
        """SMP protocol with random mixed messages and a random referee family."""
        inputs = all_inputs(n)
        alice = {x: qcore.random_density_matrix(c, rng) for x in inputs}
        bob = {y: qcore.random_density_matrix(c, rng) for y in inputs}
        family = qcore.random_two_outcome_family(1 << (2 * c), rng)
        return SmpQuantumProtocol.from_family(n, c, alice.__getitem__, bob.__getitem__, family)

    def random_schedule(self, n: int, d: int, m: int, rounds: int, rng: np.random.Generator, bob: bool) -> TabulatedSchedule:
        table = {}
        dim = 1 << (d + m)
        for t in range(rounds):
            for x in all_inputs(n):
                for prefix in all_transcripts(2 * t + (1 if bob else 0)):
                    table[(t, x, prefix)] = qcore.random_two_outcome_family(dim, rng)
        return TabulatedSchedule(table)

    def random_two_way(
        self,
        n: int,
        d: int,
        m: int,
        rounds: int,
        rng: np.random.Generator,
        shared: Optional[DensityMatrix] = None,
        accept: Optional[Sequence[Transcript]] = None,
    ) -> TwoWayEntangledProtocol:
        """Two-way protocol with random round families on every input and prefix."""
        if shared is None:
            shared = qcore.random_density_matrix(2 * d, rng)
        alice = self.random_schedule(n, d, m, rounds, rng, bob=False)
        bob = self.random_schedule(n, d, m, rounds, rng, bob=True)
        if accept is None:
            accept = [z for z in all_transcripts(2 * rounds) if rng.random() < 0.5]
        return TwoWayEntangledProtocol(n, d, m, shared, rounds, alice, bob, frozenset(accept))

    def random_one_way(self, n: int, d: int, rng: np.random.Generator) -> OneWayEntangledProtocol:
        """One-bit messages from random two-outcome families and random Bob observables on a random mixed state."""
        inputs = all_inputs(n)
        dim = 1 << d
        alice = {x: qcore.random_two_outcome_family(dim, rng) for x in inputs}
        bob = {(y, z): qcore.random_observable(dim, rng) for y in inputs for z in (1, -1)}
        return OneWayEntangledProtocol(
            n=n,
            d=d,
            c=1,
            shared=qcore.random_density_matrix(2 * d, rng),
            alice_povm=alice.__getitem__,
            bob_effect=lambda y, z: bob[(tuple(y), z)],
        )

    def completeness_residuals(self, p: TwoWayEntangledProtocol) -> List[float]:
        """Residual of every input pair."""
        inputs = all_inputs(p.n)
        return [self.compile_two_way(p, x, y).completeness_residual for x in inputs for y in inputs]


# Global instance
protocol_service = ProtocolService()
