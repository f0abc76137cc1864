"""Protocol intermediate representation.

Inputs are ±1 tuples. A transcript is a ±1 tuple with one entry per
message bit; in a two-way protocol Alice speaks at even positions and Bob
at odd positions, one bit each per round.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Sequence, Tuple

import numpy as np

from entlab.core.config import settings
from entlab.core.exceptions import ProtocolError
from entlab.models.quantum import DensityMatrix, MeasurementFamily

Bits = Tuple[int, ...]
Transcript = Tuple[int, ...]

# (round, input, transcript prefix) -> two-outcome family
Schedule = Callable[[int, Bits, Transcript], MeasurementFamily]


def all_inputs(n: int) -> List[Bits]:
    """Every ±1 vector of length n, ordered by bitmask (bit i set means x_i = -1)."""
    return [tuple(1 - 2 * ((mask >> i) & 1) for i in range(n)) for mask in range(1 << n)]


def all_transcripts(c: int) -> List[Transcript]:
    return [tuple(z) for z in product((1, -1), repeat=c)]


def transcript_mask(z: Transcript) -> int:
    """Bitmask of a transcript, first bit most significant, -1 encoded as 1."""
    mask = 0
    for bit in z:
        mask = (mask << 1) | (1 if bit == -1 else 0)
    return mask


def transcript_from_mask(mask: int, c: int) -> Transcript:
    return tuple(-1 if (mask >> (c - 1 - i)) & 1 else 1 for i in range(c))


def _check_effect(effect: np.ndarray, name: str) -> np.ndarray:
    e = np.asarray(effect, dtype=np.complex128)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise ProtocolError(f"{name} must be square")
    if not np.allclose(e, e.conj().T, atol=settings.atol, rtol=0.0):
        raise ProtocolError(f"{name} is not Hermitian")
    spectrum = np.linalg.eigvalsh((e + e.conj().T) / 2)
    if spectrum[0] < -1 - settings.atol or spectrum[-1] > 1 + settings.atol:
        raise ProtocolError(f"{name} spectrum leaves [-1, 1]")
    return e


class TabulatedSchedule:
    """Schedule backed by an explicit table keyed by (round, input, prefix)."""

    def __init__(self, table: Dict[Tuple[int, Bits, Transcript], MeasurementFamily]):
        self.table = dict(table)

    def __call__(self, round_index: int, x: Bits, prefix: Transcript) -> MeasurementFamily:
        try:
            return self.table[(round_index, tuple(x), tuple(prefix))]
        except KeyError as e:
            raise ProtocolError(f"No family for round {round_index}, input {x}, prefix {prefix}") from e

    def __len__(self) -> int:
        return len(self.table)


def tabulate(schedule: Schedule, n: int, rounds: int, bob: bool) -> TabulatedSchedule:
    """Evaluate a schedule on every input and every prefix it can see."""
    table = {}
    for t in range(rounds):
        prefix_length = 2 * t + (1 if bob else 0)
        for x in all_inputs(n):
            for prefix in all_transcripts(prefix_length):
                table[(t, x, prefix)] = schedule(t, x, prefix)
    return TabulatedSchedule(table)


@dataclass(frozen=True, eq=False)
class SmpQuantumProtocol:
    """Simultaneous messages: rho(x), sigma(y) on c qubits each, referee effect E on 2c qubits."""
    n: int
    c: int
    prep_a: Callable[[Bits], DensityMatrix]
    prep_b: Callable[[Bits], DensityMatrix]
    referee_effect: np.ndarray

    def __post_init__(self):
        effect = _check_effect(self.referee_effect, "Referee effect")
        if effect.shape[0] != 1 << (2 * self.c):
            raise ProtocolError(f"Referee effect of side {effect.shape[0]} for c={self.c}")
        object.__setattr__(self, "referee_effect", effect)

    @classmethod
    def from_family(cls, n: int, c: int, prep_a, prep_b, family: MeasurementFamily) -> "SmpQuantumProtocol":
        """E = M_1^dagger M_1 - M_-1^dagger M_-1 from the referee's two-outcome family."""
        plus, minus = family.operator(1), family.operator(-1)
        return cls(n, c, prep_a, prep_b, plus.conj().T @ plus - minus.conj().T @ minus)


@dataclass(frozen=True, eq=False)
class TwoWayEntangledProtocol:
    """Alternating two-outcome POVMs on shared state plus private memory.

    Alice's families act on her d shared qubits followed by her m memory
    qubits; Bob's likewise. ``accept`` holds the transcripts on which the
    protocol outputs -1.

    Each round is one bit from Alice followed by one bit from Bob, so the
    transcript length c = 2 * rounds is always even. An odd-length protocol
    is expressed by giving Bob a constant family in the last round, which
    leaves his final bit deterministic.
    """
    n: int
    d: int
    m: int
    shared: DensityMatrix
    rounds: int
    alice: Schedule
    bob: Schedule
    accept: FrozenSet[Transcript] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.shared.qubits != 2 * self.d:
            raise ProtocolError(f"Shared state has {self.shared.qubits} qubits, expected {2 * self.d}")
        if self.rounds < 1:
            raise ProtocolError("A two-way protocol needs at least one round")
        accept = frozenset(tuple(z) for z in self.accept)
        if any(len(z) != self.c for z in accept):
            raise ProtocolError("Accept set transcripts must have length c")
        object.__setattr__(self, "accept", accept)

    @property
    def c(self) -> int:
        return 2 * self.rounds

    @property
    def local_dim(self) -> int:
        return 1 << (self.d + self.m)

    def sign(self, z: Transcript) -> int:
        return -1 if tuple(z) in self.accept else 1

    def with_shared(self, shared: DensityMatrix) -> "TwoWayEntangledProtocol":
        return TwoWayEntangledProtocol(self.n, self.d, self.m, shared, self.rounds, self.alice, self.bob, self.accept)


@dataclass(frozen=True, eq=False)
class OneWayEntangledProtocol:
    """Alice measures her half with a 2^c-outcome family and sends z; Bob measures F(y, z)."""
    n: int
    d: int
    c: int
    shared: DensityMatrix
    alice_povm: Callable[[Bits], MeasurementFamily]
    bob_effect: Callable[[Bits, Hashable], np.ndarray]

    def __post_init__(self):
        if self.shared.qubits != 2 * self.d:
            raise ProtocolError(f"Shared state has {self.shared.qubits} qubits, expected {2 * self.d}")


@dataclass(frozen=True, eq=False)
class EntangledSmpProtocol:
    """SMP protocol whose players share a 2d-qubit state.

    Alice applies the channel ``alice_channel(x)`` (Kraus operators from d
    to c_a qubits) to the first half, Bob applies ``bob_channel(y)`` to the
    second half, and the referee measures the two outputs with effect E.
    """
    n: int
    d: int
    c_a: int
    c_b: int
    shared: DensityMatrix
    alice_channel: Callable[[Bits], Sequence[np.ndarray]]
    bob_channel: Callable[[Bits], Sequence[np.ndarray]]
    referee_effect: np.ndarray

    def __post_init__(self):
        if self.shared.qubits != 2 * self.d:
            raise ProtocolError(f"Shared state has {self.shared.qubits} qubits, expected {2 * self.d}")
        effect = _check_effect(self.referee_effect, "Referee effect")
        if effect.shape[0] != 1 << (self.c_a + self.c_b):
            raise ProtocolError("Referee effect does not match the message registers")
        object.__setattr__(self, "referee_effect", effect)


@dataclass(frozen=True, eq=False)
class FunctionProtocol:
    """Any protocol given directly by its expected output C(x, y) in [-1, 1]."""
    n: int
    output: Callable[[Bits, Bits], float]
    c: int = 0


@dataclass
class CompiledTwoWay:
    """Per-transcript operators E_z(x), F_z(y) and signs for one input pair."""
    x: Bits
    y: Bits
    transcripts: List[Transcript]
    alice: Dict[Transcript, np.ndarray]
    bob: Dict[Transcript, np.ndarray]
    signs: Dict[Transcript, int]
    completeness_residual: float

    def terms(self) -> Iterable[Tuple[Transcript, np.ndarray, np.ndarray, int]]:
        for z in self.transcripts:
            yield z, self.alice[z], self.bob[z], self.signs[z]


class XorFiberTable:
    """H(z) = E_x[C(x, x*z)] for every z, indexed by bitmask."""

    def __init__(self, n: int, values):
        data = np.asarray(values, dtype=np.float64).reshape(-1)
        if data.size != 1 << n:
            raise ProtocolError(f"XOR-fiber table of size {data.size} for n={n}")
        if np.max(np.abs(data), initial=0.0) > 1.0 + 1e-10:
            raise ProtocolError("XOR-fiber value outside [-1, 1]")
        data = data.copy()
        data.setflags(write=False)
        self.n = n
        self.values = data

    def __repr__(self) -> str:
        return f"XorFiberTable(n={self.n})"


@dataclass
class TranscriptHistogram:
    """Empirical transcript counts from sequential simulation."""
    shots: int
    counts: Dict[Transcript, int]

    def frequency(self, z: Transcript) -> float:
        return self.counts.get(tuple(z), 0) / self.shots

    def mean_output(self, accept: FrozenSet[Transcript]) -> float:
        total = sum((-1 if z in accept else 1) * count for z, count in self.counts.items())
        return total / self.shots


def constant_schedule(family: MeasurementFamily) -> Schedule:
    """Schedule that uses the same family for every round, input and prefix."""
    def schedule(round_index: int, x: Bits, prefix: Transcript) -> MeasurementFamily:
        return family
    return schedule


def resolve_family(schedule: Schedule, round_index: int, x: Bits, prefix: Transcript, dim: int) -> MeasurementFamily:
    family = schedule(round_index, tuple(x), tuple(prefix))
    if not isinstance(family, MeasurementFamily):
        raise ProtocolError("Schedules must return MeasurementFamily values")
    if set(family.outcomes) != {1, -1}:
        raise ProtocolError(f"Round families must have outcomes (1, -1), got {family.outcomes}")
    if family.dim != dim:
        raise ProtocolError(f"Round family of side {family.dim}, expected {dim}")
    return family
