"""Decompositions into simple states and entanglement-free protocol compilations."""
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, List, Tuple

import numpy as np

from entlab.models.protocols import EntangledSmpProtocol, OneWayEntangledProtocol
from entlab.models.quantum import MeasurementFamily, UnitaryOp


class ComponentKind(str, Enum):
    ZERO = "zero"
    EPR = "epr"


@dataclass(frozen=True)
class SimpleComponent:
    """
    alpha times a pair state that is locally equivalent to |0><0| or EPR.

    The pair state is (1/2)(|i> + w|j>)(<i| + w*<j|) with w = 1, or w = i
    when ``phase`` is set; (witness_a (x) witness_b) maps the canonical state
    of ``kind`` onto it.
    """
    coefficient: float
    kind: ComponentKind
    witness_a: UnitaryOp
    witness_b: UnitaryOp
    source_pair: Tuple[int, int]
    phase: bool = False


@dataclass(frozen=True)
class Decomposition:
    d: int
    components: Tuple[SimpleComponent, ...]
    complex_path: bool = False

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c.coefficient for c in self.components])


@dataclass(frozen=True, eq=False)
class StrippedSmp:
    """
    SMP protocol without shared entanglement and with a detection flag.

    Referee register order: Alice's output, Alice's copy of the shared
    second half, Bob's pair half, Bob's output, herald qubit.
    """
    original: EntangledSmpProtocol
    instrument: MeasurementFamily
    flag_outcome: Hashable

    @property
    def d(self) -> int:
        return self.original.d

    @property
    def alice_qubits(self) -> int:
        return self.original.c_a + self.original.d

    @property
    def bob_qubits(self) -> int:
        return self.original.d + self.original.c_b + 1

    @property
    def cost(self) -> int:
        return self.alice_qubits + self.bob_qubits

    def keep_mask(self) -> List[bool]:
        """Qubits of the referee register that carry the original messages."""
        p = self.original
        return [True] * p.c_a + [False] * (2 * p.d) + [True] * p.c_b + [False]


@dataclass(frozen=True, eq=False)
class StrippedOneWay:
    """
    One-way protocol without shared entanglement.

    Alice sends her outcome z, a uniform entry position (i, j) of her
    post-measurement state and that entry quantized to 5d bits (real and
    imaginary parts separately on the complex path).
    """
    original: OneWayEntangledProtocol
    complex_path: bool = False

    @property
    def precision_bits(self) -> int:
        return 5 * self.original.d

    @property
    def cost(self) -> int:
        d = self.original.d
        entry_bits = self.precision_bits * (2 if self.complex_path else 1)
        return self.original.c + 4 * d + entry_bits
