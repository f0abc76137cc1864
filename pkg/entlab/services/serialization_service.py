"""JSON documents for protocols, decompositions and problem instances."""
import base64
from pathlib import Path
from typing import Sequence, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from entlab.core.exceptions import ProtocolError
from entlab.core.logger import get_logger
from entlab.models.instances import BhmInstance, ForrInstance, Matching
from entlab.models.protocols import (
    SmpQuantumProtocol,
    TabulatedSchedule,
    TwoWayEntangledProtocol,
    all_inputs,
    tabulate,
    transcript_from_mask,
    transcript_mask,
)
from entlab.models.quantum import DensityMatrix, MeasurementFamily, UnitaryOp
from entlab.models.reduction import ComponentKind, Decomposition, SimpleComponent
from entlab.models.schemas import (
    BhmInstanceDocument,
    DecompositionDocument,
    DecompositionReport,
    EncodedFamily,
    EncodedMatrix,
    ForrInstanceDocument,
    SmpProtocolDocument,
    TwoWayProtocolDocument,
)

logger = get_logger(__name__)

Document = TypeVar("Document", bound=BaseModel)


def to_bits(values: Sequence[int]) -> str:
    """±1 vector as a 0/1 string, -1 written as 1."""
    return "".join("1" if v == -1 else "0" for v in values)


def from_bits(bits: str) -> tuple:
    if any(ch not in "01" for ch in bits):
        raise ProtocolError(f"Not a bitstring: {bits!r}")
    return tuple(-1 if ch == "1" else 1 for ch in bits)


def schedule_key(round_index: int, x: Sequence[int], prefix: Sequence[int]) -> str:
    return f"{round_index}|{to_bits(x)}|{to_bits(prefix)}"


class SerializationService:
    """Encode and decode the laboratory's JSON documents."""

    def encode_matrix(self, matrix) -> EncodedMatrix:
        """Little-endian row-major complex128 bytes, base64."""
        data = np.ascontiguousarray(np.asarray(matrix, dtype="<c16"))
        return EncodedMatrix(shape=list(data.shape), data=base64.b64encode(data.tobytes()).decode("ascii"))

    def decode_matrix(self, encoded: EncodedMatrix) -> np.ndarray:
        raw = base64.b64decode(encoded.data.encode("ascii"))
        values = np.frombuffer(raw, dtype="<c16")
        if values.size != int(np.prod(encoded.shape)):
            raise ProtocolError(f"Encoded matrix holds {values.size} entries, shape says {encoded.shape}")
        return values.reshape(encoded.shape).astype(np.complex128)

    def encode_family(self, family: MeasurementFamily) -> EncodedFamily:
        return EncodedFamily(
            outcomes=[int(o) for o in family.outcomes],
            operators=[self.encode_matrix(op) for op in family.operators],
        )

    def decode_family(self, encoded: EncodedFamily) -> MeasurementFamily:
        return MeasurementFamily(encoded.outcomes, [self.decode_matrix(op) for op in encoded.operators])

    # ------------------------------------------------------------------
    # Protocols
    # ------------------------------------------------------------------
    def two_way_document(self, p: TwoWayEntangledProtocol) -> TwoWayProtocolDocument:
        """Tabulate both schedules on every input and prefix."""
        tables = {}
        for name, schedule, bob in (("alice", p.alice, False), ("bob", p.bob, True)):
            table = tabulate(schedule, p.n, p.rounds, bob).table
            tables[name] = {schedule_key(*key): self.encode_family(fam) for key, fam in table.items()}
        return TwoWayProtocolDocument(
            n=p.n,
            d=p.d,
            m=p.m,
            c=p.c,
            shared=self.encode_matrix(p.shared.data),
            alice=tables["alice"],
            bob=tables["bob"],
            accept=sorted(transcript_mask(z) for z in p.accept),
        )

    def _schedule(self, encoded: dict) -> TabulatedSchedule:
        table = {}
        for key, family in encoded.items():
            try:
                round_text, x_bits, prefix_bits = key.split("|")
                round_index = int(round_text)
            except ValueError as e:
                raise ProtocolError(f"Malformed schedule key {key!r}") from e
            table[(round_index, from_bits(x_bits), from_bits(prefix_bits))] = self.decode_family(family)
        return TabulatedSchedule(table)

    def two_way_protocol(self, doc: TwoWayProtocolDocument) -> TwoWayEntangledProtocol:
        if doc.c % 2:
            raise ProtocolError("Two-way transcripts have even length")
        return TwoWayEntangledProtocol(
            n=doc.n,
            d=doc.d,
            m=doc.m,
            shared=DensityMatrix(self.decode_matrix(doc.shared)),
            rounds=doc.c // 2,
            alice=self._schedule(doc.alice),
            bob=self._schedule(doc.bob),
            accept=frozenset(transcript_from_mask(mask, doc.c) for mask in doc.accept),
        )

    def smp_document(self, p: SmpQuantumProtocol) -> SmpProtocolDocument:
        inputs = all_inputs(p.n)
        return SmpProtocolDocument(
            n=p.n,
            c=p.c,
            alice=[self.encode_matrix(p.prep_a(x).data) for x in inputs],
            bob=[self.encode_matrix(p.prep_b(y).data) for y in inputs],
            referee_effect=self.encode_matrix(p.referee_effect),
        )

    def smp_protocol(self, doc: SmpProtocolDocument) -> SmpQuantumProtocol:
        inputs = all_inputs(doc.n)
        if len(doc.alice) != len(inputs) or len(doc.bob) != len(inputs):
            raise ProtocolError(f"SMP document must list {len(inputs)} states per player")
        alice = {x: DensityMatrix(self.decode_matrix(m)) for x, m in zip(inputs, doc.alice)}
        bob = {y: DensityMatrix(self.decode_matrix(m)) for y, m in zip(inputs, doc.bob)}
        return SmpQuantumProtocol(doc.n, doc.c, alice.__getitem__, bob.__getitem__, self.decode_matrix(doc.referee_effect))

    # ------------------------------------------------------------------
    # Decompositions and instances
    # ------------------------------------------------------------------
    def decomposition_document(self, decomposition: Decomposition, report: DecompositionReport) -> DecompositionDocument:
        parts = decomposition.components
        return DecompositionDocument(
            d=decomposition.d,
            coefficients=[c.coefficient for c in parts],
            kinds=[c.kind.value for c in parts],
            source_pairs=[list(c.source_pair) for c in parts],
            phases=[c.phase for c in parts],
            witness_a=[self.encode_matrix(c.witness_a.data) for c in parts],
            witness_b=[self.encode_matrix(c.witness_b.data) for c in parts],
            report=report,
        )

    def decomposition(self, doc: DecompositionDocument) -> Decomposition:
        components = tuple(
            SimpleComponent(
                coefficient=alpha,
                kind=ComponentKind(kind),
                witness_a=UnitaryOp(self.decode_matrix(wa)),
                witness_b=UnitaryOp(self.decode_matrix(wb)),
                source_pair=(pair[0], pair[1]),
                phase=phase,
            )
            for alpha, kind, pair, phase, wa, wb in zip(
                doc.coefficients, doc.kinds, doc.source_pairs, doc.phases, doc.witness_a, doc.witness_b
            )
        )
        return Decomposition(doc.d, components, doc.report.complex_path)

    def forr_document(self, inst: ForrInstance) -> ForrInstanceDocument:
        return ForrInstanceDocument(
            n=inst.n, epsilon=inst.epsilon, x=to_bits(inst.x), y=to_bits(inst.y), label=str(inst.label), seed=inst.seed
        )

    def forr_instance(self, doc: ForrInstanceDocument) -> ForrInstance:
        return ForrInstance(
            n=doc.n, x=from_bits(doc.x), y=from_bits(doc.y), label=int(doc.label), epsilon=doc.epsilon, seed=doc.seed
        )

    def bhm_document(self, inst: BhmInstance) -> BhmInstanceDocument:
        return BhmInstanceDocument(
            n=inst.n,
            x=to_bits(inst.x),
            edges=[list(e) for e in inst.matching.edges],
            y=to_bits(inst.y),
            label=str(inst.label),
        )

    def bhm_instance(self, doc: BhmInstanceDocument) -> BhmInstance:
        inst = BhmInstance(from_bits(doc.x), Matching(doc.n, tuple(tuple(e) for e in doc.edges)), from_bits(doc.y))
        if str(inst.label) != doc.label:
            raise ProtocolError(f"Stored label {doc.label} disagrees with the instance ({inst.label})")
        return inst

    # ------------------------------------------------------------------
    # Files
    # ------------------------------------------------------------------
    def save(self, document: BaseModel, path: str) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(document.model_dump_json(indent=2), encoding="utf-8")
        logger.info("Document saved", extra={"extra": {"path": str(target), "kind": type(document).__name__}})
        return target

    def load(self, path: str, model: Type[Document]) -> Document:
        try:
            return model.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except ValidationError as e:
            raise ProtocolError(f"Invalid {model.__name__} in {path}: {e}") from e


# Global instance
serialization_service = SerializationService()
