import json
from fractions import Fraction

import numpy as np
from pytest import approx, raises

from entlab.core.exceptions import ProtocolError
from entlab.models.instances import BhmInstance, Matching
from entlab.models.protocols import all_inputs
from entlab.models.schemas import (
    BhmInstanceDocument,
    EncodedMatrix,
    ForrInstanceDocument,
    RationalAudit,
    SmpProtocolDocument,
    TwoWayProtocolDocument,
)
from entlab.services.forrelation_service import forrelation_service
from entlab.services.protocol_service import protocol_service
from entlab.services.qcore_service import qcore
from entlab.services.reduction_service import reduction_service
from entlab.services.serialization_service import from_bits, serialization_service, to_bits


def test_bits_use_one_for_minus_one():
    assert to_bits((1, -1, -1, 1)) == "0110"
    assert from_bits("0110") == (1, -1, -1, 1)
    with raises(ProtocolError):
        from_bits("01a")


def test_matrix_encoding_is_exact(rng):
    matrix = qcore.random_unitary(4, rng).data
    encoded = serialization_service.encode_matrix(matrix)
    assert encoded.shape == [4, 4]
    assert np.array_equal(serialization_service.decode_matrix(encoded), matrix)


def test_matrix_with_wrong_shape_is_rejected(rng):
    encoded = serialization_service.encode_matrix(np.eye(2))
    with raises(ProtocolError):
        serialization_service.decode_matrix(EncodedMatrix(shape=[3, 3], data=encoded.data))


def test_two_way_document_preserves_outputs(rng, tmp_path):
    p = protocol_service.random_two_way(1, 1, 1, 2, rng)
    path = serialization_service.save(serialization_service.two_way_document(p), str(tmp_path / "two_way.json"))
    doc = serialization_service.load(str(path), TwoWayProtocolDocument)
    assert doc.schema_version == 1
    assert doc.kind == "two-way"
    restored = serialization_service.two_way_protocol(doc)
    assert restored.accept == p.accept
    for x in all_inputs(1):
        for y in all_inputs(1):
            assert protocol_service.eval_two_way(restored, x, y) == approx(protocol_service.eval_two_way(p, x, y), abs=1e-12)


def test_two_way_document_with_odd_transcripts_is_rejected(rng):
    doc = serialization_service.two_way_document(protocol_service.random_two_way(1, 1, 0, 1, rng))
    with raises(ProtocolError):
        serialization_service.two_way_protocol(doc.model_copy(update={"c": 3}))


def test_malformed_schedule_key(rng):
    doc = serialization_service.two_way_document(protocol_service.random_two_way(1, 1, 0, 1, rng))
    key, family = next(iter(doc.alice.items()))
    broken = doc.model_copy(update={"alice": {"not-a-key": family}})
    with raises(ProtocolError):
        serialization_service.two_way_protocol(broken)


def test_smp_document_preserves_output_table(rng):
    p = protocol_service.random_smp(2, 1, rng)
    doc = SmpProtocolDocument.model_validate_json(serialization_service.smp_document(p).model_dump_json())
    restored = serialization_service.smp_protocol(doc)
    assert np.allclose(protocol_service.output_table(restored), protocol_service.output_table(p))


def test_smp_document_needs_every_input(rng):
    doc = serialization_service.smp_document(protocol_service.random_smp(2, 1, rng))
    with raises(ProtocolError):
        serialization_service.smp_protocol(doc.model_copy(update={"alice": doc.alice[:3]}))


def test_decomposition_document_rebuilds_the_state(rng):
    rho = qcore.random_real_density_matrix(2, rng)
    decomposition = reduction_service.decompose(rho)
    report = reduction_service.verify_decomposition(rho, decomposition)
    doc = serialization_service.decomposition_document(decomposition, report)
    restored = serialization_service.decomposition(doc)
    assert len(restored.components) == 16
    assert np.allclose(reduction_service.reconstruct(restored), rho.data)
    assert reduction_service.verify_decomposition(rho, restored).valid


def test_forr_document_keeps_instance():
    inst = forrelation_service.plant_instance(16, 0.8, -1, seed=4)
    doc = serialization_service.forr_document(inst)
    assert set(doc.x) <= {"0", "1"}
    assert doc.label == "-1"
    assert serialization_service.forr_instance(doc) == inst


def test_bhm_document_checks_stored_label(tmp_path):
    inst = BhmInstance((1, -1, 1, 1), Matching(4, ((0, 1),)), (-1,))
    path = serialization_service.save(serialization_service.bhm_document(inst), str(tmp_path / "bhm.json"))
    stored = json.loads(path.read_text())
    assert stored["label"] == "1"
    assert stored["edges"] == [[0, 1]]
    assert serialization_service.bhm_instance(serialization_service.load(str(path), BhmInstanceDocument)) == inst
    stored["label"] = "-1"
    with raises(ProtocolError):
        serialization_service.bhm_instance(BhmInstanceDocument(**stored))


def test_load_rejects_invalid_documents(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"n": 4, "epsilon": "wide"}')
    with raises(ProtocolError):
        serialization_service.load(str(path), ForrInstanceDocument)


def test_rational_audit_serializes_fractions_as_strings():
    audit = RationalAudit(check="identity", lhs=Fraction(1, 3), rhs=Fraction(1, 3), holds=True)
    assert RationalAudit.model_config["arbitrary_types_allowed"] is True
    assert json.loads(audit.model_dump_json())["lhs"] == "1/3"
