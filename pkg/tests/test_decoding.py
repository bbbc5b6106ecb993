import itertools

import numpy as np
import pytest

from rescorr.codes import build_repetition, get_code, logical_basis, logical_state
from rescorr.decoding import (
    DecoderTable,
    GAUGE,
    MIN_WEIGHT,
    PauliFrame,
    build_gauge_table,
    build_min_weight_table,
    build_table,
    certify_gauge_equivalence,
    gauge_decode,
    logical_classes,
    recover,
    syndrome_measurement,
)
from rescorr.experiments import bell_with_reference
from rescorr.linalg import dm
from rescorr.measures import code_reference_negativity, logical_coherence
from rescorr.pauli import PauliString, paulis_of_weight


def test_min_weight_table_rep3():
    table = build_min_weight_table(build_repetition(3))
    assert len(table) == 4
    assert table.lookup((0, 0)).body == "III"
    assert table.lookup((1, 0)).body == "XII"
    assert table.lookup((1, 1)).body == "IXI"
    assert table.lookup((0, 1)).body == "IIX"
    assert table.policy == MIN_WEIGHT


def test_min_weight_table_rep5_uses_bit_flips():
    table = build_min_weight_table(build_repetition(5))
    assert len(table) == 16
    for s, c in table.entries.items():
        assert set(c.body) <= {"I", "X"}
        assert c.weight <= 2


@pytest.mark.parametrize("name", ["shor9", "surface3"])
def test_min_weight_table_is_minimal(name):
    code = get_code(name)
    table = build_min_weight_table(code)
    seen = {}
    for e in [PauliString.identity(9)] + paulis_of_weight(9, 1):
        seen.setdefault(code.syndrome(e), e.weight)
    assert set(table.entries) == set(seen)
    for s, c in table.entries.items():
        assert c.weight == seen[s]


def test_min_weight_table_rejects_large_weight():
    with pytest.raises(ValueError):
        build_min_weight_table(get_code("shor9"), max_weight=2)


@pytest.mark.parametrize("name", ["rep3", "rep5", "shor9", "surface3"])
def test_gauge_table_complete(name):
    code = get_code(name)
    table = build_gauge_table(code)
    assert len(table) == 2 ** code.num_generators
    for s in itertools.product((0, 1), repeat=code.num_generators):
        assert code.syndrome(table.lookup(s)) == s
        assert gauge_decode(code, s) == table.lookup(s)


def test_table_validation_and_text():
    code = build_repetition(3)
    with pytest.raises(ValueError, match="reproduce"):
        DecoderTable(code, {(1, 0): PauliString.from_label("IIX")}, MIN_WEIGHT)
    with pytest.raises(ValueError, match="policy"):
        DecoderTable(code, {}, "fastest")
    table = build_table(code, MIN_WEIGHT)
    with pytest.raises(KeyError, match="11"):
        DecoderTable(code, {}, GAUGE).lookup((1, 1))
    text = table.to_text()
    assert "00 -> III" in text and "11 -> IXI" in text
    assert text.startswith("# code=rep3 policy=min-weight")
    with pytest.raises(ValueError):
        build_table(code, "unknown")


def test_syndrome_measurement_pads_reference():
    m = syndrome_measurement(build_repetition(3), ref_qubits=1)
    assert [o.body for o in m.observables] == ["ZZII", "IZZI"]


def test_recover_rep3_exact():
    code = build_repetition(3)
    rho = dm(logical_state(code, [0.6, 0.8j]))
    table = build_min_weight_table(code)
    for q in range(3):
        err = PauliString.single(3, q, "X")
        assert np.allclose(recover(err.conjugate(rho), code, table), rho)


def test_recover_mixture_of_syndromes():
    code = build_repetition(3)
    rho = dm(logical_state(code, [0.6, 0.8]))
    noisy = 0.5 * rho + 0.5 * PauliString.from_label("IXI").conjugate(rho)
    assert np.allclose(recover(noisy, code, build_min_weight_table(code)), rho)


def test_gauge_recovery_surface_single_errors():
    code = get_code("surface3")
    rho = dm(bell_with_reference(code))
    n0 = code_reference_negativity(rho, code, 1)
    c0 = logical_coherence(rho, code, 1)
    table = build_gauge_table(code)
    classes = set()
    for err in ("XIIIIIIII", "IIIIZIIII", "IIIIIIIIY", "IIYIIIIII"):
        out = recover(PauliString.from_label(err).pad(1).conjugate(rho), code, table)
        cert = certify_gauge_equivalence(rho, out, code)
        assert cert is not None
        classes.add(cert.label)
        assert code_reference_negativity(out, code, 1) == pytest.approx(n0, abs=1e-9)
        assert logical_coherence(out, code, 1) == pytest.approx(c0, abs=1e-9)
    assert classes <= {"I", "X", "Y", "Z"}


def test_certify():
    code = build_repetition(3)
    rho = dm(logical_state(code, [0.6, 0.8]))
    assert certify_gauge_equivalence(rho, rho, code).label == "I"
    flipped = code.logical_x[0].conjugate(rho)
    cert = certify_gauge_equivalence(rho, flipped, code)
    assert cert.label == "X" and cert.residual < 1e-12
    outside = PauliString.from_label("XII").conjugate(rho)
    assert certify_gauge_equivalence(rho, outside, code) is None
    mixed = 0.5 * rho + 0.5 * flipped
    assert certify_gauge_equivalence(rho, mixed, code) is None
    assert certify_gauge_equivalence(rho, np.eye(16) / 16, code) is None


def test_logical_classes_order():
    assert [label for label, _ in logical_classes(get_code("shor9"))] == ["I", "X", "Y", "Z"]
    assert all(op.is_hermitian for _, op in logical_classes(get_code("surface3")))


def test_pauli_frame():
    code = build_repetition(3)
    frame = PauliFrame.empty(3)
    a, b = PauliString.from_label("XII"), PauliString.from_label("IYI")
    frame = frame.update(a).update(b)
    assert frame.frame == b * a
    assert frame.syndrome_offset(code) == code.syndrome(b * a)
    rho = dm(logical_state(code, [0.6, 0.8]))
    assert np.allclose(frame.apply(rho), b.conjugate(a.conjugate(rho)))
    v = logical_basis(code)
    with_ref = dm(np.kron(v[:, 0], [1, 0]))
    assert np.allclose(frame.apply(with_ref), (b * a).pad(1).conjugate(with_ref))


def test_pauli_frame_defers_correction():
    # measuring with a pending frame: XOR the offset out of the fresh syndrome
    code = build_repetition(5)
    table = build_min_weight_table(code)
    err1, err2 = PauliString.from_label("XIIII"), PauliString.from_label("IIIXI")
    frame = PauliFrame.empty(5).update(table.lookup(code.syndrome(err1)))
    raw = code.syndrome(err1 * err2)
    fresh = tuple(r ^ o for r, o in zip(raw, frame.syndrome_offset(code)))
    frame = frame.update(table.lookup(fresh))
    net = frame.frame * err2 * err1
    assert code.is_stabilizer_element(net) and not any(code.syndrome(net))
