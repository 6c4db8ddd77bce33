import numpy as np
import pytest

from zxcliff.circuit import (CNOT_MAT, GATE_MATRICES, SWAP_MAT, TONC_MAT,
                             Circuit, Gate, circuit, circuit_size, gate,
                             gate_matrix_product, parse_circuit,
                             random_clifford_circuit, serialize_circuit,
                             translate)
from zxcliff.diagram import H, X, Z
from zxcliff.errors import CircuitSyntaxError, SemanticsSizeError
from zxcliff.semantics import scalar_free_equal


# -- gate matrices against the group relations ----------------------------------

def test_group_relations():
    S, V = GATE_MATRICES["S"], GATE_MATRICES["V"]
    assert np.allclose(S @ S, GATE_MATRICES["Z"])
    assert np.allclose(V @ V, GATE_MATRICES["X"])
    assert np.allclose(np.linalg.matrix_power(S, 4), np.eye(2))
    assert np.allclose(np.linalg.matrix_power(V, 4), np.eye(2))
    # H = conj(omega) S V S exactly
    omega = np.exp(1j * np.pi / 4)
    assert np.allclose(GATE_MATRICES["H"], omega.conjugate() * S @ V @ S)
    assert np.allclose(TONC_MAT, SWAP_MAT @ CNOT_MAT @ SWAP_MAT)


def test_gate_wire_validation():
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("S", (0, 1))
    with pytest.raises(ValueError):
        circuit(1, gate("S", 1))


# -- gate_matrix_product ----------------------------------------------------------

def test_empty_circuit_is_identity():
    assert np.allclose(gate_matrix_product(Circuit(2, ())), np.eye(4))


def test_vv_is_x():
    c = circuit(1, gate("V", 0), gate("V", 0))
    assert scalar_free_equal(gate_matrix_product(c), GATE_MATRICES["X"])


def test_cnot_tonc_cnot_is_swap():
    c = circuit(2, gate("CNOT", 0, 1), gate("TONC", 0, 1), gate("CNOT", 0, 1))
    assert scalar_free_equal(gate_matrix_product(c), SWAP_MAT)


def test_last_gate_leftmost():
    c = circuit(1, gate("S", 0), gate("V", 0))
    assert np.allclose(gate_matrix_product(c),
                       GATE_MATRICES["V"] @ GATE_MATRICES["S"])


def test_embedding_on_nonadjacent_wires():
    c = circuit(3, gate("CNOT", 2, 0))
    m = gate_matrix_product(c)
    # |q0 q1 q2>: flips q0 when q2 is set
    for b in range(8):
        col = np.flatnonzero(m[:, b])
        assert len(col) == 1
        q0, q2 = (b >> 2) & 1, b & 1
        expected = b ^ (0b100 if q2 else 0)
        assert col[0] == expected


def test_width_bound():
    with pytest.raises(SemanticsSizeError):
        gate_matrix_product(Circuit(3, ()), qubit_bound=2)


# -- translation -------------------------------------------------------------------

def test_translate_s():
    d = translate(circuit(1, gate("S", 0)))
    (v,) = d.interior()
    assert d.kind(v) == Z and d.phase(v) == 1


def test_translate_cnot_shape():
    d = translate(circuit(2, gate("CNOT", 0, 1)))
    inter = d.interior()
    kinds = {d.kind(v) for v in inter}
    assert kinds == {Z, X} and len(inter) == 2
    z = next(v for v in inter if d.kind(v) == Z)
    x = next(v for v in inter if d.kind(v) == X)
    assert d.edges_between(z, x)
    assert all(d.phase(v) == 0 for v in inter)
    # Z end sits on the control wire
    zn = d.neighbours(z)
    assert d.inputs[0] in zn


def test_translate_swap_is_crossing():
    d = translate(circuit(2, gate("SWAP", 0, 1)))
    assert not d.interior()
    assert d.edges_between(d.inputs[0], d.outputs[1])
    assert d.edges_between(d.inputs[1], d.outputs[0])


def test_translate_tonc_colours_reversed():
    d = translate(circuit(2, gate("TONC", 0, 1)))
    x = next(v for v in d.interior() if d.kind(v) == X)
    assert d.inputs[0] in d.neighbours(x)


def test_translate_is_monoidal_on_concatenation():
    a = random_clifford_circuit(2, 6, 41)
    b = random_clifford_circuit(2, 6, 42)
    joined = a.then(b)
    assert translate(joined).iso_equal(translate(a).compose(translate(b)))


# -- circuit_size -------------------------------------------------------------------

def test_size_identity_wire():
    from zxcliff.diagram import Diagram

    assert circuit_size(Diagram.identity_wire()) == 0


def test_size_cnot_counts_two():
    assert circuit_size(translate(circuit(2, gate("CNOT", 0, 1)))) == 2


def test_size_three_singles():
    c = circuit(1, gate("S", 0), gate("V", 0), gate("Z", 0))
    assert circuit_size(translate(c)) == 3


def test_size_ignores_trivial_spiders():
    from zxcliff.diagram import B, DiagramBuilder

    b = DiagramBuilder()
    i = b.add_vertex(B)
    z = b.add_vertex(Z, 0)
    o = b.add_vertex(B)
    b.add_edge(i, z)
    b.add_edge(z, o)
    b.set_boundaries([i], [o])
    assert circuit_size(b.build()) == 0


def test_size_counts_h_box():
    assert circuit_size(translate(circuit(1, gate("H", 0)))) == 1


# -- text format --------------------------------------------------------------------

def test_parse_simple():
    c = parse_circuit("qubits 1\nS 0\n")
    assert c.width == 1 and c.gates == (gate("S", 0),)


def test_parse_two_gates_with_comment():
    c = parse_circuit("qubits 2\nCNOT 0 1  # entangle\nH 1\n")
    assert c.gates == (gate("CNOT", 0, 1), gate("H", 1))


def test_parse_wire_out_of_range():
    with pytest.raises(CircuitSyntaxError) as err:
        parse_circuit("qubits 2\nCNOT 0 2\n")
    assert err.value.line == 2


def test_parse_errors():
    with pytest.raises(CircuitSyntaxError):
        parse_circuit("S 0\n")
    with pytest.raises(CircuitSyntaxError):
        parse_circuit("qubits 1\nQ 0\n")
    with pytest.raises(CircuitSyntaxError):
        parse_circuit("qubits 2\nSWAP 1 1\n")


def test_round_trip():
    for seed in range(10):
        c = random_clifford_circuit(3, 15, seed)
        assert parse_circuit(serialize_circuit(c)) == c
    c = circuit(2, gate("TONC", 1, 0), gate("SWAP", 0, 1))
    assert parse_circuit(serialize_circuit(c)) == c


# -- random generation -----------------------------------------------------------------

def test_width_one_never_two_qubit():
    c = random_clifford_circuit(1, 20, 99)
    assert len(c.gates) == 20
    assert all(len(g.wires) == 1 for g in c.gates)


def test_determinism():
    a = random_clifford_circuit(3, 25, 123)
    b = random_clifford_circuit(3, 25, 123)
    assert a == b
    assert a != random_clifford_circuit(3, 25, 124)


def test_mean_translated_size_width2():
    # qualitative distribution check: one gate per layer, cnot with
    # probability one half, so mean size is about 30 at depth 20
    sizes = [circuit_size(translate(random_clifford_circuit(2, 20, s)))
             for s in range(200)]
    mean = sum(sizes) / len(sizes)
    assert 27.0 < mean < 33.0


def test_translation_sound_for_generated_widths():
    from zxcliff.semantics import check_translation_soundness

    for width in (1, 2, 4, 5):
        for seed in range(3):
            c = random_clifford_circuit(width, 40 if width < 5 else 20, seed)
            assert check_translation_soundness(c)
