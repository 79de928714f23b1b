import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accteleport.qmath import (
    I2, KET0, KET1, KET_MINUS, KET_PLUS, X, Y, Z, DensityOperator, ImpossibleBranch,
    InvariantViolation, Operator, StateVector, apply, embed_operator, fidelity_pure,
    partial_trace, project, projector, tensor,
)

from conftest import local_op


# --- construction and invariants --------------------------------------------

def test_state_vector_requires_unit_norm():
    with pytest.raises(InvariantViolation):
        StateVector([1.0, 1.0])
    StateVector([1.0, 1.0], normalized=False)


def test_state_vector_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        StateVector([1.0, 0.0, 0.0])


def test_state_vector_is_read_only():
    psi = StateVector([1.0, 0.0])
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0.0


def test_non_finite_entries_rejected():
    with pytest.raises(ValueError):
        StateVector([float("nan"), 1.0])


def test_density_checks():
    with pytest.raises(InvariantViolation):
        DensityOperator([[1, 0.5], [0, 0]])  # not Hermitian
    with pytest.raises(InvariantViolation):
        DensityOperator([[0.5, 0], [0, 0.6]])  # trace
    with pytest.raises(InvariantViolation):
        DensityOperator([[1.5, 0], [0, -0.5]])  # not PSD
    DensityOperator([[0.3, 0], [0, 0.2]], normalized=False)
    with pytest.raises(InvariantViolation):
        DensityOperator([[0.7, 0], [0, 0.6]], normalized=False)


def test_operator_kinds():
    with pytest.raises(InvariantViolation):
        Operator([[1, 1], [0, 1]], "unitary")
    with pytest.raises(InvariantViolation):
        Operator([[1, 0], [0, 0.5]], "projector")
    with pytest.raises(ValueError):
        Operator(np.eye(2), "banana")


# --- tensor -----------------------------------------------------------------

def test_tensor_basis_product():
    np.testing.assert_allclose(tensor(KET0, KET1).amplitudes, [0, 1, 0, 0])


def test_tensor_identities():
    np.testing.assert_allclose(tensor(I2, I2).entries, np.eye(4))


def test_tensor_plus_zero():
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(tensor(KET_PLUS, KET0).amplitudes, [s, 0, s, 0], atol=1e-15)


def test_tensor_rejects_mixed_kinds():
    with pytest.raises(TypeError):
        tensor(KET0, I2)


def test_tensor_densities():
    rho = tensor(KET0.density(), KET1.density())
    assert rho.entries[1, 1] == 1


# --- partial trace ----------------------------------------------------------

def test_partial_trace_product_state():
    rho = StateVector.from_bits("01").density()
    # "01" is written most significant first: qubit 1 = 0, qubit 0 = 1
    np.testing.assert_allclose(partial_trace(rho, {0}).entries, KET1.density().entries)
    np.testing.assert_allclose(partial_trace(rho, {1}).entries, KET0.density().entries)


def test_partial_trace_bell_state():
    bell = StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2)).density()
    np.testing.assert_allclose(partial_trace(bell, {0}).entries, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_errors():
    rho = KET0.density()
    with pytest.raises(ValueError):
        partial_trace(rho, set())
    with pytest.raises(ValueError):
        partial_trace(rho, {1})


def test_partial_trace_keeps_order_of_remaining_qubits():
    # |q0 q1 q2> = |0 1 1>, keep {0, 2}: result label = q0 + 2 q2 = 2
    psi = StateVector.basis(0b110, 3)
    out = partial_trace(psi.density(), [2, 0])
    assert out.entries[2, 2] == pytest.approx(1)


# --- apply ------------------------------------------------------------------

def test_apply_x():
    np.testing.assert_allclose(apply(X, KET0).amplitudes, KET1.amplitudes)


def test_apply_z_plus():
    np.testing.assert_allclose(apply(Z, KET_PLUS).amplitudes, KET_MINUS.amplitudes, atol=1e-15)


def test_apply_on_qubit_one():
    out = apply(X, StateVector.basis(0, 2), [1])
    np.testing.assert_allclose(out.amplitudes, StateVector.basis(0b10, 2).amplitudes)


def test_apply_arity_mismatch():
    with pytest.raises(ValueError):
        apply(X, StateVector.basis(0, 2), [0, 1])


def test_embed_operator_matches_loop_construction():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    op = Operator(a)
    got = embed_operator(op, [3, 1], 4)
    np.testing.assert_allclose(got, local_op(4, {(3, 1): a}), atol=1e-14)


# --- project ----------------------------------------------------------------

def test_project_pure():
    p, rho = project(KET0.density(), projector(KET0))
    assert p == pytest.approx(1)
    np.testing.assert_allclose(rho.entries, KET0.density().entries)


def test_project_mixed():
    p, rho = project(DensityOperator(np.eye(2) / 2), projector(KET1))
    assert p == pytest.approx(0.5)
    np.testing.assert_allclose(rho.entries, KET1.density().entries)


def test_project_impossible():
    with pytest.raises(ImpossibleBranch) as err:
        project(KET0.density(), projector(KET1))
    assert err.value.probability == pytest.approx(0, abs=1e-14)


def test_project_bell_on_info_and_alice():
    # brute force: <psi+| (rho_info (x) W reduced to qubit 1) |psi+>
    from accteleport.channels import ChannelKind, minkowski_state

    info = StateVector([0.6, 0.8])
    w = minkowski_state(ChannelKind.W)
    full = tensor(w.density(), info.density())
    bell = StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2))
    p, _ = project(full, projector(bell), [0, 1])
    vec = np.kron(w.amplitudes, info.amplitudes)
    P = local_op(4, {(0, 1): np.outer(bell.amplitudes, bell.amplitudes)})
    assert p == pytest.approx(float(np.real(vec.conj() @ P @ vec)), abs=1e-12)


# --- fidelity ---------------------------------------------------------------

def test_fidelity_examples():
    assert fidelity_pure(KET0, KET0.density()) == pytest.approx(1)
    assert fidelity_pure(KET0, KET1.density()) == pytest.approx(0)
    assert fidelity_pure(KET_PLUS, DensityOperator(np.eye(2) / 2)) == pytest.approx(0.5)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        fidelity_pure(KET0, StateVector.basis(0, 2).density())


def test_pauli_algebra():
    np.testing.assert_allclose(X.entries @ Y.entries, 1j * Z.entries)


# --- properties -------------------------------------------------------------

finite = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


def _density_from(vals, n):
    dim = 2 ** n
    a = np.array(vals[: 2 * dim * dim]).reshape(2, dim, dim)
    m = a[0] + 1j * a[1] + 1e-3 * np.eye(dim)
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=8, max_size=8), st.lists(finite, min_size=32, max_size=32))
def test_partial_trace_of_product_recovers_factor(va, vb):
    ra, rb = _density_from(va, 1), _density_from(vb, 2)
    joint = tensor(DensityOperator(rb), DensityOperator(ra))  # ra on qubit 0
    np.testing.assert_allclose(partial_trace(joint, {0}).entries, ra, atol=1e-12)
    np.testing.assert_allclose(partial_trace(joint, {1, 2}).entries, rb, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=32, max_size=32), st.lists(finite, min_size=32, max_size=32))
def test_unitary_preserves_trace(vr, vu):
    rho = DensityOperator(_density_from(vr, 2))
    a = np.array(vu).reshape(2, 4, 4)
    q, _ = np.linalg.qr(a[0] + 1j * a[1] + 4 * np.eye(4))
    out = apply(Operator(q, "unitary"), rho)
    assert abs(out.trace - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=128, max_size=128), st.integers(0, 2))
def test_projective_family_probabilities_sum_to_one(vals, q):
    rho = DensityOperator(_density_from(vals, 3))
    total = 0.0
    for ket in (KET_PLUS, KET_MINUS):
        try:
            p, _ = project(rho, projector(ket), [q])
        except ImpossibleBranch as exc:
            p = exc.probability
        total += p
    assert abs(total - 1) < 1e-10


def test_bell_projectors_complete():
    from accteleport.protocol import BellOutcome, bell_projector

    s = sum(bell_projector(b).entries for b in BellOutcome)
    np.testing.assert_allclose(s, np.eye(4), atol=1e-12)
