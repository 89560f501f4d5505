import math

import numpy as np
import pytest
from hypothesis import given, settings

from qxot import linalg as la
from qxot import measurements as m
from qxot.cheating import (
    alice_test_certificate,
    bob_cheat_closed_form,
    family_ensemble,
    reversed_alice_ensemble,
)
from qxot.states import CYCLIC_LABELS, QUTRIT_PARAMS, OPTIMAL_CORNERS, OverlapParams, qutrit_states

from _strategies import feasible_params, realizable_params


@pytest.fixture(scope="module")
def qutrit():
    return dict(zip(CYCLIC_LABELS, qutrit_states()))


@pytest.fixture(scope="module")
def qutrit_ensemble():
    return m.StateEnsemble.from_kets(qutrit_states(), labels=CYCLIC_LABELS)


def expect(op, ket):
    return np.vdot(ket, op @ ket).real


def test_table_one_unambiguity(qutrit):
    povm = m.elimination_povm()
    pa = povm.operator((0, 0))
    assert abs(expect(pa, qutrit["11"])) < 1e-15
    assert abs(expect(pa, qutrit["10"])) < 1e-15
    assert expect(pa, qutrit["00"]) == pytest.approx(1 / 3)
    for outcome in povm.labels:
        for lab in m.eliminated_states(outcome):
            assert abs(expect(povm.operator(outcome), qutrit[lab])) < 1e-15
        assert len(m.eliminated_states(outcome)) == 2


def test_table_one_completeness():
    povm = m.elimination_povm()
    assert np.allclose(sum(povm.operators), np.eye(3))
    assert povm.completeness_residual() < 1e-15
    assert [m.ELIMINATION_NAMES[lab] for lab in povm.labels] == list("ABCDEF")


def test_every_elimination_outcome_has_probability_one_third(qutrit):
    povm = m.elimination_povm()
    for lab, ket in qutrit.items():
        probs = dict(zip(povm.labels, povm.probabilities(ket)))
        for b in range(3):
            v = m.value_of_bit(lab, b)
            assert probs[(b, v)] == pytest.approx(1 / 3)
            assert probs[(b, 1 - v)] == pytest.approx(0, abs=1e-15)


def test_wrong_normalisation_fails_validation(monkeypatch):
    monkeypatch.setattr(m, "ELIMINATION_NORMALIZATION", 0.3)
    with pytest.raises(m.InvalidPovmError, match="identity"):
        m.elimination_povm()
    assert m.elimination_povm(check=False).completeness_residual() > 0.1


def test_povm_validation():
    with pytest.raises(m.InvalidPovmError, match="positive"):
        m.Povm((np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])), (0, 1))
    with pytest.raises(m.InvalidPovmError, match="identity"):
        m.Povm((np.eye(2) / 3, np.eye(2) / 3), (0, 1))
    with pytest.raises(m.InvalidPovmError, match="distinct"):
        m.Povm((np.eye(2) / 2, np.eye(2) / 2), (0, 0))


def test_ensemble_validation():
    with pytest.raises(ValueError):
        m.StateEnsemble((np.eye(2) / 2,), (0.5,), ("a",))
    with pytest.raises(ValueError):
        m.StateEnsemble((np.eye(2),), (1.0,), ("a",))


def test_srm_on_qutrit_family(qutrit_ensemble, qutrit):
    srm = m.square_root_measurement(qutrit_ensemble)
    assert srm.labels == CYCLIC_LABELS
    for lab in CYCLIC_LABELS:
        assert np.max(np.abs(srm.operator(lab) - 0.75 * la.projector(qutrit[lab]))) < 1e-12
    assert m.success_probability(srm, qutrit_ensemble) == pytest.approx(0.75, abs=1e-12)


def test_srm_on_orthonormal_ensemble():
    e = m.StateEnsemble.from_kets([la.basis(3, k) for k in range(3)])
    srm = m.square_root_measurement(e)
    for k, op in enumerate(srm.operators):
        assert np.allclose(op, la.projector(la.basis(3, k)))
    assert m.success_probability(srm, e) == pytest.approx(1.0)


def test_srm_adds_residual_outcome():
    e = m.StateEnsemble.from_kets([la.basis(3, 0), la.basis(3, 1)])
    srm = m.square_root_measurement(e)
    assert srm.labels[-1] == "residual"
    assert np.allclose(srm.operator("residual"), la.projector(la.basis(3, 2)))


def test_srm_matches_closed_form_off_the_qutrit_point():
    p = OverlapParams(1 / 6, 0, -1 / 6)
    e = family_ensemble(p)
    assert m.success_probability(m.square_root_measurement(e), e) == pytest.approx(
        bob_cheat_closed_form(p), abs=1e-10
    )


def test_srm_rejects_unequal_priors_and_mixed_states():
    with pytest.raises(ValueError, match="equal priors"):
        m.square_root_measurement(m.StateEnsemble.from_kets([la.basis(2, 0), la.basis(2, 1)], priors=[0.3, 0.7]))
    with pytest.raises(ValueError, match="pure"):
        m.square_root_measurement(m.StateEnsemble((np.eye(2) / 2, np.eye(2) / 2), (0.5, 0.5), (0, 1)))


def test_success_with_sets_of_correct_outcomes(qutrit_ensemble):
    povm = m.elimination_povm()
    correct = {
        lab: frozenset(o for o in povm.labels if lab not in m.eliminated_states(o)) for lab in CYCLIC_LABELS
    }
    assert m.success_probability(povm, qutrit_ensemble, correct) == pytest.approx(1.0)


def test_success_rejects_unmapped_state(qutrit_ensemble):
    with pytest.raises(KeyError):
        m.success_probability(m.elimination_povm(), qutrit_ensemble, {"00": (0, 0)})


def test_reversed_cheat_measurement_value():
    e = reversed_alice_ensemble()
    assert m.success_probability(m.reversed_cheat_povm(), e) == pytest.approx(0.5)
    assert m.success_probability(m.computational_basis_povm(3), e) == pytest.approx(0.5)


def test_certificates_for_claimed_optimal_measurements(qutrit_ensemble):
    cert = m.min_error_certificate(m.square_root_measurement(qutrit_ensemble), qutrit_ensemble)
    assert cert.optimal and cert.max_violation <= 1e-9
    e = reversed_alice_ensemble()
    assert m.min_error_certificate(m.reversed_cheat_povm(), e).optimal
    assert m.min_error_certificate(m.computational_basis_povm(3), e).optimal


def test_trivial_measurement_fails_certificate(qutrit_ensemble):
    trivial = m.Povm(tuple(np.eye(3) / 4 for _ in range(4)), CYCLIC_LABELS)
    cert = m.min_error_certificate(trivial, qutrit_ensemble)
    assert not cert.optimal
    assert cert.success == pytest.approx(0.25)


@pytest.mark.parametrize("index", range(4))
def test_rotated_outcome_fails_certificate(qutrit_ensemble, index):
    srm = m.square_root_measurement(qutrit_ensemble)
    bent = m.rotated_outcome(srm, index, 0.05)
    cert = m.min_error_certificate(bent, qutrit_ensemble)
    assert not cert.optimal
    assert cert.max_violation > 1e-4


def test_srm_certificate_on_grid():
    vals = np.linspace(-1 / 3, 1 / 3, 5)
    points = [OverlapParams(x, 0, g) for x in vals for g in vals[:4]]
    assert len(points) == 20
    for p in points:
        e = family_ensemble(p)
        assert m.min_error_certificate(m.square_root_measurement(e), e).optimal, p


@settings(max_examples=40, deadline=None)
@given(realizable_params())
def test_srm_success_invariant_under_negating_f(p):
    def value(q):
        e = family_ensemble(q)
        return m.success_probability(m.square_root_measurement(e), e)

    assert value(p) == pytest.approx(value(p.negate_f()), abs=1e-9)


def test_four_outcome_measurement_certified_at_corners():
    for p in OPTIMAL_CORNERS:
        assert alice_test_certificate(p).optimal, p


@settings(max_examples=40, deadline=None)
@given(feasible_params())
def test_four_outcome_measurement_certified_when_g_dominates(p):
    if abs(p.g) < abs(p.f):
        p = OverlapParams(p.re_f * abs(p.g) / max(abs(p.f), 1e-300), p.im_f * abs(p.g) / max(abs(p.f), 1e-300), p.g)
    assert alice_test_certificate(p).max_violation <= 1e-9


def test_four_outcome_measurement_not_optimal_at_generic_point():
    # Documented counterexample: a rank-two read-out beats the four-outcome measurement here.
    cert = alice_test_certificate(OverlapParams(0.3, 0, -0.1))
    assert not cert.optimal
    assert cert.max_violation == pytest.approx(0.05, abs=1e-9)


def test_projective_lift():
    xi = m.six_dim_projective_lift()
    vecs = np.array(list(xi.values()))
    assert np.allclose(vecs.conj() @ vecs.T, np.eye(6), atol=1e-12)
    assert np.abs(np.vdot(xi["A"], xi["B"])) < 1e-15
    assert np.allclose(sum(la.projector(v) for v in xi.values()), np.eye(6))
    povm = m.elimination_povm()
    for lab, name in m.ELIMINATION_NAMES.items():
        block = la.projector(xi[name])[:3, :3]
        assert np.max(np.abs(block - povm.operator(lab))) < 1e-12


def test_receiver_and_test_measurements_are_valid():
    for povm in (m.reversed_receiver_povm(), m.reversed_cheat_povm(), m.alice_test_povm(), m.computational_basis_povm(4)):
        assert povm.completeness_residual() < 1e-12
    h = m.hadamard_walsh()
    assert np.allclose(h @ h, np.eye(4))


def test_conjugated_povm_stays_valid():
    u = la.hermitian_eig(np.array([[0, 1, 0], [1, 0, 1j], [0, -1j, 0]]))[1]
    p = m.elimination_povm().conjugated(u)
    assert p.completeness_residual() < 1e-12


def test_probabilities_for_density_matrix_and_ket(qutrit):
    povm = m.elimination_povm()
    ket = qutrit["01"]
    assert np.allclose(povm.probabilities(ket), povm.probabilities(la.projector(ket)))
    assert math.isclose(povm.probabilities(ket).sum(), 1.0)
