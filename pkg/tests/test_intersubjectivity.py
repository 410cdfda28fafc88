import numpy as np
import pytest

from conftest import (
    pointer_meter,
    random_hermitian_with_outcomes,
    random_state,
)
from qmeasure import (
    PAULI_X,
    PAULI_Z,
    DimensionError,
    JointDistribution,
    MeasurementProcess,
    NonCommutingMetersError,
    PreconditionError,
    ValidationError,
    agreement_probability,
    as_povm,
    born_povm,
    check_commutation,
    compose,
    dilation_model,
    induced_povm,
    joint_distribution,
    pvm_from_observable,
    sample_outcomes,
    table_agreement,
    unsharp_qubit_povm,
    verify_oit,
    von_neumann_model,
)

SIGMA_Z_PVM = pvm_from_observable(PAULI_Z)
SIGMA_X_PVM = pvm_from_observable(PAULI_X)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
GROUND = np.array([1, 0], dtype=complex)


def _accurate_z_scenario(psi):
    return compose(psi, von_neumann_model(SIGMA_Z_PVM), von_neumann_model(SIGMA_Z_PVM))


def _unsharp_scenario(eta, psi):
    povm = unsharp_qubit_povm(eta)
    return compose(psi, dilation_model(povm), dilation_model(povm))


def test_compose_two_pointer_models_commute():
    js = _accurate_z_scenario(PLUS)
    assert js.max_commutator_norm < 1e-10
    assert check_commutation(js).commuting
    assert js.total_dim == 8


def test_compose_two_dilations_commute():
    js = _unsharp_scenario(0.8, GROUND)
    assert js.max_commutator_norm < 1e-9
    assert check_commutation(js).commuting


def test_compose_incompatible_observables_flagged_not_local():
    js = compose(PLUS, von_neumann_model(SIGMA_Z_PVM), von_neumann_model(SIGMA_X_PVM))
    check = check_commutation(js)
    assert not check.commuting
    assert check.max_commutator_norm == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(NonCommutingMetersError):
        joint_distribution(js)


def test_compose_dimension_mismatch():
    qutrit = pvm_from_observable(np.diag([1.0, 2.0, 3.0]).astype(complex))
    with pytest.raises(DimensionError):
        compose(PLUS, von_neumann_model(SIGMA_Z_PVM), von_neumann_model(qutrit))


def test_compose_respects_dimension_cap():
    with pytest.raises(DimensionError):
        compose(
            PLUS,
            von_neumann_model(SIGMA_Z_PVM),
            von_neumann_model(SIGMA_Z_PVM),
            max_dim=4,
        )


def test_joint_distribution_superposition_oracle():
    dist = joint_distribution(_accurate_z_scenario(PLUS))
    assert dist.outcomes1 == (-1.0, 1.0)
    assert max(abs(dist.probabilities[i, j] - (0.5 if i == j else 0.0))
               for i in range(2) for j in range(2)) < 1e-12


def test_joint_distribution_eigenstate_oracle():
    dist = joint_distribution(_accurate_z_scenario(GROUND))
    assert dist.probabilities[1, 1] == pytest.approx(1.0, abs=1e-12)
    assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-12)


def test_joint_distribution_unsharp_oracle():
    # P(x,y) = <0| Pi(x) Pi(y) |0> for the commuting eta = 0.8 effects
    dist = joint_distribution(_unsharp_scenario(0.8, GROUND))
    expected = np.array([[0.01, 0.09], [0.09, 0.81]])
    assert np.abs(dist.probabilities - expected).max() < 1e-9


def test_joint_distribution_marginals_match_induced_povms():
    for js in (_unsharp_scenario(0.6, PLUS), _accurate_z_scenario(PLUS)):
        dist = joint_distribution(js)
        born1 = born_povm(induced_povm(js.process1), js.psi)
        born2 = born_povm(induced_povm(js.process2), js.psi)
        assert dist.marginal1() == pytest.approx(born1.probabilities, abs=1e-9)
        assert dist.marginal2() == pytest.approx(born2.probabilities, abs=1e-9)


def test_swap_symmetry_transposes_the_table():
    p1 = von_neumann_model(SIGMA_Z_PVM)
    p2 = dilation_model(unsharp_qubit_povm(0.7))
    psi = np.array([0.6, 0.8j], dtype=complex)
    table12 = joint_distribution(compose(psi, p1, p2)).probabilities
    table21 = joint_distribution(compose(psi, p2, p1)).probabilities
    assert np.abs(table12 - table21.T).max() < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_oit_holds_for_pointer_models_of_random_observables(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 7))
    k = int(rng.integers(2, min(dim, 4) + 1))
    pvm = pvm_from_observable(random_hermitian_with_outcomes(rng, dim, k))
    psi = random_state(rng, dim)
    js = compose(psi, von_neumann_model(pvm), von_neumann_model(pvm))
    report = verify_oit(js, pvm)
    assert report.intersubjective
    assert report.off_diagonal_mass < 1e-9
    assert report.max_diagonal_deviation < 1e-9


def test_oit_qutrit_degenerate_oracle():
    pvm = pvm_from_observable(np.diag([3.0, 3.0, 7.0]).astype(complex))
    psi = np.ones(3, dtype=complex) / np.sqrt(3)
    js = compose(psi, von_neumann_model(pvm), von_neumann_model(pvm))
    report = verify_oit(js, pvm)
    assert report.intersubjective
    assert report.diagonal[3.0] == pytest.approx(2 / 3, abs=1e-12)
    assert report.diagonal[7.0] == pytest.approx(1 / 3, abs=1e-12)
    assert report.off_diagonal_mass == pytest.approx(0.0, abs=1e-12)


def test_oit_precondition_rejects_non_reproducing_process():
    trivial = MeasurementProcess(
        2, 2, GROUND.copy(), np.eye(4, dtype=complex), pointer_meter(2)
    )
    js = compose(PLUS, von_neumann_model(SIGMA_Z_PVM), trivial)
    with pytest.raises(PreconditionError):
        verify_oit(js, SIGMA_Z_PVM)


def test_oit_precondition_rejects_unsharp_processes():
    js = _unsharp_scenario(0.8, GROUND)
    with pytest.raises(PreconditionError):
        verify_oit(js, SIGMA_Z_PVM)


def test_agreement_is_one_under_oit_hypotheses():
    assert agreement_probability(_accurate_z_scenario(PLUS)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize(
    "eta,expected",
    [(0.0, 0.5), (0.25, 0.53125), (0.5, 0.625), (0.75, 0.78125), (0.8, 0.82), (1.0, 1.0)],
)
def test_agreement_curve_oracle(eta, expected):
    # closed form ((1+eta)^2 + (1-eta)^2) / 4 on the ground state
    assert agreement_probability(_unsharp_scenario(eta, GROUND)) == pytest.approx(
        expected, abs=1e-9
    )


def test_agreement_strictly_increases_with_sharpness():
    values = [agreement_probability(_unsharp_scenario(eta, GROUND))
              for eta in (0.0, 0.25, 0.5, 0.75, 1.0)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[0] == pytest.approx(0.5, abs=1e-12)
    assert values[-1] == pytest.approx(1.0, abs=1e-12)


def test_agreement_propagates_non_commuting_error():
    js = compose(PLUS, von_neumann_model(SIGMA_Z_PVM), von_neumann_model(SIGMA_X_PVM))
    with pytest.raises(NonCommutingMetersError):
        agreement_probability(js)


def test_sampling_is_deterministic_per_seed():
    js = _unsharp_scenario(0.8, GROUND)
    first = sample_outcomes(js, 500, seed=21)
    second = sample_outcomes(js, 500, seed=21)
    other = sample_outcomes(js, 500, seed=22)
    assert np.array_equal(first.pairs, second.pairs)
    assert not np.array_equal(first.pairs, other.pairs)
    assert first.counts.sum() == 500


def test_sampling_accurate_scenario_never_disagrees():
    js = _accurate_z_scenario(PLUS)
    result = sample_outcomes(js, 100_000, seed=3)
    assert np.all(result.pairs[:, 0] == result.pairs[:, 1])
    assert table_agreement(result.empirical) == pytest.approx(1.0, abs=1e-12)


def test_sampling_zero_mass_cells_never_drawn():
    js = _accurate_z_scenario(GROUND)
    result = sample_outcomes(js, 20_000, seed=9)
    assert result.counts[1, 1] == 20_000


def test_sampling_converges_to_the_joint_table():
    n = 100_000
    js = _unsharp_scenario(0.8, GROUND)
    analytic = joint_distribution(js).probabilities
    result = sample_outcomes(js, n, seed=17)
    sigma = np.sqrt(analytic * (1 - analytic) / n)
    assert np.all(np.abs(result.empirical.probabilities - analytic) <= 5 * sigma + 1e-12)
    assert table_agreement(result.empirical) == pytest.approx(0.82, abs=0.01)


def test_sample_count_gate():
    with pytest.raises(ValidationError):
        sample_outcomes(_accurate_z_scenario(PLUS), 0, seed=1)


def test_joint_distribution_invariant_gates():
    with pytest.raises(ValidationError):
        JointDistribution((0.0, 1.0), (0.0, 1.0), np.array([[0.6, 0.5], [0.0, -0.1]]))
    with pytest.raises(ValidationError):
        JointDistribution((0.0, 1.0), (0.0, 1.0), np.array([[0.3, 0.3], [0.3, 0.3]]))
    with pytest.raises(DimensionError):
        JointDistribution((0.0, 1.0), (0.0,), np.array([[0.5, 0.5]]))


def test_joint_distribution_clamps_rounding_noise():
    table = np.array([[0.5 + 2.5e-13, -5e-13], [0.0, 0.5 + 2.5e-13]])
    dist = JointDistribution((0.0, 1.0), (0.0, 1.0), table)
    assert dist.probabilities[0, 1] == 0.0
