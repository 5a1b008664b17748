import numpy as np
import pytest

from woldlab.dirichlet import (
    ModelSpec,
    assemble_gram,
    cauchy_dual_defect,
    kernel_eval,
    model_space,
    mz_operators,
    one_variable_gram_residual,
    recover_measure,
    reproducing_residual,
    verify_model_equivalence,
)
from woldlab.errors import (
    CapTooSmall,
    EmptyWanderingSubspace,
    GramNotPSD,
    PointOutsideDisc,
    PrerequisiteFailed,
    WindowTooSmall,
)
from woldlab.graded import GradedSpace, shift_operator
from woldlab.measures import OpValuedMeasure, deviation, make_measure, random_atom_measure
from woldlab.operators import check_toral_two_isometry
from woldlab.subspaces import Subspace


def test_lebesgue_gram_is_diagonal():
    mu = make_measure("lebesgue", 6)
    space = model_space(mu, mu, 6)
    expected = [1 + idx.m + idx.n for idx in space.indices]
    assert np.allclose(space.gram, np.diag(expected))


def test_atom_entries_follow_the_monomial_formula():
    mu = make_measure("atoms", 3, atoms=[(0.7, 2.0)])
    space = model_space(mu, None, 3)
    g = space.gram
    assert np.isclose(g[space.position((2, 0)), space.position((1, 0))], 2 * np.exp(-0.7j))
    assert np.isclose(g[space.position((3, 0)), space.position((1, 0))], 2 * np.exp(-1.4j))
    assert np.isclose(g[space.position((3, 0)), space.position((2, 0))], 4 * np.exp(-0.7j))
    assert np.isclose(g[space.position((2, 0)), space.position((2, 0))], 5.0)


def test_mixed_monomials_are_orthogonal():
    mu = make_measure("atoms", 3, atoms=[(0.3, 1.0), (2.0, 0.5)])
    space = model_space(mu, mu, 3)
    assert space.gram[space.position((1, 0)), space.position((0, 1))] == 0
    assert space.gram[space.position((2, 1)), space.position((1, 2))] == 0


def test_short_window_is_rejected():
    with pytest.raises(WindowTooSmall):
        model_space(make_measure("lebesgue", 1), None, 4)


def test_inconsistent_moments_fail_positivity():
    mu = OpValuedMeasure.from_nonnegative([1.0, 5.0])
    with pytest.raises(GramNotPSD):
        model_space(mu, None, 2)


def test_two_variable_axis_matches_one_variable_gram():
    mu1 = make_measure("atoms", 4, atoms=[(1.1, 0.8)])
    mu2 = make_measure("lebesgue", 4, scale=2.0)
    pair = model_space(mu1, mu2, 4)
    single = model_space(mu1, None, 4)
    axis = [pair.position((m, 0)) for m in range(5)]
    assert np.allclose(pair.gram[np.ix_(axis, axis)], single.gram)


def _measures(rng):
    return [
        make_measure("lebesgue", 4, scale=1.5),
        make_measure("atoms", 4, atoms=[(0.4, 1.0)]),
        make_measure("atoms", 4, atoms=[(-2.0, 0.3), (1.0, 1.2)]),
        random_atom_measure(rng, 4, coeff_dim=2, n_atoms=2),
    ]


def test_recovered_measures_match_the_construction(rng, policy):
    for mu in _measures(rng):
        other = make_measure("lebesgue", 4, mu.coeff_dim, scale=0.5)
        space = model_space(mu, other, 5, policy)
        t1, t2 = mz_operators(space)
        e = Subspace(space.degree_zero_frame(), space, policy)
        assert deviation(recover_measure(t1, e, 3, policy), mu, 3) < 1e-8
        assert deviation(recover_measure(t2, e, 3, policy), other, 3) < 1e-8


def test_recovery_window_is_bounded_by_headroom(policy):
    space = GradedSpace.hardy(3)
    t1, _ = mz_operators(space)
    e = Subspace(space.degree_zero_frame(), space, policy)
    with pytest.raises(CapTooSmall):
        recover_measure(t1, e, 3, policy)


def test_recovery_checks_two_isometry(example, policy):
    t1, t2 = example("bergman-pair").operators
    e = Subspace(t1.space.degree_zero_frame(), t1.space, policy)
    with pytest.raises(PrerequisiteFailed):
        recover_measure(t1, e, 1, policy)


def test_verify_dirichlet_pair(example, policy):
    report = verify_model_equivalence(*example("dirichlet-pair").operators, policy=policy)
    assert report.cap == 4
    assert report.gram_residual < 1e-10
    assert report.intertwining_residual < 1e-10
    assert report.separation_residual < 1e-10
    assert report.dictionary_full_rank
    assert report.passed


def test_verify_matrix_valued_pair(example, policy):
    report = verify_model_equivalence(*example("random-atom-pair", cap=3, coeff_dim=2).operators, policy=policy)
    assert report.coeff_dim == 2
    assert report.gram_residual < 1e-9
    assert report.passed


def test_perturbed_pair_needs_force(example, policy):
    ops = example("perturbed-pair").operators
    with pytest.raises(PrerequisiteFailed):
        verify_model_equivalence(*ops, policy=policy)
    forced = verify_model_equivalence(*ops, policy=policy, force=True)
    assert not forced.prerequisites_passed
    assert forced.gram_residual > 1e-3
    assert not forced.passed


def test_unitary_pair_has_no_wandering_subspace(example, policy):
    with pytest.raises(EmptyWanderingSubspace):
        verify_model_equivalence(*example("unitary-pair").operators, policy=policy)


def test_kernel_reproduces_point_values(rng):
    mu = make_measure("atoms", 4, atoms=[(0.2, 1.0), (2.5, 0.7)])
    space = model_space(mu, make_measure("lebesgue", 4), 4)
    coeffs = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    for w in [(0.0, 0.0), (0.3 + 0.2j, -0.5), (0.9j, 0.1)]:
        assert reproducing_residual(space, coeffs, w) < 1e-10


def test_kernel_is_hermitian_symmetric():
    space = model_space(make_measure("lebesgue", 3), make_measure("atoms", 3, atoms=[(1.0, 1.0)]), 3)
    z, w = (0.2 - 0.1j, 0.4), (-0.3j, 0.6 + 0.1j)
    assert np.allclose(kernel_eval(space, z, w), kernel_eval(space, w, z).conj().T)


def test_hardy_kernel_at_origin():
    assert np.allclose(kernel_eval(GradedSpace.hardy(4), (0, 0), (0, 0)), [[1.0]])


def test_kernel_rejects_points_outside_the_disc():
    with pytest.raises(PointOutsideDisc):
        kernel_eval(GradedSpace.hardy(2), (1.0, 0.0), (0.0, 0.0))


def test_one_variable_gram_residual(policy):
    mu = make_measure("atoms", 4, atoms=[(0.5, 1.0)])
    space = model_space(mu, None, 5, policy)
    T = shift_operator(space)
    e = Subspace(space.degree_zero_frame(), space, policy)
    assert one_variable_gram_residual(T, e, mu, 5) < 1e-12
    recovered = recover_measure(T, e, 4, policy)
    assert one_variable_gram_residual(T, e, recovered, 5) < 1e-10


def test_assemble_gram_shape():
    mu = make_measure("zero", 2, coeff_dim=3)
    assert assemble_gram(ModelSpec(mu, mu, 2)).shape == (18, 18)


def test_cauchy_dual_defect():
    assert max(cauchy_dual_defect(make_measure("lebesgue", 6), [3, 4, 5, 6])) < 1e-12
    defects = cauchy_dual_defect(make_measure("atoms", 6, atoms=[(0.0, 1.0)]), [3, 4, 5, 6])
    assert len(defects) == 3
    assert all(d >= 0 for d in defects)
    with pytest.raises(CapTooSmall):
        cauchy_dual_defect(make_measure("lebesgue", 6), [4])


def test_model_pairs_are_toral_two_isometries(rng, policy):
    for _ in range(50):
        d = int(rng.integers(1, 4))
        space = model_space(random_atom_measure(rng, 5, d), random_atom_measure(rng, 5, d), 5, policy)
        report = check_toral_two_isometry(*mz_operators(space), policy)
        assert report.residual < 1e-10
        assert report.commutator_residual < 1e-10
