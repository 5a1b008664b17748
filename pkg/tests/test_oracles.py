import numpy as np
import pytest

from woldlab.dirichlet import model_space
from woldlab.errors import InputError, UnsupportedMeasureKind
from woldlab.gallery import GALLERY, hardy_shift, make_example, unitary
from woldlab.measures import make_measure
from woldlab.operators import DenseOperator, direct_sum
from woldlab.oracles import brute_force_wold_oracle, dirichlet_integral_oracle, local_dirichlet_integral
from woldlab.wold import wold_single


def test_oracle_on_unitary():
    assert brute_force_wold_oracle(unitary(4)) == (4, 0)


def test_oracle_on_hardy_shift():
    assert brute_force_wold_oracle(hardy_shift(5)) == (0, 6)


def test_oracle_on_unitary_plus_shift():
    assert brute_force_wold_oracle(direct_sum(unitary(3), hardy_shift(4))) == (3, 5)


def test_oracle_rejects_large_operators():
    with pytest.raises(InputError):
        brute_force_wold_oracle(DenseOperator.on(np.eye(65)))


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_wold_dims_agree_with_oracle(name, policy):
    example = make_example(name)
    for T in example.operators:
        if T.matrix.shape[0] > 64:
            continue
        assert wold_single(T, policy).dims == brute_force_wold_oracle(T)


def gram_norm(coefficients, mu):
    space = model_space(mu, None, len(coefficients) - 1)
    a = np.asarray(coefficients, dtype=complex)
    return float(np.real(a.conj() @ space.gram @ a))


def test_dirichlet_integral_examples():
    lebesgue = make_measure("lebesgue", 4)
    assert dirichlet_integral_oracle([0, 0, 1], lebesgue) == pytest.approx(3.0)
    for mu in (lebesgue, make_measure("atoms", 4, atoms=[(0.6, 2.0)]), make_measure("zero", 4)):
        assert dirichlet_integral_oracle([1], mu) == pytest.approx(1.0)
    atom = make_measure("atoms", 2, atoms=[(0.0, 1.0)])
    value = dirichlet_integral_oracle([1, 1], atom)
    assert value == pytest.approx(3.0)
    assert abs(value - gram_norm([1, 1], atom)) < 1e-10


@pytest.mark.parametrize(
    "mu",
    [
        make_measure("lebesgue", 6),
        make_measure("lebesgue", 6, scale=0.3),
        make_measure("atoms", 6, atoms=[(1.3, 1.0)]),
        make_measure("atoms", 6, atoms=[(-0.4, 2.5)]),
    ],
)
def test_oracle_matches_gram_quadratic_form(mu):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        degree = int(rng.integers(0, 7))
        a = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
        expected = gram_norm(a, mu)
        worst = max(worst, abs(dirichlet_integral_oracle(a, mu) - expected) / expected)
    assert worst < 1e-10


def test_local_integral_is_the_atom_term(rng):
    a = rng.normal(size=5) + 1j * rng.normal(size=5)
    atom = make_measure("atoms", 4, atoms=[(2.2, 1.0)])
    hardy = float(np.sum(np.abs(a) ** 2))
    assert local_dirichlet_integral(a, 2.2) == pytest.approx(dirichlet_integral_oracle(a, atom) - hardy)


def test_local_integral_of_constants_vanishes():
    assert local_dirichlet_integral([4.0], 1.0) == 0.0


@pytest.mark.parametrize(
    "mu",
    [
        make_measure("atoms", 3, atoms=[(0.1, 1.0), (2.0, 1.0)]),
        make_measure("trig_density", 1, coefficients=[1.0, 0.25]),
        make_measure("lebesgue", 3, coeff_dim=2),
    ],
)
def test_unsupported_measures(mu):
    with pytest.raises(UnsupportedMeasureKind):
        dirichlet_integral_oracle([1, 1], mu)


def test_empty_polynomial():
    with pytest.raises(InputError):
        dirichlet_integral_oracle([], make_measure("zero", 1))
