import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from woldlab.errors import InputError, NotPSD, UnsupportedMeasureKind, WindowTooSmall
from woldlab.measures import (
    OpValuedMeasure,
    deviation,
    make_measure,
    parse_measure,
    psd_check,
    random_atom_measure,
)


def test_lebesgue_has_only_a_mean():
    mu = make_measure("lebesgue", 3, scale=2.5)
    assert mu.coefficient(0)[0, 0] == 2.5
    assert all(mu.coefficient(k)[0, 0] == 0 for k in (1, 2, 3, -3))


def test_atom_coefficients():
    mu = make_measure("atoms", 2, atoms=[(0.4, 2.0)])
    assert mu.coefficient(1)[0, 0] == pytest.approx(2.0 * np.exp(-0.4j))
    assert mu.coefficient(-2)[0, 0] == pytest.approx(2.0 * np.exp(0.8j))


def test_operator_valued_atom_keeps_weight():
    weight = np.array([[2.0, 1j], [-1j, 1.0]])
    mu = make_measure("atoms", 1, coeff_dim=2, atoms=[(0.0, weight)])
    assert np.allclose(mu.coefficient(0), weight)
    assert np.allclose(mu.coefficient(1), weight)


def test_symmetry_is_enforced():
    fourier = np.zeros((3, 1, 1), dtype=complex)
    fourier[2] = 1.0
    with pytest.raises(InputError):
        OpValuedMeasure(fourier)


def test_psd_certificate():
    assert psd_check(make_measure("atoms", 3, atoms=[(1.0, 1.0), (2.0, 0.5)])).passed
    bad = OpValuedMeasure.from_nonnegative([1.0, 5.0])
    certificate = psd_check(bad)
    assert certificate.lambda_min == pytest.approx(-4.0)
    assert not certificate.passed


def test_psd_check_needs_a_window():
    with pytest.raises(WindowTooSmall):
        psd_check(make_measure("lebesgue", 0))


def test_trig_density_is_validated():
    mu = make_measure("trig_density", 1, coefficients=[1.0, 0.5])
    assert mu.kind == "trig_density"
    with pytest.raises(NotPSD):
        make_measure("trig_density", 1, coefficients=[1.0, 2.0])
    with pytest.raises(WindowTooSmall):
        make_measure("trig_density", 2, coefficients=[1.0, 0.5])


def test_negative_weights_are_rejected():
    with pytest.raises(NotPSD):
        make_measure("atoms", 1, atoms=[(0.0, -1.0)])
    with pytest.raises(NotPSD):
        make_measure("lebesgue", 1, coeff_dim=2, weight=np.diag([1.0, -1.0]))


def test_unknown_kind():
    with pytest.raises(UnsupportedMeasureKind):
        make_measure("cantor", 2)


def test_window_access_and_truncation():
    mu = make_measure("atoms", 4, atoms=[(0.3, 1.0)])
    short = mu.truncate(2)
    assert short.window == 2
    assert deviation(mu, short) == 0.0
    with pytest.raises(WindowTooSmall):
        short.coefficient(3)
    with pytest.raises(WindowTooSmall):
        short.truncate(3)


def test_toeplitz_layout():
    mu = OpValuedMeasure.from_nonnegative([2.0, 0.5j])
    assert np.allclose(mu.toeplitz(), [[2.0, -0.5j], [0.5j, 2.0]])


@pytest.mark.parametrize(
    "text,kind,mean",
    [
        ("zero", "zero", 0.0),
        ("lebesgue", "lebesgue", 1.0),
        ("lebesgue:3", "lebesgue", 3.0),
        ("atom:1.5:2", "atoms", 2.0),
    ],
)
def test_parse_measure(text, kind, mean):
    mu = parse_measure(text, 3)
    assert mu.kind == kind
    assert mu.window == 3
    assert mu.coefficient(0)[0, 0] == pytest.approx(mean)


@pytest.mark.parametrize("text", ["atom", "lebesgue:x", "poisson:1", "zero:1"])
def test_parse_measure_rejects(text):
    with pytest.raises(InputError):
        parse_measure(text, 2)


@seed(5)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=3))
def test_random_atom_measures_are_positive(state, coeff_dim):
    mu = random_atom_measure(np.random.default_rng(state), 4, coeff_dim)
    assert mu.coeff_dim == coeff_dim
    assert psd_check(mu).passed
