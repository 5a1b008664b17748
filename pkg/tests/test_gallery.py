import json
from pathlib import Path

import numpy as np
import pytest

from woldlab.dirichlet import recover_measure, verify_model_equivalence
from woldlab.errors import InputError, UnknownExample
from woldlab.gallery import GALLERY, ExampleSpec, make_example, phase_permutation
from woldlab.measures import deviation, make_measure
from woldlab.operators import check_left_inverse_commuting, check_toral_two_isometry, check_two_isometry
from woldlab.subspaces import distance, wandering_kernel
from woldlab.wold import dual_tuple, structural_decomposition_pair, wold_single, wold_tuple

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "gallery"

NAMES = sorted(GALLERY)


def scalar_measure(coefficients, coeff_dim):
    return make_measure("trig_density", len(coefficients) - 1, coeff_dim, coefficients=coefficients)


@pytest.fixture(params=NAMES)
def built(request):
    return make_example(request.param)


def test_dimension(built):
    for T in built.operators:
        assert T.matrix.shape == (built.expectation["dim"],) * 2


def test_data_files_match_registry(built):
    record = json.loads((DATA_DIR / f"{built.name}.json").read_text(encoding="utf-8"))
    assert record["params"] == GALLERY[built.name].defaults
    assert record["expectation"] == json.loads(json.dumps(built.expectation))


def test_phase_permutation_is_unitary():
    u = phase_permutation(5)
    assert np.allclose(u.conj().T @ u, np.eye(5))
    assert set(np.round(np.abs(u.ravel()))) == {0.0, 1.0}


def test_unknown_example():
    with pytest.raises(UnknownExample):
        make_example("poisson-pair")


def test_unknown_parameter():
    with pytest.raises(InputError):
        make_example(ExampleSpec(name="hardy-shift", params={"depth": 3}))


def test_parameters_are_coerced():
    example = make_example(ExampleSpec(name="hardy-shift", params={"cap": "3"}))
    assert example.params == {"cap": 3}
    assert example.expectation["dim"] == 4
    with pytest.raises(InputError):
        make_example(ExampleSpec(name="hardy-shift", params={"cap": "three"}))


def test_two_isometry(built, policy):
    for T, expected in zip(built.operators, built.expectation.get("two_isometry", [])):
        assert (check_two_isometry(T, policy) < policy.residual_tol) == expected


def test_left_inverse_commuting(built, policy):
    if "lic" not in built.expectation:
        pytest.skip("no commutation expectation")
    assert check_left_inverse_commuting(built.operators, policy).passed == built.expectation["lic"]


def test_toral(built, policy):
    if "toral" not in built.expectation:
        pytest.skip("no toral expectation")
    assert check_toral_two_isometry(*built.operators, policy).passed == built.expectation["toral"]


def test_model_verdict(built, policy):
    if "model" not in built.expectation:
        pytest.skip("no model expectation")
    report = verify_model_equivalence(*built.operators, policy=policy, force=True)
    assert report.passed == built.expectation["model"]


def test_single_decompositions(built, policy):
    passes = built.expectation.get("wold_passes", [True] * len(built.operators))
    for T, dims, ok in zip(built.operators, built.expectation.get("wold", []), passes):
        report = wold_single(T, policy)
        assert list(report.dims) == dims
        assert report.passed == ok


def test_tuple_pieces(built, policy):
    if "pieces" not in built.expectation:
        pytest.skip("no tuple expectation")
    report = wold_tuple(built.operators, policy)
    assert report.dims == built.expectation["pieces"]
    assert report.passed


def test_structural_blocks(built, policy):
    if "structural" not in built.expectation:
        pytest.skip("no structural expectation")
    report = structural_decomposition_pair(*built.operators, policy)
    assert report.dims == built.expectation["structural"]
    assert report.passed


def test_measures(built, policy):
    measures = built.expectation.get("measures")
    if not measures:
        pytest.skip("no measure expectation")
    if len(built.operators) == 1:
        T = built.operators[0]
        window = len(measures["mu"]) - 1
        recovered = {"mu": recover_measure(T, wandering_kernel(T, policy), window, policy)}
    elif "nu1" in measures:
        recovered = structural_decomposition_pair(*built.operators, policy).measures
    else:
        report = verify_model_equivalence(*built.operators, policy=policy)
        recovered = {"mu1": report.recovered_mu1, "mu2": report.recovered_mu2}
    for name, coefficients in measures.items():
        mu = recovered[name]
        assert deviation(mu, scalar_measure(coefficients, mu.coeff_dim)) < 1e-8


def test_cauchy_duals_share_the_decomposition(built, policy):
    if "wold" not in built.expectation:
        pytest.skip("no single decomposition expectation")
    for T, dual in zip(built.operators, dual_tuple(built.operators, policy)):
        report = wold_single(T, policy)
        if not report.passed:
            continue
        mirrored = wold_single(dual, policy)
        assert mirrored.passed
        assert distance(report.h_inf, mirrored.h_inf) < 1e-8
        assert distance(report.wandering, mirrored.wandering) < 1e-8
