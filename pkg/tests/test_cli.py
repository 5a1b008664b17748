import json

import numpy as np
import pytest

from woldlab.cli import build_parser, run
from woldlab.config import ENV_RESIDUAL_TOL


@pytest.fixture
def invoke(capsys):
    """Run the CLI and return ``(exit_code, parsed JSON report)``."""

    def call(*argv):
        code = run(list(argv))
        out = capsys.readouterr().out
        return code, json.loads(out)

    return call


def test_decompose_four_block(invoke, example):
    code, report = invoke("decompose", "--gallery", "four-block", "--report", "json")
    assert code == 0
    assert report["schema"] == "woldlab/1"
    assert report["passed"]
    assert report["pieces"] == example("four-block").expectation["pieces"]
    assert float(report["residuals"]["orthogonality"]) < 1e-8


def test_decompose_hardy_bidisc_is_a_doubly_shift_pair(invoke):
    code, report = invoke("decompose", "--gallery", "hardy-bidisc")
    assert code == 0
    assert report["pieces"] == {"00": 0, "01": 0, "10": 0, "11": 15}


def test_decompose_single_with_param_override(invoke):
    code, report = invoke("decompose", "--gallery", "hardy-shift", "--param", "cap=3")
    assert code == 0
    assert report["dims"] == {"h_inf": 0, "wandering": 4}
    assert report["flags"]["truncation_limited"] is True


def test_cap_flag_matches_param_override(invoke):
    _, by_param = invoke("decompose", "--gallery", "hardy-shift", "--param", "cap=3")
    _, by_flag = invoke("decompose", "--gallery", "hardy-shift", "--cap", "3")
    assert by_flag["dims"] == by_param["dims"]
    code, _ = invoke("check", "--gallery", "dirichlet-shift", "--cap", "6", "--identity", "two-isometry")
    assert code == 0


def test_dual_of_atom_shift_keeps_the_decomposition(invoke):
    code, report = invoke("decompose", "--gallery", "dirichlet-shift", "--param", "mu=atom:0.7", "--mode", "dual")
    assert code == 0
    assert report["dims"] == {"h_inf": 0, "wandering": 5}


def test_cap_flag_is_ignored_without_cap_param(invoke):
    code, report = invoke("decompose", "--gallery", "unitary", "--cap", "7")
    assert code == 0
    assert report["dims"] == {"h_inf": 4, "wandering": 0}


def test_decompose_non_left_invertible_matrix(invoke, tmp_path):
    path = tmp_path / "zero.json"
    path.write_text(json.dumps({"kind": "dense", "shape": [2, 2], "entries": [[[0, 0]] * 4]}), encoding="utf-8")
    code, report = invoke("decompose", "--op", str(path))
    assert code == 2
    assert report["error"]["type"] == "NotLeftInvertible"
    assert not report["passed"]


def test_decompose_structural_mode(invoke, example):
    code, report = invoke("decompose", "--gallery", "structural-mix", "--mode", "structural")
    assert code == 0
    assert report["dims"] == example("structural-mix").expectation["structural"]
    assert set(report["measures"]) == {"mu1", "nu1", "nu2"}


def test_decompose_dual_mode(invoke):
    code, report = invoke("decompose", "--gallery", "dirichlet-pair", "--mode", "dual")
    assert code == 0
    assert report["pieces"]["11"] == 15


def test_failed_prerequisites_exit_2_unless_forced(invoke):
    code, report = invoke("decompose", "--gallery", "perturbed-pair")
    assert code == 2
    assert report["error"]["type"] == "PrerequisiteFailed"
    code, report = invoke("decompose", "--gallery", "perturbed-pair", "--force")
    assert report["error"] is None
    assert "lic" in report["residuals"]


def test_check_toral_on_dirichlet_pair(invoke):
    code, report = invoke("check", "--gallery", "dirichlet-pair", "--identity", "toral")
    assert code == 0
    toral = [float(v) for k, v in report["residuals"].items() if k.startswith("toral[")]
    assert len(toral) == 4
    assert max(toral) < 1e-10


def test_check_two_isometry_on_scalar(invoke):
    code, report = invoke("check", "--gallery", "scalar-2I", "--identity", "two-isometry")
    assert code == 2
    assert float(report["residuals"]["two_isometry[1]"]) == pytest.approx(9.0)


def test_check_lic_on_hardy_bidisc(invoke):
    code, report = invoke("check", "--gallery", "hardy-bidisc", "--identity", "lic")
    assert code == 0
    assert set(report["residuals"]) == {"lic[1,2]", "lic[2,1]", "commutator[1,2]"}


def test_experimental_converse_is_reported_not_gated(invoke):
    code, report = invoke("check", "--gallery", "dirichlet-pair", "--identity", "toral", "--experimental-converse")
    assert code == 0
    assert "converse.lic" in report["residuals"]


def test_negative_controls_exit_2(invoke):
    code, _ = invoke("check", "--gallery", "bergman-pair", "--identity", "toral")
    assert code == 2
    code, report = invoke("model", "verify", "--gallery", "perturbed-pair")
    assert code == 2
    assert float(report["residuals"]["gram"]) > 1e-3
    assert not report["flags"]["prerequisites_passed"]


def test_model_build_dumps_diagonal_gram(invoke, tmp_path):
    path = tmp_path / "g.json"
    code, report = invoke(
        "model", "build", "--mu1", "lebesgue", "--mu2", "lebesgue", "--cap", "4", "--dump-gram", str(path)
    )
    assert code == 0
    assert report["dims"]["dim"] == 15
    dump = json.loads(path.read_text(encoding="utf-8"))
    gram = np.array([complex(re, im) for re, im in dump["entries"]]).reshape(dump["shape"])
    degrees = [d for d in range(5) for _ in range(d + 1)]
    assert np.array_equal(gram, np.diag([1.0 + d for d in degrees]))


def test_model_build_npy_dump(invoke, tmp_path):
    path = tmp_path / "g.npy"
    code, _ = invoke("model", "build", "--mu1", "atom:0.5:2", "--cap", "3", "--dump-gram", str(path))
    assert code == 0
    assert np.load(path).shape == (4, 4)


def test_model_build_rejects_bad_measure(invoke):
    code, report = invoke("model", "build", "--mu1", "poisson", "--cap", "3")
    assert code == 3
    assert report["error"]["type"] == "UnsupportedMeasureKind"


def test_model_verify_dirichlet_pair(invoke):
    code, report = invoke("model", "verify", "--gallery", "dirichlet-pair")
    assert code == 0
    assert float(report["residuals"]["gram"]) < 1e-10
    assert report["dims"] == {"cap": 4, "coeff_dim": 1}


def test_model_recover_dirichlet_pair(invoke):
    code, report = invoke("model", "recover", "--gallery", "dirichlet-pair", "--window", "2")
    assert code == 0
    mu1 = np.array(report["measures"]["mu1"])
    assert mu1.shape == (3, 1, 2)
    assert np.allclose(mu1[:, 0, 0], [1.0, 0.0, 0.0], atol=1e-10)
    assert np.allclose(mu1[:, 0, 1], 0.0, atol=1e-10)


def test_unknown_gallery_entry_is_input_error(invoke):
    code, report = invoke("decompose", "--gallery", "nowhere")
    assert code == 3
    assert report["error"]["type"] == "UnknownExample"


def test_schema_violation_reports_pointer(invoke, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"kind": "graded", "mu1": {"kind": "zero", "window": 1}, "cap": -1}), encoding="utf-8")
    code, report = invoke("decompose", "--op", str(path))
    assert code == 3
    assert report["error"]["pointer"] == "/graded/cap"


def test_invalid_tolerance_is_input_error(invoke):
    code, report = invoke("check", "--gallery", "hardy-bidisc", "--tol-residual", "-1")
    assert code == 3
    assert report["error"]["pointer"] == "/policy/residual_tol"


def test_stabilization_cap_is_numeric_failure(invoke):
    code, report = invoke("decompose", "--gallery", "hardy-shift", "--max-iter", "1")
    assert code == 4
    assert report["error"]["type"] == "NoStabilization"


def test_reports_are_deterministic(capsys):
    argv = ["decompose", "--gallery", "random-atom-pair", "--seed", "3"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first


def test_environment_tolerance_is_echoed(invoke, monkeypatch):
    monkeypatch.setenv(ENV_RESIDUAL_TOL, "1e-6")
    _, report = invoke("check", "--gallery", "hardy-bidisc")
    assert report["policy"]["residual_tol"] == "9.9999999999999995e-07"


def test_text_report(capsys):
    assert run(["check", "--gallery", "hardy-bidisc", "--report", "text"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "lic[1,2]" in out


def test_output_file(tmp_path, capsys):
    target = tmp_path / "reports" / "out.json"
    assert run(["decompose", "--gallery", "unitary", "--output", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["dims"] == {"h_inf": 4, "wandering": 0}


def test_parser_requires_a_source():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["decompose"])
