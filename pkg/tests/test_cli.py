import json

import numpy as np
import pytest
from typer.testing import CliRunner

from tests.conftest import write_csv
from vertisplit import __version__
from vertisplit.cli.main import app
from vertisplit.core import validation
from vertisplit.core.fixtures import two_block_fixture
from vertisplit.core.validation import CheckResult

runner = CliRunner()


def report_of(output: str) -> dict:
    """Premier objet JSON de la sortie (stdout), quelle que soit la place des messages stderr."""
    lines = output.splitlines(keepends=True)
    start = next(i for i, line in enumerate(lines) if line.rstrip() == "{")
    return json.JSONDecoder().raw_decode("".join(lines[start:]))[0]


@pytest.fixture
def block_csv(tmp_path):
    ds = two_block_fixture(3)
    return write_csv(tmp_path / "blocks.csv", ds.dense(), names=ds.names)


def split_args(input_path, output, *extra):
    return ["split", "--input", str(input_path), "--output", str(output), *extra]


def test_version():
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_help_lists_defaults():
    result = runner.invoke(app, ["split", "--help"], env={"COLUMNS": "200"})
    assert result.exit_code == 0
    for flag in ("--mode", "--alpha-vec", "--beta", "--counts", "--pop", "--truncate-rank", "--threads"):
        assert flag in result.output
    assert "400" in result.output


class TestSplit:
    def test_importance_split_is_byte_identical(self, regression_csv, tmp_path):
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            args = split_args(
                regression_csv, out,
                "--mode", "importance", "--parties", "3", "--alpha", "1", "--seed", "0", "--label-column", "label",
            )
            result = runner.invoke(app, args)
            assert result.exit_code == 0, result.output
            outputs.append(out)

        for filename in ("manifest.json", "party0.csv", "party1.csv", "party2.csv", "labels.csv"):
            assert (outputs[0] / filename).read_bytes() == (outputs[1] / filename).read_bytes()

        manifest = json.loads((outputs[0] / "manifest.json").read_text())
        assert manifest["seed"] == 0
        assert manifest["mode"] == "importance"
        assert manifest["params"]["alphas"] == [1.0, 1.0, 1.0]
        assert manifest["source"]["rows"] == 200
        assert len(manifest["assignment"]) == 6

    def test_label_column_is_kept_out_of_features(self, regression_csv, tmp_path):
        args = split_args(
            regression_csv, tmp_path / "o", "--mode", "importance", "--alpha-vec", "1,1", "--label-column", "label"
        )
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        assert report_of(result.output)["source"]["columns"] == 6

    def test_correlation_split_same_across_threads(self, block_csv, tmp_path):
        outputs = []
        for threads in ("1", "4"):
            out = tmp_path / f"t{threads}"
            args = split_args(
                block_csv, out, "--mode", "correlation", "--beta", "0", "--pop", "20", "--gens", "20", "--threads", threads
            )
            result = runner.invoke(app, args)
            assert result.exit_code == 0, result.output
            outputs.append(out)

        assert (outputs[0] / "manifest.json").read_bytes() == (outputs[1] / "manifest.json").read_bytes()
        manifest = json.loads((outputs[0] / "manifest.json").read_text())
        assert manifest["corr_kind"] == "spearman"
        assert manifest["params"]["counts"] == [3, 3]
        assert manifest["achieved"]["icor_achieved"] == pytest.approx(-1.0)

    def test_image_layout_writes_arrays(self, tmp_path):
        X = np.arange(24.0).reshape(4, 6)
        path = write_csv(tmp_path / "img.csv", X)
        out = tmp_path / "o"
        args = split_args(path, out, "--mode", "importance", "--alpha-vec", "1,1", "--image", "2x3x1", "--background=-1")
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        images = np.load(out / "party0_images.npy")
        assert images.shape == (4, 1, 2, 3)

    def test_alpha_and_alpha_vec_are_exclusive(self, regression_csv, tmp_path):
        args = split_args(regression_csv, tmp_path / "o", "--mode", "importance", "--alpha", "1", "--alpha-vec", "1,2")
        result = runner.invoke(app, args)
        assert result.exit_code == 2
        assert "error[config]" in result.output

    def test_beta_in_importance_mode(self, regression_csv, tmp_path):
        args = split_args(regression_csv, tmp_path / "o", "--mode", "importance", "--alpha-vec", "1,1", "--beta", "0.5")
        result = runner.invoke(app, args)
        assert result.exit_code == 2
        assert "error[config]" in result.output

    def test_bad_csv(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,oops\n")
        result = runner.invoke(app, split_args(path, tmp_path / "o", "--mode", "importance", "--alpha-vec", "1,1"))
        assert result.exit_code == 2
        assert "error[dataset]" in result.output
        assert "colonne 'b'" in result.output


class TestMetrics:
    def test_single_party_is_rejected(self, tmp_path):
        path = write_csv(tmp_path / "party0.csv", np.random.default_rng(0).standard_normal((10, 3)))
        result = runner.invoke(app, ["metrics", "--parties", str(path)])
        assert result.exit_code == 2
        assert "error[metric]" in result.output
        assert "K ≥ 2" in result.output

    def test_from_party_files(self, tmp_path):
        ds = two_block_fixture(2)
        X = ds.dense()
        p0 = write_csv(tmp_path / "p0.csv", X[:, :2], names=["a", "b"])
        p1 = write_csv(tmp_path / "p1.csv", X[:, 2:], names=["c", "d"])
        result = runner.invoke(app, ["metrics", "--parties", str(p0), "--parties", str(p1)])
        assert result.exit_code == 0, result.output
        report = report_of(result.output)
        assert report["icor"] == pytest.approx(-1.0)
        assert report["inner_pcor"] == pytest.approx([1.0, 1.0])
        assert report["pcor_matrix"][0][1] == pytest.approx(0.0)

    def test_from_manifest(self, block_csv, tmp_path):
        out = tmp_path / "o"
        split = runner.invoke(app, split_args(block_csv, out, "--mode", "importance", "--alpha-vec", "1,1"))
        assert split.exit_code == 0, split.output

        result = runner.invoke(
            app, ["metrics", "--input", str(block_csv), "--manifest", str(out / "manifest.json")]
        )
        assert result.exit_code == 0, result.output
        assert len(report_of(result.output)["pcor_matrix"]) == 2

    def test_manifest_requires_input(self, tmp_path):
        result = runner.invoke(app, ["metrics", "--manifest", str(tmp_path / "manifest.json")])
        assert result.exit_code == 2
        assert "error[config]" in result.output


def test_estimate_round_trip(regression_csv, tmp_path):
    out = tmp_path / "o"
    split = runner.invoke(
        app, split_args(regression_csv, out, "--mode", "importance", "--alpha-vec", "1,1", "--label-column", "label")
    )
    assert split.exit_code == 0, split.output

    args = [
        "estimate",
        "--parties", str(out / "party0.csv"),
        "--parties", str(out / "party1.csv"),
        "--labels", str(out / "labels.csv"),
        "--task", "reg",
        "--bound-mode", "shuffle",
    ]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    report = report_of(result.output)
    assert set(report) >= {"alpha_vec", "symmetric_alpha", "dispersion_alpha", "beta", "icor_real", "shapley"}
    assert 0.0 <= report["beta"] <= 1.0
    assert sum(report["alpha_vec"]) == pytest.approx(1.0)
    assert report["bound_mode"] == "shuffle"


class TestValidate:
    def test_passing_suite(self):
        result = runner.invoke(app, ["validate", "--suite", "mean-alpha"])
        assert result.exit_code == 0, result.output
        report = report_of(result.output)
        assert report["passed"] is True
        assert [s["name"] for s in report["suites"]] == ["mean-alpha"]

    def test_failing_suite_exits_one(self, monkeypatch):
        monkeypatch.setitem(validation.SUITES, "mean-alpha", lambda ctx: CheckResult("mean-alpha", False))
        result = runner.invoke(app, ["validate", "--suite", "mean-alpha"])
        assert result.exit_code == 1
        assert "error[validation]" in result.output
        assert report_of(result.output)["passed"] is False

    def test_unknown_suite(self):
        result = runner.invoke(app, ["validate", "--suite", "nope"])
        assert result.exit_code == 2
        assert "error[config]" in result.output


def test_invalid_log_level():
    result = runner.invoke(app, ["--log-level", "LOUD", "version"])
    assert result.exit_code == 2
    assert "error[config]" in result.output
