# /*
#  * -----------------------------------------------------------------------------
#  *  Copyright (c) 2025 Magda Kowalska. All rights reserved.
#  *
#  *  This software and its source code are the intellectual property of
#  *  Magda Kowalska. Unauthorized copying, reproduction, or use of this
#  *  software, in whole or in part, is strictly prohibited without express
#  *  written permission.
#  *
#  *  This software is protected under the Berne Convention for the Protection
#  *  of Literary and Artistic Works, EU copyright law, and international
#  *  copyright treaties.
#  *
#  *  Author: Magda Kowalska
#  *  Created: 2026-10-19
#  *  Last Modified: 2026-10-19
#  * -----------------------------------------------------------------------------
#  */

import json
import os
from unittest.mock import patch

import pytest
from click.testing import CliRunner

from opfield.exceptions import EXIT_BOUND, EXIT_DENSITY, EXIT_INPUT, RetractionError
from opfield.main import cli
from opfield.utils.io_utils import write_json


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def pair_dir(runner, tmp_path):
    """h.json / u.json for a seeded 4x4 pair with ||[u, h]|| <= 1e-6"""
    spec = write_json(str(tmp_path / "pair_spec.json"), {"seed": 1, "dim": 4, "target_delta": 1e-6})
    out = str(tmp_path / "pair")
    result = runner.invoke(cli, ["gen", "--spec", spec, "--kind", "pair", "--out", out])
    assert result.exit_code == 0, result.output
    return out


def gen_field_file(runner, tmp_path, name: str, spec: dict) -> str:
    spec_path = write_json(str(tmp_path / f"{name}_spec.json"), spec)
    out = str(tmp_path / name)
    result = runner.invoke(cli, ["gen", "--spec", spec_path, "--kind", "field", "--out", out])
    assert result.exit_code == 0, result.output
    return os.path.join(out, "field.json")


@pytest.fixture
def crossing_field(runner, tmp_path):
    return gen_field_file(
        runner, tmp_path, "crossing", {"n": 2, "p": 1, "field_shape": "avoided-crossing", "grid_size": 101}
    )


@pytest.fixture
def constant_field(runner, tmp_path):
    return gen_field_file(
        runner, tmp_path, "constant", {"seed": 2, "n": 2, "p": 2, "field_shape": "constant", "grid_size": 11}
    )


def read(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


# ----------------------------------------------------------------------------
# gen / homotopy / verify
# ----------------------------------------------------------------------------


class TestHomotopyCommand:
    """Tests for the homotopy and verify commands"""

    def test_gen_writes_pair(self, pair_dir):
        pair = read(os.path.join(pair_dir, "pair.json"))
        assert pair["seed"] == 1
        assert 5e-7 <= pair["measured_delta"] <= 1e-6
        assert read(os.path.join(pair_dir, "h.json"))["rows"] == 4

    def test_homotopy_passes(self, runner, pair_dir, tmp_path):
        out = str(tmp_path / "run")
        result = runner.invoke(
            cli,
            [
                "homotopy",
                "--hermitian", os.path.join(pair_dir, "h.json"),
                "--unitary", os.path.join(pair_dir, "u.json"),
                "--delta", "1e-6",
                "--samples", "8",
                "--out", out,
                "--csv",
            ],
        )
        assert result.exit_code == 0, result.output
        assert "HOMOTOPY" in result.output
        for name in ("path.json", "pre_path.json", "certificate.json", "verification.json", "profile.csv"):
            assert os.path.isfile(os.path.join(out, name))
        certificate = read(os.path.join(out, "certificate.json"))
        assert certificate["verification"]["passed"] is True
        assert certificate["certificate"]["sup_commutator"] <= certificate["certificate"]["thresholds"]["commutator"]

    def test_verify_round_trip(self, runner, pair_dir, tmp_path):
        out = str(tmp_path / "run")
        h = os.path.join(pair_dir, "h.json")
        u = os.path.join(pair_dir, "u.json")
        built = runner.invoke(
            cli, ["homotopy", "--hermitian", h, "--unitary", u, "--samples", "8", "--out", out]
        )
        assert built.exit_code == 0, built.output
        checked = runner.invoke(
            cli,
            [
                "verify",
                "--path", os.path.join(out, "path.json"),
                "--certificate", os.path.join(out, "certificate.json"),
                "--hermitian", h,
                "--unitary", u,
                "--pre-path", os.path.join(out, "pre_path.json"),
                "--out", str(tmp_path / "check"),
            ],
        )
        assert checked.exit_code == 0, checked.output
        assert "Verification passed" in checked.output
        assert read(str(tmp_path / "check" / "verification.json"))["passed"] is True

    def test_verify_reports_non_unitary_sample(self, runner, pair_dir, tmp_path):
        out = str(tmp_path / "run")
        h = os.path.join(pair_dir, "h.json")
        u = os.path.join(pair_dir, "u.json")
        built = runner.invoke(
            cli, ["homotopy", "--hermitian", h, "--unitary", u, "--samples", "8", "--out", out]
        )
        assert built.exit_code == 0, built.output

        path_file = os.path.join(out, "path.json")
        stored = read(path_file)
        sample = stored["samples"][3]["matrix"]
        sample["entries"] = [[re * (1 + 1e-3), im * (1 + 1e-3)] for re, im in sample["entries"]]
        with open(path_file, "w") as f:
            json.dump(stored, f)

        checked = runner.invoke(
            cli,
            [
                "verify",
                "--path", path_file,
                "--certificate", os.path.join(out, "certificate.json"),
                "--hermitian", h,
                "--unitary", u,
                "--out", str(tmp_path / "check"),
            ],
        )
        assert checked.exit_code == EXIT_BOUND, checked.output
        assert "Verification FAILED" in checked.output
        report = read(str(tmp_path / "check" / "verification.json"))
        unitarity = next(c for c in report["checks"] if c["name"] == "unitarity")
        assert unitarity["passed"] is False

    def test_malformed_matrix_file(self, runner, pair_dir, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"rows": 2,\n "cols": 2\n "entries": []}')
        result = runner.invoke(
            cli,
            ["homotopy", "--hermitian", str(bad), "--unitary", os.path.join(pair_dir, "u.json"), "--out", str(tmp_path / "x")],
        )
        assert result.exit_code == EXIT_INPUT
        assert "bad.json:3" in result.output

    def test_missing_input_file(self, runner, pair_dir, tmp_path):
        result = runner.invoke(
            cli,
            ["homotopy", "--hermitian", str(tmp_path / "absent.json"), "--unitary", os.path.join(pair_dir, "u.json")],
        )
        assert result.exit_code == EXIT_INPUT
        assert "not found" in result.output

    def test_negative_delta(self, runner, pair_dir):
        result = runner.invoke(
            cli,
            [
                "homotopy",
                "--hermitian", os.path.join(pair_dir, "h.json"),
                "--unitary", os.path.join(pair_dir, "u.json"),
                "--delta", "-1",
            ],
        )
        assert result.exit_code == EXIT_INPUT

    def test_retraction_failure_exit_code(self, runner, pair_dir, tmp_path):
        with patch("opfield.main.build_homotopy", side_effect=RetractionError(4, 0.75)):
            result = runner.invoke(
                cli,
                [
                    "homotopy",
                    "--hermitian", os.path.join(pair_dir, "h.json"),
                    "--unitary", os.path.join(pair_dir, "u.json"),
                    "--out", str(tmp_path / "x"),
                ],
            )
        assert result.exit_code == EXIT_BOUND
        assert "stage 4" in result.output


# ----------------------------------------------------------------------------
# stitch / refine
# ----------------------------------------------------------------------------


class TestStitchCommand:
    """Tests for the stitch and refine commands"""

    def test_constant_field(self, runner, constant_field, tmp_path):
        out = str(tmp_path / "stitched")
        result = runner.invoke(cli, ["stitch", "--field", constant_field, "--epsilon", "0.05", "--out", out, "--csv"])
        assert result.exit_code == 0, result.output
        report = read(os.path.join(out, "jump_report.json"))
        assert report["max_jump"] == 0.0
        assert report["density_violations"] == []
        assert read(os.path.join(out, "eigenvalue_field.json"))["breakpoints"] == []
        header = open(os.path.join(out, "curves.csv"), encoding="utf-8").readline().strip()
        assert header == "x,lambda_1_1,lambda_1_2,lambda_2_1,lambda_2_2"

    def test_avoided_crossing(self, runner, crossing_field, tmp_path):
        out = str(tmp_path / "stitched")
        result = runner.invoke(cli, ["stitch", "--field", crossing_field, "--epsilon", "0.05", "--out", out])
        assert result.exit_code == 0, result.output
        assert read(os.path.join(out, "eigenvalue_field.json"))["ordering_ok"] is True

    def test_density_violation(self, runner, crossing_field, tmp_path):
        result = runner.invoke(
            cli,
            ["stitch", "--field", crossing_field, "--out", str(tmp_path / "stitched")],
            env={"OPFIELD_EPSILON": "0.01"},
        )
        assert result.exit_code == EXIT_DENSITY
        assert "Grid too coarse" in result.output

    def test_refine_writes_cauchy(self, runner, constant_field, tmp_path):
        out = str(tmp_path / "refined")
        result = runner.invoke(
            cli, ["refine", "--field", constant_field, "--schedule", "1e-1:0.25:3", "--out", out]
        )
        assert result.exit_code == 0, result.output
        cauchy = read(os.path.join(out, "cauchy.json"))
        assert len(cauchy["checks"]) == 2
        assert all(check["passed"] for check in cauchy["checks"])
        assert len(cauchy["iterations"]) == 3

    def test_bad_schedule(self, runner, constant_field, tmp_path):
        result = runner.invoke(
            cli, ["refine", "--field", constant_field, "--schedule", "1e-1:2:3", "--out", str(tmp_path / "r")]
        )
        assert result.exit_code == EXIT_INPUT

    def test_reruns_are_byte_identical(self, runner, crossing_field, tmp_path):
        outputs = []
        for name in ("first", "second"):
            out = str(tmp_path / name)
            result = runner.invoke(cli, ["stitch", "--field", crossing_field, "--epsilon", "0.05", "--out", out, "--csv"])
            assert result.exit_code == 0, result.output
            outputs.append(
                [open(os.path.join(out, f), "rb").read() for f in ("eigenvalue_field.json", "jump_report.json", "curves.csv")]
            )
        assert outputs[0] == outputs[1]
