"""End-to-end tests of the command line, driven in process."""

import json

import numpy as np
import pytest

from lpmhd import (
    Field,
    SuiteResult,
    build_filter_bank,
    interior_field,
    make_grid,
    read_diagnostics,
    read_field,
    read_uniqueness_report,
    sample_rng,
    to_physical,
    to_spectral,
    heat_semigroup,
)
from lpmhd import cli


def _write_initial(tmp_path, n=32, name="f0.field", components=1):
    grid = make_grid(2, n, 2.0 * np.pi)
    bank = build_filter_bank(grid)
    f = interior_field(grid, bank, sample_rng(50, 0), components=components)
    path = tmp_path / name
    from lpmhd import write_field

    write_field(path, f)
    return grid, f, str(path)


class TestVerifyCommand:
    def test_bony_suite_passes(self, capsys):
        code = cli.main(["verify", "bony", "--samples", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert "[pass] bony" in out

    def test_products_violating_indices_exit_2(self, capsys):
        code = cli.main(
            ["verify", "products", "--samples", "2", "--s2", "3.0", "--variant", "T"]
        )
        err = capsys.readouterr().err
        assert code == 2
        assert "variant T requires s2 <= d/p" in err

    def test_unknown_suite_exit_2(self, capsys):
        code = cli.main(["verify", "nosuch"])
        assert code == 2

    def test_failing_suite_exit_1(self, capsys, monkeypatch):
        def fake(**kwargs):
            return SuiteResult(
                name="bony",
                passed=False,
                n_samples=1,
                failures=["synthetic failure"],
                stats={},
                reports=[],
            )

        monkeypatch.setitem(cli.SUITES, "bony", fake)
        code = cli.main(["verify", "bony"])
        captured = capsys.readouterr()
        assert code == 1
        assert "[FAIL] bony" in captured.out
        assert "synthetic failure" in captured.err

    def test_report_csv_written(self, capsys, tmp_path):
        code = cli.main(
            [
                "verify", "products", "--samples", "2",
                "--output_dir", str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "verify_products.csv").exists()
        header = (tmp_path / "verify_products.csv").read_text().splitlines()[0]
        assert header == "variant,indices,lhs,factors,ratio,degenerate,seed"


class TestSolveCommand:
    def test_heat_solve_writes_verified_snapshots(self, capsys, tmp_path):
        grid, f0, path = _write_initial(tmp_path)
        out_dir = tmp_path / "out"
        code = cli.main(
            [
                "solve", "heat", "--initial", path,
                "--N", "32", "--T_max", "0.02", "--dt", "0.01",
                "--output_dir", str(out_dir),
            ]
        )
        assert code == 0
        manifest = json.loads((out_dir / "heat_manifest.json").read_text())
        assert manifest["problem"] == "heat"
        assert len(manifest["snapshots"]) == 3
        final = read_field(out_dir / manifest["snapshots"][-1], grid)
        expected = to_physical(heat_semigroup(to_spectral(f0), 0.02))
        np.testing.assert_allclose(final.samples, expected.samples, atol=1e-12)
        assert (out_dir / "heat_estimate.csv").exists()

    def test_transport_needs_velocity(self, capsys, tmp_path):
        _, _, path = _write_initial(tmp_path)
        code = cli.main(
            ["solve", "transport", "--initial", path, "--N", "32",
             "--T_max", "0.02", "--dt", "0.01"]
        )
        err = capsys.readouterr().err
        assert code == 2
        assert "--velocity" in err

    def test_transport_solve_runs(self, capsys, tmp_path):
        grid, _, path = _write_initial(tmp_path)
        from lpmhd import divergence_free_field, write_field

        bank = build_filter_bank(grid)
        v = divergence_free_field(grid, bank, sample_rng(51, 0))
        vpath = tmp_path / "v.field"
        write_field(vpath, v)
        out_dir = tmp_path / "out_t"
        code = cli.main(
            [
                "solve", "transport", "--initial", path, "--velocity", str(vpath),
                "--N", "32", "--T_max", "0.02", "--dt", "0.002",
                "--output_dir", str(out_dir),
            ]
        )
        assert code == 0
        assert (out_dir / "transport_manifest.json").exists()
        assert (out_dir / "transport_estimate.csv").exists()

    def test_missing_initial_file_exit_2(self, capsys, tmp_path):
        code = cli.main(
            ["solve", "heat", "--initial", str(tmp_path / "absent.field"), "--N", "32"]
        )
        err = capsys.readouterr().err
        assert code == 2
        assert "not found" in err


class TestIterateCommand:
    _FLAGS = ["--N", "32", "--T_max", "0.01", "--max_iterations", "1",
              "--tolerance", "0"]

    def test_reruns_are_byte_identical(self, capsys, tmp_path):
        dirs = [tmp_path / "a", tmp_path / "b"]
        for d in dirs:
            code = cli.main(["iterate", *self._FLAGS, "--output_dir", str(d)])
            assert code == 0
        for name in ("diagnostics.csv", "final_u.field", "final_B.field",
                     "filter_bank.json"):
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()

    def test_outputs_parse(self, capsys, tmp_path):
        code = cli.main(["iterate", *self._FLAGS, "--output_dir", str(tmp_path)])
        assert code == 0
        rows = read_diagnostics(tmp_path / "diagnostics.csv")
        assert [r["n"] for r in rows] == [0, 1]
        bank_doc = json.loads((tmp_path / "filter_bank.json").read_text())
        assert "phi_sha256" in bank_doc
        u = read_field(tmp_path / "final_u.field")
        assert u.grid.N == 32
        out = capsys.readouterr().out
        assert "converged=" in out

    def test_bad_config_file_exit_2(self, capsys, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("bogus = 1\n")
        code = cli.main(["iterate", "--config", str(cfg_file)])
        err = capsys.readouterr().err
        assert code == 2
        assert "unknown key 'bogus'" in err

    def test_flag_overrides_config_file(self, capsys, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("eta = 0.2\n")
        code = cli.main(["iterate", "--config", str(cfg_file), "--eta", "1.5"])
        err = capsys.readouterr().err
        assert code == 2
        assert "eta must lie in (0, 1), got 1.5" in err

    def test_custom_data_needs_both_files(self, capsys, tmp_path):
        _, _, path = _write_initial(tmp_path, components=2)
        code = cli.main(["iterate", *self._FLAGS, "--u0", path])
        err = capsys.readouterr().err
        assert code == 2
        assert "both --u0 and --B0" in err


class TestUniqueCommand:
    _FLAGS = ["--N", "32", "--T_max", "0.01", "--max_iterations", "2",
              "--tolerance", "0"]

    def test_zero_perturbation_gauge_passes(self, capsys, tmp_path):
        code = cli.main(
            ["unique", "--perturbation", "0", *self._FLAGS,
             "--output_dir", str(tmp_path)]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "osgood=pass" in out
        rep = read_uniqueness_report(tmp_path / "uniqueness.json")
        assert rep.perturbation_size == 0.0
        assert np.all(rep.rho == 0.0)

    def test_negative_perturbation_exit_2(self, capsys, tmp_path):
        code = cli.main(["unique", "--perturbation", "-1", *self._FLAGS])
        err = capsys.readouterr().err
        assert code == 2
        assert ">= 0" in err


class TestNormsCommand:
    def test_prints_shell_norms(self, capsys, tmp_path):
        _, _, p1 = _write_initial(tmp_path, n=16, name="a.field")
        _, _, p2 = _write_initial(tmp_path, n=16, name="b.field")
        code = cli.main(["norms", p1, p2, "--N", "16", "--q", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "a.field" in out and "b.field" in out
        assert "besov(s=1," in out
        assert "mixed(q=1)" in out

    def test_mixed_norm_needs_two_files(self, capsys, tmp_path):
        _, _, p1 = _write_initial(tmp_path, n=16, name="a.field")
        code = cli.main(["norms", p1, "--N", "16", "--q", "1"])
        err = capsys.readouterr().err
        assert code == 2
        assert "at least two" in err

    def test_grid_mismatch_reported(self, capsys, tmp_path):
        _, _, p1 = _write_initial(tmp_path, n=16, name="a.field")
        code = cli.main(["norms", p1, "--N", "32"])
        err = capsys.readouterr().err
        assert code == 2
        assert "dimension mismatch" in err
