"""Scenario files, the binary archive format, and the command-line interface."""

import numpy as np
import pytest

from sbnk.archive import (
    ArchiveError,
    read_archive,
    verify_archive,
    write_archive,
)
from sbnk.cli import main
from sbnk.picard import ScenarioParams, make_initial_data, picard_iterate
from sbnk.scenario import (
    SchemaError,
    load_scenario,
    params_to_table,
    parse_scenario,
    scenario_to_params,
    serialize_scenario,
)

TINY_SCENARIO = """\
grid.d = 1
grid.nx = 16
grid.nv = 64
grid.vmax = 10.0
scenario.eps = 0.05
scenario.t = 0.03125
scenario.dt = 0.00390625
scenario.max_n = 3
scenario.stop_tol = 1e-20
"""


class TestScenarioParsing:
    def test_roundtrip_through_text(self):
        p = ScenarioParams(nx=16, T=1.0 / 32.0)
        table = params_to_table(p)
        text = serialize_scenario(table)
        assert scenario_to_params(parse_scenario(text)) == p

    def test_comments_and_blank_lines_ignored(self):
        table = parse_scenario("# a comment\n\ngrid.d = 1  # trailing\n")
        assert table == {"grid.d": 1}

    def test_unknown_key_line_numbered(self):
        with pytest.raises(SchemaError, match="line 2: unknown key 'grid.ny'"):
            parse_scenario("grid.d = 1\ngrid.ny = 8\n")

    def test_duplicate_key_line_numbered(self):
        with pytest.raises(SchemaError, match="line 3: duplicate key"):
            parse_scenario("grid.d = 1\n\ngrid.d = 2\n")

    def test_type_error_line_numbered(self):
        with pytest.raises(SchemaError, match="line 1: key 'grid.nx' expects int"):
            parse_scenario("grid.nx = sixteen\n")

    def test_constraint_violation_line_numbered(self):
        with pytest.raises(SchemaError, match="line 1: .*violates constraint"):
            parse_scenario("grid.nx = 7\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(SchemaError, match="line 1: expected"):
            parse_scenario("grid.d 1\n")

    def test_invalid_combination_rejected(self):
        with pytest.raises(SchemaError, match="invalid parameter combination"):
            scenario_to_params(
                parse_scenario("scenario.alpha = 0.9\nscenario.beta = 0.8\n")
            )


def tiny_params():
    return ScenarioParams(
        d=1, nx=16, nv=64, Vmax=10.0, T=1.0 / 32.0, dt=1.0 / 256.0
    )


@pytest.fixture(scope="module")
def tiny_result():
    return picard_iterate(tiny_params(), max_n=2)


class TestArchive:
    def test_roundtrip_bitwise(self, tmp_path, tiny_result):
        traj = tiny_result.final
        path = tmp_path / "a.bin"
        write_archive(path, traj)
        data = read_archive(path)
        assert data.grid == traj.grid
        assert data.dt == traj.dt
        assert len(data.f_snaps) == len(traj.f_snaps)
        for a, b in zip(data.f_snaps, traj.f_snaps):
            assert np.array_equal(a.values, b.values)
        assert np.array_equal(data.rho_snaps, traj.rho_snaps)
        assert np.array_equal(data.u_snaps, traj.u_snaps)
        assert np.array_equal(data.p_snaps, traj.p_snaps)

    def test_truncated_payload_detected(self, tmp_path, tiny_result):
        path = tmp_path / "a.bin"
        write_archive(path, tiny_result.final)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(ArchiveError, match="payload length mismatch"):
            read_archive(path)

    def test_bad_magic_detected(self, tmp_path, tiny_result):
        path = tmp_path / "a.bin"
        write_archive(path, tiny_result.final)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(ArchiveError, match="bad magic"):
            read_archive(path)

    def test_unsupported_version_detected(self, tmp_path, tiny_result):
        path = tmp_path / "a.bin"
        write_archive(path, tiny_result.final)
        raw = bytearray(path.read_bytes())
        raw[4] = 99
        path.write_bytes(bytes(raw))
        with pytest.raises(ArchiveError, match="unsupported format version"):
            read_archive(path)

    def test_verify_reports_positivity_violation(self, tmp_path, tiny_result):
        # fault injection: flip one f sample negative in the payload
        import struct

        path = tmp_path / "a.bin"
        write_archive(path, tiny_result.final)
        raw = bytearray(path.read_bytes())
        off = 64  # first double of the first snapshot's f block
        raw[off : off + 8] = struct.pack("<d", -1.0)
        path.write_bytes(bytes(raw))
        lines = verify_archive(path)
        assert any("[POSITIVITY VIOLATION]" in line for line in lines)
        clean = tmp_path / "b.bin"
        write_archive(clean, tiny_result.final)
        assert not any("[POSITIVITY VIOLATION]" in line for line in verify_archive(clean))

    def test_verify_summarizes_every_snapshot(self, tmp_path, tiny_result):
        path = tmp_path / "a.bin"
        write_archive(path, tiny_result.final)
        lines = verify_archive(path)
        assert len(lines) == 1 + len(tiny_result.final.f_snaps)
        assert lines[0].startswith("archive: d=1 nx=16 nv=64")


class TestCLI:
    def test_schema_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("grid.d = 7\n")
        code = main(["run", str(bad), "--out-dir", str(tmp_path / "out")])
        assert code == 64
        assert "scenario error" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path):
        code = main(["run", str(tmp_path / "nope.txt")])
        assert code == 64

    def test_run_picard_outputs(self, tmp_path, capsys):
        scen = tmp_path / "s.txt"
        scen.write_text(TINY_SCENARIO)
        out = tmp_path / "out"
        code = main(["run", str(scen), "--out-dir", str(out)])
        assert code == 0
        assert "all gates passed" in capsys.readouterr().out
        # 1 constant iterate + max_n solved iterates
        bins = sorted(out.glob("iterate_*.bin"))
        assert [b.name for b in bins] == [
            "iterate_000.bin",
            "iterate_001.bin",
            "iterate_002.bin",
            "iterate_003.bin",
        ]
        cauchy = (out / "cauchy.csv").read_text().splitlines()
        assert cauchy[0] == "n,delta_f_q,delta_rho_h2,delta_u_h1,l2h1_grad_u,ratio"
        assert len(cauchy) == 1 + 3  # one row per Cauchy difference
        diag = (out / "diagnostics.csv").read_text().splitlines()
        assert diag[0] == "lemma_id,t,measured,gate,pass"
        nt = int(round(0.03125 / 0.00390625))
        # rho_min + rho_f_lower_bound per snapshot, plus 3 scalar rows
        assert len(diag) == 1 + 2 * (nt + 1) + 3
        assert all(line.endswith(",true") for line in diag[1:])

    def test_run_direct_outputs(self, tmp_path):
        scen = tmp_path / "s.txt"
        scen.write_text(TINY_SCENARIO + "scenario.mode = direct\n")
        out = tmp_path / "out"
        code = main(["run", str(scen), "--out-dir", str(out)])
        assert code == 0
        assert (out / "run.bin").exists()
        assert (out / "diagnostics.csv").exists()
        assert not (out / "cauchy.csv").exists()

    def test_verify_command(self, tmp_path, capsys):
        scen = tmp_path / "s.txt"
        scen.write_text(TINY_SCENARIO + "scenario.mode = direct\n")
        out = tmp_path / "out"
        assert main(["run", str(scen), "--out-dir", str(out)]) == 0
        capsys.readouterr()
        assert main(["verify", str(out / "run.bin")]) == 0
        assert "snapshot 0:" in capsys.readouterr().out

    def test_verify_corrupt_archive(self, tmp_path, capsys):
        bad = tmp_path / "bad.bin"
        bad.write_text("not an archive")
        assert main(["verify", str(bad)]) == 1
        assert "verify error" in capsys.readouterr().err

    def test_lemma_bench_writes_constants(self, tmp_path, capsys):
        out = tmp_path / "c.txt"
        code = main(
            [
                "lemma-bench",
                "--size",
                "20",
                "--q",
                "6",
                "--gamma",
                "1",
                "--d",
                "1",
                "--seed",
                "3",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        from sbnk.lemma_checks import read_constants

        constants = read_constants(out)
        assert "lemma22.q6.g1.d1" in constants
        assert all(v > 0 for v in constants.values())


class TestShippedScenarios:
    def test_reference_scenario_parses(self):
        params = scenario_to_params(load_scenario("scenarios/reference.txt"))
        assert params.mode == "picard"
        assert params.eps == 0.05

    def test_stress_scenario_parses(self):
        params = scenario_to_params(load_scenario("scenarios/stress.txt"))
        assert params.eps == 0.9
