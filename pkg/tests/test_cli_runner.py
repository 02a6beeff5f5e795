"""End-to-end tests for config parsing, run artifacts, and the CLI verbs."""

import json
import math

import numpy as np
import pytest

from tfdyn import ConfigError, canonical_config_text, parse_config, run_quench, run_sweep, run_verify
from tfdyn.cli import main
from tfdyn.cli_runner import WORKERS_ENV_VAR, _fmt

QUENCH_CONSTANT = """
[run]
kind = quench
beta = {beta}

[protocol]
kind = boson
family = constant
value = 1.0
t_i = 0.0
t_f = 2.0

[integrator]
grid_points = 9

[oracle]
n_levels = 32
substeps_per_unit = 200
"""

SWEEP_TEXT = """
[run]
kind = sweep
beta = 1.0

[protocol]
kind = oscillator
family = tanh
value_initial = 1.0
value_final = 2.0
center = 0.0
width = 1.0
t_i = -32.0
t_f = 32.0

[integrator]
grid_points = 11

[oracle]
enabled = false

[sweep]
key = protocol.width
values = 1.0, 2.0
"""

VERIFY_FAST = """
[run]
kind = verify

[oracle]
enabled = false
"""


def _read_manifest(out_dir):
    with open(out_dir / "manifest.json") as fh:
        return json.load(fh)


def _read_csv(path):
    """Read a runner CSV keyed by the full ``name [unit]`` header strings."""
    lines = path.read_text().splitlines()
    body = np.array([[float(cell) for cell in line.split(",")] for line in lines[1:]])
    return {name: body[:, k] for k, name in enumerate(lines[0].split(","))}


class TestParseConfig:
    def test_minimal_quench_accepted(self):
        cfg = parse_config(QUENCH_CONSTANT.format(beta=math.log(2.0)), "quench")
        assert cfg.kind == "quench"
        assert cfg.statistics == "boson"
        assert cfg.integrator.grid_points == 9
        assert cfg.oracle.n_levels == 32
        assert cfg.oracle.grid_points == 9  # oracle samples share the mode grid

    def test_unknown_section_rejected(self):
        text = QUENCH_CONSTANT.format(beta=1.0) + "\n[extras]\nfoo = 1\n"
        with pytest.raises(ConfigError, match="extras"):
            parse_config(text, "quench")

    def test_unknown_key_rejected(self):
        text = QUENCH_CONSTANT.format(beta=1.0).replace("beta =", "betta =")
        with pytest.raises(ConfigError, match="betta"):
            parse_config(text, "quench")

    def test_kind_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="declares kind"):
            parse_config(QUENCH_CONSTANT.format(beta=1.0), "sweep")

    def test_quench_requires_beta(self):
        text = QUENCH_CONSTANT.format(beta=1.0).replace("beta = 1.0", "")
        with pytest.raises(ConfigError, match="beta"):
            parse_config(text, "quench")

    def test_verify_takes_no_protocol(self):
        text = VERIFY_FAST + "\n[protocol]\nkind = boson\nfamily = constant\nvalue = 1\nt_i = 0\nt_f = 1\n"
        with pytest.raises(ConfigError, match="protocol"):
            parse_config(text, "verify")

    def test_quench_takes_no_sweep_section(self):
        text = QUENCH_CONSTANT.format(beta=1.0) + "\n[sweep]\nkey = run.beta\nvalues = 1\n"
        with pytest.raises(ConfigError, match="sweep"):
            parse_config(text, "quench")

    def test_sweep_key_must_be_dotted_and_known(self):
        for bad in ("width", "protocol.width.extra", "nosection.width", "run.nokey"):
            text = SWEEP_TEXT.replace("key = protocol.width", f"key = {bad}")
            with pytest.raises(ConfigError):
                parse_config(text, "sweep")

    def test_sweep_values_must_be_numbers(self):
        text = SWEEP_TEXT.replace("values = 1.0, 2.0", "values = 1.0, fast")
        with pytest.raises(ConfigError, match="number"):
            parse_config(text, "sweep")

    def test_invalid_protocol_value_is_config_error(self):
        text = QUENCH_CONSTANT.format(beta=1.0).replace("value = 1.0", "value = much")
        with pytest.raises(ConfigError):
            parse_config(text, "quench")


class TestCanonicalText:
    def test_digest_invariant_under_formatting(self):
        a = QUENCH_CONSTANT.format(beta=1.0)
        # Same content: sections and keys permuted, noise whitespace, comments.
        b = """
; a comment
[oracle]
substeps_per_unit = 200
n_levels =   32

[integrator]
grid_points = 9

[protocol]
t_f = 2.0
t_i = 0.0
value = 1.0
family = constant
kind = boson

[run]
beta = 1.0   ; inline comment
kind = quench
"""
        assert canonical_config_text(a) == canonical_config_text(b)
        assert parse_config(a, "quench").digest == parse_config(b, "quench").digest

    def test_digest_sensitive_to_values(self):
        a = parse_config(QUENCH_CONSTANT.format(beta=1.0), "quench")
        b = parse_config(QUENCH_CONSTANT.format(beta=2.0), "quench")
        assert a.digest != b.digest

    def test_fmt_round_trips_doubles(self):
        for x in (1.0, 1.0 / 3.0, 6.626e-34, -0.0, 2.0 ** 0.5):
            assert float(_fmt(x)) == x
        assert _fmt(math.nan) == "nan"


@pytest.fixture(scope="module")
def quench_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("quench")
    config = parse_config(QUENCH_CONSTANT.format(beta=math.log(2.0)), "quench")
    manifest = run_quench(config, out)
    return out, manifest


class TestRunQuench:
    def test_artifacts_written(self, quench_out):
        out, manifest = quench_out
        assert (out / "modes.csv").exists()
        assert (out / "observables.csv").exists()
        assert (out / "manifest.json").exists()
        assert manifest["outputs"] == ["modes.csv", "observables.csv"]

    def test_constant_protocol_distribution_static(self, quench_out):
        """At beta*hbar*omega = ln 2 the equilibrium occupation is exactly 1
        and must stay there for a constant Hamiltonian."""
        out, _ = quench_out
        rows = _read_csv(out / "observables.csv")
        occ = rows["occupation_evolved [1]"]
        assert np.max(np.abs(occ - 1.0)) < 1e-12
        assert np.max(rows["nu_sq [1]"]) < 1e-12

    def test_oracle_column_agrees(self, quench_out):
        """Agreement is limited by the truncated thermal tail: at beta = ln 2
        and n_levels = 32 the occupation deficit is ~32 * 2**-32 ~ 7e-9."""
        out, _ = quench_out
        rows = _read_csv(out / "observables.csv")
        assert np.max(rows["occupation_abs_diff [1]"]) < 1e-7

    def test_manifest_bookkeeping(self, quench_out):
        _, manifest = quench_out
        assert manifest["kind"] == "quench"
        assert manifest["checks"] == []  # populated only by verify runs
        assert manifest["oracle"]["enabled"] is True
        assert manifest["drift"]["commutator"] < 1e-9
        assert len(manifest["config_digest"]) == 64

    def test_reruns_are_byte_identical(self, quench_out, tmp_path):
        out, manifest = quench_out
        config = parse_config(QUENCH_CONSTANT.format(beta=math.log(2.0)), "quench")
        second = run_quench(config, tmp_path)
        for name in ("modes.csv", "observables.csv"):
            assert (out / name).read_bytes() == (tmp_path / name).read_bytes()
        a = _read_manifest(out)
        b = _read_manifest(tmp_path)
        for volatile in ("created_utc", "duration_seconds"):
            a.pop(volatile), b.pop(volatile)
        assert a == b


class TestRunSweep:
    def test_entries_and_summary(self, tmp_path):
        config = parse_config(SWEEP_TEXT, "sweep")
        manifest = run_sweep(config, tmp_path)
        assert len(manifest["entries"]) == 2
        assert (tmp_path / "sweep_summary.csv").exists()
        assert (tmp_path / "entry_000" / "observables.csv").exists()
        assert (tmp_path / "entry_001" / "observables.csv").exists()
        rows = _read_csv(tmp_path / "sweep_summary.csv")
        # Slower ramp -> less production; grid order preserved.
        width = rows["protocol.width [1]"]
        nu_sq = rows["final_nu_sq [1]"]
        assert list(rows["index [1]"]) == [0.0, 1.0]
        assert list(width) == [1.0, 2.0]
        assert nu_sq[0] > nu_sq[1] > 0.0
        assert np.max(rows["max_wronskian_deviation [1]"]) < 1e-8

    def test_parallel_workers_bitwise_match_serial(self, tmp_path, monkeypatch):
        config = parse_config(SWEEP_TEXT, "sweep")
        monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
        serial = tmp_path / "serial"
        run_sweep(config, serial)
        monkeypatch.setenv(WORKERS_ENV_VAR, "2")
        parallel = tmp_path / "parallel"
        run_sweep(config, parallel)
        assert (serial / "sweep_summary.csv").read_bytes() == (
            parallel / "sweep_summary.csv"
        ).read_bytes()
        for entry in ("entry_000", "entry_001"):
            for name in ("modes.csv", "observables.csv"):
                assert (serial / entry / name).read_bytes() == (
                    parallel / entry / name
                ).read_bytes()


class TestRunVerify:
    def test_manifest_lists_every_check_once(self, tmp_path):
        config = parse_config(VERIFY_FAST, "verify")
        manifest, results = run_verify(config, tmp_path)
        from tfdyn.verification import CHECK_NAMES

        names = [c["name"] for c in manifest["checks"]]
        assert sorted(names) == sorted(CHECK_NAMES)
        assert len(set(names)) == len(names)
        statuses = {c["status"] for c in manifest["checks"]}
        assert statuses <= {"pass", "fail", "skipped"}
        assert manifest["all_passed"] is True
        on_disk = _read_manifest(tmp_path)
        assert on_disk["checks"] == manifest["checks"]

    def test_skipped_checks_have_null_measurements(self, tmp_path):
        config = parse_config(VERIFY_FAST, "verify")
        manifest, _ = run_verify(config, None)
        skipped = [c for c in manifest["checks"] if c["status"] == "skipped"]
        assert skipped
        for c in skipped:
            assert c["measured"] is None and c["tolerance"] is None


class TestCliMain:
    def _write(self, tmp_path, text, name="cfg.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    def test_run_verb_succeeds(self, tmp_path, capsys):
        cfg = self._write(tmp_path, QUENCH_CONSTANT.format(beta=1.0))
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 0
        assert "quench done" in capsys.readouterr().out

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = self._write(tmp_path, QUENCH_CONSTANT.format(beta=1.0).replace("beta", "betta"))
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file_exit_code(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "absent.ini"), "--out", str(tmp_path / "out")])
        assert code == 2

    def test_integration_failure_exit_code(self, tmp_path, capsys):
        stiff = """
[run]
kind = quench
beta = 1.0

[protocol]
kind = oscillator
family = linear
value_initial = 1.0
value_final = 1e200
t_i = 0.0
t_f = 1.0

[oracle]
enabled = false
"""
        cfg = self._write(tmp_path, stiff)
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 3
        assert "integration failure" in capsys.readouterr().err

    def test_truncation_refusal_exit_code(self, tmp_path, capsys):
        cfg = self._write(tmp_path, QUENCH_CONSTANT.format(beta=0.05))
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 4
        assert "truncation refusal" in capsys.readouterr().err

    def test_verify_failure_exit_code(self, tmp_path, capsys):
        loose = VERIFY_FAST + "\n[integrator]\nrel_tol = 1e-3\nabs_tol = 1e-6\n"
        cfg = self._write(tmp_path, loose)
        code = main(["verify", "--config", cfg])
        captured = capsys.readouterr()
        assert code == 5
        assert "FAILED" in captured.err
        assert "FAIL  c02b_oscillator_wronskian_conservation" in captured.out

    def test_verify_passes_without_oracle(self, tmp_path, capsys):
        cfg = self._write(tmp_path, VERIFY_FAST)
        code = main(["verify", "--config", cfg, "--out", str(tmp_path / "out")])
        captured = capsys.readouterr()
        assert code == 0
        assert "verification suite passed" in captured.out
        # One reported line per criterion.
        from tfdyn.verification import CHECK_NAMES

        for name in CHECK_NAMES:
            assert name in captured.out

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "tfdyn" in capsys.readouterr().out
