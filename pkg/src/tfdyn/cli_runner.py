"""Config-driven runs: quench artifacts, parameter sweeps, verification.

A run is described by a flat INI file; unknown sections or keys are hard
errors so typos cannot silently fall back to defaults.  Three run kinds
exist:

* ``quench`` -- solve the mode equations for one protocol, write ``modes.csv``
  (coefficients and conserved-quantity deviations), ``observables.csv``
  (occupations and moments, plus brute-force oracle columns when enabled) and
  a ``manifest.json``;
* ``sweep`` -- repeat a quench over a one-dimensional parameter grid, each
  entry fully isolated, with a deterministic summary in grid order;
* ``verify`` -- execute the acceptance suite and record every check.

Numeric CSV cells use 17 significant digits, which round-trips doubles
exactly: rerunning a config reproduces the output byte for byte (manifests
differ only in timestamp and duration).
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import bogoliubov, fock_oracle, thermal_observables, verification
from ._version import __version__
from .errors import ConfigError
from .mode_solver import (
    BosonModeTrajectory,
    FermionModeTrajectory,
    IntegratorConfig,
    OscillatorModeTrajectory,
    solve_boson_mode,
    solve_fermion_modes,
    solve_oscillator_mode,
)
from .protocols import (
    BosonProtocol,
    OscillatorProtocol,
    Protocol,
    evaluate,
    from_config,
    statistics_of,
    validate,
)

__all__ = [
    "RunConfig",
    "parse_config",
    "load_config",
    "canonical_config_text",
    "run_quench",
    "run_sweep",
    "run_verify",
    "WORKERS_ENV_VAR",
]

WORKERS_ENV_VAR = "TFDYN_WORKERS"

_RUN_KINDS = ("quench", "sweep", "verify")

# Sections with a fixed key vocabulary ([protocol] is validated by
# protocols.from_config, which also rejects unknown keys).
_SECTION_KEYS = {
    "run": {"kind", "beta", "hbar"},
    "integrator": {"rel_tol", "abs_tol", "grid_points", "max_step"},
    "oracle": {"enabled", "n_levels", "substeps_per_unit", "tail_abort"},
    "sweep": {"key", "values"},
}
_ALL_SECTIONS = set(_SECTION_KEYS) | {"protocol"}

_BOOLEANS = {
    "true": True, "yes": True, "on": True, "1": True,
    "false": False, "no": False, "off": False, "0": False,
}


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run description."""

    kind: str
    beta: float | None
    hbar: float
    protocol: Protocol | None
    statistics: str | None
    integrator: IntegratorConfig
    oracle_enabled: bool
    oracle: fock_oracle.OracleConfig
    sweep_key: str | None
    sweep_values: tuple[float, ...]
    canonical_text: str
    digest: str
    protocol_warnings: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _parse_ini(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=(";", "#")
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if parser.defaults():
        raise ConfigError("top-level keys are not allowed; put keys in a section")
    return parser


def canonical_config_text(text: str) -> str:
    """Normalized rendering of a config: sorted sections and keys, one
    ``key = value`` per line.  The manifest digest hashes this form, so
    comment and ordering changes do not alter a run's identity."""
    parser = _parse_ini(text)
    lines: list[str] = []
    for section in sorted(parser.sections()):
        lines.append(f"[{section}]")
        for key in sorted(parser[section]):
            value = " ".join(parser[section][key].split())
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _digest(canonical: str) -> str:
    return hashlib.sha256(canonical.encode()).hexdigest()


def _get_float(section: str, mapping, key: str, default: float | None) -> float | None:
    if key not in mapping:
        return default
    raw = mapping[key]
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse '{raw}' as a number") from exc


def _get_int(section: str, mapping, key: str, default: int) -> int:
    if key not in mapping:
        return default
    raw = mapping[key]
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse '{raw}' as an integer") from exc


def _get_bool(section: str, mapping, key: str, default: bool) -> bool:
    if key not in mapping:
        return default
    raw = mapping[key].strip().lower()
    if raw not in _BOOLEANS:
        raise ConfigError(f"[{section}] {key}: cannot parse '{mapping[key]}' as a boolean")
    return _BOOLEANS[raw]


def parse_config(text: str, kind: str) -> RunConfig:
    """Validate a config for the given run kind (quench | sweep | verify)."""
    if kind not in _RUN_KINDS:
        raise ValueError(f"unknown run kind '{kind}'")
    parser = _parse_ini(text)

    for section in parser.sections():
        if section not in _ALL_SECTIONS:
            raise ConfigError(f"unknown config section '[{section}]'")
        allowed = _SECTION_KEYS.get(section)
        if allowed is not None:
            unknown = sorted(set(parser[section]) - allowed)
            if unknown:
                raise ConfigError(
                    f"unknown key(s) in [{section}]: {', '.join(unknown)}"
                )

    run_sec = parser["run"] if parser.has_section("run") else {}
    declared = run_sec.get("kind", "").strip().lower() if run_sec else ""
    if declared and declared != kind:
        raise ConfigError(
            f"config declares kind '{declared}' but was invoked as '{kind}'"
        )

    hbar = _get_float("run", run_sec, "hbar", 1.0)
    if not hbar > 0.0:
        raise ConfigError(f"[run] hbar must be positive, got {hbar}")

    needs_protocol = kind in ("quench", "sweep")
    beta = _get_float("run", run_sec, "beta", None)
    if needs_protocol:
        if beta is None:
            raise ConfigError(f"[run] beta is required for a {kind} run")
        if not beta > 0.0:
            raise ConfigError(f"[run] beta must be positive, got {beta}")

    protocol: Protocol | None = None
    warnings: tuple[str, ...] = ()
    if needs_protocol:
        if not parser.has_section("protocol"):
            raise ConfigError(f"a {kind} run needs a [protocol] section")
        protocol = from_config(dict(parser["protocol"]))
        report = validate(protocol)
        if not report.ok:
            raise ConfigError(
                "protocol failed validation: "
                + "; ".join(m for m in report.messages() if m.startswith("error"))
            )
        warnings = tuple(
            f.message for f in report.findings if f.severity == "warning"
        )
    elif parser.has_section("protocol"):
        raise ConfigError("a verify run takes no [protocol] section")

    integ_sec = parser["integrator"] if parser.has_section("integrator") else {}
    max_step = _get_float("integrator", integ_sec, "max_step", math.inf)
    if max_step == 0.0:
        max_step = math.inf
    defaults = IntegratorConfig()
    integrator = IntegratorConfig(
        rel_tol=_get_float("integrator", integ_sec, "rel_tol", defaults.rel_tol),
        abs_tol=_get_float("integrator", integ_sec, "abs_tol", defaults.abs_tol),
        max_step=max_step,
        grid_points=_get_int("integrator", integ_sec, "grid_points", defaults.grid_points),
    )
    if integrator.grid_points < 2:
        raise ConfigError("[integrator] grid_points must be at least 2")

    oracle_sec = parser["oracle"] if parser.has_section("oracle") else {}
    oracle_enabled = _get_bool("oracle", oracle_sec, "enabled", True)
    oracle_defaults = fock_oracle.OracleConfig()
    oracle = fock_oracle.OracleConfig(
        n_levels=_get_int("oracle", oracle_sec, "n_levels", oracle_defaults.n_levels),
        substeps_per_unit=_get_float(
            "oracle", oracle_sec, "substeps_per_unit", oracle_defaults.substeps_per_unit
        ),
        grid_points=integrator.grid_points,  # oracle samples share the mode grid
        hbar=hbar,
        tail_abort=_get_float("oracle", oracle_sec, "tail_abort", oracle_defaults.tail_abort),
    )

    sweep_key: str | None = None
    sweep_values: tuple[float, ...] = ()
    if kind == "sweep":
        if not parser.has_section("sweep"):
            raise ConfigError("a sweep run needs a [sweep] section")
        sweep_sec = parser["sweep"]
        if "key" not in sweep_sec or "values" not in sweep_sec:
            raise ConfigError("[sweep] needs both 'key' and 'values'")
        sweep_key = sweep_sec["key"].strip().lower()
        if sweep_key.count(".") != 1:
            raise ConfigError(
                f"[sweep] key must look like 'section.key', got '{sweep_key}'"
            )
        section, _, key = sweep_key.partition(".")
        if section not in _ALL_SECTIONS - {"sweep"}:
            raise ConfigError(f"[sweep] key targets unknown section '{section}'")
        allowed = _SECTION_KEYS.get(section)
        if allowed is not None and key not in allowed:
            raise ConfigError(f"[sweep] key targets unknown key '{key}' in [{section}]")
        try:
            sweep_values = tuple(
                float(v) for v in sweep_sec["values"].split(",") if v.strip()
            )
        except ValueError as exc:
            raise ConfigError(f"[sweep] values must be numbers: {exc}") from exc
        if not sweep_values:
            raise ConfigError("[sweep] values must contain at least one number")
    elif parser.has_section("sweep"):
        raise ConfigError(f"a {kind} run takes no [sweep] section (use the sweep verb)")

    canonical = canonical_config_text(text)
    return RunConfig(
        kind=kind,
        beta=beta,
        hbar=hbar,
        protocol=protocol,
        statistics=statistics_of(protocol) if protocol is not None else None,
        integrator=integrator,
        oracle_enabled=oracle_enabled,
        oracle=oracle,
        sweep_key=sweep_key,
        sweep_values=sweep_values,
        canonical_text=canonical,
        digest=_digest(canonical),
        protocol_warnings=warnings,
    )


def load_config(path: str | Path, kind: str) -> RunConfig:
    """Read and validate a config file for the given run kind."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, kind)


# ---------------------------------------------------------------------------
# CSV and manifest output
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def _write_csv(path: Path, columns: list[tuple[str, np.ndarray]]) -> None:
    """Write labelled columns; headers carry units in brackets."""
    length = len(columns[0][1])
    for name, data in columns:
        if len(data) != length:
            raise ValueError(f"column '{name}' has length {len(data)} != {length}")
    lines = [",".join(name for name, _ in columns)]
    for k in range(length):
        lines.append(",".join(_fmt(data[k]) for _, data in columns))
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _manifest_skeleton(config: RunConfig) -> dict:
    return {
        "tool": "tfdyn",
        "version": __version__,
        "kind": config.kind,
        "config_digest": config.digest,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


# ---------------------------------------------------------------------------
# quench runs
# ---------------------------------------------------------------------------

def _initial_frame(protocol: Protocol) -> tuple[float, float]:
    """(mass, omega) of the static frame at t_i (mass 1 for abstract bosons)."""
    s0 = evaluate(protocol, protocol.t_i)
    if isinstance(protocol, BosonProtocol):
        return 1.0, s0.omega0
    if isinstance(protocol, OscillatorProtocol):
        return s0.mass, s0.omega
    return 1.0, s0.omega0


def _mode_columns(traj) -> list[tuple[str, np.ndarray]]:
    t_col = ("t [time]", traj.t)
    if isinstance(traj, BosonModeTrajectory):
        return [
            t_col,
            ("re_f_minus [1]", traj.f_minus.real),
            ("im_f_minus [1]", traj.f_minus.imag),
            ("re_f_plus [1]", traj.f_plus.real),
            ("im_f_plus [1]", traj.f_plus.imag),
            ("commutator_deviation [1]", traj.commutator_deviation()),
        ]
    if isinstance(traj, OscillatorModeTrajectory):
        return [
            t_col,
            ("re_v [1/sqrt(mass*freq)]", traj.v.real),
            ("im_v [1/sqrt(mass*freq)]", traj.v.imag),
            ("re_v_dot [sqrt(freq/mass)]", traj.v_dot.real),
            ("im_v_dot [sqrt(freq/mass)]", traj.v_dot.imag),
            ("mass [mass]", traj.mass),
            ("wronskian_deviation [1]", traj.wronskian_deviation()),
        ]
    columns: list[tuple[str, np.ndarray]] = [t_col]
    for name in (
        "f_a_minus", "f_a_plus", "g_a_minus", "g_a_plus",
        "f_b_minus", "f_b_plus", "g_b_minus", "g_b_plus",
    ):
        series = getattr(traj, name)
        columns.append((f"re_{name} [1]", series.real))
        columns.append((f"im_{name} [1]", series.imag))
    columns += [
        ("norm_a_deviation [1]", traj.norm_a_deviation()),
        ("norm_b_deviation [1]", traj.norm_b_deviation()),
        ("anticommutator_ab_deviation [1]", traj.anticommutator_ab_deviation()),
        ("anticommutator_adag_b_deviation [1]", traj.anticommutator_adag_b_deviation()),
    ]
    return columns


def _boson_observables(
    config: RunConfig, traj
) -> tuple[list[tuple[str, np.ndarray]], np.ndarray]:
    """Analytic observable columns for boson/oscillator runs.

    Returns the columns plus the |nu(t)|^2 series (reused by the summary).
    Every quantity refers to the final static frame: for oscillator
    protocols nu comes from the mode-function overlap (NaN where the mass
    differs from its final value, since the overlap is frame-bound), for
    abstract bosons it is |f+(t)|^2 directly.
    """
    beta, hbar = config.beta, config.hbar
    protocol = config.protocol
    m_i, omega_i = _initial_frame(protocol)
    theta = thermal_observables.theta(beta, omega_i, hbar, "boson")
    n_eq = thermal_observables.equilibrium_occupation(beta, omega_i, hbar, "boson")

    n_pts = len(traj.t)
    nu_sq = np.empty(n_pts)
    occupation = np.empty(n_pts)
    q2 = np.empty(n_pts)
    q4 = np.empty(n_pts)

    if isinstance(traj, OscillatorModeTrajectory):
        s_f = evaluate(protocol, protocol.t_f)
        ref = bogoliubov.ReferenceMode(s_f.mass, s_f.omega, protocol.t_f)
        for k in range(n_pts):
            mode = traj.sample(k)
            try:
                coeffs = bogoliubov.boson_overlap(mode, ref)
                nu_sq[k] = coeffs.production
            except ValueError:
                nu_sq[k] = math.nan
            v = mode.v
            q2[k] = thermal_observables.q_moment(1, v, theta, hbar)
            q4[k] = thermal_observables.q_moment(2, v, theta, hbar)
    else:
        scale = 1.0 / math.sqrt(2.0 * m_i * omega_i)
        for k in range(n_pts):
            mode = traj.sample(k)
            nu_sq[k] = abs(mode.f_plus) ** 2
            v = np.conj(mode.f_minus - mode.f_plus) * scale
            q2[k] = thermal_observables.q_moment(1, v, theta, hbar)
            q4[k] = thermal_observables.q_moment(2, v, theta, hbar)

    occupation[:] = nu_sq + (1.0 + 2.0 * nu_sq) * n_eq
    columns = [
        ("t [time]", traj.t),
        ("occupation_equilibrium [1]", np.full(n_pts, n_eq)),
        ("nu_sq [1]", nu_sq),
        ("occupation_evolved [1]", occupation),
        ("q2 [length^2]", q2),
        ("q4 [length^4]", q4),
    ]
    return columns, nu_sq


def _boson_oracle_columns(
    config: RunConfig, columns: list[tuple[str, np.ndarray]]
) -> fock_oracle.DoubledTrajectory:
    """Append oracle occupation/moment columns (with absolute differences)."""
    protocol, hbar = config.protocol, config.hbar
    doubled = fock_oracle.evolve_doubled_thermal(protocol, config.beta, config.oracle)
    n = config.oracle.n_levels
    m_i, omega_i = _initial_frame(protocol)
    s_f = evaluate(protocol, protocol.t_f)
    if isinstance(protocol, OscillatorProtocol):
        a_f = fock_oracle.frame_annihilation(s_f.mass, s_f.omega, n, m_i, omega_i, hbar)
    else:
        a_f = fock_oracle.frame_annihilation(1.0, omega_i, n, 1.0, omega_i, hbar)
    n_f = fock_oracle.OperatorMatrix(a_f.dag.matrix @ a_f.matrix, a_f.basis)
    q_op = fock_oracle.position_operator(n, m_i, omega_i, hbar)
    q2_op = fock_oracle.OperatorMatrix(q_op.matrix @ q_op.matrix, q_op.basis)
    q4_op = fock_oracle.OperatorMatrix(q2_op.matrix @ q2_op.matrix, q_op.basis)

    n_pts = len(doubled.t)
    oracle_occ = np.empty(n_pts)
    oracle_q2 = np.empty(n_pts)
    oracle_q4 = np.empty(n_pts)
    for k, state in enumerate(doubled.states):
        oracle_occ[k] = fock_oracle.expectation_single_factor(state, n_f).real
        oracle_q2[k] = fock_oracle.expectation_single_factor(state, q2_op).real
        oracle_q4[k] = fock_oracle.expectation_single_factor(state, q4_op).real

    by_name = dict(columns)
    columns += [
        ("oracle_occupation [1]", oracle_occ),
        ("occupation_abs_diff [1]", np.abs(by_name["occupation_evolved [1]"] - oracle_occ)),
        ("oracle_q2 [length^2]", oracle_q2),
        ("q2_abs_diff [length^2]", np.abs(by_name["q2 [length^2]"] - oracle_q2)),
        ("oracle_q4 [length^4]", oracle_q4),
        ("q4_abs_diff [length^4]", np.abs(by_name["q4 [length^4]"] - oracle_q4)),
        ("oracle_tail_weight [1]", doubled.tail_weight),
    ]
    return doubled


def _fermion_observables(config: RunConfig, traj) -> list[tuple[str, np.ndarray]]:
    production_a = np.abs(traj.f_a_plus) ** 2 + np.abs(traj.g_a_plus) ** 2
    production_b = np.abs(traj.f_b_plus) ** 2 + np.abs(traj.g_b_plus) ** 2
    return [
        ("t [time]", traj.t),
        ("production_a [1]", production_a),
        ("production_b [1]", production_b),
    ]


def _fermion_oracle_columns(
    config: RunConfig, traj, columns: list[tuple[str, np.ndarray]]
) -> fock_oracle.DoubledTrajectory:
    protocol, hbar = config.protocol, config.hbar
    doubled = fock_oracle.evolve_doubled_thermal(protocol, config.beta, config.oracle)
    omega_i = evaluate(protocol, protocol.t_i).omega0
    theta = thermal_observables.theta(config.beta, omega_i, hbar, "fermion")
    ops = fock_oracle.build_fermion_space(doubled=True)
    basis = fock_oracle.fermion_doubled()
    num_a = fock_oracle.OperatorMatrix(ops["a"].dag.matrix @ ops["a"].matrix, basis)
    num_b = fock_oracle.OperatorMatrix(ops["b"].dag.matrix @ ops["b"].matrix, basis)

    n_pts = len(doubled.t)
    occ_a = np.empty(n_pts)
    occ_b = np.empty(n_pts)
    residual = np.empty(n_pts)
    for k, state in enumerate(doubled.states):
        occ_a[k] = fock_oracle.expectation(state, num_a).real
        occ_b[k] = fock_oracle.expectation(state, num_b).real
        res = fock_oracle.thermal_state_condition_residual(state, traj.sample(k), theta)
        residual[k] = max(res.values())
    columns += [
        ("oracle_occupation_a [1]", occ_a),
        ("oracle_occupation_b [1]", occ_b),
        ("oracle_condition_residual_max [1]", residual),
        ("oracle_tail_weight [1]", doubled.tail_weight),
    ]
    return doubled


def run_quench(config: RunConfig, out_dir: str | Path) -> dict:
    """Execute one quench run and write its artifact set.

    Returns the manifest (also written to ``manifest.json``).  May raise
    ``IntegrationError`` or ``TruncationError``; nothing is written in that
    case beyond the output directory itself.
    """
    if config.kind != "quench":
        raise ValueError(f"run_quench got a '{config.kind}' config")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    if config.statistics == "fermion":
        traj = solve_fermion_modes(config.protocol, config.integrator)
        observables = _fermion_observables(config, traj)
    elif isinstance(config.protocol, OscillatorProtocol):
        traj = solve_oscillator_mode(config.protocol, config.integrator)
        observables, _ = _boson_observables(config, traj)
    else:
        traj = solve_boson_mode(config.protocol, config.integrator)
        observables, _ = _boson_observables(config, traj)

    doubled = None
    if config.oracle_enabled:
        if config.statistics == "fermion":
            doubled = _fermion_oracle_columns(config, traj, observables)
        else:
            doubled = _boson_oracle_columns(config, observables)

    manifest = _manifest_skeleton(config)
    manifest.update(
        {
            "statistics": config.statistics,
            "beta": config.beta,
            "hbar": config.hbar,
            "protocol_warnings": list(config.protocol_warnings),
            "integrator_stats": asdict(traj.stats),
            "drift": {k: float(v) for k, v in traj.drift.items()},
            "checks": [],
            "outputs": ["modes.csv", "observables.csv"],
        }
    )
    if doubled is not None:
        final_report = fock_oracle.truncation_report(doubled.states[-1])
        manifest["oracle"] = {
            "enabled": True,
            "n_levels": config.oracle.n_levels,
            "substeps_per_unit": config.oracle.substeps_per_unit,
            "max_tail_weight": float(np.max(doubled.tail_weight)),
            "max_norm_deviation": float(np.max(doubled.norm_deviation)),
            "commutator_defect": final_report.commutator_defect,
        }
    else:
        manifest["oracle"] = {"enabled": False}

    _write_csv(out / "modes.csv", _mode_columns(traj))
    _write_csv(out / "observables.csv", observables)
    manifest["duration_seconds"] = time.perf_counter() - started
    _write_manifest(out / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _entry_text(base_text: str, sweep_key: str, value: float) -> str:
    """Derive a standalone quench config for one grid point."""
    parser = _parse_ini(base_text)
    parser.remove_section("sweep")
    if parser.has_section("run"):
        parser.set("run", "kind", "quench")
    section, _, key = sweep_key.partition(".")
    if not parser.has_section(section):
        parser.add_section(section)
    parser.set(section, key, _fmt(value))
    lines = []
    for name in sorted(parser.sections()):
        lines.append(f"[{name}]")
        for k in sorted(parser[name]):
            lines.append(f"{k} = {parser[name][k]}")
    return "\n".join(lines) + "\n"


def _run_sweep_entry(entry_text: str, entry_dir: str) -> dict:
    """Worker body: re-parse the derived config and run it in isolation."""
    entry_config = parse_config(entry_text, "quench")
    manifest = run_quench(entry_config, entry_dir)
    observables = _read_csv_columns(Path(entry_dir) / "observables.csv")
    finals = {
        name.split(" [")[0]: values[-1]
        for name, values in observables.items()
        if name.split(" [")[0]
        in ("nu_sq", "occupation_evolved", "production_a", "production_b")
    }
    return {
        "config_digest": manifest["config_digest"],
        "drift": manifest["drift"],
        "finals": finals,
        "duration_seconds": manifest["duration_seconds"],
    }


def _read_csv_columns(path: Path) -> dict[str, np.ndarray]:
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    body = np.array(
        [[float(cell) for cell in line.split(",")] for line in lines[1:]]
    )
    return {name: body[:, k] for k, name in enumerate(header)}


def run_sweep(config: RunConfig, out_dir: str | Path) -> dict:
    """Run the parameter grid and assemble the summary in grid order.

    Worker count comes from the ``TFDYN_WORKERS`` environment variable
    (default 1, serial); each entry re-parses its own derived config, so
    entries share no state and the artifacts are identical however the grid
    is scheduled.
    """
    if config.kind != "sweep":
        raise ValueError(f"run_sweep got a '{config.kind}' config")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    entries = []
    for index, value in enumerate(config.sweep_values):
        text = _entry_text(config.canonical_text, config.sweep_key, value)
        parse_config(text, "quench")  # fail before any work is scheduled
        entries.append((index, value, text, str(out / f"entry_{index:03d}")))

    workers_raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        workers = max(1, int(workers_raw))
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got '{workers_raw}'") from exc

    results: list[dict | None] = [None] * len(entries)
    if workers == 1 or len(entries) == 1:
        for index, _, text, entry_dir in entries:
            results[index] = _run_sweep_entry(text, entry_dir)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_run_sweep_entry, text, entry_dir): index
                for index, _, text, entry_dir in entries
            }
            for future, index in futures.items():
                results[index] = future.result()

    final_keys = sorted(results[0]["finals"])
    drift_keys = sorted(results[0]["drift"])
    columns: list[tuple[str, np.ndarray]] = [
        ("index [1]", np.arange(len(entries), dtype=float)),
        (f"{config.sweep_key} [1]", np.array([value for _, value, _, _ in entries])),
    ]
    for key in final_keys:
        columns.append(
            (f"final_{key} [1]", np.array([r["finals"][key] for r in results]))
        )
    for key in drift_keys:
        columns.append(
            (f"max_{key}_deviation [1]", np.array([r["drift"][key] for r in results]))
        )
    _write_csv(out / "sweep_summary.csv", columns)

    manifest = _manifest_skeleton(config)
    manifest.update(
        {
            "sweep_key": config.sweep_key,
            "entries": [
                {
                    "index": index,
                    "value": value,
                    "dir": f"entry_{index:03d}",
                    **results[index],
                }
                for index, value, _, _ in entries
            ],
            "checks": [],
            "outputs": ["sweep_summary.csv"]
            + [f"entry_{i:03d}" for i in range(len(entries))],
            "duration_seconds": time.perf_counter() - started,
        }
    )
    _write_manifest(out / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def run_verify(
    config: RunConfig | None, out_dir: str | Path | None = None
) -> tuple[dict, list[verification.CheckResult]]:
    """Execute the acceptance suite; manifest lists every check exactly once."""
    if config is not None and config.kind != "verify":
        raise ValueError(f"run_verify got a '{config.kind}' config")
    started = time.perf_counter()
    if config is None:
        settings = verification.VerificationSettings()
        digest = _digest(canonical_config_text(""))
        skeleton = {
            "tool": "tfdyn",
            "version": __version__,
            "kind": "verify",
            "config_digest": digest,
            "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
    else:
        settings = verification.VerificationSettings(
            rel_tol=config.integrator.rel_tol,
            abs_tol=config.integrator.abs_tol,
            oracle_enabled=config.oracle_enabled,
            n_levels=config.oracle.n_levels,
            substeps_per_unit=config.oracle.substeps_per_unit,
            hbar=config.hbar,
        )
        skeleton = _manifest_skeleton(config)

    results = verification.run_all(settings)
    names = [r.name for r in results]
    if sorted(names) != sorted(verification.CHECK_NAMES) or len(set(names)) != len(names):
        raise RuntimeError("verification suite did not report every check exactly once")

    skeleton["checks"] = [
        {
            "name": r.name,
            "status": "skipped" if r.skipped else ("pass" if r.passed else "fail"),
            "measured": None if r.skipped else r.measured,
            "tolerance": None if r.skipped else r.tolerance,
            "detail": r.detail,
        }
        for r in results
    ]
    skeleton["all_passed"] = all(r.passed for r in results if not r.skipped)
    skeleton["duration_seconds"] = time.perf_counter() - started

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_manifest(out / "manifest.json", skeleton)
    return skeleton, results
