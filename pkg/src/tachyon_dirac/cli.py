"""Command-line entry point ``tdirac``.

Subcommands: ``verify-algebra``, ``dispersion``, ``planewave``, ``weyl-limit``
and ``evolve``.  Every run writes CSV (with a ``#`` comment header echoing the
normalized configuration) or JSON (``{"meta": ..., "rows": [...]}``).  Floats
are printed with 17 significant digits and no timestamps are written, so equal
configurations give byte-identical output.

Exit status: 0 success, 1 invalid configuration, 2 numerical invariant failed.
Failures print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, algebra, chirality, evolution, kinematics, planewave
from .algebra import ParticleKind
from .errors import InvariantViolation, SubcriticalContent, TachyonDiracError
from .evolution import SubcriticalPolicy

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2

CHARGE_TOLERANCE = 1e-10
EIGEN_TOLERANCE = 1e-12

DISPERSION_COLUMNS = ["m_s", "p", "E", "u_s", "group_velocity", "mass_square", "dispersion_residual"]
PLANEWAVE_COLUMNS = [
    "m_s", "p", "helicity", "energy_sign", "index", "E", "A", "N",
    "psi1_re", "psi1_im", "psi2_re", "psi2_im", "psi3_re", "psi3_im", "psi4_re", "psi4_im",
    "rho", "j_x", "j_y", "j_z", "norm", "scalar", "pseudoscalar_re", "pseudoscalar_im",
    "eigen_residual",
]
WEYL_COLUMNS = ["m_s", "p", "m_over_p", "ratio", "ratio_over_m"]
ALGEBRA_COLUMNS = ["name", "exact", "residual", "tolerance", "passed"]
EVOLVE_COLUMNS = ["t", "Q", "norm", "centroid_norm", "centroid_rho", "continuity_residual"]


class ConfigError(TachyonDiracError, ValueError):
    pass


# ---------------------------------------------------------------------------
# formatting

def fmt_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value) -> str:
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "null" if not math.isfinite(v) else format(v, ".17g")
    if value is None:
        return "null"
    return json.dumps(str(value))


def render(rows: list[dict], columns: list[str], meta: dict, fmt: str) -> str:
    if fmt == "json":
        body = {"meta": meta, "rows": [{c: r[c] for c in columns} for r in rows]}
        return _json_value(body) + "\n"
    out = io.StringIO()
    for key, value in meta.items():
        out.write(f"# {key} = {fmt_value(value)}\n")
    out.write(",".join(columns) + "\n")
    for r in rows:
        out.write(",".join(fmt_value(r[c]) for c in columns) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    output: str = "-"
    format: str = "csv"

    def canonical(self) -> dict:
        """Normalized, order-stable echo of the configuration."""
        meta = {"tool": f"tdirac {__version__}", "subcommand": self.subcommand}
        for key in sorted(self.parameters):
            value = self.parameters[key]
            meta[f"param.{key}"] = value.value if hasattr(value, "value") else value
        meta["format"] = self.format
        return meta


EVOLVE_DEFAULTS = {
    "mass_ev": 1.0,
    "k0_over_msc": 10.0,
    "sigma_k": 0.5,
    "grid_n": 4096,
    "length": 400.0,
    "dt": 0.01,
    "steps": 2000,
    "kind": "antineutrino",
    "policy": "project-out",
    "output_path": "-",
    "output_every": 10,
    "x0": 0.0,
    "subcritical_fraction": 0.0,
    "subcritical_k_over_msc": 0.97,
    "subcritical_sigma_k": 0.01,
    "dump_path": "",
    "format": "csv",
}

_INT_KEYS = {"grid_n", "steps", "output_every"}
_STR_KEYS = {"kind", "policy", "output_path", "dump_path", "format"}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in EVOLVE_DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def normalize_evolve_config(values: dict) -> dict:
    cfg = dict(EVOLVE_DEFAULTS)
    for key, value in values.items():
        try:
            if key in _INT_KEYS:
                cfg[key] = int(value)
            elif key in _STR_KEYS:
                cfg[key] = str(value)
            else:
                cfg[key] = float(value)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {value!r}") from None
    try:
        cfg["kind"] = ParticleKind.parse(cfg["kind"]).value
        cfg["policy"] = SubcriticalPolicy.parse(cfg["policy"]).value
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg['format']!r}")
    if not cfg["mass_ev"] > 0:
        raise ConfigError("mass_ev must be positive")
    if not cfg["k0_over_msc"] > 1:
        raise ConfigError("k0_over_msc must exceed 1")
    if not cfg["sigma_k"] > 0:
        raise ConfigError("sigma_k must be positive")
    if cfg["steps"] < 1 or cfg["output_every"] < 1:
        raise ConfigError("steps and output_every must be positive")
    if not 0.0 <= cfg["subcritical_fraction"] < 1.0:
        raise ConfigError("subcritical_fraction must lie in [0, 1)")
    if cfg["subcritical_fraction"] > 0 and not abs(cfg["subcritical_k_over_msc"]) < 1:
        raise ConfigError("subcritical_k_over_msc must lie in (-1, 1)")
    return cfg


# ---------------------------------------------------------------------------
# subcommand pipelines

def run_verify_algebra(cfg: RunConfig) -> tuple[list[dict], list[str], dict]:
    rows = algebra.verify_identities()
    failed = [r["name"] for r in rows if not r["passed"]]
    meta = cfg.canonical()
    meta["identities"] = len(rows)
    meta["failed"] = len(failed)
    if failed:
        raise InvariantViolation(failed[0], f"{len(failed)} identities failed, first: {failed[0]}")
    return rows, ALGEBRA_COLUMNS, meta


def _momentum(params: dict) -> float:
    m = params["mass_ev"]
    if params.get("p_ev") is not None:
        return params["p_ev"]
    return params["p_over_msc"] * m


def run_dispersion(cfg: RunConfig):
    p_ = cfg.parameters
    m = p_["mass_ev"]
    if p_.get("u_over_c") is not None:
        point = kinematics.KinematicPoint.from_speed(m, p_["u_over_c"])
    else:
        point = kinematics.KinematicPoint.from_momentum(m, _momentum(p_))
    vg = kinematics.group_velocity(m, point.p) if point.p > m or m == 0 else math.nan
    row = {
        "m_s": point.m_s, "p": point.p, "E": point.E, "u_s": point.u_s,
        "group_velocity": vg, "mass_square": point.mass_square,
        "dispersion_residual": point.dispersion_residual(),
    }
    return [row], DISPERSION_COLUMNS, cfg.canonical()


def run_planewave(cfg: RunConfig):
    p_ = cfg.parameters
    m = p_["mass_ev"]
    p = _momentum(p_)
    kind = ParticleKind.parse(p_["kind"])
    sol = planewave.build_solution(m, p, p_["helicity"], p_["energy_sign"])
    spinor = sol.spinor
    if kind is ParticleKind.NEUTRINO:
        spinor = chirality.apply_kind_map(spinor)
    h = algebra.hamiltonian(m, p, kind)
    residual = float(np.max(np.abs(h @ spinor - sol.E * spinor)) / abs(sol.E))
    row = {
        "m_s": m, "p": p, "helicity": sol.helicity, "energy_sign": sol.energy_sign,
        "index": sol.index, "E": sol.E, "A": planewave.component_A(m, p),
        "N": planewave.normalization_N(m, p), "eigen_residual": residual,
    }
    for i, c in enumerate(spinor, 1):
        row[f"psi{i}_re"] = c.real
        row[f"psi{i}_im"] = c.imag
    row.update(planewave.bilinears(spinor))
    if residual > EIGEN_TOLERANCE:
        raise InvariantViolation("eigen_residual", f"|H psi - E psi|/|E| = {residual:.3e} > {EIGEN_TOLERANCE:.0e}")
    return [row], PLANEWAVE_COLUMNS, cfg.canonical()


def weyl_rows(p: float, min_ratio: float, max_ratio: float, points: int) -> list[dict]:
    rows = []
    for r in np.logspace(math.log10(min_ratio), math.log10(max_ratio), points):
        m = float(r) * p
        ratio = chirality.mass_coupling_ratio(m, p)
        rows.append({"m_s": m, "p": p, "m_over_p": m / p, "ratio": ratio, "ratio_over_m": ratio / m})
    return rows


def loglog_slope(rows: list[dict]) -> float:
    x = np.log([r["m_s"] for r in rows])
    y = np.log([r["ratio"] for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def run_weyl_limit(cfg: RunConfig):
    p_ = cfg.parameters
    if not 0 < p_["min_ratio"] < p_["max_ratio"] < 1:
        raise ConfigError("need 0 < min-ratio < max-ratio < 1")
    if p_["points"] < 2:
        raise ConfigError("points must be >= 2")
    rows = weyl_rows(p_["p_ev"], p_["min_ratio"], p_["max_ratio"], p_["points"])
    meta = cfg.canonical()
    meta["loglog_slope"] = loglog_slope(rows)
    return rows, WEYL_COLUMNS, meta


def initial_state(cfg: dict) -> evolution.WavepacketState:
    m = cfg["mass_ev"]
    grid = evolution.GridSpec(cfg["grid_n"], cfg["length"], cfg["dt"], cfg["steps"])
    kind = ParticleKind.parse(cfg["kind"])
    k0 = cfg["k0_over_msc"] * m
    state = evolution.gaussian_packet(grid, m, k0, cfg["sigma_k"], x0=cfg["x0"], kind=kind)
    frac = cfg["subcritical_fraction"]
    if frac > 0:
        sub = evolution.subcritical_packet(grid, m, cfg["subcritical_k_over_msc"] * m,
                                           cfg["subcritical_sigma_k"], x0=cfg["x0"], kind=kind)
        # disjoint momentum support: the norms add exactly
        state = evolution.WavepacketState(grid, math.sqrt(1 - frac) * state.field + math.sqrt(frac) * sub.field)
    return state


def run_evolve(cfg: RunConfig):
    c = cfg.parameters
    m = c["mass_ev"]
    try:
        evolution.check_no_wrap(m, c["k0_over_msc"] * m, c["dt"], c["steps"], c["length"])
        state = initial_state(c)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        rows, final = evolution.simulate(state, m, c["steps"], c["dt"], c["kind"], c["policy"], c["output_every"])
    except SubcriticalContent as exc:
        raise InvariantViolation("subcritical_content", str(exc)) from None
    if c["dump_path"]:
        evolution.write_field_dump(c["dump_path"], final)
    meta = cfg.canonical()
    q0 = rows[0]["Q"]
    drift = max(abs(r["Q"] - q0) for r in rows) / abs(q0) if q0 != 0 else math.nan
    meta["max_relative_charge_drift"] = drift
    if q0 != 0 and not drift < CHARGE_TOLERANCE:
        raise InvariantViolation("charge_conservation",
                                 f"relative charge drift {drift:.3e} exceeds {CHARGE_TOLERANCE:.0e}")
    return rows, EVOLVE_COLUMNS, meta


PIPELINES = {
    "verify-algebra": run_verify_algebra,
    "dispersion": run_dispersion,
    "planewave": run_planewave,
    "weyl-limit": run_weyl_limit,
    "evolve": run_evolve,
}


def run(config: RunConfig) -> tuple[int, str]:
    """Execute a configuration; returns ``(exit_status, rendered_output)``.

    Raises the library exceptions; ``main`` maps them to exit codes.
    """
    rows, columns, meta = PIPELINES[config.subcommand](config)
    return EXIT_OK, render(rows, columns, meta, config.format)


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tdirac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tdirac {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")

    common(sub.add_parser("verify-algebra", help="check every matrix identity"))

    p = sub.add_parser("dispersion", help="kinematic point from momentum or speed")
    p.add_argument("--mass-ev", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p-over-msc", type=float)
    g.add_argument("--p-ev", type=float)
    g.add_argument("--u-over-c", type=float)
    common(p)

    p = sub.add_parser("planewave", help="exact bispinor and its bilinears")
    p.add_argument("--mass-ev", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p-over-msc", type=float)
    g.add_argument("--p-ev", type=float)
    p.add_argument("--helicity", type=int, choices=[1, -1], default=1)
    p.add_argument("--energy-sign", type=int, choices=[1, -1], default=1)
    p.add_argument("--kind", default="antineutrino", choices=["antineutrino", "neutrino"])
    common(p)

    p = sub.add_parser("weyl-limit", help="mass-coupling ratio sweep at fixed momentum")
    p.add_argument("--p-ev", type=float, default=1.0)
    p.add_argument("--min-ratio", type=float, default=1e-6)
    p.add_argument("--max-ratio", type=float, default=1e-2)
    p.add_argument("--points", type=int, default=9)
    common(p)

    p = sub.add_parser("evolve", help="spectral wavepacket evolution from a config file")
    p.add_argument("--config", required=True, help="key = value configuration file")
    common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    name = args.subcommand
    if name == "evolve":
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        params = normalize_evolve_config(parse_config_text(text))
        fmt = args.format or params["format"]
        del params["format"]
        output = args.output or params["output_path"]
        return RunConfig(name, params, output, fmt)
    params = {k: v for k, v in vars(args).items() if k not in ("subcommand", "format", "output")}
    for key in ("mass_ev", "p_ev", "p_over_msc", "u_over_c"):
        value = params.get(key)
        if value is not None and not math.isfinite(value):
            raise ConfigError(f"{key} must be finite")
    if params.get("mass_ev") is not None and params["mass_ev"] < 0:
        raise ConfigError("mass-ev must be non-negative")
    params = {k: v for k, v in params.items() if v is not None}
    return RunConfig(name, params, args.output or "-", args.format or "csv")


def _fail(code: int, check: str, message: str) -> int:
    sys.stderr.write(json.dumps({"status": "error", "exit_code": code, "check": check, "message": message}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
        status, text = run(config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, exc.check, str(exc))
    except TachyonDiracError as exc:
        # domain preconditions (subcritical momentum, massless normalization, ...) are input errors
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    if config.output == "-":
        sys.stdout.write(text)
    else:
        Path(config.output).write_text(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
