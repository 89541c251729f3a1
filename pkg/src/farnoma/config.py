"""Run configuration: flat dotted-key text format.

Grammar (one statement per line)::

    # comment (also allowed after a value)
    section.key = value

Values are numbers, booleans (``true``/``false``), bare strings, or
comma-separated number lists.  Unknown keys are rejected with a
closest-match suggestion; all values are range-checked.  The four node
positions are required, everything else has documented defaults.
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field

from ._quadrature import QuadratureSpec
from .fas import FasGeometry
from .mvn import MvnSpec
from .scenario import Scenario

SWEEP_MODES = ("op_curve", "mu_map", "validate")


class ConfigError(Exception):
    """Invalid configuration file or value; maps to CLI exit code 2."""


@dataclass(frozen=True)
class SweepConfig:
    mode: str | None
    snr_db: tuple[float, ...]
    beta_b: tuple[float, ...]
    beta_f: tuple[float, ...]
    p_f_offset_db: float
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    step: float
    heights: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    fas: FasGeometry
    mvn: MvnSpec
    quad: QuadratureSpec
    mc_trials: int
    mc_seed: int
    sweep: SweepConfig
    corrupt_correlation: bool = False
    source_text: str = field(default="", repr=False)


def _parse_scalar(raw: str):
    low = raw.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def _parse_value(raw: str):
    if "," in raw:
        parts = [p.strip() for p in raw.split(",")]
        vals = []
        for p in parts:
            v = _parse_scalar(p)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"list elements must be numbers, got {p!r}")
            vals.append(float(v))
        return tuple(vals)
    return _parse_scalar(raw)


def parse_config_text(text: str) -> dict:
    """Raw key -> value mapping with line-number errors."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        raw = raw.strip()
        if not key or not raw:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = _parse_value(raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return out


# key -> (kind, default); kind in {float, int, bool, vec3, floats, choice}
_KEYS: dict[str, tuple[str, object]] = {
    "scenario.bs_pos": ("vec3", None),
    "scenario.u1_pos": ("vec3", None),
    "scenario.u2_pos": ("vec3", None),
    "scenario.far_pos": ("vec3", None),
    "scenario.alpha": ("float", 2.0),
    "scenario.p_b_dbm": ("float", -110.0),
    "scenario.p_f_dbm": ("float", None),  # defaults to p_b_dbm
    "scenario.noise_dbm": ("float", -130.0),
    "scenario.beta_b": ("float", 0.1),
    "scenario.beta_f": ("float", 0.1),
    "scenario.gamma_u1": ("float", 3.0),
    "scenario.gamma_u2": ("float", 3.0),
    "fas.n1": ("int", 4),
    "fas.n2": ("int", 4),
    "fas.l1": ("float", 1.0),
    "fas.l2": ("float", 1.0),
    "mvn.target_abs_error": ("float", 1e-4),
    "mvn.sample_budget": ("int", 2**13),
    "mvn.randomizations": ("int", 12),
    "mvn.seed": ("int", 1234),
    "quad.rel_tol": ("float", 1e-6),
    "quad.abs_tol": ("float", 1e-9),
    "quad.max_panel_depth": ("int", 18),
    "quad.panel_nodes": ("int", 15),
    "quad.tail_mass": ("float", 1e-14),
    "mc.trials": ("int", 1_000_000),
    "mc.seed": ("int", 5678),
    "sweep.mode": ("choice", None),
    "sweep.snr_db": ("floats", (0.0, 10.0, 20.0, 30.0, 40.0)),
    "sweep.beta_b": ("floats", None),  # defaults to scenario.beta_b
    "sweep.beta_f": ("floats", None),  # defaults to scenario.beta_f
    "sweep.p_f_offset_db": ("float", 0.0),
    "sweep.x_min": ("float", 0.2),
    "sweep.x_max": ("float", 4.0),
    "sweep.y_min": ("float", -1.9),
    "sweep.y_max": ("float", 1.9),
    "sweep.step": ("float", 0.2),
    "sweep.heights": ("floats", (0.6,)),
    "validate.corrupt_correlation": ("bool", False),
}

_REQUIRED = ("scenario.bs_pos", "scenario.u1_pos", "scenario.u2_pos", "scenario.far_pos")


def _coerce(key: str, kind: str, value):
    if kind == "vec3":
        if not isinstance(value, tuple) or len(value) != 3:
            raise ConfigError(f"{key}: expected three comma-separated numbers")
        return tuple(float(v) for v in value)
    if kind == "floats":
        if isinstance(value, tuple):
            return tuple(float(v) for v in value)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number list")
        return (float(value),)
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true or false, got {value!r}")
        return value
    if kind == "choice":
        if value not in SWEEP_MODES:
            raise ConfigError(f"{key}: expected one of {SWEEP_MODES}, got {value!r}")
        return value
    raise AssertionError(kind)


def resolve_config(raw: dict, source_text: str = "") -> RunConfig:
    """Validate keys/ranges and assemble the typed configuration."""
    for key in raw:
        if key not in _KEYS:
            hint = difflib.get_close_matches(key, _KEYS, n=1)
            suffix = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ConfigError(f"unknown key {key!r}{suffix}")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    val: dict[str, object] = {}
    for key, (kind, default) in _KEYS.items():
        val[key] = _coerce(key, kind, raw[key]) if key in raw else default

    if val["scenario.p_f_dbm"] is None:
        val["scenario.p_f_dbm"] = val["scenario.p_b_dbm"]

    try:
        scenario = Scenario(
            bs_pos=val["scenario.bs_pos"],
            u1_pos=val["scenario.u1_pos"],
            u2_pos=val["scenario.u2_pos"],
            far_pos=val["scenario.far_pos"],
            alpha=val["scenario.alpha"],
            p_b_dbm=val["scenario.p_b_dbm"],
            p_f_dbm=val["scenario.p_f_dbm"],
            noise_dbm=val["scenario.noise_dbm"],
            beta_b=val["scenario.beta_b"],
            beta_f=val["scenario.beta_f"],
            gamma_u1=val["scenario.gamma_u1"],
            gamma_u2=val["scenario.gamma_u2"],
        )
        fas = FasGeometry(n1=val["fas.n1"], n2=val["fas.n2"], l1=val["fas.l1"], l2=val["fas.l2"])
        mvn = MvnSpec(
            target_abs_error=val["mvn.target_abs_error"],
            sample_budget=val["mvn.sample_budget"],
            randomizations=val["mvn.randomizations"],
            seed=val["mvn.seed"],
        )
        quad = QuadratureSpec(
            rel_tol=val["quad.rel_tol"],
            abs_tol=val["quad.abs_tol"],
            max_panel_depth=val["quad.max_panel_depth"],
            panel_nodes=val["quad.panel_nodes"],
            tail_mass=val["quad.tail_mass"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if val["mc.trials"] < 0:
        raise ConfigError("mc.trials: must be >= 0")
    if val["mc.seed"] < 0 or val["mvn.seed"] < 0:
        raise ConfigError("seeds must be >= 0")

    beta_b = val["sweep.beta_b"] or (scenario.beta_b,)
    beta_f = val["sweep.beta_f"] or (scenario.beta_f,)
    if len(beta_f) == 1 and len(beta_b) > 1:
        beta_f = beta_f * len(beta_b)
    if len(beta_b) != len(beta_f):
        raise ConfigError("sweep.beta_b and sweep.beta_f must have matching lengths")
    for name, betas in (("sweep.beta_b", beta_b), ("sweep.beta_f", beta_f)):
        for b in betas:
            if not 0.0 <= b < 0.5:
                raise ConfigError(f"{name}: entries must be in [0, 0.5), got {b}")
    if not val["sweep.step"] > 0.0:
        raise ConfigError("sweep.step: must be > 0")
    if val["sweep.x_max"] < val["sweep.x_min"] or val["sweep.y_max"] < val["sweep.y_min"]:
        raise ConfigError("sweep grid ranges must satisfy min <= max")
    if not val["sweep.heights"]:
        raise ConfigError("sweep.heights: must be non-empty")

    sweep = SweepConfig(
        mode=val["sweep.mode"],
        snr_db=tuple(val["sweep.snr_db"]),
        beta_b=tuple(beta_b),
        beta_f=tuple(beta_f),
        p_f_offset_db=val["sweep.p_f_offset_db"],
        x_min=val["sweep.x_min"],
        x_max=val["sweep.x_max"],
        y_min=val["sweep.y_min"],
        y_max=val["sweep.y_max"],
        step=val["sweep.step"],
        heights=tuple(val["sweep.heights"]),
    )
    return RunConfig(
        scenario=scenario,
        fas=fas,
        mvn=mvn,
        quad=quad,
        mc_trials=val["mc.trials"],
        mc_seed=val["mc.seed"],
        sweep=sweep,
        corrupt_correlation=val["validate.corrupt_correlation"],
        source_text=source_text,
    )


def load_config(path) -> RunConfig:
    """Parse and validate a configuration file.

    Raises
    ------
    ConfigError
        Missing file, parse error (with line number), unknown key
        (with suggestion), or out-of-range value (with key name).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return resolve_config(parse_config_text(text), source_text=text)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def resolved_text(cfg: RunConfig) -> str:
    """Echo of the fully resolved configuration, one key per line."""
    sc, fas, mvn, quad, sw = cfg.scenario, cfg.fas, cfg.mvn, cfg.quad, cfg.sweep
    pairs = [
        ("scenario.bs_pos", sc.bs_pos),
        ("scenario.u1_pos", sc.u1_pos),
        ("scenario.u2_pos", sc.u2_pos),
        ("scenario.far_pos", sc.far_pos),
        ("scenario.alpha", sc.alpha),
        ("scenario.p_b_dbm", sc.p_b_dbm),
        ("scenario.p_f_dbm", sc.p_f_dbm),
        ("scenario.noise_dbm", sc.noise_dbm),
        ("scenario.beta_b", sc.beta_b),
        ("scenario.beta_f", sc.beta_f),
        ("scenario.gamma_u1", sc.gamma_u1),
        ("scenario.gamma_u2", sc.gamma_u2),
        ("fas.n1", fas.n1),
        ("fas.n2", fas.n2),
        ("fas.l1", fas.l1),
        ("fas.l2", fas.l2),
        ("mvn.target_abs_error", mvn.target_abs_error),
        ("mvn.sample_budget", mvn.sample_budget),
        ("mvn.randomizations", mvn.randomizations),
        ("mvn.seed", mvn.seed),
        ("quad.rel_tol", quad.rel_tol),
        ("quad.abs_tol", quad.abs_tol),
        ("quad.max_panel_depth", quad.max_panel_depth),
        ("quad.panel_nodes", quad.panel_nodes),
        ("quad.tail_mass", quad.tail_mass),
        ("mc.trials", cfg.mc_trials),
        ("mc.seed", cfg.mc_seed),
        ("sweep.mode", sw.mode if sw.mode else "op_curve"),
        ("sweep.snr_db", sw.snr_db),
        ("sweep.beta_b", sw.beta_b),
        ("sweep.beta_f", sw.beta_f),
        ("sweep.p_f_offset_db", sw.p_f_offset_db),
        ("sweep.x_min", sw.x_min),
        ("sweep.x_max", sw.x_max),
        ("sweep.y_min", sw.y_min),
        ("sweep.y_max", sw.y_max),
        ("sweep.step", sw.step),
        ("sweep.heights", sw.heights),
        ("validate.corrupt_correlation", cfg.corrupt_correlation),
    ]
    return "\n".join(f"{k} = {_fmt(v)}" for k, v in pairs) + "\n"
