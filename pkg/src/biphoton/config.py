"""YAML run configuration: parsing, validation with line/field diagnostics,
and conversion to specs.

Format ``biphoton-config/1``. Top-level sections: device, pump, grid, hom,
wigner, design, sweep, visibility_study. Numeric fields accept plain numbers
or small arithmetic expressions in ``pi`` (e.g. ``pi/2``).
"""
from __future__ import annotations

import ast
import copy
import hashlib
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .analysis import Perturbation
from .core import DeviceSpec, FrequencyGrid, PumpSpec, make_grid, wavelength_offset_to_angle
from .errors import BiphotonError, FormatError
from .pdc import default_grid
from .pump import PROFILE_KINDS, AnyonicTarget, PumpProfile, import_sampled_profile, read_profile_csv

CONFIG_FORMAT = "biphoton-config/1"

DEFAULTS: dict[str, Any] = {
    "device": {
        "length_L": 2.0,
        "group_velocity_vg": DeviceSpec().group_velocity_vg,
        "group_index_ng": 3.5,
        "reflectivity_TE": 0.267,
        "reflectivity_TM": 0.247,
        "birefringent_comb_shift": 0.015,
        "cavity_enabled": True,
        "delta_beta": DeviceSpec().delta_beta,
    },
    "pump": {
        "wavelength_p": 773.0,
        "incidence_angle_theta": None,
        "signal_idler_offset": None,
        "pulse_duration_fwhm": 6.0,
        "profile": {
            "kind": "gaussian",
            "waist_w": 1.0,
            "phase_step_delta_phi": 0.0,
            "curvature_radius": None,
            "center_offset": 0.0,
            "file": None,
            "samples": None,
        },
    },
    "grid": {"n_points": 512, "spread": 4.0, "half_span": None, "center_signal": None, "center_idler": None},
    "hom": {"convention": "boson", "delays": None},
    "wigner": {"source": "pm", "t_minus": {"start": -20.0, "stop": 20.0, "num": 401}, "omega_limit": None},
    "design": {"exchange_phase_delta_phi": math.pi / 2, "alpha": 1.0, "beta": 0.3, "n_samples": 1024},
    "sweep": {"parameter": "pump.profile.phase_step_delta_phi", "values": []},
    "visibility_study": {"perturbations": []},
}

_NUMBER = "number"
_SCHEMA: dict[str, Any] = {
    "device": {
        "length_L": _NUMBER, "group_velocity_vg": _NUMBER, "group_index_ng": _NUMBER,
        "reflectivity_TE": _NUMBER, "reflectivity_TM": _NUMBER, "birefringent_comb_shift": _NUMBER,
        "cavity_enabled": "bool", "delta_beta": _NUMBER,
    },
    "pump": {
        "wavelength_p": _NUMBER, "incidence_angle_theta": "number?", "signal_idler_offset": "number?",
        "pulse_duration_fwhm": _NUMBER,
        "profile": {
            "kind": "str", "waist_w": "number?", "phase_step_delta_phi": _NUMBER, "curvature_radius": "number?",
            "center_offset": _NUMBER, "file": "str?", "samples": "list?",
        },
    },
    "grid": {"n_points": "int", "spread": _NUMBER, "half_span": "number?", "center_signal": "number?",
             "center_idler": "number?"},
    "hom": {"convention": "str", "delays": "range?"},
    "wigner": {"source": "str", "t_minus": "range", "omega_limit": "number?"},
    "design": {"exchange_phase_delta_phi": _NUMBER, "alpha": _NUMBER, "beta": _NUMBER, "n_samples": "int"},
    "sweep": {"parameter": "str", "values": "list"},
    "visibility_study": {"perturbations": "list"},
}
_TOP_EXTRA = {"format"}
_PERTURBATION_KEYS = {"label", "degeneracy_offset", "comb_shift", "centering_offset", "profile_file"}


class ConfigError(FormatError):
    def __init__(self, diagnostics: list["Diagnostic"]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    field: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        loc = f"line {self.line}: " if self.line else ""
        return f"{loc}{self.field}: {self.message}"


# --- numeric expressions ------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def parse_number(value: Any) -> float:
    """Number or arithmetic expression in ``pi``; raises ValueError otherwise."""
    if isinstance(value, bool):
        raise ValueError("expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a number, got {type(value).__name__}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression {value!r}")

    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError:
        raise ValueError(f"not a number: {value!r}") from None
    out = ev(tree)
    if not math.isfinite(out):
        raise ValueError(f"non-finite value {value!r}")
    return out


# --- line map ------------------------------------------------------------------

def _line_map(text: str) -> dict[str, int]:
    out: dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return out

    def walk(node, path):
        if node is None:
            return
        out.setdefault(path or "<root>", node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = str(k.value)
                p = f"{path}.{key}" if path else key
                out[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                p = f"{path}[{i}]"
                out[p] = v.start_mark.line + 1
                walk(v, p)

    walk(root, "")
    return out


# --- loading ---------------------------------------------------------------------

@dataclass
class RunConfig:
    data: dict  # resolved, defaults filled, numbers as floats
    base_dir: Path
    lines: dict = field(default_factory=dict)
    profile_digest: Optional[str] = None

    # builders
    def device(self) -> DeviceSpec:
        return DeviceSpec(**self.data["device"])

    def pump(self, device: Optional[DeviceSpec] = None) -> PumpSpec:
        p = self.data["pump"]
        prof = build_profile(p["profile"], self.base_dir)
        pump = PumpSpec(wavelength_p=p["wavelength_p"], incidence_angle_theta=p["incidence_angle_theta"],
                        pulse_duration_fwhm=p["pulse_duration_fwhm"], profile=prof)
        if p.get("signal_idler_offset") is not None:
            device = device or self.device()
            theta = wavelength_offset_to_angle(device, pump, p["signal_idler_offset"])
            pump = PumpSpec(pump.wavelength_p, theta, pump.pulse_duration_fwhm, prof)
        return pump

    def grid(self, device: DeviceSpec, pump: PumpSpec) -> FrequencyGrid:
        g = self.data["grid"]
        auto = default_grid(device, pump, g["n_points"], spread=g["spread"])
        return make_grid(
            auto.center_signal if g["center_signal"] is None else g["center_signal"],
            auto.center_idler if g["center_idler"] is None else g["center_idler"],
            auto.half_span if g["half_span"] is None else g["half_span"],
            g["n_points"],
        )

    def target(self) -> AnyonicTarget:
        d = self.data["design"]
        return AnyonicTarget(d["exchange_phase_delta_phi"], d["alpha"], d["beta"])

    def perturbations(self) -> list[Perturbation]:
        out = []
        for i, p in enumerate(self.data["visibility_study"]["perturbations"]):
            prof = None
            if p.get("profile_file"):
                prof = read_profile_csv(self.base_dir / p["profile_file"])
            out.append(Perturbation(label=p.get("label") or f"perturbation_{i}",
                                    degeneracy_offset=p.get("degeneracy_offset", 0.0),
                                    comb_shift=p.get("comb_shift", 0.0),
                                    centering_offset=p.get("centering_offset", 0.0), profile=prof))
        return out

    def with_value(self, dotted: str, value: float) -> "RunConfig":
        data = copy.deepcopy(self.data)
        node = data
        keys = dotted.split(".")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
        return RunConfig(data, self.base_dir, self.lines, self.profile_digest)

    def resolved(self) -> dict:
        out = copy.deepcopy(self.data)
        out["format"] = CONFIG_FORMAT
        if self.profile_digest:
            out["pump"]["profile"]["file_sha256"] = self.profile_digest
        return out


def build_profile(p: dict, base_dir: Path) -> PumpProfile:
    kind = p["kind"]
    off = p.get("center_offset", 0.0)
    if kind == "gaussian":
        return PumpProfile.gaussian(p["waist_w"], off)
    if kind == "phase_step":
        return PumpProfile.phase_step(p["waist_w"], p["phase_step_delta_phi"], off)
    if kind == "quadratic_phase":
        return PumpProfile.quadratic_phase(p["waist_w"], p["curvature_radius"], off)
    # sampled / designed: from file or inline rows
    if p.get("file"):
        prof = read_profile_csv(base_dir / p["file"])
    else:
        prof = import_sampled_profile(p["samples"])
    return PumpProfile(kind, samples=prof.samples, center_offset=off)


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _check_section(schema: dict, data: dict, path: str, diags: list, lines: dict) -> None:
    def add(p, msg):
        diags.append(Diagnostic(p, msg, lines.get(p)))

    for key in data:
        if key not in schema:
            add(f"{path}.{key}", "unknown field")
    for key, kind in schema.items():
        p = f"{path}.{key}"
        if key not in data:
            continue
        v = data[key]
        if isinstance(kind, dict):
            if not isinstance(v, dict):
                add(p, "expected a mapping")
            else:
                _check_section(kind, v, p, diags, lines)
            continue
        optional = kind.endswith("?")
        kind = kind.rstrip("?")
        if v is None:
            if not optional:
                add(p, "required value is missing")
            continue
        if kind == "number":
            try:
                data[key] = parse_number(v)
            except ValueError as exc:
                add(p, str(exc))
        elif kind == "int":
            if isinstance(v, bool) or not isinstance(v, int):
                add(p, "expected an integer")
        elif kind == "bool":
            if not isinstance(v, bool):
                add(p, "expected true or false")
        elif kind == "str":
            if not isinstance(v, str):
                add(p, "expected a string")
        elif kind == "list":
            if not isinstance(v, list):
                add(p, "expected a list")
        elif kind == "range":
            if not isinstance(v, dict) or set(v) != {"start", "stop", "num"}:
                add(p, "expected a mapping with start, stop, num")
                continue
            try:
                v["start"], v["stop"] = parse_number(v["start"]), parse_number(v["stop"])
            except ValueError as exc:
                add(p, str(exc))
            if isinstance(v["num"], bool) or not isinstance(v["num"], int) or v["num"] < 2:
                add(f"{p}.num", "expected an integer >= 2")


def _validate(data: dict, base_dir: Path, lines: dict) -> tuple[list[Diagnostic], Optional[str]]:
    diags: list[Diagnostic] = []

    def add(p, msg):
        diags.append(Diagnostic(p, msg, lines.get(p)))

    for key in data:
        if key not in _SCHEMA and key not in _TOP_EXTRA:
            add(key, "unknown section")
    if "format" in data and data["format"] != CONFIG_FORMAT:
        add("format", f"unsupported format {data['format']!r} (expected {CONFIG_FORMAT})")
    for sec, schema in _SCHEMA.items():
        if not isinstance(data.get(sec), dict):
            add(sec, "expected a mapping")
            continue
        _check_section(schema, data[sec], sec, diags, lines)
    if diags:
        return diags, None

    # value-level invariants
    dev = data["device"]
    probe = DeviceSpec.__new__(DeviceSpec)
    for k, v in dev.items():
        object.__setattr__(probe, k, v)
    for name, msg in DeviceSpec.problems(probe):
        add(f"device.{name}", msg)
    pump = data["pump"]
    if not pump["wavelength_p"] > 0:
        add("pump.wavelength_p", "must be > 0")
    if not pump["pulse_duration_fwhm"] > 0:
        add("pump.pulse_duration_fwhm", "must be > 0")
    if pump["incidence_angle_theta"] is not None and pump["signal_idler_offset"] is not None:
        add("pump.signal_idler_offset", "give either incidence_angle_theta or signal_idler_offset, not both")
    if pump["signal_idler_offset"] is not None and not abs(pump["signal_idler_offset"]) < 1.0:
        add("pump.signal_idler_offset", "offset must be below 1 nm in magnitude")
    prof = pump["profile"]
    digest = None
    if prof["kind"] not in PROFILE_KINDS:
        add("pump.profile.kind", f"must be one of {', '.join(PROFILE_KINDS)}")
    elif prof["kind"] in ("gaussian", "phase_step", "quadratic_phase"):
        if prof["waist_w"] is None or not prof["waist_w"] > 0:
            add("pump.profile.waist_w", "must be > 0")
        if prof["kind"] == "quadratic_phase" and not prof["curvature_radius"]:
            add("pump.profile.curvature_radius", "required (non-zero) for quadratic_phase")
    else:
        if prof.get("file"):
            path = base_dir / prof["file"]
            if not path.is_file():
                add("pump.profile.file", f"file not found: {path}")
            else:
                try:
                    read_profile_csv(path)
                    digest = hashlib.sha256(path.read_bytes()).hexdigest()
                except FormatError as exc:
                    add("pump.profile.file", f"format error: {exc}")
        elif prof.get("samples") is not None:
            try:
                import_sampled_profile(prof["samples"])
            except (FormatError, TypeError, ValueError) as exc:
                add("pump.profile.samples", f"format error: {exc}")
        else:
            add("pump.profile", "sampled/designed profiles need 'file' or 'samples'")
    grid = data["grid"]
    if grid["n_points"] < 2:
        add("grid.n_points", "must be >= 2")
    if not grid["spread"] > 0:
        add("grid.spread", "must be > 0")
    if grid["half_span"] is not None and not grid["half_span"] > 0:
        add("grid.half_span", "must be > 0")
    if data["hom"]["convention"] not in ("boson", "fermion"):
        add("hom.convention", "must be boson or fermion")
    if data["wigner"]["source"] not in ("pm", "jsa"):
        add("wigner.source", "must be pm or jsa")
    des = data["design"]
    if not 0 <= des["alpha"] <= 2:
        add("design.alpha", "must lie in [0, 2]")
    if not des["beta"] > 0:
        add("design.beta", "must be > 0")
    if des["n_samples"] < 2:
        add("design.n_samples", "must be >= 2")
    sw = data["sweep"]
    parts = sw["parameter"].split(".")
    node = data
    for k in parts:
        if not isinstance(node, dict) or k not in node:
            add("sweep.parameter", f"unknown parameter path {sw['parameter']!r}")
            break
        node = node[k]
    for i, v in enumerate(sw["values"]):
        try:
            sw["values"][i] = parse_number(v)
        except ValueError as exc:
            add(f"sweep.values[{i}]", str(exc))
    for i, p in enumerate(data["visibility_study"]["perturbations"]):
        pp = f"visibility_study.perturbations[{i}]"
        if not isinstance(p, dict):
            add(pp, "expected a mapping")
            continue
        for k in p:
            if k not in _PERTURBATION_KEYS:
                add(f"{pp}.{k}", "unknown field")
        for k in ("degeneracy_offset", "comb_shift", "centering_offset"):
            if k in p:
                try:
                    p[k] = parse_number(p[k])
                except ValueError as exc:
                    add(f"{pp}.{k}", str(exc))
        if p.get("profile_file"):
            path = base_dir / p["profile_file"]
            if not path.is_file():
                add(f"{pp}.profile_file", f"file not found: {path}")
            else:
                try:
                    read_profile_csv(path)
                except FormatError as exc:
                    add(f"{pp}.profile_file", f"format error: {exc}")
    return diags, digest


def load_config_text(text: str, base_dir: Path = Path(".")) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError([Diagnostic("<yaml>", f"syntax error: {problem}", line)]) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError([Diagnostic("<root>", "top level must be a mapping", 1)])
    lines = _line_map(text)
    data = _merge(DEFAULTS, raw)
    diags, digest = _validate(data, base_dir, lines)
    if diags:
        raise ConfigError(diags)
    return RunConfig(data, base_dir, lines, digest)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([Diagnostic("<file>", f"cannot read {path}: {exc.strerror}")]) from None
    return load_config_text(text, path.parent)


def validate_config(path) -> list[Diagnostic]:
    try:
        load_config(path)
    except ConfigError as exc:
        return exc.diagnostics
    except BiphotonError as exc:
        return [Diagnostic("<config>", str(exc))]
    return []
