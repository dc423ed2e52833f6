"""Command-line front end.

    biphoton <subcommand> --config run.yaml --out DIR [--formats csv,json,pgm] [--threads N]

Exit codes: 0 success, 2 config/parse/format errors, 3 numerical failure,
4 infeasible pump design. BIPHOTON_THREADS sets the default thread count.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .analysis import (
    design_check,
    hom_from_wigner,
    hom_trace,
    jsi,
    schmidt_decompose,
    schmidt_number,
    schmidt_number_flat_phase,
    visibility_study,
    wigner_minus,
)
from .config import CONFIG_FORMAT, ConfigError, RunConfig, load_config, validate_config
from .errors import BiphotonError, DesignInfeasible, FormatError, InvalidArgument, NumericalError
from .io import omega_minus_to_nm, omega_to_nm, write_columns_csv, write_json, write_matrix_csv, write_pgm
from .parallel import THREADS_ENV, resolve_threads
from .pdc import assemble_jsa, phase_match_function
from .pump import design_anyonic_profile, write_profile_csv

log = logging.getLogger("biphoton")

FORMATS = ("csv", "json", "pgm")
JSI_CORNER = "lambda_s_nm\\lambda_i_nm"


class Job:
    def __init__(self, name: str, cfg: RunConfig, out: Path, formats: set, threads: int):
        self.name = name
        self.cfg = cfg
        self.out = out
        self.formats = formats
        self.threads = threads
        self.outputs: list[str] = []
        self.results: dict = {}

    def path(self, fname: str) -> Path:
        self.outputs.append(fname)
        return self.out / fname

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats

    def write_meta(self) -> None:
        meta = {
            "tool": "biphoton",
            "version": __version__,
            "config_format": CONFIG_FORMAT,
            "command": self.name,
            "config": self.cfg.resolved(),
            "outputs": sorted(self.outputs),
            "results": self.results,
        }
        write_json(self.out / "meta.json", meta)


def _specs(job: Job):
    device = job.cfg.device()
    pump = job.cfg.pump(device)
    grid = job.cfg.grid(device, pump)
    return device, pump, grid


def _write_jsi(job: Job, jsa, stem: str = "jsi") -> None:
    g = jsa.grid
    rows, cols = omega_to_nm(g.signal_axis), omega_to_nm(g.idler_axis)
    inten = jsi(jsa)
    if job.wants("csv"):
        write_matrix_csv(job.path(f"{stem}.csv"), rows, cols, inten, JSI_CORNER)
    if job.wants("pgm"):
        write_pgm(job.path(f"{stem}.pgm"), inten)


def cmd_jsa(job: Job) -> None:
    device, pump, grid = _specs(job)
    jsa = assemble_jsa(device, pump, grid, threads=job.threads)
    _write_jsi(job, jsa)
    if job.wants("csv"):
        rows, cols = omega_to_nm(grid.signal_axis), omega_to_nm(grid.idler_axis)
        write_matrix_csv(job.path("jsa_real.csv"), rows, cols, jsa.values.real, JSI_CORNER)
        write_matrix_csv(job.path("jsa_imag.csv"), rows, cols, jsa.values.imag, JSI_CORNER)
    job.results = {"grid": _grid_info(grid)}


def _grid_info(grid) -> dict:
    return {"center_signal": grid.center_signal, "center_idler": grid.center_idler,
            "half_span": grid.half_span, "n_points": grid.n_points, "spacing": grid.spacing}


def cmd_schmidt(job: Job) -> None:
    device, pump, grid = _specs(job)
    jsa = assemble_jsa(device, pump, grid, threads=job.threads)
    res = schmidt_decompose(jsa)
    k_flat = schmidt_number_flat_phase(jsi(jsa))
    job.results = {"schmidt_number_K": res.schmidt_number_K, "schmidt_number_K_flat_phase": k_flat,
                   "grid": _grid_info(grid)}
    if job.wants("json"):
        write_json(job.path("schmidt.json"), {
            "schmidt_number_K": res.schmidt_number_K,
            "schmidt_number_K_flat_phase": k_flat,
            "singular_values": res.singular_values,
        })
    if job.wants("csv"):
        write_columns_csv(job.path("schmidt_modes.csv"), ["n", "lambda_n"],
                          [[str(i) for i in range(res.singular_values.size)], res.singular_values])


def _hom_outputs(job: Job, trace, stem: str = "hom") -> None:
    info = {"visibility": trace.visibility, "plateau": trace.plateau,
            "zero_delay_probability": trace.zero_delay_probability, "convention": trace.exchange_convention}
    job.results[stem] = info
    if job.wants("csv"):
        write_columns_csv(job.path(f"{stem}.csv"), ["tau_ps", "P"], [trace.delays_tau, trace.coincidence_probability])
    if job.wants("json"):
        write_json(job.path(f"{stem}.json"), info)


def cmd_hom(job: Job) -> None:
    device, pump, grid = _specs(job)
    jsa = assemble_jsa(device, pump, grid, threads=job.threads)
    h = job.cfg.data["hom"]
    delays = None
    if h["delays"] is not None:
        d = h["delays"]
        delays = np.linspace(d["start"], d["stop"], d["num"])
    _hom_outputs(job, hom_trace(jsa, delays, h["convention"]))


def cmd_wigner(job: Job) -> None:
    device, pump, grid = _specs(job)
    w = job.cfg.data["wigner"]
    t = np.linspace(w["t_minus"]["start"], w["t_minus"]["stop"], w["t_minus"]["num"])
    if w["source"] == "jsa":
        src = assemble_jsa(device, pump, grid, threads=job.threads)
    else:
        src = phase_match_function(pump.profile, device, pump, grid.omega_minus_offsets())
    ws = wigner_minus(src, t, omega_limit=w["omega_limit"], threads=job.threads)
    rows = omega_minus_to_nm(ws.omega_minus, pump.omega_p)
    if job.wants("csv"):
        write_matrix_csv(job.path("wigner.csv"), rows, ws.t_minus, ws.values, "dlambda_nm\\t_minus_ps")
    if job.wants("pgm"):
        write_pgm(job.path("wigner.pgm"), ws.values, signed=True)
    k = np.unravel_index(int(np.argmin(ws.values)), ws.values.shape)
    job.results = {"source": w["source"], "min_value": float(ws.values[k]),
                   "argmin_omega_minus": float(ws.omega_minus[k[0]]), "argmin_t_minus": float(ws.t_minus[k[1]])}
    _hom_outputs(job, hom_from_wigner(ws), stem="hom_from_wigner")


def cmd_design(job: Job) -> None:
    device, pump, _ = _specs(job)
    target = job.cfg.target()
    prof = design_anyonic_profile(target, device, pump, job.cfg.data["design"]["n_samples"])
    check = design_check(prof, target, device, pump)
    job.results = {"relation_residual": check["relation_residual"], "shape_error": check["shape_error"]}
    if job.wants("csv"):
        write_profile_csv(prof, job.path("pump_design.csv"))


def cmd_sweep(job: Job) -> None:
    sw = job.cfg.data["sweep"]
    if not sw["values"]:
        raise InvalidArgument("sweep.values is empty")
    ks, files = [], []
    base = job.cfg
    for idx, v in enumerate(sw["values"]):
        job.cfg = base.with_value(sw["parameter"], v)
        device, pump, grid = _specs(job)
        jsa = assemble_jsa(device, pump, grid, threads=job.threads)
        stem = f"jsi_{idx:03d}"
        _write_jsi(job, jsa, stem)
        files.append(stem)
        ks.append(schmidt_number(jsa))
    job.cfg = base
    job.results = {"parameter": sw["parameter"], "values": sw["values"], "schmidt_number_K": ks}
    if job.wants("json"):
        write_json(job.path("sweep.json"), {"parameter": sw["parameter"], "values": sw["values"],
                                            "schmidt_number_K": ks, "files": files})


def cmd_visibility(job: Job) -> None:
    device, pump, _ = _specs(job)
    n = job.cfg.data["grid"]["n_points"]
    rows = visibility_study(device, pump, job.cfg.perturbations(), n_points=n, threads=job.threads)
    table = [{"label": r.label, "visibility": r.visibility, "delta_v": r.delta_v, "zero_delay_ps": r.zero_delay}
             for r in rows]
    job.results = {"rows": table}
    if job.wants("csv"):
        write_columns_csv(job.path("visibility.csv"), ["label", "visibility", "delta_v", "zero_delay_ps"],
                          [[r.label for r in rows], [r.visibility for r in rows], [r.delta_v for r in rows],
                           [r.zero_delay for r in rows]])
    if job.wants("json"):
        write_json(job.path("visibility.json"), table)


COMMANDS: dict[str, Callable[[Job], None]] = {
    "jsa": cmd_jsa,
    "schmidt": cmd_schmidt,
    "hom": cmd_hom,
    "wigner": cmd_wigner,
    "design-pump": cmd_design,
    "sweep": cmd_sweep,
    "visibility-study": cmd_visibility,
}


def _formats(text: str) -> set:
    items = {s.strip() for s in text.split(",") if s.strip()}
    bad = items - set(FORMATS)
    if bad or not items:
        raise argparse.ArgumentTypeError(f"formats must be a subset of {','.join(FORMATS)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biphoton", description="Biphoton joint-spectrum simulator")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", required=True)
        sp.add_argument("--formats", type=_formats, default=set(FORMATS))
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")
        sp.add_argument("-v", "--verbose", action="store_true")
    sp = sub.add_parser("validate")
    sp.add_argument("--config", required=True)
    return ap


def run(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "validate":
        diags = validate_config(args.config)
        for d in diags:
            print(d)
        if not diags:
            print("config OK")
        return 0 if not diags else 2
    try:
        threads = resolve_threads(args.threads)
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        job = Job(args.command, cfg, out, args.formats, threads)
        COMMANDS[args.command](job)
        job.write_meta()
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 2
    except DesignInfeasible as exc:
        print(f"error: design infeasible: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (FormatError, InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BiphotonError as exc:  # pragma: no cover
        print(f"error: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %d files to %s", len(job.outputs) + 1, out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
