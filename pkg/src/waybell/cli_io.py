"""Command-line front end and deterministic CSV/JSON writers.

Every float leaving the tool is written with 12 significant digits; the
readers here parse those strings back, so a value read from disk equals
``round12`` of the in-memory value exactly.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, bell_suite, fitting, lhv_models, quantum_kernel, sampler
from .bell_suite import STANDARD_SETTINGS, ChshResult, ChshSettings
from .errors import WaybellError
from .lhv_models import WayParams
from .quantum_kernel import StateKind

log = logging.getLogger("waybell")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

SUBCOMMANDS = ("curve", "chsh", "scan", "fit", "mc", "bound", "single")
DEFAULT_DELTA_LS = (0.5, 0.77, 1.0, 2.0, 10.0)
DEFAULT_THETA_POINTS = {"curve": 401, "fit": fitting.DEFAULT_GRID, "bound": 181, "single": 1000}
TABLE_COMMANDS = ("curve", "bound", "single")
_COLUMN_TAGS = {
    StateKind.SINGLET: "singlet_dL",
    StateKind.TRIPLET_PSI_PLUS: "psiplus_dLxi",
    StateKind.TRIPLET_PHI_MINUS: "phiminus_dLxi",
}


class UsageError(Exception):
    """Bad flags or config values; maps to exit code 2."""


# ---------------------------------------------------------------- formatting

def format_number(x: float) -> str:
    return f"{float(x):.12g}"


def round12(x: float) -> float:
    return float(format_number(x))


def _rounded(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round12(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_rounded(v) for v in obj]
    if hasattr(obj, "value"):  # enums
        return obj.value
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(payload: dict) -> str:
    return json.dumps(_rounded(payload), indent=2) + "\n"


def loads_json(text: str) -> dict:
    return json.loads(text)


@dataclass
class CurveTable:
    header: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError("row width does not match header")

    def column(self, name: str) -> list[float]:
        j = self.header.index(name)
        return [row[j] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([format_number(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return dumps_json({"columns": self.header, "rows": self.rows})

    @classmethod
    def from_csv(cls, text: str) -> "CurveTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        return cls(header, [[float(v) for v in row] for row in reader])

    @classmethod
    def from_json(cls, text: str) -> "CurveTable":
        data = loads_json(text)
        return cls(list(data["columns"]), [list(map(float, r)) for r in data["rows"]])


def read_output(path: str | Path):
    """Parse a file written by the tool: a CurveTable for CSV, else JSON."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = loads_json(text)
        if set(data) == {"columns", "rows"}:
            return CurveTable.from_json(text)
        return data
    return CurveTable.from_csv(text)


# ------------------------------------------------------------------- config

@dataclass
class RunConfig:
    subcommand: str
    model: str | None = None
    states: list[StateKind] = field(default_factory=lambda: [StateKind.SINGLET])
    delta_L: list[float] = field(default_factory=lambda: list(DEFAULT_DELTA_LS))
    theta_points: int | None = None
    seed: int = 42
    n_samples: int = 1_000_000
    chunk_size: int = sampler.DEFAULT_CHUNK
    settings: ChshSettings = STANDARD_SETTINGS
    theta: float | None = None
    alpha: float | None = None
    objective: str = fitting.Objective.ZERO_MEAN_SIGNED.value
    grid_steps: int = 32
    refine_iterations: int = 50
    output_path: str | None = None
    format: str | None = None
    metadata: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        if self.format is None:
            table = self.subcommand in TABLE_COMMANDS and not (
                self.subcommand == "single" and self.alpha is not None
            )
            self.format = "csv" if table else "json"
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.format == "csv" and self.subcommand not in TABLE_COMMANDS:
            raise UsageError(f"{self.subcommand} writes JSON only")
        if self.subcommand == "single" and self.alpha is not None and self.format == "csv":
            raise UsageError("single --alpha writes JSON only")
        if self.theta_points is None:
            self.theta_points = DEFAULT_THETA_POINTS.get(self.subcommand, 401)
        if self.theta_points < 2:
            raise UsageError("theta-points must be at least 2")
        if not self.delta_L:
            raise UsageError("delta-l list is empty")
        if self.n_samples < 1 or self.chunk_size < 1:
            raise UsageError("samples and chunk-size must be positive")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.grid_steps < 8:
            raise UsageError("grid-steps must be at least 8")
        try:
            fitting.Objective(self.objective)
        except ValueError:
            raise UsageError(f"unknown objective {self.objective!r}") from None


_ANGLE_RE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(text: str | float) -> float:
    """Radians from a number or a multiple of pi such as ``3pi/4``."""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        try:
            value = float(text)
        except ValueError:
            m = _ANGLE_RE.match(text.lower())
            if not m:
                raise UsageError(f"cannot parse angle {text!r}") from None
            coeff = m.group(1)
            factor = float(coeff) if coeff not in ("", "+", "-") else float(coeff + "1")
            value = factor * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    if not math.isfinite(value):
        raise UsageError(f"angle must be finite, got {text!r}")
    return value


def _parse_list(value, parse) -> list:
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [v for v in str(value).split(",") if v.strip()]
    try:
        return [parse(v) for v in items]
    except (ValueError, WaybellError) as exc:
        raise UsageError(str(exc)) from None


def _parse_float(v) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError(f"not a finite number: {v!r}")
    return x


_OPTION_KEYS = {
    "model", "state", "delta_l", "theta_points", "seed", "samples", "chunk_size",
    "settings", "theta", "alpha", "objective", "grid_steps", "refine_iterations",
    "out", "format", "metadata",
}


def load_config_file(path: str) -> dict:
    """Flat JSON object whose keys mirror the long option names."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a single JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - _OPTION_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, value in data.items():
        if isinstance(value, (dict, list)) and key not in ("delta_l", "settings", "state"):
            raise UsageError(f"config key {key!r} must be a scalar")
    return data


def build_config(subcommand: str, options: dict) -> RunConfig:
    kw: dict[str, Any] = {"subcommand": subcommand}
    try:
        if options.get("model") is not None:
            kw["model"] = str(options["model"])
        if options.get("state") is not None:
            kw["states"] = _parse_list(options["state"], StateKind.parse)
        if options.get("delta_l") is not None:
            kw["delta_L"] = _parse_list(options["delta_l"], _parse_float)
        if options.get("settings") is not None:
            angles = _parse_list(options["settings"], parse_angle)
            if len(angles) != 4:
                raise UsageError("settings needs four angles a,a',b,b'")
            kw["settings"] = ChshSettings(*angles)
        for key, target in (("theta_points", "theta_points"), ("seed", "seed"),
                            ("samples", "n_samples"), ("chunk_size", "chunk_size"),
                            ("grid_steps", "grid_steps"), ("refine_iterations", "refine_iterations")):
            if options.get(key) is not None:
                kw[target] = int(options[key])
        for key in ("theta", "alpha"):
            if options.get(key) is not None:
                kw[key] = parse_angle(options[key])
        for key, target in (("objective", "objective"), ("out", "output_path"), ("format", "format")):
            if options.get(key) is not None:
                kw[target] = str(options[key])
        if options.get("metadata"):
            kw["metadata"] = bool(options["metadata"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(**kw)


# ----------------------------------------------------------------- commands

def _params(model: str, cfg: RunConfig, delta_L: float | None = None) -> WayParams | None:
    dl = cfg.delta_L[0] if delta_L is None else delta_L
    kind = cfg.states[0]
    if model == "way_triplet" and kind is StateKind.SINGLET:
        kind = StateKind.TRIPLET_PSI_PLUS
    if model == "base":
        return None
    return WayParams(dl, kind)


def run_curve(cfg: RunConfig) -> CurveTable:
    thetas = np.linspace(0.0, 2 * math.pi, cfg.theta_points)
    header = ["theta", "E_qm", "E_base"]
    columns = [
        bell_suite.quantum_correlation(StateKind.SINGLET)(0.0, thetas),
        lhv_models.extend_symmetry(lhv_models.base_correlation, thetas),
    ]
    for kind in cfg.states:
        for dl in cfg.delta_L:
            params = WayParams(dl, kind)
            header.append(f"E_way_{_COLUMN_TAGS[kind]}{format_number(dl)}")
            columns.append(
                lhv_models.extend_symmetry(lambda t: lhv_models.way_correlation(t, params), thetas)
            )
    rows = np.column_stack([thetas, *columns]).tolist()
    return CurveTable(header, rows)


def _chsh_payload(result: ChshResult) -> dict:
    s = result.settings
    return {
        "s_value": result.s_value,
        "settings": {"a": s.a, "a_prime": s.a_prime, "b": s.b, "b_prime": s.b_prime},
        "per_term": list(result.per_term),
        "classification": result.classification.value,
        "reference": {
            "classical": bell_suite.CLASSICAL_BOUND,
            "tsirelson": bell_suite.TSIRELSON_BOUND,
            "storz_2023": bell_suite.STORZ_2023_S,
        },
    }


def _chsh_correlation(cfg: RunConfig):
    model = cfg.model or "qm"
    if model == "qm":
        return bell_suite.quantum_correlation(cfg.states[0])
    return bell_suite.model_correlation(model, _params(model, cfg))


def run_chsh(cfg: RunConfig) -> dict:
    return _chsh_payload(bell_suite.chsh_s(_chsh_correlation(cfg), cfg.settings))


def run_scan(cfg: RunConfig) -> dict:
    result = bell_suite.max_chsh(_chsh_correlation(cfg), cfg.grid_steps, cfg.refine_iterations)
    return _chsh_payload(result)


def run_mc(cfg: RunConfig) -> dict:
    model = cfg.model or "base"
    if model not in sampler.MODELS:
        raise UsageError(f"mc model must be one of {sampler.MODELS}")
    theta = math.pi / 2 if cfg.theta is None else cfg.theta
    config = sampler.SamplerConfig(cfg.seed, cfg.n_samples, cfg.chunk_size)
    return sampler.estimate_correlation(model, theta, _params(model, cfg), config).to_dict()


def run_fit(cfg: RunConfig) -> dict:
    return fitting.fit_deltaL(cfg.theta_points, cfg.objective).to_dict()


def run_bound(cfg: RunConfig) -> CurveTable:
    if cfg.theta is not None:
        thetas = np.array([cfg.theta])
    else:
        thetas = np.linspace(0.0, math.pi, cfg.theta_points)
    rows = []
    for dl in cfg.delta_L:
        for t in thetas:
            numerator = quantum_kernel.way_numerator(StateKind.SINGLET, 0.0, float(t))
            rows.append([
                float(t), dl, lhv_models.way_bound(float(t), dl), numerator,
                abs(numerator - abs(math.sin(t))),
            ])
    return CurveTable(["theta", "delta_L", "way_bound", "numerator", "numerator_delta"], rows)


def run_single(cfg: RunConfig):
    if cfg.alpha is not None:
        return {"alpha": cfg.alpha, "delta_L": lhv_models.single_spin_required_deltaL(cfg.alpha)}
    curve = fitting.exact_deltaL_curve(cfg.theta_points)
    return CurveTable(["alpha", "delta_L_exact"], [list(p) for p in curve])


RUNNERS = {
    "curve": run_curve, "chsh": run_chsh, "scan": run_scan, "fit": run_fit,
    "mc": run_mc, "bound": run_bound, "single": run_single,
}


def render(cfg: RunConfig, payload) -> str:
    if isinstance(payload, CurveTable):
        return payload.to_csv() if cfg.format == "csv" else payload.to_json()
    return dumps_json(payload)


def execute(cfg: RunConfig) -> str:
    return render(cfg, RUNNERS[cfg.subcommand](cfg))


# ---------------------------------------------------------------------- cli

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waybell",
        description="Conservation-law-constrained hidden-variable Bell test simulator.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--model", help="qm, base, way_singlet or way_triplet")
    parser.add_argument("--state", help="singlet, triplet_psi_plus, triplet_phi_minus (comma list for curve)")
    parser.add_argument("--delta-l", dest="delta_l", help="comma-separated delta_L values")
    parser.add_argument("--theta-points", dest="theta_points", type=int)
    parser.add_argument("--theta", help="detector separation in radians (accepts e.g. pi/8)")
    parser.add_argument("--alpha", help="single-spin angle in radians")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--chunk-size", dest="chunk_size", type=int)
    parser.add_argument("--settings", help="CHSH angles a,a',b,b'")
    parser.add_argument("--objective", choices=[o.value for o in fitting.Objective])
    parser.add_argument("--grid-steps", dest="grid_steps", type=int)
    parser.add_argument("--refine-iterations", dest="refine_iterations", type=int)
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--metadata", action="store_true", default=None,
                        help="also write <out>.meta.json with a timestamp")
    parser.add_argument("--config", help="flat JSON file of option defaults")
    return parser


def _write_metadata(out: Path, argv: Sequence[str]) -> None:
    meta = {
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "argv": list(argv),
        "version": __version__,
    }
    out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        options = load_config_file(args.config) if args.config else {}
        cli = {k: v for k, v in vars(args).items() if v is not None and k not in ("subcommand", "config")}
        options.update(cli)
        cfg = build_config(args.subcommand, options)
        text = execute(cfg)
    except UsageError as exc:
        print(f"waybell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WaybellError as exc:
        print(f"waybell: numeric-domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"waybell: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if cfg.output_path:
            out = Path(cfg.output_path)
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            if cfg.metadata:
                _write_metadata(out, argv)
            log.info("wrote %s", out)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"waybell: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK
