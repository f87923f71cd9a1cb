"""Command-line front end.

Configuration is a flat ``key = value`` file (``#`` comments).  Keys before
any section header apply to every subcommand; a ``[minimize]``-style
section overrides them for that subcommand; ``--key value`` flags override
both.  See README.md for the key list.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .diagnostics import UpscaleReport, upscale_experiment
from .disk import FourierSeries
from .energy import BoundaryDatum, PointConfig, renormalized_energy
from .errors import ScrewDiskError, StallError
from .limit import LimitMeasure, limit_energy, limiting_boundary_measure, piecewise_constant_approx, recovery_sequence
from .optimize import MinimizeOptions, MinimizeTrace, minimize, multistart

EXIT_OK, EXIT_VALIDATION, EXIT_STALL = 0, 2, 3

KEYS = {
    "f_cos": "comma-separated cosine coefficients of f (mean is fixed to 1)",
    "f_sin": "comma-separated sine coefficients of f",
    "points": "explicit points 'x,y; x,y; ...'",
    "points_file": "JSON file holding [[x, y], ...]",
    "n": "number of dislocations",
    "n_list": "comma-separated increasing n values",
    "max_iters": "optimizer iteration cap",
    "grad_tol": "gradient sup-norm tolerance (default 1e-7 n)",
    "initial_step": "first trial step",
    "shrink_factor": "backtracking factor in (0, 1)",
    "restarts": "number of multistart runs",
    "seed": "base random seed",
    "measure": "boundary | ring | disk | square",
    "radius": "ring or disk radius",
    "half_width": "half side of the square measure",
    "h": "cell size of the square measure",
    "approx_h": "replace the measure by its piecewise constant approximation on this lattice",
    "output": "output path ('-' for stdout)",
    "trace_output": "minimize: path of the trace CSV",
}

COMMANDS = ("energy", "minimize", "upscale", "limit", "recovery")


# ---------------------------------------------------------------------------
# formatting


def fmt(x) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def to_json(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    return json.dumps(obj)


def config_json(config: PointConfig) -> str:
    return to_json(config.points.tolist()) + "\n"


def parse_config_json(text: str) -> PointConfig:
    return PointConfig(np.array(json.loads(text), dtype=float))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def trace_csv(trace: MinimizeTrace) -> str:
    return _csv(("iter", "total", "grad_norm", "min_bdist", "min_sep"), trace.rows())


def report_csv(report: UpscaleReport) -> str:
    rows = ([getattr(r, c) for c in UpscaleReport.COLUMNS] for r in report.records)
    return _csv(UpscaleReport.COLUMNS, rows)


# ---------------------------------------------------------------------------
# configuration


def load_settings(path, command: str, overrides: dict) -> dict:
    settings = {}
    if path:
        parser = configparser.ConfigParser(
            interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",), default_section="__none__"
        )
        parser.optionxform = str
        try:
            parser.read_string("[__root__]\n" + Path(path).read_text(encoding="utf-8"))
        except (OSError, configparser.Error) as exc:
            raise ScrewDiskError(f"cannot read config {path}: {exc}") from exc
        for section in ("__root__", command):
            if parser.has_section(section):
                settings.update(parser.items(section))
    settings.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(settings) - set(KEYS)
    if unknown:
        raise ScrewDiskError(f"unknown configuration keys: {sorted(unknown)}")
    return settings


def _floats(text) -> list:
    text = str(text).strip()
    return [float(t) for t in text.split(",") if t.strip()] if text else []


def _get(settings, key, conv, default=None, required=False):
    if key not in settings:
        if required:
            raise ScrewDiskError(f"missing required key {key!r}")
        return default
    try:
        return conv(settings[key])
    except (TypeError, ValueError) as exc:
        raise ScrewDiskError(f"bad value for {key!r}: {settings[key]!r}") from exc


def build_f(settings) -> FourierSeries:
    try:
        return FourierSeries(1.0, _get(settings, "f_cos", _floats, []), _get(settings, "f_sin", _floats, []))
    except ScrewDiskError:
        raise
    except ValueError as exc:
        raise ScrewDiskError(str(exc)) from exc


def build_points(settings) -> PointConfig | None:
    if "points_file" in settings:
        try:
            return parse_config_json(Path(settings["points_file"]).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ScrewDiskError(f"cannot read points file: {exc}") from exc
    if "points" in settings:
        pairs = [p for p in settings["points"].split(";") if p.strip()]
        try:
            pts = [[float(v) for v in p.split(",")] for p in pairs]
        except ValueError as exc:
            raise ScrewDiskError(f"bad points: {settings['points']!r}") from exc
        if any(len(p) != 2 for p in pts):
            raise ScrewDiskError("each point needs exactly two coordinates")
        return PointConfig(pts)
    return None


def build_options(settings) -> MinimizeOptions:
    return MinimizeOptions(
        max_iters=_get(settings, "max_iters", int, 20000),
        grad_tol=_get(settings, "grad_tol", float, None),
        initial_step=_get(settings, "initial_step", float, 1e-2),
        shrink_factor=_get(settings, "shrink_factor", float, 0.5),
        restarts=_get(settings, "restarts", int, 4),
        seed=_get(settings, "seed", int, 0),
    )


def build_measure(settings, f: FourierSeries) -> LimitMeasure:
    kind = settings.get("measure", "boundary")
    if kind == "boundary":
        mu = limiting_boundary_measure(f)
    elif kind == "ring":
        mu = LimitMeasure.ring(_get(settings, "radius", float, required=True))
    elif kind == "disk":
        mu = LimitMeasure.disk(_get(settings, "radius", float, 1.0))
    elif kind == "square":
        mu = LimitMeasure.uniform_square(
            _get(settings, "half_width", float, 0.3), _get(settings, "h", float, 0.3)
        )
    else:
        raise ScrewDiskError(f"unknown measure {kind!r}")
    if "approx_h" in settings:
        mu = piecewise_constant_approx(mu, _get(settings, "approx_h", float))
    return mu


# ---------------------------------------------------------------------------
# commands; each returns {path: text}


def cmd_energy(settings):
    config = build_points(settings)
    if config is None:
        raise ScrewDiskError("energy needs 'points' or 'points_file'")
    e = renormalized_energy(config, BoundaryDatum(build_f(settings)))
    return {settings.get("output", "-"): to_json(e.as_dict()) + "\n"}


def _trace_path(settings):
    if "trace_output" in settings:
        return settings["trace_output"]
    out = settings.get("output", "-")
    if out == "-":
        return None
    p = Path(out)
    return str(p.with_name(p.stem + "_trace.csv"))


def cmd_minimize(settings):
    datum = BoundaryDatum(build_f(settings))
    opts = build_options(settings)
    start = build_points(settings)
    try:
        if start is not None:
            config, trace = minimize(start, datum, opts)
        else:
            config, trace = multistart(_get(settings, "n", int, required=True), datum, opts)
        stall = None
    except StallError as exc:
        config, trace, stall = exc.best, exc.trace, exc
    files = {settings.get("output", "-"): config_json(config)}
    tpath = _trace_path(settings)
    if tpath:
        files[tpath] = trace_csv(trace)
    if stall is not None:
        raise _Stalled(files, stall)
    return files


def cmd_upscale(settings):
    n_list = _get(settings, "n_list", lambda s: [int(v) for v in _floats(s)], required=True)
    report = upscale_experiment(build_f(settings), n_list, build_options(settings))
    return {settings.get("output", "-"): report_csv(report)}


def cmd_limit(settings):
    f = build_f(settings)
    value = limit_energy(build_measure(settings, f), f)
    return {settings.get("output", "-"): fmt(value) + "\n"}


def cmd_recovery(settings):
    f = build_f(settings)
    settings = dict(settings)
    settings.setdefault("measure", "square")
    mu = build_measure(settings, f)
    if mu.kind != "grid":
        raise ScrewDiskError("recovery needs a grid measure (measure = square, or approx_h)")
    config = recovery_sequence(mu, _get(settings, "n", int, required=True))
    return {settings.get("output", "-"): config_json(config)}


class _Stalled(Exception):
    def __init__(self, files, error):
        super().__init__(str(error))
        self.files = files
        self.error = error


HANDLERS = {
    "energy": cmd_energy,
    "minimize": cmd_minimize,
    "upscale": cmd_upscale,
    "limit": cmd_limit,
    "recovery": cmd_recovery,
}


def _write(files, stdout):
    for path, text in files.items():
        if path == "-":
            stdout.write(text)
        else:
            Path(path).write_text(text, encoding="utf-8", newline="\n")


def _error(kind, message, stderr):
    stderr.write(to_json({"error": kind, "message": message}) + "\n")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="screwdisk", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value configuration file")
        for key, help_text in KEYS.items():
            p.add_argument(f"--{key}", dest=key, default=None, help=help_text)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=stderr)
    overrides = {k: getattr(args, k) for k in KEYS}
    try:
        settings = load_settings(args.config, args.command, overrides)
        files = HANDLERS[args.command](settings)
    except _Stalled as stalled:
        _write(stalled.files, stdout)
        _error("stall", str(stalled.error), stderr)
        return EXIT_STALL
    except ScrewDiskError as exc:
        _error(exc.kind, str(exc), stderr)
        return EXIT_VALIDATION
    _write(files, stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
