"""Command-line front end: one subcommand per experiment.

Parameters come from the built-in defaults, then an optional INI file with
one section per experiment id, then ``--set key=value`` pairs. Every run
writes CSV tables, a JSON summary and a manifest into the output directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from .errors import ArtifactError, ValidationError

OUT_ENV = "ARTIFACT_OUT_DIR"
CSV_FORMAT = "%.12g"


def _format(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return CSV_FORMAT % float(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_table(path: Path, columns: dict):
    names = list(columns)
    cols = [np.atleast_1d(np.asarray(columns[n])) for n in names]
    n = {c.size for c in cols}
    if len(n) != 1:
        raise ValidationError(f"table {path.name}: columns differ in length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_format(v) for v in row])


def read_config(path, experiment):
    """(overrides, seed or None) for ``experiment`` from an INI file.

    Only the section named after the experiment and an optional ``[run]``
    section are read.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        found = parser.read(path)
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from exc
    if not found:
        raise ValidationError(f"config file {path} not readable")
    overrides = dict(parser[experiment]) if experiment in parser else {}
    seed = None
    if "run" in parser and "seed" in parser["run"]:
        try:
            seed = parser["run"].getint("seed")
        except ValueError as exc:
            raise ValidationError("[run] seed must be an integer") from exc
    return overrides, seed


def _parse_sets(pairs):
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _config_text(experiment, params, seed):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser[experiment] = {k: (" ".join(map(repr, v)) if isinstance(v, tuple) else repr(v)) for k, v in params.items()}
    parser["run"] = {"seed": str(seed)}
    lines = []

    class _Sink:
        def write(self, s):
            lines.append(s)

    parser.write(_Sink())
    return "".join(lines)


def output_dir(arg, experiment):
    if arg:
        return Path(arg)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env) / experiment
    return Path("artifact-out") / experiment


def run_experiment(experiment, overrides, seed, out_dir: Path):
    """Run one experiment and write its outputs; returns the manifest dict."""
    params = ex.resolve_params(experiment, overrides)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = ex.run(experiment, params, seed)
    wall = time.perf_counter() - start

    files = []
    for name, table in result.tables.items():
        path = out_dir / f"{name}.csv"
        write_table(path, table)
        files.append(path.name)

    summary = {
        "experiment": experiment,
        "summary": result.summary,
        "units": result.units,
        "checks": [c.__dict__ for c in result.checks],
    }
    _atomic_write(out_dir / "summary.json", json.dumps(_jsonable(summary), indent=2) + "\n")
    files.append("summary.json")
    _atomic_write(out_dir / "config.ini", _config_text(experiment, params, seed))
    files.append("config.ini")

    manifest = {
        "experiment": experiment,
        "config": {"params": params, "seed": seed, "out": str(out_dir)},
        "version": __version__,
        "wall_time_s": wall,
        "files": files,
        "checks": [{"criterion": c.criterion, "passed": c.passed, "value": c.value} for c in result.checks],
    }
    _atomic_write(out_dir / "manifest.json", json.dumps(_jsonable(manifest), indent=2) + "\n")
    return manifest, result


def _defaults_help(experiment):
    rows = [f"  {k} = {v}" for k, v in ex.DEFAULTS[experiment].items()]
    return "defaults:\n" + "\n".join(rows)


def build_parser():
    parser = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in ex.RUNNERS:
        p = sub.add_parser(
            name,
            help=f"run the {name} experiment",
            epilog=_defaults_help(name),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", metavar="PATH", help="INI file; the section named after the experiment is read")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one parameter (repeatable)")
        p.add_argument("--seed", type=int, help="master seed (default: [run] seed in the config, else 0)")
        p.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV}/<id> or ./artifact-out/<id>)")
        p.add_argument("--threads", type=int, metavar="N", help="worker threads for parallel kernels")
    return parser


def _set_threads(n):
    import numba

    if not 1 <= n <= numba.config.NUMBA_NUM_THREADS:
        raise ValidationError(f"--threads must lie in 1..{numba.config.NUMBA_NUM_THREADS}")
    numba.set_num_threads(n)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            _set_threads(args.threads)
        overrides, cfg_seed = read_config(args.config, args.experiment) if args.config else ({}, None)
        overrides.update(_parse_sets(args.set))
        seed = args.seed if args.seed is not None else (cfg_seed if cfg_seed is not None else 0)
        manifest, result = run_experiment(args.experiment, overrides, seed, output_dir(args.out, args.experiment))
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    for check in result.checks:
        print(check.line())
    print(f"wrote {len(manifest['files'])} files to {manifest['config']['out']} in {manifest['wall_time_s']:.1f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
