"""Command-line entry point: spectra, parameter sweeps and verification suites."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import families
from .decimation import decimation_data
from .eigen import eigenvalues
from .graphs import DirectedWeightedGraph
from .multiset import SpectrumMultiset, compare_spectra
from .operators import CentrosymmetricJacobi, laplacian_from_graph, substitute_operator
from .spectra import decimated_spectrum_path, dense_spectrum_path, spectrum_inclusion_report
from .verify import SUITES, run_suite

log = logging.getLogger("jdspec")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2
MAX_SIZE = 4097
DENSE_MAX_SIZE = 1025
DEFAULT_GRID = "0.005:0.995:199"
DEFAULT_LEVEL = {"k0-3": 6, "k0-4": 6, "k0-5": 5}


class ConfigError(ValueError):
    pass


# -- configuration helpers -----------------------------------------------------


def parse_grid(text: str) -> np.ndarray:
    """``START:END:COUNT`` as COUNT evenly spaced points, all strictly inside (0, 1)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be START:END:COUNT, got {text!r}")
    try:
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc
    if count < 1:
        raise ConfigError("grid count must be positive")
    pts = np.linspace(start, end, count) if count > 1 else np.array([start])
    if np.any(pts <= 0.0) or np.any(pts >= 1.0):
        raise ConfigError("grid points must lie strictly inside (0, 1)")
    return pts


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def load_seed(args) -> CentrosymmetricJacobi:
    if args.csj:
        return CentrosymmetricJacobi.from_json(_read_json(args.csj))
    if args.family:
        return families.family_seed(args.family, p=args.p, p1=args.p1, p2=args.p2)
    raise ConfigError("give --family or --csj")


def resolve_workers(flag: int | None) -> int:
    if flag is not None:
        n = flag
    else:
        env = os.environ.get("JDSPEC_WORKERS", "1")
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"JDSPEC_WORKERS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ConfigError("worker count must be positive")
    return n


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _check_size(k0: int, level: int, method: str):
    if level < 1:
        raise ConfigError("level must be >= 1")
    size = k0**level + 1
    if size > MAX_SIZE:
        raise ConfigError(f"level {level} gives size {size} above the supported {MAX_SIZE}")
    if method in ("dense", "both") and size > DENSE_MAX_SIZE:
        raise ConfigError(f"size {size} is too large for the dense method (limit {DENSE_MAX_SIZE})")


def _spectrum_text(spec: SpectrumMultiset, fmt: str) -> str:
    return spec.to_csv() if fmt == "csv" else spec.dumps() + "\n"


def _report_path(out: str | None) -> str | None:
    if not out:
        return None
    p = Path(out)
    return str(p.with_name(p.stem + ".compare.json"))


# -- spectrum ------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    seed = load_seed(args)
    if args.graph:
        return _graph_spectrum(args, seed)
    level = args.level or 1
    _check_size(seed.n0, level, args.method)
    dec = dense = None
    if args.method in ("decimation", "both"):
        dec = decimated_spectrum_path(seed, level)
    if args.method in ("dense", "both"):
        dense = dense_spectrum_path(seed, level)
    _emit(_spectrum_text(dec if dec is not None else dense, args.format), args.out)
    if args.method == "both":
        rep = compare_spectra(dec, dense)
        text = json.dumps(rep.to_json(), indent=2) + "\n"
        path = _report_path(args.out)
        if path:
            Path(path).write_text(text)
        else:
            sys.stderr.write(text)
        if not rep.ok:
            log.error("decimation and dense spectra disagree (max distance %.3e)", rep.max_distance)
            return EXIT_NUMERIC
    return EXIT_OK


def _graph_spectrum(args, csj: CentrosymmetricJacobi) -> int:
    if args.method == "decimation":
        raise ConfigError("--graph supports --method dense or both; decimation needs a path model")
    lap = laplacian_from_graph(DirectedWeightedGraph.from_json(_read_json(args.graph)))
    J = substitute_operator(lap, csj)
    if J.size > DENSE_MAX_SIZE:
        raise ConfigError(f"substituted operator has {J.size} vertices, above {DENSE_MAX_SIZE}")
    _emit(_spectrum_text(eigenvalues(J.matrix), args.format), args.out)
    if args.method == "both":
        rep = spectrum_inclusion_report(J, lap, decimation_data(csj))
        text = json.dumps(rep.to_json(), indent=2) + "\n"
        path = _report_path(args.out)
        if path:
            Path(path).write_text(text)
        else:
            sys.stderr.write(text)
        if not rep.ok:
            return EXIT_NUMERIC
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------


@dataclass
class SweepResult:
    family: str
    param_names: tuple[str, ...]
    grid: list[tuple[float, ...]]
    level: int
    rows: list[tuple]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.param_names, "index", "eigenvalue"])
        for row in self.rows:
            *params, idx, val = row
            w.writerow([*(repr(float(x)) for x in params), idx, repr(float(val))])
        return buf.getvalue()


def _sweep_point(task) -> tuple[tuple[float, ...], list[float]]:
    family, params, level, method = task
    if family == "k0-5":
        seed = families.k0_5(*params)
    else:
        seed = families.family_seed(family, p=params[0])
    if method == "dense":
        spec = dense_spectrum_path(seed, level)
    else:
        spec = decimated_spectrum_path(seed, level)
    return params, sorted(float(v) for v in spec.expanded())


def _sweep_grid(args) -> tuple[tuple[str, ...], list[tuple[float, ...]]]:
    grid = parse_grid(args.p_grid or DEFAULT_GRID)
    if args.family in ("k0-3", "k0-4"):
        return ("p",), [(float(p),) for p in grid]
    if args.p1 is not None and args.p2 is not None:
        raise ConfigError("for k0-5 fix one of --p1/--p2; the grid runs over the other")
    if args.p2 is not None:
        return ("p1", "p2"), [(float(p), float(args.p2)) for p in grid]
    p1 = families.GAP_P1 if args.p1 is None else float(args.p1)
    return ("p1", "p2"), [(p1, float(p)) for p in grid]


def run_sweep(args) -> SweepResult:
    if args.family not in families.FAMILIES:
        raise ConfigError(f"sweep needs --family in {families.FAMILIES}")
    k0 = {"k0-3": 3, "k0-4": 4, "k0-5": 5}[args.family]
    level = args.level or DEFAULT_LEVEL[args.family]
    method = args.method if args.method != "both" else "decimation"
    _check_size(k0, level, method)
    names, grid = _sweep_grid(args)
    tasks = [(args.family, params, level, method) for params in grid]
    workers = resolve_workers(args.workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_sweep_point(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    rows = [(*params, i, v) for params, vals in results for i, v in enumerate(vals)]
    return SweepResult(args.family, names, [r[0] for r in results], level, rows)


def cmd_sweep(args) -> int:
    if args.gap_closure:
        if args.family not in (None, "k0-5") or (args.p1 is not None and abs(args.p1 - families.GAP_P1) > 1e-15):
            raise ConfigError("the gap-closure query is defined for k0-5 at p1 = 2/3")
        gc = families.gap_closure()
        payload = {
            "p1": families.GAP_P1,
            "p2": gc.p2,
            "eigenvalue": gc.eigenvalue,
            "bracket": list(gc.bracket),
            "iterations": gc.iterations,
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
        return EXIT_OK
    res = run_sweep(args)
    if args.format == "json":
        payload = {
            "family": res.family,
            "level": res.level,
            "parameters": list(res.param_names),
            "grid": [list(g) for g in res.grid],
            "rows": [list(r) for r in res.rows],
        }
        _emit(json.dumps(payload) + "\n", args.out)
    else:
        _emit(res.to_csv(), args.out)
    return EXIT_OK


# -- verify --------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.suite not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    results = run_suite(args.suite, args.samples, args.seed)
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed (suite={args.suite}, seed={args.seed})")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


# -- parser --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--family", choices=families.FAMILIES)
    p.add_argument("--csj", metavar="FILE", help="CSJ JSON {\"a\": [...], \"b\": [...]}")
    p.add_argument("--p", type=float)
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--level", type=int)
    p.add_argument("--method", choices=("decimation", "dense", "both"), default="decimation")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jdspec", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="spectrum of a self-similar level or a substituted graph")
    _common(sp)
    sp.add_argument("--graph", metavar="FILE", help="model graph JSON; substitutes the CSJ into it")
    sp.set_defaults(func=cmd_spectrum)

    sw = sub.add_parser("sweep", help="spectra over a parameter grid, as CSV rows")
    _common(sw)
    sw.add_argument("--p-grid", metavar="START:END:COUNT", dest="p_grid")
    sw.add_argument("--workers", type=int)
    sw.add_argument("--gap-closure", action="store_true", help="solve lambda^D_1 = lambda_2 for k0-5")
    sw.set_defaults(func=cmd_sweep)

    ve = sub.add_parser("verify", help="run a seeded randomized identity suite")
    ve.add_argument("--suite", default="all")
    ve.add_argument("--samples", type=int, default=50)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--out", metavar="FILE")
    ve.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        # validation and configuration problems (operator, graph and parse errors are ValueErrors)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
