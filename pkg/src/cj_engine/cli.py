"""Command-line front door: run simulation experiments, recompute
reports from session exports (with figures), and launch the HTTP
service.

Exit codes are a stable contract: 0 success, 1 validation, 2 I/O,
3 internal.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sqlite3
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from .core import MC_SAMPLES_DEFAULT
from .errors import CjError, ConfigError
from .figures import render_report_figures
from .service import SessionService, create_app
from .sim import (
    METHOD_LABELS,
    ExperimentConfig,
    ExperimentResult,
    StepRecord,
    analyze_experiment,
    run_grid,
    write_manifest,
    write_steps_csv,
    write_summary_csv,
)
from .store import Store

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

#: Default experiment grid when neither flags nor a config file narrow it.
GRID_N_DEFAULT = (5, 10, 15, 20, 25)
GRID_K_DEFAULT = (5, 10, 20, 30)

_SIM_CONFIG_KEYS = {
    "n", "k", "repeats", "seed", "methods", "out", "jobs", "sigma", "jsd_stride", "samples",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the CLI contract
    reserves 2 for I/O, so usage problems become validation errors."""

    def error(self, message: str):
        raise ConfigError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_grades(text: str) -> tuple[list[str], list[int]]:
    labels, counts = [], []
    for chunk in text.split(","):
        label, sep, count = chunk.partition(":")
        if not sep or not label:
            raise ConfigError(f"bad grade spec {chunk!r}; expected label:count")
        try:
            counts.append(int(count))
        except ValueError as exc:
            raise ConfigError(f"bad grade count in {chunk!r}") from exc
        labels.append(label)
    return labels, counts


def build_parser() -> _Parser:
    parser = _Parser(prog="cj-engine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the synthetic experiment grid")
    sim.add_argument("config", nargs="?", help="JSON config file; flags override its values")
    sim.add_argument("--n", help="comma-separated item counts")
    sim.add_argument("--k", help="comma-separated budget multipliers")
    sim.add_argument("--repeats", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--methods", help="comma-separated method labels")
    sim.add_argument("--out", help="run directory (default cj-sim-run)")
    sim.add_argument("--jobs", type=int, help="worker processes for grid cells")
    sim.add_argument("--sigma", type=float)
    sim.add_argument("--jsd-stride", type=int, dest="jsd_stride")
    sim.add_argument("--samples", type=int, help="MC samples above the exactness threshold")
    sim.set_defaults(func=cmd_simulate)

    rep = sub.add_parser("report", help="recompute a report from a session export")
    rep.add_argument("export", help="session export JSON file")
    rep.add_argument("--out", help="report directory (default <export stem>-report)")
    rep.add_argument("--grades", help="grading scheme, e.g. A:1,B:1,C:2,D:1")
    rep.add_argument("--threshold", type=float, default=0.9)
    rep.add_argument("--btm", action="store_true", help="include the BTM baseline")
    rep.add_argument("--samples", type=int, default=MC_SAMPLES_DEFAULT)
    rep.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    rep.set_defaults(func=cmd_report)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    srv.add_argument("--store", help="session store path (default $CJ_ENGINE_STORE)")
    srv.set_defaults(func=cmd_serve)
    return parser


# -- simulate -------------------------------------------------------------


def _load_sim_file(path: str) -> dict[str, Any]:
    raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(data) - _SIM_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown config fields {unknown}")
    return data


def _as_int_list(value: Any, field: str) -> list[int]:
    if isinstance(value, int):
        return [value]
    if isinstance(value, str):
        return _int_list(value)
    if isinstance(value, list) and all(isinstance(v, int) for v in value):
        return list(value)
    raise ConfigError(f"field {field!r} must be an integer or list of integers")


def _build_configs(args: argparse.Namespace) -> tuple[list[ExperimentConfig], Path, int]:
    file_cfg = _load_sim_file(args.config) if args.config else {}

    def pick(flag: Any, key: str, default: Any) -> Any:
        if flag is not None:
            return flag
        return file_cfg.get(key, default)

    n_values = _as_int_list(pick(args.n, "n", list(GRID_N_DEFAULT)), "n")
    k_values = _as_int_list(pick(args.k, "k", list(GRID_K_DEFAULT)), "k")
    repeats = int(pick(args.repeats, "repeats", 50))
    seed = int(pick(args.seed, "seed", 0))
    methods = pick(args.methods, "methods", list(METHOD_LABELS))
    if isinstance(methods, str):
        methods = [part for part in methods.split(",") if part]
    sigma = float(pick(args.sigma, "sigma", 5.0))
    jsd_stride = int(pick(args.jsd_stride, "jsd_stride", 1))
    samples = int(pick(args.samples, "samples", MC_SAMPLES_DEFAULT))
    jobs = int(pick(args.jobs, "jobs", 1))
    out = Path(pick(args.out, "out", "cj-sim-run"))

    configs = [
        ExperimentConfig(
            n_items=n,
            k_multiplier=k,
            repeats=repeats,
            methods=tuple(methods),
            seed=seed,
            sigma=sigma,
            mc_samples=samples,
            jsd_stride=jsd_stride,
        )
        for n in n_values
        for k in k_values
    ]
    return configs, out, jobs


def _cell_path(out: Path, config: ExperimentConfig) -> Path:
    return out / "cells" / f"cell-n{config.n_items}-k{config.k_multiplier}.json"


def _config_blob(config: ExperimentConfig) -> dict[str, Any]:
    return json.loads(json.dumps(asdict(config)))


def _save_cell(path: Path, result: ExperimentResult) -> None:
    payload = {
        "config": _config_blob(result.config),
        "steps": [
            [s.method, s.n, s.k, s.repeat, s.step, s.tau_distance, s.worst_jsd]
            for s in result.steps
        ],
        "final_taus": result.final_taus,
    }
    path.write_text(json.dumps(payload), encoding="utf-8")


def _load_cell(path: Path, config: ExperimentConfig) -> ExperimentResult | None:
    """Previously computed cell, if its config matches the requested one."""
    if not path.exists():
        return None
    payload = json.loads(path.read_text(encoding="utf-8"))
    if payload.get("config") != _config_blob(config):
        return None
    steps = [
        StepRecord(
            method=row[0], n=row[1], k=row[2], repeat=row[3], step=row[4],
            tau_distance=row[5], worst_jsd=row[6],
        )
        for row in payload["steps"]
    ]
    return ExperimentResult(config=config, steps=steps, final_taus=payload["final_taus"])


def cmd_simulate(args: argparse.Namespace) -> None:
    configs, out, jobs = _build_configs(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / "cells").mkdir(exist_ok=True)
    write_manifest(str(out / "manifest.json"), configs)

    results: list[ExperimentResult | None] = [
        _load_cell(_cell_path(out, config), config) for config in configs
    ]
    missing = [config for config, result in zip(configs, results) if result is None]
    if missing:
        fresh = run_grid(missing, jobs=jobs)
        for config, result in zip(missing, fresh):
            _save_cell(_cell_path(out, config), result)
        by_cell = {(r.config.n_items, r.config.k_multiplier): r for r in fresh}
        results = [
            r if r is not None else by_cell[(c.n_items, c.k_multiplier)]
            for c, r in zip(configs, results)
        ]
    done: list[ExperimentResult] = [r for r in results if r is not None]

    steps = [row for result in done for row in result.steps]
    write_steps_csv(str(out / "steps.csv"), steps)
    summary = analyze_experiment(done)
    write_summary_csv(str(out / "summary.csv"), summary)
    for row in summary:
        print(
            f"n={row.n} k={row.k} {row.method}: median tau {row.median_tau:.4f}, "
            f"beaten by {row.v_count}"
        )
    print(f"run directory: {out}")


# -- report ---------------------------------------------------------------


def _write_ranks_csv(path: Path, report: dict[str, Any]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["item", "label", "rank", "expected_rank"])
        for entry in sorted(report["ranks"], key=lambda e: e["rank"]):
            writer.writerow(
                [entry["item"], entry["label"], entry["rank"], repr(entry["expected_rank"])]
            )


def _write_distributions_csv(path: Path, report: dict[str, Any]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["item", "rank", "probability"])
        for dist in report["distributions"]:
            for rank, prob in enumerate(dist["probs"], start=1):
                writer.writerow([dist["item"], rank, repr(prob)])


def _write_grades_csv(path: Path, grade_report: dict[str, Any]) -> None:
    labels = grade_report["labels"]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["item", "label", "assigned"] + [f"prob_{label}" for label in labels])
        for entry in grade_report["grades"]:
            writer.writerow(
                [entry["item"], entry["label"], entry["assigned"]]
                + [repr(entry["probs"][label]) for label in labels]
            )


def cmd_report(args: argparse.Namespace) -> None:
    raw = Path(args.export).read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{args.export}: parse error at line {exc.lineno} column {exc.colno}"
            f" (byte {exc.pos}): {exc.msg}"
        ) from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("session"), dict):
        raise ConfigError(f"{args.export}: not a session export (no session object)")

    service = SessionService(Store(":memory:"))
    try:
        session = service.import_session(payload)
        report = service.report(session.id, include_btm=args.btm, samples=args.samples)
        grade_report = None
        if args.grades:
            labels, counts = _parse_grades(args.grades)
            grade_report = service.grade_report(
                session.id, labels, counts, args.threshold, samples=args.samples
            )
    finally:
        service.close()

    out = Path(args.out) if args.out else Path(f"{Path(args.export).stem}-report")
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _write_ranks_csv(out / "ranks.csv", report)
    _write_distributions_csv(out / "distributions.csv", report)

    print(f"session {report['session']['id']}: {report['session']['judgements']} judgements")
    for entry in sorted(report["ranks"], key=lambda e: e["rank"]):
        print(f"  rank {entry['rank']}: {entry['label']} (expected {entry['expected_rank']:.3f})")
    if grade_report is not None:
        _write_grades_csv(out / "grades.csv", grade_report)
        for entry in grade_report["grades"]:
            print(f"  grade {entry['assigned']}: {entry['label']}")
    if not args.no_figures:
        for figure in render_report_figures(report, out):
            print(f"wrote {figure}")
    print(f"report directory: {out}")


# -- serve ----------------------------------------------------------------


def cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text:
        raise ConfigError(f"bad bind address {args.bind!r}; expected host:port")
    try:
        port = int(port_text)
    except ValueError as exc:
        raise ConfigError(f"bad port in bind address {args.bind!r}") from exc
    store_path = args.store or os.environ.get("CJ_ENGINE_STORE") or "cj-engine.db"
    app = create_app(store_path=store_path)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return EXIT_OK
    except CjError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except json.JSONDecodeError as exc:
        print(
            f"error: parse failure at line {exc.lineno} column {exc.colno}"
            f" (byte {exc.pos}): {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    except (OSError, sqlite3.OperationalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # stable contract: anything unexpected is internal
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
