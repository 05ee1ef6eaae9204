"""Headless driver: run federations, analyze rounds, export fixtures, cross-check oracles.

Exit codes: 0 ok, 2 bad input, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import fixtures, oracles, workflow
from .data import make_blobs, save_dataset_files
from .errors import HetlabError, InputError, NumericError
from .scenario import run_scenario
from .storage import DataStore, RunRecord, atomic_write_json, atomic_write_text, canonical_json, read_json

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NUMERIC = 3


def _load_run(path_or_id: str, data_dir: str | None) -> RunRecord:
    path = Path(path_or_id)
    if (path / "run.json").exists():
        store = DataStore(path.parent.parent if path.parent.name == "runs" else path.parent)
        # run directories are self-contained; root placement only affects caching
        from .data import load_dataset_files
        dataset = load_dataset_files(path / "dataset.csv", path / "manifest.json")
        return RunRecord.from_json(read_json(path / "run.json"), dataset)
    store = DataStore(data_dir or os.environ.get("HETLAB_DATA_DIR", "."))
    return store.load_run(path_or_id)


def cmd_run(args) -> int:
    scenario = read_json(Path(args.scenario))
    record = run_scenario(scenario, base_dir=Path(args.scenario).parent)
    out = Path(args.out)
    store = DataStore(out)
    store.save_run(record)
    print(f"run {record.run_id}: {record.rounds} rounds -> {store.run_dir(record.run_id)}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    run = _load_run(args.run, args.data_dir)
    payload, ctx = workflow.analyze_round(run, args.round, source=args.source,
                                          k=args.k, alpha=args.alpha)
    report = {"inconsistency": payload["inconsistency"],
              "clusters": payload["clusters"],
              "projection": payload["projection"],
              "k": payload["k"], "alpha": payload["alpha"],
              "recommended": payload["recommended"],
              "matrix": None}
    if ctx.labels is not None and ctx.projection is not None:
        report["matrix"] = workflow.label_matrix_view(ctx)
    text = canonical_json(report)
    if args.out:
        atomic_write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export_fixtures(args) -> int:
    run = _load_run(args.run, args.data_dir)
    index = fixtures.export_fixtures(run, args.out, round_index=args.round)
    print(f"exported {len(index)} fixtures -> {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    dataset = make_blobs(shape=tuple(args.shape), classes=args.classes,
                         per_class=args.per_class, seed=args.seed, spread=args.spread,
                         center_seed=args.center_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset_files(dataset, out / "data.csv", out / "manifest.json")
    print(f"wrote {dataset.n} records -> {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app
    data_dir = args.data_dir or os.environ.get("HETLAB_DATA_DIR", "./hetlab-data")
    app = create_app(data_dir, default_seed=args.seed, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _read_problem(args) -> dict:
    if args.input == "-":
        return json.load(sys.stdin)
    return read_json(Path(args.input))


def cmd_oracle(args) -> int:
    problem = _read_problem(args)
    if args.oracle == "rank-matrix":
        matrix = oracles.rank_matrix_bruteforce(np.asarray(problem["records"], dtype=np.float64),
                                                problem["ids"])
        result = {"matrix": matrix.tolist()}
    elif args.oracle == "dendrogram":
        dendrogram = oracles.dendrogram_bruteforce(np.asarray(problem["matrix"], dtype=np.float64))
        result = dendrogram.to_json()
    elif args.oracle == "exact-pca":
        basis = oracles.exact_pca_basis(np.asarray(problem["records"], dtype=np.float64),
                                        components=int(problem.get("components", 2)))
        result = {"basis": basis.tolist()}
    else:
        raise InputError(f"unknown oracle {args.oracle!r}")
    if args.out:
        atomic_write_json(Path(args.out), result)
    else:
        sys.stdout.write(canonical_json(result))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetlab",
                                     description="federated-learning heterogeneity lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario file")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="data directory for run artifacts")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="analyze one round of a finished run")
    p.add_argument("run", help="run id or run directory")
    p.add_argument("--round", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--source", default="local",
                   choices=["local", "generated-dense", "generated-sparse"])
    p.add_argument("--data-dir", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export-fixtures", help="freeze every analytical view as JSON")
    p.add_argument("run")
    p.add_argument("--out", required=True)
    p.add_argument("--round", type=int, default=None)
    p.add_argument("--data-dir", default=None)
    p.set_defaults(func=cmd_export_fixtures)

    p = sub.add_parser("synth", help="write a synthetic blob dataset as CSV + manifest")
    p.add_argument("--shape", type=int, nargs="+", required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spread", type=float, default=0.05)
    p.add_argument("--center-seed", type=int, default=None,
                   help="share class regions across clients that differ in --seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--port", type=int, default=8230)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ui-dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("oracle", help="brute-force oracles for cross-validation")
    p.add_argument("oracle", choices=["rank-matrix", "dendrogram", "exact-pca"])
    p.add_argument("--input", default="-", help="problem JSON file, or - for stdin")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HetlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
