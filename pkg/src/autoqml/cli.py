"""Command-line entry point: ``autoqml {run,validate,report,inspect}``.

Exit codes: 0 success, 1 configuration or usage error (including a store
without results for ``report``), 2 pipeline failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from .errors import ConfigError, ConfigSyntaxError, PipelineError
from .orchestrator import ObjectStore, estimated_evaluations, expand_grid, load_config, run_all

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PIPELINE = 2

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
STORE_ENV = "AUTOQML_STORE"


def _err(msg: str):
    print(msg, file=sys.stderr, flush=True)


def _config_error(exc: Exception) -> int:
    kind = "syntax error" if isinstance(exc, ConfigSyntaxError) else "config error"
    _err(f"{kind}: {exc}")
    return EXIT_CONFIG


def _store_root(args):
    root = args.store or os.environ.get(STORE_ENV)
    if not root:
        _err(f"error: --store is required (or set {STORE_ENV})")
    return root


def cmd_run(args) -> int:
    root = _store_root(args)
    if not root:
        return EXIT_CONFIG
    try:
        load_config(args.config)
    except (ConfigError, OSError) as exc:
        return _config_error(exc)
    try:
        run_all(args.config, root, max_parallel=args.max_parallel, progress=_err)
    except PipelineError as exc:
        _err(f"pipeline failed: {exc}")
        return EXIT_PIPELINE
    except Exception as exc:
        logging.getLogger(__name__).debug("pipeline failure", exc_info=True)
        _err(f"pipeline failed: {type(exc).__name__}: {exc}")
        return EXIT_PIPELINE
    _err("run complete")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        return _config_error(exc)
    specs = expand_grid(config)
    noun = "specification" if len(specs) == 1 else "specifications"
    print(f"{len(specs)} experiment {noun}")
    print(f"{config.num_training_runs * len(specs)} training runs over {config.n_containers} containers")
    print(f"estimated circuit evaluations: {estimated_evaluations(specs)}")
    return EXIT_OK


def _fmt(value: str, digits: int = 3) -> str:
    return f"{float(value):.{digits}f}"


def cmd_report(args) -> int:
    root = _store_root(args)
    if not root:
        return EXIT_CONFIG
    if not os.path.isdir(root):
        _err(f"error: store {root} does not exist")
        return EXIT_CONFIG
    store = ObjectStore(root)
    if not store.exists("processed/aggregate.csv") or not store.exists("processed/selection.json"):
        _err(f"error: {root} has no processed/ results")
        return EXIT_CONFIG
    rows = list(csv.DictReader(io.StringIO(store.get("processed/aggregate.csv").decode())))
    selection = json.loads(store.get("processed/selection.json"))
    ranked = {r["spec_id"]: r for r in selection["ranking"]}
    for r in rows:
        info = ranked.get(r["spec_id"], {})
        r.update(ansatz=info.get("ansatz", "?"), num_qubits=info.get("num_qubits", 0),
                 n_runs=info.get("n_runs", "?"), z=info.get("composite", float("nan")))
    rows.sort(key=lambda r: (int(r["num_qubits"]), r["ansatz"], r["initialization"], int(r["k"])))
    header = f"{'Init':<9}{'Ansatz':<12}{'k':>2}{'N':>3}{'runs':>5}{'mu_KS':>8}{'sig_KS':>8}" \
             f"{'mu_RE':>8}{'sig_RE':>8}{'mu_Depth':>10}{'z':>8}  spec_id"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['initialization']:<9}{r['ansatz']:<12}{r['k']:>2}{r['num_qubits']:>3}{r['n_runs']:>5}"
              f"{_fmt(r['mu_ks']):>8}{_fmt(r['sigma_ks']):>8}{_fmt(r['mu_re']):>8}{_fmt(r['sigma_re']):>8}"
              f"{_fmt(r['mu_depth'], 2):>10}{r['z']:>8.3f}  {r['spec_id']}")
    w = selection["winner"]
    print(f"winner: {w['initialization']} {w['ansatz']} k={w['k']} N={w['num_qubits']} "
          f"(spec {w['spec_id']}, run {selection.get('best_run_index', 0)})")
    for n, sid in sorted(selection.get("per_num_qubits", {}).items(), key=lambda kv: int(kv[0])):
        print(f"best for N={n}: {sid}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    root = _store_root(args)
    if not root:
        return EXIT_CONFIG
    if not os.path.isdir(root):
        _err(f"error: store {root} does not exist")
        return EXIT_CONFIG
    store = ObjectStore(root)
    if args.key is None:
        for key in store.list():
            print(f"{len(store.get(key)):>10}  {key}")
        return EXIT_OK
    try:
        data = store.get(args.key)
    except (KeyError, ValueError):
        _err(f"error: no key {args.key!r} in {root}")
        return EXIT_CONFIG
    if args.key.endswith(".qmodel"):
        from .gan.persistence import load_model
        model = load_model(data)
        doc = model.document
        a, t = doc["ansatz"], doc["training"]
        print(f"ansatz: {a['family']} k={a['repetitions']} N={a['num_qubits']}")
        print(f"initialization: {doc['initialization']['type']}")
        print(f"data range: [{model.low}, {model.high}]")
        print(f"final RE {t['final_re']:.4f}  final KS {t['final_ks']:.4f}  depth {t['transpiled_depth']}")
        print("probabilities: " + " ".join(f"{p:.4f}" for p in model.probabilities()))
        return EXIT_OK
    sys.stdout.write(data.decode("utf-8", errors="replace"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autoqml", description="Quantum GAN architecture search pipelines.")
    parser.add_argument("--log-level", choices=sorted(LOG_LEVELS), default="warn")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="upload a config and run pipelines 1-3")
    p.add_argument("--config", required=True)
    p.add_argument("--store", help=f"store root (default ${STORE_ENV})")
    p.add_argument("--max-parallel", type=int, default=None, help="cap on concurrently running workers")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="parse a config and report the grid size")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="print the aggregate table and the winner")
    p.add_argument("--store")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("inspect", help="list store keys or show one blob")
    p.add_argument("--store")
    p.add_argument("key", nargs="?")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_parallel", None) is not None and args.max_parallel < 1:
        parser.error("--max-parallel must be >= 1")
    logging.basicConfig(level=LOG_LEVELS[args.log_level], format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
