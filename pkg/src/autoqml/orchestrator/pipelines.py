"""The three sequential pipelines and the trigger that gates them.

Store layout (version 1)::

    config/<name>.json          uploaded search configuration (initiating event)
    raw/node-<w>.json           one blob per worker, JSON array of run records
    processed/aggregate.csv     per-spec statistics
    processed/selection.json    ranking, winner and per-N winners
    models/best.qmodel          best run of the winning spec
    plots/<name>.csv|.svg       requested visualizations
    logs/node-<w>.json          wall-clock sidecar (not used for selection)

A run record is ``{"format": 1, "status": "ok"|"failed", "spec": {...},
"run_index": int, ...}``. Successful records carry ``"result"`` (the
serialized RunResult) and ``"target"`` (``low``, ``high``,
``bin_probabilities``); failed ones carry ``"error"``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from ..data import TargetDistribution, discretize, load_samples, synthetic_prices
from ..errors import NoSuccessfulRuns, PipelineError, TriggerTimeout, UnknownVisualization
from ..experiment import ExperimentSpec, run_seed
from ..gan.persistence import dump_model, load_model
from ..gan.training import RunResult, train_qgan
from ..metrics import aggregate_runs, select_best
from ..quantum import AnsatzDescriptor, build_ansatz, entangling_capability, map_to_range
from .config import ExperimentConfig, parse_config
from .grid import expand_grid, schedule_static
from .store import ObjectStore

log = logging.getLogger(__name__)

RAW_FORMAT = 1
MANAGED_PREFIXES = ("config/", "raw/", "processed/", "models/", "plots/", "logs/")
VISUALIZATIONS = ("entropy_curve", "entanglement_histogram", "distribution_overlay")
SYNTHETIC_SCHEME = "synthetic:"
POLL_INTERVAL = 0.05
ENTANGLEMENT_SAMPLES = 200

AGGREGATE_COLUMNS = ("spec_id", "initialization", "k", "mu_ks", "sigma_ks", "mu_re", "sigma_re", "mu_depth")

Progress = Optional[Callable[[str], None]]


def _emit(progress: Progress, line: str):
    log.info(line)
    if progress is not None:
        progress(line)


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=1) + "\n").encode()


# -- config -----------------------------------------------------------------

def config_key(store: ObjectStore) -> str:
    keys = store.list("config/")
    if len(keys) != 1:
        raise PipelineError(f"expected exactly one config blob under config/, found {len(keys)}")
    return keys[0]


def load_store_config(store: ObjectStore) -> ExperimentConfig:
    return parse_config(store.get(config_key(store)))


# -- trigger ----------------------------------------------------------------

@dataclass
class PipelineTrigger:
    """Fires once, when ``prefix`` holds ``expected_node_count`` keys."""

    expected_node_count: int
    prefix: str = "raw/"
    fired: bool = False

    def poll(self, store: ObjectStore) -> bool:
        if self.fired:
            return False
        count = len(store.list(self.prefix))
        if count > self.expected_node_count:
            raise PipelineError(f"{count} keys under {self.prefix}, expected {self.expected_node_count}")
        if count == self.expected_node_count:
            self.fired = True
            return True
        return False


def await_trigger(trigger: PipelineTrigger, store: ObjectStore, interval: float = POLL_INTERVAL,
                  timeout: Optional[float] = None) -> None:
    """Block until ``trigger`` fires, polling every ``interval`` seconds.

    Raises TriggerTimeout after ``timeout`` seconds (None waits forever).
    """
    if trigger.fired:
        raise PipelineError("trigger has already fired")
    deadline = None if timeout is None else time.monotonic() + timeout
    while not trigger.poll(store):
        if deadline is not None and time.monotonic() >= deadline:
            have = len(store.list(trigger.prefix))
            raise TriggerTimeout(f"{have}/{trigger.expected_node_count} blobs under {trigger.prefix} "
                                 f"after {timeout:.1f}s")
        time.sleep(interval)


# -- pipeline 1 -------------------------------------------------------------

def _read_data(spec: ExperimentSpec, data_root: Path) -> np.ndarray:
    """Raw samples for a spec: ``synthetic:<seed>`` or a CSV path.

    Relative paths resolve against ``data_root`` (the store root); files
    longer than ``samples`` rows are truncated to their first ``samples``.
    """
    path = spec.data_path
    if path.startswith(SYNTHETIC_SCHEME):
        seed = int(path[len(SYNTHETIC_SCHEME):] or 0)
        return synthetic_prices(spec.samples, np.random.default_rng(seed))
    p = Path(path.replace("\\", "/"))
    if not p.is_absolute():
        p = data_root / p
    values = load_samples(p.read_bytes())
    if values.size > spec.samples:
        values = values[:spec.samples]
    return values


class _TargetCache:
    """Loads and bins each (data source, N) once per worker."""

    def __init__(self, data_root: Path):
        self.data_root = data_root
        self._raw: Dict[tuple, np.ndarray] = {}
        self._binned: Dict[tuple, TargetDistribution] = {}

    def get(self, spec: ExperimentSpec) -> TargetDistribution:
        src = (spec.data_path, spec.samples)
        key = src + (spec.num_qubits, spec.discretization)
        if key not in self._binned:
            if src not in self._raw:
                self._raw[src] = _read_data(spec, self.data_root)
            self._binned[key] = discretize(self._raw[src], spec.num_qubits, spec.discretization)
        return self._binned[key]


def _failed(spec: ExperimentSpec, run_index: int, exc: BaseException) -> dict:
    return {"format": RAW_FORMAT, "status": "failed", "spec": spec.to_dict(), "run_index": run_index,
            "error": f"{type(exc).__name__}: {exc}"}


def run_node(store_root: str, config_bytes: bytes, worker: int, spec_ids: List[str],
             data_root: str = ".") -> int:
    """Train every run of the assigned specs and publish ``raw/node-<worker>.json``.

    Returns the number of runs attempted. Exceptions inside a run become
    failed-run records.
    """
    store = ObjectStore(store_root)
    config = parse_config(config_bytes)
    by_id = {s.spec_id: s for s in expand_grid(config)}
    targets = _TargetCache(Path(data_root))
    records, timings = [], []
    for sid in spec_ids:
        spec = by_id[sid]
        try:
            target = targets.get(spec)
        except Exception as exc:  # data problems fail every run of the spec
            log.warning("worker %d: %s: %s", worker, spec.label, exc)
            records.extend(_failed(spec, i, exc) for i in range(spec.num_training_runs))
            continue
        for i in range(spec.num_training_runs):
            rng = np.random.default_rng(run_seed(sid, i, config.master_seed))
            try:
                result = train_qgan(spec, target, config.budget, rng, run_index=i)
            except Exception as exc:
                log.warning("worker %d: run %d of %s failed:\n%s", worker, i, spec.label, traceback.format_exc())
                records.append(_failed(spec, i, exc))
                continue
            records.append({
                "format": RAW_FORMAT, "status": "ok", "spec": spec.to_dict(), "run_index": i,
                "result": result.to_dict(),
                "target": {"low": target.low, "high": target.high,
                           "bin_probabilities": [float(p) for p in target.bin_probabilities]},
            })
            timings.append({"spec_id": sid, "run_index": i, "wall_seconds": result.wall_seconds})
    # sidecar first: the raw blob is what the trigger counts
    store.put_atomic(f"logs/node-{worker}.json", _json_bytes(timings))
    store.put_atomic(f"raw/node-{worker}.json", _json_bytes(records))
    return len(records)


def run_pipeline_1(config: ExperimentConfig, store: ObjectStore, config_bytes: bytes = None,
                   max_parallel: Optional[int] = None, data_root=None, progress: Progress = None) -> None:
    """Statically schedule the grid over ``n_containers`` workers and run them.

    ``max_parallel`` caps how many workers execute at once; the schedule and
    the blobs written do not depend on it.
    """
    if config_bytes is None:
        config_bytes = store.get(config_key(store))
    specs = expand_grid(config)
    sets = schedule_static(specs, config.n_containers)
    total_runs = len(specs) * config.num_training_runs
    _emit(progress, f"pipeline 1: {len(specs)} specs, {total_runs} runs, {config.n_containers} workers")
    parallel = config.n_containers if max_parallel is None else max(1, min(max_parallel, config.n_containers))
    data_root = store.root if data_root is None else data_root
    jobs = [(str(store.root), config_bytes, w, ids, str(data_root)) for w, ids in enumerate(sets)]
    done = 0

    def finished(n):
        nonlocal done
        before, done = done, done + n
        if done // 100 > before // 100 or done == total_runs:
            _emit(progress, f"pipeline 1: {done}/{total_runs} runs complete")

    if parallel == 1:
        for job in jobs:
            finished(run_node(*job))
    else:
        with ProcessPoolExecutor(max_workers=parallel, mp_context=get_context("spawn")) as pool:
            futures = [pool.submit(run_node, *job) for job in jobs]
            for fut in futures:
                finished(fut.result())
    _emit(progress, "pipeline 1: done")


# -- pipeline 2 -------------------------------------------------------------

def read_raw_records(store: ObjectStore) -> List[dict]:
    records = []
    for key in store.list("raw/"):
        blob = json.loads(store.get(key))
        for rec in blob:
            if rec.get("format") != RAW_FORMAT:
                raise PipelineError(f"{key}: unsupported record format {rec.get('format')!r}")
        records.extend(blob)
    return records


def _successful_by_spec(records) -> Dict[str, List[dict]]:
    groups: Dict[str, List[dict]] = {}
    for rec in records:
        if rec["status"] == "ok":
            groups.setdefault(rec["spec"]["spec_id"], []).append(rec)
    for recs in groups.values():
        recs.sort(key=lambda r: r["run_index"])
    return groups


def _aggregate_csv(rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGGREGATE_COLUMNS)
    for spec, st in rows:
        writer.writerow([st.spec_id, spec["initialization"]["type"], spec["repetitions"],
                         repr(st.mu_ks), repr(st.sigma_ks), repr(st.mu_re), repr(st.sigma_re), repr(st.mu_depth)])
    return buf.getvalue().encode()


def _spec_summary(spec: dict, stats=None) -> dict:
    out = {"spec_id": spec["spec_id"], "ansatz": spec["ansatz"], "k": spec["repetitions"],
           "num_qubits": spec["num_qubits"], "initialization": spec["initialization"]["type"]}
    if stats is not None:
        out["n_runs"] = stats.n_runs
    return out


def run_pipeline_2(config: ExperimentConfig, store: ObjectStore, weights=(1.0, 1.0, 1.0),
                   progress: Progress = None) -> None:
    """Aggregate all runs per spec, select the best spec and persist its model."""
    records = read_raw_records(store)
    failed = sum(r["status"] != "ok" for r in records)
    groups = _successful_by_spec(records)
    if not groups:
        raise NoSuccessfulRuns(f"all {len(records)} runs failed")
    _emit(progress, f"pipeline 2: {len(records) - failed} successful runs, {failed} failed, {len(groups)} specs")

    rows = []
    for sid in sorted(groups):
        recs = groups[sid]
        rows.append((recs[0]["spec"], aggregate_runs(RunResult.from_dict(r["result"]) for r in recs)))
    store.put_atomic("processed/aggregate.csv", _aggregate_csv(rows))

    report = select_best([st for _, st in rows], weights)
    spec_of = {st.spec_id: spec for spec, st in rows}
    stats_of = {st.spec_id: st for _, st in rows}
    per_n = {}
    for n in sorted({spec["num_qubits"] for spec, _ in rows}):
        sub = [st for spec, st in rows if spec["num_qubits"] == n]
        per_n[str(n)] = select_best(sub, weights).winner
    winner_recs = groups[report.winner]
    best = min(winner_recs, key=lambda r: (r["result"]["final_re"], r["run_index"]))
    selection = {
        "winner": _spec_summary(spec_of[report.winner]),
        "best_run_index": best["run_index"],
        "weights": list(report.weights),
        "columns": list(report.columns),
        "ranking": [dict(_spec_summary(spec_of[sid], stats_of[sid]), composite=score)
                    for sid, score in report.ranking],
        "per_num_qubits": per_n,
    }
    store.put_atomic("processed/selection.json", _json_bytes(selection))
    store.put_atomic("models/best.qmodel",
                     dump_model(best["spec"], best["result"], best["target"]["low"], best["target"]["high"]))
    _emit(progress, f"pipeline 2: winner {report.winner} "
                    f"({best['spec']['ansatz']} k={best['spec']['repetitions']} "
                    f"init={best['spec']['initialization']['type']})")


# -- pipeline 3 -------------------------------------------------------------

def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode()


def _svg_bytes(fig) -> bytes:
    import matplotlib.pyplot as plt
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _figure():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "autoqml"
    return plt.subplots(figsize=(6, 4))


def _series_label(spec: dict) -> str:
    return f"{spec['initialization']['type']} {spec['ansatz']} k={spec['repetitions']} N={spec['num_qubits']}"


def _plot_entropy_curve(config, store, groups):
    rows, series = [], []
    for sid in sorted(groups):
        recs = groups[sid]
        spec = recs[0]["spec"]
        curves = [r["result"]["entropy_curve"] for r in recs]
        length = max(len(c) for c in curves)
        mean = [float(np.mean([c[e] for c in curves if len(c) > e])) for e in range(length)]
        rows.extend([sid, spec["ansatz"], spec["repetitions"], spec["num_qubits"],
                     spec["initialization"]["type"], e + 1, repr(v)] for e, v in enumerate(mean))
        series.append((_series_label(spec), mean))
    fig, ax = _figure()
    for label, mean in series:
        ax.plot(np.arange(1, len(mean) + 1), mean, label=label, lw=1)
    ax.set_xlabel("epoch")
    ax.set_ylabel("relative entropy")
    ax.set_yscale("log")
    if len(series) <= 12:
        ax.legend(fontsize=6)
    header = ("spec_id", "ansatz", "k", "num_qubits", "initialization", "epoch", "mean_relative_entropy")
    return _csv_bytes(header, rows), _svg_bytes(fig)


def _plot_entanglement_histogram(config, store, groups):
    shapes = sorted({(s["ansatz"], s["repetitions"], s["num_qubits"])
                     for s in (recs[0]["spec"] for recs in groups.values()) if s["num_qubits"] >= 2})
    rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, 0xE7]))
    rows, labels, values = [], [], []
    for family, k, n in shapes:
        q = entangling_capability(build_ansatz(AnsatzDescriptor(family, n, k)), ENTANGLEMENT_SAMPLES, rng)
        rows.append([family, k, n, repr(q)])
        labels.append(f"{family}\nk={k} N={n}")
        values.append(q)
    fig, ax = _figure()
    ax.bar(np.arange(len(values)), values)
    ax.set_xticks(np.arange(len(values)), labels, fontsize=6)
    ax.set_ylabel("entangling capability (Meyer-Wallach)")
    ax.set_ylim(0, 1)
    return _csv_bytes(("ansatz", "k", "num_qubits", "entangling_capability"), rows), _svg_bytes(fig)


def _plot_distribution_overlay(config, store, groups):
    model = load_model(store.get("models/best.qmodel"))
    winner = json.loads(store.get("processed/selection.json"))["winner"]["spec_id"]
    target = np.array(groups[winner][0]["target"]["bin_probabilities"])
    probs = model.probabilities()
    n = model.num_qubits
    centers = map_to_range(np.arange(2 ** n), model.low, model.high, n)
    rows = [[i, repr(float(c)), repr(float(t)), repr(float(p))]
            for i, (c, t, p) in enumerate(zip(centers, target, probs))]
    fig, ax = _figure()
    width = 0.4
    idx = np.arange(2 ** n)
    ax.bar(idx - width / 2, target, width, label="target")
    ax.bar(idx + width / 2, probs, width, label="generated")
    ax.set_xticks(idx, [f"{c:.3g}" for c in centers], fontsize=6)
    ax.set_xlabel("value")
    ax.set_ylabel("probability")
    ax.legend()
    return _csv_bytes(("bin", "value", "target", "generated"), rows), _svg_bytes(fig)


_PLOTTERS = {
    "entropy_curve": _plot_entropy_curve,
    "entanglement_histogram": _plot_entanglement_histogram,
    "distribution_overlay": _plot_distribution_overlay,
}


def run_pipeline_3(config: ExperimentConfig, store: ObjectStore, progress: Progress = None) -> None:
    """Write ``plots/<name>.csv`` and ``plots/<name>.svg`` for each requested plot."""
    unknown = [v for v in config.visualizations if v not in _PLOTTERS]
    if unknown:
        raise UnknownVisualization(f"unknown visualization {unknown[0]!r}; known: {', '.join(VISUALIZATIONS)}")
    if not store.exists("processed/aggregate.csv"):
        raise PipelineError("processed/aggregate.csv missing; run pipeline 2 first")
    groups = _successful_by_spec(read_raw_records(store))
    for name in dict.fromkeys(config.visualizations):
        table, image = _PLOTTERS[name](config, store, groups)
        store.put_atomic(f"plots/{name}.csv", table)
        store.put_atomic(f"plots/{name}.svg", image)
        _emit(progress, f"pipeline 3: wrote plots/{name}.csv and plots/{name}.svg")
    _emit(progress, "pipeline 3: done")


# -- all --------------------------------------------------------------------

def run_all(config_path, store_root, max_parallel: Optional[int] = None, progress: Progress = None,
            trigger_timeout: Optional[float] = None) -> ExperimentConfig:
    """Upload the config and run pipelines 1, 2 and 3, each gated by a trigger.

    Relative data paths resolve against the store root. Refuses to run into a store that already holds pipeline keys.
    """
    config_path = Path(config_path)
    config_bytes = config_path.read_bytes()
    config = parse_config(config_bytes)
    store = ObjectStore(store_root)
    for prefix in MANAGED_PREFIXES:
        if store.list(prefix):
            raise PipelineError(f"store {store.root} already contains {prefix} keys; use a fresh store")
    store.put_atomic(f"config/{config_path.stem}.json", config_bytes)
    _emit(progress, f"uploaded config/{config_path.stem}.json")

    run_pipeline_1(config, store, config_bytes, max_parallel, progress=progress)
    await_trigger(PipelineTrigger(config.n_containers, "raw/"), store, timeout=trigger_timeout)
    run_pipeline_2(config, store, progress=progress)
    await_trigger(PipelineTrigger(1, "processed/aggregate.csv"), store, timeout=trigger_timeout)
    run_pipeline_3(config, store, progress=progress)
    return config
