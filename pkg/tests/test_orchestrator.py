import csv
import io
import json
import threading
import time

import numpy as np
import pytest

from autoqml.data import samples_to_csv, synthetic_prices
from autoqml.errors import (ConfigSyntaxError, InvalidValue, KeyExistsError, MissingField, NoSuccessfulRuns,
                            PipelineError, TriggerTimeout, UnknownVisualization)
from autoqml.orchestrator import (ObjectStore, PipelineTrigger, await_trigger, expand_grid, load_config,
                                  parse_config, run_all, run_pipeline_1, run_pipeline_2, run_pipeline_3,
                                  schedule_static)
from autoqml.orchestrator.pipelines import AGGREGATE_COLUMNS, read_raw_records

from conftest import CONFIGS, config_dict, write_reference_store


def upload(store, cfg: dict):
    data = json.dumps(cfg).encode()
    store.put_atomic("config/grid.json", data)
    return parse_config(data), data


def read_csv(store, key):
    return list(csv.DictReader(io.StringIO(store.get(key).decode())))


# -- store ------------------------------------------------------------------

def test_store_roundtrip_and_write_once(tmp_path):
    store = ObjectStore(tmp_path)
    store.put_atomic("raw/a.json", b"[1]")
    assert store.get("raw/a.json") == b"[1]"
    with pytest.raises(KeyExistsError):
        store.put_atomic("raw/a.json", b"[2]")
    assert store.get("raw/a.json") == b"[1]"
    with pytest.raises(KeyError):
        store.get("raw/missing.json")


def test_store_listing_hides_temp_files(tmp_path):
    store = ObjectStore(tmp_path)
    store.put_atomic("raw/b.json", b"x")
    (tmp_path / "raw" / ".tmp-partial").write_bytes(b"half")
    assert store.list("raw/") == ["raw/b.json"]


def test_store_rejects_escaping_keys(tmp_path):
    store = ObjectStore(tmp_path)
    for key in ("../x", "a/../../x", ".tmp-x"):
        with pytest.raises(ValueError):
            store.put_atomic(key, b"")


def test_store_concurrent_writers_single_winner(tmp_path):
    store = ObjectStore(tmp_path)
    outcomes = []

    def write(i):
        try:
            store.put_atomic("k", bytes([i]) * 10_000)
            outcomes.append(i)
        except KeyExistsError:
            pass

    threads = [threading.Thread(target=write, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(outcomes) == 1
    assert store.get("k") == bytes([outcomes[0]]) * 10_000
    assert store.list() == ["k"]


# -- config -----------------------------------------------------------------

def test_listing_parses():
    config = load_config(f"{CONFIGS}/reference_grid.json")
    assert {a.type for a in config.ansaetze} == {"zoufal", "vallecorsa", "herr_1"}
    assert config.master_seed == 0
    assert config.budget.max_wall_seconds == 3600.0 and config.budget.max_circuit_evaluations == 10 ** 9


def test_missing_field():
    cfg = config_dict()
    del cfg["ansaetze"]
    with pytest.raises(MissingField) as exc:
        parse_config(json.dumps(cfg))
    assert exc.value.name == "ansaetze"


def test_qubit_ceiling():
    with pytest.raises(InvalidValue) as exc:
        parse_config(json.dumps(config_dict(num_qubits=[13])))
    assert exc.value.field == "num_qubits"


@pytest.mark.parametrize("bad", [{"n_containers": 0}, {"num_qubits": []}, {"initializations": [{"type": "x"}]},
                                 {"ansaetze": [{"type": "nope", "repetitions": [1]}]}, {"batch_size": -1}])
def test_invalid_values(bad):
    with pytest.raises(InvalidValue):
        parse_config(json.dumps(config_dict(**bad)))


def test_syntax_error_position():
    with pytest.raises(ConfigSyntaxError) as exc:
        parse_config(b'{\n  "name": "x",\n  oops\n}')
    assert (exc.value.lineno, exc.value.colno) == (3, 3)
    assert exc.value.position == len('{\n  "name": "x",\n  ')


def test_unknown_field_warns(caplog):
    parse_config(json.dumps(config_dict(surprise=1)))
    assert "surprise" in caplog.text


# -- grid and schedule ------------------------------------------------------

def test_grid_examples():
    assert len(expand_grid(parse_config(json.dumps(config_dict())))) == 1
    two = config_dict(ansaetze=[{"type": "zoufal", "repetitions": [1, 2]},
                                {"type": "herr_1", "repetitions": [1, 2]}])
    assert len(expand_grid(parse_config(json.dumps(two)))) == 4
    specs = expand_grid(load_config(f"{CONFIGS}/reference_grid.json"))
    assert len(specs) == 540
    assert len({s.spec_id for s in specs}) == 540
    assert [s.spec_id for s in specs] == sorted(s.spec_id for s in specs)


def test_schedule_examples():
    assert [len(s) for s in schedule_static([f"{i:02d}" for i in range(7)], 3)] == [3, 2, 2]
    assert [len(s) for s in schedule_static(["a", "b"], 5)] == [1, 1, 0, 0, 0]
    sets = schedule_static(expand_grid(load_config(f"{CONFIGS}/reference_grid.json")), 10)
    assert [len(s) for s in sets] == [54] * 10


@pytest.mark.parametrize("n_specs", [0, 1, 7, 53, 540])
@pytest.mark.parametrize("n_containers", [1, 2, 3, 10, 17])
def test_schedule_balance_and_partition(n_specs, n_containers):
    ids = [f"{i:04x}" for i in range(n_specs)]
    sets = schedule_static(ids, n_containers)
    sizes = [len(s) for s in sets]
    assert len(sets) == n_containers and max(sizes) - min(sizes) <= 1
    assert sorted(i for s in sets for i in s) == sorted(ids)


# -- pipeline 1 -------------------------------------------------------------

def test_pipeline_1_minimal(tmp_path):
    store = ObjectStore(tmp_path / "s")
    config, data = upload(store, config_dict(num_epochs=5))
    run_pipeline_1(config, store, data)
    assert store.list("raw/") == ["raw/node-0.json"]
    records = json.loads(store.get("raw/node-0.json"))
    assert len(records) == 1 and records[0]["status"] == "ok" and records[0]["format"] == 1
    assert records[0]["result"]["epochs_completed"] == 5
    assert "wall_seconds" not in records[0]["result"]


def test_pipeline_1_deterministic(tmp_path):
    blobs = []
    for name in ("a", "b"):
        store = ObjectStore(tmp_path / name)
        config, data = upload(store, config_dict(num_epochs=5, num_training_runs=2))
        run_pipeline_1(config, store, data)
        blobs.append(store.get("raw/node-0.json"))
    assert blobs[0] == blobs[1]


def test_pipeline_1_missing_data_is_isolated(tmp_path):
    store = ObjectStore(tmp_path / "s")
    store.put_atomic("data/prices.csv", samples_to_csv(synthetic_prices(500, np.random.default_rng(1))))
    dists = [{"data_path": "data/prices.csv", "samples": 500, "discretization": "optimal"},
             {"data_path": "data/absent.csv", "samples": 500, "discretization": "optimal"}]
    config, data = upload(store, config_dict(distributions=dists, num_training_runs=2))
    run_pipeline_1(config, store, data)
    records = read_raw_records(store)
    by_path = {}
    for r in records:
        by_path.setdefault(r["spec"]["data_path"], []).append(r)
    assert [r["status"] for r in by_path["data/prices.csv"]] == ["ok", "ok"]
    assert [r["status"] for r in by_path["data/absent.csv"]] == ["failed", "failed"]
    assert "absent.csv" in by_path["data/absent.csv"][0]["error"]


def test_empty_workers_write_empty_blobs(tmp_path):
    store = ObjectStore(tmp_path / "s")
    config, data = upload(store, config_dict(n_containers=3))
    run_pipeline_1(config, store, data, max_parallel=1)
    assert store.list("raw/") == [f"raw/node-{w}.json" for w in range(3)]
    sizes = sorted(len(json.loads(store.get(k))) for k in store.list("raw/"))
    assert sizes == [0, 0, 1]


# -- trigger ----------------------------------------------------------------

def test_trigger_immediate(tmp_path):
    store = ObjectStore(tmp_path)
    for w in range(3):
        store.put_atomic(f"raw/node-{w}.json", b"[]")
    trigger = PipelineTrigger(3)
    t0 = time.monotonic()
    await_trigger(trigger, store, timeout=1)
    assert trigger.fired and time.monotonic() - t0 < 0.5
    assert not trigger.poll(store)
    with pytest.raises(PipelineError):
        await_trigger(trigger, store)


def test_trigger_incremental(tmp_path):
    store = ObjectStore(tmp_path)
    written = []

    def writer():
        for w in range(3):
            time.sleep(0.05)
            store.put_atomic(f"raw/node-{w}.json", b"[]")
            written.append(time.monotonic())

    thread = threading.Thread(target=writer)
    thread.start()
    await_trigger(PipelineTrigger(3), store, interval=0.01, timeout=5)
    returned = time.monotonic()
    thread.join()
    assert len(written) == 3 and returned >= written[-1]


def test_trigger_timeout(tmp_path):
    store = ObjectStore(tmp_path)
    store.put_atomic("raw/node-0.json", b"[]")
    with pytest.raises(TriggerTimeout):
        await_trigger(PipelineTrigger(2), store, interval=0.01, timeout=0.1)


def test_trigger_overcount(tmp_path):
    store = ObjectStore(tmp_path)
    for w in range(3):
        store.put_atomic(f"raw/node-{w}.json", b"[]")
    with pytest.raises(PipelineError):
        PipelineTrigger(2).poll(store)


# -- pipeline 2 -------------------------------------------------------------

def test_pipeline_2_reference_table(tmp_path):
    store = ObjectStore(tmp_path)
    write_reference_store(store)
    config = parse_config(json.dumps(config_dict()))
    run_pipeline_2(config, store)
    selection = json.loads(store.get("processed/selection.json"))
    assert selection["winner"]["initialization"] == "uniform" and selection["winner"]["k"] == 2
    assert selection["per_num_qubits"] == {"5": selection["winner"]["spec_id"]}
    rows = read_csv(store, "processed/aggregate.csv")
    assert tuple(rows[0]) == AGGREGATE_COLUMNS and len(rows) == 9
    row = next(r for r in rows if r["spec_id"] == selection["winner"]["spec_id"])
    assert float(row["mu_re"]) == pytest.approx(0.3562, abs=1e-12)
    assert float(row["sigma_re"]) == pytest.approx(0.0947, abs=1e-12)
    assert float(row["mu_depth"]) == pytest.approx(77.09, abs=1e-12)
    assert store.exists("models/best.qmodel")
    # best run is one of the mu - sigma (odd index) runs, lowest index on ties
    assert selection["best_run_index"] == 1


def test_pipeline_2_single_run_zero_sigma(tmp_path):
    store = ObjectStore(tmp_path)
    config, data = upload(store, config_dict())
    run_pipeline_1(config, store, data)
    run_pipeline_2(config, store)
    (row,) = read_csv(store, "processed/aggregate.csv")
    assert float(row["sigma_ks"]) == 0.0 and float(row["sigma_re"]) == 0.0


def test_pipeline_2_excludes_failed_runs(tmp_path):
    store = ObjectStore(tmp_path)
    config, data = upload(store, config_dict(num_training_runs=3))
    run_pipeline_1(config, store, data)
    (key,) = store.list("raw/")
    records = json.loads(store.get(key))
    records[1] = {k: records[1][k] for k in ("format", "spec", "run_index")}
    records[1].update(status="failed", error="RuntimeError: diverged")
    other = ObjectStore(tmp_path / "edited")
    other.put_atomic(key, json.dumps(records).encode())
    run_pipeline_2(config, other)
    ranking = json.loads(other.get("processed/selection.json"))["ranking"]
    assert ranking[0]["n_runs"] == 2
    (row,) = read_csv(other, "processed/aggregate.csv")
    oks = [r["result"]["final_re"] for r in records if r["status"] == "ok"]
    assert float(row["mu_re"]) == pytest.approx(np.mean(oks), abs=1e-15)


def test_pipeline_2_no_successful_runs(tmp_path):
    store = ObjectStore(tmp_path)
    config = parse_config(json.dumps(config_dict()))
    spec = expand_grid(config)[0]
    store.put_atomic("raw/node-0.json", json.dumps([{"format": 1, "status": "failed", "spec": spec.to_dict(),
                                                     "run_index": 0, "error": "x"}]).encode())
    with pytest.raises(NoSuccessfulRuns):
        run_pipeline_2(config, store)


def test_pipeline_2_rejects_unknown_format(tmp_path):
    store = ObjectStore(tmp_path)
    store.put_atomic("raw/node-0.json", b'[{"format": 2}]')
    with pytest.raises(PipelineError):
        run_pipeline_2(parse_config(json.dumps(config_dict())), store)


# -- pipeline 3 -------------------------------------------------------------

def _processed_store(tmp_path, **overrides):
    store = ObjectStore(tmp_path)
    config, data = upload(store, config_dict(**overrides))
    run_pipeline_1(config, store, data, max_parallel=1)
    run_pipeline_2(config, store)
    return store, config


def test_pipeline_3_no_visualizations(tmp_path):
    store, config = _processed_store(tmp_path)
    run_pipeline_3(config, store)
    assert store.list("plots/") == []


def test_pipeline_3_entropy_curve_shape(tmp_path):
    store, config = _processed_store(tmp_path, initializations=[{"type": "uniform"}, {"type": "normal"}],
                                     num_epochs=4, num_training_runs=2, visualizations=["entropy_curve"])
    run_pipeline_3(config, store)
    assert store.list("plots/") == ["plots/entropy_curve.csv", "plots/entropy_curve.svg"]
    rows = read_csv(store, "plots/entropy_curve.csv")
    assert len(rows) == 2 * 4
    assert len({(r["spec_id"], r["epoch"]) for r in rows}) == 8
    assert store.get("plots/entropy_curve.svg").lstrip().startswith(b"<?xml")


def test_pipeline_3_all_plots(tmp_path):
    store, config = _processed_store(tmp_path, visualizations=["entanglement_histogram", "distribution_overlay"])
    run_pipeline_3(config, store)
    (hist,) = read_csv(store, "plots/entanglement_histogram.csv")
    assert hist["ansatz"] == "zoufal" and 0 <= float(hist["entangling_capability"]) <= 1
    overlay = read_csv(store, "plots/distribution_overlay.csv")
    assert len(overlay) == 4
    assert sum(float(r["generated"]) for r in overlay) == pytest.approx(1, abs=1e-12)
    assert sum(float(r["target"]) for r in overlay) == pytest.approx(1, abs=1e-12)


def test_pipeline_3_unknown_visualization(tmp_path):
    store, config = _processed_store(tmp_path)
    config.visualizations = ["no_such_plot"]
    with pytest.raises(UnknownVisualization):
        run_pipeline_3(config, store)


def test_pipeline_3_requires_aggregate(tmp_path):
    with pytest.raises(PipelineError):
        run_pipeline_3(parse_config(json.dumps(config_dict())), ObjectStore(tmp_path))


# -- run_all ----------------------------------------------------------------

def test_run_all_layout(tmp_path):
    store_root = tmp_path / "store"
    run_all(f"{CONFIGS}/minimal.json", store_root, max_parallel=1)
    keys = ObjectStore(store_root).list()
    for prefix in ("config/", "raw/", "processed/", "models/", "plots/"):
        assert any(k.startswith(prefix) for k in keys), prefix
    assert "config/minimal.json" in keys and "models/best.qmodel" in keys
    with pytest.raises(PipelineError):
        run_all(f"{CONFIGS}/minimal.json", store_root, max_parallel=1)
    assert ObjectStore(store_root).list() == keys


def test_run_all_budget_exhaustion_degrades(tmp_path, write_config):
    path = write_config(num_epochs=50, budget={"max_wall_seconds": 3600, "max_circuit_evaluations": 20})
    run_all(path, tmp_path / "store", max_parallel=1)
    store = ObjectStore(tmp_path / "store")
    (record,) = read_raw_records(store)
    assert record["status"] == "ok" and record["result"]["budget_exhausted"]
    assert record["result"]["epochs_completed"] < 50
    assert store.exists("models/best.qmodel")
