"""Search configuration parsing and validation.

The accepted schema is the JSON experiment listing (name, goal, metrics,
n_containers, visualizations, distributions, ansaetze, initializations,
num_qubits, batch_size, num_epochs, num_training_runs, discriminator,
optimizer) plus two extensions: ``budget`` and ``master_seed``.

``discriminator`` may be a list of ``{"type", "hparams"}`` objects, a single
such object, or one object that repeats the ``type``/``hparams`` keys (each
``type`` opens a new entry and the ``hparams`` that follow belong to it).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from ..errors import ConfigSyntaxError, InvalidValue, MissingField
from ..gan.discriminator import ARCHITECTURES, DiscriminatorSpec
from ..gan.training import TrainingBudget
from ..quantum import FAMILIES, MAX_QUBITS, InitStrategy

log = logging.getLogger(__name__)

KNOWN_FIELDS = {
    "name", "goal", "metrics", "n_containers", "visualizations", "distributions", "ansaetze",
    "initializations", "num_qubits", "batch_size", "num_epochs", "num_training_runs",
    "discriminator", "optimizer", "budget", "master_seed",
}
REQUIRED_FIELDS = (
    "name", "n_containers", "distributions", "ansaetze", "initializations", "num_qubits",
    "batch_size", "num_epochs", "num_training_runs", "discriminator", "optimizer",
)
DEFAULT_BUDGET = TrainingBudget(max_wall_seconds=3600.0, max_circuit_evaluations=10 ** 9)


@dataclass(frozen=True)
class DistributionConfig:
    data_path: str
    samples: int
    discretization: str = "optimal"


@dataclass(frozen=True)
class AnsatzConfig:
    type: str
    repetitions: Tuple[int, ...]


@dataclass
class ExperimentConfig:
    name: str
    n_containers: int
    distributions: List[DistributionConfig]
    ansaetze: List[AnsatzConfig]
    initializations: List[InitStrategy]
    num_qubits: List[int]
    batch_size: int
    num_epochs: int
    num_training_runs: int
    discriminators: List[DiscriminatorSpec]
    generator_lrs: List[float]
    generator_betas: Tuple[float, float]
    goal: str = ""
    metrics: str = "relative_entropy"
    visualizations: List[str] = field(default_factory=list)
    budget: TrainingBudget = DEFAULT_BUDGET
    master_seed: int = 0


class _Pairs(dict):
    """dict that also remembers every (key, value) pair, duplicates included."""

    def __init__(self, pairs):
        super().__init__(pairs)
        self.pairs = list(pairs)


def _require(obj: dict, key: str, where: str = ""):
    if not isinstance(obj, dict):
        raise InvalidValue(where.rstrip(".") or "<root>", "expected an object")
    if key not in obj:
        raise MissingField(f"{where}{key}")
    return obj[key]


def _int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidValue(name, f"expected an integer, got {value!r}")
    if value < minimum:
        raise InvalidValue(name, f"must be >= {minimum}, got {value}")
    return value


def _positive(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise InvalidValue(name, f"expected a positive number, got {value!r}")
    return float(value)


def _nonempty_list(value, name: str) -> list:
    if not isinstance(value, list) or not value:
        raise InvalidValue(name, "expected a non-empty list")
    return value


def _as_list(value) -> list:
    return value if isinstance(value, list) else [value]


def _betas(value, name: str) -> Tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise InvalidValue(name, "expected [beta1, beta2]")
    b1, b2 = (float(v) for v in value)
    if not 0 < b1 < b2 < 1:
        raise InvalidValue(name, f"need 0 < beta1 < beta2 < 1, got {value}")
    return b1, b2


def _discriminator_entries(raw) -> list:
    if isinstance(raw, list):
        entries = []
        for item in raw:
            if not isinstance(item, dict):
                raise InvalidValue("discriminator", "list entries must be objects")
            entries.append({"type": _require(item, "type", "discriminator."),
                            "hparams": item.get("hparams", {})})
        return entries
    if not isinstance(raw, dict):
        raise InvalidValue("discriminator", "expected an object or a list of objects")
    entries = []
    for key, value in getattr(raw, "pairs", raw.items()):
        if key == "type":
            entries.append({"type": value, "hparams": {}})
        elif key == "hparams":
            if not entries:
                raise InvalidValue("discriminator", "'hparams' before any 'type'")
            entries[-1]["hparams"] = value
        else:
            log.warning("ignoring unknown discriminator field %r", key)
    if not entries:
        raise MissingField("discriminator.type")
    return entries


def _parse_discriminators(raw) -> List[DiscriminatorSpec]:
    specs = []
    for i, entry in enumerate(_discriminator_entries(raw)):
        name = f"discriminator[{i}]"
        type_name = entry["type"]
        if not isinstance(type_name, str):
            raise InvalidValue(f"{name}.type", "expected a string")
        hp = entry["hparams"]
        if not isinstance(hp, dict):
            raise InvalidValue(f"{name}.hparams", "expected an object")
        if "n_hidden" in hp:
            hidden = tuple(_int(h, f"{name}.n_hidden") for h in _nonempty_list(hp["n_hidden"], f"{name}.n_hidden"))
        elif type_name in ARCHITECTURES:
            hidden = ARCHITECTURES[type_name]
        else:
            raise MissingField(f"{name}.hparams.n_hidden")
        if "n_input" in hp:
            _int(hp["n_input"], f"{name}.n_input")
            log.warning("%s.n_input=%s ignored: the discriminator reads one scalar sample", name, hp["n_input"])
        betas = _betas(hp.get("betas", [0.9, 0.999]), f"{name}.betas")
        lrs = _as_list(hp.get("lr", [1e-4]))
        if not lrs:
            raise InvalidValue(f"{name}.lr", "expected a non-empty list")
        for lr in lrs:
            specs.append(DiscriminatorSpec(type_name, hidden, _positive(lr, f"{name}.lr"), betas))
    return specs


def _parse_initialization(item, i) -> InitStrategy:
    if not isinstance(item, dict):
        raise InvalidValue(f"initializations[{i}]", "expected an object")
    kind = _require(item, "type", f"initializations[{i}].")
    if not isinstance(kind, str) or kind.lower() not in InitStrategy.KINDS:
        raise InvalidValue(f"initializations[{i}].type", f"expected one of {InitStrategy.KINDS}, got {kind!r}")
    std = item.get("std")
    if std is not None:
        std = _positive(std, f"initializations[{i}].std")
    seed = item.get("seed")
    if seed is not None:
        seed = _int(seed, f"initializations[{i}].seed", minimum=0)
    mean = item.get("mean")
    return InitStrategy(kind, None if mean is None else float(mean), std, seed)


def parse_config(data) -> ExperimentConfig:
    """Parse and validate configuration JSON (bytes or str)."""
    text = data.decode("utf-8-sig") if isinstance(data, (bytes, bytearray)) else data
    try:
        raw = json.loads(text, object_pairs_hook=_Pairs)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(exc.msg, exc.pos, exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise InvalidValue("<root>", "configuration must be a JSON object")
    for key in REQUIRED_FIELDS:
        _require(raw, key)
    for key in raw:
        if key not in KNOWN_FIELDS:
            log.warning("ignoring unknown configuration field %r", key)

    distributions = []
    for i, item in enumerate(_nonempty_list(raw["distributions"], "distributions")):
        where = f"distributions[{i}]."
        path = _require(item, "data_path", where)
        if not isinstance(path, str) or not path:
            raise InvalidValue(f"{where}data_path", "expected a non-empty string")
        mode = item.get("discretization", "optimal")
        if mode != "optimal":
            raise InvalidValue(f"{where}discretization", f"only 'optimal' is supported, got {mode!r}")
        distributions.append(DistributionConfig(path, _int(_require(item, "samples", where), f"{where}samples"), mode))

    ansaetze = []
    for i, item in enumerate(_nonempty_list(raw["ansaetze"], "ansaetze")):
        where = f"ansaetze[{i}]."
        family = _require(item, "type", where)
        if family not in FAMILIES:
            raise InvalidValue(f"{where}type", f"expected one of {FAMILIES}, got {family!r}")
        reps = tuple(_int(k, f"{where}repetitions")
                     for k in _nonempty_list(_require(item, "repetitions", where), f"{where}repetitions"))
        ansaetze.append(AnsatzConfig(family, reps))

    inits = [_parse_initialization(item, i)
             for i, item in enumerate(_nonempty_list(raw["initializations"], "initializations"))]

    qubits = []
    for n in _nonempty_list(raw["num_qubits"], "num_qubits"):
        n = _int(n, "num_qubits")
        if n > MAX_QUBITS:
            raise InvalidValue("num_qubits", f"{n} exceeds the simulator ceiling of {MAX_QUBITS}")
        qubits.append(n)

    opt = raw["optimizer"]
    if not isinstance(opt, dict):
        raise InvalidValue("optimizer", "expected an object")
    gen_lrs = [_positive(lr, "optimizer.lr") for lr in _nonempty_list(_as_list(_require(opt, "lr", "optimizer.")), "optimizer.lr")]
    gen_betas = _betas(opt.get("betas", [0.9, 0.999]), "optimizer.betas")

    budget = DEFAULT_BUDGET
    if "budget" in raw:
        b = raw["budget"]
        if not isinstance(b, dict):
            raise InvalidValue("budget", "expected an object")
        budget = TrainingBudget(
            max_wall_seconds=_positive(b.get("max_wall_seconds", DEFAULT_BUDGET.max_wall_seconds),
                                       "budget.max_wall_seconds"),
            max_circuit_evaluations=_int(b.get("max_circuit_evaluations", DEFAULT_BUDGET.max_circuit_evaluations),
                                         "budget.max_circuit_evaluations", minimum=0),
        )

    visualizations = raw.get("visualizations", [])
    if not isinstance(visualizations, list) or not all(isinstance(v, str) for v in visualizations):
        raise InvalidValue("visualizations", "expected a list of strings")
    metrics = raw.get("metrics", "relative_entropy")
    if metrics != "relative_entropy":
        log.warning("metrics=%r: selection always ranks by relative entropy, KS and depth", metrics)
    name = raw["name"]
    if not isinstance(name, str):
        raise InvalidValue("name", "expected a string")

    return ExperimentConfig(
        name=name,
        goal=str(raw.get("goal", "")),
        metrics=str(metrics),
        n_containers=_int(raw["n_containers"], "n_containers"),
        visualizations=list(visualizations),
        distributions=distributions,
        ansaetze=ansaetze,
        initializations=inits,
        num_qubits=qubits,
        batch_size=_int(raw["batch_size"], "batch_size"),
        num_epochs=_int(raw["num_epochs"], "num_epochs"),
        num_training_runs=_int(raw["num_training_runs"], "num_training_runs"),
        discriminators=_parse_discriminators(raw["discriminator"]),
        generator_lrs=gen_lrs,
        generator_betas=gen_betas,
        budget=budget,
        master_seed=_int(raw.get("master_seed", 0), "master_seed", minimum=0),
    )


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        return parse_config(fh.read())
