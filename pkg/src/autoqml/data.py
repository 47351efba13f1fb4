"""Target data ingestion, binning and resampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, EmptyFile, MalformedRow, NonFiniteValue, QubitCountOutOfRange
from .quantum.circuits import MAX_QUBITS


def load_samples(csv_bytes: bytes) -> np.ndarray:
    """Parse a one-column numeric CSV (LF or CRLF, optional header line).

    Blank lines are skipped. Line numbers in errors are 1-based.
    """
    text = csv_bytes.decode("utf-8-sig") if isinstance(csv_bytes, bytes) else csv_bytes
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            if lineno == 1:
                continue  # header
            raise MalformedRow(lineno, raw) from None
        if not math.isfinite(value):
            raise NonFiniteValue(lineno, raw)
        values.append(value)
    if not values:
        raise EmptyFile("no numeric rows found")
    return np.array(values, dtype=float)


@dataclass(frozen=True, eq=False)
class TargetDistribution:
    low: float
    high: float
    num_qubits: int
    bin_probabilities: np.ndarray
    raw_samples: np.ndarray

    def __post_init__(self):
        for name in ("bin_probabilities", "raw_samples"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def num_bins(self) -> int:
        return self.bin_probabilities.size

    @property
    def bin_edges(self) -> np.ndarray:
        return bin_edges(self.low, self.high, self.num_qubits)

    @property
    def index_mean(self) -> float:
        """Mean of the binned distribution in bin-index units."""
        return float(np.arange(self.num_bins) @ self.bin_probabilities)

    @property
    def index_std(self) -> float:
        idx = np.arange(self.num_bins)
        return float(np.sqrt(((idx - self.index_mean) ** 2) @ self.bin_probabilities))


def bin_edges(low: float, high: float, num_qubits: int) -> np.ndarray:
    n_bins = 2 ** num_qubits
    edges = low + np.arange(n_bins + 1) * ((high - low) / n_bins)
    edges[-1] = high
    return edges


def bin_index(samples, low: float, high: float, num_qubits: int) -> np.ndarray:
    """Bin of each sample; bin ``i`` is ``[edge_i, edge_{i+1})``, the last one closed."""
    x = np.asarray(samples, dtype=float)
    edges = bin_edges(low, high, num_qubits)
    n_bins = edges.size - 1
    # searchsorted against the same edges keeps the boundary convention exact
    idx = np.searchsorted(edges, x, side="right") - 1
    return np.clip(idx, 0, n_bins - 1)


def discretize(samples, num_qubits: int, mode: str = "optimal") -> TargetDistribution:
    """Equal-width histogram with ``2**N`` bins over ``[min, max]``."""
    if mode != "optimal":
        raise ValueError(f"unsupported discretization {mode!r}")
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise QubitCountOutOfRange(f"num_qubits={num_qubits} outside [1, {MAX_QUBITS}]")
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise DegenerateData("no samples")
    low, high = float(x.min()), float(x.max())
    if low == high:
        raise DegenerateData("all samples are equal")
    counts = np.bincount(bin_index(x, low, high, num_qubits), minlength=2 ** num_qubits)
    return TargetDistribution(low, high, num_qubits, counts / x.size, x)


def resample(target: TargetDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` draws with replacement from the raw samples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return target.raw_samples[rng.integers(0, target.raw_samples.size, size=n)]


def synthetic_prices(n: int, rng: np.random.Generator, low: float = 10.0, high: float = 50.0) -> np.ndarray:
    """Bimodal stand-in for overnight spot prices (EUR/MWh).

    20% flat background over ``[low, high]`` plus a low-price mode at 22 and
    a high-price mode at 38. Values are confined to the window by redrawing.
    """
    out = np.empty(0)
    while out.size < n:
        m = n - out.size
        u = rng.random(m)
        x = np.where(u < 0.2, rng.uniform(low, high, m),
                     np.where(u < 0.2 + 0.8 * 0.55, rng.normal(22.0, 3.5, m), rng.normal(38.0, 3.0, m)))
        out = np.concatenate([out, x[(x >= low) & (x <= high)]])
    return out


def samples_to_csv(samples, header: str = "price") -> bytes:
    lines = [header] + [repr(float(v)) for v in samples]
    return ("\n".join(lines) + "\n").encode()
