"""Distribution similarity, per-spec statistics and model selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import EmptyInput, EmptySample, LengthMismatch, MixedSpecs, NotNormalized

Q_FLOOR = 1e-12
NORM_TOL = 1e-8


def kl_divergence(p, q) -> float:
    """Relative entropy ``sum_x P(x) ln(P(x)/Q(x))`` in nats.

    ``p`` is the target, ``q`` the model. Bins with ``P(x) = 0`` contribute
    nothing; ``Q`` is floored at 1e-12 so empty model bins stay finite.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatch(f"distributions have shapes {p.shape} and {q.shape}")
    for name, dist in (("P", p), ("Q", q)):
        if np.any(dist < 0) or abs(dist.sum() - 1.0) > NORM_TOL:
            raise NotNormalized(f"{name} must be non-negative and sum to 1")
    mask = p > 0
    terms = p[mask] * np.log(p[mask] / np.maximum(q[mask], Q_FLOOR))
    return max(float(terms.sum()), 0.0)


def ks_statistic(samples_a, samples_b) -> float:
    """Two-sample Kolmogorov-Smirnov distance ``sup_x |F_a(x) - F_b(x)|``."""
    a = np.sort(np.asarray(samples_a, dtype=float).reshape(-1))
    b = np.sort(np.asarray(samples_b, dtype=float).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise EmptySample("both samples must be non-empty")
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass(frozen=True)
class AggregateStats:
    spec_id: str
    mu_ks: float
    sigma_ks: float
    mu_re: float
    sigma_re: float
    mu_depth: float
    sigma_depth: float
    n_runs: int
    mu_loss_instability: float = 0.0


def loss_instability(curve: Sequence[float], tail: float = 0.1) -> float:
    """Std of the last ``tail`` fraction of a loss curve (0 for empty curves)."""
    curve = np.asarray(curve, dtype=float)
    if curve.size == 0:
        return 0.0
    k = max(1, int(np.ceil(tail * curve.size)))
    return float(np.std(curve[-k:]))


def aggregate_runs(results) -> AggregateStats:
    """Population mean/std of KS, relative entropy and depth over runs."""
    results = list(results)
    if not results:
        raise EmptyInput("no runs to aggregate")
    ids = {r.spec_id for r in results}
    if len(ids) != 1:
        raise MixedSpecs(f"runs belong to several specs: {sorted(ids)}")
    ks = np.array([r.final_ks for r in results], dtype=float)
    re = np.array([r.final_re for r in results], dtype=float)
    depth = np.array([r.transpiled_depth for r in results], dtype=float)
    instability = [loss_instability(r.generator_loss_curve) for r in results]
    return AggregateStats(
        spec_id=ids.pop(),
        mu_ks=float(ks.mean()), sigma_ks=float(ks.std()),
        mu_re=float(re.mean()), sigma_re=float(re.std()),
        mu_depth=float(depth.mean()), sigma_depth=float(depth.std()),
        n_runs=len(results),
        mu_loss_instability=float(np.mean(instability)),
    )


@dataclass
class SelectionReport:
    ranking: List[Tuple[str, float]]
    winner: str
    weights: Tuple[float, ...]
    columns: Tuple[str, ...] = field(default=("mu_re", "mu_ks", "mu_depth", "mu_loss_instability"))

    @property
    def scores(self) -> dict:
        return dict(self.ranking)


def _zscores(values: np.ndarray) -> np.ndarray:
    if np.ptp(values) == 0:
        return np.zeros_like(values)
    return (values - values.mean()) / values.std()


def select_best(stats: Sequence[AggregateStats], weights=(1.0, 1.0, 1.0)) -> SelectionReport:
    """Rank specs by a weighted sum of column z-scores; lowest wins.

    Columns are ``(mu_re, mu_ks, mu_depth)`` plus an optional fourth weight
    on ``mu_loss_instability``. Ties go to the lower ``mu_depth``, then the
    lexicographically smaller spec id.
    """
    stats = list(stats)
    if not stats:
        raise EmptyInput("nothing to select from")
    weights = tuple(float(w) for w in weights)
    if len(weights) == 3:
        weights = weights + (0.0,)
    if len(weights) != 4:
        raise ValueError("weights must have 3 or 4 entries")
    table = np.array([[s.mu_re, s.mu_ks, s.mu_depth, s.mu_loss_instability] for s in stats], dtype=float)
    z = np.column_stack([_zscores(table[:, j]) for j in range(4)])
    composite = z @ np.array(weights)
    order = sorted(range(len(stats)), key=lambda i: (composite[i], stats[i].mu_depth, stats[i].spec_id))
    ranking = [(stats[i].spec_id, float(composite[i])) for i in order]
    return SelectionReport(ranking, ranking[0][0], weights)
