"""Empirical correlation functions from replica samples.

Estimators are factorial-moment based: for disjoint bins A, B the order-2
estimate is E[s(A) s(B)] / (|A||B|) and on the diagonal it is the factorial
moment E[s(A)(s(A)-1)] / |A|^2, so a process that never puts two points in
one bin has exactly zero diagonal estimate. Standard errors come from
replica-level jackknife, since bins within one replica are correlated and
the replica is the honest resampling unit.

Only orders one and two are provided; every downstream check in this
package uses at most pair correlations, and claims about higher orders
are deliberately out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config_space import Configuration


@dataclass(frozen=True)
class BinnedEstimate:
    """Binned correlation estimate with jackknife standard errors.

    ``estimate`` has shape (B,) for order 1 and (B, B) for order 2, in units
    of points per unit length to the order-th power.
    """

    edges: np.ndarray
    estimate: np.ndarray
    stderr: np.ndarray
    replicas: int
    order: int

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def widths(self) -> np.ndarray:
        return np.diff(self.edges)


def _bin_counts(samples, edges: np.ndarray) -> np.ndarray:
    counts = np.empty((len(samples), len(edges) - 1))
    for i, cfg in enumerate(samples):
        xs = cfg.reals() if isinstance(cfg, Configuration) else np.asarray(cfg, dtype=float)
        counts[i] = np.histogram(xs, bins=edges)[0]
    return counts


def _jackknife(per_replica: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and leave-one-out jackknife stderr along axis 0."""
    r = per_replica.shape[0]
    mean = per_replica.mean(axis=0)
    if r < 2:
        return mean, np.zeros_like(mean)
    loo = (mean * r - per_replica) / (r - 1)
    var = (r - 1) / r * np.sum((loo - mean) ** 2, axis=0)
    return mean, np.sqrt(var)


def estimate_correlation(samples, order: int, edges) -> BinnedEstimate:
    """Order-1 or order-2 binned correlation estimate from replicas.

    Parameters
    ----------
    samples : sequence of Configuration (or arrays of reals)
        At least two replicas.
    order : {1, 2}
    edges : array-like
        Strictly increasing bin edges covering the analysis window.
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 replicas")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing with >= 2 entries")
    counts = _bin_counts(samples, edges)
    widths = np.diff(edges)
    if order == 1:
        per_rep = counts / widths
    else:
        per_rep = counts[:, :, None] * counts[:, None, :]
        b = len(widths)
        diag = np.arange(b)
        per_rep[:, diag, diag] = counts * (counts - 1.0)
        per_rep = per_rep / (widths[:, None] * widths[None, :])
    mean, err = _jackknife(per_rep)
    return BinnedEstimate(edges=edges, estimate=mean, stderr=err,
                          replicas=len(samples), order=order)


@dataclass(frozen=True)
class DeviationReport:
    """Per-bin z-scores of an estimate against a prediction."""

    z: np.ndarray
    max_abs_z: float
    frac_within_3: float
    prediction: np.ndarray = field(repr=False)

    def to_rows(self, est: BinnedEstimate) -> list[dict]:
        rows = []
        centers = est.centers()
        for i in range(len(centers)):
            rows.append({
                "bin_lo": float(est.edges[i]),
                "bin_hi": float(est.edges[i + 1]),
                "estimate": float(est.estimate[i]),
                "stderr": float(est.stderr[i]),
                "prediction": float(self.prediction[i]),
                "z": float(self.z[i]),
            })
        return rows


def compare_to_prediction(est: BinnedEstimate, predicted) -> DeviationReport:
    """z-scores of a binned estimate against a pointwise prediction.

    ``predicted`` is a function of the bin center (order 1) or of a center
    pair (order 2). Bins whose jackknife error degenerates to zero (counts
    identical in every replica, typically all zero in tail bins) score 0 on
    an exact match and otherwise fall back to the prediction's own Poisson
    null scale sqrt(pred / (cell volume * replicas)): an empty bin is then
    judged by how many points the prediction says it should have produced.
    """
    centers = est.centers()
    widths = est.widths()
    if est.order == 1:
        pred = np.array([predicted(c) for c in centers])
        vol = widths
    else:
        pred = np.array([[predicted(a, b) for b in centers] for a in centers])
        vol = widths[:, None] * widths[None, :]
    if not np.all(np.isfinite(pred)):
        raise ValueError("prediction must be finite on all bin centers")
    diff = est.estimate - pred
    with np.errstate(divide="ignore", invalid="ignore"):
        z = diff / est.stderr
        null_scale = np.sqrt(np.maximum(pred, 0.0) / (vol * est.replicas))
        z_null = diff / null_scale
    degenerate = (est.stderr == 0.0) & (diff != 0.0)
    z = np.where(degenerate, np.where(null_scale > 0, z_null, np.inf), z)
    z = np.where(diff == 0.0, 0.0, z)
    finite_abs = np.abs(z)
    return DeviationReport(
        z=z,
        max_abs_z=float(np.max(finite_abs)),
        frac_within_3=float(np.mean(finite_abs <= 3.0)),
        prediction=pred,
    )
