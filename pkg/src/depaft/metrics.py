"""Evaluation metrics: Harrell concordance, MAE against oracle truth,
event-restricted MAE, and calibration-curve extraction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SurvivalDataset
from .errors import DataError

_BLOCK = 256  # block size for the pairwise concordance scan


def _as_vec(name, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError(f"{name} must be one-dimensional")
    return x


def concordance(times, events, predicted_times) -> float:
    """Harrell's concordance index over usable pairs.

    An ordered pair (i, j) is usable when t_i < t_j and row i is an
    event, or when t_i == t_j with row i an event and row j censored
    (the event treated as the earlier).  It is concordant when the
    earlier row also has the smaller predicted time; prediction ties
    earn half credit.  Returns 0.5 when no pair is usable.
    """
    t = _as_vec("times", times)
    d = np.asarray(events)
    p = _as_vec("predicted_times", predicted_times)
    if t.shape != p.shape or t.shape != d.shape:
        raise DataError("times, events, and predictions must have equal length")
    if np.any(t <= 0):
        raise DataError("times must be positive")
    d = d.astype(bool)
    n = t.shape[0]
    # credit counted in half-units so the tally stays integer-exact
    credit2 = 0
    usable = 0
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        ti = t[lo:hi, None]
        di = d[lo:hi, None]
        pi = p[lo:hi, None]
        ok = (ti < t[None, :]) & di
        ok |= (ti == t[None, :]) & di & ~d[None, :]
        conc = ok & (pi < p[None, :])
        tied = ok & (pi == p[None, :])
        usable += int(np.sum(ok))
        credit2 += 2 * int(np.sum(conc)) + int(np.sum(tied))
    if usable == 0:
        return 0.5
    return credit2 / (2.0 * usable)


def mae(true_times, predicted_times) -> float:
    """Mean absolute error on the raw time scale."""
    a = _as_vec("true_times", true_times)
    b = _as_vec("predicted_times", predicted_times)
    if a.shape != b.shape:
        raise DataError("length mismatch between truth and predictions")
    return float(np.mean(np.abs(a - b)))


def event_mae(observed_times, events, predicted_times) -> float:
    """MAE restricted to uncensored rows."""
    t = _as_vec("observed_times", observed_times)
    d = np.asarray(events).astype(bool)
    p = _as_vec("predicted_times", predicted_times)
    if t.shape != p.shape or t.shape != d.shape:
        raise DataError("times, events, and predictions must have equal length")
    if not np.any(d):
        raise DataError("event MAE undefined: no uncensored rows")
    return float(np.mean(np.abs(t[d] - p[d])))


@dataclass(frozen=True)
class CalibrationCurve:
    """Cumulative predicted vs observed event proportions at a ladder of
    time horizons (empirical quantiles of the reference times)."""

    horizons: np.ndarray
    predicted_proportion: np.ndarray
    observed_proportion: np.ndarray
    degenerate: bool = False

    def mean_abs_deviation(self) -> float:
        """Mean |predicted - observed| across horizons (diagonal distance)."""
        return float(np.mean(np.abs(self.predicted_proportion - self.observed_proportion)))

    def to_dict(self) -> dict:
        return {
            "horizons": [float(x) for x in self.horizons],
            "predicted_proportion": [float(x) for x in self.predicted_proportion],
            "observed_proportion": [float(x) for x in self.observed_proportion],
            "degenerate": self.degenerate,
        }


def calibration(reference_times, predicted_times, n_horizons: int = 9) -> CalibrationCurve:
    """Calibration curve at quantile horizons i/(n_horizons+1), i=1..n.

    reference_times should be the true event times when available
    (simulated data); with observed times the curve is only a proxy.
    All-equal reference times degenerate to a single-horizon curve.
    """
    ref = _as_vec("reference_times", reference_times)
    pred = _as_vec("predicted_times", predicted_times)
    if ref.shape != pred.shape:
        raise DataError("length mismatch between reference and predictions")
    if n_horizons < 2:
        raise DataError("n_horizons must be >= 2")
    if np.all(ref == ref[0]):
        horizons = np.array([ref[0]])
        degenerate = True
    else:
        levels = np.arange(1, n_horizons + 1) / (n_horizons + 1.0)
        horizons = np.quantile(ref, levels)
        degenerate = False
    observed = np.array([np.mean(ref <= h) for h in horizons])
    predicted = np.array([np.mean(pred <= h) for h in horizons])
    return CalibrationCurve(horizons, predicted, observed, degenerate)


@dataclass(frozen=True)
class MetricsReport:
    c_index: float
    event_mae: float
    calibration: CalibrationCurve
    n_rows: int
    n_events: int
    mae: float | None = None
    calibration_reference: str = "true_event_time"

    def to_dict(self) -> dict:
        out = {
            "c_index": self.c_index,
            "event_mae": self.event_mae,
            "n_rows": self.n_rows,
            "n_events": self.n_events,
            "calibration_reference": self.calibration_reference,
            "calibration": self.calibration.to_dict(),
        }
        if self.mae is not None:
            out["mae"] = self.mae
        else:
            out["warning"] = (
                "no oracle event times: MAE omitted and calibration uses observed times"
            )
        return out


def evaluate_predictions(
    data: SurvivalDataset, predicted_times, n_horizons: int = 9
) -> MetricsReport:
    """Assemble the full metrics report for one prediction vector."""
    pred = _as_vec("predicted_times", predicted_times)
    if pred.shape[0] != data.n:
        raise DataError("prediction rows do not match dataset rows")
    c = concordance(data.times, data.events, pred)
    e_mae = event_mae(data.times, data.events, pred)
    if data.has_oracle:
        full_mae = mae(data.true_event_times, pred)
        curve = calibration(data.true_event_times, pred, n_horizons)
        ref = "true_event_time"
    else:
        full_mae = None
        curve = calibration(data.times, pred, n_horizons)
        ref = "observed_time"
    return MetricsReport(
        c_index=c,
        event_mae=e_mae,
        calibration=curve,
        n_rows=data.n,
        n_events=int(np.sum(data.events)),
        mae=full_mae,
        calibration_reference=ref,
    )
