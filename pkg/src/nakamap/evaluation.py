"""Accuracy reports: map-vs-truth error statistics.

MAD is the mean absolute deviation |est - truth| over all voxels, RMSE the
root mean square; with a label map the same numbers come out per region,
and a two-region map additionally yields a contrast-to-noise style figure
(mean difference over pooled standard deviation of the estimate).
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class RegionStat:
    label: int
    n: int
    mad: float
    mean_est: float
    mean_truth: float


@dataclass(frozen=True)
class EvalReport:
    """Error summary; ``to_json`` renders it with stable keys and 6
    significant digits so identical runs serialize identically."""

    mad: float
    rmse: float
    contrast: float  # None unless exactly two regions
    per_region: tuple
    defect_count: int
    runtime_ms: float

    def to_json(self):
        obj = {
            "mad": _sig6(self.mad),
            "rmse": _sig6(self.rmse),
            "contrast": None if self.contrast is None else _sig6(self.contrast),
            "per_region": [
                {
                    "label": r.label,
                    "n": r.n,
                    "mad": _sig6(r.mad),
                    "mean_est": _sig6(r.mean_est),
                    "mean_truth": _sig6(r.mean_truth),
                }
                for r in self.per_region
            ],
            "defect_count": self.defect_count,
            "runtime_ms": _sig6(self.runtime_ms),
        }
        return json.dumps(obj, indent=2)


def _sig6(v):
    return float(f"{float(v):.6g}")


def evaluate(est, truth, labels=None, defect_count=0, runtime_ms=0.0):
    """Compare an estimated map against its truth map.

    est, truth, labels: Image2D of one common shape (DimensionMismatch
    otherwise).  defect_count and runtime_ms are carried through into the
    report for the caller.
    """
    if est.shape != truth.shape:
        raise DimensionMismatch(f"est {est.shape} vs truth {truth.shape}")
    if labels is not None and labels.shape != est.shape:
        raise DimensionMismatch(f"labels {labels.shape} vs maps {est.shape}")
    e = est.data
    t = truth.data
    diff = e - t
    mad = float(np.mean(np.abs(diff)))
    rmse = float(math.sqrt(np.mean(diff * diff)))
    per_region = ()
    contrast = None
    if labels is not None:
        labs = labels.data
        uniq = np.unique(labs)
        stats = []
        for lab in uniq:
            mask = labs == lab
            stats.append(
                RegionStat(
                    label=int(lab),
                    n=int(np.count_nonzero(mask)),
                    mad=float(np.mean(np.abs(diff[mask]))),
                    mean_est=float(np.mean(e[mask])),
                    mean_truth=float(np.mean(t[mask])),
                )
            )
        per_region = tuple(stats)
        if uniq.size == 2:
            lo = e[labs == uniq[0]]
            hi = e[labs == uniq[1]]
            if lo.size >= 2 and hi.size >= 2:
                pooled = ((lo.size - 1) * np.var(lo, ddof=1)
                          + (hi.size - 1) * np.var(hi, ddof=1)) / (lo.size + hi.size - 2)
                if pooled > 0.0:
                    contrast = float((np.mean(hi) - np.mean(lo)) / math.sqrt(pooled))
    return EvalReport(
        mad=mad,
        rmse=rmse,
        contrast=contrast,
        per_region=per_region,
        defect_count=int(defect_count),
        runtime_ms=float(runtime_ms),
    )
