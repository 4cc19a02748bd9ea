"""Front-quality measures: hypervolume, largest normalized gap, budget counters."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .continuation import front_filter_nondominated
from .core import FrontArchive, Trace


@dataclass(frozen=True)
class ReferencePoint:
    f1_ref: float
    g2_ref: float


def default_reference(*fronts: FrontArchive, factor: float = 1.1) -> ReferencePoint:
    """``factor`` times the componentwise maximum over all given fronts."""
    obj = np.vstack([f.objectives() for f in fronts if len(f)])
    top = obj.max(axis=0)
    # a zero maximum would put the reference on the front itself
    ref = np.where(top > 0, factor * top, top + (factor - 1.0))
    # tiny (subnormal) maxima do not grow under multiplication
    ref = np.maximum(ref, np.nextafter(top, np.inf))
    return ReferencePoint(float(ref[0]), float(ref[1]))


def hypervolume_2d(front: FrontArchive, ref: ReferencePoint) -> float:
    """Area dominated by ``front`` inside the box bounded by ``ref`` (minimization)."""
    if len(front) == 0:
        return 0.0
    for p in front:
        if not (p.f1_train < ref.f1_ref and p.g2 < ref.g2_ref):
            raise ValueError(
                f"reference ({ref.f1_ref}, {ref.g2_ref}) does not dominate point "
                f"index={p.index} (f1={p.f1_train}, g2={p.g2})"
            )
    obj = front_filter_nondominated(front).objectives()
    obj = obj[np.argsort(obj[:, 1], kind="stable")]
    # sorted by increasing g2, non-dominated points have decreasing f1
    g2_next = np.append(obj[1:, 1], ref.g2_ref)
    return float(np.sum((g2_next - obj[:, 1]) * (ref.f1_ref - obj[:, 0])))


def max_gap(front: FrontArchive) -> float:
    """Largest distance between g2-consecutive non-dominated points, both axes scaled to [0, 1]."""
    obj = front_filter_nondominated(front).objectives()
    if obj.shape[0] < 2:
        raise ValueError("max_gap needs at least 2 non-dominated points")
    lo = obj.min(axis=0)
    span = obj.max(axis=0) - lo
    span[span == 0] = 1.0
    z = (obj - lo) / span
    z = z[np.lexsort((z[:, 0], z[:, 1]))]
    return float(np.max(np.linalg.norm(np.diff(z, axis=0), axis=1)))


def budget_report(trace: Trace) -> dict[str, int]:
    return {
        "gradient_evals": trace.gradient_evals,
        "prox_evals": trace.prox_evals,
        "samples_touched": trace.samples_touched,
    }
