"""Front / trace CSV files, metrics reports, and front-vs-front comparison."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .continuation import front_filter_nondominated
from .core import FrontArchive, ParetoPoint, Trace, dominates
from .metrics import ReferencePoint, budget_report, default_reference, hypervolume_2d, max_gap
from .mpg import criticality_residual

FRONT_COLUMNS = (
    "index", "direction", "f1_train", "g2_scaled", "l1_unscaled",
    "f1_test", "acc_train", "acc_test", "grad_evals_cum",
)
TRACE_COLUMNS = ("iter", "F1", "F2", "norm_d", "lambda_star")


class SchemaError(ValueError):
    """A CSV file does not have the expected columns."""


def _cell(value) -> str:
    # repr round-trips floats exactly, which keeps reruns byte-identical
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def front_csv_text(archive: FrontArchive) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FRONT_COLUMNS)
    for p, label in zip(archive.points, archive.direction_labels):
        writer.writerow([_cell(v) for v in (
            p.index, label, p.f1_train, p.g2, p.l1_unscaled,
            p.f1_test, p.acc_train, p.acc_test, p.grad_evals_cum,
        )])
    return buf.getvalue()


def write_front_csv(archive: FrontArchive, path) -> None:
    Path(path).write_text(front_csv_text(archive))


def write_trace_csv(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows:
            writer.writerow([_cell(v) for v in row])


def _optional(text: str, kind):
    return None if text == "" else kind(text)


def read_front_csv(path) -> FrontArchive:
    """Read a front CSV back into an archive (parameter vectors are not stored, so ``theta`` is empty)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        if tuple(header) != FRONT_COLUMNS:
            missing = [c for c in FRONT_COLUMNS if c not in header]
            extra = [c for c in header if c not in FRONT_COLUMNS]
            detail = f"missing {missing}, unexpected {extra}" if missing or extra else "columns out of order"
            raise SchemaError(f"{path}: {detail}; expected {','.join(FRONT_COLUMNS)}")
        archive = FrontArchive()
        for line, row in enumerate(reader, start=2):
            if len(row) != len(FRONT_COLUMNS):
                raise SchemaError(f"{path}:{line}: expected {len(FRONT_COLUMNS)} fields, got {len(row)}")
            try:
                point = ParetoPoint(
                    theta=np.zeros(0),
                    index=int(row[0]),
                    f1_train=float(row[2]),
                    g2=float(row[3]),
                    l1_unscaled=_optional(row[4], float),
                    f1_test=_optional(row[5], float),
                    acc_train=_optional(row[6], float),
                    acc_test=_optional(row[7], float),
                    grad_evals_cum=_optional(row[8], int),
                )
                archive.append(point, row[1])
            except ValueError as exc:
                raise SchemaError(f"{path}:{line}: {exc}") from None
    return archive


def _gap_or_none(archive: FrontArchive) -> float | None:
    return max_gap(archive) if len(front_filter_nondominated(archive)) >= 2 else None


def metrics_report(archive: FrontArchive, trace: Trace | None = None, problem=None) -> dict:
    """Summary of one front: sizes, hypervolume, max_gap, budget and (optionally) criticality."""
    report: dict = {"n_points": len(archive)}
    if len(archive):
        nd = front_filter_nondominated(archive)
        obj = nd.objectives()
        ref = default_reference(archive)
        report.update({
            "n_nondominated": len(nd),
            "reference": {"f1_ref": ref.f1_ref, "g2_ref": ref.g2_ref},
            "hypervolume": hypervolume_2d(archive, ref),
            "max_gap": _gap_or_none(archive),
            "max_gap_box": {
                "f1": [float(obj[:, 0].min()), float(obj[:, 0].max())],
                "g2": [float(obj[:, 1].min()), float(obj[:, 1].max())],
            },
        })
        if problem is not None:
            report["max_criticality_residual"] = max(criticality_residual(problem, p.theta) for p in archive)
    if trace is not None:
        report["budget"] = budget_report(trace)
    return report


def _dominated_count(front: FrontArchive, other: FrontArchive) -> int:
    return sum(any(dominates(q, p) for q in other) for p in front)


def compare_fronts(a: FrontArchive, b: FrontArchive, ref: ReferencePoint | None = None) -> dict:
    """Hypervolume (shared reference), max_gap and cross-dominance of two fronts.

    Dominance counts are taken between the non-dominated subsets, so a front
    compared with itself has no cross-dominations.
    """
    if not len(a) or not len(b):
        raise ValueError("both fronts must contain at least one point")
    ref = default_reference(a, b) if ref is None else ref
    nd_a, nd_b = front_filter_nondominated(a), front_filter_nondominated(b)
    out = {"reference": {"f1_ref": ref.f1_ref, "g2_ref": ref.g2_ref}}
    for name, front, nd, other in (("a", a, nd_a, nd_b), ("b", b, nd_b, nd_a)):
        dominated = _dominated_count(nd, other)
        out[name] = {
            "n_points": len(front),
            "n_nondominated": len(nd),
            "hypervolume": hypervolume_2d(front, ref),
            "max_gap": _gap_or_none(front),
            "dominated_by_other": dominated,
            "nondominated_vs_other": len(nd) - dominated,
        }
    out["cross_dominations"] = out["a"]["dominated_by_other"] + out["b"]["dominated_by_other"]
    return out


def json_safe(value):
    """Replace non-finite floats (not valid JSON) with None, recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value
