"""Closed-form proximal operators of weighted l1 norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProxSpec:
    """Prox of ``weight * ||.||_1`` with step ``step``; the threshold is their product."""

    weight: float
    step: float

    def __post_init__(self):
        if not (self.weight >= 0 and self.step >= 0):
            raise ValueError(f"prox weight and step must be >= 0, got weight={self.weight}, step={self.step}")
        if not np.isfinite(self.weight * self.step):
            raise ValueError("prox threshold weight*step must be finite")

    @property
    def threshold(self) -> float:
        return self.weight * self.step


def soft_threshold(v: np.ndarray, c: float) -> np.ndarray:
    """Coordinatewise ``sign(v) * max(|v| - c, 0)``.

    This is the exact minimizer of ``c*||u||_1 + 0.5*||u - v||^2``. Entries with
    ``|v_i| == c`` map to 0.
    """
    if not c >= 0:
        raise ValueError(f"soft threshold must be >= 0, got {c}")
    v = np.asarray(v, dtype=np.float64)
    if c == 0:
        return v.copy()
    return np.sign(v) * np.maximum(np.abs(v) - c, 0.0)


def prox_scaled_l1(theta: np.ndarray, spec: ProxSpec) -> np.ndarray:
    return soft_threshold(theta, spec.threshold)
