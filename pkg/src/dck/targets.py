"""Desired-state fields used by the example problems.

A target exposes pointwise evaluation on coordinate arrays. Targets that
jump across a grid-aligned line additionally publish the line so the
quadrature code can subdivide straddling cells and keep the load vector
exact.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConstantTarget:
    value: float = 1.0
    split = None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], self.value)

    def to_config(self):
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class RadiusSquaredTarget:
    """y(x) = |x|^2."""

    split = None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.sum(points ** 2, axis=1)

    def to_config(self):
        return {"type": "radius_squared"}


@dataclass(frozen=True)
class SplitTarget:
    """Piecewise constant across the hyperplane x[axis] = threshold."""

    axis: int = 0
    threshold: float = 0.25
    below: float = -1.0
    above: float = 1.0

    @property
    def split(self):
        return (self.axis, self.threshold)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.where(points[:, self.axis] > self.threshold,
                        self.above, self.below)

    def to_config(self):
        return {"type": "split", "axis": self.axis,
                "threshold": self.threshold,
                "below": self.below, "above": self.above}


def target_from_config(cfg) -> object:
    """Build a target from its flat JSON description."""
    if isinstance(cfg, (int, float)):
        return ConstantTarget(float(cfg))
    kind = cfg.get("type")
    if kind == "constant":
        return ConstantTarget(float(cfg.get("value", 1.0)))
    if kind == "radius_squared":
        return RadiusSquaredTarget()
    if kind == "split":
        return SplitTarget(axis=int(cfg.get("axis", 0)),
                           threshold=float(cfg.get("threshold", 0.25)),
                           below=float(cfg.get("below", -1.0)),
                           above=float(cfg.get("above", 1.0)))
    raise ValueError(f"unknown target type {kind!r}")
