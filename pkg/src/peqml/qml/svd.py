"""Truncated-SVD feature reduction onto [0, 1)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

# largest float64 below 1, so rescaled features stay inside [0, 1)
_TOP = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class SvdReducer:
    components: np.ndarray  # (k, pixels), rows are right singular vectors
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, raw: np.ndarray, k: int) -> "SvdReducer":
        raw = np.asarray(raw, dtype=float)
        if raw.ndim != 2:
            raise ValueError("raw data must be a (samples, pixels) matrix")
        if k < 1 or k > min(raw.shape):
            raise ValueError(f"k = {k} outside [1, {min(raw.shape)}]")
        _, s, vt = np.linalg.svd(raw, full_matrices=False)
        rank = int(np.sum(s > s[0] * max(raw.shape) * np.finfo(float).eps)) if s.size and s[0] > 0 else 0
        components = vt[:k].copy()
        if k > rank:
            warnings.warn(f"k = {k} exceeds the data rank {rank}; extra components are zero", stacklevel=2)
            components[rank:] = 0.0
        proj = raw @ components.T
        return cls(components, proj.min(axis=0), proj.max(axis=0))

    def project(self, raw: np.ndarray) -> np.ndarray:
        return np.asarray(raw, dtype=float) @ self.components.T

    def transform(self, raw: np.ndarray) -> np.ndarray:
        """Scale with training extrema; values outside the training range are clipped."""
        proj = self.project(raw)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        scaled = np.where(span > 0, (proj - self.lo) / safe, 0.0)
        return np.clip(scaled, 0.0, _TOP)


def truncated_svd_reduce(train_raw: np.ndarray, k: int, test_raw: np.ndarray | None = None):
    """Reduce training rows (and optionally test rows) to ``k`` features in [0, 1)."""
    reducer = SvdReducer.fit(train_raw, k)
    train = reducer.transform(train_raw)
    if test_raw is None:
        return train
    return train, reducer.transform(test_raw)
