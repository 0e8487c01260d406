"""Handwritten-digit CSV ingestion: ``label,p0,...,p783`` rows with 0-255 pixels."""

from __future__ import annotations

import csv
import gzip
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .qml.dataset import Dataset
from .qml.svd import SvdReducer
from .rng import task_rng

BUNDLED_DIGITS = "digits28.csv.gz"


class DigitsFormatError(ValueError):
    pass


def bundled_digits_path() -> Path:
    return Path(str(resources.files("peqml") / "data" / BUNDLED_DIGITS))


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), newline="")
    return open(path, newline="")


def read_digits_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse every row; errors name the offending line."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"digits file not found: {path}")
    labels, rows = [], []
    width = None
    with _open_text(path) as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                values = [int(v) for v in row]
            except ValueError:
                raise DigitsFormatError(f"{path}:{lineno}: non-integer field") from None
            if len(values) < 2:
                raise DigitsFormatError(f"{path}:{lineno}: expected a label and pixel values")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DigitsFormatError(f"{path}:{lineno}: {len(values)} fields, expected {width}")
            label, pixels = values[0], values[1:]
            if not 0 <= label <= 9:
                raise DigitsFormatError(f"{path}:{lineno}: label {label} outside 0-9")
            if min(pixels) < 0 or max(pixels) > 255:
                raise DigitsFormatError(f"{path}:{lineno}: pixel value outside 0-255")
            labels.append(label)
            rows.append(pixels)
    if not rows:
        raise DigitsFormatError(f"{path}: no data rows")
    return np.array(labels, dtype=np.int64), np.array(rows, dtype=float)


@dataclass(frozen=True)
class DigitSplit:
    train_raw: np.ndarray
    train_labels: np.ndarray
    test_raw: np.ndarray
    test_labels: np.ndarray

    def reduce(self, k: int) -> tuple[Dataset, Dataset]:
        """Truncated-SVD features fitted on the training rows."""
        reducer = SvdReducer.fit(self.train_raw, k)
        return (
            Dataset(reducer.transform(self.train_raw), self.train_labels),
            Dataset(reducer.transform(self.test_raw), self.test_labels),
        )


def ingest_digits(
    path=None,
    per_class_train: int = 10,
    per_class_test: int = 10,
    seed: int = 0,
    classes=range(10),
) -> DigitSplit:
    """Seeded per-class subsample: shuffle each class, take train rows then test rows."""
    if per_class_train < 1 or per_class_test < 1:
        raise ValueError("per-class counts must be >= 1")
    labels, raw = read_digits_csv(bundled_digits_path() if path is None else path)
    classes = sorted(set(int(c) for c in classes))
    need = per_class_train + per_class_test
    short = [c for c in classes if np.sum(labels == c) < need]
    if short:
        counts = {c: int(np.sum(labels == c)) for c in short}
        raise DigitsFormatError(f"classes with fewer than {need} rows: {counts}")
    train_idx, test_idx = [], []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[task_rng(seed, "digits", c).permutation(len(idx))]
        train_idx.append(idx[:per_class_train])
        test_idx.append(idx[per_class_train:need])
    tr = np.concatenate(train_idx)
    te = np.concatenate(test_idx)
    return DigitSplit(raw[tr], labels[tr], raw[te], labels[te])
