"""Feature datasets and the synthetic parity-labelled QNN task."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..circuit import build_feature_map, build_qnn_ansatz, evaluate_state, evaluate_unitary
from ..noise import parity_signs
from ..rng import task_rng

QNN_FEATURE_DEPTH = 2


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2:
            raise ValueError("features must be a (samples, dims) array")
        if len(x) != len(y):
            raise ValueError(f"{len(x)} feature rows but {len(y)} labels")
        if x.size and (x.min() < 0 or x.max() >= 1):
            raise ValueError("features must lie in [0, 1)")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx])


def feature_states(xs: np.ndarray, depth: int = QNN_FEATURE_DEPTH) -> np.ndarray:
    """Rows are the noiseless feature-map states |phi(x)>."""
    return np.array([evaluate_state(build_feature_map(x, depth)) for x in xs])


def parities(states: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Noiseless <P> after the ansatz for each feature state."""
    n = int(np.log2(states.shape[1]))
    u = evaluate_unitary(build_qnn_ansatz(n, theta))
    amps = states @ u.T
    return (np.abs(amps) ** 2) @ parity_signs(n)


def _fit_separating_theta(states: np.ndarray, rng: np.random.Generator, restarts: int) -> np.ndarray:
    n = int(np.log2(states.shape[1]))

    def objective(theta):
        return -np.mean(np.abs(parities(states, theta)))

    best = None
    for _ in range(restarts):
        theta0 = rng.uniform(-np.pi, np.pi, 2 * n)
        res = minimize(objective, theta0, method="L-BFGS-B")
        if best is None or res.fun < best.fun:
            best = res
    return best.x


def _select(xs: np.ndarray, m: np.ndarray, per_class: int) -> Dataset:
    labels = np.where(m > 0, 0, 1)
    chosen = []
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        if len(idx) == 0:
            raise RuntimeError(f"no sample received label {cls}; the classes are not separated")
        idx = idx[np.argsort(-np.abs(m[idx]), kind="stable")][:per_class]
        chosen.append(idx)
    idx = np.concatenate(chosen)
    return Dataset(xs[idx], labels[idx])


def generate_synthetic_dataset(
    n: int, seed: int, pool: int = 600, per_class: int = 50, restarts: int = 4
) -> tuple[Dataset, np.ndarray]:
    """Sample ``pool`` points, fit theta_s to maximise mean |m|, keep the clearest.

    Label 0 means m(x, theta_s) > 0. Returns the selected samples (up to
    ``per_class`` per class) and theta_s.
    """
    if n < 2:
        raise ValueError("the synthetic task needs n >= 2")
    rng = task_rng(seed, "synthetic", n)
    xs = rng.random((pool, n))
    states = feature_states(xs)
    theta_s = _fit_separating_theta(states, rng, restarts)
    return _select(xs, parities(states, theta_s), per_class), theta_s


def generate_train_test(
    n: int, seed: int, pool: int = 1200, per_class: int = 50, restarts: int = 4
) -> tuple[Dataset, Dataset, np.ndarray]:
    """Disjoint train and test sets labelled by one theta_s.

    theta_s is fitted on the first half of the pool; the training set is
    selected from that half and the test set from the second half.
    """
    if n < 2:
        raise ValueError("the synthetic task needs n >= 2")
    if pool < 2:
        raise ValueError("pool must hold at least two samples")
    rng = task_rng(seed, "synthetic-split", n)
    xs = rng.random((pool, n))
    half = pool // 2
    states = feature_states(xs)
    theta_s = _fit_separating_theta(states[:half], rng, restarts)
    m = parities(states, theta_s)
    train = _select(xs[:half], m[:half], per_class)
    test = _select(xs[half:], m[half:], per_class)
    return train, test, theta_s
