"""QNN and quantum-kernel experiment grids.

Each grid expands to independent tasks, one per (run, n, variant). A task
derives every random stream from the master seed and its own key, so the
results do not depend on how tasks are spread over worker processes.
Variants of one (run, n) share the dataset, the initial parameters and
the quasi-static detunings, which makes variant comparisons paired.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .backend import Backend, parse_variant
from .circuit import build_feature_map
from .device import DeviceModel
from .digits import ingest_digits
from .noise import NoiseConfig, draw_detunings
from .parallel import pmap
from .qml.dataset import Dataset, generate_train_test
from .qml.kernel import KernelEstimator, inverse_feature_segment, nmse, sample_kernel
from .qml.qnn import QnnEvaluator
from .qml.spsa import SpsaConfig, cross_entropy, spsa_minimize
from .qml.svm import svm_fit, svm_predict
from .rng import derive_seed, task_rng


def _check_variants(variants) -> tuple[str, ...]:
    for v in variants:
        parse_variant(v)
    return tuple(variants)


QNN_SPSA_DEFAULTS = {"iterations": 300, "target_step": 0.2}


@dataclass(frozen=True)
class QnnExperimentConfig:
    qubits: tuple[int, ...] = (2, 3, 4, 5)
    runs: int = 3
    variants: tuple[str, ...] = ("noiseless", "pe", "cnot")
    seed: int = 0
    shots: int | None = 1024
    pool: int = 1200
    per_class: int = 50
    restarts: int = 4
    depth: int = 2
    spsa: SpsaConfig = field(default_factory=lambda: SpsaConfig(**QNN_SPSA_DEFAULTS))

    def __post_init__(self):
        _check_variants(self.variants)
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if any(n < 2 or n > 10 for n in self.qubits):
            raise ValueError("QNN qubit counts must lie in [2, 10]")


@dataclass(frozen=True)
class KernelExperimentConfig:
    qubits: tuple[int, ...] = (3, 4, 5, 6, 7, 8, 9)
    runs: int = 1
    variants: tuple[str, ...] = ("noiseless", "pe+dd", "cnot")
    seed: int = 0
    shots: int | None = 8192
    depth: int = 4
    per_class_train: int = 10
    per_class_test: int = 10
    classes: tuple[int, ...] = tuple(range(10))
    feature_scale: float = 0.2
    svm_c: float = 1.0
    data_path: str | None = None

    def __post_init__(self):
        _check_variants(self.variants)
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if any(n < 1 or n > 10 for n in self.qubits):
            raise ValueError("kernel qubit counts must lie in [1, 10]")
        if not 0 < self.feature_scale <= 1:
            raise ValueError("feature_scale must lie in (0, 1]")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")


# the ablation models a device whose idle error is dominated by slow
# frequency noise, the regime where decoupling pays off
DD_ABLATION_DEVICE = {"sigma_idle": 1e-3}

DD_ABLATION_DEFAULTS = {
    "qubits": (7,),
    "runs": 3,
    "variants": ("pe+dd", "pe", "cnot"),
    "classes": (0, 7, 9),
}


def dd_ablation_config(**overrides) -> KernelExperimentConfig:
    """Three-class kernel run comparing PE with and without DD against CNOT."""
    return KernelExperimentConfig(**{**DD_ABLATION_DEFAULTS, **overrides})


def _backend(variant: str, device: DeviceModel, noise: NoiseConfig) -> Backend:
    return Backend.from_variant(variant, device, noise)


# -- QNN -----------------------------------------------------------------------


def _accuracy(p0: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(np.where(p0 > 0.5, 0, 1) == labels))


def run_qnn_task(task) -> dict:
    cfg, device, noise, run, n, variant = task
    dev = device.with_qubits(n)
    train, test, theta_s = generate_train_test(
        n, derive_seed(cfg.seed, "qnn-data", run), cfg.pool, cfg.per_class, cfg.restarts
    )
    backend = _backend(variant, dev, noise)
    detunings = draw_detunings(dev, task_rng(cfg.seed, "detuning", run, n))
    shots = cfg.shots if backend.noisy else None
    ev_train = QnnEvaluator(backend, train.features, cfg.depth, shots, detunings)
    ev_test = QnnEvaluator(backend, test.features, cfg.depth, shots, detunings)
    rng = task_rng(cfg.seed, "qnn-shots", run, n, variant)

    def loss(theta):
        return cross_entropy(ev_train.p0(theta, rng), train.labels)

    theta0 = task_rng(cfg.seed, "qnn-init", run, n).uniform(-np.pi, np.pi, 2 * n)
    spsa = SpsaConfig(**{**asdict(cfg.spsa), "seed": derive_seed(cfg.seed, "spsa", run, n)})
    res = spsa_minimize(loss, theta0, spsa)
    p_train = ev_train.p0(res.theta, rng)
    p_test = ev_test.p0(res.theta, rng)
    if backend.mode == "logical":
        duration = float("nan")
    else:
        duration = float(np.mean([s.total_duration for s in ev_train.schedules(res.theta)]))
    return {
        "run": run,
        "n": n,
        "variant": variant,
        "final_loss": float(res.loss_trace[-1]) if res.loss_trace else loss(res.theta),
        "train_accuracy": _accuracy(p_train, train.labels),
        "test_accuracy": _accuracy(p_test, test.labels),
        "mean_duration_ns": duration,
        "spsa_a": float(res.a),
        "evaluations": res.evaluations,
        "loss_trace": [float(v) for v in res.loss_trace],
        "theta": [float(v) for v in res.theta],
        "theta_s": [float(v) for v in theta_s],
    }


def qnn_tasks(cfg: QnnExperimentConfig, device: DeviceModel, noise: NoiseConfig) -> list:
    return [
        (cfg, device, noise, run, n, variant)
        for run in range(cfg.runs)
        for n in cfg.qubits
        for variant in cfg.variants
    ]


def run_qnn_experiment(cfg: QnnExperimentConfig, device: DeviceModel, noise: NoiseConfig,
                       workers: int = 1) -> list[dict]:
    return pmap(run_qnn_task, qnn_tasks(cfg, device, noise), workers)


# -- kernels ---------------------------------------------------------------------


def kernel_data(cfg: KernelExperimentConfig, run: int, n: int) -> tuple[Dataset, Dataset]:
    split = ingest_digits(
        cfg.data_path, cfg.per_class_train, cfg.per_class_test,
        derive_seed(cfg.seed, "digits", run), cfg.classes,
    )
    train, test = split.reduce(n)
    s = cfg.feature_scale
    return Dataset(train.features * s, train.labels), Dataset(test.features * s, test.labels)


def _mean_pair_duration(est: KernelEstimator, xs: np.ndarray) -> float:
    """Mean schedule length over the circuits of the training Gram matrix."""
    fwd = np.array([est.backend.schedule(build_feature_map(x, est.depth), fresh=True).total_duration
                    for x in xs])
    inv = np.array([est.backend.schedule(inverse_feature_segment(x, est.depth), fresh=False).total_duration
                    for x in xs])
    i, j = np.triu_indices(len(xs))
    return float(np.mean(inv[i] + fwd[j]))


def run_kernel_task(task) -> dict:
    cfg, device, noise, run, n, variant = task
    dev = device.with_qubits(n)
    train, test = kernel_data(cfg, run, n)
    backend = _backend(variant, dev, noise)
    detunings = draw_detunings(dev, task_rng(cfg.seed, "detuning", run, n))
    est = KernelEstimator(backend, cfg.depth, detunings)
    k_train = est.exact(train.features)
    k_test = est.exact(test.features, train.features)
    if cfg.shots is not None:
        rng = task_rng(cfg.seed, "kernel-shots", run, n, variant)
        k_train = sample_kernel(k_train, cfg.shots, rng, symmetric=True)
        k_test = sample_kernel(k_test, cfg.shots, rng, symmetric=False)
    k_sim = KernelEstimator(Backend(), cfg.depth).exact(train.features)
    model = svm_fit(k_train, train.labels, cfg.svm_c)
    pred = svm_predict(model, k_test)
    duration = float("nan") if backend.mode == "logical" else _mean_pair_duration(est, train.features)
    return {
        "run": run,
        "n": n,
        "variant": variant,
        "test_accuracy": float(np.mean(pred == test.labels)),
        "train_accuracy": float(np.mean(svm_predict(model, k_train) == train.labels)),
        "nmse": nmse(k_train, k_sim),
        "mean_duration_ns": duration,
        "kkt_gap_max": float(max(sub.kkt_gap for *_, sub in model.pairs)),
        "k_train": k_train,
        "k_test": k_test,
    }


def kernel_tasks(cfg: KernelExperimentConfig, device: DeviceModel, noise: NoiseConfig) -> list:
    return [
        (cfg, device, noise, run, n, variant)
        for run in range(cfg.runs)
        for n in cfg.qubits
        for variant in cfg.variants
    ]


def run_kernel_experiment(cfg: KernelExperimentConfig, device: DeviceModel, noise: NoiseConfig,
                          workers: int = 1) -> list[dict]:
    return pmap(run_kernel_task, kernel_tasks(cfg, device, noise), workers)
