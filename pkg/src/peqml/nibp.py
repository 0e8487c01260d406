"""Loss and gradient concentration of the TFIM HVA versus qubit count.

For each n the ansatz has L = 2(n - 1) layers. The loss is <Z0 Z1> and the
tracked derivative is with respect to one ZZ angle, obtained from the
two-term shift rule. Parameters are a pure function of (seed, n, sample),
so every mode sees the same parameter sets.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .backend import Backend, parse_variant
from .circuit import build_hva_tfim
from .device import DeviceModel
from .noise import NoiseConfig, draw_detunings, expectation_z0z1, run_program
from .parallel import pmap
from .rng import task_rng

SHIFT = math.pi / 4


@dataclass(frozen=True)
class NibpSweepConfig:
    """``grad_layer`` and ``grad_pair`` pick the differentiated beta.

    Negative indices count from the end. The default is the final layer's
    beta on pair (0, 1). The final layer's pair (n - 2, n - 1) lies outside
    the light cone of Z0 Z1 for n >= 4, and first-layer ZZ terms act on
    |0...0> as a phase, so both derivatives vanish identically.
    """

    qubits_min: int = 2
    qubits_max: int = 10
    samples: int = 100
    param_low: float = -math.pi
    param_high: float = math.pi
    modes: tuple[str, ...] = ("noiseless", "pe", "cnot")
    seed: int = 0
    grad_layer: int = -1
    grad_pair: int = 0
    onset: int = 6

    def __post_init__(self):
        if not 2 <= self.qubits_min <= self.qubits_max:
            raise ValueError("need 2 <= qubits_min <= qubits_max")
        if self.qubits_max > 10:
            raise ValueError("qubits_max is limited to 10 for density-matrix simulation")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.param_low < self.param_high:
            raise ValueError("param_low must be below param_high")
        for m in self.modes:
            parse_variant(m)

    @property
    def qubits(self) -> range:
        return range(self.qubits_min, self.qubits_max + 1)

    def layers(self, n: int) -> int:
        return 2 * (n - 1)

    def target(self, n: int) -> tuple[int, int]:
        layers = self.layers(n)
        layer = self.grad_layer % layers
        pair = self.grad_pair % (n - 1)
        return layer, pair


@dataclass(frozen=True)
class SweepRecord:
    n: int
    mode: str
    mean_abs_loss: float
    sem_loss: float
    mean_abs_grad: float
    sem_grad: float
    samples: int

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "mean_abs_loss": self.mean_abs_loss,
            "sem_loss": self.sem_loss,
            "mean_abs_grad": self.mean_abs_grad,
            "sem_grad": self.sem_grad,
            "samples": self.samples,
        }


def sample_parameters(cfg: NibpSweepConfig, n: int, sample: int) -> tuple[np.ndarray, np.ndarray]:
    rng = task_rng(cfg.seed, "nibp-params", n, sample)
    layers = cfg.layers(n)
    gammas = rng.uniform(cfg.param_low, cfg.param_high, (layers, n))
    betas = rng.uniform(cfg.param_low, cfg.param_high, (layers, n - 1))
    return gammas, betas


def sample_detunings(cfg: NibpSweepConfig, dev: DeviceModel, n: int, sample: int) -> np.ndarray:
    return draw_detunings(dev.with_qubits(n), task_rng(cfg.seed, "nibp-detuning", n, sample))


class HvaLoss:
    """<Z0 Z1> of the HVA on one backend."""

    def __init__(self, backend: Backend, n: int, detunings=None):
        self.backend = backend
        self.n = n
        self.detunings = detunings

    def __call__(self, gammas, betas) -> float:
        c = build_hva_tfim(self.n, len(gammas), gammas, betas)
        if not self.backend.noisy:
            probs = np.abs(self.backend.state(c)) ** 2
            return expectation_z0z1(probs)
        rho = np.zeros((1 << self.n, 1 << self.n), dtype=complex)
        rho[0, 0] = 1.0
        run_program(self.backend.program(c, self.detunings), rho)
        # ideal (readout-mitigated) observable on the final state
        return expectation_z0z1(np.diag(rho).real)


def parameter_shift_grad(loss, gammas, betas, layer: int, pair: int) -> float:
    """d<O>/d beta for RZZ(2 beta): f(beta + pi/4) - f(beta - pi/4)."""
    plus = np.array(betas, dtype=float, copy=True)
    minus = plus.copy()
    plus[layer, pair] += SHIFT
    minus[layer, pair] -= SHIFT
    return loss(gammas, plus) - loss(gammas, minus)


def _evaluate(task) -> tuple[list[float], list[float]]:
    cfg, device, noise, n, mode, samples = task
    dev = device.with_qubits(n)
    backend = Backend.from_variant(mode, dev, noise)
    layer, pair = cfg.target(n)
    losses, grads = [], []
    for s in samples:
        gammas, betas = sample_parameters(cfg, n, s)
        f = HvaLoss(backend, n, sample_detunings(cfg, dev, n, s))
        losses.append(f(gammas, betas))
        grads.append(parameter_shift_grad(f, gammas, betas, layer, pair))
    return losses, grads


def _sem(values: np.ndarray) -> float:
    return float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0


def sweep_tasks(cfg: NibpSweepConfig, device: DeviceModel, noise: NoiseConfig, chunk: int = 10) -> list:
    tasks = []
    for n in cfg.qubits:
        for mode in cfg.modes:
            for start in range(0, cfg.samples, chunk):
                tasks.append((cfg, device, noise, n, mode, range(start, min(start + chunk, cfg.samples))))
    return tasks


def run_sweep_raw(cfg: NibpSweepConfig, device: DeviceModel, noise: NoiseConfig,
                  workers: int = 1) -> dict[tuple[int, str], tuple[np.ndarray, np.ndarray]]:
    """Per-sample (loss, gradient) arrays keyed by (n, mode)."""
    tasks = sweep_tasks(cfg, device, noise)
    results = pmap(_evaluate, tasks, workers)
    raw: dict = {}
    for (_, _, _, n, mode, _), (losses, grads) in zip(tasks, results):
        lo, gr = raw.setdefault((n, mode), ([], []))
        lo.extend(losses)
        gr.extend(grads)
    return {key: (np.array(lo), np.array(gr)) for key, (lo, gr) in raw.items()}


def aggregate(raw) -> list[SweepRecord]:
    records = []
    for (n, mode), (losses, grads) in raw.items():
        al, ag = np.abs(losses), np.abs(grads)
        records.append(SweepRecord(n, mode, float(al.mean()), _sem(al), float(ag.mean()), _sem(ag), len(al)))
    return records


def run_sweep(cfg: NibpSweepConfig, device: DeviceModel, noise: NoiseConfig | None = None,
              workers: int = 1) -> list[SweepRecord]:
    noise = NoiseConfig(seed=cfg.seed) if noise is None else noise
    return aggregate(run_sweep_raw(cfg, device, noise, workers))


def fit_decay(ns, means, onset: int = 6) -> float:
    """Least-squares slope of log(mean) against n over n >= onset."""
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    keep = ns >= onset
    bad = keep & ~(means > 0)
    if bad.any():
        warnings.warn(f"excluding non-positive means at n = {ns[bad].astype(int).tolist()}", stacklevel=2)
    keep &= means > 0
    if keep.sum() < 3:
        raise ValueError(f"need at least 3 positive points with n >= {onset}, have {int(keep.sum())}")
    slope, _ = np.polyfit(ns[keep], np.log(means[keep]), 1)
    return float(slope)


def fit_decay_records(records, quantity: str = "loss", onset: int = 6) -> dict[str, float]:
    """Decay slope per mode for ``mean_abs_loss`` or ``mean_abs_grad``."""
    attr = {"loss": "mean_abs_loss", "grad": "mean_abs_grad"}[quantity]
    out = {}
    for mode in sorted({r.mode for r in records}):
        rows = sorted((r for r in records if r.mode == mode), key=lambda r: r.n)
        out[mode] = fit_decay([r.n for r in rows], [getattr(r, attr) for r in rows], onset)
    return out
