"""Simultaneous-perturbation stochastic approximation with step calibration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..rng import task_rng


@dataclass(frozen=True)
class SpsaConfig:
    """Gain sequences a_k = a / (k + 1 + A)**alpha and c_k = c / (k + 1)**gamma.

    With ``a=None`` the learning rate is calibrated so that the first update
    moves each parameter by about ``target_step`` radians, from
    ``calibration_samples`` gradient estimates (two loss evaluations each).
    ``A=None`` uses 10% of the iteration budget.
    """

    iterations: int = 100
    calibration_samples: int = 25
    a: float | None = None
    c: float = 0.1
    A: float | None = None
    alpha: float = 0.602
    gamma: float = 0.101
    target_step: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.calibration_samples < 1:
            raise ValueError("calibration_samples must be >= 1")
        if self.c <= 0 or self.alpha <= 0 or self.gamma <= 0 or self.target_step <= 0:
            raise ValueError("c, alpha, gamma and target_step must be positive")
        if self.a is not None and self.a <= 0:
            raise ValueError("a must be positive")

    @property
    def stability(self) -> float:
        return 0.1 * self.iterations if self.A is None else self.A


@dataclass
class SpsaResult:
    theta: np.ndarray
    loss_trace: list[float] = field(default_factory=list)
    a: float = 0.0
    evaluations: int = 0


def _checked(value: float, where: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise FloatingPointError(f"loss is {value} during {where}")
    return value


def calibrate(f: Callable[[np.ndarray], float], theta0: np.ndarray, cfg: SpsaConfig,
              rng: np.random.Generator) -> tuple[float, int]:
    """Return (a, evaluations) so the first step has magnitude ~target_step."""
    mags = []
    for s in range(cfg.calibration_samples):
        delta = rng.choice([-1.0, 1.0], size=theta0.shape)
        plus = _checked(f(theta0 + cfg.c * delta), f"calibration sample {s}")
        minus = _checked(f(theta0 - cfg.c * delta), f"calibration sample {s}")
        mags.append(abs(plus - minus) / (2 * cfg.c))
    mean = float(np.mean(mags))
    if mean == 0.0:
        # flat around theta0: fall back to a unit gradient scale
        mean = 1.0
    a = cfg.target_step * (cfg.stability + 1) ** cfg.alpha / mean
    return a, 2 * cfg.calibration_samples


def spsa_minimize(f: Callable[[np.ndarray], float], theta0, cfg: SpsaConfig) -> SpsaResult:
    """Minimise ``f``; the trace holds (f+ + f-)/2 for each iteration."""
    theta = np.array(theta0, dtype=float, copy=True)
    if cfg.iterations == 0:
        return SpsaResult(theta, [], cfg.a or 0.0, 0)
    rng = task_rng(cfg.seed, "spsa")
    evaluations = 0
    a = cfg.a
    if a is None:
        a, evaluations = calibrate(f, theta, cfg, rng)
    trace = []
    for k in range(cfg.iterations):
        ak = a / (k + 1 + cfg.stability) ** cfg.alpha
        ck = cfg.c / (k + 1) ** cfg.gamma
        delta = rng.choice([-1.0, 1.0], size=theta.shape)
        plus = _checked(f(theta + ck * delta), f"iteration {k}")
        minus = _checked(f(theta - ck * delta), f"iteration {k}")
        evaluations += 2
        theta = theta - ak * (plus - minus) / (2 * ck) * delta
        trace.append(0.5 * (plus + minus))
    return SpsaResult(theta, trace, a, evaluations)


def cross_entropy(p0: np.ndarray, labels: np.ndarray, clip: float = 1e-10) -> float:
    """Mean binary cross-entropy with class-1 probability 1 - p0."""
    p0 = np.clip(np.asarray(p0, dtype=float), clip, 1 - clip)
    y = np.asarray(labels)
    return float(-np.mean(y * np.log(1 - p0) + (1 - y) * np.log(p0)))
