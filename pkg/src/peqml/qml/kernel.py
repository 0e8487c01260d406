"""Fidelity kernel K(x_i, x_j) = P(read 0...0 after U_FM(x_j) then U_FM(x_i)^dag)."""

from __future__ import annotations

import numpy as np

from ..backend import Backend, readout_zero_observable
from ..circuit import Circuit, build_feature_map
from ..noise import run_program
from ..scheduler import Schedule

KERNEL_FEATURE_DEPTH = 4


def inverse_feature_segment(x, depth: int) -> Circuit:
    return build_feature_map(x, depth).inverse().measure_all()


class KernelEstimator:
    """Kernel entries for one backend.

    Noisy entries are evaluated as ``tr[M_i rho_j]``: ``rho_j`` is the
    state after the U_FM(x_j) segment and ``M_i`` the zero-readout
    projector evolved backwards through the U_FM(x_i)^dag segment. The two
    segments meet at a synchronisation point, so the product equals running
    the concatenated schedule and each sample is simulated once per role.
    """

    def __init__(self, backend: Backend, depth: int = KERNEL_FEATURE_DEPTH, detunings=None):
        self.backend = backend
        self.depth = depth
        self.detunings = detunings

    # -- per-sample pieces -------------------------------------------------

    def _states(self, xs) -> np.ndarray:
        return np.array([self.backend.state(build_feature_map(x, self.depth)) for x in xs])

    def forward(self, x) -> np.ndarray:
        n = len(x)
        prog = self.backend.program(build_feature_map(x, self.depth), self.detunings, fresh=True)
        rho = np.zeros((1 << n, 1 << n), dtype=complex)
        rho[0, 0] = 1.0
        return run_program(prog, rho)

    def observable(self, x) -> np.ndarray:
        n = len(x)
        prog = self.backend.program(inverse_feature_segment(x, self.depth), self.detunings, fresh=False)
        m = readout_zero_observable(self.backend.device, n, self.backend.noise.readout)
        return run_program(prog, m, adjoint=True)

    def schedule(self, x_i, x_j) -> Schedule:
        first = self.backend.schedule(build_feature_map(x_j, self.depth), fresh=True)
        return first + self.backend.schedule(inverse_feature_segment(x_i, self.depth), fresh=False)

    # -- matrices ----------------------------------------------------------

    def exact(self, rows, cols=None) -> np.ndarray:
        """Infinite-shot kernel; ``cols=None`` gives the symmetric Gram matrix."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        same = cols is None
        cols = rows if same else np.atleast_2d(np.asarray(cols, dtype=float))
        if rows.shape[1] != cols.shape[1]:
            raise ValueError("row and column samples have different dimensions")
        if not self.backend.noisy:
            a = self._states(rows)
            b = a if same else self._states(cols)
            return np.clip(np.abs(a.conj() @ b.T) ** 2, 0.0, 1.0)
        rhos = np.array([self.forward(x).ravel() for x in cols])
        obs = np.array([self.observable(x).ravel() for x in rows])
        # tr[M rho] = sum_ab M_ab conj(rho_ab) for Hermitian rho
        k = np.clip((obs @ rhos.conj().T).real, 0.0, 1.0)
        if same:
            # each unordered pair is run once, with the later sample as x_j
            k = np.triu(k) + np.triu(k, 1).T
        return k

    def direct(self, x_i, x_j) -> float:
        """Single entry from the concatenated schedule (test oracle)."""
        if not self.backend.noisy:
            return float(self.exact([x_i], [x_j])[0, 0])
        n = len(x_i)
        rho = self.forward(x_j)
        prog = self.backend.program(inverse_feature_segment(x_i, self.depth), self.detunings, fresh=False)
        run_program(prog, rho)
        m = readout_zero_observable(self.backend.device, n, self.backend.noise.readout)
        return float(np.real(np.trace(m @ rho)))


def sample_kernel(k: np.ndarray, shots: int, rng: np.random.Generator, symmetric: bool) -> np.ndarray:
    """Zero-bitstring frequencies Binomial(shots, K_ij) / shots."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = np.clip(k, 0.0, 1.0)
    if not symmetric:
        return rng.binomial(shots, p) / shots
    iu = np.triu_indices(len(p))
    out = np.zeros_like(p)
    out[iu] = rng.binomial(shots, p[iu]) / shots
    return np.triu(out) + np.triu(out, 1).T


def estimate_kernel(
    rows,
    cols=None,
    backend: Backend | None = None,
    depth: int = KERNEL_FEATURE_DEPTH,
    shots: int | None = 8192,
    rng: np.random.Generator | None = None,
    detunings=None,
) -> np.ndarray:
    """Kernel matrix between ``rows`` and ``cols`` (Gram matrix when ``cols`` is None).

    ``shots=None`` returns the infinite-shot values.
    """
    backend = Backend() if backend is None else backend
    k = KernelEstimator(backend, depth, detunings).exact(rows, cols)
    if shots is None:
        return k
    if rng is None:
        raise ValueError("a random generator is needed for finite shots")
    return sample_kernel(k, shots, rng, symmetric=cols is None)


def nmse(k: np.ndarray, k_sim: np.ndarray) -> float:
    """sum (K_sim - K)^2 / sum K_sim^2."""
    k = np.asarray(k, dtype=float)
    k_sim = np.asarray(k_sim, dtype=float)
    if k.shape != k_sim.shape:
        raise ValueError(f"shape mismatch {k.shape} vs {k_sim.shape}")
    denom = float(np.sum(k_sim**2))
    if denom == 0.0:
        raise ZeroDivisionError("reference kernel is identically zero")
    return float(np.sum((k_sim - k) ** 2) / denom)
