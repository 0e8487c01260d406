import numpy as np
import pytest

from peqml.backend import Backend
from peqml.circuit import build_feature_map, evaluate_state
from peqml.device import DeviceModel
from peqml.noise import NoiseConfig, draw_detunings, evolve, readout_distribution
from peqml.qml.kernel import KernelEstimator, estimate_kernel, inverse_feature_segment, nmse, sample_kernel


def overlap(a, b, depth=4):
    return abs(np.vdot(evaluate_state(build_feature_map(a, depth)), evaluate_state(build_feature_map(b, depth)))) ** 2


def test_noiseless_kernel_is_state_overlap(rng):
    xs = rng.uniform(0, 1, (5, 3))
    k = estimate_kernel(xs, shots=None)
    ref = np.array([[overlap(a, b) for b in xs] for a in xs])
    assert np.allclose(k, ref, atol=1e-12)
    assert np.allclose(np.diag(k), 1.0)


def test_shot_estimates_within_three_sigma(rng):
    xs = rng.uniform(0, 0.3, (6, 3))
    exact = estimate_kernel(xs, shots=None)
    shots = 8192
    est = estimate_kernel(xs, shots=shots, rng=np.random.default_rng(5))
    sigma = np.sqrt(exact * (1 - exact) / shots) + 1e-12
    assert np.all(np.abs(est - exact) <= 3 * sigma + 1.0 / shots)
    assert np.allclose(est, est.T)


@pytest.mark.parametrize("variant", ["pe", "pe+dd", "cnot"])
def test_factorised_entries_match_concatenated_schedule(variant, rng):
    n = 3
    dev = DeviceModel(n)
    noise = NoiseConfig(seed=4)
    backend = Backend.from_variant(variant, dev, noise)
    det = draw_detunings(dev, np.random.default_rng(9))
    est = KernelEstimator(backend, 4, det)
    xs = rng.uniform(0, 1, (3, n))
    k = est.exact(xs)
    for i in range(3):
        for j in range(i, 3):
            full = evolve(est.schedule(xs[i], xs[j]), dev, noise, det)
            p0 = readout_distribution(full.probabilities(), dev, n)[0]
            assert abs(k[i, j] - p0) < 1e-10
            assert abs(est.direct(xs[i], xs[j]) - p0) < 1e-10
    # the symmetric matrix takes each unordered pair from i <= j
    assert np.allclose(k, k.T)


def test_cross_kernel_shape(rng):
    dev = DeviceModel(2)
    backend = Backend.from_variant("pe", dev, NoiseConfig(seed=0))
    k = estimate_kernel(rng.uniform(0, 1, (4, 2)), rng.uniform(0, 1, (3, 2)), backend, shots=None)
    assert k.shape == (4, 3)
    assert np.all((k >= 0) & (k <= 1))


def test_noise_lowers_fidelity_of_identical_inputs():
    dev = DeviceModel(3)
    x = np.array([0.2, 0.4, 0.6])
    pe = KernelEstimator(Backend.from_variant("pe", dev, NoiseConfig(seed=0))).exact([x])[0, 0]
    cnot = KernelEstimator(Backend.from_variant("cnot", dev, NoiseConfig(seed=0))).exact([x])[0, 0]
    assert cnot < pe < 1.0


def test_inverse_segment_ends_with_measurements():
    c = inverse_feature_segment([0.1, 0.2], 2)
    assert [g.kind for g in c.gates[-2:]] == ["Measure", "Measure"]


def test_argument_errors(rng):
    with pytest.raises(ValueError, match="random generator"):
        estimate_kernel(rng.uniform(0, 1, (2, 2)), shots=10)
    with pytest.raises(ValueError):
        estimate_kernel(rng.uniform(0, 1, (2, 2)), rng.uniform(0, 1, (2, 3)), shots=None)
    with pytest.raises(ValueError):
        sample_kernel(np.eye(2), 0, rng, True)


def test_nmse():
    k_sim = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert nmse(k_sim, k_sim) == 0.0
    assert nmse(k_sim * 0.9, k_sim) == pytest.approx(0.01)
    with pytest.raises(ZeroDivisionError):
        nmse(k_sim, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        nmse(np.eye(3), k_sim)


def test_nmse_examples():
    k_sim = np.array([[1.0, 0.3], [0.3, 1.0]])
    assert nmse(np.zeros((2, 2)), k_sim) == pytest.approx(1.0)
    err = np.array([[0.0, 0.1], [0.1, -0.05]])
    assert nmse(k_sim + 2 * err, k_sim) == pytest.approx(4 * nmse(k_sim + err, k_sim))


def test_noisy_diagonal_is_measured_not_forced():
    dev = DeviceModel(2)
    est = KernelEstimator(Backend.from_variant("cnot", dev, NoiseConfig(seed=0)))
    k = est.exact(np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert np.all(np.diag(k) < 1.0)
