# test_correntropy.py
# 核函数 / 相关熵 / CIM 测试
#
# @date 26-10-18
#

import math

import numpy as np
import pytest

from src.autodiff import Tape
from src.correntropy import (
    KERNEL_FAMILIES,
    METRIC_FAMILIES,
    Kernel,
    cim,
    cim_penalty,
    correntropy,
    gaussian_taylor_partial_sum,
    kernel_eval,
    kernel_peak,
    kernel_tensor,
    kernel_values,
    silverman_bandwidth,
)
from src.errors import ContractError
from src.policy import GaussianBatch


# === 核函数 ===

@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_peak_at_zero(family):
    k = Kernel(family, 0.8)
    assert kernel_eval(k, [0.0, 0.0]) == pytest.approx(k.peak)


def test_kernel_peak_table():
    assert kernel_peak("Gaussian") == 1.0
    assert kernel_peak("rectangular") == 0.5
    assert kernel_peak("biweight") == pytest.approx(15 / 16)
    assert kernel_peak("epanechnikov") == pytest.approx(3 / (4 * math.sqrt(5)))
    with pytest.raises(ContractError):
        kernel_peak("cosine")


def test_gaussian_peak_is_one():
    assert kernel_eval(Kernel("gaussian", 1.0), [0.0]) == 1.0


def test_triangular_half_bandwidth():
    assert kernel_eval(Kernel("triangular", 1.0), [0.5]) == pytest.approx(0.5)


def test_biweight_half_bandwidth():
    assert kernel_eval(Kernel("biweight", 1.0), [0.5]) == pytest.approx(0.52734375, abs=1e-15)


@pytest.mark.parametrize("family", ["epanechnikov", "biweight", "triangular", "rectangular"])
def test_compact_kernels_vanish_outside_support(family):
    assert kernel_eval(Kernel(family, 1.0), [10.0, 10.0]) == 0.0


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_kernels_are_nonincreasing_in_radius(family):
    k = Kernel(family, 1.3)
    radii = np.linspace(0.0, 6.0, 200)
    values = kernel_values(k, radii[:, None])
    assert np.all(np.diff(values) <= 1e-15)
    assert np.all(values >= 0.0)


def test_kernel_depends_on_norm_only():
    k = Kernel("laplace", 2.0)
    assert kernel_eval(k, [3.0, 4.0]) == pytest.approx(kernel_eval(k, [5.0, 0.0]))


@pytest.mark.parametrize("bandwidth", [0.0, -1.0, float("inf")])
def test_bad_bandwidth(bandwidth):
    with pytest.raises(ContractError):
        Kernel("gaussian", bandwidth)


def test_unknown_family():
    with pytest.raises(ContractError):
        Kernel("cosine", 1.0)


def test_family_name_is_case_insensitive():
    assert Kernel("Gaussian").family == "gaussian"


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_tensor_path_matches_numpy(family):
    k = Kernel(family, 0.9)
    diffs = np.random.default_rng(1).normal(0.0, 0.7, (50, 2))
    tape = Tape()
    values = kernel_tensor(k, tape.variable(diffs))
    assert np.allclose(values.data, kernel_values(k, diffs), atol=1e-14)


# === 相关熵 与 CIM ===

def test_correntropy_identical_samples():
    xs = np.random.default_rng(0).standard_normal((20, 3))
    est = correntropy(Kernel("epanechnikov", 1.0), xs, xs)
    assert est.value == pytest.approx(Kernel("epanechnikov", 1.0).peak)
    assert est.count == 20


def test_correntropy_two_term_average():
    est = correntropy(Kernel("gaussian", 1.0), [0.0, 1.0], [0.0, 0.0])
    assert est.value == pytest.approx((1 + math.exp(-0.5)) / 2, abs=1e-12)
    assert est.value == pytest.approx(0.80327, abs=1e-5)


def test_correntropy_shape_mismatch():
    with pytest.raises(ContractError):
        correntropy(Kernel(), np.zeros((3, 2)), np.zeros((4, 2)))


def test_correntropy_rejects_nonfinite():
    with pytest.raises(ContractError):
        correntropy(Kernel(), [0.0, float("nan")], [0.0, 0.0])


def test_correntropy_matches_gaussian_smoothing():
    rng = np.random.default_rng(2024)
    n = 1_000_000
    xs = rng.normal(0.0, 1.0, n)
    ys = rng.normal(1.0, 1.0, n)
    k = Kernel("gaussian", 1.0)
    est = correntropy(k, xs, ys)
    s2, dmu = 2.0, 1.0
    expected = math.sqrt(1.0 / (1.0 + s2)) * math.exp(-dmu ** 2 / (2 * (1.0 + s2)))
    se = float(np.std(kernel_values(k, (xs - ys)[:, None]))) / math.sqrt(n)
    assert abs(est.value - expected) <= 3 * se


def test_cim_identical_is_exactly_zero():
    xs = np.random.default_rng(3).standard_normal((15, 2))
    for family in KERNEL_FAMILIES:
        assert cim(Kernel(family, 0.5), xs, xs) == 0.0


def test_cim_two_term_example():
    assert cim(Kernel("gaussian", 1.0), [0.0, 1.0], [0.0, 0.0]) == pytest.approx(0.44355, abs=1e-5)


def test_cim_gaussian_approaches_one():
    k = Kernel("gaussian", 1.0)
    far = cim(k, [0.0], [40.0])
    assert far <= 1.0
    assert far == pytest.approx(1.0)
    assert cim(k, [0.0], [3.0]) < 1.0


@pytest.mark.parametrize("family", METRIC_FAMILIES)
def test_cim_triangle_inequality(family):
    rng = np.random.default_rng(17)
    k = Kernel(family, 1.0)
    for _ in range(200):
        x, y, z = rng.normal(0.0, 1.5, (3, 8, 2))
        assert cim(k, x, z) <= cim(k, x, y) + cim(k, y, z) + 1e-12


def test_cim_is_symmetric():
    rng = np.random.default_rng(4)
    x, y = rng.standard_normal((2, 10, 3))
    k = Kernel("laplace", 0.7)
    assert cim(k, x, y) == pytest.approx(cim(k, y, x))


@pytest.mark.parametrize("family", ["gaussian", "laplace"])
def test_cim_nonincreasing_in_bandwidth(family):
    rng = np.random.default_rng(15)
    xs = rng.normal(size=(50, 2))
    ys = xs + rng.uniform(0.1, 2.0, size=(50, 2))
    values = [cim(Kernel(family, s), xs, ys) for s in np.geomspace(0.05, 20.0, 40)]
    assert all(v > 0.0 for v in values)
    assert np.all(np.diff(values) <= 1e-15)


# === CIM 惩罚 ===

def _batch(mu, sigma) -> GaussianBatch:
    return GaussianBatch(np.array(mu, dtype=float), np.array(sigma, dtype=float))


def test_penalty_identical_policies_zero_value_and_gradient():
    mu = np.array([[0.2, -0.1], [1.0, 0.5], [0.0, 0.0]])
    log_std = np.array([-0.5, 0.3])
    old = _batch(mu, np.exp(log_std))
    noise = np.random.default_rng(5).standard_normal((3, 2))

    tape = Tape()
    m, s = tape.variable(mu), tape.variable(log_std)
    value = cim_penalty(Kernel(), old, GaussianBatch(m, s.exp()), noise)
    gm, gs = tape.gradient(value, [m, s])
    assert value.item() == 0.0
    assert np.array_equal(gm.data, np.zeros_like(mu))
    assert np.array_equal(gs.data, np.zeros_like(log_std))


def test_penalty_common_noise_cancels():
    noise = np.random.default_rng(6).standard_normal((1, 1))
    value = cim_penalty(Kernel("gaussian", 1.0), _batch([[0.0]], [1.0]), _batch([[1.0]], [1.0]), noise)
    assert value.item() == pytest.approx(math.sqrt(1 - math.exp(-0.5)), abs=1e-12)
    assert value.item() == pytest.approx(0.627271, abs=1e-6)


def test_penalty_accepts_several_draws_per_state():
    noise = np.random.default_rng(7).standard_normal((4, 2, 1))
    value = cim_penalty(Kernel(), _batch([[0.0], [0.0]], [1.0]), _batch([[0.5], [0.5]], [1.0]), noise)
    assert value.item() == pytest.approx(math.sqrt(1 - math.exp(-0.125)), abs=1e-12)


def test_penalty_noise_shape_mismatch():
    with pytest.raises(ContractError):
        cim_penalty(Kernel(), _batch([[0.0]], [1.0]), _batch([[1.0]], [1.0]), np.zeros((2, 1)))


def test_penalty_gradient_pulls_mean_back():
    old = _batch([[0.0]], [1.0])
    tape = Tape()
    m = tape.variable(np.array([[0.8]]))
    value = cim_penalty(Kernel(), old, GaussianBatch(m, np.array([1.0])), np.zeros((1, 1)))
    (g,) = tape.gradient(value, [m])
    assert g.data[0, 0] > 0.0


# === 带宽 与 Taylor 展开 ===

def test_silverman_constant_samples_fallback():
    assert silverman_bandwidth(np.full(10, 3.0)) == 1.0


def test_silverman_unit_spread():
    xs = np.random.default_rng(8).standard_normal(100)
    xs = (xs - xs.mean()) / xs.std(ddof=1)
    assert silverman_bandwidth(xs) == pytest.approx(1.06 * 100 ** -0.2, abs=1e-12)
    assert silverman_bandwidth(xs) == pytest.approx(0.42199, abs=1e-5)


def test_silverman_half_spread():
    xs = np.random.default_rng(9).standard_normal(32)
    xs = 0.5 * (xs - xs.mean()) / xs.std(ddof=1)
    assert silverman_bandwidth(xs) == pytest.approx(0.265, abs=1e-12)


def test_silverman_needs_two_samples():
    with pytest.raises(ContractError):
        silverman_bandwidth([1.0])


def test_taylor_at_zero():
    for terms in (1, 2, 7):
        assert gaussian_taylor_partial_sum(0.0, 1.3, terms) == 1.0


def test_taylor_converges_to_exp():
    assert gaussian_taylor_partial_sum(1.0, 1.0, 10) == pytest.approx(math.exp(-0.5), abs=1e-6)


def test_taylor_two_terms():
    assert gaussian_taylor_partial_sum(1.0, 1.0, 2) == pytest.approx(0.5)


def test_taylor_needs_a_term():
    with pytest.raises(ContractError):
        gaussian_taylor_partial_sum(1.0, 1.0, 0)
