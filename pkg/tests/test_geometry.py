import math

import numpy as np
import pytest
from scipy import integrate, stats

from seqmedoids.distributions import Gamma, Gaussian
from seqmedoids.geometry import (
    BoundParameters,
    ClusterGeometry,
    cluster_geometry,
    corollary_parameters,
    dist_between_distributions,
    error_bound,
    ks_between,
    lemma_tail_bound,
    mmd2_between,
    theorem_bound,
    threshold_from_omega,
)
from seqmedoids.metrics import ExponentialKernel, ks_distance_seq, ks_metric, mmd2_unbiased, mmd_metric
from seqmedoids.simharness import ScenarioConfig, build_scenario


def ks_gauss(gap):
    return 2 * stats.norm.cdf(abs(gap) / 2) - 1


# distances between distributions

def test_ks_identical_distributions():
    assert dist_between_distributions(Gaussian(0), Gaussian(0), ks_metric()).value == 0.0


@pytest.mark.parametrize("mu", [1.0, 5.0, 0.1])
def test_ks_gaussian_closed_form(mu):
    assert ks_between(Gaussian(0), Gaussian(mu)) == pytest.approx(ks_gauss(mu), abs=1e-6)


def test_ks_closed_form_values():
    assert ks_gauss(1.0) == pytest.approx(0.382925, abs=1e-6)
    assert ks_gauss(5.0) == pytest.approx(0.987581, abs=1e-6)


def test_ks_gamma_against_scan():
    p, q = Gamma(3.5), Gamma(6.0)
    grid = np.linspace(0, 30, 300001)
    expected = np.max(np.abs(p.cdf(grid) - q.cdf(grid)))
    assert ks_between(p, q) == pytest.approx(expected, abs=1e-8)


def expected_exp_kernel(mean, var, scale=2.0):
    """E exp(-|Z| / scale) for Z ~ N(mean, var), by quadrature."""
    sd = math.sqrt(var)
    f = lambda z: math.exp(-abs(z) / scale) * stats.norm.pdf(z, mean, sd)
    left, _ = integrate.quad(f, -np.inf, 0)
    right, _ = integrate.quad(f, 0, np.inf)
    return left + right


def test_mmd_between_matches_quadrature():
    kernel = ExponentialKernel(2.0)
    est = mmd2_between(Gaussian(0), Gaussian(1), kernel, n=200000, seed=1)
    exact = 2 * expected_exp_kernel(0, 2) - 2 * expected_exp_kernel(1, 2)
    assert est.stderr > 0
    assert abs(est.value - exact) < 4 * est.stderr


def test_mmd_between_identical_is_zero():
    est = dist_between_distributions(Gamma(6), Gamma(6), mmd_metric())
    assert est == (0.0, 0.0)


def test_ks_between_needs_cdf():
    with pytest.raises(TypeError):
        dist_between_distributions(object(), object(), ks_metric())


# cluster geometry

def test_geometry_singleton_clusters():
    g = cluster_geometry([Gaussian(0), Gaussian(1), Gaussian(3)], [0, 1, 2], ks_metric())
    assert g.d_L == 0.0
    assert g.sigma == g.delta == pytest.approx(ks_gauss(1.0), abs=1e-9)


def test_geometry_gaussian_scenario_delta0():
    specs, labels = build_scenario(ScenarioConfig(delta=0.0))
    g = cluster_geometry(specs, labels, ks_metric())
    assert g.d_L == 0.0
    assert g.d_H == pytest.approx(0.382925, abs=1e-6)


def test_geometry_gaussian_scenario_delta01():
    specs, labels = build_scenario(ScenarioConfig(delta=0.1))
    g = cluster_geometry(specs, labels, ks_metric())
    assert g.d_L == pytest.approx(ks_gauss(0.2), abs=1e-9)
    assert g.d_L == pytest.approx(0.079656, abs=1e-6)
    assert g.d_H == pytest.approx(ks_gauss(0.8), abs=1e-9)
    assert g.d_H == pytest.approx(0.310843, abs=1e-6)


def test_geometry_needs_two_clusters():
    with pytest.raises(ValueError):
        cluster_geometry([Gaussian(0), Gaussian(1)], [0, 0], ks_metric())


# threshold

def test_threshold_examples():
    assert threshold_from_omega(ClusterGeometry(0.0, 0.4), 0.5).d_th == pytest.approx(0.2)
    assert threshold_from_omega(ClusterGeometry(0.0797, 0.3108)).d_th == pytest.approx(0.19525)
    assert threshold_from_omega(ClusterGeometry(0.1, 0.5), 0.25).d_th == pytest.approx(0.4)


@pytest.mark.parametrize("omega", [0.0, 1.0, -0.1, 1.5])
def test_threshold_rejects_boundary_omega(omega):
    with pytest.raises(ValueError):
        threshold_from_omega(ClusterGeometry(0.0, 0.4), omega)


def test_threshold_needs_separation():
    with pytest.raises(ValueError):
        threshold_from_omega(ClusterGeometry(0.3, 0.3))


# bounds

M, T, n, d = 15, 10, 2000, 0.382925


def test_bound_formulas_literal():
    e_ks = math.exp(-n * d**2 / 8)
    e_mmd = math.exp(-n * d**2 / 256)
    expected = {
        ("known", "ks"): M**2 * (8 + 6 * (T + 1)) * e_ks,
        ("merge", "ks"): M**2 * (4 * (T + 1) + 4 + 6 * (T + 1)) * e_ks,
        ("split", "ks"): 14 * M**2 * T * e_ks,
        ("known", "mmd"): M**2 * (T + 3) * e_mmd,
        ("merge", "mmd"): M**2 * (2 * T + 3) * e_mmd,
        ("split", "mmd"): 3 * M**2 * T * e_mmd,
    }
    for (algo, metric), value in expected.items():
        assert error_bound(algo, metric, M, T, n, d).value == pytest.approx(value, rel=1e-12)


def test_bound_spot_value():
    value = error_bound("known", "ks", M, T, n, d).value
    assert value == pytest.approx(225 * 74 * math.exp(-2000 * 0.146632 / 8), rel=1e-4)
    assert value == pytest.approx(2.0e-12, rel=0.01)


def test_bound_monotone():
    ns = [100, 1000, 5000, 20000]
    vals = [error_bound("merge", "mmd", M, T, k, d).value for k in ns]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert error_bound("known", "ks", 20, T, n, d).value > error_bound("known", "ks", 15, T, n, d).value
    assert error_bound("split", "ks", M, 20, n, d).value > error_bound("split", "ks", M, 10, n, d).value


def test_bound_vacuous_flag():
    assert error_bound("known", "ks", M, T, 10, d).vacuous
    assert not error_bound("known", "ks", M, T, 2000, d).vacuous


def test_bound_split_zero_iterations():
    assert error_bound("split", "mmd", M, 0, n, d).value == 0.0


def test_bound_kernel_bound_enters_rate():
    assert corollary_parameters("mmd", 0.4, kernel_bound=2.0).b == pytest.approx(0.16 / 1024)


def test_bound_validation():
    with pytest.raises(ValueError):
        error_bound("known", "ks", M, T, n, 0.0)
    with pytest.raises(ValueError):
        error_bound("bogus", "ks", M, T, n, d)
    with pytest.raises(ValueError):
        error_bound("known", "l2", M, T, n, d)
    with pytest.raises(ValueError):
        BoundParameters(1, 1, 1, 0.0)


def test_theorem_bound_generic():
    p = BoundParameters(1.0, 2.0, 3.0, 0.01)
    assert theorem_bound("knownK", p, 4, 2, 100) == pytest.approx(16 * 12 * math.exp(-1))
    assert theorem_bound("merge", p, 4, 2, 100) == pytest.approx(16 * 14 * math.exp(-1))
    assert theorem_bound("split", p, 4, 2, 100) == pytest.approx(16 * 12 * math.exp(-1))


# tail bounds

def test_lemma_examples():
    assert lemma_tail_bound("dkw", n=100, eps=0.15) == pytest.approx(0.022218, abs=1e-6)
    assert lemma_tail_bound("ks_intra", n=100, d0=0.2, d_L=0.2) == 4.0
    assert lemma_tail_bound("mmd_triple", n=100, delta=0.0) == 1.0
    assert lemma_tail_bound("ks_triple", n=800, delta=0.2) == pytest.approx(6 * math.exp(-4))


def test_lemma_validation():
    with pytest.raises(ValueError):
        lemma_tail_bound("ks_intra", n=10, d0=0.1, d_L=0.2)
    with pytest.raises(ValueError):
        lemma_tail_bound("ks_inter", n=10, d0=0.5, d_H=0.2)
    with pytest.raises(ValueError):
        lemma_tail_bound("nope", n=10)


@pytest.mark.parametrize("n", [100, 500])
def test_ks_lemmas_hold_empirically(n):
    rng = np.random.default_rng(n)
    d_H = ks_gauss(1.0)
    d0 = d_H / 2
    trials = 2000
    intra = inter = 0
    for _ in range(trials):
        x, y, z = rng.normal(size=n), rng.normal(size=n), rng.normal(1.0, size=n)
        intra += ks_distance_seq(x, y) > d0
        inter += ks_distance_seq(x, z) <= d0
    se = 0.5 / math.sqrt(trials)
    assert intra / trials <= lemma_tail_bound("ks_intra", n=n, d0=d0, d_L=0.0) + 3 * se
    assert inter / trials <= lemma_tail_bound("ks_inter", n=n, d0=d0, d_H=d_H) + 3 * se


def test_mmd_lemmas_hold_empirically():
    kernel = ExponentialKernel(2.0)
    rng = np.random.default_rng(11)
    d_H = 2 * expected_exp_kernel(0, 2) - 2 * expected_exp_kernel(1, 2)
    d0, n, trials = d_H / 2, 200, 1000
    intra = inter = 0
    for _ in range(trials):
        x, y, z = rng.normal(size=n), rng.normal(size=n), rng.normal(1.0, size=n)
        intra += mmd2_unbiased(x, y, kernel) > d0
        inter += mmd2_unbiased(x, z, kernel) <= d0
    se = 0.5 / math.sqrt(trials)
    assert intra / trials <= lemma_tail_bound("mmd_intra", n=n, d0=d0, d_L=0.0) + 3 * se
    assert inter / trials <= lemma_tail_bound("mmd_inter", n=n, d0=d0, d_H=d_H) + 3 * se
