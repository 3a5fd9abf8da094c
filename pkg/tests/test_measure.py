import numpy as np
import pytest

from szego_lab.experiments import parallel_map
from szego_lab.measure import (
    EnsembleSpec,
    besov_diagnostic,
    coefficient_variance_sum,
    l2_tail_bound,
    sample_mu,
    standard_complex_gaussians,
)
from szego_lab.spectrum import PlusSpectrum, mass


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(seed=0, sample_count=10, s=0.5)
    with pytest.raises(ValueError):
        EnsembleSpec(seed=0, sample_count=0, s=0.8)
    spec = EnsembleSpec(seed=0, sample_count=2, s=0.8)
    with pytest.raises(ValueError):
        sample_mu(spec, 5, 16)
    with pytest.raises(ValueError):
        sample_mu(spec, 0, 0)


def test_second_moment_per_coefficient():
    # E|uhat(n)|^2 = <n>^{-2s} within 3 standard errors, 1e5 samples
    s = 0.7
    spec = EnsembleSpec(seed=123, sample_count=100_000, s=s)
    k = 32
    acc = np.zeros(k)
    acc2 = np.zeros(k)
    for i in range(spec.sample_count):
        g = np.abs(sample_mu(spec, i, k).coeffs) ** 2
        acc += g
        acc2 += g * g
    mean = acc / spec.sample_count
    se = np.sqrt((acc2 / spec.sample_count - mean ** 2) / spec.sample_count)
    target = (1.0 + np.arange(k) ** 2.0) ** (-s)
    for n in (0, 5, 31):
        assert abs(mean[n] - target[n]) <= 3.0 * se[n]


def test_complex_gaussian_isotropy():
    g = standard_complex_gaussians(7, 0, 200_000)
    se2 = np.sqrt(np.var(g * g) / g.size)
    assert abs(np.mean(g * g)) <= 3.0 * max(se2.real, se2.imag, 1e-6)
    se_abs = np.sqrt(np.var(np.abs(g) ** 2) / g.size)
    assert abs(np.mean(np.abs(g) ** 2) - 1.0) <= 3.0 * se_abs


def test_nested_truncations_bit_exact():
    spec = EnsembleSpec(seed=99, sample_count=3, s=0.6)
    small = sample_mu(spec, 1, 16)
    big = sample_mu(spec, 1, 64)
    assert np.array_equal(small.coeffs, big.coeffs[:16])


def test_order_independence_and_parallelism():
    spec = EnsembleSpec(seed=5, sample_count=8, s=0.8)
    forward = [sample_mu(spec, i, 32).coeffs for i in range(8)]
    backward = [sample_mu(spec, i, 32).coeffs for i in reversed(range(8))][::-1]
    threaded = parallel_map(lambda i: sample_mu(spec, i, 32).coeffs, range(8),
                            threads=4)
    for a, b, c in zip(forward, backward, threaded):
        assert np.array_equal(a, b)
        assert np.array_equal(a, c)


def test_expected_l2_mass_closed_form():
    s = 0.6
    k = 256
    spec = EnsembleSpec(seed=17, sample_count=4000, s=s)
    masses = np.array([mass(sample_mu(spec, i, k)) for i in range(4000)])
    target = coefficient_variance_sum(s, k)
    se = np.std(masses, ddof=1) / np.sqrt(masses.size)
    assert abs(np.mean(masses) - target) <= 3.0 * se


def test_block_l2_scaling_matches_closed_form():
    from szego_lab.bump import lp_symbol
    from szego_lab.spectrum import lp_project, mass as sp_mass

    s, k, block = 0.8, 256, 16
    spec = EnsembleSpec(seed=31, sample_count=3000, s=s)
    vals = []
    for i in range(spec.sample_count):
        u = sample_mu(spec, i, k)
        vals.append(sp_mass(lp_project(u, block, "block")))
    n = np.arange(k, dtype=float)
    target = float(np.sum(lp_symbol(n, block) ** 2 * (1 + n * n) ** (-s)))
    vals = np.array(vals)
    se = np.std(vals, ddof=1) / np.sqrt(vals.size)
    assert abs(np.mean(vals) - target) <= 3.0 * se


def test_besov_diagnostic_single_mode_and_zero():
    s = 0.8
    n = 16
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    diag = dict(besov_diagnostic(PlusSpectrum(c), s, 4))
    assert diag[n] == pytest.approx(n ** (s - 0.5), rel=1e-12)
    zeros = besov_diagnostic(PlusSpectrum(np.zeros(8, dtype=complex)), s, 4)
    assert all(v == 0.0 for _, v in zeros)
    with pytest.raises(ValueError):
        besov_diagnostic(PlusSpectrum(c), s, 3)


def test_besov_diagnostic_ensemble_median_stable():
    # sup_N N^{s-1/2} ||P_N u||_{L^4} stays O(1) as the cutoff doubles
    s, p = 0.8, 4
    spec = EnsembleSpec(seed=77, sample_count=100, s=s)
    medians = []
    for k in (2 ** 11, 2 ** 12):
        sups = []
        for i in range(spec.sample_count):
            u = sample_mu(spec, i, k)
            sups.append(max(v for _, v in besov_diagnostic(u, s, p)))
        medians.append(float(np.median(sups)))
    ratio = medians[1] / medians[0]
    assert 0.8 <= ratio <= 1.25


def test_tail_bound_decreases():
    assert l2_tail_bound(0.8, 1024) < l2_tail_bound(0.8, 256) < 1.0
