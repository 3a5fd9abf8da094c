"""Reproducible sampling of the truncated Gaussian measures mu_{s,N}.

A sample is u_0(x) = sum_{0 <= n < K} g_n <n>^{-s} e^{inx} with the g_n
independent standard complex Gaussians (Re and Im independent N(0, 1/2)).
Each coefficient is a pure function of (seed, sample_index, n): a splitmix64-
style counter-based mixer produces two 64-bit words per coefficient which feed
a complex Box-Muller transform.  Nested truncations therefore agree bit-exactly
and samples can be evaluated in any order or in parallel.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .spectrum import PlusSpectrum, lp_project, norm_lp
from .bump import blocks_covering

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix(z):
    """splitmix64 finalizer, vectorized over uint64 arrays (wrapping mults)."""
    with np.errstate(over="ignore"):
        z = (z + _GAMMA) & _MASK
        z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK
        z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK
        return z ^ (z >> np.uint64(31))


def _counter_words(seed, sample_index, n, stream):
    """One uint64 per coefficient index n, keyed by (seed, sample_index, stream)."""
    n = np.asarray(n, dtype=np.uint64)
    key = _splitmix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    key = _splitmix(key ^ np.uint64(sample_index))
    key = _splitmix(key ^ np.uint64(stream))
    return _splitmix(n ^ key)


def _uniform_open(words):
    """Map uint64 words to (0, 1): (w >> 11 + 0.5) * 2^-53, never 0 or 1."""
    return (np.asarray(words >> np.uint64(11), dtype=np.float64) + 0.5) * 2.0 ** -53


def standard_complex_gaussians(seed, sample_index, count):
    """g_0, ..., g_{count-1}: unit-variance complex Gaussians, counter-keyed.

    Complex Box-Muller: g = sqrt(-log u1) * exp(2 pi i u2) gives E|g|^2 = 1 with
    Re g, Im g independent N(0, 1/2).
    """
    n = np.arange(count, dtype=np.uint64)
    u1 = _uniform_open(_counter_words(seed, sample_index, n, 0))
    u2 = _uniform_open(_counter_words(seed, sample_index, n, 1))
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


@dataclass(frozen=True)
class EnsembleSpec:
    """The Monte Carlo contract: everything a study needs to be reproducible."""

    seed: int
    sample_count: int
    s: float
    cutoffs: tuple = ()
    times: tuple = ()
    galerkin_factor: int = 32

    def __post_init__(self):
        if self.s <= 0.5:
            raise ValueError("mu_s needs s > 1/2 (finite coefficient variance)")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")
        if self.galerkin_factor < 1:
            raise ValueError("galerkin_factor must be positive")
        object.__setattr__(self, "cutoffs", tuple(int(n) for n in self.cutoffs))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))


def sample_mu(spec, sample_index, k):
    """Draw sample ``sample_index`` of mu_s truncated to n < k.

    uhat(n) = g_n / <n>^s; the g_n depend only on (seed, sample_index, n), so
    the K = 16 sample is the bit-exact prefix of the K = 64 one.
    """
    if not (0 <= sample_index < spec.sample_count):
        raise ValueError("sample_index out of range for this ensemble")
    if k < 1:
        raise ValueError("cutoff must be >= 1")
    g = standard_complex_gaussians(spec.seed, sample_index, k)
    n = np.arange(k, dtype=float)
    return PlusSpectrum(g * (1.0 + n * n) ** (-spec.s / 2.0))


def coefficient_variance_sum(s, k):
    """sum_{n < k} <n>^{-2s}: the exact E||u_0||_{L^2}^2 at cutoff k."""
    n = np.arange(k, dtype=float)
    return float(np.sum((1.0 + n * n) ** (-s)))


def l2_tail_bound(s, k):
    """sum_{n >= k} <n>^{-2s}, reported in manifests for Galerkin truncations."""
    a = k - 0.5
    # x = a/t maps the tail to (0, 1]; integrand stays smooth for quad
    val, _ = quad(lambda t: (1.0 + (a / t) ** 2) ** (-s) * a / (t * t),
                  0.0, 1.0, limit=100)
    return float(val)


def besov_diagnostic(u, s, p):
    """Per-block sequence (N, N^{s-1/2} ||P_N u||_{L^p}) whose sup is the
    B^{s-1/2}_{p,infty} norm; mu_s-samples keep it finite almost surely."""
    if p < 1 or p != int(p) or int(p) % 2:
        raise ValueError("diagnostic restricted to even integer p")
    out = []
    for block in blocks_covering(u.k - 1):
        pn = lp_project(u, block, "block")
        out.append((block, block ** (s - 0.5) * norm_lp(pn, int(p))))
    return out
