"""Fourier-side state, projectors, dealiased products and norms.

States live on the torus T = R/(2 pi Z) with the normalized integral
(1/2pi) int_0^{2pi}, so u(x) = sum_{0 <= n < K} uhat(n) e^{inx} and Plancherel
reads ||u||_{L^2}^2 = sum |uhat(n)|^2.  All pointwise products are evaluated on
zero-padded power-of-two grids large enough that the product of trigonometric
polynomials is alias-free, which makes Pi(|u|^2 u) exact rather than a
pseudospectral approximation.
"""

from dataclasses import dataclass

import numpy as np

from .bump import SUPPORT, LL_RATIO_DEFAULT, blocks_covering, lp_symbol, mode_symbol

DEFAULT_PADDING = 4
LP_OVERSAMPLE = 8  # extra padding for L^p quadrature, p up to 8 exact


@dataclass(frozen=True)
class PlusSpectrum:
    """Finite vector of Fourier amplitudes uhat(0), ..., uhat(K-1), n >= K zero."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("PlusSpectrum needs a nonempty 1-d coefficient vector")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("PlusSpectrum coefficients must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def k(self):
        return self.coeffs.size

    def padded(self, k):
        """Coefficient vector extended with zeros to length k >= K."""
        if k < self.k:
            raise ValueError("padded() cannot shrink the spectrum")
        out = np.zeros(k, dtype=np.complex128)
        out[: self.k] = self.coeffs
        return out


@dataclass(frozen=True)
class GridSignal:
    """Samples of u on the equispaced grid x_j = 2 pi j / M, M a power of two."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.complex128)
        m = arr.size
        if arr.ndim != 1 or m == 0 or m & (m - 1):
            raise ValueError("GridSignal needs a power-of-two sample vector")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def m(self):
        return self.samples.size


def next_pow2(n):
    m = 1
    while m < n:
        m *= 2
    return m


def grid_size(k, padding_factor=DEFAULT_PADDING):
    """Power-of-two grid with at least padding_factor x K points (min 8)."""
    if padding_factor < 4:
        raise ValueError("padding_factor must be >= 4 for exact cubic products")
    return next_pow2(max(8, padding_factor * k))


def synthesize(u, m=None, padding_factor=DEFAULT_PADDING):
    """Evaluate the spectrum on the grid of size m (defaults per padding)."""
    coeffs = u.coeffs if isinstance(u, PlusSpectrum) else np.asarray(u, np.complex128)
    if m is None:
        m = grid_size(coeffs.size, padding_factor)
    if m < coeffs.size:
        raise ValueError("grid too small for the retained frequencies")
    buf = np.zeros(m, dtype=np.complex128)
    buf[: coeffs.size] = coeffs
    return np.fft.ifft(buf) * m


def analyze(samples, count):
    """First ``count`` nonnegative-frequency coefficients of a grid signal."""
    samples = np.asarray(samples, dtype=np.complex128)
    m = samples.size
    if count > m:
        raise ValueError("cannot resolve more coefficients than grid points")
    return np.fft.fft(samples)[:count] / m


def analyze_two_sided(samples):
    """All coefficients of a grid signal, frequencies fftfreq-ordered."""
    samples = np.asarray(samples, dtype=np.complex128)
    return np.fft.fft(samples) / samples.size


def szego_project(coeffs, n_min=0):
    """Pi: drop negative frequencies of a two-sided vector, keep n >= 0 bit-exactly.

    ``coeffs[j]`` is the amplitude at frequency n_min + j.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    n_max = n_min + coeffs.size - 1
    if n_max < 0:
        return PlusSpectrum(np.zeros(1, dtype=np.complex128))
    out = np.zeros(n_max + 1, dtype=np.complex128)
    start = max(0, -n_min)
    out[n_min + start :] = coeffs[start:]
    return PlusSpectrum(out)


def sharp_truncate(u, n):
    """pi_N: keep frequencies 0 <= k < N, zero the rest.  Idempotent."""
    if n < 1:
        raise ValueError("truncation cutoff must be >= 1")
    out = np.zeros(min(n, u.k), dtype=np.complex128)
    out[:] = u.coeffs[: out.size]
    return PlusSpectrum(out)


def lp_project(u, block, mode="block", ratio=LL_RATIO_DEFAULT):
    """Apply P_N (mode='block') or P_{<<N} / P_{<~N} / P_{~N} / P_{~~N} / P_{>~N} / P_{>>N}."""
    n = np.arange(u.k, dtype=float)
    sym = mode_symbol(n, block, mode, ratio=ratio, max_freq=float(u.k - 1))
    return PlusSpectrum(u.coeffs * sym)


def cubic_szego_term(u, padding_factor=DEFAULT_PADDING):
    """Pi(|u|^2 u), computed exactly via a zero-padded grid product.

    The result is supported on 0 <= n <= 2K-2 (and returned at that length).
    """
    k = u.k
    m = grid_size(k, padding_factor)
    grid = synthesize(u.coeffs, m)
    w = (grid * np.conj(grid)) * grid
    return PlusSpectrum(analyze(w, min(m, 2 * k - 1)))


def cubic_szego_term_oracle(u):
    """Direct triple-convolution sum for Pi(|u|^2 u); O(K^3), test oracle."""
    c = u.coeffs
    k = c.size
    out = np.zeros(2 * k - 1, dtype=np.complex128)
    for n1 in range(k):
        for n2 in range(k):
            for n3 in range(k):
                n = n1 - n2 + n3
                if n >= 0:
                    out[n] += c[n1] * np.conj(c[n2]) * c[n3]
    return PlusSpectrum(out)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def mass(u):
    """M(u) = ||u||_{L^2}^2 = sum |uhat(n)|^2 (conserved by the flow)."""
    return float(np.sum(np.abs(u.coeffs) ** 2))


def momentum(u):
    """P(u) = ||u||_{Hdot^{1/2}}^2 = sum n |uhat(n)|^2 (conserved by the flow)."""
    n = np.arange(u.k, dtype=float)
    return float(np.sum(n * np.abs(u.coeffs) ** 2))


def norm_l2(u):
    return float(np.sqrt(mass(u)))


def norm_hs(u, s):
    """||u||_{H^s} with Japanese bracket weights <n>^{2s} = (1+n^2)^s."""
    n = np.arange(u.k, dtype=float)
    return float(np.sqrt(np.sum((1.0 + n * n) ** s * np.abs(u.coeffs) ** 2)))


def norm_homog(u, sigma):
    """||u||_{Hdot^sigma}; requires sigma > 0 (the n = 0 mode carries no weight)."""
    if sigma <= 0:
        raise ValueError("homogeneous norms need sigma > 0 on the plus spectrum")
    n = np.arange(u.k, dtype=float)
    w = np.zeros(u.k)
    w[1:] = n[1:] ** (2.0 * sigma)
    return float(np.sqrt(np.sum(w * np.abs(u.coeffs) ** 2)))


def norm_lp(u, p, oversample=LP_OVERSAMPLE):
    """||u||_{L^p} by grid quadrature with the (1/2pi) normalization.

    Exact (trigonometric quadrature) for even integer p with p*K < M; for other
    p it is an oversampled quadrature approximation.
    """
    if p < 1:
        raise ValueError("L^p norms need p >= 1")
    m = next_pow2(max(8, oversample * u.k))
    grid = synthesize(u.coeffs, m)
    return float(np.mean(np.abs(grid) ** p) ** (1.0 / p))


def hamiltonian(u, cutoff=None, oversample=LP_OVERSAMPLE):
    """E_N(u) = ||pi_N u||_{L^4}^4 (the Hamiltonian of the truncated flow)."""
    v = u if cutoff is None else sharp_truncate(u, cutoff)
    return norm_lp(v, 4, oversample=oversample) ** 4


def block_lp_norms(u, p, ratio=LL_RATIO_DEFAULT, oversample=LP_OVERSAMPLE):
    """[(N, ||P_N u||_{L^p})] over the dyadic blocks covering the spectrum."""
    out = []
    for block in blocks_covering(u.k - 1):
        pn = lp_project(u, block, "block", ratio=ratio)
        out.append((block, norm_lp(pn, p, oversample=oversample)))
    return out


def norm_besov(u, sigma, p, q, oversample=LP_OVERSAMPLE):
    """||u||_{B^sigma_{p,q}} = || N^sigma ||P_N u||_{L^p} ||_{l^q over dyadic N}."""
    if p < 1:
        raise ValueError("Besov norms need p >= 1")
    if not (q == np.inf or q >= 1):
        raise ValueError("Besov norms need q in {finite >= 1, inf}")
    vals = np.array(
        [n ** sigma * v for n, v in block_lp_norms(u, p, oversample=oversample)]
    )
    if q == np.inf:
        return float(np.max(vals)) if vals.size else 0.0
    return float(np.sum(vals ** q) ** (1.0 / q))


def random_spectrum(k, rng, scale=1.0):
    """Test helper: iid complex Gaussian coefficients, unit variance * scale."""
    z = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return PlusSpectrum(scale * z / np.sqrt(2.0))
