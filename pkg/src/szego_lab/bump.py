"""Smooth frequency cutoff and the dyadic symbols built from it.

Everything frequency-localized in this package is derived from one concrete
C-infinity bump

    phi(x) = theta((8/5 - |x|) / (8/5 - 5/4)),    theta(t) = S(t) / (S(t) + S(1-t)),
    S(t)   = exp(-1/t) for t > 0, else 0,

so phi == 1 on [-5/4, 5/4], phi == 0 outside (-8/5, 8/5), phi is even, takes
values in [0, 1] and is strictly decreasing on (5/4, 8/5).  The dyadic block
symbols are

    phi_1(xi) = phi(|xi|),        phi_N(xi) = phi(xi/N) - phi(2 xi/N)   (N = 2^j, j >= 1),

which form a partition of unity over dyadic N.  Every derived constant in this
package (the block energy weight, the quadrature constant computed in
``observables.i_s_quadrature``, the four-frequency multipliers) depends on this
particular choice, so it is fixed here once and hashed into run manifests.
"""

import hashlib

import numpy as np

PLATEAU = 1.25  # 5/4: phi == 1 on [-PLATEAU, PLATEAU]
SUPPORT = 1.6   # 8/5: phi == 0 outside (-SUPPORT, SUPPORT)

# dyadic relation conventions: M << N means M < LL_RATIO * N.  The strict
# 2^-20 of the notation section makes P_{<<N} empty at desk scale, so the
# working default is 2^-5; experiments record which ratio they used.
LL_RATIO_DEFAULT = 2.0 ** -5
LL_RATIO_STRICT = 2.0 ** -20


def _smooth_exp(t):
    """S(t) = exp(-1/t) for t > 0 and 0 otherwise, vectorized."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def bump(x):
    """The cutoff phi: 1 on [-5/4, 5/4], 0 outside (-8/5, 8/5), C-infinity."""
    x = np.asarray(x, dtype=float)
    t = (SUPPORT - np.abs(x)) / (SUPPORT - PLATEAU)
    a = _smooth_exp(t)
    b = _smooth_exp(1.0 - t)
    with np.errstate(invalid="ignore"):
        val = np.where(t >= 1.0, 1.0, np.where(t <= 0.0, 0.0, a / (a + b)))
    return val if val.ndim else float(val)


def block_profile(x):
    """Unit-scale profile of the dyadic blocks: phi(x) - phi(2x).

    phi_N(xi) = block_profile(xi / N) for every dyadic N >= 2.  Supported on
    5/8 < |x| < 8/5 and equal to 1 on 4/5 <= |x| <= 5/4.
    """
    return np.asarray(bump(x)) - np.asarray(bump(2.0 * np.asarray(x, dtype=float)))


def block_energy_profile(x):
    """h(x) = x^2 * block_profile(x)^2, the unit-scale |d/dx|^2 block weight.

    This is the profile whose second differences drive the N -> infinity limit
    of the localized-energy kernel; the quadrature constant I_s integrates it.
    """
    x = np.asarray(x, dtype=float)
    return x * x * block_profile(x) ** 2


def lp_symbol(xi, block):
    """Littlewood-Paley symbol phi_N at dyadic ``block`` (1, 2, 4, ...)."""
    if block < 1 or block & (block - 1):
        raise ValueError(f"block must be a dyadic integer >= 1, got {block}")
    xi = np.asarray(xi, dtype=float)
    if block == 1:
        return np.asarray(bump(np.abs(xi)))
    return np.asarray(block_profile(xi / block))


def blocks_covering(max_freq):
    """Dyadic blocks whose symbol is not identically zero on [0, max_freq]."""
    out = [1]
    n = 2
    while 0.625 * n <= max_freq:  # phi_N lives on (5/8 N, 8/5 N)
        out.append(n)
        n *= 2
    return out


_MODES = ("block", "ll", "lesssim", "sim", "approx", "gtrsim", "gg")
_MODE_ALIASES = {
    "<<": "ll", "≪": "ll",
    "<~": "lesssim", "≲": "lesssim",
    "~": "sim", "∼": "sim",
    "~~": "approx", "≈": "approx",
    ">~": "gtrsim", "≳": "gtrsim",
    ">>": "gg", "≫": "gg",
}


def canonical_mode(mode):
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in _MODES:
        raise ValueError(f"unknown projector mode {mode!r}; expected one of {_MODES}")
    return mode


def block_relation(m, n, mode, ratio=LL_RATIO_DEFAULT):
    """Whether dyadic block m stands in the given relation to dyadic n.

    m << n  <=>  m < ratio*n;   m >~ n  <=>  m >= ratio*n;   m ~ n  <=>  both ways;
    m ~~ n  <=>  n/4 <= m <= 4n (fixed, ratio-independent);  >> and <~ are the
    complements of << and >>.
    """
    mode = canonical_mode(mode)
    if mode == "ll":
        return m < ratio * n
    if mode == "gtrsim":
        return m >= ratio * n
    if mode == "sim":
        return m >= ratio * n and n >= ratio * m
    if mode == "approx":
        return n / 4 <= m <= 4 * n
    if mode == "gg":
        return n < ratio * m
    if mode == "lesssim":
        return not (n < ratio * m)
    raise AssertionError(mode)


def mode_symbol(xi, block, mode, ratio=LL_RATIO_DEFAULT, max_freq=None):
    """Multiplier for P_N (mode='block') or the derived P_{<<N}, ... operators.

    The derived symbols are sums of phi_M over the dyadic M in the requested
    relation to ``block``; M runs over the blocks covering [0, max_freq]
    (defaulting to the largest |xi| supplied).
    """
    mode = canonical_mode(mode)
    xi = np.asarray(xi, dtype=float)
    if mode == "block":
        return lp_symbol(xi, block)
    if max_freq is None:
        max_freq = float(np.max(np.abs(xi))) if xi.size else 0.0
    total = np.zeros_like(xi)
    for m in blocks_covering(max_freq):
        if block_relation(m, block, mode, ratio):
            total += lp_symbol(xi, m)
    return total


def bump_definition_hash():
    """Hash pinning the concrete cutoff, embedded in run manifests."""
    grid = np.linspace(0.0, 2.0, 4097)
    payload = (
        f"plateau={PLATEAU!r};support={SUPPORT!r};"
        f"theta=exp(-1/t)/(exp(-1/t)+exp(-1/(1-t)))".encode()
        + np.asarray(bump(grid), dtype=np.float64).tobytes()
    )
    return hashlib.sha256(payload).hexdigest()
