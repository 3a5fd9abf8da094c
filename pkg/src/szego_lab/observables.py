"""Multiplier forms and scalar observables of the measure-transport analysis.

The transported Gaussian density along the truncated flow is controlled by the
quadrilinear form Q_{pi_N} with the four-frequency multiplier

    Psi_s(n) = <n1>^{2s} - <n2>^{2s} + <n3>^{2s} - <n4>^{2s},

while the localized Hdot^1 energy ||P_N u||^2 evolves under the analogous Q_N
with Psi_N(n) = n1^2 phi_N(n1)^2 - ... .  F_N and G_N are the normalized first
and second time derivatives of that energy at t = 0; their ensemble statistics
(variance decay N^{2s-2}, almost-sure limit 8(4s-3) I_s ||u0||_{L^2}^2) are the
desk-scale fingerprints of the quasi-invariance / singularity transition.  Each
fast path below has an independent constrained-sum oracle next to it.
"""

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, dblquad, quad

from .bump import PLATEAU, SUPPORT, block_energy_profile, lp_symbol
from .flow import evolve
from .spectrum import (
    PlusSpectrum,
    analyze,
    cubic_szego_term,
    grid_size,
    lp_project,
    next_pow2,
    norm_hs,
    sharp_truncate,
    synthesize,
)


def bracket_weight(n, s):
    """<n>^{2s} = (1 + n^2)^s, vectorized."""
    n = np.asarray(n, dtype=float)
    return (1.0 + n * n) ** s


def psi_s(tup, s):
    """Psi_s(n1,n2,n3,n4); antisymmetric under (n1,n2,n3,n4)->(n2,n1,n4,n3)."""
    n1, n2, n3, n4 = (np.asarray(t, dtype=float) for t in tup)
    w = lambda n: (1.0 + n * n) ** s
    return w(n1) - w(n2) + w(n3) - w(n4)


def block_energy_symbol(n, block):
    """n^2 phi_N(n)^2, the localized Hdot^1 weight entering Psi_N."""
    n = np.asarray(n, dtype=float)
    return n * n * lp_symbol(n, block) ** 2


def psi_n(tup, block):
    """Psi_N(n1,n2,n3,n4); zero when any entry is negative."""
    arrs = [np.asarray(t) for t in tup]
    vals = [np.where(a >= 0, block_energy_symbol(np.abs(a), block), 0.0) for a in arrs]
    ok = np.ones_like(np.asarray(vals[0]), dtype=bool)
    for a in arrs:
        ok = ok & (np.asarray(a) >= 0)
    out = np.where(ok, vals[0] - vals[1] + vals[2] - vals[3], 0.0)
    return out if out.ndim else float(out)


def localized_h1(u, block):
    """||P_N u||_{Hdot^1}^2 = sum n^2 phi_N(n)^2 |uhat(n)|^2."""
    n = np.arange(u.k, dtype=float)
    return float(np.sum(block_energy_symbol(n, block) * np.abs(u.coeffs) ** 2))


# ---------------------------------------------------------------------------
# Q_{pi_N}: the H^s transport form
# ---------------------------------------------------------------------------

def q_pi(u, s, cutoff):
    """Q_{pi_N}(u) = 2 Im < pi_N Pi(|pi_N u|^2 pi_N u), <D>^{2s} pi_N u >.

    This is d/dt ||Phi_{t,N} u||_{H^s}^2 at t = 0 and the integrand of the
    transported-density exponent.
    """
    v = sharp_truncate(u, cutoff)
    w = cubic_szego_term(v).coeffs[: v.k]
    weights = bracket_weight(np.arange(v.k), s)
    return 2.0 * float(np.imag(np.sum(w * weights * np.conj(v.coeffs))))


def q_pi_oracle(u, s, cutoff):
    """Direct constrained quadruple sum (i/2) sum Psi_s(n) uhat...; O(N^3)."""
    c = u.padded(cutoff) if u.k < cutoff else u.coeffs[:cutoff]
    n = np.arange(cutoff)
    n1, n2, n3 = np.meshgrid(n, n, n, indexing="ij")
    n4 = n1 - n2 + n3
    ok = (n4 >= 0) & (n4 < cutoff)
    n1, n2, n3, n4 = (a[ok] for a in (n1, n2, n3, n4))
    psi = psi_s((n1, n2, n3, n4), s)
    z = c[n1] * np.conj(c[n2]) * c[n3] * np.conj(c[n4])
    total = 0.5j * np.sum(psi * z)
    return float(total.real)


# ---------------------------------------------------------------------------
# Q_N: the localized-energy form
# ---------------------------------------------------------------------------

def q_n_multilinear(f1, f2, f3, f4, block, padding_factor=4):
    """Q_N(f1,f2,f3,f4) with slots 2 and 4 conjugated.

    Psi_N splits into four single-variable symbols n^2 phi_N(n)^2, so each term
    is one weighted slot integrated against the plain product of the others;
    all products are evaluated alias-free on a shared padded grid.
    """
    fs = (f1, f2, f3, f4)
    span = max(f1.k + f3.k, f2.k + f4.k)
    m = max(next_pow2(span), grid_size(max(f.k for f in fs), padding_factor))
    grids = [synthesize(f.coeffs, m) for f in fs]
    weighted = [
        synthesize(f.coeffs * block_energy_symbol(np.arange(f.k), block), m)
        for f in fs
    ]
    prods = np.empty(4, dtype=np.complex128)
    for j in range(4):
        factors = [weighted[i] if i == j else grids[i] for i in range(4)]
        prods[j] = np.mean(factors[0] * np.conj(factors[1]) * factors[2]
                           * np.conj(factors[3]))
    return complex(0.5j * (prods[0] - prods[1] + prods[2] - prods[3]))


def q_n(u, block, padding_factor=4):
    """Diagonal Q_N(u,u,u,u) = d/dt ||P_N Phi_t(u)||_{Hdot^1}^2 at t = 0; real."""
    return q_n_multilinear(u, u, u, u, block, padding_factor).real


def q_n_oracle(f1, f2, f3, f4, block):
    """Direct constrained quadruple sum for Q_N; O(K^3) test oracle."""
    ks = [f.k for f in (f1, f2, f3, f4)]
    n1, n2, n3 = np.meshgrid(
        np.arange(ks[0]), np.arange(ks[1]), np.arange(ks[2]), indexing="ij"
    )
    n4 = n1 - n2 + n3
    ok = (n4 >= 0) & (n4 < ks[3])
    n1, n2, n3, n4 = (a[ok] for a in (n1, n2, n3, n4))
    psi = psi_n((n1, n2, n3, n4), block)
    z = (
        f1.coeffs[n1]
        * np.conj(f2.coeffs[n2])
        * f3.coeffs[n3]
        * np.conj(f4.coeffs[n4])
    )
    return complex(0.5j * np.sum(psi * z))


# ---------------------------------------------------------------------------
# F_N and G_N
# ---------------------------------------------------------------------------

def f_n(u0, s, block, padding_factor=4):
    """F_N(u0) = N^{4s-4} Q_N(u0): normalized first derivative at t = 0."""
    return float(block) ** (4.0 * s - 4.0) * q_n(u0, block, padding_factor)


def g_n(u0, s, block, padding_factor=4):
    """G_N(u0) = N^{4s-4} d^2/dt^2 ||P_N u(t)||_{Hdot^1}^2 at t = 0.

    Chain rule on the quartic form: slots 1/3 and 2/4 pair up, so
    d/dt Q_N = 2 Q_N(v,u,u,u) + 2 Q_N(u,v,u,u) with v = -i Pi(|u|^2 u).
    """
    v = PlusSpectrum(-1j * cubic_szego_term(u0, padding_factor).coeffs)
    total = 2.0 * q_n_multilinear(v, u0, u0, u0, block, padding_factor) \
        + 2.0 * q_n_multilinear(u0, v, u0, u0, block, padding_factor)
    return float(block) ** (4.0 * s - 4.0) * total.real


def _sextic_symmetrization_table(k, block):
    """Admissible sextic tuples (zero alternating sum) and their f_N values.

    f_N is the average of Psi_N(n_{s1}-n_{s2}+n_{s3}, n_{s4}, n_{s5}, n_{s6})
    over the 72 permutations preserving or swapping the holomorphic slots
    {1,3,5} and the conjugated slots {2,4,6}.
    """
    rng = np.arange(k)
    n1, n2, n3, n4, n5 = np.meshgrid(rng, rng, rng, rng, rng, indexing="ij")
    n6 = n1 - n2 + n3 - n4 + n5
    ok = (n6 >= 0) & (n6 < k)
    tup = np.stack([a[ok] for a in (n1, n2, n3, n4, n5, n6)])  # (6, T)

    top = int(np.ceil(SUPPORT * block)) + 1
    h_tab = block_energy_symbol(np.arange(top + 1), block)

    def h_of(m):
        val = np.where((m >= 0) & (m <= top), h_tab[np.clip(m, 0, top)], 0.0)
        return val

    perms = []
    odd, even = (0, 2, 4), (1, 3, 5)
    for po in itertools.permutations(odd):
        for pe in itertools.permutations(even):
            sigma = np.empty(6, dtype=int)
            sigma[[0, 2, 4]] = po
            sigma[[1, 3, 5]] = pe
            perms.append(sigma.copy())
            sigma[[0, 2, 4]] = pe
            sigma[[1, 3, 5]] = po
            perms.append(sigma.copy())

    f_vals = np.zeros(tup.shape[1])
    for sigma in perms:
        a = tup[sigma[0]] - tup[sigma[1]] + tup[sigma[2]]
        b, c, d = tup[sigma[3]], tup[sigma[4]], tup[sigma[5]]
        valid = a >= 0
        f_vals += np.where(valid, h_of(a) - h_of(b) + h_of(c) - h_of(d), 0.0)
    f_vals /= len(perms)
    return tup, f_vals


def g_n_oracle(u0, s, block):
    """Sextic direct sum 2 sum f_N(n) prod uhat; O(K^5), for K <= ~12."""
    tup, f_vals = _sextic_symmetrization_table(u0.k, block)
    c = u0.coeffs
    z = (
        c[tup[0]] * np.conj(c[tup[1]]) * c[tup[2]]
        * np.conj(c[tup[3]]) * c[tup[4]] * np.conj(c[tup[5]])
    )
    total = 2.0 * np.sum(f_vals * z)
    return float(block) ** (4.0 * s - 4.0) * total.real


def energy_derivative_fd(u0, block, cfg, h=1e-4, order=1):
    """Finite-difference d^k/dt^k ||P_N Phi_t(u0)||_{Hdot^1}^2 at t = 0, k = 1, 2."""
    em = localized_h1(evolve(u0, -h, cfg).states[-1], block)
    ep = localized_h1(evolve(u0, +h, cfg).states[-1], block)
    if order == 1:
        return (ep - em) / (2.0 * h)
    e0 = localized_h1(u0, block)
    return (ep - 2.0 * e0 + em) / (h * h)


# ---------------------------------------------------------------------------
# the kernel A_N(n) and the constant I_s
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_X = 0.5 * (_GL_NODES + 1.0)  # nodes on (0, 1)
_GL_W = 0.5 * _GL_WEIGHTS


def a_n_kernel(n, s, block, include_tail=True, bound_factor=2.0 * SUPPORT):
    """A_N(n) = N^{4s-4} sum_{n1 > n2 > n}
        [Psi_N(n1-n2+n, n1, n2, n) + Psi_N(n1-n+n2, n1, n, n2)]
        / (<n1>^{2s} <n2>^{2s}).

    The two multipliers collapse to h(n1-n2+n) + h(n1+n2-n) - 2 h(n1) with
    h(m) = m^2 phi_N(m)^2, making the double sum three correlation sums.  The
    finite part runs to n1 <= ceil(bound_factor * N); beyond it only the
    h(n1-n2+n) strip survives and its exact value is added as a separable
    quadrature tail (it decays like (n1/N)^{-4s}, too slowly to ignore).
    Converges to (4s-3) I_s as N grows.
    """
    big_n = block
    ell = int(np.ceil(bound_factor * big_n)) + n
    top = int(np.ceil(SUPPORT * big_n)) + 1
    h_tab = block_energy_symbol(np.arange(top + 1), big_n)
    idx = np.arange(ell + 1, dtype=float)
    w = (1.0 + idx * idx) ** (-s)

    # T3 = sum h(n1) w(n1) (W(n1-1) - W(n)) over n1 in supp h
    cum = np.cumsum(w)
    t3 = 0.0
    lo = max(n + 2, 1)
    for n1 in range(lo, min(top, ell) + 1):
        if h_tab[n1] != 0.0:
            t3 += h_tab[n1] * w[n1] * (cum[n1 - 1] - cum[n])

    # correlation/convolution of the weight slice w[n+1 .. ell]
    a = w[n + 1 :]
    psize = next_pow2(2 * a.size + 1)
    fa = np.fft.rfft(a, psize)
    corr = np.fft.irfft(fa * np.conj(fa), psize)  # corr[d] = sum a_j a_{j+d}
    conv = np.fft.irfft(fa * fa, psize)           # conv[q] = sum_{i+j=q} a_i a_j

    t1 = 0.0
    t2 = 0.0
    for m in range(n + 1, top + 1):
        hm = h_tab[m]
        if hm == 0.0:
            continue
        d = m - n
        if 1 <= d < a.size:
            t1 += hm * corr[d]
        sig = m + n  # n1 + n2 = sig with n < n2 < n1 <= ell
        q = sig - 2 * (n + 1)
        if 0 <= q < 2 * a.size - 1:
            full = conv[q]
            diag = w[sig // 2] ** 2 if sig % 2 == 0 and n < sig // 2 <= ell else 0.0
            t2 += hm * 0.5 * (full - diag)

    total = t1 + t2 - 2.0 * t3

    if include_tail:
        ms = np.arange(n + 1, top + 1, dtype=float)
        hv = h_tab[n + 1 : top + 1]
        keep = hv != 0.0
        if np.any(keep):
            ms, hv = ms[keep], hv[keep]
            edge = ell + 0.5
            d = ms - n
            # sum_{n1 > ell} <n1>^{-2s} <n1 - d>^{-2s}
            # = int_{edge}^inf (1+x^2)^{-s} (1+(x-d)^2)^{-s} dx (+ O(f') midpoint
            # correction, negligible); mapped by x = edge/t^2, whose Jacobian
            # kills the weak endpoint singularity for Gauss-Legendre
            t = _GL_X[None, :]
            x = edge / (t * t)
            w1 = (1.0 + x * x) ** (-s)
            w2 = (1.0 + (x - d[:, None]) ** 2) ** (-s)
            integ = np.sum(_GL_W[None, :] * w1 * w2 * 2.0 * edge / t ** 3,
                           axis=1)
            # midpoint Euler-Maclaurin: sum_{k>ell} f(k) = int_edge f + f'(edge)/24
            dd = d
            fe = (1.0 + edge * edge) ** (-s) * (1.0 + (edge - dd) ** 2) ** (-s)
            fp = fe * (-2.0 * s) * (edge / (1.0 + edge * edge)
                                    + (edge - dd) / (1.0 + (edge - dd) ** 2))
            total += float(np.sum(hv * (integ + fp / 24.0)))

    return float(big_n) ** (4.0 * s - 4.0) * total


def a_n_kernel_oracle(n, s, block, bound_factor=2.0 * SUPPORT):
    """Direct double loop over the spec summation bounds (no tail); test oracle."""
    big_n = block
    ell = int(np.ceil(bound_factor * big_n)) + n
    total = 0.0
    for n1 in range(n + 2, ell + 1):
        for n2 in range(n + 1, n1):
            p1 = psi_n((n1 - n2 + n, n1, n2, n), big_n)
            p2 = psi_n((n1 - n + n2, n1, n, n2), big_n)
            if p1 != 0.0 or p2 != 0.0:
                total += (p1 + p2) / (
                    bracket_weight(n1, s) * bracket_weight(n2, s)
                )
    return float(big_n) ** (4.0 * s - 4.0) * total


def _phi_scalar(x):
    """Scalar fast path of the cutoff, for quadrature integrands."""
    t = (SUPPORT - abs(x)) / (SUPPORT - PLATEAU)
    if t >= 1.0:
        return 1.0
    if t <= 0.0:
        return 0.0
    a = math.exp(-1.0 / t)
    return a / (a + math.exp(-1.0 / (1.0 - t)))


def _h_scalar(x):
    """Scalar block energy profile x^2 (phi(x) - phi(2x))^2."""
    b = _phi_scalar(x) - _phi_scalar(2.0 * x)
    return x * x * b * b


def _pow_diff(c, a1, a0, r):
    """c (a1^r - a0^r)/r for a1 >= a0 >= 0, with the r -> 0 limit c log(a1/a0)."""
    if c == 0.0 or a1 == a0:
        return 0.0
    if r == 0.0:
        return c * np.log(a1 / a0)
    if a0 == 0.0:
        return c * a1 ** r / r
    return c * a0 ** r * np.expm1(r * np.log(a1 / a0)) / r


def _tent_moment(y, p):
    """int_0^2 min(v, 2-v) (1 - y + v y)^p dv in closed form, 0 <= y <= 1.

    Exact inner integral of the triple representation of I_s; the
    antiderivatives are assembled from stabilized power differences so the
    degenerate exponents p = -1 (s = 3/4) and p = -2 (s = 1/2) stay finite.
    """
    if y == 0.0:
        return 1.0  # weight has unit mass
    c = 1.0 - y
    a0, a1, a2 = c, c + y, c + 2.0 * y  # A(v) = c + v y at v = 0, 1, 2

    def int_ap(lo, hi):  # int A^p dv over [vlo, vhi] with A endpoints lo, hi
        return _pow_diff(1.0, hi, lo, p + 1.0) / y

    def int_vap(lo, hi):  # int v A^p dv, v = (A - c)/y
        return (_pow_diff(1.0, hi, lo, p + 2.0)
                - _pow_diff(c, hi, lo, p + 1.0)) / (y * y)

    return int_vap(a0, a1) + 2.0 * int_ap(a1, a2) - int_vap(a1, a2)


def _u_bracket(u, q):
    """(1+u)^q - 2 + (1-u)^q, series-protected against cancellation near 0."""
    u = np.asarray(u, dtype=float)
    small = u < 1e-3
    out = np.empty_like(u)
    ub = u[~small]
    out[~small] = (1.0 + ub) ** q - 2.0 + (1.0 - ub) ** q
    us = u[small]
    c2 = q * (q - 1.0) / 2.0
    c4 = c2 * (q - 2.0) * (q - 3.0) / 12.0
    c6 = c4 * (q - 4.0) * (q - 5.0) / 30.0
    out[small] = 2.0 * (c2 * us ** 2 + c4 * us ** 4 + c6 * us ** 6)
    return out


@dataclass(frozen=True)
class IsQuadrature:
    s: float
    value: float                # I_s from the product (triple-integral) form
    error_estimate: float
    scaled_triple: float        # (4s-3) I_s via each representation
    scaled_double: float
    scaled_oned: float
    residual: float             # max pairwise deviation / natural scale

    @property
    def converged(self):
        return self.residual <= 1e-6


def i_s_quadrature(s, epsrel=1e-11):
    """The constant I_s by three independent quadrature routes.

    (a) product form  I_s = (4s-2) (int_0^inf h(x) x^{1-4s} dx)
                          * (int_{[0,1]^3} y^{2-2s} (1-y+(sig+tau)y)^{4s-4}),
    (b) double integral int_{x>=y>=0} [h(x+y)-2h(x)+h(x-y)] x^{-2s} y^{-2s}
        = (4s-3) I_s,
    (c) 1-d form (int h(x) x^{1-4s} dx) * int_0^1 u^{-2s}[(1+u)^{4s-2}-2+(1-u)^{4s-2}]
        = (4s-3) I_s,
    with h the unit-scale block energy profile.  At s = 3/4 the common value
    (4s-3) I_s vanishes identically, so the agreement residual is measured
    against the natural scale I_s instead of the zero common value.
    """
    if not 0.5 < s:
        raise ValueError("I_s needs s > 1/2")
    q = 4.0 * s - 2.0
    h = _h_scalar

    with warnings.catch_warnings():
        # the u- and y-integrands have algebraic endpoint behavior; the
        # cross-route agreement below certifies the extrapolated values
        warnings.simplefilter("ignore", IntegrationWarning)

        j_x, j_x_err = quad(lambda x: h(x) * x ** (1.0 - 4.0 * s),
                            0.5, SUPPORT, epsabs=0.0, epsrel=epsrel, limit=200)

        j_3, j_3_err = quad(lambda y: y ** (2.0 - 2.0 * s) * _tent_moment(y, q - 2.0),
                            0.0, 1.0, epsabs=0.0, epsrel=1e-10, limit=200)
        value = (4.0 * s - 2.0) * j_x * j_3
        err = abs(4.0 * s - 2.0) * (abs(j_x_err * j_3) + abs(j_x * j_3_err))

        # (c) 1-d u-integral
        u_int, _ = quad(lambda u: u ** (-2.0 * s) * float(_u_bracket(u, q)),
                        0.0, 1.0, epsabs=0.0, epsrel=epsrel, limit=200)
        scaled_oned = j_x * u_int

        # (b) double integral: wedge up to x = 2*SUPPORT, then the far x strip
        # where only h(x - y) survives.  The wedge starts where x + y can
        # first reach supp h, i.e. x = (5/8)/2.
        x_split = 2.0 * SUPPORT

        def wedge(yy, xx):
            if yy <= 0.0:
                return 0.0
            return (
                (h(xx + yy) - 2.0 * h(xx) + h(xx - yy))
                * xx ** (-2.0 * s)
                * yy ** (-2.0 * s)
            )

        near, near_err = dblquad(wedge, 0.3, x_split, 0.0, lambda xx: xx,
                                 epsabs=1e-10, epsrel=1e-8)

        def strip_weight(m):
            val, _ = quad(lambda x: x ** (-2.0 * s) * (x - m) ** (-2.0 * s),
                          x_split, np.inf, epsabs=0.0, epsrel=1e-10, limit=200)
            return val

        far, _ = quad(lambda m: h(m) * strip_weight(m), 0.5, SUPPORT,
                      epsabs=0.0, epsrel=1e-9, limit=200)
        scaled_double = near + far

    scaled_triple = (4.0 * s - 3.0) * value
    vals = np.array([scaled_triple, scaled_double, scaled_oned])
    spread = float(np.max(vals) - np.min(vals))
    scale = max(float(np.max(np.abs(vals))), 1e-3 * abs(value))
    return IsQuadrature(
        s=s,
        value=value,
        error_estimate=err,
        scaled_triple=scaled_triple,
        scaled_double=scaled_double,
        scaled_oned=scaled_oned,
        residual=spread / scale,
    )


# ---------------------------------------------------------------------------
# transported density and the localized-energy profile h_N
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityValue:
    value: float          # f_{t,N}(u) = exp(log_formula)
    log_formula: float    # ||u||_{H^s}^2 - ||Phi_{-t,N} u||_{H^s}^2
    log_integral: float   # - int_0^{-t} Q_{pi_N}(Phi_tau u) dtau, cross-check


def density_f_tn(u0, t, s, cfg):
    """Radon-Nikodym density of (Phi_{t,N})_# mu_{s,N} at u0, two routes.

    The formula route uses the backward endpoint; the integral route
    accumulates Q_{pi_N} along the same backward trajectory with the
    integrator's own stages.  Overflow is guarded by returning the
    log-density alongside the value.
    """
    if cfg.q_exponent not in (0.0, s):
        raise ValueError("cfg.q_exponent clashes with the requested s")
    aug = cfg if cfg.q_exponent == s else _with_q(cfg, s)
    traj = evolve(u0, -t, aug)
    log_formula = norm_hs(u0, s) ** 2 - norm_hs(traj.states[-1], s) ** 2
    log_integral = -float(traj.q_integral[-1])
    with np.errstate(over="ignore"):
        value = float(np.exp(log_formula))
    return DensityValue(value=value, log_formula=log_formula,
                        log_integral=log_integral)


def _with_q(cfg, s):
    from dataclasses import replace

    return replace(cfg, q_exponent=s)


def h_n_between(u_start, u_end, s, block):
    """(||P_N u_end||_{Hdot^1}^2 - ||P_N u_start||_{Hdot^1}^2) / N^{4-4s}."""
    return (localized_h1(u_end, block) - localized_h1(u_start, block)) \
        / float(block) ** (4.0 - 4.0 * s)


def h_n_profile(u0, t, s, block, cfg):
    """h_N(t) along the Galerkin flow of u0 at cfg.cutoff."""
    traj = evolve(u0, t, cfg)
    return h_n_between(u0, traj.states[-1], s, block)


def taylor_residual(u0, t, s, block, cfg, padding_factor=4):
    """h_N(t) - t F_N(u0) - (t^2/2) G_N(u0) and its ingredients."""
    h_val = h_n_profile(u0, t, s, block, cfg)
    f_val = f_n(u0, s, block, padding_factor)
    g_val = g_n(u0, s, block, padding_factor)
    return h_val - t * f_val - 0.5 * t * t * g_val, h_val, f_val, g_val
