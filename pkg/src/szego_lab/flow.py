"""Time integration of the truncated cubic Szego flow and its paralinear twin.

The truncated flow is the Hamiltonian ODE

    i du/dt = pi_N(Pi(|u|^2 u)),        u(0) = u_0 in pi_N(L^2_+),

whose right-hand side is evaluated exactly through dealiased grid products, so
the integrated system is the genuine Galerkin ODE and mass, momentum and the
L^4 Hamiltonian are conserved up to time-discretization error only.  Two
steppers are provided: classical fixed-step RK4 and adaptive Dormand-Prince
5(4); there is no stiffness to worry about since the equation has no linear
dispersive term.  Auxiliary quantities that must be accumulated along the flow
(the pointwise phase integral Theta(t,x) = int_0^t |P_{<<N} u|^2 dtau feeding
the explicit profile, and the H^s transport integrand Q_{pi_N}) are integrated
as extra state with the same Runge-Kutta stages, keeping their accuracy at
integrator order.
"""

from dataclasses import dataclass, field

import numpy as np

from .bump import LL_RATIO_DEFAULT, blocks_covering, lp_symbol, mode_symbol
from .spectrum import (
    GridSignal,
    PlusSpectrum,
    analyze,
    grid_size,
    hamiltonian,
    lp_project,
    mass,
    momentum,
    synthesize,
)


class FlowError(RuntimeError):
    """Raised on step-size underflow of the adaptive controller."""


@dataclass(frozen=True)
class FlowConfig:
    cutoff: int
    integrator: str = "dp54_adaptive"  # or "rk4_fixed"
    dt: float = 0.0                    # fixed-step size; 0 -> default heuristic
    rtol: float = 1e-10
    atol: float = 1e-12
    padding_factor: int = 4
    track_phase: bool = False
    phase_block: int = 0               # N of P_{<<N} in the phase integrand
    q_exponent: float = 0.0            # s: accumulate int Q_{pi_cutoff} if > 0
    ll_ratio: float = LL_RATIO_DEFAULT
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if self.integrator not in ("rk4_fixed", "dp54_adaptive"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.dt < 0 or self.rtol <= 0 or self.atol <= 0:
            raise ValueError("dt must be >= 0 and rtol/atol > 0")
        if self.track_phase and self.phase_block < 1:
            raise ValueError("track_phase needs phase_block (the N of P_{<<N})")


@dataclass
class Trajectory:
    """Output states of one run.  times[0] = 0 and states[0] is the datum;
    for backward runs (t < 0) the times decrease in integration order."""

    times: np.ndarray
    states: list
    config: FlowConfig
    grid_m: int
    phase: list = None          # GridSignal Theta(t, .) per output time
    q_integral: np.ndarray = None  # int_0^t Q_{pi_N}(u(tau)) dtau per output time
    conserved: dict = field(default_factory=dict)
    steps: int = 0
    rhs_evals: int = 0

    def state_at(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} not recorded on this trajectory")
        return self.states[i]

    def index_of(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} not recorded on this trajectory")
        return i

    def dump(self, path_prefix):
        """CSV rows (t, n, Re uhat, Im uhat) plus a JSON sidecar."""
        import json

        rows = ["t,n,re,im"]
        for t, st in zip(self.times, self.states):
            for n, c in enumerate(st.coeffs):
                rows.append(f"{t:.17g},{n},{c.real:.17g},{c.imag:.17g}")
        with open(f"{path_prefix}.csv", "w") as fh:
            fh.write("\n".join(rows) + "\n")
        side = {
            "config": {
                "cutoff": self.config.cutoff,
                "integrator": self.config.integrator,
                "dt": self.config.dt,
                "rtol": self.config.rtol,
                "atol": self.config.atol,
                "padding_factor": self.config.padding_factor,
                "ll_ratio": self.config.ll_ratio,
            },
            "conserved_log": {k: list(map(float, v)) for k, v in self.conserved.items()},
            "times": [float(t) for t in self.times],
        }
        with open(f"{path_prefix}.json", "w") as fh:
            json.dump(side, fh, indent=1, sort_keys=True)


def rhs_truncated(u, cutoff, padding_factor=4):
    """du/dt = -i pi_N(Pi(|u|^2 u)) for the truncated flow, exact."""
    if u.k > cutoff and np.any(u.coeffs[cutoff:] != 0):
        raise ValueError("datum has support at or above the cutoff")
    c = u.padded(cutoff) if u.k < cutoff else u.coeffs[:cutoff]
    m = grid_size(cutoff, padding_factor)
    grid = synthesize(c, m)
    w = (grid * np.conj(grid)) * grid
    return PlusSpectrum(-1j * analyze(w, cutoff))


def default_dt(u0, padding_factor=4):
    """Fixed-step heuristic dt = 0.1 / (1 + ||u0||_{L^infty, grid}^2)."""
    grid = synthesize(u0.coeffs, grid_size(u0.k, padding_factor))
    return 0.1 / (1.0 + float(np.max(np.abs(grid))) ** 2)


# ---------------------------------------------------------------------------
# Runge-Kutta cores (complex state vectors)
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = _DP_B5 - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


class _Stepper:
    def __init__(self, rhs, cfg):
        self.rhs = rhs
        self.cfg = cfg
        self.steps = 0
        self.evals = 0

    def _f(self, y):
        self.evals += 1
        return self.rhs(y)

    def run_segment(self, y, t0, t1):
        raise NotImplementedError


class _RK4(_Stepper):
    def __init__(self, rhs, cfg, dt):
        super().__init__(rhs, cfg)
        self.dt = dt

    def run_segment(self, y, t0, t1):
        span = t1 - t0
        if span == 0.0:
            return y
        nsteps = max(1, int(np.ceil(abs(span) / self.dt)))
        h = span / nsteps
        for _ in range(nsteps):
            k1 = self._f(y)
            k2 = self._f(y + 0.5 * h * k1)
            k3 = self._f(y + 0.5 * h * k2)
            k4 = self._f(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            self.steps += 1
        return y


class _DP54(_Stepper):
    """Dormand-Prince 5(4) with FSAL and standard step-size control."""

    def __init__(self, rhs, cfg):
        super().__init__(rhs, cfg)
        self.h = 0.0
        self.k1 = None

    def _error_norm(self, err, y0, y1):
        scale = self.cfg.atol + self.cfg.rtol * np.maximum(np.abs(y0), np.abs(y1))
        return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))

    def run_segment(self, y, t0, t1):
        span = t1 - t0
        if span == 0.0:
            return y
        direction = 1.0 if span > 0 else -1.0
        if self.h == 0.0 or np.sign(self.h) != direction:
            self.h = direction * min(abs(span), 1e-2)
            self.k1 = None
        t = t0
        hmin = 1e-13 * max(1.0, abs(t1))
        ks = np.empty((7, y.size), dtype=np.complex128)
        while (t1 - t) * direction > 0:
            if self.steps >= self.cfg.max_steps:
                raise FlowError("step budget exhausted")
            h = self.h
            if (t + h - t1) * direction > 0:
                h = t1 - t
            if self.k1 is None:
                self.k1 = self._f(y)
            ks[0] = self.k1
            for i in range(1, 7):
                yi = y + h * (_DP_A[i] @ ks[:i])
                ks[i] = self._f(yi)
            y5 = y + h * (_DP_B5 @ ks)
            # embedded 4th-order difference; ks[6] is f(t+h, y5) (FSAL)
            err = h * (_DP_E @ ks)
            enorm = self._error_norm(err, y, y5)
            if enorm <= 1.0:
                t = t + h
                y = y5
                self.k1 = ks[6].copy()
                self.steps += 1
                factor = 5.0 if enorm == 0.0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
            else:
                factor = max(0.2, 0.9 * enorm ** -0.2)
            self.h = h * factor
            if abs(self.h) < hmin:
                raise FlowError("adaptive step-size underflow (controller blow-up)")
        return y


def _make_rhs(cfg, m, phase_m):
    """RHS over the augmented state [uhat(0..N); Theta grid; Q accumulator]."""
    n = cfg.cutoff
    idx = np.arange(n, dtype=float)
    low_sym = None
    if cfg.track_phase:
        low_sym = mode_symbol(idx, cfg.phase_block, "ll", ratio=cfg.ll_ratio,
                              max_freq=float(n - 1))
    q_weights = None
    if cfg.q_exponent > 0.0:
        q_weights = (1.0 + idx * idx) ** cfg.q_exponent

    def rhs(y):
        u = y[:n]
        grid = synthesize(u, m)
        w_grid = (grid * np.conj(grid)) * grid
        w = analyze(w_grid, n)
        parts = [-1j * w]
        if low_sym is not None:
            low_grid = synthesize(u * low_sym, phase_m)
            parts.append((low_grid * np.conj(low_grid)).astype(np.complex128))
        if q_weights is not None:
            q = 2.0 * float(np.imag(np.sum(w * q_weights * np.conj(u))))
            parts.append(np.array([q], dtype=np.complex128))
        return np.concatenate(parts) if len(parts) > 1 else parts[0]

    return rhs


def evolve(u0, t, cfg, snapshots=None):
    """Integrate the truncated flow from 0 to t (backward when t < 0).

    ``snapshots`` is an optional list of intermediate times (same sign as t) to
    record; the endpoint is always recorded.  Conserved quantities M, P, E_N
    are logged at every output time.
    """
    if u0.k > cfg.cutoff and np.any(u0.coeffs[cfg.cutoff:] != 0):
        raise ValueError("datum has support at or above cfg.cutoff")
    n = cfg.cutoff
    m = grid_size(n, cfg.padding_factor)
    phase_m = m if cfg.track_phase else 0

    out_times = [0.0]
    if snapshots is not None:
        out_times.extend(float(x) for x in snapshots)
    out_times.append(float(t))
    uniq = [out_times[0]]
    for x in sorted(out_times[1:], key=abs):
        if abs(x - uniq[-1]) > 0.0:
            uniq.append(x)
    out_times = uniq
    if any(x * t < 0 for x in out_times):
        raise ValueError("snapshot times must share the sign of t")

    y = u0.padded(n) if u0.k <= n else u0.coeffs[:n].copy()
    if cfg.track_phase:
        y = np.concatenate([y, np.zeros(phase_m, dtype=np.complex128)])
    if cfg.q_exponent > 0.0:
        y = np.concatenate([y, np.zeros(1, dtype=np.complex128)])

    rhs = _make_rhs(cfg, m, phase_m)
    if cfg.integrator == "rk4_fixed":
        dt = cfg.dt if cfg.dt > 0 else default_dt(u0, cfg.padding_factor)
        stepper = _RK4(rhs, cfg, dt)
    else:
        stepper = _DP54(rhs, cfg)

    states, phases, qints = [], [], []

    def record(yv):
        states.append(PlusSpectrum(yv[:n].copy()))
        pos = n
        if cfg.track_phase:
            phases.append(GridSignal(yv[pos : pos + phase_m].copy()))
            pos += phase_m
        if cfg.q_exponent > 0.0:
            qints.append(float(yv[pos].real))

    record(y)
    cur = 0.0
    for target in out_times[1:]:
        y = stepper.run_segment(y, cur, target)
        cur = target
        record(y)

    conserved = {
        "t": np.array(out_times),
        "mass": np.array([mass(s) for s in states]),
        "momentum": np.array([momentum(s) for s in states]),
        "hamiltonian": np.array([hamiltonian(s, cutoff=n) for s in states]),
    }
    return Trajectory(
        times=np.array(out_times),
        states=states,
        config=cfg,
        grid_m=m,
        phase=phases if cfg.track_phase else None,
        q_integral=np.array(qints) if cfg.q_exponent > 0.0 else None,
        conserved=conserved,
        steps=stepper.steps,
        rhs_evals=stepper.evals,
    )


def flow_map(u0, t, cfg):
    """Phi_{t,N}(u0): endpoint state only."""
    return evolve(u0, t, cfg).states[-1]


def reversibility_check(u0, t, cfg):
    """||Phi_{-t,N}(Phi_{t,N}(u0)) - u0||_{L^2}; pure integrator diagnostics."""
    fwd = flow_map(u0, t, cfg)
    back = flow_map(fwd, -t, cfg)
    diff = back.padded(max(back.k, u0.k)) - u0.padded(max(back.k, u0.k))
    return float(np.sqrt(np.sum(np.abs(diff) ** 2)))


# ---------------------------------------------------------------------------
# paralinear system
# ---------------------------------------------------------------------------

def paraproduct_llh(f, g, w, ratio=LL_RATIO_DEFAULT, padding_factor=4):
    """Low-Low-High trilinear paraproduct
    Pi_{L,L,H}(f,g,w) = sum_{N1,N2 << N3} Pi(P_{N1} f conj(P_{N2} g) P_{N3} w),
    evaluated exactly blockwise (the two low sums collapse to P_{<<N3})."""
    out_len = f.k + w.k - 1
    m = grid_size(f.k + g.k + w.k, padding_factor)
    nf = np.arange(f.k, dtype=float)
    ng = np.arange(g.k, dtype=float)
    acc = np.zeros(m, dtype=np.complex128)
    for n3 in blocks_covering(w.k - 1):
        w3 = w.coeffs * lp_symbol(np.arange(w.k, dtype=float), n3)
        if not np.any(w3):
            continue
        fl = f.coeffs * mode_symbol(nf, n3, "ll", ratio=ratio, max_freq=float(f.k - 1))
        gl = g.coeffs * mode_symbol(ng, n3, "ll", ratio=ratio, max_freq=float(g.k - 1))
        if not (np.any(fl) and np.any(gl)):
            continue
        acc += synthesize(fl, m) * np.conj(synthesize(gl, m)) * synthesize(w3, m)
    return PlusSpectrum(analyze(acc, min(m, out_len)))


def paraproduct_llh_oracle(f, g, w, ratio=LL_RATIO_DEFAULT):
    """Direct dyadic triple sum for Pi_{L,L,H}: the combined symbol
    S(n1,n2,n3) = sum_{N3} phi_{N3}(n3) phi_{<<N3}(n1) phi_{<<N3}(n2) is built
    per frequency triple and the convolution is summed without FFTs."""
    nf = np.arange(f.k, dtype=float)
    ng = np.arange(g.k, dtype=float)
    nw = np.arange(w.k, dtype=float)
    sym = np.zeros((f.k, g.k, w.k))
    for n3 in blocks_covering(w.k - 1):
        lf = mode_symbol(nf, n3, "ll", ratio=ratio, max_freq=float(f.k - 1))
        lg = mode_symbol(ng, n3, "ll", ratio=ratio, max_freq=float(g.k - 1))
        pw = lp_symbol(nw, n3)
        sym += lf[:, None, None] * lg[None, :, None] * pw[None, None, :]
    out = np.zeros(f.k + w.k - 1, dtype=np.complex128)
    for i1 in range(f.k):
        for i2 in range(g.k):
            for i3 in range(w.k):
                nn = i1 - i2 + i3
                if nn >= 0 and sym[i1, i2, i3] != 0.0:
                    out[nn] += (
                        sym[i1, i2, i3]
                        * f.coeffs[i1]
                        * np.conj(g.coeffs[i2])
                        * w.coeffs[i3]
                    )
    return PlusSpectrum(out)


def para_time_window(u0, c=0.5, padding_factor=4):
    """Local window T = min(1, c/(1 + a^5)), a = ||u0||_{L^infty,grid}.

    Mirrors the paralinear local-wellposedness time scale without its unknown
    constant; runs are expected to stay well inside it.
    """
    grid = synthesize(u0.coeffs, grid_size(u0.k, padding_factor))
    a = float(np.max(np.abs(grid)))
    return min(1.0, c / (1.0 + a ** 5))


@dataclass
class ParaTrajectory:
    times: np.ndarray
    u_states: list
    x_states: list
    y_states: list
    norm_doubled: bool
    config: FlowConfig


def evolve_para_system(u0, t, cfg, snapshots=None):
    """Integrate the coupled system i u' = Pi(|u|^2 u), i X' = 2 Pi_LLH(u,u,X),
    Y = u - X, from (u0, u0, 0); all three Galerkin-truncated at cfg.cutoff."""
    window = para_time_window(u0)
    if abs(t) > window:
        raise ValueError(f"|t| = {abs(t)} exceeds the local window {window:.4g}")
    n = cfg.cutoff
    m = grid_size(n, cfg.padding_factor)
    idx = np.arange(n, dtype=float)
    blocks = blocks_covering(n - 1)
    block_syms = {b: lp_symbol(idx, b) for b in blocks}
    low_syms = {
        b: mode_symbol(idx, b, "ll", ratio=cfg.ll_ratio, max_freq=float(n - 1))
        for b in blocks
    }

    def rhs(y):
        u, x = y[:n], y[n:]
        ugrid = synthesize(u, m)
        du = -1j * analyze((ugrid * np.conj(ugrid)) * ugrid, n)
        acc = np.zeros(m, dtype=np.complex128)
        for b in blocks:
            xb = x * block_syms[b]
            if not np.any(xb):
                continue
            ul = u * low_syms[b]
            if not np.any(ul):
                continue
            lg = synthesize(ul, m)
            acc += (lg * np.conj(lg)) * synthesize(xb, m)
        dx = -2j * analyze(acc, n)
        return np.concatenate([du, dx])

    out_times = [0.0] + [float(x) for x in (snapshots or [])] + [float(t)]
    seen, uniq = set(), []
    for x in sorted(out_times, key=abs):
        if x not in seen:
            uniq.append(x)
            seen.add(x)
    out_times = uniq

    c0 = u0.padded(n) if u0.k <= n else u0.coeffs[:n].copy()
    y = np.concatenate([c0, c0])
    if cfg.integrator == "rk4_fixed":
        stepper = _RK4(rhs, cfg, cfg.dt if cfg.dt > 0 else default_dt(u0))
    else:
        stepper = _DP54(rhs, cfg)

    u_states, x_states, y_states = [], [], []

    def record(yv):
        u_states.append(PlusSpectrum(yv[:n].copy()))
        x_states.append(PlusSpectrum(yv[n:].copy()))
        y_states.append(PlusSpectrum(yv[:n] - yv[n:]))

    record(y)
    cur = 0.0
    for target in out_times[1:]:
        y = stepper.run_segment(y, cur, target)
        cur = target
        record(y)

    sup0 = float(np.max(np.abs(synthesize(u0.coeffs, m))))
    doubled = any(
        float(np.max(np.abs(synthesize(st.coeffs, m)))) > 2.0 * sup0 + 1e-12
        for st in u_states
    )
    return ParaTrajectory(np.array(out_times), u_states, x_states, y_states,
                          doubled, cfg)


# ---------------------------------------------------------------------------
# explicit high-frequency profile X_N and the remainder v_N
# ---------------------------------------------------------------------------

def low_truncated_datum(u0, block, ratio=LL_RATIO_DEFAULT):
    """u_{0,N} = P_{<<N} u0, the datum whose flow drives the phase of X_N."""
    return lp_project(u0, block, "ll", ratio=ratio)


def profile_xn(phase_traj, u0, block, t):
    """X_N(t) = exp(-2i Theta(t, .)) P_{~~N} u0 on the trajectory's grid.

    ``phase_traj`` must come from evolve() with track_phase on the flow of the
    <<N-truncated datum, with phase_block = block.
    """
    if phase_traj.phase is None:
        raise ValueError("trajectory was not run with track_phase")
    if phase_traj.config.phase_block != block:
        raise ValueError("trajectory phase was accumulated for a different block")
    i = phase_traj.index_of(t)
    theta = phase_traj.phase[i].samples.real
    m = phase_traj.grid_m
    shell = lp_project(u0, block, "approx", ratio=phase_traj.config.ll_ratio)
    grid = np.exp(-2j * theta) * synthesize(shell.coeffs, m)
    return PlusSpectrum(analyze(grid, m // 2))


def remainder_vn(full_traj, phase_traj, u0, block, t):
    """v_N(t) = P_N u(t) - P_N Pi(X_N)(t); decays like N^{1-2s} in L^{p/3}."""
    xn = profile_xn(phase_traj, u0, block, t)
    u_t = full_traj.state_at(t)
    k = max(u_t.k, xn.k)
    pn_u = lp_project(PlusSpectrum(u_t.padded(k)), block, "block")
    pn_x = lp_project(PlusSpectrum(xn.padded(k)), block, "block")
    return PlusSpectrum(pn_u.coeffs - pn_x.coeffs)
