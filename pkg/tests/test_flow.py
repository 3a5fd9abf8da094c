import os

import numpy as np
import pytest

from szego_lab.flow import (
    FlowConfig,
    FlowError,
    default_dt,
    evolve,
    evolve_para_system,
    flow_map,
    low_truncated_datum,
    para_time_window,
    paraproduct_llh,
    paraproduct_llh_oracle,
    profile_xn,
    remainder_vn,
    reversibility_check,
    rhs_truncated,
)
from szego_lab.measure import EnsembleSpec, sample_mu
from szego_lab.spectrum import (
    PlusSpectrum,
    cubic_szego_term,
    lp_project,
    norm_homog,
    norm_l2,
    norm_lp,
    random_spectrum,
)


def single_mode(n, amp, k):
    c = np.zeros(k, dtype=complex)
    c[n] = amp
    return PlusSpectrum(c)


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(cutoff=0)
    with pytest.raises(ValueError):
        FlowConfig(cutoff=8, integrator="euler")
    with pytest.raises(ValueError):
        FlowConfig(cutoff=8, rtol=0.0)
    with pytest.raises(ValueError):
        FlowConfig(cutoff=8, track_phase=True)  # needs phase_block


def test_rhs_single_mode_and_zero():
    u = single_mode(3, 1.0 - 2.0j, 8)
    out = rhs_truncated(u, 8)
    expect = np.zeros(8, dtype=complex)
    expect[3] = -1j * abs(1.0 - 2.0j) ** 2 * (1.0 - 2.0j)
    assert np.max(np.abs(out.coeffs - expect)) <= 1e-13 * np.max(np.abs(expect))
    z = PlusSpectrum(np.zeros(8, dtype=complex))
    assert np.all(rhs_truncated(z, 8).coeffs == 0)


def test_rhs_matches_direct_constrained_sum():
    rng = np.random.default_rng(0)
    n = 8
    u = random_spectrum(n, rng)
    direct = np.zeros(n, dtype=complex)
    c = u.coeffs
    for n1 in range(n):
        for n2 in range(n):
            for n3 in range(n):
                m = n1 - n2 + n3
                if 0 <= m < n:
                    direct[m] += c[n1] * np.conj(c[n2]) * c[n3]
    direct *= -1j
    out = rhs_truncated(u, n).coeffs
    assert np.max(np.abs(out - direct)) <= 1e-12 * np.max(np.abs(direct))


def test_single_mode_exact_solution():
    cfg = FlowConfig(cutoff=8, rtol=1e-12, atol=1e-14)
    traj = evolve(single_mode(5, 2.0, 8), 1.0, cfg)
    got = traj.states[-1].coeffs
    expect = np.zeros(8, dtype=complex)
    expect[5] = 2.0 * np.exp(-4.0j)
    assert np.max(np.abs(got - expect)) <= 1e-10


def test_constant_datum_exact_solution():
    cfg = FlowConfig(cutoff=4, rtol=1e-12, atol=1e-14)
    c = 1.3 - 0.4j
    traj = evolve(single_mode(0, c, 4), 1.0, cfg)
    expect = c * np.exp(-1j * abs(c) ** 2)
    assert abs(traj.states[-1].coeffs[0] - expect) <= 1e-10
    assert np.max(np.abs(traj.states[-1].coeffs[1:])) <= 1e-12


def test_cross_integrator_agreement():
    spec = EnsembleSpec(seed=42, sample_count=1, s=0.8)
    u0 = sample_mu(spec, 0, 64)
    a = evolve(u0, 0.5, FlowConfig(cutoff=64, rtol=1e-12, atol=1e-14)).states[-1]
    b = evolve(u0, 0.5, FlowConfig(cutoff=64, integrator="rk4_fixed",
                                   dt=1e-4)).states[-1]
    assert norm_l2(PlusSpectrum(a.coeffs - b.coeffs)) <= 1e-8


def test_reversibility():
    cfg = FlowConfig(cutoff=8, rtol=1e-13, atol=1e-16)
    assert reversibility_check(single_mode(5, 2.0, 8), 1.0, cfg) <= 1e-12
    spec = EnsembleSpec(seed=7, sample_count=1, s=0.8)
    u0 = sample_mu(spec, 0, 64)
    cfg = FlowConfig(cutoff=64, rtol=1e-12, atol=1e-14)
    assert reversibility_check(u0, 0.5, cfg) <= 1e-8
    assert reversibility_check(u0, 0.0, cfg) == 0.0


def test_group_law():
    spec = EnsembleSpec(seed=8, sample_count=1, s=0.9)
    u0 = sample_mu(spec, 0, 32)
    cfg = FlowConfig(cutoff=32, rtol=1e-12, atol=1e-14)
    one = flow_map(flow_map(u0, 0.2, cfg), 0.3, cfg)
    two = flow_map(u0, 0.5, cfg)
    assert norm_l2(PlusSpectrum(one.coeffs - two.coeffs)) <= 1e-9


def test_conservation_along_flow():
    spec = EnsembleSpec(seed=9, sample_count=1, s=0.7)
    u0 = sample_mu(spec, 0, 64)
    traj = evolve(u0, 1.0, FlowConfig(cutoff=64, rtol=1e-10, atol=1e-13))
    for key in ("mass", "momentum", "hamiltonian"):
        v = traj.conserved[key]
        assert abs(v[-1] - v[0]) / abs(v[0]) <= 1e-8


def test_galerkin_convergence_as_cutoff_doubles():
    # || Phi_{t,K}(pi_K u0) - Phi_{t,2K}(pi_2K u0) ||_{H^sigma'} decreases in K
    spec = EnsembleSpec(seed=10, sample_count=1, s=0.9)
    u_full = sample_mu(spec, 0, 256)
    sigma = 0.35
    t = 0.2
    diffs = []
    for k in (32, 64, 128):
        a = flow_map(PlusSpectrum(u_full.coeffs[:k]), t,
                     FlowConfig(cutoff=k, rtol=1e-11, atol=1e-14))
        b = flow_map(PlusSpectrum(u_full.coeffs[:2 * k]), t,
                     FlowConfig(cutoff=2 * k, rtol=1e-11, atol=1e-14))
        d = b.coeffs.copy()
        d[:k] -= a.coeffs
        diffs.append(norm_homog(PlusSpectrum(d + 0j), sigma))
    assert diffs[1] < diffs[0] and diffs[2] < diffs[1]


def test_rk4_default_dt_heuristic():
    u0 = single_mode(0, 3.0, 4)
    assert default_dt(u0) == pytest.approx(0.1 / (1.0 + 9.0), rel=1e-12)


def test_snapshots_and_backward_times():
    u0 = single_mode(2, 1.0, 8)
    cfg = FlowConfig(cutoff=8, rtol=1e-10, atol=1e-13)
    traj = evolve(u0, -0.5, cfg, snapshots=[-0.25])
    assert list(traj.times) == [0.0, -0.25, -0.5]
    assert np.array_equal(traj.states[0].coeffs, u0.coeffs)
    with pytest.raises(ValueError):
        evolve(u0, 0.5, cfg, snapshots=[-0.25])


def test_trajectory_dump(tmp_path):
    u0 = single_mode(1, 1.0, 4)
    traj = evolve(u0, 0.1, FlowConfig(cutoff=4, rtol=1e-10, atol=1e-13))
    prefix = os.path.join(tmp_path, "traj")
    traj.dump(prefix)
    text = open(prefix + ".csv").read().splitlines()
    assert text[0] == "t,n,re,im"
    assert len(text) == 1 + 2 * 4
    import json

    side = json.load(open(prefix + ".json"))
    assert side["config"]["cutoff"] == 4
    assert "mass" in side["conserved_log"]


def test_step_budget_exhaustion():
    u0 = single_mode(1, 1.0, 4)
    cfg = FlowConfig(cutoff=4, rtol=1e-12, atol=1e-14, max_steps=3)
    with pytest.raises(FlowError):
        evolve(u0, 10.0, cfg)


# ---------------------------------------------------------------------------
# paraproduct and the paralinear system
# ---------------------------------------------------------------------------

def test_llh_zero_high_input():
    rng = np.random.default_rng(11)
    f, g = random_spectrum(16, rng), random_spectrum(16, rng)
    w = PlusSpectrum(np.zeros(16, dtype=complex))
    out = paraproduct_llh(f, g, w, ratio=0.25)
    assert np.max(np.abs(out.coeffs)) == 0.0


def test_llh_single_admissible_triple():
    # f, g in block 1, w a single high mode: the only admissible triple is
    # (1, 1, N3), so the paraproduct equals the plain product Pi(f conj(g) w)
    rng = np.random.default_rng(12)
    f = PlusSpectrum(np.array([0.4 - 0.1j, 0.3j], dtype=complex))
    g = PlusSpectrum(np.array([0.2 + 0.5j, -0.7], dtype=complex))
    n3 = 64
    c = np.zeros(n3 + 1, dtype=complex)
    c[n3] = 1.0 - 0.5j
    w = PlusSpectrum(c)
    out = paraproduct_llh(f, g, w, ratio=0.25)
    direct = np.zeros(out.k, dtype=complex)
    for i1 in range(2):
        for i2 in range(2):
            m = i1 - i2 + n3
            direct[m] += f.coeffs[i1] * np.conj(g.coeffs[i2]) * c[n3]
    assert np.max(np.abs(out.coeffs - direct)) <= 1e-12


def test_llh_matches_blockwise_oracle():
    rng = np.random.default_rng(13)
    f, g, w = (random_spectrum(32, rng) for _ in range(3))
    fast = paraproduct_llh(f, g, w, ratio=0.25).coeffs
    slow = paraproduct_llh_oracle(f, g, w, ratio=0.25).coeffs
    scale = np.max(np.abs(slow))
    assert fast.size == slow.size
    assert np.max(np.abs(fast - slow)) <= 1e-12 * scale


def test_para_system_initial_data_and_identity():
    spec = EnsembleSpec(seed=14, sample_count=1, s=0.7)
    u0 = sample_mu(spec, 0, 64)
    window = para_time_window(u0)
    cfg = FlowConfig(cutoff=64, rtol=1e-10, atol=1e-13, ll_ratio=0.25)
    traj = evolve_para_system(u0, 0.8 * window, cfg)
    assert np.array_equal(traj.u_states[0].coeffs, u0.coeffs[:64])
    assert np.array_equal(traj.x_states[0].coeffs, u0.coeffs[:64])
    assert np.max(np.abs(traj.y_states[0].coeffs)) == 0.0
    for u, x, y in zip(traj.u_states, traj.x_states, traj.y_states):
        assert np.max(np.abs(u.coeffs - x.coeffs - y.coeffs)) <= 1e-10
    assert not traj.norm_doubled
    with pytest.raises(ValueError):
        evolve_para_system(u0, 2.0 * window, cfg)


def test_para_single_block_taylor():
    # datum in block 1 only: Pi_LLH(u,u,X) = 0, X stays frozen, and
    # Y(t) = u(t) - u0 = -i t Pi(|u0|^2 u0) + O(t^2)
    u0 = PlusSpectrum(np.array([0.5, 0.4 - 0.2j], dtype=complex))
    cfg = FlowConfig(cutoff=8, rtol=1e-12, atol=1e-14)
    lead = np.zeros(8, dtype=complex)
    lead[:3] = -1j * cubic_szego_term(u0).coeffs
    resid = []
    for t in (4e-3, 2e-3):
        traj = evolve_para_system(u0, t, cfg)
        assert np.max(np.abs(traj.x_states[-1].coeffs - u0.padded(8))) <= 1e-12
        y = traj.y_states[-1].coeffs
        resid.append(np.max(np.abs(y - t * lead)))
    # quadratic remainder: halving t divides the residual by ~4
    assert resid[1] <= 0.35 * resid[0]


def test_profile_xn_trivial_cases():
    s = 0.7
    spec = EnsembleSpec(seed=15, sample_count=1, s=s)
    k = 512
    block = 16
    u0 = sample_mu(spec, 0, k)
    low = low_truncated_datum(u0, block)
    cfg = FlowConfig(cutoff=k, rtol=1e-10, atol=1e-13, track_phase=True,
                     phase_block=block)
    ph = evolve(low, 0.02, cfg)
    xn0 = profile_xn(ph, u0, block, 0.0)
    shell = lp_project(u0, block, "approx")
    assert np.max(np.abs(xn0.coeffs[:k] - shell.padded(k))) <= 1e-12
    full = evolve(u0, 0.02, FlowConfig(cutoff=k, rtol=1e-10, atol=1e-13))
    vn0 = remainder_vn(full, ph, u0, block, 0.0)
    assert norm_lp(vn0, 2.0) <= 1e-12
    with pytest.raises(ValueError):
        profile_xn(full, u0, block, 0.0)  # no phase tracked


def test_profile_xn_constant_datum():
    # constant datum: Theta(t, x) = |c|^2 t and P_{~~N} u0 = 0 for N >= 4
    # (block 64 so that mode 0 is << N at the default 2^-5 ratio)
    c = 1.2
    u0 = PlusSpectrum(np.array([c + 0j]))
    block = 64
    cfg = FlowConfig(cutoff=8, rtol=1e-11, atol=1e-14, track_phase=True,
                     phase_block=block)
    ph = evolve(low_truncated_datum(u0, block), 0.3, cfg)
    theta = ph.phase[-1].samples.real
    assert np.max(np.abs(theta - c * c * 0.3)) <= 1e-9
    xn = profile_xn(ph, u0, block, 0.3)
    assert np.max(np.abs(xn.coeffs)) <= 1e-12


def test_remainder_vn_decays_with_block():
    s = 0.7
    spec = EnsembleSpec(seed=16, sample_count=1, s=s)
    k = 1024
    u0 = sample_mu(spec, 0, k)
    t = 0.03
    full = evolve(u0, t, FlowConfig(cutoff=k, rtol=1e-9, atol=1e-12))
    norms = []
    for block in (16, 64, 256):
        cfg = FlowConfig(cutoff=k, rtol=1e-9, atol=1e-12, track_phase=True,
                         phase_block=block)
        ph = evolve(low_truncated_datum(u0, block), t, cfg)
        norms.append(norm_lp(remainder_vn(full, ph, u0, block, t), 2.0))
    assert norms[2] < norms[0]
