"""szego_lab: spectral laboratory for the truncated cubic Szego flow.

The package simulates i du/dt = pi_N(Pi(|u|^2 u)) on the torus, samples the
Gaussian measures with coefficient decay <n>^{-s}, and measures every
finite-N quantity of the associated measure-transport analysis: conserved
quantities, transported densities, the localized-energy derivatives F_N and
G_N, the kernel A_N, the quadrature constant I_s, and the paralinear profile
remainder.
"""

__version__ = "0.1.0"

from .bump import bump, block_profile, lp_symbol, bump_definition_hash
from .spectrum import (
    GridSignal,
    PlusSpectrum,
    cubic_szego_term,
    hamiltonian,
    lp_project,
    mass,
    momentum,
    norm_besov,
    norm_hs,
    norm_homog,
    norm_l2,
    norm_lp,
    sharp_truncate,
    szego_project,
)
from .measure import EnsembleSpec, besov_diagnostic, sample_mu
from .flow import (
    FlowConfig,
    FlowError,
    Trajectory,
    evolve,
    evolve_para_system,
    paraproduct_llh,
    profile_xn,
    remainder_vn,
    reversibility_check,
    rhs_truncated,
)
from .observables import (
    a_n_kernel,
    density_f_tn,
    f_n,
    g_n,
    h_n_profile,
    i_s_quadrature,
    psi_n,
    psi_s,
    q_n,
    q_n_multilinear,
    q_pi,
    taylor_residual,
)
from .experiments import EXPERIMENTS, fit_power_law, run_experiment
