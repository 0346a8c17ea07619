//! Averaging the Lindblad evolution over a Gamma-distributed evolution time.

mod averaging;
mod choi;
mod gamma;
pub mod quadrature;

pub use averaging::{
    average_over_gamma, averaged_eigenvalue, averaged_inversion_closed, averaged_state_closed,
    averaged_state_matrixfn, averaged_state_quadrature, build_v_map, effective_decay_rate,
    hamiltonian_only_element, kappa_nm, log_generator, nu_nm, trace_leak, AveragedDynamics,
    AveragedEvolution, QuadratureConfig, QuadratureScheme, MIN_NODES,
};
pub use choi::{choi_matrix, choi_of, is_completely_positive, CpReport, CP_TOL};
pub use gamma::{gamma_laplace, gamma_pdf, GammaTimeDist, Moments};
