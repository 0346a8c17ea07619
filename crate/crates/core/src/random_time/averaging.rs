use statrs::function::gamma::ln_gamma;

use super::gamma::{tail_cutoff, GammaTimeDist};
use super::quadrature::{integrate_adaptive, pairwise_sum, GaussRule, QuadValue};
use crate::generator::{analytic_inversion, Generator, SystemParams};
use crate::linalg::{mat_log_principal, mat_power, ExpFamily};
use crate::operator::{
    trace_functional, ComplexMatrix2, ComplexMatrix4, ComplexVector4, DensityMatrix, C64,
};
use crate::{Error, Result};

/// The averaged map `V(t) = (I - tau G)^{-t/tau}` together with its
/// generator `-(1/tau) Log(I - tau G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedEvolution {
    pub v_matrix: ComplexMatrix4,
    pub log_generator: ComplexMatrix4,
    pub params: SystemParams,
    pub t: f64,
}

impl AveragedEvolution {
    pub fn apply(&self, rho: &ComplexMatrix2) -> ComplexVector4 {
        self.v_matrix * crate::operator::vectorize(rho)
    }
}

/// `-(1/tau) Log(I - tau G)`; the generator itself when `tau = 0`.
pub fn log_generator(g: &Generator, tau: f64) -> Result<ComplexMatrix4> {
    check_tau(tau)?;
    if tau == 0.0 {
        return Ok(g.matrix);
    }
    let shifted = ComplexMatrix4::identity() - g.matrix * C64::new(tau, 0.0);
    Ok(mat_log_principal(&shifted)? * C64::new(-1.0 / tau, 0.0))
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tau = {tau} must be >= 0")))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "time t = {t} must be >= 0"
        )))
    }
}

/// Builds `V(t)` by the real matrix power of `I - tau G`. At `tau = 0`
/// this is `exp(G t)`.
pub fn build_v_map(g: &Generator, tau: f64, t: f64) -> Result<AveragedEvolution> {
    check_tau(tau)?;
    check_time(t)?;
    let log_gen = log_generator(g, tau)?;
    let v_matrix = if t == 0.0 {
        ComplexMatrix4::identity()
    } else if tau == 0.0 {
        crate::linalg::mat_exp(&(g.matrix * C64::new(t, 0.0)))?
    } else {
        let shifted = ComplexMatrix4::identity() - g.matrix * C64::new(tau, 0.0);
        mat_power(&shifted, -t / tau)?
    };
    Ok(AveragedEvolution {
        v_matrix,
        log_generator: log_gen,
        params: SystemParams { tau, ..g.params },
        t,
    })
}

/// `V(t)` for many times from one decomposition of the log generator.
#[derive(Debug, Clone)]
pub struct AveragedDynamics {
    log_generator: ComplexMatrix4,
    family: ExpFamily,
    params: SystemParams,
}

impl AveragedDynamics {
    pub fn new(g: &Generator, tau: f64) -> Result<Self> {
        let log_gen = log_generator(g, tau)?;
        Ok(Self {
            family: ExpFamily::new(&log_gen)?,
            log_generator: log_gen,
            params: SystemParams { tau, ..g.params },
        })
    }

    pub fn log_generator(&self) -> &ComplexMatrix4 {
        &self.log_generator
    }

    pub fn evolution(&self, t: f64) -> Result<AveragedEvolution> {
        check_time(t)?;
        Ok(AveragedEvolution {
            v_matrix: self.family.at(t)?,
            log_generator: self.log_generator,
            params: self.params,
            t,
        })
    }

    pub fn state(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        averaged_state_matrixfn(&self.evolution(t)?, rho0)
    }
}

/// `unvec(V(t) vec(rho0))`. A state outside the density-matrix tolerances
/// is an error.
pub fn averaged_state_matrixfn(
    ev: &AveragedEvolution,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    DensityMatrix::from_vectorized(&(ev.v_matrix * rho0.vectorized()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    /// Generalized Gauss-Laguerre in `u = t'/tau` with the weight
    /// `u^{k-1} e^{-u}`; falls back to adaptive subdivision when doubling
    /// the node count changes the result by more than `abs_tol`.
    GaussLaguerre,
    /// Gauss-Jacobi on a short head interval plus adaptive Gauss-Kronrod
    /// on the tail.
    AdaptiveSubdivision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub scheme: QuadratureScheme,
    pub nodes: usize,
    pub abs_tol: f64,
}

pub const MIN_NODES: usize = 16;
const MAX_PANELS: usize = 4000;

impl QuadratureConfig {
    pub fn new(scheme: QuadratureScheme, nodes: usize, abs_tol: f64) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        if !(abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance {abs_tol} must be positive"
            )));
        }
        Ok(Self {
            scheme,
            nodes,
            abs_tol,
        })
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            scheme: QuadratureScheme::GaussLaguerre,
            nodes: 64,
            abs_tol: 1e-10,
        }
    }
}

/// `int_0^inf P(t, t') exp(G t') rho0 dt'`.
pub fn averaged_state_quadrature(
    g: &Generator,
    rho0: &DensityMatrix,
    d: &GammaTimeDist,
    q: &QuadratureConfig,
) -> Result<DensityMatrix> {
    let family = ExpFamily::new(&g.matrix)?;
    let (v, _) = average_over_gamma(&family, &rho0.vectorized(), d, q)?;
    DensityMatrix::from_vectorized(&v)
}

/// Quadrature of `exp(G t') v0` against the Gamma density; returns the
/// averaged vector and the error estimate.
pub fn average_over_gamma(
    family: &ExpFamily,
    v0: &ComplexVector4,
    d: &GammaTimeDist,
    q: &QuadratureConfig,
) -> Result<(ComplexVector4, f64)> {
    if d.t() == 0.0 {
        return Ok((*v0, 0.0));
    }
    let tau = d.tau();
    let k = d.shape();
    let integrand = |u: f64| -> Result<ComplexVector4> { Ok(family.at(tau * u)? * v0) };

    if q.scheme == QuadratureScheme::GaussLaguerre {
        let coarse = GaussRule::laguerre(q.nodes, k - 1.0)?.integrate(integrand)?;
        let fine = GaussRule::laguerre(2 * q.nodes, k - 1.0)?.integrate(integrand)?;
        let estimate = (fine - coarse).max_abs();
        if estimate <= q.abs_tol {
            return Ok((fine, estimate));
        }
        log::debug!(
            "Gauss-Laguerre estimate {estimate:e} above {:e} at k = {k}; subdividing",
            q.abs_tol
        );
    }
    adaptive_gamma_average(family, v0, d, q)
}

fn adaptive_gamma_average(
    family: &ExpFamily,
    v0: &ComplexVector4,
    d: &GammaTimeDist,
    q: &QuadratureConfig,
) -> Result<(ComplexVector4, f64)> {
    let tau = d.tau();
    let k = d.shape();
    let f = |u: f64| -> Result<ComplexVector4> { Ok(family.at(tau * u)? * v0) };

    // Head [0, b]: exp(G tau u) changes by O(1) at most, and the weight
    // u^{k-1} is folded into a Gauss-Jacobi rule.
    let speed = tau * crate::linalg::norm1(family.matrix());
    let b = if speed > 1.0 { 1.0 / speed } else { 1.0 };
    let head_scale = (k * b.ln() - ln_gamma(k + 1.0)).exp();
    let head_at = |n: usize| -> Result<ComplexVector4> {
        let rule = GaussRule::jacobi_unit_interval(n, k - 1.0)?;
        let terms = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| Ok(f(b * s)?.scale(w * (-b * s).exp())))
            .collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum(&terms).scale(head_scale))
    };
    let head = head_at(q.nodes)?;
    let head_err = (head - head_at(q.nodes / 2)?).max_abs();

    // Tail [b, U] with geometric breakpoints so every panel starts smooth.
    let lg = ln_gamma(k);
    let u_max = tail_cutoff(k).max(2.0 * b);
    let mut breaks = vec![b];
    let mut x = b;
    while 2.0 * x < u_max {
        x *= 2.0;
        breaks.push(x);
    }
    breaks.push(u_max);
    let tail_tol = (q.abs_tol - head_err).max(0.5 * q.abs_tol);
    let (tail, tail_err) = integrate_adaptive(
        |u: f64| Ok(f(u)?.scale(((k - 1.0) * u.ln() - u - lg).exp())),
        &breaks,
        tail_tol,
        MAX_PANELS,
    )?;

    let estimate = head_err + tail_err;
    if estimate > q.abs_tol {
        return Err(Error::Quadrature {
            estimate,
            tolerance: q.abs_tol,
        });
    }
    Ok((head + tail, estimate))
}

/// Exponent of the averaged inversion law, `(1/tau) ln(1 + gamma tau)`;
/// `gamma` at `tau = 0`.
pub fn effective_decay_rate(gamma: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        gamma
    } else {
        (gamma * tau).ln_1p() / tau
    }
}

/// `s0 (1 + gamma tau)^{-t/tau} + [(1 + gamma tau)^{-t/tau} - 1]`.
pub fn averaged_inversion_closed(s0: f64, gamma: f64, tau: f64, t: f64) -> f64 {
    if tau == 0.0 {
        return analytic_inversion(s0, gamma, t);
    }
    let factor = (-t * effective_decay_rate(gamma, tau)).exp();
    s0 * factor + (factor - 1.0)
}

/// Averaging factor `(1 - lambda tau)^{-t/tau}` of an eigenvalue `lambda`
/// of `G`; `e^{lambda t}` at `tau = 0`.
pub fn averaged_eigenvalue(lambda: C64, tau: f64, t: f64) -> C64 {
    if tau == 0.0 {
        (lambda * t).exp()
    } else {
        (-(C64::new(1.0, 0.0) - lambda * tau).ln() * (t / tau)).exp()
    }
}

/// Averaged state from the closed forms: populations relax with
/// `(1 + gamma tau)^{-t/tau}`, the coherence `rho_eg` picks up the
/// averaging factor of the eigenvalue `-(gamma/2 + 4 kappa) - 2 i omega`.
pub fn averaged_state_closed(
    params: &SystemParams,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    params.validate()?;
    check_time(t)?;
    let pop = averaged_eigenvalue(C64::new(-params.gamma, 0.0), params.tau, t).re;
    let lambda_eg = C64::new(
        -(0.5 * params.gamma + 4.0 * params.kappa),
        -2.0 * params.omega,
    );
    let coh = rho0.coherence() * averaged_eigenvalue(lambda_eg, params.tau, t);
    let ee = rho0.element(1, 1).re * pop;
    DensityMatrix::new(ComplexMatrix2::new(
        C64::new(1.0 - ee, 0.0),
        coh.conj(),
        coh,
        C64::new(ee, 0.0),
    ))
}

/// Averaged dephasing rate of a Bohr frequency, `ln(1 + w^2 tau^2) / (2 tau)`.
pub fn kappa_nm(omega_nm: f64, tau: f64) -> f64 {
    (omega_nm * omega_nm * tau * tau).ln_1p() / (2.0 * tau)
}

/// Shifted oscillation frequency, `arctan(w tau) / tau`.
pub fn nu_nm(omega_nm: f64, tau: f64) -> f64 {
    (omega_nm * tau).atan() / tau
}

/// `e^{-kappa_nm t} e^{-i nu_nm t} rho0_nm` for a purely Hamiltonian
/// generator.
pub fn hamiltonian_only_element(rho0_nm: C64, omega_nm: f64, tau: f64, t: f64) -> C64 {
    rho0_nm * C64::new(-kappa_nm(omega_nm, tau) * t, -nu_nm(omega_nm, tau) * t).exp()
}

/// `vec(I)^dagger L`; zero for a trace-preserving generator.
pub fn trace_leak(m: &ComplexMatrix4) -> f64 {
    (trace_functional().transpose() * m)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
