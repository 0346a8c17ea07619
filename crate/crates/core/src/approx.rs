//! Small-`tau` expansion of the averaged master equation, a fixed-step RK4
//! integrator for linear master equations, and regime diagnostics.

use crate::generator::{build_generator, Generator, SystemParams};
use crate::operator::{
    unvectorize, BlochVector, ComplexMatrix4, ComplexVector4, DensityMatrix, StateDiagnostics, C64,
};
use crate::{Error, Result};

/// Largest trace drift tolerated along an integrated trajectory.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;

/// Generator of the expanded equation: the Lindblad generator with the
/// Hamiltonian-induced dephasing `kappa = tau omega^2 / 2`.
pub fn build_approx_generator(omega: f64, gamma: f64, tau: f64) -> Result<Generator> {
    let kappa = tau * omega * omega / 2.0;
    Ok(build_generator(SystemParams::new(
        omega, gamma, kappa, tau,
    )?))
}

/// Expanded generator `G + (tau/2) G_H^2` for a full parameter set, keeping
/// any intrinsic dephasing.
pub fn approx_generator_for(params: &SystemParams) -> Result<Generator> {
    let kappa = params.kappa + params.tau * params.omega * params.omega / 2.0;
    Ok(build_generator(SystemParams::new(
        params.omega,
        params.gamma,
        kappa,
        params.tau,
    )?))
}

/// Uniform grid on `[0, t_max]` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_max = {t_max} must be > 0"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "steps = {steps} must be >= 2"
            )));
        }
        Ok(Self { t_max, steps })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / (self.steps - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.t_max
        } else {
            self.t_max * i as f64 / (self.steps - 1) as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.time(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub bloch: Vec<BlochVector>,
    pub purity: Vec<f64>,
}

impl Trajectory {
    pub fn from_states(times: Vec<f64>, states: Vec<DensityMatrix>) -> Self {
        let bloch = states.iter().map(DensityMatrix::bloch).collect();
        let purity = states.iter().map(DensityMatrix::purity).collect();
        Self {
            times,
            states,
            bloch,
            purity,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn inversions(&self) -> Vec<f64> {
        self.states.iter().map(DensityMatrix::inversion).collect()
    }

    /// Worst state-validity defects along the trajectory.
    pub fn diagnostics(&self) -> StateDiagnostics {
        self.states
            .iter()
            .map(DensityMatrix::diagnostics)
            .fold(StateDiagnostics::default(), StateDiagnostics::worst)
    }

    /// Largest elementwise distance to another trajectory on the same grid.
    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Largest inversion and coherence errors against another trajectory.
    pub fn observable_errors(&self, other: &Trajectory) -> (f64, f64) {
        self.states
            .iter()
            .zip(&other.states)
            .fold((0.0, 0.0), |(inv, coh), (a, b)| {
                (
                    f64::max(inv, (a.inversion() - b.inversion()).abs()),
                    f64::max(coh, (a.coherence() - b.coherence()).norm()),
                )
            })
    }
}

fn rk4_step(m: &ComplexMatrix4, y: &ComplexVector4, h: f64) -> ComplexVector4 {
    let hc = C64::new(h, 0.0);
    let k1 = m * y;
    let k2 = m * (y + k1 * (hc * 0.5));
    let k3 = m * (y + k2 * (hc * 0.5));
    let k4 = m * (y + k3 * hc);
    y + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * (hc / 6.0)
}

/// Classic RK4 for `d vec(rho)/dt = M vec(rho)`, one step per grid interval.
pub fn integrate_linear_ode(
    m: &ComplexMatrix4,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    integrate_linear_ode_substeps(m, rho0, grid, 1)
}

/// As [`integrate_linear_ode`] with `substeps` RK4 steps per grid interval.
///
/// Trace drift beyond [`TRACE_DRIFT_LIMIT`] is an error. Hermiticity and
/// positivity defects are logged and the state is kept unmodified.
pub fn integrate_linear_ode_substeps(
    m: &ComplexMatrix4,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<Trajectory> {
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be >= 1".into()));
    }
    let times = grid.times();
    let mut states = Vec::with_capacity(times.len());
    let mut y = rho0.vectorized();
    states.push(*rho0);
    for pair in times.windows(2) {
        let h = (pair[1] - pair[0]) / substeps as f64;
        for _ in 0..substeps {
            y = rk4_step(m, &y, h);
        }
        let rho = unvectorize(&y);
        let diag = StateDiagnostics::of(&rho);
        if !(diag.trace_defect <= TRACE_DRIFT_LIMIT) {
            return Err(Error::TraceDrift {
                time: pair[1],
                drift: diag.trace_defect,
            });
        }
        if !diag.is_valid() {
            log::warn!(
                "t = {}: integrated state outside tolerances ({diag})",
                pair[1]
            );
        }
        states.push(DensityMatrix::new_unchecked(rho));
    }
    Ok(Trajectory::from_states(times, states))
}

/// Thresholds of the regime flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub max_gamma_tau: f64,
    pub max_omega_tau: f64,
    pub zeno_gamma_tau: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            max_gamma_tau: 0.01,
            max_omega_tau: 0.1,
            zeno_gamma_tau: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub gamma_tau: f64,
    pub omega_tau: f64,
    /// Infinite when `gamma = 0`.
    pub omega_over_gamma: f64,
    /// The expanded equation is trustworthy.
    pub small_tau_valid: bool,
    /// Time fluctuations dominate the decay.
    pub zeno_regime: bool,
}

pub fn regime_report(params: &SystemParams) -> RegimeReport {
    regime_report_with(params, &RegimeThresholds::default())
}

pub fn regime_report_with(params: &SystemParams, th: &RegimeThresholds) -> RegimeReport {
    let gamma_tau = params.gamma * params.tau;
    let omega_tau = params.omega.abs() * params.tau;
    RegimeReport {
        gamma_tau,
        omega_tau,
        omega_over_gamma: params.omega.abs() / params.gamma,
        small_tau_valid: gamma_tau <= th.max_gamma_tau && omega_tau <= th.max_omega_tau,
        zeno_regime: gamma_tau >= th.zeno_gamma_tau,
    }
}

/// Coherence decay rate of the expanded generator, `gamma/2 + 2 omega^2 tau`.
pub fn approx_coherence_rate(omega: f64, gamma: f64, tau: f64) -> f64 {
    0.5 * gamma + 2.0 * omega * omega * tau
}

/// Exact averaged coherence decay rate,
/// `ln[(1 + gamma tau/2)^2 + 4 omega^2 tau^2] / (2 tau)`.
pub fn exact_coherence_rate(omega: f64, gamma: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.5 * gamma;
    }
    let a = 0.5 * gamma * tau;
    let b = 2.0 * omega * tau;
    // (1 + a)^2 + b^2 - 1, formed without cancellation.
    (a * (2.0 + a) + b * b).ln_1p() / (2.0 * tau)
}

/// Bound on `|exact - approx|` coherence rates:
/// `gamma^2 tau / 4 + 2 gamma omega^2 tau^2 + 4 omega^4 tau^3`.
pub fn coherence_rate_gap_bound(omega: f64, gamma: f64, tau: f64) -> f64 {
    let w2 = omega * omega;
    gamma * gamma * tau / 4.0 + 2.0 * gamma * w2 * tau * tau + 4.0 * w2 * w2 * tau.powi(3)
}
