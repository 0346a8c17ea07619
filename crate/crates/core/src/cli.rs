//! Command-line front end. Every subcommand writes a single CSV or text
//! document; numbers are printed with 15 significant digits.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::{approx_generator_for, integrate_linear_ode_substeps, regime_report, TimeGrid};
use crate::generator::{build_generator, propagate_exact_many, Generator, SystemParams};
use crate::linalg::{eigenvalues, norm1, ExpFamily};
use crate::operator::{ComplexMatrix4, DensityMatrix, InitialState, C64};
use crate::random_time::{
    average_over_gamma, averaged_inversion_closed, averaged_state_closed, effective_decay_rate,
    gamma_pdf, AveragedDynamics, GammaTimeDist, QuadratureConfig,
};
use crate::Error;

/// Largest disagreement between `decay` routes before it aborts.
pub const DECAY_ROUTE_TOL: f64 = 1e-6;
/// Contract tolerance of the exact routes in `compare`.
pub const COMPARE_TOL: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BREACH: i32 = 2;

const PDF_HELP: &str = "\
CSV columns: t_prime_over_tau, then pdf_ratio_<r> for each --ratio r.
Rows: u = t'/tau on (0, umax] with --steps points, u = 0 excluded.
Values: the Gamma density P(t, t') at t = r tau, t' = u tau.";

const DECAY_HELP: &str = "\
CSV columns: gamma_t, then sz_tau_<tau> for each --tau value.
Values: averaged inversion <sigma_z> on a uniform grid of t in [0, tmax].
Every route is cross-checked against a second one; a disagreement above 1e-6
aborts with exit code 2. The closed form, matrix function and quadrature
routes agree within 1e-8.";

const COMPARE_HELP: &str = "\
CSV columns: tau, t, inversion_closed, dev_matrixfn, dev_quadrature,
dev_ode_log, dev_ode_approx.
dev_* is the max-abs elementwise distance of each route's density matrix to
the closed form. A summary table goes to standard error. Exit code 0 iff
matrixfn, quadrature and ode_log stay within 1e-8; ode_approx is the
small-tau expansion and is reported only.";

const SPECTRUM_HELP: &str = "\
Text table per --tau value: eigenvalues of G, of I - tau G and of the log
generator (re, im), the effective decay rate (1/tau) ln(1 + gamma tau) and
regime flags.";

/// Exit codes: 0 success, 1 usage error, 2 numeric contract breach.
#[derive(Debug, Parser)]
#[command(
    name = "gamma-zeno",
    version,
    about = "Two-level atom with Gamma-distributed evolution time"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gamma density of the evolution time.
    #[command(after_help = PDF_HELP)]
    Pdf(PdfArgs),
    /// Averaged population inversion versus time.
    #[command(after_help = DECAY_HELP)]
    Decay(DecayArgs),
    /// Cross-check of all computational routes.
    #[command(after_help = COMPARE_HELP)]
    Compare(CompareArgs),
    /// Spectra of the generator and the averaged map.
    #[command(after_help = SPECTRUM_HELP)]
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PhysicsArgs {
    /// Atomic frequency.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub omega: f64,
    /// Spontaneous decay rate.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Intrinsic dephasing rate.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Time-fluctuation scale; repeat or comma-separate for several.
    #[arg(long = "tau", value_delimiter = ',', default_values_t = vec![0.0, 0.5, 5.0, 50.0], allow_negative_numbers = true)]
    pub tau: Vec<f64>,
}

impl PhysicsArgs {
    fn params(&self) -> Result<Vec<SystemParams>, Error> {
        if self.tau.is_empty() {
            return Err(Error::InvalidParameter("no --tau values".into()));
        }
        self.tau
            .iter()
            .map(|&tau| SystemParams::new(self.omega, self.gamma, self.kappa, tau))
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PdfArgs {
    /// Ratios t/tau, one column each.
    #[arg(long = "ratio", value_delimiter = ',', default_values_t = vec![0.1, 1.0, 5.0], allow_negative_numbers = true)]
    pub ratio: Vec<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau: f64,
    #[arg(long, default_value_t = 12.0, allow_negative_numbers = true)]
    pub umax: f64,
    #[arg(long, default_value_t = 600)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Matrixfn,
    Quadrature,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub tmax: f64,
    /// Number of grid points including both ends (500 intervals by default).
    #[arg(long, default_value_t = 501)]
    pub steps: usize,
    /// excited, ground, mixed or bloch:x,y,z.
    #[arg(long, default_value = "excited")]
    pub initial: InitialState,
}

#[derive(Debug, Clone, Args)]
pub struct DecayArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub trajectory: TrajectoryArgs,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    pub method: Method,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub trajectory: TrajectoryArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Breach(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::InvalidState(_) | Error::Parse(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Breach(e.to_string()),
        }
    }
}

/// Formats a number with 15 significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    // Avoid a stray "-0" in otherwise identical output.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.14e}")
}

fn fmt_complex(z: C64) -> String {
    format!("{},{}", fmt_num(z.re), fmt_num(z.im))
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let (result, out) = match &config.command {
        Command::Pdf(a) => (cmd_pdf(a), &a.output),
        Command::Decay(a) => (cmd_decay(a, stderr), &a.output),
        Command::Compare(a) => (cmd_compare(a, stderr), &a.output),
        Command::Spectrum(a) => (cmd_spectrum(a), &a.output),
    };
    let text = match result {
        Ok(text) => text,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Breach(msg)) => {
            let _ = writeln!(stderr, "numeric contract breach: {msg}");
            return EXIT_BREACH;
        }
    };
    let written = match &out.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    EXIT_OK
}

fn cmd_pdf(a: &PdfArgs) -> Result<String, Failure> {
    if a.steps < 1 {
        return Err(Failure::Usage("--steps must be >= 1".into()));
    }
    if !(a.umax.is_finite() && a.umax > 0.0) {
        return Err(Failure::Usage(format!("--umax {} must be > 0", a.umax)));
    }
    if a.ratio.is_empty() {
        return Err(Failure::Usage("no --ratio values".into()));
    }
    let dists = a
        .ratio
        .iter()
        .map(|&r| {
            if !(r.is_finite() && r > 0.0) {
                return Err(Failure::Usage(format!("ratio t/tau = {r} must be > 0")));
            }
            Ok(GammaTimeDist::new(r * a.tau, a.tau)?)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut s = String::from("t_prime_over_tau");
    for r in &a.ratio {
        write!(s, ",pdf_ratio_{r}").unwrap();
    }
    s.push('\n');
    for i in 1..=a.steps {
        let u = a.umax * i as f64 / a.steps as f64;
        s.push_str(&fmt_num(u));
        for d in &dists {
            write!(s, ",{}", fmt_num(gamma_pdf(d, u * a.tau)?)).unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

/// States of one route on a time grid.
fn route_states(
    method: Method,
    params: &SystemParams,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>, Error> {
    let g = build_generator(*params);
    match method {
        Method::Closed => times
            .iter()
            .map(|&t| averaged_state_closed(params, rho0, t))
            .collect(),
        Method::Matrixfn => {
            let dynamics = AveragedDynamics::new(&g, params.tau)?;
            times.iter().map(|&t| dynamics.state(rho0, t)).collect()
        }
        Method::Quadrature => quadrature_states(&g, rho0, times),
    }
}

fn quadrature_states(
    g: &Generator,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>, Error> {
    let tau = g.params.tau;
    if tau == 0.0 {
        // No time fluctuations: the distribution is a point mass at t.
        return propagate_exact_many(g, rho0, times);
    }
    let family = ExpFamily::new(&g.matrix)?;
    let v0 = rho0.vectorized();
    let q = QuadratureConfig::default();
    times
        .iter()
        .map(|&t| {
            let (v, _) = average_over_gamma(&family, &v0, &GammaTimeDist::new(t, tau)?, &q)?;
            DensityMatrix::from_vectorized(&v)
        })
        .collect()
}

fn grid(a: &TrajectoryArgs) -> Result<TimeGrid, Failure> {
    Ok(TimeGrid::new(a.tmax, a.steps)?)
}

fn cmd_decay(a: &DecayArgs, stderr: &mut dyn Write) -> Result<String, Failure> {
    let params = a.physics.params()?;
    if !(a.physics.gamma > 0.0) {
        return Err(Failure::Usage(
            "decay is tabulated against gamma t and needs --gamma > 0".into(),
        ));
    }
    let times = grid(&a.trajectory)?.times();
    let rho0 = a.trajectory.initial.density_matrix()?;
    let s0 = rho0.inversion();

    let mut columns = Vec::with_capacity(params.len());
    for p in &params {
        let closed: Vec<f64> = times
            .iter()
            .map(|&t| averaged_inversion_closed(s0, p.gamma, p.tau, t))
            .collect();
        let (values, check, other) = match a.method {
            Method::Closed => {
                let check = inversions(route_states(Method::Matrixfn, p, &rho0, &times)?);
                (closed, check, "matrixfn")
            }
            m => (
                inversions(route_states(m, p, &rho0, &times)?),
                closed,
                "closed",
            ),
        };
        let worst = values
            .iter()
            .zip(&check)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        if !(worst <= DECAY_ROUTE_TOL) {
            let _ = writeln!(stderr, "route disagreement at tau = {}: {worst:e}", p.tau);
            let _ = writeln!(stderr, "t,{:?},{other}", a.method);
            for ((t, x), y) in times.iter().zip(&values).zip(&check) {
                let _ = writeln!(stderr, "{},{},{}", fmt_num(*t), fmt_num(*x), fmt_num(*y));
            }
            return Err(Failure::Breach(format!(
                "{:?} and {other} routes differ by {worst:e} > {DECAY_ROUTE_TOL:e}",
                a.method
            )));
        }
        columns.push(values);
    }

    let mut s = String::from("gamma_t");
    for p in &params {
        write!(s, ",sz_tau_{}", p.tau).unwrap();
    }
    s.push('\n');
    for (i, t) in times.iter().enumerate() {
        s.push_str(&fmt_num(a.physics.gamma * t));
        for col in &columns {
            write!(s, ",{}", fmt_num(col[i])).unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

fn inversions(states: Vec<DensityMatrix>) -> Vec<f64> {
    states.iter().map(DensityMatrix::inversion).collect()
}

/// Total RK4 steps allowed for the expansion route, whose stiffness grows
/// like `tau omega^2`.
const APPROX_STEP_BUDGET: usize = 2_000_000;

/// RK4 substeps per grid interval that keep the global error near the
/// compare tolerance.
fn rk4_substeps(m: &ComplexMatrix4, h: f64, t_max: f64) -> usize {
    let nu = norm1(m);
    let target = (1.2e-9 / (t_max * nu).max(1.0)).powf(0.25).min(0.1);
    ((h * nu / target).ceil() as usize).max(1)
}

/// As [`rk4_substeps`] within [`APPROX_STEP_BUDGET`], but never below the
/// stability limit `h nu <= 0.5`.
fn rk4_substeps_budgeted(m: &ComplexMatrix4, h: f64, t_max: f64, intervals: usize) -> usize {
    let stable = ((h * norm1(m) / 0.5).ceil() as usize).max(1);
    rk4_substeps(m, h, t_max)
        .min(APPROX_STEP_BUDGET / intervals.max(1))
        .max(stable)
}

const COMPARE_ROUTES: [&str; 4] = ["matrixfn", "quadrature", "ode_log", "ode_approx"];

fn cmd_compare(a: &CompareArgs, stderr: &mut dyn Write) -> Result<String, Failure> {
    let params = a.physics.params()?;
    let grid = grid(&a.trajectory)?;
    let times = grid.times();
    let rho0 = a.trajectory.initial.density_matrix()?;

    let mut s = String::from("tau,t,inversion_closed");
    for r in COMPARE_ROUTES {
        write!(s, ",dev_{r}").unwrap();
    }
    s.push('\n');

    let mut summary = String::from("tau,regime");
    for r in COMPARE_ROUTES {
        write!(summary, ",max_dev_{r}").unwrap();
    }
    summary.push_str(",status\n");

    let mut breach = None;
    for p in &params {
        let closed = route_states(Method::Closed, p, &rho0, &times)?;
        let g = build_generator(*p);
        let dynamics = AveragedDynamics::new(&g, p.tau)?;
        let log_gen = *dynamics.log_generator();
        let approx_gen = approx_generator_for(p)?.matrix;
        let h = grid.spacing();
        let routes = [
            times
                .iter()
                .map(|&t| dynamics.state(&rho0, t))
                .collect::<Result<Vec<_>, _>>()?,
            quadrature_states(&g, &rho0, &times)?,
            integrate_linear_ode_substeps(
                &log_gen,
                &rho0,
                &grid,
                rk4_substeps(&log_gen, h, grid.t_max()),
            )?
            .states,
            integrate_linear_ode_substeps(
                &approx_gen,
                &rho0,
                &grid,
                rk4_substeps_budgeted(&approx_gen, h, grid.t_max(), times.len() - 1),
            )?
            .states,
        ];

        let mut worst = [0.0f64; 4];
        for (i, t) in times.iter().enumerate() {
            write!(
                s,
                "{},{},{}",
                fmt_num(p.tau),
                fmt_num(*t),
                fmt_num(closed[i].inversion())
            )
            .unwrap();
            for (r, states) in routes.iter().enumerate() {
                let dev = states[i].max_abs_diff(&closed[i]);
                worst[r] = worst[r].max(dev);
                write!(s, ",{}", fmt_num(dev)).unwrap();
            }
            s.push('\n');
        }

        let ok = worst[..3].iter().all(|d| *d <= COMPARE_TOL);
        let regime = regime_report(p);
        let label = if regime.zeno_regime {
            "zeno"
        } else if regime.small_tau_valid {
            "small_tau"
        } else {
            "intermediate"
        };
        write!(summary, "{},{label}", fmt_num(p.tau)).unwrap();
        for d in worst {
            write!(summary, ",{}", fmt_num(d)).unwrap();
        }
        summary.push_str(if ok { ",ok\n" } else { ",BREACH\n" });
        if !ok && breach.is_none() {
            breach = Some(format!(
                "route deviation {:e} above {COMPARE_TOL:e} at tau = {}",
                worst[..3].iter().cloned().fold(0.0, f64::max),
                p.tau
            ));
        }
    }
    let _ = stderr.write_all(summary.as_bytes());
    match breach {
        Some(msg) => Err(Failure::Breach(msg)),
        None => Ok(s),
    }
}

fn sorted(mut values: [C64; 4]) -> [C64; 4] {
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    values
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<String, Failure> {
    let params = a.physics.params()?;
    let mut s = String::new();
    for p in &params {
        let g = build_generator(*p);
        let shifted = ComplexMatrix4::identity() - g.matrix * C64::new(p.tau, 0.0);
        let log_gen = crate::random_time::log_generator(&g, p.tau)?;
        writeln!(s, "tau = {}", fmt_num(p.tau)).unwrap();
        writeln!(s, "operator,re,im").unwrap();
        for (name, m) in [("G", &g.matrix), ("I-tauG", &shifted), ("L", &log_gen)] {
            for z in sorted(eigenvalues(m)?) {
                writeln!(s, "{name},{}", fmt_complex(z)).unwrap();
            }
        }
        let rate = effective_decay_rate(p.gamma, p.tau);
        write!(s, "effective_rate,{}", fmt_num(rate)).unwrap();
        if p.gamma > 0.0 {
            write!(s, ",rate_over_gamma,{}", fmt_num(rate / p.gamma)).unwrap();
        }
        s.push('\n');
        let r = regime_report(p);
        writeln!(
            s,
            "regime,gamma_tau,{},omega_tau,{},small_tau_valid,{},zeno_regime,{}",
            fmt_num(r.gamma_tau),
            fmt_num(r.omega_tau),
            r.small_tau_valid,
            r.zeno_regime
        )
        .unwrap();
        s.push('\n');
    }
    Ok(s)
}
