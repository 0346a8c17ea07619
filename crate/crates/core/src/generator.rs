//! Lindblad generator of the damped, dephased two-level atom.
//!
//! ```text
//! G rho = -i omega [sigma_z, rho]
//!         + (gamma/2) (2 sigma rho sigma^dag - sigma^dag sigma rho - rho sigma^dag sigma)
//!         - kappa [sigma_z, [sigma_z, rho]]
//! ```
//!
//! The generator is used exactly as written. With `sigma_z = diag(-1, +1)`
//! the Bohr frequency of the coherence `rho_eg` is `2 omega` and the
//! dephasing term damps it at `4 kappa`.

use crate::linalg::{mat_exp, ExpFamily};
use crate::operator::{
    atomic_operators, commutator_superoperator, left_multiplication, right_multiplication,
    sandwich, unvectorize, vectorize, ComplexMatrix2, ComplexMatrix4, DensityMatrix, C64,
};
use crate::{Error, Result};

/// Physical constants; `omega` in rad/time, rates in 1/time, `tau` in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub tau: f64,
}

impl SystemParams {
    pub fn new(omega: f64, gamma: f64, kappa: f64, tau: f64) -> Result<Self> {
        let params = Self {
            omega,
            gamma,
            kappa,
            tau,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega = {}", self.omega)));
        }
        for (name, value) in [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("tau", self.tau),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {value} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.omega, self.gamma, self.kappa, tau)
    }
}

/// `-i omega [sigma_z, .]`
pub fn hamiltonian_superoperator(omega: f64) -> ComplexMatrix4 {
    let ops = atomic_operators();
    commutator_superoperator(&ops.sigma_z) * C64::new(0.0, -omega)
}

/// `(gamma/2) (2 sigma . sigma^dag - sigma^dag sigma . - . sigma^dag sigma)`
pub fn decay_superoperator(gamma: f64) -> ComplexMatrix4 {
    let ops = atomic_operators();
    let number = ops.sigma_dagger * ops.sigma;
    (sandwich(&ops.sigma, &ops.sigma_dagger) * C64::new(2.0, 0.0)
        - left_multiplication(&number)
        - right_multiplication(&number))
        * C64::new(0.5 * gamma, 0.0)
}

/// `-kappa [sigma_z, [sigma_z, .]]`
pub fn dephasing_superoperator(kappa: f64) -> ComplexMatrix4 {
    let ops = atomic_operators();
    let comm = commutator_superoperator(&ops.sigma_z);
    comm * comm * C64::new(-kappa, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub matrix: ComplexMatrix4,
    pub params: SystemParams,
}

impl Generator {
    pub fn apply(&self, rho: &ComplexMatrix2) -> ComplexMatrix2 {
        unvectorize(&(self.matrix * vectorize(rho)))
    }
}

pub fn build_generator(params: SystemParams) -> Generator {
    let matrix = hamiltonian_superoperator(params.omega)
        + decay_superoperator(params.gamma)
        + dephasing_superoperator(params.kappa);
    Generator { matrix, params }
}

/// `unvec(exp(G t) vec(rho0))`.
pub fn propagate_exact(g: &Generator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(*rho0);
    }
    let propagator = mat_exp(&(g.matrix * C64::new(t, 0.0)))?;
    DensityMatrix::from_vectorized(&(propagator * rho0.vectorized()))
}

/// Exact propagation at many times sharing one decomposition of `G`.
pub fn propagate_exact_many(
    g: &Generator,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let family = ExpFamily::new(&g.matrix)?;
    let v0 = rho0.vectorized();
    times
        .iter()
        .map(|&t| {
            check_time(t)?;
            DensityMatrix::from_vectorized(&(family.at(t)? * v0))
        })
        .collect()
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "time {t} must be finite and non-negative"
        )))
    }
}

/// Inversion of the pure decay: `s0 e^{-gamma t} + (e^{-gamma t} - 1)`.
pub fn analytic_inversion(s0: f64, gamma: f64, t: f64) -> f64 {
    let decay = (-gamma * t).exp();
    s0 * decay + (decay - 1.0)
}

/// `Tr(rho sigma)` under the literal generator:
/// `c0 exp[-2 i omega t - (gamma/2 + 4 kappa) t]`.
pub fn analytic_coherence(c0: C64, params: &SystemParams, t: f64) -> C64 {
    let rate = C64::new(0.5 * params.gamma + 4.0 * params.kappa, 2.0 * params.omega);
    c0 * (-rate * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, max_abs};
    use crate::operator::{state_from_spec, trace_functional, InitialState};
    use proptest::prelude::*;

    fn params(omega: f64, gamma: f64, kappa: f64) -> SystemParams {
        SystemParams::new(omega, gamma, kappa, 0.0).unwrap()
    }

    /// Direct `G rho` from the operator expression, independent of the
    /// Kronecker assembly.
    fn apply_by_hand(p: &SystemParams, rho: &ComplexMatrix2) -> ComplexMatrix2 {
        let ops = atomic_operators();
        let comm = |a: &ComplexMatrix2, b: &ComplexMatrix2| a * b - b * a;
        let n = ops.sigma_dagger * ops.sigma;
        comm(&ops.sigma_z, rho) * C64::new(0.0, -p.omega)
            + (ops.sigma * rho * ops.sigma_dagger * C64::new(2.0, 0.0) - n * rho - rho * n)
                * C64::new(0.5 * p.gamma, 0.0)
            - comm(&ops.sigma_z, &comm(&ops.sigma_z, rho)) * C64::new(p.kappa, 0.0)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rejects_negative_rates() {
        assert!(SystemParams::new(1.0, -0.1, 0.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.1, -1.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.1, 0.0, -1.0).is_err());
        assert!(SystemParams::new(f64::NAN, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_params_give_zero_generator() {
        assert_eq!(
            build_generator(params(0.0, 0.0, 0.0)).matrix,
            ComplexMatrix4::zeros()
        );
    }

    #[test]
    fn spectrum_without_dephasing() {
        let (omega, gamma) = (3.0, 0.7);
        let g = build_generator(params(omega, gamma, 0.0));
        let got = sorted(eigenvalues(&g.matrix).unwrap().to_vec());
        let want = sorted(vec![
            C64::new(0.0, 0.0),
            C64::new(-gamma, 0.0),
            C64::new(-gamma / 2.0, -2.0 * omega),
            C64::new(-gamma / 2.0, 2.0 * omega),
        ]);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn excited_state_action() {
        let g = build_generator(params(7.0, 1.3, 0.4));
        let out = g.apply(DensityMatrix::excited().matrix());
        let want = ComplexMatrix2::new(
            C64::new(1.3, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.3, 0.0),
        );
        assert!((out - want).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn propagation_endpoints() {
        let g = build_generator(params(0.0, 1.0, 0.0));
        let rho0 = DensityMatrix::excited();
        assert_eq!(propagate_exact(&g, &rho0, 0.0).unwrap(), rho0);
        let half = propagate_exact(&g, &rho0, 2f64.ln()).unwrap();
        assert!(
            (half.matrix() - ComplexMatrix2::identity() * C64::new(0.5, 0.0))
                .iter()
                .all(|z| z.norm() < 1e-14)
        );
        assert!(propagate_exact(&g, &rho0, -1.0).is_err());
    }

    #[test]
    fn analytic_laws() {
        assert_eq!(analytic_inversion(1.0, 1.0, 0.0), 1.0);
        assert!((analytic_inversion(1.0, 1.0, 1e3) + 1.0).abs() < 1e-15);
        assert!((analytic_inversion(1.0, 1.0, 1.0) - (-0.264241117657115)).abs() < 1e-14);
        let p = params(2.0, 0.8, 0.0);
        let c0 = C64::new(0.3, -0.2);
        assert_eq!(analytic_coherence(c0, &p, 0.0), c0);
        for t in [0.5, 1.0, 3.0] {
            let got = analytic_coherence(c0, &p, t).norm();
            assert!((got - c0.norm() * (-0.4 * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn inversion_matches_analytic_law() {
        let g = build_generator(params(10.0, 1.0, 0.3));
        let rho0 = DensityMatrix::excited();
        let times: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
        for (t, rho) in times
            .iter()
            .zip(propagate_exact_many(&g, &rho0, &times).unwrap())
        {
            assert!((rho.inversion() - analytic_inversion(1.0, 1.0, *t)).abs() < 1e-12);
        }
    }

    #[test]
    fn coherence_matches_analytic_law() {
        let p = params(5.0, 1.0, 0.2);
        let g = build_generator(p);
        let rho0 = state_from_spec(&InitialState::Bloch {
            x: 0.6,
            y: 0.3,
            z: 0.5,
        })
        .unwrap();
        for i in 0..=50 {
            let t = 0.1 * i as f64;
            let rho = propagate_exact(&g, &rho0, t).unwrap();
            let want = analytic_coherence(rho0.coherence(), &p, t);
            assert!((rho.coherence() - want).norm() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn ground_state_is_the_steady_state() {
        let g = build_generator(params(4.0, 0.5, 0.1));
        let out = g.apply(DensityMatrix::ground().matrix());
        assert!(out.iter().all(|z| z.norm() < 1e-15));
        let spec = eigenvalues(&g.matrix).unwrap();
        assert_eq!(spec.iter().filter(|z| z.norm() < 1e-10).count(), 1);
    }

    #[test]
    fn dephasing_leaves_populations_alone() {
        let rho0 = state_from_spec(&InitialState::Bloch {
            x: 0.5,
            y: -0.5,
            z: 0.5,
        })
        .unwrap();
        let clean = build_generator(params(3.0, 1.0, 0.0));
        let dephased = build_generator(params(3.0, 1.0, 0.7));
        for i in 0..=40 {
            let t = 0.25 * i as f64;
            let a = propagate_exact(&clean, &rho0, t).unwrap();
            let b = propagate_exact(&dephased, &rho0, t).unwrap();
            assert!((a.element(0, 0) - b.element(0, 0)).norm() < 1e-12);
            assert!((a.element(1, 1) - b.element(1, 1)).norm() < 1e-12);
        }
    }

    fn arb_params() -> impl Strategy<Value = SystemParams> {
        (-20.0f64..20.0, 0.0f64..5.0, 0.0f64..2.0)
            .prop_map(|(w, g, k)| SystemParams::new(w, g, k, 0.0).unwrap())
    }

    fn arb_state() -> impl Strategy<Value = DensityMatrix> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y, z)| {
            let r = (x * x + y * y + z * z).sqrt().max(1.0);
            state_from_spec(&InitialState::Bloch {
                x: x / r,
                y: y / r,
                z: z / r,
            })
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn kronecker_assembly_matches_operator_form(p in arb_params(), rho in arb_state()) {
            let g = build_generator(p);
            let err = (g.apply(rho.matrix()) - apply_by_hand(&p, rho.matrix()))
                .iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-12);
        }

        #[test]
        fn generator_preserves_trace_and_hermiticity(p in arb_params(), v in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let g = build_generator(p);
            let row = trace_functional().transpose() * g.matrix;
            prop_assert!(row.iter().all(|z| z.norm() <= 1e-12));
            let m = ComplexMatrix2::from_fn(|r, col| C64::new(v[2 * (2 * r + col)], v[2 * (2 * r + col) + 1]));
            let lhs = g.apply(&m.adjoint());
            let rhs = g.apply(&m).adjoint();
            prop_assert!((lhs - rhs).iter().all(|z| z.norm() <= 1e-12));
        }

        #[test]
        fn propagation_stays_physical(p in arb_params(), rho in arb_state(), t in 0.0f64..10.0) {
            let g = build_generator(p);
            let out = propagate_exact(&g, &rho, t).unwrap();
            let d = out.diagnostics();
            prop_assert!(d.trace_defect <= 1e-12);
            prop_assert!(d.min_eigenvalue >= -1e-10);
            prop_assert!(max_abs(&g.matrix).is_finite());
        }
    }
}
