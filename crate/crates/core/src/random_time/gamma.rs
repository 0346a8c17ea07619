//! Gamma distribution of the evolution time `t'` at laboratory time `t`:
//! shape `t / tau`, scale `tau`, mean `t`, variance `tau t`.

use nalgebra::Vector3;
use statrs::function::gamma::ln_gamma;

use super::quadrature::integrate_adaptive;
use crate::operator::C64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTimeDist {
    t: f64,
    tau: f64,
}

impl GammaTimeDist {
    pub fn new(t: f64, tau: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time t = {t} must be >= 0"
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau = {tau} must be > 0")));
        }
        Ok(Self { t, tau })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn shape(&self) -> f64 {
        self.t / self.tau
    }

    pub fn scale(&self) -> f64 {
        self.tau
    }

    pub fn mean(&self) -> f64 {
        self.t
    }

    pub fn variance(&self) -> f64 {
        self.tau * self.t
    }

    /// Mode of the density, `(k - 1) tau` for `k >= 1` and `0` otherwise.
    pub fn mode(&self) -> f64 {
        ((self.shape() - 1.0) * self.tau).max(0.0)
    }

    pub fn ln_pdf(&self, t_prime: f64) -> Result<f64> {
        if self.t == 0.0 {
            return Err(Error::InvalidParameter(
                "t = 0 is a point mass at t' = 0 and has no density".into(),
            ));
        }
        if !(t_prime > 0.0) || !t_prime.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "density is defined for t' > 0, got {t_prime}"
            )));
        }
        let k = self.shape();
        let u = t_prime / self.tau;
        Ok(-self.tau.ln() - u + (k - 1.0) * u.ln() - ln_gamma(k))
    }

    /// Normalization, mean and variance of the density computed by
    /// adaptive quadrature of [`gamma_pdf`].
    pub fn numerical_moments(&self) -> Result<Moments> {
        let k = self.shape();
        let tau = self.tau;
        // u = s^m removes the integrable singularity at the origin for k < 1.
        let m = if k < 1.0 { (1.0 / k).ceil() } else { 1.0 };
        let u_max = tail_cutoff(k);
        let s_max = u_max.powf(1.0 / m);
        let mut breaks = vec![0.0];
        let peak = self.mode() / tau;
        let width = k.sqrt().max(1.0);
        for u in [
            peak - 4.0 * width,
            peak,
            peak + 4.0 * width,
            peak + 10.0 * width,
        ] {
            let s = u.max(0.0).powf(1.0 / m);
            if s > *breaks.last().unwrap() && s < s_max {
                breaks.push(s);
            }
        }
        breaks.push(s_max);
        let scale = [1.0, self.t.max(tau), self.t.max(tau).powi(2)];
        let (raw, _) = integrate_adaptive(
            |s: f64| {
                if s == 0.0 {
                    return Ok(Vector3::zeros());
                }
                let u = s.powf(m);
                let t_prime = tau * u;
                let jac = tau * m * s.powf(m - 1.0);
                let p = self.ln_pdf(t_prime)?.exp() * jac;
                Ok(Vector3::new(
                    p,
                    p * t_prime / scale[1],
                    p * t_prime * t_prime / scale[2],
                ))
            },
            &breaks,
            1e-14,
            20_000,
        )?;
        let norm = raw[0];
        let mean = raw[1] * scale[1];
        let second = raw[2] * scale[2];
        Ok(Moments {
            norm,
            mean,
            variance: second - mean * mean,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub mean: f64,
    pub variance: f64,
}

/// A point `u` beyond which the `Gamma(k, 1)` density times `u` is below
/// `e^-50`.
pub(crate) fn tail_cutoff(k: f64) -> f64 {
    let lg = ln_gamma(k);
    let mut u = 2.0 * (k + 1.0);
    while (k - 1.0) * u.ln() - u - lg + u.ln() > -50.0 {
        u *= 1.5;
    }
    u
}

/// `P(t, t') = e^{-t'/tau} (t'/tau)^{t/tau - 1} / (tau Gamma(t/tau))`,
/// evaluated in log space.
pub fn gamma_pdf(d: &GammaTimeDist, t_prime: f64) -> Result<f64> {
    Ok(d.ln_pdf(t_prime)?.exp())
}

/// `int_0^inf P(t, t') e^{-lambda t'} dt' = (1 + lambda tau)^{-t/tau}`.
pub fn gamma_laplace(d: &GammaTimeDist, lambda: C64) -> Result<C64> {
    let base = C64::new(1.0, 0.0) + lambda * d.tau;
    if !(base.re > 0.0) {
        return Err(Error::BranchCut { eigenvalue: base });
    }
    if d.t == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok((-base.ln() * d.shape()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_time::quadrature::integrate_adaptive;

    #[test]
    fn constructor_validates() {
        assert!(GammaTimeDist::new(-1.0, 1.0).is_err());
        assert!(GammaTimeDist::new(1.0, 0.0).is_err());
        assert!(GammaTimeDist::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn pdf_rejects_origin_and_point_mass() {
        let d = GammaTimeDist::new(1.0, 1.0).unwrap();
        assert!(gamma_pdf(&d, 0.0).is_err());
        assert!(gamma_pdf(&d, -1.0).is_err());
        let point = GammaTimeDist::new(0.0, 1.0).unwrap();
        assert!(gamma_pdf(&point, 1.0).is_err());
    }

    #[test]
    fn unit_shape_is_exponential() {
        let tau = 0.7;
        let d = GammaTimeDist::new(tau, tau).unwrap();
        for t_prime in [0.01, 0.5, 2.0, 9.0] {
            let want = (-t_prime / tau).exp() / tau;
            assert!((gamma_pdf(&d, t_prime).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn mode_at_four_tau_for_shape_five() {
        let tau = 2.0;
        let d = GammaTimeDist::new(5.0 * tau, tau).unwrap();
        let grid: Vec<f64> = (1..=6000).map(|i| i as f64 * 0.005 * tau).collect();
        let best = grid
            .iter()
            .cloned()
            .max_by(|a, b| {
                gamma_pdf(&d, *a)
                    .unwrap()
                    .total_cmp(&gamma_pdf(&d, *b).unwrap())
            })
            .unwrap();
        assert!((best - 4.0 * tau).abs() <= 0.005 * tau);
        assert_eq!(d.mode(), 4.0 * tau);
    }

    #[test]
    fn small_shape_is_monotone() {
        let d = GammaTimeDist::new(0.1, 1.0).unwrap();
        let vals: Vec<f64> = (1..=2000)
            .map(|i| gamma_pdf(&d, i as f64 * 0.01).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn large_shape_does_not_overflow() {
        let d = GammaTimeDist::new(5000.0, 1.0).unwrap();
        let p = gamma_pdf(&d, 5000.0).unwrap();
        // Normal approximation 1/sqrt(2 pi k).
        assert!((p - 1.0 / (2.0 * std::f64::consts::PI * 5000.0).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn laplace_special_cases() {
        let d = GammaTimeDist::new(1.3, 0.4).unwrap();
        assert_eq!(
            gamma_laplace(&d, C64::new(0.0, 0.0)).unwrap(),
            C64::new(1.0, 0.0)
        );
        let e = GammaTimeDist::new(0.4, 0.4).unwrap();
        let lambda = 2.5;
        let got = gamma_laplace(&e, C64::new(lambda, 0.0)).unwrap();
        assert!((got.re - 1.0 / (1.0 + lambda * 0.4)).abs() < 1e-15);
        assert!(gamma_laplace(&d, C64::new(-3.0, 0.0)).is_err());
    }

    #[test]
    fn laplace_matches_quadrature_of_pdf() {
        let tau = 0.8;
        let lambda = 1.0 / tau;
        for k in [0.5, 1.0, 5.0] {
            let d = GammaTimeDist::new(k * tau, tau).unwrap();
            // Substitute t' = tau s^2 to remove the k = 1/2 singularity.
            let (got, _) = integrate_adaptive(
                |s: f64| {
                    if s == 0.0 {
                        return Ok(if k == 0.5 {
                            2.0 / std::f64::consts::PI.sqrt()
                        } else {
                            0.0
                        });
                    }
                    let tp = tau * s * s;
                    Ok(gamma_pdf(&d, tp)? * (-lambda * tp).exp() * 2.0 * tau * s)
                },
                &[0.0, 1.0, 3.0, 8.0],
                1e-14,
                10_000,
            )
            .unwrap();
            let want = gamma_laplace(&d, C64::new(lambda, 0.0)).unwrap().re;
            assert!((got - want).abs() < 1e-10, "k = {k}: {got} vs {want}");
        }
    }

    #[test]
    fn numerical_moments_match_closed_forms() {
        for (t, tau) in [
            (0.35, 0.7),
            (2.0, 2.0),
            (5.0, 1.0),
            (25.0, 0.5),
            (0.02, 1.0),
        ] {
            let d = GammaTimeDist::new(t, tau).unwrap();
            let m = d.numerical_moments().unwrap();
            assert!((m.norm - 1.0).abs() < 1e-10, "norm {}", m.norm);
            assert!((m.mean - t).abs() < 1e-8 * t, "mean {} vs {t}", m.mean);
            assert!((m.variance - tau * t).abs() < 1e-8 * tau * t);
        }
    }

    #[test]
    fn ln_gamma_reference_values() {
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        // ln(9!) = ln 362880
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-13 * 362_880f64.ln());
        let lg1000: f64 = (1..1000).map(|i| (i as f64).ln()).sum();
        assert!((ln_gamma(1000.0) - lg1000).abs() < 1e-13 * lg1000);
    }
}
