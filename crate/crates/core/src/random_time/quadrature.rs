//! Quadrature rules: Golub-Welsch Gauss rules for Laguerre and Jacobi
//! weights, and a globally adaptive Gauss-Kronrod (7, 15) integrator.
//!
//! All sums are pairwise so results do not depend on accumulation order.

use nalgebra::Vector3;

use crate::operator::{ComplexVector4, C64};
use crate::{Error, Result};

/// Values that can be integrated: a real vector space with a max-norm.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, w: f64) -> Self;
    fn max_abs(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Vector3<f64> {
    fn zero() -> Self {
        Vector3::zeros()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
    fn max_abs(&self) -> f64 {
        self.amax()
    }
}

impl QuadValue for ComplexVector4 {
    fn zero() -> Self {
        ComplexVector4::zeros()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * C64::new(w, 0.0)
    }
    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn pairwise_sum<T: QuadValue>(items: &[T]) -> T {
    if items.len() <= 8 {
        items.iter().fold(T::zero(), |acc, x| acc.add(*x))
    } else {
        let (lo, hi) = items.split_at(items.len() / 2);
        pairwise_sum(lo).add(pairwise_sum(hi))
    }
}

/// Nodes and weights; weights are normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Golub-Welsch from the Jacobi matrix of the orthogonal polynomials.
    /// `offdiag[i]` couples rows `i` and `i + 1`.
    pub fn from_jacobi_matrix(diag: &[f64], offdiag: &[f64]) -> Result<Self> {
        let n = diag.len();
        debug_assert_eq!(offdiag.len() + 1, n);
        let mut d = diag.to_vec();
        let mut e = offdiag.to_vec();
        e.push(0.0);
        // First components of the eigenvectors.
        let mut z = vec![0.0; n];
        z[0] = 1.0;

        // Implicit QL with Wilkinson shifts, rotations applied to `z` only.
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::NonConvergence("Golub-Welsch eigenvalues"));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    let zf = z[i + 1];
                    z[i + 1] = s * z[i] + c * zf;
                    z[i] = c * z[i] - s * zf;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }

        let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self { nodes, weights })
    }

    /// Generalized Gauss-Laguerre for the weight `u^alpha e^{-u}` on
    /// `[0, inf)`, normalized by `Gamma(alpha + 1)`.
    pub fn laguerre(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 || !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Gauss-Laguerre rule needs n > 0 and alpha > -1 (n = {n}, alpha = {alpha})"
            )));
        }
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
        let off: Vec<f64> = (1..n)
            .map(|i| (i as f64 * (i as f64 + alpha)).sqrt())
            .collect();
        Self::from_jacobi_matrix(&diag, &off)
    }

    /// Gauss-Jacobi for the weight `s^beta` on `[0, 1]`, normalized by
    /// `1 / (beta + 1)`.
    pub fn jacobi_unit_interval(n: usize, beta: f64) -> Result<Self> {
        if n == 0 || !(beta > -1.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Gauss-Jacobi rule needs n > 0 and beta > -1 (n = {n}, beta = {beta})"
            )));
        }
        // Jacobi polynomials on [-1, 1] with weight (1 - x)^0 (1 + x)^beta.
        let a = 0.0;
        let b = beta;
        let ab = a + b;
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 {
                    (b - a) / (ab + 2.0)
                } else {
                    let k = 2.0 * i as f64 + ab;
                    (b * b - a * a) / (k * (k + 2.0))
                }
            })
            .collect();
        let off: Vec<f64> = (1..n)
            .map(|i| {
                let i = i as f64;
                let k = 2.0 * i + ab;
                if i == 1.0 {
                    (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
                } else {
                    (4.0 * i * (i + a) * (i + b) * (i + ab) / (k * k * (k + 1.0) * (k - 1.0)))
                        .sqrt()
                }
            })
            .collect();
        let mut rule = Self::from_jacobi_matrix(&diag, &off)?;
        for x in rule.nodes.iter_mut() {
            *x = 0.5 * (1.0 + *x);
        }
        Ok(rule)
    }

    pub fn integrate<T, F>(&self, mut f: F) -> Result<T>
    where
        T: QuadValue,
        F: FnMut(f64) -> Result<T>,
    {
        let terms = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| Ok(f(x)?.scale(w)))
            .collect::<Result<Vec<T>>>()?;
        Ok(pairwise_sum(&terms))
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gauss_kronrod_15<T, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = vec![fc.scale(WGK[7])];
    let mut gauss = vec![fc.scale(WG[3])];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)?.add(f(center + dx)?);
        kronrod.push(pair.scale(WGK[j]));
        if j % 2 == 1 {
            gauss.push(pair.scale(WG[j / 2]));
        }
    }
    let k = pairwise_sum(&kronrod).scale(half);
    let g = pairwise_sum(&gauss).scale(half);
    let error = k.add(g.scale(-1.0)).max_abs();
    Ok(Panel {
        a,
        b,
        value: k,
        error,
    })
}

/// Adaptive Gauss-Kronrod over the panels delimited by `breakpoints`.
/// Returns the integral and its error estimate; fails with
/// [`Error::Quadrature`] if `abs_tol` is not met within `max_panels`.
pub fn integrate_adaptive<T, F>(
    mut f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<(T, f64)>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    let mut panels = breakpoints
        .windows(2)
        .map(|w| gauss_kronrod_15(&mut f, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;

    let total_error = |panels: &[Panel<T>]| panels.iter().map(|p| p.error).sum::<f64>();
    while total_error(&panels) > abs_tol {
        if panels.len() >= max_panels {
            return Err(Error::Quadrature {
                estimate: total_error(&panels),
                tolerance: abs_tol,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            return Err(Error::Quadrature {
                estimate: total_error(&panels),
                tolerance: abs_tol,
            });
        }
        panels.push(gauss_kronrod_15(&mut f, a, mid)?);
        panels.push(gauss_kronrod_15(&mut f, mid, b)?);
    }

    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<T> = panels.iter().map(|p| p.value).collect();
    Ok((pairwise_sum(&values), total_error(&panels)))
}
