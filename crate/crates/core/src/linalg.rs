//! Matrix functions of 4x4 complex superoperators.
//!
//! The exponential, principal logarithm and real power are evaluated through
//! an eigendecomposition built on the complex Schur form. When the
//! eigenvector matrix is worse conditioned than [`CONDITION_LIMIT`] the
//! exponential falls back to scaling and squaring and the logarithm to
//! inverse scaling and squaring.

use nalgebra::SymmetricEigen;

use crate::operator::{ComplexMatrix4, ComplexVector4, C64};
use crate::{Error, Result};

pub const CONDITION_LIMIT: f64 = 1e8;

const SCHUR_MAX_ITER: usize = 1000;
const TAYLOR_DEGREE: usize = 18;
const SQRT_MAX_ITER: usize = 100;
const MAX_SQUARE_ROOTS: usize = 64;

pub fn max_abs(m: &ComplexMatrix4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Induced 1-norm (max column sum).
pub fn norm1(m: &ComplexMatrix4) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn ensure_finite(m: &ComplexMatrix4, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonConvergence(what))
    }
}

/// Complex Schur form `a = q t q^dagger` with `t` upper triangular.
pub fn schur(a: &ComplexMatrix4) -> Result<(ComplexMatrix4, ComplexMatrix4)> {
    ensure_finite(a, "schur decomposition (non-finite input)")?;
    if max_abs(a) == 0.0 {
        // The iterative solver does not terminate on the zero matrix.
        return Ok((ComplexMatrix4::identity(), ComplexMatrix4::zeros()));
    }
    let (q, mut t) = a
        .try_schur(f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::NonConvergence("schur decomposition"))?
        .unpack();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    for col in 0..4 {
        for row in col + 1..4 {
            if t[(row, col)].norm() > 1e-12 * scale {
                return Err(Error::NonConvergence("schur triangularization"));
            }
            t[(row, col)] = C64::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

pub fn eigenvalues(a: &ComplexMatrix4) -> Result<[C64; 4]> {
    let (_, t) = schur(a)?;
    Ok([t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(3, 3)]])
}

/// `a = vectors * diag(values) * inverse`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: ComplexVector4,
    pub vectors: ComplexMatrix4,
    pub inverse: ComplexMatrix4,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

impl EigenDecomposition {
    /// Fails with [`Error::IllConditioned`] above [`CONDITION_LIMIT`].
    pub fn new(a: &ComplexMatrix4) -> Result<Self> {
        let (q, t) = schur(a)?;
        let smin = (f64::EPSILON * max_abs(&t)).max(f64::MIN_POSITIVE);

        // Back substitution for the eigenvectors of the triangular factor.
        let mut y = ComplexMatrix4::zeros();
        for j in 0..4 {
            y[(j, j)] = C64::new(1.0, 0.0);
            for i in (0..j).rev() {
                let mut s = C64::new(0.0, 0.0);
                for l in i + 1..=j {
                    s += t[(i, l)] * y[(l, j)];
                }
                let mut d = t[(i, i)] - t[(j, j)];
                if d.norm() < smin {
                    d = C64::new(smin, 0.0);
                }
                y[(i, j)] = -s / d;
            }
            let n = y.column(j).norm();
            y.column_mut(j).unscale_mut(n);
        }

        let vectors = q * y;
        let values = ComplexVector4::new(t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(3, 3)]);
        let condition = condition_number(&vectors);
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned {
                condition,
                limit: CONDITION_LIMIT,
            });
        }
        let inverse = vectors.try_inverse().ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
            limit: CONDITION_LIMIT,
        })?;
        Ok(Self {
            values,
            vectors,
            inverse,
            condition,
        })
    }

    /// `vectors * diag(f(values)) * inverse`.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> ComplexMatrix4 {
        let mut scaled = self.vectors;
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        scaled * self.inverse
    }
}

fn condition_number(m: &ComplexMatrix4) -> f64 {
    let sv: [f64; 4] = match m.try_svd(false, false, f64::EPSILON, SCHUR_MAX_ITER) {
        Some(svd) => svd.singular_values.into(),
        // The unbounded solver can cycle on some inputs.
        None => hermitian_eigenvalues(&(m.adjoint() * m)).map(|l| l.max(0.0).sqrt()),
    };
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn on_branch_cut(z: C64, scale: f64) -> bool {
    z.re <= 0.0 && z.im.abs() <= 64.0 * f64::EPSILON * scale.max(1.0)
}

fn check_branch(values: &[C64], scale: f64) -> Result<()> {
    match values.iter().find(|z| on_branch_cut(**z, scale)) {
        Some(&eigenvalue) => Err(Error::BranchCut { eigenvalue }),
        None => Ok(()),
    }
}

/// Matrix exponential.
pub fn mat_exp(a: &ComplexMatrix4) -> Result<ComplexMatrix4> {
    let out = match EigenDecomposition::new(a) {
        Ok(eig) => eig.map(|z| z.exp()),
        Err(Error::IllConditioned { .. }) => exp_scaling_squaring(a),
        Err(e) => return Err(e),
    };
    ensure_finite(&out, "matrix exponential")?;
    Ok(out)
}

/// Scaling and squaring with a truncated Taylor series.
pub fn exp_scaling_squaring(a: &ComplexMatrix4) -> ComplexMatrix4 {
    let norm = norm1(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a.unscale(2f64.powi(squarings));
    let mut result = ComplexMatrix4::identity();
    for k in (1..=TAYLOR_DEGREE).rev() {
        result = ComplexMatrix4::identity() + (b * result).unscale(k as f64);
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Principal matrix logarithm.
pub fn mat_log_principal(a: &ComplexMatrix4) -> Result<ComplexMatrix4> {
    let scale = max_abs(a);
    let out = match EigenDecomposition::new(a) {
        Ok(eig) => {
            check_branch(eig.values.as_slice(), scale)?;
            eig.map(|z| z.ln())
        }
        Err(Error::IllConditioned { .. }) => {
            check_branch(&eigenvalues(a)?, scale)?;
            log_inverse_scaling_squaring(a)?
        }
        Err(e) => return Err(e),
    };
    ensure_finite(&out, "matrix logarithm")?;
    Ok(out)
}

/// Principal square root by the Denman-Beavers iteration.
fn sqrt_denman_beavers(a: &ComplexMatrix4) -> Result<ComplexMatrix4> {
    let mut y = *a;
    let mut z = ComplexMatrix4::identity();
    for _ in 0..SQRT_MAX_ITER {
        let y_inv = y
            .try_inverse()
            .ok_or(Error::NonConvergence("matrix square root"))?;
        let z_inv = z
            .try_inverse()
            .ok_or(Error::NonConvergence("matrix square root"))?;
        let y_next = (y + z_inv).scale(0.5);
        z = (z + y_inv).scale(0.5);
        let change = max_abs(&(y_next - y));
        y = y_next;
        if change <= 4.0 * f64::EPSILON * max_abs(&y) {
            return Ok(y);
        }
    }
    Err(Error::NonConvergence("matrix square root"))
}

/// Repeated square roots until close to the identity, then the series
/// `log X = 2 atanh((X - I)(X + I)^-1)`.
pub fn log_inverse_scaling_squaring(a: &ComplexMatrix4) -> Result<ComplexMatrix4> {
    let identity = ComplexMatrix4::identity();
    let mut x = *a;
    let mut roots = 0;
    while norm1(&(x - identity)) > 0.25 {
        if roots == MAX_SQUARE_ROOTS {
            return Err(Error::NonConvergence("inverse scaling and squaring"));
        }
        x = sqrt_denman_beavers(&x)?;
        roots += 1;
    }
    let z = (x - identity)
        * (x + identity)
            .try_inverse()
            .ok_or(Error::NonConvergence("inverse scaling and squaring"))?;
    let z2 = z * z;
    let mut term = z;
    let mut series = ComplexMatrix4::zeros();
    for k in 0..16 {
        series += term.unscale((2 * k + 1) as f64);
        term *= z2;
    }
    Ok(series.scale(2f64.powi(roots as i32 + 1)))
}

/// `a^p = exp(p Log a)` on the principal branch.
pub fn mat_power(a: &ComplexMatrix4, p: f64) -> Result<ComplexMatrix4> {
    if p == 0.0 {
        return Ok(ComplexMatrix4::identity());
    }
    let scale = max_abs(a);
    let out = match EigenDecomposition::new(a) {
        Ok(eig) => {
            check_branch(eig.values.as_slice(), scale)?;
            eig.map(|z| (z.ln() * p).exp())
        }
        Err(Error::IllConditioned { .. }) => mat_exp(&(mat_log_principal(a)? * C64::new(p, 0.0)))?,
        Err(e) => return Err(e),
    };
    ensure_finite(&out, "matrix power")?;
    Ok(out)
}

/// `s -> exp(s a)` for many `s` with one decomposition.
#[derive(Debug, Clone)]
pub struct ExpFamily {
    matrix: ComplexMatrix4,
    eigen: Option<EigenDecomposition>,
}

impl ExpFamily {
    pub fn new(a: &ComplexMatrix4) -> Result<Self> {
        let eigen = match EigenDecomposition::new(a) {
            Ok(eig) => Some(eig),
            Err(Error::IllConditioned { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { matrix: *a, eigen })
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.matrix
    }

    pub fn at(&self, s: f64) -> Result<ComplexMatrix4> {
        let out = match &self.eigen {
            Some(eig) => eig.map(|z| (z * s).exp()),
            None => exp_scaling_squaring(&(self.matrix * C64::new(s, 0.0))),
        };
        ensure_finite(&out, "matrix exponential")?;
        Ok(out)
    }
}

/// Eigenvalues of the Hermitian part of `h`, ascending. NaN if the
/// iteration does not converge.
pub fn hermitian_eigenvalues(h: &ComplexMatrix4) -> [f64; 4] {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = [1.0, 1e3]
        .iter()
        .find_map(|f| SymmetricEigen::try_new(herm, f * f64::EPSILON, SCHUR_MAX_ITER));
    let Some(eig) = eig else {
        return [f64::NAN; 4];
    };
    let mut values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    [values[0], values[1], values[2], values[3]]
}
