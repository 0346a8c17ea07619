//! Two-level operator algebra and the vectorization of 2x2 density matrices.
//!
//! Basis order is `|g> = 0`, `|e> = 1`, so `sigma_z = diag(-1, +1)`.
//! Superoperators act on the column-stacked vector
//! `vec(rho) = (rho_gg, rho_eg, rho_ge, rho_ee)`, which gives
//! `vec(A rho B) = (B^T (x) A) vec(rho)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix2 = Matrix2<C64>;
pub type ComplexMatrix4 = Matrix4<C64>;
pub type ComplexVector4 = Vector4<C64>;

/// Tolerances a [`DensityMatrix`] must satisfy.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// The lowering operator and the operators built from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicOperators {
    /// `sigma = |g><e|`
    pub sigma: ComplexMatrix2,
    pub sigma_dagger: ComplexMatrix2,
    /// `sigma^dagger sigma - sigma sigma^dagger`
    pub sigma_z: ComplexMatrix2,
    /// `sigma + sigma^dagger`
    pub sigma_x: ComplexMatrix2,
    /// `i sigma - i sigma^dagger`
    pub sigma_y: ComplexMatrix2,
}

pub fn atomic_operators() -> AtomicOperators {
    let zero = real(0.0);
    let one = real(1.0);
    let sigma = ComplexMatrix2::new(zero, one, zero, zero);
    let sigma_dagger = sigma.adjoint();
    let i = c(0.0, 1.0);
    AtomicOperators {
        sigma,
        sigma_dagger,
        sigma_z: sigma_dagger * sigma - sigma * sigma_dagger,
        sigma_x: sigma + sigma_dagger,
        sigma_y: sigma * i - sigma_dagger * i,
    }
}

pub fn commutator(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix2 {
    a * b - b * a
}

/// Column-stacking vectorization.
pub fn vectorize(m: &ComplexMatrix2) -> ComplexVector4 {
    ComplexVector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &ComplexVector4) -> ComplexMatrix2 {
    ComplexMatrix2::new(v[0], v[2], v[1], v[3])
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Superoperator of `rho -> a rho`.
pub fn left_multiplication(a: &ComplexMatrix2) -> ComplexMatrix4 {
    kron(&ComplexMatrix2::identity(), a)
}

/// Superoperator of `rho -> rho b`.
pub fn right_multiplication(b: &ComplexMatrix2) -> ComplexMatrix4 {
    kron(&b.transpose(), &ComplexMatrix2::identity())
}

/// Superoperator of `rho -> a rho b`.
pub fn sandwich(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix4 {
    kron(&b.transpose(), a)
}

/// Superoperator of `rho -> [a, rho]`.
pub fn commutator_superoperator(a: &ComplexMatrix2) -> ComplexMatrix4 {
    left_multiplication(a) - right_multiplication(a)
}

/// Row vector `vec(I)^dagger`; `vec(I)^dagger vec(rho) = Tr(rho)`.
pub fn trace_functional() -> ComplexVector4 {
    ComplexVector4::new(real(1.0), real(0.0), real(0.0), real(1.0))
}

/// Eigenvalues of the Hermitian part of a 2x2 matrix, ascending.
pub fn hermitian_eigenvalues2(m: &ComplexMatrix2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Deviations of a 2x2 matrix from the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    /// `|Tr(m) - 1|`
    pub trace_defect: f64,
    /// `max |m - m^dagger|`
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn of(m: &ComplexMatrix2) -> Self {
        let hermiticity_defect = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        Self {
            trace_defect: (m.trace() - real(1.0)).norm(),
            hermiticity_defect,
            min_eigenvalue: hermitian_eigenvalues2(m)[0],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.trace_defect <= TRACE_TOL
            && self.hermiticity_defect <= HERMITICITY_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
    }

    /// Worst of the three defects combined with `other`.
    pub fn worst(self, other: Self) -> Self {
        Self {
            trace_defect: self.trace_defect.max(other.trace_defect),
            hermiticity_defect: self.hermiticity_defect.max(other.hermiticity_defect),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }
}

impl Default for StateDiagnostics {
    fn default() -> Self {
        Self {
            trace_defect: 0.0,
            hermiticity_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl fmt::Display for StateDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trace defect {:.3e}, hermiticity defect {:.3e}, min eigenvalue {:.3e}",
            self.trace_defect, self.hermiticity_defect, self.min_eigenvalue
        )
    }
}

/// Hermitian, unit-trace, positive semidefinite 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix2);

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix2) -> Result<Self> {
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let diag = StateDiagnostics::of(&matrix);
        if diag.is_valid() {
            Ok(Self(matrix))
        } else {
            Err(Error::InvalidState(diag.to_string()))
        }
    }

    /// Wraps a matrix without checking the invariants. Used where the caller
    /// records diagnostics instead of rejecting the state.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix2) -> Self {
        Self(matrix)
    }

    pub fn from_vectorized(v: &ComplexVector4) -> Result<Self> {
        Self::new(unvectorize(v))
    }

    pub fn excited() -> Self {
        Self(ComplexMatrix2::new(
            real(0.0),
            real(0.0),
            real(0.0),
            real(1.0),
        ))
    }

    pub fn ground() -> Self {
        Self(ComplexMatrix2::new(
            real(1.0),
            real(0.0),
            real(0.0),
            real(0.0),
        ))
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix2::identity().scale(0.5))
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.0
    }

    pub fn vectorized(&self) -> ComplexVector4 {
        vectorize(&self.0)
    }

    /// `rho_{n,m}` with `0 = g`, `1 = e`.
    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// `Tr(rho sigma) = rho_eg`.
    pub fn coherence(&self) -> C64 {
        self.0[(1, 0)]
    }

    /// `Tr(rho sigma_z) = rho_ee - rho_gg`.
    pub fn inversion(&self) -> f64 {
        (self.0[(1, 1)] - self.0[(0, 0)]).re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn bloch(&self) -> BlochVector {
        let ops = atomic_operators();
        BlochVector {
            x: expectation(self, &ops.sigma_x).re,
            y: expectation(self, &ops.sigma_y).re,
            z: expectation(self, &ops.sigma_z).re,
        }
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics::of(&self.0)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Expectation values of `sigma_x`, `sigma_y`, `sigma_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// `Tr(rho a)`.
pub fn expectation(rho: &DensityMatrix, a: &ComplexMatrix2) -> C64 {
    (rho.matrix() * a).trace()
}

/// Initial-condition descriptor, parsed from `excited`, `ground`, `mixed`
/// or `bloch:x,y,z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Excited,
    Ground,
    Mixed,
    Bloch { x: f64, y: f64, z: f64 },
}

impl InitialState {
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        state_from_spec(self)
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "excited" => Ok(Self::Excited),
            "ground" => Ok(Self::Ground),
            "mixed" => Ok(Self::Mixed),
            other => {
                let coords = other.strip_prefix("bloch:").ok_or_else(|| {
                    Error::Parse(format!(
                        "unknown initial state {other:?}; expected excited, ground, mixed or bloch:x,y,z"
                    ))
                })?;
                let parts: Vec<&str> = coords.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!(
                        "bloch state needs three components, got {}",
                        parts.len()
                    )));
                }
                let mut xyz = [0.0; 3];
                for (slot, part) in xyz.iter_mut().zip(&parts) {
                    *slot = part
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bloch component {part:?}: {e}")))?;
                }
                let state = Self::Bloch {
                    x: xyz[0],
                    y: xyz[1],
                    z: xyz[2],
                };
                state_from_spec(&state)?;
                Ok(state)
            }
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Excited => f.write_str("excited"),
            Self::Ground => f.write_str("ground"),
            Self::Mixed => f.write_str("mixed"),
            Self::Bloch { x, y, z } => write!(f, "bloch:{x},{y},{z}"),
        }
    }
}

/// Builds `rho = (I + x sigma_x + y sigma_y + z sigma_z) / 2`.
pub fn state_from_spec(spec: &InitialState) -> Result<DensityMatrix> {
    match *spec {
        InitialState::Excited => Ok(DensityMatrix::excited()),
        InitialState::Ground => Ok(DensityMatrix::ground()),
        InitialState::Mixed => Ok(DensityMatrix::maximally_mixed()),
        InitialState::Bloch { x, y, z } => {
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return Err(Error::InvalidState("non-finite Bloch vector".into()));
            }
            let r2 = x * x + y * y + z * z;
            if r2 > 1.0 + 1e-12 {
                return Err(Error::InvalidState(format!(
                    "Bloch vector length {} outside the unit ball",
                    r2.sqrt()
                )));
            }
            let ops = atomic_operators();
            let m = (ComplexMatrix2::identity()
                + ops.sigma_x.scale(x)
                + ops.sigma_y.scale(y)
                + ops.sigma_z.scale(z))
            .scale(0.5);
            DensityMatrix::new(m)
        }
    }
}
