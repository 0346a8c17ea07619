use super::averaging::AveragedEvolution;
use crate::linalg::hermitian_eigenvalues;
use crate::operator::ComplexMatrix4;

/// Smallest Choi eigenvalue still accepted as positive semidefinite.
pub const CP_TOL: f64 = 1e-12;

/// `C = sum_ij |i><j| (x) Phi(|i><j|)` for a superoperator acting on
/// column-stacked vectors.
pub fn choi_of(superop: &ComplexMatrix4) -> ComplexMatrix4 {
    // Phi(E_ij)[a, b] is row (2b + a), column (2j + i) of the superoperator.
    ComplexMatrix4::from_fn(|r, col| {
        let (i, a) = (r / 2, r % 2);
        let (j, b) = (col / 2, col % 2);
        superop[(2 * b + a, 2 * j + i)]
    })
}

pub fn choi_matrix(ev: &AveragedEvolution) -> ComplexMatrix4 {
    choi_of(&ev.v_matrix)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub completely_positive: bool,
    pub min_eigenvalue: f64,
}

pub fn is_completely_positive(ev: &AveragedEvolution) -> CpReport {
    let min_eigenvalue = hermitian_eigenvalues(&choi_matrix(ev))[0];
    CpReport {
        completely_positive: min_eigenvalue >= -CP_TOL,
        min_eigenvalue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_generator, SystemParams};
    use crate::random_time::build_v_map;

    #[test]
    fn identity_choi_is_unnormalized_bell_projector() {
        let c = choi_of(&ComplexMatrix4::identity());
        let ev = hermitian_eigenvalues(&c);
        assert!((ev[3] - 2.0).abs() < 1e-14);
        assert!(ev[..3].iter().all(|v| v.abs() < 1e-14));
        // |00><00| + |00><11| + |11><00| + |11><11|
        assert_eq!(c[(0, 3)].re, 1.0);
        assert_eq!(c[(3, 0)].re, 1.0);
    }

    #[test]
    fn transpose_is_not_completely_positive() {
        // vec(rho^T) swaps the two off-diagonal slots.
        let mut swap = ComplexMatrix4::zeros();
        for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, col)] = crate::operator::real(1.0);
        }
        assert!(hermitian_eigenvalues(&choi_of(&swap))[0] < -0.5);
    }

    #[test]
    fn averaged_maps_are_completely_positive() {
        let g = build_generator(SystemParams::new(10.0, 1.0, 0.0, 0.0).unwrap());
        for t in [0.1, 1.0, 10.0] {
            let report = is_completely_positive(&build_v_map(&g, 1.0, t).unwrap());
            assert!(
                report.completely_positive,
                "t = {t}: {}",
                report.min_eigenvalue
            );
            let lindblad = is_completely_positive(&build_v_map(&g, 0.0, t).unwrap());
            assert!(lindblad.completely_positive);
        }
    }
}
