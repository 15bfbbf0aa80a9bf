//! Dense complex solves for the small boundary-condition systems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct DenseSolution {
    pub x: DVector<Complex64>,
    /// 1-norm condition number ‖A‖₁‖A⁻¹‖₁.
    pub condition: f64,
    /// ‖Ax − b‖∞.
    pub residual: f64,
}

fn norm_1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_inf(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves `a x = b` by LU with partial pivoting. Returns `None` when the
/// matrix is exactly singular.
pub fn solve_dense(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DenseSolution> {
    if a.nrows() == 0 {
        return Some(DenseSolution {
            x: DVector::zeros(0),
            condition: 1.0,
            residual: 0.0,
        });
    }
    let lu = a.clone().lu();
    let x = lu.solve(b)?;
    let inverse = lu.try_inverse()?;
    let condition = norm_1(a) * norm_1(&inverse);
    let residual = norm_inf(&(a * &x - b));
    Some(DenseSolution {
        x,
        condition,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_complex_system() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[one, i, -i, 2.0 * one]);
        let b = DVector::from_vec(vec![one, Complex64::new(0.0, 0.0)]);
        let s = solve_dense(&a, &b).unwrap();
        // det = 2 − 1 = 1, x = (2, i)
        assert!((s.x[0] - 2.0).norm() < 1e-15);
        assert!((s.x[1] - i).norm() < 1e-15);
        assert!(s.residual < 1e-15);
        assert!(s.condition >= 1.0);
    }

    #[test]
    fn singular_is_none() {
        let one = Complex64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[one, one, one, one]);
        let b = DVector::from_vec(vec![one, one]);
        assert!(solve_dense(&a, &b).is_none());
    }

    #[test]
    fn empty_system() {
        let s = solve_dense(&DMatrix::zeros(0, 0), &DVector::zeros(0)).unwrap();
        assert_eq!(s.x.len(), 0);
    }
}
