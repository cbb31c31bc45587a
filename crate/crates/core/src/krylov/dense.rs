use nalgebra::DMatrix;
use num_complex::Complex;

use super::csr::CsrMatrix;
use super::Preconditioner;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest order accepted by [`alpha_of`].
pub const DENSE_LIMIT: usize = 2000;

/// `‖I − P A‖₂`, computed densely through an SVD. Intended for small test
/// systems.
pub fn alpha_of<T: Real, P: Preconditioner<T> + ?Sized>(p: &P, a: &CsrMatrix<T>) -> Result<T> {
    let n = a.n();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    if p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
    }
    let mut m = DMatrix::<Complex<f64>>::zeros(n, n);
    let mut col = vec![Complex::new(T::zero(), T::zero()); n];
    let mut acol = vec![Complex::new(T::zero(), T::zero()); n];
    let mut pcol = vec![Complex::new(T::zero(), T::zero()); n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = Complex::new(T::zero(), T::zero()));
        col[j] = Complex::new(T::one(), T::zero());
        a.matvec(&col, &mut acol);
        p.apply(&acol, &mut pcol);
        for i in 0..n {
            let v = Complex::new(pcol[i].re.as_f64(), pcol[i].im.as_f64());
            m[(i, j)] = if i == j { Complex::new(1.0, 0.0) - v } else { -v };
        }
    }
    let smax = m.singular_values().iter().copied().fold(0.0f64, f64::max);
    Ok(T::lit(smax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::lu_factor;

    type C = Complex<f64>;

    #[test]
    fn exact_preconditioner_gives_zero() {
        let a = CsrMatrix::from_dense(2, &[C::new(2.0, 1.0), C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(3.0, 0.0)])
            .unwrap();
        let p = lu_factor(&a).unwrap();
        assert!(alpha_of(&p, &a).unwrap() < 1e-14);
    }

    #[test]
    fn diagonal_example() {
        let a = CsrMatrix::from_diagonal(&[C::new(1.0, 0.0), C::new(1.5, 0.0)]);
        let p = lu_factor(&CsrMatrix::identity(2)).unwrap();
        assert!((alpha_of(&p, &a).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn shrinks_with_perturbation() {
        let base: Vec<C> = (0..16).map(|k| C::new(if k % 5 == 0 { 4.0 } else { 0.3 * (k as f64).sin() }, 0.1)).collect();
        let e: Vec<C> = (0..16).map(|k| C::new((k as f64).cos(), (0.7 * k as f64).sin())).collect();
        let a0 = CsrMatrix::from_dense(4, &base).unwrap();
        let p = lu_factor(&a0).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let d: Vec<C> = base.iter().zip(&e).map(|(b, x)| b + x * eps).collect();
            let alpha = alpha_of(&p, &CsrMatrix::from_dense(4, &d).unwrap()).unwrap();
            assert!(alpha < prev);
            prev = alpha;
        }
    }

    #[test]
    fn size_guard() {
        let a = CsrMatrix::<f64>::identity(DENSE_LIMIT + 1);
        let p = crate::krylov::IdentityPreconditioner::new(DENSE_LIMIT + 1);
        assert!(matches!(alpha_of(&p, &a), Err(Error::TooLarge { .. })));
    }
}
