use std::time::Instant;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::csr::{norm2, CsrMatrix};
use super::Preconditioner;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of a left-preconditioned GMRES solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SolveReport<T: Real> {
    #[serde(skip)]
    pub solution: Vec<Complex<T>>,
    pub iterations: usize,
    pub converged: bool,
    /// Preconditioned relative residuals `‖P r_k‖ / ‖P b‖`, starting at `k = 0`.
    pub residual_history: Vec<T>,
    /// `‖b − A x‖ / ‖b‖` of the returned iterate.
    pub true_relative_residual: T,
    #[serde(skip)]
    pub krylov_time: f64,
}

impl<T: Real> SolveReport<T> {
    pub fn final_residual(&self) -> T {
        *self.residual_history.last().expect("history is never empty")
    }
}

/// Full (unrestarted) GMRES on `P A x = P b` from `x₀ = 0`, stopping when the
/// preconditioned relative residual drops to `tol`.
pub fn gmres_left<T: Real, P: Preconditioner<T> + ?Sized>(
    p: &P,
    a: &CsrMatrix<T>,
    b: &[Complex<T>],
    tol: T,
    max_iter: usize,
) -> Result<SolveReport<T>> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
    }
    if !(tol > T::zero() && tol < T::one()) {
        return Err(Error::InvalidArgument("tolerance must lie in (0, 1)".into()));
    }
    let start = Instant::now();
    let zero = Complex::<T>::zero();

    let mut r0 = vec![zero; n];
    p.apply(b, &mut r0);
    let beta = norm2(&r0);
    if beta.is_zero() {
        return Ok(SolveReport {
            solution: vec![zero; n],
            iterations: 0,
            converged: true,
            residual_history: vec![T::zero()],
            true_relative_residual: T::zero(),
            krylov_time: start.elapsed().as_secs_f64(),
        });
    }

    let max_iter = max_iter.min(n.max(1));
    let inv_beta = Complex::new(T::one() / beta, T::zero());
    let mut basis: Vec<Vec<Complex<T>>> = vec![r0.iter().map(|&v| v * inv_beta).collect()];
    // Hessenberg columns, already rotated into upper-triangular form
    let mut hess: Vec<Vec<Complex<T>>> = Vec::new();
    let mut cs: Vec<T> = Vec::new();
    let mut sn: Vec<Complex<T>> = Vec::new();
    let mut g = vec![Complex::new(beta, T::zero())];
    let mut history = vec![T::one()];
    let mut av = vec![zero; n];
    let mut w = vec![zero; n];
    let mut converged = false;
    let mut breakdown = false;

    for k in 0..max_iter {
        a.matvec(&basis[k], &mut av);
        p.apply(&av, &mut w);
        let w_norm0 = norm2(&w);
        let mut h = vec![zero; k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij: Complex<T> = v.iter().zip(&w).map(|(vi, wi)| vi.conj() * wi).sum();
            h[i] = hij;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hij * vi;
            }
        }
        let h_next = norm2(&w);
        h[k + 1] = Complex::new(h_next, T::zero());

        for i in 0..k {
            let (hi, hi1) = (h[i], h[i + 1]);
            h[i] = hi * cs[i] + sn[i] * hi1;
            h[i + 1] = hi1 * cs[i] - sn[i].conj() * hi;
        }
        let (c, s, r) = givens(h[k], h[k + 1]);
        h[k] = r;
        h[k + 1] = zero;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = gk * c;
        g.push(-s.conj() * gk);
        hess.push(h);

        let rel = g[k + 1].norm() / beta;
        history.push(rel);
        if rel <= tol {
            converged = true;
            break;
        }
        if h_next <= T::epsilon() * T::lit(10.0) * w_norm0 {
            breakdown = true;
            break;
        }
        let inv = Complex::new(T::one() / h_next, T::zero());
        basis.push(w.iter().map(|&v| v * inv).collect());
    }

    let m = hess.len();
    if breakdown && !converged {
        return Err(Error::Breakdown { iteration: m, residual: history[m].as_f64() });
    }

    let mut y = vec![zero; m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for j in (i + 1)..m {
            acc -= hess[j][i] * y[j];
        }
        y[i] = acc / hess[i][i];
    }
    let mut x = vec![zero; n];
    for (yj, v) in y.iter().zip(&basis) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += yj * vi;
        }
    }
    let krylov_time = start.elapsed().as_secs_f64();

    a.matvec(&x, &mut av);
    let res: Vec<Complex<T>> = b.iter().zip(&av).map(|(bi, ai)| bi - ai).collect();
    let true_relative_residual = norm2(&res) / norm2(b);

    Ok(SolveReport {
        solution: x,
        iterations: m,
        converged,
        residual_history: history,
        true_relative_residual,
        krylov_time,
    })
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s, r)` with
/// `[c s; -s̄ c] [a; b] = [r; 0]`.
fn givens<T: Real>(a: Complex<T>, b: Complex<T>) -> (T, Complex<T>, Complex<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb.is_zero() {
        return (T::one(), Complex::zero(), a);
    }
    if na.is_zero() {
        return (T::zero(), Complex::new(T::one(), T::zero()), b);
    }
    let r = na.hypot(nb);
    let phase = a / na;
    let c = na / r;
    let s = phase * b.conj() / r;
    (c, s, phase * r)
}
