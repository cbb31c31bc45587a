use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param_space::{weighted_norm, WeightMatrix};
use crate::scalar::Real;

/// `C₁‖Δ‖_D + C₂‖Δ‖_B`.
pub fn prior_mean<T: Real>(delta: &[T], c: [T; 2], b: &WeightMatrix<T>, d: &WeightMatrix<T>) -> Result<T> {
    if c[0] < T::zero() || c[1] < T::zero() {
        return Err(Error::InvalidArgument("prior-mean weights must be nonnegative".into()));
    }
    Ok(c[0] * weighted_norm(delta, d)? + c[1] * weighted_norm(delta, b)?)
}

/// One-dimensional kernel: the product of a linear and an exponential kernel,
/// summed over the sign orbit `{±d1} × {±d2}`.
pub fn kernel_eval<T: Real>(d1: T, d2: T, corr_length: T) -> T {
    let mut acc = T::zero();
    for s1 in [T::one(), -T::one()] {
        for s2 in [T::one(), -T::one()] {
            let (a, b) = (s1 * d1, s2 * d2);
            acc += a * b * (-(a - b).abs() / corr_length).exp();
        }
    }
    acc
}

/// Sum of the one-dimensional kernels over all coordinates.
pub fn kernel_sum<T: Real>(x: &[T], z: &[T], corr_lengths: &[T]) -> T {
    x.iter()
        .zip(z)
        .zip(corr_lengths)
        .map(|((&a, &b), &l)| kernel_eval(a, b, l))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HyperFit<T: Real> {
    pub c: [T; 2],
    /// Both design columns vanish, so the data carry no information on `C`.
    pub degenerate: bool,
}

/// Nonnegative least squares for `α_i ≈ C₁‖Δ_i‖_D + C₂‖Δ_i‖_B`. Collinear
/// columns are resolved by the minimum-norm solution.
pub fn fit_hyperparameters<T: Real>(
    inputs: &[Vec<T>],
    targets: &[T],
    b: &WeightMatrix<T>,
    d: &WeightMatrix<T>,
) -> Result<HyperFit<T>> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::InvalidArgument("need at least one training pair with a target each".into()));
    }
    let mut cols = (Vec::with_capacity(inputs.len()), Vec::with_capacity(inputs.len()));
    for x in inputs {
        cols.0.push(weighted_norm(x, d)?);
        cols.1.push(weighted_norm(x, b)?);
    }
    let dot = |u: &[T], v: &[T]| -> T { u.iter().zip(v).map(|(&p, &q)| p * q).sum() };
    let (g11, g12, g22) = (dot(&cols.0, &cols.0), dot(&cols.0, &cols.1), dot(&cols.1, &cols.1));
    let (r1, r2) = (dot(&cols.0, targets), dot(&cols.1, targets));
    let zero = T::zero();
    if g11 == zero && g22 == zero {
        return Ok(HyperFit { c: [zero, zero], degenerate: true });
    }
    let sse = |c: [T; 2]| -> T {
        (0..targets.len())
            .map(|i| {
                let e = c[0] * cols.0[i] + c[1] * cols.1[i] - targets[i];
                e * e
            })
            .sum()
    };

    let det = g11 * g22 - g12 * g12;
    let unconstrained = if det > T::lit(1e-12) * g11 * g22 {
        [(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det]
    } else {
        // rank one: project onto the dominant eigenvector of the Gram matrix
        let tr = g11 + g22;
        let (v1, v2) = if g11 >= g22 { (g11, g12) } else { (g12, g22) };
        let nv = (v1 * v1 + v2 * v2).sqrt();
        let (v1, v2) = (v1 / nv, v2 / nv);
        let s = (v1 * r1 + v2 * r2) / tr;
        [s * v1, s * v2]
    };
    if unconstrained[0] >= zero && unconstrained[1] >= zero {
        return Ok(HyperFit { c: unconstrained, degenerate: false });
    }
    let mut best = [zero, zero];
    let mut best_err = sse(best);
    let candidates = [
        [if g11 > zero { (r1 / g11).max(zero) } else { zero }, zero],
        [zero, if g22 > zero { (r2 / g22).max(zero) } else { zero }],
    ];
    for c in candidates {
        let e = sse(c);
        if e < best_err {
            best = c;
            best_err = e;
        }
    }
    Ok(HyperFit { c: best, degenerate: false })
}

/// Lower-triangular Cholesky factor, row-major.
fn cholesky<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut s = a[j * n + j];
        for k in 0..j {
            s -= l[j * n + k] * l[j * n + k];
        }
        if !(s > T::zero()) {
            return None;
        }
        let ljj = s.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

fn forward_solve<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn backward_solve<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Noise-free GP on `α` over shifted inputs `Δ = y − ȳ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GpState<T: Real> {
    pub train_inputs: Vec<Vec<T>>,
    pub train_targets: Vec<T>,
    pub c: [T; 2],
    pub corr_lengths: Vec<T>,
    pub b: WeightMatrix<T>,
    pub d: WeightMatrix<T>,
    pub jitter: T,
    pub degenerate_fit: bool,
    #[serde(skip)]
    factor: Option<Factor<T>>,
}

#[derive(Debug, Clone)]
struct Factor<T> {
    chol: Vec<T>,
    weights: Vec<T>,
}

const JITTER_ESCALATIONS: usize = 3;

impl<T: Real> GpState<T> {
    pub fn new(corr_lengths: Vec<T>, b: WeightMatrix<T>, d: WeightMatrix<T>) -> Result<Self> {
        let n = corr_lengths.len();
        if b.dim() != n || d.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.dim().max(d.dim()) });
        }
        if corr_lengths.iter().any(|&l| !(l > T::zero())) {
            return Err(Error::InvalidArgument("correlation lengths must be positive".into()));
        }
        let mut gp = Self {
            train_inputs: Vec::new(),
            train_targets: Vec::new(),
            c: [T::one(), T::one()],
            corr_lengths,
            b,
            d,
            jitter: T::zero(),
            degenerate_fit: false,
            factor: None,
        };
        gp.refactor()?;
        Ok(gp)
    }

    pub fn dims(&self) -> usize {
        self.corr_lengths.len()
    }

    pub fn len(&self) -> usize {
        self.train_inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_inputs.is_empty()
    }

    pub fn kernel(&self, x: &[T], z: &[T]) -> T {
        kernel_sum(x, z, &self.corr_lengths)
    }

    pub fn prior(&self, delta: &[T]) -> Result<T> {
        prior_mean(delta, self.c, &self.b, &self.d)
    }

    /// Adds a noise-free observation without refitting `C`.
    pub fn push(&mut self, delta: Vec<T>, alpha: T) -> Result<()> {
        if delta.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: delta.len() });
        }
        self.train_inputs.push(delta);
        self.train_targets.push(alpha);
        self.refactor()
    }

    /// Refits `C` to the current data and refactors the Gram matrix.
    pub fn refit(&mut self) -> Result<()> {
        let fit = fit_hyperparameters(&self.train_inputs, &self.train_targets, &self.b, &self.d)?;
        self.c = fit.c;
        self.degenerate_fit = fit.degenerate;
        self.refactor()
    }

    pub fn set_hyperparameters(&mut self, c: [T; 2]) -> Result<()> {
        if c[0] < T::zero() || c[1] < T::zero() {
            return Err(Error::InvalidArgument("prior-mean weights must be nonnegative".into()));
        }
        self.c = c;
        self.refactor()
    }

    /// Rebuilds the Cholesky factor, e.g. after deserialization.
    pub fn refactor(&mut self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            self.jitter = T::zero();
            self.factor = Some(Factor { chol: Vec::new(), weights: Vec::new() });
            return Ok(());
        }
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = self.kernel(&self.train_inputs[i], &self.train_inputs[j]);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }
        let max_diag = (0..n).map(|i| gram[i * n + i]).fold(T::zero(), T::max);
        let mut jitter = T::lit(1e-10) * if max_diag > T::zero() { max_diag } else { T::one() };
        let mut chol = None;
        for attempt in 0..=JITTER_ESCALATIONS {
            if attempt > 0 {
                jitter *= T::lit(10.0);
            }
            let mut shifted = gram.clone();
            for i in 0..n {
                shifted[i * n + i] += jitter;
            }
            if let Some(l) = cholesky(&shifted, n) {
                chol = Some(l);
                break;
            }
        }
        let chol = chol.ok_or(Error::GramFactorization(jitter.as_f64()))?;
        let mut resid = Vec::with_capacity(n);
        for (x, &a) in self.train_inputs.iter().zip(&self.train_targets) {
            resid.push(a - self.prior(x)?);
        }
        let weights = backward_solve(&chol, n, &forward_solve(&chol, n, &resid));
        self.jitter = jitter;
        self.factor = Some(Factor { chol, weights });
        Ok(())
    }

    fn factor(&self) -> Result<&Factor<T>> {
        self.factor
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("GP factor missing; call refactor()".into()))
    }

    /// Posterior mean and variance of `α` at `delta` (mean not clamped).
    pub fn posterior(&self, delta: &[T]) -> Result<(T, T)> {
        if delta.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: delta.len() });
        }
        let f = self.factor()?;
        let n = self.len();
        let k: Vec<T> = self.train_inputs.iter().map(|x| self.kernel(delta, x)).collect();
        let mean = self.prior(delta)? + k.iter().zip(&f.weights).map(|(&a, &b)| a * b).sum::<T>();
        if n == 0 {
            return Ok((mean, self.kernel(delta, delta).max(T::zero())));
        }
        let v = forward_solve(&f.chol, n, &k);
        let var = self.kernel(delta, delta) - v.iter().map(|&x| x * x).sum::<T>();
        Ok((mean, var.max(T::zero())))
    }

    /// Posterior mean only; skips the triangular solve.
    pub fn posterior_mean(&self, delta: &[T]) -> Result<T> {
        if delta.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: delta.len() });
        }
        let f = self.factor()?;
        let s: T = self.train_inputs.iter().zip(&f.weights).map(|(x, &w)| self.kernel(delta, x) * w).sum();
        Ok(self.prior(delta)? + s)
    }
}
