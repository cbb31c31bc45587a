//! Parameter-space geometry: the box `Y`, collections of solve targets, weight
//! matrices for weighted ℓ² norms and the anisotropy profile that turns those
//! weights into Matérn correlation lengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned box `∏ [a_i, b_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParamBox<T: Real> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> ParamBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidArgument("parameter box needs at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::InvalidArgument(format!("empty interval in dimension {i}")));
        }
        Ok(Self { lower, upper })
    }

    /// The symmetric cube `[-1, 1]^n`.
    pub fn symmetric_unit(n: usize) -> Result<Self> {
        Self::new(vec![-T::one(); n], vec![T::one(); n])
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn center(&self) -> Vec<T> {
        self.lower.iter().zip(&self.upper).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect()
    }

    pub fn contains(&self, y: &[T]) -> bool {
        y.len() == self.dims()
            && y.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&v, (&a, &b))| v >= a && v <= b)
    }

    /// Clamps `y` into the box in place.
    pub fn project(&self, y: &mut [T]) {
        for (v, (&a, &b)) in y.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.max(a).min(b);
        }
    }
}

/// Finite, indexed collection of parameter points inside a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParamSet<T: Real> {
    bounds: ParamBox<T>,
    points: Vec<Vec<T>>,
}

impl<T: Real> ParamSet<T> {
    pub fn new(bounds: ParamBox<T>, points: Vec<Vec<T>>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if p.len() != bounds.dims() {
                return Err(Error::DimensionMismatch { expected: bounds.dims(), got: p.len() });
            }
            if !bounds.contains(p) {
                return Err(Error::InvalidArgument(format!("point {i} lies outside the parameter box")));
            }
        }
        Ok(Self { bounds, points })
    }

    pub fn bounds(&self) -> &ParamBox<T> {
        &self.bounds
    }

    pub fn dims(&self) -> usize {
        self.bounds.dims()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &[T] {
        &self.points[index]
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[T])> {
        self.points.iter().enumerate().map(|(i, p)| (i, p.as_slice()))
    }
}

/// Symmetric positive semidefinite `N × N` weight matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WeightMatrix<T: Real> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Real> WeightMatrix<T> {
    /// Validates symmetry and the eigenvalue floor `λ_min ≥ -1e-10·‖M‖`.
    pub fn new(n: usize, entries: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("weight matrix must be at least 1x1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        let scale = entries.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let sym_tol = T::epsilon() * T::lit(16.0) * scale.max(T::min_positive_value());
        for i in 0..n {
            for j in (i + 1)..n {
                if (entries[i * n + j] - entries[j * n + i]).abs() > sym_tol {
                    return Err(Error::InvalidArgument(format!("weight matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let m = Self { n, entries };
        let lmin = m.eigenvalues().into_iter().fold(T::infinity(), T::min);
        if lmin < -T::lit(1e-10) * m.spectral_bound() {
            return Err(Error::NotPsd(lmin.as_f64()));
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[T]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![T::zero(); n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = d;
        }
        Self::new(n, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n]).expect("identity is PSD")
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![T::zero(); n * n] }
    }

    /// Rank-one matrix `w wᵀ`.
    pub fn outer(w: &[T]) -> Result<Self> {
        let n = w.len();
        let entries = (0..n * n).map(|k| w[k / n] * w[k % n]).collect();
        Self::new(n, entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero())
    }

    /// Rescales so the largest diagonal entry is one. The zero matrix is
    /// returned unchanged.
    pub fn normalized(&self) -> Self {
        let dmax = self.diag().into_iter().fold(T::zero(), T::max);
        if dmax <= T::zero() {
            return self.clone();
        }
        Self { n: self.n, entries: self.entries.iter().map(|&v| v / dmax).collect() }
    }

    /// Frobenius norm, an upper bound for the spectral norm.
    fn spectral_bound(&self) -> T {
        self.entries.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Eigenvalues by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        let mut a = self.entries.clone();
        let two = T::lit(2.0);
        for _sweep in 0..64 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            if off <= T::epsilon() * T::epsilon() * self.spectral_bound().powi(2) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.is_zero() {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).collect()
    }

    pub(crate) fn quadratic_form(&self, delta: &[T]) -> T {
        let n = self.n;
        let mut acc = T::zero();
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            let ri: T = row.iter().zip(delta).map(|(&m, &d)| m * d).sum();
            acc += delta[i] * ri;
        }
        acc
    }
}

/// Anisotropy weights and the correlation lengths they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AnisotropyProfile<T: Real> {
    pub gamma: Vec<T>,
    pub corr_lengths: Vec<T>,
    pub domain_diameter: T,
}

impl<T: Real> AnisotropyProfile<T> {
    /// Builds the profile directly from positive weights `γ`.
    pub fn from_gamma(gamma: Vec<T>, domain_diameter: T) -> Result<Self> {
        if !(domain_diameter > T::zero()) {
            return Err(Error::InvalidArgument("domain diameter must be positive".into()));
        }
        if let Some(j) = gamma.iter().position(|&g| !(g > T::zero())) {
            return Err(Error::InactiveDimension(j));
        }
        let gmax = gamma.iter().copied().fold(T::zero(), T::max);
        let corr_lengths = gamma
            .iter()
            .map(|&g| if g == gmax { domain_diameter } else { domain_diameter * gmax / g })
            .collect();
        Ok(Self { gamma, corr_lengths, domain_diameter })
    }

    pub fn dims(&self) -> usize {
        self.gamma.len()
    }
}

/// `sqrt(δᵀ M δ)`.
pub fn weighted_norm<T: Real>(delta: &[T], m: &WeightMatrix<T>) -> Result<T> {
    if delta.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: delta.len() });
    }
    let q = m.quadratic_form(delta);
    if q < T::zero() {
        let d2: T = delta.iter().map(|&d| d * d).sum();
        let tol = T::lit(1e-10) * m.spectral_bound() * d2;
        if -q > tol {
            return Err(Error::NotPsd(q.as_f64()));
        }
        return Ok(T::zero());
    }
    Ok(q.sqrt())
}

/// Diagonal weights `diag(η_i²)` of the sector-wise affine refractive index.
pub fn affine_b<T: Real>(eta: &[T]) -> Result<WeightMatrix<T>> {
    if eta.is_empty() {
        return Err(Error::InvalidArgument("eta must be nonempty".into()));
    }
    if let Some(i) = eta.iter().position(|&e| !(e > T::zero())) {
        return Err(Error::InvalidArgument(format!("eta[{i}] must be positive")));
    }
    WeightMatrix::diagonal(&eta.iter().map(|&e| e * e).collect::<Vec<_>>())
}

/// Upper bounds for `‖Φ_j‖_{W^{1,∞}}` of the mollified Fourier shape modes,
/// `j = 1..=n`.
pub fn shape_w1inf_norms<T: Real>(theta_amp: T, alpha_decay: T, grad_chi_inf: T, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one shape mode".into()));
    }
    if !(theta_amp > T::zero()) || !(grad_chi_inf > T::zero()) || !(alpha_decay > T::one()) {
        return Err(Error::InvalidArgument(
            "shape norms need positive amplitude, positive mollifier slope and decay > 1".into(),
        ));
    }
    let two = T::lit(2.0);
    Ok((1..=n)
        .map(|j| {
            let jf = T::from_usize_lossy(j);
            if j == 1 {
                two * theta_amp * grad_chi_inf
            } else if j % 2 == 0 {
                ((jf + two) / two).powf(-alpha_decay) * theta_amp * (T::one() + grad_chi_inf + jf / two)
            } else {
                ((jf + T::one()) / two).powf(-alpha_decay)
                    * theta_amp
                    * (T::one() + grad_chi_inf + (jf - T::one()) / two)
            }
        })
        .collect())
}

/// `γ_j = C₁√D_jj + C₂√B_jj` and `l_j = diam · max γ / γ_j`.
pub fn anisotropy_profile<T: Real>(
    b: &WeightMatrix<T>,
    d: &WeightMatrix<T>,
    c1: T,
    c2: T,
    domain_diameter: T,
) -> Result<AnisotropyProfile<T>> {
    if b.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: b.dim(), got: d.dim() });
    }
    if c1 < T::zero() || c2 < T::zero() || !(c1 + c2 > T::zero()) {
        return Err(Error::InvalidArgument("need C1, C2 >= 0 with C1 + C2 > 0".into()));
    }
    let gamma = (0..b.dim())
        .map(|j| c1 * d.get(j, j).max(T::zero()).sqrt() + c2 * b.get(j, j).max(T::zero()).sqrt())
        .collect();
    AnisotropyProfile::from_gamma(gamma, domain_diameter)
}
