//! The two benchmark families: a sector-wise affine refractive index and a
//! star-shaped scatterer pulled back to the reference annulus.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::zeta::riemann_zeta;
use super::HelmholtzConfig;
use crate::error::{Error, Result};
use crate::param_space::{affine_b, anisotropy_profile, shape_w1inf_norms, AnisotropyProfile, WeightMatrix};

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `n(y, x) = 1 + Σ 𝟙_{Ω_i}(x) χ(x) η_i (y_i − 1)/2` on `N` angular sectors.
    Affine { eta: Vec<f64> },
    /// Boundary `r(y, θ) = r_in + Σ ψ_j(θ) y_j` with Fourier modes of
    /// amplitude `amplitude` decaying like `k^{-decay}`.
    Shape { dims: usize, amplitude: f64, decay: f64 },
}

/// A parameterized Helmholtz problem together with the weight matrices that
/// drive the surrogate prior.
#[derive(Debug, Clone)]
pub struct ProblemFamily {
    kind: FamilyKind,
    r_in: f64,
    r_mol: f64,
    r_out: f64,
    b: WeightMatrix<f64>,
    d: WeightMatrix<f64>,
    profile: AnisotropyProfile<f64>,
}

/// `χ(x) = clamp((|x| − r_mol)/(r_in − r_mol), 0, 1)`.
pub fn mollifier(x: [f64; 2], cfg: &HelmholtzConfig) -> f64 {
    mollifier_radial(x[0].hypot(x[1]), cfg.r_in, cfg.r_mol)
}

fn mollifier_radial(r: f64, r_in: f64, r_mol: f64) -> f64 {
    ((r - r_mol) / (r_in - r_mol)).clamp(0.0, 1.0)
}

fn mollifier_slope(r: f64, r_in: f64, r_mol: f64) -> f64 {
    if r < r_mol {
        1.0 / (r_in - r_mol)
    } else {
        0.0
    }
}

/// Largest admissible shape amplitude: `r_in / (1 + √2 (ζ(decay) − 1))`.
pub fn theta_max(decay: f64, r_in: f64) -> f64 {
    r_in / (1.0 + 2f64.sqrt() * (riemann_zeta(decay) - 1.0))
}

/// Angle of `x` in `[0, 2π)`.
pub fn polar_angle(x: [f64; 2]) -> f64 {
    let t = x[1].atan2(x[0]);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Fourier mode `ψ_j(θ)` (1-based `j`) and its derivative in `θ`.
pub fn shape_basis(theta: f64, j: usize, amplitude: f64, decay: f64) -> (f64, f64) {
    assert!(j >= 1, "shape modes are 1-based");
    if j == 1 {
        return (amplitude, 0.0);
    }
    let jf = j as f64;
    if j % 2 == 0 {
        let a = amplitude * ((jf + 2.0) / 2.0).powf(-decay);
        let w = jf / 2.0;
        (a * (w * theta).sin(), a * w * (w * theta).cos())
    } else {
        let a = amplitude * ((jf + 1.0) / 2.0).powf(-decay);
        let w = (jf - 1.0) / 2.0;
        (a * (w * theta).cos(), -a * w * (w * theta).sin())
    }
}

impl ProblemFamily {
    pub fn affine(eta: Vec<f64>, cfg: &HelmholtzConfig) -> Result<Self> {
        cfg.validate()?;
        if let Some(i) = eta.iter().position(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "eta[{i}] = {} must lie in (0, 1) to keep the refractive index positive",
                eta[i]
            )));
        }
        let b = affine_b(&eta)?.normalized();
        let d = WeightMatrix::zeros(eta.len());
        Self::finish(FamilyKind::Affine { eta }, cfg, b, d)
    }

    pub fn shape(dims: usize, amplitude: f64, decay: f64, cfg: &HelmholtzConfig) -> Result<Self> {
        cfg.validate()?;
        if dims == 0 {
            return Err(Error::InvalidArgument("shape family needs at least one mode".into()));
        }
        if !(decay > 1.0) {
            return Err(Error::InvalidArgument("shape decay must exceed 1".into()));
        }
        let tmax = theta_max(decay, cfg.r_in);
        if !(amplitude > 0.0 && amplitude < tmax) {
            return Err(Error::InvalidArgument(format!(
                "shape amplitude {amplitude} must lie in (0, {tmax}) for decay {decay}"
            )));
        }
        let w = shape_w1inf_norms(amplitude, decay, 1.0 / (cfg.r_mol - cfg.r_in), dims)?;
        let b = WeightMatrix::outer(&w)?.normalized();
        let d = b.clone();
        Self::finish(FamilyKind::Shape { dims, amplitude, decay }, cfg, b, d)
    }

    fn finish(kind: FamilyKind, cfg: &HelmholtzConfig, b: WeightMatrix<f64>, d: WeightMatrix<f64>) -> Result<Self> {
        let profile = anisotropy_profile(&b, &d, 1.0, 1.0, 2.0 * cfg.r_out)?;
        Ok(Self { kind, r_in: cfg.r_in, r_mol: cfg.r_mol, r_out: cfg.r_out, b, d, profile })
    }

    pub fn from_kind(kind: &FamilyKind, cfg: &HelmholtzConfig) -> Result<Self> {
        match kind {
            FamilyKind::Affine { eta } => Self::affine(eta.clone(), cfg),
            FamilyKind::Shape { dims, amplitude, decay } => Self::shape(*dims, *amplitude, *decay, cfg),
        }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn dims(&self) -> usize {
        match &self.kind {
            FamilyKind::Affine { eta } => eta.len(),
            FamilyKind::Shape { dims, .. } => *dims,
        }
    }

    /// Weight matrix of the refractive-index term, unit max diagonal.
    pub fn b(&self) -> &WeightMatrix<f64> {
        &self.b
    }

    /// Weight matrix of the diffusion term, unit max diagonal (zero for the
    /// affine family).
    pub fn d(&self) -> &WeightMatrix<f64> {
        &self.d
    }

    /// Profile at unit hyperparameters.
    pub fn reference_profile(&self) -> &AnisotropyProfile<f64> {
        &self.profile
    }

    pub fn domain_diameter(&self) -> f64 {
        2.0 * self.r_out
    }

    fn check_param(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: y.len() });
        }
        Ok(())
    }

    /// Refractive index of the affine family; `1` for the shape family on
    /// the physical domain.
    pub fn affine_n(&self, y: &[f64], x: [f64; 2]) -> f64 {
        let FamilyKind::Affine { eta } = &self.kind else {
            return 1.0;
        };
        let n = eta.len();
        let chi = mollifier_radial(x[0].hypot(x[1]), self.r_in, self.r_mol);
        if chi == 0.0 {
            return 1.0;
        }
        let sector = ((polar_angle(x) * n as f64 / (2.0 * PI)).floor() as usize).min(n - 1);
        1.0 + chi * eta[sector] * (y[sector] - 1.0) / 2.0
    }

    /// Radial offset `Σ ψ_j(θ) y_j` and its `θ`-derivative.
    fn shape_offset(&self, y: &[f64], theta: f64) -> (f64, f64) {
        let FamilyKind::Shape { amplitude, decay, .. } = &self.kind else {
            return (0.0, 0.0);
        };
        y.iter().enumerate().fold((0.0, 0.0), |(s, ds), (k, &yk)| {
            let (p, dp) = shape_basis(theta, k + 1, *amplitude, *decay);
            (s + p * yk, ds + dp * yk)
        })
    }

    /// Scatterer boundary radius `r(y, θ)`.
    pub fn boundary_radius(&self, y: &[f64], theta: f64) -> f64 {
        self.r_in + self.shape_offset(y, theta).0
    }

    /// `Φ(y, x) = x + χ(x) Σ ψ_j(θ(x)) y_j · x/|x|` and its Jacobian.
    pub fn shape_map(&self, y: &[f64], x: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        self.check_param(y)?;
        let r = x[0].hypot(x[1]);
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("shape map undefined at the origin".into()));
        }
        let theta = polar_angle(x);
        let (psi, dpsi) = self.shape_offset(y, theta);
        let chi = mollifier_radial(r, self.r_in, self.r_mol);
        let big_r = r + chi * psi;
        let rr = 1.0 + mollifier_slope(r, self.r_in, self.r_mol) * psi;
        let rt = chi * dpsi;
        let er = [x[0] / r, x[1] / r];
        let et = [-er[1], er[0]];
        // DΦ = R_r e_r e_rᵀ + (R_θ / r) e_r e_θᵀ + (R / r) e_θ e_θᵀ
        let mut jac = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                jac[i][j] = rr * er[i] * er[j] + rt / r * er[i] * et[j] + big_r / r * et[i] * et[j];
            }
        }
        let phi = [big_r * er[0], big_r * er[1]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det > 0.0) {
            return Err(Error::DegenerateMap { det, x: x[0], y: x[1] });
        }
        Ok((phi, jac))
    }

    /// `A = DΦ⁻¹ DΦ⁻ᵀ det DΦ`, `n = det DΦ`.
    pub fn pulled_back_coeffs(&self, y: &[f64], x: [f64; 2]) -> Result<(Mat2, f64)> {
        let (_, j) = self.shape_map(y, x)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        let mut a = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                a[r][c] = det * (inv[r][0] * inv[c][0] + inv[r][1] * inv[c][1]);
            }
        }
        Ok((a, det))
    }

    /// Coefficients `(A, n)` of the weak form on the reference annulus.
    pub fn coefficients(&self, y: &[f64], x: [f64; 2]) -> Result<(Mat2, f64)> {
        match &self.kind {
            FamilyKind::Affine { .. } => Ok(([[1.0, 0.0], [0.0, 1.0]], self.affine_n(y, x))),
            FamilyKind::Shape { .. } => self.pulled_back_coeffs(y, x),
        }
    }
}
