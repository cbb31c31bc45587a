//! P1 finite elements for exterior Dirichlet scattering on an annulus with a
//! first-order absorbing condition on the outer circle.

mod assemble;
mod family;
mod mesh;
mod zeta;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assemble::{assemble, assemble_with, l2_error, plane_wave, BoundaryData};
pub use family::{mollifier, polar_angle, shape_basis, theta_max, FamilyKind, Mat2, ProblemFamily};
pub use mesh::{build_annulus_mesh, build_annulus_mesh_with, AnnulusMesh};
pub use zeta::riemann_zeta;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct HelmholtzConfig {
    pub k0: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub r_mol: f64,
    pub incident_direction: [f64; 2],
    /// Relative (preconditioned) GMRES tolerance.
    pub tol: f64,
    /// `c` in `h = c · k0^{-3/2}`.
    pub mesh_factor: f64,
    pub max_iter: usize,
}

impl Default for HelmholtzConfig {
    fn default() -> Self {
        Self {
            k0: 10.0,
            r_in: 0.25,
            r_out: 1.0,
            r_mol: 0.9,
            incident_direction: [1.0, 0.0],
            tol: 1e-5,
            mesh_factor: 2.5,
            max_iter: 1000,
        }
    }
}

impl HelmholtzConfig {
    pub fn with_wavenumber(k0: f64) -> Self {
        Self { k0, ..Self::default() }
    }

    pub fn mesh_size(&self) -> f64 {
        self.mesh_factor * self.k0.powf(-1.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0 && self.k0.is_finite()) {
            return Err(Error::InvalidArgument(format!("k0 = {} must be positive", self.k0)));
        }
        if !(0.0 < self.r_in && self.r_in < self.r_mol && self.r_mol < self.r_out) {
            return Err(Error::InvalidArgument("need 0 < r_in < r_mol < r_out".into()));
        }
        let [dx, dy] = self.incident_direction;
        if !((dx.hypot(dy) - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidArgument("incident direction must be a unit vector".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument("tol must lie in (0, 1)".into()));
        }
        if !(self.mesh_factor > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument("mesh_factor and max_iter must be positive".into()));
        }
        Ok(())
    }
}
