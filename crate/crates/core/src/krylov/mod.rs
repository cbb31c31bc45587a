//! Complex sparse linear algebra: CSR storage, LU preconditioners and
//! left-preconditioned GMRES with iteration counting.

mod cost;
mod csr;
mod dense;
mod gmres;
mod lu;
pub mod matrix_market;

use num_complex::Complex;

pub use cost::{CostMode, CostModel};
pub use csr::CsrMatrix;
pub use dense::{alpha_of, DENSE_LIMIT};
pub use gmres::{gmres_left, SolveReport};
pub use lu::{lu_factor, reverse_cuthill_mckee, LuPreconditioner};

#[allow(unused_imports)]
pub(crate) use csr::norm2;

use crate::scalar::Real;

/// Action `z = P r` of an (approximate) inverse.
pub trait Preconditioner<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[Complex<T>], z: &mut [Complex<T>]);
}

/// `P = I`; plain GMRES.
#[derive(Debug, Clone, Copy)]
pub struct IdentityPreconditioner {
    n: usize,
}

impl IdentityPreconditioner {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl<T: Real> Preconditioner<T> for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[Complex<T>], z: &mut [Complex<T>]) {
        z.copy_from_slice(r);
    }
}
