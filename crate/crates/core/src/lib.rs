//! Surrogate-guided placement of LU preconditioners for families of
//! parametrized linear systems, with a Helmholtz scattering benchmark.

pub mod error;
pub mod harness;
pub mod helmholtz;
pub mod krylov;
pub mod param_space;
pub mod placement;
pub mod scalar;
pub mod surrogate;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ParamBoxF64 = param_space::ParamBox<f64>;
pub type ParamSetF64 = param_space::ParamSet<f64>;
pub type WeightMatrixF64 = param_space::WeightMatrix<f64>;
pub type CsrMatrixF64 = krylov::CsrMatrix<f64>;
pub type LuPreconditionerF64 = krylov::LuPreconditioner<f64>;
pub type SurrogateF64 = surrogate::Surrogate<f64>;
pub type TrainedSurrogateF64 = surrogate::TrainedSurrogate<f64>;
pub type PlacementPlanF64 = placement::PlacementPlan<f64>;
