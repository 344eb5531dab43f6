pub mod baseline;
pub mod corpus;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod model;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense matrix aliases.
pub type Matrix32 = numerics::Matrix<f32>;
pub type Matrix64 = numerics::Matrix<f64>;

/// Network aliases.
pub type JointMap32 = model::JointMap<f32>;
pub type JointMap64 = model::JointMap<f64>;

pub type ParamStore32 = numerics::ParamStore<f32>;
pub type ParamStore64 = numerics::ParamStore<f64>;
