//! Reducibility of quadratic quasi-periodically forced Landau Hamiltonians.
//!
//! The core is generic over the scalar (`f32`, `f64`, or any type meeting
//! [`scalar::Real`]); the aliases below fix it to `f64`.

pub mod constants;
pub mod error;
pub mod homological;
pub mod kam;
pub mod linalg;
pub mod oracle;
pub mod quadham;
pub mod scalar;
pub mod trigpoly;

pub use error::{Error, Result};
pub use quadham::{ClassTag, Gauge, Monomial, NormalKind};

pub type TrigPoly = trigpoly::TrigPoly<f64>;
pub type QuadHamiltonian = quadham::QuadHamiltonian<f64>;
pub type NormalForm = quadham::NormalForm<f64>;
pub type GaugeSystem = quadham::GaugeSystem<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
