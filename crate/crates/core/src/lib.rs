//! Numerical laboratory for weighted composition operators
//! `b = Σ_g a_g T_g` over finite measured group actions.
//!
//! - [`group`]: finite groups, characters, Følner deficiency
//! - [`dynamics`]: measured G-spaces, freedom, Radon–Nikodym cocycles
//! - [`algebra`]: symbolic elements, twisting, coefficient extraction
//! - [`norms`]: ℓ^p realizations, exact formulas and norm sandwiches
//! - [`verify`]: structural checks producing [`verify::VerificationReport`]s
//! - [`scenario`]: scenario files and seeded random scenarios

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod group;
pub mod norms;
pub mod scenario;
pub mod verify;

pub use algebra::{AlgebraElement, CoefficientField};
pub use dynamics::{MeasuredGSpace, Weight};
pub use error::{Error, Result};
pub use exec::Exec;
pub use group::{Character, FiniteGroup, GroupDescriptor};
pub use norms::{EstimateOptions, Exponent, NormBounds, Realization};
