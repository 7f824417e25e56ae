//! Exact controls and closed-form solutions for two-point boundary value
//! problems of the wave equation.

pub mod error;
pub mod field;
pub mod funcrep;
pub mod line1d;
pub mod periodic;
pub mod bounded;
pub mod nonlinear;
pub mod curvflow;
pub mod nd3;
pub mod verify;

pub use error::{Error, Result};
pub use field::SpaceTimeField;
pub use funcrep::{Func, Quadrature};
