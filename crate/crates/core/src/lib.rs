//! Partial sums `q_m(x; t) = sum_{n<=m} t^n alpha_n p_n(x)` of generating
//! functions of orthogonal polynomial families: evaluation by independent
//! routes, matrix pencils whose spectrum is the zero set, zero solvers,
//! critical-threshold searches and small-`t` asymptotics.

pub mod asymptotics;
pub mod cli;
pub mod critical;
pub mod error;
pub mod ext;
pub mod family;
pub mod linalg;
pub mod matrix_forms;
pub mod mp;
pub mod plot;
pub mod poly;
pub mod scalar;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
pub use ext::ExtFloat;
pub use family::{make_family, FamilyDoc, FamilyKind, FamilySpec, Hull, RecurrenceFamily, Tabulated};
pub use poly::PolynomialCoeffs;
pub use zeros::{zeros_aberth, zeros_eig, ZeroMethod, ZeroSet};
