//! Small dense linear-algebra kernels used by the zero solvers.

mod assign;
mod hqr;
mod lu;
mod real;
mod tridiag;

pub use assign::{greedy_assignment, optimal_assignment};
pub use hqr::{balance, hessenberg_eigenvalues, hessenberg_eigenvalues_in, DenseMatrix};
pub use lu::{lu_determinant, lu_determinant_in, solve_dense};
pub use real::Real;
pub use tridiag::symmetric_tridiagonal_eigenvalues;
