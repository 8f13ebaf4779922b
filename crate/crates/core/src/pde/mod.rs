//! Numerical solution of the coupled pricing system
//! `∂_t F_i + 𝓛 F_i = x F_i`, `F_i(T, x) = 1`, `i ∈ {0, 1}`.

mod fd;
mod ode;
mod residual;
mod tridiag;

pub use fd::{solve_dothan_fd, solve_dothan_fd_at, FdSolution};
pub use ode::{solve_merton_ode, OdeReduction};
pub use residual::{feynman_kac_residual, ExpectationPrice, PriceFunction};
pub(crate) use tridiag::solve_tridiagonal;
