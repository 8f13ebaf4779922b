//! Markov-modulated jump-telegraph short-rate models.
//!
//! The crate covers the two-state jump-telegraph process (closed-form mean and
//! moment generating function, exact sampling, martingale checks), the change
//! to a risk-neutral measure, four short-rate models built on the process, and
//! three independent ways to price zero-coupon bonds:
//!
//! * closed forms under the unbiased expectation hypothesis ([`analytic`]),
//! * the coupled pricing PDE, via an affine ODE reduction or implicit upwind
//!   finite differences ([`pde`]),
//! * Monte Carlo over exact or step-refined paths ([`mc`]).
//!
//! The gap between the first and the other two is the convexity adjustment.

pub mod analytic;
pub mod config;
pub mod error;
pub mod mc;
pub mod measure;
pub mod models;
pub mod pde;
pub mod regime;
pub mod rng;
pub mod tables;
pub mod telegraph;

pub use analytic::{bond_price_expectation, forward_rate, AffineCoeffs, DothanCoeffs};
pub use config::SolverConfig;
pub use error::{Error, Result};
pub use mc::{
    convexity_adjustment, price_bond_mc, price_bonds_mc, ConvexityMethod, ConvexityReport,
    McEstimate,
};
pub use measure::{radon_nikodym_on_path, to_risk_neutral, Measure, MeasureParams};
pub use models::{expected_future_rate, simulate_rate, ModelKind, ModelSpec, RatePath};
pub use pde::{
    feynman_kac_residual, solve_dothan_fd, solve_merton_ode, FdSolution, OdeReduction,
    PriceFunction,
};
pub use regime::Regime;
pub use rng::Estimate;
pub use telegraph::{martingale_stats, MartingaleSummary, TelegraphParams, TelegraphPath};
