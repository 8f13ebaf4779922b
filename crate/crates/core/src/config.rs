/// Numerical settings shared by the ODE, finite-difference and Monte Carlo engines.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// RK4 step for the Merton-family ODE reduction (years).
    pub ode_step: f64,
    /// Spatial intervals of the Dothan finite-difference grid.
    pub fd_nx: usize,
    /// Time steps of the finite-difference solve over the full maturity.
    pub fd_nt: usize,
    /// Upper end of the rate grid; derived from the model when `None`.
    pub fd_x_max: Option<f64>,
    /// Gauss–Seidel sweeps over the two regimes per finite-difference step.
    /// 1 lags the jump coupling by one time level; more sweeps make it implicit.
    pub fd_coupling_sweeps: usize,
    /// Keep every n-th time level of the finite-difference solution (0 keeps only the ends).
    pub fd_snapshot_every: usize,
    /// Brownian grid spacing for diffusive Monte Carlo paths (years).
    pub mc_step: f64,
    /// Pair each diffusive path with its sign-flipped twin.
    pub antithetic: bool,
    /// Steps `(dt, dx)` for the central differences in residual checks.
    pub fd_check_steps: (f64, f64),
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            ode_step: 1e-4,
            fd_nx: 2000,
            fd_nt: 2000,
            fd_x_max: None,
            fd_coupling_sweeps: 1,
            fd_snapshot_every: 100,
            mc_step: 1.0 / 256.0,
            antithetic: false,
            fd_check_steps: (1e-4, 1e-3),
        }
    }
}
