//! Implicit upwind finite differences for the Dothan-family pricing system
//!
//! ```text
//! ∂_t F_i + x μ̃_i ∂_x F_i + ½ σ_i² x² ∂_xx F_i + λ_i [F_{1−i}(t, x(1+η_i)) − F_i] = x F_i
//! ```
//!
//! marched backward from `F_i(T, ·) = 1` with backward Euler. Transport is
//! upwinded by the sign of `x μ̃_i`, diffusion uses central second differences,
//! reaction and the `−λ_i F_i` term are implicit. The nonlocal coupling
//! `F_{1−i}(t, x(1+η_i))` is interpolated from the previous time level, so each
//! regime solves its own tridiagonal system. With `fd_coupling_sweeps > 1` the
//! step is repeated as block Gauss–Seidel on the latest iterate of the other
//! regime, which removes the lag error (about `λ r Δt` in the forward rate).

use crate::config::SolverConfig;
use crate::error::{ensure_finite, ensure_time, Error, Result};
use crate::models::ModelSpec;
use crate::pde::residual::PriceFunction;
use crate::pde::solve_tridiagonal;
use crate::regime::Regime;

/// Price surfaces on `[0, x_max]` at the stored time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub maturity: f64,
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
    /// Stored times-to-maturity, ascending from 0.
    pub taus: Vec<f64>,
    /// `surfaces[k][i][j] = F_i(T − taus[k], x_j)`.
    pub surfaces: Vec<[Vec<f64>; 2]>,
}

impl FdSolution {
    pub fn dx(&self) -> f64 {
        self.x_max / self.nx as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.nx).map(|j| j as f64 * dx).collect()
    }

    /// Calendar times of the stored levels, descending from `T` to 0.
    pub fn times(&self) -> Vec<f64> {
        self.taus.iter().map(|tau| self.maturity - tau).collect()
    }

    fn interp_x(&self, values: &[f64], x: f64) -> f64 {
        let pos = x / self.dx();
        let j = (pos.floor() as usize).min(self.nx - 1);
        let w = pos - j as f64;
        (1.0 - w) * values[j] + w * values[j + 1]
    }

    /// `F_i` at the stored level whose time-to-maturity equals `tau`.
    pub fn price_at_tau(&self, i: Regime, tau: f64, x: f64) -> Result<f64> {
        self.check_x(x)?;
        let k = self
            .taus
            .iter()
            .position(|&s| (s - tau).abs() <= 1e-12 * self.maturity.max(1.0))
            .ok_or_else(|| Error::InvalidArgument(format!("no stored level at tau = {tau}")))?;
        Ok(self.interp_x(&self.surfaces[k][i.index()], x))
    }

    /// Price at valuation time 0.
    pub fn initial_price(&self, i: Regime, x: f64) -> Result<f64> {
        self.price_at_tau(i, self.maturity, x)
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(0.0..=self.x_max).contains(&x) {
            return Err(Error::InvalidArgument(format!(
                "x = {x} outside the grid [0, {}]",
                self.x_max
            )));
        }
        Ok(())
    }

    /// CSV dump with columns `t, x, F0, F1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,F0,F1\n");
        let grid = self.grid();
        for (k, tau) in self.taus.iter().enumerate() {
            let t = self.maturity - tau;
            for (j, x) in grid.iter().enumerate() {
                out.push_str(&format!(
                    "{t},{x},{},{}\n",
                    self.surfaces[k][0][j], self.surfaces[k][1][j]
                ));
            }
        }
        out
    }
}

impl PriceFunction for FdSolution {
    fn maturity(&self) -> f64 {
        self.maturity
    }

    /// Bilinear interpolation between stored levels and grid nodes.
    fn price(&self, i: Regime, t: f64, x: f64) -> Result<f64> {
        self.check_x(x)?;
        let tau = self.maturity - t;
        let last = *self.taus.last().expect("at least one level");
        if !(0.0..=last).contains(&tau) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside the solved range"
            )));
        }
        let k = self
            .taus
            .partition_point(|&s| s <= tau)
            .clamp(1, self.taus.len() - 1);
        let (a, b) = (self.taus[k - 1], self.taus[k]);
        let w = if b > a { (tau - a) / (b - a) } else { 0.0 };
        let lo = self.interp_x(&self.surfaces[k - 1][i.index()], x);
        let hi = self.interp_x(&self.surfaces[k][i.index()], x);
        Ok((1.0 - w) * lo + w * hi)
    }
}

/// Default right end of the rate grid: eight times the rate reachable by the
/// fastest deterministic growth over the maturity, and at least 1.
pub fn default_x_max(model: &ModelSpec, r0: f64, maturity: f64) -> f64 {
    let growth = model
        .drift(Regime::Zero)
        .abs()
        .max(model.drift(Regime::One).abs());
    let var = model.sigma[0].max(model.sigma[1]).powi(2);
    (r0 * ((growth + var) * maturity).exp() * 8.0).max(1.0)
}

pub fn solve_dothan_fd(
    model: &ModelSpec,
    r0: f64,
    maturity: f64,
    cfg: &SolverConfig,
) -> Result<FdSolution> {
    solve_dothan_fd_at(model, r0, maturity, cfg, &[])
}

/// As [`solve_dothan_fd`], additionally landing on and storing every
/// time-to-maturity in `extra_taus`.
pub fn solve_dothan_fd_at(
    model: &ModelSpec,
    r0: f64,
    maturity: f64,
    cfg: &SolverConfig,
    extra_taus: &[f64],
) -> Result<FdSolution> {
    model.validate()?;
    model.require_risk_neutral()?;
    if !model.kind.is_dothan() {
        return Err(Error::UnsupportedModel(format!(
            "{} is affine; use the ODE reduction",
            model.kind
        )));
    }
    ensure_finite("r0", r0)?;
    if r0 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Dothan rates are non-negative, got r0 = {r0}"
        )));
    }
    ensure_time("maturity", maturity)?;
    if cfg.fd_nx < 2 || cfg.fd_nt < 1 {
        return Err(Error::InvalidConfig(format!(
            "grid too small: nx = {}, nt = {}",
            cfg.fd_nx, cfg.fd_nt
        )));
    }
    if cfg.fd_coupling_sweeps == 0 {
        return Err(Error::InvalidConfig(
            "fd_coupling_sweeps must be at least 1".into(),
        ));
    }
    let x_max = cfg
        .fd_x_max
        .unwrap_or_else(|| default_x_max(model, r0, maturity));
    let reach = r0 * (1.0 + model.eta[0].max(model.eta[1]).max(0.0));
    if !(x_max > 0.0) || x_max < reach {
        return Err(Error::InvalidConfig(format!(
            "x_max = {x_max} does not contain r0 (1 + max eta) = {reach}"
        )));
    }
    for &tau in extra_taus {
        if !(tau > 0.0 && tau <= maturity) {
            return Err(Error::InvalidArgument(format!(
                "requested tau = {tau} outside (0, {maturity}]"
            )));
        }
    }

    let nx = cfg.fd_nx;
    let nt = cfg.fd_nt;
    let dx = x_max / nx as f64;
    let x: Vec<f64> = (0..=nx).map(|j| j as f64 * dx).collect();

    // Time stops: the uniform grid merged with the requested levels.
    let base_dt = maturity / nt as f64;
    let mut stops: Vec<(f64, bool)> = (1..=nt)
        .map(|k| {
            let keep = k == nt || (cfg.fd_snapshot_every > 0 && k % cfg.fd_snapshot_every == 0);
            (
                if k == nt {
                    maturity
                } else {
                    k as f64 * base_dt
                },
                keep,
            )
        })
        .collect();
    for &tau in extra_taus {
        match stops
            .iter_mut()
            .find(|(s, _)| (s - tau).abs() <= 1e-12 * maturity.max(1.0))
        {
            Some(stop) => stop.1 = true,
            None => stops.push((tau, true)),
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Landing points of the jump coupling, as (left node, weight).
    let landing: [Vec<(usize, f64)>; 2] = std::array::from_fn(|i| {
        x.iter()
            .map(|&xj| {
                let pos = xj * (1.0 + model.eta[i]) / dx;
                let j = (pos.floor() as usize).min(nx - 1);
                (j, pos - j as f64)
            })
            .collect()
    });
    let velocity: [Vec<f64>; 2] = std::array::from_fn(|i| {
        let g = model.drift(Regime::try_from(i).expect("regime index"));
        x.iter().map(|&xj| xj * g).collect()
    });
    let diffusion: [Vec<f64>; 2] = std::array::from_fn(|i| {
        let s2 = 0.5 * model.sigma[i] * model.sigma[i];
        x.iter().map(|&xj| s2 * xj * xj / (dx * dx)).collect()
    });

    let n = nx + 1;
    let mut current = [vec![1.0; n], vec![1.0; n]];
    let mut next = [vec![0.0; n], vec![0.0; n]];
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    let mut taus = vec![0.0];
    let mut surfaces = vec![current.clone()];
    let mut tau = 0.0;
    for &(stop, keep) in &stops {
        let dt = stop - tau;
        if dt <= 0.0 {
            continue;
        }
        let inv_dt = 1.0 / dt;
        for sweep in 0..cfg.fd_coupling_sweeps {
            for i in 0..2 {
                let lam = model.lambda[i];
                // first sweep: both regimes see the previous level
                let other = if sweep == 0 {
                    &current[1 - i]
                } else {
                    &next[1 - i]
                };
                let v = &velocity[i];
                let dc = &diffusion[i];
                for j in 0..n {
                    let (l, w) = landing[i][j];
                    let coupled = ((1.0 - w) * other[l] + w * other[l + 1]).max(0.0);
                    rhs[j] = current[i][j] * inv_dt + lam * coupled;
                    let base = inv_dt + lam + x[j];
                    if j == 0 {
                        // x = 0: no transport, no diffusion
                        lower[j] = 0.0;
                        diag[j] = base;
                        upper[j] = 0.0;
                    } else if j == nx {
                        // linear extrapolation beyond x_max: one-sided slope, no curvature
                        lower[j] = v[j] / dx;
                        diag[j] = base - v[j] / dx;
                        upper[j] = 0.0;
                    } else {
                        let fwd = v[j].max(0.0) / dx;
                        let bwd = v[j].min(0.0) / dx;
                        lower[j] = bwd - dc[j];
                        diag[j] = base + fwd - bwd + 2.0 * dc[j];
                        upper[j] = -fwd - dc[j];
                    }
                }
                solve_tridiagonal(&lower, &diag, &upper, &rhs, &mut scratch, &mut next[i]);
            }
        }
        std::mem::swap(&mut current, &mut next);
        tau = stop;
        if keep {
            taus.push(stop);
            surfaces.push(current.clone());
        }
    }

    Ok(FdSolution {
        maturity,
        x_max,
        nx,
        nt,
        taus,
        surfaces,
    })
}
