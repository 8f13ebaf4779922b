//! Monte Carlo bond prices `E^Q[exp(−∫_0^T r ds)]` and convexity-adjustment reports.

use std::fmt::Write as _;

use crate::analytic::{forward_rate, log_bond_price_expectation};
use crate::config::SolverConfig;
use crate::error::{ensure_finite, ensure_time, Error, Result};
use crate::models::{run_path, validate_step, ModelKind, ModelSpec, PathSink, SimSetup};
use crate::pde::{solve_dothan_fd_at, solve_merton_ode};
use crate::regime::Regime;
use crate::rng::{par_moments_dyn, substream};

/// A Monte Carlo price with its sampling error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub seed: u64,
    /// Brownian grid spacing, for diffusive kinds.
    pub step: Option<f64>,
    pub antithetic: bool,
}

struct IntegralsAt<'a> {
    out: &'a mut [f64],
}

impl PathSink for IntegralsAt<'_> {
    fn observe(&mut self, k: usize, _rate: f64, integral: f64) {
        self.out[k] = integral;
    }
}

/// Discount factors `exp(−∫_0^{T_k} r ds)` of path `index` at every maturity.
fn discount_factors(
    model: &ModelSpec,
    i: Regime,
    r0: f64,
    maturities: &[f64],
    cfg: &SolverConfig,
    seed: u64,
    index: u64,
    out: &mut [f64],
) {
    let horizon = *maturities.last().expect("non-empty maturities");
    let antithetic = cfg.antithetic && model.kind.is_diffusive();
    let setup = SimSetup {
        horizon,
        step: cfg.mc_step,
        observe: maturities,
        normal_sign: 1.0,
    };
    let mut rng = substream(seed, index);
    run_path(
        model,
        r0,
        i,
        &setup,
        &mut rng,
        &mut IntegralsAt { out: &mut *out },
    );
    if antithetic {
        let mut twin = vec![0.0; out.len()];
        let mut rng = substream(seed, index);
        let setup = SimSetup {
            normal_sign: -1.0,
            ..setup
        };
        run_path(
            model,
            r0,
            i,
            &setup,
            &mut rng,
            &mut IntegralsAt { out: &mut twin },
        );
        for (o, t) in out.iter_mut().zip(&twin) {
            *o = 0.5 * ((-*o).exp() + (-t).exp());
        }
    } else {
        for o in out.iter_mut() {
            *o = (-*o).exp();
        }
    }
}

fn check_mc_inputs(model: &ModelSpec, r0: f64, n_paths: u64, cfg: &SolverConfig) -> Result<()> {
    model.validate()?;
    model.require_risk_neutral()?;
    ensure_finite("r0", r0)?;
    if n_paths < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 paths, got {n_paths}"
        )));
    }
    validate_step(model, cfg.mc_step)
}

/// Risk-neutral Monte Carlo price of the zero-coupon bond maturing at `maturity`.
pub fn price_bond_mc(
    model: &ModelSpec,
    i: Regime,
    r0: f64,
    maturity: f64,
    n_paths: u64,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<McEstimate> {
    Ok(price_bonds_mc(model, i, r0, &[maturity], n_paths, cfg, seed)?[0])
}

/// Prices at several maturities (non-decreasing) from one set of paths.
pub fn price_bonds_mc(
    model: &ModelSpec,
    i: Regime,
    r0: f64,
    maturities: &[f64],
    n_paths: u64,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check_mc_inputs(model, r0, n_paths, cfg)?;
    if maturities.is_empty() {
        return Err(Error::InvalidArgument("no maturities".into()));
    }
    for &m in maturities {
        ensure_time("maturity", m)?;
    }
    if maturities.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "maturities must be non-decreasing".into(),
        ));
    }
    let moments = par_moments_dyn(n_paths, maturities.len(), |index, out| {
        discount_factors(model, i, r0, maturities, cfg, seed, index, out)
    });
    Ok(moments
        .iter()
        .map(|m| {
            let est = m.estimate();
            McEstimate {
                estimate: est.mean,
                stderr: est.stderr,
                n_paths,
                seed,
                step: model.kind.is_diffusive().then_some(cfg.mc_step),
                antithetic: cfg.antithetic && model.kind.is_diffusive(),
            }
        })
        .collect())
}

/// How the arbitrage-free price entering the implied forward is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityMethod {
    /// ODE reduction (Merton family) or finite differences (Dothan family).
    Pde,
    Mc {
        n_paths: u64,
        seed: u64,
    },
}

impl ConvexityMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ConvexityMethod::Pde => "pde",
            ConvexityMethod::Mc { .. } => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityPoint {
    pub maturity: f64,
    /// Expectation-hypothesis forward rate.
    pub f_exp: f64,
    /// Forward rate implied by the arbitrage-free price, `−∂_T log F`.
    pub f_impl: f64,
    pub adjustment: f64,
    /// Standard error of the adjustment (Monte Carlo only).
    pub stderr: Option<f64>,
    pub log_price_exp: f64,
    pub log_price_impl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub model: ModelKind,
    pub regime: Regime,
    pub r0: f64,
    pub method: ConvexityMethod,
    pub points: Vec<ConvexityPoint>,
}

impl ConvexityReport {
    /// CSV with columns `maturity, f_exp, f_impl, adjustment, stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("maturity,f_exp,f_impl,adjustment,stderr\n");
        for p in &self.points {
            let se = p.stderr.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.maturity, p.f_exp, p.f_impl, p.adjustment, se
            );
        }
        out
    }
}

/// `n` maturities spaced geometrically from `first` to `last`.
pub fn geometric_grid(first: f64, last: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![last];
    }
    let ratio = (last / first).ln() / (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                last
            } else {
                first * (ratio * k as f64).exp()
            }
        })
        .collect()
}

/// Default report grid: 41 points from `maturity / 40` to `maturity`.
pub fn default_maturity_grid(maturity: f64) -> Vec<f64> {
    geometric_grid(maturity / 40.0, maturity, 41)
}

/// Second-order first-derivative stencils on a non-uniform grid.
pub(crate) fn derivative_stencils(grid: &[f64]) -> Vec<[(usize, f64); 3]> {
    let n = grid.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                let (h1, h2) = (grid[1] - grid[0], grid[2] - grid[1]);
                [
                    (0, -(2.0 * h1 + h2) / (h1 * (h1 + h2))),
                    (1, (h1 + h2) / (h1 * h2)),
                    (2, -h1 / (h2 * (h1 + h2))),
                ]
            } else if k == n - 1 {
                let (h1, h2) = (grid[n - 2] - grid[n - 3], grid[n - 1] - grid[n - 2]);
                [
                    (n - 3, h2 / (h1 * (h1 + h2))),
                    (n - 2, -(h1 + h2) / (h1 * h2)),
                    (n - 1, (2.0 * h2 + h1) / (h2 * (h1 + h2))),
                ]
            } else {
                let (h1, h2) = (grid[k] - grid[k - 1], grid[k + 1] - grid[k]);
                [
                    (k - 1, -h2 / (h1 * (h1 + h2))),
                    (k, (h2 - h1) / (h1 * h2)),
                    (k + 1, h1 / (h2 * (h1 + h2))),
                ]
            }
        })
        .collect()
}

fn check_grid(maturities: &[f64]) -> Result<()> {
    if maturities.len() < 3 {
        return Err(Error::InvalidConfig(
            "maturity grid needs at least 3 points".into(),
        ));
    }
    for &m in maturities {
        ensure_time("maturity", m)?;
    }
    for w in maturities.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidConfig(
                "maturity grid must be strictly increasing".into(),
            ));
        }
        if w[1] - w[0] < 1e-4 {
            return Err(Error::InvalidConfig(format!(
                "maturity spacing {} below 1e-4 is too fine for stable differencing",
                w[1] - w[0]
            )));
        }
    }
    Ok(())
}

/// Convexity adjustment `a(T) = f_impl(T) − f_exp(T)` on a maturity grid.
///
/// The implied forward is obtained by differencing
/// `log F_impl − log F_exp` (smooth and small) and adding back the exact
/// `f_exp`, which keeps the stencil error far below the adjustment itself.
pub fn convexity_adjustment(
    model: &ModelSpec,
    i: Regime,
    r0: f64,
    maturities: &[f64],
    method: ConvexityMethod,
    cfg: &SolverConfig,
) -> Result<ConvexityReport> {
    model.validate()?;
    model.require_risk_neutral()?;
    ensure_finite("r0", r0)?;
    check_grid(maturities)?;
    let last = *maturities.last().expect("checked length");
    let stencils = derivative_stencils(maturities);
    let log_exp: Vec<f64> = maturities
        .iter()
        .map(|&m| log_bond_price_expectation(model, i, r0, 0.0, m))
        .collect::<Result<_>>()?;
    let f_exp: Vec<f64> = maturities
        .iter()
        .map(|&m| forward_rate(model, i, r0, 0.0, m))
        .collect::<Result<_>>()?;

    let (log_impl, stderr): (Vec<f64>, Option<Vec<f64>>) = match method {
        ConvexityMethod::Pde => {
            let logs = if model.kind.is_dothan() {
                let positive: Vec<f64> = maturities.iter().copied().filter(|&m| m > 0.0).collect();
                let sol = solve_dothan_fd_at(model, r0, last, cfg, &positive)?;
                maturities
                    .iter()
                    .map(|&m| {
                        if m == 0.0 {
                            Ok(0.0)
                        } else {
                            sol.price_at_tau(i, m, r0).map(f64::ln)
                        }
                    })
                    .collect::<Result<_>>()?
            } else {
                let sol = solve_merton_ode(model, last, cfg)?;
                maturities
                    .iter()
                    .map(|&m| sol.log_price(i, r0, m))
                    .collect::<Result<_>>()?
            };
            (logs, None)
        }
        ConvexityMethod::Mc { n_paths, seed } => {
            check_mc_inputs(model, r0, n_paths, cfg)?;
            let k = maturities.len();
            let sample = |index: u64, out: &mut [f64]| {
                discount_factors(model, i, r0, maturities, cfg, seed, index, out)
            };
            let prices: Vec<f64> = par_moments_dyn(n_paths, k, sample)
                .iter()
                .map(|m| m.mean)
                .collect();
            // Second pass over the same substreams for the delta-method error of each stencil.
            let influence = par_moments_dyn(n_paths, k, |index, out| {
                let mut df = vec![0.0; k];
                sample(index, &mut df);
                for (o, st) in out.iter_mut().zip(&stencils) {
                    *o = -st.iter().map(|&(j, w)| w * df[j] / prices[j]).sum::<f64>();
                }
            });
            (
                prices.iter().map(|p| p.ln()).collect(),
                Some(influence.iter().map(|m| m.estimate().stderr).collect()),
            )
        }
    };

    let gap: Vec<f64> = log_impl.iter().zip(&log_exp).map(|(a, b)| a - b).collect();
    let points = maturities
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let adjustment = -stencils[k].iter().map(|&(j, w)| w * gap[j]).sum::<f64>();
            ConvexityPoint {
                maturity: m,
                f_exp: f_exp[k],
                f_impl: f_exp[k] + adjustment,
                adjustment,
                stderr: stderr.as_ref().map(|s| s[k]),
                log_price_exp: log_exp[k],
                log_price_impl: log_impl[k],
            }
        })
        .collect();
    Ok(ConvexityReport {
        model: model.kind,
        regime: i,
        r0,
        method,
        points,
    })
}
