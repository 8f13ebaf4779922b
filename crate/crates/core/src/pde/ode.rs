//! Affine reduction of the Merton-family pricing system.
//!
//! Substituting `F_i(t, x) = exp(x C(τ) + D_i(τ))`, `τ = T − t`, gives
//! `C(τ) = −τ` and the coupled system
//!
//! ```text
//! D_i'(τ) = −μ̃_i τ + σ_i² τ² / 2 + λ_i (exp(−η_i τ + D_{1−i} − D_i) − 1),   D_i(0) = 0
//! ```
//!
//! with `μ̃_i = μ_i + σ_i ψ_i`, integrated here with classic RK4.

use crate::config::SolverConfig;
use crate::error::{ensure_time, Error, Result};
use crate::models::ModelSpec;
use crate::pde::residual::PriceFunction;
use crate::regime::Regime;

/// `D_0, D_1` sampled on a uniform τ-grid, with slopes for Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeReduction {
    pub maturity: f64,
    pub step: f64,
    pub taus: Vec<f64>,
    pub d: Vec<[f64; 2]>,
    slopes: Vec<[f64; 2]>,
}

struct Rhs {
    drift: [f64; 2],
    half_var: [f64; 2],
    eta: [f64; 2],
    lambda: [f64; 2],
}

impl Rhs {
    fn eval(&self, tau: f64, d: [f64; 2]) -> [f64; 2] {
        std::array::from_fn(|i| {
            let j = 1 - i;
            -self.drift[i] * tau
                + self.half_var[i] * tau * tau
                + self.lambda[i] * (-self.eta[i] * tau + d[j] - d[i]).exp_m1()
        })
    }
}

fn axpy(d: [f64; 2], h: f64, k: [f64; 2]) -> [f64; 2] {
    [d[0] + h * k[0], d[1] + h * k[1]]
}

pub fn solve_merton_ode(
    model: &ModelSpec,
    maturity: f64,
    cfg: &SolverConfig,
) -> Result<OdeReduction> {
    model.validate()?;
    model.require_risk_neutral()?;
    if model.kind.is_dothan() {
        return Err(Error::UnsupportedModel(format!(
            "{} has no affine reduction; use the finite-difference solver",
            model.kind
        )));
    }
    ensure_time("maturity", maturity)?;
    if !(cfg.ode_step > 0.0 && cfg.ode_step.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ode_step must be > 0, got {}",
            cfg.ode_step
        )));
    }
    let rhs = Rhs {
        drift: [model.drift(Regime::Zero), model.drift(Regime::One)],
        half_var: [0.5 * model.sigma[0].powi(2), 0.5 * model.sigma[1].powi(2)],
        eta: model.eta,
        lambda: model.lambda,
    };
    let n = ((maturity / cfg.ode_step).ceil() as usize).max(1);
    let h = maturity / n as f64;
    let mut taus = Vec::with_capacity(n + 1);
    let mut ds = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    let mut d = [0.0, 0.0];
    taus.push(0.0);
    ds.push(d);
    slopes.push(rhs.eval(0.0, d));
    for k in 0..n {
        let tau = k as f64 * h;
        let k1 = rhs.eval(tau, d);
        let k2 = rhs.eval(tau + h / 2.0, axpy(d, h / 2.0, k1));
        let k3 = rhs.eval(tau + h / 2.0, axpy(d, h / 2.0, k2));
        let k4 = rhs.eval(tau + h, axpy(d, h, k3));
        d = std::array::from_fn(|i| d[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let t_next = (k + 1) as f64 * h;
        taus.push(t_next);
        ds.push(d);
        slopes.push(rhs.eval(t_next, d));
    }
    Ok(OdeReduction {
        maturity,
        step: h,
        taus,
        d: ds,
        slopes,
    })
}

impl OdeReduction {
    /// `D_0(τ), D_1(τ)` by cubic Hermite interpolation between RK4 nodes.
    pub fn d_at(&self, tau: f64) -> Result<[f64; 2]> {
        if !(0.0..=self.maturity).contains(&tau) {
            return Err(Error::InvalidArgument(format!(
                "tau = {tau} outside the solved range [0, {}]",
                self.maturity
            )));
        }
        let n = self.taus.len() - 1;
        if n == 0 || self.step == 0.0 {
            return Ok(self.d[0]);
        }
        let k = ((tau / self.step).floor() as usize).min(n - 1);
        let h = self.step;
        let s = (tau - self.taus[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(std::array::from_fn(|i| {
            h00 * self.d[k][i]
                + h10 * h * self.slopes[k][i]
                + h01 * self.d[k + 1][i]
                + h11 * h * self.slopes[k + 1][i]
        }))
    }

    /// `log F_i` at time-to-maturity `tau` and rate `x`.
    pub fn log_price(&self, i: Regime, x: f64, tau: f64) -> Result<f64> {
        Ok(-x * tau + self.d_at(tau)?[i.index()])
    }
}

impl PriceFunction for OdeReduction {
    fn maturity(&self) -> f64 {
        self.maturity
    }

    fn price(&self, i: Regime, t: f64, x: f64) -> Result<f64> {
        self.log_price(i, x, self.maturity - t).map(f64::exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn zero_coefficients_give_pure_discounting() {
        let m = ModelSpec::risk_neutral(
            ModelKind::JtMerton,
            [0.0, 0.0],
            [0.0, 0.0],
            [0.0, 0.0],
            [3.0, 0.7],
            [0.0, 0.0],
        )
        .unwrap();
        let sol = solve_merton_ode(&m, 2.0, &SolverConfig::default()).unwrap();
        for r in Regime::BOTH {
            for tau in [0.0, 0.3, 1.7, 2.0] {
                let p = sol.price(r, 2.0 - tau, 0.04).unwrap();
                assert!((p - (-0.04 * tau).exp()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_dothan_and_p_models() {
        let m = ModelSpec::risk_neutral(
            ModelKind::JtDothan,
            [0.0, 0.0],
            [0.0, 0.0],
            [0.1, 0.1],
            [1.0, 1.0],
            [0.0, 0.0],
        )
        .unwrap();
        assert!(solve_merton_ode(&m, 1.0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn terminal_condition_and_domain() {
        let m = ModelSpec::risk_neutral(
            ModelKind::JtMerton,
            [-0.02, 0.05],
            [0.0, 0.0],
            [0.01, -0.02],
            [1.0, 2.0],
            [0.0, 0.0],
        )
        .unwrap();
        let sol = solve_merton_ode(&m, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(sol.price(Regime::Zero, 1.0, 0.3).unwrap(), 1.0);
        assert!(sol.price(Regime::Zero, -0.1, 0.3).is_err());
    }
}
