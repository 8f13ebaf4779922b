//! Equivalent measures: Wiener density `L^ψ`, intensity density `L^θ`, and the
//! mapping from physical to risk-neutral model parameters.

use crate::error::{ensure_finite, Error, Result};
use crate::models::{ModelSpec, RatePath};

/// Probability measure a model's parameters refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Physical,
    RiskNeutral,
}

/// Intensity multipliers `θ_i` and market prices of diffusion risk `ψ_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureParams {
    pub theta: [f64; 2],
    pub psi: [f64; 2],
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams::IDENTITY
    }
}

impl MeasureParams {
    pub const IDENTITY: MeasureParams = MeasureParams {
        theta: [1.0, 1.0],
        psi: [0.0, 0.0],
    };

    pub fn new(theta: [f64; 2], psi: [f64; 2]) -> Result<Self> {
        let mp = MeasureParams { theta, psi };
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..2 {
            ensure_finite("theta", self.theta[k])?;
            ensure_finite("psi", self.psi[k])?;
            if self.theta[k] <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "theta{k} must be > 0, got {}",
                    self.theta[k]
                )));
            }
        }
        Ok(())
    }
}

/// Risk-neutral version of a physical model: intensities become `θ_i λ_i` and
/// the drift used for simulation becomes `μ_i + σ_i ψ_i`.
pub fn to_risk_neutral(model: &ModelSpec) -> Result<ModelSpec> {
    if model.measure == Measure::RiskNeutral {
        return Err(Error::InvalidState(
            "model is already risk-neutral; the measure change cannot be applied twice".into(),
        ));
    }
    let theta = model.measure_params.theta;
    let mut q = model.clone();
    q.lambda = [theta[0] * model.lambda[0], theta[1] * model.lambda[1]];
    q.measure = Measure::RiskNeutral;
    q.validate()?;
    Ok(q)
}

/// Density `dQ/dP = L^ψ_T · L^θ_T` evaluated along a physical path.
///
/// `L^ψ_T = exp(∫ ψ dW − ½ ∫ ψ² ds)` is oriented so that `W − ∫ ψ ds` is a
/// Q-Brownian motion, which is what gives the risk-neutral drift `μ + σψ`.
pub fn radon_nikodym_on_path(model: &ModelSpec, path: &RatePath) -> Result<f64> {
    if model.measure != Measure::Physical {
        return Err(Error::InvalidState(
            "density must be evaluated on a physical-measure model".into(),
        ));
    }
    let MeasureParams { theta, psi } = model.measure_params;
    let lambda = model.lambda;

    let mut log_density = 0.0;
    for (start, end, r) in path.segments() {
        let k = r.index();
        log_density += (1.0 - theta[k]) * lambda[k] * (end - start);
    }
    for &before in path.jump_regimes().iter() {
        log_density += theta[before.index()].ln();
    }

    if model.kind.is_diffusive() {
        let increments = path.wiener.as_ref().ok_or_else(|| {
            Error::InvalidArgument("diffusive model requires stored Wiener increments".into())
        })?;
        for inc in increments {
            let p = psi[inc.regime.index()];
            log_density += p * inc.dw - 0.5 * p * p * inc.dt;
        }
    }
    Ok(log_density.exp())
}
