use crate::analytic::log_bond_price_expectation;
use crate::error::{ensure_finite, Error, Result};
use crate::models::ModelSpec;
use crate::regime::Regime;

/// A bond-price surface `F_i(t, x)` for a fixed maturity.
pub trait PriceFunction {
    fn maturity(&self) -> f64;
    fn price(&self, i: Regime, t: f64, x: f64) -> Result<f64>;
}

/// The expectation-hypothesis price as a function of `(t, x)`.
#[derive(Debug, Clone)]
pub struct ExpectationPrice {
    pub model: ModelSpec,
    pub maturity: f64,
}

impl PriceFunction for ExpectationPrice {
    fn maturity(&self) -> f64 {
        self.maturity
    }

    fn price(&self, i: Regime, t: f64, x: f64) -> Result<f64> {
        if t > self.maturity {
            return Err(Error::InvalidArgument(format!("t = {t} beyond maturity")));
        }
        log_bond_price_expectation(&self.model, i, x, t, self.maturity).map(f64::exp)
    }
}

/// `∂_t F_i + 𝓛 F_i − x F_i` at `(t, x)` for both regimes, with derivatives
/// taken by central differences of steps `steps = (dt, dx)`.
pub fn feynman_kac_residual<F: PriceFunction + ?Sized>(
    model: &ModelSpec,
    f: &F,
    t: f64,
    x: f64,
    steps: (f64, f64),
) -> Result<[f64; 2]> {
    model.validate()?;
    ensure_finite("t", t)?;
    ensure_finite("x", x)?;
    let (dt, dx) = steps;
    if !(dt > 0.0 && dx > 0.0) {
        return Err(Error::InvalidConfig(
            "difference steps must be positive".into(),
        ));
    }
    let dothan = model.kind.is_dothan();
    let mut out = [0.0; 2];
    for i in Regime::BOTH {
        let k = i.index();
        let here = f.price(i, t, x)?;
        let dfdt = (f.price(i, t + dt, x)? - f.price(i, t - dt, x)?) / (2.0 * dt);
        let up = f.price(i, t, x + dx)?;
        let down = f.price(i, t, x - dx)?;
        let dfdx = (up - down) / (2.0 * dx);
        let d2fdx2 = (up - 2.0 * here + down) / (dx * dx);
        let (velocity, vol, landing) = if dothan {
            (
                x * model.drift(i),
                model.sigma[k] * x,
                x * (1.0 + model.eta[k]),
            )
        } else {
            (model.drift(i), model.sigma[k], x + model.eta[k])
        };
        let other = f.price(i.flip(), t, landing)?;
        out[k] =
            dfdt + velocity * dfdx + 0.5 * vol * vol * d2fdx2 + model.lambda[k] * (other - here)
                - x * here;
    }
    Ok(out)
}
