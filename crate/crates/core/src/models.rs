//! The four jump-telegraph short-rate models, exact path simulation, and the
//! closed-form expected future spot rate.

use std::fmt;
use std::str::FromStr;

use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_finite, ensure_time, Error, Result};
use crate::measure::{Measure, MeasureParams};
use crate::regime::Regime;
use crate::rng::exponential;
use crate::telegraph::TelegraphParams;

/// Short-rate dynamics between and at regime switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `dr = μ dt + η dN`
    JtMerton,
    /// `dr = r_-(μ dt + η dN)`
    JtDothan,
    /// `dr = μ dt + σ dW + η dN`
    JtdMerton,
    /// `dr = r_-(μ dt + σ dW + η dN)`
    JtdDothan,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::JtMerton,
        ModelKind::JtDothan,
        ModelKind::JtdMerton,
        ModelKind::JtdDothan,
    ];

    pub fn is_diffusive(self) -> bool {
        matches!(self, ModelKind::JtdMerton | ModelKind::JtdDothan)
    }

    /// Multiplicative (Dothan-type) dynamics.
    pub fn is_dothan(self) -> bool {
        matches!(self, ModelKind::JtDothan | ModelKind::JtdDothan)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::JtMerton => "jt_merton",
            ModelKind::JtDothan => "jt_dothan",
            ModelKind::JtdMerton => "jtd_merton",
            ModelKind::JtdDothan => "jtd_dothan",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown model kind '{s}' (expected jt_merton, jt_dothan, jtd_merton or jtd_dothan)"
                ))
            })
    }
}

/// A fully parameterised short-rate model.
///
/// For a risk-neutral model `lambda` holds the Q-intensities and the effective
/// drift is `μ_i + σ_i ψ_i`; `measure_params.theta` then only records the
/// transform that was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    pub eta: [f64; 2],
    pub lambda: [f64; 2],
    pub measure: Measure,
    pub measure_params: MeasureParams,
}

impl ModelSpec {
    pub fn physical(
        kind: ModelKind,
        mu: [f64; 2],
        sigma: [f64; 2],
        eta: [f64; 2],
        lambda: [f64; 2],
        measure_params: MeasureParams,
    ) -> Result<Self> {
        let m = ModelSpec {
            kind,
            mu,
            sigma,
            eta,
            lambda,
            measure: Measure::Physical,
            measure_params,
        };
        m.validate()?;
        Ok(m)
    }

    /// Model specified directly under Q, with intensities `λ^Q_i` and
    /// market prices of diffusion risk `ψ_i`.
    pub fn risk_neutral(
        kind: ModelKind,
        mu: [f64; 2],
        sigma: [f64; 2],
        eta: [f64; 2],
        lambda_q: [f64; 2],
        psi: [f64; 2],
    ) -> Result<Self> {
        let m = ModelSpec {
            kind,
            mu,
            sigma,
            eta,
            lambda: lambda_q,
            measure: Measure::RiskNeutral,
            measure_params: MeasureParams {
                theta: [1.0, 1.0],
                psi,
            },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.measure_params.validate()?;
        for k in 0..2 {
            ensure_finite("mu", self.mu[k])?;
            ensure_finite("sigma", self.sigma[k])?;
            ensure_finite("eta", self.eta[k])?;
            ensure_finite("lambda", self.lambda[k])?;
            if self.lambda[k] <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "lambda{k} must be > 0, got {}",
                    self.lambda[k]
                )));
            }
            if self.sigma[k] < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "sigma{k} must be >= 0, got {}",
                    self.sigma[k]
                )));
            }
            if self.kind.is_diffusive() && self.sigma[k] == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{} needs sigma{k} > 0 (use the non-diffusive kind instead)",
                    self.kind
                )));
            }
            if !self.kind.is_diffusive() && self.sigma[k] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{} has no diffusion but sigma{k} = {}",
                    self.kind, self.sigma[k]
                )));
            }
            if self.kind.is_dothan() && self.eta[k] <= -1.0 {
                return Err(Error::InvalidArgument(format!(
                    "{} needs eta{k} > -1 to keep rates positive, got {}",
                    self.kind, self.eta[k]
                )));
            }
        }
        Ok(())
    }

    /// Drift coefficient used for simulation under the tagged measure.
    #[inline]
    pub fn drift(&self, i: Regime) -> f64 {
        let k = i.index();
        match self.measure {
            Measure::Physical => self.mu[k],
            Measure::RiskNeutral => self.mu[k] + self.sigma[k] * self.measure_params.psi[k],
        }
    }

    /// Common volatility required by the diffusive Dothan closed forms.
    pub fn common_sigma(&self) -> Result<f64> {
        if self.sigma[0] != self.sigma[1] {
            return Err(Error::UnsupportedModel(format!(
                "{} closed forms require sigma0 == sigma1 (got {} and {})",
                self.kind, self.sigma[0], self.sigma[1]
            )));
        }
        Ok(self.sigma[0])
    }

    pub(crate) fn require_risk_neutral(&self) -> Result<()> {
        if self.measure != Measure::RiskNeutral {
            return Err(Error::InvalidState(
                "prices and expected rates are Q-expectations; convert the model first".into(),
            ));
        }
        Ok(())
    }

    /// The jump-telegraph process whose mean (Merton family) or MGF at `z = 1`
    /// (Dothan family) gives the expected future spot rate.
    pub fn telegraph(&self) -> Result<TelegraphParams> {
        let drift = [self.drift(Regime::Zero), self.drift(Regime::One)];
        if self.kind.is_dothan() {
            let s = self.common_sigma()?;
            TelegraphParams::new(
                [drift[0] - 0.5 * s * s, drift[1] - 0.5 * s * s],
                [self.eta[0].ln_1p(), self.eta[1].ln_1p()],
                self.lambda,
            )
        } else {
            TelegraphParams::new(drift, self.eta, self.lambda)
        }
    }

    /// `E^Q[r_{t+τ} | r_t = r, ε(t) = i]`.
    pub fn expected_future_rate(&self, i: Regime, r: f64, tau: f64) -> Result<f64> {
        expected_future_rate(self, i, r, tau)
    }
}

/// `E^Q[r_{t+τ} | r_t = r, ε(t) = i]` in closed form.
pub fn expected_future_rate(model: &ModelSpec, i: Regime, r: f64, tau: f64) -> Result<f64> {
    model.validate()?;
    model.require_risk_neutral()?;
    ensure_finite("r", r)?;
    ensure_time("tau", tau)?;
    if tau == 0.0 {
        return Ok(r);
    }
    let y = model.telegraph()?;
    if model.kind.is_dothan() {
        let s = model.common_sigma()?;
        let log_growth = y.log_mgf(i, 1.0, tau)? + 0.5 * s * s * tau;
        Ok(r * log_growth.exp())
    } else {
        Ok(r + y.mean(i, tau)?)
    }
}

/// One Brownian increment used along a path, with the regime it fell in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerIncrement {
    pub dt: f64,
    pub dw: f64,
    pub regime: Regime,
}

/// A simulated short-rate trajectory.
///
/// Nodes are stored at time 0, every switching time (post-jump values), every
/// grid point of the diffusive scheme, and the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePath {
    pub initial_regime: Regime,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub regimes: Vec<Regime>,
    pub rates: Vec<f64>,
    /// `∫_0^t r_s ds` at each node.
    pub integrals: Vec<f64>,
    pub switch_times: Vec<f64>,
    pub wiener: Option<Vec<WienerIncrement>>,
}

impl RatePath {
    pub fn final_rate(&self) -> f64 {
        *self.rates.last().expect("path has at least one node")
    }

    pub fn integral(&self) -> f64 {
        *self.integrals.last().expect("path has at least one node")
    }

    /// Regime held just before each switch.
    pub fn jump_regimes(&self) -> Vec<Regime> {
        (0..self.switch_times.len())
            .map(|k| {
                if k % 2 == 0 {
                    self.initial_regime
                } else {
                    self.initial_regime.flip()
                }
            })
            .collect()
    }

    /// Constant-regime segments `(start, end, regime)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, Regime)> + '_ {
        let n = self.switch_times.len();
        (0..=n).map(move |k| {
            let start = if k == 0 {
                0.0
            } else {
                self.switch_times[k - 1]
            };
            let end = if k == n {
                self.horizon
            } else {
                self.switch_times[k]
            };
            let r = if k % 2 == 0 {
                self.initial_regime
            } else {
                self.initial_regime.flip()
            };
            (start, end, r)
        })
    }
}

/// Receives the events of a simulated path. All methods default to no-ops so
/// the pricing loops pay nothing for what they do not record.
pub(crate) trait PathSink {
    fn node(&mut self, _t: f64, _regime: Regime, _rate: f64, _integral: f64) {}
    fn switch(&mut self, _t: f64) {}
    fn wiener(&mut self, _inc: WienerIncrement) {}
    fn observe(&mut self, _k: usize, _rate: f64, _integral: f64) {}
}

/// Path-independent simulation settings.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SimSetup<'a> {
    pub horizon: f64,
    /// Brownian grid spacing; unused for non-diffusive kinds.
    pub step: f64,
    /// Sorted times in `[0, horizon]` at which `observe` fires.
    pub observe: &'a [f64],
    /// Multiplier on every normal draw (`-1` for the antithetic twin).
    pub normal_sign: f64,
}

/// Simulates one path of `model` under the measure it is tagged with.
pub(crate) fn run_path<R: RngExt + ?Sized, S: PathSink>(
    model: &ModelSpec,
    r0: f64,
    i0: Regime,
    setup: &SimSetup<'_>,
    rng: &mut R,
    sink: &mut S,
) {
    let diffusive = model.kind.is_diffusive();
    let dothan = model.kind.is_dothan();
    let drift = [model.drift(Regime::Zero), model.drift(Regime::One)];
    let horizon = setup.horizon;

    let mut t = 0.0;
    let mut regime = i0;
    let mut r = r0;
    let mut integral = 0.0;
    let mut next_switch = exponential(rng, model.lambda[regime.index()]);
    let mut next_obs = 0usize;
    let mut grid_k = 1u64;
    sink.node(0.0, regime, r, 0.0);

    loop {
        while next_obs < setup.observe.len() && setup.observe[next_obs] <= t {
            sink.observe(next_obs, r, integral);
            next_obs += 1;
        }
        if t >= horizon {
            break;
        }
        let k = regime.index();
        let mut target = horizon.min(next_switch);
        if let Some(&obs) = setup.observe.get(next_obs) {
            target = target.min(obs);
        }
        let mut on_grid = false;
        if diffusive {
            let grid = grid_k as f64 * setup.step;
            if grid < target {
                target = grid;
                on_grid = true;
            } else if grid == target {
                on_grid = true;
            }
        }
        let h = target - t;
        if h > 0.0 {
            let g = drift[k];
            if diffusive {
                let s = model.sigma[k];
                let z: f64 = StandardNormal.sample(rng);
                let dw = setup.normal_sign * z * h.sqrt();
                let r_new = if dothan {
                    r * ((g - 0.5 * s * s) * h + s * dw).exp()
                } else {
                    r + g * h + s * dw
                };
                integral += 0.5 * (r + r_new) * h;
                r = r_new;
                sink.wiener(WienerIncrement { dt: h, dw, regime });
            } else if dothan {
                let gh = g * h;
                let growth = if gh == 0.0 { h } else { gh.exp_m1() / g };
                integral += r * growth;
                r *= gh.exp();
            } else {
                integral += r * h + 0.5 * g * h * h;
                r += g * h;
            }
        }
        t = target;
        if on_grid {
            grid_k += 1;
        }
        if t == next_switch && t <= horizon {
            while next_obs < setup.observe.len() && setup.observe[next_obs] <= t {
                sink.observe(next_obs, r, integral);
                next_obs += 1;
            }
            if dothan {
                r *= 1.0 + model.eta[k];
            } else {
                r += model.eta[k];
            }
            regime = regime.flip();
            next_switch = t + exponential(rng, model.lambda[regime.index()]);
            sink.switch(t);
            sink.node(t, regime, r, integral);
        } else if h > 0.0 && (on_grid || t == horizon) {
            sink.node(t, regime, r, integral);
        }
    }
}

struct Recorder {
    path: RatePath,
}

impl PathSink for Recorder {
    fn node(&mut self, t: f64, regime: Regime, rate: f64, integral: f64) {
        let p = &mut self.path;
        p.times.push(t);
        p.regimes.push(regime);
        p.rates.push(rate);
        p.integrals.push(integral);
    }

    fn switch(&mut self, t: f64) {
        self.path.switch_times.push(t);
    }

    fn wiener(&mut self, inc: WienerIncrement) {
        if let Some(w) = self.path.wiener.as_mut() {
            w.push(inc);
        }
    }
}

pub(crate) fn validate_step(model: &ModelSpec, step: f64) -> Result<()> {
    if step.is_nan() || step < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step must be >= 0, got {step}"
        )));
    }
    if model.kind.is_diffusive() && !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "diffusive models need a positive step, got {step}"
        )));
    }
    Ok(())
}

/// Simulates the short rate from `r0` in regime `i0` on `[0, horizon]`.
///
/// Non-diffusive kinds are exact. Diffusive kinds draw exact Gaussian
/// increments on a grid of spacing `step` refined by every switching time;
/// the rate integral then uses the trapezoid rule on that grid.
pub fn simulate_rate<R: RngExt + ?Sized>(
    model: &ModelSpec,
    r0: f64,
    i0: Regime,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<RatePath> {
    model.validate()?;
    ensure_finite("r0", r0)?;
    ensure_time("horizon", horizon)?;
    validate_step(model, step)?;
    let mut rec = Recorder {
        path: RatePath {
            initial_regime: i0,
            horizon,
            times: Vec::new(),
            regimes: Vec::new(),
            rates: Vec::new(),
            integrals: Vec::new(),
            switch_times: Vec::new(),
            wiener: model.kind.is_diffusive().then(Vec::new),
        },
    };
    let setup = SimSetup {
        horizon,
        step,
        observe: &[],
        normal_sign: 1.0,
    };
    run_path(model, r0, i0, &setup, rng, &mut rec);
    Ok(rec.path)
}
