//! The two-state jump-telegraph process
//! `Y_t = ∫_0^t c_{ε(s)} ds + Σ_{j ≤ N_t} h_{ε(τ_j-)}`,
//! where `ε` is a two-state Markov chain with switching intensities `λ_0, λ_1`
//! and `N` counts its switches.

use rand::RngExt;
use std::cell::Cell;

use crate::error::{ensure_finite, ensure_time, Error, Result};
use crate::regime::Regime;
use crate::rng::{exponential, par_moments, substream, Estimate};

/// Largest argument accepted by `exp` before the result overflows.
const MAX_LOG: f64 = 709.0;

/// Drift, jump size and switching intensity for each regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelegraphParams {
    pub drift: [f64; 2],
    pub jump: [f64; 2],
    pub intensity: [f64; 2],
}

/// Parameter choices that collapse the process to a simpler one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    EqualDrifts,
    ZeroJump(Regime),
}

impl TelegraphParams {
    pub fn new(drift: [f64; 2], jump: [f64; 2], intensity: [f64; 2]) -> Result<Self> {
        let p = TelegraphParams {
            drift,
            jump,
            intensity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..2 {
            ensure_finite("drift", self.drift[k])?;
            ensure_finite("jump", self.jump[k])?;
            ensure_finite("intensity", self.intensity[k])?;
            if self.intensity[k] <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "intensity of regime {k} must be > 0, got {}",
                    self.intensity[k]
                )));
            }
        }
        Ok(())
    }

    /// Non-fatal diagnostics: the process is well defined but degenerate.
    pub fn degeneracies(&self) -> Vec<Degeneracy> {
        let mut out = Vec::new();
        if self.drift[0] == self.drift[1] {
            out.push(Degeneracy::EqualDrifts);
        }
        for r in Regime::BOTH {
            if self.jump[r.index()] == 0.0 {
                out.push(Degeneracy::ZeroJump(r));
            }
        }
        out
    }

    /// The same process with the two states relabelled.
    pub fn swapped(&self) -> Self {
        let sw = |a: [f64; 2]| [a[1], a[0]];
        TelegraphParams {
            drift: sw(self.drift),
            jump: sw(self.jump),
            intensity: sw(self.intensity),
        }
    }

    /// Conditional mean `E_i[Y_t]`.
    pub fn mean(&self, i: Regime, t: f64) -> Result<f64> {
        self.validate()?;
        ensure_time("t", t)?;
        let [l0, l1] = self.intensity;
        let total = l0 + l1;
        let d0 = self.drift[0] + l0 * self.jump[0];
        let d1 = self.drift[1] + l1 * self.jump[1];
        // (1 - e^{-2λt}) / 2λ
        let relax = -(-total * t).exp_m1() / total;
        let li = self.intensity[i.index()];
        Ok(((l1 * d0 + l0 * d1) * t + i.sign() * li * (d0 - d1) * relax) / total)
    }

    /// Moment generating function `φ_i(z, t) = E_i[exp(z Y_t)]`.
    pub fn mgf(&self, i: Regime, z: f64, t: f64) -> Result<f64> {
        self.log_mgf(i, z, t).and_then(|l| {
            if l > MAX_LOG {
                Err(Error::Overflow(format!(
                    "mgf exceeds f64 range (log value {l:.3})"
                )))
            } else {
                Ok(l.exp())
            }
        })
    }

    /// `log φ_i(z, t)`, finite whenever the MGF itself is representable in log space.
    pub fn log_mgf(&self, i: Regime, z: f64, t: f64) -> Result<f64> {
        self.validate()?;
        ensure_finite("z", z)?;
        ensure_time("t", t)?;
        let [l0, l1] = self.intensity;
        let half_sum_c = 0.5 * (self.drift[0] + self.drift[1]);
        let half_diff_c = 0.5 * (self.drift[0] - self.drift[1]);
        let half_diff_l = 0.5 * (l0 - l1);
        let half_sum_l = 0.5 * (l0 + l1);
        let total_jump = self.jump[0] + self.jump[1];

        let b = half_diff_c * z - half_diff_l;
        let log_cross = (l0 * l1).ln() + z * total_jump;
        let own_jump = z * self.jump[i.index()];
        if log_cross > MAX_LOG || own_jump > MAX_LOG {
            return Err(Error::Overflow(format!("exp(z h) overflows at z = {z}")));
        }
        let disc = b * b + log_cross.exp();
        let hyp = Hyperbolic::new(disc, t);
        let k = b + i.sign() * self.intensity[i.index()] * own_jump.exp();
        let bracket = hyp.cosh + i.sign() * k * hyp.sinh_over_root;
        if !(bracket > 0.0 && bracket.is_finite()) {
            return Err(Error::Overflow(format!(
                "mgf bracket lost precision (value {bracket}) at z = {z}, t = {t}"
            )));
        }
        let log = t * (half_sum_c * z - half_sum_l) + hyp.log_scale + bracket.ln();
        if !log.is_finite() {
            return Err(Error::Overflow(format!(
                "mgf not representable at z = {z}, t = {t}"
            )));
        }
        Ok(log)
    }

    /// Exact path on `[0, horizon]` started in regime `i`.
    pub fn sample_path<R: RngExt + ?Sized>(
        &self,
        i: Regime,
        horizon: f64,
        rng: &mut R,
    ) -> Result<TelegraphPath> {
        self.validate()?;
        ensure_time("horizon", horizon)?;
        let mut switch_times = Vec::new();
        let mut values = Vec::new();
        let y = Cell::new(0.0);
        walk_chain(
            self.intensity,
            i,
            horizon,
            rng,
            |len, r| y.set(y.get() + self.drift[r.index()] * len),
            |t, before| {
                y.set(y.get() + self.jump[before.index()]);
                switch_times.push(t);
                values.push(y.get());
            },
        );
        Ok(TelegraphPath {
            initial: i,
            horizon,
            switch_times,
            values,
            terminal: y.get(),
        })
    }
}

/// Walks the Markov chain on `[0, horizon]`, reporting each constant-regime
/// segment `(length, regime)` and each switch `(time, regime before switch)`
/// in chronological order. Returns the regime at the horizon.
pub(crate) fn walk_chain<R: RngExt + ?Sized>(
    intensity: [f64; 2],
    start: Regime,
    horizon: f64,
    rng: &mut R,
    mut on_segment: impl FnMut(f64, Regime),
    mut on_switch: impl FnMut(f64, Regime),
) -> Regime {
    let mut t = 0.0;
    let mut regime = start;
    loop {
        let hold = exponential(rng, intensity[regime.index()]);
        if t + hold > horizon {
            on_segment(horizon - t, regime);
            return regime;
        }
        on_segment(hold, regime);
        t += hold;
        on_switch(t, regime);
        regime = regime.flip();
    }
}

/// `cosh(t√D)` and `sinh(t√D)/√D`, both scaled by `exp(-log_scale)`.
/// Negative `D` continues analytically to `cos` and `sin(x)/x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hyperbolic {
    pub log_scale: f64,
    pub cosh: f64,
    pub sinh_over_root: f64,
}

impl Hyperbolic {
    pub fn new(disc: f64, t: f64) -> Self {
        if disc.abs() < 1e-12 {
            let x2 = disc * t * t;
            return Hyperbolic {
                log_scale: 0.0,
                cosh: 1.0 + x2 / 2.0 + x2 * x2 / 24.0,
                sinh_over_root: t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0),
            };
        }
        if disc > 0.0 {
            let root = disc.sqrt();
            let x = t * root;
            let decay = (-2.0 * x).exp();
            Hyperbolic {
                log_scale: x,
                cosh: 0.5 * (1.0 + decay),
                sinh_over_root: -(-2.0 * x).exp_m1() / (2.0 * root),
            }
        } else {
            let root = (-disc).sqrt();
            let x = t * root;
            Hyperbolic {
                log_scale: 0.0,
                cosh: x.cos(),
                sinh_over_root: x.sin() / root,
            }
        }
    }
}

/// A sampled trajectory of the jump-telegraph process.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphPath {
    pub initial: Regime,
    pub horizon: f64,
    /// Switching times `τ_1 < τ_2 < … ≤ horizon`.
    pub switch_times: Vec<f64>,
    /// `Y` immediately after each switch (jump included).
    pub values: Vec<f64>,
    /// `Y` at the horizon.
    pub terminal: f64,
}

impl TelegraphPath {
    /// `N` at the horizon.
    pub fn switch_count(&self) -> usize {
        self.switch_times.len()
    }

    /// Regime on the `k`-th segment (segment 0 starts at time 0).
    pub fn segment_regime(&self, k: usize) -> Regime {
        if k.is_multiple_of(2) {
            self.initial
        } else {
            self.initial.flip()
        }
    }

    /// Right-continuous regime at time `t`.
    pub fn regime_at(&self, t: f64) -> Regime {
        let k = self.switch_times.partition_point(|&s| s <= t);
        self.segment_regime(k)
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
            (start, end, self.segment_regime(k))
        })
    }

    /// Rebuilds `Y_t` from drifts and jumps alone.
    pub fn value_at(&self, params: &TelegraphParams, t: f64) -> f64 {
        let mut y = 0.0;
        for (k, (start, end, r)) in self.segments().enumerate() {
            if t < start {
                break;
            }
            y += params.drift[r.index()] * (end.min(t) - start);
            if k < self.switch_times.len() && end <= t {
                y += params.jump[r.index()];
            }
        }
        y
    }
}

/// Sample means of the four martingales built on the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleSummary {
    /// `Z_t = Σ h_{ε_j} − ∫ h λ ds`, mean 0.
    pub compensated_jumps: Estimate,
    /// `𝓔_t(Z) = exp(−∫ h λ ds) Π (1 + h_{ε_j})`, mean 1.
    pub stochastic_exponential: Estimate,
    /// `M_t = N_t − ∫ λ ds`, mean 0.
    pub compensated_count: Estimate,
    /// `L^θ_t = exp(∫ (1 − θ) λ ds) Π θ_{ε_j}`, mean 1.
    pub intensity_density: Estimate,
}

/// Monte Carlo means of `Z`, `𝓔(Z)`, `M` and `L^θ` at time `t`. The marks
/// `θ` are passed explicitly rather than through the jump slots of `params`.
pub fn martingale_stats(
    params: &TelegraphParams,
    theta: [f64; 2],
    i: Regime,
    t: f64,
    n_paths: u64,
    seed: u64,
) -> Result<MartingaleSummary> {
    params.validate()?;
    ensure_time("t", t)?;
    if params.jump.iter().any(|&h| h <= -1.0) {
        return Err(Error::InvalidArgument(
            "stochastic exponential requires jumps h0, h1 > -1".into(),
        ));
    }
    if theta.iter().any(|&th| !(th > 0.0) || !th.is_finite()) {
        return Err(Error::InvalidArgument("theta0, theta1 must be > 0".into()));
    }
    if n_paths < 2 {
        return Err(Error::InvalidArgument("need at least 2 paths".into()));
    }
    let h = params.jump;
    let lam = params.intensity;
    let [z, ez, m, lt] = par_moments::<4, _>(n_paths, |index| {
        let mut rng = substream(seed, index);
        let mut comp_h = 0.0;
        let mut comp_l = 0.0;
        let mut comp_theta = 0.0;
        let mut jumps = 0.0;
        let mut log_prod_h = 0.0;
        let mut log_prod_theta = 0.0;
        let mut count = 0.0;
        walk_chain(
            lam,
            i,
            t,
            &mut rng,
            |len, r| {
                let k = r.index();
                comp_h += h[k] * lam[k] * len;
                comp_l += lam[k] * len;
                comp_theta += (1.0 - theta[k]) * lam[k] * len;
            },
            |_, before| {
                let k = before.index();
                jumps += h[k];
                log_prod_h += h[k].ln_1p();
                log_prod_theta += theta[k].ln();
                count += 1.0;
            },
        );
        [
            jumps - comp_h,
            (log_prod_h - comp_h).exp(),
            count - comp_l,
            (comp_theta + log_prod_theta).exp(),
        ]
    });
    Ok(MartingaleSummary {
        compensated_jumps: z.estimate(),
        stochastic_exponential: ez.estimate(),
        compensated_count: m.estimate(),
        intensity_density: lt.estimate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table1() -> TelegraphParams {
        TelegraphParams::new([-0.02, 0.05], [0.01, -0.02], [1.0, 2.0]).unwrap()
    }

    #[test]
    fn mean_at_zero_is_zero() {
        for r in Regime::BOTH {
            assert_eq!(table1().mean(r, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(TelegraphParams::new([0.0, 1.0], [0.1, 0.1], [0.0, 1.0]).is_err());
        assert!(table1().mean(Regime::Zero, f64::NAN).is_err());
        assert!(table1().mgf(Regime::Zero, f64::INFINITY, 1.0).is_err());
        assert!(table1().mean(Regime::Zero, -1.0).is_err());
    }

    #[test]
    fn mgf_overflow_is_an_error() {
        let p = TelegraphParams::new([1.0, 2.0], [1.0, 1.0], [1.0, 1.0]).unwrap();
        assert!(matches!(
            p.mgf(Regime::Zero, 500.0, 10.0),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn degenerate_mgf_is_deterministic_exponential() {
        let p = TelegraphParams::new([0.3, 0.3], [0.0, 0.0], [1.5, 0.7]).unwrap();
        assert_eq!(p.degeneracies().len(), 3);
        for r in Regime::BOTH {
            for &(z, t) in &[(1.0f64, 1.0f64), (-2.0, 0.5), (0.7, 3.0)] {
                let want = (z * 0.3 * t).exp();
                let got = p.mgf(r, z, t).unwrap();
                assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn hyperbolic_branches_agree_near_zero() {
        for &d in &[1e-9, -1e-9, 1e-13, -1e-13] {
            let h = Hyperbolic::new(d, 2.0);
            let c = h.cosh * h.log_scale.exp();
            let s = h.sinh_over_root * h.log_scale.exp();
            assert!((c - 1.0).abs() < 1e-8);
            assert!((s - 2.0).abs() < 1e-8);
        }
        // trigonometric continuation
        let h = Hyperbolic::new(-4.0, 0.5);
        assert!((h.cosh - 1f64.cos()).abs() < 1e-15);
        assert!((h.sinh_over_root - 1f64.sin() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_horizon_path_is_empty() {
        let mut rng = substream(3, 0);
        let p = table1().sample_path(Regime::One, 0.0, &mut rng).unwrap();
        assert_eq!(p.switch_count(), 0);
        assert_eq!(p.terminal, 0.0);
    }

    #[test]
    fn homogeneous_switch_count_mean() {
        let p = TelegraphParams::new([0.1, -0.1], [0.2, 0.1], [1.3, 1.3]).unwrap();
        let [m] = par_moments::<1, _>(200_000, |k| {
            let mut rng = substream(11, k);
            [p.sample_path(Regime::Zero, 2.0, &mut rng)
                .unwrap()
                .switch_count() as f64]
        });
        assert!(m.estimate().z_score(2.6) < 3.0, "{:?}", m.estimate());
    }

    #[test]
    fn trivial_martingales_are_exact() {
        let p = TelegraphParams::new([0.0, 0.0], [0.0, 0.0], [1.0, 2.0]).unwrap();
        let s = martingale_stats(&p, [1.0, 1.0], Regime::Zero, 1.0, 1000, 5).unwrap();
        assert_eq!(s.compensated_jumps.mean, 0.0);
        assert_eq!(s.compensated_jumps.stderr, 0.0);
        assert_eq!(s.intensity_density.mean, 1.0);
        assert_eq!(s.intensity_density.stderr, 0.0);
        assert_eq!(s.stochastic_exponential.mean, 1.0);
    }

    #[test]
    fn martingale_preconditions() {
        let p = TelegraphParams::new([0.0, 0.0], [-1.5, 0.0], [1.0, 2.0]).unwrap();
        assert!(martingale_stats(&p, [1.0, 1.0], Regime::Zero, 1.0, 10, 5).is_err());
        let p = table1();
        assert!(martingale_stats(&p, [0.0, 1.0], Regime::Zero, 1.0, 10, 5).is_err());
    }

    fn params_strategy() -> impl Strategy<Value = TelegraphParams> {
        (
            -1.0..1.0f64,
            -1.0..1.0f64,
            -0.9..1.0f64,
            -0.9..1.0f64,
            0.1..5.0f64,
            0.1..5.0f64,
        )
            .prop_map(|(c0, c1, h0, h1, l0, l1)| {
                TelegraphParams::new([c0, c1], [h0, h1], [l0, l1]).unwrap()
            })
    }

    fn regime_strategy() -> impl Strategy<Value = Regime> {
        prop_oneof![Just(Regime::Zero), Just(Regime::One)]
    }

    proptest! {
        #[test]
        fn mgf_at_zero_is_one(p in params_strategy(), r in regime_strategy(), t in 0.0..10.0f64) {
            let v = p.mgf(r, 0.0, t).unwrap();
            prop_assert!((v - 1.0).abs() <= 1e-13, "{}", v);
        }

        #[test]
        fn mgf_slope_at_zero_is_mean(p in params_strategy(), r in regime_strategy(), t in 0.05..5.0f64) {
            let h = 1e-5;
            let slope = (p.mgf(r, h, t).unwrap() - p.mgf(r, -h, t).unwrap()) / (2.0 * h);
            let mean = p.mean(r, t).unwrap();
            prop_assert!((slope - mean).abs() <= 1e-6 * mean.abs().max(1e-3), "{} vs {}", slope, mean);
        }

        #[test]
        fn relabelling_symmetry(p in params_strategy(), r in regime_strategy(), z in -3.0..3.0f64, t in 0.0..5.0f64) {
            let s = p.swapped();
            prop_assert_eq!(p.mean(r, t).unwrap(), s.mean(r.flip(), t).unwrap());
            let a = p.mgf(r, z, t).unwrap();
            let b = s.mgf(r.flip(), z, t).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-13);
        }

        #[test]
        fn path_invariants(p in params_strategy(), r in regime_strategy(), horizon in 0.0..5.0f64, seed in any::<u64>()) {
            let mut rng = substream(seed, 0);
            let path = p.sample_path(r, horizon, &mut rng).unwrap();
            prop_assert!(path.switch_times.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(path.switch_times.last().is_none_or(|&s| s <= horizon));
            // every switch flips the state
            let flips = path.segments().collect::<Vec<_>>().windows(2).filter(|w| w[0].2 != w[1].2).count();
            prop_assert_eq!(flips, path.switch_count());
            prop_assert_eq!(path.regime_at(horizon), path.segment_regime(path.switch_count()));
            prop_assert!((path.value_at(&p, horizon) - path.terminal).abs() <= 1e-12);
            for (k, &tau) in path.switch_times.iter().enumerate() {
                prop_assert!((path.value_at(&p, tau) - path.values[k]).abs() <= 1e-12);
            }
        }
    }
}
