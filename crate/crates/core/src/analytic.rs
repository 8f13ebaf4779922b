//! Zero-coupon bond prices and forward rates under the unbiased expectation
//! hypothesis: the forward rate equals the expected future spot rate, and the
//! price is `exp(−∫ f ds)`.

use crate::error::{ensure_finite, ensure_time, Error, Result};
use crate::models::{expected_future_rate, ModelSpec};
use crate::regime::Regime;

/// Merton-family price `exp(r C + D_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCoeffs {
    /// Loading on the short rate, `−(T − t)`.
    pub c: f64,
    pub d: [f64; 2],
}

/// Dothan-family price `exp(−r [G + E_i H])`.
///
/// `g = ∫_0^τ e^{ps} cosh(s√D) ds` and `h = ∫_0^τ e^{ps} sinh(s√D) ds`, where
/// `p = ζ − λ̄ (+ σ²/2)`. Both are evaluated through `∫ e^{as} ds` for
/// `a = p ± √D`, which is finite at the removable singularity `p² = D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DothanCoeffs {
    pub g: f64,
    pub h: f64,
    pub e: [f64; 2],
    /// Whether the diffusive (σ²/2-shifted) variant was used.
    pub diffusive: bool,
}

impl DothanCoeffs {
    pub fn loading(&self, i: Regime) -> f64 {
        self.g + self.e[i.index()] * self.h
    }
}

/// `∫_0^τ e^{a s} ds`
fn exp_integral(a: f64, tau: f64) -> f64 {
    let x = a * tau;
    if x.abs() < 1e-8 {
        tau * (1.0 + x / 2.0 + x * x / 6.0)
    } else {
        x.exp_m1() / a
    }
}

fn check_merton(model: &ModelSpec) -> Result<()> {
    if model.kind.is_dothan() {
        return Err(Error::UnsupportedModel(format!(
            "{} is not affine; use dothan_coeffs",
            model.kind
        )));
    }
    Ok(())
}

/// `x + e^{−x} − 1`, expanded for small arguments
fn relaxation(x: f64) -> f64 {
    if x < 1e-4 {
        x * x * (0.5 - x / 6.0 + x * x / 24.0)
    } else {
        x + (-x).exp_m1()
    }
}

pub fn affine_coeffs(model: &ModelSpec, tau: f64) -> Result<AffineCoeffs> {
    model.validate()?;
    model.require_risk_neutral()?;
    check_merton(model)?;
    ensure_time("tau", tau)?;
    let [l0, l1] = model.lambda;
    let total = l0 + l1;
    let d = [
        model.drift(Regime::Zero) + l0 * model.eta[0],
        model.drift(Regime::One) + l1 * model.eta[1],
    ];
    let relax = relaxation(total * tau);
    let coeff = |i: Regime| {
        let li = model.lambda[i.index()];
        -((l1 * d[0] + l0 * d[1]) * tau * tau / 2.0
            + i.sign() * li * (d[0] - d[1]) * relax / (total * total))
            / total
    };
    Ok(AffineCoeffs {
        c: -tau,
        d: [coeff(Regime::Zero), coeff(Regime::One)],
    })
}

pub fn dothan_coeffs(model: &ModelSpec, tau: f64) -> Result<DothanCoeffs> {
    model.validate()?;
    model.require_risk_neutral()?;
    if !model.kind.is_dothan() {
        return Err(Error::UnsupportedModel(format!(
            "{} is affine; use affine_coeffs",
            model.kind
        )));
    }
    ensure_time("tau", tau)?;
    let sigma = model.common_sigma()?;
    let half_var = 0.5 * sigma * sigma;
    let growth = [
        model.drift(Regime::Zero) - half_var,
        model.drift(Regime::One) - half_var,
    ];
    let [l0, l1] = model.lambda;
    let zeta = 0.5 * (growth[0] + growth[1]);
    let chi = 0.5 * (growth[0] - growth[1]);
    let nu = 0.5 * (l0 - l1);
    let mean_l = 0.5 * (l0 + l1);
    let disc = (chi - nu).powi(2) + l0 * l1 * (1.0 + model.eta[0]) * (1.0 + model.eta[1]);
    // D > 0 because both intensities are positive and η_i > −1.
    let root = disc.sqrt();
    let p = zeta - mean_l + half_var;
    let plus = exp_integral(p + root, tau);
    let minus = exp_integral(p - root, tau);
    let weight = |i: Regime| {
        let k = i.index();
        i.sign() * (chi - nu + i.sign() * model.lambda[k] * (1.0 + model.eta[k])) / root
    };
    Ok(DothanCoeffs {
        g: 0.5 * (plus + minus),
        h: 0.5 * (plus - minus),
        e: [weight(Regime::Zero), weight(Regime::One)],
        diffusive: model.kind.is_diffusive(),
    })
}

fn check_times(t: f64, maturity: f64) -> Result<f64> {
    ensure_finite("t", t)?;
    ensure_finite("T", maturity)?;
    let tau = maturity - t;
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "maturity {maturity} precedes valuation time {t}"
        )));
    }
    ensure_time("T - t", tau)?;
    Ok(tau)
}

/// Instantaneous forward rate `f(t, T)` under the expectation hypothesis.
pub fn forward_rate(model: &ModelSpec, i: Regime, r: f64, t: f64, maturity: f64) -> Result<f64> {
    let tau = check_times(t, maturity)?;
    expected_future_rate(model, i, r, tau)
}

/// `log F_i(t, r)` under the expectation hypothesis.
pub fn log_bond_price_expectation(
    model: &ModelSpec,
    i: Regime,
    r: f64,
    t: f64,
    maturity: f64,
) -> Result<f64> {
    let tau = check_times(t, maturity)?;
    ensure_finite("r", r)?;
    if model.kind.is_dothan() {
        let c = dothan_coeffs(model, tau)?;
        Ok(-r * c.loading(i))
    } else {
        let c = affine_coeffs(model, tau)?;
        Ok(r * c.c + c.d[i.index()])
    }
}

/// Zero-coupon bond price implied by the expectation hypothesis.
pub fn bond_price_expectation(
    model: &ModelSpec,
    i: Regime,
    r: f64,
    t: f64,
    maturity: f64,
) -> Result<f64> {
    log_bond_price_expectation(model, i, r, t, maturity).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    fn jt_dothan() -> ModelSpec {
        ModelSpec::risk_neutral(
            ModelKind::JtDothan,
            [-0.1, 0.25],
            [0.0, 0.0],
            [0.1, -0.2],
            [1.0, 2.0],
            [0.0, 0.0],
        )
        .unwrap()
    }

    /// The displayed closed forms with denominator `(p² − D)`.
    fn displayed_g_h(p: f64, disc: f64, tau: f64) -> (f64, f64) {
        let q = disc.sqrt();
        let e = (tau * p).exp();
        let den = p * p - disc;
        let g = (e * (p * (tau * q).cosh() - q * (tau * q).sinh()) - p) / den;
        let h = (e * (p * (tau * q).sinh() - q * (tau * q).cosh()) + q) / den;
        (g, h)
    }

    #[test]
    fn zero_tau_prices_to_one() {
        for r in Regime::BOTH {
            assert_eq!(
                bond_price_expectation(&jt_dothan(), r, 0.05, 0.3, 0.3).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn maturity_before_valuation_is_rejected() {
        assert!(bond_price_expectation(&jt_dothan(), Regime::Zero, 0.05, 1.0, 0.5).is_err());
    }

    #[test]
    fn decomposition_matches_displayed_form() {
        let m = jt_dothan();
        for tau in [1.0 / 12.0, 0.25, 0.5, 1.0, 3.0] {
            let c = dothan_coeffs(&m, tau).unwrap();
            let zeta = 0.5 * (m.mu[0] + m.mu[1]);
            let chi = 0.5 * (m.mu[0] - m.mu[1]);
            let nu = 0.5 * (m.lambda[0] - m.lambda[1]);
            let disc = (chi - nu).powi(2) + m.lambda[0] * m.lambda[1] * 1.1 * 0.8;
            let (g, h) = displayed_g_h(zeta - 1.5, disc, tau);
            assert!((c.g - g).abs() < 1e-13, "{} {}", c.g, g);
            assert!((c.h - h).abs() < 1e-13, "{} {}", c.h, h);
        }
    }

    #[test]
    fn singular_denominator_is_finite_and_continuous() {
        // choose μ so that (ζ − λ̄)² = D exactly: with λ = (1, 1) and η = (0, 0)
        // we get χ − ν = χ and D = χ² + 1, so p² = D needs ζ − 1 = ±√(χ² + 1).
        let chi: f64 = 0.3;
        let zeta = 1.0 - (chi * chi + 1.0).sqrt();
        let build = |shift: f64| {
            ModelSpec::risk_neutral(
                ModelKind::JtDothan,
                [zeta + chi + shift, zeta - chi + shift],
                [0.0, 0.0],
                [0.0, 0.0],
                [1.0, 1.0],
                [0.0, 0.0],
            )
            .unwrap()
        };
        let at = dothan_coeffs(&build(0.0), 1.0).unwrap();
        let near = dothan_coeffs(&build(1e-7), 1.0).unwrap();
        assert!(at.g.is_finite() && at.h.is_finite());
        for i in Regime::BOTH {
            assert!((at.loading(i) - near.loading(i)).abs() < 1e-6);
        }
    }

    #[test]
    fn merton_log_price_is_affine_in_rate() {
        let m = ModelSpec::risk_neutral(
            ModelKind::JtMerton,
            [-0.02, 0.05],
            [0.0, 0.0],
            [0.01, -0.02],
            [1.0, 2.0],
            [0.0, 0.0],
        )
        .unwrap();
        for tau in [0.1, 1.0, 2.5] {
            for i in Regime::BOTH {
                let a = log_bond_price_expectation(&m, i, 0.0, 0.0, tau).unwrap();
                let b = log_bond_price_expectation(&m, i, 0.07, 0.0, tau).unwrap();
                assert!(((b - a) / 0.07 + tau).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn relaxation_branches_agree() {
        let x: f64 = 1e-4;
        let exact = x + (-x).exp_m1();
        assert!(((relaxation(x * (1.0 - 1e-12)) - exact) / exact).abs() < 1e-7);
        assert_eq!(relaxation(0.0), 0.0);
    }
}
