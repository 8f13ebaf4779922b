//! Reference parameter sets and bond prices for the four models
//! (initial rate 5%, maturities of one month, quarter, semester and year),
//! plus the routine that recomputes them.

use crate::analytic::log_bond_price_expectation;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::pde::{solve_dothan_fd_at, solve_merton_ode};
use crate::regime::Regime;

pub const INITIAL_RATE: f64 = 0.05;
pub const MATURITIES: [f64; 4] = [1.0 / 12.0, 0.25, 0.5, 1.0];
pub const MATURITY_LABELS: [&str; 4] = ["1 month", "1 quarter", "1 semester", "1 year"];

pub const EXPECTATION_TOLERANCE: f64 = 5e-6;
pub const ODE_TOLERANCE: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 2e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericalMethod {
    Ode,
    FiniteDifferences,
}

impl NumericalMethod {
    pub fn label(self) -> &'static str {
        match self {
            NumericalMethod::Ode => "ODE",
            NumericalMethod::FiniteDifferences => "Finite Differences",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            NumericalMethod::Ode => ODE_TOLERANCE,
            NumericalMethod::FiniteDifferences => FD_TOLERANCE,
        }
    }
}

/// One reference table: `[maturity][regime]` prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub number: u8,
    pub title: &'static str,
    pub kind: ModelKind,
    pub method: NumericalMethod,
    pub numerical: [[f64; 2]; 4],
    pub expectation: [[f64; 2]; 4],
}

impl ReferenceTable {
    /// Risk-neutral model with the table's parameters.
    pub fn model(&self) -> ModelSpec {
        let (mu, eta) = if self.kind.is_dothan() {
            ([-0.1, 0.25], [0.1, -0.2])
        } else {
            ([-0.02, 0.05], [0.01, -0.02])
        };
        let (sigma, psi) = match self.kind {
            ModelKind::JtMerton | ModelKind::JtDothan => ([0.0, 0.0], [0.0, 0.0]),
            ModelKind::JtdMerton => ([0.02, 0.06], [0.5, 1.0]),
            ModelKind::JtdDothan => ([0.4, 0.4], [1.0, 1.0]),
        };
        ModelSpec::risk_neutral(self.kind, mu, sigma, eta, [1.0, 2.0], psi)
            .expect("reference parameters are valid")
    }
}

pub fn reference_table(number: u8) -> Result<ReferenceTable> {
    let table = match number {
        1 => ReferenceTable {
            number,
            title: "Zero coupon bond prices: Jump-telegraph Merton model",
            kind: ModelKind::JtMerton,
            method: NumericalMethod::Ode,
            numerical: [
                [0.995875, 0.995811],
                [0.987844, 0.987358],
                [0.976244, 0.974689],
                [0.954317, 0.950064],
            ],
            expectation: [
                [0.995875, 0.995811],
                [0.987843, 0.987355],
                [0.976239, 0.974672],
                [0.954264, 0.949927],
            ],
        },
        2 => ReferenceTable {
            number,
            title: "Zero coupon bond prices: Jump-telegraph Dothan model",
            kind: ModelKind::JtDothan,
            method: NumericalMethod::FiniteDifferences,
            numerical: [
                [0.995842, 0.995869],
                [0.987594, 0.987786],
                [0.975430, 0.976039],
                [0.951962, 0.953645],
            ],
            expectation: [
                [0.995843, 0.995867],
                [0.987596, 0.987781],
                [0.975431, 0.976029],
                [0.951955, 0.953615],
            ],
        },
        3 => ReferenceTable {
            number,
            title: "Zero coupon bond prices: Jump-telegraph diffusion Merton model",
            kind: ModelKind::JtdMerton,
            method: NumericalMethod::Ode,
            numerical: [
                [0.995836, 0.995613],
                [0.987429, 0.985732],
                [0.974318, 0.968920],
                [0.945471, 0.930939],
            ],
            expectation: [
                [0.995836, 0.995613],
                [0.987427, 0.985721],
                [0.974294, 0.968830],
                [0.945206, 0.930256],
            ],
        },
        4 => ReferenceTable {
            number,
            title: "Zero coupon bond prices: Jump-telegraph diffusion Dothan model",
            kind: ModelKind::JtdDothan,
            method: NumericalMethod::FiniteDifferences,
            numerical: [
                [0.995774, 0.995798],
                [0.986965, 0.987161],
                [0.972865, 0.973544],
                [0.941475, 0.943588],
            ],
            expectation: [
                [0.995773, 0.995797],
                [0.986959, 0.987156],
                [0.972844, 0.973522],
                [0.941334, 0.943434],
            ],
        },
        other => {
            return Err(Error::InvalidArgument(format!(
                "table must be 1, 2, 3 or 4, got {other}"
            )))
        }
    };
    Ok(table)
}

/// Numerical (ODE or finite-difference) prices `[maturity][regime]` at the
/// reference maturities and initial rate.
pub fn numerical_prices(model: &ModelSpec, cfg: &SolverConfig) -> Result<[[f64; 2]; 4]> {
    let last = MATURITIES[3];
    let mut out = [[0.0; 2]; 4];
    if model.kind.is_dothan() {
        let sol = solve_dothan_fd_at(model, INITIAL_RATE, last, cfg, &MATURITIES)?;
        for (k, &m) in MATURITIES.iter().enumerate() {
            for r in Regime::BOTH {
                out[k][r.index()] = sol.price_at_tau(r, m, INITIAL_RATE)?;
            }
        }
    } else {
        let sol = solve_merton_ode(model, last, cfg)?;
        for (k, &m) in MATURITIES.iter().enumerate() {
            for r in Regime::BOTH {
                out[k][r.index()] = sol.log_price(r, INITIAL_RATE, m)?.exp();
            }
        }
    }
    Ok(out)
}

pub fn expectation_prices(model: &ModelSpec) -> Result<[[f64; 2]; 4]> {
    let mut out = [[0.0; 2]; 4];
    for (k, &m) in MATURITIES.iter().enumerate() {
        for r in Regime::BOTH {
            out[k][r.index()] = log_bond_price_expectation(model, r, INITIAL_RATE, 0.0, m)?.exp();
        }
    }
    Ok(out)
}

/// Recomputed table next to its reference values.
#[derive(Debug, Clone, PartialEq)]
pub struct TableReproduction {
    pub reference: ReferenceTable,
    pub numerical: Option<[[f64; 2]; 4]>,
    pub expectation: Option<[[f64; 2]; 4]>,
}

fn max_abs_diff(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl TableReproduction {
    pub fn numerical_error(&self) -> Option<f64> {
        self.numerical
            .as_ref()
            .map(|n| max_abs_diff(n, &self.reference.numerical))
    }

    pub fn expectation_error(&self) -> Option<f64> {
        self.expectation
            .as_ref()
            .map(|e| max_abs_diff(e, &self.reference.expectation))
    }

    /// Every computed column within its tolerance.
    pub fn within_tolerance(&self) -> bool {
        let num_ok = self
            .numerical_error()
            .is_none_or(|e| e <= self.reference.method.tolerance());
        let exp_ok = self
            .expectation_error()
            .is_none_or(|e| e <= EXPECTATION_TOLERANCE);
        num_ok && exp_ok
    }
}

pub fn reproduce_table(
    number: u8,
    numerical: bool,
    expectation: bool,
    cfg: &SolverConfig,
) -> Result<TableReproduction> {
    let reference = reference_table(number)?;
    let model = reference.model();
    Ok(TableReproduction {
        numerical: if numerical {
            Some(numerical_prices(&model, cfg)?)
        } else {
            None
        },
        expectation: if expectation {
            Some(expectation_prices(&model)?)
        } else {
            None
        },
        reference,
    })
}
