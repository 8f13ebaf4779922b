mod common;

use common::{mean_oracle, mgf_oracle, simpson, table_model};
use jtrates_core::analytic::{affine_coeffs, dothan_coeffs};
use jtrates_core::{ModelKind, ModelSpec, Regime};

const TAUS: [f64; 6] = [1e-3, 1.0 / 12.0, 0.25, 0.5, 1.0, 5.0];

fn check_merton(m: &ModelSpec) {
    let c = [m.drift(Regime::Zero), m.drift(Regime::One)];
    for tau in TAUS {
        let coeffs = affine_coeffs(m, tau).unwrap();
        assert_eq!(coeffs.c, -tau);
        for i in Regime::BOTH {
            let want = -simpson(&|s| mean_oracle(c, m.eta, m.lambda, i, s), 0.0, tau, 1e-13);
            let got = coeffs.d[i.index()];
            assert!(
                (got - want).abs() < 1e-9,
                "{} tau={tau} {i}: {got} vs {want}",
                m.kind
            );
        }
    }
}

fn check_dothan(m: &ModelSpec) {
    let sigma = m.sigma[0];
    let half_var = 0.5 * sigma * sigma;
    let c = [
        m.drift(Regime::Zero) - half_var,
        m.drift(Regime::One) - half_var,
    ];
    let h = [m.eta[0].ln_1p(), m.eta[1].ln_1p()];
    for tau in TAUS {
        let coeffs = dothan_coeffs(m, tau).unwrap();
        for i in Regime::BOTH {
            let integrand = |s: f64| mgf_oracle(c, h, m.lambda, i, 1.0, s) * (half_var * s).exp();
            let want = simpson(&integrand, 0.0, tau, 1e-13);
            let got = coeffs.loading(i);
            assert!(
                (got - want).abs() < 1e-9,
                "{} tau={tau} {i}: {got} vs {want}",
                m.kind
            );
        }
    }
}

#[test]
fn merton_coefficients_match_quadrature() {
    check_merton(&table_model(1));
    check_merton(&table_model(3));
    let fast = ModelSpec::risk_neutral(
        ModelKind::JtdMerton,
        [0.3, -0.4],
        [0.1, 0.1],
        [-0.05, 0.2],
        [5.0, 0.2],
        [0.0, 2.0],
    )
    .unwrap();
    check_merton(&fast);
}

#[test]
fn dothan_coefficients_match_quadrature() {
    check_dothan(&table_model(2));
    check_dothan(&table_model(4));
    let other = ModelSpec::risk_neutral(
        ModelKind::JtdDothan,
        [0.2, -0.3],
        [0.25, 0.25],
        [-0.5, 0.8],
        [3.0, 0.4],
        [0.0, 0.0],
    )
    .unwrap();
    check_dothan(&other);
}

/// Parameters where the two exponents of the decomposition coincide.
#[test]
fn dothan_coefficients_near_singular_point() {
    let base = |mu1: f64| {
        ModelSpec::risk_neutral(
            ModelKind::JtDothan,
            [0.0, mu1],
            [0.0, 0.0],
            [0.0, 0.0],
            [1.0, 1.0],
            [0.0, 0.0],
        )
        .unwrap()
    };
    for mu1 in [0.0, 1e-9, 1e-6, 1e-3] {
        check_dothan(&base(mu1));
    }
}
