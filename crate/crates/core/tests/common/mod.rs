#![allow(dead_code)]

use jtrates_core::pde::solve_dothan_fd_at;
use jtrates_core::tables::{reference_table, INITIAL_RATE};
use jtrates_core::{ModelSpec, Regime, SolverConfig};

pub fn table_model(n: u8) -> ModelSpec {
    reference_table(n).unwrap().model()
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 24)
}

/// `E_i[e^{zY_t}]` from the 2×2 linear system `u' = A u`,
/// `A = [[c0 z − λ0, λ0 e^{z h0}], [λ1 e^{z h1}, c1 z − λ1]]`.
pub fn mgf_oracle(c: [f64; 2], h: [f64; 2], lambda: [f64; 2], i: Regime, z: f64, t: f64) -> f64 {
    let a = [
        [c[0] * z - lambda[0], lambda[0] * (z * h[0]).exp()],
        [lambda[1] * (z * h[1]).exp(), c[1] * z - lambda[1]],
    ];
    let m = 0.5 * (a[0][0] + a[1][1]);
    let s2 = (0.5 * (a[0][0] - a[1][1])).powi(2) + a[0][1] * a[1][0];
    let s = s2.sqrt();
    let sh = if s * t < 1e-8 { t } else { (s * t).sinh() / s };
    let ch = (s * t).cosh();
    let k = i.index();
    // row k of e^{At} applied to (1, 1)
    let row_sum = a[k][0] + a[k][1] - m;
    (m * t).exp() * (ch + sh * row_sum)
}

/// Two-grid extrapolation of the finite-difference price (first order in the grid).
pub fn fd_extrapolated(model: &ModelSpec, taus: &[f64]) -> Vec<[f64; 2]> {
    let coarse = fd_prices(model, taus, 2000);
    let fine = fd_prices(model, taus, 4000);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| [2.0 * f[0] - c[0], 2.0 * f[1] - c[1]])
        .collect()
}

pub fn fd_prices(model: &ModelSpec, taus: &[f64], n: usize) -> Vec<[f64; 2]> {
    let cfg = SolverConfig {
        fd_nx: n,
        fd_nt: n,
        ..SolverConfig::default()
    };
    let last = taus.iter().cloned().fold(0.0, f64::max);
    let sol = solve_dothan_fd_at(model, INITIAL_RATE, last, &cfg, taus).unwrap();
    taus.iter()
        .map(|&t| {
            [
                sol.price_at_tau(Regime::Zero, t, INITIAL_RATE).unwrap(),
                sol.price_at_tau(Regime::One, t, INITIAL_RATE).unwrap(),
            ]
        })
        .collect()
}

/// `E_i[Y_t]` from the linear system for `(m0, m1)`, via the sum
/// `λ1 m0 + λ0 m1` (linear in t) and the difference `m0 − m1` (relaxing).
pub fn mean_oracle(c: [f64; 2], h: [f64; 2], l: [f64; 2], i: Regime, t: f64) -> f64 {
    let d = [c[0] + l[0] * h[0], c[1] + l[1] * h[1]];
    let total = l[0] + l[1];
    let diff = (d[0] - d[1]) * (1.0 - (-total * t).exp()) / total;
    let sum = (l[1] * d[0] + l[0] * d[1]) * t;
    match i {
        Regime::Zero => (sum + l[0] * diff) / total,
        Regime::One => (sum - l[1] * diff) / total,
    }
}
