mod common;

use common::{fd_prices, table_model};
use jtrates_core::pde::{feynman_kac_residual, solve_merton_ode, ExpectationPrice};
use jtrates_core::rng::substream;
use jtrates_core::tables::{reference_table, MATURITIES};
use jtrates_core::SolverConfig;
use rand::RngExt;

#[test]
fn ode_solution_satisfies_pricing_equation() {
    for n in [1, 3] {
        let m = table_model(n);
        let sol = solve_merton_ode(&m, 1.0, &SolverConfig::default()).unwrap();
        let mut rng = substream(77, n as u64);
        for _ in 0..100 {
            let t = 0.001 + 0.99 * rng.random::<f64>();
            let x = -0.1 + 0.3 * rng.random::<f64>();
            let r = feynman_kac_residual(&m, &sol, t, x, (1e-4, 1e-3)).unwrap();
            assert!(
                r[0].abs() <= 1e-6 && r[1].abs() <= 1e-6,
                "table {n} t={t} x={x}: {r:?}"
            );
        }
    }
}

#[test]
fn expectation_price_does_not_solve_pricing_equation() {
    for n in [1, 3] {
        let m = table_model(n);
        let e = ExpectationPrice {
            model: m.clone(),
            maturity: 1.0,
        };
        let r = feynman_kac_residual(&m, &e, 0.5, 0.05, (1e-4, 1e-3)).unwrap();
        assert!(r[1].abs() > 1e-5, "table {n}: {r:?}");
    }
}

#[test]
fn ode_converges_at_fourth_order() {
    for n in [1, 3] {
        let m = table_model(n);
        let d = |h: f64| {
            let cfg = SolverConfig {
                ode_step: h,
                ..SolverConfig::default()
            };
            solve_merton_ode(&m, 1.0, &cfg).unwrap().d_at(1.0).unwrap()[1]
        };
        let (a, b, c) = (d(1e-2), d(5e-3), d(2.5e-3));
        let order = ((a - b) / (b - c)).abs().log2();
        assert!(order > 3.5, "table {n}: order {order}");
    }
}

#[test]
fn fd_converges_at_first_order_towards_the_tables() {
    for n in [2, 4] {
        let m = table_model(n);
        let table = reference_table(n).unwrap();
        let runs: Vec<_> = [500, 1000, 2000]
            .iter()
            .map(|&g| fd_prices(&m, &MATURITIES, g))
            .collect();
        let at = |run: &Vec<[f64; 2]>| run[3][1];
        let order = ((at(&runs[0]) - at(&runs[1])) / (at(&runs[1]) - at(&runs[2]))).log2();
        assert!(order > 0.8, "table {n}: order {order}");
        let gap = |run: &Vec<[f64; 2]>| -> f64 {
            run.iter()
                .zip(&table.numerical)
                .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
                .sum()
        };
        assert!(gap(&runs[2]) < gap(&runs[1]) && gap(&runs[1]) < gap(&runs[0]));
    }
}

#[test]
fn dothan_price_moves_little_when_default_grid_doubles() {
    let base = SolverConfig::default().fd_nx;
    for n in [2, 4] {
        let m = table_model(n);
        let coarse = fd_prices(&m, &[1.0], base);
        let fine = fd_prices(&m, &[1.0], 2 * base);
        for k in 0..2 {
            let d = (coarse[0][k] - fine[0][k]).abs();
            assert!(d <= 5e-5, "table {n} regime {k}: change {d:e}");
        }
    }
}
