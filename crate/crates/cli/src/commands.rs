//! The four subcommands. Each renders its output as a string; the caller
//! decides where it goes.

use std::fmt::Write as _;

use jtrates_core::mc::default_maturity_grid;
use jtrates_core::pde::{solve_dothan_fd_at, solve_merton_ode};
use jtrates_core::rng::substream;
use jtrates_core::tables::{
    reproduce_table, TableReproduction, EXPECTATION_TOLERANCE, MATURITIES, MATURITY_LABELS,
};
use jtrates_core::{
    bond_price_expectation, convexity_adjustment, price_bonds_mc, simulate_rate, ConvexityMethod,
    Regime, SolverConfig,
};

use crate::config::{Method, OutputFormat, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMethod {
    Expectation,
    Pde,
    All,
}

/// Rendered table plus whether every computed entry is within tolerance.
pub struct TableOutput {
    pub text: String,
    pub summary: String,
    pub within_tolerance: bool,
}

pub fn cmd_table(
    number: u8,
    method: TableMethod,
    format: OutputFormat,
) -> Result<TableOutput, CliError> {
    let numerical = method != TableMethod::Expectation;
    let expectation = method != TableMethod::Pde;
    let rep = reproduce_table(number, numerical, expectation, &SolverConfig::default())?;
    let text = match format {
        OutputFormat::Markdown => table_markdown(&rep),
        OutputFormat::Csv => table_csv(&rep),
    };
    let mut summary = String::new();
    if let Some(e) = rep.numerical_error() {
        let tol = rep.reference.method.tolerance();
        let _ = writeln!(
            summary,
            "{}: max |error| {e:.2e} (tolerance {tol:e})",
            rep.reference.method.label()
        );
    }
    if let Some(e) = rep.expectation_error() {
        let _ = writeln!(
            summary,
            "Expectation: max |error| {e:.2e} (tolerance {EXPECTATION_TOLERANCE:e})"
        );
    }
    Ok(TableOutput {
        text,
        summary,
        within_tolerance: rep.within_tolerance(),
    })
}

fn table_markdown(rep: &TableReproduction) -> String {
    let t = &rep.reference;
    let label = t.method.label();
    let mut s = format!(
        "Table {}. {}\n\nInitial rate: 5%\n\n| Maturity |",
        t.number, t.title
    );
    let mut cols = 0;
    if rep.numerical.is_some() {
        let _ = write!(s, " {label} F0 | {label} F1 |");
        cols += 2;
    }
    if rep.expectation.is_some() {
        s.push_str(" Expectation F0 | Expectation F1 |");
        cols += 2;
    }
    s.push_str("\n|---|");
    s.push_str(&"---:|".repeat(cols));
    s.push('\n');
    for (k, name) in MATURITY_LABELS.iter().enumerate() {
        let _ = write!(s, "| {name} |");
        for block in [&rep.numerical, &rep.expectation].into_iter().flatten() {
            let _ = write!(s, " {:.6} | {:.6} |", block[k][0], block[k][1]);
        }
        s.push('\n');
    }
    s
}

fn table_csv(rep: &TableReproduction) -> String {
    let t = &rep.reference;
    let mut s = String::from("table,maturity,method,regime,price,reference,abs_error\n");
    let blocks = [
        ("numerical", &rep.numerical, &t.numerical),
        ("expectation", &rep.expectation, &t.expectation),
    ];
    for (name, ours, reference) in blocks {
        let Some(ours) = ours else { continue };
        for (k, &m) in MATURITIES.iter().enumerate() {
            for i in 0..2 {
                let (p, r) = (ours[k][i], reference[k][i]);
                let _ = writeln!(s, "{},{m},{name},{i},{p},{r},{}", t.number, (p - r).abs());
            }
        }
    }
    s
}

/// One priced quote.
#[derive(Debug, Clone, PartialEq)]
pub struct BondQuote {
    pub regime: Regime,
    pub maturity: f64,
    pub method: Method,
    pub price: f64,
    pub stderr: Option<f64>,
}

pub fn price_quotes(cfg: &RunConfig, env_seed: Option<u64>) -> Result<Vec<BondQuote>, CliError> {
    let model = &cfg.model;
    let mats = &cfg.maturities;
    let last = mats.iter().cloned().fold(0.0, f64::max);
    let mut quotes = Vec::new();
    for method in cfg.method.expand() {
        for i in cfg.regime.regimes() {
            let prices: Vec<(f64, Option<f64>)> = match method {
                Method::Expectation => mats
                    .iter()
                    .map(|&m| Ok((bond_price_expectation(model, i, cfg.r0, 0.0, m)?, None)))
                    .collect::<Result<_, jtrates_core::Error>>()?,
                Method::Pde if last == 0.0 => mats.iter().map(|_| (1.0, None)).collect(),
                Method::Pde if model.kind.is_dothan() => {
                    let positive: Vec<f64> = mats.iter().copied().filter(|&m| m > 0.0).collect();
                    let sol = solve_dothan_fd_at(model, cfg.r0, last, &cfg.solver, &positive)?;
                    mats.iter()
                        .map(|&m| {
                            Ok((
                                if m == 0.0 {
                                    1.0
                                } else {
                                    sol.price_at_tau(i, m, cfg.r0)?
                                },
                                None,
                            ))
                        })
                        .collect::<Result<_, jtrates_core::Error>>()?
                }
                Method::Pde => {
                    let sol = solve_merton_ode(model, last, &cfg.solver)?;
                    mats.iter()
                        .map(|&m| Ok((sol.log_price(i, cfg.r0, m)?.exp(), None)))
                        .collect::<Result<_, jtrates_core::Error>>()?
                }
                Method::Mc => {
                    let seed = cfg.effective_seed(env_seed);
                    price_bonds_mc(model, i, cfg.r0, mats, cfg.paths, &cfg.solver, seed)?
                        .into_iter()
                        .map(|e| (e.estimate, Some(e.stderr)))
                        .collect()
                }
                Method::All => unreachable!("expanded above"),
            };
            for (&maturity, (price, stderr)) in mats.iter().zip(prices) {
                quotes.push(BondQuote {
                    regime: i,
                    maturity,
                    method,
                    price,
                    stderr,
                });
            }
        }
    }
    Ok(quotes)
}

pub fn cmd_price(cfg: &RunConfig, env_seed: Option<u64>) -> Result<String, CliError> {
    let quotes = price_quotes(cfg, env_seed)?;
    let kind = cfg.model.kind.name();
    let mut s = String::new();
    match cfg.format {
        OutputFormat::Csv => {
            s.push_str("model,regime,maturity,method,price,stderr\n");
            for q in &quotes {
                let se = q.stderr.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{kind},{},{},{},{},{se}",
                    q.regime,
                    q.maturity,
                    q.method.name(),
                    q.price
                );
            }
        }
        OutputFormat::Markdown => {
            s.push_str("| model | regime | maturity | method | price | stderr |\n|---|---|---:|---|---:|---:|\n");
            for q in &quotes {
                let se = q.stderr.map(|v| format!("{v:.6}")).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "| {kind} | {} | {:.6} | {} | {:.6} | {se} |",
                    q.regime,
                    q.maturity,
                    q.method.name(),
                    q.price
                );
            }
        }
    }
    Ok(s)
}

fn single_regime(cfg: &RunConfig, command: &str) -> Result<Regime, CliError> {
    match cfg.regime.regimes().as_slice() {
        [r] => Ok(*r),
        _ => Err(CliError::Usage(format!(
            "{command} needs a single starting regime: set regime0 = 0 or 1"
        ))),
    }
}

pub fn cmd_simulate(
    cfg: &RunConfig,
    n_paths: u64,
    horizon: f64,
    env_seed: Option<u64>,
) -> Result<String, CliError> {
    let i = single_regime(cfg, "simulate")?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(CliError::Usage(format!(
            "horizon must be finite and >= 0, got {horizon}"
        )));
    }
    let seed = cfg.effective_seed(env_seed);
    let mut s = String::from("path_id,time,regime,rate,integral\n");
    for id in 0..n_paths {
        let path = simulate_rate(
            &cfg.model,
            cfg.r0,
            i,
            horizon,
            cfg.solver.mc_step,
            &mut substream(seed, id),
        )?;
        for k in 0..path.times.len() {
            let _ = writeln!(
                s,
                "{id},{},{},{},{}",
                path.times[k], path.regimes[k], path.rates[k], path.integrals[k]
            );
        }
    }
    Ok(s)
}

pub fn cmd_convexity(cfg: &RunConfig, mc: bool, env_seed: Option<u64>) -> Result<String, CliError> {
    let i = single_regime(cfg, "convexity")?;
    let last = cfg.maturities.iter().cloned().fold(0.0, f64::max);
    if last <= 0.0 {
        return Err(CliError::Usage(
            "convexity needs a positive maturity".into(),
        ));
    }
    let method = if mc {
        ConvexityMethod::Mc {
            n_paths: cfg.paths,
            seed: cfg.effective_seed(env_seed),
        }
    } else {
        ConvexityMethod::Pde
    };
    let grid = default_maturity_grid(last);
    Ok(convexity_adjustment(&cfg.model, i, cfg.r0, &grid, method, &cfg.solver)?.to_csv())
}
