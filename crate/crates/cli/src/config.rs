//! Flat `key = value` run configuration.
//!
//! ```text
//! # Table 1 parameters
//! model = jt_merton
//! mu0 = -0.02
//! mu1 = 0.05
//! eta0 = 0.01
//! eta1 = -0.02
//! lambda0_q = 1
//! lambda1_q = 2
//! maturities = 0.25, 1
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use jtrates_core::tables::MATURITIES;
use jtrates_core::{ModelKind, ModelSpec, Regime, SolverConfig};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_PATHS: u64 = 100_000;
pub const DEFAULT_RATE: f64 = 0.05;

pub const KEYS: [&str; 30] = [
    "model",
    "mu0",
    "mu1",
    "sigma0",
    "sigma1",
    "eta0",
    "eta1",
    "lambda0_q",
    "lambda1_q",
    "lambda0",
    "lambda1",
    "psi0",
    "psi1",
    "theta0",
    "theta1",
    "r0",
    "regime0",
    "maturities",
    "method",
    "seed",
    "paths",
    "mc_step",
    "ode_step",
    "fd_nx",
    "fd_nt",
    "fd_x_max",
    "fd_coupling_sweeps",
    "antithetic",
    "format",
    "horizon",
];

/// Where a value came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Line(usize),
    Override,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Line(n) => write!(f, "line {n}"),
            Source::Override => write!(f, "override"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub source: Option<Source>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(source: Source, key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            source: Some(source),
            key: Some(key.into()),
            message: message.into(),
        }
    }

    fn field(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            source: None,
            key: Some(key.into()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.source {
            write!(f, "{s}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "`{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeChoice {
    Zero,
    One,
    Both,
}

impl RegimeChoice {
    pub fn regimes(self) -> Vec<Regime> {
        match self {
            RegimeChoice::Zero => vec![Regime::Zero],
            RegimeChoice::One => vec![Regime::One],
            RegimeChoice::Both => Regime::BOTH.to_vec(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            RegimeChoice::Zero => "0",
            RegimeChoice::One => "1",
            RegimeChoice::Both => "both",
        }
    }
}

impl FromStr for RegimeChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "0" => Ok(RegimeChoice::Zero),
            "1" => Ok(RegimeChoice::One),
            "both" => Ok(RegimeChoice::Both),
            _ => Err(format!("expected 0, 1 or both, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Expectation,
    Pde,
    Mc,
    All,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Expectation => "expectation",
            Method::Pde => "pde",
            Method::Mc => "mc",
            Method::All => "all",
        }
    }

    /// The single methods this choice expands to.
    pub fn expand(self) -> Vec<Method> {
        match self {
            Method::All => vec![Method::Expectation, Method::Pde, Method::Mc],
            m => vec![m],
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "expectation" => Ok(Method::Expectation),
            "pde" => Ok(Method::Pde),
            "mc" => Ok(Method::Mc),
            "all" => Ok(Method::All),
            _ => Err(format!("expected expectation, pde, mc or all, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl OutputFormat {
    fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "markdown",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            _ => Err(format!("expected csv or markdown, got '{s}'")),
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// Recorded intensity multipliers; `model.lambda` already holds the Q-intensities.
    pub theta: [f64; 2],
    pub r0: f64,
    pub regime: RegimeChoice,
    pub maturities: Vec<f64>,
    pub method: Method,
    pub seed: Option<u64>,
    pub paths: u64,
    pub horizon: Option<f64>,
    pub solver: SolverConfig,
    pub format: OutputFormat,
}

type Entries = BTreeMap<String, (Source, String)>;

fn insert(
    entries: &mut Entries,
    source: Source,
    key: &str,
    value: &str,
) -> Result<(), ConfigError> {
    if !KEYS.contains(&key) {
        return Err(ConfigError::at(source, key, "unknown key"));
    }
    if value.is_empty() {
        return Err(ConfigError::at(source, key, "missing value"));
    }
    if source != Source::Override {
        if let Some((prev, _)) = entries.get(key) {
            return Err(ConfigError::at(
                source,
                key,
                format!("duplicate key (first set at {prev})"),
            ));
        }
    }
    entries.insert(key.to_string(), (source, value.to_string()));
    Ok(())
}

fn split_pair(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn raw(&self, key: &str) -> Option<&(Source, String)> {
        self.entries.get(key)
    }

    fn source(&self, key: &str) -> Option<Source> {
        self.raw(key).map(|(s, _)| *s)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        match self.source(key) {
            Some(s) => ConfigError::at(s, key, message),
            None => ConfigError::field(key, message),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((src, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| ConfigError::at(*src, key, format!("invalid value '{v}': {e}"))),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.parsed::<f64>(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(self.err(key, format!("must be finite, got {x}"))),
            other => Ok(other),
        }
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn required(&self, key: &str) -> Result<f64, ConfigError> {
        self.number(key)?
            .ok_or_else(|| ConfigError::field(key, "required key is missing"))
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let x = self.number_or(key, default)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.err(key, format!("must be > 0, got {x}")))
        }
    }
}

impl RunConfig {
    /// Parses a config file, then applies `key=value` overrides in order.
    pub fn parse_with_overrides(
        text: &str,
        overrides: &[String],
    ) -> Result<RunConfig, ConfigError> {
        let mut entries = Entries::new();
        for (n, line) in text.lines().enumerate() {
            let source = Source::Line(n + 1);
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = split_pair(content).ok_or_else(|| ConfigError {
                source: Some(source),
                key: None,
                message: format!("expected `key = value`, got '{content}'"),
            })?;
            insert(&mut entries, source, k, v)?;
        }
        for o in overrides {
            let (k, v) = split_pair(o).ok_or_else(|| ConfigError {
                source: Some(Source::Override),
                key: None,
                message: format!("expected key=value, got '{o}'"),
            })?;
            insert(&mut entries, Source::Override, k, v)?;
        }
        Self::build(&Reader { entries })
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        Self::parse_with_overrides(text, &[])
    }

    fn build(r: &Reader) -> Result<RunConfig, ConfigError> {
        let kind: ModelKind = match r.raw("model") {
            None => return Err(ConfigError::field("model", "required key is missing")),
            Some((src, v)) => v
                .parse()
                .map_err(|e: jtrates_core::Error| ConfigError::at(*src, "model", e.to_string()))?,
        };
        let pair = |a: &str, b: &str, default: Option<f64>| -> Result<[f64; 2], ConfigError> {
            Ok(match default {
                Some(d) => [r.number_or(a, d)?, r.number_or(b, d)?],
                None => [r.required(a)?, r.required(b)?],
            })
        };
        let mu = pair("mu0", "mu1", None)?;
        let sigma = pair("sigma0", "sigma1", Some(0.0))?;
        let eta = pair("eta0", "eta1", Some(0.0))?;
        let psi = pair("psi0", "psi1", Some(0.0))?;
        let theta = pair("theta0", "theta1", Some(1.0))?;

        for (k, key) in ["theta0", "theta1"].iter().enumerate() {
            if !(theta[k] > 0.0) {
                return Err(r.err(key, format!("must be > 0, got {}", theta[k])));
            }
        }
        let mut lambda = [0.0; 2];
        for k in 0..2 {
            let q_key = format!("lambda{k}_q");
            let p_key = format!("lambda{k}");
            lambda[k] = match (r.number(&q_key)?, r.number(&p_key)?) {
                (Some(_), Some(_)) => {
                    return Err(r.err(&p_key, format!("conflicts with {q_key}; give either the physical or the risk-neutral intensity")))
                }
                (Some(q), None) => q,
                (None, Some(p)) => theta[k] * p,
                (None, None) => return Err(ConfigError::field(&q_key, "required key is missing")),
            };
            if !(lambda[k] > 0.0) {
                let key = if r.raw(&q_key).is_some() {
                    q_key
                } else {
                    p_key
                };
                return Err(r.err(&key, format!("intensity must be > 0, got {}", lambda[k])));
            }
        }
        for k in 0..2 {
            let key = format!("sigma{k}");
            if sigma[k] < 0.0 {
                return Err(r.err(&key, format!("must be >= 0, got {}", sigma[k])));
            }
            if !kind.is_diffusive() && sigma[k] != 0.0 {
                return Err(r.err(
                    &key,
                    format!("volatility given for non-diffusive model {kind}"),
                ));
            }
            if kind.is_diffusive() && sigma[k] == 0.0 {
                return Err(r.err(
                    &key,
                    format!("diffusive model {kind} needs a positive volatility"),
                ));
            }
            if kind.is_dothan() && !(eta[k] > -1.0) {
                return Err(r.err(
                    &format!("eta{k}"),
                    format!("Dothan jumps need eta > -1, got {}", eta[k]),
                ));
            }
        }
        if kind.is_dothan() && kind.is_diffusive() && sigma[0] != sigma[1] {
            return Err(r.err("sigma1", "the Dothan diffusion needs sigma0 = sigma1"));
        }
        let model = ModelSpec::risk_neutral(kind, mu, sigma, eta, lambda, psi).map_err(|e| {
            ConfigError {
                source: None,
                key: None,
                message: e.to_string(),
            }
        })?;

        let r0 = r.number_or("r0", DEFAULT_RATE)?;
        if kind.is_dothan() && r0 < 0.0 {
            return Err(r.err("r0", format!("Dothan rates must be >= 0, got {r0}")));
        }
        let maturities = match r.raw("maturities") {
            None => MATURITIES.to_vec(),
            Some((src, v)) => {
                let list = v
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| {
                        ConfigError::at(*src, "maturities", format!("invalid list '{v}': {e}"))
                    })?;
                if list.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                    return Err(ConfigError::at(
                        *src,
                        "maturities",
                        "maturities must be finite and >= 0",
                    ));
                }
                if list.windows(2).any(|w| w[1] < w[0]) {
                    return Err(ConfigError::at(
                        *src,
                        "maturities",
                        "maturities must be non-decreasing",
                    ));
                }
                list
            }
        };
        let paths = r.parsed::<u64>("paths")?.unwrap_or(DEFAULT_PATHS);
        if paths < 2 {
            return Err(r.err("paths", "need at least 2 paths"));
        }
        let defaults = SolverConfig::default();
        let grid = |key: &str, default: usize| -> Result<usize, ConfigError> {
            let n = r.parsed::<usize>(key)?.unwrap_or(default);
            if n < 4 {
                return Err(r.err(key, format!("need at least 4 intervals, got {n}")));
            }
            Ok(n)
        };
        let fd_x_max = match r.number("fd_x_max")? {
            Some(x) if x <= 0.0 => return Err(r.err("fd_x_max", format!("must be > 0, got {x}"))),
            other => other,
        };
        let sweeps = r
            .parsed::<usize>("fd_coupling_sweeps")?
            .unwrap_or(defaults.fd_coupling_sweeps);
        if sweeps == 0 {
            return Err(r.err("fd_coupling_sweeps", "need at least 1 sweep"));
        }
        let horizon = match r.number("horizon")? {
            Some(h) if h < 0.0 => return Err(r.err("horizon", format!("must be >= 0, got {h}"))),
            other => other,
        };
        let solver = SolverConfig {
            ode_step: r.positive("ode_step", defaults.ode_step)?,
            fd_nx: grid("fd_nx", defaults.fd_nx)?,
            fd_nt: grid("fd_nt", defaults.fd_nt)?,
            fd_x_max,
            fd_coupling_sweeps: sweeps,
            mc_step: r.positive("mc_step", defaults.mc_step)?,
            antithetic: r.parsed::<bool>("antithetic")?.unwrap_or(false),
            ..defaults
        };
        Ok(RunConfig {
            model,
            theta,
            r0,
            regime: r.parsed("regime0")?.unwrap_or(RegimeChoice::Both),
            maturities,
            method: r.parsed("method")?.unwrap_or(Method::All),
            seed: r.parsed("seed")?,
            paths,
            horizon,
            solver,
            format: r.parsed("format")?.unwrap_or(OutputFormat::Csv),
        })
    }

    /// Seed from the config, else `env_seed`, else the built-in default.
    pub fn effective_seed(&self, env_seed: Option<u64>) -> u64 {
        self.seed.or(env_seed).unwrap_or(DEFAULT_SEED)
    }

    /// Canonical text form; parsing it gives back `self`.
    pub fn to_config_string(&self) -> String {
        let m = &self.model;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("model", m.kind.name().into());
        for k in 0..2 {
            kv(&format!("mu{k}"), m.mu[k].to_string());
        }
        if m.kind.is_diffusive() {
            for k in 0..2 {
                kv(&format!("sigma{k}"), m.sigma[k].to_string());
            }
        }
        for k in 0..2 {
            kv(&format!("eta{k}"), m.eta[k].to_string());
        }
        for k in 0..2 {
            kv(&format!("lambda{k}_q"), m.lambda[k].to_string());
        }
        for k in 0..2 {
            kv(&format!("psi{k}"), m.measure_params.psi[k].to_string());
        }
        for k in 0..2 {
            kv(&format!("theta{k}"), self.theta[k].to_string());
        }
        kv("r0", self.r0.to_string());
        kv("regime0", self.regime.name().into());
        kv(
            "maturities",
            self.maturities
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        kv("method", self.method.name().into());
        if let Some(seed) = self.seed {
            kv("seed", seed.to_string());
        }
        kv("paths", self.paths.to_string());
        if let Some(h) = self.horizon {
            kv("horizon", h.to_string());
        }
        kv("mc_step", self.solver.mc_step.to_string());
        kv("ode_step", self.solver.ode_step.to_string());
        kv("fd_nx", self.solver.fd_nx.to_string());
        kv("fd_nt", self.solver.fd_nt.to_string());
        if let Some(x) = self.solver.fd_x_max {
            kv("fd_x_max", x.to_string());
        }
        kv(
            "fd_coupling_sweeps",
            self.solver.fd_coupling_sweeps.to_string(),
        );
        kv("antithetic", self.solver.antithetic.to_string());
        kv("format", self.format.name().into());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "model = jt_merton\nmu0 = -0.02\nmu1 = 0.05\neta0 = 0.01\neta1 = -0.02\nlambda0_q = 1\nlambda1_q = 2\n";

    #[test]
    fn defaults_are_filled_in() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.maturities, MATURITIES.to_vec());
        assert_eq!(c.method, Method::All);
        assert_eq!(c.regime, RegimeChoice::Both);
        assert_eq!(c.r0, DEFAULT_RATE);
        assert_eq!(c.effective_seed(None), DEFAULT_SEED);
        assert_eq!(c.effective_seed(Some(3)), 3);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = format!("# header\n\n{BASE}r0 = 0.03 # trailing\n");
        assert_eq!(RunConfig::parse(&text).unwrap().r0, 0.03);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse(&format!("{BASE}bogus = 1\n")).unwrap_err();
        assert_eq!(e.source, Some(Source::Line(8)));
        let e = RunConfig::parse(&format!("{BASE}sigma0 = 0.1\n")).unwrap_err();
        assert_eq!(e.source, Some(Source::Line(8)));
        assert_eq!(e.key.as_deref(), Some("sigma0"));
        let e = RunConfig::parse(&BASE.replace("jt_merton", "vasicek")).unwrap_err();
        assert_eq!(e.to_string().split(':').next(), Some("line 1"));
        assert!(e.to_string().contains("`model`"));
        let e = RunConfig::parse(&format!("{BASE}mu0 = 1\n")).unwrap_err();
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn physical_intensities_are_scaled() {
        let text = BASE.replace("lambda0_q = 1", "lambda0 = 2\ntheta0 = 0.5");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.model.lambda, [1.0, 2.0]);
        let both = format!("{BASE}lambda0 = 2\n");
        assert!(RunConfig::parse(&both)
            .unwrap_err()
            .message
            .contains("conflicts"));
    }

    #[test]
    fn overrides_win() {
        let c =
            RunConfig::parse_with_overrides(BASE, &["r0=0.07".into(), "seed = 9".into()]).unwrap();
        assert_eq!(c.r0, 0.07);
        assert_eq!(c.effective_seed(Some(1)), 9);
        let e = RunConfig::parse_with_overrides(BASE, &["nope=1".into()]).unwrap_err();
        assert_eq!(e.source, Some(Source::Override));
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(RunConfig::parse(&c.to_config_string()).unwrap(), c);
    }
}
