//! TOML run configuration.
//!
//! ```toml
//! out_dir = "out"
//!
//! [data]                      # or [dataset], or [simulation]
//! prices = "btc.csv"
//! holidays_jp = "jp.txt"
//! holidays_cn = "cn.txt"
//! holidays_de = "de.txt"
//! holidays_us = "us.txt"
//!
//! [mcmc]
//! n_iterations = 200000
//! burn_in = 50000
//! thin = 10
//! ```
//!
//! Relative paths are resolved against the directory holding the config
//! file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use sv_calendar::data::{Country, DesignOptions};
use sv_calendar::{GaussianPrior, McmcConfig, PriorConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub data: Option<DataSection>,
    pub dataset: Option<DatasetSection>,
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub prior: PriorOverrides,
    #[serde(default)]
    pub mcmc: McmcConfig,
}

fn yes() -> bool {
    true
}

/// Raw prices plus one holiday file per country.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub prices: PathBuf,
    pub holidays_jp: PathBuf,
    pub holidays_cn: PathBuf,
    pub holidays_de: PathBuf,
    pub holidays_us: PathBuf,
    #[serde(default = "yes")]
    pub weekend_rule: bool,
    /// Optional window on return dates, `YYYY-MM-DD`.
    pub start: Option<String>,
    pub end: Option<String>,
}

impl DataSection {
    pub fn holidays(&self) -> [&Path; 4] {
        [&self.holidays_jp, &self.holidays_cn, &self.holidays_de, &self.holidays_us].map(PathBuf::as_path)
    }

    pub fn window(&self) -> Result<Option<(NaiveDate, NaiveDate)>, CliError> {
        if self.start.is_none() && self.end.is_none() {
            return Ok(None);
        }
        let start = match &self.start {
            Some(s) => parse_date("data.start", s)?,
            None => NaiveDate::MIN,
        };
        let end = match &self.end {
            Some(s) => parse_date("data.end", s)?,
            None => NaiveDate::MAX,
        };
        if start > end {
            return Err(CliError::Config(format!("data.start {start} is after data.end {end}")));
        }
        Ok(Some((start, end)))
    }
}

/// Returns and design matrix already in the library's CSV formats.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub returns: PathBuf,
    pub design: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    /// A single intercept column.
    Constant,
    /// The 19-column day-of-week and holiday design.
    Calendar,
}

fn default_start() -> String {
    "2013-01-01".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// Number of returns.
    pub t: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start_date: String,
    pub design: DesignKind,
    pub holidays_jp: Option<PathBuf>,
    pub holidays_cn: Option<PathBuf>,
    pub holidays_de: Option<PathBuf>,
    pub holidays_us: Option<PathBuf>,
    #[serde(default = "yes")]
    pub weekend_rule: bool,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub phi: f64,
    pub rho: f64,
    pub sigma2: f64,
}

impl SimulationSection {
    pub fn start(&self) -> Result<NaiveDate, CliError> {
        parse_date("simulation.start_date", &self.start_date)
    }

    pub fn holidays(&self) -> [(Country, Option<&Path>); 4] {
        [
            (Country::Japan, self.holidays_jp.as_deref()),
            (Country::China, self.holidays_cn.as_deref()),
            (Country::Germany, self.holidays_de.as_deref()),
            (Country::UnitedStates, self.holidays_us.as_deref()),
        ]
    }

    pub fn design_options(&self) -> DesignOptions {
        DesignOptions {
            weekend_rule: self.weekend_rule,
        }
    }
}

/// Optional replacements for the default prior. Mean vectors default to
/// zero and the covariances are `var · I`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorOverrides {
    pub beta_mean: Option<Vec<f64>>,
    pub beta_var: Option<f64>,
    pub gamma_mean: Option<Vec<f64>>,
    pub gamma_var: Option<f64>,
    pub phi_a: Option<f64>,
    pub phi_b: Option<f64>,
    pub rho_a: Option<f64>,
    pub rho_b: Option<f64>,
    pub sigma_nu: Option<f64>,
    pub sigma_lambda: Option<f64>,
}

impl PriorOverrides {
    pub fn build(&self, k: usize) -> Result<PriorConfig<f64>, CliError> {
        let mut prior = PriorConfig::default_for(k);
        let gaussian = |name: &str, mean: &Option<Vec<f64>>, var: Option<f64>, current: &GaussianPrior<f64>| {
            if mean.is_none() && var.is_none() {
                return Ok(current.clone());
            }
            let mean = mean.clone().unwrap_or_else(|| vec![0.0; k]);
            if mean.len() != k {
                return Err(CliError::Config(format!(
                    "prior.{name}_mean has {} entries, the design has {k} columns",
                    mean.len()
                )));
            }
            let var = var.unwrap_or(100.0);
            GaussianPrior::new(DVector::from_vec(mean), DMatrix::from_diagonal_element(k, k, var))
                .map_err(|e| CliError::Config(format!("prior.{name}: {e}")))
        };
        prior.beta = gaussian("beta", &self.beta_mean, self.beta_var, &prior.beta)?;
        prior.gamma = gaussian("gamma", &self.gamma_mean, self.gamma_var, &prior.gamma)?;
        for (slot, value) in [
            (&mut prior.phi_a, self.phi_a),
            (&mut prior.phi_b, self.phi_b),
            (&mut prior.rho_a, self.rho_a),
            (&mut prior.rho_b, self.rho_b),
            (&mut prior.sigma_nu, self.sigma_nu),
            (&mut prior.sigma_lambda, self.sigma_lambda),
        ] {
            if let Some(v) = value {
                *slot = v;
            }
        }
        prior.validate(k).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(prior)
    }
}

fn parse_date(field: &str, s: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| CliError::Config(format!("{field}: `{s}` is not a YYYY-MM-DD date ({e})")))
}

/// Where the returns come from.
pub enum Source<'a> {
    Data(&'a DataSection),
    Dataset(&'a DatasetSection),
    Simulation(&'a SimulationSection),
}

impl RunConfig {
    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base);
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(out) = self.out_dir.as_mut() {
            fix(out);
        }
        if let Some(d) = self.data.as_mut() {
            for p in [
                &mut d.prices,
                &mut d.holidays_jp,
                &mut d.holidays_cn,
                &mut d.holidays_de,
                &mut d.holidays_us,
            ] {
                fix(p);
            }
        }
        if let Some(d) = self.dataset.as_mut() {
            fix(&mut d.returns);
            fix(&mut d.design);
        }
        if let Some(s) = self.simulation.as_mut() {
            for p in [
                &mut s.holidays_jp,
                &mut s.holidays_cn,
                &mut s.holidays_de,
                &mut s.holidays_us,
            ]
            .into_iter()
            .flatten()
            {
                fix(p);
            }
        }
    }

    /// The single configured data source.
    pub fn source(&self) -> Result<Source<'_>, CliError> {
        match (&self.data, &self.dataset, &self.simulation) {
            (Some(d), None, None) => Ok(Source::Data(d)),
            (None, Some(d), None) => Ok(Source::Dataset(d)),
            (None, None, Some(s)) => Ok(Source::Simulation(s)),
            (None, None, None) => Err(CliError::Config(
                "no data source: add a [data], [dataset] or [simulation] section".into(),
            )),
            _ => Err(CliError::Config(
                "exactly one of [data], [dataset] and [simulation] may be present".into(),
            )),
        }
    }
}
