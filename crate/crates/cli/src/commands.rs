use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use nalgebra::DVector;
use sv_calendar::data::{
    self, build_design_matrix, consecutive_dates, design_dates, holiday_report, read_holidays,
    weekday_report, DesignMatrix, DesignOptions, HolidayCalendar, Ingested,
};
use sv_calendar::diagnostics::{chain_summary, volatility_summary, ParamSummary, VolatilityPoint};
use sv_calendar::{format_float, run_chain, ChainOutput, Dataset, McmcConfig, ParameterState, SimSpec};

use crate::config::{DataSection, DesignKind, RunConfig, SimulationSection, Source};
use crate::error::CliError;

/// Command-line overrides shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub chains: usize,
    pub out: Option<PathBuf>,
}

fn out_dir(config: &RunConfig, overrides: &Overrides) -> Result<PathBuf, CliError> {
    let dir = overrides
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
    Ok(dir)
}

fn ingest_section(section: &DataSection) -> Result<Ingested, CliError> {
    let options = DesignOptions {
        weekend_rule: section.weekend_rule,
    };
    let ingested = data::ingest(&section.prices, section.holidays(), options).map_err(CliError::data)?;
    match section.window()? {
        Some((first, last)) => ingested.window(first, last).map_err(CliError::data),
        None => Ok(ingested),
    }
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| {
        CliError::Data(sv_calendar::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// Writes the design matrix, returns and the descriptive-statistics reports.
pub fn ingest(config: &RunConfig, overrides: &Overrides) -> Result<PathBuf, CliError> {
    let Source::Data(section) = config.source()? else {
        return Err(CliError::Config("ingest needs a [data] section".into()));
    };
    let ing = ingest_section(section)?;
    let out = out_dir(config, overrides)?;
    let options = DesignOptions {
        weekend_rule: section.weekend_rule,
    };
    data::write_design(&out.join("design.csv"), &ing.design).map_err(CliError::data)?;
    data::write_returns(&out.join("returns.csv"), &ing.return_dates, &ing.returns).map_err(CliError::data)?;
    let weekdays = weekday_report(&ing.returns, &ing.return_dates);
    data::write_stats_report(&out.join("weekday_stats.csv"), &weekdays).map_err(CliError::data)?;
    let holidays = holiday_report(&ing.returns, &ing.return_dates, &ing.calendars, options).map_err(CliError::data)?;
    data::write_stats_report(&out.join("holiday_stats.csv"), &holidays).map_err(CliError::data)?;

    println!("{:<10} {:>6} {:>9} {:>9}", "group", "obs", "mean", "sd");
    for row in &weekdays {
        match &row.stats {
            Some(s) => println!("{:<10} {:>6} {:>9.3} {:>9.3}", row.group, row.obs, s.mean, s.sd),
            None => println!("{:<10} {:>6} {:>9} {:>9}", row.group, row.obs, "-", "-"),
        }
    }
    Ok(out)
}

/// Calendars for a simulated design; countries without a file have no holidays.
fn simulation_calendars(section: &SimulationSection) -> Result<Vec<HolidayCalendar>, CliError> {
    section
        .holidays()
        .into_iter()
        .map(|(country, path)| match path {
            Some(p) => read_holidays(p, country).map_err(CliError::data),
            None => Ok(HolidayCalendar::empty(country)),
        })
        .collect()
}

struct Simulated {
    return_dates: Vec<NaiveDate>,
    design: DesignMatrix,
    returns: Vec<f64>,
    h: Vec<f64>,
}

fn run_simulation(section: &SimulationSection, seed: u64) -> Result<Simulated, CliError> {
    if section.t < 3 {
        return Err(CliError::Config(format!("simulation.t = {} is below the minimum of 3", section.t)));
    }
    let return_dates = consecutive_dates(section.start()?, section.t).map_err(CliError::data)?;
    let dates = design_dates(&return_dates).map_err(CliError::data)?;
    let design = match section.design {
        DesignKind::Constant => DesignMatrix::constant(dates),
        DesignKind::Calendar => {
            build_design_matrix(&dates, &simulation_calendars(section)?, section.design_options())
                .map_err(CliError::data)?
        }
    };
    let k = design.labels.len();
    if section.beta.len() != k || section.gamma.len() != k {
        return Err(CliError::Config(format!(
            "simulation.beta and simulation.gamma need {k} entries for a {:?} design, got {} and {}",
            section.design,
            section.beta.len(),
            section.gamma.len()
        )));
    }
    let spec = SimSpec {
        truth: ParameterState {
            beta: DVector::from_vec(section.beta.clone()),
            gamma: DVector::from_vec(section.gamma.clone()),
            phi: section.phi,
            rho: section.rho,
            sigma2: section.sigma2,
        },
        design: design.values.clone(),
        labels: design.labels.clone(),
        seed,
    };
    let sim = sv_calendar::simulate(&spec).map_err(|e| CliError::Config(format!("simulation: {e}")))?;
    Ok(Simulated {
        return_dates,
        design,
        returns: sim.returns,
        h: sim.path.into_vec(),
    })
}

/// Writes a simulated dataset in the formats `[dataset]` reads back.
pub fn simulate(config: &RunConfig, overrides: &Overrides) -> Result<PathBuf, CliError> {
    let Source::Simulation(section) = config.source()? else {
        return Err(CliError::Config("simulate needs a [simulation] section".into()));
    };
    let sim = run_simulation(section, overrides.seed.unwrap_or(section.seed))?;
    let out = out_dir(config, overrides)?;
    data::write_returns(&out.join("returns.csv"), &sim.return_dates, &sim.returns).map_err(CliError::data)?;
    data::write_design(&out.join("design.csv"), &sim.design).map_err(CliError::data)?;

    let path = out.join("h.csv");
    let mut w = create(&path)?;
    let err = write_err(&path);
    writeln!(w, "date,h").map_err(&err)?;
    for (d, h) in sim.design.dates.iter().zip(&sim.h) {
        writeln!(w, "{d},{}", format_float(*h)).map_err(&err)?;
    }
    w.flush().map_err(&err)?;
    println!("simulated {} returns into {}", sim.returns.len(), out.display());
    Ok(out)
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(write_err(path))
}

/// The dataset plus the date of every latent state `h_1 … h_{T+1}`.
fn load(config: &RunConfig) -> Result<(Vec<NaiveDate>, Dataset<f64>), CliError> {
    match config.source()? {
        Source::Data(section) => {
            let ing = ingest_section(section)?;
            let data = ing.dataset().map_err(CliError::data)?;
            Ok((ing.design.dates, data))
        }
        Source::Dataset(section) => {
            data::load_dataset(&section.returns, &section.design).map_err(CliError::data)
        }
        Source::Simulation(section) => {
            let sim = run_simulation(section, section.seed)?;
            let data = sim.design.clone().into_dataset(&sim.returns).map_err(CliError::data)?;
            Ok((sim.design.dates, data))
        }
    }
}

/// Runs one or more chains and writes draws, summaries and volatility paths.
pub fn estimate(config: &RunConfig, overrides: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    let (dates, dataset) = load(config)?;
    let prior = config.prior.build(dataset.n_covariates())?;
    let base = McmcConfig {
        seed: overrides.seed.unwrap_or(config.mcmc.seed),
        ..config.mcmc.clone()
    };
    base.validate_for_summary().map_err(CliError::sampler)?;
    let out = out_dir(config, overrides)?;
    let chains = overrides.chains.max(1);

    let configs: Vec<McmcConfig> = (0..chains)
        .map(|i| McmcConfig {
            seed: base.seed.wrapping_add(i as u64),
            ..base.clone()
        })
        .collect();
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(|| run_chain(&dataset, &prior, c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });

    let mut dirs = Vec::with_capacity(chains);
    for (i, result) in results.into_iter().enumerate() {
        let output = result.map_err(CliError::sampler)?;
        let dir = if chains == 1 { out.clone() } else { out.join(format!("chain_{i}")) };
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
        let summary = chain_summary(&output).map_err(CliError::sampler)?;
        write_chain(&dir.join("chain.csv"), &output)?;
        write_summary(&dir.join("summary.csv"), &summary)?;
        write_acceptance(&dir.join("acceptance.csv"), &output)?;
        if output.h_draws.n_cols() > 0 {
            write_volatility(&dir.join("volatility.csv"), &dates, &volatility_summary(&output.h_draws))?;
        }
        if chains > 1 {
            println!("chain {i} (seed {}): {}", output.seed_used, dir.display());
        }
        print_summary(&summary);
        dirs.push(dir);
    }
    Ok(dirs)
}

fn write_chain(path: &Path, output: &ChainOutput<f64>) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = write_err(path);
    writeln!(w, "draw,{}", output.param_names.join(",")).map_err(&err)?;
    for (i, row) in output.draws.rows().enumerate() {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        writeln!(w, "{i},{}", cells.join(",")).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub const SUMMARY_HEADER: &str = "name,mean,sd,ci_low,ci_high,cd,if,excludes_zero";

fn write_summary(path: &Path, rows: &[ParamSummary]) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = write_err(path);
    writeln!(w, "{SUMMARY_HEADER}").map_err(&err)?;
    for s in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.name,
            format_float(s.mean),
            format_float(s.sd),
            format_float(s.ci_low),
            format_float(s.ci_high),
            format_float(s.cd),
            format_float(s.if_),
            s.excludes_zero
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)
}

fn write_acceptance(path: &Path, output: &ChainOutput<f64>) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = write_err(path);
    let steps = &output.final_steps;
    let h_step = steps.h.iter().sum::<f64>() / steps.h.len().max(1) as f64;
    writeln!(w, "quantity,acceptance_rate,step").map_err(&err)?;
    for (name, rate, step) in [
        ("phi", output.acceptance.phi, steps.phi),
        ("rho", output.acceptance.rho, steps.rho),
        ("log_sigma2", output.acceptance.sigma2, steps.log_sigma2),
        ("h_mean", output.acceptance.h_mean(), h_step),
    ] {
        writeln!(w, "{name},{},{}", format_float(rate), format_float(step)).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

fn write_volatility(path: &Path, dates: &[NaiveDate], points: &[VolatilityPoint]) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = write_err(path);
    writeln!(w, "date,mean,ci_low,ci_high").map_err(&err)?;
    for (d, p) in dates.iter().zip(points) {
        writeln!(
            w,
            "{d},{},{},{}",
            format_float(p.mean),
            format_float(p.ci_low),
            format_float(p.ci_high)
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)
}

fn print_summary(rows: &[ParamSummary]) {
    println!(
        "{:<22} {:>9} {:>9} {:>20} {:>7} {:>8}",
        "parameter", "mean", "sd", "95% interval", "CD", "IF"
    );
    for s in rows {
        let mark = if s.excludes_zero { "*" } else { " " };
        println!(
            "{:<22} {:>9.4} {:>9.4} [{:>8.4}, {:>8.4}]{mark} {:>7.3} {:>8.1}",
            s.name, s.mean, s.sd, s.ci_low, s.ci_high, s.cd, s.if_
        );
    }
}
