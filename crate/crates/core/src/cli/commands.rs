//! Subcommand bodies. Each computes everything in memory first and only then
//! writes its files, so a numerical failure never leaves partial output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{OutputFormat, RunConfig};
use super::CliError;
use crate::dynamics::{self, SqueezingPoint, SqueezingSummary};
use crate::model::{self, bogoliubov_mode};
use crate::oracle::{self, Suite, Verdict};
use crate::rates::{self, RateQuery};

pub const THREADS_ENV: &str = "QUASIDAMP_THREADS";

/// Worker count from `QUASIDAMP_THREADS`, or `None` for the rayon default.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{s}`"
            ))),
        },
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes a set of files atomically per file; on any failure every file of
/// the set written so far is removed.
struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputSet {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let result = fs::write(&tmp, contents).and_then(|()| fs::rename(&tmp, &path));
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            self.abort();
            return Err(CliError::io(&path, e));
        }
        self.written.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output types serialise");
        text.push('\n');
        self.write(name, &text)
    }

    fn abort(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

fn meta(config: &RunConfig) -> serde_json::Value {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
        "created_unix_s": created,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub qbar: f64,
    pub temperature_k: f64,
    pub gamma_beliaev_s: f64,
    pub gamma_landau_s: f64,
    pub gamma_total_s: f64,
    pub gamma_over_omega: f64,
    pub quad_err: f64,
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Rate table over the configured (temperature, qbar) grid, sorted by
/// temperature then momentum.
pub fn compute_rates(config: &RunConfig, threads: Option<usize>) -> Result<Vec<RateRow>, CliError> {
    let grid = &config.rate_query;
    let points: Vec<(f64, f64)> = grid
        .temperature
        .iter()
        .flat_map(|&t| grid.qbar.iter().map(move |&q| (t, q)))
        .collect();
    let rows = with_pool(threads, || {
        points
            .par_iter()
            .map(|&(t, q)| {
                let query = RateQuery::new(q, t, grid.channel, config.params.clone());
                let r = rates::decay_rates(&query)?;
                Ok(RateRow {
                    qbar: q,
                    temperature_k: t,
                    gamma_beliaev_s: r.gamma_beliaev,
                    gamma_landau_s: r.gamma_landau,
                    gamma_total_s: r.gamma_total,
                    gamma_over_omega: r.gamma_total / r.omega_q,
                    quad_err: r.quadrature_error_estimate,
                })
            })
            .collect::<Result<Vec<_>, rates::RateError>>()
    })??;
    Ok(rows)
}

pub const RATES_HEADER: &str =
    "qbar,temperature_K,gamma_beliaev_s,gamma_landau_s,gamma_total_s,gamma_over_omega,quad_err";

pub fn rates_csv(rows: &[RateRow]) -> String {
    let mut s = String::from(RATES_HEADER);
    s.push('\n');
    for r in rows {
        let fields = [
            r.qbar,
            r.temperature_k,
            r.gamma_beliaev_s,
            r.gamma_landau_s,
            r.gamma_total_s,
            r.gamma_over_omega,
            r.quad_err,
        ];
        let line: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(s, "{}", line.join(",")).expect("writing to a String");
    }
    s
}

pub fn cmd_rates(
    config: &RunConfig,
    out: &Path,
    threads: Option<usize>,
) -> Result<Vec<RateRow>, CliError> {
    let rows = compute_rates(config, threads)?;
    let mut files = OutputSet::new(out)?;
    match config.output.format {
        OutputFormat::Csv => files.write("rates.csv", &rates_csv(&rows))?,
        OutputFormat::Json => files.write_json("rates.json", &rows)?,
    }
    files.write_json("rates.meta.json", &meta(config))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsSummary {
    pub gamma_used_s: f64,
    pub xi3_min: Option<f64>,
    pub t_at_xi3_min_s: Option<f64>,
    pub crossing_time_s: Option<f64>,
    pub preset: Option<String>,
    pub rabi_effective_s: f64,
}

pub const TRAJECTORY_HEADER: &str = "t_s,n_a,n_b_plus,n_b_minus,xi1,xi2,xi3,depletion_valid";

pub fn trajectory_csv(points: &[SqueezingPoint]) -> String {
    let mut s = String::from(TRAJECTORY_HEADER);
    s.push('\n');
    for p in points {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.n_a),
            fmt_f64(p.n_b_plus),
            fmt_f64(p.n_b_minus),
            fmt_opt(p.xi1),
            fmt_opt(p.xi2),
            fmt_opt(p.xi3),
            p.depletion_valid
        )
        .expect("writing to a String");
    }
    s
}

pub fn compute_dynamics(
    config: &RunConfig,
    no_damping: bool,
) -> Result<(Vec<SqueezingPoint>, DynamicsSummary), CliError> {
    let mut drive = config.drive.clone();
    if no_damping {
        drive.gamma_override = Some(0.0);
    }
    let run = dynamics::run_squeezing(&config.params, &drive)?;
    let s = SqueezingSummary::from_points(&run.points);
    let summary = DynamicsSummary {
        gamma_used_s: run.gamma,
        xi3_min: s.xi3_min,
        t_at_xi3_min_s: s.t_at_xi3_min_s,
        crossing_time_s: s.crossing_time_s,
        preset: config.preset.clone(),
        rabi_effective_s: drive.rabi_effective,
    };
    Ok((run.points, summary))
}

pub fn cmd_dynamics(
    config: &RunConfig,
    out: &Path,
    no_damping: bool,
) -> Result<DynamicsSummary, CliError> {
    let (points, summary) = compute_dynamics(config, no_damping)?;
    let mut files = OutputSet::new(out)?;
    match config.output.format {
        OutputFormat::Csv => files.write("trajectory.csv", &trajectory_csv(&points))?,
        OutputFormat::Json => files.write_json("trajectory.json", &points)?,
    }
    files.write_json("summary.json", &summary)?;
    files.write_json("dynamics.meta.json", &meta(config))?;
    Ok(summary)
}

/// Runs the selected oracle suites and writes `oracle.json`. The verdicts
/// are returned even when some fail; the caller maps that to an exit code.
pub fn cmd_oracle(out: &Path, suite: Suite) -> Result<Vec<Verdict>, CliError> {
    let verdicts = oracle::run_suite(suite);
    let mut files = OutputSet::new(out)?;
    files.write_json("oracle.json", &verdicts)?;
    Ok(verdicts)
}

pub const SPECTRUM_HEADER: &str = "qbar,omega_bar,omega_s,group_velocity_bar,u,v,alpha";

/// Bogoliubov spectrum at the configured rate-query momenta.
pub fn cmd_spectrum(config: &RunConfig, out: &Path) -> Result<String, CliError> {
    let units = model::derive_units(&config.params)?;
    let mut s = String::from(SPECTRUM_HEADER);
    s.push('\n');
    for &q in &config.rate_query.qbar {
        let m = bogoliubov_mode(q)?;
        let fields = [
            q,
            m.omega_bar,
            units.frequency(m.omega_bar),
            model::group_velocity(q),
            m.u,
            m.v,
            m.alpha,
        ];
        let line: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(s, "{}", line.join(",")).expect("writing to a String");
    }
    let mut files = OutputSet::new(out)?;
    files.write("spectrum.csv", &s)?;
    Ok(s)
}
