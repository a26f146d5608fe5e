use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::RunConfig;
use crate::analysis::{
    bowen_dimension, box_count_comparison, condition_check, decay_fit, escape_rate, ly_constants,
    pressure_curve, write_decay_csv, write_pressure_csv, ConditionOptions, ConditionReport,
    DecayOptions, LyConstants,
};
use crate::error::{Error, Result};
use crate::operator::TransferCocycle;
use crate::oracle::{survivor_sequence, write_survivors_csv};
use crate::quenched::{d_masks, invariant_density, standard_battery};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Pressure,
    Dimension,
    Escape,
    Density,
    Decay,
    Check,
    Oracle,
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
    pub wall_time: f64,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    meta: Meta,
    #[serde(flatten)]
    report: &'a T,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    started: Instant,
    written: Vec<PathBuf>,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        cfg.validate()?;
        fs::create_dir_all(&cfg.out)?;
        Ok(Run {
            cfg,
            started: Instant::now(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.cfg.out.join(name);
        self.written.push(p.clone());
        p
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<()> {
        let meta = Meta {
            config_hash: self.cfg.hash(),
            seed: self.cfg.seed,
            version: VERSION,
            wall_time: self.started.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&Stamped { meta, report })?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        Ok(())
    }
}

/// Runs one subcommand and returns the files it wrote.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    match cmd {
        Command::Pressure => cmd_pressure(cfg),
        Command::Dimension => cmd_dimension(cfg),
        Command::Escape => cmd_escape(cfg),
        Command::Density => cmd_density(cfg),
        Command::Decay => cmd_decay(cfg),
        Command::Check => cmd_check(cfg),
        Command::Oracle => cmd_oracle(cfg),
    }
}

/// `pressure.csv` and `pressure.json` over the configured t-grid.
pub fn cmd_pressure(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut run = Run::new(cfg)?;
    let system = cfg.build_system()?;
    let curve = pressure_curve(&system, &cfg.t_grid, cfg.estimator, cfg.monte_carlo())?;
    write_pressure_csv(&curve, run.create("pressure.csv")?)?;
    run.json("pressure.json", &curve)?;
    Ok(run.written)
}

pub fn cmd_dimension(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut run = Run::new(cfg)?;
    let system = cfg.build_system()?;
    let mut report = bowen_dimension(&system, cfg.estimator, cfg.tol_t, cfg.monte_carlo())?;
    if let Some([lo, hi]) = cfg.dimension.box_count_depths {
        report.box_count = Some(box_count_comparison(&system, cfg.seed, lo..=hi)?);
    }
    run.json("dimension.json", &report)?;
    Ok(run.written)
}

pub fn cmd_escape(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut run = Run::new(cfg)?;
    let system = cfg.build_system()?;
    let report = escape_rate(&system, cfg.escape.depth, cfg.estimator, cfg.monte_carlo())?;
    run.json("escape.json", &report)?;
    Ok(run.written)
}

#[derive(Serialize)]
struct DensitySummary {
    position: i64,
    depth: usize,
    residual: f64,
    normalization_error: f64,
    n_infinity: Option<usize>,
    support_cells: usize,
}

/// `density.csv` with columns `position,left,right,q`, plus a summary.
pub fn cmd_density(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut run = Run::new(cfg)?;
    let system = cfg.build_system()?;
    let tc = TransferCocycle::with_resolution(&system, cfg.resolution)?;
    let orbit = cfg.orbit(&system);
    let mut wr = csv::Writer::from_writer(run.create("density.csv")?);
    wr.write_record(["position", "left", "right", "q"])?;
    let mut summary = Vec::new();
    for &p in &cfg.density.positions {
        let d = invariant_density(&tc, &orbit, p, cfg.density.depth, cfg.lambda_options())?;
        let masks = d_masks(&tc, &orbit, p, cfg.density.depth)?;
        for (i, q) in d.q.values().iter().enumerate() {
            let cell = tc.grid().cell(i);
            wr.write_record(&[
                p.to_string(),
                format!("{:.17e}", cell.lo),
                format!("{:.17e}", cell.hi),
                format!("{q:.17e}"),
            ])?;
        }
        summary.push(DensitySummary {
            position: p,
            depth: d.depth,
            residual: d.residual,
            normalization_error: d.normalization_error,
            n_infinity: masks.n_infinity,
            support_cells: masks.limit().count(),
        });
    }
    wr.flush()?;
    drop(wr);
    run.json("density.json", &serde_json::json!({ "positions": summary }))?;
    Ok(run.written)
}

pub fn cmd_decay(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut run = Run::new(cfg)?;
    let system = cfg.build_system()?;
    let tc = TransferCocycle::with_resolution(&system, cfg.resolution)?;
    let orbit = cfg.orbit(&system);
    let battery = cfg.decay.battery.clone().unwrap_or_else(standard_battery);
    let opts = DecayOptions {
        depth: cfg.decay.depth,
        backward: cfg.decay.backward,
        lambda: cfg.lambda_options(),
        correlations: cfg.decay.correlations,
    };
    let report = decay_fit(&tc, &orbit, 0, &battery, opts)?;
    write_decay_csv(&report, run.create("decay.csv")?)?;
    run.json("decay.json", &report)?;
    Ok(run.written)
}

#[derive(Serialize)]
struct Conditions {
    #[serde(flatten)]
    report: ConditionReport,
    ly: LyConstants,
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut run = Run::new(cfg)?;
    let system = cfg.build_system()?;
    let c = &cfg.check;
    let report = condition_check(
        &system,
        ConditionOptions {
            n1: c.n1,
            n2: c.n2,
            monte_carlo: c.monte_carlo,
            samples: c.samples,
            seed: cfg.seed,
            covering_depth: c.covering_depth,
        },
    )?;
    let tc = TransferCocycle::with_resolution(&system, cfg.resolution)?;
    let ly = ly_constants(
        &tc,
        &cfg.orbit(&system),
        0,
        c.ly_depth,
        cfg.lambda_options(),
    )?;
    run.json("conditions.json", &Conditions { report, ly })?;
    Ok(run.written)
}

/// `survivors.csv`: exact survivor intervals for depths `0..=oracle.depth`.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut run = Run::new(cfg)?;
    let system = cfg.build_system()?;
    let sets = survivor_sequence(&system, &cfg.orbit(&system), 0, cfg.oracle.depth)?;
    write_survivors_csv(&sets, run.create("survivors.csv")?)?;
    Ok(run.written)
}

/// Reads a config file and applies command-line overrides.
pub fn load_config(
    path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    estimator: Option<crate::analysis::Estimator>,
) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path).map_err(|e| match e {
        Error::Io(io) => Error::config("--config", format!("{}: {io}", path.display())),
        other => other,
    })?;
    if let Some(out) = out {
        cfg.out = out;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(est) = estimator {
        cfg.estimator = est;
    }
    cfg.validate()?;
    Ok(cfg)
}
