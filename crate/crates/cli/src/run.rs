//! Runs every (scenario, seed) pair of a config and writes the report files.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use symcost::random::stream_seed;

use crate::config::{Config, ConfigError};
use crate::report::{write_summary, OrderedSink, ReportLine};
use crate::scenarios::{evaluate, ScenarioError};

pub const SEED_ENV: &str = "SYMCOST_SEED";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid {SEED_ENV} value {0:?}: expected an unsigned 64-bit integer")]
    SeedEnv(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub report: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    /// Worker threads; `None` uses every logical core.
    pub jobs: Option<usize>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub lines: Vec<ReportLine>,
    pub report_path: PathBuf,
    pub summary_path: PathBuf,
}

impl RunOutcome {
    pub fn violations(&self) -> usize {
        self.lines.iter().filter(|l| !l.pass).count()
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a Path,
    master_seed: u64,
    jobs: usize,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    total_wall_time_ms: f64,
    lines: Vec<MetaLine>,
}

#[derive(Serialize)]
struct MetaLine {
    scenario_id: String,
    seed: u64,
    wall_time_ms: f64,
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Master seed from the environment when set, else from the config.
pub fn master_seed(cfg: &Config) -> Result<u64, RunError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| RunError::SeedEnv(v)),
        Err(_) => Ok(cfg.master_seed),
    }
}

/// Sidecar path holding timestamps and timings, so the report itself stays reproducible.
pub fn meta_path(report: &Path) -> PathBuf {
    let mut name = report.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    report.with_file_name(name)
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let cfg = Config::load(config_path)?;
    let master = master_seed(&cfg)?;
    let (default_report, default_summary) = cfg.resolve_outputs(config_path);
    let report_path = opts.report.clone().unwrap_or(default_report);
    let summary_path = opts.summary.clone().unwrap_or(default_summary);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };

    let tasks: Vec<(usize, u64)> = cfg
        .scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.seeds.iter().map(move |&seed| (i, seed)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| RunError::Pool(e.to_string()))?;
    let jobs = pool.current_num_threads();

    let started = unix_ms();
    let clock = Instant::now();
    let file = File::create(&report_path).map_err(io(&report_path))?;
    let sink = Mutex::new(OrderedSink::new(BufWriter::new(file)));
    let results: Vec<Result<(ReportLine, f64), RunError>> = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(index, &(si, seed))| {
                let s = &cfg.scenarios[si];
                let t = Instant::now();
                let line = evaluate(s, seed, stream_seed(master, seed))?;
                let ms = t.elapsed().as_secs_f64() * 1e3;
                let text = serde_json::to_string(&line).expect("report lines serialize");
                let mut guard = sink.lock().unwrap_or_else(|e| e.into_inner());
                guard.push(index, text).map_err(io(&report_path))?;
                Ok((line, ms))
            })
            .collect()
    });
    drop(sink);

    let mut lines = Vec::with_capacity(results.len());
    let mut timings = Vec::with_capacity(results.len());
    for r in results {
        let (line, ms) = r?;
        timings.push(MetaLine {
            scenario_id: line.report.scenario_id.clone(),
            seed: line.seed,
            wall_time_ms: ms,
        });
        lines.push(line);
    }
    write_summary(&summary_path, &lines).map_err(io(&summary_path))?;

    let meta = Meta {
        config: config_path,
        master_seed: master,
        jobs,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        total_wall_time_ms: clock.elapsed().as_secs_f64() * 1e3,
        lines: timings,
    };
    let mp = meta_path(&report_path);
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&mp, text + "\n").map_err(io(&mp))?;

    Ok(RunOutcome {
        lines,
        report_path,
        summary_path,
    })
}
