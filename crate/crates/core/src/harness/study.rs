use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::StudyConfig;
use crate::harness::export::{append_record, read_records, write_header, write_records};
use crate::harness::grid_for_tau;
use crate::harness::reference::{compute_references, Reference};
use crate::par::par_map;
use crate::roughdata::{generate, RoughDataSpec};
use crate::spectral::{l2_norm, project, SpectralField};
use crate::splitting::{coupled_theta, evolve_observed, SchemeParams};

pub const RESULTS_FILE: &str = "convergence.csv";

/// One `(s, τ, seed)` run. `l2_error` is `None` when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub s: f64,
    pub tau: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    pub seed: u64,
    pub l2_error: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecordKey {
    s_bits: u64,
    tau_bits: u64,
    seed: u64,
}

impl RecordKey {
    pub fn new(s: f64, tau: f64, seed: u64) -> Self {
        Self {
            s_bits: s.to_bits(),
            tau_bits: tau.to_bits(),
            seed,
        }
    }
}

impl ConvergenceRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey::new(self.s, self.tau, self.seed)
    }
}

#[derive(Debug, Clone, Default)]
pub struct StudyOptions {
    /// Directory for cached references; `None` disables the cache.
    pub cache_dir: Option<PathBuf>,
}

impl StudyOptions {
    pub fn cached_in(dir: impl Into<PathBuf>) -> Self {
        Self {
            cache_dir: Some(dir.into()),
        }
    }
}

/// `‖coarse - reference‖_{L²}` after zero-padding `coarse` to the reference
/// mode square.
pub fn l2_error(coarse: &SpectralField, reference: &SpectralField) -> Result<f64> {
    if reference.n_modes() < coarse.n_modes() {
        return Err(Error::param(format!(
            "reference has {} modes, fewer than the {} of the coarse field",
            reference.n_modes(),
            coarse.n_modes()
        )));
    }
    Ok(l2_norm(&reference.difference(coarse)))
}

fn sort_records(rows: &mut Vec<ConvergenceRecord>) {
    rows.sort_by(|a, b| {
        a.s.total_cmp(&b.s)
            .then(a.tau.total_cmp(&b.tau))
            .then(a.seed.cmp(&b.seed))
    });
    let mut seen = HashSet::new();
    rows.retain(|r| seen.insert(r.key()));
}

/// Drops a trailing partial line left by an interrupted append.
fn repair_tail(path: &Path) -> Result<()> {
    let bytes = fs::read(path)?;
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    log::warn!("dropping an incomplete trailing row from {path:?}");
    fs::write(path, &bytes[..keep])?;
    Ok(())
}

fn open_results(path: &Path) -> Result<(fs::File, Vec<ConvergenceRecord>)> {
    let existing = if path.exists() {
        repair_tail(path)?;
        if fs::metadata(path)?.len() == 0 {
            write_records(path, &[])?;
            Vec::new()
        } else {
            read_records(path)?
        }
    } else {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        write_header(&mut w)?;
        w.flush()?;
        Vec::new()
    };
    let file = fs::OpenOptions::new().append(true).open(path)?;
    Ok((file, existing))
}

struct Job {
    s: f64,
    seed: u64,
    taus: Vec<f64>,
}

fn failed_row(cfg: &StudyConfig, s: f64, tau: f64, seed: u64) -> ConvergenceRecord {
    let n = grid_for_tau(tau);
    ConvergenceRecord {
        s,
        tau,
        n,
        theta: coupled_theta(tau, n),
        seed,
        l2_error: None,
        wall_time: 0.0,
    }
    .with_timing(cfg, 0.0)
}

impl ConvergenceRecord {
    fn with_timing(mut self, cfg: &StudyConfig, secs: f64) -> Self {
        self.wall_time = if cfg.record_timing { secs } else { 0.0 };
        self
    }
}

/// Runs the coarse scheme for one `τ` and measures the error against the
/// reference(s). Blowups become failed rows; other errors propagate.
fn coarse_run(
    cfg: &StudyConfig,
    datum: &SpectralField,
    refs: &[Reference],
    s: f64,
    tau: f64,
    seed: u64,
) -> Result<ConvergenceRecord> {
    let n = grid_for_tau(tau);
    let params = SchemeParams::new(tau, n, cfg.mu, cfg.t_final)?;
    let u0 = project(datum, &params.cutoff()).resized(n)?;
    let mut wanted = Vec::with_capacity(refs.len());
    for r in refs {
        wanted.push(SchemeParams { t_final: r.t, ..params }.steps()?);
    }
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let result = evolve_observed(&u0, &params, 1, |step, u| {
        for (r, &w) in refs.iter().zip(&wanted) {
            if w == step {
                worst = worst.max(l2_error(u, &r.field)?);
            }
        }
        Ok(())
    });
    let elapsed = start.elapsed().as_secs_f64();
    let l2 = match result {
        Ok(_) => Some(worst),
        Err(Error::NumericalBlowup { step }) => {
            log::warn!("s = {s}, tau = {tau}, seed = {seed}: blowup at step {step}");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(ConvergenceRecord {
        s,
        tau,
        n,
        theta: params.theta,
        seed,
        l2_error: l2,
        wall_time: 0.0,
    }
    .with_timing(cfg, elapsed))
}

fn run_job(cfg: &StudyConfig, opts: &StudyOptions, job: &Job, sink: &Mutex<fs::File>) -> Result<()> {
    let spec = RoughDataSpec {
        s: job.s,
        eps: cfg.eps,
        seed: job.seed,
        n_modes: cfg.reference.k_modes,
        target_l2: cfg.target_l2,
    };
    let emit = |row: &ConvergenceRecord| -> Result<()> {
        let mut f = sink
            .lock()
            .map_err(|_| Error::Internal("result sink poisoned".into()))?;
        append_record(&mut f, row)
    };
    let refs = match compute_references(
        &spec,
        cfg.tau_ref(),
        &cfg.checkpoint_times(),
        cfg.mu,
        opts.cache_dir.as_deref(),
    ) {
        Ok(r) => r,
        Err(Error::NumericalBlowup { step }) => {
            log::warn!(
                "reference for s = {}, seed = {} blew up at step {step}; marking its rows failed",
                job.s,
                job.seed
            );
            for &tau in &job.taus {
                emit(&failed_row(cfg, job.s, tau, job.seed))?;
            }
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let datum = generate(&spec)?;
    let rows = par_map(&job.taus, |&tau| -> Result<()> {
        let row = coarse_run(cfg, &datum, &refs, job.s, tau, job.seed)?;
        emit(&row)
    });
    rows.into_iter().collect()
}

fn run_study_unchecked(cfg: &StudyConfig, opts: &StudyOptions) -> Result<Vec<ConvergenceRecord>> {
    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(RESULTS_FILE);
    let (file, existing) = open_results(&path)?;
    let done: HashSet<RecordKey> = existing.iter().map(ConvergenceRecord::key).collect();

    let mut jobs = Vec::new();
    for &s in &cfg.s_values {
        for &seed in &cfg.seeds {
            let taus: Vec<f64> = cfg
                .taus()
                .into_iter()
                .filter(|&t| !done.contains(&RecordKey::new(s, t, seed)))
                .collect();
            if !taus.is_empty() {
                jobs.push(Job { s, seed, taus });
            }
        }
    }
    if !jobs.is_empty() {
        log::info!(
            "{} (s, seed) jobs pending, {} rows already present",
            jobs.len(),
            existing.len()
        );
    }

    let sink = Mutex::new(file);
    let outcomes = par_map(&jobs, |job| run_job(cfg, opts, job, &sink));
    drop(sink);
    // Keep whatever finished even if a job failed, then report the failure.
    let mut rows = read_records(&path)?;
    sort_records(&mut rows);
    write_records(&path, &rows)?;
    outcomes.into_iter().collect::<Result<Vec<()>>>()?;
    Ok(rows)
}

/// Runs (or resumes) the sweep described by `cfg`, writing
/// `output_dir/convergence.csv`. Rows are appended as runs finish; rows
/// whose `(s, τ, seed)` already appear in the file are not recomputed. The
/// final file is sorted by `(s, τ, seed)`.
pub fn run_study(cfg: &StudyConfig, opts: &StudyOptions) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    run_study_unchecked(cfg, opts)
}

/// Repeats the study against references at `K/4`, `K/2` and `K` modes,
/// each in its own subdirectory `ref_K{K'}`. Resolutions below the largest
/// coarse grid are skipped.
pub fn run_reference_sensitivity(
    cfg: &StudyConfig,
    opts: &StudyOptions,
) -> Result<Vec<(usize, Vec<ConvergenceRecord>)>> {
    cfg.validate()?;
    let k = cfg.reference.k_modes;
    let mut out = Vec::new();
    for kk in [k / 4, k / 2, k] {
        if kk < cfg.max_grid() || kk % 2 != 0 {
            log::info!("skipping reference resolution {kk}: below max N = {}", cfg.max_grid());
            continue;
        }
        let mut sub = cfg.clone();
        sub.reference.k_modes = kk;
        sub.output_dir = cfg.output_dir.join(format!("ref_K{kk}"));
        out.push((kk, run_study_unchecked(&sub, opts)?));
    }
    Ok(out)
}
