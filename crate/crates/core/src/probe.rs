//! Empirical probes of the embedding and Strichartz-type estimates for
//! discrete Bourgain norms.
//!
//! Each probe evaluates `lhs / rhs` over an ensemble of trajectories. Both
//! sides are 1-homogeneous, so ratios are scale free; the interesting
//! statistic is how the maximum ratio moves with `τ`.
//!
//! - `embedding_inf_Hs`: `sup_n ‖u_n‖_{H^{s₀}}` against `‖u_n‖_{X^{s₀,b₀}_τ}`.
//! - `strichartz_l4`: `‖Π_{cθ} u_n‖_{l⁴_τ L⁴}` against `‖u_n‖_{X^{s₀/2,1-b₀}_τ}`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bourgain::{bourgain_norm, BourgainParams, Trajectory};
use crate::error::{Error, Result};
use crate::par::par_map;
use crate::roughdata::{generate, RngStream, RoughDataSpec};
use crate::spectral::{project, synthesize, CutoffSpec, SpectralField};
use crate::splitting::{coupled_theta, evolve_observed, Mu, SchemeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimateId {
    #[serde(rename = "embedding_inf_Hs")]
    EmbeddingInfHs,
    #[serde(rename = "strichartz_l4")]
    StrichartzL4,
}

impl EstimateId {
    pub const ALL: [EstimateId; 2] = [EstimateId::EmbeddingInfHs, EstimateId::StrichartzL4];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimateId::EmbeddingInfHs => "embedding_inf_Hs",
            EstimateId::StrichartzL4 => "strichartz_l4",
        }
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "embedding_inf_Hs" => Ok(EstimateId::EmbeddingInfHs),
            "strichartz_l4" => Ok(EstimateId::StrichartzL4),
            _ => Err(Error::param(format!(
                "unknown estimate '{s}' (expected embedding_inf_Hs or strichartz_l4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    /// Spatial index `s₀`.
    pub s0: f64,
    /// Temporal index `b₀ > 1/2`; the Strichartz side uses `1 - b₀`.
    pub b0: f64,
    /// Filter constant `c` in `Π_{cθ}`.
    pub cutoff_factor: f64,
    /// Transform window as a multiple of the trajectory length.
    pub window_factor: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            s0: 0.5,
            b0: 0.625,
            cutoff_factor: 1.0,
            window_factor: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub estimate_id: EstimateId,
    pub tau: f64,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeStats {
    pub estimate_id: EstimateId,
    pub tau: f64,
    pub count: usize,
    pub excluded_zero: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Counts over `HISTOGRAM_BINS` equal bins of `[0, max_ratio]`.
    pub histogram: Vec<usize>,
}

pub const HISTOGRAM_BINS: usize = 10;

/// `‖u_n‖_{l⁴_τ L⁴} = (τ Σ_n ∫ |u_n|⁴ dx)^{1/4}`.
///
/// `|u|²` has modes in `[-(N-1), N-1]²`, so it is resolved without aliasing
/// on the `2N` grid and the grid quadrature of `|u|⁴` is exact.
pub fn l4_tau_l4(fields: &[SpectralField], tau: f64) -> Result<f64> {
    let mut total = 0.0;
    for f in fields {
        let m = 2 * f.n_modes();
        let g = synthesize(f, m)?;
        let cell = (2.0 * std::f64::consts::PI / m as f64).powi(2);
        total += cell * g.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
    }
    Ok((tau * total).powf(0.25))
}

/// `(lhs, rhs)` of one estimate for one trajectory.
pub fn estimate_sides(id: EstimateId, tr: &Trajectory, settings: &ProbeSettings) -> Result<(f64, f64)> {
    let window = settings.window_factor.max(1) * tr.len();
    match id {
        EstimateId::EmbeddingInfHs => {
            let lhs = tr.linf_tau_hs(settings.s0);
            let rhs = bourgain_norm(tr, &BourgainParams::new(settings.s0, settings.b0).with_window(window))?;
            Ok((lhs, rhs))
        }
        EstimateId::StrichartzL4 => {
            let theta = settings.cutoff_factor * coupled_theta(tr.tau(), tr.n_modes());
            let cut = CutoffSpec::new(theta)?;
            let filtered: Vec<_> = tr.fields().iter().map(|f| project(f, &cut)).collect();
            let lhs = l4_tau_l4(&filtered, tr.tau())?;
            let rhs = bourgain_norm(
                tr,
                &BourgainParams::new(0.5 * settings.s0, 1.0 - settings.b0).with_window(window),
            )?;
            Ok((lhs, rhs))
        }
    }
}

/// Evaluates one estimate over an ensemble of `(seed, trajectory)` pairs
/// sharing a step size. Zero trajectories are skipped and counted.
pub fn estimate_probe(
    ensemble: &[(u64, Trajectory)],
    id: EstimateId,
    settings: &ProbeSettings,
) -> Result<(Vec<ProbeSample>, ProbeStats)> {
    let Some((_, first)) = ensemble.first() else {
        return Err(Error::input("empty probe ensemble"));
    };
    let tau = first.tau();
    let members: Vec<&(u64, Trajectory)> = ensemble.iter().filter(|(_, t)| !t.is_zero()).collect();
    let excluded_zero = ensemble.len() - members.len();
    let results = par_map(&members, |(seed, tr)| -> Result<ProbeSample> {
        let (lhs, rhs) = estimate_sides(id, tr, settings)?;
        if rhs == 0.0 || !rhs.is_finite() || !lhs.is_finite() {
            return Err(Error::Internal(format!(
                "{id} probe for seed {seed}: lhs = {lhs}, rhs = {rhs}"
            )));
        }
        Ok(ProbeSample {
            estimate_id: id,
            tau: tr.tau(),
            seed: *seed,
            lhs,
            rhs,
            ratio: lhs / rhs,
        })
    });
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;
    let stats = summarize(id, tau, &samples, excluded_zero);
    Ok((samples, stats))
}

fn summarize(id: EstimateId, tau: f64, samples: &[ProbeSample], excluded_zero: usize) -> ProbeStats {
    let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let min_ratio = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let mut histogram = vec![0; HISTOGRAM_BINS];
    if max_ratio > 0.0 {
        for s in samples {
            let bin = ((s.ratio / max_ratio) * HISTOGRAM_BINS as f64) as usize;
            histogram[bin.min(HISTOGRAM_BINS - 1)] += 1;
        }
    }
    ProbeStats {
        estimate_id: id,
        tau,
        count: samples.len(),
        excluded_zero,
        max_ratio,
        min_ratio,
        histogram,
    }
}

/// Random trajectories at step `tau` with `N = 2τ^{-1/2}` (rounded to even),
/// each a scheme run over `[0, t_window]` from rough data with random
/// regularity in `[0.25, 2]` and random mass. Every tenth member is a single
/// snapshot.
pub fn probe_ensemble(tau: f64, count: usize, base_seed: u64, t_window: f64) -> Result<Vec<(u64, Trajectory)>> {
    let n = crate::harness::grid_for_tau(tau);
    let params = SchemeParams::new(tau, n, Mu::Defocusing, t_window)?;
    params.steps()?;
    let seeds: Vec<u64> = (0..count as u64).map(|i| base_seed + i).collect();
    let members = par_map(&seeds, |&seed| -> Result<(u64, Trajectory)> {
        let mut rng = RngStream::new(seed ^ 0x005E_ED0F_B0A9_6A11);
        let s = 1.125 + 0.875 * rng.next_symmetric();
        let mass = 0.525 + 0.475 * rng.next_symmetric();
        let spec = RoughDataSpec {
            target_l2: mass,
            ..RoughDataSpec::new(s, seed, n)
        };
        let datum = generate(&spec)?;
        let fields = if (seed - base_seed) % 10 == 9 {
            vec![project(&datum, &params.cutoff())]
        } else {
            let mut out = Vec::new();
            evolve_observed(&datum, &params, 1, |_, u| {
                out.push(u.clone());
                Ok(())
            })?;
            out
        };
        Ok((seed, Trajectory::new(tau, fields)?))
    });
    members.into_iter().collect()
}

/// One probe run per `(τ, estimate)` pair.
pub fn probe_sweep(
    taus: &[f64],
    ids: &[EstimateId],
    count: usize,
    base_seed: u64,
    t_window: f64,
    settings: &ProbeSettings,
) -> Result<(Vec<ProbeSample>, Vec<ProbeStats>)> {
    let mut samples = Vec::new();
    let mut stats = Vec::new();
    for &tau in taus {
        let ensemble = probe_ensemble(tau, count, base_seed, t_window)?;
        for &id in ids {
            let (s, st) = estimate_probe(&ensemble, id, settings)?;
            samples.extend(s);
            stats.push(st);
        }
    }
    Ok((samples, stats))
}

/// CSV with columns `estimate_id,tau,seed,lhs,rhs,ratio`.
pub fn write_probe_csv(path: &Path, samples: &[ProbeSample]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["estimate_id", "tau", "seed", "lhs", "rhs", "ratio"])?;
    for s in samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_probe_csv(path: &Path) -> Result<Vec<ProbeSample>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Multiplies every snapshot by `factor`.
pub fn scale_ensemble(ensemble: &[(u64, Trajectory)], factor: f64) -> Vec<(u64, Trajectory)> {
    ensemble
        .iter()
        .map(|(s, t)| (*s, t.scaled(Complex64::new(factor, 0.0))))
        .collect()
}
