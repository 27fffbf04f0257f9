//! Study configuration, read from a TOML key-value file.
//!
//! ```toml
//! s_values = [1.0, 2.0]
//! tau_list = ["2^-12", "2^-11", "2^-10", "2^-9", "2^-8"]   # or plain decimals
//! t_final = 0.25
//! seeds = [1, 2, 3]
//! mu = -1                 # +1 focusing, -1 defocusing
//! eps = 0.01              # decay fudge of the random data
//! target_l2 = 0.1         # L² norm of every datum
//! checkpoints = 1         # >1: error is the max over T·i/checkpoints
//! record_timing = true    # false writes wall_time = 0 for byte-stable output
//! output_dir = "study"
//!
//! [reference]
//! k_modes = 256
//! tau_ref = "2^-16"
//! ```
//!
//! Every key is optional; omitted keys take the desk-scale defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{grid_for_tau, parse_tau};
use crate::roughdata::{DEFAULT_EPS, DEFAULT_TARGET_L2};
use crate::splitting::Mu;

/// A step size given as a number or as text such as `"2^-10"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TauRepr", into = "f64")]
pub struct TauValue(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum TauRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<TauRepr> for TauValue {
    type Error = Error;

    fn try_from(r: TauRepr) -> Result<Self> {
        match r {
            TauRepr::Number(v) => parse_tau(&v.to_string()).map(TauValue),
            TauRepr::Text(t) => parse_tau(&t).map(TauValue),
        }
    }
}

impl From<TauValue> for f64 {
    fn from(t: TauValue) -> f64 {
        t.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub k_modes: usize,
    pub tau_ref: TauValue,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            k_modes: 256,
            tau_ref: TauValue(2f64.powi(-16)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub s_values: Vec<f64>,
    pub tau_list: Vec<TauValue>,
    pub t_final: f64,
    pub reference: ReferenceConfig,
    pub seeds: Vec<u64>,
    pub mu: Mu,
    pub eps: f64,
    pub target_l2: f64,
    pub checkpoints: usize,
    pub record_timing: bool,
    pub output_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            s_values: vec![1.0, 2.0],
            tau_list: (8..=12).rev().map(|e| TauValue(2f64.powi(-e))).collect(),
            t_final: 0.25,
            reference: ReferenceConfig::default(),
            seeds: vec![1, 2, 3],
            mu: Mu::Defocusing,
            eps: DEFAULT_EPS,
            target_l2: DEFAULT_TARGET_L2,
            checkpoints: 1,
            record_timing: true,
            output_dir: PathBuf::from("study"),
        }
    }
}

fn is_multiple(t: f64, tau: f64) -> bool {
    let n = (t / tau).round();
    (n * tau - t).abs() <= f64::EPSILON * t.max(tau)
}

impl StudyConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(text).map_err(|e| Error::param(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn taus(&self) -> Vec<f64> {
        self.tau_list.iter().map(|t| t.0).collect()
    }

    pub fn tau_ref(&self) -> f64 {
        self.reference.tau_ref.0
    }

    pub fn max_grid(&self) -> usize {
        self.taus().into_iter().map(grid_for_tau).max().unwrap_or(0)
    }

    /// Times at which errors are measured: `T·i/checkpoints`, `i = 1..=checkpoints`.
    pub fn checkpoint_times(&self) -> Vec<f64> {
        let c = self.checkpoints.max(1);
        (1..=c).map(|i| self.t_final * i as f64 / c as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_values.is_empty() || self.s_values.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::param("s_values must be a non-empty list of positive numbers"));
        }
        if self.tau_list.is_empty() {
            return Err(Error::param("tau_list must not be empty"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds must not be empty"));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::param(format!("t_final must be positive, got {}", self.t_final)));
        }
        if !(self.eps > 0.0 && self.target_l2 > 0.0) {
            return Err(Error::param("eps and target_l2 must be positive"));
        }
        if self.checkpoints == 0 {
            return Err(Error::param("checkpoints must be at least 1"));
        }
        let times = self.checkpoint_times();
        for tau in self.taus().into_iter().chain([self.tau_ref()]) {
            if let Some(t) = times.iter().find(|t| !is_multiple(**t, tau)) {
                return Err(Error::param(format!(
                    "time {t} is not an integer multiple of tau = {tau}"
                )));
            }
        }
        let min_tau = self.taus().into_iter().fold(f64::INFINITY, f64::min);
        if self.tau_ref() > min_tau / 16.0 {
            return Err(Error::param(format!(
                "tau_ref = {} must be at most min(tau)/16 = {}",
                self.tau_ref(),
                min_tau / 16.0
            )));
        }
        let k = self.reference.k_modes;
        let max_n = self.max_grid();
        if !k.is_multiple_of(2) || k < 2 * max_n {
            return Err(Error::param(format!(
                "reference K = {k} must be even and at least 2·max N = {}",
                2 * max_n
            )));
        }
        if k < 4 * max_n {
            log::warn!("reference K = {k} is below 4·max N = {}", 4 * max_n);
        }
        Ok(())
    }
}
