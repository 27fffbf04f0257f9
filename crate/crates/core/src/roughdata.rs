//! Seedable random initial data of prescribed Sobolev regularity.
//!
//! A datum on the `N`-mode square has coefficients
//!
//! ```text
//! û_k = c · ⟨k⟩^{-(s+1+ε)} · g_k,     g_k = a_k + i b_k,   a_k, b_k ~ U[-1, 1)
//! ```
//!
//! with `c` chosen so that `‖u‖_{L²} = target_l2`. The draws come from
//! [`RngStream`], a SplitMix64 generator, consumed in natural mode order
//! (row-major over `(k₁, k₂)`, each from `-N/2` to `N/2-1`), real part before
//! imaginary part. This fixes every datum bit-for-bit given its spec, on any
//! platform and in any language that implements the same three lines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{bracket_sq, l2_norm, SpectralField};

pub const DEFAULT_EPS: f64 = 0.01;
pub const DEFAULT_TARGET_L2: f64 = 0.1;

/// SplitMix64 mapped to `[-1, 1)`.
///
/// State advance `x += 0x9E3779B97F4A7C15`, output mix
///
/// ```text
/// z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// z =  z ^ (z >> 31)
/// ```
///
/// (all wrapping `u64` arithmetic), then `2 · (z >> 11) · 2^{-53} - 1`.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[-1, 1)` with 53 bits of resolution.
    pub fn next_symmetric(&mut self) -> f64 {
        let unit = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * unit - 1.0
    }
}

impl Iterator for RngStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_symmetric())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughDataSpec {
    pub s: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub seed: u64,
    pub n_modes: usize,
    #[serde(default = "default_target")]
    pub target_l2: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_target() -> f64 {
    DEFAULT_TARGET_L2
}

impl RoughDataSpec {
    pub fn new(s: f64, seed: u64, n_modes: usize) -> Self {
        Self {
            s,
            eps: DEFAULT_EPS,
            seed,
            n_modes,
            target_l2: DEFAULT_TARGET_L2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::param(format!("s must be positive, got {}", self.s)));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::param(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.target_l2.is_finite() && self.target_l2 > 0.0) {
            return Err(Error::param(format!(
                "target L2 norm must be positive, got {}",
                self.target_l2
            )));
        }
        if self.n_modes < 2 || !self.n_modes.is_multiple_of(2) {
            return Err(Error::param(format!("N must be even and >= 2, got {}", self.n_modes)));
        }
        Ok(())
    }

    /// Decay exponent `s + 1 + ε` of the coefficient envelope.
    pub fn decay(&self) -> f64 {
        self.s + 1.0 + self.eps
    }
}

/// Un-normalized coefficients `⟨k⟩^{-(s+1+ε)} g_k` for one seed.
pub fn raw_coefficients(spec: &RoughDataSpec, seed: u64) -> Result<SpectralField> {
    spec.validate()?;
    let mut rng = RngStream::new(seed);
    let half_decay = -0.5 * spec.decay();
    SpectralField::from_fn(spec.n_modes, |k1, k2| {
        let re = rng.next_symmetric();
        let im = rng.next_symmetric();
        Complex64::new(re, im) * bracket_sq(k1, k2).powf(half_decay)
    })
}

/// The normalized datum. An all-zero draw retries with the next seed.
pub fn generate(spec: &RoughDataSpec) -> Result<SpectralField> {
    let mut seed = spec.seed;
    loop {
        let raw = raw_coefficients(spec, seed)?;
        let norm = l2_norm(&raw);
        if norm > 0.0 {
            return Ok(raw.scaled(Complex64::new(spec.target_l2 / norm, 0.0)));
        }
        log::warn!("all-zero random draw for seed {seed}; retrying with seed {}", seed + 1);
        seed = seed.wrapping_add(1);
    }
}
