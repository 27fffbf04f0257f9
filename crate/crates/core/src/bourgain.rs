//! Discrete Bourgain norms `X^{s,b}_τ` of finite trajectories.
//!
//! A trajectory `(u_n)_{n=0}^{L-1}` is extended by zero to a window of
//! `M ≥ L` steps. Its time-space transform
//!
//! ```text
//! ũ(σ, k) = τ Σ_n û_n(k) e^{inτσ}
//! ```
//!
//! is sampled on the dual grid `σ_j = 2πj/(Mτ)`, `j = -⌊M/2⌋ .. M-1-⌊M/2⌋`,
//! which covers one period `2π/τ`. The `L²l²` norm of the transform is
//!
//! ```text
//! ‖ũ‖²_{L²l²} = 2π · Σ_j Δσ Σ_k |ũ(σ_j, k)|²,   Δσ = 2π/(Mτ)
//! ```
//!
//! The extra `2π` makes Parseval exact against
//! `‖u_n‖²_{l²_τ L²} = τ Σ_n ‖u_n‖²_{L²}` with the Lebesgue `L²` norm used
//! everywhere in this crate; the σ-quadrature itself is exact for the
//! unweighted norm because `|ũ|²` is a trigonometric polynomial of degree
//! `< M` in `τσ`.
//!
//! The Bourgain norm weights the transform by `⟨k⟩^s ⟨d_τ(σ - |k|²)⟩^b` with
//! `d_τ(σ) = (e^{iτσ} - 1)/τ`, so `|d_τ(σ)| = 2|sin(τσ/2)|/τ`. Values near
//! the window edges carry zero-extension artifacts; compare norms only at a
//! fixed window-to-trajectory ratio.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral::{bracket_sq, l2_norm, mode_range, sobolev_norm, SpectralField};

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    tau: f64,
    fields: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(tau: f64, fields: Vec<SpectralField>) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::param(format!("tau must be positive, got {tau}")));
        }
        let Some(first) = fields.first() else {
            return Err(Error::input("trajectory needs at least one snapshot"));
        };
        let n = first.n_modes();
        if fields.iter().any(|f| f.n_modes() != n) {
            return Err(Error::input("all snapshots of a trajectory must share N"));
        }
        Ok(Self { tau, fields })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.fields[0].n_modes()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            tau: self.tau,
            fields: self.fields.iter().map(|f| f.scaled(factor)).collect(),
        }
    }

    /// Prepends `shift` zero snapshots.
    pub fn delayed(&self, shift: usize) -> Self {
        let zero = SpectralField::zeros(self.n_modes()).expect("valid N");
        let mut fields = vec![zero; shift];
        fields.extend(self.fields.iter().cloned());
        Self { tau: self.tau, fields }
    }

    pub fn is_zero(&self) -> bool {
        self.fields
            .iter()
            .all(|f| f.coeffs().iter().all(|z| z.re == 0.0 && z.im == 0.0))
    }

    /// `‖u_n‖_{l²_τ L²} = (τ Σ_n ‖u_n‖²_{L²})^{1/2}`.
    pub fn l2_tau_l2(&self) -> f64 {
        (self.tau * self.fields.iter().map(|f| l2_norm(f).powi(2)).sum::<f64>()).sqrt()
    }

    /// `sup_n ‖u_n‖_{H^s}`.
    pub fn linf_tau_hs(&self, s: f64) -> f64 {
        self.fields.iter().map(|f| sobolev_norm(f, s)).fold(0.0, f64::max)
    }
}

/// Regularity indices and the σ-resolution window of a norm evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BourgainParams {
    pub s: f64,
    pub b: f64,
    /// Transform length `M`; `None` uses the trajectory length.
    pub window: Option<usize>,
}

impl BourgainParams {
    pub fn new(s: f64, b: f64) -> Self {
        Self { s, b, window: None }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = Some(window);
        self
    }
}

/// `ũ(σ_j, k)` stored row-major over `(j, k)`, both in natural order.
#[derive(Debug, Clone)]
pub struct SpaceTimeTransform {
    tau: f64,
    window: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl SpaceTimeTransform {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    /// Index range of `j` in `σ_j = 2πj/(Mτ)`.
    pub fn sigma_indices(&self) -> std::ops::Range<i64> {
        let lo = -((self.window / 2) as i64);
        lo..lo + self.window as i64
    }

    pub fn sigma(&self, j: i64) -> f64 {
        2.0 * PI * j as f64 / (self.window as f64 * self.tau)
    }

    pub fn d_sigma(&self) -> f64 {
        2.0 * PI / (self.window as f64 * self.tau)
    }

    pub fn get(&self, j: i64, k1: i64, k2: i64) -> Complex64 {
        let row = (j - self.sigma_indices().start) as usize;
        let half = (self.n / 2) as i64;
        let col = ((k1 + half) as usize) * self.n + (k2 + half) as usize;
        self.data[row * self.n * self.n + col]
    }

    /// Unweighted `‖ũ‖_{L²l²}`.
    pub fn l2l2_norm(&self) -> f64 {
        (2.0 * PI * self.d_sigma() * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }
}

fn window_len(tr: &Trajectory, window: Option<usize>) -> Result<usize> {
    let m = window.unwrap_or(tr.len());
    if m < tr.len() {
        return Err(Error::param(format!(
            "window {m} is shorter than the trajectory ({} snapshots)",
            tr.len()
        )));
    }
    Ok(m)
}

/// Time-space transform over a window of `window` steps (default: the
/// trajectory length).
pub fn time_space_transform(tr: &Trajectory, window: Option<usize>) -> Result<SpaceTimeTransform> {
    let m = window_len(tr, window)?;
    let n = tr.n_modes();
    let modes = n * n;
    let lo = (m / 2) as i64;
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    let mut column = vec![Complex64::new(0.0, 0.0); m];
    let mut data = vec![Complex64::new(0.0, 0.0); m * modes];
    for c in 0..modes {
        column.fill(Complex64::new(0.0, 0.0));
        for (t, f) in tr.fields.iter().enumerate() {
            column[t] = f.coeffs()[c];
        }
        // inverse DFT: column'[p] = Σ_t column[t] e^{2πi t p / M}
        ifft.process(&mut column);
        for (row, j) in (-lo..m as i64 - lo).enumerate() {
            let p = j.rem_euclid(m as i64) as usize;
            data[row * modes + c] = column[p] * tr.tau;
        }
    }
    Ok(SpaceTimeTransform {
        tau: tr.tau,
        window: m,
        n,
        data,
    })
}

/// `⟨d_τ(x)⟩² = 1 + (2 sin(τx/2)/τ)²`.
#[inline]
pub fn d_tau_bracket_sq(tau: f64, x: f64) -> f64 {
    let d = 2.0 * (0.5 * tau * x).sin() / tau;
    1.0 + d * d
}

/// `‖u_n‖_{X^{s,b}_τ}` in the multiplier form.
pub fn bourgain_norm(tr: &Trajectory, p: &BourgainParams) -> Result<f64> {
    let tf = time_space_transform(tr, p.window)?;
    Ok(weighted_norm(&tf, p, true))
}

/// The difference-operator form `‖⟨D_τ⟩^b ⟨k⟩^s e^{-inτΔ} u_n‖_{l²_τ L²}`,
/// evaluated with the time multiplier `⟨d_τ(σ)⟩^b` on the same σ-grid.
/// Equivalent to [`bourgain_norm`] up to constants; reported alongside it,
/// not interchangeable with it.
pub fn bourgain_norm_difference_form(tr: &Trajectory, p: &BourgainParams) -> Result<f64> {
    let tau = tr.tau;
    let pulled_back: Vec<SpectralField> = tr
        .fields
        .iter()
        .enumerate()
        .map(|(n, f)| crate::splitting::free_flow(f, -(n as f64) * tau))
        .collect();
    let back = Trajectory::new(tau, pulled_back)?;
    let tf = time_space_transform(&back, p.window)?;
    Ok(weighted_norm(&tf, p, false))
}

fn weighted_norm(tf: &SpaceTimeTransform, p: &BourgainParams, shift_by_dispersion: bool) -> f64 {
    let n = tf.n;
    let modes = n * n;
    let mut weights_k = Vec::with_capacity(modes);
    let mut k_sq = Vec::with_capacity(modes);
    for k1 in mode_range(n) {
        for k2 in mode_range(n) {
            weights_k.push(bracket_sq(k1, k2).powf(p.s));
            k_sq.push((k1 * k1 + k2 * k2) as f64);
        }
    }
    let mut total = 0.0;
    for (row, j) in tf.sigma_indices().enumerate() {
        let sigma = tf.sigma(j);
        let slice = &tf.data[row * modes..(row + 1) * modes];
        for c in 0..modes {
            let z = slice[c];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let x = if shift_by_dispersion { sigma - k_sq[c] } else { sigma };
            total += weights_k[c] * d_tau_bracket_sq(tf.tau, x).powf(p.b) * z.norm_sqr();
        }
    }
    (2.0 * PI * tf.d_sigma() * total).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::free_flow;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(n: usize, salt: f64) -> SpectralField {
        SpectralField::from_fn(n, |k1, k2| {
            c(
                (salt + k1 as f64 * 0.9 - k2 as f64).sin(),
                (salt * k2 as f64 + 0.4).cos(),
            ) * bracket_sq(k1, k2).powf(-1.0)
        })
        .unwrap()
    }

    fn trajectory(len: usize, n: usize, tau: f64) -> Trajectory {
        Trajectory::new(tau, (0..len).map(|i| field(n, i as f64 * 0.37)).collect()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(Trajectory::new(0.1, vec![]).is_err());
        assert!(Trajectory::new(
            0.1,
            vec![SpectralField::zeros(4).unwrap(), SpectralField::zeros(6).unwrap()]
        )
        .is_err());
        let tr = trajectory(5, 4, 0.1);
        assert!(time_space_transform(&tr, Some(4)).is_err());
    }

    #[test]
    fn single_snapshot_transform_is_flat() {
        let tau = 0.125;
        let v = field(4, 1.0);
        let tr = Trajectory::new(
            tau,
            vec![
                v.clone(),
                SpectralField::zeros(4).unwrap(),
                SpectralField::zeros(4).unwrap(),
            ],
        )
        .unwrap();
        let tf = time_space_transform(&tr, Some(6)).unwrap();
        for j in tf.sigma_indices() {
            for ((k1, k2), z) in v.modes() {
                assert!((tf.get(j, k1, k2) - z * tau).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn parseval_with_and_without_padding() {
        let tr = trajectory(7, 6, 0.05);
        for w in [None, Some(8), Some(21)] {
            let tf = time_space_transform(&tr, w).unwrap();
            let lhs = tf.l2l2_norm();
            let rhs = tr.l2_tau_l2();
            assert!((lhs - rhs).abs() <= 1e-13 * rhs, "window {w:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn shift_multiplies_by_phase() {
        let tau = 0.1;
        let tr = trajectory(4, 4, tau);
        let a = time_space_transform(&tr, Some(10)).unwrap();
        let b = time_space_transform(&tr.delayed(2), Some(10)).unwrap();
        for j in a.sigma_indices() {
            let phase = Complex64::from_polar(1.0, 2.0 * tau * a.sigma(j));
            for k1 in mode_range(4) {
                for k2 in mode_range(4) {
                    let (x, y) = (a.get(j, k1, k2), b.get(j, k1, k2));
                    assert!((x * phase - y).norm() < 1e-14);
                    assert!((x.norm() - y.norm()).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_weights_reduce_to_parseval() {
        let tr = trajectory(9, 8, 0.03);
        let x = bourgain_norm(&tr, &BourgainParams::new(0.0, 0.0)).unwrap();
        assert!((x - tr.l2_tau_l2()).abs() <= 1e-12 * x);
    }

    #[test]
    fn difference_form_on_free_flow_is_b_independent() {
        let tau = 2f64.powi(-5);
        let v = field(6, 0.2);
        let len = 12;
        let fields = (0..len).map(|n| free_flow(&v, n as f64 * tau)).collect();
        let tr = Trajectory::new(tau, fields).unwrap();
        let s = 0.7;
        let want = (tau * len as f64).sqrt() * sobolev_norm(&v, s);
        for b in [0.0, 0.4, 0.9] {
            let x = bourgain_norm_difference_form(&tr, &BourgainParams::new(s, b)).unwrap();
            assert!((x - want).abs() <= 1e-12 * want, "b = {b}: {x} vs {want}");
        }
    }
}
