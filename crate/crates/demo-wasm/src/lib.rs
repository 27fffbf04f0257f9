//! Browser front end for `nls2d`: a live filtered Lie splitting run, an
//! in-page convergence study and a Bourgain-norm profile.
//!
//! Everything exported here is a thin wrapper; the page in `www/` draws the
//! returned buffers on `<canvas>` elements.

use wasm_bindgen::prelude::*;

use nls2d::bourgain::{bourgain_norm, BourgainParams, Trajectory};
use nls2d::harness::{compute_reference, grid_for_tau, l2_error};
use nls2d::roughdata::{generate, RoughDataSpec};
use nls2d::spectral::{l2_norm, project, synthesize, SpectralField};
use nls2d::splitting::{evolve, evolve_observed, Mu, SchemeParams, Stepper};

fn js_err(e: nls2d::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn mu_from(sign: i32) -> Result<Mu, JsValue> {
    Mu::try_from(sign).map_err(js_err)
}

/// Maps `t ∈ [0, 1]` to a dark-blue → orange → pale-yellow ramp.
fn colormap(t: f64) -> [u8; 3] {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [5.0, 5.0, 30.0]),
        (0.35, [90.0, 20.0, 110.0]),
        (0.7, [235.0, 110.0, 40.0]),
        (1.0, [252.0, 250.0, 190.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let i = STOPS
        .iter()
        .rposition(|(x, _)| *x <= t)
        .unwrap_or(0)
        .min(STOPS.len() - 2);
    let (x0, c0) = STOPS[i];
    let (x1, c1) = STOPS[i + 1];
    let w = (t - x0) / (x1 - x0);
    [0, 1, 2].map(|j| (c0[j] + w * (c1[j] - c0[j])).round() as u8)
}

fn to_rgba(values: &[f64]) -> Vec<u8> {
    let hi = values.iter().copied().fold(0.0, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = Vec::with_capacity(values.len() * 4);
    for v in values {
        let [r, g, b] = colormap((v - lo) / span);
        out.extend_from_slice(&[r, g, b, 255]);
    }
    out
}

/// A running simulation from random rough data.
#[wasm_bindgen]
pub struct Simulation {
    stepper: Stepper,
    field: SpectralField,
    step: usize,
    initial_mass: f64,
}

#[wasm_bindgen]
impl Simulation {
    /// `N = 2τ^{-1/2}` with `τ = 2^tau_log2`; the datum has regularity `s`
    /// and `L²` norm `l2`.
    #[wasm_bindgen(constructor)]
    pub fn new(s: f64, seed: u32, tau_log2: i32, l2: f64, mu: i32) -> Result<Simulation, JsValue> {
        let tau = 2f64.powi(tau_log2);
        let n = grid_for_tau(tau);
        let params = SchemeParams::new(tau, n, mu_from(mu)?, 0.0).map_err(js_err)?;
        let spec = RoughDataSpec {
            target_l2: l2,
            ..RoughDataSpec::new(s, seed as u64, n)
        };
        let field = project(&generate(&spec).map_err(js_err)?, &params.cutoff());
        Ok(Simulation {
            stepper: Stepper::new(&params).map_err(js_err)?,
            initial_mass: l2_norm(&field),
            field,
            step: 0,
        })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsValue> {
        self.field = self
            .stepper
            .advance(&self.field, self.step, steps, 0, |_, _| Ok(()))
            .map_err(js_err)?;
        self.step += steps;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.field.n_modes()
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.stepper.params().tau
    }

    pub fn theta(&self) -> f64 {
        self.stepper.params().theta
    }

    /// Relative mass change since the start.
    pub fn mass_drift(&self) -> f64 {
        l2_norm(&self.field) / self.initial_mass - 1.0
    }

    /// `|u|²` on the `N × N` grid as RGBA rows.
    pub fn intensity_rgba(&self) -> Vec<u8> {
        let g = synthesize(&self.field, self.field.n_modes()).expect("N is valid");
        to_rgba(&g.values().iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())
    }

    /// `log₁₀ |û_k|` on the mode square as RGBA rows.
    pub fn spectrum_rgba(&self) -> Vec<u8> {
        let floor = 1e-18;
        to_rgba(
            &self
                .field
                .coeffs()
                .iter()
                .map(|z| z.norm().max(floor).log10())
                .collect::<Vec<_>>(),
        )
    }
}

/// Convergence study for one datum, computed in memory.
///
/// Returns `[log₂θ₀, log₂err₀, log₂θ₁, log₂err₁, …, slope]` for step sizes
/// `2^tau_log2_hi` down to `2^tau_log2_lo` against a reference at
/// `k_modes` modes and step `2^{tau_log2_lo - 4}`, all at `T = 0.25`.
pub fn convergence_points(
    s: f64,
    seed: u64,
    k_modes: usize,
    tau_log2_lo: i32,
    tau_log2_hi: i32,
) -> nls2d::Result<Vec<f64>> {
    let t_final = 0.25;
    let mu = Mu::Defocusing;
    let spec = RoughDataSpec::new(s, seed, k_modes);
    let reference = compute_reference(&spec, 2f64.powi(tau_log2_lo - 4), t_final, mu, None)?;
    let datum = generate(&spec)?;
    let mut pts = Vec::new();
    for e in (tau_log2_lo..=tau_log2_hi).rev() {
        let tau = 2f64.powi(e);
        let n = grid_for_tau(tau).min(k_modes);
        let params = SchemeParams::new(tau, n, mu, t_final)?;
        let u0 = project(&datum, &params.cutoff()).resized(n)?;
        let err = l2_error(&evolve(&u0, &params)?, &reference.field)?;
        pts.push((params.theta.log2(), err.log2()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let mut out: Vec<f64> = pts.iter().flat_map(|&(x, y)| [x, y]).collect();
    out.push(if sxx > 0.0 { sxy / sxx } else { f64::NAN });
    Ok(out)
}

#[wasm_bindgen]
pub fn convergence_curve(
    s: f64,
    seed: u32,
    k_modes: usize,
    tau_log2_lo: i32,
    tau_log2_hi: i32,
) -> Result<Vec<f64>, JsValue> {
    convergence_points(s, seed as u64, k_modes, tau_log2_lo, tau_log2_hi).map_err(js_err)
}

/// `‖u_n‖_{X^{s_x,b}_τ}` of one scheme trajectory over `[0, 0.25]` for each
/// `b` in `b_values`, with a window twice the trajectory length.
pub fn bourgain_values(s_data: f64, seed: u64, tau_log2: i32, s_x: f64, b_values: &[f64]) -> nls2d::Result<Vec<f64>> {
    let tau = 2f64.powi(tau_log2);
    let n = grid_for_tau(tau);
    let params = SchemeParams::new(tau, n, Mu::Defocusing, 0.25)?;
    let datum = generate(&RoughDataSpec::new(s_data, seed, n))?;
    let mut fields = Vec::new();
    evolve_observed(&datum, &params, 1, |_, u| {
        fields.push(u.clone());
        Ok(())
    })?;
    let window = 2 * fields.len();
    let tr = Trajectory::new(tau, fields)?;
    b_values
        .iter()
        .map(|&b| bourgain_norm(&tr, &BourgainParams::new(s_x, b).with_window(window)))
        .collect()
}

#[wasm_bindgen]
pub fn bourgain_profile(
    s_data: f64,
    seed: u32,
    tau_log2: i32,
    s_x: f64,
    b_values: Vec<f64>,
) -> Result<Vec<f64>, JsValue> {
    bourgain_values(s_data, seed as u64, tau_log2, s_x, &b_values).map_err(js_err)
}
