//! Fully discrete filtered Lie splitting for `i u_t = -Δu - μ|u|²u` on `T²`.
//!
//! One step maps `u_n` to
//!
//! ```text
//! u_{n+1} = e^{iτΔ} Π_θ T_N( e^{iμτ|Π_θ u_n|²} Π_θ u_n )
//! ```
//!
//! with the nonlinear phase applied to grid values on the `N × N`
//! collocation grid. Aliasing produced by the pointwise product is folded by
//! `T_N` and then truncated by `Π_θ`; there is no dealiasing.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{natural_to_wrapped, wrapped_mode, wrapped_to_natural, Fft2};
use crate::spectral::{mode_range, project, CutoffSpec, GridField, SpectralField};

/// Sign of the cubic term: `+1` focusing, `-1` defocusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Mu {
    Focusing,
    Defocusing,
}

impl Mu {
    pub fn sign(self) -> f64 {
        match self {
            Mu::Focusing => 1.0,
            Mu::Defocusing => -1.0,
        }
    }
}

impl TryFrom<i32> for Mu {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            1 => Ok(Mu::Focusing),
            -1 => Ok(Mu::Defocusing),
            _ => Err(Error::param(format!("mu must be +1 or -1, got {v}"))),
        }
    }
}

impl From<Mu> for i32 {
    fn from(m: Mu) -> i32 {
        m.sign() as i32
    }
}

impl fmt::Display for Mu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i32::from(*self))
    }
}

/// Step size, resolution, filter and final time of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub tau: f64,
    pub n_modes: usize,
    pub mu: Mu,
    pub theta: f64,
    pub t_final: f64,
}

impl SchemeParams {
    /// Uses the coupling `θ = max(τ, 4N^{-2})`.
    pub fn new(tau: f64, n_modes: usize, mu: Mu, t_final: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::param(format!("tau must be positive, got {tau}")));
        }
        if n_modes < 2 || !n_modes.is_multiple_of(2) {
            return Err(Error::param(format!("N must be even and >= 2, got {n_modes}")));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::param(format!("T must be non-negative, got {t_final}")));
        }
        Ok(Self {
            tau,
            n_modes,
            mu,
            theta: coupled_theta(tau, n_modes),
            t_final,
        })
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        CutoffSpec::new(theta)?;
        self.theta = theta;
        Ok(self)
    }

    pub fn cutoff(&self) -> CutoffSpec {
        CutoffSpec::new(self.theta).expect("theta validated on construction")
    }

    /// `round(T/τ)`; `T` must be a multiple of `τ` to within one ulp.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_final / self.tau).round();
        if (n * self.tau - self.t_final).abs() > f64::EPSILON * self.t_final.max(self.tau) {
            return Err(Error::param(format!(
                "T = {} is not an integer multiple of tau = {}",
                self.t_final, self.tau
            )));
        }
        Ok(n as usize)
    }
}

/// `θ = max(τ, 4N^{-2})`.
pub fn coupled_theta(tau: f64, n: usize) -> f64 {
    tau.max(4.0 / (n * n) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub step_index: usize,
    pub field: SpectralField,
    pub params: SchemeParams,
}

impl SolverState {
    pub fn new(field: SpectralField, params: SchemeParams) -> Result<Self> {
        if field.n_modes() != params.n_modes {
            return Err(Error::param(format!(
                "field has {} modes, scheme expects {}",
                field.n_modes(),
                params.n_modes
            )));
        }
        Ok(Self {
            step_index: 0,
            field,
            params,
        })
    }
}

/// Exact linear flow: `û_k ↦ e^{-it|k|²} û_k`.
pub fn free_flow(f: &SpectralField, t: f64) -> SpectralField {
    let mut out = f.clone();
    let n = f.n_modes();
    for k1 in mode_range(n) {
        for k2 in mode_range(n) {
            let i = out.index(k1, k2);
            let phase = Complex64::from_polar(1.0, -t * (k1 * k1 + k2 * k2) as f64);
            out.coeffs_mut()[i] *= phase;
        }
    }
    out
}

/// Pointwise `v ↦ e^{iμτ|v|²} v`.
pub fn nonlinear_phase(g: &GridField, tau: f64, mu: Mu) -> GridField {
    let a = mu.sign() * tau;
    let values = g.values().iter().map(|&v| phase_rotate(v, a)).collect();
    GridField::from_raw(g.n_points(), values)
}

#[inline]
fn phase_rotate(v: Complex64, a: f64) -> Complex64 {
    v * Complex64::from_polar(1.0, a * v.norm_sqr())
}

/// Time stepper holding FFT plans and the per-mode multipliers for one
/// [`SchemeParams`]. Works in the wrapped FFT layout between calls to
/// [`Stepper::advance`].
pub struct Stepper {
    params: SchemeParams,
    fft: Fft2,
    /// `χ_θ(k)` in wrapped layout.
    mask: Vec<f64>,
    /// `χ_θ(k) e^{-iτ|k|²} / N²` in wrapped layout.
    post: Vec<Complex64>,
    buf: Vec<Complex64>,
}

impl Stepper {
    pub fn new(params: &SchemeParams) -> Result<Self> {
        let n = params.n_modes;
        let cut = CutoffSpec::new(params.theta)?;
        let scale = 1.0 / (n * n) as f64;
        let mut mask = vec![0.0; n * n];
        let mut post = vec![Complex64::new(0.0, 0.0); n * n];
        for w1 in 0..n {
            let k1 = wrapped_mode(w1, n);
            for w2 in 0..n {
                let k2 = wrapped_mode(w2, n);
                if cut.keeps_mode(k1, k2) {
                    let i = w1 * n + w2;
                    mask[i] = 1.0;
                    post[i] = Complex64::from_polar(scale, -params.tau * (k1 * k1 + k2 * k2) as f64);
                }
            }
        }
        Ok(Self {
            params: *params,
            fft: Fft2::new(n),
            mask,
            post,
            buf: vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn step_in_place(&mut self) {
        let a = self.params.mu.sign() * self.params.tau;
        for (z, m) in self.buf.iter_mut().zip(&self.mask) {
            *z *= *m;
        }
        self.fft.inverse(&mut self.buf);
        for z in self.buf.iter_mut() {
            *z = phase_rotate(*z, a);
        }
        self.fft.forward(&mut self.buf);
        for (z, p) in self.buf.iter_mut().zip(&self.post) {
            *z *= *p;
        }
    }

    fn buf_is_finite(&self) -> bool {
        self.buf.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn load(&mut self, field: &SpectralField) -> Result<()> {
        let n = self.params.n_modes;
        if field.n_modes() != n {
            return Err(Error::param(format!(
                "field has {} modes, stepper expects {n}",
                field.n_modes()
            )));
        }
        natural_to_wrapped(field.coeffs(), n, &mut self.buf);
        Ok(())
    }

    fn unload(&self) -> SpectralField {
        let n = self.params.n_modes;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        wrapped_to_natural(&self.buf, n, &mut out);
        SpectralField::from_raw(n, out)
    }

    /// Applies `steps` Lie steps to `field`, whose step index is
    /// `start_index`. `observe(n, u_n)` fires for every `n` that is a
    /// multiple of `every` (`every = 0` disables it).
    pub fn advance<F>(
        &mut self,
        field: &SpectralField,
        start_index: usize,
        steps: usize,
        every: usize,
        mut observe: F,
    ) -> Result<SpectralField>
    where
        F: FnMut(usize, &SpectralField) -> Result<()>,
    {
        self.load(field)?;
        if every > 0 && start_index.is_multiple_of(every) {
            observe(start_index, field)?;
        }
        for i in 1..=steps {
            self.step_in_place();
            let n = start_index + i;
            if !self.buf_is_finite() {
                return Err(Error::NumericalBlowup { step: n });
            }
            if every > 0 && n.is_multiple_of(every) {
                observe(n, &self.unload())?;
            }
        }
        Ok(self.unload())
    }
}

/// One step of the scheme; the result is `Π_θ`-invariant.
pub fn lie_step(state: &SolverState) -> Result<SolverState> {
    let mut stepper = Stepper::new(&state.params)?;
    let field = stepper.advance(&state.field, state.step_index, 1, 0, |_, _| Ok(()))?;
    Ok(SolverState {
        step_index: state.step_index + 1,
        field,
        params: state.params,
    })
}

/// Evolves `Π_θ u0` to `t = T` in `round(T/τ)` steps.
pub fn evolve(u0: &SpectralField, params: &SchemeParams) -> Result<SpectralField> {
    evolve_observed(u0, params, 0, |_, _| Ok(()))
}

/// [`evolve`] with an observer receiving `(n, u_n)` every `every` steps,
/// starting with `n = 0`.
pub fn evolve_observed<F>(u0: &SpectralField, params: &SchemeParams, every: usize, observe: F) -> Result<SpectralField>
where
    F: FnMut(usize, &SpectralField) -> Result<()>,
{
    let steps = params.steps()?;
    let start = project(u0, &params.cutoff());
    Stepper::new(params)?.advance(&start, 0, steps, every, observe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dft_forward, l2_norm, synthesize};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The step written as a literal composition of the public operators.
    fn composed_step(u: &SpectralField, p: &SchemeParams) -> SpectralField {
        let cut = p.cutoff();
        let grid = synthesize(&project(u, &cut), p.n_modes).unwrap();
        let phased = nonlinear_phase(&grid, p.tau, p.mu);
        free_flow(&project(&dft_forward(&phased), &cut), p.tau)
    }

    fn rough(n: usize) -> SpectralField {
        SpectralField::from_fn(n, |k1, k2| {
            let w = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            c((k1 as f64 * 1.3 + k2 as f64).sin() * w, (k2 as f64 * 0.7).cos() * w)
        })
        .unwrap()
    }

    #[test]
    fn mu_parses_only_unit_signs() {
        assert_eq!(Mu::try_from(-1).unwrap(), Mu::Defocusing);
        assert_eq!(Mu::try_from(1).unwrap(), Mu::Focusing);
        assert!(Mu::try_from(0).is_err());
    }

    #[test]
    fn theta_coupling() {
        let p = SchemeParams::new(2f64.powi(-8), 32, Mu::Defocusing, 0.25).unwrap();
        assert_eq!(p.theta, 2f64.powi(-8));
        let p = SchemeParams::new(2f64.powi(-11), 90, Mu::Defocusing, 0.25).unwrap();
        assert_eq!(p.theta, 4.0 / 8100.0);
        assert!(p.theta >= p.tau);
    }

    #[test]
    fn step_count_requires_integral_ratio() {
        let p = SchemeParams::new(2f64.powi(-10), 8, Mu::Defocusing, 0.25).unwrap();
        assert_eq!(p.steps().unwrap(), 256);
        let p = SchemeParams::new(0.1, 8, Mu::Defocusing, 0.25).unwrap();
        assert!(matches!(p.steps(), Err(Error::InvalidParameter(_))));
        let p = SchemeParams::new(0.1, 8, Mu::Defocusing, 0.0).unwrap();
        assert_eq!(p.steps().unwrap(), 0);
    }

    #[test]
    fn free_flow_examples() {
        let f = rough(8);
        assert_eq!(free_flow(&f, 0.0), f);
        let tau = 0.037;
        let g = free_flow(&SpectralField::single_mode(8, (1, 2), c(1.0, 0.0)).unwrap(), tau);
        assert!((g.get(1, 2) - Complex64::from_polar(1.0, -5.0 * tau)).norm() < 1e-15);
        let back = free_flow(&free_flow(&f, 0.3), -0.3);
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn free_flow_commutes_with_projection() {
        let f = rough(16);
        let cut = CutoffSpec::new(1.0 / 25.0).unwrap();
        assert_eq!(project(&free_flow(&f, 0.2), &cut), free_flow(&project(&f, &cut), 0.2));
    }

    #[test]
    fn nonlinear_phase_examples() {
        assert!(nonlinear_phase(&GridField::zeros(4).unwrap(), 0.1, Mu::Defocusing)
            .values()
            .iter()
            .all(|z| *z == c(0.0, 0.0)));
        let a = c(0.3, 0.4);
        let g = GridField::sample(4, |_, _| a).unwrap();
        let out = nonlinear_phase(&g, 0.5, Mu::Defocusing);
        let want = a * Complex64::from_polar(1.0, -0.5 * a.norm_sqr());
        assert!(out.values().iter().all(|z| (z - want).norm() < 1e-16));

        let g = synthesize(&rough(8), 8).unwrap();
        let out = nonlinear_phase(&g, 3.0, Mu::Focusing);
        assert!((out.l2h_norm() - g.l2h_norm()).abs() <= 1e-15 * g.l2h_norm());
    }

    #[test]
    fn stepper_matches_composition_of_operators() {
        for (tau, n, theta) in [(0.01, 16, None), (0.05, 8, Some(0.1)), (2f64.powi(-6), 12, None)] {
            let mut p = SchemeParams::new(tau, n, Mu::Defocusing, 1.0).unwrap();
            if let Some(t) = theta {
                p = p.with_theta(t).unwrap();
            }
            let u = project(&rough(n).scaled(c(3.0, 0.0)), &p.cutoff());
            let state = SolverState::new(u.clone(), p).unwrap();
            let next = lie_step(&state).unwrap();
            let want = composed_step(&u, &p);
            assert_eq!(next.step_index, 1);
            for (a, b) in next.field.coeffs().iter().zip(want.coeffs()) {
                assert!((a - b).norm() < 1e-14, "{a} vs {b}");
            }
            assert_eq!(project(&next.field, &p.cutoff()), next.field);
        }
    }

    #[test]
    fn constant_datum_rotates_in_phase() {
        let a = c(0.7, -0.2);
        let n = 8;
        let tau = 2f64.powi(-6);
        let p = SchemeParams::new(tau, n, Mu::Focusing, 1.0).unwrap();
        let u0 = SpectralField::single_mode(n, (0, 0), a).unwrap();
        let out = evolve(&u0, &p).unwrap();
        let want = a * Complex64::from_polar(1.0, 64.0 * tau * a.norm_sqr());
        assert!((out.get(0, 0) - want).norm() < 1e-14);
    }

    #[test]
    fn zero_stays_zero() {
        let p = SchemeParams::new(0.125, 8, Mu::Defocusing, 1.0).unwrap();
        let out = evolve(&SpectralField::zeros(8).unwrap(), &p).unwrap();
        assert!(out.coeffs().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn zero_steps_returns_projected_datum() {
        let p = SchemeParams::new(0.25, 8, Mu::Defocusing, 0.0)
            .unwrap()
            .with_theta(0.25)
            .unwrap();
        let u0 = rough(8);
        assert_eq!(evolve(&u0, &p).unwrap(), project(&u0, &p.cutoff()));
    }

    #[test]
    fn split_runs_are_bit_identical() {
        let p = SchemeParams::new(2f64.powi(-7), 16, Mu::Defocusing, 0.25).unwrap();
        let u0 = project(&rough(16), &p.cutoff());
        let full = evolve(&u0, &p).unwrap();
        let mut st = Stepper::new(&p).unwrap();
        let half = st.advance(&u0, 0, 10, 0, |_, _| Ok(())).unwrap();
        let rest = st.advance(&half, 10, 22, 0, |_, _| Ok(())).unwrap();
        assert_eq!(full, rest);
    }

    #[test]
    fn observer_sees_every_mth_step() {
        let p = SchemeParams::new(0.125, 8, Mu::Defocusing, 1.0).unwrap();
        let mut seen = Vec::new();
        evolve_observed(&rough(8), &p, 3, |n, u| {
            seen.push((n, l2_norm(u)));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 3, 6]);
    }

    #[test]
    fn blowup_is_reported_with_step() {
        // Focusing with a huge amplitude overflows the phase computation.
        let p = SchemeParams::new(0.5, 4, Mu::Focusing, 2.0).unwrap();
        let u0 = SpectralField::single_mode(4, (0, 0), c(1e160, 0.0)).unwrap();
        match evolve(&u0, &p) {
            Err(Error::NumericalBlowup { step }) => assert_eq!(step, 1),
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn plane_wave_short_run() {
        let a = 0.1;
        let n = 16;
        let tau = 2f64.powi(-8);
        let p = SchemeParams::new(tau, n, Mu::Defocusing, 0.25).unwrap();
        let u0 = SpectralField::single_mode(n, (2, -1), c(a, 0.0)).unwrap();
        let out = evolve(&u0, &p).unwrap();
        let t = 0.25;
        let want = Complex64::from_polar(a, (-a * a - 5.0) * t);
        assert!((out.get(2, -1) - want).norm() < 1e-13);
        assert!(l2_norm(&out.difference(&SpectralField::single_mode(n, (2, -1), want).unwrap())) < 1e-12 * 2.0 * PI);
    }
}
