//! Band-limited functions on the torus `T² = [0, 2π)²`.
//!
//! A [`SpectralField`] with `N` modes per axis represents
//!
//! ```text
//! u(x) = Σ_k û_k e^{i⟨k,x⟩},   k ∈ [-N/2, N/2-1]²
//! ```
//!
//! so its coefficients are exactly the coefficients of the trigonometric
//! interpolant `T_N`, i.e. the raw DFT divided by `N²`. They coincide with the
//! analyst's `û_k = (4π²)^{-1} ∫ u e^{-i⟨k,x⟩} dx`. Norms are taken with
//! respect to Lebesgue measure on `T²`, which gives
//!
//! ```text
//! ‖u‖²_{L²} = 4π² Σ_k |û_k|²,      ‖u‖²_{H^s} = 4π² Σ_k ⟨k⟩^{2s} |û_k|²
//! ```
//!
//! with `⟨k⟩ = (1 + |k|²)^{1/2}`. Grid values use the discrete norm
//! `‖v‖²_{l²_h} = h² Σ |v_jl|²` with `h = 1/N`.
//!
//! Both fields store data row-major in natural order: entry `(a, b)` sits at
//! `(a + N/2) * N + (b + N/2)`, where `a` is the first-axis mode (or grid
//! index) and `b` the second.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{natural_to_wrapped, wrapped_to_natural, Fft2};

pub(crate) const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_size(n: usize, what: &str) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::param(format!("{what} must be an even integer >= 2, got {n}")));
    }
    Ok(())
}

fn check_finite(values: &[Complex64], what: &str) -> Result<()> {
    if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::input(format!("{what} has a non-finite entry at index {i}")));
    }
    Ok(())
}

/// Inclusive range of signed modes (or grid indices) for `n` points per axis.
pub fn mode_range(n: usize) -> std::ops::RangeInclusive<i64> {
    let half = (n / 2) as i64;
    -half..=half - 1
}

/// `⟨k⟩² = 1 + k₁² + k₂²`.
#[inline]
pub fn bracket_sq(k1: i64, k2: i64) -> f64 {
    1.0 + (k1 * k1 + k2 * k2) as f64
}

/// Fourier coefficients of a trigonometric polynomial on the `N`-mode square.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n, "number of modes")?;
        Ok(Self {
            n,
            coeffs: vec![ZERO; n * n],
        })
    }

    /// Wraps natural-order coefficients; rejects wrong lengths and non-finite values.
    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        check_size(n, "number of modes")?;
        if coeffs.len() != n * n {
            return Err(Error::input(format!(
                "expected {} coefficients for N = {n}, got {}",
                n * n,
                coeffs.len()
            )));
        }
        check_finite(&coeffs, "spectral field")?;
        Ok(Self { n, coeffs })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(i64, i64) -> Complex64) -> Result<Self> {
        let mut out = Self::zeros(n)?;
        for k1 in mode_range(n) {
            for k2 in mode_range(n) {
                let i = out.index(k1, k2);
                out.coeffs[i] = f(k1, k2);
            }
        }
        check_finite(&out.coeffs, "spectral field")?;
        Ok(out)
    }

    /// A single Fourier mode `amplitude · e^{i⟨k,x⟩}`.
    pub fn single_mode(n: usize, k: (i64, i64), amplitude: Complex64) -> Result<Self> {
        let mut out = Self::zeros(n)?;
        if !out.contains(k.0, k.1) {
            return Err(Error::param(format!("mode {k:?} outside the {n}-mode square")));
        }
        out.set(k.0, k.1, amplitude);
        Ok(out)
    }

    pub(crate) fn from_raw(n: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), n * n);
        Self { n, coeffs }
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn contains(&self, k1: i64, k2: i64) -> bool {
        let r = mode_range(self.n);
        r.contains(&k1) && r.contains(&k2)
    }

    #[inline]
    pub fn index(&self, k1: i64, k2: i64) -> usize {
        let half = (self.n / 2) as i64;
        ((k1 + half) as usize) * self.n + (k2 + half) as usize
    }

    /// Coefficient at mode `k`; zero outside the stored square.
    pub fn get(&self, k1: i64, k2: i64) -> Complex64 {
        if self.contains(k1, k2) {
            self.coeffs[self.index(k1, k2)]
        } else {
            ZERO
        }
    }

    /// Panics if `k` lies outside the stored square.
    pub fn set(&mut self, k1: i64, k2: i64, value: Complex64) {
        assert!(self.contains(k1, k2), "mode ({k1}, {k2}) out of range");
        let i = self.index(k1, k2);
        self.coeffs[i] = value;
    }

    /// Iterates `((k1, k2), û_k)` in storage order.
    pub fn modes(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        let n = self.n;
        let half = (n / 2) as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (((i / n) as i64 - half, (i % n) as i64 - half), c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::from_raw(self.n, self.coeffs.iter().map(|&c| c * factor).collect())
    }

    /// Same function on an `m`-mode square: zero-padding when `m ≥ N`,
    /// truncation of the modes outside `[-m/2, m/2-1]²` when `m < N`.
    pub fn resized(&self, m: usize) -> Result<Self> {
        let mut out = Self::zeros(m)?;
        for k1 in mode_range(m) {
            for k2 in mode_range(m) {
                let i = out.index(k1, k2);
                out.coeffs[i] = self.get(k1, k2);
            }
        }
        Ok(out)
    }

    /// `self - other` after embedding both into the larger mode square.
    pub fn difference(&self, other: &Self) -> Self {
        let m = self.n.max(other.n);
        let mut out = Self::from_raw(m, vec![ZERO; m * m]);
        for k1 in mode_range(m) {
            for k2 in mode_range(m) {
                let i = out.index(k1, k2);
                out.coeffs[i] = self.get(k1, k2) - other.get(k1, k2);
            }
        }
        out
    }
}

/// Samples at the collocation points `x_jl = (2πj/N, 2πl/N)`, `j, l ∈ [-N/2, N/2-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    n: usize,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n, "number of grid points")?;
        Ok(Self {
            n,
            values: vec![ZERO; n * n],
        })
    }

    pub fn from_values(n: usize, values: Vec<Complex64>) -> Result<Self> {
        check_size(n, "number of grid points")?;
        if values.len() != n * n {
            return Err(Error::input(format!(
                "expected {} grid values for N = {n}, got {}",
                n * n,
                values.len()
            )));
        }
        check_finite(&values, "grid field")?;
        Ok(Self { n, values })
    }

    /// Samples `f(x₁, x₂)` at every collocation point.
    pub fn sample(n: usize, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        check_size(n, "number of grid points")?;
        let h = 2.0 * PI / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for j in mode_range(n) {
            for l in mode_range(n) {
                values.push(f(h * j as f64, h * l as f64));
            }
        }
        Self::from_values(n, values)
    }

    pub(crate) fn from_raw(n: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), n * n);
        Self { n, values }
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Grid parameter `h = 1/N` of the discrete norm.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at grid index `(j, l)`, i.e. at `x = (2πj/N, 2πl/N)`.
    pub fn get(&self, j: i64, l: i64) -> Complex64 {
        let half = (self.n / 2) as i64;
        self.values[((j + half) as usize) * self.n + (l + half) as usize]
    }

    /// `‖v‖_{l²_h} = (h² Σ |v_jl|²)^{1/2}`.
    pub fn l2h_norm(&self) -> f64 {
        let h = self.h();
        (h * h * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// The square frequency filter `Π_θ`, keeping `-K ≤ k_i < K` with `K = θ^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    theta: f64,
    cutoff: f64,
}

impl CutoffSpec {
    /// Cutoffs within `1e-9` (relative) of an integer snap to it, so that
    /// `θ = 4/N²` yields exactly `K = N/2` for every even `N`.
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::param(format!("theta must be positive and finite, got {theta}")));
        }
        let raw = 1.0 / theta.sqrt();
        let nearest = raw.round();
        let cutoff = if (raw - nearest).abs() <= 1e-9 * raw {
            nearest
        } else {
            raw
        };
        Ok(Self { theta, cutoff })
    }

    /// `θ = 4N^{-2}`, the weakest filter that still keeps every mode of an `N`-mode field.
    pub fn for_grid(n: usize) -> Result<Self> {
        check_size(n, "number of modes")?;
        Self::new(4.0 / (n * n) as f64)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Half-open membership `-K ≤ k < K`, mirroring χ of `[-1, 1)`.
    #[inline]
    pub fn keeps(&self, k: i64) -> bool {
        let k = k as f64;
        -self.cutoff <= k && k < self.cutoff
    }

    #[inline]
    pub fn keeps_mode(&self, k1: i64, k2: i64) -> bool {
        self.keeps(k1) && self.keeps(k2)
    }

    /// True when the filter keeps every mode of an `n`-mode field.
    pub fn is_identity_on(&self, n: usize) -> bool {
        let half = (n / 2) as i64;
        self.keeps(-half) && self.keeps(half - 1)
    }
}

/// Raw two-dimensional DFT `F_N(u)(k)` in natural mode order, no scaling.
pub fn dft_raw(g: &GridField) -> Vec<Complex64> {
    let n = g.n;
    let mut buf = vec![ZERO; n * n];
    natural_to_wrapped(&g.values, n, &mut buf);
    Fft2::new(n).forward(&mut buf);
    let mut out = vec![ZERO; n * n];
    wrapped_to_natural(&buf, n, &mut out);
    out
}

/// `F_N(u) / N²`: the coefficients of the trigonometric interpolant of `g`.
pub fn dft_forward(g: &GridField) -> SpectralField {
    let n = g.n;
    let scale = 1.0 / (n * n) as f64;
    let coeffs = dft_raw(g).into_iter().map(|z| z * scale).collect();
    SpectralField::from_raw(n, coeffs)
}

/// Trigonometric interpolation `T_N`; same map as [`dft_forward`].
pub fn interpolate_t_n(g: &GridField) -> SpectralField {
    dft_forward(g)
}

/// Evaluates the band-limited function on an `m × m` grid, `m ≥ N`.
pub fn synthesize(f: &SpectralField, m: usize) -> Result<GridField> {
    check_size(m, "synthesis grid size")?;
    if m < f.n {
        return Err(Error::param(format!(
            "synthesis grid {m} is coarser than the {} modes of the field",
            f.n
        )));
    }
    let padded;
    let src = if m == f.n {
        f
    } else {
        padded = f.resized(m)?;
        &padded
    };
    let mut buf = vec![ZERO; m * m];
    natural_to_wrapped(&src.coeffs, m, &mut buf);
    Fft2::new(m).inverse(&mut buf);
    let mut out = vec![ZERO; m * m];
    wrapped_to_natural(&buf, m, &mut out);
    Ok(GridField::from_raw(m, out))
}

/// `Π_θ f`: zeroes every mode outside the half-open cutoff square.
pub fn project(f: &SpectralField, c: &CutoffSpec) -> SpectralField {
    let mut out = f.clone();
    for k1 in mode_range(f.n) {
        for k2 in mode_range(f.n) {
            if !c.keeps_mode(k1, k2) {
                let i = out.index(k1, k2);
                out.coeffs[i] = ZERO;
            }
        }
    }
    out
}

/// `‖u‖_{L²(T²)} = (4π² Σ |û_k|²)^{1/2}`.
pub fn l2_norm(f: &SpectralField) -> f64 {
    (FOUR_PI_SQ * f.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// `‖u‖_{H^s(T²)} = (4π² Σ ⟨k⟩^{2s} |û_k|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let sum: f64 = f
        .modes()
        .map(|((k1, k2), z)| bracket_sq(k1, k2).powf(s) * z.norm_sqr())
        .sum();
    (FOUR_PI_SQ * sum).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_odd_and_tiny_sizes() {
        assert!(matches!(SpectralField::zeros(3), Err(Error::InvalidParameter(_))));
        assert!(matches!(GridField::zeros(0), Err(Error::InvalidParameter(_))));
        assert!(GridField::zeros(2).is_ok());
    }

    #[test]
    fn rejects_non_finite_coefficients() {
        let mut v = vec![c(0.0, 0.0); 16];
        v[5] = c(f64::NAN, 0.0);
        assert!(SpectralField::from_coeffs(4, v).is_err());
    }

    #[test]
    fn constant_grid_has_only_the_zero_mode() {
        let g = GridField::sample(4, |_, _| c(1.0, 0.0)).unwrap();
        let raw = dft_raw(&g);
        let f = dft_forward(&g);
        assert!((raw[f.index(0, 0)] - c(16.0, 0.0)).norm() < 1e-14);
        for ((k1, k2), z) in f.modes() {
            let want = if (k1, k2) == (0, 0) { 1.0 } else { 0.0 };
            assert!((z - c(want, 0.0)).norm() < 1e-15, "mode ({k1},{k2})");
        }
    }

    #[test]
    fn first_harmonic_lands_on_mode_one_zero() {
        let g = GridField::sample(4, |x1, _| Complex64::from_polar(1.0, x1)).unwrap();
        let f = dft_forward(&g);
        for ((k1, k2), z) in f.modes() {
            let want = if (k1, k2) == (1, 0) { 1.0 } else { 0.0 };
            assert!((z - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn nyquist_mode_aliases_to_negative_half() {
        let n = 8;
        let g = GridField::sample(n, |x1, _| Complex64::from_polar(1.0, (n / 2) as f64 * x1)).unwrap();
        let f = interpolate_t_n(&g);
        assert!((f.get(-4, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(f.get(4, 0).norm() == 0.0);
        let rest: f64 = f.modes().filter(|(k, _)| *k != (-4, 0)).map(|(_, z)| z.norm()).sum();
        assert!(rest < 1e-13);
    }

    #[test]
    fn zero_grid_interpolates_to_zero() {
        let f = interpolate_t_n(&GridField::zeros(6).unwrap());
        assert!(f.coeffs().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn synthesize_constant_and_finer_grid() {
        let f = SpectralField::single_mode(4, (0, 0), c(1.0, 0.0)).unwrap();
        let g = synthesize(&f, 4).unwrap();
        assert!(g.values().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));

        let f = SpectralField::single_mode(4, (1, 0), c(1.0, 0.0)).unwrap();
        let g = synthesize(&f, 8).unwrap();
        for j in mode_range(8) {
            for l in mode_range(8) {
                let x1 = 2.0 * PI * j as f64 / 8.0;
                assert!((g.get(j, l) - Complex64::from_polar(1.0, x1)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn synthesize_refuses_aliasing_grids() {
        let f = SpectralField::zeros(8).unwrap();
        assert!(matches!(synthesize(&f, 4), Err(Error::InvalidParameter(_))));
        assert!(matches!(synthesize(&f, 9), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn cutoff_is_half_open() {
        let cut = CutoffSpec::new(0.25).unwrap();
        assert_eq!(cut.cutoff(), 2.0);
        let f = SpectralField::from_fn(8, |_, _| c(1.0, 0.0)).unwrap();
        let p = project(&f, &cut);
        assert_eq!(p.get(3, 0), c(0.0, 0.0));
        assert_eq!(p.get(-2, 1), c(1.0, 0.0));
        assert_eq!(p.get(2, 1), c(0.0, 0.0));
    }

    #[test]
    fn grid_cutoff_is_exactly_half_the_modes() {
        for n in [2usize, 4, 6, 32, 46, 90, 128, 256] {
            let cut = CutoffSpec::for_grid(n).unwrap();
            assert_eq!(cut.cutoff(), (n / 2) as f64, "n = {n}");
            assert!(cut.is_identity_on(n));
            assert!((cut.cutoff() - cut.theta().powf(-0.5)).abs() < 1e-9 * cut.cutoff());
        }
        assert!(CutoffSpec::new(0.0).is_err());
        assert!(CutoffSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn norms_of_single_modes() {
        let a = c(0.3, -0.4);
        let f = SpectralField::single_mode(8, (2, -1), a).unwrap();
        assert!((l2_norm(&f) - 2.0 * PI * a.norm()).abs() < 1e-15);
        assert_eq!(l2_norm(&SpectralField::zeros(4).unwrap()), 0.0);

        let f = SpectralField::single_mode(4, (1, 0), c(1.0, 0.0)).unwrap();
        for s in [0.0, 0.5, 1.0, 2.5] {
            let want = 2.0 * PI * 2f64.powf(s / 2.0);
            assert!((sobolev_norm(&f, s) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn resize_pads_and_truncates() {
        let f = SpectralField::from_fn(4, |k1, k2| c(k1 as f64, k2 as f64)).unwrap();
        let big = f.resized(8).unwrap();
        assert_eq!(big.get(-2, 1), c(-2.0, 1.0));
        assert_eq!(big.get(3, 0), c(0.0, 0.0));
        assert_eq!(big.resized(4).unwrap(), f);
        assert_eq!(l2_norm(&big), l2_norm(&f));
    }
}
