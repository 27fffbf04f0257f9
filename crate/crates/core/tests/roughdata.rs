use nls2d::roughdata::{generate, raw_coefficients, RngStream, RoughDataSpec};
use nls2d::spectral::{bracket_sq, l2_norm};
use proptest::prelude::*;

#[test]
fn seed_zero_stream_matches_golden_file() {
    let golden = include_str!("golden/rng_seed0.txt");
    let mut rng = RngStream::new(0);
    let mut checked = 0;
    for line in golden.lines().filter(|l| !l.starts_with('#')) {
        let (hex, value) = line.split_once(' ').unwrap();
        let z = rng.clone().next_u64();
        assert_eq!(z, u64::from_str_radix(hex, 16).unwrap());
        assert_eq!(rng.next_symmetric(), value.parse::<f64>().unwrap());
        checked += 1;
    }
    assert_eq!(checked, 16);
}

#[test]
fn uniform_moments() {
    let draws: Vec<f64> = RngStream::new(2024).take(1_000_000).collect();
    let m = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
    assert!(mean.abs() < 0.005, "mean {mean}");
    assert!((var - 1.0 / 3.0).abs() < 0.01, "variance {var}");
    assert!(draws.iter().all(|x| (-1.0..1.0).contains(x)));
}

#[test]
fn coefficient_tail_decays_at_the_requested_rate() {
    for s in [0.5, 1.0, 2.0] {
        let spec = RoughDataSpec::new(s, 17, 128);
        let field = generate(&spec).unwrap();
        let points: Vec<(f64, f64)> = field
            .modes()
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|((k1, k2), z)| (0.5 * bracket_sq(k1, k2).ln(), z.norm_sqr().ln()))
            .collect();
        let m = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
        let my = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let expected = -2.0 * spec.decay();
        assert!(
            (slope - expected).abs() < 0.3,
            "s = {s}: slope {slope}, expected {expected}"
        );
    }
}

#[test]
fn zero_amplitude_target_is_rejected() {
    let spec = RoughDataSpec {
        target_l2: 0.0,
        ..RoughDataSpec::new(1.0, 1, 16)
    };
    assert!(generate(&spec).is_err());
}

proptest! {
    #[test]
    fn generated_datum_has_target_mass(s in 0.1f64..3.0, seed in any::<u64>(), half in 2usize..24, mass in 0.01f64..5.0) {
        let spec = RoughDataSpec { target_l2: mass, ..RoughDataSpec::new(s, seed, 2 * half) };
        let u = generate(&spec).unwrap();
        prop_assert!((l2_norm(&u) - mass).abs() <= 1e-12 * mass);
    }

    #[test]
    fn datum_is_a_rescaling_of_the_raw_draw(seed in any::<u64>()) {
        let spec = RoughDataSpec::new(1.5, seed, 16);
        let raw = raw_coefficients(&spec, seed).unwrap();
        let u = generate(&spec).unwrap();
        let factor = spec.target_l2 / l2_norm(&raw);
        for (a, b) in raw.coeffs().iter().zip(u.coeffs()) {
            prop_assert!((a * factor - b).norm() <= 1e-15 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn same_seed_same_datum(seed in any::<u64>(), s in 0.1f64..3.0) {
        let spec = RoughDataSpec::new(s, seed, 12);
        prop_assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }
}
