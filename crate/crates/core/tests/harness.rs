use nls2d::harness::{
    compute_reference, fit_order, fit_points, grid_for_tau, l2_error, median_errors_by_theta, parse_tau,
    read_plot_data, read_records, run_reference_sensitivity, run_study, write_plot_data, ReferenceConfig, StudyConfig,
    StudyOptions, TauValue, RESULTS_FILE,
};
use nls2d::roughdata::{generate, RoughDataSpec};
use nls2d::spectral::project;
use nls2d::splitting::evolve;
use nls2d::{Error, Mu, SchemeParams};

fn small_config(dir: &std::path::Path) -> StudyConfig {
    StudyConfig {
        s_values: vec![2.0],
        tau_list: (4..=6).map(|e| TauValue(2f64.powi(-e))).collect(),
        reference: ReferenceConfig {
            k_modes: 32,
            tau_ref: TauValue(2f64.powi(-10)),
        },
        seeds: vec![1, 2, 3],
        record_timing: false,
        output_dir: dir.to_path_buf(),
        ..StudyConfig::default()
    }
}

#[test]
fn grid_sizes_for_the_default_sweep() {
    let grids: Vec<usize> = (8..=12).map(|e| grid_for_tau(2f64.powi(-e))).collect();
    assert_eq!(grids, [32, 46, 64, 90, 128]);
    assert_eq!(parse_tau("2^-12").unwrap(), 2f64.powi(-12));
    assert_eq!(parse_tau("0.125").unwrap(), 0.125);
    assert!(parse_tau("2^x").is_err());
}

#[test]
fn reference_converges_as_its_step_halves() {
    let spec = RoughDataSpec::new(2.0, 5, 16);
    let refs: Vec<_> = (8..=11)
        .map(|e| {
            compute_reference(&spec, 2f64.powi(-e), 0.25, Mu::Defocusing, None)
                .unwrap()
                .field
        })
        .collect();
    let gaps: Vec<f64> = refs.windows(2).map(|w| l2_error(&w[0], &w[1]).unwrap()).collect();
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.5).contains(&ratio), "successive gaps {gaps:?}");
    }
}

#[test]
fn coarse_run_at_reference_resolution_matches_the_reference() {
    let tau = 2f64.powi(-6);
    let k = grid_for_tau(tau);
    let spec = RoughDataSpec::new(1.0, 9, k);
    let reference = compute_reference(&spec, tau, 0.25, Mu::Defocusing, None).unwrap();
    let params = SchemeParams::new(tau, k, Mu::Defocusing, 0.25).unwrap();
    let coarse = evolve(&project(&generate(&spec).unwrap(), &params.cutoff()), &params).unwrap();
    assert!(l2_error(&coarse, &reference.field).unwrap() <= 1e-10);
}

#[test]
fn median_error_falls_with_theta_and_exports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let records = run_study(&cfg, &StudyOptions::default()).unwrap();
    assert_eq!(records.len(), 9);
    assert_eq!(read_records(&dir.path().join(RESULTS_FILE)).unwrap(), records);

    let medians = median_errors_by_theta(&records, 2.0);
    assert_eq!(medians.len(), 3);
    assert!(medians.windows(2).all(|w| w[0].1 < w[1].1), "{medians:?}");

    let fit = fit_order(&records, 2.0).unwrap();
    let plot = dir.path().join("plot_s2.dat");
    write_plot_data(&plot, &fit_points(&records, 2.0).unwrap()).unwrap();
    let pts = read_plot_data(&plot).unwrap();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - fit.slope).abs() <= 1e-12);
}

#[test]
fn rerun_reuses_cache_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = small_config(&dir.path().join("out"));
    let first = run_study(&cfg, &StudyOptions::cached_in(&cache)).unwrap();
    let bytes = std::fs::read(cfg.output_dir.join(RESULTS_FILE)).unwrap();
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 2 * cfg.seeds.len());

    std::fs::remove_file(cfg.output_dir.join(RESULTS_FILE)).unwrap();
    let second = run_study(&cfg, &StudyOptions::cached_in(&cache)).unwrap();
    assert_eq!(first, second);
    assert_eq!(std::fs::read(cfg.output_dir.join(RESULTS_FILE)).unwrap(), bytes);
}

#[test]
fn reference_sensitivity_writes_one_table_per_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.seeds = vec![1];
    cfg.reference.k_modes = 64;
    let runs = run_reference_sensitivity(&cfg, &StudyOptions::default()).unwrap();
    let ks: Vec<usize> = runs.iter().map(|(k, _)| *k).collect();
    assert_eq!(ks, [16, 32, 64]);
    for k in ks {
        assert!(dir.path().join(format!("ref_K{k}")).join(RESULTS_FILE).exists());
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.reference.tau_ref = TauValue(2f64.powi(-6));
    assert!(matches!(
        run_study(&cfg, &StudyOptions::default()),
        Err(Error::InvalidParameter(_))
    ));

    let mut cfg = small_config(dir.path());
    cfg.reference.k_modes = 12;
    assert!(matches!(
        run_study(&cfg, &StudyOptions::default()),
        Err(Error::InvalidParameter(_))
    ));

    let mut cfg = small_config(dir.path());
    cfg.t_final = 0.3;
    assert!(run_study(&cfg, &StudyOptions::default()).is_err());
}

#[test]
fn config_toml_round_trip() {
    let text = r#"
        s_values = [1.0]
        tau_list = ["2^-4", 0.03125]
        t_final = 0.25
        seeds = [7]
        mu = 1
        [reference]
        k_modes = 32
        tau_ref = "2^-10"
    "#;
    let cfg = StudyConfig::from_toml_str(text).unwrap();
    assert_eq!(cfg.taus(), [0.0625, 0.03125]);
    assert_eq!(cfg.mu, Mu::Focusing);
    assert_eq!(StudyConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    assert!(StudyConfig::from_toml_str("unknown_key = 1").is_err());
}
