use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use nls2d::harness::{
    self, compute_reference, fit_order, grid_for_tau, parse_tau, read_records, run_reference_sensitivity, run_study,
    write_plot_data, ConvergenceRecord, StudyConfig, StudyOptions, TauValue, RESULTS_FILE,
};
use nls2d::probe::{probe_sweep, write_probe_csv, EstimateId, ProbeSettings};
use nls2d::roughdata::{generate, RoughDataSpec, DEFAULT_EPS, DEFAULT_TARGET_L2};
use nls2d::spectral::{l2_norm, project};
use nls2d::splitting::{evolve_observed, Mu, SchemeParams};
use nls2d::{snapshot, Error};

/// Filtered Lie splitting for the 2D periodic cubic NLS.
#[derive(Parser)]
#[command(name = "nls2d", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random datum and write it as a snapshot.
    Generate(GenerateArgs),
    /// Evolve one datum with the scheme.
    Run(RunArgs),
    /// Build (or fetch from cache) a reference solution.
    Reference(ReferenceArgs),
    /// Run a convergence study.
    Converge(ConvergeArgs),
    /// Probe discrete Bourgain-norm estimates on random trajectories.
    Diagnose(DiagnoseArgs),
    /// Fit the convergence order from a study CSV.
    Fit(FitArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Sobolev regularity of the random datum.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// L² norm of the datum.
    #[arg(long, default_value_t = DEFAULT_TARGET_L2)]
    l2: f64,
}

impl DataArgs {
    fn spec(&self, n_modes: usize) -> RoughDataSpec {
        RoughDataSpec {
            s: self.s,
            eps: self.eps,
            seed: self.seed,
            n_modes,
            target_l2: self.l2,
        }
    }
}

fn parse_mu(text: &str) -> Result<Mu, String> {
    text.parse::<i32>()
        .map_err(|e| e.to_string())
        .and_then(|v| Mu::try_from(v).map_err(|e| e.to_string()))
}

fn parse_tau_arg(text: &str) -> Result<f64, String> {
    parse_tau(text).map_err(|e| e.to_string())
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Modes per dimension.
    #[arg(long = "grid", default_value_t = 256)]
    n: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Step size, decimal or `2^-k`.
    #[arg(long, value_parser = parse_tau_arg, default_value = "2^-10")]
    tau: f64,
    /// Modes per dimension; defaults to 2τ^{-1/2} rounded to even.
    #[arg(long = "grid")]
    n: Option<usize>,
    #[arg(long = "T", default_value_t = 0.25)]
    t_final: f64,
    #[arg(long, value_parser = parse_mu, default_value = "-1", allow_hyphen_values = true)]
    mu: Mu,
    /// Use this θ instead of max(τ, 4N^{-2}).
    #[arg(long)]
    theta_override: Option<f64>,
    /// Start from a snapshot instead of a random datum.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write a checkpoint every this many steps.
    #[arg(long)]
    every: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ReferenceArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Reference step size.
    #[arg(long, value_parser = parse_tau_arg, default_value = "2^-16")]
    tau: f64,
    /// Reference modes per dimension K.
    #[arg(long = "grid", default_value_t = 256)]
    n: usize,
    #[arg(long = "T", default_value_t = 0.25)]
    t_final: f64,
    #[arg(long, value_parser = parse_mu, default_value = "-1", allow_hyphen_values = true)]
    mu: Mu,
    /// Cache directory.
    #[arg(long, default_value = "cache")]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergeArgs {
    /// TOML study configuration; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    s: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., value_delimiter = ',', value_parser = parse_tau_arg)]
    tau: Option<Vec<f64>>,
    /// Reference modes per dimension K.
    #[arg(long = "grid")]
    k: Option<usize>,
    #[arg(long, value_parser = parse_tau_arg)]
    tau_ref: Option<f64>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long, value_parser = parse_mu, allow_hyphen_values = true)]
    mu: Option<Mu>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write wall_time = 0 so repeated runs give byte-identical CSVs.
    #[arg(long)]
    no_timing: bool,
    /// Do not read or write cached references.
    #[arg(long)]
    no_cache: bool,
    /// Repeat the study against references at K/4, K/2 and K.
    #[arg(long)]
    reference_sensitivity: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// embedding_inf_Hs, strichartz_l4 or all.
    #[arg(long, default_value = "all")]
    estimate: String,
    #[arg(long, num_args = 1.., value_delimiter = ',', value_parser = parse_tau_arg,
          default_value = "2^-4,2^-6,2^-8")]
    tau: Vec<f64>,
    /// Trajectories per step size.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// First seed of the ensemble.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Length of each trajectory in time.
    #[arg(long = "T", default_value_t = 0.25)]
    t_final: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Study CSV.
    #[arg(long)]
    csv: PathBuf,
    /// Regularities to fit; default: every s in the file.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    s: Option<Vec<f64>>,
    /// Where to write plot data; default: next to the CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::InvalidInput(_) => 2,
        Error::NumericalBlowup { .. } => 3,
        Error::Io(_) | Error::Csv(_) | Error::Snapshot { .. } => 4,
        Error::Internal(_) => 1,
    }
}

fn fmt_s(s: f64) -> String {
    format!("{s}")
}

fn cmd_generate(a: GenerateArgs) -> nls2d::Result<()> {
    let spec = a.data.spec(a.n);
    let datum = generate(&spec)?;
    let path = a
        .out
        .join(format!("datum_s{}_seed{}_N{}.nls2", fmt_s(spec.s), spec.seed, a.n));
    snapshot::write(&path, &datum)?;
    println!("{}  ‖u0‖_L2 = {:.6e}", path.display(), l2_norm(&datum));
    Ok(())
}

fn cmd_run(a: RunArgs) -> nls2d::Result<()> {
    let u0 = match &a.input {
        Some(p) => snapshot::read(p)?,
        None => {
            let n = a.n.unwrap_or_else(|| grid_for_tau(a.tau));
            generate(&a.data.spec(n))?
        }
    };
    let n = a.n.unwrap_or(u0.n_modes());
    let u0 = if u0.n_modes() == n {
        u0
    } else {
        info!("restricting/padding the {}-mode input to {n} modes", u0.n_modes());
        u0.resized(n)?
    };
    let mut params = SchemeParams::new(a.tau, n, a.mu, a.t_final)?;
    if let Some(theta) = a.theta_override {
        params = params.with_theta(theta)?;
    }
    let steps = params.steps()?;
    let run_id = format!("run_s{}_seed{}_N{}_tau{}", fmt_s(a.data.s), a.data.seed, n, a.tau);
    let every = a.every.unwrap_or(0);
    let out = a.out.clone();
    let id = run_id.clone();
    let m0 = l2_norm(&project(&u0, &params.cutoff()));
    let last = evolve_observed(&u0, &params, every, |step, u| {
        snapshot::write(&out.join(snapshot::checkpoint_name(&id, step)), u)
    })?;
    let path = a.out.join(snapshot::checkpoint_name(&run_id, steps));
    snapshot::write(&path, &last)?;
    println!(
        "N = {n}, tau = {}, theta = {}, steps = {steps}\nmass {:.15e} -> {:.15e}\n{}",
        params.tau,
        params.theta,
        m0,
        l2_norm(&last),
        path.display()
    );
    Ok(())
}

fn cmd_reference(a: ReferenceArgs) -> nls2d::Result<()> {
    let spec = a.data.spec(a.n);
    let r = compute_reference(&spec, a.tau, a.t_final, a.mu, Some(&a.out))?;
    let key = harness::reference_key(&spec, a.tau, a.t_final, a.mu);
    println!(
        "reference {key} ({}), ‖u(T)‖_L2 = {:.15e}",
        if r.from_cache { "cached" } else { "computed" },
        l2_norm(&r.field)
    );
    Ok(())
}

fn study_config(a: &ConvergeArgs) -> nls2d::Result<StudyConfig> {
    let mut cfg = match &a.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default(),
    };
    if let Some(s) = &a.s {
        cfg.s_values = s.clone();
    }
    if let Some(t) = &a.tau {
        cfg.tau_list = t.iter().map(|&v| TauValue(v)).collect();
    }
    if let Some(k) = a.k {
        cfg.reference.k_modes = k;
    }
    if let Some(t) = a.tau_ref {
        cfg.reference.tau_ref = TauValue(t);
    }
    if let Some(t) = a.t_final {
        cfg.t_final = t;
    }
    if let Some(mu) = a.mu {
        cfg.mu = mu;
    }
    if let Some(seeds) = &a.seed {
        cfg.seeds = seeds.clone();
    }
    if let Some(out) = &a.out {
        cfg.output_dir = out.clone();
    }
    if a.no_timing {
        cfg.record_timing = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Prints fits for every `s` and writes `plot_s{s}.dat` into `dir`.
fn report_fits(records: &[ConvergenceRecord], s_values: &[f64], dir: &Path) -> nls2d::Result<()> {
    for &s in s_values {
        match fit_order(records, s) {
            Ok(fit) => {
                let path = dir.join(format!("plot_s{}.dat", fmt_s(s)));
                write_plot_data(&path, &fit.points)?;
                println!(
                    "s = {s}: order in theta {:.4} (theory {:.4}), rms residual {:.3e}  [{}]",
                    fit.slope,
                    s / 2.0,
                    fit.residual,
                    path.display()
                );
            }
            Err(e) => warn!("s = {s}: no fit ({e})"),
        }
    }
    Ok(())
}

fn cmd_converge(a: ConvergeArgs) -> nls2d::Result<()> {
    let cfg = study_config(&a)?;
    let opts = if a.no_cache {
        StudyOptions::default()
    } else {
        StudyOptions::cached_in(cfg.output_dir.join("cache"))
    };
    if a.reference_sensitivity {
        for (k, rows) in run_reference_sensitivity(&cfg, &opts)? {
            println!("-- reference K = {k}");
            report_fits(&rows, &cfg.s_values, &cfg.output_dir.join(format!("ref_K{k}")))?;
        }
        return Ok(());
    }
    let rows = run_study(&cfg, &opts)?;
    let failed = rows.iter().filter(|r| r.l2_error.is_none()).count();
    println!(
        "{} rows in {}{}",
        rows.len(),
        cfg.output_dir.join(RESULTS_FILE).display(),
        if failed > 0 {
            format!(" ({failed} failed)")
        } else {
            String::new()
        }
    );
    report_fits(&rows, &cfg.s_values, &cfg.output_dir)
}

fn cmd_diagnose(a: DiagnoseArgs) -> nls2d::Result<()> {
    let ids: Vec<EstimateId> = if a.estimate == "all" {
        EstimateId::ALL.to_vec()
    } else {
        vec![a.estimate.parse()?]
    };
    let settings = ProbeSettings::default();
    let (samples, stats) = probe_sweep(&a.tau, &ids, a.count, a.seed, a.t_final, &settings)?;
    let path = a.out.join("probe.csv");
    write_probe_csv(&path, &samples)?;
    for st in &stats {
        println!(
            "{:<17} tau = {:<12} n = {:<4} excluded = {}  ratio in [{:.4e}, {:.4e}]  histogram {:?}",
            st.estimate_id, st.tau, st.count, st.excluded_zero, st.min_ratio, st.max_ratio, st.histogram
        );
    }
    for id in &ids {
        let maxes: Vec<f64> = stats
            .iter()
            .filter(|s| s.estimate_id == *id)
            .map(|s| s.max_ratio)
            .collect();
        let hi = maxes.iter().copied().fold(0.0, f64::max);
        let lo = maxes.iter().copied().fold(f64::INFINITY, f64::min);
        println!("{id}: max ratio varies by a factor {:.3} across tau", hi / lo);
    }
    println!("{}", path.display());
    Ok(())
}

fn cmd_fit(a: FitArgs) -> nls2d::Result<()> {
    let rows = read_records(&a.csv)?;
    let s_values = match a.s {
        Some(s) => s,
        None => {
            let mut s: Vec<f64> = rows.iter().map(|r| r.s).collect();
            s.sort_by(f64::total_cmp);
            s.dedup();
            s
        }
    };
    let dir = a
        .out
        .or_else(|| a.csv.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    report_fits(&rows, &s_values, &dir)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Reference(a) => cmd_reference(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Fit(a) => cmd_fit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
