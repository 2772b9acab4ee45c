use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use arch_deconv::dependence::{arch_inf_delta_for, classify_mixing, markov_delta_n, tau_from_delta, theorem_cases};
use arch_deconv::estimator::{log_square_transform, SpectralEstimator};
use arch_deconv::harness::{fmt_float, run_experiment, ExperimentConfig, SpatialGrid};
use arch_deconv::processes::{check_stationarity, simulate, stationary_mean_variance, ArchInfCoeffs, InnovationLaw, ProcessSpec, DEFAULT_BURN_IN};
use arch_deconv::projection::{reconstruct, ModelIndex};
use arch_deconv::rates::{oracle_m_theoretical, SmoothnessSpec};
use arch_deconv::selection::{select_model, ModelGrid, PenaltyConfig, SelectionConfig, DEFAULT_A, DEFAULT_GRID_STEP};
use arch_deconv::spectral::SpectralQuadrature;
use arch_deconv::{DeconvError, DeconvEstimate, NoiseModel, Result, Sample};

#[derive(Parser)]
#[command(name = "archdeconv", version, about = "Adaptive deconvolution of the log-volatility density of ARCH-type series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a volatility path; CSV columns t, y, sigma, x.
    Simulate(SimulateArgs),
    /// Projection estimator at a fixed model index.
    Estimate(EstimateArgs),
    /// Penalized model selection over a grid of model indices.
    Select(SelectArgs),
    /// Mixing classification and coupling-rate table for a process.
    Dependence(DependenceArgs),
    /// Theoretical oracle model index and rate.
    Rates(RatesArgs),
    /// Monte Carlo risk experiment from a config file.
    Mise(MiseArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "normal")]
    law: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, env = "DECONV_SEED", default_value_t = 0)]
    seed: u64,
    /// Write simulate.csv here instead of standard output.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// One-column series, or CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Column to read when the file has a header.
    #[arg(long)]
    column: Option<String>,
    /// Input already holds Z = ln Y².
    #[arg(long)]
    pre_logged: bool,
    #[arg(long, default_value = "log_chi_squared")]
    noise: String,
    /// Number of coefficients on each side; defaults to the sample size.
    #[arg(long)]
    kn: Option<usize>,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    x_max: f64,
    #[arg(long, default_value_t = 0.01)]
    x_step: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    m: f64,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_A)]
    a: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
    #[arg(long, default_value_t = 4.0)]
    grid_max: f64,
}

#[derive(Args)]
struct DependenceArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "normal")]
    law: String,
    #[arg(long, default_value = "log_chi_squared")]
    noise: String,
    /// Largest power of ten in the rate table.
    #[arg(long, default_value_t = 4)]
    max_power: u32,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    m2: f64,
    #[arg(long)]
    noise: String,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct MiseArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long, env = "DECONV_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| DeconvError::Io(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| DeconvError::Io(format!("{}: {e}", path.display())))
}

/// Reads one numeric column. A first line that does not parse as a number is a header.
fn read_series(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| DeconvError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let split = |l: &str| l.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>();
    let mut col = 0;
    if let Some((_, first)) = lines.peek() {
        let cells = split(first);
        if cells.iter().any(|c| c.parse::<f64>().is_err()) {
            let want = column.unwrap_or(if cells.len() == 1 { cells[0].as_str() } else { "y" });
            col = cells
                .iter()
                .position(|c| c == want)
                .ok_or_else(|| DeconvError::Config(format!("column {want:?} not found in header")))?;
            lines.next();
        } else if let Some(c) = column {
            col = c
                .parse()
                .map_err(|_| DeconvError::Config(format!("no header row, so --column must be an index, got {c:?}")))?;
        }
    }
    let mut out = Vec::new();
    for (lineno, line) in lines {
        let cells = split(line);
        let cell = cells
            .get(col)
            .ok_or_else(|| DeconvError::Domain(format!("line {}: missing column {col}", lineno + 1)))?;
        let v: f64 = cell
            .parse()
            .map_err(|_| DeconvError::Domain(format!("line {}: {cell:?} is not a number", lineno + 1)))?;
        out.push(v);
    }
    Ok(out)
}

fn load_sample(args: &InputArgs) -> Result<Sample> {
    let raw = read_series(&args.input, args.column.as_deref())?;
    if args.pre_logged {
        Sample::new(raw)
    } else {
        log_square_transform(&raw)
    }
}

fn density_csv(est: &DeconvEstimate, grid: &SpatialGrid) -> String {
    let xs = grid.points();
    let g = reconstruct(&est.coeffs, &xs);
    let mut s = String::from("x,g\n");
    for (x, v) in xs.iter().zip(g) {
        let _ = writeln!(s, "{},{}", fmt_float(*x), fmt_float(v));
    }
    s
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let spec: ProcessSpec = a.model.parse()?;
    let law: InnovationLaw = a.law.parse()?;
    let path = simulate(&spec, law, a.n, a.burn_in, a.seed)?;
    let mut s = String::from("t,y,sigma,x\n");
    for t in 0..path.len() {
        let _ = writeln!(s, "{},{},{},{}", t + 1, fmt_float(path.y[t]), fmt_float(path.sigma[t]), fmt_float(path.x[t]));
    }
    match a.out_dir {
        Some(dir) => {
            ensure_dir(&dir)?;
            write_file(&dir.join("simulate.csv"), &s)
        }
        None => io::stdout().write_all(s.as_bytes()).map_err(DeconvError::from),
    }
}

fn run_estimate(a: EstimateArgs) -> Result<()> {
    let sample = load_sample(&a.input)?;
    let noise = NoiseModel::builtin(&a.input.noise)?;
    let grid = SpatialGrid::new(a.input.x_min, a.input.x_max, a.input.x_step)?;
    let index = ModelIndex::new(a.m, a.input.kn.unwrap_or(sample.n()))?;
    let mut est = SpectralEstimator::new(&sample, &noise, a.m, a.m, SpectralQuadrature::default())?;
    let fit = est.estimate(&index)?;
    ensure_dir(&a.input.out_dir)?;
    let mut coeffs = String::from("j,coefficient\n");
    for (j, c) in fit.coeffs.iter() {
        let _ = writeln!(coeffs, "{j},{}", fmt_float(c));
    }
    write_file(&a.input.out_dir.join("coefficients.csv"), &coeffs)?;
    write_file(&a.input.out_dir.join("density.csv"), &density_csv(&fit, &grid))?;
    println!("m={}", fmt_float(a.m));
    println!("contrast={}", fmt_float(fit.contrast));
    Ok(())
}

fn run_select(a: SelectArgs) -> Result<()> {
    let sample = load_sample(&a.input)?;
    let noise = NoiseModel::builtin(&a.input.noise)?;
    let grid = SpatialGrid::new(a.input.x_min, a.input.x_max, a.input.x_step)?;
    let models = ModelGrid::regular(a.grid_step, a.grid_max)?;
    let cfg = SelectionConfig {
        penalty: PenaltyConfig::with_a(a.a)?,
        k_n: a.input.kn,
        quadrature: SpectralQuadrature::default(),
    };
    let res = select_model(&sample, &noise, &cfg, &models)?;
    ensure_dir(&a.input.out_dir)?;
    let mut table = String::from("m,contrast,penalty,criterion\n");
    for row in &res.criterion {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            fmt_float(row.m),
            fmt_float(row.contrast),
            fmt_float(row.penalty),
            fmt_float(row.criterion)
        );
    }
    write_file(&a.input.out_dir.join("criterion.csv"), &table)?;
    write_file(&a.input.out_dir.join("density.csv"), &density_csv(&res.estimate, &grid))?;
    println!("m_hat={}", fmt_float(res.m_hat));
    Ok(())
}

/// Coupling coefficient `δ_n` where one is available for the spec.
fn coupling_delta(spec: &ProcessSpec, n: usize) -> Option<Result<f64>> {
    match spec {
        ProcessSpec::Arch1 { b, .. } if *b > 0.0 => Some(arch_inf_delta_for(&ArchInfCoeffs::Finite(vec![*b]), n)),
        ProcessSpec::ArchInf { coeffs, .. } => Some(arch_inf_delta_for(coeffs, n)),
        ProcessSpec::Garch { alpha, beta, .. } => {
            let kappa: f64 = alpha.iter().sum::<f64>() + beta.iter().sum::<f64>();
            let mean = stationary_mean_variance(spec)?;
            let n = u32::try_from(n).ok()?;
            Some(markov_delta_n(kappa, mean, n))
        }
        _ => None,
    }
}

fn run_dependence(a: DependenceArgs) -> Result<()> {
    let spec: ProcessSpec = a.model.parse()?;
    let law: InnovationLaw = a.law.parse()?;
    let noise = NoiseModel::builtin(&a.noise)?;
    let st = check_stationarity(&spec);
    let profile = classify_mixing(&spec, law);
    let cases = theorem_cases(&profile.class, noise.smoothness());
    println!("model={spec}");
    println!("stationary={} ({})", st.holds, st.condition);
    println!("class={} ({})", profile.class, profile.condition);
    println!("rho={} alpha={}", profile.rho, profile.alpha);
    println!(
        "theorem_cases beta={} tau_ordinary={} tau_supersmooth={}",
        cases.beta, cases.tau_ordinary, cases.tau_supersmooth
    );
    println!("n,delta_n,tau_n");
    for k in 1..=a.max_power {
        let n = 10usize.pow(k);
        match coupling_delta(&spec, n) {
            Some(d) => {
                let d = d?;
                let tau = if d > 0.0 && d < 1.0 {
                    fmt_float(tau_from_delta(d, profile.rho, profile.alpha)?)
                } else {
                    "NA".into()
                };
                println!("{n},{},{tau}", fmt_float(d));
            }
            None => println!("{n},NA,NA"),
        }
    }
    Ok(())
}

fn run_rates(a: RatesArgs) -> Result<()> {
    let spec = SmoothnessSpec::new(a.s, a.r, a.b, a.c1, a.m2)?;
    let noise = NoiseModel::builtin(&a.noise)?;
    let o = oracle_m_theoretical(&spec, &noise, a.n)?;
    println!("m_breve={}", fmt_float(o.m_breve));
    println!("pi_m_breve={}", fmt_float(o.pi_m()));
    println!("rate={}", fmt_float(o.rate));
    println!("rate_form={}", o.form);
    Ok(())
}

fn run_mise(a: MiseArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let report = run_experiment(&cfg)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    report.write_csv(&a.out_dir)?;
    for s in &report.sizes {
        println!(
            "n={} adaptive_mean_ise={} oracle_m={} oracle_mean_ise={}",
            s.n,
            fmt_float(s.adaptive_mean_ise),
            fmt_float(s.oracle_m),
            fmt_float(s.oracle_mean_ise)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Select(a) => run_select(a),
        Command::Dependence(a) => run_dependence(a),
        Command::Rates(a) => run_rates(a),
        Command::Mise(a) => run_mise(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.code());
            ExitCode::from(1)
        }
    }
}
