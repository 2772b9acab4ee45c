//! Monte Carlo risk experiments: ISE/MISE tables, empirical oracle and
//! adaptive-versus-oracle comparison, with CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rand::Rng;

use crate::error::{DeconvError, Result};
use crate::estimator::{DeconvEstimate, Sample};
use crate::noise::NoiseModel;
use crate::processes::{replication_seed, rng_from_seed, simulate, InnovationLaw, ProcessSpec, DEFAULT_BURN_IN};
use crate::projection::{phi_eval, reconstruct};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::selection::{sweep, ModelGrid, PenaltyConfig, SelectionConfig};
use crate::spectral::SpectralQuadrature;

/// Relative ISE change between the grid and its every-other-point subgrid
/// above which the spatial grid is reported as too coarse.
pub const COARSE_GRID_TOLERANCE: f64 = 0.01;

/// Uniform spatial grid `x_i = start + i·step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl SpatialGrid {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && end > start && start.is_finite() && end.is_finite()) {
            return Err(DeconvError::Config(format!("invalid spatial grid [{start}, {end}] with step {step}")));
        }
        let intervals = ((end - start) / step).round() as usize;
        if intervals < 2 || intervals % 2 != 0 {
            return Err(DeconvError::Config(format!(
                "spatial grid needs an even number (≥ 2) of intervals, got {intervals}"
            )));
        }
        Ok(Self { start, step, len: intervals + 1 })
    }

    pub fn default_grid() -> Self {
        Self::new(-10.0, 10.0, 0.01).expect("valid default grid")
    }

    pub fn end(&self) -> f64 {
        self.start + (self.len - 1) as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1]))
}

/// A target density tabulated on a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDensity {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
    /// `∫ g²` outside the grid.
    pub tail_sq_mass: f64,
    /// Set when the reference is itself an estimate.
    pub approximate: bool,
}

impl ReferenceDensity {
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, grid: SpatialGrid) -> Result<Self> {
        let cfg = QuadratureConfig::default();
        let sq = |x: f64| f(x).powi(2);
        let width = 60.0;
        let tail = integrate(sq, grid.end(), grid.end() + width, &cfg)? + integrate(sq, grid.start - width, grid.start, &cfg)?;
        Ok(Self {
            values: grid.points().into_iter().map(f).collect(),
            grid,
            tail_sq_mass: tail,
            approximate: false,
        })
    }

    pub fn gaussian(mean: f64, sd: f64, grid: SpatialGrid) -> Result<Self> {
        if !(sd > 0.0) {
            return Err(DeconvError::Domain(format!("sd must be positive, got {sd}")));
        }
        Self::from_fn(|x| crate::special::normal_pdf((x - mean) / sd) / sd, grid)
    }

    /// Histogram of `x` on the grid cells, smoothed by projection onto `S_M`.
    pub fn from_draws(x: &[f64], grid: SpatialGrid, big_m: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(DeconvError::Domain("pilot path is empty".into()));
        }
        let bin = grid.step;
        let lo = grid.start - 0.5 * bin;
        let bins = grid.len;
        let mut counts = vec![0usize; bins];
        let mut outside = 0usize;
        for &v in x {
            let k = ((v - lo) / bin).floor();
            if k >= 0.0 && (k as usize) < bins {
                counts[k as usize] += 1;
            } else {
                outside += 1;
            }
        }
        if outside > 0 {
            warn!("{outside} pilot draws fall outside the spatial grid");
        }
        let total = x.len() as f64;
        let pad = 4.0;
        let j_lo = ((grid.start - pad) * big_m).floor() as i64;
        let j_hi = ((grid.end() + pad) * big_m).ceil() as i64;
        let centres = grid.points();
        let coeffs: Vec<(i64, f64)> = (j_lo..=j_hi)
            .map(|j| {
                let a = counts
                    .iter()
                    .zip(&centres)
                    .filter(|(c, _)| **c > 0)
                    .map(|(c, &t)| *c as f64 * phi_eval(big_m, j, t))
                    .sum::<f64>()
                    / total;
                (j, a)
            })
            .collect();
        let eval = |t: f64| coeffs.iter().map(|&(j, a)| a * phi_eval(big_m, j, t)).sum::<f64>();
        let values: Vec<f64> = centres.iter().map(|&t| eval(t)).collect();
        let outer = SpatialGrid::new(grid.end(), grid.end() + pad, grid.step)?;
        let inner = SpatialGrid::new(grid.start - pad, grid.start, grid.step)?;
        let right: Vec<f64> = outer.points().iter().map(|&t| eval(t).powi(2)).collect();
        let left: Vec<f64> = inner.points().iter().map(|&t| eval(t).powi(2)).collect();
        Ok(Self {
            grid,
            values,
            tail_sq_mass: trapezoid(&right, grid.step) + trapezoid(&left, grid.step),
            approximate: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ise {
    pub value: f64,
    /// Relative change against the grid with twice the step.
    pub coarse_change: f64,
}

impl Ise {
    pub fn too_coarse(&self) -> bool {
        self.coarse_change > COARSE_GRID_TOLERANCE
    }
}

/// `∫ (ĝ − g)²` by the trapezoid rule on the reference grid, plus the
/// reference tail mass.
pub fn ise(est: &DeconvEstimate, reference: &ReferenceDensity) -> Ise {
    let fitted = reconstruct(&est.coeffs, &reference.grid.points());
    ise_values(&fitted, reference)
}

pub fn ise_values(fitted: &[f64], reference: &ReferenceDensity) -> Ise {
    let sq: Vec<f64> = fitted.iter().zip(&reference.values).map(|(a, b)| (a - b).powi(2)).collect();
    let fine = trapezoid(&sq, reference.grid.step) + reference.tail_sq_mass;
    let coarse_pts: Vec<f64> = sq.iter().step_by(2).copied().collect();
    let coarse = trapezoid(&coarse_pts, 2.0 * reference.grid.step) + reference.tail_sq_mass;
    let coarse_change = if fine > 0.0 { (coarse - fine).abs() / fine } else { 0.0 };
    Ise { value: fine, coarse_change }
}

/// Data-generating scenario.
#[derive(Debug, Clone)]
pub enum Scenario {
    /// i.i.d. `X ~ N(mean, sd²)` observed through `Z = X + ε`.
    Gaussian { mean: f64, sd: f64 },
    /// `Z = ln Y²` from a simulated volatility path.
    Process { spec: ProcessSpec, law: InnovationLaw },
}

/// Experiment settings, read from flat `key = value` text.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub scenario: Scenario,
    pub noise: NoiseModel,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub grid_step: f64,
    pub grid_max: f64,
    pub penalty: PenaltyConfig,
    pub k_n: Option<usize>,
    pub burn_in: usize,
    pub spatial: SpatialGrid,
    pub pilot_length: usize,
    pub pilot_m: f64,
}

impl ExperimentConfig {
    pub fn gaussian(mean: f64, sd: f64, noise: NoiseModel, sizes: Vec<usize>, replications: usize, seed: u64) -> Self {
        Self {
            name: format!("gaussian:{mean},{sd}+{}", noise.label()),
            scenario: Scenario::Gaussian { mean, sd },
            noise,
            sizes,
            replications,
            seed,
            grid_step: 0.25,
            grid_max: 4.0,
            penalty: PenaltyConfig::default(),
            k_n: None,
            burn_in: DEFAULT_BURN_IN,
            spatial: SpatialGrid::default_grid(),
            pilot_length: 1_000_000,
            pilot_m: 8.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(DeconvError::Config("replications must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 3) {
            return Err(DeconvError::Config("every sample size must be at least 3".into()));
        }
        self.penalty.validate()?;
        if let Scenario::Process { law, .. } = &self.scenario {
            if *law != InnovationLaw::StandardNormal || self.noise.label() != "log_chi_squared" {
                return Err(DeconvError::Config(
                    "process scenarios need law = normal with noise = log_chi_squared".into(),
                ));
            }
        }
        if let Scenario::Gaussian { sd, .. } = self.scenario {
            if !(sd > 0.0) {
                return Err(DeconvError::Config(format!("scenario sd must be positive, got {sd}")));
            }
        }
        Ok(())
    }

    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| DeconvError::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| DeconvError::Config(format!("key {key}: cannot parse {v:?}")))
}

impl FromStr for ExperimentConfig {
    type Err = DeconvError;

    fn from_str(text: &str) -> Result<Self> {
        let mut scenario_text = None;
        let mut law = InnovationLaw::StandardNormal;
        let mut noise = None;
        let mut name = None;
        let mut cfg = ExperimentConfig::gaussian(0.0, 1.0, NoiseModel::log_chi_squared(), vec![1000], 100, 1);
        let (mut x_min, mut x_max, mut x_step) = (-10.0, 10.0, 0.01);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| DeconvError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = Some(value.to_string()),
                "scenario" => scenario_text = Some(value.to_string()),
                "law" => law = value.parse()?,
                "noise" => noise = Some(NoiseModel::builtin(value)?),
                "n" => {
                    cfg.sizes = value
                        .split(',')
                        .map(|t| parse_num::<usize>(key, t.trim()))
                        .collect::<Result<Vec<_>>>()?
                }
                "replications" => cfg.replications = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "grid_step" => cfg.grid_step = parse_num(key, value)?,
                "grid_max" => cfg.grid_max = parse_num(key, value)?,
                "a" => cfg.penalty.a = parse_num(key, value)?,
                "pen_ordinary" => cfg.penalty.ordinary = parse_num(key, value)?,
                "pen_supersmooth" => cfg.penalty.supersmooth = parse_num(key, value)?,
                "k_n" => cfg.k_n = if value == "n" { None } else { Some(parse_num(key, value)?) },
                "burn_in" => cfg.burn_in = parse_num(key, value)?,
                "x_min" => x_min = parse_num(key, value)?,
                "x_max" => x_max = parse_num(key, value)?,
                "x_step" => x_step = parse_num(key, value)?,
                "pilot_length" => cfg.pilot_length = parse_num(key, value)?,
                "pilot_m" => cfg.pilot_m = parse_num(key, value)?,
                other => return Err(DeconvError::Config(format!("unknown key {other:?}"))),
            }
        }
        let scenario_text = scenario_text.ok_or_else(|| DeconvError::Config("missing key scenario".into()))?;
        cfg.noise = noise.ok_or_else(|| DeconvError::Config("missing key noise".into()))?;
        cfg.scenario = if let Some(rest) = scenario_text.strip_prefix("gaussian:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(DeconvError::Config("scenario gaussian takes mean,sd".into()));
            }
            Scenario::Gaussian { mean: parse_num("scenario", parts[0].trim())?, sd: parse_num("scenario", parts[1].trim())? }
        } else {
            Scenario::Process { spec: scenario_text.parse()?, law }
        };
        cfg.spatial = SpatialGrid::new(x_min, x_max, x_step)?;
        cfg.name = name.unwrap_or_else(|| format!("{scenario_text}+{}", cfg.noise.label()));
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Outcome of one replication at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub m_hat: f64,
    pub adaptive_ise: f64,
    pub per_m_ise: Vec<f64>,
}

/// Aggregates for a sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeReport {
    pub n: usize,
    pub grid: Vec<f64>,
    pub mean_ise: Vec<f64>,
    pub se_ise: Vec<f64>,
    /// Argmin of `mean_ise`, ties to the smaller `m`.
    pub oracle_m: f64,
    pub oracle_mean_ise: f64,
    pub oracle_median_ise: f64,
    pub adaptive_mean_ise: f64,
    pub adaptive_median_ise: f64,
    pub adaptive_se: f64,
    /// Mean and median over replications of `ISE(g̃)/ISE(ĝ_{m̆})`.
    pub mean_ratio: f64,
    pub median_ratio: f64,
    pub histogram: Vec<(f64, usize)>,
    pub records: Vec<ReplicationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub scenario: String,
    pub noise: String,
    pub replications: usize,
    pub approximate_reference: bool,
    pub sizes: Vec<SizeReport>,
    pub warnings: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_error(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Replication draws for the largest sample size; smaller sizes use prefixes.
fn draw_sample<R: Rng>(cfg: &ExperimentConfig, n: usize, seed: u64, rng: &mut R) -> Result<Vec<f64>> {
    match &cfg.scenario {
        Scenario::Gaussian { mean, sd } => {
            let mut z = Vec::with_capacity(n);
            for _ in 0..n {
                let e: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                let eps = cfg.noise.sample(rng)?;
                z.push(mean + sd * e + eps);
            }
            Ok(z)
        }
        Scenario::Process { spec, law } => {
            let path = simulate(spec, *law, n, cfg.burn_in, seed)?;
            let sample = crate::estimator::log_square_transform(&path.y)?;
            Ok(sample.z().to_vec())
        }
    }
}

pub fn reference_density(cfg: &ExperimentConfig) -> Result<ReferenceDensity> {
    match &cfg.scenario {
        Scenario::Gaussian { mean, sd } => ReferenceDensity::gaussian(*mean, *sd, cfg.spatial),
        Scenario::Process { spec, law } => {
            info!("building pilot reference from a path of length {}", cfg.pilot_length);
            let pilot_seed = replication_seed(cfg.seed, u64::MAX);
            let path = simulate(spec, *law, cfg.pilot_length, cfg.burn_in, pilot_seed)?;
            ReferenceDensity::from_draws(&path.x, cfg.spatial, cfg.pilot_m)
        }
    }
}

fn one_replication(
    cfg: &ExperimentConfig,
    r: usize,
    reference: &ReferenceDensity,
    points: &[f64],
    warnings: &mut Vec<String>,
) -> Result<Vec<ReplicationRecord>> {
    let seed = replication_seed(cfg.seed, r as u64);
    let mut rng = rng_from_seed(seed);
    let max_n = *cfg.sizes.iter().max().unwrap();
    let z = draw_sample(cfg, max_n, seed, &mut rng)?;
    let grid = ModelGrid::regular(cfg.grid_step, cfg.grid_max)?;
    let sel = SelectionConfig {
        penalty: cfg.penalty,
        k_n: cfg.k_n,
        quadrature: SpectralQuadrature::default(),
    };
    let mut out = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let sample = Sample::new(z[..n].to_vec())?;
        let sw = sweep(&sample, &cfg.noise, &sel, &grid)?;
        let best = sw.argmin();
        let mut per_m = Vec::with_capacity(sw.estimates.len());
        for est in &sw.estimates {
            let v = ise_values(&reconstruct(&est.coeffs, points), reference);
            if v.too_coarse() {
                warnings.push(format!(
                    "replication {r}, n = {n}, m = {}: spatial grid too coarse (ISE changes by {:.3}% at twice the step)",
                    est.m(),
                    100.0 * v.coarse_change
                ));
            }
            per_m.push(v.value);
        }
        out.push(ReplicationRecord {
            replication: r,
            m_hat: sw.estimates[best].m(),
            adaptive_ise: per_m[best],
            per_m_ise: per_m,
        });
    }
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RiskReport> {
    cfg.validate()?;
    let reference = reference_density(cfg)?;
    let points = cfg.spatial.points();
    let mut warnings = Vec::new();
    if reference.approximate {
        warnings.push("approximate reference: pilot estimate from a simulated volatility path".into());
    }
    let mut grids = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        grids.push(ModelGrid::regular(cfg.grid_step, cfg.grid_max)?.admissible(&cfg.noise, n)?.values().to_vec());
    }
    let mut by_size: Vec<Vec<ReplicationRecord>> = vec![Vec::with_capacity(cfg.replications); cfg.sizes.len()];
    for r in 0..cfg.replications {
        let recs = one_replication(cfg, r, &reference, &points, &mut warnings).map_err(|e| DeconvError::Replication {
            replication: r,
            source: Box::new(e),
        })?;
        for (slot, rec) in by_size.iter_mut().zip(recs) {
            slot.push(rec);
        }
    }
    let sizes = cfg
        .sizes
        .iter()
        .zip(grids)
        .zip(by_size)
        .map(|((&n, grid), records)| summarize(n, grid, records))
        .collect();
    Ok(RiskReport {
        scenario: cfg.name.clone(),
        noise: cfg.noise.label().to_string(),
        replications: cfg.replications,
        approximate_reference: reference.approximate,
        sizes,
        warnings,
    })
}

fn summarize(n: usize, grid: Vec<f64>, records: Vec<ReplicationRecord>) -> SizeReport {
    let k = grid.len();
    let column = |i: usize| -> Vec<f64> { records.iter().map(|r| r.per_m_ise[i]).collect() };
    let mean_ise: Vec<f64> = (0..k).map(|i| mean(&column(i))).collect();
    let se_ise: Vec<f64> = (0..k).map(|i| std_error(&column(i))).collect();
    let mut best = 0;
    for i in 1..k {
        if mean_ise[i] < mean_ise[best] {
            best = i;
        }
    }
    let oracle_col = column(best);
    let adaptive: Vec<f64> = records.iter().map(|r| r.adaptive_ise).collect();
    let ratios: Vec<f64> = records
        .iter()
        .map(|r| if r.per_m_ise[best] > 0.0 { r.adaptive_ise / r.per_m_ise[best] } else { 1.0 })
        .collect();
    let histogram = grid
        .iter()
        .map(|&m| (m, records.iter().filter(|r| r.m_hat == m).count()))
        .collect();
    SizeReport {
        n,
        oracle_m: grid[best],
        oracle_mean_ise: mean_ise[best],
        oracle_median_ise: median(&oracle_col),
        adaptive_mean_ise: mean(&adaptive),
        adaptive_median_ise: median(&adaptive),
        adaptive_se: std_error(&adaptive),
        mean_ratio: mean(&ratios),
        median_ratio: median(&ratios),
        histogram,
        grid,
        mean_ise,
        se_ise,
        records,
    }
}

/// Per-m mean ISE table and the empirical oracle `m̆` for every sample size.
pub fn empirical_oracle(cfg: &ExperimentConfig) -> Result<Vec<(usize, Vec<(f64, f64)>, f64)>> {
    let report = run_experiment(cfg)?;
    Ok(report
        .sizes
        .into_iter()
        .map(|s| (s.n, s.grid.iter().copied().zip(s.mean_ise.iter().copied()).collect(), s.oracle_m))
        .collect())
}

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl RiskReport {
    pub fn report_csv(&self) -> String {
        let mut s = String::from("scenario,n,m,mean_ise,se\n");
        for size in &self.sizes {
            for (i, m) in size.grid.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    self.scenario,
                    size.n,
                    fmt_float(*m),
                    fmt_float(size.mean_ise[i]),
                    fmt_float(size.se_ise[i])
                );
            }
        }
        s
    }

    pub fn selection_csv(&self) -> String {
        let mut s = String::from("scenario,n,m,count\n");
        for size in &self.sizes {
            for (m, c) in &size.histogram {
                let _ = writeln!(s, "{},{},{},{}", self.scenario, size.n, fmt_float(*m), c);
            }
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "scenario,n,replications,adaptive_mean_ise,adaptive_median_ise,adaptive_se,oracle_m,oracle_mean_ise,oracle_median_ise,mean_ratio,median_ratio,approximate_reference\n",
        );
        for z in &self.sizes {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                self.scenario,
                z.n,
                self.replications,
                fmt_float(z.adaptive_mean_ise),
                fmt_float(z.adaptive_median_ise),
                fmt_float(z.adaptive_se),
                fmt_float(z.oracle_m),
                fmt_float(z.oracle_mean_ise),
                fmt_float(z.oracle_median_ise),
                fmt_float(z.mean_ratio),
                fmt_float(z.median_ratio),
                self.approximate_reference
            );
        }
        s
    }

    /// Writes `report.csv`, `selection.csv` and `summary.csv` into `dir`.
    pub fn write_csv(&self, dir: &FsPath) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let files = [
            ("report.csv", self.report_csv()),
            ("selection.csv", self.selection_csv()),
            ("summary.csv", self.summary_csv()),
        ];
        let mut out = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            fs::write(&p, body)?;
            out.push(p);
        }
        Ok(out)
    }
}
