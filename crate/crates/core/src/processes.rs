//! Volatility process simulators: `Y_t = σ_t η_t` for the ARCH family.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{DeconvError, Result};

pub const DEFAULT_BURN_IN: usize = 5000;
/// ARCH(∞) lags are cut once the coefficient tail drops below this.
pub const ARCH_INF_TAIL: f64 = 1e-12;
/// Hard cap on ARCH(∞) lags, binding only for slowly decaying families.
pub const ARCH_INF_MAX_LAGS: usize = 20_000;

const SEED_SPLIT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for replication `r` derived from a master seed.
pub fn replication_seed(master: u64, r: u64) -> u64 {
    master ^ r.wrapping_mul(SEED_SPLIT)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Centred, unit-variance innovation distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnovationLaw {
    StandardNormal,
    /// Student t with `df > 2` degrees of freedom, rescaled to unit variance.
    StudentT { df: f64 },
    /// Uniform on `[−√3, √3]`.
    UniformSymmetric,
}

impl InnovationLaw {
    pub fn student_t(df: f64) -> Result<Self> {
        if !(df > 2.0 && df.is_finite()) {
            return Err(DeconvError::Domain(format!("Student t needs df > 2 for unit variance, got {df}")));
        }
        Ok(Self::StudentT { df })
    }

    pub fn label(&self) -> String {
        match self {
            Self::StandardNormal => "standard_normal".into(),
            Self::StudentT { df } => format!("student_t:{df}"),
            Self::UniformSymmetric => "uniform_symmetric".into(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::StandardNormal => StandardNormal.sample(rng),
            Self::StudentT { df } => {
                let t: f64 = StudentT::new(df).expect("validated df").sample(rng);
                t * ((df - 2.0) / df).sqrt()
            }
            Self::UniformSymmetric => {
                let s = 3f64.sqrt();
                rng.random_range(-s..s)
            }
        }
    }
}

impl FromStr for InnovationLaw {
    type Err = DeconvError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        match name {
            "normal" | "standard_normal" | "gaussian" => Ok(Self::StandardNormal),
            "uniform" | "uniform_symmetric" => Ok(Self::UniformSymmetric),
            "student" | "student_t" | "t" => {
                let df = arg
                    .parse::<f64>()
                    .map_err(|_| DeconvError::Config(format!("student_t needs a numeric df, got {arg:?}")))?;
                Self::student_t(df)
            }
            other => Err(DeconvError::Config(format!("unknown innovation law {other:?}"))),
        }
    }
}

impl fmt::Display for InnovationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Coefficients `a_j`, `j ≥ 1`, of an ARCH(∞) recursion.
#[derive(Debug, Clone, PartialEq)]
pub enum ArchInfCoeffs {
    /// `a_j = C b^j`, `0 < b < 1`.
    Geometric { c: f64, b: f64 },
    /// `a_j = C j^{−b}`, `b > 1`.
    Polynomial { c: f64, b: f64 },
    /// `a_1, …, a_J`, zero afterwards.
    Finite(Vec<f64>),
}

impl ArchInfCoeffs {
    pub fn coeff(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        match self {
            Self::Geometric { c, b } => c * b.powi(j as i32),
            Self::Polynomial { c, b } => c * (j as f64).powf(-b),
            Self::Finite(v) => v.get(j - 1).copied().unwrap_or(0.0),
        }
    }

    /// `Σ_{i>k} a_i`; an upper bound for the polynomial family.
    pub fn tail(&self, k: usize) -> f64 {
        match self {
            Self::Geometric { c, b } => c * b.powi(k as i32 + 1) / (1.0 - b),
            Self::Polynomial { c, b } => {
                if k == 0 {
                    c + c / (b - 1.0)
                } else {
                    c * (k as f64).powf(1.0 - b) / (b - 1.0)
                }
            }
            Self::Finite(v) => v.iter().skip(k).sum(),
        }
    }

    /// Bracket `[lo, hi]` on `Σ_j a_j`.
    pub fn sum_bounds(&self) -> (f64, f64) {
        match self {
            Self::Geometric { c, b } => {
                let s = c * b / (1.0 - b);
                (s, s)
            }
            Self::Polynomial { c, b } => {
                const N: usize = 100_000;
                let partial: f64 = (1..=N).rev().map(|j| self.coeff(j)).sum();
                let lo = partial + c * ((N + 1) as f64).powf(1.0 - b) / (b - 1.0);
                let hi = partial + c * (N as f64).powf(1.0 - b) / (b - 1.0);
                (lo, hi)
            }
            Self::Finite(v) => {
                let s = v.iter().sum();
                (s, s)
            }
        }
    }

    /// Number of lags kept in simulation.
    pub fn truncation(&self) -> usize {
        match self {
            Self::Finite(v) => v.len(),
            _ => {
                let mut k = 1;
                while self.tail(k) >= ARCH_INF_TAIL {
                    if k >= ARCH_INF_MAX_LAGS {
                        warn!(
                            "ARCH(∞) truncated at the lag cap {ARCH_INF_MAX_LAGS}; remaining tail {:e}",
                            self.tail(k)
                        );
                        return k;
                    }
                    k = if k < 64 { k + 1 } else { (k + k / 8).min(ARCH_INF_MAX_LAGS) };
                }
                // step back to the smallest sufficient lag
                let mut lo = 1;
                let mut hi = k;
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.tail(mid) < ARCH_INF_TAIL {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                hi
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Geometric { c, b } if !(*c >= 0.0 && *b > 0.0 && *b < 1.0) => {
                Err(DeconvError::Domain(format!("geometric coefficients need C ≥ 0 and 0 < b < 1, got C = {c}, b = {b}")))
            }
            Self::Polynomial { c, b } if !(*c >= 0.0 && *b > 1.0) => {
                Err(DeconvError::Domain(format!("polynomial coefficients need C ≥ 0 and b > 1, got C = {c}, b = {b}")))
            }
            Self::Finite(v) if v.iter().any(|a| !(*a >= 0.0)) => {
                Err(DeconvError::Domain("ARCH(∞) coefficients must be nonnegative".into()))
            }
            _ => Ok(()),
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Transformation `Λ` of the augmented GARCH recursion.
#[derive(Clone)]
pub enum Link {
    Identity,
    Log,
    /// Increasing `Λ` with its inverse.
    Custom { forward: ScalarFn, inverse: ScalarFn },
}

impl fmt::Debug for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("Identity"),
            Self::Log => f.write_str("Log"),
            Self::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl Link {
    fn inverse(&self, v: f64) -> f64 {
        match self {
            Self::Identity => v,
            Self::Log => v.exp(),
            Self::Custom { inverse, .. } => inverse(v),
        }
    }
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

#[derive(Clone)]
pub enum ProcessSpec {
    /// `σ_t² = a + b Y_{t−1}²`.
    Arch1 { a: f64, b: f64 },
    /// `σ_t² = a + Σ a_i Y_{t−i}² + Σ b_j σ_{t−j}²`.
    Garch { a: f64, alpha: Vec<f64>, beta: Vec<f64> },
    /// `σ_t² = a + Σ_{j≥1} a_j Y_{t−j}²`.
    ArchInf { a: f64, coeffs: ArchInfCoeffs },
    /// `σ_t = a + b σ_{t−1} η_{t−1} 1{η>0} − c σ_{t−1} η_{t−1} 1{η<0}`.
    ThresholdArch { a: f64, b: f64, c: f64 },
    /// `σ_t = f(σ_{t−1} η_{t−1})`; `declared_bound` is the user's value of
    /// `limsup |f(x)/x|`, which cannot be checked for a black-box `f`.
    NonlinearArch { f: ScalarFn, declared_bound: f64, label: String },
    /// `Λ(σ_t²) = c(η_{t−1}) Λ(σ_{t−1}²) + h(η_{t−1})` with polynomial `c`, `h`
    /// (coefficients in increasing degree). `moment_condition` declares that
    /// `E|c(η)|^s < 1` and `E|h(η)|^s < ∞` hold for some integer `s ≥ 1`.
    AugmentedGarch { link: Link, c: Vec<f64>, h: Vec<f64>, moment_condition: bool },
}

impl fmt::Debug for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProcessSpec({self})")
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Arch1 { a, b } => write!(f, "arch1:{a},{b}"),
            Self::Garch { a, alpha, beta } => write!(f, "garch:{a};{};{}", join(alpha), join(beta)),
            Self::ArchInf { a, coeffs } => match coeffs {
                ArchInfCoeffs::Geometric { c, b } => write!(f, "archinf-geom:{a},{c},{b}"),
                ArchInfCoeffs::Polynomial { c, b } => write!(f, "archinf-poly:{a},{c},{b}"),
                ArchInfCoeffs::Finite(v) => write!(f, "archinf:{a};{}", join(v)),
            },
            Self::ThresholdArch { a, b, c } => write!(f, "tarch:{a},{b},{c}"),
            Self::NonlinearArch { label, .. } => f.write_str(label),
            Self::AugmentedGarch { link, c, h, moment_condition } => {
                let name = match link {
                    Link::Identity => "augarch-id",
                    Link::Log => "augarch-log",
                    Link::Custom { .. } => "augarch-custom",
                };
                write!(f, "{name}:{};{}", join(c), join(h))?;
                if *moment_condition {
                    f.write_str(";declared")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| DeconvError::Config(format!("expected a number, got {t:?}")))
        })
        .collect()
}

fn exactly<const N: usize>(name: &str, s: &str) -> Result<[f64; N]> {
    let v = parse_list(s)?;
    v.try_into()
        .map_err(|v: Vec<f64>| DeconvError::Config(format!("{name} takes {N} parameters, got {}", v.len())))
}

impl FromStr for ProcessSpec {
    type Err = DeconvError;

    /// Formats: `arch1:a,b`, `garch:a,a1,b1` or `garch:a;a1,..;b1,..`,
    /// `archinf:a;a1,..`, `archinf-geom:a,C,b`, `archinf-poly:a,C,b`,
    /// `tarch:a,b,c`, `nlarch:a,b` (`f(x) = √(a + bx²)`), and
    /// `augarch-id:c0,c1,..;h0,h1,..[;declared]` or `augarch-log:…`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| DeconvError::Config(format!("process spec {s:?} needs the form name:params")))?;
        match name {
            "arch1" => {
                let [a, b] = exactly("arch1", rest)?;
                Ok(Self::Arch1 { a, b })
            }
            "garch" => {
                if rest.contains(';') {
                    let parts: Vec<&str> = rest.split(';').collect();
                    if parts.len() != 3 {
                        return Err(DeconvError::Config("garch takes a;a1,..;b1,..".into()));
                    }
                    let [a] = exactly("garch intercept", parts[0])?;
                    Ok(Self::Garch { a, alpha: parse_list(parts[1])?, beta: parse_list(parts[2])? })
                } else {
                    let [a, a1, b1] = exactly("garch", rest)?;
                    Ok(Self::Garch { a, alpha: vec![a1], beta: vec![b1] })
                }
            }
            "archinf" => {
                let (a, coeffs) = rest
                    .split_once(';')
                    .ok_or_else(|| DeconvError::Config("archinf takes a;a1,a2,..".into()))?;
                let [a] = exactly("archinf intercept", a)?;
                Ok(Self::ArchInf { a, coeffs: ArchInfCoeffs::Finite(parse_list(coeffs)?) })
            }
            "archinf-geom" => {
                let [a, c, b] = exactly("archinf-geom", rest)?;
                Ok(Self::ArchInf { a, coeffs: ArchInfCoeffs::Geometric { c, b } })
            }
            "archinf-poly" => {
                let [a, c, b] = exactly("archinf-poly", rest)?;
                Ok(Self::ArchInf { a, coeffs: ArchInfCoeffs::Polynomial { c, b } })
            }
            "tarch" => {
                let [a, b, c] = exactly("tarch", rest)?;
                Ok(Self::ThresholdArch { a, b, c })
            }
            "nlarch" => {
                let [a, b] = exactly("nlarch", rest)?;
                if !(a > 0.0 && b >= 0.0) {
                    return Err(DeconvError::Domain(format!("nlarch needs a > 0 and b ≥ 0, got {a}, {b}")));
                }
                Ok(Self::NonlinearArch {
                    f: Arc::new(move |x| (a + b * x * x).sqrt()),
                    declared_bound: b.sqrt(),
                    label: format!("nlarch:{a},{b}"),
                })
            }
            "augarch-id" | "augarch-log" => {
                let parts: Vec<&str> = rest.split(';').collect();
                if !(parts.len() == 2 || parts.len() == 3) {
                    return Err(DeconvError::Config(format!("{name} takes c0,c1,..;h0,h1,..[;declared]")));
                }
                let moment_condition = match parts.get(2).map(|p| p.trim()) {
                    None => false,
                    Some("declared") => true,
                    Some(other) => return Err(DeconvError::Config(format!("unknown flag {other:?}"))),
                };
                let link = if name == "augarch-id" { Link::Identity } else { Link::Log };
                Ok(Self::AugmentedGarch { link, c: parse_list(parts[0])?, h: parse_list(parts[1])?, moment_condition })
            }
            other => Err(DeconvError::Config(format!("unknown process family {other:?}"))),
        }
    }
}

/// Outcome of a stationarity check; failure is a value, not an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Stationarity {
    pub holds: bool,
    pub condition: String,
}

impl Stationarity {
    fn verdict(holds: bool, condition: String) -> Self {
        Self { holds, condition }
    }
}

pub fn check_stationarity(spec: &ProcessSpec) -> Stationarity {
    match spec {
        ProcessSpec::Arch1 { a, b } => {
            if !(*a >= 0.0 && *b >= 0.0) {
                return Stationarity::verdict(false, format!("a ≥ 0 and b ≥ 0 (a = {a}, b = {b})"));
            }
            Stationarity::verdict(*b < 1.0, format!("b < 1 (b = {b})"))
        }
        ProcessSpec::Garch { a, alpha, beta } => {
            if !(*a > 0.0) || alpha.iter().chain(beta).any(|v| !(*v >= 0.0)) {
                return Stationarity::verdict(false, "a > 0 and all a_i, b_j ≥ 0".into());
            }
            let s: f64 = alpha.iter().chain(beta).sum();
            Stationarity::verdict(s < 1.0, format!("Σa_i + Σb_j < 1 (sum = {s})"))
        }
        ProcessSpec::ArchInf { a, coeffs } => {
            if !(*a >= 0.0) {
                return Stationarity::verdict(false, format!("a ≥ 0 (a = {a})"));
            }
            if let Err(e) = coeffs.validate() {
                return Stationarity::verdict(false, e.to_string());
            }
            let (lo, hi) = coeffs.sum_bounds();
            if hi < 1.0 {
                Stationarity::verdict(true, format!("Σa_j < 1 (sum ≤ {hi})"))
            } else if lo >= 1.0 {
                Stationarity::verdict(false, format!("Σa_j < 1 (sum ≥ {lo})"))
            } else {
                Stationarity::verdict(false, format!("Σa_j < 1 could not be certified (sum in [{lo}, {hi}])"))
            }
        }
        ProcessSpec::ThresholdArch { a, b, c } => {
            if !(*a > 0.0 && *b > 0.0 && *c > 0.0) {
                return Stationarity::verdict(false, format!("a, b, c > 0 (a = {a}, b = {b}, c = {c})"));
            }
            let m = b.max(*c);
            Stationarity::verdict(m < 1.0, format!("b ∨ c < 1 (b ∨ c = {m})"))
        }
        ProcessSpec::NonlinearArch { declared_bound, .. } => Stationarity::verdict(
            *declared_bound < 1.0,
            format!("limsup |f(x)/x| < 1 (declared {declared_bound}, not verified)"),
        ),
        ProcessSpec::AugmentedGarch { c, moment_condition, .. } => {
            let c0 = poly(c, 0.0);
            if c0.abs() >= 1.0 {
                return Stationarity::verdict(false, format!("|c(0)| < 1 (c(0) = {c0})"));
            }
            Stationarity::verdict(
                *moment_condition,
                "E|c(η)|^s < 1 and E|h(η)|^s < ∞ for some s ≥ 1 (declared by the caller)".into(),
            )
        }
    }
}

/// A simulated path after burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `ln σ_t²`.
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// `E σ²` where a closed form exists.
pub fn stationary_mean_variance(spec: &ProcessSpec) -> Option<f64> {
    match spec {
        ProcessSpec::Arch1 { a, b } => Some(a / (1.0 - b)),
        ProcessSpec::Garch { a, alpha, beta } => Some(a / (1.0 - alpha.iter().sum::<f64>() - beta.iter().sum::<f64>())),
        ProcessSpec::ArchInf { a, coeffs } => Some(a / (1.0 - coeffs.sum_bounds().1)),
        _ => None,
    }
}

fn bad_state(index: usize, v: f64) -> DeconvError {
    DeconvError::Simulation {
        index,
        reason: format!("σ² = {v} is not finite and positive"),
    }
}

/// Runs `burn_in + n` steps and keeps the last `n`. Indices in errors count
/// from the first burn-in step.
pub fn simulate(spec: &ProcessSpec, law: InnovationLaw, n: usize, burn_in: usize, seed: u64) -> Result<Path> {
    let mut rng = rng_from_seed(seed);
    simulate_with(spec, law, n, burn_in, &mut rng)
}

pub fn simulate_with<R: Rng + ?Sized>(spec: &ProcessSpec, law: InnovationLaw, n: usize, burn_in: usize, rng: &mut R) -> Result<Path> {
    if n == 0 {
        return Err(DeconvError::Domain("path length must be at least 1".into()));
    }
    let st = check_stationarity(spec);
    if !st.holds {
        return Err(DeconvError::Nonstationary(st.condition));
    }
    if let InnovationLaw::StudentT { df } = law {
        InnovationLaw::student_t(df)?;
    }
    let total = burn_in + n;
    let mut path = Path {
        y: Vec::with_capacity(n),
        sigma: Vec::with_capacity(n),
        x: Vec::with_capacity(n),
        eta: Vec::with_capacity(n),
    };
    let keep = |t: usize, s2: f64, eta: f64, path: &mut Path| -> Result<f64> {
        if !(s2.is_finite() && s2 > 0.0) {
            return Err(bad_state(t, s2));
        }
        let sigma = s2.sqrt();
        let y = sigma * eta;
        if t >= burn_in {
            path.y.push(y);
            path.sigma.push(sigma);
            path.x.push((sigma * sigma).ln());
            path.eta.push(eta);
        }
        Ok(y)
    };

    match spec {
        ProcessSpec::Arch1 { a, b } => {
            let mut y_prev_sq = stationary_mean_variance(spec).unwrap();
            for t in 0..total {
                let s2 = a + b * y_prev_sq;
                let eta = law.sample(rng);
                let y = keep(t, s2, eta, &mut path)?;
                y_prev_sq = y * y;
            }
        }
        ProcessSpec::Garch { a, alpha, beta } => {
            let mean = stationary_mean_variance(spec).unwrap();
            let mut ysq: VecDeque<f64> = std::iter::repeat_n(mean, alpha.len()).collect();
            let mut s2q: VecDeque<f64> = std::iter::repeat_n(mean, beta.len()).collect();
            for t in 0..total {
                let s2 = a
                    + alpha.iter().zip(&ysq).map(|(c, v)| c * v).sum::<f64>()
                    + beta.iter().zip(&s2q).map(|(c, v)| c * v).sum::<f64>();
                let eta = law.sample(rng);
                let y = keep(t, s2, eta, &mut path)?;
                if !alpha.is_empty() {
                    ysq.pop_back();
                    ysq.push_front(y * y);
                }
                if !beta.is_empty() {
                    s2q.pop_back();
                    s2q.push_front(s2);
                }
            }
        }
        ProcessSpec::ArchInf { a, coeffs } => {
            let lags = coeffs.truncation().max(1);
            let w: Vec<f64> = (1..=lags).map(|j| coeffs.coeff(j)).collect();
            let mean = stationary_mean_variance(spec).unwrap();
            // ring buffer of past Y², newest at `head`
            let mut hist = vec![mean; lags];
            let mut head = 0usize;
            for t in 0..total {
                let mut s2 = *a;
                for (j, c) in w.iter().enumerate() {
                    s2 += c * hist[(head + j) % lags];
                }
                let eta = law.sample(rng);
                let y = keep(t, s2, eta, &mut path)?;
                head = (head + lags - 1) % lags;
                hist[head] = y * y;
            }
        }
        ProcessSpec::ThresholdArch { a, b, c } => {
            let mut sigma = *a;
            for t in 0..total {
                let eta = law.sample(rng);
                keep(t, sigma * sigma, eta, &mut path)?;
                let gain = if eta > 0.0 {
                    b * eta
                } else if eta < 0.0 {
                    -c * eta
                } else {
                    0.0
                };
                sigma = a + sigma * gain;
            }
        }
        ProcessSpec::NonlinearArch { f, .. } => {
            let mut sigma = f(0.0);
            for t in 0..total {
                let eta = law.sample(rng);
                keep(t, sigma * sigma, eta, &mut path)?;
                sigma = f(sigma * eta);
            }
        }
        ProcessSpec::AugmentedGarch { link, c, h, .. } => {
            let c0 = poly(c, 0.0);
            let mut level = poly(h, 0.0) / (1.0 - c0);
            for t in 0..total {
                let s2 = link.inverse(level);
                let eta = law.sample(rng);
                keep(t, s2, eta, &mut path)?;
                level = poly(c, eta) * level + poly(h, eta);
                if !level.is_finite() {
                    return Err(bad_state(t + 1, level));
                }
            }
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn garch_ref() -> ProcessSpec {
        "garch:0.1,0.3,0.6".parse().unwrap()
    }

    #[test]
    fn stationarity_examples() {
        assert!(check_stationarity(&garch_ref()).holds);
        assert!(check_stationarity(&ProcessSpec::ThresholdArch { a: 0.1, b: 0.4, c: 0.3 }).holds);
        // C b/(1 − b) = 1.2
        let geo = ProcessSpec::ArchInf { a: 0.1, coeffs: ArchInfCoeffs::Geometric { c: 1.2, b: 0.5 } };
        let st = check_stationarity(&geo);
        assert!(!st.holds);
        assert!(st.condition.contains("Σa_j"));
        assert!(!check_stationarity(&"arch1:1,1.2".parse().unwrap()).holds);
        assert!(check_stationarity(&"archinf-poly:0.2,0.5,3".parse().unwrap()).holds);
        assert!(!check_stationarity(&"archinf-poly:0.2,1,1.5".parse().unwrap()).holds);
        assert!(!check_stationarity(&"augarch-log:0.9;0.1,0.2".parse().unwrap()).holds);
        assert!(check_stationarity(&"augarch-log:0.9;0.1,0.2;declared".parse().unwrap()).holds);
    }

    #[test]
    fn degenerate_arch1_returns_innovations() {
        let p = simulate(&"arch1:1,0".parse().unwrap(), InnovationLaw::StandardNormal, 100, 10, 7).unwrap();
        assert!(p.sigma.iter().all(|&s| s == 1.0));
        assert!(p.x.iter().all(|&x| x == 0.0));
        assert_eq!(p.y, p.eta);
    }

    #[test]
    fn same_seed_same_path() {
        let a = simulate(&garch_ref(), InnovationLaw::StandardNormal, 500, 100, 42).unwrap();
        let b = simulate(&garch_ref(), InnovationLaw::StandardNormal, 500, 100, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&garch_ref(), InnovationLaw::StandardNormal, 500, 100, 43).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn model_identity_is_exact() {
        for spec in ["garch:0.1,0.3,0.6", "tarch:0.2,0.4,0.3", "archinf-geom:0.1,0.4,0.5", "nlarch:0.5,0.3", "augarch-log:0.8;-0.1,0,0.1;declared"] {
            let spec: ProcessSpec = spec.parse().unwrap();
            let p = simulate(&spec, InnovationLaw::UniformSymmetric, 300, 50, 1).unwrap();
            for t in 0..p.len() {
                assert_eq!(p.y[t], p.sigma[t] * p.eta[t]);
                assert_eq!(p.x[t], (p.sigma[t] * p.sigma[t]).ln());
            }
        }
    }

    #[test]
    fn nonstationary_spec_is_refused() {
        let err = simulate(&"garch:0.1,0.5,0.6".parse().unwrap(), InnovationLaw::StandardNormal, 10, 0, 0).unwrap_err();
        assert_eq!(err.code(), "NONSTATIONARY");
    }

    #[test]
    fn overflow_reports_index() {
        let spec = ProcessSpec::AugmentedGarch {
            link: Link::Log,
            c: vec![0.5, 0.0, 0.0],
            h: vec![0.0, 0.0, 0.0, 0.0, 50.0],
            moment_condition: true,
        };
        let err = simulate(&spec, InnovationLaw::StudentT { df: 3.0 }, 10_000, 0, 3).unwrap_err();
        assert_eq!(err.code(), "SIMULATION_ERROR");
    }

    #[test]
    fn innovation_moments() {
        let mut rng = rng_from_seed(11);
        for law in [InnovationLaw::StandardNormal, InnovationLaw::student_t(6.0).unwrap(), InnovationLaw::UniformSymmetric] {
            let n = 200_000;
            let v: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.02, "{law}: mean {mean}");
            assert!((var - 1.0).abs() < 0.04, "{law}: var {var}");
        }
        assert!(InnovationLaw::student_t(2.0).is_err());
        assert_eq!("student_t:5".parse::<InnovationLaw>().unwrap(), InnovationLaw::StudentT { df: 5.0 });
        assert!("cauchy".parse::<InnovationLaw>().is_err());
    }

    #[test]
    fn archinf_truncation_and_tails() {
        let g = ArchInfCoeffs::Geometric { c: 0.4, b: 0.5 };
        let j = g.truncation();
        assert!(g.tail(j) < ARCH_INF_TAIL && g.tail(j - 1) >= ARCH_INF_TAIL);
        let f = ArchInfCoeffs::Finite(vec![0.2, 0.1, 0.05]);
        assert_eq!(f.truncation(), 3);
        assert!((f.tail(1) - 0.15).abs() < 1e-15);
        let (lo, hi) = ArchInfCoeffs::Polynomial { c: 0.5, b: 3.0 }.sum_bounds();
        // 0.5 ζ(3)
        let z3 = 1.202_056_903_159_594;
        assert!(lo <= 0.5 * z3 + 1e-12 && hi >= 0.5 * z3 - 1e-12 && hi - lo < 1e-9);
    }

    #[test]
    fn spec_round_trip() {
        for s in ["arch1:1,0.5", "garch:0.1;0.3;0.6", "garch:0.1;0.1,0.05;0.5,0.1", "archinf:0.1;0.2,0.1", "tarch:0.2,0.4,0.3", "archinf-geom:0.1,0.4,0.5"] {
            let spec: ProcessSpec = s.parse().unwrap();
            let again: ProcessSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec.to_string(), again.to_string());
        }
        assert!("garch:0.1,0.2".parse::<ProcessSpec>().is_err());
        assert!("foo:1".parse::<ProcessSpec>().is_err());
    }

    #[test]
    fn replication_seeds_differ() {
        assert_eq!(replication_seed(5, 0), 5);
        assert_ne!(replication_seed(5, 1), replication_seed(5, 2));
    }
}
