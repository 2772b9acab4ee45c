//! Known error densities f_ε and their Fourier transforms.
//!
//! The transform convention throughout the crate is `f*(x) = ∫ e^{ixt} f(t) dt`.
//! Every model carries the constants of the two-sided envelope
//!
//! ```text
//! κ₀ (x²+1)^{-γ/2} e^{-μ|x|^δ} ≤ |f*(x)| ≤ κ₀′ (x²+1)^{-γ/2} e^{-μ|x|^δ}
//! ```
//!
//! which the penalty constants depend on.

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{DeconvError, Result};
use crate::special;

/// Decay parameters of |f*| and the envelope constants around them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams {
    pub gamma: f64,
    pub mu: f64,
    pub delta: f64,
    pub kappa0: f64,
    pub kappa0_prime: f64,
}

impl SmoothnessParams {
    pub fn new(gamma: f64, mu: f64, delta: f64, kappa0: f64, kappa0_prime: f64) -> Result<Self> {
        let p = Self {
            gamma,
            mu,
            delta,
            kappa0,
            kappa0_prime,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.gamma, self.mu, self.delta, self.kappa0, self.kappa0_prime];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(DeconvError::Domain("smoothness parameters must be finite".into()));
        }
        if self.gamma < 0.0 || self.mu < 0.0 || self.delta < 0.0 {
            return Err(DeconvError::Domain("gamma, mu and delta must be nonnegative".into()));
        }
        if self.kappa0 <= 0.0 || self.kappa0_prime <= 0.0 {
            return Err(DeconvError::Domain("kappa0 and kappa0' must be positive".into()));
        }
        if self.kappa0 > self.kappa0_prime {
            return Err(DeconvError::Domain(format!(
                "kappa0 = {} exceeds kappa0' = {}",
                self.kappa0, self.kappa0_prime
            )));
        }
        if self.delta == 0.0 && self.gamma <= 0.5 {
            return Err(DeconvError::Domain(
                "ordinary smooth noise (delta = 0) needs gamma > 1/2 for square integrability".into(),
            ));
        }
        if self.delta > 0.0 && self.mu <= 0.0 {
            return Err(DeconvError::Domain("delta > 0 requires mu > 0".into()));
        }
        Ok(())
    }

    /// `(x²+1)^{-γ/2} e^{-μ|x|^δ}`.
    pub fn envelope(&self, x: f64) -> f64 {
        (x * x + 1.0).powf(-0.5 * self.gamma) * (-self.mu * x.abs().powf(self.delta)).exp()
    }

    pub fn is_super_smooth(&self) -> bool {
        self.delta > 0.0
    }
}

/// A tabulated characteristic function on `x ≥ 0`, extended to `x < 0` by
/// Hermitian symmetry and linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCharfn {
    xs: Vec<f64>,
    values: Vec<Complex64>,
}

impl TabulatedCharfn {
    pub fn new(xs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(DeconvError::Config(
                "tabulated charfn needs at least two (x, value) pairs of equal length".into(),
            ));
        }
        if xs[0] != 0.0 {
            return Err(DeconvError::Config("tabulated charfn must start at x = 0".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DeconvError::Config("tabulated abscissae must be strictly increasing".into()));
        }
        if (values[0] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(DeconvError::Domain("a characteristic function equals 1 at x = 0".into()));
        }
        if values.iter().any(|v| v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite()) {
            return Err(DeconvError::Domain(
                "tabulated charfn must be finite and nonvanishing".into(),
            ));
        }
        Ok(Self { xs, values })
    }

    pub fn extent(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn eval(&self, x: f64) -> Complex64 {
        let ax = x.abs();
        if ax > self.extent() {
            return Complex64::new(f64::NAN, f64::NAN);
        }
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&ax).unwrap()) {
            Ok(i) => return self.oriented(self.values[i], x),
            Err(i) => i,
        };
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let w = (ax - x0) / (x1 - x0);
        let v = self.values[i - 1] * (1.0 - w) + self.values[i] * w;
        self.oriented(v, x)
    }

    fn oriented(&self, v: Complex64, x: f64) -> Complex64 {
        if x < 0.0 {
            v.conj()
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kernel {
    /// Law of ln(η²) for standard normal η.
    LogChiSquared,
    Laplace { scale: f64 },
    Gaussian { sd: f64 },
    Cauchy { scale: f64 },
    Tabulated(TabulatedCharfn),
}

/// A known error density, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    kernel: Kernel,
    density_sup: f64,
    smoothness: SmoothnessParams,
    label: String,
}

impl NoiseModel {
    pub fn log_chi_squared() -> Self {
        Self {
            kernel: Kernel::LogChiSquared,
            density_sup: (2.0 * PI * E).powf(-0.5),
            smoothness: SmoothnessParams {
                gamma: 0.0,
                mu: PI / 2.0,
                delta: 1.0,
                kappa0: 1.0,
                kappa0_prime: SQRT_2,
            },
            label: "log_chi_squared".into(),
        }
    }

    /// Laplace density `e^{-|t|/b} / (2b)`, with `f*(x) = 1/(1 + b²x²)`.
    pub fn laplace(scale: f64) -> Result<Self> {
        positive("laplace scale", scale)?;
        let inv2 = 1.0 / (scale * scale);
        Ok(Self {
            kernel: Kernel::Laplace { scale },
            density_sup: 0.5 / scale,
            smoothness: SmoothnessParams {
                gamma: 2.0,
                mu: 0.0,
                delta: 0.0,
                kappa0: inv2.min(1.0),
                kappa0_prime: inv2.max(1.0),
            },
            label: format!("laplace:{scale}"),
        })
    }

    pub fn gaussian(sd: f64) -> Result<Self> {
        positive("gaussian sd", sd)?;
        Ok(Self {
            kernel: Kernel::Gaussian { sd },
            density_sup: 1.0 / (sd * (2.0 * PI).sqrt()),
            smoothness: SmoothnessParams {
                gamma: 0.0,
                mu: 0.5 * sd * sd,
                delta: 2.0,
                kappa0: 1.0,
                kappa0_prime: 1.0,
            },
            label: format!("gaussian:{sd}"),
        })
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        positive("cauchy scale", scale)?;
        Ok(Self {
            kernel: Kernel::Cauchy { scale },
            density_sup: 1.0 / (PI * scale),
            smoothness: SmoothnessParams {
                gamma: 0.0,
                mu: scale,
                delta: 1.0,
                kappa0: 1.0,
                kappa0_prime: 1.0,
            },
            label: format!("cauchy:{scale}"),
        })
    }

    /// A user-supplied noise model. The declared smoothness is trusted here;
    /// run [`validate_sandwich`] to check it against the table.
    pub fn tabulated(
        label: impl Into<String>,
        charfn: TabulatedCharfn,
        density_sup: f64,
        smoothness: SmoothnessParams,
    ) -> Result<Self> {
        positive("density supremum", density_sup)?;
        smoothness.validate()?;
        Ok(Self {
            kernel: Kernel::Tabulated(charfn),
            density_sup,
            smoothness,
            label: label.into(),
        })
    }

    /// Builtin lookup by label: `log_chi_squared`, `laplace:<scale>`,
    /// `gaussian:<sd>` or `cauchy:<scale>`.
    pub fn builtin(label: &str) -> Result<Self> {
        let label = label.trim();
        let (name, arg) = match label.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (label, None),
        };
        let param = |default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => a.parse::<f64>().map_err(|_| {
                    DeconvError::Config(format!("noise parameter `{a}` is not a number"))
                }),
            }
        };
        match name {
            "log_chi_squared" | "logchi2" => {
                if arg.is_some() {
                    return Err(DeconvError::Config(
                        "log_chi_squared takes no parameter".into(),
                    ));
                }
                Ok(Self::log_chi_squared())
            }
            "laplace" => Self::laplace(param(1.0)?),
            "gaussian" | "normal" => Self::gaussian(param(1.0)?),
            "cauchy" => Self::cauchy(param(1.0)?),
            other => Err(DeconvError::Config(format!("unknown noise model `{other}`"))),
        }
    }

    /// Replace the declared smoothness metadata.
    pub fn with_smoothness(mut self, smoothness: SmoothnessParams) -> Result<Self> {
        smoothness.validate()?;
        self.smoothness = smoothness;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn smoothness(&self) -> &SmoothnessParams {
        &self.smoothness
    }

    pub fn density_sup(&self) -> f64 {
        self.density_sup
    }

    /// Largest |x| at which `charfn` is defined (infinite for builtins).
    pub fn spectral_extent(&self) -> f64 {
        match &self.kernel {
            Kernel::Tabulated(t) => t.extent(),
            _ => f64::INFINITY,
        }
    }

    pub fn charfn(&self, x: f64) -> Complex64 {
        match &self.kernel {
            Kernel::LogChiSquared => {
                // 2^{ix} Γ(1/2 + ix) / √π: exact modulus, Lanczos phase
                let phase = x * std::f64::consts::LN_2 + special::ln_gamma(Complex64::new(0.5, x)).im;
                Complex64::from_polar(special::half_gamma_modulus(x), phase)
            }
            Kernel::Laplace { scale } => Complex64::new(1.0 / (1.0 + scale * scale * x * x), 0.0),
            Kernel::Gaussian { sd } => Complex64::new((-0.5 * sd * sd * x * x).exp(), 0.0),
            Kernel::Cauchy { scale } => Complex64::new((-scale * x.abs()).exp(), 0.0),
            Kernel::Tabulated(t) => t.eval(x),
        }
    }

    pub fn charfn_modulus(&self, x: f64) -> f64 {
        match &self.kernel {
            Kernel::LogChiSquared => special::half_gamma_modulus(x),
            _ => self.charfn(x).norm(),
        }
    }

    /// `1/|f*(x)|²`, evaluated without forming the tiny modulus when a closed
    /// form exists. May be `+inf` when it overflows.
    pub fn inverse_modulus_sq(&self, x: f64) -> f64 {
        match &self.kernel {
            Kernel::LogChiSquared => (PI * x).cosh(),
            Kernel::Laplace { scale } => {
                let v = 1.0 + scale * scale * x * x;
                v * v
            }
            Kernel::Gaussian { sd } => (sd * sd * x * x).exp(),
            Kernel::Cauchy { scale } => (2.0 * scale * x.abs()).exp(),
            Kernel::Tabulated(_) => 1.0 / self.charfn(x).norm_sqr(),
        }
    }

    /// Density of ε where a closed form is known.
    pub fn density(&self, t: f64) -> Option<f64> {
        match &self.kernel {
            Kernel::LogChiSquared => Some((0.5 * t - 0.5 * t.exp()).exp() / (2.0 * PI).sqrt()),
            Kernel::Laplace { scale } => Some((-t.abs() / scale).exp() / (2.0 * scale)),
            Kernel::Gaussian { sd } => Some(special::normal_pdf(t / sd) / sd),
            Kernel::Cauchy { scale } => Some(1.0 / (PI * scale * (1.0 + (t / scale).powi(2)))),
            Kernel::Tabulated(_) => None,
        }
    }

    /// Draw one ε. Tabulated models have no sampler.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match &self.kernel {
            Kernel::LogChiSquared => {
                let eta: f64 = StandardNormal.sample(rng);
                Ok((eta * eta).ln())
            }
            Kernel::Laplace { scale } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                Ok(-scale * u.signum() * (1.0 - 2.0 * u.abs()).ln())
            }
            Kernel::Gaussian { sd } => {
                let z: f64 = StandardNormal.sample(rng);
                Ok(sd * z)
            }
            Kernel::Cauchy { scale } => {
                let u: f64 = rng.random::<f64>();
                Ok(scale * (PI * (u - 0.5)).tan())
            }
            Kernel::Tabulated(_) => Err(DeconvError::Config(format!(
                "noise model `{}` is tabulated and cannot be sampled",
                self.label
            ))),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for NoiseModel {
    type Err = DeconvError;

    fn from_str(s: &str) -> Result<Self> {
        Self::builtin(s)
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(DeconvError::Domain(format!("{what} must be positive, got {v}")))
    }
}

/// Worst relative violation of the declared envelope on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub worst_violation: f64,
    pub worst_at: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.worst_violation == 0.0
    }
}

// Relative violations this small are floating-point noise in the two
// evaluations of the same closed form.
const SANDWICH_ROUNDING_FLOOR: f64 = 1e-13;

pub fn validate_sandwich(nm: &NoiseModel, grid: &[f64]) -> Result<SandwichReport> {
    if grid.is_empty() {
        return Err(DeconvError::Domain("sandwich grid is empty".into()));
    }
    let p = nm.smoothness();
    let mut report = SandwichReport {
        worst_violation: 0.0,
        worst_at: grid[0],
    };
    for &x in grid {
        let env = p.envelope(x);
        let lower = p.kappa0 * env;
        let upper = p.kappa0_prime * env;
        let modulus = nm.charfn_modulus(x);
        let below = if lower > 0.0 { (lower - modulus) / lower } else { 0.0 };
        let above = if upper > 0.0 {
            (modulus - upper) / upper
        } else if modulus > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let v = below.max(above);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > SANDWICH_ROUNDING_FLOOR && v > report.worst_violation {
            report.worst_violation = v;
            report.worst_at = x;
        }
    }
    Ok(report)
}
