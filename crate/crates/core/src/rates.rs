//! Theoretical bias bounds and oracle model indices for smoothness classes.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{DeconvError, Result};
use crate::noise::NoiseModel;
use crate::selection::gamma_fn;

/// Class `S_{s,r,b}(C₁)` of densities with `∫|g*|² (x²+1)^s e^{2b|x|^r} ≤ C₁`,
/// plus the second-moment bound `M₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessSpec {
    pub s: f64,
    pub r: f64,
    pub b: f64,
    pub c1: f64,
    pub m2: f64,
}

impl SmoothnessSpec {
    pub fn new(s: f64, r: f64, b: f64, c1: f64, m2: f64) -> Result<Self> {
        let spec = Self { s, r, b, c1, m2 };
        if !(s >= 0.0 && r >= 0.0 && b >= 0.0) {
            return Err(DeconvError::Domain(format!("s, r, b must be nonnegative, got {s}, {r}, {b}")));
        }
        if !(c1 > 0.0 && m2 > 0.0) {
            return Err(DeconvError::Domain(format!("C1 and M2 must be positive, got {c1}, {m2}")));
        }
        if r > 0.0 && b == 0.0 {
            return Err(DeconvError::Domain("r > 0 requires b > 0".into()));
        }
        Ok(spec)
    }
}

/// `‖g − g_m‖² ≤ (C₁/2π) (m²π² + 1)^{−s} exp{−2bπ^r m^r}`.
pub fn bias_bound(spec: &SmoothnessSpec, m: f64) -> f64 {
    spec.c1 / (2.0 * PI) * (m * m * PI * PI + 1.0).powf(-spec.s) * (-2.0 * spec.b * (PI * m).powf(spec.r)).exp()
}

/// Shape of the rate reported with `m̆`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateForm {
    /// `n^{exponent}`.
    Power { exponent: f64 },
    /// `(ln n)^{exponent}`.
    LogPower { exponent: f64 },
    /// `(ln n)^{exponent} / n`.
    LogOverN { exponent: f64 },
    /// Bias bound plus `Γ(m̆)/n` at the implicit root.
    Implicit,
}

impl fmt::Display for RateForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { exponent } => write!(f, "n^({exponent})"),
            Self::LogPower { exponent } => write!(f, "(ln n)^({exponent})"),
            Self::LogOverN { exponent } => write!(f, "(ln n)^({exponent})/n"),
            Self::Implicit => f.write_str("bias(m)+Gamma(m)/n"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRate {
    pub m_breve: f64,
    pub rate: f64,
    pub form: RateForm,
}

impl OracleRate {
    pub fn pi_m(&self) -> f64 {
        PI * self.m_breve
    }
}

/// Left side of the implicit equation `m^{2s+2γ+1−r} exp{2μ(πm)^δ + 2bπ^r m^r} = n`, on the log scale.
pub fn implicit_log_lhs(spec: &SmoothnessSpec, nm: &NoiseModel, m: f64) -> f64 {
    let p = nm.smoothness();
    (2.0 * spec.s + 2.0 * p.gamma + 1.0 - spec.r) * m.ln()
        + 2.0 * p.mu * (PI * m).powf(p.delta)
        + 2.0 * spec.b * PI.powf(spec.r) * m.powf(spec.r)
}

pub fn oracle_m_theoretical(spec: &SmoothnessSpec, nm: &NoiseModel, n: usize) -> Result<OracleRate> {
    if n < 3 {
        return Err(DeconvError::Domain(format!("rates need n ≥ 3, got {n}")));
    }
    oracle_m_at_log_n(spec, nm, (n as f64).ln())
}

/// Same as [`oracle_m_theoretical`] with the sample size given as `ln n`,
/// for sizes beyond the integer range.
pub fn oracle_m_at_log_n(spec: &SmoothnessSpec, nm: &NoiseModel, ln_n: f64) -> Result<OracleRate> {
    if !(ln_n >= 3f64.ln()) {
        return Err(DeconvError::Domain(format!("rates need n ≥ 3, got ln n = {ln_n}")));
    }
    let p = nm.smoothness();
    let nf = ln_n.exp();
    let (s, gamma) = (spec.s, p.gamma);
    let out = match (spec.r > 0.0, p.delta > 0.0) {
        (false, false) => {
            let d = 2.0 * s + 2.0 * gamma + 1.0;
            let exponent = -2.0 * s / d;
            OracleRate { m_breve: nf.powf(1.0 / d) / PI, rate: nf.powf(exponent), form: RateForm::Power { exponent } }
        }
        (false, true) => {
            let exponent = -2.0 * s / p.delta;
            OracleRate {
                m_breve: (ln_n / (2.0 * p.mu + 1.0)).powf(1.0 / p.delta) / PI,
                rate: ln_n.powf(exponent),
                form: RateForm::LogPower { exponent },
            }
        }
        (true, false) => {
            let exponent = (2.0 * gamma + 1.0) / spec.r;
            OracleRate {
                m_breve: (ln_n / (2.0 * spec.b)).powf(1.0 / spec.r) / PI,
                rate: ln_n.powf(exponent) / nf,
                form: RateForm::LogOverN { exponent },
            }
        }
        (true, true) => {
            let m = solve_implicit(spec, nm, ln_n)?;
            OracleRate { m_breve: m, rate: bias_bound(spec, m) + gamma_fn(nm, m)? / nf, form: RateForm::Implicit }
        }
    };
    Ok(out)
}

fn solve_implicit(spec: &SmoothnessSpec, nm: &NoiseModel, ln_n: f64) -> Result<f64> {
    let f = |m: f64| implicit_log_lhs(spec, nm, m) - ln_n;
    let mut lo = 1e-6;
    if f(lo) >= 0.0 {
        return Err(DeconvError::Numerical(format!("implicit equation has no root above {lo}")));
    }
    let mut hi = 1.0;
    let mut tries = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 || !f(hi).is_finite() {
            return Err(DeconvError::Numerical("could not bracket the implicit equation".into()));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-15 * hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
