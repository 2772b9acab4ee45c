//! Coupling and dependence-rate calculators.
//!
//! Everything here is a rate "up to the O-constant"; nothing feeds the
//! estimator.

use std::fmt;

use crate::error::{DeconvError, Result};
use crate::noise::SmoothnessParams;
use crate::processes::{check_stationarity, ArchInfCoeffs, InnovationLaw, ProcessSpec};

/// `min_{1≤k≤n} c^{n/k} + tail(k)` together with the minimizing `k`.
pub fn arch_inf_delta_n_argmin<F: Fn(usize) -> f64>(c: f64, tail: F, n: usize) -> Result<(f64, usize)> {
    if !(c > 0.0 && c < 1.0) {
        return Err(DeconvError::Domain(format!("c must lie in (0, 1), got {c}")));
    }
    if n == 0 {
        return Err(DeconvError::Domain("n must be at least 1".into()));
    }
    let ln_c = c.ln();
    let mut best = (f64::INFINITY, 1);
    for k in 1..=n {
        let v = (ln_c * n as f64 / k as f64).exp() + tail(k);
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

pub fn arch_inf_delta_n<F: Fn(usize) -> f64>(c: f64, tail: F, n: usize) -> Result<f64> {
    arch_inf_delta_n_argmin(c, tail, n).map(|(v, _)| v)
}

/// `δ_n` for an ARCH(∞) coefficient family, with `c = Σ a_j`.
pub fn arch_inf_delta_for(coeffs: &ArchInfCoeffs, n: usize) -> Result<f64> {
    let (_, c) = coeffs.sum_bounds();
    arch_inf_delta_n(c, |k| coeffs.tail(k), n)
}

/// `τ_∞` rate `δ^{(1−ρ)/(2−ρ)} |ln δ|^{(1+α)/(2−ρ)}`.
pub fn tau_from_delta(delta_n: f64, rho: f64, alpha: f64) -> Result<f64> {
    if !(delta_n > 0.0 && delta_n < 1.0) {
        return Err(DeconvError::Domain(format!("δ_n must lie in (0, 1), got {delta_n}")));
    }
    check_profile(rho, alpha)?;
    let d = 2.0 - rho;
    Ok(delta_n.powf((1.0 - rho) / d) * delta_n.ln().abs().powf((1.0 + alpha) / d))
}

/// `4 E(σ₀²) κⁿ` for Lipschitz Markov kernels.
pub fn markov_delta_n(kappa: f64, sigma0_sq_mean: f64, n: u32) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(DeconvError::Domain(format!("κ must lie in (0, 1), got {kappa}")));
    }
    if !(sigma0_sq_mean > 0.0) {
        return Err(DeconvError::Domain(format!("E σ₀² must be positive, got {sigma0_sq_mean}")));
    }
    Ok(4.0 * sigma0_sq_mean * kappa.powi(n as i32))
}

fn check_profile(rho: f64, alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(DeconvError::Domain(format!("ρ must lie in [0, 1), got {rho}")));
    }
    if !(alpha >= 0.0) {
        return Err(DeconvError::Domain(format!("α must be nonnegative, got {alpha}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum MixingClass {
    GeometricBeta,
    GeometricTau,
    /// `τ_∞(n) = O(κ^{√n})`.
    SubgeometricTau,
    /// `τ_∞(n) = O(n^{−exponent} (ln n)^{log_exponent})`.
    PolynomialTau { exponent: f64, log_exponent: f64 },
    Unknown,
}

impl fmt::Display for MixingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GeometricBeta => f.write_str("geometric_beta"),
            Self::GeometricTau => f.write_str("geometric_tau"),
            Self::SubgeometricTau => f.write_str("subgeometric_tau(kappa^sqrt(n))"),
            Self::PolynomialTau { exponent, log_exponent } => {
                write!(f, "polynomial_tau(n^-{exponent} (ln n)^{log_exponent})")
            }
            Self::Unknown => f.write_str("unknown"),
        }
    }
}

/// Density behaviour near zero, `max(f_σ², f_Y²)(x) ≤ C |ln x|^α x^{−ρ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceProfile {
    pub rho: f64,
    pub alpha: f64,
    pub class: MixingClass,
    pub condition: String,
}

/// Classification with the bounded-density exponents `ρ = 0`, `α = 1`.
pub fn classify_mixing(spec: &ProcessSpec, law: InnovationLaw) -> DependenceProfile {
    classify_mixing_with(spec, law, 0.0, 1.0).expect("default exponents are valid")
}

pub fn classify_mixing_with(spec: &ProcessSpec, law: InnovationLaw, rho: f64, alpha: f64) -> Result<DependenceProfile> {
    check_profile(rho, alpha)?;
    // all supported laws have a density positive around 0
    let _ = law;
    let out = |class, condition: String| DependenceProfile { rho, alpha, class, condition };
    let st = check_stationarity(spec);
    let profile = match spec {
        ProcessSpec::Arch1 { b, .. } if *b > 0.0 && *b < 1.0 => out(MixingClass::GeometricBeta, format!("0 < b < 1 (b = {b})")),
        ProcessSpec::Arch1 { b, .. } if *b == 0.0 && st.holds => out(MixingClass::GeometricTau, "finitely many nonzero lags".into()),
        ProcessSpec::Garch { .. } | ProcessSpec::ThresholdArch { .. } | ProcessSpec::NonlinearArch { .. } | ProcessSpec::AugmentedGarch { .. }
            if st.holds =>
        {
            out(MixingClass::GeometricBeta, st.condition)
        }
        ProcessSpec::ArchInf { coeffs, .. } if st.holds => match coeffs {
            ArchInfCoeffs::Finite(_) => out(MixingClass::GeometricTau, "a_j = 0 for j ≥ J".into()),
            ArchInfCoeffs::Geometric { b, .. } => out(MixingClass::SubgeometricTau, format!("a_j = O(b^j), b = {b}")),
            ArchInfCoeffs::Polynomial { b, .. } => out(
                MixingClass::PolynomialTau {
                    exponent: b * (1.0 - rho) / (2.0 - rho),
                    log_exponent: (b + 2.0) * (1.0 + alpha) / 2.0,
                },
                format!("a_j = O(j^-b), b = {b}"),
            ),
        },
        _ => out(MixingClass::Unknown, format!("condition fails: {}", st.condition)),
    };
    Ok(profile)
}

/// Which hypotheses of the adaptive risk bound a dependence class meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TheoremCases {
    /// β-mixing with `θ > 3`.
    pub beta: bool,
    /// `δ = 0`, `γ ≥ 3/2`, τ-dependence with `θ > 3 + 2/(1 + 2γ)`.
    pub tau_ordinary: bool,
    /// `δ > 0`, τ-dependence with `θ > 3`.
    pub tau_supersmooth: bool,
}

impl TheoremCases {
    pub fn any(&self) -> bool {
        self.beta || self.tau_ordinary || self.tau_supersmooth
    }
}

/// Coefficients decaying like `k^{−(1+θ)}` need `θ` beyond a threshold; a
/// polynomial rate `k^{−e}` with a log factor supports any `θ < e − 1`.
pub fn theorem_cases(class: &MixingClass, noise: &SmoothnessParams) -> TheoremCases {
    let tau_theta_exceeds = |threshold: f64| match class {
        MixingClass::GeometricBeta | MixingClass::GeometricTau | MixingClass::SubgeometricTau => true,
        MixingClass::PolynomialTau { exponent, .. } => exponent - 1.0 > threshold,
        MixingClass::Unknown => false,
    };
    TheoremCases {
        beta: matches!(class, MixingClass::GeometricBeta),
        tau_ordinary: noise.delta == 0.0
            && noise.gamma >= 1.5
            && tau_theta_exceeds(3.0 + 2.0 / (1.0 + 2.0 * noise.gamma)),
        tau_supersmooth: noise.delta > 0.0 && tau_theta_exceeds(3.0),
    }
}
