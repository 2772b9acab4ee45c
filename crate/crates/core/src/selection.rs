//! Penalized choice of the model index `m`.

use std::f64::consts::PI;

use log::warn;

use crate::error::{DeconvError, Result};
use crate::estimator::{DeconvEstimate, Sample, SpectralEstimator};
use crate::noise::{NoiseModel, SmoothnessParams};
use crate::projection::ModelIndex;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::spectral::SpectralQuadrature;

pub const DEFAULT_A: f64 = 2.0;
pub const DEFAULT_GRID_STEP: f64 = 0.25;

/// Leading constants of the penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub a: f64,
    /// Constant used when `δ < 1/3`.
    pub ordinary: f64,
    /// Constant used when `δ ≥ 1/3`.
    pub supersmooth: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            a: DEFAULT_A,
            ordinary: 192.0,
            supersmooth: 64.0,
        }
    }
}

impl PenaltyConfig {
    pub fn with_a(a: f64) -> Result<Self> {
        let cfg = Self { a, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(DeconvError::Domain(format!("penalty constant a must exceed 1, got {}", self.a)));
        }
        if !(self.ordinary > 0.0 && self.supersmooth > 0.0) {
            return Err(DeconvError::Domain("penalty constants must be positive".into()));
        }
        Ok(())
    }

    /// `κ_a = (a + 1)/(a − 1)`.
    pub fn kappa_a(&self) -> f64 {
        (self.a + 1.0) / (self.a - 1.0)
    }

    /// `C_a = max(κ_a², 2κ_a)`.
    pub fn c_a(&self) -> f64 {
        let k = self.kappa_a();
        (k * k).max(2.0 * k)
    }
}

fn check_m(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(DeconvError::Domain(format!("m must be positive, got {m}")))
    }
}

fn spectral_mean<F: Fn(f64) -> f64>(f: F, m: f64, what: &str) -> Result<f64> {
    check_m(m)?;
    // |f*| is even, so integrate over [0, πm] and double
    let v = integrate(f, 0.0, PI * m, &QuadratureConfig::default()).map_err(|e| match e {
        DeconvError::Range(_) => DeconvError::Range(format!(
            "{what} overflows at m = {m}; cap m by the admissible maximum m_n"
        )),
        other => other,
    })?;
    let out = v / PI;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(DeconvError::Range(format!("{what} overflows at m = {m}; cap m by the admissible maximum m_n")))
    }
}

/// `Δ(m) = (1/2π) ∫_{−πm}^{πm} |f*(x)|^{−2} dx`.
pub fn delta(nm: &NoiseModel, m: f64) -> Result<f64> {
    spectral_mean(|x| nm.inverse_modulus_sq(x), m, "Δ(m)")
}

/// `Δ_{1/2}(m) = (1/2π) ∫_{−πm}^{πm} |f*(x)|^{−1} dx`.
pub fn delta_half(nm: &NoiseModel, m: f64) -> Result<f64> {
    spectral_mean(|x| nm.inverse_modulus_sq(x).sqrt(), m, "Δ_1/2(m)")
}

/// `Γ(m) = (1 + (πm)²)^γ (πm)^{1−δ} exp{2μ(πm)^δ}`.
pub fn gamma_fn(nm: &NoiseModel, m: f64) -> Result<f64> {
    check_m(m)?;
    let p = nm.smoothness();
    let x = PI * m;
    let v = (1.0 + x * x).powf(p.gamma) * x.powf(1.0 - p.delta) * (2.0 * p.mu * x.powf(p.delta)).exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DeconvError::Range(format!("Γ(m) overflows at m = {m}")))
    }
}

/// `λ₁ = 1/(κ²πR)` with `R = 1` for `δ = 0` and `R = 2μδ` otherwise.
pub fn lambda1_with(p: &SmoothnessParams, kappa: f64) -> f64 {
    let r = if p.delta == 0.0 { 1.0 } else { 2.0 * p.mu * p.delta };
    1.0 / (kappa * kappa * PI * r)
}

pub fn lambda1(nm: &NoiseModel) -> f64 {
    lambda1_with(nm.smoothness(), nm.smoothness().kappa0)
}

pub fn lambda3(nm: &NoiseModel) -> f64 {
    let p = nm.smoothness();
    if p.mu == 0.0 {
        return 1.0;
    }
    let l1 = lambda1_with(p, p.kappa0);
    let l1_prime = lambda1_with(p, p.kappa0_prime);
    let inner = if p.delta <= 1.0 {
        (2f64.sqrt() + 8.0) * nm.density_sup() / p.kappa0 * l1.sqrt()
    } else {
        2.0 * l1
    };
    1.0 + 32.0 * p.mu * PI.powf(p.delta) / l1_prime * inner
}

/// Power of `m` multiplying `Δ(m)` in the penalty (0 when `δ < 1/3`).
pub fn penalty_exponent(p: &SmoothnessParams) -> f64 {
    if p.delta < 1.0 / 3.0 {
        0.0
    } else {
        (1.5 * p.delta - 0.5).max(0.0).min(p.delta)
    }
}

/// Penalty from a precomputed `Δ(m)`. No admissibility check.
pub fn penalty_from_delta(nm: &NoiseModel, m: f64, n: usize, delta_m: f64, cfg: &PenaltyConfig) -> f64 {
    let p = nm.smoothness();
    let n = n as f64;
    if p.delta < 1.0 / 3.0 {
        cfg.ordinary * cfg.a * delta_m / n
    } else {
        cfg.supersmooth * cfg.a * lambda3(nm) * delta_m * m.powf(penalty_exponent(p)) / n
    }
}

/// `pen(m)` with the default leading constants.
pub fn penalty(nm: &NoiseModel, m: f64, n: usize, a: f64) -> Result<f64> {
    penalty_with(nm, m, n, &PenaltyConfig::with_a(a)?)
}

pub fn penalty_with(nm: &NoiseModel, m: f64, n: usize, cfg: &PenaltyConfig) -> Result<f64> {
    cfg.validate()?;
    check_m(m)?;
    let bound = spectral_bound(nm, n)?;
    if PI * m > bound * (1.0 + 1e-12) {
        return Err(DeconvError::Inadmissible { m, m_max: bound / PI });
    }
    Ok(penalty_from_delta(nm, m, n, delta(nm, m)?, cfg))
}

/// Upper bound on `πm` for the sample size `n`.
pub fn spectral_bound(nm: &NoiseModel, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(DeconvError::Domain(format!("the admissible collection needs n ≥ 3, got {n}")));
    }
    let p = nm.smoothness();
    let ln_n = (n as f64).ln();
    if p.delta == 0.0 {
        return Ok((n as f64).powf(1.0 / (2.0 * p.gamma + 1.0)));
    }
    let base = ln_n / (2.0 * p.mu);
    let coef = (2.0 * p.gamma + 1.0 - p.delta) / (2.0 * p.delta * p.mu);
    let inner = if coef == 0.0 { base } else { base + coef * base.ln() };
    if !(inner > 0.0) {
        return Ok(0.0);
    }
    Ok(inner.powf(1.0 / p.delta))
}

/// Largest multiple of `step` whose cutoff stays below the bound.
pub fn max_model_index(nm: &NoiseModel, n: usize, step: f64) -> Result<f64> {
    check_m(step)?;
    let bound = spectral_bound(nm, n)?;
    let count = (bound / (PI * step) * (1.0 + 1e-12)).floor();
    if count < 1.0 {
        return Err(DeconvError::InfeasibleCollection(format!(
            "πm_n ≤ {bound:.6} admits no multiple of the grid step {step}; use a finer step"
        )));
    }
    Ok(count * step)
}

/// Equally spaced model indices `step, 2·step, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrid {
    step: f64,
    values: Vec<f64>,
}

impl ModelGrid {
    pub fn regular(step: f64, max: f64) -> Result<Self> {
        check_m(step)?;
        let count = (max / step * (1.0 + 1e-12)).floor() as usize;
        if count == 0 {
            return Err(DeconvError::InfeasibleCollection(format!("no grid point in (0, {max}] for step {step}")));
        }
        Ok(Self {
            step,
            values: (1..=count).map(|i| i as f64 * step).collect(),
        })
    }

    /// Arbitrary ascending multiples of `step`.
    pub fn from_values(step: f64, mut values: Vec<f64>) -> Result<Self> {
        check_m(step)?;
        values.sort_by(f64::total_cmp);
        values.dedup();
        for &m in &values {
            let r = m / step;
            if !(m > 0.0) || (r - r.round()).abs() > 1e-9 * r.max(1.0) {
                return Err(DeconvError::Config(format!("grid value {m} is not a positive multiple of {step}")));
            }
        }
        if values.is_empty() {
            return Err(DeconvError::InfeasibleCollection("empty model grid".into()));
        }
        Ok(Self { step, values })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Grid points with `πm` inside the admissible bound for `n`.
    pub fn admissible(&self, nm: &NoiseModel, n: usize) -> Result<Self> {
        let bound = spectral_bound(nm, n)?;
        let kept: Vec<f64> = self.values.iter().copied().filter(|&m| PI * m <= bound * (1.0 + 1e-12)).collect();
        if kept.len() < self.values.len() {
            warn!(
                "dropping {} grid points above m_n = {:.6}",
                self.values.len() - kept.len(),
                bound / PI
            );
        }
        if kept.is_empty() {
            return Err(DeconvError::InfeasibleCollection(format!(
                "no grid point satisfies πm ≤ {bound:.6}; use a finer step"
            )));
        }
        Ok(Self { step: self.step, values: kept })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEntry {
    pub m: f64,
    pub delta: f64,
    pub delta_half: f64,
    pub gamma: f64,
    pub pen: f64,
}

/// Penalty quantities tabulated over a model grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyProfile {
    pub a: f64,
    pub noise_label: String,
    pub n: usize,
    pub entries: Vec<ProfileEntry>,
    pub m_n: f64,
}

impl PenaltyProfile {
    /// Tabulates over the admissible part of `grid`.
    pub fn build(nm: &NoiseModel, n: usize, cfg: &PenaltyConfig, grid: &ModelGrid) -> Result<Self> {
        cfg.validate()?;
        let grid = grid.admissible(nm, n)?;
        let mut entries = Vec::with_capacity(grid.values().len());
        for &m in grid.values() {
            let d = delta(nm, m)?;
            entries.push(ProfileEntry {
                m,
                delta: d,
                delta_half: delta_half(nm, m)?,
                gamma: gamma_fn(nm, m)?,
                pen: penalty_from_delta(nm, m, n, d, cfg),
            });
        }
        Ok(Self {
            a: cfg.a,
            noise_label: nm.label().to_string(),
            n,
            m_n: grid.max(),
            entries,
        })
    }

    pub fn pen(&self, m: f64) -> Option<f64> {
        self.entries.iter().find(|e| (e.m - m).abs() <= 1e-12 * m).map(|e| e.pen)
    }
}

/// Position of `Δ(m)` inside the envelope `[λ₁′Γ(m)/2, 2λ₁Γ(m)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    /// Smallest grid point from which `Δ ≤ 2λ₁Γ` holds for the rest of the grid.
    pub m1: Option<f64>,
    /// `Δ/(2λ₁Γ)` per grid point.
    pub upper_ratios: Vec<(f64, f64)>,
    /// `Δ/(λ₁′Γ/2)` per grid point; values below 1 break the lower side.
    pub lower_ratios: Vec<(f64, f64)>,
}

pub fn envelope_report(nm: &NoiseModel, grid: &[f64]) -> Result<EnvelopeReport> {
    let p = nm.smoothness();
    let l1 = lambda1(nm);
    let l1p = lambda1_with(p, p.kappa0_prime);
    let mut upper = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    for &m in grid {
        let d = delta(nm, m)?;
        let g = gamma_fn(nm, m)?;
        upper.push((m, d / (2.0 * l1 * g)));
        lower.push((m, d / (0.5 * l1p * g)));
    }
    let mut m1 = None;
    for (m, r) in upper.iter().rev() {
        if *r <= 1.0 {
            m1 = Some(*m);
        } else {
            break;
        }
    }
    Ok(EnvelopeReport {
        m1,
        upper_ratios: upper,
        lower_ratios: lower,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionRow {
    pub m: f64,
    pub contrast: f64,
    pub penalty: f64,
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub m_hat: f64,
    pub criterion: Vec<CriterionRow>,
    pub estimate: DeconvEstimate,
}

/// Settings for a selection sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub penalty: PenaltyConfig,
    /// Coefficient truncation; `None` means `k_n = n`.
    pub k_n: Option<usize>,
    pub quadrature: SpectralQuadrature,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            penalty: PenaltyConfig::default(),
            k_n: None,
            quadrature: SpectralQuadrature::default(),
        }
    }
}

/// Every admissible estimate with its penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub estimates: Vec<DeconvEstimate>,
    pub penalties: Vec<f64>,
}

impl Sweep {
    pub fn rows(&self) -> Vec<CriterionRow> {
        self.estimates
            .iter()
            .zip(&self.penalties)
            .map(|(e, &p)| CriterionRow {
                m: e.m(),
                contrast: e.contrast,
                penalty: p,
                criterion: e.contrast + p,
            })
            .collect()
    }

    /// Index of the minimal criterion; ties go to the earlier (smaller) `m`.
    pub fn argmin(&self) -> usize {
        let rows = self.rows();
        let mut best = 0;
        for (i, r) in rows.iter().enumerate().skip(1) {
            if r.criterion < rows[best].criterion {
                best = i;
            }
        }
        best
    }

    pub fn into_selection(mut self) -> SelectionResult {
        let best = self.argmin();
        let criterion = self.rows();
        let estimate = self.estimates.swap_remove(best);
        SelectionResult {
            m_hat: criterion[best].m,
            criterion,
            estimate,
        }
    }
}

pub fn sweep(s: &Sample, nm: &NoiseModel, cfg: &SelectionConfig, grid: &ModelGrid) -> Result<Sweep> {
    cfg.penalty.validate()?;
    let n = s.n();
    let grid = grid.admissible(nm, n)?;
    let k_n = cfg.k_n.unwrap_or(n);
    let mut engine = SpectralEstimator::new(s, nm, grid.step(), grid.max(), cfg.quadrature)?;
    let mut estimates = Vec::with_capacity(grid.values().len());
    let mut penalties = Vec::with_capacity(grid.values().len());
    for &m in grid.values() {
        estimates.push(engine.estimate(&ModelIndex::new(m, k_n)?)?);
        penalties.push(penalty_from_delta(nm, m, n, delta(nm, m)?, &cfg.penalty));
    }
    Ok(Sweep { estimates, penalties })
}

pub fn select_model(s: &Sample, nm: &NoiseModel, cfg: &SelectionConfig, grid: &ModelGrid) -> Result<SelectionResult> {
    Ok(sweep(s, nm, cfg, grid)?.into_selection())
}
