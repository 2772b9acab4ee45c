//! Minimum-contrast deconvolution estimator on the sinc models.

use std::f64::consts::PI;

use log::{debug, warn};
use num_complex::Complex64;

use crate::error::{DeconvError, Result};
use crate::noise::NoiseModel;
use crate::projection::{CoefficientVector, ModelIndex};
use crate::spectral::{ecf_table, FilonSweep, SpectralLayout, SpectralQuadrature, UNDERFLOW_LIMIT};

/// Imaginary residue allowed after the Fourier sweep, relative to `‖â‖`.
pub const IMAG_TOLERANCE: f64 = 1e-6;

/// Log-squared observations `Z_t = ln Y_t²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    z: Vec<f64>,
}

impl Sample {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(DeconvError::Domain("sample must contain at least one observation".into()));
        }
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(DeconvError::Domain(format!("observation {i} is not finite")));
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }
}

pub fn log_square_transform(y: &[f64]) -> Result<Sample> {
    let mut z = Vec::with_capacity(y.len());
    for (index, &v) in y.iter().enumerate() {
        if v == 0.0 {
            return Err(DeconvError::DegenerateObservation { index });
        }
        z.push((v * v).ln());
    }
    Sample::new(z)
}

pub fn empirical_charfn(s: &Sample, x: f64) -> Complex64 {
    let sum: Complex64 = s.z.iter().map(|&z| Complex64::from_polar(1.0, x * z)).sum();
    sum / s.n() as f64
}

/// `ĝ_m` together with its empirical contrast `−Σ â_j²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeconvEstimate {
    pub coeffs: CoefficientVector,
    pub contrast: f64,
    pub noise_label: String,
    /// Largest `|Im â_j|` before it was discarded.
    pub imag_residue: f64,
    /// Largest coefficient change under the final node doubling.
    pub refinement_change: f64,
}

impl DeconvEstimate {
    pub fn from_coefficients(coeffs: CoefficientVector, noise_label: impl Into<String>) -> Self {
        let contrast = -coeffs.squared_norm();
        Self {
            coeffs,
            contrast,
            noise_label: noise_label.into(),
            imag_residue: 0.0,
            refinement_change: 0.0,
        }
    }

    pub fn m(&self) -> f64 {
        self.coeffs.index().m()
    }
}

/// Coefficient estimator for one sample over every `m` that is a multiple of
/// a fixed grid step.
///
/// The table of `φ̂_n(x)/f*(x)` is built once on the finest spacing needed so
/// far and shared by all model indices.
pub struct SpectralEstimator<'a> {
    sample: &'a Sample,
    noise: &'a NoiseModel,
    cfg: SpectralQuadrature,
    layout: SpectralLayout,
    max_half_nodes: usize,
    level: u32,
    psi: Vec<Complex64>,
    sweep: FilonSweep,
}

impl<'a> SpectralEstimator<'a> {
    pub fn new(sample: &'a Sample, noise: &'a NoiseModel, step: f64, max_m: f64, cfg: SpectralQuadrature) -> Result<Self> {
        let layout = SpectralLayout::new(step, &cfg)?;
        let max_half_nodes = layout.half_nodes(max_m)?;
        let mut est = Self {
            sample,
            noise,
            cfg,
            layout,
            max_half_nodes,
            level: 0,
            psi: Vec::new(),
            sweep: FilonSweep::new(),
        };
        est.build_table(1);
        Ok(est)
    }

    fn build_table(&mut self, level: u32) {
        let spacing = self.layout.spacing() / (1u64 << level) as f64;
        let len = (self.max_half_nodes << level) + 1;
        debug!("spectral table: {len} nodes at spacing {spacing:e}");
        let mut psi = ecf_table(self.sample.z(), spacing, len);
        let extent = self.noise.spectral_extent();
        for (k, v) in psi.iter_mut().enumerate() {
            let x = k as f64 * spacing;
            let f = self.noise.charfn(x);
            let modulus = f.norm();
            *v = if x > extent || !modulus.is_finite() || modulus < UNDERFLOW_LIMIT {
                Complex64::new(f64::NAN, f64::NAN)
            } else {
                *v / f
            };
        }
        self.level = level;
        self.psi = psi;
    }

    /// Raw complex coefficients at a table level, scaled by `1/(2π√m)`.
    fn raw(&mut self, m: f64, k_n: usize, level: u32) -> Result<Vec<Complex64>> {
        let k_half = self.layout.half_nodes(m)? << level;
        let stride = 1usize << (self.level - level);
        let spacing = self.layout.spacing() / (1u64 << level) as f64;
        let half: Vec<Complex64> = (0..=k_half).map(|k| self.psi[k * stride]).collect();
        if let Some(k) = half.iter().position(|v| !v.re.is_finite()) {
            return Err(DeconvError::IllPosed {
                x: k as f64 * spacing,
                threshold: UNDERFLOW_LIMIT,
            });
        }
        let scale = 1.0 / (2.0 * PI * m.sqrt());
        let mut out = self.sweep.integrals(&half, spacing, m, k_n);
        for v in out.iter_mut() {
            *v *= scale;
        }
        Ok(out)
    }

    pub fn estimate(&mut self, index: &ModelIndex) -> Result<DeconvEstimate> {
        let m = index.m();
        let k_n = index.k_n();
        if k_n < self.sample.n() {
            warn!("k_n = {k_n} is below the sample size {}", self.sample.n());
        }
        let mut coarse = self.raw(m, k_n, 0)?;
        let mut level = 0;
        loop {
            if self.level < level + 1 {
                self.build_table(level + 1);
            }
            let fine = self.raw(m, k_n, level + 1)?;
            let peak = fine.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
            let change = coarse.iter().zip(&fine).map(|(a, b)| (a.re - b.re).abs()).fold(0.0, f64::max);
            if change <= self.cfg.rel_tol * peak || peak == 0.0 {
                return self.finish(index, fine, change);
            }
            level += 1;
            if level > self.cfg.max_doublings {
                return Err(DeconvError::Numerical(format!(
                    "coefficient quadrature at m = {m} did not settle: change {change:e} against peak {peak:e}"
                )));
            }
            coarse = fine;
        }
    }

    fn finish(&self, index: &ModelIndex, raw: Vec<Complex64>, change: f64) -> Result<DeconvEstimate> {
        let norm = raw.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
        let imag = raw.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if imag > IMAG_TOLERANCE * norm.max(f64::MIN_POSITIVE) {
            return Err(DeconvError::Numerical(format!(
                "imaginary residue {imag:e} exceeds {IMAG_TOLERANCE:e} of the coefficient norm {norm:e}"
            )));
        }
        let coeffs = CoefficientVector::new(*index, raw.iter().map(|v| v.re).collect())?;
        let mut est = DeconvEstimate::from_coefficients(coeffs, self.noise.label());
        est.imag_residue = imag;
        est.refinement_change = change;
        Ok(est)
    }
}

pub fn estimate_coefficients(s: &Sample, index: &ModelIndex, nm: &NoiseModel) -> Result<CoefficientVector> {
    estimate_density(s, index, nm).map(|e| e.coeffs)
}

pub fn estimate_density(s: &Sample, index: &ModelIndex, nm: &NoiseModel) -> Result<DeconvEstimate> {
    estimate_density_with(s, index, nm, SpectralQuadrature::default())
}

pub fn estimate_density_with(s: &Sample, index: &ModelIndex, nm: &NoiseModel, cfg: SpectralQuadrature) -> Result<DeconvEstimate> {
    let m = index.m();
    SpectralEstimator::new(s, nm, m, m, cfg)?.estimate(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureConfig};

    #[test]
    fn log_square_examples() {
        assert_eq!(log_square_transform(&[1.0, -1.0]).unwrap().z(), &[0.0, 0.0]);
        let e = log_square_transform(&[std::f64::consts::E]).unwrap();
        assert!((e.z()[0] - 2.0).abs() < 1e-15);
        let s = log_square_transform(&[0.5, 2.0]).unwrap();
        let l = 2.0 * 2f64.ln();
        assert!((s.z()[0] + l).abs() < 1e-15 && (s.z()[1] - l).abs() < 1e-15);
        let err = log_square_transform(&[1.0, 0.0]).unwrap_err();
        assert_eq!(err, DeconvError::DegenerateObservation { index: 1 });
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn ecf_examples() {
        let s = Sample::new(vec![0.3, -2.0, 5.0]).unwrap();
        assert_eq!(empirical_charfn(&s, 0.0), Complex64::new(1.0, 0.0));
        let zero = Sample::new(vec![0.0]).unwrap();
        assert_eq!(empirical_charfn(&zero, 3.7), Complex64::new(1.0, 0.0));
        let l4 = Sample::new(vec![4f64.ln()]).unwrap();
        let v = empirical_charfn(&l4, 1.0);
        assert!((v.re - 4f64.ln().cos()).abs() < 1e-15);
        assert!((v.re - 0.1835).abs() < 1e-4 && (v.im - 0.9830).abs() < 1e-4);
    }

    #[test]
    fn point_mass_at_zero_with_laplace_noise() {
        // φ̂ ≡ 1 so â_j = (1/2π)∫ e^{−ixj}(1 + x²) dx
        let s = Sample::new(vec![0.0]).unwrap();
        let nm = NoiseModel::laplace(1.0).unwrap();
        let est = estimate_density(&s, &ModelIndex::new(1.0, 5).unwrap(), &nm).unwrap();
        assert!((est.coeffs.get(0) - (1.0 + PI * PI / 3.0)).abs() < 1e-10);
        for j in 1..=5i64 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let exact = 2.0 * sign / (j * j) as f64;
            assert!((est.coeffs.get(j) - exact).abs() < 1e-10, "j = {j}");
            assert!((est.coeffs.get(-j) - exact).abs() < 1e-10);
        }
        assert!((est.contrast + est.coeffs.squared_norm()).abs() < 1e-10);
    }

    #[test]
    fn matches_direct_quadrature_per_coefficient() {
        let z = vec![-1.3, 0.2, 0.9, 2.4, -0.05, 3.3, -4.1];
        let s = Sample::new(z).unwrap();
        let nm = NoiseModel::log_chi_squared();
        let m = 0.5;
        let est = estimate_density(&s, &ModelIndex::new(m, 40).unwrap(), &nm).unwrap();
        let cfg = QuadratureConfig::default();
        for &j in &[-40i64, -7, 0, 3, 25, 40] {
            let f = |x: f64| {
                let psi = empirical_charfn(&s, x) / nm.charfn(x);
                (Complex64::from_polar(1.0, -x * j as f64 / m) * psi).re
            };
            let direct = integrate(f, -PI * m, PI * m, &cfg).unwrap() / (2.0 * PI * m.sqrt());
            let got = est.coeffs.get(j);
            assert!((got - direct).abs() < 1e-9 * direct.abs().max(1e-3), "j = {j}: {got} vs {direct}");
        }
        assert!(est.imag_residue < 1e-8);
    }

    #[test]
    fn shared_grid_agrees_with_standalone() {
        let z: Vec<f64> = (0..50).map(|i| ((i * 17 % 23) as f64 - 11.0) * 0.31).collect();
        let s = Sample::new(z).unwrap();
        let nm = NoiseModel::laplace(1.0).unwrap();
        let mut shared = SpectralEstimator::new(&s, &nm, 0.25, 1.25, SpectralQuadrature::default()).unwrap();
        for &m in &[0.25, 0.75, 1.25] {
            let idx = ModelIndex::new(m, 50).unwrap();
            let a = shared.estimate(&idx).unwrap();
            let b = estimate_density(&s, &idx, &nm).unwrap();
            for (x, y) in a.coeffs.as_slice().iter().zip(b.coeffs.as_slice()) {
                assert!((x - y).abs() < 1e-9 * y.abs().max(1e-2));
            }
        }
        assert!(shared.estimate(&ModelIndex::new(0.3, 5).unwrap()).is_err());
    }

    #[test]
    fn underflow_is_ill_posed() {
        let s = Sample::new(vec![0.0, 1.0]).unwrap();
        let nm = NoiseModel::gaussian(1.0).unwrap();
        // e^{−x²/2} < 1e−300 once x > 37.2
        let err = estimate_density(&s, &ModelIndex::new(13.0, 2).unwrap(), &nm).unwrap_err();
        assert_eq!(err.code(), "ILL_POSED");
    }

    #[test]
    fn contrast_is_negative_squared_norm() {
        let idx = ModelIndex::new(1.0, 1).unwrap();
        let zero = DeconvEstimate::from_coefficients(CoefficientVector::zeros(idx), "x");
        assert_eq!(zero.contrast, 0.0);
        let one = CoefficientVector::new(idx, vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(DeconvEstimate::from_coefficients(one, "x").contrast, -4.0);
    }

    #[test]
    fn permutation_invariance() {
        let z = vec![0.4, -1.2, 2.2, 0.0, 3.1];
        let mut rev = z.clone();
        rev.reverse();
        let nm = NoiseModel::laplace(0.5).unwrap();
        let idx = ModelIndex::new(1.0, 10).unwrap();
        let a = estimate_density(&Sample::new(z).unwrap(), &idx, &nm).unwrap();
        let b = estimate_density(&Sample::new(rev).unwrap(), &idx, &nm).unwrap();
        for (x, y) in a.coeffs.as_slice().iter().zip(b.coeffs.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
