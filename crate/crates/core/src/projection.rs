//! The sinc system `φ_{m,j}(x) = √m sinc(mx − j)` spanning the band-limited
//! space of functions whose Fourier transform lives in `[−πm, πm]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DeconvError, Result};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::special::{normal_pdf, sinc};

/// A model `S_m^{(n)}`: cutoff `πm` and coefficient truncation `|j| ≤ k_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelIndex {
    m: f64,
    k_n: usize,
}

impl ModelIndex {
    pub fn new(m: f64, k_n: usize) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(DeconvError::Domain(format!("model index m must be positive, got {m}")));
        }
        if k_n == 0 {
            return Err(DeconvError::Domain("k_n must be at least 1".into()));
        }
        Ok(Self { m, k_n })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn k_n(&self) -> usize {
        self.k_n
    }

    pub fn cutoff(&self) -> f64 {
        PI * self.m
    }

    pub fn len(&self) -> usize {
        2 * self.k_n + 1
    }

    pub fn js(&self) -> impl Iterator<Item = i64> {
        let k = self.k_n as i64;
        -k..=k
    }
}

pub fn phi_eval(m: f64, j: i64, x: f64) -> f64 {
    m.sqrt() * sinc(m * x - j as f64)
}

/// Coefficients on `φ_{m,j}`, `j = −k_n..=k_n`, stored in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    index: ModelIndex,
    coeffs: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(index: ModelIndex, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != index.len() {
            return Err(DeconvError::Domain(format!(
                "expected {} coefficients for k_n = {}, got {}",
                index.len(),
                index.k_n(),
                coeffs.len()
            )));
        }
        if let Some(j) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(DeconvError::Numerical(format!(
                "coefficient j = {} is not finite",
                j as i64 - index.k_n() as i64
            )));
        }
        Ok(Self { index, coeffs })
    }

    pub fn zeros(index: ModelIndex) -> Self {
        Self {
            coeffs: vec![0.0; index.len()],
            index,
        }
    }

    pub fn index(&self) -> &ModelIndex {
        &self.index
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `φ_{m,j}`; zero outside the truncation window.
    pub fn get(&self, j: i64) -> f64 {
        let k = self.index.k_n as i64;
        if j.abs() > k {
            0.0
        } else {
            self.coeffs[(j + k) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.index.js().zip(self.coeffs.iter().copied())
    }

    /// L² norm squared of the represented function (Parseval).
    pub fn squared_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// A real function known through its Fourier transform
/// `g*(x) = ∫ e^{ixt} g(t) dt`.
pub trait Spectral {
    fn fourier(&self, x: f64) -> Complex64;
    fn value(&self, x: f64) -> f64;
}

/// Normal density with the given mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDensity {
    pub mean: f64,
    pub sd: f64,
}

impl GaussianDensity {
    pub fn standard() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }

    /// ‖g‖² = 1 / (2σ√π).
    pub fn squared_norm(&self) -> f64 {
        0.5 / (self.sd * PI.sqrt())
    }
}

impl Spectral for GaussianDensity {
    fn fourier(&self, x: f64) -> Complex64 {
        Complex64::from_polar((-0.5 * self.sd * self.sd * x * x).exp(), self.mean * x)
    }

    fn value(&self, x: f64) -> f64 {
        normal_pdf((x - self.mean) / self.sd) / self.sd
    }
}

/// Density with triangular Fourier transform `(1 − |x|/c)₊`, band-limited to `[−c, c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularSpectrum {
    pub width: f64,
}

impl Spectral for TriangularSpectrum {
    fn fourier(&self, x: f64) -> Complex64 {
        Complex64::new((1.0 - x.abs() / self.width).max(0.0), 0.0)
    }

    fn value(&self, x: f64) -> f64 {
        let c = self.width;
        let s = sinc(c * x / (2.0 * PI));
        c / (2.0 * PI) * s * s
    }
}

/// The orthogonal projection `g_m` of `inner` onto `S_m` (no coefficient
/// truncation), evaluated by inverse-Fourier quadrature.
#[derive(Debug, Clone)]
pub struct BandLimited<S> {
    pub inner: S,
    pub m: f64,
    pub quadrature: QuadratureConfig,
}

impl<S: Spectral> BandLimited<S> {
    pub fn new(inner: S, m: f64) -> Self {
        Self {
            inner,
            m,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl<S: Spectral> Spectral for BandLimited<S> {
    fn fourier(&self, x: f64) -> Complex64 {
        if x.abs() <= PI * self.m {
            self.inner.fourier(x)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn value(&self, x: f64) -> f64 {
        // (1/2π)∫ e^{-ixt} g*(t) dt over [−πm, πm], folded onto t ≥ 0
        integrate(
            |t| (Complex64::from_polar(1.0, -x * t) * self.inner.fourier(t)).re,
            0.0,
            PI * self.m,
            &self.quadrature,
        )
        .map(|v| v / PI)
        .unwrap_or(f64::NAN)
    }
}

impl Spectral for CoefficientVector {
    fn fourier(&self, x: f64) -> Complex64 {
        let m = self.index.m;
        if x.abs() > PI * m {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.iter() {
            acc += c * Complex64::from_polar(1.0, x * j as f64 / m);
        }
        acc / m.sqrt()
    }

    fn value(&self, x: f64) -> f64 {
        reconstruct(self, &[x])[0]
    }
}

/// `a_{m,j}(g) = ⟨φ_{m,j}, g⟩` for `|j| ≤ k_n`, by independent scalar
/// quadrature of `(1/(2π√m)) ∫_{−πm}^{πm} e^{−ixj/m} g*(x) dx`.
///
/// One quadrature per coefficient; intended as a test oracle.
pub fn project_true_density<S: Spectral + ?Sized>(
    g: &S,
    index: ModelIndex,
    cfg: &QuadratureConfig,
) -> Result<CoefficientVector> {
    let m = index.m;
    let norm = 1.0 / (PI * m.sqrt());
    let mut coeffs = Vec::with_capacity(index.len());
    for j in index.js() {
        let freq = j as f64 / m;
        let v = integrate(
            |x| (Complex64::from_polar(1.0, -x * freq) * g.fourier(x)).re,
            0.0,
            PI * m,
            cfg,
        )?;
        coeffs.push(norm * v);
    }
    CoefficientVector::new(index, coeffs)
}

/// Pointwise `Σ_{|j|≤k_n} c_j φ_{m,j}(x)`.
pub fn reconstruct(cv: &CoefficientVector, grid: &[f64]) -> Vec<f64> {
    let m = cv.index.m;
    let k = cv.index.k_n as i64;
    let sqrt_m = m.sqrt();
    // sin(π(u − j)) = (−1)^j sin(πu)
    let signed: Vec<f64> = cv
        .iter()
        .map(|(j, c)| if j % 2 == 0 { c } else { -c })
        .collect();
    let nodes: Vec<f64> = cv.index.js().map(|j| j as f64).collect();

    grid.iter()
        .map(|&x| {
            let u = m * x;
            let nearest = u.round();
            let near = (u - nearest).abs() < 1e-3 && nearest.abs() <= k as f64;
            let skip = if near { (nearest as i64 + k) as usize } else { usize::MAX };

            let mut acc = 0.0;
            for (i, (&c, &node)) in signed.iter().zip(nodes.iter()).enumerate() {
                if i != skip {
                    acc += c / (u - node);
                }
            }
            let mut val = sqrt_m * (PI * u).sin() / PI * acc;
            if near {
                val += sqrt_m * cv.coeffs[skip] * sinc(u - nearest);
            }
            val
        })
        .collect()
}
