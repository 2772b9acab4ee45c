//! Spectral-domain machinery behind the coefficient estimator.
//!
//! For a spectral function `ψ` on `[−πm, πm]` the estimator needs
//!
//! ```text
//! I_j = ∫_{−πm}^{πm} e^{−ixj/m} ψ(x) dx,    |j| ≤ k_n,
//! ```
//!
//! with `k_n` as large as the sample size. The oscillating factor is
//! integrated exactly against a composite degree-4 interpolant of `ψ`
//! (Filon-type panels of four intervals), so the accuracy depends only on
//! the smoothness of `ψ` and not on `j`. The panel sums for all `j` are one
//! FFT per panel offset.
//!
//! `ψ` is tabulated on the half-line `x = k·h`, `k ≥ 0`, and extended to
//! `x < 0` by Hermitian symmetry. Tables are built at a fine spacing once
//! per sample and subsampled for every model index in a nested grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{DeconvError, Result};

/// Intervals per Filon panel.
pub const PANEL: usize = 4;

/// Threshold below which `|f*|` is treated as numerically zero.
pub const UNDERFLOW_LIMIT: f64 = 1e-300;

/// Node-doubling settings for the spectral quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralQuadrature {
    /// Intervals across `[−πm, πm]` at `m = 1` on the first level; scaled
    /// linearly in `m` so the spacing is shared across a model grid.
    pub base_nodes: usize,
    pub rel_tol: f64,
    pub max_doublings: u32,
}

impl Default for SpectralQuadrature {
    fn default() -> Self {
        Self {
            base_nodes: 1 << 12,
            rel_tol: 1e-9,
            max_doublings: 6,
        }
    }
}

/// Uniform half-line layout shared by every `m` that is a multiple of `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLayout {
    step: f64,
    nodes_per_step: usize,
}

impl SpectralLayout {
    pub fn new(step: f64, cfg: &SpectralQuadrature) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(DeconvError::Domain(format!("grid step must be positive, got {step}")));
        }
        let raw = (cfg.base_nodes as f64 * step / 2.0).ceil() as usize;
        let nodes_per_step = raw.max(PANEL).div_ceil(PANEL) * PANEL;
        Ok(Self { step, nodes_per_step })
    }

    /// Half-line node spacing on the first level.
    pub fn spacing(&self) -> f64 {
        PI * self.step / self.nodes_per_step as f64
    }

    /// Half-line node count reaching `πm` on the first level.
    pub fn half_nodes(&self, m: f64) -> Result<usize> {
        let ratio = m / self.step;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(DeconvError::Config(format!(
                "m = {m} is not a positive multiple of the grid step {}",
                self.step
            )));
        }
        Ok(steps as usize * self.nodes_per_step)
    }
}

/// Empirical characteristic function `(1/n) Σ e^{ixz_t}` at `x = k·h`, `k = 0..len`.
pub fn ecf_table(z: &[f64], spacing: f64, len: usize) -> Vec<Complex64> {
    const LANES: usize = 8;
    const REANCHOR: usize = 256;

    let n = z.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let (wr, wi): (Vec<f64>, Vec<f64>) = z.iter().map(|&v| ((spacing * v).cos(), (spacing * v).sin())).unzip();
    let mut cr = vec![0.0; n];
    let mut ci = vec![0.0; n];

    for (k, slot) in out.iter_mut().enumerate() {
        if k % REANCHOR == 0 {
            let x = k as f64 * spacing;
            for i in 0..n {
                let (s, c) = (x * z[i]).sin_cos();
                cr[i] = c;
                ci[i] = s;
            }
        }
        let mut ar = [0.0; LANES];
        let mut ai = [0.0; LANES];
        let chunks = n / LANES * LANES;
        for base in (0..chunks).step_by(LANES) {
            for l in 0..LANES {
                let i = base + l;
                let (r, im) = (cr[i], ci[i]);
                ar[l] += r;
                ai[l] += im;
                cr[i] = r * wr[i] - im * wi[i];
                ci[i] = r * wi[i] + im * wr[i];
            }
        }
        let mut sr: f64 = ar.iter().sum();
        let mut si: f64 = ai.iter().sum();
        for i in chunks..n {
            let (r, im) = (cr[i], ci[i]);
            sr += r;
            si += im;
            cr[i] = r * wr[i] - im * wi[i];
            ci[i] = r * wi[i] + im * wr[i];
        }
        *slot = Complex64::new(sr / n as f64, si / n as f64);
    }
    out
}

/// Lagrange basis coefficients on nodes `0..=PANEL`, `L_l(u) = Σ_k c[l][k] u^k`.
fn lagrange_coefficients() -> [[f64; PANEL + 1]; PANEL + 1] {
    let mut out = [[0.0; PANEL + 1]; PANEL + 1];
    for (l, row) in out.iter_mut().enumerate() {
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for i in 0..=PANEL {
            if i == l {
                continue;
            }
            // poly *= (u − i)
            let mut next = vec![0.0; poly.len() + 1];
            for (k, &c) in poly.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * i as f64;
            }
            poly = next;
            denom *= l as f64 - i as f64;
        }
        for (k, c) in poly.into_iter().enumerate() {
            row[k] = c / denom;
        }
    }
    out
}

/// `μ_k(θ) = ∫_0^P u^k e^{−iθu} du` for `k = 0..=P`.
fn moments(theta: f64) -> [Complex64; PANEL + 1] {
    let p = PANEL as f64;
    let mut mu = [Complex64::new(0.0, 0.0); PANEL + 1];
    if theta.abs() < 1.0 {
        // power series, |θP| < P keeps the terms tame
        let x = Complex64::new(0.0, -theta * p);
        for (k, slot) in mu.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(1.0 / (k as f64 + 1.0), 0.0);
            for r in 1..80 {
                term *= x / r as f64;
                let add = term / (k as f64 + r as f64 + 1.0);
                acc += add;
                if add.norm() < 1e-18 * acc.norm() {
                    break;
                }
            }
            *slot = acc * p.powi(k as i32 + 1);
        }
    } else {
        let i_theta = Complex64::new(0.0, theta);
        let end = Complex64::from_polar(1.0, -theta * p);
        mu[0] = (Complex64::new(1.0, 0.0) - end) / i_theta;
        for k in 1..=PANEL {
            mu[k] = (-p.powi(k as i32) * end + k as f64 * mu[k - 1]) / i_theta;
        }
    }
    mu
}

/// Panel weights `w_l(θ) = ∫_0^P e^{−iθu} L_l(u) du`.
fn panel_weights(theta: f64, basis: &[[f64; PANEL + 1]; PANEL + 1]) -> [Complex64; PANEL + 1] {
    let mu = moments(theta);
    let mut w = [Complex64::new(0.0, 0.0); PANEL + 1];
    for (l, row) in basis.iter().enumerate() {
        w[l] = row.iter().zip(mu.iter()).map(|(c, m)| *c * *m).sum();
    }
    w
}

/// Oscillatory integrals over a Hermitian-symmetric spectral table.
pub(crate) struct FilonSweep {
    planner: FftPlanner<f64>,
    basis: [[f64; PANEL + 1]; PANEL + 1],
}

impl FilonSweep {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            basis: lagrange_coefficients(),
        }
    }

    /// `∫_{−πm}^{πm} e^{−ixj/m} ψ(x) dx` for `j = −k_n..=k_n`.
    ///
    /// `half` holds `ψ(k·h)` for `k = 0..=K` with `K·h = πm`; `K` must be a
    /// multiple of `2·PANEL` so the panels are symmetric about zero.
    pub fn integrals(&mut self, half: &[Complex64], spacing: f64, m: f64, k_n: usize) -> Vec<Complex64> {
        let k_half = half.len() - 1;
        debug_assert!(k_half % (2 * PANEL) == 0);
        let total = 2 * k_half;
        let panels = total / PANEL;

        let at = |i: usize| -> Complex64 {
            if i >= k_half {
                half[i - k_half]
            } else {
                half[k_half - i].conj()
            }
        };

        let fft: Arc<dyn Fft<f64>> = self.planner.plan_fft_forward(panels);
        let mut sums: Vec<Vec<Complex64>> = Vec::with_capacity(PANEL + 1);
        for l in 0..=PANEL {
            let mut buf: Vec<Complex64> = (0..panels).map(|q| at(PANEL * q + l)).collect();
            fft.process(&mut buf);
            sums.push(buf);
        }

        let k = k_n as i64;
        (-k..=k)
            .map(|j| {
                let idx = j.rem_euclid(panels as i64) as usize;
                let theta = j as f64 / m * spacing;
                let w = panel_weights(theta, &self.basis);
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..=PANEL {
                    acc += w[l] * sums[l][idx];
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc * (sign * spacing)
            })
            .collect()
    }
}
