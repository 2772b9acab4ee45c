//! Node-doubling quadrature on finite intervals.
//!
//! The composite trapezoid rule is refined by doubling the node count; the
//! successive trapezoid values are combined by Richardson extrapolation
//! (Romberg), and the iteration stops once two successive extrapolated
//! values agree to the requested relative tolerance.

use crate::error::{DeconvError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Number of trapezoid intervals at the first level.
    pub base_nodes: usize,
    /// Relative agreement required between successive refinements.
    pub rel_tol: f64,
    /// Maximum number of node doublings before giving up.
    pub max_doublings: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            base_nodes: 1 << 12,
            rel_tol: 1e-9,
            max_doublings: 12,
        }
    }
}

impl QuadratureConfig {
    pub fn with_base_nodes(mut self, base_nodes: usize) -> Self {
        self.base_nodes = base_nodes;
        self
    }
}

/// ∫_a^b f(x) dx.
///
/// Convergence is judged against `max(|I|, ∫|f|)`, so integrals that cancel
/// to (nearly) zero still terminate.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(DeconvError::Domain(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    let n0 = cfg.base_nodes.max(2);
    let len = b - a;

    let mut h = len / n0 as f64;
    let fa = f(a);
    let fb = f(b);
    let mut sum = 0.5 * (fa + fb);
    let mut abs_sum = 0.5 * (fa.abs() + fb.abs());
    for i in 1..n0 {
        let v = f(a + i as f64 * h);
        sum += v;
        abs_sum += v.abs();
    }
    let scale = abs_sum * h;
    check_finite(sum, a, b)?;

    let mut nodes = n0;
    let mut row = vec![sum * h];
    let mut prev_best = row[0];

    for _ in 0..cfg.max_doublings {
        // Add the midpoints of the current level.
        let mut mid = 0.0;
        for i in 0..nodes {
            mid += f(a + (i as f64 + 0.5) * h);
        }
        check_finite(mid, a, b)?;
        sum += mid;
        nodes *= 2;
        h *= 0.5;

        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(sum * h);
        let mut factor = 1.0;
        for k in 0..row.len() {
            factor *= 4.0;
            let r = next[k] + (next[k] - row[k]) / (factor - 1.0);
            next.push(r);
        }
        let best = *next.last().unwrap();
        let trap_change = (next[0] - row[0]).abs();
        let tol = cfg.rel_tol * best.abs().max(scale);
        if (best - prev_best).abs() <= tol && trap_change.is_finite() {
            return Ok(best);
        }
        prev_best = best;
        row = next;
    }
    Err(DeconvError::Numerical(format!(
        "quadrature on [{a}, {b}] did not reach relative tolerance {} after {} doublings",
        cfg.rel_tol, cfg.max_doublings
    )))
}

fn check_finite(v: f64, a: f64, b: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(DeconvError::Range(format!(
            "integrand is not finite on [{a}, {b}]"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_trig_integrals() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|x| (1.0 + x * x).powi(2), -PI, PI, &cfg).unwrap();
        let exact = 2.0 * (PI + 2.0 * PI.powi(3) / 3.0 + PI.powi(5) / 5.0);
        assert!((v / exact - 1.0).abs() < 1e-12);

        let s = integrate(|x| x.sin(), 0.0, PI, &cfg).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cancelling_integral_terminates() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|x| (3.0 * x).sin(), -1.0, 1.0, &cfg).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn overflow_is_a_range_error() {
        let cfg = QuadratureConfig::default();
        let err = integrate(|x| (x * x).exp(), 0.0, 40.0, &cfg).unwrap_err();
        assert_eq!(err.code(), "RANGE_ERROR");
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = QuadratureConfig {
            base_nodes: 4,
            rel_tol: 1e-15,
            max_doublings: 2,
        };
        let err = integrate(|x| x.abs().sqrt(), -1.0, 1.0, &cfg).unwrap_err();
        assert_eq!(err.code(), "NUMERICAL_ERROR");
    }
}
