//! Special functions needed by the builtin noise models.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-branch-free log Gamma for `Re z >= 1/2` (Lanczos, g = 7).
///
/// The imaginary part is only meaningful modulo 2π, which is all the
/// callers need since they exponentiate it.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.5, "ln_gamma is only used on the right half-plane");
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Modulus of Γ(1/2 + ix) / √π, i.e. `(cosh πx)^{-1/2}`, without overflow.
pub fn half_gamma_modulus(x: f64) -> f64 {
    let a = PI * x.abs();
    // (cosh a)^{-1/2} = sqrt(2) e^{-a/2} (1 + e^{-2a})^{-1/2}
    std::f64::consts::SQRT_2 * (-0.5 * a).exp() / (1.0 + (-2.0 * a).exp()).sqrt()
}

/// `sin(πx)/(πx)` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    let a = PI * x;
    if a.abs() < 1e-4 {
        let a2 = a * a;
        1.0 - a2 / 6.0 * (1.0 - a2 / 20.0)
    } else {
        a.sin() / a
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_real_factorials() {
        for (k, fact) in [(1u32, 1.0f64), (2, 1.0), (3, 2.0), (5, 24.0), (8, 5040.0)] {
            let v = ln_gamma(Complex64::new(k as f64, 0.0));
            assert!((v.re - fact.ln()).abs() < 1e-12, "k = {k}");
            assert!(v.im.abs() < 1e-14);
        }
        let half = ln_gamma(Complex64::new(0.5, 0.0));
        assert!((half.re - PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn reflection_modulus_on_critical_line() {
        // |Γ(1/2 + ix)|² = π / cosh(πx)
        for &x in &[0.0, 0.3, 1.0, 2.5, 7.0, 20.0, 60.0] {
            let lg = ln_gamma(Complex64::new(0.5, x));
            let lhs = 2.0 * lg.re;
            let rhs = PI.ln() - (PI * x).cosh().ln();
            assert!((lhs - rhs).abs() < 1e-11, "x = {x}: {lhs} vs {rhs}");
            let modulus = (lg.re - 0.5 * PI.ln()).exp();
            assert!((modulus / half_gamma_modulus(x) - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn ln_gamma_recurrence_in_complex_plane() {
        // Γ(z + 1) = z Γ(z)
        for &(re, im) in &[(0.5, 1.0), (0.7, -3.0), (1.5, 10.0), (2.0, 0.25)] {
            let z = Complex64::new(re, im);
            let lhs = ln_gamma(z + 1.0).exp();
            let rhs = z * ln_gamma(z).exp();
            assert!((lhs - rhs).norm() / rhs.norm() < 1e-12);
        }
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(1.0).abs() < 1e-16);
        assert!((sinc(0.5) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc(1e-5) - (PI * 1e-5).sin() / (PI * 1e-5)).abs() < 1e-15);
    }
}
