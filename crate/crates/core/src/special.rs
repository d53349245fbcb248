//! Complex log-Gamma and the Harish-Chandra c-function.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-branch-free log Γ(z) (imaginary part is continuous in z, not reduced).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection: Γ(z)Γ(1 − z) = π / sin(πz).
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// c(λ) = Γ(iλ) / (√π Γ(1/2 + iλ)), together with |c(λ)|⁻².
pub fn harish_chandra_c(lambda: f64) -> Result<(Complex64, f64)> {
    if !(lambda > 1e-8) {
        return Err(Error::InvalidInput(format!("c(λ) needs λ > 1e-8, got {lambda}")));
    }
    let l = ln_gamma(Complex64::new(0.0, lambda)) - ln_gamma(Complex64::new(0.5, lambda)) - 0.5 * PI.ln();
    let c = l.exp();
    Ok((c, (-2.0 * l.re).exp()))
}
