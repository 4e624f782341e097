//! Complex Gamma function via the Lanczos approximation (g = 7, 9 terms).

use std::f64::consts::PI;

use num_complex::Complex64;

const G: f64 = 7.0;

/// Lanczos coefficients for g = 7.
const COEFFS: [f64; 9] = [
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

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(z)` on some branch; `exp` of it is `Γ(z)`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut a = Complex64::new(COEFFS[0], 0.0);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + (G + 0.5);
    (z + 0.5) * t.ln() - t + a.ln() + HALF_LN_TWO_PI
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// `ln |Γ(x)|` for real `x`.
pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}

/// `|Γ(l + iy)|` for integer `l ≥ 1`, from
/// `|Γ(1+iy)|² = πy / sinh(πy)` and the recurrence.
pub fn abs_gamma_integer_line(l: u32, y: f64) -> f64 {
    assert!(l >= 1);
    let mut sq = if y == 0.0 { 1.0 } else { PI * y / (PI * y).sinh() };
    for k in 1..l {
        sq *= (k as f64).powi(2) + y * y;
    }
    sq.sqrt()
}
