//! Euler's Γ on the complex plane.
//!
//! Lanczos approximation (g = 7, nine terms) on Re z ≥ ½ and the reflection
//! formula below it. Relative accuracy is around 1e−15 away from the poles.

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// Γ(z). Returns a non-finite value at the poles z ∈ {0, −1, −2, …}.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z) Γ(1 − z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::from(PI) / (s * gamma(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut acc = Complex64::from(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * acc
}

/// 1/Γ(z), which is entire: exactly zero at the non-positive integers.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if nonpositive_integer(z).is_some() {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        // 1/Γ(z) = Γ(1 − z) sin(πz) / π, finite everywhere
        return gamma(Complex64::new(1.0, 0.0) - z) * (z * PI).sin() / PI;
    }
    gamma(z).inv()
}

/// `Some(k)` when z is exactly the non-positive integer −k.
pub(crate) fn nonpositive_integer(z: Complex64) -> Option<u64> {
    (z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0).then(|| (-z.re) as u64)
}
