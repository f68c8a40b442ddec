//! Complex elementary functions that stay finite where the textbook
//! formulas overflow or lose accuracy.

use num_complex::Complex64 as C64;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// tanh z without overflow for large |Re z|.
pub fn tanh(z: C64) -> C64 {
    if z.re.abs() < 1.0 {
        return z.tanh();
    }
    // tanh z = (1 − e^{−2z}) / (1 + e^{−2z}) for Re z ≥ 0, odd otherwise.
    let s = if z.re >= 0.0 { 1.0 } else { -1.0 };
    let e = (-2.0 * s * z).exp();
    s * (ONE - e) / (ONE + e)
}

/// sinh(z)/z, with its series near 0.
pub fn sinhc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        ONE + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// (cosh z − 1)/z², with its series near 0.
pub fn coshc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        0.5 + z2 / 24.0 + z2 * z2 / 720.0
    } else {
        // 2 sinh²(z/2) / z² avoids the cancellation in cosh z − 1.
        let h = (z * 0.5).sinh();
        2.0 * h * h / (z * z)
    }
}

/// z coth z, with its series near 0.
pub fn z_coth(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        ONE + z2 / 3.0 - z2 * z2 / 45.0
    } else {
        z / tanh(z)
    }
}

/// ln cosh z, computed without forming cosh z (principal branch of the
/// final logarithm; only e^{ln cosh z} is branch independent).
pub fn ln_cosh(z: C64) -> C64 {
    let s = if z.re >= 0.0 { 1.0 } else { -1.0 };
    let w = s * z;
    w + ((ONE + (-2.0 * w).exp()) * 0.5).ln()
}
