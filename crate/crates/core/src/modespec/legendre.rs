//! Orthonormal associated Legendre functions by stable upward recurrence.

use std::f64::consts::PI;

/// `Y_l^m(θ, 0)` for `m ≥ 0`: normalized so that `2π ∫_0^π |Y|² sin θ dθ = 1`.
/// Condon–Shortley phase omitted.
pub fn normalized_legendre(l: u64, m: u64, theta: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let (x, sin) = (theta.cos(), theta.sin().abs());
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for i in 1..=m {
        let i = i as f64;
        pmm *= ((2.0 * i + 1.0) / (2.0 * i)).sqrt() * sin;
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = x * (2.0 * mf + 3.0).sqrt() * pmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨cos²θ⟩` in the orthonormal harmonic `Y_l^m`.
pub fn cos_squared_expectation(l: u64, m: u64) -> f64 {
    let (l, m) = (l as f64, m as f64);
    (2.0 * l * (l + 1.0) - 2.0 * m * m - 1.0) / ((2.0 * l - 1.0) * (2.0 * l + 3.0))
}
