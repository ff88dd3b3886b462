//! Adaptive Gauss–Kronrod quadrature and bracketed root finding.
//!
//! Every phase-space integral in the crate bottoms out here. The integrator
//! is a global-subdivision G7/K15 scheme: the interval with the largest
//! error estimate is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod abscissae 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    integrate_pieces(&f, &[a, b], tol)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the
/// subdivision given by `points` (kinks and singularities belong there).
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: Tolerance) -> Estimate {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, err) = kronrod(f, a, b);
        total += value;
        error += err;
        heap.push(Piece {
            a,
            b,
            value,
            error: err,
        });
    }
    let mut intervals = heap.len();
    while error > tol.abs.max(tol.rel * total.abs()) {
        if intervals >= tol.max_intervals {
            return Estimate {
                value: total,
                error,
                converged: false,
            };
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer splittable in floating point
            heap.push(worst);
            return Estimate {
                value: total,
                error,
                converged: false,
            };
        }
        let (v1, e1) = kronrod(f, worst.a, mid);
        let (v2, e2) = kronrod(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        intervals += 1;
    }
    // re-sum to shed accumulated cancellation from the running updates
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Estimate {
        value,
        error,
        converged: true,
    }
}

/// Periodic trapezoid rule with `n` nodes on `[0, 2π)`, normalized to a mean.
pub fn circle_mean<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let step = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| f(i as f64 * step)).sum::<f64>() / n as f64
}

/// Finds a root of `f` in `[a, b]` given a sign change, to absolute tolerance `tol`.
/// Uses the Illinois variant of regula falsi with a bisection fallback.
pub fn find_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut side = 0i8;
    for iter in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if iter % 4 == 3 || !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, Tolerance::default());
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((est.value - exact).abs() < 1e-13);
    }

    #[test]
    fn sqrt_singularity_converges() {
        let est = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-10, 1e-10));
        assert!((est.value - 2.0).abs() < 1e-8, "{est:?}");
    }

    #[test]
    fn circle_mean_of_cos_squared() {
        let m = circle_mean(|p| p.cos().powi(2), 16);
        assert!((m - 0.5).abs() < 1e-15);
    }

    #[test]
    fn root_of_cosine() {
        let r = find_root(f64::cos, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }
}
