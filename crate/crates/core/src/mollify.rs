//! Smooth compactly supported test functions on the energy axis.
//!
//! Everything is built from the profile `ψ(t) = exp(-1/(1-t²))` on `(-1, 1)`
//! and its normalized primitive, the smooth step `S`. Derivatives of any
//! order up to [`MAX_DERIVATIVE`] are exact (Taylor jets), so the derivative
//! growth `‖f^(j)‖_∞ ≤ C_j h^(-γ j)` can be measured rather than assumed.

use std::f64::consts::E;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::jet::{Jet, ORDER};
use crate::quad::{self, Tolerance};

pub const MAX_DERIVATIVE: usize = ORDER;

/// A real function of energy with known compact support.
pub trait EnergyFunction: Sync {
    fn value(&self, e: f64) -> f64;
    /// `None` for the zero function.
    fn support(&self) -> Option<(f64, f64)>;
    /// Points where the function changes character (support and plateau edges).
    fn breakpoints(&self) -> Vec<f64> {
        self.support().map(|(a, b)| vec![a, b]).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// Supported inside the interval, `≤ 1` on it.
    Inner,
    /// Equal to one on a neighbourhood of the interval.
    Outer,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Zero,
    Bump {
        center: f64,
        width: f64,
        height: f64,
    },
    Window {
        c: f64,
        h: f64,
        delta: f64,
        lambda: f64,
        kind: WindowKind,
    },
    /// `outer · (1 - inner)`
    Gap(Box<TestFunction>, Box<TestFunction>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    shape: Shape,
    scale_exponent: f64,
}

fn raw_bump_jet(t: f64) -> Option<Jet> {
    if t.abs() >= 1.0 {
        return None;
    }
    let x = Jet::variable(t);
    let one_minus = x.mul(&x).sub_from(1.0);
    Some(one_minus.recip().scale(-1.0).exp())
}

/// `ψ^(j)(t)`.
fn raw_bump_derivative(t: f64, j: usize) -> f64 {
    raw_bump_jet(t).map_or(0.0, |jet| jet.derivative(j))
}

fn raw_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| quad::integrate(raw_bump, -1.0, 1.0, Tolerance::new(1e-16, 1e-15)).value)
}

/// `sup |ψ^(j)|` for `j = 0..=MAX_DERIVATIVE`, by dense sampling.
fn raw_bump_sup() -> &'static [f64; MAX_DERIVATIVE + 1] {
    static SUP: OnceLock<[f64; MAX_DERIVATIVE + 1]> = OnceLock::new();
    SUP.get_or_init(|| {
        let mut sup = [0.0f64; MAX_DERIVATIVE + 1];
        let n = 20_000;
        for i in 1..n {
            let t = -1.0 + 2.0 * i as f64 / n as f64;
            if let Some(jet) = raw_bump_jet(t) {
                for (j, s) in sup.iter_mut().enumerate() {
                    *s = s.max(jet.derivative(j).abs());
                }
            }
        }
        sup
    })
}

/// Smooth step rising from 0 at `t = -1` to 1 at `t = 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= -1.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let tol = Tolerance::new(1e-16, 1e-14);
    if t <= 0.0 {
        quad::integrate(raw_bump, -1.0, t, tol).value / bump_mass()
    } else {
        1.0 - quad::integrate(raw_bump, t, 1.0, tol).value / bump_mass()
    }
}

fn smooth_step_derivative(t: f64, j: usize) -> f64 {
    if j == 0 {
        smooth_step(t)
    } else {
        raw_bump_derivative(t, j - 1) / bump_mass()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Smooth bump supported on `[center - width, center + width]` with maximum `height`.
pub fn bump(center: f64, width: f64, height: f64) -> Result<TestFunction> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bump width {width} must be positive"
        )));
    }
    Ok(TestFunction {
        shape: Shape::Bump {
            center,
            width,
            height,
        },
        scale_exponent: 0.0,
    })
}

/// Smooth inner or outer approximation of the indicator of `[c, c + h^δ]`
/// with transition shoulders of width `2 h^λ` before rescaling.
pub fn mollified_window(
    c: f64,
    h: f64,
    delta: f64,
    lambda: f64,
    kind: WindowKind,
) -> Result<TestFunction> {
    if !(lambda > 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window exponents must be positive (delta = {delta}, lambda = {lambda})"
        )));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!("h = {h} outside (0, 1]")));
    }
    let width = 3.0 * h.powf(lambda);
    if width >= 0.5 {
        return Err(Error::ShoulderTooWide { width });
    }
    Ok(TestFunction {
        shape: Shape::Window {
            c,
            h,
            delta,
            lambda,
            kind,
        },
        scale_exponent: lambda + delta,
    })
}

impl TestFunction {
    pub fn zero() -> Self {
        Self {
            shape: Shape::Zero,
            scale_exponent: 0.0,
        }
    }

    /// `outer · (1 - inner)`, the part of the outer window not covered by the inner one.
    pub fn shoulder_gap(outer: &TestFunction, inner: &TestFunction) -> Self {
        Self {
            scale_exponent: outer.scale_exponent.max(inner.scale_exponent),
            shape: Shape::Gap(Box::new(outer.clone()), Box::new(inner.clone())),
        }
    }

    pub fn scale_exponent(&self) -> f64 {
        self.scale_exponent
    }

    /// `(rising-shoulder centre, falling-shoulder centre, half-width)` in the
    /// unit coordinate `y`, plus the affine map `x = c + h^δ (y + 1/2)`.
    fn window_geometry(&self) -> Option<(f64, f64, f64, f64, f64)> {
        match self.shape {
            Shape::Window {
                c,
                h,
                delta,
                lambda,
                kind,
            } => {
                let hl = h.powf(lambda);
                let offset = match kind {
                    WindowKind::Inner => 2.0 * hl,
                    WindowKind::Outer => -2.0 * hl,
                };
                Some((-0.5 + offset, 0.5 - offset, hl, c, h.powf(delta)))
            }
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `j`-th derivative at `x`, `j ≤ MAX_DERIVATIVE`.
    pub fn derivative(&self, x: f64, j: usize) -> f64 {
        assert!(j <= MAX_DERIVATIVE, "derivative order {j} not supported");
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Bump {
                center,
                width,
                height,
            } => {
                let t = (x - center) / width;
                if t.abs() >= 1.0 {
                    return 0.0;
                }
                height * E * raw_bump_derivative(t, j) / width.powi(j as i32)
            }
            Shape::Window { .. } => {
                let (yr, yf, hl, c, hd) = self.window_geometry().unwrap();
                let y = (x - c) / hd - 0.5;
                let scale = (hl * hd).powi(j as i32);
                let tr = (y - yr) / hl;
                let tf = (yf - y) / hl;
                if j == 0 {
                    return smooth_step(tr) * smooth_step(tf);
                }
                // shoulders do not overlap (3h^λ < 1/2), so only one factor varies
                if tr < 1.0 {
                    smooth_step_derivative(tr, j) / scale
                } else if tf < 1.0 {
                    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * smooth_step_derivative(tf, j) / scale
                } else {
                    0.0
                }
            }
            Shape::Gap(outer, inner) => (0..=j)
                .map(|i| {
                    let g = if i == j {
                        1.0 - inner.derivative(x, 0)
                    } else {
                        -inner.derivative(x, j - i)
                    };
                    binomial(j, i) * outer.derivative(x, i) * g
                })
                .sum(),
        }
    }

    /// Recorded constants `C_j` with `‖f^(j)‖_∞ ≤ C_j h^(-scale_exponent·j)`.
    pub fn derivative_constants(&self) -> [f64; MAX_DERIVATIVE + 1] {
        let sup = raw_bump_sup();
        let mut out = [0.0; MAX_DERIVATIVE + 1];
        match &self.shape {
            Shape::Zero => {}
            Shape::Bump { width, height, .. } => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = height.abs() * E * sup[j] / width.powi(j as i32);
                }
            }
            Shape::Window { .. } => {
                out[0] = 1.0;
                for (j, o) in out.iter_mut().enumerate().skip(1) {
                    *o = sup[j - 1] / bump_mass();
                }
            }
            Shape::Gap(outer, inner) => {
                let (co, ci) = (outer.derivative_constants(), inner.derivative_constants());
                for (j, o) in out.iter_mut().enumerate() {
                    *o = (0..=j)
                        .map(|i| {
                            let g = if i == j { 1.0 } else { ci[j - i] };
                            binomial(j, i) * co[i] * g
                        })
                        .sum();
                }
            }
        }
        out
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.shape {
            Shape::Zero => None,
            Shape::Bump { center, width, .. } => Some((center - width, center + width)),
            Shape::Window { .. } => {
                let (yr, yf, hl, c, hd) = self.window_geometry().unwrap();
                let to_x = |y: f64| c + hd * (y + 0.5);
                Some((to_x(yr - hl), to_x(yf + hl)))
            }
            Shape::Gap(outer, _) => outer.support(),
        }
    }

    /// Support edges, plateau edges and shoulder centres.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match &self.shape {
            Shape::Zero => Vec::new(),
            Shape::Bump { center, width, .. } => vec![center - width, *center, center + width],
            Shape::Window { .. } => {
                let (yr, yf, hl, c, hd) = self.window_geometry().unwrap();
                [yr - hl, yr, yr + hl, yf - hl, yf, yf + hl]
                    .iter()
                    .map(|y| c + hd * (y + 0.5))
                    .collect()
            }
            Shape::Gap(outer, inner) => {
                let mut p = outer.breakpoints();
                p.extend(inner.breakpoints());
                p
            }
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Dense sample of the support, refined inside each transition region.
    pub fn sample_points(&self, per_region: usize) -> Vec<f64> {
        let Some((lo, hi)) = self.support() else {
            return Vec::new();
        };
        let mut pts: Vec<f64> = (0..=per_region)
            .map(|i| lo + (hi - lo) * i as f64 / per_region as f64)
            .collect();
        let brk = self.breakpoints();
        for w in brk.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 0.25 * (hi - lo) {
                pts.extend((0..=per_region).map(|i| a + (b - a) * i as f64 / per_region as f64));
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

impl EnergyFunction for TestFunction {
    fn value(&self, e: f64) -> f64 {
        self.eval(e)
    }
    fn support(&self) -> Option<(f64, f64)> {
        TestFunction::support(self)
    }
    fn breakpoints(&self) -> Vec<f64> {
        TestFunction::breakpoints(self)
    }
}

/// `max |f^(j)| · h^(scale_exponent·j)` over a dense sample of the support.
pub fn derivative_bound_check(tf: &TestFunction, h: f64, j: usize) -> f64 {
    let scale = h.powf(tf.scale_exponent() * j as f64);
    tf.sample_points(2000)
        .into_iter()
        .map(|x| tf.derivative(x, j).abs())
        .fold(0.0f64, f64::max)
        * scale
}
