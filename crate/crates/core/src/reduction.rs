//! Reduced phase space `T*M̃_reg` with coordinates `(s, σ)` and `p̃ = σ² + V(s)`.
//!
//! For the circle action, `Ω = {p_φ = 0}` and the quotient of its regular part
//! is the cotangent bundle of the open meridian interval. The leading terms
//! of the Weyl laws live here:
//!
//! * `vol Σ̃_c = ∫ ds / √(c − V(s))` over the classically allowed set, the
//!   thin-shell normalization of the level curve `p̃ = c`;
//! * `∫_{Σ̃_c} ⟨b⟩_G dΣ̃_c` for orbit-averaged symbols;
//! * `∫∫ ⟨b⟩_G ρ(p̃) dσ ds` for trace-formula leading terms.
//!
//! [`thin_shell_measure`] computes the shell limit by brute-force 2D
//! quadrature and serves as an independent oracle.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{PhasePoint, RevolutionSurface};
use crate::mollify::EnergyFunction;
use crate::quad::{self, circle_mean, find_root, Tolerance};

/// A phase-space function on `T*M`.
pub trait Symbol: Sync {
    fn eval(&self, pt: &PhasePoint) -> f64;

    /// `true` if the symbol ignores `φ`; averaging then reads one sample.
    fn phi_invariant(&self) -> bool {
        false
    }
}

impl<F> Symbol for F
where
    F: Fn(&PhasePoint) -> f64 + Sync,
{
    fn eval(&self, pt: &PhasePoint) -> f64 {
        self(pt)
    }
}

/// The constant symbol `1`.
pub struct Unit;

impl Symbol for Unit {
    fn eval(&self, _: &PhasePoint) -> f64 {
        1.0
    }

    fn phi_invariant(&self) -> bool {
        true
    }
}

/// A `φ`-independent symbol `b(s, σ)`.
pub struct Invariant<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> Symbol for Invariant<F> {
    fn eval(&self, pt: &PhasePoint) -> f64 {
        (self.0)(pt.s, pt.sigma)
    }

    fn phi_invariant(&self) -> bool {
        true
    }
}

const ORBIT_NODES: usize = 64;

/// `⟨b⟩_G(s, σ, p_φ)`, the mean of `b` over the orbit.
pub fn averaged_symbol(b: &dyn Symbol, s: f64, sigma: f64, p_phi: f64) -> f64 {
    if b.phi_invariant() {
        return b.eval(&PhasePoint::new(s, 0.0, sigma, p_phi));
    }
    circle_mean(
        |phi| b.eval(&PhasePoint::new(s, phi, sigma, p_phi)),
        ORBIT_NODES,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct ReducedPhaseSpace<'a> {
    pub model: &'a RevolutionSurface,
}

impl<'a> ReducedPhaseSpace<'a> {
    pub fn new(model: &'a RevolutionSurface) -> Self {
        Self { model }
    }

    /// `p̃(s, σ) = σ² + V(s)`
    pub fn hamiltonian(&self, s: f64, sigma: f64) -> f64 {
        sigma * sigma + self.model.v(s)
    }
}

/// An interval of `{V < c}` with flags for turning-point ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllowedInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_turning: bool,
    pub hi_turning: bool,
}

/// The level curve `p̃ = c`, parametrized by its two branches `σ = ±√(c − V)`.
#[derive(Debug, Clone)]
pub struct ReducedHypersurface<'a> {
    pub model: &'a RevolutionSurface,
    pub c: f64,
    pub allowed: Vec<AllowedInterval>,
}

const SCAN_POINTS: usize = 4096;
const REGULARITY_TOL: f64 = 1e-8;

impl<'a> ReducedHypersurface<'a> {
    /// Locates the allowed set and checks that `c` is a regular value of `p̃`.
    pub fn new(model: &'a RevolutionSurface, c: f64) -> Result<Self> {
        let l = model.length();
        let g = |s: f64| c - model.v(s);
        let scale = 1.0 + c.abs();
        let at = |i: usize| l * i as f64 / SCAN_POINTS as f64;

        let mut crossings: Vec<f64> = Vec::new();
        let mut prev = g(0.0);
        for i in 0..=SCAN_POINTS {
            let s = at(i);
            let gi = g(s);
            if gi.abs() <= 1e-12 * scale {
                let dv = model.potential().deriv(s).abs();
                if dv <= REGULARITY_TOL {
                    return Err(Error::NonRegularValue { c, s });
                }
            }
            if i > 0 && (prev < 0.0) != (gi < 0.0) {
                let root = find_root(g, at(i - 1), s, 1e-15 * l).unwrap_or(s);
                if model.potential().deriv(root).abs() <= REGULARITY_TOL {
                    return Err(Error::NonRegularValue { c, s: root });
                }
                crossings.push(root);
            }
            // a local maximum of V touching c between samples
            if i >= 2 {
                let (g0, g1) = (g(at(i - 2)), g(at(i - 1)));
                if g1 < g0 && g1 < gi && g1 > 0.0 {
                    let (lo, hi) = (at(i - 2), s);
                    let t = golden_min(&g, lo, hi);
                    if g(t) <= 1e-10 * scale {
                        return Err(Error::NonRegularValue { c, s: t });
                    }
                }
            }
            prev = gi;
        }

        let mut allowed = Vec::new();
        let mut start = if g(0.0) > 0.0 {
            Some((0.0, false))
        } else {
            None
        };
        for &r in &crossings {
            match start.take() {
                Some((lo, lo_turning)) => allowed.push(AllowedInterval {
                    lo,
                    hi: r,
                    lo_turning,
                    hi_turning: true,
                }),
                None => start = Some((r, true)),
            }
        }
        if let Some((lo, lo_turning)) = start {
            allowed.push(AllowedInterval {
                lo,
                hi: l,
                lo_turning,
                hi_turning: false,
            });
        }
        allowed.retain(|iv| iv.hi > iv.lo);
        Ok(Self { model, c, allowed })
    }

    /// `σ₊(s) = √(c − V(s))`, or `None` outside the allowed set.
    pub fn branch(&self, s: f64) -> Option<f64> {
        let g = self.c - self.model.v(s);
        (g >= 0.0).then(|| g.sqrt())
    }

    /// `1/√(c − V(s))`, the density of `dΣ̃_c` in `s` (both branches combined).
    pub fn density(&self, s: f64) -> f64 {
        1.0 / (self.c - self.model.v(s)).sqrt()
    }

    /// `∫ F(s) ds / √(c − V(s))` over the allowed set within `[s0, s1]`.
    fn weighted_integral(
        &self,
        numerator: &dyn Fn(f64) -> f64,
        s0: f64,
        s1: f64,
        tol: Tolerance,
    ) -> Estimate {
        let mut total = Estimate::default();
        for iv in &self.allowed {
            let lo = iv.lo.max(s0);
            let hi = iv.hi.min(s1);
            if hi <= lo {
                continue;
            }
            let mut a = lo;
            let mut b = hi;
            if iv.lo_turning && lo == iv.lo {
                let w = self.turning_width(iv.lo, 1.0, hi - lo);
                total.add(self.turning_piece(numerator, iv.lo, w, tol));
                a = iv.lo + w;
            }
            if iv.hi_turning && hi == iv.hi {
                let w = self.turning_width(iv.hi, -1.0, b - a);
                total.add(self.turning_piece(numerator, iv.hi, -w, tol));
                b = iv.hi - w;
            }
            if b > a {
                let e = quad::integrate(|s| numerator(s) * self.density(s), a, b, tol);
                total.add(Estimate::from(e));
            }
        }
        total
    }

    /// Largest `w ≤ room/2` with `|V''| w ≤ 0.1 |V'|` and `V` monotone on the
    /// stretch from the turning point `t` in direction `dir`.
    fn turning_width(&self, t: f64, dir: f64, room: f64) -> f64 {
        let v = self.model.potential();
        let sign = v.deriv(t).signum();
        let mut w = 0.5 * room;
        for _ in 0..60 {
            let s = t + dir * w;
            let d1 = v.deriv(s);
            let monotone = (1..=8).all(|i| {
                let x = t + dir * w * i as f64 / 8.0;
                v.deriv(x).signum() == sign
            });
            if monotone && v.second_deriv(s).abs() * w <= 0.1 * d1.abs() {
                return w;
            }
            w *= 0.5;
        }
        w
    }

    /// `∫_t^{t+w} F ds/√(c−V)` via `u = √(c − V(s))`, `ds/√(c−V) = 2 du/|V'(s)|`.
    fn turning_piece(
        &self,
        numerator: &dyn Fn(f64) -> f64,
        t: f64,
        w: f64,
        tol: Tolerance,
    ) -> Estimate {
        let v = self.model.potential();
        let end = t + w;
        let u_end = (self.c - v.eval(end)).max(0.0).sqrt();
        let (lo, hi) = if w > 0.0 { (t, end) } else { (end, t) };
        let s_of_u = |u: f64| {
            let target = self.c - u * u;
            find_root(|s| v.eval(s) - target, lo, hi, 1e-15 * (1.0 + hi.abs())).unwrap_or(t)
        };
        let e = quad::integrate(
            |u| {
                let s = s_of_u(u);
                2.0 * numerator(s) / v.deriv(s).abs()
            },
            0.0,
            u_end,
            tol,
        );
        Estimate::from(e)
    }
}

/// Quadrature value with accumulated error estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    fn add(&mut self, other: Estimate) {
        self.value += other.value;
        self.error += other.error;
    }
}

impl From<quad::Estimate> for Estimate {
    fn from(e: quad::Estimate) -> Self {
        Self {
            value: e.value,
            error: e.error,
        }
    }
}

const LEADING_TOL: Tolerance = Tolerance::new(1e-13, 1e-12);

/// `vol_{dΣ̃_c} Σ̃_c = ∫_{V<c} ds / √(c − V(s))`.
pub fn reduced_volume(model: &RevolutionSurface, c: f64) -> Result<f64> {
    sigma_c_integral(model, c, &Unit)
}

pub fn reduced_volume_estimate(model: &RevolutionSurface, c: f64) -> Result<Estimate> {
    sigma_c_estimate(model, c, &Unit, 0.0, model.length())
}

/// [`reduced_volume`] restricted to `s ∈ [s0, s1]`.
pub fn reduced_volume_truncated(
    model: &RevolutionSurface,
    c: f64,
    s0: f64,
    s1: f64,
) -> Result<f64> {
    Ok(sigma_c_estimate(model, c, &Unit, s0, s1)?.value)
}

/// `∫_{Σ̃_c} ⟨b⟩_G dΣ̃_c = ∫ [⟨b⟩(s, σ₊) + ⟨b⟩(s, σ₋)] ds / (2√(c − V))`.
pub fn sigma_c_integral(model: &RevolutionSurface, c: f64, b: &dyn Symbol) -> Result<f64> {
    Ok(sigma_c_estimate(model, c, b, 0.0, model.length())?.value)
}

fn sigma_c_estimate(
    model: &RevolutionSurface,
    c: f64,
    b: &dyn Symbol,
    s0: f64,
    s1: f64,
) -> Result<Estimate> {
    let surface = ReducedHypersurface::new(model, c)?;
    let numerator = |s: f64| {
        let sp = (c - model.v(s)).max(0.0).sqrt();
        0.5 * (averaged_symbol(b, s, sp, 0.0) + averaged_symbol(b, s, -sp, 0.0))
    };
    Ok(surface.weighted_integral(&numerator, s0, s1, LEADING_TOL))
}

const SHELL_TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-11,
    max_intervals: 20_000,
};

/// `(1/ε) ∫∫_{c ≤ p̃ ≤ c+ε} f(s, σ) dσ ds` by nested adaptive quadrature.
pub fn thin_shell_measure<F>(model: &RevolutionSurface, c: f64, eps: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shell width {eps} must be positive"
        )));
    }
    let l = model.length();
    let v = |s: f64| model.v(s);
    let top = c + eps;
    let mut cuts = level_crossings(&v, c, l);
    cuts.extend(level_crossings(&v, top, l));
    let mut points = vec![0.0, l];
    points.extend(cuts);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let nonempty = (0..=SCAN_POINTS).any(|i| v(l * i as f64 / SCAN_POINTS as f64) < top);
    if !nonempty {
        return Err(Error::ZeroShell { c, eps });
    }
    let slice = |s: f64| {
        let vs = v(s);
        if vs >= top {
            return 0.0;
        }
        let outer = (top - vs).sqrt();
        if vs >= c {
            quad::integrate(|sig| f(s, sig), -outer, outer, SHELL_TOL).value
        } else {
            let inner = (c - vs).sqrt();
            quad::integrate(|sig| f(s, sig), inner, outer, SHELL_TOL).value
                + quad::integrate(|sig| f(s, sig), -outer, -inner, SHELL_TOL).value
        }
    };
    Ok(quad::integrate_pieces(&slice, &points, SHELL_TOL).value / eps)
}

fn level_crossings(v: &dyn Fn(f64) -> f64, level: f64, l: f64) -> Vec<f64> {
    let at = |i: usize| l * i as f64 / SCAN_POINTS as f64;
    let mut out = Vec::new();
    for i in 1..=SCAN_POINTS {
        let (a, b) = (at(i - 1), at(i));
        let (ga, gb) = (v(a) - level, v(b) - level);
        if (ga < 0.0) != (gb < 0.0) {
            // plain bisection keeps this path independent of the Illinois solver
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (v(mid) - level < 0.0) == (ga < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out
}

const OMEGA_TOL: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-12,
    max_intervals: 20_000,
};

/// `∫∫ ⟨b⟩_G(s, σ, 0) ρ(σ² + V(s)) dσ ds`.
pub fn omega_weighted_integral(
    model: &RevolutionSurface,
    b: &dyn Symbol,
    rho: &dyn EnergyFunction,
) -> f64 {
    let Some((e_lo, e_hi)) = rho.support() else {
        return 0.0;
    };
    let l = model.length();
    let v = |s: f64| model.v(s);
    let mut levels = rho.breakpoints();
    levels.push(e_lo);
    levels.push(e_hi);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut points = vec![0.0, l];
    for &lv in &levels {
        points.extend(level_crossings(&v, lv, l));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let slice = |s: f64| {
        let vs = v(s);
        if vs >= e_hi {
            return 0.0;
        }
        let mut cuts: Vec<f64> = levels
            .iter()
            .filter(|&&lv| lv > vs)
            .map(|&lv| (lv - vs).sqrt())
            .collect();
        cuts.insert(0, 0.0);
        let integrand = |sig: f64| {
            rho.value(sig * sig + vs)
                * 0.5
                * (averaged_symbol(b, s, sig, 0.0) + averaged_symbol(b, s, -sig, 0.0))
        };
        // symmetrized over ±σ, so integrate σ ≥ 0 and double
        2.0 * quad::integrate_pieces(&integrand, &cuts, OMEGA_TOL).value
    };
    quad::integrate_pieces(&slice, &points, OMEGA_TOL).value
}

/// `∫ ρ(c) vol Σ̃_c dc` over `[c0, c1]`, splitting at `breaks`.
pub fn coarea_integral(
    model: &RevolutionSurface,
    rho: &dyn EnergyFunction,
    breaks: &[f64],
) -> Result<f64> {
    let Some((lo, hi)) = rho.support() else {
        return Ok(0.0);
    };
    let mut points = vec![lo, hi];
    points.extend(rho.breakpoints());
    points.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    points.sort_by(f64::total_cmp);
    points.dedup();
    let err = std::cell::Cell::new(None);
    let tol = Tolerance::new(1e-12, 1e-10);
    let v = quad::integrate_pieces(
        &|c: f64| {
            let r = rho.value(c);
            if r == 0.0 {
                return 0.0;
            }
            match reduced_volume(model, c) {
                Ok(vol) => r * vol,
                Err(e) => {
                    err.set(Some(e.to_string()));
                    0.0
                }
            }
        },
        &points,
        tol,
    );
    match err.into_inner() {
        Some(msg) => Err(Error::InvalidParameter(msg)),
        None => Ok(v.value),
    }
}

/// Rows `(c, volume, method, error_estimate)`.
pub fn reduced_volume_csv(model: &RevolutionSurface, cs: &[f64]) -> Result<String> {
    let mut out = String::from("c,volume,method,error_estimate\n");
    for &c in cs {
        let e = reduced_volume_estimate(model, c)?;
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},turning_point_quadrature,{:.3e}",
            c, e.value, e.error
        );
    }
    Ok(out)
}

/// Total phase-space area `2π · ∫ ds` of the orbit space, for reference scales.
pub fn meridian_length_area(model: &RevolutionSurface) -> f64 {
    TAU * model.length()
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_model, potentials, SmoothFn};
    use crate::mollify::bump;
    use std::f64::consts::PI;

    fn tilted_torus() -> RevolutionSurface {
        builtin_model("flat_torus")
            .unwrap()
            .with_potential(potentials::half_one_minus_cos().scaled(0.75))
            .unwrap()
    }

    #[test]
    fn orbit_averages() {
        let inv = Invariant(|s: f64, sig: f64| s + sig);
        assert_eq!(averaged_symbol(&inv, 0.3, 0.2, 0.0), 0.5);
        let c2 = |p: &PhasePoint| p.phi.cos().powi(2);
        assert!((averaged_symbol(&c2, 0.1, 0.0, 0.0) - 0.5).abs() < 1e-15);
        let c1 = |p: &PhasePoint| p.phi.cos();
        assert!(averaged_symbol(&c1, 0.1, 0.0, 0.0).abs() < 1e-14);
    }

    #[test]
    fn reduced_hamiltonian_matches_full() {
        let m = tilted_torus();
        let rps = ReducedPhaseSpace::new(&m);
        for &(s, sig) in &[(0.1, 0.2), (2.0, -1.0), (5.0, 0.7)] {
            let full = crate::geometry::hamiltonian_p(&m, &PhasePoint::reduced(s, sig));
            assert_eq!(rps.hamiltonian(s, sig), full);
        }
    }

    #[test]
    fn volumes_without_potential() {
        let sphere = builtin_model("sphere").unwrap();
        assert!((reduced_volume(&sphere, 1.0).unwrap() - PI).abs() < 1e-12);
        let torus = builtin_model("flat_torus").unwrap();
        assert!((reduced_volume(&torus, 1.0).unwrap() - TAU).abs() < 1e-12);
        assert!((reduced_volume(&torus, 4.0).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn turning_points_closed_form() {
        // V = 0.375 (1 - cos s), c = 0.5: turning points at cos s = -1/3
        let m = tilted_torus();
        let hs = ReducedHypersurface::new(&m, 0.5).unwrap();
        assert_eq!(hs.allowed.len(), 2);
        let got = reduced_volume(&m, 0.5).unwrap();
        // oracle: ∫ ds/√(c - V) = 4/√(2A) K(k²) with k² = c/(2A), A = 0.375 for V = A(1 - cos s)
        let a = 0.375;
        let m2 = 0.5 / (2.0 * a);
        let k = complete_elliptic_k(m2);
        let expect = 4.0 / (2.0 * a).sqrt() * k;
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    // AGM evaluation of K(m), parameter convention m = k²
    fn complete_elliptic_k(m: f64) -> f64 {
        let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
        for _ in 0..40 {
            let (na, nb) = (0.5 * (a + b), (a * b).sqrt());
            a = na;
            b = nb;
        }
        PI / (2.0 * a)
    }

    #[test]
    fn critical_values_rejected() {
        let m = builtin_model("flat_torus")
            .unwrap()
            .with_potential(potentials::half_one_minus_cos())
            .unwrap();
        assert!(matches!(
            reduced_volume(&m, 1.0),
            Err(Error::NonRegularValue { .. })
        ));
        assert!(matches!(
            reduced_volume(&m, 0.0),
            Err(Error::NonRegularValue { .. })
        ));
        assert!(reduced_volume(&m, 0.5).is_ok());
    }

    #[test]
    fn thin_shell_oracle() {
        let sphere = builtin_model("sphere").unwrap();
        let v = thin_shell_measure(&sphere, 1.0, 1e-3, |_, _| 1.0).unwrap();
        // closed form 2π(√(1+ε) − 1)/ε
        let closed = TAU * ((1.0f64 + 1e-3).sqrt() - 1.0) / 1e-3;
        assert!((v - closed).abs() < 1e-9);
        assert!((v - PI).abs() < 2e-3);
        assert_eq!(
            thin_shell_measure(&sphere, 1.0, 1e-3, |_, _| 0.0).unwrap(),
            0.0
        );
        assert!(matches!(
            thin_shell_measure(&sphere, -1.0, 0.5, |_, _| 1.0),
            Err(Error::ZeroShell { .. })
        ));
    }

    #[test]
    fn sigma_c_examples() {
        let sphere = builtin_model("sphere").unwrap();
        let sig2 = Invariant(|_: f64, s: f64| s * s);
        assert!((sigma_c_integral(&sphere, 1.0, &sig2).unwrap() - PI).abs() < 1e-12);
        let odd = Invariant(|_: f64, s: f64| s);
        assert!(sigma_c_integral(&sphere, 1.0, &odd).unwrap().abs() < 1e-14);
        assert_eq!(
            sigma_c_integral(&sphere, 1.0, &Unit).unwrap(),
            reduced_volume(&sphere, 1.0).unwrap()
        );
    }

    #[test]
    fn omega_examples() {
        let torus = builtin_model("flat_torus").unwrap();
        let rho = bump(1.0, 0.5, 1.0).unwrap();
        let v = omega_weighted_integral(&torus, &Unit, &rho);
        // oracle: 2π ∫ ρ(σ²) dσ in one dimension
        let one_d = quad::integrate_pieces(
            &|s: f64| rho.eval(s * s),
            &[-1.5f64.sqrt(), -0.5f64.sqrt(), 0.5f64.sqrt(), 1.5f64.sqrt()],
            Tolerance::new(1e-14, 1e-13),
        )
        .value;
        assert!((v - TAU * one_d).abs() < 1e-10 * v);
        let odd = Invariant(|_: f64, s: f64| s.powi(3));
        assert!(omega_weighted_integral(&torus, &odd, &rho).abs() < 1e-12);
        let zero = crate::mollify::TestFunction::zero();
        assert_eq!(omega_weighted_integral(&torus, &Unit, &zero), 0.0);
    }

    #[test]
    fn truncation_converges_at_first_order() {
        let sphere = builtin_model("sphere")
            .unwrap()
            .with_potential(SmoothFn::new(
                "c2",
                |s: f64| 0.5 * s.cos().powi(2),
                |s: f64| -0.5 * (2.0 * s).sin(),
            ))
            .unwrap();
        let full = reduced_volume(&sphere, 1.0).unwrap();
        let errs: Vec<f64> = [1e-2, 1e-3]
            .iter()
            .map(|&d| (full - reduced_volume_truncated(&sphere, 1.0, d, PI - d).unwrap()).abs())
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
    }
}
