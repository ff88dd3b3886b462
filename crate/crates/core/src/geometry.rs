//! Circle-symmetric model surfaces.
//!
//! A surface of revolution is described by an arclength profile `a(s)` on
//! `[0, L]` with metric `ds² + a(s)² dφ²`; `SO(2)` acts by translating `φ`.
//! Either both ends are poles (fixed points of the action) or the profile is
//! periodic and the action is free.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named smooth real function together with its first derivative.
#[derive(Clone)]
pub struct SmoothFn {
    name: String,
    value: RealFn,
    derivative: RealFn,
    constant: Option<f64>,
}

impl SmoothFn {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            constant: None,
        }
    }

    pub fn constant(v: f64) -> Self {
        Self {
            name: if v == 0.0 {
                "zero".to_string()
            } else {
                format!("const({v})")
            },
            value: Arc::new(move |_| v),
            derivative: Arc::new(|_| 0.0),
            constant: Some(v),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.value)(s)
    }

    #[inline]
    pub fn deriv(&self, s: f64) -> f64 {
        (self.derivative)(s)
    }

    /// Second derivative by central differencing of the analytic first derivative.
    pub fn second_deriv(&self, s: f64) -> f64 {
        if self.constant.is_some() {
            return 0.0;
        }
        let step = 1e-5 * (1.0 + s.abs());
        (self.deriv(s + step) - self.deriv(s - step)) / (2.0 * step)
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    /// `alpha * self`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let v = self.value.clone();
        let d = self.derivative.clone();
        Self {
            name: format!("{alpha}*{}", self.name),
            value: Arc::new(move |s| alpha * v(s)),
            derivative: Arc::new(move |s| alpha * d(s)),
            constant: self.constant.map(|c| alpha * c),
        }
    }
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SmoothFn").field(&self.name).finish()
    }
}

/// Potentials available by name to configs and the command line.
pub mod potentials {
    use super::SmoothFn;

    pub fn zero() -> SmoothFn {
        SmoothFn::constant(0.0)
    }

    /// `V(s) = cos² s`.
    pub fn cos_squared() -> SmoothFn {
        SmoothFn::new("cos2", |s: f64| s.cos().powi(2), |s: f64| -(2.0 * s).sin())
    }

    /// `V(s) = (1 - cos s) / 2`.
    pub fn half_one_minus_cos() -> SmoothFn {
        SmoothFn::new(
            "half_one_minus_cos",
            |s: f64| 0.5 * (1.0 - s.cos()),
            |s: f64| 0.5 * s.sin(),
        )
    }

    pub fn by_name(name: &str) -> Option<SmoothFn> {
        match name {
            "zero" => Some(zero()),
            "cos2" => Some(cos_squared()),
            "half_one_minus_cos" => Some(half_one_minus_cos()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 3] = ["zero", "cos2", "half_one_minus_cos"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `a(0) = a(L) = 0`, the two ends are fixed points of the action.
    Poles,
    /// `a(0) = a(L)` with matching derivatives; the action is free.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactBackend {
    Sphere,
    FlatTorus,
    None,
}

#[derive(Clone, Debug)]
pub struct RevolutionSurface {
    name: String,
    profile: SmoothFn,
    length: f64,
    boundary: Boundary,
    potential: SmoothFn,
    exact_backend: ExactBackend,
}

/// Isotropy data of the circle action on a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProfile {
    /// Dimension of principal orbits.
    pub kappa: usize,
    /// Length of the longest totally ordered chain of isotropy types.
    pub lambda: usize,
    /// Order of the principal isotropy group.
    pub principal_isotropy_order: u32,
    pub fixed_points: Vec<f64>,
}

/// A covector at a point of the surface, in `(s, φ, σ, p_φ)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub s: f64,
    pub phi: f64,
    pub sigma: f64,
    pub p_phi: f64,
}

impl PhasePoint {
    pub fn new(s: f64, phi: f64, sigma: f64, p_phi: f64) -> Self {
        Self {
            s,
            phi,
            sigma,
            p_phi,
        }
    }

    /// A point on the zero level of the momentum map.
    pub fn reduced(s: f64, sigma: f64) -> Self {
        Self::new(s, 0.0, sigma, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    Principal,
    /// Fixed point of the action; the orbit measure is a counting measure.
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitVolume {
    pub value: f64,
    pub kind: OrbitKind,
}

pub const BUILTIN_MODELS: [&str; 4] = ["sphere", "flat_torus", "bumpy_torus", "spheroid"];

/// Looks up one of the built-in models (all with `V ≡ 0`).
pub fn builtin_model(name: &str) -> Result<RevolutionSurface> {
    let model = match name {
        "sphere" => RevolutionSurface {
            name: name.into(),
            profile: SmoothFn::new("sin", f64::sin, f64::cos),
            length: PI,
            boundary: Boundary::Poles,
            potential: potentials::zero(),
            exact_backend: ExactBackend::Sphere,
        },
        "flat_torus" => RevolutionSurface {
            name: name.into(),
            profile: SmoothFn::constant(1.0),
            length: TAU,
            boundary: Boundary::Periodic,
            potential: potentials::zero(),
            exact_backend: ExactBackend::FlatTorus,
        },
        "bumpy_torus" => RevolutionSurface {
            name: name.into(),
            profile: SmoothFn::new(
                "1+0.3cos",
                |s: f64| 1.0 + 0.3 * s.cos(),
                |s: f64| -0.3 * s.sin(),
            ),
            length: TAU,
            boundary: Boundary::Periodic,
            potential: potentials::zero(),
            exact_backend: ExactBackend::None,
        },
        "spheroid" => {
            let table = Arc::new(ArclengthTable::spheroid(SPHEROID_AXIS_RATIO));
            let length = table.total_length();
            let t1 = table.clone();
            let t2 = table;
            RevolutionSurface {
                name: name.into(),
                profile: SmoothFn::new(
                    "spheroid",
                    move |s| t1.parameter(s).sin(),
                    move |s| {
                        let t = t2.parameter(s);
                        t.cos() / spheroid_speed(t, SPHEROID_AXIS_RATIO)
                    },
                ),
                length,
                boundary: Boundary::Poles,
                potential: potentials::zero(),
                exact_backend: ExactBackend::None,
            }
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    model.validate()?;
    Ok(model)
}

impl RevolutionSurface {
    /// Builds and validates a custom model.
    pub fn new(
        name: impl Into<String>,
        profile: SmoothFn,
        length: f64,
        boundary: Boundary,
        potential: SmoothFn,
    ) -> Result<Self> {
        let model = Self {
            name: name.into(),
            profile,
            length,
            boundary,
            potential,
            exact_backend: ExactBackend::None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Replaces the potential. A closed-form backend survives only constant shifts.
    pub fn with_potential(mut self, potential: SmoothFn) -> Result<Self> {
        if potential.constant_value().is_none() {
            self.exact_backend = ExactBackend::None;
        }
        self.potential = potential;
        self.validate()?;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn exact_backend(&self) -> ExactBackend {
        self.exact_backend
    }
    pub fn profile(&self) -> &SmoothFn {
        &self.profile
    }
    pub fn potential(&self) -> &SmoothFn {
        &self.potential
    }

    #[inline]
    pub fn a(&self, s: f64) -> f64 {
        self.profile.eval(s)
    }

    #[inline]
    pub fn v(&self, s: f64) -> f64 {
        self.potential.eval(s)
    }

    pub fn action_profile(&self) -> ActionProfile {
        let fixed_points = match self.boundary {
            Boundary::Poles => vec![0.0, self.length],
            Boundary::Periodic => Vec::new(),
        };
        ActionProfile {
            kappa: 1,
            lambda: if fixed_points.is_empty() { 1 } else { 2 },
            principal_isotropy_order: 1,
            fixed_points,
        }
    }

    /// Minimum of `V` over a dense sample.
    pub fn min_potential(&self) -> f64 {
        if let Some(v) = self.potential.constant_value() {
            return v;
        }
        uniform_samples(self.length, 4096)
            .map(|s| self.v(s))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_potential(&self) -> f64 {
        if let Some(v) = self.potential.constant_value() {
            return v;
        }
        uniform_samples(self.length, 4096)
            .map(|s| self.v(s))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidModel {
            name: self.name.clone(),
            reason,
        };
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(fail(format!("length {} must be positive", self.length)));
        }
        let n = 2048;
        for i in 1..n {
            let s = self.length * i as f64 / n as f64;
            let a = self.a(s);
            if !(a > 0.0) {
                return Err(fail(format!("a({s}) = {a} is not positive")));
            }
        }
        let tol = 1e-10;
        match self.boundary {
            Boundary::Poles => {
                let (a0, a1) = (self.a(0.0), self.a(self.length));
                let (d0, d1) = (self.profile.deriv(0.0), self.profile.deriv(self.length));
                if a0.abs() > tol || a1.abs() > tol {
                    return Err(fail(format!("pole values a(0) = {a0}, a(L) = {a1}")));
                }
                if (d0 - 1.0).abs() > tol || (d1 + 1.0).abs() > tol {
                    return Err(fail(format!("pole slopes a'(0) = {d0}, a'(L) = {d1}")));
                }
            }
            Boundary::Periodic => {
                let (a0, a1) = (self.a(0.0), self.a(self.length));
                let (d0, d1) = (self.profile.deriv(0.0), self.profile.deriv(self.length));
                if (a0 - a1).abs() > tol || (d0 - d1).abs() > tol {
                    return Err(fail("profile is not periodic".into()));
                }
                if !(a0 > 0.0) {
                    return Err(fail(format!("periodic profile vanishes: a(0) = {a0}")));
                }
            }
        }
        let vmin = self.min_potential();
        if !vmin.is_finite() {
            return Err(fail("potential is not bounded below".into()));
        }
        Ok(())
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        if !(0.0..=self.length).contains(&s) {
            return Err(Error::OutOfDomain {
                s,
                length: self.length,
            });
        }
        Ok(())
    }

    /// Serializable snapshot of the model on a uniform grid of `samples + 1` points.
    pub fn document(&self, samples: usize) -> ModelDocument {
        let grid: Vec<f64> = (0..=samples)
            .map(|i| self.length * i as f64 / samples as f64)
            .collect();
        ModelDocument {
            name: self.name.clone(),
            length: self.length,
            boundary: self.boundary,
            exact_backend: self.exact_backend,
            potential: self.potential.name().to_string(),
            a: grid.iter().map(|&s| self.a(s)).collect(),
            v: grid.iter().map(|&s| self.v(s)).collect(),
            s: grid,
            action_profile: self.action_profile(),
        }
    }

    /// SHA-256 of the canonical JSON snapshot; keys spectrum caches.
    pub fn content_hash(&self) -> String {
        let doc = serde_json::to_vec(&self.document(256)).expect("model snapshot serializes");
        hex::encode(Sha256::digest(&doc))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub name: String,
    #[serde(rename = "L")]
    pub length: f64,
    pub boundary: Boundary,
    pub exact_backend: ExactBackend,
    pub potential: String,
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub action_profile: ActionProfile,
}

/// JSON catalog of all built-in models.
pub fn catalog_document(samples: usize) -> Vec<ModelDocument> {
    BUILTIN_MODELS
        .iter()
        .map(|n| {
            builtin_model(n)
                .expect("built-ins validate")
                .document(samples)
        })
        .collect()
}

fn uniform_samples(length: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| length * i as f64 / n as f64)
}

/// Riemannian length of the orbit through `s`.
pub fn orbit_volume(model: &RevolutionSurface, s: f64) -> Result<OrbitVolume> {
    model.check_domain(s)?;
    let is_pole = model.boundary == Boundary::Poles && (s == 0.0 || s == model.length);
    let a = model.a(s);
    if is_pole || a == 0.0 {
        return Ok(OrbitVolume {
            value: 1.0,
            kind: OrbitKind::FixedPoint,
        });
    }
    Ok(OrbitVolume {
        value: TAU * a,
        kind: OrbitKind::Principal,
    })
}

/// `p(x, ξ) = |ξ|²_x + V(x)` in surface-of-revolution coordinates.
pub fn hamiltonian_p(model: &RevolutionSurface, pt: &PhasePoint) -> f64 {
    let a = model.a(pt.s);
    pt.sigma * pt.sigma + pt.p_phi * pt.p_phi / (a * a) + model.v(pt.s)
}

/// `∫_M f dM` by nested adaptive quadrature in `(s, φ)`.
pub fn surface_integral<F>(model: &RevolutionSurface, f: F, tol: Tolerance) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    quad::integrate(
        |s| {
            let inner = quad::integrate(|phi| f(s, phi), 0.0, TAU, tol).value;
            inner * model.a(s)
        },
        0.0,
        model.length,
        tol,
    )
    .value
}

/// `∫ 2π a(s) ⟨f⟩_G(s) ds`: integrate orbit averages over the orbit space.
pub fn fibered_integral<F>(model: &RevolutionSurface, f: F, tol: Tolerance) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    quad::integrate(
        |s| TAU * model.a(s) * quad::circle_mean(|phi| f(s, phi), 64),
        0.0,
        model.length,
        tol,
    )
    .value
}

/// Polar semi-axis over equatorial semi-axis.
pub const SPHEROID_AXIS_RATIO: f64 = 1.5;

fn spheroid_speed(t: f64, ratio: f64) -> f64 {
    (t.cos().powi(2) + ratio * ratio * t.sin().powi(2)).sqrt()
}

/// Monotone cubic Hermite inverse of the arclength map `t ↦ s(t)` of the
/// meridian `(sin t, ratio·cos t)`, `t ∈ [0, π]`.
#[derive(Debug)]
struct ArclengthTable {
    s: Vec<f64>,
    t: Vec<f64>,
    dtds: Vec<f64>,
}

impl ArclengthTable {
    const NODES: usize = 4096;

    fn spheroid(ratio: f64) -> Self {
        let n = Self::NODES;
        let tol = Tolerance::new(1e-15, 1e-14);
        let mut s = Vec::with_capacity(n + 1);
        let mut t = Vec::with_capacity(n + 1);
        let mut dtds = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        for i in 0..=n {
            let ti = PI * i as f64 / n as f64;
            if i > 0 {
                let t0 = t[i - 1];
                acc += quad::integrate(|x| spheroid_speed(x, ratio), t0, ti, tol).value;
            }
            s.push(acc);
            t.push(ti);
            dtds.push(1.0 / spheroid_speed(ti, ratio));
        }
        Self { s, t, dtds }
    }

    fn total_length(&self) -> f64 {
        *self.s.last().unwrap()
    }

    fn parameter(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total_length());
        let idx = match self.s.binary_search_by(|x| x.total_cmp(&s)) {
            Ok(i) => return self.t[i],
            Err(i) => i.clamp(1, self.s.len() - 1) - 1,
        };
        let (s0, s1) = (self.s[idx], self.s[idx + 1]);
        let width = s1 - s0;
        let u = (s - s0) / width;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.t[idx]
            + h10 * width * self.dtds[idx]
            + h01 * self.t[idx + 1]
            + h11 * width * self.dtds[idx + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_profile_at_equator() {
        let m = builtin_model("sphere").unwrap();
        assert_eq!(m.a(PI / 2.0), 1.0);
    }

    #[test]
    fn flat_torus_is_free() {
        let m = builtin_model("flat_torus").unwrap();
        assert_eq!(m.boundary(), Boundary::Periodic);
        let ap = m.action_profile();
        assert_eq!(ap.lambda, 1);
        assert!(ap.fixed_points.is_empty());
    }

    #[test]
    fn sphere_has_two_fixed_points() {
        let ap = builtin_model("sphere").unwrap().action_profile();
        assert_eq!(ap.kappa, 1);
        assert_eq!(ap.lambda, 2);
        assert_eq!(ap.fixed_points, vec![0.0, PI]);
    }

    #[test]
    fn unknown_model_is_rejected() {
        assert!(matches!(
            builtin_model("klein"),
            Err(Error::UnknownModel(_))
        ));
    }

    #[test]
    fn orbit_volumes() {
        let sphere = builtin_model("sphere").unwrap();
        let torus = builtin_model("flat_torus").unwrap();
        assert!((orbit_volume(&sphere, PI / 2.0).unwrap().value - TAU).abs() < 1e-15);
        for s in [0.0, 1.0, 5.0] {
            assert_eq!(orbit_volume(&torus, s).unwrap().value, TAU);
        }
        // circumference as a line integral of the orbit circle of radius sin(π/6)
        let r = (PI / 6.0).sin();
        let oracle = quad::integrate(
            |phi| {
                let (dx, dy) = (-r * phi.sin(), r * phi.cos());
                (dx * dx + dy * dy).sqrt()
            },
            0.0,
            TAU,
            Tolerance::default(),
        )
        .value;
        let v = orbit_volume(&sphere, PI / 6.0).unwrap();
        assert!((v.value - oracle).abs() < 1e-12);
        assert!((v.value - PI).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_orbit_uses_counting_measure() {
        let sphere = builtin_model("sphere").unwrap();
        let v = orbit_volume(&sphere, 0.0).unwrap();
        assert_eq!(v.kind, OrbitKind::FixedPoint);
        assert_eq!(v.value, 1.0);
        assert!(orbit_volume(&sphere, 4.0).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let torus = builtin_model("flat_torus").unwrap();
        assert_eq!(
            hamiltonian_p(&torus, &PhasePoint::new(0.0, 0.0, 1.0, 0.0)),
            1.0
        );
        let sphere = builtin_model("sphere").unwrap();
        let p = hamiltonian_p(&sphere, &PhasePoint::new(PI / 2.0, 0.3, 0.6, 0.8));
        assert!((p - 1.0).abs() < 1e-15);
        let with_v = sphere.with_potential(potentials::cos_squared()).unwrap();
        let p = hamiltonian_p(&with_v, &PhasePoint::new(PI / 2.0, 0.0, 0.0, 0.0));
        assert!(p.abs() < 1e-30);
    }

    #[test]
    fn hamiltonian_ignores_angle() {
        for name in BUILTIN_MODELS {
            let m = builtin_model(name).unwrap();
            let base = hamiltonian_p(&m, &PhasePoint::new(0.7, 0.0, 0.4, 0.3));
            for phi in [0.5, 2.0, 6.0] {
                assert_eq!(
                    base,
                    hamiltonian_p(&m, &PhasePoint::new(0.7, phi, 0.4, 0.3))
                );
            }
        }
    }

    #[test]
    fn sphere_pole_regularity() {
        let m = builtin_model("sphere").unwrap();
        for s in [1e-3, 1e-5, 1e-7] {
            assert!((m.a(s) / s.sin() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spheroid_is_arclength_parametrized() {
        let m = builtin_model("spheroid").unwrap();
        // equator at t = π/2 sits at half the meridian length
        let half = m.length() / 2.0;
        assert!((m.a(half) - 1.0).abs() < 1e-10);
        // |d/ds (sin t, 1.5 cos t)| = 1
        for s in [0.1, 0.9, 1.7, 2.9] {
            let step = 1e-5;
            let t = |s: f64| {
                let x = m.a(s);
                let up = s < half;
                let ct = (1.0 - x * x).max(0.0).sqrt();
                (x, if up { 1.5 * ct } else { -1.5 * ct })
            };
            let (x0, z0) = t(s - step);
            let (x1, z1) = t(s + step);
            let speed = ((x1 - x0).powi(2) + (z1 - z0).powi(2)).sqrt() / (2.0 * step);
            assert!((speed - 1.0).abs() < 1e-6, "speed {speed} at {s}");
        }
    }

    #[test]
    fn periodic_validation_rejects_vanishing_profile() {
        let bad = RevolutionSurface::new(
            "bad",
            SmoothFn::new("cos", |s: f64| 1.0 + s.cos(), |s: f64| -s.sin()),
            TAU,
            Boundary::Periodic,
            potentials::zero(),
        );
        assert!(matches!(bad, Err(Error::InvalidModel { .. })));
    }

    #[test]
    fn potential_drops_exact_backend() {
        let m = builtin_model("sphere")
            .unwrap()
            .with_potential(potentials::cos_squared())
            .unwrap();
        assert_eq!(m.exact_backend(), ExactBackend::None);
    }

    #[test]
    fn document_round_trips() {
        let doc = builtin_model("bumpy_torus").unwrap().document(32);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"L\""));
        let back: ModelDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(catalog_document(8).len(), 4);
    }
}
