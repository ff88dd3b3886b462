//! Window sums over the spectrum and their leading terms.
//!
//! With `n − κ = 1` on surfaces, the sums are
//!
//! * `2π h^{1−δ} / #W_h · Σ_{E_j ∈ [c, c+h^δ]} ⟨B u_j, u_j⟩ / (d_χ [π_χ|_H : 1])`
//!   over eigenfunctions in the components of `W_h`, and
//! * `2πh / #W_h · Σ_j ρ(E_j) ⟨B u_j, u_j⟩ / (d_χ [π_χ|_H : 1])` for traces.
//!
//! Eigenvalues are repeated according to multiplicity throughout.

mod fit;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ExactBackend, RevolutionSurface};
use crate::modespec::{observable_expectation, visit_exact, EigenRecord, Observable};
use crate::mollify::EnergyFunction;
use crate::peterweyl::{family_at, Character, CharacterFamily, SpectrumTable};
pub use fit::{
    compare_and_fit, fit_slope, RateParams, ReportRow, ReportSummary, SlopeFit, TheoremKind,
    WeylReport,
};

use std::f64::consts::TAU;

/// The energy window `[c, c + h^δ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    pub c: f64,
    pub delta: f64,
    /// `false` when `δ` lies outside `(0, 1/(2κ+4))`.
    pub theorem_mode: bool,
}

/// Orbit dimension of the principal type for every built-in action.
pub const KAPPA: u32 = 1;

impl SpectralWindow {
    /// With `strict`, `δ ∉ (0, 1/(2κ+4))` is an error; otherwise such windows
    /// are accepted and marked as outside the theorem range.
    pub fn new(c: f64, delta: f64, strict: bool) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!("window start c = {c}")));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window exponent delta = {delta} must be positive"
            )));
        }
        let bound = 1.0 / (2.0 * f64::from(KAPPA) + 4.0);
        let theorem_mode = delta < bound;
        if strict && !theorem_mode {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} outside (0, {bound:.6}) for kappa = {KAPPA}"
            )));
        }
        Ok(Self {
            c,
            delta,
            theorem_mode,
        })
    }

    pub fn interval(&self, h: f64) -> (f64, f64) {
        (self.c, self.c + h.powf(self.delta))
    }

    /// Energy through which the spectrum must be complete: the window plus
    /// `3 h^{λ+δ}` with `λ = (1 − (2κ+3)ϑ)/(2κ+4) − δ` (clamped at zero).
    pub fn required_coverage(&self, h: f64, theta: f64) -> f64 {
        let k = f64::from(KAPPA);
        let lambda = ((1.0 - (2.0 * k + 3.0) * theta) / (2.0 * k + 4.0) - self.delta).max(0.0);
        self.interval(h).1 + 3.0 * h.powf(lambda + self.delta)
    }
}

/// Checks a family's growth rate against the window-sum hypothesis
/// `ϑ < (1 − (2κ+4)δ)/(2κ+3)`. Returns whether it holds; with `strict`, a
/// violation is an error.
pub fn check_family_rate(
    window: &SpectralWindow,
    fam: &CharacterFamily,
    strict: bool,
) -> Result<bool> {
    let k = f64::from(KAPPA);
    let bound = (1.0 - (2.0 * k + 4.0) * window.delta) / (2.0 * k + 3.0);
    let ok = fam.theta() < bound;
    if strict && !ok {
        return Err(Error::InvalidParameter(format!(
            "growth rate theta = {} not below {bound:.6} at delta = {}",
            fam.theta(),
            window.delta
        )));
    }
    Ok(ok)
}

/// Eigenpairs of one `h`, organized by mode.
pub trait SpectrumSource: Sync {
    fn h(&self) -> f64;
    fn model(&self) -> &RevolutionSurface;
    /// Energy through which mode `k` is complete, `None` if the mode is absent.
    fn coverage(&self, k: i64) -> Option<f64>;
    /// Calls `f` on every eigenpair of mode `k` with energy in `[lo, hi]`,
    /// ascending.
    fn visit(&self, k: i64, lo: f64, hi: f64, f: &mut dyn FnMut(&EigenRecord)) -> Result<()>;
}

/// Eigenspaces of one `h` with their isotypic multiplicities.
pub trait EigenspaceSource: Sync {
    fn h(&self) -> f64;
    /// Energy through which the decomposition is complete across all modes.
    fn complete_through(&self) -> Option<f64>;
    /// Calls `f(repeats, dim, mults)` for eigenvalues in `[lo, hi]`, where
    /// `repeats` is how many eigenfunctions of the eigenspace lie in the
    /// window and `mults[i]` is the multiplicity of `ks[i]`.
    fn visit_eigenspaces(
        &self,
        lo: f64,
        hi: f64,
        ks: &[i64],
        f: &mut dyn FnMut(usize, usize, &[usize]),
    ) -> Result<()>;
}

/// Closed-form spectrum of a model with an exact backend, generated lazily.
#[derive(Debug, Clone)]
pub struct ExactSource<'a> {
    model: &'a RevolutionSurface,
    h: f64,
}

impl<'a> ExactSource<'a> {
    pub fn new(model: &'a RevolutionSurface, h: f64) -> Result<Self> {
        if model.exact_backend() == ExactBackend::None {
            return Err(Error::NoExactBackend(model.name().to_string()));
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::InvalidParameter(format!("h = {h} outside (0, 1]")));
        }
        Ok(Self { model, h })
    }
}

impl SpectrumSource for ExactSource<'_> {
    fn h(&self) -> f64 {
        self.h
    }

    fn model(&self) -> &RevolutionSurface {
        self.model
    }

    fn coverage(&self, _k: i64) -> Option<f64> {
        Some(f64::INFINITY)
    }

    fn visit(&self, k: i64, lo: f64, hi: f64, f: &mut dyn FnMut(&EigenRecord)) -> Result<()> {
        visit_exact(self.model, k, self.h, lo, hi, f)
    }
}

impl EigenspaceSource for ExactSource<'_> {
    fn h(&self) -> f64 {
        self.h
    }

    fn complete_through(&self) -> Option<f64> {
        Some(f64::INFINITY)
    }

    fn visit_eigenspaces(
        &self,
        lo: f64,
        hi: f64,
        ks: &[i64],
        f: &mut dyn FnMut(usize, usize, &[usize]),
    ) -> Result<()> {
        let shift = self.model.potential().constant_value().unwrap_or(0.0);
        let h2 = self.h * self.h;
        let mut mults = vec![0usize; ks.len()];
        // distinct eigenvalues are h² n + shift for integer labels n
        let mut emit = |n: u64, dim: usize, mult: &dyn Fn(i64) -> usize| {
            let e = h2 * n as f64 + shift;
            if e < lo || e > hi {
                return;
            }
            for (m, &k) in mults.iter_mut().zip(ks) {
                *m = mult(k);
            }
            f(dim, dim, &mults);
        };
        match self.model.exact_backend() {
            ExactBackend::Sphere => {
                // l(l+1) labels the eigenspace of dimension 2l + 1
                let mut l = exact_start(lo - shift, h2, |l| (l * (l + 1)) as f64);
                while h2 * (l * (l + 1)) as f64 + shift <= hi {
                    let ll = l;
                    emit(l * (l + 1), 2 * l as usize + 1, &|k: i64| {
                        usize::from(k.unsigned_abs() <= ll)
                    });
                    l += 1;
                }
            }
            ExactBackend::FlatTorus => {
                let mut n = exact_start(lo - shift, h2, |n| n as f64);
                while h2 * n as f64 + shift <= hi {
                    let reps = |k: i64| -> usize {
                        let kk = k.unsigned_abs() * k.unsigned_abs();
                        if kk > n {
                            return 0;
                        }
                        match exact_sqrt(n - kk) {
                            Some(0) => 1,
                            Some(_) => 2,
                            None => 0,
                        }
                    };
                    let r = isqrt(n) as i64;
                    let dim: usize = (-r..=r).map(reps).sum();
                    if dim > 0 {
                        emit(n, dim, &reps);
                    }
                    n += 1;
                }
            }
            ExactBackend::None => return Err(Error::NoExactBackend(self.model.name().to_string())),
        }
        Ok(())
    }
}

fn exact_start(lo: f64, h2: f64, label: impl Fn(u64) -> f64) -> u64 {
    if lo <= 0.0 {
        return 0;
    }
    // binary search for the first label with h² label(n) >= lo
    let (mut a, mut b) = (0u64, 1u64);
    while h2 * label(b) < lo {
        a = b;
        b *= 2;
    }
    while a < b {
        let m = a + (b - a) / 2;
        if h2 * label(m) < lo {
            a = m + 1;
        } else {
            b = m;
        }
    }
    a
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn exact_sqrt(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Spectrum table paired with the model its vectors live on.
#[derive(Debug, Clone, Copy)]
pub struct TableSource<'a> {
    pub table: &'a SpectrumTable,
    pub model: &'a RevolutionSurface,
}

impl SpectrumSource for TableSource<'_> {
    fn h(&self) -> f64 {
        self.table.h()
    }

    fn model(&self) -> &RevolutionSurface {
        self.model
    }

    fn coverage(&self, k: i64) -> Option<f64> {
        self.table.mode_coverage(k)
    }

    fn visit(&self, k: i64, lo: f64, hi: f64, f: &mut dyn FnMut(&EigenRecord)) -> Result<()> {
        let mode = self.table.mode(k);
        let start = mode.partition_point(|r| r.energy < lo);
        for r in &mode[start..] {
            if r.energy > hi {
                break;
            }
            f(r);
        }
        Ok(())
    }
}

impl EigenspaceSource for TableSource<'_> {
    fn h(&self) -> f64 {
        self.table.h()
    }

    fn complete_through(&self) -> Option<f64> {
        self.table.complete_through()
    }

    fn visit_eigenspaces(
        &self,
        lo: f64,
        hi: f64,
        ks: &[i64],
        f: &mut dyn FnMut(usize, usize, &[usize]),
    ) -> Result<()> {
        let mut mults = vec![0usize; ks.len()];
        for (i, r) in self.table.records().iter().enumerate() {
            if r.energy < lo || r.energy > hi {
                continue;
            }
            let space = self.table.cluster_of(i);
            for (m, &k) in mults.iter_mut().zip(ks) {
                *m = space.mult(k);
            }
            f(1, space.dim, &mults);
        }
        Ok(())
    }
}

fn ensure_coverage(src: &dyn SpectrumSource, k: i64, needed: f64) -> Result<()> {
    match src.coverage(k) {
        Some(e) if e >= needed => Ok(()),
        other => Err(Error::InsufficientSpectrum {
            k,
            needed,
            covered: other.unwrap_or(f64::NEG_INFINITY),
        }),
    }
}

/// `Σ_{E_j ∈ [lo, hi]} w(E_j) ⟨B u_j, u_j⟩` over mode `k`, divided by the character weight.
fn mode_sum(
    src: &dyn SpectrumSource,
    chi: &Character,
    lo: f64,
    hi: f64,
    obs: &Observable,
    weight: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<f64> {
    let model = src.model();
    let mut sum = 0.0;
    let mut err = None;
    src.visit(chi.k, lo, hi, &mut |rec| {
        if err.is_some() {
            return;
        }
        let w = weight(rec.energy);
        if w == 0.0 {
            return;
        }
        match observable_expectation(rec, model, obs) {
            Ok(v) => sum += w * v,
            Err(e) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(sum / chi.weight()),
    }
}

/// Sum of per-character contributions, evaluated in parallel and added in `k` order.
fn family_sum<F>(chars: &[Character], per_char: F) -> Result<f64>
where
    F: Fn(&Character) -> Result<f64> + Send + Sync,
{
    let parts: Vec<f64> = chars.par_iter().map(per_char).collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

fn window_lhs(
    src: &dyn SpectrumSource,
    chars: &[Character],
    theta: f64,
    window: &SpectralWindow,
    obs: &Observable,
) -> Result<f64> {
    let h = src.h();
    let (lo, hi) = window.interval(h);
    let needed = window.required_coverage(h, theta);
    for chi in chars {
        ensure_coverage(src, chi.k, needed)?;
    }
    let total = family_sum(chars, |chi| mode_sum(src, chi, lo, hi, obs, &|_| 1.0))?;
    Ok(TAU * h.powf(1.0 - window.delta) / chars.len() as f64 * total)
}

/// Window sum over the single component `χ`.
pub fn weyl_lhs_single(
    src: &dyn SpectrumSource,
    chi: &Character,
    window: &SpectralWindow,
    obs: &Observable,
) -> Result<f64> {
    window_lhs(src, std::slice::from_ref(chi), 0.0, window, obs)
}

/// Window sum averaged over the family `W_h`.
pub fn weyl_lhs_family(
    src: &dyn SpectrumSource,
    fam: &CharacterFamily,
    window: &SpectralWindow,
    obs: &Observable,
) -> Result<f64> {
    let chars = family_at(fam, src.h());
    window_lhs(src, &chars, fam.theta(), window, obs)
}

/// Multiplicity form `2π h^{1−δ}/#W_h · Σ_j Σ_{χ∈W_h} mult_χ(E_j) / (dim ℰ_j [π_χ|_H : 1])`.
pub fn counting_lhs(
    src: &dyn EigenspaceSource,
    fam: &CharacterFamily,
    window: &SpectralWindow,
) -> Result<f64> {
    let h = src.h();
    let chars = family_at(fam, h);
    let (lo, hi) = window.interval(h);
    let needed = window.required_coverage(h, fam.theta());
    let covered = src.complete_through().unwrap_or(f64::NEG_INFINITY);
    if covered < needed {
        return Err(Error::InsufficientSpectrum {
            k: chars.iter().map(|c| c.k.abs()).max().unwrap_or(0),
            needed,
            covered,
        });
    }
    let ks: Vec<i64> = chars.iter().map(|c| c.k).collect();
    let mut total = 0.0;
    src.visit_eigenspaces(lo, hi, &ks, &mut |repeats, dim, mults| {
        let per: f64 = mults
            .iter()
            .zip(&chars)
            .map(|(&m, chi)| m as f64 / (dim as f64 * f64::from(chi.isotropy_mult)))
            .sum();
        total += repeats as f64 * per;
    })?;
    Ok(TAU * h.powf(1.0 - window.delta) / chars.len() as f64 * total)
}

/// Spectral side of the trace formula for `ρ(P(h)) ∘ B` over `W_h`.
pub fn trace_lhs(
    src: &dyn SpectrumSource,
    fam: &CharacterFamily,
    rho: &dyn EnergyFunction,
    obs: &Observable,
) -> Result<f64> {
    let h = src.h();
    let chars = family_at(fam, h);
    let Some((lo, hi)) = rho.support() else {
        return Ok(0.0);
    };
    for chi in &chars {
        ensure_coverage(src, chi.k, hi)?;
    }
    let weight = |e: f64| rho.value(e);
    let total = family_sum(&chars, |chi| mode_sum(src, chi, lo, hi, obs, &weight))?;
    Ok(TAU * h / chars.len() as f64 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_model;
    use crate::modespec::RadialObservable;
    use crate::mollify::{bump, TestFunction};
    use crate::peterweyl::DEFAULT_EXACT_CLUSTER;
    use std::f64::consts::PI;

    #[test]
    fn window_validation() {
        assert!(SpectralWindow::new(1.0, 0.3, true).is_err());
        let w = SpectralWindow::new(1.0, 0.3, false).unwrap();
        assert!(!w.theorem_mode);
        assert!(SpectralWindow::new(1.0, 0.16, true).unwrap().theorem_mode);
        assert!(SpectralWindow::new(1.0, 0.0, false).is_err());
        let w = SpectralWindow::new(1.0, 0.05, true).unwrap();
        assert!(check_family_rate(&w, &CharacterFamily::PowerLaw(0.1), true).unwrap());
        assert!(check_family_rate(&w, &CharacterFamily::PowerLaw(0.2), true).is_err());
        assert!(!check_family_rate(&w, &CharacterFamily::PowerLaw(0.2), false).unwrap());
    }

    #[test]
    fn empty_window_is_zero() {
        let sphere = builtin_model("sphere").unwrap();
        let src = ExactSource::new(&sphere, 0.1).unwrap();
        let w = SpectralWindow::new(-5.0, 0.1, true).unwrap();
        let v = weyl_lhs_single(&src, &Character::circle(0), &w, &Observable::identity()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn torus_lattice_enumeration() {
        let torus = builtin_model("flat_torus").unwrap();
        let h = 1e-4;
        let src = ExactSource::new(&torus, h).unwrap();
        let w = SpectralWindow::new(1.0, 0.16, true).unwrap();
        let got =
            weyl_lhs_single(&src, &Character::circle(0), &w, &Observable::identity()).unwrap();
        // oracle: count m with h²m² in the window directly
        let hi = 1.0 + h.powf(0.16);
        let m_max = (hi.sqrt() / h) as i64 + 2;
        let count = (-m_max..=m_max)
            .filter(|&m| {
                let e = h * h * (m * m) as f64;
                (1.0..=hi).contains(&e)
            })
            .count();
        let expect = TAU * h.powf(0.84) * count as f64;
        assert_eq!(got, expect);
    }

    #[test]
    fn single_equals_fixed_family_bitwise() {
        let sphere = builtin_model("sphere").unwrap();
        let src = ExactSource::new(&sphere, 3e-3).unwrap();
        let w = SpectralWindow::new(1.0, 0.1, true).unwrap();
        let obs = Observable::multiplication(RadialObservable::CosSquared);
        let a = weyl_lhs_single(&src, &Character::circle(2), &w, &obs).unwrap();
        let b = weyl_lhs_family(&src, &CharacterFamily::Fixed(vec![2]), &w, &obs).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn counting_matches_identity_sum() {
        let sphere = builtin_model("sphere").unwrap();
        let h = 0.02;
        let w = SpectralWindow::new(1.0, 0.05, true).unwrap();
        let fam = CharacterFamily::PowerLaw(0.1);
        let table = SpectrumTable::from_exact(&sphere, h, 110, 4.5, DEFAULT_EXACT_CLUSTER).unwrap();
        let tsrc = TableSource {
            table: &table,
            model: &sphere,
        };
        let counting = counting_lhs(&tsrc, &fam, &w).unwrap();
        let esrc = ExactSource::new(&sphere, h).unwrap();
        let closed = counting_lhs(&esrc, &fam, &w).unwrap();
        let identity = weyl_lhs_family(&esrc, &fam, &w, &Observable::identity()).unwrap();
        assert!((counting - identity).abs() < 1e-12);
        assert!((closed - identity).abs() < 1e-12);
        let ttable = weyl_lhs_family(&tsrc, &fam, &w, &Observable::identity()).unwrap();
        assert!((ttable - identity).abs() < 1e-12);
    }

    #[test]
    fn torus_counting_closed_form() {
        let torus = builtin_model("flat_torus").unwrap();
        let h = 0.05;
        let w = SpectralWindow::new(1.0, 0.1, true).unwrap();
        let fam = CharacterFamily::PowerLaw(0.15);
        let table = SpectrumTable::from_exact(&torus, h, 45, 4.5, DEFAULT_EXACT_CLUSTER).unwrap();
        let a = counting_lhs(
            &TableSource {
                table: &table,
                model: &torus,
            },
            &fam,
            &w,
        )
        .unwrap();
        let b = counting_lhs(&ExactSource::new(&torus, h).unwrap(), &fam, &w).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn truncated_table_is_rejected() {
        let sphere = builtin_model("sphere").unwrap();
        let table = SpectrumTable::from_exact(&sphere, 0.1, 3, 1.2, DEFAULT_EXACT_CLUSTER).unwrap();
        let src = TableSource {
            table: &table,
            model: &sphere,
        };
        let w = SpectralWindow::new(1.0, 0.1, true).unwrap();
        assert!(matches!(
            weyl_lhs_single(&src, &Character::circle(0), &w, &Observable::identity()),
            Err(Error::InsufficientSpectrum { .. })
        ));
        assert!(matches!(
            weyl_lhs_single(&src, &Character::circle(7), &w, &Observable::identity()),
            Err(Error::InsufficientSpectrum { .. })
        ));
    }

    #[test]
    fn trace_torus_riemann_sum() {
        let torus = builtin_model("flat_torus").unwrap();
        let rho = bump(1.0, 0.5, 1.0).unwrap();
        let src = ExactSource::new(&torus, 1e-3).unwrap();
        let v = trace_lhs(
            &src,
            &CharacterFamily::Fixed(vec![0]),
            &rho,
            &Observable::identity(),
        )
        .unwrap();
        let rhs = crate::reduction::omega_weighted_integral(&torus, &crate::reduction::Unit, &rho);
        assert!((v - rhs).abs() < 1e-2 * rhs);
        let zero = TestFunction::zero();
        assert_eq!(
            trace_lhs(
                &src,
                &CharacterFamily::Fixed(vec![0]),
                &zero,
                &Observable::identity()
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn linear_in_b0() {
        let sphere = builtin_model("sphere").unwrap();
        let src = ExactSource::new(&sphere, 5e-3).unwrap();
        let w = SpectralWindow::new(1.0, 0.1, true).unwrap();
        let fam = CharacterFamily::PowerLaw(0.1);
        let one = weyl_lhs_family(
            &src,
            &fam,
            &w,
            &Observable::multiplication(RadialObservable::CosSquared),
        )
        .unwrap();
        let three = weyl_lhs_family(
            &src,
            &fam,
            &w,
            &Observable::multiplication(RadialObservable::CosSquared.scaled(3.0)),
        )
        .unwrap();
        assert!((three - 3.0 * one).abs() < 1e-12 * three.abs());
        assert!(one > 0.0 && one < PI);
    }
}
