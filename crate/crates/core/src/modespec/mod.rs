//! Spectrum of `P(h) = -h²Δ + V` on one isotypic component at a time.
//!
//! On the component `χ_k` functions are `u(s) e^{ikφ}`, and `P(h)` acts on
//! the radial factor as the Sturm–Liouville operator
//! `u ↦ -h² (1/a)(a u')' + (h²k²/a² + V) u`. This module discretizes that
//! operator by conservative flux differencing, symmetrizes it with the
//! weight `√a`, and solves the resulting tridiagonal problem. Closed-form
//! spectra are available for the round sphere and the flat torus.

pub mod cache;
mod legendre;
mod observable;
pub mod tridiag;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Boundary, ExactBackend, RevolutionSurface};
pub use legendre::{cos_squared_expectation, normalized_legendre};
pub use observable::{EnergyWeight, Observable, ObservableSymbol, RadialObservable};
use tridiag::{node_count, SymTridiag};

/// Uniform grid on `[0, L]`: cell midpoints for pole models, periodic nodes otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub n: usize,
    pub length: f64,
    pub boundary: Boundary,
}

impl ModeGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(model: &RevolutionSurface, n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} points, got {n}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            n,
            length: model.length(),
            boundary: model.boundary(),
        })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        let d = self.spacing();
        match self.boundary {
            Boundary::Poles => (i as f64 + 0.5) * d,
            Boundary::Periodic => i as f64 * d,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AssemblyWarning {
    /// The innermost classically allowed node sits closer to the pole than the
    /// grid resolves for this `|k|`.
    GridTooCoarse { k: i64, spacing: f64, required: f64 },
}

/// Symmetrized discretization of `P(h)` on the component `χ_k`.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub k: i64,
    pub h: f64,
    pub grid: ModeGrid,
    pub matrix: SymTridiag,
    /// `a(s_i)` at the grid nodes (similarity weights).
    pub weights: Vec<f64>,
    pub warnings: Vec<AssemblyWarning>,
}

impl ModeOperator {
    pub fn diag(&self) -> &[f64] {
        &self.matrix.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.matrix.off
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        self.matrix.gershgorin()
    }
}

pub fn assemble_mode_operator(
    model: &RevolutionSurface,
    k: i64,
    h: f64,
    grid: &ModeGrid,
) -> Result<ModeOperator> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!("h = {h} outside (0, 1]")));
    }
    if grid.boundary != model.boundary() || grid.length != model.length() {
        return Err(Error::InvalidParameter(
            "grid does not match the model's domain".into(),
        ));
    }
    let n = grid.n;
    let d = grid.spacing();
    let h2 = h * h;
    let kk = (k as f64) * (k as f64);
    let scale = h2 / (d * d);
    let weights: Vec<f64> = grid.nodes().iter().map(|&s| model.a(s)).collect();
    let effective: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&weights)
        .map(|(&s, &a)| h2 * kk / (a * a) + model.v(s))
        .collect();

    // flux coefficient a at the face between node i and node i + 1
    let (diag, off, corner) = match grid.boundary {
        Boundary::Poles => {
            let face = |i: usize| model.a((i + 1) as f64 * d);
            let mut diag = Vec::with_capacity(n);
            let mut off = Vec::with_capacity(n - 1);
            for i in 0..n {
                // Dirichlet ghosts mirror the end nodes; a = 0 at the poles
                let left = if i == 0 {
                    2.0 * model.a(0.0)
                } else {
                    face(i - 1)
                };
                let right = if i == n - 1 {
                    2.0 * model.a(grid.length)
                } else {
                    face(i)
                };
                diag.push(scale * (left + right) / weights[i] + effective[i]);
                if i + 1 < n {
                    off.push(-scale * face(i) / (weights[i] * weights[i + 1]).sqrt());
                }
            }
            (diag, off, None)
        }
        Boundary::Periodic => {
            let face = |i: usize| model.a((i as f64 + 0.5) * d);
            let mut diag = Vec::with_capacity(n);
            let mut off = Vec::with_capacity(n - 1);
            for i in 0..n {
                let left = face((i + n - 1) % n);
                diag.push(scale * (left + face(i)) / weights[i] + effective[i]);
                if i + 1 < n {
                    off.push(-scale * face(i) / (weights[i] * weights[i + 1]).sqrt());
                }
            }
            let corner = -scale * face(n - 1) / (weights[n - 1] * weights[0]).sqrt();
            (diag, off, Some(corner))
        }
    };

    let mut warnings = Vec::new();
    if k != 0 && grid.boundary == Boundary::Poles {
        // allowed relative to the barrier floor plus one barrier quantum h²k²
        let floor = effective.iter().cloned().fold(f64::INFINITY, f64::min);
        if let Some(i) = effective.iter().position(|&w| w <= floor + h2 * kk) {
            let required = weights[i] / (4.0 * k.unsigned_abs() as f64);
            if d > required {
                warnings.push(AssemblyWarning::GridTooCoarse {
                    k,
                    spacing: d,
                    required,
                });
            }
        }
    }

    Ok(ModeOperator {
        k,
        h,
        grid: *grid,
        matrix: SymTridiag { diag, off, corner },
        weights,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    FiniteDifference,
}

/// Radial factor of an eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub enum Eigenvector {
    /// Values `u_i` at the grid nodes, `2π Σ |u_i|² a(s_i) Δ = 1`.
    Sampled(Vec<f64>),
    /// Orthonormal spherical harmonic `Y_l^k`.
    SphericalHarmonic { l: u64 },
    /// Plane wave `e^{ims} / (2π)`.
    Fourier { m: i64 },
    /// Not retained by the solver.
    Unavailable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenRecord {
    pub energy: f64,
    pub k: i64,
    pub h: f64,
    /// Position within the mode, counting from 0.
    pub index: usize,
    pub provenance: Provenance,
    pub grid: Option<ModeGrid>,
    pub vector: Eigenvector,
}

impl EigenRecord {
    /// Weighted density `|u_i|²` on `grid`, normalized so `2π Σ ρ_i a_i Δ = 1`.
    pub fn density_on(&self, model: &RevolutionSurface, grid: &ModeGrid) -> Option<Vec<f64>> {
        let nodes = grid.nodes();
        let raw: Vec<f64> = match &self.vector {
            Eigenvector::Sampled(u) => {
                if self.grid.as_ref() != Some(grid) {
                    return None;
                }
                u.iter().map(|v| v * v).collect()
            }
            Eigenvector::SphericalHarmonic { l } => nodes
                .iter()
                .map(|&s| normalized_legendre(*l, self.k.unsigned_abs(), s).powi(2))
                .collect(),
            Eigenvector::Fourier { .. } => vec![1.0; grid.n],
            Eigenvector::Unavailable => return None,
        };
        let d = grid.spacing();
        let mass: f64 = TAU
            * raw
                .iter()
                .zip(&nodes)
                .map(|(r, &s)| r * model.a(s))
                .sum::<f64>()
            * d;
        Some(raw.into_iter().map(|r| r / mass).collect())
    }

    /// `2π Σ_i |u_i|² a(s_i) Δ`.
    pub fn weighted_norm(&self, model: &RevolutionSurface) -> Option<f64> {
        let (Eigenvector::Sampled(u), Some(grid)) = (&self.vector, &self.grid) else {
            return None;
        };
        let d = grid.spacing();
        Some(
            TAU * u
                .iter()
                .enumerate()
                .map(|(i, v)| v * v * model.a(grid.node(i)))
                .sum::<f64>()
                * d,
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Maximum number of eigenpairs per request.
    pub cap: usize,
    /// Absolute bisection tolerance.
    pub tolerance: f64,
    pub vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cap: 100_000,
            tolerance: 1e-12,
            vectors: true,
        }
    }
}

/// All eigenpairs of `op` with energy `≤ e_max`, ascending.
pub fn solve_modes(op: &ModeOperator, e_max: f64) -> Result<Vec<EigenRecord>> {
    solve_modes_with(op, e_max, &SolverOptions::default())
}

pub fn solve_modes_with(
    op: &ModeOperator,
    e_max: f64,
    options: &SolverOptions,
) -> Result<Vec<EigenRecord>> {
    if !e_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "E_max = {e_max} is not finite"
        )));
    }
    // eigenvalues equal to e_max are included
    let count = op.matrix.count_below(e_max + options.tolerance);
    if count > options.cap {
        return Err(Error::SpectrumCapExceeded {
            requested: count,
            cap: options.cap,
        });
    }
    let mut values = op.matrix.lowest_eigenvalues(count, options.tolerance);
    values.retain(|&v| v <= e_max);
    let record = |index: usize, energy: f64, vector: Eigenvector| EigenRecord {
        energy,
        k: op.k,
        h: op.h,
        index,
        provenance: Provenance::FiniteDifference,
        grid: Some(op.grid),
        vector,
    };
    if !options.vectors {
        return Ok(values
            .iter()
            .enumerate()
            .map(|(i, &e)| record(i, e, Eigenvector::Unavailable))
            .collect());
    }
    let vectors = op.matrix.eigenvectors(&values)?;
    if op.matrix.corner.is_some() {
        // periodic counts are only good to ~1e-10 near double eigenvalues
        for (v, w) in values.iter_mut().zip(&vectors) {
            *v = op.matrix.rayleigh_quotient(w);
        }
    }
    let d = op.grid.spacing();
    let norm = (TAU * d).sqrt();
    let mut pairs: Vec<(f64, Vec<f64>)> = values
        .into_iter()
        .zip(vectors)
        .map(|(e, w)| {
            let u = w
                .iter()
                .zip(&op.weights)
                .map(|(wi, ai)| wi / (ai.sqrt() * norm))
                .collect();
            (e, u)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // exact ties: vectors ordered by node count, energies stay ascending
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len()
            && pairs[end].0 - pairs[end - 1].0 <= 1e-12 * pairs[end].0.abs().max(1.0)
        {
            end += 1;
        }
        if end - start > 1 {
            let energies: Vec<f64> = pairs[start..end].iter().map(|p| p.0).collect();
            pairs[start..end].sort_by_key(|p| node_count(&p.1));
            for (p, e) in pairs[start..end].iter_mut().zip(energies) {
                p.0 = e;
            }
        }
        start = end;
    }
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(i, (e, u))| record(i, e, Eigenvector::Sampled(u)))
        .collect())
}

/// Closed-form spectrum of the component `χ_k` up to `e_max`.
pub fn exact_spectrum(
    model: &RevolutionSurface,
    k: i64,
    h: f64,
    e_max: f64,
) -> Result<Vec<EigenRecord>> {
    exact_spectrum_between(model, k, h, f64::NEG_INFINITY, e_max)
}

/// Closed-form eigenvalues of `χ_k` lying in `[e_min, e_max]`; `index`
/// still counts from the bottom of the mode.
pub fn exact_spectrum_between(
    model: &RevolutionSurface,
    k: i64,
    h: f64,
    e_min: f64,
    e_max: f64,
) -> Result<Vec<EigenRecord>> {
    let mut out = Vec::new();
    visit_exact(model, k, h, e_min, e_max, &mut |r| out.push(r.clone()))?;
    Ok(out)
}

/// Streams the closed-form eigenpairs of `χ_k` in `[e_min, e_max]`.
pub fn visit_exact(
    model: &RevolutionSurface,
    k: i64,
    h: f64,
    e_min: f64,
    e_max: f64,
    f: &mut dyn FnMut(&EigenRecord),
) -> Result<()> {
    let shift = model.potential().constant_value().unwrap_or(0.0);
    let h2 = h * h;
    let lo = e_min - shift;
    let hi = e_max - shift;
    if hi < 0.0 {
        return Ok(());
    }
    let mut rec = EigenRecord {
        energy: 0.0,
        k,
        h,
        index: 0,
        provenance: Provenance::Exact,
        grid: None,
        vector: Eigenvector::Unavailable,
    };
    match model.exact_backend() {
        ExactBackend::Sphere => {
            let m = k.unsigned_abs();
            let energy = |l: u64| h2 * ((l as u128 * (l as u128 + 1)) as f64);
            // first l with energy >= lo
            let mut l = if lo > 0.0 {
                let guess = (-1.0 + (1.0 + 4.0 * lo / h2).sqrt()) / 2.0;
                (guess.floor() as u64).saturating_sub(2).max(m)
            } else {
                m
            };
            while energy(l) < lo {
                l += 1;
            }
            while energy(l) <= hi {
                rec.energy = energy(l) + shift;
                rec.index = (l - m) as usize;
                rec.vector = Eigenvector::SphericalHarmonic { l };
                f(&rec);
                l += 1;
            }
        }
        ExactBackend::FlatTorus => {
            let kk = (k as i128 * k as i128) as u128;
            let energy = |m: u64| h2 * ((kk + m as u128 * m as u128) as f64);
            if energy(0) > hi {
                return Ok(());
            }
            // index counts 0, ±1, ±2, ... from the bottom
            let mut m = if lo > energy(0) {
                let guess = ((lo / h2 - kk as f64).max(0.0)).sqrt();
                (guess.floor() as u64).saturating_sub(2)
            } else {
                0
            };
            while energy(m) < lo {
                m += 1;
            }
            while energy(m) <= hi {
                rec.energy = energy(m) + shift;
                if m == 0 {
                    rec.index = 0;
                    rec.vector = Eigenvector::Fourier { m: 0 };
                    f(&rec);
                } else {
                    for (slot, sign) in [(2 * m as usize - 1, -1i64), (2 * m as usize, 1)] {
                        rec.index = slot;
                        rec.vector = Eigenvector::Fourier { m: sign * m as i64 };
                        f(&rec);
                    }
                }
                m += 1;
            }
        }
        ExactBackend::None => return Err(Error::NoExactBackend(model.name().to_string())),
    }
    Ok(())
}

/// `β(E) · 2π Σ_i b0(s_i) |u_i|² a(s_i) Δ` (closed forms for analytic vectors
/// and catalogued `b0` where available).
pub fn observable_expectation(
    rec: &EigenRecord,
    model: &RevolutionSurface,
    obs: &Observable,
) -> Result<f64> {
    let beta = obs.beta.eval(rec.energy);
    if beta == 0.0 {
        return Ok(0.0);
    }
    Ok(beta * radial_expectation(rec, model, &obs.b0)?)
}

fn closed_form(rec: &EigenRecord, b0: &RadialObservable) -> Option<f64> {
    match b0 {
        RadialObservable::Constant(c) => Some(*c),
        RadialObservable::Scaled(alpha, inner) => closed_form(rec, inner).map(|v| alpha * v),
        RadialObservable::CosSquared => match rec.vector {
            Eigenvector::SphericalHarmonic { l } => {
                Some(cos_squared_expectation(l, rec.k.unsigned_abs()))
            }
            Eigenvector::Fourier { .. } => Some(0.5),
            _ => None,
        },
        RadialObservable::Custom { .. } => None,
    }
}

fn radial_expectation(
    rec: &EigenRecord,
    model: &RevolutionSurface,
    b0: &RadialObservable,
) -> Result<f64> {
    let sampled = matches!(rec.vector, Eigenvector::Sampled(_));
    if !sampled {
        if let Some(v) = closed_form(rec, b0) {
            return Ok(v);
        }
    }
    let grid = match (&rec.vector, rec.grid) {
        (Eigenvector::Sampled(_), Some(g)) => g,
        (Eigenvector::SphericalHarmonic { l }, _) => {
            ModeGrid::new(model, (32 * *l as usize).max(4096))?
        }
        (Eigenvector::Fourier { m }, _) => {
            ModeGrid::new(model, (32 * m.unsigned_abs() as usize).max(4096))?
        }
        _ => {
            if let RadialObservable::Constant(c) = b0 {
                return Ok(*c);
            }
            return Err(Error::InvalidParameter(format!(
                "eigenvector {} of mode {} was not retained",
                rec.index, rec.k
            )));
        }
    };
    let density = rec
        .density_on(model, &grid)
        .ok_or_else(|| Error::InvalidParameter("eigenvector grid mismatch".into()))?;
    let d = grid.spacing();
    Ok(TAU
        * density
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let s = grid.node(i);
                b0.eval(s) * r * model.a(s)
            })
            .sum::<f64>()
        * d)
}
