//! Symmetric tridiagonal (optionally cyclic) eigensolver: Sturm-sequence
//! bisection for eigenvalues, shifted inverse iteration for eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with an optional corner coupling `(0, n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub corner: Option<f64>,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            if let Some(c) = self.corner {
                if i == 0 || i == n - 1 {
                    r += c.abs();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax * 16.0
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `A - x`).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.len();
        let pivmin = self.pivmin();
        let guard = |q: f64| if q.abs() < pivmin { -pivmin } else { q };
        match self.corner {
            Some(c) if n >= 3 => {
                // Bordered elimination: the last row/column carries the corner fill.
                let mut count = 0;
                let mut p = guard(self.diag[0] - x);
                let mut g = c;
                let mut schur = g * g / p;
                if p < 0.0 {
                    count += 1;
                }
                for i in 1..n - 1 {
                    let l = self.off[i - 1] / p;
                    p = guard(self.diag[i] - x - l * self.off[i - 1]);
                    let border = if i == n - 2 { self.off[n - 2] } else { 0.0 };
                    g = border - l * g;
                    schur += g * g / p;
                    if p < 0.0 {
                        count += 1;
                    }
                }
                let last = guard(self.diag[n - 1] - x - schur);
                if last < 0.0 {
                    count += 1;
                }
                count
            }
            _ => {
                let mut count = 0;
                let mut q = guard(self.diag[0] - x);
                if q < 0.0 {
                    count += 1;
                }
                for i in 1..n {
                    let mut off = self.off[i - 1];
                    if i == n - 1 {
                        if let Some(c) = self.corner {
                            // n == 2: corner doubles the single coupling
                            off += c;
                        }
                    }
                    q = guard(self.diag[i] - x - off * off / q);
                    if q < 0.0 {
                        count += 1;
                    }
                }
                count
            }
        }
    }

    /// The `count` lowest eigenvalues, each to absolute tolerance `tol`
    /// (relaxed to a few ulps for large magnitudes).
    pub fn lowest_eigenvalues(&self, count: usize, tol: f64) -> Vec<f64> {
        if count == 0 {
            return Vec::new();
        }
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).abs().max(1.0);
        let mut lo = vec![glo - 1e-9 * span; count];
        let mut hi = vec![ghi + 1e-9 * span; count];
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            let (mut a, mut b) = (lo[j], hi[j]);
            loop {
                let width_tol = tol.max(4.0 * f64::EPSILON * a.abs().max(b.abs()));
                if b - a <= width_tol {
                    break;
                }
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let c = self.count_below(mid);
                // eigenvalues j' < c lie below mid, the rest at or above
                for jj in j..count {
                    if jj < c {
                        hi[jj] = hi[jj].min(mid);
                    } else {
                        lo[jj] = lo[jj].max(mid);
                    }
                }
                if c > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        out
    }

    /// Eigenvectors (unit Euclidean norm) for sorted eigenvalues `values`.
    pub fn eigenvectors(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.len();
        let norm = self.norm_inf().max(1.0);
        let (glo, ghi) = self.gershgorin();
        let spread = (ghi - glo).abs().max(1.0);
        let cluster_tol = |x: f64| 1e-6 * x.abs().max(1.0);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        for (j, &lambda) in values.iter().enumerate() {
            if j > 0 && (lambda - values[j - 1]) > cluster_tol(lambda) {
                cluster_start = j;
            }
            let rank = j - cluster_start;
            let shift = lambda + rank as f64 * 1e-10 * spread;
            let solver = ShiftedSolver::new(self, shift, norm);
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + j as u64);
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            orthogonalize(&mut x, &vectors[cluster_start..j]);
            normalize(&mut x);
            let mut converged = false;
            for it in 0..50 {
                let mut y = solver.solve(&x);
                orthogonalize(&mut y, &vectors[cluster_start..j]);
                if !normalize(&mut y) {
                    return Err(Error::EigvecFailure { index: j });
                }
                let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
                let sign = if dot < 0.0 { -1.0 } else { 1.0 };
                let change = x
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| (b - sign * a).powi(2))
                    .sum::<f64>()
                    .sqrt();
                x = y;
                // near-degenerate partners may keep rotating; a small residual suffices
                if change < 1e-10
                    || (it > 0 && self.residual(&x, self.rayleigh_quotient(&x)) <= 1e-12 * norm)
                {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::EigvecFailure { index: j });
            }
            canonical_sign(&mut x);
            vectors.push(x);
        }
        Ok(vectors)
    }
}

impl SymTridiag {
    /// `xᵀ A x / xᵀ x`
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let n = self.len();
        let mut num = 0.0;
        for i in 0..n {
            let mut y = self.diag[i] * x[i];
            if i > 0 {
                y += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += self.off[i] * x[i + 1];
            }
            if let Some(c) = self.corner {
                if n >= 3 && i == 0 {
                    y += c * x[n - 1];
                } else if n >= 3 && i == n - 1 {
                    y += c * x[0];
                }
            }
            num += x[i] * y;
        }
        num / x.iter().map(|v| v * v).sum::<f64>()
    }

    /// `‖(A - λ) x‖₂`
    fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let n = self.len();
        let mut sum = 0.0;
        for i in 0..n {
            let mut y = (self.diag[i] - lambda) * x[i];
            if i > 0 {
                y += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += self.off[i] * x[i + 1];
            }
            if let Some(c) = self.corner {
                if n >= 3 && i == 0 {
                    y += c * x[n - 1];
                } else if n >= 3 && i == n - 1 {
                    y += c * x[0];
                }
            }
            sum += y * y;
        }
        sum.sqrt()
    }
}

fn orthogonalize(x: &mut [f64], against: &[Vec<f64>]) {
    for v in against {
        let d: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= d * vi;
        }
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Makes the first clearly nonzero entry positive.
fn canonical_sign(x: &mut [f64]) {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Number of sign changes, ignoring negligible entries.
pub fn node_count(x: &[f64]) -> usize {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut last = 0.0;
    let mut nodes = 0;
    for &v in x {
        if v.abs() <= 1e-12 * scale {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            nodes += 1;
        }
        last = v.signum();
    }
    nodes
}

/// LU factorization with partial pivoting of a shifted tridiagonal matrix,
/// with a Sherman–Morrison correction for the corner coupling.
struct ShiftedSolver {
    lu: TridiagLu,
    cyclic: Option<CyclicCorrection>,
}

struct CyclicCorrection {
    z: Vec<f64>,
    v_last: f64,
}

impl ShiftedSolver {
    fn new(m: &SymTridiag, shift: f64, norm: f64) -> Self {
        let n = m.len();
        let mut diag: Vec<f64> = m.diag.iter().map(|d| d - shift).collect();
        match m.corner {
            Some(c) if n >= 3 => {
                let gamma = if diag[0] != 0.0 { -diag[0] } else { norm };
                diag[0] -= gamma;
                diag[n - 1] -= c * c / gamma;
                let lu = TridiagLu::factor(&diag, &m.off, norm);
                let mut u = vec![0.0; n];
                u[0] = gamma;
                u[n - 1] = c;
                let z = lu.solve(&u);
                Self {
                    lu,
                    cyclic: Some(CyclicCorrection {
                        z,
                        v_last: c / gamma,
                    }),
                }
            }
            _ => {
                let mut off = m.off.clone();
                if let (Some(c), 2) = (m.corner, n) {
                    off[0] += c;
                }
                Self {
                    lu: TridiagLu::factor(&diag, &off, norm),
                    cyclic: None,
                }
            }
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.lu.solve(b);
        if let Some(cc) = &self.cyclic {
            let n = y.len();
            let vy = y[0] + cc.v_last * y[n - 1];
            let vz = cc.z[0] + cc.v_last * cc.z[n - 1];
            let mut denom = 1.0 + vz;
            if denom.abs() < f64::EPSILON {
                denom = f64::EPSILON.copysign(denom);
            }
            let f = vy / denom;
            for (yi, zi) in y.iter_mut().zip(&cc.z) {
                *yi -= f * zi;
            }
        }
        y
    }
}

struct TridiagLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], norm: f64) -> Self {
        let n = diag.len();
        let tiny = f64::EPSILON * norm;
        let mut u0 = diag.to_vec();
        let mut u1 = off.to_vec();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            let a = u0[i];
            let b = off[i];
            if a.abs() >= b.abs() {
                let a = if a == 0.0 { tiny } else { a };
                u0[i] = a;
                l[i] = b / a;
                u0[i + 1] -= l[i] * u1[i];
            } else {
                swapped[i] = true;
                let m = a / b;
                l[i] = m;
                u0[i] = b;
                let old_u1 = u1[i];
                u1[i] = u0[i + 1];
                u0[i + 1] = old_u1 - m * u1[i];
                if i + 1 < n - 1 {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -m * u2[i];
                }
            }
        }
        if u0[n - 1] == 0.0 {
            u0[n - 1] = tiny;
        }
        Self {
            u0,
            u1,
            u2,
            l,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.l[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            if i + 1 < n {
                acc -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= self.u2[i] * x[i + 2];
            }
            x[i] = acc / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, cyclic: bool) -> SymTridiag {
        SymTridiag {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
            corner: cyclic.then_some(-1.0),
        }
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 50;
        let m = laplacian(n, false);
        let vals = m.lowest_eigenvalues(n, 1e-13);
        for (j, v) in vals.iter().enumerate() {
            let theta = (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert!((v - exact).abs() < 1e-12, "{j}: {v} vs {exact}");
        }
    }

    #[test]
    fn cyclic_laplacian_counts_and_pairs() {
        let n = 40;
        let m = laplacian(n, true);
        let vals = m.lowest_eigenvalues(7, 1e-13);
        let mut exact: Vec<f64> = (0..n)
            .map(|j| 2.0 - 2.0 * (std::f64::consts::TAU * j as f64 / n as f64).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        // the bordered count loses accuracy at double eigenvalues
        for (v, e) in vals.iter().zip(&exact) {
            assert!((v - e).abs() < 1e-9, "{vals:?} vs {exact:?}");
        }
        let vecs = m.eigenvectors(&vals).unwrap();
        for (x, e) in vecs.iter().zip(&exact) {
            assert!((m.rayleigh_quotient(x) - e).abs() < 1e-13);
        }
        for i in 0..vecs.len() {
            for j in 0..vecs.len() {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-9, "({i},{j}) -> {d}");
            }
        }
    }

    #[test]
    fn eigenvector_residuals_are_small() {
        let n = 200;
        let mut m = laplacian(n, false);
        for (i, d) in m.diag.iter_mut().enumerate() {
            *d += 0.3 * (i as f64 * 0.01).sin();
        }
        let vals = m.lowest_eigenvalues(10, 1e-13);
        let vecs = m.eigenvectors(&vals).unwrap();
        for (lam, v) in vals.iter().zip(&vecs) {
            let mut res = 0.0f64;
            for i in 0..n {
                let mut y = (m.diag[i] - lam) * v[i];
                if i > 0 {
                    y += m.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    y += m.off[i] * v[i + 1];
                }
                res = res.max(y.abs());
            }
            assert!(res < 1e-10, "residual {res}");
        }
        assert_eq!(node_count(&vecs[0]), 0);
        assert_eq!(node_count(&vecs[3]), 3);
    }
}
