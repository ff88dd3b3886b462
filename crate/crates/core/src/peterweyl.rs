//! Characters of the circle group, character families and isotypic bookkeeping.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ExactBackend, RevolutionSurface};
use crate::modespec::{
    assemble_mode_operator, exact_spectrum, solve_modes_with, EigenRecord, ModeGrid, SolverOptions,
};

/// `χ_k(e^{iφ}) = e^{ikφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Character {
    pub k: i64,
    pub d_chi: u32,
    /// `[π_χ|_H : 1]`
    pub isotropy_mult: u32,
}

impl Character {
    pub fn circle(k: i64) -> Self {
        Self {
            k,
            d_chi: 1,
            isotropy_mult: 1,
        }
    }

    pub fn weight(&self) -> f64 {
        f64::from(self.d_chi) * f64::from(self.isotropy_mult)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterFamily {
    Fixed(Vec<i64>),
    /// `{χ_k : |k| ≤ h^{-ϑ}}`
    PowerLaw(f64),
}

impl CharacterFamily {
    pub fn theta(&self) -> f64 {
        match self {
            Self::Fixed(_) => 0.0,
            Self::PowerLaw(t) => *t,
        }
    }

    /// Largest `|k|` of the family at `h`.
    pub fn max_k(&self, h: f64) -> u64 {
        match self {
            Self::Fixed(ks) => ks.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0),
            Self::PowerLaw(theta) => power_law_radius(*theta, h),
        }
    }
}

fn power_law_radius(theta: f64, h: f64) -> u64 {
    let r = h.powf(-theta);
    let f = r.floor();
    // h^{-ϑ} landing a rounding error below an integer still counts as that integer
    if (r - (f + 1.0)).abs() <= 1e-12 * r {
        f as u64 + 1
    } else {
        f as u64
    }
}

/// `W_h`, sorted by `k` and free of duplicates.
pub fn family_at(fam: &CharacterFamily, h: f64) -> Vec<Character> {
    let mut ks: Vec<i64> = match fam {
        CharacterFamily::Fixed(ks) => ks.clone(),
        CharacterFamily::PowerLaw(theta) => {
            // includes |k| ≤ 1 at h = 1, so the family is never empty
            let r = power_law_radius(*theta, h) as i64;
            (-r..=r).collect()
        }
    };
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter().map(Character::circle).collect()
}

/// `h^{ϑN} · mean_{k ∈ W_h} |k|^N / [π_χ|_H : 1]` for each `h`.
pub fn growth_rate_estimate(fam: &CharacterFamily, order: u32, h_list: &[f64]) -> Vec<f64> {
    h_list
        .iter()
        .map(|&h| {
            let chars = family_at(fam, h);
            let mean = chars
                .iter()
                .map(|c| {
                    (c.k.unsigned_abs() as f64).powi(order as i32) / f64::from(c.isotropy_mult)
                })
                .sum::<f64>()
                / chars.len() as f64;
            h.powf(fam.theta() * f64::from(order)) * mean
        })
        .collect()
}

/// Whether the ratios stay within four times their value at the first (largest) `h`.
pub fn growth_is_bounded(ratios: &[f64]) -> bool {
    match ratios.first() {
        None => true,
        Some(&first) => ratios
            .iter()
            .all(|&r| r <= 4.0 * first.max(f64::MIN_POSITIVE)),
    }
}

/// One clustered eigenvalue with its isotypic decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    /// Smallest member energy.
    pub energy: f64,
    pub spread: f64,
    pub dim: usize,
    /// `(k, mult_χk)` with `mult > 0`, sorted by `k`.
    pub mults: Vec<(i64, usize)>,
}

impl Eigenspace {
    pub fn mult(&self, k: i64) -> usize {
        self.mults
            .binary_search_by_key(&k, |&(kk, _)| kk)
            .map(|i| self.mults[i].1)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumTable {
    h: f64,
    /// Sorted by `(k, index)`.
    records: Vec<EigenRecord>,
    clusters: Vec<Eigenspace>,
    /// Cluster id of each record.
    cluster_of: Vec<usize>,
    /// Energy through which each listed mode is complete.
    coverage: BTreeMap<i64, f64>,
    /// Energy through which the eigenspaces are complete across all modes.
    complete_through: Option<f64>,
}

pub const DEFAULT_EXACT_CLUSTER: f64 = 1e-9;

/// Ten times the default bisection tolerance.
pub const DEFAULT_FD_CLUSTER: f64 = 1e-11;

/// Groups `records` into eigenspaces of relative width `eps_cluster`.
///
/// Coverage is left unset; window sums on the result need
/// [`SpectrumTable::with_coverage`].
pub fn multiplicity_table(records: Vec<EigenRecord>, eps_cluster: f64) -> Result<SpectrumTable> {
    let h = records.first().map_or(f64::NAN, |r| r.h);
    for r in &records {
        if r.h != h {
            return Err(Error::MixedParameters {
                first: h,
                other: r.h,
            });
        }
    }
    let mut records = records;
    records.sort_by(|a, b| a.k.cmp(&b.k).then(a.index.cmp(&b.index)));
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&i, &j| {
        records[i]
            .energy
            .total_cmp(&records[j].energy)
            .then(records[i].k.cmp(&records[j].k))
    });
    let mut clusters: Vec<Eigenspace> = Vec::new();
    let mut cluster_of = vec![0; records.len()];
    let mut members: BTreeMap<i64, usize> = BTreeMap::new();
    let mut prev = f64::NAN;
    let flush = |members: &mut BTreeMap<i64, usize>, clusters: &mut Vec<Eigenspace>, hi: f64| {
        if let Some(last) = clusters.last_mut() {
            last.mults = std::mem::take(members).into_iter().collect();
            last.spread = hi - last.energy;
        }
    };
    for &i in &order {
        let e = records[i].energy;
        let joins = !clusters.is_empty() && e - prev <= eps_cluster * e.abs().max(prev.abs());
        if !joins {
            flush(&mut members, &mut clusters, prev);
            clusters.push(Eigenspace {
                energy: e,
                spread: 0.0,
                dim: 0,
                mults: Vec::new(),
            });
        }
        let c = clusters.len() - 1;
        clusters[c].dim += 1;
        *members.entry(records[i].k).or_default() += 1;
        cluster_of[i] = c;
        prev = e;
    }
    flush(&mut members, &mut clusters, prev);
    Ok(SpectrumTable {
        h,
        records,
        clusters,
        cluster_of,
        coverage: BTreeMap::new(),
        complete_through: None,
    })
}

impl SpectrumTable {
    /// Records of modes `|k| ≤ k_max` up to `e_max` from the closed-form backend.
    pub fn from_exact(
        model: &RevolutionSurface,
        h: f64,
        k_max: u64,
        e_max: f64,
        eps_cluster: f64,
    ) -> Result<Self> {
        let k_max = k_max as i64;
        let modes: Vec<Vec<EigenRecord>> = (-k_max..=k_max)
            .into_par_iter()
            .map(|k| exact_spectrum(model, k, h, e_max))
            .collect::<Result<_>>()?;
        Self::from_modes(
            model,
            h,
            k_max,
            e_max,
            modes.into_iter().flatten().collect(),
            eps_cluster,
        )
    }

    /// Finite-difference records of modes `|k| ≤ k_max` up to `e_max` on an `n`-point grid.
    pub fn from_fd(
        model: &RevolutionSurface,
        h: f64,
        k_max: u64,
        n: usize,
        e_max: f64,
        options: &SolverOptions,
    ) -> Result<Self> {
        let k_max = k_max as i64;
        let grid = ModeGrid::new(model, n)?;
        let modes: Vec<Vec<EigenRecord>> = (-k_max..=k_max)
            .into_par_iter()
            .map(|k| {
                let op = assemble_mode_operator(model, k, h, &grid)?;
                solve_modes_with(&op, e_max, options)
            })
            .collect::<Result<_>>()?;
        let eps = (10.0 * options.tolerance).max(DEFAULT_FD_CLUSTER);
        Self::from_modes(
            model,
            h,
            k_max,
            e_max,
            modes.into_iter().flatten().collect(),
            eps,
        )
    }

    fn from_modes(
        model: &RevolutionSurface,
        h: f64,
        k_max: i64,
        e_max: f64,
        records: Vec<EigenRecord>,
        eps_cluster: f64,
    ) -> Result<Self> {
        let mut table = multiplicity_table(records, eps_cluster)?;
        table.h = h;
        for k in -k_max..=k_max {
            table.coverage.insert(k, e_max);
        }
        // modes beyond k_max start above h²(k_max+1)²/max a² + min V
        let a_max = sampled_max(|s| model.a(s), model.length());
        let k1 = (k_max + 1) as f64;
        let floor = h * h * k1 * k1 / (a_max * a_max) + model.min_potential();
        let floor = match model.exact_backend() {
            ExactBackend::Sphere => {
                h * h * k1 * (k1 + 1.0) + model.potential().constant_value().unwrap_or(0.0)
            }
            _ => floor,
        };
        table.complete_through = Some(e_max.min(floor));
        Ok(table)
    }

    /// Declares every listed mode complete through `e`.
    pub fn with_coverage(mut self, e: f64) -> Self {
        let ks: Vec<i64> = self.records.iter().map(|r| r.k).collect();
        for k in ks {
            self.coverage.insert(k, e);
        }
        self
    }

    pub fn with_mode_coverage(mut self, k: i64, e: f64) -> Self {
        self.coverage.insert(k, e);
        self
    }

    /// Declares the eigenspace decomposition complete through `e`.
    pub fn with_complete_through(mut self, e: f64) -> Self {
        self.complete_through = Some(e);
        self
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn records(&self) -> &[EigenRecord] {
        &self.records
    }

    pub fn clusters(&self) -> &[Eigenspace] {
        &self.clusters
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn mode_coverage(&self, k: i64) -> Option<f64> {
        self.coverage.get(&k).copied()
    }

    pub fn complete_through(&self) -> Option<f64> {
        self.complete_through
    }

    /// Records of mode `k`, ascending in energy.
    pub fn mode(&self, k: i64) -> &[EigenRecord] {
        let lo = self.records.partition_point(|r| r.k < k);
        let hi = self.records.partition_point(|r| r.k <= k);
        &self.records[lo..hi]
    }

    /// Eigenspace containing the `i`-th record.
    pub fn cluster_of(&self, i: usize) -> &Eigenspace {
        &self.clusters[self.cluster_of[i]]
    }

    /// Rows `(E, dim, k, mult)` for every nonzero multiplicity.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("E,dim,k,mult\n");
        for c in &self.clusters {
            for &(k, m) in &c.mults {
                let _ = writeln!(out, "{:.16e},{},{},{}", c.energy, c.dim, k, m);
            }
        }
        out
    }
}

fn sampled_max(f: impl Fn(f64) -> f64, length: f64) -> f64 {
    (0..=4096)
        .map(|i| f(length * i as f64 / 4096.0))
        .fold(f64::NEG_INFINITY, f64::max)
}
