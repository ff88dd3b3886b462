//! Runs an experiment: one task per `h`, merged in schedule order.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use eqweyl_core::modespec::SolverOptions;
use eqweyl_core::reduction::averaged_symbol;
use eqweyl_core::weyllab::{ReportSummary, WeylReport};
use eqweyl_core::{
    compare_and_fit, counting_lhs, omega_weighted_integral, sigma_c_integral, trace_lhs,
    weyl_lhs_family, ExactSource, Observable, RevolutionSurface, SpectralWindow, SpectrumTable,
    Symbol, TableSource, TestFunction, TheoremKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Backend, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub shell_width: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config_sha256: String,
    pub theorem: &'static str,
    pub model: String,
    pub theorem_mode: bool,
    pub leading_term: f64,
    #[serde(flatten)]
    pub fit: ReportSummary,
    pub monte_carlo: MonteCarlo,
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: WeylReport,
    pub summary: RunSummary,
    pub csv: String,
    pub json: String,
    pub error_table: String,
}

impl RunOutput {
    /// Writes the artifacts under `dir`, returning their paths.
    pub fn write(&self, dir: &Path, stem: &str, error_table: bool) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut files = vec![
            (dir.join(format!("{stem}.csv")), &self.csv),
            (dir.join(format!("{stem}.json")), &self.json),
        ];
        if error_table {
            files.push((dir.join(format!("{stem}.errors.dat")), &self.error_table));
        }
        for (path, body) in &files {
            fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

struct Prepared {
    model: RevolutionSurface,
    observable: Observable,
    rho: Option<TestFunction>,
    window: Option<SpectralWindow>,
}

fn prepare(cfg: &ExperimentConfig) -> anyhow::Result<Prepared> {
    cfg.validate()?;
    let model = cfg.surface()?;
    let observable = cfg.observable.build()?;
    let rho = cfg.rho.map(|b| b.build()).transpose()?;
    let window = if cfg.theorem.is_trace() {
        None
    } else {
        Some(SpectralWindow::new(cfg.c, cfg.delta, cfg.strict)?)
    };
    Ok(Prepared {
        model,
        observable,
        rho,
        window,
    })
}

/// Validates `cfg` and runs it on a pool of `cfg.jobs` threads.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    let p = prepare(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .context("building the worker pool")?;
    let hs = cfg.h_schedule.values();
    let symbol = p.observable.symbol(&p.model);
    let leading = match (&p.rho, cfg.theorem) {
        (Some(rho), TheoremKind::Trace) => omega_weighted_integral(&p.model, &symbol, rho),
        _ => sigma_c_integral(&p.model, cfg.c, &symbol)
            .with_context(|| format!("leading term at c = {}", cfg.c))?,
    };
    let lhs: Vec<f64> = pool.install(|| {
        hs.par_iter()
            .map(|&h| lhs_at(cfg, &p, h).with_context(|| format!("at h = {h:e}")))
            .collect::<anyhow::Result<Vec<f64>>>()
    })?;
    let mc = pool.install(|| monte_carlo(cfg, &p, &symbol));
    let report = compare_and_fit(
        p.model.name(),
        &hs,
        &lhs,
        &vec![leading; hs.len()],
        cfg.rate_params(),
    )?;
    let hash = cfg.content_hash();
    let header = format!(
        "config sha256: {hash}\ntheorem: {} model: {} potential: {} seed: {}",
        cfg.theorem.as_str(),
        cfg.model,
        cfg.potential,
        cfg.seed
    );
    let summary = RunSummary {
        config_sha256: hash,
        theorem: cfg.theorem.as_str(),
        model: cfg.model.clone(),
        theorem_mode: report.theorem_mode,
        leading_term: leading,
        fit: report.summary(),
        monte_carlo: mc,
    };
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    let csv = report.to_csv(Some(&header));
    let error_table = format!(
        "# config sha256: {}\n{}",
        summary.config_sha256,
        report.error_table()
    );
    Ok(RunOutput {
        report,
        summary,
        csv,
        json,
        error_table,
    })
}

/// Energy up to which every mode in the family must be resolved at `h`.
fn coverage_needed(cfg: &ExperimentConfig, p: &Prepared, h: f64) -> f64 {
    match (&p.window, &p.rho) {
        (Some(w), _) => w.required_coverage(h, cfg.family.to_family().theta()),
        (None, Some(rho)) => rho.support().map_or(cfg.c, |(_, hi)| hi),
        (None, None) => cfg.c,
    }
}

fn lhs_at(cfg: &ExperimentConfig, p: &Prepared, h: f64) -> anyhow::Result<f64> {
    let fam = cfg.family.to_family();
    match cfg.backend {
        Backend::Exact => {
            let src = ExactSource::new(&p.model, h)?;
            evaluate(cfg, p, &src, &src)
        }
        Backend::Fd { n } => {
            let needed = coverage_needed(cfg, p, h);
            // a little headroom so the coverage check sees the whole window
            let e_max = needed + 1e-9 * needed.abs().max(1.0);
            let k_max = if matches!(
                cfg.theorem,
                TheoremKind::CountingSingle | TheoremKind::CountingFamily
            ) {
                // eigenspaces need every mode reaching the window
                let a_max = (0..=4096)
                    .map(|i| p.model.a(p.model.length() * i as f64 / 4096.0))
                    .fold(0.0, f64::max);
                let above = (e_max - p.model.min_potential()).max(0.0);
                (a_max * above.sqrt() / h).ceil() as u64 + 1
            } else {
                fam.max_k(h)
            };
            let table =
                SpectrumTable::from_fd(&p.model, h, k_max, n, e_max, &SolverOptions::default())
                    .with_context(|| format!("finite-difference spectrum, |k| <= {k_max}"))?;
            let src = TableSource {
                table: &table,
                model: &p.model,
            };
            evaluate(cfg, p, &src, &src)
        }
    }
}

fn evaluate(
    cfg: &ExperimentConfig,
    p: &Prepared,
    modes: &dyn eqweyl_core::weyllab::SpectrumSource,
    spaces: &dyn eqweyl_core::weyllab::EigenspaceSource,
) -> anyhow::Result<f64> {
    let fam = cfg.family.to_family();
    let v = match cfg.theorem {
        TheoremKind::WeylSingle | TheoremKind::WeylFamily => {
            let w = p.window.as_ref().ok_or_else(|| anyhow!("window missing"))?;
            weyl_lhs_family(modes, &fam, w, &p.observable)?
        }
        TheoremKind::CountingSingle | TheoremKind::CountingFamily => {
            let w = p.window.as_ref().ok_or_else(|| anyhow!("window missing"))?;
            counting_lhs(spaces, &fam, w)?
        }
        TheoremKind::Trace => {
            let rho = p.rho.as_ref().ok_or_else(|| anyhow!("rho missing"))?;
            trace_lhs(modes, &fam, rho, &p.observable)?
        }
    };
    Ok(v)
}

const MC_CHUNK: u64 = 4096;

type PhaseIntegrand<'a> = Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>;

/// Box-sampling estimate of the leading term, seeded by `cfg.seed`.
///
/// Samples are drawn in fixed chunks, each with its own ChaCha stream, so the
/// result does not depend on the thread count.
fn monte_carlo(cfg: &ExperimentConfig, p: &Prepared, symbol: &dyn Symbol) -> MonteCarlo {
    let model = &p.model;
    let l = model.length();
    let v_min = model.min_potential();
    let (integrand, e_top, shell): (PhaseIntegrand, f64, Option<f64>) = match (&p.rho, cfg.theorem)
    {
        (Some(rho), TheoremKind::Trace) => {
            let hi = rho.support().map_or(v_min, |(_, hi)| hi);
            (
                Box::new(move |s: f64, sig: f64| {
                    rho.eval(sig * sig + model.v(s)) * averaged_symbol(symbol, s, sig, 0.0)
                }),
                hi,
                None,
            )
        }
        _ => {
            let eps = 1e-2;
            let c = cfg.c;
            (
                Box::new(move |s: f64, sig: f64| {
                    let e = sig * sig + model.v(s);
                    if (c..=c + eps).contains(&e) {
                        averaged_symbol(symbol, s, sig, 0.0) / eps
                    } else {
                        0.0
                    }
                }),
                cfg.c + eps,
                Some(eps),
            )
        }
    };
    let sig_max = (e_top - v_min).max(0.0).sqrt();
    let area = l * 2.0 * sig_max;
    let n = cfg.monte_carlo_samples;
    let chunks = n.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chunk);
            let m = MC_CHUNK.min(n - chunk * MC_CHUNK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..m {
                let s = rng.gen::<f64>() * l;
                let sig = (2.0 * rng.gen::<f64>() - 1.0) * sig_max;
                let x = area * integrand(s, sig);
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial
        .iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n.max(1) as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    MonteCarlo {
        estimate: mean,
        stderr: (var / nf).sqrt(),
        samples: n,
        shell_width: shell,
    }
}
