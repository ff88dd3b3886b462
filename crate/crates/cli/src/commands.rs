//! The non-experiment subcommands. Each returns its output as a string.

use std::fmt::Write as _;

use anyhow::{bail, Context};
use eqweyl_core::geometry::{catalog_document, potentials, BUILTIN_MODELS};
use eqweyl_core::modespec::exact_spectrum;
use eqweyl_core::reduction::reduced_volume_csv;
use eqweyl_core::weyllab::{RateParams, KAPPA};
use eqweyl_core::{
    assemble_mode_operator, builtin_model, compare_and_fit, solve_modes, ModeGrid,
    RevolutionSurface, TheoremKind, WeylReport,
};

pub fn models(json: bool) -> anyhow::Result<String> {
    if json {
        return Ok(serde_json::to_string_pretty(&catalog_document(64))? + "\n");
    }
    let mut out = String::from("name,L,boundary,exact_backend,Lambda,fixed_points\n");
    for name in BUILTIN_MODELS {
        let m = builtin_model(name)?;
        let ap = m.action_profile();
        let fixed: Vec<String> = ap.fixed_points.iter().map(|s| format!("{s:.17}")).collect();
        writeln!(
            out,
            "{},{:.17},{:?},{:?},{},{}",
            m.name(),
            m.length(),
            m.boundary(),
            m.exact_backend(),
            ap.lambda,
            fixed.join(";")
        )?;
    }
    Ok(out)
}

pub fn surface(model: &str, potential: &str) -> anyhow::Result<RevolutionSurface> {
    let m = builtin_model(model)?;
    let Some(v) = potentials::by_name(potential) else {
        bail!(
            "unknown potential {potential:?}; expected one of {:?}",
            potentials::NAMES
        );
    };
    Ok(m.with_potential(v)?)
}

/// Eigenvalues of mode `k` up to `e_max`, one per row.
/// `fd_points = None` uses the closed form.
pub fn spectrum(
    model: &RevolutionSurface,
    k: i64,
    h: f64,
    e_max: f64,
    fd_points: Option<usize>,
) -> anyhow::Result<String> {
    let recs = match fd_points {
        None => exact_spectrum(model, k, h, e_max)?,
        Some(n) => {
            let grid = ModeGrid::new(model, n)?;
            let op = assemble_mode_operator(model, k, h, &grid)
                .with_context(|| format!("assembling mode k = {k} at h = {h}"))?;
            for w in &op.warnings {
                eprintln!("warning: {w:?}");
            }
            solve_modes(&op, e_max).with_context(|| format!("solving mode k = {k} at h = {h}"))?
        }
    };
    let mut out = String::from("k,index,energy,provenance\n");
    for r in &recs {
        writeln!(
            out,
            "{},{},{:.16e},{:?}",
            r.k, r.index, r.energy, r.provenance
        )?;
    }
    Ok(out)
}

pub fn reduce(model: &RevolutionSurface, cs: &[f64]) -> anyhow::Result<String> {
    Ok(reduced_volume_csv(model, cs)?)
}

/// Rows of a report CSV, skipping `#` comment lines.
pub struct ParsedReport {
    pub theorem: TheoremKind,
    pub model: String,
    pub h: Vec<f64>,
    pub lhs: Vec<f64>,
    pub leading: Vec<f64>,
}

pub fn parse_report_csv(text: &str) -> anyhow::Result<ParsedReport> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines.next().context("empty report")?;
    if header.trim() != "theorem,model,h,lhs,leading,abs_error" {
        bail!("unexpected header {header:?}");
    }
    let mut rep = ParsedReport {
        theorem: TheoremKind::CountingSingle,
        model: String::new(),
        h: vec![],
        lhs: vec![],
        leading: vec![],
    };
    for (i, line) in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            bail!("line {}: expected 6 columns, found {}", i + 1, cols.len());
        }
        rep.theorem = TheoremKind::parse(cols[0])
            .with_context(|| format!("line {}: unknown theorem {:?}", i + 1, cols[0]))?;
        rep.model = cols[1].to_string();
        let num = |j: usize| -> anyhow::Result<f64> {
            cols[j]
                .parse()
                .with_context(|| format!("line {}: column {} is not a number", i + 1, j + 1))
        };
        rep.h.push(num(2)?);
        rep.lhs.push(num(3)?);
        rep.leading.push(num(4)?);
    }
    Ok(rep)
}

/// Refits a report CSV with new exponents.
pub fn fit(text: &str, delta: f64, theta: f64) -> anyhow::Result<WeylReport> {
    let rep = parse_report_csv(text)?;
    let lambda_iso = builtin_model(&rep.model).map_or(1, |m| m.action_profile().lambda as u32);
    let params = RateParams {
        theorem: rep.theorem,
        delta,
        theta,
        kappa: KAPPA,
        lambda_iso,
    };
    Ok(compare_and_fit(
        &rep.model,
        &rep.h,
        &rep.lhs,
        &rep.leading,
        params,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lists_four_models() {
        let csv = models(false).unwrap();
        assert_eq!(csv.lines().count(), 5);
        let json: serde_json::Value = serde_json::from_str(&models(true).unwrap()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 4);
    }

    #[test]
    fn sphere_spectrum_rows() {
        let m = surface("sphere", "zero").unwrap();
        let out = spectrum(&m, 0, 1.0, 25.0, None).unwrap();
        let e: Vec<f64> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert_eq!(e, vec![0.0, 2.0, 6.0, 12.0, 20.0]);
    }

    #[test]
    fn reduce_sphere_is_pi() {
        let m = surface("sphere", "zero").unwrap();
        let out = reduce(&m, &[1.0]).unwrap();
        let v: f64 = out
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn refit_reads_its_own_output() {
        let h: Vec<f64> = (0..5).map(|i| 10f64.powf(-1.0 - 0.75 * i as f64)).collect();
        let lhs: Vec<f64> = h.iter().map(|x| 2.0 + x.sqrt()).collect();
        let params = RateParams {
            theorem: TheoremKind::WeylSingle,
            delta: 0.1,
            theta: 0.0,
            kappa: 1,
            lambda_iso: 1,
        };
        let r = compare_and_fit("flat_torus", &h, &lhs, &[2.0; 5], params).unwrap();
        let back = fit(&r.to_csv(Some("x")), 0.1, 0.0).unwrap();
        assert!((back.raw.slope - 0.5).abs() < 1e-6);
        assert_eq!(back.to_csv(None), r.to_csv(None));
    }
}
