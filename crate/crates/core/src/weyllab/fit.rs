//! Log-log convergence fits and the report they produce.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremKind {
    WeylSingle,
    WeylFamily,
    CountingSingle,
    CountingFamily,
    Trace,
}

impl TheoremKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::WeylSingle => "weyl_single",
            Self::WeylFamily => "weyl_family",
            Self::CountingSingle => "counting_single",
            Self::CountingFamily => "counting_family",
            Self::Trace => "trace",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::WeylSingle,
            Self::WeylFamily,
            Self::CountingSingle,
            Self::CountingFamily,
            Self::Trace,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
    }

    pub fn is_trace(&self) -> bool {
        matches!(self, Self::Trace)
    }
}

/// Exponents entering the predicted remainder rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub theorem: TheoremKind,
    pub delta: f64,
    pub theta: f64,
    pub kappa: u32,
    /// Length of the longest isotropy chain; the remainder carries `(log 1/h)^{Λ-1}`.
    pub lambda_iso: u32,
}

impl RateParams {
    /// `min(δ, (1 − (2κ+3)ϑ)/(2κ+4) − δ)` for window sums, `1 − (2κ+3)(δ+ϑ)` for traces.
    pub fn predicted_exponent(&self) -> f64 {
        let k = f64::from(self.kappa);
        if self.theorem.is_trace() {
            1.0 - (2.0 * k + 3.0) * (self.delta + self.theta)
        } else {
            self.delta
                .min((1.0 - (2.0 * k + 3.0) * self.theta) / (2.0 * k + 4.0) - self.delta)
        }
    }

    /// Whether `(δ, ϑ)` lie in the range where the remainder estimate is proved.
    pub fn in_theorem_range(&self) -> bool {
        let k = f64::from(self.kappa);
        if self.theorem.is_trace() {
            self.delta >= 0.0
                && self.delta < 1.0 / (2.0 * k + 3.0)
                && self.theta < 1.0 / (2.0 * k + 3.0) - self.delta
        } else {
            self.delta > 0.0
                && self.delta < 1.0 / (2.0 * k + 4.0)
                && self.theta < (1.0 - (2.0 * k + 4.0) * self.delta) / (2.0 * k + 3.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

/// Least squares of `log e` against `log h`. Any `e ≤ 0` gives slope `+∞`.
pub fn fit_slope(h: &[f64], e: &[f64]) -> Result<SlopeFit> {
    if h.len() != e.len() {
        return Err(Error::NotEnoughData(format!(
            "{} h values but {} errors",
            h.len(),
            e.len()
        )));
    }
    if h.len() < 2 {
        return Err(Error::NotEnoughData(format!("{} points", h.len())));
    }
    if e.iter().any(|&x| !(x > 0.0)) {
        return Ok(SlopeFit {
            slope: f64::INFINITY,
            intercept: f64::NAN,
            stderr: 0.0,
        });
    }
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|x| x.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if h.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub h: f64,
    pub lhs: f64,
    pub leading: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub theorem: TheoremKind,
    pub model: String,
    pub params: RateParams,
    pub theorem_mode: bool,
    pub rows: Vec<ReportRow>,
    pub raw: SlopeFit,
    pub log_corrected: SlopeFit,
    pub predicted_exponent: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSummary {
    pub slope: f64,
    pub slope_logcorrected: f64,
    pub predicted_exponent: f64,
    pub pass: bool,
}

/// Fits `|lhs − leading|` against `h`.
///
/// Needs at least four strictly decreasing `h` values spanning two decades.
/// The report passes when the raw slope is positive and either slope reaches
/// the predicted exponent within two standard errors.
pub fn compare_and_fit(
    model: &str,
    h: &[f64],
    lhs: &[f64],
    leading: &[f64],
    params: RateParams,
) -> Result<WeylReport> {
    if h.len() != lhs.len() || h.len() != leading.len() {
        return Err(Error::NotEnoughData("column lengths differ".into()));
    }
    if h.len() < 4 {
        return Err(Error::NotEnoughData(format!(
            "{} h values, need 4",
            h.len()
        )));
    }
    if h.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(
            "h values must be strictly decreasing".into(),
        ));
    }
    if h[0] / h[h.len() - 1] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::NotEnoughData(
            "h values span less than two decades".into(),
        ));
    }
    let rows: Vec<ReportRow> = h
        .iter()
        .zip(lhs)
        .zip(leading)
        .map(|((&h, &lhs), &leading)| ReportRow {
            h,
            lhs,
            leading,
            abs_error: (lhs - leading).abs(),
        })
        .collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.abs_error).collect();
    let raw = fit_slope(h, &errors)?;
    let log_power = params.lambda_iso.saturating_sub(1) as i32;
    let corrected: Vec<f64> = h
        .iter()
        .zip(&errors)
        .map(|(&h, &e)| e / (1.0 / h).ln().powi(log_power))
        .collect();
    let log_corrected = fit_slope(h, &corrected)?;
    let predicted_exponent = params.predicted_exponent();
    let reaches = |f: &SlopeFit| f.slope + 2.0 * f.stderr >= predicted_exponent;
    let pass = raw.slope > 0.0 && (reaches(&raw) || reaches(&log_corrected));
    Ok(WeylReport {
        theorem: params.theorem,
        model: model.to_string(),
        params,
        theorem_mode: params.in_theorem_range(),
        rows,
        raw,
        log_corrected,
        predicted_exponent,
        pass,
    })
}

impl WeylReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            slope: self.raw.slope,
            slope_logcorrected: self.log_corrected.slope,
            predicted_exponent: self.predicted_exponent,
            pass: self.pass,
        }
    }

    /// Columns `theorem, model, h, lhs, leading, abs_error`.
    pub fn to_csv(&self, header_comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = header_comment {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        out.push_str("theorem,model,h,lhs,leading,abs_error\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.theorem.as_str(),
                self.model,
                r.h,
                r.lhs,
                r.leading,
                r.abs_error
            );
        }
        out
    }

    /// Two whitespace-separated columns `h abs_error`, readable by gnuplot.
    pub fn error_table(&self) -> String {
        let mut out = String::from("# h abs_error\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:.16e} {:.16e}", r.h, r.abs_error);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(hi: f64, lo: f64, n: usize) -> Vec<f64> {
        let r = (lo / hi).powf(1.0 / (n - 1) as f64);
        (0..n).map(|i| hi * r.powi(i as i32)).collect()
    }

    #[test]
    fn exact_power_law() {
        let h = geometric(1e-1, 1e-4, 7);
        let e: Vec<f64> = h.iter().map(|x| x.powf(0.5)).collect();
        let f = fit_slope(&h, &e).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-6);
    }

    #[test]
    fn log_corrected_power_law() {
        let h = geometric(1e-1, 1e-4, 7);
        let lhs: Vec<f64> = h
            .iter()
            .map(|x| 1.0 + x.powf(0.3) * (1.0 / x).ln())
            .collect();
        let params = RateParams {
            theorem: TheoremKind::CountingSingle,
            delta: 0.1,
            theta: 0.0,
            kappa: 1,
            lambda_iso: 2,
        };
        let r = compare_and_fit("synthetic", &h, &lhs, &[1.0; 7], params).unwrap();
        assert!((r.log_corrected.slope - 0.3).abs() < 0.02);
        assert!(r.raw.slope < r.log_corrected.slope);
    }

    #[test]
    fn constant_and_zero_errors() {
        let h = geometric(1e-1, 1e-4, 5);
        assert!(fit_slope(&h, &[2.0; 5]).unwrap().slope.abs() < 1e-12);
        assert_eq!(
            fit_slope(&h, &[1.0, 0.0, 1.0, 1.0, 1.0]).unwrap().slope,
            f64::INFINITY
        );
    }

    #[test]
    fn validation() {
        let params = RateParams {
            theorem: TheoremKind::WeylSingle,
            delta: 0.1,
            theta: 0.0,
            kappa: 1,
            lambda_iso: 1,
        };
        let h = [1e-1, 1e-2, 5e-3, 1e-3];
        assert!(compare_and_fit("m", &h[..3], &[1.0; 3], &[1.0; 3], params).is_err());
        let short = [1e-1, 5e-2, 2e-2, 1e-2];
        assert!(compare_and_fit("m", &short, &[1.0; 4], &[0.5; 4], params).is_err());
        let up = [1e-3, 1e-2, 2e-2, 1e-1];
        assert!(compare_and_fit("m", &up, &[1.0; 4], &[0.5; 4], params).is_err());
    }

    #[test]
    fn predicted_exponents() {
        let weyl = RateParams {
            theorem: TheoremKind::WeylFamily,
            delta: 0.05,
            theta: 0.1,
            kappa: 1,
            lambda_iso: 2,
        };
        assert!((weyl.predicted_exponent() - (0.5 / 6.0 - 0.05)).abs() < 1e-15);
        assert!(weyl.in_theorem_range());
        let wide = RateParams {
            delta: 0.16,
            theta: 0.0,
            ..weyl
        };
        assert!((wide.predicted_exponent() - (1.0 / 6.0 - 0.16)).abs() < 1e-15);
        let trace = RateParams {
            theorem: TheoremKind::Trace,
            delta: 0.0,
            theta: 0.1,
            ..weyl
        };
        assert!((trace.predicted_exponent() - 0.5).abs() < 1e-15);
        assert!(!RateParams {
            theta: 0.25,
            ..trace
        }
        .in_theorem_range());
    }

    #[test]
    fn csv_layout() {
        let h = geometric(1e-1, 1e-3, 4);
        let params = RateParams {
            theorem: TheoremKind::Trace,
            delta: 0.0,
            theta: 0.0,
            kappa: 1,
            lambda_iso: 1,
        };
        let r = compare_and_fit(
            "flat_torus",
            &h,
            &[1.1, 1.01, 1.001, 1.0001],
            &[1.0; 4],
            params,
        )
        .unwrap();
        let csv = r.to_csv(Some("config sha256: abc"));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# config sha256: abc");
        assert_eq!(lines[1], "theorem,model,h,lhs,leading,abs_error");
        assert!(lines[2].starts_with("trace,flat_torus,1.0000000000000001e-1,"));
        assert!(r.pass);
    }
}
