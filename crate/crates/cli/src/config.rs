//! Experiment configuration: a single JSON document.

use std::fmt;

use eqweyl_core::geometry::{potentials, BUILTIN_MODELS};
use eqweyl_core::modespec::EnergyWeight;
use eqweyl_core::weyllab::{RateParams, KAPPA};
use eqweyl_core::{
    builtin_model, bump, CharacterFamily, Observable, RadialObservable, RevolutionSurface,
    SpectralWindow, TestFunction, TheoremKind,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    /// Name from the potential catalog; `zero` when absent.
    #[serde(default = "default_potential")]
    pub potential: String,
    pub theorem: TheoremKind,
    pub c: f64,
    /// Window exponent. Traces use a fixed `ρ` and default to `0`.
    #[serde(default)]
    pub delta: f64,
    pub family: FamilySpec,
    pub h_schedule: HSchedule,
    #[serde(default)]
    pub observable: ObservableSpec,
    /// Energy cut-off for traces.
    #[serde(default)]
    pub rho: Option<BumpSpec>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_strict")]
    pub strict: bool,
    #[serde(default = "default_mc_samples")]
    pub monte_carlo_samples: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_potential() -> String {
    "zero".into()
}
fn default_jobs() -> usize {
    1
}
fn default_strict() -> bool {
    true
}
fn default_mc_samples() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    Fixed(Vec<i64>),
    PowerLaw(f64),
}

impl FamilySpec {
    pub fn to_family(&self) -> CharacterFamily {
        match self {
            Self::Fixed(ks) => CharacterFamily::Fixed(ks.clone()),
            Self::PowerLaw(t) => CharacterFamily::PowerLaw(*t),
        }
    }
}

/// Geometric schedule from `h_max` down to `h_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HSchedule {
    pub h_max: f64,
    pub h_min: f64,
    pub count: usize,
}

impl HSchedule {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.h_max];
        }
        let ratio = (self.h_min / self.h_max).ln() / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| match i {
                0 => self.h_max,
                i if i + 1 == self.count => self.h_min,
                i => self.h_max * (ratio * i as f64).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: f64,
    pub width: f64,
    #[serde(default = "one")]
    pub height: f64,
}

fn one() -> f64 {
    1.0
}

impl BumpSpec {
    pub fn build(&self) -> eqweyl_core::Result<TestFunction> {
        bump(self.center, self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialId {
    One,
    Zero,
    Cos2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSpec {
    One,
    Zero,
    Bump(BumpSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub b0: RadialId,
    #[serde(default = "one")]
    pub scale: f64,
    pub beta: BetaSpec,
}

impl Default for ObservableSpec {
    fn default() -> Self {
        Self {
            b0: RadialId::One,
            scale: 1.0,
            beta: BetaSpec::One,
        }
    }
}

impl ObservableSpec {
    pub fn build(&self) -> eqweyl_core::Result<Observable> {
        let base = match self.b0 {
            RadialId::One => RadialObservable::Constant(1.0),
            RadialId::Zero => RadialObservable::Constant(0.0),
            RadialId::Cos2 => RadialObservable::CosSquared,
        };
        let b0 = if self.scale == 1.0 {
            base
        } else {
            base.scaled(self.scale)
        };
        let beta = match self.beta {
            BetaSpec::One => EnergyWeight::One,
            BetaSpec::Zero => EnergyWeight::Zero,
            BetaSpec::Bump(b) => EnergyWeight::Test(b.build()?),
        };
        Ok(Observable { b0, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Exact,
    Fd {
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// File stem; `<stem>.csv`, `<stem>.json`, `<stem>.errors.dat` go under the output directory.
    #[serde(default)]
    pub stem: Option<String>,
    #[serde(default = "default_true")]
    pub error_table: bool,
}

fn default_true() -> bool {
    true
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            stem: None,
            error_table: true,
        }
    }
}

/// One violated constraint, located by its path in the document.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<FieldError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid experiment config:")?;
        for e in &self.0 {
            writeln!(f, "  {}: {}", e.path, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Hash of every field that can change an emitted number.
    /// Parallelism and output naming are excluded.
    pub fn content_hash(&self) -> String {
        let mut canon = self.clone();
        canon.jobs = 0;
        canon.outputs = Outputs::default();
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn rate_params(&self) -> RateParams {
        let model = builtin_model(&self.model).ok();
        RateParams {
            theorem: self.theorem,
            delta: self.delta,
            theta: self.family.to_family().theta(),
            kappa: KAPPA,
            lambda_iso: model.map_or(1, |m| m.action_profile().lambda as u32),
        }
    }

    pub fn surface(&self) -> eqweyl_core::Result<RevolutionSurface> {
        let model = builtin_model(&self.model)?;
        match potentials::by_name(&self.potential) {
            Some(v) => model.with_potential(v),
            None => Err(eqweyl_core::Error::InvalidParameter(format!(
                "unknown potential {}",
                self.potential
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), ValidationErrors> {
        let mut errs = Vec::new();
        let mut push = |path: &str, message: String| {
            errs.push(FieldError {
                path: path.into(),
                message,
            })
        };
        if !BUILTIN_MODELS.contains(&self.model.as_str()) {
            push(
                "model",
                format!(
                    "unknown model {:?}; expected one of {BUILTIN_MODELS:?}",
                    self.model
                ),
            );
        }
        if potentials::by_name(&self.potential).is_none() {
            push(
                "potential",
                format!(
                    "unknown potential {:?}; expected one of {:?}",
                    self.potential,
                    potentials::NAMES
                ),
            );
        }
        if !self.c.is_finite() {
            push("c", "must be finite".into());
        }
        let hs = &self.h_schedule;
        if !(hs.h_max > 0.0 && hs.h_max <= 1.0) {
            push("h_schedule.h_max", format!("{} outside (0, 1]", hs.h_max));
        }
        if !(hs.h_min > 0.0) {
            push("h_schedule.h_min", format!("{} must be positive", hs.h_min));
        }
        if hs.count == 0 {
            push("h_schedule.count", "must be at least 1".into());
        } else if hs.count > 1 && !(hs.h_min < hs.h_max) {
            push(
                "h_schedule",
                "must be strictly decreasing (h_min < h_max)".into(),
            );
        }
        match &self.family {
            FamilySpec::Fixed(ks) if ks.is_empty() => {
                push("family.fixed", "must not be empty".into())
            }
            FamilySpec::PowerLaw(t) if !(*t >= 0.0 && t.is_finite()) => push(
                "family.power_law",
                format!("growth rate {t} must be a finite number ≥ 0"),
            ),
            _ => {}
        }
        let single = matches!(
            self.theorem,
            TheoremKind::WeylSingle | TheoremKind::CountingSingle
        );
        if single && !matches!(&self.family, FamilySpec::Fixed(ks) if ks.len() == 1) {
            push(
                "family",
                format!("{} needs a single fixed character", self.theorem.as_str()),
            );
        }
        let counting = matches!(
            self.theorem,
            TheoremKind::CountingSingle | TheoremKind::CountingFamily
        );
        if counting && self.observable != ObservableSpec::default() {
            push(
                "observable",
                "counting theorems use the identity observable".into(),
            );
        }
        if self.theorem.is_trace() {
            if self.rho.is_none() {
                push("rho", "trace experiments need an energy cut-off".into());
            }
            if !(self.delta >= 0.0) {
                push("delta", format!("{} must be ≥ 0", self.delta));
            }
        } else if let Err(e) = SpectralWindow::new(self.c, self.delta, self.strict) {
            push("delta", e.to_string());
        }
        for (path, b) in [
            ("rho", self.rho),
            (
                "observable.beta.bump",
                match self.observable.beta {
                    BetaSpec::Bump(b) => Some(b),
                    _ => None,
                },
            ),
        ] {
            if let Some(b) = b {
                if let Err(e) = b.build() {
                    push(path, e.to_string());
                }
            }
        }
        if let Backend::Fd { n } = self.backend {
            if n < 16 {
                push("backend.fd.n", format!("{n} grid points, need at least 16"));
            }
        }
        if self.jobs == 0 {
            push("jobs", "must be at least 1".into());
        }
        if self.strict && !self.rate_params().in_theorem_range() {
            let p = self.rate_params();
            push(
                "family",
                format!(
                    "(delta, theta) = ({}, {}) outside the proved range for {}",
                    p.delta,
                    p.theta,
                    self.theorem.as_str()
                ),
            );
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ValidationErrors(errs))
        }
    }
}
