//! Observables `B = Mult(b0) ∘ β(P(h))`.
//!
//! On an eigenbasis, `⟨B u_j, u_j⟩ = β(E_j) ⟨b0 u_j, u_j⟩`, and the principal
//! symbol is `b0(s) β(p(x, ξ))`.

use std::fmt;
use std::sync::Arc;

use crate::geometry::{hamiltonian_p, PhasePoint, RealFn, RevolutionSurface};
use crate::mollify::TestFunction;
use crate::reduction::Symbol;

/// Multiplication part `b0(s)`, a function of the meridian coordinate only.
#[derive(Clone)]
pub enum RadialObservable {
    Constant(f64),
    /// `cos² s`
    CosSquared,
    Scaled(f64, Box<RadialObservable>),
    Custom {
        name: String,
        f: RealFn,
    },
}

impl RadialObservable {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::CosSquared => s.cos().powi(2),
            Self::Scaled(alpha, inner) => alpha * inner.eval(s),
            Self::Custom { f, .. } => f(s),
        }
    }

    pub fn scaled(self, alpha: f64) -> Self {
        Self::Scaled(alpha, Box::new(self))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Constant(c) if *c == 1.0 => "one".into(),
            Self::Constant(c) => format!("const({c})"),
            Self::CosSquared => "cos2".into(),
            Self::Scaled(a, inner) => format!("{a}*{}", inner.name()),
            Self::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for RadialObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialObservable({})", self.name())
    }
}

/// Spectral part `β(E)`.
#[derive(Clone)]
pub enum EnergyWeight {
    One,
    Zero,
    Test(TestFunction),
    Custom { name: String, f: RealFn },
}

impl EnergyWeight {
    pub fn eval(&self, e: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Zero => 0.0,
            Self::Test(tf) => tf.eval(e),
            Self::Custom { f, .. } => f(e),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::One => "one".into(),
            Self::Zero => "zero".into(),
            Self::Test(_) => "bump".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for EnergyWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EnergyWeight({})", self.name())
    }
}

#[derive(Clone, Debug)]
pub struct Observable {
    pub b0: RadialObservable,
    pub beta: EnergyWeight,
}

impl Observable {
    pub fn identity() -> Self {
        Self {
            b0: RadialObservable::Constant(1.0),
            beta: EnergyWeight::One,
        }
    }

    pub fn multiplication(b0: RadialObservable) -> Self {
        Self {
            b0,
            beta: EnergyWeight::One,
        }
    }

    /// The principal symbol `b0(s) β(p)` on `model`.
    pub fn symbol<'a>(&'a self, model: &'a RevolutionSurface) -> ObservableSymbol<'a> {
        ObservableSymbol { obs: self, model }
    }
}

pub struct ObservableSymbol<'a> {
    obs: &'a Observable,
    model: &'a RevolutionSurface,
}

impl Symbol for ObservableSymbol<'_> {
    fn eval(&self, pt: &PhasePoint) -> f64 {
        let beta = match self.obs.beta {
            EnergyWeight::One => 1.0,
            _ => self.obs.beta.eval(hamiltonian_p(self.model, pt)),
        };
        self.obs.b0.eval(pt.s) * beta
    }

    fn phi_invariant(&self) -> bool {
        true
    }
}
