//! Equivariant semiclassical spectral asymptotics on surfaces of revolution.
//!
//! The circle group acts on a surface of revolution by rotation. The crate
//! computes spectra of `P(h) = -h²Δ + V` one isotypic component at a time,
//! the reduced phase-space integrals that predict their distribution, and
//! window sums comparing the two as `h → 0`.
//!
//! * [`geometry`]: model surfaces, orbit data, the classical Hamiltonian.
//! * [`modespec`]: per-mode spectra, finite-difference and closed form.
//! * [`peterweyl`]: characters, character families, multiplicity tables.
//! * [`reduction`]: reduced hypersurfaces and their measures.
//! * [`mollify`]: smooth energy windows with controlled derivative growth.
//! * [`weyllab`]: window sums, trace sums and convergence fits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
mod jet;
pub mod modespec;
pub mod mollify;
pub mod peterweyl;
pub mod quad;
pub mod reduction;
pub mod weyllab;

pub use error::{Error, Result};
pub use geometry::{
    builtin_model, Boundary, ExactBackend, PhasePoint, RevolutionSurface, SmoothFn,
};
pub use modespec::{
    assemble_mode_operator, exact_spectrum, observable_expectation, solve_modes, EigenRecord,
    EnergyWeight, ModeGrid, ModeOperator, Observable, RadialObservable,
};
pub use mollify::{bump, mollified_window, EnergyFunction, TestFunction, WindowKind};
pub use peterweyl::{family_at, multiplicity_table, Character, CharacterFamily, SpectrumTable};
pub use reduction::{
    omega_weighted_integral, reduced_volume, sigma_c_integral, thin_shell_measure, Symbol,
};
pub use weyllab::{
    compare_and_fit, counting_lhs, trace_lhs, weyl_lhs_family, weyl_lhs_single, ExactSource,
    SpectralWindow, TableSource, TheoremKind, WeylReport,
};
