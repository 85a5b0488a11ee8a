//! Fourier multipliers of weighted `L²(𝕋)` spaces with LKS weights.
//!
//! Modules follow the data flow: [`seqcore`] (sequences, grids, transforms),
//! [`weights`] (LKS weights and their criteria), [`dirichlet`] (discrete
//! Besov-Dirichlet seminorms), [`potentials`] (Green kernels and capacities),
//! [`multipliers`] (membership tests), [`singular`] (several singularities)
//! and [`spectra`] (hidden spectrum probes).

pub mod dirichlet;
pub mod error;
pub mod linalg;
pub mod multipliers;
pub mod potentials;
pub mod seqcore;
pub mod singular;
pub mod spectra;
pub mod weights;

pub use error::{Error, ErrorClass, Result};
pub use seqcore::{CoeffTable, GramMatrix, WeightGrid, WindowSeq, C64};
pub use dirichlet::DirichletMatrix;
pub use multipliers::{FarField, MultiplierSpec, NuWeight};
pub use singular::{CutoffSpec, SingularitySet};
pub use spectra::{NuMeasure, SymbolSpec};
pub use potentials::KernelSeq;
pub use weights::CoeffSeq;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
