//! Numerical toolkit for the q-oscillator algebra: q-series special
//! functions, V-form bases, Clebsch-Gordan braces, and Boltzmann weights of
//! the Fock, rational Kashiwara-Miwa and hyperbolic models, each paired with
//! residual checks of the identities it satisfies.

pub mod context;
pub mod error;
pub mod fock;
pub mod modular;
pub mod orthopoly;
pub mod qseries;
pub mod report;
pub mod vgamma;

pub use context::{QContext, C};
pub use error::{QoscError, Result};
pub use report::{IdentityReport, Verdict};
