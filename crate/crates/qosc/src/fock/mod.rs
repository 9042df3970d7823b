//! The Fock representation: spectral truncation, V-form overlaps,
//! Clebsch-Gordan braces, edge weights, the star-triangle relation, and the
//! RLL and box intertwining checks.

pub mod braces;
pub mod rmatrix;
pub mod spectral;
pub mod vform;
pub mod weights;

pub use braces::{brace, cg_coefficient, BraceMethod, BraceTensor, CgSide, FockOperators};
pub use spectral::{build_truncated_h, spectral_experiment, Regularisation, SpectralReport, TruncatedHamiltonian};
pub use vform::{vform_matrices, FockRepParams, VFormMatrices};
pub use rmatrix::{box_intertwining_check, box_rmatrix_fock, rll_check, BoxRapidities, RllVariant};
pub use weights::{kappa, measure, nf, partition_series_fock, weight_v, SpinWeightTable, SPIN_CAP};
