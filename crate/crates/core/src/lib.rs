//! Anisotropy diagnostics and direction-removal post-processing for static
//! embedding matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`embedding`] loads and saves the plain-text interchange format.
//! * [`spectral`] computes principal directions of the (uncentered) matrix.
//! * [`diagnostics`] measures mean vector length, average cosine, spectrum and
//!   frequency correlations.
//! * [`postprocess`] implements weighted removal, all-but-the-top and
//!   conceptor negation.
//! * [`trainer`] learns per-direction removal weights from word-similarity
//!   supervision.
//! * [`datasets`] parses evaluation datasets and the dataset manifest.
//! * [`eval`] scores embeddings on word similarity, analogy and STS.

pub mod datasets;
pub mod diagnostics;
pub mod embedding;
mod error;
pub mod eval;
mod numfmt;
mod par;
pub mod postprocess;
pub mod spectral;
pub mod trainer;

pub use crate::embedding::{normalize, EmbeddingMatrix, FrequencyTable, Vocabulary};
pub use crate::error::{Error, Result};
pub use crate::postprocess::RemovalModel;
pub use crate::spectral::PrincipalDirections;
