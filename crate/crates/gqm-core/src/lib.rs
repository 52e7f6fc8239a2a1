//! Graph quantum mechanics and discrete Morse theory.
//!
//! A finite graph carries two Laplacians: the even one on vertex states
//! and the odd one on edge states, built from the oriented incidence
//! matrix. Their exact kernels compute the graph's Betti numbers (a
//! discrete Hodge theorem), their heat kernel counts signed generalized
//! walks, and eigenspaces below an energy threshold form a cutoff complex
//! with the same cohomology. A discrete Morse function on the cells
//! deforms the coboundary by exp(fs); as s grows the deformed Laplacians
//! collapse onto the critical cells, which proves the Morse inequalities
//! and, through gradient flows, recovers graph homology from the Morse
//! differential.
//!
//! Everything dimension-shaped (ranks, kernels, critical counts, homology)
//! is computed over arbitrary-precision rationals; floating point is used
//! only for spectra, always cross-checked against the exact kernels.

pub mod error;
pub mod graph;
pub mod linalg;
pub mod matrix;
pub mod morse;
pub mod spectral;
pub mod suite;
pub mod witten;

pub use error::{Error, Result};
pub use graph::{parse_graph, Cell, Edge, Graph, SpanningTree};
pub use linalg::{KernelBasis, Spectrum, DEFAULT_TOL};
pub use matrix::{Rational, RationalMatrix};
pub use morse::{
    CriticalCells, GradientCurve, GradientField, MorseAnalysis, MorseComplex, MorseFunction,
    MorseReport,
};
pub use spectral::CutoffComplex;
pub use witten::{DeformedOperator, DivergenceReport, ExpPoly, LimitLaplacians, SpectralFlow};
