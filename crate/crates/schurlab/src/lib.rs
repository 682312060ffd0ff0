//! Numerical workbench for radial Schur multipliers on trees, tree
//! products, and median graphs: discrete derivative calculus, generalized
//! Hankel trace norms, dyadic Besov norms, median-graph combinatorics,
//! semidefinite cb-norm computation, and factorization witnesses.

pub mod bench;
pub mod besov;
pub mod error;
pub mod hankel;
pub mod medgraph;
pub mod mlab;
pub mod linalg;
pub mod scalar;
pub mod symbolkit;
pub mod verdict;

pub use error::{Error, Result};
pub use scalar::{C64, Q};
pub use symbolkit::{DerivativeSpec, RadialSymbol, SymbolKind};
pub use verdict::Verdict;
