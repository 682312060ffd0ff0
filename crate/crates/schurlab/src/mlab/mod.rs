//! Schur multiplier kernels on finite graphs, cb-norm computation by
//! semidefinite programming, factorization witnesses for tree products and
//! median complexes, and the cb-norm sandwich experiment.

pub mod sandwich;
pub mod sdp;
pub mod witness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{MultiSymbol, TruncatedMatrix};
use crate::linalg::{polar_factors, CMat};
use crate::medgraph::{FiniteGraph, TreeProduct};
use crate::scalar::C64;
use crate::symbolkit::RadialSymbol;

pub use sandwich::{sandwich_check, SandwichReport, SandwichRow};
pub use sdp::{cb_norm_sdp, cb_norm_sdp_with, CbNormResult, SdpOptions, TracePoint};
pub use witness::{median_witness, tree_product_witness, FactorizationWitness, SparseEntry, TensorMaps};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KernelProvenance {
    Radial { symbol: String },
    MultiRadial { symbol: String },
    Raw { note: String },
}

/// A kernel φ(x, y) on a finite vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    /// Graph indices of the rows/columns, in order.
    pub vertices: Vec<usize>,
    pub entries: CMat,
    pub provenance: KernelProvenance,
}

impl KernelMatrix {
    pub fn raw(entries: CMat, note: impl Into<String>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidInput("kernel must be square".into()));
        }
        Ok(KernelMatrix {
            vertices: (0..entries.nrows()).collect(),
            entries,
            provenance: KernelProvenance::Raw { note: note.into() },
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Principal submatrix on the given row positions.
    pub fn restrict(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.len()) {
            return Err(Error::InvalidInput(format!("row {bad} outside kernel of size {}", self.len())));
        }
        let entries = CMat::from_fn(rows.len(), rows.len(), |a, b| self.entries[(rows[a], rows[b])]);
        Ok(KernelMatrix {
            vertices: rows.iter().map(|&r| self.vertices[r]).collect(),
            entries,
            provenance: self.provenance.clone(),
        })
    }

    pub fn max_modulus(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// φ(x, y) = φ̇(d(x, y)) on all vertices of `graph`.
pub fn radial_kernel(graph: &FiniteGraph, symbol: &RadialSymbol) -> Result<KernelMatrix> {
    let all: Vec<usize> = (0..graph.len()).collect();
    radial_kernel_on(graph, &all, symbol)
}

/// Radial kernel restricted to `vertices`.
pub fn radial_kernel_on(graph: &FiniteGraph, vertices: &[usize], symbol: &RadialSymbol) -> Result<KernelMatrix> {
    let reach = vertices
        .iter()
        .flat_map(|&x| vertices.iter().map(move |&y| (x, y)))
        .map(|(x, y)| graph.d(x, y))
        .max()
        .unwrap_or(0);
    let table = symbol.sample(reach + 1)?;
    let n = vertices.len();
    let entries = CMat::from_fn(n, n, |a, b| table[graph.d(vertices[a], vertices[b])]);
    // spot check against direct evaluation along a deterministic stride
    let stride = (n * n / 97).max(1);
    for flat in (0..n * n).step_by(stride) {
        let (a, b) = (flat / n, flat % n);
        let direct = symbol.eval(graph.d(vertices[a], vertices[b]))?;
        if direct != entries[(a, b)] {
            return Err(Error::StructureViolation(format!("radial kernel entry ({a},{b}) mismatch")));
        }
    }
    Ok(KernelMatrix {
        vertices: vertices.to_vec(),
        entries,
        provenance: KernelProvenance::Radial { symbol: symbol.label() },
    })
}

/// φ(x, y) = φ̃(d(x₁,y₁), …, d(x_N,y_N)) on `vertices` of a tree product.
pub fn multiradial_kernel(product: &TreeProduct, vertices: &[usize], phi: &MultiSymbol) -> Result<KernelMatrix> {
    let n = vertices.len();
    let mut entries = CMat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = phi.eval(&product.distance_vector(vertices[a], vertices[b]))?;
            entries[(a, b)] = v;
            entries[(b, a)] = v;
        }
    }
    Ok(KernelMatrix {
        vertices: vertices.to_vec(),
        entries,
        provenance: KernelProvenance::MultiRadial { symbol: phi.label() },
    })
}

/// T = A*·B with ‖A‖_F·‖B‖_F equal to the trace norm of T.
pub fn polar_factor(t: &TruncatedMatrix) -> Result<(CMat, CMat)> {
    if t.entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(0));
    }
    Ok(polar_factors(&t.entries, 0.0))
}

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Splits 0..n into contiguous chunks and maps them on scoped threads;
/// results come back in order.
pub(crate) fn par_chunks<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync,
{
    let workers = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1).min(n.max(1));
    if workers <= 1 {
        // no threads on targets without them (wasm32)
        return vec![f(0..n)];
    }
    let chunk = n.div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|start| {
                let f = &f;
                s.spawn(move || f(start..(start + chunk).min(n)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}
