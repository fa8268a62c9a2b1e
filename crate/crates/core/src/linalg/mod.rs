//! Dense and iterative linear-algebra kernels.

mod dct;
mod dense;
mod geneig;
mod lanczos;
mod psd;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::element::{Element, MaskedMatrix};

pub use dct::{dct_apply, dct_apply_2d, dct_matrix, DctDirection};
pub use dense::{dense_svd, dense_sym_eig, SymEig};
pub use geneig::gen_eig_max;
pub use lanczos::{sym_eig_top, top_singular_triples, EigOptions, SvdOptions};
pub use psd::{project_capped_simplex, project_l1_ball, project_simplex, project_trace_capped_psd};

/// Matrix sizes at or below this use the dense decompositions.
pub const DENSE_CUTOFF: usize = 32;

/// A matrix-like operator with forward and adjoint products.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64>;

    fn to_dense(&self) -> Element {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = Element::zeros(m, n);
        if n <= m {
            let mut e = vec![0.0; n];
            for j in 0..n {
                e[j] = 1.0;
                let col = self.apply(&e);
                e[j] = 0.0;
                for (i, v) in col.into_iter().enumerate() {
                    out.set(i, j, v);
                }
            }
        } else {
            let mut e = vec![0.0; m];
            for i in 0..m {
                e[i] = 1.0;
                let row = self.apply_adjoint(&e);
                e[i] = 0.0;
                for (j, v) in row.into_iter().enumerate() {
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

impl LinearOperator for Element {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x)
    }
    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.tmul_vec(y)
    }
    fn to_dense(&self) -> Element {
        self.clone()
    }
}

/// A masked matrix acts as the sparse matrix holding its entries.
impl LinearOperator for MaskedMatrix {
    fn nrows(&self) -> usize {
        self.shape().0
    }
    fn ncols(&self) -> usize {
        self.shape().1
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.shape().0];
        for &(i, j, v) in self.entries() {
            out[i] += v * x[j];
        }
        out
    }
    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.shape().1];
        for &(i, j, v) in self.entries() {
            out[j] += v * y[i];
        }
        out
    }
}

/// Swaps the roles of rows and columns of an operator.
pub(crate) struct Transposed<'a, A: LinearOperator + ?Sized>(pub &'a A);

impl<A: LinearOperator + ?Sized> LinearOperator for Transposed<'_, A> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.apply_adjoint(x)
    }
    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.0.apply(y)
    }
}

/// One singular value with its left and right unit singular vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub(crate) fn seeded_normal(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let n = crate::element::norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Orthogonalize `v` against the unit columns in `basis` (two passes).
pub(crate) fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = crate::element::dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

/// Check that columns of `v` are orthonormal; returns the max deviation of `VᵀV` from `I`.
pub fn orthonormality_deviation(v: &Element) -> f64 {
    let g = v.transpose().matmul(v).expect("VᵀV");
    let mut dev: f64 = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g.get(i, j) - target).abs());
        }
    }
    dev
}
