use faer::{Mat, Side};

use super::SingularTriple;
use crate::element::Element;
use crate::error::{Error, Result};

fn to_faer(a: &Element) -> Mat<f64> {
    Mat::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j))
}

/// Thin SVD of a dense matrix, singular values in descending order.
pub fn dense_svd(a: &Element) -> Result<Vec<SingularTriple>> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Vec::new());
    }
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::NumericFailure(format!("svd failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let mut triples: Vec<SingularTriple> = (0..k)
        .map(|i| SingularTriple {
            sigma: s[i].max(0.0),
            u: (0..m).map(|r| u[(r, i)]).collect(),
            v: (0..n).map(|r| v[(r, i)]).collect(),
        })
        .collect();
    if triples.iter().any(|t| !t.sigma.is_finite()) {
        return Err(Error::NumericFailure("non-finite singular value".into()));
    }
    triples.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    Ok(triples)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Unit eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
}

/// Dense symmetric eigen-decomposition; the input is symmetrized first.
pub fn dense_sym_eig(s: &Element) -> Result<SymEig> {
    let (m, n) = s.shape();
    if m != n {
        return Err(Error::ShapeMismatch {
            expected: (m, m),
            found: (m, n),
        });
    }
    if n == 0 {
        return Ok(SymEig {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let eig = to_faer(&s.symmetrize())
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericFailure(format!("eigensolver failed: {e:?}")))?;
    let (vals, vecs) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let values: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("non-finite eigenvalue".into()));
    }
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|r| vecs[(r, i)]).collect())
        .collect();
    Ok(SymEig { values, vectors })
}
