use super::lanczos::{sym_eig_top, EigOptions};
use super::orthonormality_deviation;
use crate::element::Element;
use crate::error::{Error, Result};

/// Maximum generalized eigenvalue of the pencil `(Z, L)` with `L = V Λ Vᵀ`.
///
/// Returns `λ_max(Λ^{-1/2} Vᵀ Z V Λ^{-1/2})` and `p = Λ^{-1/2} w` for the
/// corresponding unit eigenvector `w`, so that `pᵀ Λ p = 1`.
pub fn gen_eig_max(z: &Element, v: &Element, lambda: &[f64]) -> Result<(f64, Vec<f64>)> {
    if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::NonPositiveWeight { index, value });
    }
    let n = z.rows();
    z.ensure_shape((n, n))?;
    v.ensure_shape((n, lambda.len()))?;
    let dev = orthonormality_deviation(v);
    if dev > 1e-8 {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    let asym = z.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let inv_sqrt: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let vtzv = v.transpose().matmul(&z.symmetrize())?.matmul(v)?;
    let c = Element::from_fn(lambda.len(), lambda.len(), |i, j| {
        inv_sqrt[i] * vtzv.get(i, j) * inv_sqrt[j]
    })
    .symmetrize();
    let (lmax, w) = sym_eig_top(&c, &EigOptions::default())?;
    let p = w.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect();
    Ok((lmax, p))
}
