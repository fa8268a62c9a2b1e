use std::f64::consts::PI;

use crate::element::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DctDirection {
    Forward,
    Inverse,
}

/// The orthonormal DCT-II matrix of size `n`; row `k` is the `k`-th cosine basis vector.
pub fn dct_matrix(n: usize) -> Element {
    let nf = n as f64;
    Element::from_fn(n, n, |k, j| {
        let s = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        s * (PI * (j as f64 + 0.5) * k as f64 / nf).cos()
    })
}

/// Orthonormal DCT-II (forward) or its transpose (inverse).
pub fn dct_apply(x: &[f64], direction: DctDirection) -> Vec<f64> {
    let c = dct_matrix(x.len());
    match direction {
        DctDirection::Forward => c.mul_vec(x),
        DctDirection::Inverse => c.tmul_vec(x),
    }
}

/// Separable transform along columns then rows. Vectors get the 1-D transform.
pub fn dct_apply_2d(x: &Element, direction: DctDirection) -> Element {
    let (m, n) = x.shape();
    let cm = dct_matrix(m);
    let apply = |c: &Element, v: &[f64]| match direction {
        DctDirection::Forward => c.mul_vec(v),
        DctDirection::Inverse => c.tmul_vec(v),
    };
    let mut out = Element::zeros(m, n);
    for j in 0..n {
        let col = apply(&cm, &x.column(j));
        for (i, v) in col.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    if n > 1 {
        let cn = dct_matrix(n);
        for i in 0..m {
            let row = apply(&cn, out.row(i));
            for (j, v) in row.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
    }
    out
}
