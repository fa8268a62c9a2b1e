//! Anisotropic total variation: atoms are the columns of the upper-triangular
//! ones matrix `B` (column `i` has ones in rows `0..=i`), with the constant vector
//! as recession direction.

use super::{face_threshold, Atom, AtomTag, AtomicDecomposition, ExposedFace};
use crate::element::{Element, Extended};

/// Relative threshold for `⟨e, z⟩ = 0`.
const RECESSION_TOL: f64 = 1e-12;

pub(crate) fn column(n: usize, index: usize, sign: i8) -> Atom {
    let e = Element::vector((0..n).map(|r| if r <= index { sign as f64 } else { 0.0 }).collect());
    Atom::new(e, AtomTag::TvColumn { index, sign })
}

pub(crate) fn recession_direction(n: usize, sign: f64) -> Atom {
    Atom::new(Element::vector(vec![sign; n]), AtomTag::RecessionDir)
}

/// `(Dx)_i = x_i − x_{i+1}`.
pub fn differences(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[0] - w[1]).collect()
}

pub(crate) fn gauge(x: &Element) -> f64 {
    differences(x.as_slice()).iter().map(|v| v.abs()).sum()
}

fn partial_sums(z: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    z.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn on_recession_polar(z: &Element) -> bool {
    z.sum().abs() <= RECESSION_TOL * z.norm1()
}

pub(crate) fn support(z: &Element) -> Extended {
    if !on_recession_polar(z) {
        return Extended::Infinite;
    }
    let n = z.len();
    let p = partial_sums(z.as_slice());
    Extended::Finite(p[..n - 1].iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

pub(crate) fn expose(z: &Element, k_max: usize, tol: f64) -> Option<ExposedFace> {
    let sup = support(z).finite()?;
    let n = z.len();
    let p = partial_sums(z.as_slice());
    let thr = face_threshold(sup, tol);
    let mut atoms = Vec::new();
    for (i, &v) in p[..n - 1].iter().enumerate() {
        if atoms.len() >= k_max {
            break;
        }
        if sup == 0.0 {
            atoms.push(column(n, i, 1));
            if atoms.len() < k_max {
                atoms.push(column(n, i, -1));
            }
        } else if v.abs() >= thr {
            atoms.push(column(n, i, if v > 0.0 { 1 } else { -1 }));
        }
    }
    Some(ExposedFace::new(sup, atoms, z.clone(), tol))
}

pub(crate) fn decompose(x: &Element) -> AtomicDecomposition {
    let n = x.len();
    let c = differences(x.as_slice());
    let terms: Vec<(f64, Atom)> = c
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (v.abs(), column(n, i, if v > 0.0 { 1 } else { -1 })))
        .collect();
    let ce = x.as_slice()[n - 1];
    let recession = (ce != 0.0).then(|| (ce.abs(), recession_direction(n, ce.signum())));
    let total = c.iter().map(|v| v.abs()).sum();
    AtomicDecomposition::minimal(terms, recession, total)
}
