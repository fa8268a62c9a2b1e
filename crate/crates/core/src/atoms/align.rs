use super::{AtomTag, AtomicDecomposition, AtomicSet, ExposedFace};
use crate::element::{dot, norm2, Element, Extended};
use crate::error::{Error, Result};

/// Principal-angle threshold when matching rank-one atoms.
pub const RANK_ONE_ANGLE_TOL: f64 = 1e-6;

/// `γ(x)σ(z) − ⟨x, z⟩`, or `|⟨x, z⟩|` when `γ(x) = 0`.
pub fn alignment_residual(set: &AtomicSet, x: &Element, z: &Element) -> Result<f64> {
    let g = set.gauge(x)?;
    if g == Extended::Finite(0.0) {
        return Ok(x.dot(z).abs());
    }
    let s = set.support(z)?;
    match (g, s) {
        (Extended::Finite(g), Extended::Finite(s)) => Ok(g * s - x.dot(z)),
        _ => Err(Error::BothInfinite),
    }
}

/// Raw polar gap `γ(x)σ(z) − ⟨x, z⟩`; `None` when either value is infinite.
pub fn polar_gap(set: &AtomicSet, x: &Element, z: &Element) -> Result<Option<(f64, f64)>> {
    match (set.gauge(x)?, set.support(z)?) {
        (Extended::Finite(g), Extended::Finite(s)) => Ok(Some((g * s - x.dot(z), g * s))),
        _ => Ok(None),
    }
}

fn orthonormal_span(vectors: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm2(&w);
        if n > 1e-8 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

fn distance_to_span(v: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut w = v.to_vec();
    for b in basis {
        let c = dot(&w, b);
        for (x, y) in w.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
    norm2(&w) / norm2(v).max(f64::MIN_POSITIVE)
}

fn rank_one_in_face(u: &[f64], v: &[f64], face: &ExposedFace) -> bool {
    let pairs: Vec<(&[f64], &[f64])> = face
        .atoms
        .iter()
        .filter_map(|a| match &a.tag {
            AtomTag::RankOne { u, v } => Some((u.as_slice(), v.as_slice())),
            _ => None,
        })
        .collect();
    if pairs.is_empty() {
        return false;
    }
    let us: Vec<&[f64]> = pairs.iter().map(|p| p.0).collect();
    let vs: Vec<&[f64]> = pairs.iter().map(|p| p.1).collect();
    let ub = orthonormal_span(&us);
    let vb = orthonormal_span(&vs);
    if distance_to_span(u, &ub) > RANK_ONE_ANGLE_TOL || distance_to_span(v, &vb) > RANK_ONE_ANGLE_TOL
    {
        return false;
    }
    // The face is {U M Vᵀ : M ⪰ 0}; the coordinates of u and v must agree.
    let nu = norm2(u);
    let nv = norm2(v);
    let mismatch: f64 = pairs
        .iter()
        .map(|(fu, fv)| (dot(u, fu) / nu - dot(v, fv) / nv).powi(2))
        .sum::<f64>()
        .sqrt();
    mismatch <= RANK_ONE_ANGLE_TOL * pairs.len() as f64
}

fn sym_rank_one_in_face(u: &[f64], face: &ExposedFace) -> bool {
    let us: Vec<&[f64]> = face
        .atoms
        .iter()
        .filter_map(|a| match &a.tag {
            AtomTag::SymRankOne { u } => Some(u.as_slice()),
            _ => None,
        })
        .collect();
    !us.is_empty() && distance_to_span(u, &orthonormal_span(&us)) <= RANK_ONE_ANGLE_TOL
}

/// True when every atom of the decomposition lies in the exposed face.
pub fn is_supported_by(decomp: &AtomicDecomposition, face: &ExposedFace, tol: f64) -> bool {
    decomp.terms.iter().all(|(_, atom)| match &atom.tag {
        AtomTag::RankOne { u, v } => rank_one_in_face(u, v, face),
        AtomTag::SymRankOne { u } => sym_rank_one_in_face(u, face),
        _ => face
            .atoms
            .iter()
            .any(|f| f.element.distance(&atom.element) <= tol * (1.0 + atom.element.norm())),
    })
}
