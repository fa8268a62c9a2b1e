//! Explicit finite atom lists.

use super::lp::{lp_minimize, LpOutcome};
use super::{face_threshold, Atom, AtomTag, AtomicDecomposition, ExposedFace};
use crate::element::{Element, Extended};
use crate::error::{Error, Result};

/// Minimal coefficients `c ≥ 0` with `Σ c_j a_j = x`; `None` when `x` is outside the cone.
pub(crate) fn min_coefficients(atoms: &[Element], x: &Element) -> Result<Option<(f64, Vec<f64>)>> {
    if x.norm() == 0.0 {
        return Ok(Some((0.0, vec![0.0; atoms.len()])));
    }
    if atoms.is_empty() {
        return Ok(None);
    }
    let dim = x.len();
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| atoms.iter().map(|a| a.as_slice()[i]).collect())
        .collect();
    match lp_minimize(&vec![1.0; atoms.len()], &rows, x.as_slice()) {
        LpOutcome::Optimal { x: c, value } => Ok(Some((value, c))),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::NumericFailure("unbounded gauge program".into())),
    }
}

pub(crate) fn gauge(atoms: &[Element], x: &Element) -> Result<Extended> {
    Ok(match min_coefficients(atoms, x)? {
        Some((v, _)) => Extended::Finite(v),
        None => Extended::Infinite,
    })
}

pub(crate) fn support(atoms: &[Element], z: &Element) -> f64 {
    atoms.iter().map(|a| a.dot(z)).fold(0.0, f64::max)
}

pub(crate) fn listed(atoms: &[Element]) -> Vec<Atom> {
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| Atom::new(a.clone(), AtomTag::Listed(i)))
        .collect()
}

/// Atoms attaining the supremum; empty when only the origin does.
pub(crate) fn expose(atoms: &[Element], z: &Element, k_max: usize, tol: f64) -> ExposedFace {
    let values: Vec<f64> = atoms.iter().map(|a| a.dot(z)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sup = best.max(0.0);
    let scale = atoms.iter().map(|a| a.norm()).fold(0.0, f64::max) * z.norm();
    let slack = tol * sup.max(f64::EPSILON * scale);
    let mut chosen = Vec::new();
    if atoms.is_empty() || best >= -slack {
        let thr = face_threshold(sup, tol).min(sup - slack);
        for (i, v) in values.iter().enumerate() {
            if chosen.len() >= k_max {
                break;
            }
            if *v >= thr {
                chosen.push(Atom::new(atoms[i].clone(), AtomTag::Listed(i)));
            }
        }
    }
    ExposedFace::new(sup, chosen, z.clone(), tol)
}

pub(crate) fn decompose(atoms: &[Element], x: &Element, tol: f64) -> Result<AtomicDecomposition> {
    let (value, c) = min_coefficients(atoms, x)?.ok_or(Error::NotInCone)?;
    let cut = tol.max(1e-15) * value;
    let terms = c
        .iter()
        .enumerate()
        .filter(|(_, &ci)| ci > cut && ci > 0.0)
        .map(|(i, &ci)| (ci, Atom::new(atoms[i].clone(), AtomTag::Listed(i))))
        .collect();
    Ok(AtomicDecomposition::minimal(terms, None, value))
}
