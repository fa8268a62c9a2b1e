use nalgebra::{DMatrix, DVector};

use crate::element::{Element, Extended};
use crate::error::{Error, Result};

pub const MAX_ATOMS: usize = 10;
pub const MAX_DIM: usize = 6;

/// Gauge over an explicit atom list by enumerating every linearly independent
/// subset and solving its square (or overdetermined) system exactly.
pub fn gauge_bruteforce(atoms: &[Element], x: &Element, tol: f64) -> Result<Extended> {
    let dim = x.len();
    if atoms.len() > MAX_ATOMS || dim > MAX_DIM {
        return Err(Error::TooLarge(format!(
            "{} atoms in dimension {dim} (limits {MAX_ATOMS} and {MAX_DIM})",
            atoms.len()
        )));
    }
    for a in atoms {
        a.ensure_shape(x.shape())?;
    }
    if x.norm() == 0.0 {
        return Ok(Extended::Finite(0.0));
    }
    let target = DVector::from_column_slice(x.as_slice());
    let mut best: Option<f64> = None;
    let n = atoms.len();
    for mask in 1u32..(1u32 << n) {
        let chosen: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if chosen.len() > dim + 1 {
            continue;
        }
        let a = DMatrix::from_fn(dim, chosen.len(), |r, c| atoms[chosen[c]].as_slice()[r]);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-12 * smax.max(1.0))
            .count();
        if rank < chosen.len() {
            continue;
        }
        let Ok(c) = svd.solve(&target, 1e-14) else {
            continue;
        };
        let residual = (&a * &c - &target).norm();
        if residual > tol * (1.0 + target.norm()) || c.iter().any(|&v| v < -tol) {
            continue;
        }
        let value: f64 = c.iter().map(|v| v.max(0.0)).sum();
        best = Some(best.map_or(value, |b: f64| b.min(value)));
    }
    Ok(best.map_or(Extended::Infinite, Extended::Finite))
}
