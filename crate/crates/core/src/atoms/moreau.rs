//! Moreau decomposition on the lifted cone `K = cone(C × {1})`, whose polar is
//! `cone(C° × {−1})`.

use super::AtomicSet;
use crate::element::Element;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MoreauParts {
    pub alpha_x: f64,
    pub x: Element,
    pub alpha_z: f64,
    pub z: Element,
}

impl MoreauParts {
    /// `α_x (x, 1) + α_z (z, −1)`.
    pub fn reconstruct(&self) -> (Element, f64) {
        let mut s = self.x.scale(self.alpha_x);
        s.axpy(self.alpha_z, &self.z);
        (s, self.alpha_x - self.alpha_z)
    }
}

/// Splits `(s, α)` into its projections onto `K` and `K°`.
///
/// The projection onto `K` minimizes `φ(t) = dist²(s, tC) + (α − t)²` over `t ≥ 0`;
/// `φ` is convex with derivative `−2⟨s − t y, y⟩ − 2(α − t)`, `y = P_C(s/t)`, and its
/// root is located by bisection.
pub fn moreau_decompose(set: &AtomicSet, s: &Element, alpha: f64) -> Result<MoreauParts> {
    if !set.has_projector() {
        return Err(Error::NoProjector);
    }
    let shape = s.shape();
    let derivative = |t: f64| -> Result<(f64, Element)> {
        let y = set.project(&s.scale(1.0 / t))?;
        let mut r = s.clone();
        r.axpy(-t, &y);
        Ok((-2.0 * r.dot(&y) - 2.0 * (alpha - t), y))
    };
    let support = set.support(s)?.to_f64();
    if support + alpha <= 0.0 {
        // (s, α) already lies in the polar cone.
        return Ok(MoreauParts {
            alpha_x: 0.0,
            x: Element::zeros(shape.0, shape.1),
            alpha_z: -alpha,
            z: if alpha < 0.0 {
                s.scale(-1.0 / alpha)
            } else {
                Element::zeros(shape.0, shape.1)
            },
        });
    }
    let mut hi = s.norm() + alpha.abs() + 1.0;
    while derivative(hi)?.0 < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0f64;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if derivative(mid)?.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (d_lo, y_lo) = if lo > 0.0 {
        derivative(lo)?
    } else {
        (f64::NEG_INFINITY, Element::zeros(shape.0, shape.1))
    };
    let (d_hi, y_hi) = derivative(hi)?;
    let (t, y) = if d_lo.abs() < d_hi.abs() { (lo, y_lo) } else { (hi, y_hi) };
    let mut r = s.clone();
    r.axpy(-t, &y);
    let alpha_z = t - alpha;
    let scale = s.norm() + alpha.abs();
    let (alpha_z, z) = if alpha_z <= 1e-15 * scale {
        (0.0, Element::zeros(shape.0, shape.1))
    } else {
        (alpha_z, r.scale(1.0 / alpha_z))
    };
    Ok(MoreauParts {
        alpha_x: t,
        x: y,
        alpha_z,
        z,
    })
}
