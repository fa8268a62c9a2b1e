use super::{best_atom, check_tau, CgTrace};
use crate::atoms::{AtomTag, AtomicSet, ExposedFace, FACE_TOL};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linmap::LinearMap;

#[derive(Debug, Clone, PartialEq)]
pub struct DualOptions {
    /// Stopping threshold on `⟨ΔR, R⟩`; defaults to `1e-6 (1 + ½‖b‖²)`.
    pub eps: Option<f64>,
    pub max_iter: usize,
    /// Atoms requested when exposing the face of the final certificate.
    pub face_k: usize,
    pub face_tol: f64,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions {
            eps: None,
            max_iter: 1000,
            face_k: 4,
            face_tol: FACE_TOL,
        }
    }
}

/// Negative gradient at the final implicit iterate and the face it exposes.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub z_star: Element,
    pub support_value: f64,
    pub gap_at_exit: f64,
    pub exposed: ExposedFace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualResult {
    pub certificate: DualCertificate,
    pub trace: CgTrace,
    pub converged: bool,
    /// `R = b − A x` for the implicit iterate `x`.
    pub residual: Element,
    /// `Q = A x`.
    pub image: Element,
}

fn atom_image(set: &AtomicSet, map: &LinearMap, tau: f64, atom: &crate::atoms::Atom) -> Result<Element> {
    match (&atom.tag, set) {
        (AtomTag::RankOne { u, v }, AtomicSet::NuclearBall { .. }) => map.apply_rank_one(tau, u, v),
        _ => map.apply(&atom.element.scale(tau)),
    }
}

/// Conditional gradient for `½‖A x − b‖²` over `τ conv(A ∪ {0})`, tracking only the
/// residual `R = b − A x` and the image `Q = A x` of the implicit iterate.
pub fn dual_cg_least_squares(
    map: &LinearMap,
    b: &Element,
    set: &AtomicSet,
    tau: f64,
    opts: &DualOptions,
) -> Result<DualResult> {
    check_tau(tau)?;
    let out = map.output_shape(set.shape())?;
    if out != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: out,
            found: b.shape(),
        });
    }
    let eps = opts.eps.unwrap_or(1e-6 * (1.0 + 0.5 * b.dot(b)));
    let mut r = b.clone();
    let mut q = Element::zeros_like(b);
    let mut trace = CgTrace::default();
    let mut k = 0;
    let (gap, converged) = loop {
        let z = map.adjoint(&r)?;
        let atom = best_atom(set, &z, FACE_TOL)?;
        let mut dr = atom_image(set, map, tau, &atom)?;
        dr.axpy(-1.0, &q);
        let gap = dr.dot(&r);
        let objective = 0.5 * r.dot(&r);
        let label = atom.tag.label();
        if gap < eps || k >= opts.max_iter {
            trace.push(k, gap, objective, None, label);
            break (gap, gap < eps);
        }
        let theta = (gap / dr.dot(&dr)).min(1.0);
        trace.push(k, gap, objective, Some(theta), label);
        r.axpy(-theta, &dr);
        q.axpy(theta, &dr);
        k += 1;
    };
    let z_star = map.adjoint(&r)?;
    let support_value = set
        .support(&z_star)?
        .finite()
        .ok_or(Error::UnboundedSupport)?;
    let exposed = set.expose(&z_star, opts.face_k.max(1), opts.face_tol)?;
    Ok(DualResult {
        certificate: DualCertificate {
            z_star,
            support_value,
            gap_at_exit: gap,
            exposed,
        },
        trace,
        converged,
        residual: r,
        image: q,
    })
}
