use super::{best_atom, check_tau, CgTrace, SmoothObjective};
use crate::atoms::{AtomicSet, FACE_TOL};
use crate::element::Element;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Exact minimizer along the segment for quadratic objectives, clipped to `(0, 1]`.
    Exact,
    /// `2 / (k + 2)`.
    Harmonic,
    /// Exact linesearch, also allowing steps away from the worst atom in the active set.
    Away,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// `τ` times the first atom exposed by `−∇f(0)`.
    ExposedAtom,
    Origin,
    Point(Element),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOptions {
    /// Stopping threshold on the gap; defaults to `1e-6 (1 + |f(x⁰)|)`.
    pub eps: Option<f64>,
    pub max_iter: usize,
    pub step: StepRule,
    pub start: Start,
    /// Fallback band of the linear oracle when no atom attains the support exactly.
    pub face_tol: f64,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            eps: None,
            max_iter: 1000,
            step: StepRule::Exact,
            start: Start::ExposedAtom,
            face_tol: FACE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalResult {
    pub x: Element,
    pub trace: CgTrace,
    /// False when the iteration budget ran out before the gap fell below `eps`.
    pub converged: bool,
    pub gap: f64,
    pub eps: f64,
}

pub(crate) fn step_length(
    obj: &dyn SmoothObjective,
    rule: StepRule,
    k: usize,
    d: &Element,
    gap: f64,
) -> Result<f64> {
    let harmonic = 2.0 / (k as f64 + 2.0);
    Ok(match rule {
        StepRule::Harmonic => harmonic,
        StepRule::Exact | StepRule::Away => match obj.quadratic_form(d)? {
            Some(q) if q > 0.0 => (gap / q).min(1.0),
            Some(_) => 1.0,
            None => harmonic,
        },
    })
}

/// Conditional gradient over `τ conv(A ∪ {0})`.
pub fn primal_cg(
    obj: &dyn SmoothObjective,
    set: &AtomicSet,
    tau: f64,
    opts: &CgOptions,
) -> Result<PrimalResult> {
    check_tau(tau)?;
    let (rows, cols) = set.shape();
    let origin = Element::zeros(rows, cols);
    let mut x = match &opts.start {
        Start::Origin => origin,
        Start::Point(p) => {
            p.ensure_shape((rows, cols))?;
            p.clone()
        }
        Start::ExposedAtom => {
            let z = -&obj.grad(&origin)?;
            best_atom(set, &z, opts.face_tol)?.element.scale(tau)
        }
    };
    let f0 = obj.eval(&x)?;
    let eps = opts.eps.unwrap_or(1e-6 * (1.0 + f0.abs()));
    let mut trace = CgTrace::default();
    let mut best = (f0, x.clone());
    // Convex weights over the vertices visited so far; `x = Σ w v`.
    let mut active = vec![(x.clone(), 1.0)];
    let mut k = 0;
    loop {
        let z = -&obj.grad(&x)?;
        let atom = best_atom(set, &z, opts.face_tol)?;
        let a = atom.element.scale(tau);
        let d = &a - &x;
        let gap = d.dot(&z);
        let fx = obj.eval(&x)?;
        if fx < best.0 {
            best = (fx, x.clone());
        }
        let mut label = atom.tag.label();
        if gap < eps || k >= opts.max_iter {
            trace.push(k, gap, fx, None, label);
            let converged = gap < eps;
            let x = if converged || fx <= best.0 { x } else { best.1 };
            return Ok(PrimalResult {
                x,
                trace,
                converged,
                gap,
                eps,
            });
        }
        if opts.step != StepRule::Away {
            let theta = step_length(obj, opts.step, k, &d, gap)?;
            trace.push(k, gap, fx, Some(theta), label);
            x = x.lerp(&a, theta);
            k += 1;
            continue;
        }
        let (worst, away_gap) = active
            .iter()
            .enumerate()
            .map(|(i, (v, _))| (i, x.dot(&z) - v.dot(&z)))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .expect("active set is never empty");
        let theta;
        if gap >= away_gap {
            theta = step_length(obj, opts.step, k, &d, gap)?;
            for (_, w) in active.iter_mut() {
                *w *= 1.0 - theta;
            }
            match active.iter_mut().find(|(v, _)| v.distance(&a) <= 1e-12 * (1.0 + tau)) {
                Some((_, w)) => *w += theta,
                None => active.push((a.clone(), theta)),
            }
        } else {
            let (v, w) = active[worst].clone();
            let limit = w / (1.0 - w);
            let dir = &x - &v;
            theta = step_length(obj, opts.step, k, &dir, away_gap)?.min(limit);
            for (_, wi) in active.iter_mut() {
                *wi *= 1.0 + theta;
            }
            active[worst].1 -= theta;
            label = format!("away {}", label);
        }
        active.retain(|(_, w)| *w > 1e-15);
        // Resynthesize so that dropped vertices leave no rounding residue in `x`.
        x = Element::zeros(rows, cols);
        for (v, w) in &active {
            x.axpy(*w, v);
        }
        trace.push(k, gap, fx, Some(theta), label);
        k += 1;
    }
}
