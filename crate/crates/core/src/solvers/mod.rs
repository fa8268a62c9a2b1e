//! Conditional-gradient solvers, optimality certificates and support recovery.

mod dual;
mod optimality;
mod primal;
mod recovery;

pub use dual::{dual_cg_least_squares, DualCertificate, DualOptions, DualResult};
pub use optimality::{check_gauge_duality, check_optimality, duality_gap, OptimalityReport, ProblemForm};
pub use primal::{primal_cg, CgOptions, PrimalResult, Start, StepRule};
pub use recovery::{psd_reduced_solve, recover_from_certificate, RecoveryOptions};

use crate::atoms::{Atom, AtomicSet};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linmap::LinearMap;

/// Linear oracle: an atom attaining `σ(z)`, lowest index first. Falls back to the atoms
/// within the relative `band` when rounding leaves the exact face empty.
pub(crate) fn best_atom(set: &AtomicSet, z: &Element, band: f64) -> Result<Atom> {
    let face = set.expose(z, 1, 0.0)?;
    if face.atoms.is_empty() && band > 0.0 {
        return Ok(set.expose(z, 1, band)?.first_or_zero());
    }
    Ok(face.first_or_zero())
}

/// A differentiable convex function.
pub trait SmoothObjective {
    fn eval(&self, x: &Element) -> Result<f64>;
    fn grad(&self, x: &Element) -> Result<Element>;
    /// `⟨d, ∇²f d⟩` for quadratic objectives; enables exact linesearch.
    fn quadratic_form(&self, _d: &Element) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// `f(x) = ½‖A x − b‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub map: LinearMap,
    pub b: Element,
    pub shape: (usize, usize),
}

impl LeastSquares {
    pub fn new(map: LinearMap, b: Element, shape: (usize, usize)) -> Result<Self> {
        let out = map.output_shape(shape)?;
        if out != b.shape() {
            return Err(Error::ShapeMismatch {
                expected: out,
                found: b.shape(),
            });
        }
        Ok(LeastSquares { map, b, shape })
    }

    /// `½‖x − c‖²`.
    pub fn distance_to(c: Element) -> Self {
        let shape = c.shape();
        LeastSquares {
            map: LinearMap::Identity,
            b: c,
            shape,
        }
    }

    pub fn residual(&self, x: &Element) -> Result<Element> {
        x.ensure_shape(self.shape)?;
        let mut r = self.map.apply(x)?;
        r.axpy(-1.0, &self.b);
        Ok(r)
    }
}

impl SmoothObjective for LeastSquares {
    fn eval(&self, x: &Element) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(0.5 * r.dot(&r))
    }

    fn grad(&self, x: &Element) -> Result<Element> {
        self.map.adjoint(&self.residual(x)?)
    }

    fn quadratic_form(&self, d: &Element) -> Result<Option<f64>> {
        d.ensure_shape(self.shape)?;
        let ad = self.map.apply(d)?;
        Ok(Some(ad.dot(&ad)))
    }
}

/// One conditional-gradient iteration, recorded before the step is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct CgRecord {
    pub k: usize,
    pub gap: f64,
    pub objective: f64,
    /// Step length; `None` on the terminating record.
    pub theta: Option<f64>,
    pub atom: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CgTrace {
    pub records: Vec<CgRecord>,
}

impl CgTrace {
    pub fn push(&mut self, k: usize, gap: f64, objective: f64, theta: Option<f64>, atom: String) {
        self.records.push(CgRecord {
            k,
            gap,
            objective,
            theta,
            atom,
        });
    }

    pub fn last_gap(&self) -> Option<f64> {
        self.records.last().map(|r| r.gap)
    }

    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.records.iter().filter(|r| r.theta.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,gap,objective,theta,atom\n");
        for r in &self.records {
            let theta = r.theta.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.k, r.gap, r.objective, theta, r.atom
            ));
        }
        out
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_gradient_matches_differences() {
        let a = Element::from_fn(4, 3, |i, j| ((i * 3 + j) as f64).sin());
        let obj = LeastSquares::new(
            LinearMap::dense(a),
            Element::vector(vec![1.0, -2.0, 0.5, 3.0]),
            (3, 1),
        )
        .unwrap();
        let x = Element::vector(vec![0.3, -0.7, 1.1]);
        let g = obj.grad(&x).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp.as_mut_slice()[i] += h;
            xm.as_mut_slice()[i] -= h;
            let fd = (obj.eval(&xp).unwrap() - obj.eval(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g.as_slice()[i]).abs() <= 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn rejects_mismatched_data() {
        let r = LeastSquares::new(LinearMap::Identity, Element::vector(vec![1.0]), (2, 1));
        assert!(matches!(r, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn trace_csv_header() {
        let mut t = CgTrace::default();
        t.push(0, 1.0, 2.0, Some(0.5), "e+0".into());
        t.push(1, 0.0, 1.0, None, "e+0".into());
        let csv = t.to_csv();
        assert!(csv.starts_with("k,gap,objective,theta,atom\n0,1,2,0.5,e+0\n1,0,1,,e+0"));
        assert_eq!(t.steps(), 1);
    }
}
