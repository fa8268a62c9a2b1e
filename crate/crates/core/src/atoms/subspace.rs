//! A linear subspace viewed as an atomic set: gauge is the indicator of the
//! subspace and the support function the indicator of its orthogonal complement.

use super::{Atom, AtomTag, AtomicDecomposition, ExposedFace};
use crate::element::{Element, Extended};
use crate::error::{Error, Result};
use crate::linalg::orthonormality_deviation;

const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    /// Orthonormal basis, one column per direction.
    pub basis: Element,
}

impl Subspace {
    pub fn new(basis: Element) -> Result<Self> {
        let dev = orthonormality_deviation(&basis);
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        Ok(Subspace { basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn project(&self, x: &Element) -> Element {
        let c = self.basis.tmul_vec(x.as_slice());
        Element::vector(self.basis.mul_vec(&c))
    }

    fn contains(&self, x: &Element) -> bool {
        (x - &self.project(x)).norm() <= MEMBERSHIP_TOL * (1.0 + x.norm())
    }

    fn orthogonal(&self, z: &Element) -> bool {
        self.project(z).norm() <= MEMBERSHIP_TOL * (1.0 + z.norm())
    }

    pub(crate) fn gauge(&self, x: &Element) -> Extended {
        if self.contains(x) {
            Extended::Finite(0.0)
        } else {
            Extended::Infinite
        }
    }

    pub(crate) fn support(&self, z: &Element) -> Extended {
        if self.orthogonal(z) {
            Extended::Finite(0.0)
        } else {
            Extended::Infinite
        }
    }

    pub(crate) fn expose(&self, z: &Element, k_max: usize, tol: f64) -> Result<ExposedFace> {
        if !self.orthogonal(z) {
            return Err(Error::UnboundedSupport);
        }
        let mut atoms = Vec::new();
        for j in 0..self.basis.cols() {
            for sign in [1.0, -1.0] {
                if atoms.len() < k_max {
                    let q = Element::vector(self.basis.column(j)).scale(sign);
                    atoms.push(Atom::new(q, AtomTag::SubspaceElement));
                }
            }
        }
        Ok(ExposedFace::new(0.0, atoms, z.clone(), tol))
    }

    pub(crate) fn decompose(&self, x: &Element) -> Result<AtomicDecomposition> {
        if !self.contains(x) {
            return Err(Error::NotInCone);
        }
        let n = x.norm();
        let recession =
            (n > 0.0).then(|| (n, Atom::new(x.scale(1.0 / n), AtomTag::SubspaceElement)));
        Ok(AtomicDecomposition::minimal(Vec::new(), recession, 0.0))
    }
}
