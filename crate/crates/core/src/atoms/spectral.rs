//! Nuclear-norm ball, spectrahedron and weighted spectrahedron.

use super::{face_threshold, Atom, AtomTag, AtomicDecomposition, ExposedFace};
use crate::element::{Element, Extended};
use crate::error::{Error, Result};
use crate::linalg::{
    dense_svd, dense_sym_eig, gen_eig_max, project_l1_ball, sym_eig_top, top_singular_triples,
    EigOptions, SvdOptions, DENSE_CUTOFF,
};

/// Relative band for the PSD boundary.
pub const PSD_TOL: f64 = 1e-10;
/// Relative symmetry tolerance for cone membership.
pub const SYM_TOL: f64 = 1e-12;

pub(crate) fn rank_one_atom(u: Vec<f64>, v: Vec<f64>) -> Atom {
    Atom::new(Element::outer(&u, &v), AtomTag::RankOne { u, v })
}

pub(crate) fn sym_rank_one_atom(u: Vec<f64>) -> Atom {
    Atom::new(Element::outer(&u, &u), AtomTag::SymRankOne { u })
}

pub(crate) fn nuclear_gauge(x: &Element) -> Result<f64> {
    Ok(dense_svd(x)?.iter().map(|t| t.sigma).sum())
}

pub(crate) fn nuclear_support(z: &Element) -> Result<f64> {
    Ok(top_singular_triples(z, 1, &SvdOptions::default())?[0].sigma)
}

pub(crate) fn nuclear_expose(z: &Element, k_max: usize, tol: f64) -> Result<ExposedFace> {
    let kmax = k_max.min(z.rows().min(z.cols()));
    let triples = top_singular_triples(z, kmax, &SvdOptions::default())?;
    let sup = triples[0].sigma;
    let thr = face_threshold(sup, tol);
    let atoms = triples
        .into_iter()
        .filter(|t| sup == 0.0 || t.sigma >= thr)
        .map(|t| rank_one_atom(t.u, t.v))
        .collect();
    Ok(ExposedFace::new(sup, atoms, z.clone(), tol))
}

/// Projection onto the unit nuclear-norm ball: shrink the singular values onto the 1-ball.
pub(crate) fn project_nuclear(x: &Element) -> Result<Element> {
    let triples = dense_svd(x)?;
    let sigma: Vec<f64> = triples.iter().map(|t| t.sigma).collect();
    if sigma.iter().sum::<f64>() <= 1.0 {
        return Ok(x.clone());
    }
    let shrunk = project_l1_ball(&sigma, 1.0);
    let mut out = Element::zeros(x.rows(), x.cols());
    for (t, s) in triples.iter().zip(shrunk) {
        if s > 0.0 {
            out.axpy(s, &Element::outer(&t.u, &t.v));
        }
    }
    Ok(out)
}

pub(crate) fn nuclear_decompose(x: &Element, tol: f64) -> Result<AtomicDecomposition> {
    let triples = dense_svd(x)?;
    let s1 = triples.first().map_or(0.0, |t| t.sigma);
    let cut = tol.max(1e-15) * s1;
    let mut terms = Vec::new();
    let mut total = 0.0;
    for t in triples {
        if t.sigma > cut && t.sigma > 0.0 {
            total += t.sigma;
            terms.push((t.sigma, rank_one_atom(t.u, t.v)));
        }
    }
    Ok(AtomicDecomposition::minimal(terms, None, total))
}

fn spectral_scale(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub(crate) fn spectrahedron_gauge(x: &Element) -> Result<Extended> {
    if x.asymmetry() > SYM_TOL {
        return Ok(Extended::Infinite);
    }
    let e = dense_sym_eig(x)?;
    let lmin = *e.values.last().unwrap_or(&0.0);
    if lmin < -PSD_TOL * spectral_scale(&e.values) {
        return Ok(Extended::Infinite);
    }
    Ok(Extended::Finite(x.trace()))
}

fn top_eig(s: &Element) -> Result<f64> {
    if s.rows() <= DENSE_CUTOFF {
        Ok(dense_sym_eig(s)?.values[0])
    } else {
        Ok(sym_eig_top(s, &EigOptions::default())?.0)
    }
}

pub(crate) fn spectrahedron_support(z: &Element) -> Result<f64> {
    Ok(top_eig(&z.symmetrize())?.max(0.0))
}

/// Eigenvectors within the band of `λ_max`; an empty face when `λ_max < 0`.
fn top_eigvecs(s: &Element, k_max: usize, tol: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    let e = dense_sym_eig(s)?;
    let lmax = e.values[0];
    let scale = spectral_scale(&e.values);
    let slack = tol * lmax.abs().max(f64::EPSILON * scale);
    if lmax < -slack {
        return Ok((0.0, Vec::new()));
    }
    let vecs = e
        .values
        .iter()
        .zip(e.vectors)
        .filter(|(l, _)| **l >= lmax - slack)
        .map(|(_, v)| v)
        .take(k_max)
        .collect();
    Ok((lmax.max(0.0), vecs))
}

pub(crate) fn spectrahedron_expose(z: &Element, k_max: usize, tol: f64) -> Result<ExposedFace> {
    let (sup, vecs) = top_eigvecs(&z.symmetrize(), k_max, tol)?;
    let atoms = vecs.into_iter().map(sym_rank_one_atom).collect();
    Ok(ExposedFace::new(sup, atoms, z.clone(), tol))
}

pub(crate) fn spectrahedron_decompose(x: &Element, tol: f64) -> Result<AtomicDecomposition> {
    if spectrahedron_gauge(x)?.is_infinite() {
        return Err(Error::NotInCone);
    }
    let e = dense_sym_eig(x)?;
    let cut = tol.max(1e-15) * e.values[0].max(0.0);
    let mut terms = Vec::new();
    let mut total = 0.0;
    for (l, u) in e.values.into_iter().zip(e.vectors) {
        if l > cut && l > 0.0 {
            total += l;
            terms.push((l, sym_rank_one_atom(u)));
        }
    }
    Ok(AtomicDecomposition::minimal(terms, None, total))
}

/// Parameters of the weighted spectrahedron for `L = V Λ Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFactors {
    pub v: Element,
    pub lambda: Vec<f64>,
    /// Orthonormal basis of the null space of `L`.
    pub null: Element,
}

impl WeightedFactors {
    pub fn new(v: Element, lambda: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
            return Err(Error::NonPositiveWeight { index, value });
        }
        let n = v.rows();
        v.ensure_shape((n, lambda.len()))?;
        let dev = crate::linalg::orthonormality_deviation(&v);
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        // Complement basis: eigenvectors of I − V Vᵀ with eigenvalue 1.
        let vvt = v.matmul(&v.transpose())?;
        let comp = &Element::identity(n) - &vvt;
        let e = dense_sym_eig(&comp)?;
        let k = n - lambda.len();
        let mut null = Element::zeros(n, k);
        for (j, vec) in e.vectors.iter().take(k).enumerate() {
            for i in 0..n {
                null.set(i, j, vec[i]);
            }
        }
        Ok(WeightedFactors { v, lambda, null })
    }

    pub fn n(&self) -> usize {
        self.v.rows()
    }

    pub fn weight_matrix(&self) -> Element {
        let vl = Element::from_fn(self.n(), self.lambda.len(), |i, j| {
            self.v.get(i, j) * self.lambda[j]
        });
        vl.matmul(&self.v.transpose()).expect("shapes").symmetrize()
    }

    fn congruence(&self, z: &Element, basis: &Element) -> Element {
        basis
            .transpose()
            .matmul(z)
            .and_then(|m| m.matmul(basis))
            .expect("shapes")
            .symmetrize()
    }

    pub(crate) fn gauge(&self, x: &Element) -> Result<Extended> {
        if x.asymmetry() > SYM_TOL {
            return Ok(Extended::Infinite);
        }
        let xs = x.symmetrize();
        let e = dense_sym_eig(&xs)?;
        let scale = spectral_scale(&e.values);
        if *e.values.last().unwrap_or(&0.0) < -PSD_TOL * scale {
            return Ok(Extended::Infinite);
        }
        if self.null.cols() > 0 {
            let cross = self.v.transpose().matmul(&xs)?.matmul(&self.null)?;
            if cross.norm() > PSD_TOL * scale.max(f64::MIN_POSITIVE) {
                return Ok(Extended::Infinite);
            }
        }
        let y = self.congruence(&xs, &self.v);
        Ok(Extended::Finite(
            (0..self.lambda.len()).map(|i| self.lambda[i] * y.get(i, i)).sum(),
        ))
    }

    fn null_unbounded(&self, zs: &Element) -> Result<bool> {
        if self.null.cols() == 0 {
            return Ok(false);
        }
        let w = self.congruence(zs, &self.null);
        let top = dense_sym_eig(&w)?.values[0];
        Ok(top > PSD_TOL * (1.0 + zs.norm()))
    }

    pub(crate) fn support(&self, z: &Element) -> Result<Extended> {
        let zs = z.symmetrize();
        if self.null_unbounded(&zs)? {
            return Ok(Extended::Infinite);
        }
        let (l, _) = gen_eig_max(&zs, &self.v, &self.lambda)?;
        Ok(Extended::Finite(l.max(0.0)))
    }

    fn scaled_congruence(&self, zs: &Element) -> Element {
        let y = self.congruence(zs, &self.v);
        let s: Vec<f64> = self.lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
        Element::from_fn(y.rows(), y.cols(), |i, j| s[i] * y.get(i, j) * s[j]).symmetrize()
    }

    pub(crate) fn expose(&self, z: &Element, k_max: usize, tol: f64) -> Result<ExposedFace> {
        let zs = z.symmetrize();
        if self.null_unbounded(&zs)? {
            return Err(Error::UnboundedSupport);
        }
        let (sup, ws) = top_eigvecs(&self.scaled_congruence(&zs), k_max, tol)?;
        let atoms = ws
            .into_iter()
            .map(|w| {
                let p: Vec<f64> = w.iter().zip(&self.lambda).map(|(a, l)| a / l.sqrt()).collect();
                sym_rank_one_atom(self.v.mul_vec(&p))
            })
            .collect();
        Ok(ExposedFace::new(sup, atoms, z.clone(), tol))
    }

    pub(crate) fn decompose(&self, x: &Element, tol: f64) -> Result<AtomicDecomposition> {
        if self.gauge(x)?.is_infinite() {
            return Err(Error::NotInCone);
        }
        let xs = x.symmetrize();
        let y = self.congruence(&xs, &self.v);
        let e = dense_sym_eig(&y)?;
        let cut = tol.max(1e-15) * e.values[0].max(0.0);
        let mut terms = Vec::new();
        let mut total = 0.0;
        for (mu, w) in e.values.into_iter().zip(e.vectors) {
            if mu <= cut || mu <= 0.0 {
                continue;
            }
            let q: f64 = w.iter().zip(&self.lambda).map(|(a, l)| a * a * l).sum();
            let p: Vec<f64> = w.iter().map(|a| a / q.sqrt()).collect();
            let c = mu * q;
            total += c;
            terms.push((c, sym_rank_one_atom(self.v.mul_vec(&p))));
        }
        let recession = if self.null.cols() > 0 {
            let w = self.congruence(&xs, &self.null);
            let part = self.null.matmul(&w)?.matmul(&self.null.transpose())?;
            let size = part.norm();
            (size > 0.0).then(|| (size, Atom::new(part.scale(1.0 / size), AtomTag::RecessionDir)))
        } else {
            None
        };
        Ok(AtomicDecomposition::minimal(terms, recession, total))
    }
}
