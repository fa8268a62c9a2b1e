//! Group norms with possibly overlapping groups.

use nalgebra::{DMatrix, DVector};

use super::{face_threshold, Atom, AtomTag, AtomicDecomposition, ExposedFace};
use crate::element::{norm2, Element, Extended};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Groups {
    pub n: usize,
    pub groups: Vec<Vec<usize>>,
    pub overlapping: bool,
}

impl Groups {
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidArgument("at least one group is required".into()));
        }
        let mut count = vec![0usize; n];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidArgument("groups must be nonempty".into()));
            }
            let mut sorted = g.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != g.len() {
                return Err(Error::InvalidArgument("repeated index inside a group".into()));
            }
            for &i in g {
                if i >= n {
                    return Err(Error::InvalidArgument(format!("group index {i} >= {n}")));
                }
                count[i] += 1;
            }
        }
        let overlapping = count.iter().any(|&c| c > 1);
        Ok(Groups {
            n,
            groups,
            overlapping,
        })
    }

    fn restrict(&self, g: usize, x: &[f64]) -> Vec<f64> {
        self.groups[g].iter().map(|&i| x[i]).collect()
    }

    fn lift(&self, g: usize, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&i, &v) in self.groups[g].iter().zip(values) {
            out[i] = v;
        }
        out
    }

    fn covered(&self) -> Vec<bool> {
        let mut c = vec![false; self.n];
        for g in &self.groups {
            for &i in g {
                c[i] = true;
            }
        }
        c
    }

    pub(crate) fn support(&self, z: &Element) -> f64 {
        (0..self.groups.len())
            .map(|g| norm2(&self.restrict(g, z.as_slice())))
            .fold(0.0, f64::max)
    }

    pub(crate) fn expose(&self, z: &Element, k_max: usize, tol: f64) -> ExposedFace {
        let norms: Vec<f64> = (0..self.groups.len())
            .map(|g| norm2(&self.restrict(g, z.as_slice())))
            .collect();
        let sup = norms.iter().copied().fold(0.0, f64::max);
        let thr = face_threshold(sup, tol);
        let mut atoms = Vec::new();
        for (g, &ng) in norms.iter().enumerate() {
            if atoms.len() >= k_max {
                break;
            }
            if sup == 0.0 {
                let mut d = vec![0.0; self.n];
                d[self.groups[g][0]] = 1.0;
                atoms.push(group_atom(g, d));
            } else if ng >= thr {
                let zg = self.restrict(g, z.as_slice());
                let d: Vec<f64> = zg.iter().map(|v| v / ng).collect();
                atoms.push(group_atom(g, self.lift(g, &d)));
            }
        }
        ExposedFace::new(sup, atoms, z.clone(), tol)
    }

    /// Gauge value together with an optimal split, one vector per group.
    pub(crate) fn split(&self, x: &Element) -> Result<Option<(f64, Vec<Vec<f64>>)>> {
        let xs = x.as_slice();
        let covered = self.covered();
        if xs.iter().zip(&covered).any(|(v, c)| !c && *v != 0.0) {
            return Ok(None);
        }
        if !self.overlapping {
            let parts: Vec<Vec<f64>> = (0..self.groups.len())
                .map(|g| self.lift(g, &self.restrict(g, xs)))
                .collect();
            let value = parts.iter().map(|p| norm2(p)).sum();
            return Ok(Some((value, parts)));
        }
        if norm2(xs) == 0.0 {
            return Ok(Some((0.0, vec![vec![0.0; self.n]; self.groups.len()])));
        }
        Ok(Some(self.overlap_split(xs)?))
    }

    pub(crate) fn gauge(&self, x: &Element) -> Result<Extended> {
        Ok(match self.split(x)? {
            Some((v, _)) => Extended::Finite(v),
            None => Extended::Infinite,
        })
    }

    pub(crate) fn decompose(&self, x: &Element) -> Result<AtomicDecomposition> {
        let (_, parts) = self.split(x)?.ok_or(Error::NotInCone)?;
        let mut terms = Vec::new();
        let mut total = 0.0;
        for (g, p) in parts.into_iter().enumerate() {
            let c = norm2(&p);
            if c > 0.0 {
                total += c;
                terms.push((c, group_atom(g, p.iter().map(|v| v / c).collect())));
            }
        }
        Ok(AtomicDecomposition::minimal(terms, None, total))
    }

    /// Turn per-group multipliers and dual vector into a split that sums to `x` exactly.
    fn feasible_split(&self, x: &[f64], parts: Vec<Vec<f64>>) -> (f64, Vec<Vec<f64>>) {
        let mut parts = parts;
        let mut residual = x.to_vec();
        for p in &parts {
            for (r, v) in residual.iter_mut().zip(p) {
                *r -= v;
            }
        }
        for (i, r) in residual.into_iter().enumerate() {
            if r != 0.0 {
                if let Some(g) = self.groups.iter().position(|grp| grp.contains(&i)) {
                    parts[g][i] += r;
                }
            }
        }
        let value = parts.iter().map(|p| norm2(p)).sum();
        (value, parts)
    }

    /// Overlapping gauge: log-barrier Newton on the dual
    /// `max ⟨x,z⟩ s.t. ‖z_g‖ ≤ 1`, followed by a Newton polish of the KKT system.
    fn overlap_split(&self, x: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
        let ng = self.groups.len();
        let xnorm = norm2(x);
        let mut z = vec![0.0; self.n];
        let mut mu = xnorm;
        let mut stages = 0;
        loop {
            self.barrier_newton(x, &mut z, mu)?;
            stages += 1;
            if ng as f64 * mu <= 1e-9 * xnorm || stages > 60 {
                break;
            }
            mu *= 0.2;
        }
        let lambdas: Vec<f64> = (0..ng)
            .map(|g| {
                let zg = self.restrict(g, &z);
                2.0 * mu / (1.0 - zg.iter().map(|v| v * v).sum::<f64>())
            })
            .collect();
        let barrier_parts: Vec<Vec<f64>> = (0..ng)
            .map(|g| {
                let zg: Vec<f64> = self.restrict(g, &z).iter().map(|v| lambdas[g] * v).collect();
                self.lift(g, &zg)
            })
            .collect();
        let best = self.feasible_split(x, barrier_parts);
        match self.polish(x, &z, &lambdas) {
            Some(p) if p.0 <= best.0 => Ok(p),
            _ => Ok(best),
        }
    }

    fn barrier_value(&self, x: &[f64], z: &[f64], mu: f64) -> Option<f64> {
        let mut f = -x.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        for g in 0..self.groups.len() {
            let s: f64 = self.groups[g].iter().map(|&i| z[i] * z[i]).sum();
            if s >= 1.0 {
                return None;
            }
            f -= mu * (1.0 - s).ln();
        }
        Some(f)
    }

    fn barrier_newton(&self, x: &[f64], z: &mut [f64], mu: f64) -> Result<()> {
        let n = self.n;
        let covered = self.covered();
        for _ in 0..200 {
            let mut grad: Vec<f64> = x.iter().map(|v| -v).collect();
            let mut hess = DMatrix::<f64>::zeros(n, n);
            for grp in &self.groups {
                let s: f64 = grp.iter().map(|&i| z[i] * z[i]).sum();
                let w = 1.0 - s;
                let a = 2.0 * mu / w;
                let b = 4.0 * mu / (w * w);
                for &i in grp {
                    grad[i] += a * z[i];
                    hess[(i, i)] += a;
                    for &j in grp {
                        hess[(i, j)] += b * z[i] * z[j];
                    }
                }
            }
            for i in 0..n {
                if !covered[i] {
                    hess[(i, i)] = 1.0;
                    grad[i] = 0.0;
                }
            }
            let g = DVector::from_vec(grad.clone());
            let d = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => hess
                    .svd(true, true)
                    .solve(&(-&g), 1e-14)
                    .map_err(|e| Error::NumericFailure(e.to_string()))?,
            };
            let dec = -g.dot(&d);
            if dec <= 1e-24 * (1.0 + norm2(x).powi(2)) {
                return Ok(());
            }
            let f0 = self
                .barrier_value(x, z, mu)
                .ok_or_else(|| Error::NumericFailure("barrier left its domain".into()))?;
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = z.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                if let Some(f) = self.barrier_value(x, &trial, mu) {
                    if f <= f0 - 0.25 * t * dec {
                        z.copy_from_slice(&trial);
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-20 {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// Newton iterations on `Σ λ_g P_g z = x`, `‖z_g‖ = 1` over the active groups.
    fn polish(&self, x: &[f64], z0: &[f64], lambdas: &[f64]) -> Option<(f64, Vec<Vec<f64>>)> {
        let lmax = lambdas.iter().copied().fold(0.0, f64::max);
        let active: Vec<usize> = (0..lambdas.len())
            .filter(|&g| lambdas[g] > 1e-6 * lmax)
            .collect();
        let covered = self.covered();
        let coords: Vec<usize> = (0..self.n).filter(|&i| covered[i]).collect();
        let nc = coords.len();
        let na = active.len();
        let mut z = z0.to_vec();
        let mut lam: Vec<f64> = active.iter().map(|&g| lambdas[g]).collect();
        let scale = 1.0 + norm2(x);
        for _ in 0..50 {
            let mut f = DVector::<f64>::zeros(nc + na);
            let mut jac = DMatrix::<f64>::zeros(nc + na, nc + na);
            let pos = |i: usize| coords.iter().position(|&c| c == i).expect("covered");
            for (r, &i) in coords.iter().enumerate() {
                f[r] = -x[i];
            }
            for (k, &g) in active.iter().enumerate() {
                let mut s = 0.0;
                for &i in &self.groups[g] {
                    let r = pos(i);
                    f[r] += lam[k] * z[i];
                    jac[(r, r)] += lam[k];
                    jac[(r, nc + k)] = z[i];
                    jac[(nc + k, r)] = z[i];
                    s += z[i] * z[i];
                }
                f[nc + k] = 0.5 * (s - 1.0);
            }
            if f.norm() <= 1e-15 * scale {
                break;
            }
            let d = jac.svd(true, true).solve(&(-&f), 1e-14).ok()?;
            for (r, &i) in coords.iter().enumerate() {
                z[i] += d[r];
            }
            for k in 0..na {
                lam[k] += d[nc + k];
            }
        }
        if lam.iter().any(|&l| l < 0.0) {
            return None;
        }
        for g in 0..self.groups.len() {
            if !active.contains(&g) && norm2(&self.restrict(g, &z)) > 1.0 + 1e-9 {
                return None;
            }
        }
        let mut parts = vec![vec![0.0; self.n]; self.groups.len()];
        for (k, &g) in active.iter().enumerate() {
            for &i in &self.groups[g] {
                parts[g][i] = lam[k] * z[i];
            }
        }
        Some(self.feasible_split(x, parts))
    }
}

fn group_atom(group: usize, direction: Vec<f64>) -> Atom {
    Atom::new(
        Element::vector(direction.clone()),
        AtomTag::Group { group, direction },
    )
}
