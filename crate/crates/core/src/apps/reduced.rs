//! Reduced demixing problem over growing pools of spikes, DCT atoms and a low-rank subspace.

use crate::element::{norm2, Element};
use crate::error::Result;
use crate::linalg::{dct_apply_2d, dct_matrix, dense_svd, project_l1_ball, DctDirection};

/// Atoms added per part in one pricing round.
const ADD_PER_ROUND: usize = 32;
const SUBSPACE_PER_ROUND: usize = 4;
const FISTA_ITERS: usize = 20000;

/// Atom pools for the three parts. The low-rank block is `U M Vᵀ` with `‖M‖_* ≤ τ`.
#[derive(Debug, Clone)]
pub(crate) struct Pools {
    n: usize,
    active: [bool; 3],
    spikes: Vec<usize>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    dct: Vec<usize>,
    c: Element,
}

/// Coefficients in pool order: spike weights, `M` (row-major) and DCT weights.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients {
    spikes: Vec<f64>,
    m: Element,
    dct: Vec<f64>,
}

/// Up to `count` indices with `|value| ≥ threshold > 0`, largest first, not in `skip`.
fn top_indices(values: &[f64], threshold: f64, skip: &[usize], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].abs() > 0.0 && values[i].abs() >= threshold && !skip.contains(&i))
        .collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

/// Appends `w` to the orthonormal list after Gram-Schmidt; near-dependent vectors are skipped.
fn extend_basis(basis: &mut Vec<Vec<f64>>, w: &[f64]) -> bool {
    let mut r = w.to_vec();
    for _ in 0..2 {
        for q in basis.iter() {
            let d: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (x, y) in r.iter_mut().zip(q) {
                *x -= d * y;
            }
        }
    }
    let nr = norm2(&r);
    if nr < 1e-6 * norm2(w).max(f64::MIN_POSITIVE) {
        return false;
    }
    basis.push(r.into_iter().map(|x| x / nr).collect());
    true
}

impl Pools {
    pub(crate) fn new(n: usize, active: [bool; 3]) -> Self {
        Pools {
            n,
            active,
            spikes: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            dct: Vec::new(),
            c: dct_matrix(n),
        }
    }

    pub(crate) fn sizes(&self) -> [usize; 3] {
        [self.spikes.len(), self.u.len().min(self.v.len()), self.dct.len()]
    }

    fn dim(&self) -> usize {
        self.spikes.len() + self.u.len() * self.v.len() + self.dct.len()
    }

    /// Seeds the pools with the atoms of each active part whose inner product with `z`
    /// lies within `band` (relative) of the part's support value.
    pub(crate) fn seed(&mut self, z: &Element, band: f64) -> Result<usize> {
        self.add(z, |top| (1.0 - band) * top)
    }

    /// Adds atoms whose inner product with `z` exceeds the best pooled atom of the same
    /// part by more than the relative `tol`. Returns the number added.
    pub(crate) fn price(&mut self, z: &Element, tol: f64) -> Result<usize> {
        let levels = self.pooled_levels(z)?;
        let mut part = 0;
        self.add(z, |_| {
            let l = levels[part];
            part += 1;
            l * (1.0 + tol) + f64::MIN_POSITIVE
        })
    }

    /// Best inner product of `z` with a pooled atom, per part.
    fn pooled_levels(&self, z: &Element) -> Result<[f64; 3]> {
        let spikes = self.spikes.iter().fold(0.0f64, |m, &p| m.max(z.as_slice()[p].abs()));
        let coef = dct_apply_2d(z, DctDirection::Forward);
        let dct = self.dct.iter().fold(0.0f64, |m, &q| m.max(coef.as_slice()[q].abs()));
        let low = if self.u.is_empty() || self.v.is_empty() {
            0.0
        } else {
            let proj = Element::from_fn(self.u.len(), self.v.len(), |a, b| {
                let zu = z.tmul_vec(&self.u[a]);
                zu.iter().zip(&self.v[b]).map(|(x, y)| x * y).sum()
            });
            dense_svd(&proj)?.first().map_or(0.0, |t| t.sigma)
        };
        Ok([spikes, low, dct])
    }

    /// Adds atoms above `threshold(support value)`, called once per active part in order.
    fn add(&mut self, z: &Element, mut threshold: impl FnMut(f64) -> f64) -> Result<usize> {
        let mut added = 0;
        if self.active[0] {
            let top = z.norm_inf();
            let idx = top_indices(z.as_slice(), threshold(top), &self.spikes, ADD_PER_ROUND);
            added += idx.len();
            self.spikes.extend(idx);
        }
        if self.active[1] {
            let triples = dense_svd(z)?;
            let thr = threshold(triples.first().map_or(0.0, |t| t.sigma));
            for t in triples.iter().take(SUBSPACE_PER_ROUND) {
                if t.sigma == 0.0 || t.sigma < thr {
                    break;
                }
                let gu = extend_basis(&mut self.u, &t.u);
                let gv = extend_basis(&mut self.v, &t.v);
                if gu || gv {
                    added += 1;
                }
            }
        }
        if self.active[2] {
            let coef = dct_apply_2d(z, DctDirection::Forward);
            let thr = threshold(coef.norm_inf());
            let idx = top_indices(coef.as_slice(), thr, &self.dct, ADD_PER_ROUND);
            added += idx.len();
            self.dct.extend(idx);
        }
        Ok(added)
    }

    /// Inner product of the DCT atom `q` with the rank-one matrix `x yᵀ`, given `C x` and `C y`.
    fn dct_rank_one(&self, q: usize, cx: &[f64], cy: &[f64]) -> f64 {
        cx[q / self.n] * cy[q % self.n]
    }

    fn gram(&self) -> Element {
        let n = self.n;
        let ns = self.spikes.len();
        let (ru, rv) = (self.u.len(), self.v.len());
        let cu: Vec<Vec<f64>> = self.u.iter().map(|u| self.c.mul_vec(u)).collect();
        let cv: Vec<Vec<f64>> = self.v.iter().map(|v| self.c.mul_vec(v)).collect();
        let p = self.dim();
        let off_m = ns;
        let off_d = ns + ru * rv;
        let mut g = Element::identity(p);
        for (s, &ps) in self.spikes.iter().enumerate() {
            let (i, j) = (ps / n, ps % n);
            for a in 0..ru {
                for b in 0..rv {
                    let val = self.u[a][i] * self.v[b][j];
                    g.set(s, off_m + a * rv + b, val);
                    g.set(off_m + a * rv + b, s, val);
                }
            }
            for (d, &q) in self.dct.iter().enumerate() {
                let val = self.c.get(q / n, i) * self.c.get(q % n, j);
                g.set(s, off_d + d, val);
                g.set(off_d + d, s, val);
            }
        }
        for (d, &q) in self.dct.iter().enumerate() {
            for a in 0..ru {
                for b in 0..rv {
                    let val = self.dct_rank_one(q, &cu[a], &cv[b]);
                    g.set(off_d + d, off_m + a * rv + b, val);
                    g.set(off_m + a * rv + b, off_d + d, val);
                }
            }
        }
        g
    }

    fn rhs(&self, b: &Element) -> Vec<f64> {
        let mut h: Vec<f64> = self.spikes.iter().map(|&p| b.as_slice()[p]).collect();
        for u in &self.u {
            let bu = b.tmul_vec(u);
            for v in &self.v {
                h.push(bu.iter().zip(v).map(|(x, y)| x * y).sum());
            }
        }
        let coef = dct_apply_2d(b, DctDirection::Forward);
        h.extend(self.dct.iter().map(|&q| coef.as_slice()[q]));
        h
    }

    fn split(&self, theta: &[f64]) -> Coefficients {
        let ns = self.spikes.len();
        let (ru, rv) = (self.u.len(), self.v.len());
        let m = Element::from_fn(ru, rv, |a, b| theta[ns + a * rv + b]);
        Coefficients {
            spikes: theta[..ns].to_vec(),
            m,
            dct: theta[ns + ru * rv..].to_vec(),
        }
    }

    fn join(&self, c: &Coefficients) -> Vec<f64> {
        let mut t = c.spikes.clone();
        t.extend_from_slice(c.m.as_slice());
        t.extend_from_slice(&c.dct);
        t
    }

    /// Embeds coefficients from a smaller pool (pools only grow by appending).
    fn embed(&self, old: &Coefficients) -> Coefficients {
        let mut spikes = vec![0.0; self.spikes.len()];
        spikes[..old.spikes.len()].copy_from_slice(&old.spikes);
        let mut m = Element::zeros(self.u.len(), self.v.len());
        for a in 0..old.m.rows() {
            for b in 0..old.m.cols() {
                m.set(a, b, old.m.get(a, b));
            }
        }
        let mut dct = vec![0.0; self.dct.len()];
        dct[..old.dct.len()].copy_from_slice(&old.dct);
        Coefficients { spikes, m, dct }
    }

    pub(crate) fn zero(&self) -> Coefficients {
        Coefficients {
            spikes: Vec::new(),
            m: Element::zeros(0, 0),
            dct: Vec::new(),
        }
    }

    fn project(&self, theta: &[f64], tau: f64) -> Result<Vec<f64>> {
        let c = self.split(theta);
        let m = if c.m.is_empty() {
            c.m
        } else {
            let triples = dense_svd(&c.m)?;
            let sigma: Vec<f64> = triples.iter().map(|t| t.sigma).collect();
            if sigma.iter().sum::<f64>() <= tau {
                c.m
            } else {
                let mut out = Element::zeros(c.m.rows(), c.m.cols());
                for (t, s) in triples.iter().zip(project_l1_ball(&sigma, tau)) {
                    if s > 0.0 {
                        out.axpy(s, &Element::outer(&t.u, &t.v));
                    }
                }
                out
            }
        };
        Ok(self.join(&Coefficients {
            spikes: project_l1_ball(&c.spikes, tau),
            m,
            dct: project_l1_ball(&c.dct, tau),
        }))
    }

    /// Minimizes `½‖Σ xᵢ − b‖²` over the pools with each part's gauge at most `τ`,
    /// warm-started from `start`.
    pub(crate) fn solve(&self, b: &Element, tau: f64, start: &Coefficients) -> Result<Coefficients> {
        let g = self.gram();
        let h = self.rhs(b);
        let p = h.len();
        if p == 0 {
            return Ok(self.split(&[]));
        }
        let l = lambda_max(&g) * 1.001;
        let step = 1.0 / l;
        let grad = |t: &[f64]| -> Vec<f64> {
            g.mul_vec(t).into_iter().zip(&h).map(|(a, b)| a - b).collect()
        };
        let value = |t: &[f64]| -> f64 {
            let gt = g.mul_vec(t);
            0.5 * t.iter().zip(&gt).map(|(a, b)| a * b).sum::<f64>()
                - t.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut x = self.join(&self.embed(start));
        let mut fx = value(&x);
        let mut y = x.clone();
        let mut t = 1.0f64;
        for _ in 0..FISTA_ITERS {
            let gy = grad(&y);
            let trial: Vec<f64> = y.iter().zip(&gy).map(|(a, d)| a - step * d).collect();
            let next = self.project(&trial, tau)?;
            let f_next = value(&next);
            if f_next > fx {
                if t == 1.0 {
                    // Even a plain projected-gradient step fails to descend.
                    break;
                }
                y = x.clone();
                t = 1.0;
                continue;
            }
            let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let mom = (t - 1.0) / t_next;
            y = next.iter().zip(&x).map(|(a, b)| a + mom * (a - b)).collect();
            x = next;
            fx = f_next;
            t = t_next;
            if moved <= 1e-14 * (1.0 + norm2(&x)) {
                break;
            }
        }
        Ok(self.split(&x))
    }

    /// Shrinks the low-rank subspace to the singular vectors of `U M Vᵀ` with nonzero
    /// weight, leaving the synthesized components unchanged.
    pub(crate) fn compress(&mut self, c: &Coefficients) -> Result<Coefficients> {
        if c.m.is_empty() {
            return Ok(c.clone());
        }
        let triples = dense_svd(&c.m)?;
        let top = triples.first().map_or(0.0, |t| t.sigma);
        let keep: Vec<_> = triples.into_iter().filter(|t| t.sigma > 1e-12 * top).collect();
        let combine = |basis: &[Vec<f64>], w: &[f64]| {
            let mut out = vec![0.0; self.n];
            for (q, &wk) in basis.iter().zip(w) {
                for (o, x) in out.iter_mut().zip(q) {
                    *o += wk * x;
                }
            }
            out
        };
        let u: Vec<Vec<f64>> = keep.iter().map(|t| combine(&self.u, &t.u)).collect();
        let v: Vec<Vec<f64>> = keep.iter().map(|t| combine(&self.v, &t.v)).collect();
        let sigma: Vec<f64> = keep.iter().map(|t| t.sigma).collect();
        self.u = u;
        self.v = v;
        Ok(Coefficients {
            spikes: c.spikes.clone(),
            m: Element::diag(&sigma),
            dct: c.dct.clone(),
        })
    }

    /// Components `(x₁, x₂, x₃)` synthesized from coefficients.
    pub(crate) fn synthesize(&self, c: &Coefficients) -> [Element; 3] {
        let n = self.n;
        let mut x1 = Element::zeros(n, n);
        for (&p, &w) in self.spikes.iter().zip(&c.spikes) {
            x1.as_mut_slice()[p] = w;
        }
        let mut x2 = Element::zeros(n, n);
        for a in 0..c.m.rows() {
            for b in 0..c.m.cols() {
                let w = c.m.get(a, b);
                if w != 0.0 {
                    x2.axpy(w, &Element::outer(&self.u[a], &self.v[b]));
                }
            }
        }
        let mut coef = Element::zeros(n, n);
        for (&q, &w) in self.dct.iter().zip(&c.dct) {
            coef.as_mut_slice()[q] = w;
        }
        let x3 = dct_apply_2d(&coef, DctDirection::Inverse);
        [x1, x2, x3]
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration.
fn lambda_max(g: &Element) -> f64 {
    let n = g.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = g.mul_vec(&v);
        let nw = norm2(&w);
        if nw == 0.0 {
            return 1.0;
        }
        let done = (nw - lambda).abs() <= 1e-12 * nw;
        lambda = nw;
        v = w.into_iter().map(|x| x / nw).collect();
        if done {
            break;
        }
    }
    lambda.max(1.0)
}
