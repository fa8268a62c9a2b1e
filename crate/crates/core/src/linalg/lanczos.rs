
use super::dense::{dense_svd, dense_sym_eig};
use super::{
    normalize, orthogonalize, seeded_normal, LinearOperator, SingularTriple, Transposed,
    DENSE_CUTOFF,
};
use crate::element::{dot, Element};
use crate::error::{Error, Result};

/// Breakdown threshold relative to the running norm estimate.
const BREAKDOWN: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            tol: 1e-10,
            max_iter: 1000,
            seed: 0,
        }
    }
}

pub type EigOptions = SvdOptions;

/// Largest `k` singular triples of `op`, descending.
///
/// Small problems use a dense SVD; larger ones use Golub-Kahan-Lanczos
/// bidiagonalization with full reorthogonalization from a seeded start vector.
pub fn top_singular_triples(
    op: &dyn LinearOperator,
    k: usize,
    opts: &SvdOptions,
) -> Result<Vec<SingularTriple>> {
    let (m, n) = (op.nrows(), op.ncols());
    if k == 0 || k > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={}",
            m.min(n)
        )));
    }
    if opts.tol <= 0.0 || opts.tol.is_nan() {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if m.min(n) <= DENSE_CUTOFF {
        let a = op.to_dense();
        if a.shape() != (m, n) {
            return Err(Error::ShapeMismatch {
                expected: (m, n),
                found: a.shape(),
            });
        }
        let mut t = dense_svd(&a)?;
        t.truncate(k);
        return Ok(t);
    }
    if m < n {
        let t = gkl(&Transposed(op), k, opts)?;
        return Ok(t
            .into_iter()
            .map(|s| SingularTriple {
                sigma: s.sigma,
                u: s.v,
                v: s.u,
            })
            .collect());
    }
    gkl(op, k, opts)
}

fn check_len(v: &[f64], expected: usize, other: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::ShapeMismatch {
            expected: (expected, other),
            found: (v.len(), other),
        });
    }
    Ok(())
}

fn random_orthogonal(len: usize, basis: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let mut attempt = 0u64;
    loop {
        let mut v = seeded_normal(len, seed.wrapping_add(0x9e37_79b9).wrapping_add(attempt));
        orthogonalize(&mut v, basis);
        if normalize(&mut v) > 1e-8 {
            return v;
        }
        attempt += 1;
    }
}

/// Bidiagonalization for operators with `nrows >= ncols`.
fn gkl(op: &dyn LinearOperator, k: usize, opts: &SvdOptions) -> Result<Vec<SingularTriple>> {
    let (m, n) = (op.nrows(), op.ncols());
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v = seeded_normal(n, opts.seed);
    normalize(&mut v);
    let mut scale: f64 = 0.0;
    let mut restarts = 0u64;
    let steps = n.min(opts.max_iter.max(1));
    for step in 0..steps {
        vs.push(v.clone());
        let mut u = op.apply(&v);
        check_len(&u, m, n)?;
        if let (Some(prev), Some(&b)) = (us.last(), betas.last()) {
            for (x, y) in u.iter_mut().zip(prev) {
                *x -= b * y;
            }
        }
        orthogonalize(&mut u, &us);
        let mut alpha = normalize(&mut u);
        scale = scale.max(alpha);
        if alpha <= BREAKDOWN * scale {
            alpha = 0.0;
            restarts += 1;
            u = random_orthogonal(m, &us, opts.seed.wrapping_add(restarts));
        }
        us.push(u.clone());
        alphas.push(alpha);

        let mut w = op.apply_adjoint(&u);
        check_len(&w, n, m)?;
        for (x, y) in w.iter_mut().zip(&v) {
            *x -= alpha * y;
        }
        orthogonalize(&mut w, &vs);
        let mut beta = normalize(&mut w);
        scale = scale.max(beta);
        if beta <= BREAKDOWN * scale {
            beta = 0.0;
        }

        let p = step + 1;
        if p >= k {
            let b = Element::from_fn(p, p, |i, j| {
                if i == j {
                    alphas[i]
                } else if j == i + 1 {
                    betas[i]
                } else {
                    0.0
                }
            });
            let small = dense_svd(&b)?;
            let sigma1 = small[0].sigma;
            let converged = p == n
                || small[..k]
                    .iter()
                    .all(|t| (beta * t.u[p - 1]).abs() <= opts.tol * sigma1.max(f64::MIN_POSITIVE));
            if converged {
                return Ok(small[..k]
                    .iter()
                    .map(|t| {
                        let mut lu = vec![0.0; m];
                        let mut rv = vec![0.0; n];
                        for j in 0..p {
                            let cu = t.u[j];
                            let cv = t.v[j];
                            for (x, y) in lu.iter_mut().zip(&us[j]) {
                                *x += cu * y;
                            }
                            for (x, y) in rv.iter_mut().zip(&vs[j]) {
                                *x += cv * y;
                            }
                        }
                        normalize(&mut lu);
                        normalize(&mut rv);
                        SingularTriple {
                            sigma: t.sigma,
                            u: lu,
                            v: rv,
                        }
                    })
                    .collect());
            }
        }
        betas.push(beta);
        if beta == 0.0 {
            restarts += 1;
            v = random_orthogonal(n, &vs, opts.seed.wrapping_add(restarts));
        } else {
            v = w;
        }
    }
    Err(Error::NonConvergence { iterations: steps })
}

/// Largest eigenvalue and a unit eigenvector of a symmetric matrix.
pub fn sym_eig_top(s: &Element, opts: &EigOptions) -> Result<(f64, Vec<f64>)> {
    let (m, n) = s.shape();
    if m != n {
        return Err(Error::ShapeMismatch {
            expected: (m, m),
            found: (m, n),
        });
    }
    let asym = s.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let sym = s.symmetrize();
    if n <= DENSE_CUTOFF {
        let e = dense_sym_eig(&sym)?;
        return Ok((e.values[0], e.vectors[0].clone()));
    }
    lanczos_top(&sym, opts)
}

fn lanczos_top(s: &Element, opts: &EigOptions) -> Result<(f64, Vec<f64>)> {
    let n = s.rows();
    let mut qs: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut q = seeded_normal(n, opts.seed);
    normalize(&mut q);
    let mut scale: f64 = 0.0;
    let mut restarts = 0u64;
    let steps = n.min(opts.max_iter.max(1));
    for step in 0..steps {
        qs.push(q.clone());
        let mut w = s.mul_vec(&q);
        if qs.len() >= 2 {
            let b = *betas.last().unwrap_or(&0.0);
            let prev = &qs[qs.len() - 2];
            for (x, y) in w.iter_mut().zip(prev) {
                *x -= b * y;
            }
        }
        let alpha = dot(&w, &q);
        for (x, y) in w.iter_mut().zip(&q) {
            *x -= alpha * y;
        }
        orthogonalize(&mut w, &qs);
        alphas.push(alpha);
        let mut beta = normalize(&mut w);
        scale = scale.max(alpha.abs()).max(beta);
        if beta <= BREAKDOWN * scale {
            beta = 0.0;
        }
        let p = step + 1;
        let t = Element::from_fn(p, p, |i, j| {
            if i == j {
                alphas[i]
            } else if j == i + 1 {
                betas[i]
            } else if i == j + 1 {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = dense_sym_eig(&t)?;
        let norm_est = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let resid = (beta * eig.vectors[0][p - 1]).abs();
        if p == n || resid <= opts.tol * norm_est.max(f64::MIN_POSITIVE) {
            let mut u = vec![0.0; n];
            for j in 0..p {
                let c = eig.vectors[0][j];
                for (x, y) in u.iter_mut().zip(&qs[j]) {
                    *x += c * y;
                }
            }
            normalize(&mut u);
            return Ok((eig.values[0], u));
        }
        betas.push(beta);
        if beta == 0.0 {
            restarts += 1;
            q = random_orthogonal(n, &qs, opts.seed.wrapping_add(restarts));
        } else {
            q = w;
        }
    }
    Err(Error::NonConvergence { iterations: steps })
}
