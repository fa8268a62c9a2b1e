//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use atomkit::Element;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn normal_element(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Element {
    Element::from_fn(rows, cols, |_, _| normal(rng))
}

pub fn vec_el(v: &[f64]) -> Element {
    Element::vector(v.to_vec())
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix; values descending,
/// eigenvectors as the columns of the returned row-major matrix.
pub fn jacobi_eig(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off.sqrt() < 1e-15 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (values, vectors)
}

/// One-sided Jacobi SVD of an `m × n` matrix with `m ≥ n`: singular values descending
/// and the matching right singular vectors (as columns).
pub fn jacobi_svd(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = a.len();
    let n = a[0].len();
    assert!(m >= n);
    let mut u: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for row in &u {
                    alpha += row[p] * row[p];
                    beta += row[q] * row[q];
                    gamma += row[p] * row[q];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in u.iter_mut().chain(v.iter_mut()) {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = c * xp - s * xq;
                    row[q] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n)
        .map(|j| u.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let values = order.iter().map(|&i| sigma[i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (values, vectors)
}

pub fn rows_of(x: &Element) -> Vec<Vec<f64>> {
    (0..x.rows()).map(|i| x.row(i).to_vec()).collect()
}

/// Minimizes a convex function of two variables over a box by a coarse grid followed
/// by repeated local grid refinement.
pub fn grid_minimize(f: impl Fn(f64, f64) -> f64, center: (f64, f64), radius: f64) -> (f64, (f64, f64)) {
    let n = 200;
    let mut best = (f64::INFINITY, center);
    let mut c = center;
    let mut r = radius;
    for _ in 0..40 {
        for i in 0..=n {
            for j in 0..=n {
                let p = (
                    c.0 - r + 2.0 * r * i as f64 / n as f64,
                    c.1 - r + 2.0 * r * j as f64 / n as f64,
                );
                let v = f(p.0, p.1);
                if v < best.0 {
                    best = (v, p);
                }
            }
        }
        c = best.1;
        r *= 0.1;
        if r < 1e-13 {
            break;
        }
    }
    best
}

/// `inf_{x₁} max(g₁(x₁), g₂(x − x₁))` in the plane.
pub fn grid_sum_gauge(g1: impl Fn(f64, f64) -> f64, g2: impl Fn(f64, f64) -> f64, x: (f64, f64)) -> f64 {
    let radius = 2.0 * (x.0.abs() + x.1.abs()) + 1.0;
    grid_minimize(
        |a, b| g1(a, b).max(g2(x.0 - a, x.1 - b)),
        (x.0 / 2.0, x.1 / 2.0),
        radius,
    )
    .0
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..n {
        let extra: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut t = s.clone();
                t.push(i);
                t
            })
            .collect();
        out.extend(extra);
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Exact solution of `min ½‖Ax − b‖²` subject to `‖x‖₁ ≤ τ` when the constraint is active
/// and the minimizer has at most `max_support` nonzeros: every support and sign pattern
/// is tried, the equality-constrained least-squares system solved, and the candidate
/// accepted only when signs are consistent and the KKT conditions hold.
pub fn lasso_active_set(a: &Element, b: &[f64], tau: f64, max_support: usize) -> Option<Vec<f64>> {
    let (m, n) = a.shape();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in subsets(n, max_support) {
        let k = s.len();
        for pattern in 0..(1u32 << k) {
            let signs: Vec<f64> = (0..k).map(|i| if pattern >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let mut sys = vec![vec![0.0; k + 1]; k + 1];
            let mut rhs = vec![0.0; k + 1];
            for (p, &i) in s.iter().enumerate() {
                for (q, &j) in s.iter().enumerate() {
                    sys[p][q] = (0..m).map(|r| a.get(r, i) * a.get(r, j)).sum();
                }
                sys[p][k] = signs[p];
                sys[k][p] = signs[p];
                rhs[p] = (0..m).map(|r| a.get(r, i) * b[r]).sum();
            }
            rhs[k] = tau;
            let Some(sol) = solve_linear(sys, rhs) else { continue };
            if (0..k).any(|p| sol[p] * signs[p] <= 0.0) {
                continue;
            }
            let mut x = vec![0.0; n];
            for (p, &i) in s.iter().enumerate() {
                x[i] = sol[p];
            }
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let z = a.tmul_vec(&r);
            let lambda = z[s[0]] * signs[0];
            let zmax = z.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if lambda < -1e-12 || zmax > lambda + 1e-9 * (1.0 + lambda) {
                continue;
            }
            let f = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
            if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                best = Some((f, x));
            }
        }
    }
    best.map(|(_, x)| x)
}

/// `min ½‖Ω∘(U S Vᵀ) − b‖²` over 2×2 `S ⪰ 0` with `trace S ≤ τ`, by grid search over the
/// parameterization `S = [[a, c], [c, d]]`, `a = t·w`, `d = t·(1 − w)`, `c = ρ √(ad)`,
/// followed by local refinement. Returns the minimal objective value.
pub fn psd2_grid(objective: impl Fn(&[[f64; 2]; 2]) -> f64, tau: f64) -> f64 {
    let param = |t: f64, w: f64, rho: f64| {
        let t = t.clamp(0.0, tau);
        let w = w.clamp(0.0, 1.0);
        let rho = rho.clamp(-1.0, 1.0);
        let a = t * w;
        let d = t * (1.0 - w);
        let c = rho * (a * d).sqrt();
        [[a, c], [c, d]]
    };
    let n = 40;
    let mut best = (f64::INFINITY, (0.0, 0.5, 0.0));
    let mut center = (tau / 2.0, 0.5, 0.0);
    let mut half = (tau / 2.0, 0.5, 1.0);
    for _ in 0..30 {
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let p = (
                        center.0 - half.0 + 2.0 * half.0 * i as f64 / n as f64,
                        center.1 - half.1 + 2.0 * half.1 * j as f64 / n as f64,
                        center.2 - half.2 + 2.0 * half.2 * k as f64 / n as f64,
                    );
                    let v = objective(&param(p.0, p.1, p.2));
                    if v < best.0 {
                        best = (v, (p.0.clamp(0.0, tau), p.1.clamp(0.0, 1.0), p.2.clamp(-1.0, 1.0)));
                    }
                }
            }
        }
        center = best.1;
        half = (half.0 * 0.3, half.1 * 0.3, half.2 * 0.3);
    }
    best.0
}
