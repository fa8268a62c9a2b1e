use super::dense::dense_sym_eig;
use crate::element::Element;
use crate::error::{Error, Result};

/// Euclidean projection onto the simplex `{λ ≥ 0, Σλ = τ}`.
pub fn project_simplex(v: &[f64], tau: f64) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - tau) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Euclidean projection onto the capped simplex `{λ ≥ 0, Σλ ≤ τ}`.
pub fn project_capped_simplex(v: &[f64], tau: f64) -> Vec<f64> {
    let clamped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    if clamped.iter().sum::<f64>() <= tau {
        clamped
    } else {
        project_simplex(v, tau)
    }
}

/// Euclidean projection onto the 1-norm ball of radius `r`.
pub fn project_l1_ball(v: &[f64], r: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= r {
        return v.to_vec();
    }
    let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    project_simplex(&abs, r)
        .into_iter()
        .zip(v)
        .map(|(p, &x)| p.copysign(x))
        .collect()
}

/// Euclidean projection onto `{S ⪰ 0, trace(S) ≤ τ}`.
pub fn project_trace_capped_psd(s: &Element, tau: f64) -> Result<Element> {
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
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument("tau must be positive".into()));
    }
    let eig = dense_sym_eig(s)?;
    let lam = project_capped_simplex(&eig.values, tau);
    let mut out = Element::zeros(n, n);
    for (l, u) in lam.iter().zip(&eig.vectors) {
        if *l == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let v = out.get(i, j) + l * u[i] * u[j];
                out.set(i, j, v);
            }
        }
    }
    Ok(out.symmetrize())
}
