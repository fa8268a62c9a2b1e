//! Signed canonical basis (1-norm), hypercube vertices (∞-norm) and the Euclidean ball.

use super::{face_threshold, Atom, AtomTag, AtomicDecomposition, ExposedFace};
use crate::element::Element;
use crate::linalg::project_l1_ball;

fn basis_atom(shape: (usize, usize), index: usize, sign: i8) -> Atom {
    let mut e = Element::zeros(shape.0, shape.1);
    e.as_mut_slice()[index] = sign as f64;
    Atom::new(e, AtomTag::SignedBasis { index, sign })
}

pub(crate) fn signed_basis_atoms(shape: (usize, usize)) -> Vec<Atom> {
    (0..shape.0 * shape.1)
        .flat_map(|i| [basis_atom(shape, i, 1), basis_atom(shape, i, -1)])
        .collect()
}

pub(crate) fn signed_basis_expose(z: &Element, k_max: usize, tol: f64) -> ExposedFace {
    let sup = z.norm_inf();
    let thr = face_threshold(sup, tol);
    let mut atoms = Vec::new();
    for (i, &v) in z.as_slice().iter().enumerate() {
        if atoms.len() >= k_max {
            break;
        }
        if sup == 0.0 {
            atoms.push(basis_atom(z.shape(), i, 1));
            if atoms.len() < k_max {
                atoms.push(basis_atom(z.shape(), i, -1));
            }
        } else if v.abs() >= thr {
            atoms.push(basis_atom(z.shape(), i, if v > 0.0 { 1 } else { -1 }));
        }
    }
    ExposedFace::new(sup, atoms, z.clone(), tol)
}

pub(crate) fn signed_basis_decompose(x: &Element) -> AtomicDecomposition {
    let terms = x
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (v.abs(), basis_atom(x.shape(), i, if v > 0.0 { 1 } else { -1 })))
        .collect();
    AtomicDecomposition::minimal(terms, None, x.norm1())
}

pub(crate) fn project_signed_basis(x: &Element) -> Element {
    let p = project_l1_ball(x.as_slice(), 1.0);
    Element::from_vec(x.rows(), x.cols(), p).expect("same shape")
}

fn sign_vector(shape: (usize, usize), signs: &[f64]) -> Atom {
    let e = Element::from_vec(shape.0, shape.1, signs.to_vec()).expect("shape");
    Atom::new(e, AtomTag::Generic)
}

/// Maximum number of free coordinates enumerated in an ∞-ball face.
const MAX_FREE: usize = 20;

pub(crate) fn inf_ball_expose(z: &Element, k_max: usize, tol: f64) -> ExposedFace {
    let sup = z.norm1();
    let free_thr = 0.5 * tol * sup;
    let base: Vec<f64> = z
        .as_slice()
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let free: Vec<usize> = z
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= free_thr)
        .map(|(i, _)| i)
        .take(MAX_FREE)
        .collect();
    let mut atoms = Vec::new();
    let total: u64 = 1u64 << free.len();
    for mask in 0..total {
        if atoms.len() >= k_max {
            break;
        }
        let mut s = base.clone();
        for (bit, &i) in free.iter().enumerate() {
            // Most significant free coordinate varies slowest, +1 first.
            let shift = free.len() - 1 - bit;
            s[i] = if (mask >> shift) & 1 == 0 { 1.0 } else { -1.0 };
        }
        atoms.push(sign_vector(z.shape(), &s));
    }
    ExposedFace::new(sup, atoms, z.clone(), tol)
}

/// Writes `x` as a convex combination of at most `n + 1` hypercube vertices, scaled by ‖x‖∞.
pub(crate) fn inf_ball_decompose(x: &Element) -> AtomicDecomposition {
    let g = x.norm_inf();
    if g == 0.0 {
        return AtomicDecomposition::minimal(Vec::new(), None, 0.0);
    }
    // Vertex s(u)_i = +1 iff (y_i + 1)/2 >= u for u uniform on [0, 1].
    let p: Vec<f64> = x.as_slice().iter().map(|v| 0.5 * (v / g + 1.0)).collect();
    let mut cuts: Vec<f64> = p.iter().copied().chain([0.0, 1.0]).collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut terms = Vec::new();
    for w in cuts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let s: Vec<f64> = p.iter().map(|&pi| if pi >= mid { 1.0 } else { -1.0 }).collect();
        terms.push((g * width, sign_vector(x.shape(), &s)));
    }
    AtomicDecomposition::minimal(terms, None, g)
}

pub(crate) fn inf_ball_atoms(shape: (usize, usize)) -> Option<Vec<Atom>> {
    let n = shape.0 * shape.1;
    if n > 12 {
        return None;
    }
    Some(
        (0..1u64 << n)
            .map(|mask| {
                let s: Vec<f64> = (0..n)
                    .map(|i| if (mask >> (n - 1 - i)) & 1 == 0 { 1.0 } else { -1.0 })
                    .collect();
                sign_vector(shape, &s)
            })
            .collect(),
    )
}

pub(crate) fn euclidean_expose(z: &Element, k_max: usize, tol: f64) -> ExposedFace {
    let sup = z.norm();
    if sup == 0.0 {
        let atoms = signed_basis_atoms(z.shape())
            .into_iter()
            .take(k_max)
            .map(|a| Atom::new(a.element, AtomTag::Generic))
            .collect();
        return ExposedFace::new(0.0, atoms, z.clone(), tol);
    }
    let a = Atom::new(z.scale(1.0 / sup), AtomTag::Generic);
    ExposedFace::new(sup, vec![a], z.clone(), tol)
}

pub(crate) fn euclidean_decompose(x: &Element) -> AtomicDecomposition {
    let g = x.norm();
    if g == 0.0 {
        return AtomicDecomposition::minimal(Vec::new(), None, 0.0);
    }
    let a = Atom::new(x.scale(1.0 / g), AtomTag::Generic);
    AtomicDecomposition::minimal(vec![(g, a)], None, g)
}

pub(crate) fn project_euclidean(x: &Element) -> Element {
    let n = x.norm();
    if n <= 1.0 {
        x.clone()
    } else {
        x.scale(1.0 / n)
    }
}

pub(crate) fn project_box(x: &Element) -> Element {
    x.map(|v| v.clamp(-1.0, 1.0))
}
