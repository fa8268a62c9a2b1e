mod common;

use atomkit::atoms::{
    alignment_residual, gauge_bruteforce, is_supported_by, moreau_decompose, TransformMode,
};
use atomkit::linalg::{dct_apply, dense_svd, DctDirection};
use atomkit::linmap::LinearMap;
use atomkit::{Atom, AtomTag, AtomicDecomposition, AtomicSet, Element, Error, Extended};
use common::*;

fn pyramid() -> Vec<Element> {
    let mut atoms = Vec::new();
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            atoms.push(vec_el(&[a, b, 1.0]));
        }
    }
    atoms
}

fn fin(x: Extended) -> f64 {
    x.finite().expect("finite value")
}

#[test]
fn gauge_examples() {
    let sb = AtomicSet::signed_basis(3);
    assert!((fin(sb.gauge(&vec_el(&[1.0, -2.0, 0.0])).unwrap()) - 3.0).abs() < 1e-12);

    let finite = AtomicSet::finite(pyramid()).unwrap();
    assert!((fin(finite.gauge(&vec_el(&[0.0, 0.0, 2.0])).unwrap()) - 2.0).abs() < 1e-10);

    let psd = AtomicSet::spectrahedron(2);
    assert!((fin(psd.gauge(&Element::diag(&[1.0, 2.0])).unwrap()) - 3.0).abs() < 1e-10);
    assert_eq!(psd.gauge(&Element::diag(&[1.0, -1.0])).unwrap(), Extended::Infinite);

    let tv = AtomicSet::total_variation(2).unwrap();
    assert!((fin(tv.gauge(&vec_el(&[3.0, 1.0])).unwrap()) - 2.0).abs() < 1e-12);
}

#[test]
fn support_examples() {
    let sb = AtomicSet::signed_basis(2);
    assert!((fin(sb.support(&vec_el(&[3.0, -1.0])).unwrap()) - 3.0).abs() < 1e-12);

    let psd = AtomicSet::spectrahedron(2);
    assert!(fin(psd.support(&Element::diag(&[-1.0, -2.0])).unwrap()).abs() < 1e-12);

    let tv = AtomicSet::total_variation(3).unwrap();
    assert_eq!(tv.support(&vec_el(&[1.0, 0.5, 0.2])).unwrap(), Extended::Infinite);
}

#[test]
fn expose_examples() {
    let face = AtomicSet::signed_basis(3).expose(&vec_el(&[3.0, -1.0, 3.0]), 8, 1e-9).unwrap();
    assert!((face.support_value - 3.0).abs() < 1e-12);
    let indices: Vec<(usize, i8)> = face
        .atoms
        .iter()
        .map(|a| match a.tag {
            AtomTag::SignedBasis { index, sign } => (index, sign),
            ref t => panic!("unexpected tag {t:?}"),
        })
        .collect();
    assert_eq!(indices, vec![(0, 1), (2, 1)]);

    let z = Element::diag(&[2.0, 2.0, 1.0]);
    let face = AtomicSet::nuclear_ball(3, 3).expose(&z, 8, 1e-9).unwrap();
    let sigma = dense_svd(&z).unwrap();
    assert!((face.support_value - sigma[0].sigma).abs() < 1e-12);
    assert_eq!(face.atoms.len(), 2);
    for a in &face.atoms {
        assert!(matches!(a.tag, AtomTag::RankOne { .. }));
        assert!(a.element.get(2, 2).abs() < 1e-12);
        assert!(a.element.get(0, 2).abs() < 1e-12 && a.element.get(2, 0).abs() < 1e-12);
        assert!((a.element.dot(&z) - 2.0).abs() < 1e-10);
    }

    let groups = AtomicSet::group_norm(3, vec![vec![0, 1], vec![2]]).unwrap();
    let face = groups.expose(&vec_el(&[3.0, 4.0, 1.0]), 8, 1e-9).unwrap();
    assert!((face.support_value - 5.0).abs() < 1e-12);
    assert_eq!(face.atoms.len(), 1);
    assert!(face.atoms[0].element.distance(&vec_el(&[0.6, 0.8, 0.0])) < 1e-12);
}

#[test]
fn unbounded_support_cannot_be_exposed() {
    let tv = AtomicSet::total_variation(3).unwrap();
    assert!(matches!(
        tv.expose(&vec_el(&[1.0, 0.0, 0.0]), 4, 1e-9),
        Err(Error::UnboundedSupport)
    ));
}

#[test]
fn decompose_examples() {
    let d = AtomicSet::signed_basis(2).decompose(&vec_el(&[1.0, -2.0]), 1e-12).unwrap();
    assert!((d.claimed_gauge - 3.0).abs() < 1e-12);
    let mut terms: Vec<(f64, Element)> = d.terms.iter().map(|(c, a)| (*c, a.element.clone())).collect();
    terms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    assert!((terms[0].0 - 1.0).abs() < 1e-12 && terms[0].1 == vec_el(&[1.0, 0.0]));
    assert!((terms[1].0 - 2.0).abs() < 1e-12 && terms[1].1 == vec_el(&[0.0, -1.0]));

    let x = vec_el(&[0.0, 0.0, 2.0]);
    let d = AtomicSet::finite(pyramid()).unwrap().decompose(&x, 1e-10).unwrap();
    assert!(matches!(d.terms.len(), 2 | 4), "{} atoms", d.terms.len());
    assert!((d.coefficient_sum() - 2.0).abs() < 1e-10);
    assert!(d.synthesize((3, 1)).distance(&x) < 1e-10);

    let x = vec_el(&[3.0, 1.0]);
    let d = AtomicSet::total_variation(2).unwrap().decompose(&x, 1e-12).unwrap();
    assert_eq!(d.terms.len(), 1);
    assert!((d.terms[0].0 - 2.0).abs() < 1e-12);
    let (c, rec) = d.recession_part.clone().expect("recession part");
    assert_eq!(rec.tag, AtomTag::RecessionDir);
    assert!(rec.element.scale(c).distance(&vec_el(&[1.0, 1.0])) < 1e-12);
    assert!(d.synthesize((2, 1)).distance(&x) < 1e-12);

    let psd = AtomicSet::spectrahedron(2);
    assert!(matches!(psd.decompose(&Element::diag(&[1.0, -1.0]), 1e-10), Err(Error::NotInCone)));
}

#[test]
fn alignment_examples() {
    let sb = AtomicSet::signed_basis(2);
    let z = vec_el(&[5.0, 3.0]);
    assert!(alignment_residual(&sb, &vec_el(&[1.0, 0.0]), &z).unwrap().abs() < 1e-12);
    assert!((alignment_residual(&sb, &vec_el(&[0.0, 1.0]), &z).unwrap() - 2.0).abs() < 1e-12);

    let basis = Element::from_rows(&[vec![1.0], vec![0.0], vec![0.0]]).unwrap();
    let l = AtomicSet::subspace(basis).unwrap();
    let r = alignment_residual(&l, &vec_el(&[2.0, 0.0, 0.0]), &vec_el(&[0.0, 1.0, -3.0])).unwrap();
    assert!(r.abs() < 1e-12);

    let tv = AtomicSet::total_variation(3).unwrap();
    assert!(matches!(
        alignment_residual(&tv, &vec_el(&[1.0, 0.0, 0.0]), &vec_el(&[1.0, 0.0, 0.0])),
        Err(Error::BothInfinite)
    ));
}

fn basis_decomp(index: usize, n: usize) -> AtomicDecomposition {
    let mut e = vec![0.0; n];
    e[index] = 1.0;
    AtomicDecomposition::minimal(
        vec![(1.0, Atom::new(vec_el(&e), AtomTag::SignedBasis { index, sign: 1 }))],
        None,
        1.0,
    )
}

#[test]
fn support_identification_examples() {
    let face = AtomicSet::signed_basis(3).expose(&vec_el(&[3.0, -1.0, 3.0]), 8, 1e-9).unwrap();
    assert!(is_supported_by(&basis_decomp(0, 3), &face, 1e-9));
    assert!(!is_supported_by(&basis_decomp(1, 3), &face, 1e-9));

    // Shared singular bases, r = 2 terms in x and d = 3 top singular values in z.
    let mut r = rng(8);
    let q1 = jacobi_eig(&rows_of(&{
        let g = normal_element(&mut r, 4, 4);
        Element::from_fn(4, 4, |i, j| g.get(i, j) + g.get(j, i))
    }))
    .1;
    let q2 = jacobi_eig(&rows_of(&{
        let g = normal_element(&mut r, 4, 4);
        Element::from_fn(4, 4, |i, j| g.get(i, j) + g.get(j, i))
    }))
    .1;
    let col = |q: &Vec<Vec<f64>>, j: usize| -> Vec<f64> { q.iter().map(|row| row[j]).collect() };
    let mut x = Element::zeros(4, 4);
    x.axpy(2.0, &Element::outer(&col(&q1, 0), &col(&q2, 0)));
    x.axpy(0.5, &Element::outer(&col(&q1, 1), &col(&q2, 1)));
    let mut z = Element::zeros(4, 4);
    for (j, s) in [3.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
        z.axpy(s, &Element::outer(&col(&q1, j), &col(&q2, j)));
    }
    let set = AtomicSet::nuclear_ball(4, 4);
    let decomp = set.decompose(&x, 1e-12).unwrap();
    let face = set.expose(&z, 8, 1e-9).unwrap();
    assert_eq!(face.atoms.len(), 3);
    assert!(is_supported_by(&decomp, &face, 1e-9));
}

#[test]
fn bruteforce_examples() {
    let atoms = vec![vec_el(&[1.0, 0.0]), vec_el(&[0.0, 1.0])];
    assert!((fin(gauge_bruteforce(&atoms, &vec_el(&[2.0, 3.0]), 1e-10).unwrap()) - 5.0).abs() < 1e-12);
    assert!((fin(gauge_bruteforce(&pyramid(), &vec_el(&[0.0, 0.0, 2.0]), 1e-10).unwrap()) - 2.0).abs() < 1e-12);
    assert_eq!(
        gauge_bruteforce(&atoms, &vec_el(&[-1.0, 0.0]), 1e-10).unwrap(),
        Extended::Infinite
    );
    let many: Vec<Element> = (0..11).map(|i| vec_el(&[i as f64, 1.0])).collect();
    assert!(matches!(gauge_bruteforce(&many, &vec_el(&[1.0, 1.0]), 1e-10), Err(Error::TooLarge(_))));
}

#[test]
fn bruteforce_agrees_with_descriptor_on_random_cones() {
    let mut r = rng(31);
    for _ in 0..100 {
        let atoms: Vec<Element> = (0..4).map(|_| vec_el(&normal_vec(&mut r, 3))).collect();
        let c: Vec<f64> = (0..4).map(|_| r_uniform(&mut r)).collect();
        let mut x = Element::zeros(3, 1);
        for (ci, a) in c.iter().zip(&atoms) {
            x.axpy(*ci, a);
        }
        let brute = fin(gauge_bruteforce(&atoms, &x, 1e-10).unwrap());
        let desc = fin(AtomicSet::finite(atoms.clone()).unwrap().gauge(&x).unwrap());
        assert!((brute - desc).abs() <= 1e-8 * (1.0 + brute), "{brute} vs {desc}");
    }
}

fn r_uniform(r: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand::Rng;
    r.random::<f64>()
}

#[test]
fn transform_examples() {
    let mut r = rng(3);
    let base = AtomicSet::signed_basis(4);
    let same = base.clone().transform(LinearMap::Identity, TransformMode::Image).unwrap();
    for _ in 0..100 {
        let p = vec_el(&normal_vec(&mut r, 4));
        assert!((fin(base.gauge(&p).unwrap()) - fin(same.gauge(&p).unwrap())).abs() < 1e-12);
        assert!((fin(base.support(&p).unwrap()) - fin(same.support(&p).unwrap())).abs() < 1e-12);
    }

    let scaled = base.clone().transform(LinearMap::Scale(2.5), TransformMode::Image).unwrap();
    let z = vec_el(&[1.0, -3.0, 0.5, 2.0]);
    assert!((fin(scaled.support(&z).unwrap()) - 2.5 * 3.0).abs() < 1e-12);

    let dct = AtomicSet::signed_basis(8).transform(LinearMap::InverseDct, TransformMode::Image).unwrap();
    let x = normal_vec(&mut r, 8);
    let want: f64 = dct_apply(&x, DctDirection::Forward).iter().map(|v| v.abs()).sum();
    assert!((fin(dct.gauge(&vec_el(&x)).unwrap()) - want).abs() < 1e-10);

    let pre = base
        .clone()
        .transform(LinearMap::Scale(2.0), TransformMode::Preimage)
        .unwrap();
    let x = vec_el(&[1.0, -1.0, 0.0, 0.5]);
    assert!((fin(pre.gauge(&x).unwrap()) - 2.0 * 2.5).abs() < 1e-12);

    assert!(matches!(
        base.transform(LinearMap::dense(Element::zeros(3, 5)), TransformMode::Image),
        Err(Error::ShapeMismatch { .. })
    ));
}

#[test]
fn moreau_examples() {
    let ball = AtomicSet::euclidean_ball(3);
    let s = vec_el(&[0.6, 0.0, 0.8]);
    let parts = moreau_decompose(&ball, &s, 1.0).unwrap();
    assert!((parts.alpha_x - 1.0).abs() < 1e-10);
    assert!(parts.x.distance(&s) < 1e-10);
    assert!(parts.alpha_z.abs() < 1e-10);

    let parts = moreau_decompose(&ball, &Element::zeros(3, 1), -1.0).unwrap();
    assert!(parts.alpha_x.abs() < 1e-10);
    assert!((parts.alpha_z - 1.0).abs() < 1e-10);
    assert!(parts.z.norm() < 1e-10);

    assert!(matches!(
        moreau_decompose(&AtomicSet::total_variation(3).unwrap(), &vec_el(&[1.0, 2.0, 3.0]), 1.0),
        Err(Error::NoProjector)
    ));
}

/// Projection of `(s, α)` onto `K = {(y, t) : ‖y‖₁ ≤ t}`, the lifted cone of the 1-ball.
fn lifted_projection_oracle(s: &[f64], alpha: f64) -> (Vec<f64>, f64) {
    let proj = |y: &[f64], t: f64| -> (Vec<f64>, f64) {
        let n1: f64 = y.iter().map(|v| v.abs()).sum();
        if n1 <= t {
            return (y.to_vec(), t);
        }
        let ymax = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if ymax <= -t {
            return (vec![0.0; y.len()], 0.0);
        }
        // Soft-threshold y by λ and raise t by λ; λ found by bisection.
        let excess = |lam: f64| -> f64 {
            y.iter().map(|v| (v.abs() - lam).max(0.0)).sum::<f64>() - (t + lam)
        };
        let (mut lo, mut hi) = (0.0, ymax);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        (y.iter().map(|v| v.signum() * (v.abs() - lam).max(0.0)).collect(), t + lam)
    };
    proj(s, alpha)
}

#[test]
fn moreau_matches_lifted_projection_on_the_one_ball() {
    let mut r = rng(17);
    let set = AtomicSet::signed_basis(3);
    for _ in 0..25 {
        let s = normal_vec(&mut r, 3);
        let alpha = normal(&mut r);
        let parts = moreau_decompose(&set, &vec_el(&s), alpha).unwrap();
        let (y, t) = lifted_projection_oracle(&s, alpha);
        let kx = parts.x.scale(parts.alpha_x);
        assert!(kx.distance(&vec_el(&y)) <= 1e-8, "{kx:?} vs {y:?}");
        assert!((parts.alpha_x - t).abs() <= 1e-8);
        let (back, a) = parts.reconstruct();
        assert!(back.distance(&vec_el(&s)) <= 1e-8 && (a - alpha).abs() <= 1e-8);
        let res = alignment_residual(&set, &kx, &parts.z.scale(parts.alpha_z)).unwrap();
        assert!(res.abs() <= 1e-8);
    }
}

#[test]
fn weighted_spectrahedron_gauge_is_the_weighted_trace() {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let v = Element::from_rows(&[vec![s2, 0.0], vec![s2, 0.0], vec![0.0, 1.0]]).unwrap();
    let lambda = vec![2.0, 0.5];
    let set = AtomicSet::weighted_spectrahedron(v.clone(), lambda.clone()).unwrap();
    let l = Element::from_fn(3, 3, |i, j| (0..2).map(|k| v.get(i, k) * lambda[k] * v.get(j, k)).sum());
    let mut r = rng(6);
    for _ in 0..20 {
        let mut x = Element::zeros(3, 3);
        for _ in 0..2 {
            // p with pᵀ L p = 1 inside the range of V.
            let w = normal_vec(&mut r, 2);
            let p: Vec<f64> = (0..3).map(|i| (0..2).map(|k| v.get(i, k) * w[k]).sum()).collect();
            let lp = l.mul_vec(&p);
            let q: f64 = p.iter().zip(&lp).map(|(a, b)| a * b).sum();
            let p: Vec<f64> = p.iter().map(|a| a / q.sqrt()).collect();
            x.axpy(r_uniform(&mut r) + 0.1, &Element::outer(&p, &p));
        }
        let g = fin(set.gauge(&x).unwrap());
        assert!((g - l.dot(&x)).abs() <= 1e-8 * (1.0 + g));
    }
}
