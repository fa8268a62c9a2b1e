mod common;

use atomkit::linalg::{
    dct_apply, dct_matrix, gen_eig_max, project_trace_capped_psd, sym_eig_top, top_singular_triples,
    DctDirection, EigOptions, SvdOptions,
};
use atomkit::{Element, Error};
use common::*;

fn svd_opts(seed: u64) -> SvdOptions {
    SvdOptions {
        tol: 1e-12,
        max_iter: 1000,
        seed,
    }
}

#[test]
fn identity_has_unit_singular_value() {
    let t = top_singular_triples(&Element::identity(2), 1, &svd_opts(0)).unwrap();
    assert_eq!(t.len(), 1);
    assert!((t[0].sigma - 1.0).abs() < 1e-12);
    let uv: f64 = t[0].u.iter().zip(&t[0].v).map(|(a, b)| a * b).sum();
    assert!((uv - 1.0).abs() < 1e-12);
}

#[test]
fn diagonal_top_triple() {
    let t = top_singular_triples(&Element::diag(&[3.0, 1.0]), 1, &svd_opts(0)).unwrap();
    assert!((t[0].sigma - 3.0).abs() < 1e-12);
    assert!((t[0].u[0].abs() - 1.0).abs() < 1e-12);
    assert!((t[0].v[0].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn random_matrix_matches_jacobi_svd() {
    let mut r = rng(11);
    let a = normal_element(&mut r, 5, 4);
    let (sigma, _) = jacobi_svd(&rows_of(&a));
    let t = top_singular_triples(&a, 3, &svd_opts(3)).unwrap();
    assert_eq!(t.len(), 3);
    for (k, triple) in t.iter().enumerate() {
        assert!((triple.sigma - sigma[k]).abs() <= 1e-8, "{} vs {}", triple.sigma, sigma[k]);
        let av = a.mul_vec(&triple.v);
        let res: f64 = av.iter().zip(&triple.u).map(|(x, u)| (x - triple.sigma * u).powi(2)).sum();
        assert!(res.sqrt() <= 1e-8 * sigma[0]);
    }
}

#[test]
fn large_operator_goes_through_lanczos() {
    let mut r = rng(5);
    let u = normal_vec(&mut r, 60);
    let v = normal_vec(&mut r, 50);
    let mut a = Element::outer(&u, &v);
    a.axpy(0.01, &normal_element(&mut r, 60, 50));
    let (sigma, _) = jacobi_svd(&rows_of(&a));
    let t = top_singular_triples(&a, 2, &svd_opts(1)).unwrap();
    for k in 0..2 {
        assert!((t[k].sigma - sigma[k]).abs() <= 1e-8 * sigma[0]);
    }
    assert_eq!(t, top_singular_triples(&a, 2, &svd_opts(1)).unwrap());
}

#[test]
fn symmetric_top_eigenpair() {
    let (l, u) = sym_eig_top(&Element::diag(&[2.0, -5.0]), &EigOptions::default()).unwrap();
    assert!((l - 2.0).abs() < 1e-12);
    assert!((u[0].abs() - 1.0).abs() < 1e-12);

    let (l, u) = sym_eig_top(&Element::zeros(3, 3), &EigOptions::default()).unwrap();
    assert_eq!(l, 0.0);
    assert!((u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn random_symmetric_matches_jacobi_eig() {
    let mut r = rng(21);
    let g = normal_element(&mut r, 6, 6);
    let s = Element::from_fn(6, 6, |i, j| g.get(i, j) + g.get(j, i));
    let (values, _) = jacobi_eig(&rows_of(&s));
    let (l, u) = sym_eig_top(&s, &EigOptions::default()).unwrap();
    assert!((l - values[0]).abs() <= 1e-9, "{l} vs {}", values[0]);
    let su = s.mul_vec(&u);
    let res: f64 = su.iter().zip(&u).map(|(a, b)| (a - l * b).powi(2)).sum();
    assert!(res.sqrt() <= 1e-9 * s.norm());
}

#[test]
fn asymmetric_input_is_rejected() {
    let s = Element::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
    assert!(matches!(sym_eig_top(&s, &EigOptions::default()), Err(Error::NotSymmetric { .. })));
}

#[test]
fn generalized_eigen_examples() {
    let v = Element::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let lambda = [2.0, 0.5];
    let l = Element::from_fn(3, 3, |i, j| (0..2).map(|k| v.get(i, k) * lambda[k] * v.get(j, k)).sum());
    let (lmax, p) = gen_eig_max(&l, &v, &lambda).unwrap();
    assert!((lmax - 1.0).abs() < 1e-10);
    let norm: f64 = p.iter().zip(&lambda).map(|(x, w)| w * x * x).sum();
    assert!((norm - 1.0).abs() < 1e-10);

    let mut r = rng(2);
    let g = normal_element(&mut r, 4, 4);
    let z = Element::from_fn(4, 4, |i, j| g.get(i, j) + g.get(j, i));
    let (lmax, _) = gen_eig_max(&z, &Element::identity(4), &[1.0; 4]).unwrap();
    let (top, _) = sym_eig_top(&z, &EigOptions::default()).unwrap();
    assert!((lmax - top).abs() < 1e-10);

    assert!(matches!(
        gen_eig_max(&z, &Element::identity(4), &[1.0, 1.0, 0.0, 1.0]),
        Err(Error::NonPositiveWeight { .. })
    ));
}

#[test]
fn random_pencil_matches_explicit_congruence() {
    let mut r = rng(9);
    let g = normal_element(&mut r, 5, 5);
    let z = Element::from_fn(5, 5, |i, j| g.get(i, j) + g.get(j, i));
    // Orthonormal columns taken from an eigenbasis.
    let h = normal_element(&mut r, 5, 5);
    let sym = Element::from_fn(5, 5, |i, j| h.get(i, j) + h.get(j, i));
    let basis = jacobi_eig(&rows_of(&sym)).1;
    let k = 3;
    let v = Element::from_fn(5, k, |i, j| basis[i][j]);
    let lambda = [3.0, 1.5, 0.25];
    let (lmax, p) = gen_eig_max(&z, &v, &lambda).unwrap();
    let c = Element::from_fn(k, k, |a, b| {
        let va = v.column(a);
        let vb = v.column(b);
        let zvb = z.mul_vec(&vb);
        va.iter().zip(&zvb).map(|(x, y)| x * y).sum::<f64>() / (lambda[a] * lambda[b]).sqrt()
    });
    let (values, _) = jacobi_eig(&rows_of(&c));
    assert!((lmax - values[0]).abs() <= 1e-9);
    let norm: f64 = p.iter().zip(&lambda).map(|(x, w)| w * x * x).sum();
    assert!((norm - 1.0).abs() < 1e-10);
}

#[test]
fn dct_examples() {
    let y = dct_apply(&[1.0; 4], DctDirection::Forward);
    assert!((y[0] - 2.0).abs() < 1e-12);
    assert!(y[1..].iter().all(|v| v.abs() < 1e-12));

    let x = normal_vec(&mut rng(4), 9);
    let back = dct_apply(&dct_apply(&x, DctDirection::Forward), DctDirection::Inverse);
    assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));

    let d = dct_matrix(4);
    for i in 0..4 {
        for j in 0..4 {
            let g: f64 = (0..4).map(|k| d.get(i, k) * d.get(j, k)).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-12);
        }
    }
}

#[test]
fn trace_capped_psd_examples() {
    let s = Element::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let p = project_trace_capped_psd(&s, 5.0).unwrap();
    assert!(p.distance(&s) < 1e-12);

    let p = project_trace_capped_psd(&Element::diag(&[-1.0, 2.0]), 5.0).unwrap();
    assert!(p.distance(&Element::diag(&[0.0, 2.0])) < 1e-12);

    let p = project_trace_capped_psd(&Element::diag(&[3.0, 3.0]), 4.0).unwrap();
    assert!(p.distance(&Element::diag(&[2.0, 2.0])) < 1e-12);

    let bad = Element::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
    assert!(matches!(project_trace_capped_psd(&bad, 1.0), Err(Error::NotSymmetric { .. })));
}
