//! Quick property suites run by `atomkit selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::apps::{gen_lasso_instance, gen_matcomp_instance, matcomp_dual, matcomp_primal};
use crate::atoms::{alignment_residual, gauge_bruteforce, moreau_decompose, polar_gap, AtomicSet};
use crate::calculus::sum_descriptor;
use crate::element::{Element, Extended};
use crate::error::Result;
use crate::linalg::{dct_apply, project_trace_capped_psd, DctDirection};
use crate::solvers::{check_optimality, primal_cg, CgOptions, ProblemForm, SmoothObjective, StepRule};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

pub const SUITES: [&str; 8] = [
    "dct",
    "polar",
    "nonuniqueness",
    "projection",
    "moreau",
    "convolution",
    "lasso",
    "matcomp",
];

/// Concrete sets with samplers for pairs `(x, z)` where both `γ(x)` and `σ(z)` are finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarKind {
    SignedBasis,
    NuclearBall,
    Subspace,
    TotalVariation,
    GroupNorm,
    OverlappingGroupNorm,
    Spectrahedron,
    WeightedSpectrahedron,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn normal_element(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Element {
    Element::from_fn(rows, cols, |_, _| normal(rng))
}

/// `G Gᵀ` for a Gaussian `n × k` factor.
fn random_psd(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Element {
    let g = normal_element(rng, n, k);
    g.matmul(&g.transpose()).expect("shapes").symmetrize()
}

const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn subspace_basis() -> Element {
    let s3 = 1.0 / 3f64.sqrt();
    Element::from_rows(&[
        vec![S2, 0.0],
        vec![S2, 0.0],
        vec![0.0, s3],
        vec![0.0, s3],
        vec![0.0, s3],
    ])
    .expect("rows")
}

/// Columns `(e₁ + e₂)/√2` and `e₃` of `R⁴`, and an orthonormal complement.
fn weighted_factors() -> (Element, Element) {
    let v = Element::from_rows(&[vec![S2, 0.0], vec![S2, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]])
        .expect("rows");
    let null = Element::from_rows(&[vec![S2, 0.0], vec![-S2, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]])
        .expect("rows");
    (v, null)
}

fn congruence(q: &Element, m: &Element) -> Element {
    q.matmul(m)
        .and_then(|qm| qm.matmul(&q.transpose()))
        .expect("shapes")
        .symmetrize()
}

impl PolarKind {
    pub const ALL: [PolarKind; 8] = [
        PolarKind::SignedBasis,
        PolarKind::NuclearBall,
        PolarKind::Subspace,
        PolarKind::TotalVariation,
        PolarKind::GroupNorm,
        PolarKind::OverlappingGroupNorm,
        PolarKind::Spectrahedron,
        PolarKind::WeightedSpectrahedron,
    ];

    pub fn set(&self) -> AtomicSet {
        match self {
            PolarKind::SignedBasis => AtomicSet::signed_basis(5),
            PolarKind::NuclearBall => AtomicSet::nuclear_ball(4, 3),
            PolarKind::Subspace => AtomicSet::subspace(subspace_basis()).expect("orthonormal"),
            PolarKind::TotalVariation => AtomicSet::total_variation(5).expect("n >= 2"),
            PolarKind::GroupNorm => {
                AtomicSet::group_norm(5, vec![vec![0, 1], vec![2, 3, 4]]).expect("groups")
            }
            PolarKind::OverlappingGroupNorm => {
                AtomicSet::group_norm(5, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4]])
                    .expect("groups")
            }
            PolarKind::Spectrahedron => AtomicSet::spectrahedron(3),
            PolarKind::WeightedSpectrahedron => {
                AtomicSet::weighted_spectrahedron(weighted_factors().0, vec![2.0, 0.5])
                    .expect("factors")
            }
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (Element, Element) {
        match self {
            PolarKind::SignedBasis
            | PolarKind::GroupNorm
            | PolarKind::OverlappingGroupNorm => (normal_element(rng, 5, 1), normal_element(rng, 5, 1)),
            PolarKind::NuclearBall => (normal_element(rng, 4, 3), normal_element(rng, 4, 3)),
            PolarKind::Subspace => {
                let q = subspace_basis();
                let x = Element::vector(q.mul_vec(&[normal(rng), normal(rng)]));
                let w = normal_element(rng, 5, 1);
                let mut z = w.clone();
                z.axpy(-1.0, &Element::vector(q.mul_vec(&q.tmul_vec(w.as_slice()))));
                (x, z)
            }
            PolarKind::TotalVariation => {
                let x = normal_element(rng, 5, 1);
                let mut z = normal_element(rng, 5, 1);
                let mean = z.sum() / 5.0;
                z = z.map(|v| v - mean);
                (x, z)
            }
            PolarKind::Spectrahedron => {
                let k = rng.random_range(1..=3);
                (random_psd(rng, 3, k), normal_element(rng, 3, 3).symmetrize())
            }
            PolarKind::WeightedSpectrahedron => {
                let (v, null) = weighted_factors();
                let mut x = congruence(&v, &random_psd(rng, 2, 2));
                x.axpy(1.0, &congruence(&null, &random_psd(rng, 2, 1)));
                let mut z = normal_element(rng, 4, 4).symmetrize();
                // Make the null-space block of `z` negative semidefinite.
                let block = congruence(&null.transpose(), &z);
                z.axpy(-1.0, &congruence(&null, &block));
                z.axpy(-1.0, &congruence(&null, &random_psd(rng, 2, 2)));
                (x, z)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolarKind::SignedBasis => "signed_basis",
            PolarKind::NuclearBall => "nuclear_ball",
            PolarKind::Subspace => "subspace",
            PolarKind::TotalVariation => "total_variation",
            PolarKind::GroupNorm => "group_norm",
            PolarKind::OverlappingGroupNorm => "overlapping_group_norm",
            PolarKind::Spectrahedron => "spectrahedron",
            PolarKind::WeightedSpectrahedron => "weighted_spectrahedron",
        }
    }
}

fn count(checks: impl IntoIterator<Item = bool>) -> (usize, usize) {
    checks
        .into_iter()
        .fold((0, 0), |(p, t), ok| (p + ok as usize, t + 1))
}

fn dct_suite(rng: &mut ChaCha8Rng) -> (usize, usize) {
    count((2..=64).map(|n| {
        let x: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        let y = dct_apply(&dct_apply(&x, DctDirection::Forward), DctDirection::Inverse);
        x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-12)
    }))
}

fn polar_suite(rng: &mut ChaCha8Rng, per_kind: usize) -> (usize, usize) {
    let mut checks = Vec::new();
    for kind in PolarKind::ALL {
        let set = kind.set();
        for _ in 0..per_kind {
            let (x, z) = kind.sample(rng);
            checks.push(matches!(
                polar_gap(&set, &x, &z),
                Ok(Some((slack, gs))) if slack >= -1e-10 * (1.0 + gs)
            ));
        }
    }
    count(checks)
}

fn nonuniqueness_suite() -> (usize, usize) {
    let atoms: Vec<Element> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .map(|&(a, b)| Element::vector(vec![a, b, 1.0]))
        .collect();
    let x = Element::vector(vec![0.0, 0.0, 2.0]);
    let near_two = |g: Result<Extended>| matches!(g, Ok(Extended::Finite(v)) if (v - 2.0).abs() <= 1e-10);
    let set = AtomicSet::finite(atoms.clone()).expect("atoms");
    count([near_two(set.gauge(&x)), near_two(gauge_bruteforce(&atoms, &x, 1e-12))])
}

fn projection_suite(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let close = |p: Result<Element>, want: &[f64]| {
        matches!(p, Ok(p) if p.distance(&Element::diag(want)) <= 1e-10)
    };
    let mut checks = vec![
        close(project_trace_capped_psd(&Element::diag(&[1.0, 2.0]), 5.0), &[1.0, 2.0]),
        close(project_trace_capped_psd(&Element::diag(&[-1.0, 2.0]), 5.0), &[0.0, 2.0]),
        close(project_trace_capped_psd(&Element::diag(&[3.0, 3.0]), 4.0), &[2.0, 2.0]),
    ];
    for _ in 0..20 {
        let s = normal_element(rng, 4, 4).symmetrize();
        let tau = 0.5 + rng.random::<f64>();
        checks.push(match project_trace_capped_psd(&s, tau) {
            Ok(p) => {
                let min_eig = crate::linalg::dense_sym_eig(&p)
                    .map(|e| e.values.last().copied().unwrap_or(0.0))
                    .unwrap_or(f64::NAN);
                min_eig >= -1e-10 && p.trace() <= tau + 1e-10
            }
            Err(_) => false,
        });
    }
    count(checks)
}

fn moreau_suite(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut checks = Vec::new();
    for set in [AtomicSet::euclidean_ball(4), AtomicSet::signed_basis(4)] {
        for _ in 0..10 {
            let s = normal_element(rng, 4, 1);
            let alpha = normal(rng);
            checks.push(match moreau_decompose(&set, &s, alpha) {
                Ok(parts) => {
                    let (r, a) = parts.reconstruct();
                    let err = (r.distance(&s).powi(2) + (a - alpha).powi(2)).sqrt();
                    let aligned = parts.alpha_x == 0.0
                        || parts.alpha_z == 0.0
                        || alignment_residual(&set, &parts.x, &parts.z).is_ok_and(|v| v <= 1e-8);
                    err <= 1e-8 && aligned
                }
                Err(_) => false,
            });
        }
    }
    count(checks)
}

fn convolution_suite(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let parts = vec![
        AtomicSet::signed_basis(3),
        AtomicSet::euclidean_ball(3),
        AtomicSet::inf_ball(3),
    ];
    let sum = sum_descriptor(parts.clone()).expect("parts");
    count((0..50).map(|_| {
        let z = normal_element(rng, 3, 1);
        let total: f64 = parts
            .iter()
            .map(|p| p.support(&z).map(Extended::to_f64).unwrap_or(f64::NAN))
            .sum();
        sum.support(&z)
            .is_ok_and(|s| (s.to_f64() - total).abs() <= 1e-12 * (1.0 + total))
    }))
}

fn lasso_suite() -> Result<(usize, usize)> {
    let inst = gen_lasso_instance(10, 20, 2, 0.0, 1)?;
    let obj = inst.objective()?;
    let opts = CgOptions {
        eps: Some(1e-10),
        max_iter: 500,
        step: StepRule::Away,
        ..CgOptions::default()
    };
    let r = primal_cg(&obj, &inst.set(), inst.tau, &opts)?;
    let report = check_optimality(
        &inst.set(),
        &r.x,
        &obj.grad(&r.x)?,
        ProblemForm::GaugeConstrained { alpha: inst.tau },
        1e-6,
    )?;
    Ok(count([r.gap <= 1e-4, report.passed]))
}

fn matcomp_suite(seed: u64) -> Result<(usize, usize)> {
    let inst = gen_matcomp_instance(100, 100, 0.10, 0.1, seed)?;
    let p = matcomp_primal(&inst, 10)?;
    let d = matcomp_dual(&inst, 10, 4)?;
    let agree = (p.residual - d.residual).abs() <= 0.01 * p.residual;
    Ok(count([agree, d.rank <= p.rank]))
}

/// Runs every suite whose name contains `filter`.
pub fn run_selftest(filter: Option<&str>, seed: u64) -> Result<Vec<SuiteReport>> {
    let mut reports = Vec::new();
    for name in SUITES {
        if filter.is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (passed, total) = match name {
            "dct" => dct_suite(&mut rng),
            "polar" => polar_suite(&mut rng, 100),
            "nonuniqueness" => nonuniqueness_suite(),
            "projection" => projection_suite(&mut rng),
            "moreau" => moreau_suite(&mut rng),
            "convolution" => convolution_suite(&mut rng),
            "lasso" => lasso_suite()?,
            _ => matcomp_suite(seed)?,
        };
        reports.push(SuiteReport { name, passed, total });
    }
    Ok(reports)
}
