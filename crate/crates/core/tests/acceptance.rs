mod common;

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use atomkit::apps::{
    gen_demix_instance, gen_lasso_instance, gen_matcomp_instance, matcomp_dual, matcomp_primal,
    run_mca_demix, Component,
};
use atomkit::atoms::{
    alignment_residual, gauge_bruteforce, is_supported_by, moreau_decompose, polar_gap,
    TransformMode, FACE_TOL,
};
use atomkit::calculus::{sum_descriptor, sum_gauge_numeric};
use atomkit::linmap::LinearMap;
use atomkit::selftest::PolarKind;
use atomkit::solvers::{
    check_optimality, primal_cg, CgOptions, CgTrace, LeastSquares, ProblemForm,
    SmoothObjective, StepRule,
};
use atomkit::{AtomicSet, Element, Extended};
use common::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn fin(x: Extended) -> f64 {
    x.finite().expect("finite value")
}

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        // Written to the raw stream so the line survives output capture.
        let line = format!("{} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
        std::io::stderr().write_all(line.as_bytes()).unwrap();
        if !ok {
            self.failures.push(name.to_string());
        }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn polar_suite(rep: &mut Report) {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    for kind in PolarKind::ALL {
        let set = kind.set();
        for _ in 0..10_000 {
            let (x, z) = kind.sample(&mut r);
            match polar_gap(&set, &x, &z).unwrap() {
                Some((slack, gs)) => {
                    worst = worst.min(slack / (1.0 + gs));
                    if slack < -1e-10 * (1.0 + gs) {
                        bad.push(kind.name());
                    }
                }
                None => bad.push(kind.name()),
            }
        }
    }
    let t = secs(start.elapsed());
    rep.check(
        "polar inequality suite",
        bad.is_empty() && t < 30.0,
        format!("8 descriptors x 10000 pairs, min scaled slack {worst:.2e}, violations {}, {t:.2}s", bad.len()),
    );
}

fn nonuniqueness(rep: &mut Report) {
    let atoms: Vec<Element> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .map(|&(a, b)| vec_el(&[a, b, 1.0]))
        .collect();
    let x = vec_el(&[0.0, 0.0, 2.0]);
    let set = AtomicSet::finite(atoms.clone()).unwrap();
    let g = fin(set.gauge(&x).unwrap());
    let b = fin(gauge_bruteforce(&atoms, &x, 1e-12).unwrap());
    rep.check(
        "non-uniqueness exactness",
        (g - 2.0).abs() <= 1e-10 && (b - 2.0).abs() <= 1e-10,
        format!("descriptor {g}, bruteforce {b}"),
    );
}

fn random_combination(r: &mut ChaCha8Rng, atoms: &[Element], idx: &[usize]) -> Element {
    let mut x = Element::zeros(atoms[0].rows(), 1);
    for &i in idx {
        x.axpy(0.2 + r.random::<f64>(), &atoms[i]);
    }
    x
}

fn support_identification(rep: &mut Report) {
    let mut r = rng(102);
    let mut counter = 0;
    let mut aligned = 0;
    for trial in 0..500 {
        let d = r.random_range(2..=4);
        let m = r.random_range(d + 1..=7);
        let atoms: Vec<Element> = (0..m).map(|_| vec_el(&normal_vec(&mut r, d))).collect();
        let set = AtomicSet::finite(atoms.clone()).unwrap();
        let (x, z) = match trial % 3 {
            0 => {
                let k = r.random_range(1..=3.min(m));
                let idx: Vec<usize> = (0..k).map(|_| r.random_range(0..m)).collect();
                (random_combination(&mut r, &atoms, &idx), vec_el(&normal_vec(&mut r, d)))
            }
            1 => {
                let z = vec_el(&normal_vec(&mut r, d));
                let best = (0..m)
                    .max_by(|&i, &j| atoms[i].dot(&z).total_cmp(&atoms[j].dot(&z)))
                    .unwrap();
                (random_combination(&mut r, &atoms, &[best]), z)
            }
            _ => {
                // Tie two atoms so the face can hold both.
                let i = r.random_range(0..m);
                let j = (i + 1 + r.random_range(0..m - 1)) % m;
                let mut diff = atoms[i].clone();
                diff.axpy(-1.0, &atoms[j]);
                let mut z = vec_el(&normal_vec(&mut r, d));
                z.axpy(-z.dot(&diff) / diff.dot(&diff), &diff);
                (random_combination(&mut r, &atoms, &[i, j]), z)
            }
        };
        let gamma = fin(gauge_bruteforce(&atoms, &x, 1e-12).unwrap());
        let sigma = atoms.iter().map(|a| a.dot(&z)).fold(0.0, f64::max);
        let residual = gamma * sigma - x.dot(&z);
        let face = set.expose(&z, m, 1e-9).unwrap();
        let decomp = set.decompose(&x, 1e-12).unwrap();
        let supported = is_supported_by(&decomp, &face, 1e-9);
        if (residual <= 1e-9) != supported {
            counter += 1;
        }
        aligned += usize::from(supported);
    }
    rep.check(
        "support identification equivalence",
        counter == 0,
        format!("500 trials, {aligned} aligned, {counter} counterexamples"),
    );
}

fn property_suite(rep: &mut Report) {
    let mut r = rng(103);
    let l1 = AtomicSet::signed_basis(4);
    let linf = AtomicSet::inf_ball(4);
    let mut polarity = 0.0_f64;
    for _ in 0..1000 {
        let z = vec_el(&normal_vec(&mut r, 4));
        let n1: f64 = z.as_slice().iter().map(|v| v.abs()).sum();
        let ninf = z.as_slice().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        polarity = polarity
            .max((fin(l1.support(&z).unwrap()) - ninf).abs())
            .max((fin(linf.gauge(&z).unwrap()) - ninf).abs())
            .max((fin(linf.support(&z).unwrap()) - n1).abs())
            .max((fin(l1.gauge(&z).unwrap()) - n1).abs());
    }
    let nuc = AtomicSet::nuclear_ball(4, 3);
    let mut spectral = 0.0_f64;
    for _ in 0..200 {
        let z = normal_element(&mut r, 4, 3);
        let (sv, _) = jacobi_svd(&rows_of(&z));
        let dense = fin(nuc.support(&z).unwrap());
        let total: f64 = sv.iter().sum();
        spectral = spectral
            .max((dense - sv[0]).abs() / sv[0])
            .max((fin(nuc.gauge(&z).unwrap()) - total).abs() / total);
    }

    let m = Element::from_fn(4, 4, |i, j| if i == j { 2.0 } else { 0.0 } + 0.5 * normal(&mut r));
    let mut transform = 0.0_f64;
    for base in [AtomicSet::signed_basis(4), AtomicSet::euclidean_ball(4)] {
        let image = base.clone().transform(LinearMap::dense(m.clone()), TransformMode::Image).unwrap();
        let pre = base.clone().transform(LinearMap::dense(m.clone()), TransformMode::Preimage).unwrap();
        for _ in 0..500 {
            let p = vec_el(&normal_vec(&mut r, 4));
            let mt = vec_el(&m.tmul_vec(p.as_slice()));
            let mp = vec_el(&m.mul_vec(p.as_slice()));
            let want = fin(base.support(&mt).unwrap());
            transform = transform.max((fin(image.support(&p).unwrap()) - want).abs() / (1.0 + want.abs()));
            let want = fin(base.gauge(&mp).unwrap());
            transform = transform.max((fin(pre.gauge(&p).unwrap()) - want).abs() / (1.0 + want.abs()));
        }
    }

    let mut scaling = 0.0_f64;
    for base in [AtomicSet::signed_basis(4), AtomicSet::euclidean_ball(4)] {
        for _ in 0..100 {
            let alpha = 0.1 + 3.0 * r.random::<f64>();
            let scaled = base.clone().scaled(alpha).unwrap();
            let p = vec_el(&normal_vec(&mut r, 4));
            let g = fin(base.gauge(&p).unwrap());
            let s = fin(base.support(&p).unwrap());
            scaling = scaling
                .max((fin(scaled.gauge(&p).unwrap()) - g / alpha).abs() / (1.0 + g))
                .max((fin(scaled.support(&p).unwrap()) - alpha * s).abs() / (1.0 + s));
        }
    }

    let tv = AtomicSet::total_variation(5).unwrap();
    let ones = vec_el(&[1.0; 5]);
    let mut recession = true;
    for _ in 0..100 {
        let c = 3.0 * normal(&mut r);
        let x = vec_el(&normal_vec(&mut r, 5));
        let mut shifted = x.clone();
        shifted.axpy(c, &ones);
        let mut z = vec_el(&normal_vec(&mut r, 5));
        recession &= fin(tv.gauge(&ones.scale(c)).unwrap()) == 0.0;
        recession &= (fin(tv.gauge(&shifted).unwrap()) - fin(tv.gauge(&x).unwrap())).abs() <= 1e-10;
        recession &= tv.support(&z).unwrap().is_infinite();
        let mean = z.sum() / 5.0;
        z = z.map(|v| v - mean);
        recession &= tv.support(&z).unwrap().is_finite();
    }

    rep.check(
        "gauge and support identities",
        polarity <= 1e-12 && spectral <= 1e-10 && transform <= 1e-10 && scaling <= 1e-12 && recession,
        format!(
            "polarity {polarity:.1e}, spectral {spectral:.1e}, transforms {transform:.1e}, scaling {scaling:.1e}, recession {recession}"
        ),
    );
}

fn orthonormal_columns(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < cols {
        let mut w = normal_vec(r, rows);
        for _ in 0..2 {
            for q in &out {
                let c: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                for (a, b) in w.iter_mut().zip(q) {
                    *a -= c * b;
                }
            }
        }
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        out.push(w.iter().map(|a| a / n).collect());
    }
    out
}

fn from_svd(u: &[Vec<f64>], v: &[Vec<f64>], s: &[f64]) -> Element {
    let mut x = Element::zeros(u[0].len(), v[0].len());
    for (k, &sk) in s.iter().enumerate() {
        if sk != 0.0 {
            x.axpy(sk, &Element::outer(&u[k], &v[k]));
        }
    }
    x
}

fn nuclear_alignment(rep: &mut Report) {
    let mut r = rng(104);
    let set = AtomicSet::nuclear_ball(5, 4);
    let mut worst = 0.0_f64;
    let mut inclusion = 0;
    let mut permuted_min = f64::INFINITY;
    for _ in 0..100 {
        let rank = r.random_range(1..=3);
        let d = r.random_range(rank..=3);
        let u = orthonormal_columns(&mut r, 5, 4);
        let v = orthonormal_columns(&mut r, 4, 4);
        let mut sz = vec![3.0; 4];
        let mut tail: Vec<f64> = (d..4).map(|_| 0.5 + 2.0 * r.random::<f64>()).collect();
        tail.sort_by(|a, b| b.total_cmp(a));
        sz[d..].copy_from_slice(&tail);
        let mut sx = vec![0.0; 4];
        for s in sx.iter_mut().take(rank) {
            *s = 0.5 + r.random::<f64>();
        }
        let x = from_svd(&u, &v, &sx);
        let z = from_svd(&u, &v, &sz);
        let nuclear: f64 = sx.iter().sum();
        let res = alignment_residual(&set, &x, &z).unwrap();
        worst = worst.max(res / (3.0 * nuclear));
        let face = set.expose(&z, 4, 1e-9).unwrap();
        let decomp = set.decompose(&x, 1e-12).unwrap();
        inclusion += usize::from(is_supported_by(&decomp, &face, 1e-9));

        let reversed: Vec<f64> = sz.iter().rev().copied().collect();
        let zp = from_svd(&u, &v, &reversed);
        permuted_min = permuted_min.min(alignment_residual(&set, &x, &zp).unwrap());
    }
    rep.check(
        "nuclear alignment",
        worst <= 1e-8 && inclusion == 100 && permuted_min > 1e-3,
        format!(
            "max residual/scale {worst:.1e}, inclusion {inclusion}/100, min permuted residual {permuted_min:.3}"
        ),
    );
}

fn cg_options(step: StepRule, eps: f64, max_iter: usize) -> CgOptions {
    CgOptions {
        eps: Some(eps),
        max_iter,
        step,
        ..CgOptions::default()
    }
}

fn lasso(rep: &mut Report, traces: &mut Vec<(String, CgTrace)>) {
    let start = Instant::now();
    let inst = gen_lasso_instance(10, 20, 2, 0.0, 1).unwrap();
    let obj = inst.objective().unwrap();
    let set = inst.set();
    let res = primal_cg(&obj, &set, inst.tau, &cg_options(StepRule::Away, 1e-10, 500)).unwrap();
    let t = secs(start.elapsed());
    let grad = obj.grad(&res.x).unwrap();
    let report =
        check_optimality(&set, &res.x, &grad, ProblemForm::GaugeConstrained { alpha: inst.tau }, 1e-6)
            .unwrap();
    let face = set.expose(&grad.scale(-1.0), 20, FACE_TOL).unwrap();
    let decomp = set.decompose(&res.x, 1e-12).unwrap();
    let inside = is_supported_by(&decomp, &face, 1e-9);
    rep.check(
        "lasso desk instance",
        res.gap <= 1e-4 && res.trace.steps() <= 500 && report.passed && inside && t < 5.0,
        format!(
            "gap {:.1e} after {} steps, optimality {}, support {} atoms inside face of {}, {t:.3}s",
            res.gap,
            res.trace.steps(),
            report.passed,
            decomp.terms.len(),
            face.atoms.len()
        ),
    );
    traces.push(("lasso away".into(), res.trace));
    for (name, rule) in [("lasso exact", StepRule::Exact), ("lasso harmonic", StepRule::Harmonic)] {
        let res = primal_cg(&obj, &set, inst.tau, &cg_options(rule, 1e-10, 500)).unwrap();
        traces.push((name.into(), res.trace));
    }
}

fn synthetic_traces(traces: &mut Vec<(String, CgTrace)>) {
    let mut r = rng(105);
    for trial in 0..20 {
        let (set, shape) = match trial % 4 {
            0 => (AtomicSet::signed_basis(6), (6, 1)),
            1 => (AtomicSet::euclidean_ball(6), (6, 1)),
            2 => (AtomicSet::inf_ball(6), (6, 1)),
            _ => (AtomicSet::nuclear_ball(4, 3), (4, 3)),
        };
        let n = shape.0 * shape.1;
        let rows = 4 + trial % 5;
        let a = Element::from_fn(rows, n, |_, _| normal(&mut r));
        let b = vec_el(&normal_vec(&mut r, rows));
        let map = if shape.1 == 1 {
            LinearMap::dense(a)
        } else {
            LinearMap::Identity
        };
        let obj = if shape.1 == 1 {
            LeastSquares::new(map, b, shape).unwrap()
        } else {
            LeastSquares::distance_to(normal_element(&mut r, 4, 3).scale(2.0))
        };
        let step = [StepRule::Exact, StepRule::Harmonic, StepRule::Away][trial % 3];
        if step == StepRule::Away && shape.1 != 1 {
            continue;
        }
        let tau = 0.5 + r.random::<f64>();
        let res = primal_cg(&obj, &set, tau, &cg_options(step, 1e-12, 200)).unwrap();
        traces.push((format!("random {trial}"), res.trace));
    }
}

fn gap_bound(rep: &mut Report, traces: &[(String, CgTrace)]) {
    let mut records = 0;
    let mut violations = Vec::new();
    for (name, trace) in traces {
        let f_min = trace.records.iter().map(|c| c.objective).fold(f64::INFINITY, f64::min);
        for c in &trace.records {
            records += 1;
            if c.gap < c.objective - f_min - 1e-10 {
                violations.push(format!("{name} k={}", c.k));
            }
        }
    }
    rep.check(
        "gap bound on recorded traces",
        violations.is_empty(),
        format!("{} traces, {records} records, violations {violations:?}", traces.len()),
    );
}

fn matcomp(rep: &mut Report, traces: &mut Vec<(String, CgTrace)>) {
    let inst = gen_matcomp_instance(100, 100, 0.10, 0.1, 7).unwrap();
    let start = Instant::now();
    let p = matcomp_primal(&inst, 10).unwrap();
    let d = matcomp_dual(&inst, 10, 4).unwrap();
    let t = secs(start.elapsed());
    let agree = (p.residual - d.residual).abs() <= 0.01 * p.residual;
    let mut stop = 0.0_f64;
    let same_len = p.trace.records.len() == d.trace.records.len();
    for (a, b) in p.trace.records.iter().zip(&d.trace.records) {
        stop = stop.max((a.gap - b.gap).abs() / a.gap.abs().max(f64::MIN_POSITIVE));
    }
    rep.check(
        "matrix completion 100x100",
        agree && same_len && stop <= 1e-8 && d.rank <= p.rank && t < 10.0,
        format!(
            "residuals {:.6} / {:.6}, stop-test rel diff {stop:.1e}, ranks {} / {}, {t:.2}s",
            p.residual, d.residual, p.rank, d.rank
        ),
    );
    traces.push(("matcomp primal".into(), p.trace));
    traces.push(("matcomp dual".into(), d.trace));
}

fn moreau(rep: &mut Report) {
    let mut r = rng(106);
    let mut recon = 0.0_f64;
    let mut align = 0.0_f64;
    for set in [AtomicSet::euclidean_ball(3), AtomicSet::signed_basis(3)] {
        for _ in 0..100 {
            let s = vec_el(&normal_vec(&mut r, 3).iter().map(|v| 2.0 * v).collect::<Vec<_>>());
            let alpha = 2.0 * normal(&mut r);
            let parts = moreau_decompose(&set, &s, alpha).unwrap();
            let (back, a) = parts.reconstruct();
            recon = recon.max(back.distance(&s)).max((a - alpha).abs());
            let kx = parts.x.scale(parts.alpha_x);
            let kz = parts.z.scale(parts.alpha_z);
            align = align.max(alignment_residual(&set, &kx, &kz).unwrap().abs());
        }
    }
    rep.check(
        "moreau decomposition",
        recon <= 1e-8 && align <= 1e-8,
        format!("200 pairs, reconstruction {recon:.1e}, alignment {align:.1e}"),
    );
}

fn planar_part(kind: usize, alpha: f64) -> (AtomicSet, Box<dyn Fn(f64, f64) -> f64>) {
    let (set, g): (AtomicSet, Box<dyn Fn(f64, f64) -> f64>) = match kind {
        0 => (AtomicSet::signed_basis(2), Box::new(|a: f64, b: f64| a.abs() + b.abs())),
        1 => (AtomicSet::euclidean_ball(2), Box::new(|a: f64, b: f64| a.hypot(b))),
        _ => (AtomicSet::inf_ball(2), Box::new(|a: f64, b: f64| a.abs().max(b.abs()))),
    };
    (set.scaled(alpha).unwrap(), Box::new(move |a, b| g(a, b) / alpha))
}

fn polar_convolution(rep: &mut Report) {
    let mut r = rng(107);
    let parts = vec![AtomicSet::signed_basis(3), AtomicSet::euclidean_ball(3), AtomicSet::inf_ball(3)];
    let sum = sum_descriptor(parts.clone()).unwrap();
    let mut additivity = 0.0_f64;
    for _ in 0..1000 {
        let z = vec_el(&normal_vec(&mut r, 3));
        let want: f64 = parts.iter().map(|p| fin(p.support(&z).unwrap())).sum();
        additivity = additivity.max((fin(sum.support(&z).unwrap()) - want).abs() / (1.0 + want));
    }

    let tol = 1e-9;
    let mut oracle = 0.0_f64;
    let mut inherit = 0.0_f64;
    for _ in 0..20 {
        let k1 = r.random_range(0..3);
        let k2 = r.random_range(0..3);
        let (p1, g1) = planar_part(k1, 0.5 + 1.5 * r.random::<f64>());
        let (p2, g2) = planar_part(k2, 0.5 + 1.5 * r.random::<f64>());
        let pair = [p1, p2];

        let x = vec_el(&normal_vec(&mut r, 2));
        let s = sum_gauge_numeric(&pair, &x, tol).unwrap();
        let grid = grid_sum_gauge(&g1, &g2, (x.as_slice()[0], x.as_slice()[1]));
        oracle = oracle.max((s.value - grid).abs());

        // x = t(a1 + a2) with a_i exposed by z is aligned with z in the sum.
        let z = vec_el(&normal_vec(&mut r, 2));
        let t = 0.5 + r.random::<f64>();
        let mut x = Element::zeros(2, 1);
        for p in &pair {
            x.axpy(t, &p.expose(&z, 1, 1e-12).unwrap().atoms[0].element);
        }
        let s = sum_gauge_numeric(&pair, &x, tol).unwrap();
        for (p, xi) in pair.iter().zip(&s.split) {
            let g = fin(p.gauge(xi).unwrap());
            let sigma = fin(p.support(&z).unwrap());
            inherit = inherit.max(alignment_residual(p, xi, &z).unwrap() / (1.0 + g * sigma));
        }
    }
    rep.check(
        "polar convolution",
        additivity <= 1e-12 && oracle <= 1e-4 && inherit <= 10.0 * tol,
        format!(
            "support additivity {additivity:.1e}, grid oracle {oracle:.1e}, split alignment {inherit:.1e} (tol {tol:.0e})"
        ),
    );
}

fn demixing(rep: &mut Report) {
    let start = Instant::now();
    let clean = gen_demix_instance(64, 0.0, 1, 0.0, 1).unwrap();
    let tau = 1.1 * clean.planted_gauges().unwrap()[1];
    let sane = run_mca_demix(&clean, tau, 500).unwrap();
    let sanity = sane.x2.distance(&clean.x_l) / clean.x_l.norm();

    let inst = gen_demix_instance(64, 0.02, 2, 0.02, 1).unwrap();
    let full_start = Instant::now();
    let res = run_mca_demix(&inst, inst.default_tau().unwrap(), 500).unwrap();
    let t_full = secs(full_start.elapsed());
    let mut worst = 0.0_f64;
    for c in Component::ALL {
        let set = c.atoms(64);
        let x = res.component(c);
        let g = fin(set.gauge(x).unwrap());
        let sigma = fin(set.support(&res.z_star).unwrap());
        worst = worst.max(alignment_residual(&set, x, &res.z_star).unwrap() / (1.0 + g * sigma));
    }
    let m = &res.metrics;
    let t = secs(start.elapsed());
    rep.check(
        "demixing 64x64",
        sanity <= 1e-3 && worst <= 1e-6 && m.stage2_objective <= m.stage1_bound && t_full < 60.0,
        format!(
            "sanity error {sanity:.1e}, max alignment/scale {worst:.1e}, stage-2 {:.3e} vs bound {:.3e}, {t_full:.1}s ({t:.1}s total)",
            m.stage2_objective, m.stage1_bound
        ),
    );
}

fn cli_determinism(rep: &mut Report) {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_atomkit"))
            .args(["bench", "matcomp", "--sizes", "100", "--seed", "7", "--no-time"])
            .env_remove("ATOMKIT_SEED")
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    rep.check(
        "cli determinism",
        ok,
        format!("{} bytes, identical {}", a.stdout.len(), a.stdout == b.stdout),
    );
}

#[test]
fn acceptance_criteria() {
    let mut rep = Report { failures: Vec::new() };
    let mut traces = Vec::new();
    polar_suite(&mut rep);
    nonuniqueness(&mut rep);
    support_identification(&mut rep);
    property_suite(&mut rep);
    nuclear_alignment(&mut rep);
    lasso(&mut rep, &mut traces);
    matcomp(&mut rep, &mut traces);
    synthetic_traces(&mut traces);
    gap_bound(&mut rep, &traces);
    moreau(&mut rep);
    polar_convolution(&mut rep);
    demixing(&mut rep);
    cli_determinism(&mut rep);
    assert!(rep.failures.is_empty(), "failed: {:?}", rep.failures);
}
