//! Low-rank matrix completion benchmark.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::atoms::AtomicSet;
use crate::element::{Element, MaskedMatrix};
use crate::error::{Error, Result};
use crate::linalg::dense_svd;
use crate::linmap::LinearMap;
use crate::solvers::{
    dual_cg_least_squares, primal_cg, psd_reduced_solve, CgOptions, CgTrace, DualOptions,
    LeastSquares, Start, StepRule,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MatCompInstance {
    /// Observed entries of `B = Ω∘(U Vᵀ + noise·N)`.
    pub b: MaskedMatrix,
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub density: f64,
    pub noise: f64,
    pub seed: u64,
    /// Nuclear norm of the planted `U Vᵀ`.
    pub planted_nuclear: f64,
}

impl MatCompInstance {
    /// The sampling pattern `Ω`.
    pub fn omega(&self) -> &MaskedMatrix {
        &self.b
    }

    pub fn objective(&self) -> Result<LeastSquares> {
        LeastSquares::new(
            LinearMap::Mask(self.b.clone()),
            Element::vector(self.b.values()),
            (self.m, self.n),
        )
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut *rng))
}

/// Random completion instance: `r = max(1, round(m/100))`, Gaussian factors and noise,
/// mask of `round(density·m·n)` entries sampled without replacement.
pub fn gen_matcomp_instance(
    m: usize,
    n: usize,
    density: f64,
    noise: f64,
    seed: u64,
) -> Result<MatCompInstance> {
    if m < 10 || n < 10 {
        return Err(Error::InvalidArgument(format!("sizes must be at least 10, got {m}x{n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::BadDensity(density));
    }
    let rank = ((m as f64 / 100.0).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = normal_matrix(&mut rng, m, rank);
    let v = normal_matrix(&mut rng, n, rank);
    let count = ((density * (m * n) as f64).round() as usize).clamp(1, m * n);
    let mut picks = rand::seq::index::sample(&mut rng, m * n, count).into_vec();
    picks.sort_unstable();
    let entries = picks
        .into_iter()
        .map(|p| {
            let (i, j) = (p / n, p % n);
            let planted: f64 = (0..rank).map(|k| u[(i, k)] * v[(j, k)]).sum();
            let eta: f64 = StandardNormal.sample(&mut rng);
            (i, j, planted + noise * eta)
        })
        .collect();
    let b = MaskedMatrix::new(m, n, entries)?;
    // Singular values of U Vᵀ are those of R_u R_vᵀ.
    let core = Element::from_dmatrix(&(u.qr().r() * v.qr().r().transpose()));
    let planted_nuclear = dense_svd(&core)?.iter().map(|t| t.sigma).sum();
    Ok(MatCompInstance {
        b,
        m,
        n,
        rank,
        density,
        noise,
        seed,
        planted_nuclear,
    })
}

/// Smallest `k` with `sqrt(Σ_{i≤k} σᵢ²) ≥ 0.9 ‖σ‖₂`.
pub fn estimate_rank_90(singular_values: &[f64]) -> Result<usize> {
    let mut s: Vec<f64> = singular_values.iter().map(|x| x.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let target = 0.81 * total;
    let mut acc = 0.0;
    for (k, x) in s.iter().enumerate() {
        acc += x * x;
        if acc >= target {
            return Ok(k + 1);
        }
    }
    Ok(s.len())
}

pub fn estimate_rank_90_matrix(x: &Element) -> Result<usize> {
    let sv: Vec<f64> = dense_svd(x)?.into_iter().map(|t| t.sigma).collect();
    estimate_rank_90(&sv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub residual_primal: f64,
    pub rank_primal: usize,
    pub time_primal_s: f64,
    pub residual_dual: f64,
    pub rank_dual: usize,
    pub time_dual_s: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "size,residual_primal,rank_primal,time_primal_s,residual_dual,rank_dual,time_dual_s";
    pub const CSV_HEADER_NO_TIME: &'static str =
        "size,residual_primal,rank_primal,residual_dual,rank_dual";

    pub fn to_csv(&self, with_time: bool) -> String {
        if with_time {
            format!(
                "{},{},{},{},{},{},{}",
                self.size,
                self.residual_primal,
                self.rank_primal,
                self.time_primal_s,
                self.residual_dual,
                self.rank_dual,
                self.time_dual_s
            )
        } else {
            format!(
                "{},{},{},{},{}",
                self.size, self.residual_primal, self.rank_primal, self.residual_dual, self.rank_dual
            )
        }
    }
}

pub fn bench_csv(rows: &[BenchRow], with_time: bool) -> String {
    let mut out = String::from(if with_time {
        BenchRow::CSV_HEADER
    } else {
        BenchRow::CSV_HEADER_NO_TIME
    });
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv(with_time));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalRun {
    pub x: Element,
    pub residual: f64,
    pub rank: usize,
    pub trace: CgTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualRun {
    pub residual: f64,
    pub rank: usize,
    pub u: Element,
    pub v: Element,
    pub s: Element,
    pub trace: CgTrace,
}

fn rank_or_zero(r: Result<usize>) -> Result<usize> {
    match r {
        Err(Error::ZeroMatrix) => Ok(0),
        other => other,
    }
}

/// Primal conditional gradient from the origin with exact linesearch, `iters` steps.
pub fn matcomp_primal(inst: &MatCompInstance, iters: usize) -> Result<PrimalRun> {
    let obj = inst.objective()?;
    let set = AtomicSet::nuclear_ball(inst.m, inst.n);
    let opts = CgOptions {
        eps: Some(0.0),
        max_iter: iters,
        step: StepRule::Exact,
        start: Start::Origin,
        ..CgOptions::default()
    };
    let r = primal_cg(&obj, &set, inst.planted_nuclear, &opts)?;
    let residual = obj.residual(&r.x)?.norm();
    let rank = rank_or_zero(estimate_rank_90_matrix(&r.x))?;
    Ok(PrimalRun {
        x: r.x,
        residual,
        rank,
        trace: r.trace,
    })
}

/// Dual conditional gradient, then recovery on the top-`ell` singular subspaces of the
/// final certificate.
pub fn matcomp_dual(inst: &MatCompInstance, iters: usize, ell: usize) -> Result<DualRun> {
    let omega = inst.omega();
    let map = LinearMap::Mask(omega.clone());
    let b = Element::vector(omega.values());
    let set = AtomicSet::nuclear_ball(inst.m, inst.n);
    let tau = inst.planted_nuclear;
    let opts = DualOptions {
        eps: Some(0.0),
        max_iter: iters,
        face_k: ell.max(1),
        // Keep the top `ell` singular pairs regardless of their gap to the maximum.
        face_tol: 1.0,
    };
    let r = dual_cg_least_squares(&map, &b, &set, tau, &opts)?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = r
        .certificate
        .exposed
        .atoms
        .iter()
        .filter_map(|a| match &a.tag {
            crate::atoms::AtomTag::RankOne { u, v } => Some((u.clone(), v.clone())),
            _ => None,
        })
        .collect();
    let l = pairs.len();
    let u = Element::from_fn(inst.m, l, |i, j| pairs[j].0[i]);
    let v = Element::from_fn(inst.n, l, |i, j| pairs[j].1[i]);
    let s = psd_reduced_solve(&u, &v, omega, b.as_slice(), tau)?;
    let eig = crate::linalg::dense_sym_eig(&s)?;
    let rank = rank_or_zero(estimate_rank_90(&eig.values))?;
    Ok(DualRun {
        residual: r.residual.norm(),
        rank,
        u,
        v,
        s,
        trace: r.trace,
    })
}

/// Primal and dual runs at `τ = ‖U Vᵀ‖_*` for each size (square instances, 10% density).
pub fn run_matcomp_benchmark(
    sizes: &[usize],
    iters: usize,
    ell: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    sizes
        .iter()
        .map(|&size| {
            let inst = gen_matcomp_instance(size, size, 0.10, 0.1, seed)?;
            let t0 = Instant::now();
            let p = matcomp_primal(&inst, iters)?;
            let time_primal_s = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let d = matcomp_dual(&inst, iters, ell)?;
            let time_dual_s = t1.elapsed().as_secs_f64();
            Ok(BenchRow {
                size,
                residual_primal: p.residual,
                rank_primal: p.rank,
                time_primal_s,
                residual_dual: d.residual,
                rank_dual: d.rank,
                time_dual_s,
            })
        })
        .collect()
}
