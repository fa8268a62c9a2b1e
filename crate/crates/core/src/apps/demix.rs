//! Sparse + low-rank + DCT-sparse demixing by a two-stage dual conditional gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::atoms::{alignment_residual, AtomicSet, TransformMode};
use crate::calculus::sum_descriptor;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linalg::{dct_apply_2d, dense_svd, DctDirection};
use crate::linmap::LinearMap;
use crate::solvers::{dual_cg_least_squares, DualOptions, LeastSquares, SmoothObjective};

use super::reduced::Pools;

/// Largest allowed |⟨a, b⟩| between planted atoms of different components.
pub const INCOHERENCE_BOUND: f64 = 0.5;
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct DemixInstance {
    pub size: usize,
    pub sparse_frac: f64,
    pub rank: usize,
    pub dct_frac: f64,
    pub seed: u64,
    pub x_s: Element,
    pub x_l: Element,
    pub eps: Element,
    pub b: Element,
    /// Largest |⟨a, b⟩| between planted atoms of different components.
    pub coherence: f64,
}

/// The three model parts: 1-ball, nuclear ball and DCT-transformed 1-ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    Sparse,
    LowRank,
    Dct,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Sparse, Component::LowRank, Component::Dct];

    pub fn atoms(self, size: usize) -> AtomicSet {
        match self {
            Component::Sparse => AtomicSet::signed_basis_matrix(size, size),
            Component::LowRank => AtomicSet::nuclear_ball(size, size),
            Component::Dct => AtomicSet::Transformed {
                inner: Box::new(AtomicSet::signed_basis_matrix(size, size)),
                map: LinearMap::InverseDct,
                mode: TransformMode::Image,
            },
        }
    }
}

impl DemixInstance {
    pub fn truth(&self, c: Component) -> &Element {
        match c {
            Component::Sparse => &self.x_s,
            Component::LowRank => &self.x_l,
            Component::Dct => &self.eps,
        }
    }

    /// Components planted with nonzero energy.
    pub fn present(&self) -> Vec<Component> {
        Component::ALL
            .into_iter()
            .filter(|&c| self.truth(c).norm() > 0.0)
            .collect()
    }

    /// Gauge of each planted component in its own atomic set.
    pub fn planted_gauges(&self) -> Result<[f64; 3]> {
        let mut g = [0.0; 3];
        for (i, c) in Component::ALL.into_iter().enumerate() {
            g[i] = c.atoms(self.size).gauge(self.truth(c))?.to_f64();
        }
        Ok(g)
    }

    /// `0.9 ·` the largest planted gauge.
    pub fn default_tau(&self) -> Result<f64> {
        Ok(0.9 * self.planted_gauges()?.into_iter().fold(0.0, f64::max))
    }
}

/// `±1` block vector with `2(k+2)` alternating blocks, unit norm.
fn block_vector(size: usize, k: usize) -> Vec<f64> {
    let blocks = 2 * (k + 2);
    let scale = 1.0 / (size as f64).sqrt();
    (0..size)
        .map(|i| if (i * blocks / size) % 2 == 0 { scale } else { -scale })
        .collect()
}

fn max_abs_inner(a: &[Element], b: &[Element]) -> f64 {
    let mut m: f64 = 0.0;
    for x in a {
        for y in b {
            m = m.max(x.dot(y).abs());
        }
    }
    m
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..=0.2).contains(&f) {
        Ok(())
    } else {
        Err(Error::BadFraction(f))
    }
}

fn random_sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Chessboard-like low-rank image plus sparse spikes plus DCT-sparse structured noise.
///
/// The spike and DCT amplitudes are rescaled so that all present components have the
/// same gauge as the low-rank part. DCT positions are redrawn until the planted atoms
/// of different components have mutual coherence at most [`INCOHERENCE_BOUND`].
pub fn gen_demix_instance(
    size: usize,
    sparse_frac: f64,
    rank: usize,
    dct_frac: f64,
    seed: u64,
) -> Result<DemixInstance> {
    check_fraction(sparse_frac)?;
    check_fraction(dct_frac)?;
    if size < 8 {
        return Err(Error::InvalidArgument(format!("size must be at least 8, got {size}")));
    }
    if rank == 0 || rank > size / 4 {
        return Err(Error::InvalidArgument(format!(
            "rank must lie in 1..={}, got {rank}",
            size / 4
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = size * size;

    let lowrank_atoms: Vec<Element> = (0..rank)
        .map(|k| {
            let p = block_vector(size, k);
            Element::outer(&p, &p)
        })
        .collect();
    let mut x_l = Element::zeros(size, size);
    for (k, a) in lowrank_atoms.iter().enumerate() {
        x_l.axpy(1.0 / (k + 1) as f64, a);
    }
    x_l.scale_mut(1.0 / x_l.norm());
    let target: f64 = dense_svd(&x_l)?.iter().map(|t| t.sigma).sum();

    let n_spikes = (sparse_frac * cells as f64).round() as usize;
    let mut x_s = Element::zeros(size, size);
    let mut spike_atoms = Vec::with_capacity(n_spikes);
    for p in rand::seq::index::sample(&mut rng, cells, n_spikes) {
        let amp = rng.random_range(1.0..2.0) * random_sign(&mut rng);
        x_s.as_mut_slice()[p] = amp;
        let mut e = Element::zeros(size, size);
        e.as_mut_slice()[p] = 1.0;
        spike_atoms.push(e);
    }
    if n_spikes > 0 {
        x_s.scale_mut(target / x_s.norm1());
    }

    let n_coef = (dct_frac * cells as f64).round() as usize;
    let mut coherence = max_abs_inner(&spike_atoms, &lowrank_atoms);
    let mut eps = Element::zeros(size, size);
    for attempt in 0..=MAX_REDRAWS {
        let mut coef = Element::zeros(size, size);
        let mut dct_atoms = Vec::with_capacity(n_coef);
        for p in rand::seq::index::sample(&mut rng, cells, n_coef) {
            coef.as_mut_slice()[p] = rng.random_range(0.5..1.0) * random_sign(&mut rng);
            let mut e = Element::zeros(size, size);
            e.as_mut_slice()[p] = 1.0;
            dct_atoms.push(dct_apply_2d(&e, DctDirection::Inverse));
        }
        let c = coherence
            .max(max_abs_inner(&dct_atoms, &lowrank_atoms))
            .max(max_abs_inner(&dct_atoms, &spike_atoms));
        if c <= INCOHERENCE_BOUND || attempt == MAX_REDRAWS {
            if n_coef > 0 {
                coef.scale_mut(target / coef.norm1());
            }
            eps = dct_apply_2d(&coef, DctDirection::Inverse);
            coherence = c;
            break;
        }
    }
    if coherence > INCOHERENCE_BOUND {
        return Err(Error::NumericFailure(format!(
            "planted components are coherent ({coherence})"
        )));
    }

    let mut b = x_s.clone();
    b.axpy(1.0, &x_l);
    b.axpy(1.0, &eps);
    Ok(DemixInstance {
        size,
        sparse_frac,
        rank,
        dct_frac,
        seed,
        x_s,
        x_l,
        eps,
        b,
        coherence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub component: Component,
    /// `‖xᵢ − truth‖ / ‖truth‖`, or `‖xᵢ‖` when nothing was planted.
    pub error: f64,
    pub gauge: f64,
    /// Alignment residual of `(xᵢ, z*)` in the component's atomic set.
    pub alignment_residual: f64,
    /// `1 + γᵢ(xᵢ) σᵢ(z*)`.
    pub alignment_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemixMetrics {
    pub tau: f64,
    pub iterations: usize,
    pub stage1_gap: f64,
    /// `½‖b − x*‖²` at the stage-1 exit.
    pub stage1_objective: f64,
    /// `stage1_objective + stage1_gap`.
    pub stage1_bound: f64,
    pub stage2_objective: f64,
    pub stage1_certificate_norm: f64,
    /// `‖b − Σ xᵢ‖` at the stage-2 solution.
    pub certificate_norm: f64,
    /// Reduced solves performed in stage 2.
    pub rounds: usize,
    /// Final pool sizes: spikes, subspace rank, DCT atoms.
    pub pool_sizes: [usize; 3],
    pub components: Vec<ComponentReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemixResult {
    /// Sparse, low-rank and DCT-sparse estimates.
    pub x1: Element,
    pub x2: Element,
    pub x3: Element,
    /// `x1 + x2 + x3`.
    pub prediction: Element,
    /// Certificate `b − Σ xᵢ` of the stage-2 solution.
    pub z_star: Element,
    pub metrics: DemixMetrics,
}

impl DemixResult {
    pub fn component(&self, c: Component) -> &Element {
        match c {
            Component::Sparse => &self.x1,
            Component::LowRank => &self.x2,
            Component::Dct => &self.x3,
        }
    }

    /// Named images: observation, the three estimates and their sum.
    pub fn images<'a>(&'a self, inst: &'a DemixInstance) -> Vec<(&'static str, &'a Element)> {
        vec![
            ("observed", &inst.b),
            ("sparse", &self.x1),
            ("lowrank", &self.x2),
            ("dct", &self.x3),
            ("reconstructed", &self.prediction),
        ]
    }
}

/// Relative band of the faces exposed by the stage-1 certificate.
pub const FACE_TOL: f64 = 1e-6;
/// Relative margin by which an atom must beat the pooled atoms to join the pools.
pub const PRICING_TOL: f64 = 1e-9;
const MAX_ROUNDS: usize = 200;

/// Stage 1 runs dual conditional gradient on `min ½‖x − b‖²` over `γ_{A₁+A₂+A₃}(x) ≤ τ`
/// with only the residual stored. Stage 2 solves the problem reduced to the faces that
/// the stage-1 certificate exposes in each part, and enlarges the faces with every atom
/// exposed by the certificate `b − Σ xᵢ` of the reduced solution until no new atom
/// appears. Parts whose component is absent from the instance are left out of the
/// model and return zero.
pub fn run_mca_demix(inst: &DemixInstance, tau: f64, iters: usize) -> Result<DemixResult> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let size = inst.size;
    let shape = (size, size);
    let present = inst.present();
    let parts: Vec<AtomicSet> = present.iter().map(|c| c.atoms(size)).collect();
    let obj = LeastSquares::new(LinearMap::Identity, inst.b.clone(), shape)?;

    let mut comps = vec![Element::zeros(size, size); 3];
    let mut rounds = 0;
    let mut pool_sizes = [0; 3];
    let (stage1_cert, gap, stage1_objective) = if parts.is_empty() {
        (inst.b.clone(), 0.0, 0.5 * inst.b.dot(&inst.b))
    } else {
        let model = if parts.len() == 1 {
            parts[0].clone()
        } else {
            sum_descriptor(parts.clone())?
        };
        let opts = DualOptions {
            eps: Some(1e-12 * (1.0 + 0.5 * inst.b.dot(&inst.b))),
            max_iter: iters,
            face_k: 1,
            face_tol: FACE_TOL,
        };
        let stage1 = dual_cg_least_squares(&LinearMap::Identity, &inst.b, &model, tau, &opts)?;
        let active = Component::ALL.map(|c| present.contains(&c));
        let mut pools = Pools::new(size, active);
        pools.seed(&stage1.certificate.z_star, FACE_TOL)?;
        let mut coef = pools.zero();
        loop {
            coef = pools.solve(&inst.b, tau, &coef)?;
            coef = pools.compress(&coef)?;
            comps = pools.synthesize(&coef).to_vec();
            rounds += 1;
            let mut z = inst.b.clone();
            for x in &comps {
                z.axpy(-1.0, x);
            }
            if rounds >= MAX_ROUNDS || pools.price(&z, PRICING_TOL)? == 0 {
                break;
            }
        }
        pool_sizes = pools.sizes();
        let r = &stage1.residual;
        (stage1.certificate.z_star, stage1.certificate.gap_at_exit, 0.5 * r.dot(r))
    };

    let mut prediction = Element::zeros(size, size);
    for x in &comps {
        prediction.axpy(1.0, x);
    }
    let stage2_objective = obj.eval(&prediction)?;
    let mut z_star = inst.b.clone();
    z_star.axpy(-1.0, &prediction);
    let mut components = Vec::with_capacity(3);
    for (c, x) in Component::ALL.into_iter().zip(&comps) {
        let set = c.atoms(size);
        let truth = inst.truth(c);
        let error = if truth.norm() > 0.0 {
            x.distance(truth) / truth.norm()
        } else {
            x.norm()
        };
        let gauge = set.gauge(x)?.to_f64();
        let support = set.support(&z_star)?.to_f64();
        components.push(ComponentReport {
            component: c,
            error,
            gauge,
            alignment_residual: alignment_residual(&set, x, &z_star)?,
            alignment_scale: 1.0 + gauge * support,
        });
    }
    let [x1, x2, x3]: [Element; 3] = comps
        .try_into()
        .map_err(|_| Error::NumericFailure("component count".into()))?;
    Ok(DemixResult {
        x1,
        x2,
        x3,
        prediction,
        metrics: DemixMetrics {
            tau,
            iterations: iters,
            stage1_gap: gap,
            stage1_objective,
            stage1_bound: stage1_objective + gap,
            stage2_objective,
            stage1_certificate_norm: stage1_cert.norm(),
            certificate_norm: z_star.norm(),
            rounds,
            pool_sizes,
            components,
        },
        z_star,
    })
}
