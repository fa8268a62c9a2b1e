use super::{check_tau, DualCertificate, LeastSquares, SmoothObjective};
use crate::atoms::{AtomTag, AtomicSet};
use crate::element::{Element, MaskedMatrix};
use crate::error::{Error, Result};
use crate::linalg::{orthonormality_deviation, project_capped_simplex, project_trace_capped_psd};
use crate::linmap::LinearMap;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOptions {
    pub iters: usize,
    /// Atoms exposed per part.
    pub k_max: usize,
    pub face_tol: f64,
    /// Early exit once the projected-gradient step falls below this (absolute) size.
    pub stationarity_tol: f64,
    /// A certificate with `‖z‖ ≤ zero_tol` exposes every atom; parts with a projector are
    /// then searched over their whole scaled hull.
    pub zero_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            iters: 2000,
            k_max: 64,
            face_tol: 1e-6,
            stationarity_tol: 0.0,
            zero_tol: 0.0,
        }
    }
}

/// One part of the reduced problem.
#[derive(Debug, Clone)]
pub(crate) enum Block {
    /// Only the origin is exposed.
    Zero((usize, usize)),
    /// Nonnegative coefficients over explicit atoms, summing to at most `τ`.
    Coefficients(Vec<Element>),
    /// `U S Vᵀ` with `S ⪰ 0`, `trace S ≤ τ`.
    Psd { u: Element, v: Element },
    /// The whole set `τ conv(A ∪ {0})`, through its projector.
    Whole(AtomicSet),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Param {
    None,
    Coefficients(Vec<f64>),
    Psd(Element),
    Full(Element),
}

impl Param {
    fn axpy(&mut self, alpha: f64, other: &Param) {
        match (self, other) {
            (Param::Coefficients(a), Param::Coefficients(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += alpha * y;
                }
            }
            (Param::Psd(a), Param::Psd(b)) | (Param::Full(a), Param::Full(b)) => a.axpy(alpha, b),
            _ => {}
        }
    }

    fn norm_sq(&self) -> f64 {
        match self {
            Param::None => 0.0,
            Param::Coefficients(c) => c.iter().map(|x| x * x).sum(),
            Param::Psd(s) | Param::Full(s) => s.dot(s),
        }
    }
}

impl Block {
    fn shape(&self) -> (usize, usize) {
        match self {
            Block::Zero(s) => *s,
            Block::Coefficients(a) => a[0].shape(),
            Block::Psd { u, v } => (u.rows(), v.rows()),
            Block::Whole(set) => set.shape(),
        }
    }

    fn zero_param(&self) -> Param {
        match self {
            Block::Zero(_) => Param::None,
            Block::Coefficients(a) => Param::Coefficients(vec![0.0; a.len()]),
            Block::Psd { u, .. } => Param::Psd(Element::zeros(u.cols(), u.cols())),
            Block::Whole(set) => Param::Full(Element::zeros(set.shape().0, set.shape().1)),
        }
    }

    fn synthesize(&self, p: &Param) -> Result<Element> {
        let (m, n) = self.shape();
        Ok(match (self, p) {
            (Block::Coefficients(atoms), Param::Coefficients(c)) => {
                let mut x = Element::zeros(m, n);
                for (a, &ci) in atoms.iter().zip(c) {
                    if ci != 0.0 {
                        x.axpy(ci, a);
                    }
                }
                x
            }
            (Block::Psd { u, v }, Param::Psd(s)) => u.matmul(s)?.matmul(&v.transpose())?,
            (Block::Whole(_), Param::Full(x)) => x.clone(),
            _ => Element::zeros(m, n),
        })
    }

    fn pullback(&self, g: &Element) -> Result<Param> {
        Ok(match self {
            Block::Zero(_) => Param::None,
            Block::Coefficients(atoms) => Param::Coefficients(atoms.iter().map(|a| a.dot(g)).collect()),
            Block::Psd { u, v } => Param::Psd(u.transpose().matmul(g)?.matmul(v)?.symmetrize()),
            Block::Whole(_) => Param::Full(g.clone()),
        })
    }

    fn project(&self, p: &Param, tau: f64) -> Result<Param> {
        Ok(match (self, p) {
            (Block::Whole(set), Param::Full(x)) => {
                Param::Full(set.project(&x.scale(1.0 / tau))?.scale(tau))
            }
            (_, Param::None) | (_, Param::Full(_)) => Param::None,
            (_, Param::Coefficients(c)) => Param::Coefficients(project_capped_simplex(c, tau)),
            (_, Param::Psd(s)) => Param::Psd(project_trace_capped_psd(&s.symmetrize(), tau)?),
        })
    }
}

fn face_block(part: &AtomicSet, z: &Element, opts: &RecoveryOptions) -> Result<Block> {
    if z.norm() <= opts.zero_tol && part.has_projector() {
        return Ok(Block::Whole(part.clone()));
    }
    let face = part.expose(z, opts.k_max.max(1), opts.face_tol)?;
    if face.atoms.is_empty() {
        return Ok(Block::Zero(part.shape()));
    }
    let columns = |vectors: Vec<&Vec<f64>>| {
        let rows = vectors[0].len();
        Element::from_fn(rows, vectors.len(), |i, j| vectors[j][i])
    };
    match part {
        AtomicSet::NuclearBall { .. } => {
            let pairs: Vec<(&Vec<f64>, &Vec<f64>)> = face
                .atoms
                .iter()
                .filter_map(|a| match &a.tag {
                    AtomTag::RankOne { u, v } => Some((u, v)),
                    _ => None,
                })
                .collect();
            let u = columns(pairs.iter().map(|p| p.0).collect());
            let v = columns(pairs.iter().map(|p| p.1).collect());
            Ok(Block::Psd { u, v })
        }
        AtomicSet::Spectrahedron { .. } => {
            let us: Vec<&Vec<f64>> = face
                .atoms
                .iter()
                .filter_map(|a| match &a.tag {
                    AtomTag::SymRankOne { u } => Some(u),
                    _ => None,
                })
                .collect();
            let u = columns(us);
            Ok(Block::Psd { u: u.clone(), v: u })
        }
        _ => Ok(Block::Coefficients(
            face.atoms.into_iter().map(|a| a.element).collect(),
        )),
    }
}

fn total(blocks: &[Block], params: &[Param], shape: (usize, usize)) -> Result<(Vec<Element>, Element)> {
    let parts = blocks
        .iter()
        .zip(params)
        .map(|(b, p)| b.synthesize(p))
        .collect::<Result<Vec<_>>>()?;
    let mut sum = Element::zeros(shape.0, shape.1);
    for p in &parts {
        sum.axpy(1.0, p);
    }
    Ok((parts, sum))
}

fn reduced_gradient(
    obj: &dyn SmoothObjective,
    blocks: &[Block],
    params: &[Param],
    shape: (usize, usize),
) -> Result<Vec<Param>> {
    let (_, sum) = total(blocks, params, shape)?;
    let g = obj.grad(&sum)?;
    blocks.iter().map(|b| b.pullback(&g)).collect()
}

/// Largest eigenvalue of the reduced Hessian by power iteration on gradient differences.
fn lipschitz(obj: &dyn SmoothObjective, blocks: &[Block], shape: (usize, usize)) -> Result<f64> {
    let zero: Vec<Param> = blocks.iter().map(|b| b.zero_param()).collect();
    let g0 = reduced_gradient(obj, blocks, &zero, shape)?;
    let mut p: Vec<Param> = blocks
        .iter()
        .map(|b| match b.zero_param() {
            Param::None => Param::None,
            Param::Coefficients(c) => Param::Coefficients(vec![1.0; c.len()]),
            Param::Psd(s) => Param::Psd(Element::identity(s.rows())),
            Param::Full(x) => Param::Full(x.map(|_| 1.0)),
        })
        .collect();
    let mut lambda = 0.0;
    for _ in 0..50 {
        let n = p.iter().map(|x| x.norm_sq()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Ok(0.0);
        }
        for x in p.iter_mut() {
            let copy = x.clone();
            x.axpy(1.0 / n - 1.0, &copy);
        }
        let mut hp = reduced_gradient(obj, blocks, &p, shape)?;
        for (h, g) in hp.iter_mut().zip(&g0) {
            h.axpy(-1.0, g);
        }
        let next = hp.iter().map(|x| x.norm_sq()).sum::<f64>().sqrt();
        let done = (next - lambda).abs() <= 1e-10 * next;
        lambda = next;
        p = hp;
        if done {
            break;
        }
    }
    Ok(lambda)
}

/// Accelerated projected gradient with function-value restarts.
pub(crate) fn solve_reduced(
    obj: &dyn SmoothObjective,
    blocks: &[Block],
    tau: f64,
    iters: usize,
    stationarity_tol: f64,
) -> Result<(Vec<Param>, Vec<Element>)> {
    let shape = blocks[0].shape();
    let l = lipschitz(obj, blocks, shape)? * 1.01;
    let mut x: Vec<Param> = blocks.iter().map(|b| b.zero_param()).collect();
    if l == 0.0 {
        let (parts, _) = total(blocks, &x, shape)?;
        return Ok((x, parts));
    }
    let step = 1.0 / l;
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = obj.eval(&total(blocks, &x, shape)?.1)?;
    for _ in 0..iters {
        let g = reduced_gradient(obj, blocks, &y, shape)?;
        let mut next = Vec::with_capacity(blocks.len());
        for ((b, yi), gi) in blocks.iter().zip(&y).zip(&g) {
            let mut p = yi.clone();
            p.axpy(-step, gi);
            next.push(b.project(&p, tau)?);
        }
        let f_next = obj.eval(&total(blocks, &next, shape)?.1)?;
        let mut moved = 0.0;
        for (n, xi) in next.iter().zip(&x) {
            let mut d = n.clone();
            d.axpy(-1.0, xi);
            moved += d.norm_sq();
        }
        if f_next > fx {
            // Restart from the last accepted point.
            y = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        y = next.clone();
        for ((yi, n), xi) in y.iter_mut().zip(&next).zip(&x) {
            let mut d = n.clone();
            d.axpy(-1.0, xi);
            yi.axpy(momentum, &d);
        }
        x = next;
        fx = f_next;
        t = t_next;
        if moved.sqrt() * l <= stationarity_tol {
            break;
        }
    }
    let (parts, _) = total(blocks, &x, shape)?;
    Ok((x, parts))
}

/// Splits the solution over the faces exposed in each part by the certificate:
/// minimizes `f(Σ xᵢ)` with each `xᵢ` in `τ conv(ℰᵢ(z*) ∪ {0})`.
pub fn recover_from_certificate(
    obj: &dyn SmoothObjective,
    cert: &DualCertificate,
    parts: &[AtomicSet],
    tau: f64,
    opts: &RecoveryOptions,
) -> Result<Vec<Element>> {
    check_tau(tau)?;
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no parts to recover".into()));
    }
    let blocks = parts
        .iter()
        .map(|p| face_block(p, &cert.z_star, opts))
        .collect::<Result<Vec<_>>>()?;
    if blocks.iter().all(|b| matches!(b, Block::Zero(_))) {
        return Err(Error::EmptyFace);
    }
    let (_, comps) = solve_reduced(obj, &blocks, tau, opts.iters, opts.stationarity_tol)?;
    Ok(comps)
}

/// `argmin ½‖Ω∘(U S Vᵀ) − b‖²` over `S ⪰ 0`, `trace S ≤ τ`, with `b` listed in mask order.
pub fn psd_reduced_solve(
    u: &Element,
    v: &Element,
    omega: &MaskedMatrix,
    b: &[f64],
    tau: f64,
) -> Result<Element> {
    check_tau(tau)?;
    for m in [u, v] {
        let dev = orthonormality_deviation(m);
        if dev > 1e-8 {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
    }
    if u.cols() != v.cols() || (u.rows(), v.rows()) != omega.shape() {
        return Err(Error::ShapeMismatch {
            expected: omega.shape(),
            found: (u.rows(), v.rows()),
        });
    }
    if b.len() != omega.nnz() {
        return Err(Error::ShapeMismatch {
            expected: (omega.nnz(), 1),
            found: (b.len(), 1),
        });
    }
    let obj = LeastSquares::new(
        LinearMap::Mask(omega.clone()),
        Element::vector(b.to_vec()),
        omega.shape(),
    )?;
    let blocks = [Block::Psd {
        u: u.clone(),
        v: v.clone(),
    }];
    let bn = crate::element::norm2(b);
    let (params, _) = solve_reduced(&obj, &blocks, tau, 20_000, 1e-6 * bn)?;
    match params.into_iter().next() {
        Some(Param::Psd(s)) => Ok(s),
        _ => Err(Error::NumericFailure("missing PSD block".into())),
    }
}
