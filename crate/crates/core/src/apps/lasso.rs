//! Sparse least-squares instance over the 1-norm ball.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::atoms::AtomicSet;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linmap::LinearMap;
use crate::solvers::LeastSquares;

/// Fraction of the planted 1-norm used as the ball radius.
pub const TAU_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoInstance {
    /// Sensing matrix with `N(0, 1/rows)` entries.
    pub a: Element,
    pub b: Element,
    pub x_true: Element,
    /// `0.9 ‖x_true‖₁`, so the constraint is active at the minimizer.
    pub tau: f64,
    pub seed: u64,
}

impl LassoInstance {
    pub fn objective(&self) -> Result<LeastSquares> {
        LeastSquares::new(
            LinearMap::dense(self.a.clone()),
            self.b.clone(),
            (self.a.cols(), 1),
        )
    }

    pub fn set(&self) -> AtomicSet {
        AtomicSet::signed_basis(self.a.cols())
    }
}

/// `b = A x + noise·η` with `x` supported on `sparsity` random coordinates, magnitudes in
/// `[1, 2)` and random signs.
pub fn gen_lasso_instance(
    rows: usize,
    cols: usize,
    sparsity: usize,
    noise: f64,
    seed: u64,
) -> Result<LassoInstance> {
    if rows == 0 || cols == 0 || sparsity == 0 || sparsity > cols {
        return Err(Error::InvalidArgument(format!(
            "need rows, cols >= 1 and 1 <= sparsity <= cols, got {rows}x{cols}, {sparsity}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (rows as f64).sqrt();
    let a = Element::from_fn(rows, cols, |_, _| {
        let g: f64 = StandardNormal.sample(&mut rng);
        scale * g
    });
    let mut x = vec![0.0; cols];
    for i in sample(&mut rng, cols, sparsity).into_iter() {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        x[i] = sign * (1.0 + rng.random::<f64>());
    }
    let x_true = Element::vector(x);
    let mut b = Element::vector(a.mul_vec(x_true.as_slice()));
    for v in b.as_mut_slice() {
        let eta: f64 = StandardNormal.sample(&mut rng);
        *v += noise * eta;
    }
    let tau = TAU_FACTOR * x_true.norm1();
    Ok(LassoInstance {
        a,
        b,
        x_true,
        tau,
        seed,
    })
}
