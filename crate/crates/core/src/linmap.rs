//! Linear maps acting on ambient elements.

use crate::element::{Element, MaskedMatrix};
use crate::error::{Error, Result};
use crate::linalg::{dct_apply_2d, orthonormality_deviation, DctDirection};

#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap {
    Identity,
    Scale(f64),
    /// Dense matrix acting on column vectors.
    Dense(Element),
    /// Orthonormal DCT-II (separable on matrices).
    Dct,
    /// Transpose of [`LinearMap::Dct`].
    InverseDct,
    /// Sampling `X ↦ (X_ij)_{(i,j) ∈ Ω}`, returned as a column vector in entry order.
    Mask(MaskedMatrix),
}

impl LinearMap {
    pub fn dense(m: Element) -> Self {
        LinearMap::Dense(m)
    }

    /// Shape of `M x` for `x` of the given shape.
    pub fn output_shape(&self, input: (usize, usize)) -> Result<(usize, usize)> {
        match self {
            LinearMap::Identity | LinearMap::Scale(_) | LinearMap::Dct | LinearMap::InverseDct => {
                Ok(input)
            }
            LinearMap::Dense(a) => {
                if input != (a.cols(), 1) {
                    return Err(Error::ShapeMismatch {
                        expected: (a.cols(), 1),
                        found: input,
                    });
                }
                Ok((a.rows(), 1))
            }
            LinearMap::Mask(m) => {
                if input != m.shape() {
                    return Err(Error::ShapeMismatch {
                        expected: m.shape(),
                        found: input,
                    });
                }
                Ok((m.nnz(), 1))
            }
        }
    }

    /// Shape of `Mᵀ y` for `y` of the given shape.
    pub fn adjoint_output_shape(&self, input: (usize, usize)) -> Result<(usize, usize)> {
        match self {
            LinearMap::Identity | LinearMap::Scale(_) | LinearMap::Dct | LinearMap::InverseDct => {
                Ok(input)
            }
            LinearMap::Dense(a) => {
                if input != (a.rows(), 1) {
                    return Err(Error::ShapeMismatch {
                        expected: (a.rows(), 1),
                        found: input,
                    });
                }
                Ok((a.cols(), 1))
            }
            LinearMap::Mask(m) => {
                if input != (m.nnz(), 1) {
                    return Err(Error::ShapeMismatch {
                        expected: (m.nnz(), 1),
                        found: input,
                    });
                }
                Ok(m.shape())
            }
        }
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        self.output_shape(x.shape())?;
        Ok(match self {
            LinearMap::Identity => x.clone(),
            LinearMap::Scale(a) => x.scale(*a),
            LinearMap::Dense(a) => Element::vector(a.mul_vec(x.as_slice())),
            LinearMap::Dct => dct_apply_2d(x, DctDirection::Forward),
            LinearMap::InverseDct => dct_apply_2d(x, DctDirection::Inverse),
            LinearMap::Mask(m) => Element::vector(m.sample(x)),
        })
    }

    pub fn adjoint(&self, y: &Element) -> Result<Element> {
        self.adjoint_output_shape(y.shape())?;
        Ok(match self {
            LinearMap::Identity => y.clone(),
            LinearMap::Scale(a) => y.scale(*a),
            LinearMap::Dense(a) => Element::vector(a.tmul_vec(y.as_slice())),
            LinearMap::Dct => dct_apply_2d(y, DctDirection::Inverse),
            LinearMap::InverseDct => dct_apply_2d(y, DctDirection::Forward),
            LinearMap::Mask(m) => m.scatter(y.as_slice()),
        })
    }

    /// `M (u vᵀ)` without forming the outer product when the map is a mask.
    pub fn apply_rank_one(&self, scale: f64, u: &[f64], v: &[f64]) -> Result<Element> {
        match self {
            LinearMap::Mask(m) => {
                if (u.len(), v.len()) != m.shape() {
                    return Err(Error::ShapeMismatch {
                        expected: m.shape(),
                        found: (u.len(), v.len()),
                    });
                }
                Ok(Element::vector(
                    m.entries()
                        .iter()
                        .map(|&(i, j, _)| scale * u[i] * v[j])
                        .collect(),
                ))
            }
            _ => {
                let mut a = Element::outer(u, v);
                a.scale_mut(scale);
                self.apply(&a)
            }
        }
    }

    pub fn inverse(&self) -> Option<LinearMap> {
        match self {
            LinearMap::Identity => Some(LinearMap::Identity),
            LinearMap::Scale(a) if *a != 0.0 => Some(LinearMap::Scale(1.0 / a)),
            LinearMap::Scale(_) => None,
            LinearMap::Dct => Some(LinearMap::InverseDct),
            LinearMap::InverseDct => Some(LinearMap::Dct),
            LinearMap::Dense(a) if a.rows() == a.cols() => a
                .to_dmatrix()
                .try_inverse()
                .map(|inv| LinearMap::Dense(Element::from_dmatrix(&inv))),
            LinearMap::Dense(_) | LinearMap::Mask(_) => None,
        }
    }

    /// True when `Mᵀ M = M Mᵀ = I`.
    pub fn is_orthogonal(&self) -> bool {
        match self {
            LinearMap::Identity | LinearMap::Dct | LinearMap::InverseDct => true,
            LinearMap::Scale(a) => (a.abs() - 1.0).abs() < 1e-15,
            LinearMap::Dense(a) => a.rows() == a.cols() && orthonormality_deviation(a) < 1e-12,
            LinearMap::Mask(_) => false,
        }
    }
}
