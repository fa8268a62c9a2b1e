//! Atomic sets with gauge, support, exposed-face and decomposition oracles.

mod align;
mod bruteforce;
mod finite;
mod group;
pub(crate) mod lp;
mod moreau;
mod spectral;
mod subspace;
mod tv;
mod vector;

use crate::calculus;
use crate::element::{Element, Extended};
use crate::error::{Error, Result};
use crate::linmap::LinearMap;

pub use align::{alignment_residual, is_supported_by, polar_gap, RANK_ONE_ANGLE_TOL};
pub use bruteforce::gauge_bruteforce;
pub use group::Groups;
pub use moreau::{moreau_decompose, MoreauParts};
pub use spectral::WeightedFactors;
pub use subspace::Subspace;
pub use tv::differences;

/// Default relative band for exposed faces.
pub const FACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum AtomTag {
    SignedBasis { index: usize, sign: i8 },
    RankOne { u: Vec<f64>, v: Vec<f64> },
    SymRankOne { u: Vec<f64> },
    Group { group: usize, direction: Vec<f64> },
    TvColumn { index: usize, sign: i8 },
    RecessionDir,
    SubspaceElement,
    Composite(Vec<Atom>),
    Generic,
    /// Position in an explicit atom list.
    Listed(usize),
}

impl AtomTag {
    /// Short label used in traces.
    pub fn label(&self) -> String {
        match self {
            AtomTag::SignedBasis { index, sign } => {
                format!("e{}{}", if *sign > 0 { "+" } else { "-" }, index)
            }
            AtomTag::RankOne { .. } => "rank1".into(),
            AtomTag::SymRankOne { .. } => "sym_rank1".into(),
            AtomTag::Group { group, .. } => format!("group{group}"),
            AtomTag::TvColumn { index, sign } => {
                format!("tv{}{}", if *sign > 0 { "+" } else { "-" }, index)
            }
            AtomTag::RecessionDir => "recession".into(),
            AtomTag::SubspaceElement => "subspace".into(),
            AtomTag::Composite(parts) => parts
                .iter()
                .map(|a| a.tag.label())
                .collect::<Vec<_>>()
                .join("+"),
            AtomTag::Generic => "generic".into(),
            AtomTag::Listed(i) => format!("atom{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub tag: AtomTag,
}

impl Atom {
    pub fn new(element: Element, tag: AtomTag) -> Self {
        Atom { element, tag }
    }

    pub(crate) fn zero(shape: (usize, usize)) -> Self {
        Atom::new(Element::zeros(shape.0, shape.1), AtomTag::Generic)
    }

    pub(crate) fn scaled(&self, alpha: f64) -> Atom {
        let tag = match &self.tag {
            AtomTag::Composite(children) => {
                AtomTag::Composite(children.iter().map(|c| c.scaled(alpha)).collect())
            }
            other => other.clone(),
        };
        Atom::new(self.element.scale(alpha), tag)
    }
}

/// `x = Σ c_a a (+ recession part)` with all `c_a > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDecomposition {
    pub terms: Vec<(f64, Atom)>,
    pub recession_part: Option<(f64, Atom)>,
    pub claimed_gauge: f64,
    pub minimal: bool,
}

impl AtomicDecomposition {
    pub fn minimal(
        terms: Vec<(f64, Atom)>,
        recession_part: Option<(f64, Atom)>,
        claimed_gauge: f64,
    ) -> Self {
        AtomicDecomposition {
            terms,
            recession_part,
            claimed_gauge,
            minimal: true,
        }
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.0).sum()
    }

    pub fn synthesize(&self, shape: (usize, usize)) -> Element {
        let mut out = Element::zeros(shape.0, shape.1);
        for (c, a) in self.terms.iter().chain(self.recession_part.iter()) {
            out.axpy(*c, &a.element);
        }
        out
    }

    pub(crate) fn map_atoms(self, f: impl Fn(&Atom) -> Result<Atom>) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(c, a)| Ok((*c, f(a)?)))
            .collect::<Result<Vec<_>>>()?;
        let recession_part = match &self.recession_part {
            Some((c, a)) => Some((*c, f(a)?)),
            None => None,
        };
        Ok(AtomicDecomposition {
            terms,
            recession_part,
            ..self
        })
    }
}

/// Atoms of the set attaining the support value in direction `exposing_vector`.
/// An empty atom list means only the origin attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposedFace {
    pub support_value: f64,
    pub atoms: Vec<Atom>,
    pub exposing_vector: Element,
    pub tol: f64,
}

impl ExposedFace {
    pub fn new(support_value: f64, atoms: Vec<Atom>, exposing_vector: Element, tol: f64) -> Self {
        ExposedFace {
            support_value,
            atoms,
            exposing_vector,
            tol,
        }
    }

    /// First exposed atom, or the origin for a trivial face.
    pub fn first_or_zero(&self) -> Atom {
        self.atoms
            .first()
            .cloned()
            .unwrap_or_else(|| Atom::zero(self.exposing_vector.shape()))
    }
}

pub(crate) fn face_threshold(sup: f64, tol: f64) -> f64 {
    sup - tol * sup.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMode {
    /// The set `{M a}`.
    Image,
    /// The set `{a : M a ∈ conv A}`.
    Preimage,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomicSet {
    /// `{±e_i}`; gauge is the entrywise 1-norm.
    SignedBasis { rows: usize, cols: usize },
    /// Hypercube vertices `{±1}ⁿ`; gauge is the ∞-norm.
    InfBall { rows: usize, cols: usize },
    /// Unit sphere; gauge is the 2-norm.
    EuclideanBall { rows: usize, cols: usize },
    /// Unit rank-one matrices; gauge is the nuclear norm.
    NuclearBall { rows: usize, cols: usize },
    Subspace(Subspace),
    TotalVariation { n: usize },
    GroupNorm(Groups),
    Spectrahedron { n: usize },
    WeightedSpectrahedron(WeightedFactors),
    Finite {
        rows: usize,
        cols: usize,
        atoms: Vec<Element>,
    },
    Transformed {
        inner: Box<AtomicSet>,
        map: LinearMap,
        mode: TransformMode,
    },
    Scaled { inner: Box<AtomicSet>, alpha: f64 },
    Sum(Vec<AtomicSet>),
    Union(Vec<AtomicSet>),
}

impl AtomicSet {
    pub fn signed_basis(n: usize) -> Self {
        AtomicSet::SignedBasis { rows: n, cols: 1 }
    }

    pub fn signed_basis_matrix(rows: usize, cols: usize) -> Self {
        AtomicSet::SignedBasis { rows, cols }
    }

    pub fn inf_ball(n: usize) -> Self {
        AtomicSet::InfBall { rows: n, cols: 1 }
    }

    pub fn euclidean_ball(n: usize) -> Self {
        AtomicSet::EuclideanBall { rows: n, cols: 1 }
    }

    pub fn nuclear_ball(rows: usize, cols: usize) -> Self {
        AtomicSet::NuclearBall { rows, cols }
    }

    pub fn subspace(basis: Element) -> Result<Self> {
        Ok(AtomicSet::Subspace(Subspace::new(basis)?))
    }

    pub fn total_variation(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("total variation needs n >= 2".into()));
        }
        Ok(AtomicSet::TotalVariation { n })
    }

    pub fn group_norm(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        Ok(AtomicSet::GroupNorm(Groups::new(n, groups)?))
    }

    pub fn spectrahedron(n: usize) -> Self {
        AtomicSet::Spectrahedron { n }
    }

    pub fn weighted_spectrahedron(v: Element, lambda: Vec<f64>) -> Result<Self> {
        Ok(AtomicSet::WeightedSpectrahedron(WeightedFactors::new(v, lambda)?))
    }

    pub fn finite(atoms: Vec<Element>) -> Result<Self> {
        let shape = atoms
            .first()
            .map(|a| a.shape())
            .ok_or_else(|| Error::InvalidArgument("finite set needs at least one atom".into()))?;
        Self::finite_with_shape(shape, atoms)
    }

    pub fn finite_with_shape(shape: (usize, usize), atoms: Vec<Element>) -> Result<Self> {
        for a in &atoms {
            a.ensure_shape(shape)?;
        }
        Ok(AtomicSet::Finite {
            rows: shape.0,
            cols: shape.1,
            atoms,
        })
    }

    /// The set `{0}`.
    pub fn zero(shape: (usize, usize)) -> Self {
        AtomicSet::Finite {
            rows: shape.0,
            cols: shape.1,
            atoms: Vec::new(),
        }
    }

    pub fn transform(self, map: LinearMap, mode: TransformMode) -> Result<Self> {
        let inner_shape = self.shape();
        match mode {
            TransformMode::Image => {
                map.output_shape(inner_shape)?;
            }
            TransformMode::Preimage => {
                let outer = map.adjoint_output_shape(inner_shape)?;
                if map.output_shape(outer)? != inner_shape {
                    return Err(Error::ShapeMismatch {
                        expected: inner_shape,
                        found: outer,
                    });
                }
            }
        }
        Ok(AtomicSet::Transformed {
            inner: Box::new(self),
            map,
            mode,
        })
    }

    pub fn scaled(self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("scale {alpha} must be positive")));
        }
        Ok(AtomicSet::Scaled {
            inner: Box::new(self),
            alpha,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AtomicSet::SignedBasis { .. } => "signed_basis",
            AtomicSet::InfBall { .. } => "inf_ball",
            AtomicSet::EuclideanBall { .. } => "euclidean_ball",
            AtomicSet::NuclearBall { .. } => "nuclear_ball",
            AtomicSet::Subspace(_) => "subspace",
            AtomicSet::TotalVariation { .. } => "total_variation",
            AtomicSet::GroupNorm(_) => "group_norm",
            AtomicSet::Spectrahedron { .. } => "spectrahedron",
            AtomicSet::WeightedSpectrahedron(_) => "weighted_spectrahedron",
            AtomicSet::Finite { .. } => "finite",
            AtomicSet::Transformed { .. } => "transformed",
            AtomicSet::Scaled { .. } => "scaled",
            AtomicSet::Sum(_) => "sum",
            AtomicSet::Union(_) => "union",
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AtomicSet::SignedBasis { rows, cols }
            | AtomicSet::InfBall { rows, cols }
            | AtomicSet::EuclideanBall { rows, cols }
            | AtomicSet::NuclearBall { rows, cols }
            | AtomicSet::Finite { rows, cols, .. } => (*rows, *cols),
            AtomicSet::Subspace(s) => (s.dim(), 1),
            AtomicSet::TotalVariation { n } => (*n, 1),
            AtomicSet::GroupNorm(g) => (g.n, 1),
            AtomicSet::Spectrahedron { n } => (*n, *n),
            AtomicSet::WeightedSpectrahedron(w) => (w.n(), w.n()),
            AtomicSet::Transformed { inner, map, mode } => match mode {
                TransformMode::Image => map.output_shape(inner.shape()).expect("checked"),
                TransformMode::Preimage => {
                    map.adjoint_output_shape(inner.shape()).expect("checked")
                }
            },
            AtomicSet::Scaled { inner, .. } => inner.shape(),
            AtomicSet::Sum(parts) | AtomicSet::Union(parts) => parts[0].shape(),
        }
    }

    fn check(&self, x: &Element) -> Result<()> {
        x.ensure_shape(self.shape())
    }

    /// Gauge `γ(x) = inf{λ ≥ 0 : x ∈ λ conv(A ∪ {0})}`.
    pub fn gauge(&self, x: &Element) -> Result<Extended> {
        self.check(x)?;
        Ok(match self {
            AtomicSet::SignedBasis { .. } => Extended::Finite(x.norm1()),
            AtomicSet::InfBall { .. } => Extended::Finite(x.norm_inf()),
            AtomicSet::EuclideanBall { .. } => Extended::Finite(x.norm()),
            AtomicSet::NuclearBall { .. } => Extended::Finite(spectral::nuclear_gauge(x)?),
            AtomicSet::Subspace(s) => s.gauge(x),
            AtomicSet::TotalVariation { .. } => Extended::Finite(tv::gauge(x)),
            AtomicSet::GroupNorm(g) => g.gauge(x)?,
            AtomicSet::Spectrahedron { .. } => spectral::spectrahedron_gauge(x)?,
            AtomicSet::WeightedSpectrahedron(w) => w.gauge(x)?,
            AtomicSet::Finite { atoms, .. } => finite::gauge(atoms, x)?,
            AtomicSet::Transformed { inner, map, mode } => match mode {
                TransformMode::Image => {
                    let inv = map.inverse().ok_or_else(|| {
                        Error::GaugeUnsupported("image under a non-invertible map".into())
                    })?;
                    inner.gauge(&inv.apply(x)?)?
                }
                TransformMode::Preimage => inner.gauge(&map.apply(x)?)?,
            },
            AtomicSet::Scaled { inner, alpha } => inner.gauge(x)?.scale(1.0 / alpha),
            AtomicSet::Sum(parts) => calculus::sum_gauge(parts, x)?,
            AtomicSet::Union(parts) => calculus::union_gauge(parts, x)?,
        })
    }

    /// Support function `σ(z) = sup{⟨a, z⟩ : a ∈ conv(A ∪ {0})}`.
    pub fn support(&self, z: &Element) -> Result<Extended> {
        self.check(z)?;
        Ok(match self {
            AtomicSet::SignedBasis { .. } => Extended::Finite(z.norm_inf()),
            AtomicSet::InfBall { .. } => Extended::Finite(z.norm1()),
            AtomicSet::EuclideanBall { .. } => Extended::Finite(z.norm()),
            AtomicSet::NuclearBall { .. } => Extended::Finite(spectral::nuclear_support(z)?),
            AtomicSet::Subspace(s) => s.support(z),
            AtomicSet::TotalVariation { .. } => tv::support(z),
            AtomicSet::GroupNorm(g) => Extended::Finite(g.support(z)),
            AtomicSet::Spectrahedron { .. } => {
                Extended::Finite(spectral::spectrahedron_support(z)?)
            }
            AtomicSet::WeightedSpectrahedron(w) => w.support(z)?,
            AtomicSet::Finite { atoms, .. } => Extended::Finite(finite::support(atoms, z)),
            AtomicSet::Transformed { inner, map, mode } => match mode {
                TransformMode::Image => inner.support(&map.adjoint(z)?)?,
                TransformMode::Preimage => {
                    let inv = map.inverse().ok_or_else(|| {
                        Error::GaugeUnsupported("preimage under a non-invertible map".into())
                    })?;
                    inner.support(&inv.adjoint(z)?)?
                }
            },
            AtomicSet::Scaled { inner, alpha } => inner.support(z)?.scale(*alpha),
            AtomicSet::Sum(parts) => calculus::sum_support(parts, z)?,
            AtomicSet::Union(parts) => calculus::union_support(parts, z)?,
        })
    }

    /// Up to `k_max` atoms within relative `tol` of the support value, lowest structural index first.
    pub fn expose(&self, z: &Element, k_max: usize, tol: f64) -> Result<ExposedFace> {
        self.check(z)?;
        if k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        match self {
            AtomicSet::SignedBasis { .. } => Ok(vector::signed_basis_expose(z, k_max, tol)),
            AtomicSet::InfBall { .. } => Ok(vector::inf_ball_expose(z, k_max, tol)),
            AtomicSet::EuclideanBall { .. } => Ok(vector::euclidean_expose(z, k_max, tol)),
            AtomicSet::NuclearBall { .. } => spectral::nuclear_expose(z, k_max, tol),
            AtomicSet::Subspace(s) => s.expose(z, k_max, tol),
            AtomicSet::TotalVariation { .. } => {
                tv::expose(z, k_max, tol).ok_or(Error::UnboundedSupport)
            }
            AtomicSet::GroupNorm(g) => Ok(g.expose(z, k_max, tol)),
            AtomicSet::Spectrahedron { .. } => spectral::spectrahedron_expose(z, k_max, tol),
            AtomicSet::WeightedSpectrahedron(w) => w.expose(z, k_max, tol),
            AtomicSet::Finite { atoms, .. } => Ok(finite::expose(atoms, z, k_max, tol)),
            AtomicSet::Transformed { inner, map, mode } => {
                let (pulled, push): (Element, LinearMap) = match mode {
                    TransformMode::Image => (map.adjoint(z)?, map.clone()),
                    TransformMode::Preimage => {
                        let inv = map.inverse().ok_or_else(|| {
                            Error::GaugeUnsupported("preimage under a non-invertible map".into())
                        })?;
                        (inv.adjoint(z)?, inv)
                    }
                };
                let face = inner.expose(&pulled, k_max, tol)?;
                let atoms = face
                    .atoms
                    .iter()
                    .map(|a| Ok(Atom::new(push.apply(&a.element)?, a.tag.clone())))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ExposedFace::new(face.support_value, atoms, z.clone(), tol))
            }
            AtomicSet::Scaled { inner, alpha } => {
                let face = inner.expose(z, k_max, tol)?;
                Ok(ExposedFace::new(
                    alpha * face.support_value,
                    face.atoms.iter().map(|a| a.scaled(*alpha)).collect(),
                    z.clone(),
                    tol,
                ))
            }
            AtomicSet::Sum(parts) => calculus::sum_expose(parts, z, k_max, tol),
            AtomicSet::Union(parts) => calculus::union_expose(parts, z, k_max, tol),
        }
    }

    /// A minimal atomic decomposition whose coefficients sum to the gauge.
    pub fn decompose(&self, x: &Element, tol: f64) -> Result<AtomicDecomposition> {
        self.check(x)?;
        match self {
            AtomicSet::SignedBasis { .. } => Ok(vector::signed_basis_decompose(x)),
            AtomicSet::InfBall { .. } => Ok(vector::inf_ball_decompose(x)),
            AtomicSet::EuclideanBall { .. } => Ok(vector::euclidean_decompose(x)),
            AtomicSet::NuclearBall { .. } => spectral::nuclear_decompose(x, tol),
            AtomicSet::Subspace(s) => s.decompose(x),
            AtomicSet::TotalVariation { .. } => Ok(tv::decompose(x)),
            AtomicSet::GroupNorm(g) => g.decompose(x),
            AtomicSet::Spectrahedron { .. } => spectral::spectrahedron_decompose(x, tol),
            AtomicSet::WeightedSpectrahedron(w) => w.decompose(x, tol),
            AtomicSet::Finite { atoms, .. } => finite::decompose(atoms, x, tol),
            AtomicSet::Transformed { inner, map, mode } => {
                let inv = map.inverse().ok_or_else(|| {
                    Error::GaugeUnsupported("decomposition needs an invertible map".into())
                })?;
                let (pulled, push) = match mode {
                    TransformMode::Image => (inv.apply(x)?, map.clone()),
                    TransformMode::Preimage => (map.apply(x)?, inv),
                };
                inner
                    .decompose(&pulled, tol)?
                    .map_atoms(|a| Ok(Atom::new(push.apply(&a.element)?, a.tag.clone())))
            }
            AtomicSet::Scaled { inner, alpha } => {
                let d = inner.decompose(&x.scale(1.0 / alpha), tol)?;
                let terms = d.terms.iter().map(|(c, a)| (*c, a.scaled(*alpha))).collect();
                let recession = d
                    .recession_part
                    .as_ref()
                    .map(|(c, a)| (*c, a.scaled(*alpha)));
                Ok(AtomicDecomposition::minimal(terms, recession, d.claimed_gauge))
            }
            AtomicSet::Sum(parts) => calculus::sum_decompose(parts, x, tol),
            AtomicSet::Union(parts) => calculus::union_decompose(parts, x, tol),
        }
    }

    pub fn has_projector(&self) -> bool {
        match self {
            AtomicSet::SignedBasis { .. }
            | AtomicSet::InfBall { .. }
            | AtomicSet::EuclideanBall { .. }
            | AtomicSet::NuclearBall { .. } => true,
            AtomicSet::Scaled { inner, .. } => inner.has_projector(),
            AtomicSet::Transformed { inner, map, .. } => {
                map.is_orthogonal() && inner.has_projector()
            }
            _ => false,
        }
    }

    /// Euclidean projection onto `conv(A ∪ {0})`.
    pub fn project(&self, x: &Element) -> Result<Element> {
        self.check(x)?;
        match self {
            AtomicSet::SignedBasis { .. } => Ok(vector::project_signed_basis(x)),
            AtomicSet::InfBall { .. } => Ok(vector::project_box(x)),
            AtomicSet::EuclideanBall { .. } => Ok(vector::project_euclidean(x)),
            AtomicSet::NuclearBall { .. } => spectral::project_nuclear(x),
            AtomicSet::Scaled { inner, alpha } => {
                Ok(inner.project(&x.scale(1.0 / alpha))?.scale(*alpha))
            }
            AtomicSet::Transformed { inner, map, mode } if map.is_orthogonal() => match mode {
                TransformMode::Image => map.apply(&inner.project(&map.adjoint(x)?)?),
                TransformMode::Preimage => map.adjoint(&inner.project(&map.apply(x)?)?),
            },
            _ => Err(Error::NoProjector),
        }
    }

    /// The explicit atom list when the set is finite and small.
    pub fn finite_atoms(&self) -> Option<Vec<Atom>> {
        match self {
            AtomicSet::SignedBasis { rows, cols } => {
                Some(vector::signed_basis_atoms((*rows, *cols)))
            }
            AtomicSet::InfBall { rows, cols } => vector::inf_ball_atoms((*rows, *cols)),
            AtomicSet::Finite { atoms, .. } => Some(finite::listed(atoms)),
            AtomicSet::Scaled { inner, alpha } => Some(
                inner
                    .finite_atoms()?
                    .iter()
                    .map(|a| a.scaled(*alpha))
                    .collect(),
            ),
            AtomicSet::Transformed {
                inner,
                map,
                mode: TransformMode::Image,
            } => inner
                .finite_atoms()?
                .into_iter()
                .map(|a| map.apply(&a.element).ok().map(|e| Atom::new(e, a.tag)))
                .collect(),
            AtomicSet::Union(parts) => {
                let mut all = Vec::new();
                for p in parts {
                    all.extend(p.finite_atoms()?);
                }
                Some(all)
            }
            _ => None,
        }
    }
}
