//! JSON recipes describing atomic sets: `{"variant": name, "params": {...}, "parts": [...]}`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::atoms::{AtomicSet, TransformMode};
use crate::calculus::{sum_descriptor, union_descriptor};
use crate::element::{Element, MaskedMatrix};
use crate::error::{Error, Result};
use crate::linmap::LinearMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub variant: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub parts: Vec<Recipe>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn param<'a>(p: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    p.get(key).ok_or_else(|| bad(format!("missing parameter `{key}`")))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(format!("`{key}` must be a nonnegative integer")))
}

fn as_f64(v: &Value, key: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(format!("`{key}` must be a number")))
}

fn as_vector(v: &Value, key: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| bad(format!("`{key}` must be an array of numbers")))?
        .iter()
        .map(|x| as_f64(x, key))
        .collect()
}

fn as_rows(v: &Value, key: &str) -> Result<Vec<Vec<f64>>> {
    v.as_array()
        .ok_or_else(|| bad(format!("`{key}` must be an array of rows")))?
        .iter()
        .map(|r| as_vector(r, key))
        .collect()
}

fn as_matrix(v: &Value, key: &str) -> Result<Element> {
    Element::from_rows(&as_rows(v, key)?)
}

fn matrix_json(m: &Element) -> Value {
    Value::Array((0..m.rows()).map(|i| json!(m.row(i))).collect())
}

fn get_usize(p: &Map<String, Value>, key: &str) -> Result<usize> {
    as_usize(param(p, key)?, key)
}

/// `{"n": n}` for column vectors, `{"rows": r, "cols": c}` otherwise.
fn shape_of(p: &Map<String, Value>) -> Result<(usize, usize)> {
    match p.get("n") {
        Some(n) => Ok((as_usize(n, "n")?, 1)),
        None => Ok((get_usize(p, "rows")?, get_usize(p, "cols")?)),
    }
}

fn shape_json(rows: usize, cols: usize) -> Map<String, Value> {
    let mut p = Map::new();
    if cols == 1 {
        p.insert("n".into(), json!(rows));
    } else {
        p.insert("rows".into(), json!(rows));
        p.insert("cols".into(), json!(cols));
    }
    p
}

fn map_from_json(v: &Value) -> Result<LinearMap> {
    if let Some(name) = v.as_str() {
        return match name {
            "identity" => Ok(LinearMap::Identity),
            "dct" => Ok(LinearMap::Dct),
            "inverse_dct" => Ok(LinearMap::InverseDct),
            other => Err(bad(format!("unknown map `{other}`"))),
        };
    }
    let obj = v.as_object().ok_or_else(|| bad("`map` must be a name or an object"))?;
    if let Some(a) = obj.get("scale") {
        return Ok(LinearMap::Scale(as_f64(a, "scale")?));
    }
    if let Some(m) = obj.get("dense") {
        return Ok(LinearMap::Dense(as_matrix(m, "dense")?));
    }
    if let Some(m) = obj.get("mask") {
        let m = m.as_object().ok_or_else(|| bad("`mask` must be an object"))?;
        let entries = as_rows(param(m, "entries")?, "entries")?
            .into_iter()
            .map(|e| match e.as_slice() {
                [i, j, x] if *i >= 0.0 && *j >= 0.0 => Ok((*i as usize, *j as usize, *x)),
                _ => Err(bad("mask entries are [i, j, value] triples")),
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(LinearMap::Mask(MaskedMatrix::new(
            get_usize(m, "rows")?,
            get_usize(m, "cols")?,
            entries,
        )?));
    }
    Err(bad("`map` object needs one of `scale`, `dense`, `mask`"))
}

fn map_json(map: &LinearMap) -> Value {
    match map {
        LinearMap::Identity => json!("identity"),
        LinearMap::Dct => json!("dct"),
        LinearMap::InverseDct => json!("inverse_dct"),
        LinearMap::Scale(a) => json!({ "scale": a }),
        LinearMap::Dense(m) => json!({ "dense": matrix_json(m) }),
        LinearMap::Mask(m) => {
            let (rows, cols) = m.shape();
            let entries: Vec<Value> = m
                .entries()
                .iter()
                .map(|&(i, j, x)| json!([i, j, x]))
                .collect();
            json!({ "mask": { "rows": rows, "cols": cols, "entries": entries } })
        }
    }
}

impl Recipe {
    pub fn new(variant: &str, params: Map<String, Value>, parts: Vec<Recipe>) -> Self {
        Recipe {
            variant: variant.to_string(),
            params,
            parts,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("recipes always serialize")
    }

    fn single_part(&self) -> Result<AtomicSet> {
        match self.parts.as_slice() {
            [inner] => inner.build(),
            _ => Err(bad(format!("`{}` takes exactly one part", self.variant))),
        }
    }

    pub fn build(&self) -> Result<AtomicSet> {
        let p = &self.params;
        match self.variant.as_str() {
            "signed_basis" => {
                let (rows, cols) = shape_of(p)?;
                Ok(AtomicSet::SignedBasis { rows, cols })
            }
            "inf_ball" => {
                let (rows, cols) = shape_of(p)?;
                Ok(AtomicSet::InfBall { rows, cols })
            }
            "euclidean_ball" => {
                let (rows, cols) = shape_of(p)?;
                Ok(AtomicSet::EuclideanBall { rows, cols })
            }
            "nuclear_ball" => Ok(AtomicSet::nuclear_ball(
                get_usize(p, "rows")?,
                get_usize(p, "cols")?,
            )),
            "subspace" => AtomicSet::subspace(as_matrix(param(p, "basis")?, "basis")?),
            "total_variation" => AtomicSet::total_variation(get_usize(p, "n")?),
            "group_norm" => {
                let groups = param(p, "groups")?
                    .as_array()
                    .ok_or_else(|| bad("`groups` must be an array of index arrays"))?
                    .iter()
                    .map(|g| {
                        g.as_array()
                            .ok_or_else(|| bad("each group must be an array of indices"))?
                            .iter()
                            .map(|i| as_usize(i, "groups"))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                AtomicSet::group_norm(get_usize(p, "n")?, groups)
            }
            "spectrahedron" => Ok(AtomicSet::spectrahedron(get_usize(p, "n")?)),
            "weighted_spectrahedron" => AtomicSet::weighted_spectrahedron(
                as_matrix(param(p, "v")?, "v")?,
                as_vector(param(p, "lambda")?, "lambda")?,
            ),
            "finite" => {
                let atoms = as_rows(param(p, "atoms")?, "atoms")?;
                let shape = if p.contains_key("n") || p.contains_key("rows") {
                    shape_of(p)?
                } else {
                    let n = atoms.first().map(Vec::len).ok_or_else(|| {
                        bad("an empty `finite` set needs an explicit shape")
                    })?;
                    (n, 1)
                };
                let atoms = atoms
                    .into_iter()
                    .map(|a| Element::from_vec(shape.0, shape.1, a))
                    .collect::<Result<Vec<_>>>()?;
                AtomicSet::finite_with_shape(shape, atoms)
            }
            "transformed" => {
                let mode = match param(p, "mode")?.as_str() {
                    Some("image") => TransformMode::Image,
                    Some("preimage") => TransformMode::Preimage,
                    _ => return Err(bad("`mode` must be \"image\" or \"preimage\"")),
                };
                self.single_part()?
                    .transform(map_from_json(param(p, "map")?)?, mode)
            }
            "scaled" => self.single_part()?.scaled(as_f64(param(p, "alpha")?, "alpha")?),
            "sum" | "union" => {
                let parts = self
                    .parts
                    .iter()
                    .map(Recipe::build)
                    .collect::<Result<Vec<_>>>()?;
                if self.variant == "sum" {
                    sum_descriptor(parts)
                } else {
                    union_descriptor(parts)
                }
            }
            other => Err(bad(format!("unknown variant `{other}`"))),
        }
    }

    pub fn from_set(set: &AtomicSet) -> Recipe {
        let name = set.name();
        let (params, parts) = match set {
            AtomicSet::SignedBasis { rows, cols }
            | AtomicSet::InfBall { rows, cols }
            | AtomicSet::EuclideanBall { rows, cols } => (shape_json(*rows, *cols), vec![]),
            AtomicSet::NuclearBall { rows, cols } => {
                let mut p = Map::new();
                p.insert("rows".into(), json!(rows));
                p.insert("cols".into(), json!(cols));
                (p, vec![])
            }
            AtomicSet::Subspace(s) => {
                let mut p = Map::new();
                p.insert("basis".into(), matrix_json(&s.basis));
                (p, vec![])
            }
            AtomicSet::TotalVariation { n } | AtomicSet::Spectrahedron { n } => {
                let mut p = Map::new();
                p.insert("n".into(), json!(n));
                (p, vec![])
            }
            AtomicSet::GroupNorm(g) => {
                let mut p = Map::new();
                p.insert("n".into(), json!(g.n));
                p.insert("groups".into(), json!(g.groups));
                (p, vec![])
            }
            AtomicSet::WeightedSpectrahedron(w) => {
                let mut p = Map::new();
                p.insert("v".into(), matrix_json(&w.v));
                p.insert("lambda".into(), json!(w.lambda));
                (p, vec![])
            }
            AtomicSet::Finite { rows, cols, atoms } => {
                let mut p = shape_json(*rows, *cols);
                let list: Vec<Value> = atoms.iter().map(|a| json!(a.as_slice())).collect();
                p.insert("atoms".into(), Value::Array(list));
                (p, vec![])
            }
            AtomicSet::Transformed { inner, map, mode } => {
                let mut p = Map::new();
                p.insert("map".into(), map_json(map));
                let mode = match mode {
                    TransformMode::Image => "image",
                    TransformMode::Preimage => "preimage",
                };
                p.insert("mode".into(), json!(mode));
                (p, vec![Recipe::from_set(inner)])
            }
            AtomicSet::Scaled { inner, alpha } => {
                let mut p = Map::new();
                p.insert("alpha".into(), json!(alpha));
                (p, vec![Recipe::from_set(inner)])
            }
            AtomicSet::Sum(parts) | AtomicSet::Union(parts) => {
                (Map::new(), parts.iter().map(Recipe::from_set).collect())
            }
        };
        Recipe::new(name, params, parts)
    }
}
