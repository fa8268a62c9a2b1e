//! Minkowski sums and unions of atomic sets.

use crate::atoms::lp::{lp_minimize, LpOutcome};
use crate::atoms::{face_threshold, Atom, AtomTag, AtomicDecomposition, AtomicSet, ExposedFace};
use crate::element::{Element, Extended};
use crate::error::{Error, Result};

/// Default tolerance for numerically evaluated gauges.
pub const NUMERIC_TOL: f64 = 1e-9;
/// Bisection iterations on the level.
pub const MAX_BISECTIONS: usize = 60;
/// Alternating-projection sweeps per feasibility check.
pub const MAX_INNER: usize = 1000;

fn check_parts(parts: &[AtomicSet]) -> Result<()> {
    if parts.len() < 2 {
        return Err(Error::InvalidArgument("a combinator needs at least two parts".into()));
    }
    let shape = parts[0].shape();
    for p in &parts[1..] {
        if p.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: p.shape(),
            });
        }
    }
    Ok(())
}

/// The Minkowski sum `A₁ + … + A_k`; its gauge is the polar convolution of the part gauges.
pub fn sum_descriptor(parts: Vec<AtomicSet>) -> Result<AtomicSet> {
    check_parts(&parts)?;
    Ok(AtomicSet::Sum(parts))
}

/// The union `A₁ ∪ … ∪ A_k`; its gauge is the infimal (sum) convolution of the part gauges.
pub fn union_descriptor(parts: Vec<AtomicSet>) -> Result<AtomicSet> {
    check_parts(&parts)?;
    Ok(AtomicSet::Union(parts))
}

fn is_zero_set(set: &AtomicSet) -> bool {
    matches!(set, AtomicSet::Finite { atoms, .. } if atoms.is_empty())
}

pub(crate) fn sum_support(parts: &[AtomicSet], z: &Element) -> Result<Extended> {
    let mut total = Extended::Finite(0.0);
    for p in parts {
        total = total.add(p.support(z)?);
    }
    Ok(total)
}

pub(crate) fn union_support(parts: &[AtomicSet], z: &Element) -> Result<Extended> {
    let mut best = Extended::Finite(0.0);
    for p in parts {
        best = best.max(p.support(z)?);
    }
    Ok(best)
}

fn composite(children: Vec<Atom>, shape: (usize, usize)) -> Atom {
    let mut e = Element::zeros(shape.0, shape.1);
    for c in &children {
        e.axpy(1.0, &c.element);
    }
    Atom::new(e, AtomTag::Composite(children))
}

/// Index tuples: the diagonal first, then the remaining tuples in lexicographic order.
fn pairings(lens: &[usize], cap: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let longest = lens.iter().copied().max().unwrap_or(0);
    for j in 0..longest {
        if out.len() >= cap {
            return out;
        }
        let t: Vec<usize> = lens.iter().map(|&n| j.min(n - 1)).collect();
        if !out.contains(&t) {
            out.push(t);
        }
    }
    let mut t = vec![0usize; lens.len()];
    loop {
        if out.len() >= cap {
            return out;
        }
        if !out.contains(&t) {
            out.push(t.clone());
        }
        let mut k = lens.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            t[k] += 1;
            if t[k] < lens[k] {
                break;
            }
            t[k] = 0;
        }
    }
}

pub(crate) fn sum_expose(
    parts: &[AtomicSet],
    z: &Element,
    k_max: usize,
    tol: f64,
) -> Result<ExposedFace> {
    let shape = z.shape();
    let faces = parts
        .iter()
        .map(|p| p.expose(z, k_max, tol))
        .collect::<Result<Vec<_>>>()?;
    let support: f64 = faces.iter().map(|f| f.support_value).sum();
    let choices: Vec<Vec<Atom>> = faces
        .into_iter()
        .map(|f| {
            if f.atoms.is_empty() {
                vec![Atom::zero(shape)]
            } else {
                f.atoms
            }
        })
        .collect();
    let lens: Vec<usize> = choices.iter().map(|c| c.len()).collect();
    let atoms = pairings(&lens, k_max)
        .into_iter()
        .map(|t| {
            let children = t.iter().enumerate().map(|(i, &j)| choices[i][j].clone()).collect();
            composite(children, shape)
        })
        .collect();
    Ok(ExposedFace::new(support, atoms, z.clone(), tol))
}

pub(crate) fn union_expose(
    parts: &[AtomicSet],
    z: &Element,
    k_max: usize,
    tol: f64,
) -> Result<ExposedFace> {
    let supports = parts
        .iter()
        .map(|p| p.support(z))
        .collect::<Result<Vec<_>>>()?;
    if supports.iter().any(|s| s.is_infinite()) {
        return Err(Error::UnboundedSupport);
    }
    let values: Vec<f64> = supports.iter().map(|s| s.to_f64()).collect();
    let best = values.iter().copied().fold(0.0, f64::max);
    let thr = face_threshold(best, tol);
    let mut atoms = Vec::new();
    for (p, &v) in parts.iter().zip(&values) {
        if v >= thr && atoms.len() < k_max {
            let face = p.expose(z, k_max - atoms.len(), tol)?;
            atoms.extend(face.atoms);
        }
    }
    Ok(ExposedFace::new(best, atoms, z.clone(), tol))
}

/// Result of evaluating the gauge of a Minkowski sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSplit {
    /// `max_i γ_i(x_i)` for the returned split; an upper bound on the gauge.
    pub value: f64,
    /// Components summing to `x`.
    pub split: Vec<Element>,
    /// A certified lower bound on the gauge.
    pub lower_bound: f64,
}

fn max_part_gauge(parts: &[AtomicSet], split: &[Element]) -> Result<Extended> {
    let mut m = Extended::Finite(0.0);
    for (p, y) in parts.iter().zip(split) {
        m = m.max(p.gauge(y)?);
    }
    Ok(m)
}

/// Gauge of `A₁ + … + A_k` at `x`: `inf { max_i γ_i(x_i) : Σ x_i = x }`.
///
/// Sets with explicit atom lists are handled exactly by linear programming; otherwise
/// the level is bisected with an alternating-projection feasibility test of
/// `x ∈ τ Σ conv(A_i ∪ {0})`, which needs a projector for every part.
pub fn sum_gauge_numeric(parts: &[AtomicSet], x: &Element, tol: f64) -> Result<SumSplit> {
    check_parts(parts)?;
    x.ensure_shape(parts[0].shape())?;
    let shape = x.shape();
    let active: Vec<usize> = (0..parts.len()).filter(|&i| !is_zero_set(&parts[i])).collect();
    if active.len() < parts.len() {
        let mut split = vec![Element::zeros(shape.0, shape.1); parts.len()];
        let reduced: Vec<AtomicSet> = active.iter().map(|&i| parts[i].clone()).collect();
        let (value, lower, pieces) = match reduced.len() {
            0 => {
                if x.norm() == 0.0 {
                    (0.0, 0.0, Vec::new())
                } else {
                    return Err(Error::Infeasible("x is not zero".into()));
                }
            }
            1 => match reduced[0].gauge(x)? {
                Extended::Finite(g) => (g, g, vec![x.clone()]),
                Extended::Infinite => {
                    return Err(Error::Infeasible("x is outside the cone".into()))
                }
            },
            _ => {
                let r = sum_gauge_numeric(&reduced, x, tol)?;
                (r.value, r.lower_bound, r.split)
            }
        };
        for (k, &i) in active.iter().enumerate() {
            split[i] = pieces[k].clone();
        }
        return Ok(SumSplit {
            value,
            split,
            lower_bound: lower,
        });
    }
    if x.norm() == 0.0 {
        return Ok(SumSplit {
            value: 0.0,
            split: vec![Element::zeros(shape.0, shape.1); parts.len()],
            lower_bound: 0.0,
        });
    }
    let lists: Option<Vec<Vec<Atom>>> = parts.iter().map(|p| p.finite_atoms()).collect();
    if let Some(lists) = lists {
        return sum_gauge_lp(&lists, x);
    }
    if parts.iter().all(|p| p.has_projector()) {
        return sum_gauge_bisection(parts, x, tol);
    }
    Err(Error::NoProjector)
}

fn sum_gauge_lp(lists: &[Vec<Atom>], x: &Element) -> Result<SumSplit> {
    let dim = x.len();
    let k = lists.len();
    let natoms: usize = lists.iter().map(|l| l.len()).sum();
    // Columns: atom coefficients, then t, then one slack per part.
    let ncols = natoms + 1 + k;
    let mut rows = vec![vec![0.0; ncols]; dim + k];
    let mut b = vec![0.0; dim + k];
    let mut col = 0;
    for (i, list) in lists.iter().enumerate() {
        for a in list {
            for r in 0..dim {
                rows[r][col] = a.element.as_slice()[r];
            }
            rows[dim + i][col] = 1.0;
            col += 1;
        }
    }
    for i in 0..k {
        rows[dim + i][natoms] = -1.0;
        rows[dim + i][natoms + 1 + i] = 1.0;
    }
    b[..dim].copy_from_slice(x.as_slice());
    let mut cost = vec![0.0; ncols];
    cost[natoms] = 1.0;
    match lp_minimize(&cost, &rows, &b) {
        LpOutcome::Optimal { x: sol, value } => {
            let mut split = Vec::with_capacity(k);
            let mut col = 0;
            for list in lists {
                let mut y = Element::zeros(x.rows(), x.cols());
                for a in list {
                    if sol[col] != 0.0 {
                        y.axpy(sol[col], &a.element);
                    }
                    col += 1;
                }
                split.push(y);
            }
            Ok(SumSplit {
                value,
                split,
                lower_bound: value,
            })
        }
        LpOutcome::Infeasible => Err(Error::Infeasible("x is outside the cone of the sum".into())),
        LpOutcome::Unbounded => Err(Error::NumericFailure("unbounded sum-gauge program".into())),
    }
}

enum Level {
    Feasible,
    Infeasible,
    Undecided,
}

struct Bisection<'a> {
    parts: &'a [AtomicSet],
    x: &'a Element,
    best: Option<(f64, Vec<Element>)>,
    lower: f64,
    direction: Option<Element>,
}

impl Bisection<'_> {
    fn offer(&mut self, split: &[Element]) -> Result<()> {
        if let Extended::Finite(v) = max_part_gauge(self.parts, split)? {
            if self.best.as_ref().map_or(true, |b| v < b.0) {
                self.best = Some((v, split.to_vec()));
            }
        }
        Ok(())
    }

    /// Lower bound `⟨x, w⟩ / σ(w)` from a separating direction.
    fn certify(&mut self, w: &Element) -> Result<()> {
        if w.norm() == 0.0 {
            return Ok(());
        }
        if let Extended::Finite(s) = sum_support(self.parts, w)? {
            let xw = self.x.dot(w);
            if s > 0.0 && xw > 0.0 && xw / s > self.lower {
                self.lower = xw / s;
                self.direction = Some(w.clone());
            }
        }
        Ok(())
    }

    /// Accelerated projected gradient on `½‖Σ y_i − x‖²` over `y_i ∈ τ C_i`.
    fn level(&mut self, tau: f64, y: &mut Vec<Element>, tol: f64) -> Result<Level> {
        let k = self.parts.len() as f64;
        let thr = tol * (1.0 + self.x.norm());
        let residual = |y: &[Element]| {
            let mut r = self.x.clone();
            for yi in y {
                r.axpy(-1.0, yi);
            }
            r
        };
        let mut prev = y.clone();
        let mut look = y.clone();
        let mut t = 1.0f64;
        for it in 0..MAX_INNER {
            let g = residual(&look);
            let mut next = Vec::with_capacity(look.len());
            for (part, li) in self.parts.iter().zip(&look) {
                let mut step = li.clone();
                step.axpy(1.0 / k, &g);
                next.push(part.project(&step.scale(1.0 / tau))?.scale(tau));
            }
            let r = residual(&next);
            if r.norm() <= thr {
                let corrected: Vec<Element> = next
                    .iter()
                    .map(|n| {
                        let mut c = n.clone();
                        c.axpy(1.0 / k, &r);
                        c
                    })
                    .collect();
                self.offer(&corrected)?;
                *y = next;
                return Ok(Level::Feasible);
            }
            self.certify(&r)?;
            if self.lower > tau {
                *y = next;
                return Ok(Level::Infeasible);
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            look = next
                .iter()
                .zip(&prev)
                .map(|(n, p)| {
                    let mut l = n.clone();
                    l.axpy(momentum, &(n - p));
                    l
                })
                .collect();
            // Restart momentum when the residual grows.
            if it > 0 && residual(&prev).norm() < r.norm() {
                t = 1.0;
                look = next.clone();
            } else {
                t = t_next;
            }
            prev = next;
        }
        *y = prev;
        Ok(Level::Undecided)
    }

    /// Exact split over atoms exposed by the best separating direction.
    fn polish(&mut self) -> Result<()> {
        let Some(w) = self.direction.clone() else {
            return Ok(());
        };
        for face_tol in [1e-9, 1e-6, 1e-3] {
            let mut lists = Vec::with_capacity(self.parts.len());
            for p in self.parts {
                let face = p.expose(&w, 64, face_tol)?;
                lists.push(face.atoms);
            }
            if let Ok(s) = sum_gauge_lp(&lists, self.x) {
                self.offer(&s.split)?;
            }
        }
        Ok(())
    }
}

fn sum_gauge_bisection(parts: &[AtomicSet], x: &Element, tol: f64) -> Result<SumSplit> {
    let shape = x.shape();
    let k = parts.len();
    let mut state = Bisection {
        parts,
        x,
        best: None,
        lower: 0.0,
        direction: None,
    };
    for i in 0..k {
        let mut split = vec![Element::zeros(shape.0, shape.1); k];
        split[i] = x.clone();
        state.offer(&split)?;
    }
    state.offer(&vec![x.scale(1.0 / k as f64); k])?;
    state.certify(x)?;
    let mut y = vec![x.scale(1.0 / k as f64); k];
    let mut hi = match &state.best {
        Some((v, _)) => *v,
        None => {
            // Grow the level until the feasibility test succeeds.
            let mut tau = x.norm().max(1.0);
            let mut found = None;
            for _ in 0..MAX_BISECTIONS {
                if let Level::Feasible = state.level(tau, &mut y, tol)? {
                    found = Some(tau);
                    break;
                }
                tau *= 2.0;
            }
            found.ok_or_else(|| Error::Infeasible("x is outside the cone of the sum".into()))?
        }
    };
    if let Some((_, s)) = &state.best {
        y = s.clone();
    }
    for _ in 0..MAX_BISECTIONS {
        let lo = state.lower;
        if hi - lo <= tol * hi.max(f64::MIN_POSITIVE) {
            break;
        }
        let tau = 0.5 * (lo + hi);
        match state.level(tau, &mut y, tol)? {
            Level::Feasible | Level::Undecided => hi = tau,
            Level::Infeasible => {}
        }
        if state.lower >= hi {
            // An undecided level turned out infeasible; reopen the bracket.
            hi = state.best.as_ref().map_or(2.0 * state.lower, |b| b.0);
        }
    }
    state.polish()?;
    let (value, split) = state
        .best
        .ok_or_else(|| Error::Infeasible("no feasible split found".into()))?;
    Ok(SumSplit {
        value,
        split,
        lower_bound: state.lower.min(value),
    })
}

pub(crate) fn sum_gauge(parts: &[AtomicSet], x: &Element) -> Result<Extended> {
    match sum_gauge_numeric(parts, x, NUMERIC_TOL) {
        Ok(s) => Ok(Extended::Finite(s.value)),
        Err(Error::Infeasible(_)) => Ok(Extended::Infinite),
        Err(e) => Err(e),
    }
}

/// Couples the normalized coefficient sequences of the part decompositions.
pub(crate) fn sum_decompose(parts: &[AtomicSet], x: &Element, tol: f64) -> Result<AtomicDecomposition> {
    let shape = x.shape();
    let s = match sum_gauge_numeric(parts, x, NUMERIC_TOL) {
        Ok(s) => s,
        Err(Error::Infeasible(_)) => return Err(Error::NotInCone),
        Err(e) => return Err(e),
    };
    let g = s.value;
    let mut seqs: Vec<Vec<(f64, Atom)>> = Vec::new();
    let mut recession = Element::zeros(shape.0, shape.1);
    for (p, y) in parts.iter().zip(&s.split) {
        let d = p.decompose(y, tol)?;
        if let Some((c, a)) = &d.recession_part {
            recession.axpy(*c, &a.element);
        }
        let total = d.coefficient_sum();
        if total > 0.0 && g > 0.0 {
            seqs.push(
                d.terms
                    .iter()
                    .map(|(c, a)| (c / total, a.scaled(total / g)))
                    .collect(),
            );
        }
    }
    let mut terms = Vec::new();
    if !seqs.is_empty() {
        let mut idx = vec![0usize; seqs.len()];
        let mut left: Vec<f64> = seqs.iter().map(|s| s[0].0).collect();
        loop {
            let mass = left.iter().copied().fold(f64::INFINITY, f64::min);
            if mass > 0.0 {
                let children = seqs
                    .iter()
                    .zip(&idx)
                    .map(|(s, &j)| s[j].1.clone())
                    .collect();
                terms.push((g * mass, composite(children, shape)));
            }
            let mut done = false;
            for i in 0..seqs.len() {
                left[i] -= mass;
                if left[i] <= 1e-15 {
                    idx[i] += 1;
                    if idx[i] >= seqs[i].len() {
                        done = true;
                    } else {
                        left[i] = seqs[i][idx[i]].0;
                    }
                }
            }
            if done {
                break;
            }
        }
    }
    let rn = recession.norm();
    let recession_part =
        (rn > 0.0).then(|| (rn, Atom::new(recession.scale(1.0 / rn), AtomTag::RecessionDir)));
    Ok(AtomicDecomposition::minimal(terms, recession_part, g))
}

/// Best split found for the union gauge.
fn union_split(parts: &[AtomicSet], x: &Element) -> Result<Option<(f64, Vec<Element>)>> {
    let shape = x.shape();
    let k = parts.len();
    let eval = |split: &[Element]| -> Result<Option<f64>> {
        let mut total = 0.0;
        for (p, y) in parts.iter().zip(split) {
            match p.gauge(y) {
                Ok(Extended::Finite(g)) => total += g,
                Ok(Extended::Infinite) => return Ok(None),
                Err(Error::GaugeUnsupported(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(total))
    };
    let mut best: Option<(f64, Vec<Element>)> = None;
    for i in 0..k {
        let mut split = vec![Element::zeros(shape.0, shape.1); k];
        split[i] = x.clone();
        if let Some(v) = eval(&split)? {
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, split));
            }
        }
    }
    // Compass search over the first k−1 components; the last absorbs the remainder.
    let Some((mut value, mut split)) = best else {
        return Ok(None);
    };
    let dim = x.len();
    let mut step = 0.5 * x.norm_inf().max(f64::MIN_POSITIVE);
    let floor = 1e-10 * x.norm_inf();
    while step > floor {
        let mut improved = false;
        for i in 0..k - 1 {
            for c in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut trial = split.clone();
                    trial[i].as_mut_slice()[c] += sign * step;
                    trial[k - 1].as_mut_slice()[c] -= sign * step;
                    if let Some(v) = eval(&trial)? {
                        if v < value - 1e-15 * value.abs() {
                            value = v;
                            split = trial;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(Some((value, split)))
}

fn union_atom_list(parts: &[AtomicSet]) -> Option<Vec<Element>> {
    let mut all = Vec::new();
    for p in parts {
        all.extend(p.finite_atoms()?.into_iter().map(|a| a.element));
    }
    Some(all)
}

pub(crate) fn union_gauge(parts: &[AtomicSet], x: &Element) -> Result<Extended> {
    if let Some(atoms) = union_atom_list(parts) {
        let set = AtomicSet::finite_with_shape(x.shape(), atoms)?;
        return set.gauge(x);
    }
    Ok(match union_split(parts, x)? {
        Some((v, _)) => Extended::Finite(v),
        None => Extended::Infinite,
    })
}

pub(crate) fn union_decompose(
    parts: &[AtomicSet],
    x: &Element,
    tol: f64,
) -> Result<AtomicDecomposition> {
    if let Some(atoms) = union_atom_list(parts) {
        let set = AtomicSet::finite_with_shape(x.shape(), atoms)?;
        return set.decompose(x, tol);
    }
    let (value, split) = union_split(parts, x)?.ok_or(Error::NotInCone)?;
    let mut terms = Vec::new();
    let mut recession: Option<(f64, Atom)> = None;
    for (p, y) in parts.iter().zip(&split) {
        let d = p.decompose(y, tol)?;
        terms.extend(d.terms);
        if let Some(r) = d.recession_part {
            recession = Some(match recession {
                None => r,
                Some((c0, a0)) => {
                    let mut e = a0.element.scale(c0);
                    e.axpy(r.0, &r.1.element);
                    let n = e.norm();
                    (n, Atom::new(e.scale(1.0 / n.max(f64::MIN_POSITIVE)), AtomTag::RecessionDir))
                }
            });
        }
    }
    Ok(AtomicDecomposition::minimal(terms, recession, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubled_one_norm() {
        let s = sum_descriptor(vec![AtomicSet::signed_basis(2), AtomicSet::signed_basis(2)]).unwrap();
        let z = Element::vector(vec![3.0, 1.0]);
        assert_eq!(s.support(&z).unwrap(), Extended::Finite(6.0));
        let f = s.expose(&z, 4, 1e-9).unwrap();
        assert_eq!(f.atoms[0].element.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn pairing_order() {
        assert_eq!(
            pairings(&[2, 2], 10),
            vec![vec![0, 0], vec![1, 1], vec![0, 1], vec![1, 0]]
        );
        assert_eq!(pairings(&[3, 1], 2), vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn sum_gauge_examples() {
        let two = sum_gauge_numeric(
            &[AtomicSet::signed_basis(2), AtomicSet::signed_basis(2)],
            &Element::vector(vec![2.0, 0.0]),
            1e-9,
        )
        .unwrap();
        assert!((two.value - 1.0).abs() < 1e-12);
        assert!(two.split[0].distance(&Element::vector(vec![1.0, 0.0])) < 1e-12);

        let balls = [AtomicSet::euclidean_ball(2), AtomicSet::euclidean_ball(2)];
        let x = Element::vector(vec![1.2, 1.6]);
        let r = sum_gauge_numeric(&balls, &x, 1e-9).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
        assert!(r.split[0].distance(&x.scale(0.5)) < 1e-6);
    }

    #[test]
    fn union_of_rays() {
        let u = union_descriptor(vec![
            AtomicSet::finite(vec![Element::vector(vec![1.0, 0.0])]).unwrap(),
            AtomicSet::finite(vec![Element::vector(vec![0.0, 1.0])]).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            u.gauge(&Element::vector(vec![1.0, 1.0])).unwrap(),
            Extended::Finite(2.0)
        );
    }

    #[test]
    fn sum_with_zero_set_matches_part() {
        let s = sum_descriptor(vec![AtomicSet::nuclear_ball(2, 2), AtomicSet::zero((2, 2))]).unwrap();
        let x = Element::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let a = s.gauge(&x).unwrap().to_f64();
        let b = AtomicSet::nuclear_ball(2, 2).gauge(&x).unwrap().to_f64();
        assert!((a - b).abs() < 1e-12);
    }
}
