//! Dense two-phase simplex for `min cᵀx  s.t.  A x = b, x ≥ 0` (Bland's rule).

const PIVOT_EPS: f64 = 1e-12;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    /// Reduced costs for `cost` over the first `allowed` columns.
    fn reduced(&self, cost: &[f64], j: usize) -> f64 {
        let mut r = cost.get(j).copied().unwrap_or(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                r -= cb * self.rows[i][j];
            }
        }
        r
    }

    /// Run the simplex iterations; returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| {
                !self.basis.contains(&j) && self.reduced(cost, j) < -COST_EPS
            });
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    let key = (ratio, self.basis[i], i);
                    best = match best {
                        None => Some(key),
                        Some(b) if ratio < b.0 - 1e-15 || (ratio <= b.0 + 1e-15 && key.1 < b.1) => {
                            Some(key)
                        }
                        keep => keep,
                    };
                }
            }
            match best {
                Some((_, _, r)) => self.pivot(r, c),
                None => return false,
            }
        }
        true
    }
}

/// Minimize `cost·x` over `{x ≥ 0 : Σ_j a[i][j] x_j = b[i]}`.
pub fn lp_minimize(cost: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = cost.len();
    let width = n + m;
    let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[width] = sign * b[i];
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        width,
    };
    let mut phase1 = vec![0.0; width];
    for c in phase1.iter_mut().skip(n) {
        *c = 1.0;
    }
    t.optimize(&phase1, width);
    let infeas: f64 = (0..t.rows.len())
        .filter(|&i| t.basis[i] >= n)
        .map(|i| t.rhs(i))
        .sum();
    if infeas > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificials out of the basis or drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| t.rows[i][j].abs() > 1e-9) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    if !t.optimize(cost, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bvar) in t.basis.iter().enumerate() {
        if bvar < n {
            x[bvar] = t.rhs(i).max(0.0);
        }
    }
    let value = x.iter().zip(cost).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}
