//! Exact rational linear programming.
//!
//! Revised two-phase simplex with Bland's rule over `x >= 0`. The basis
//! inverse is kept dense (problems here have at most a few hundred rows);
//! columns are sparse so wide problems price cheaply. Infeasibility is
//! reported with a Farkas multiplier vector that can be checked without the
//! solver.

use num_traits::{Signed, Zero};

use crate::rational::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

/// `Σ coeff·x_var  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(terms: Vec<(usize, Q)>, relation: Relation, rhs: Q) -> Self {
        Self {
            terms,
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, x: &[Q]) -> Q {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| c * &x[*v])
            .sum()
    }

    pub fn is_satisfied(&self, x: &[Q]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }

    /// `x_var = 0` written as a single positive-or-negative term.
    fn fixes_to_zero(&self) -> Option<usize> {
        match self.terms.as_slice() {
            [(v, c)] if self.relation == Relation::Eq && self.rhs.is_zero() && !c.is_zero() => {
                Some(*v)
            }
            _ => None,
        }
    }
}

/// Feasible set `{x >= 0 : constraints}` over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<Q>,
        objective: Q,
    },
    /// Multipliers aligned with `constraints`; see [`LinearProgram::verify_farkas`].
    Infeasible {
        farkas: Vec<Q>,
    },
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize, constraints: Vec<Constraint>) -> Self {
        Self {
            num_vars,
            constraints,
        }
    }

    pub fn is_feasible_point(&self, x: &[Q]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied(x))
    }

    /// Checks a Farkas certificate `y` by exact arithmetic:
    /// `y_r <= 0` on `<=` rows, `y_r >= 0` on `>=` rows,
    /// `Σ_r y_r a_rj <= 0` for every variable and `Σ_r y_r b_r > 0`.
    /// Any feasible `x` would give `0 >= yᵀAx >= yᵀb > 0`.
    pub fn verify_farkas(&self, y: &[Q]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let mut column = vec![Q::zero(); self.num_vars];
        let mut rhs = Q::zero();
        for (c, yr) in self.constraints.iter().zip(y) {
            let sign_ok = match c.relation {
                Relation::Eq => true,
                Relation::Le => !yr.is_positive(),
                Relation::Ge => !yr.is_negative(),
            };
            if !sign_ok {
                return false;
            }
            if yr.is_zero() {
                continue;
            }
            for (v, a) in &c.terms {
                column[*v] += yr * a;
            }
            rhs += yr * &c.rhs;
        }
        rhs.is_positive() && column.iter().all(|v| !v.is_positive())
    }

    /// `yᵀb` for a certificate: the positive quantity that a feasible point
    /// would have to bound by zero.
    pub fn farkas_value(&self, y: &[Q]) -> Q {
        self.constraints
            .iter()
            .zip(y)
            .map(|(c, yr)| yr * &c.rhs)
            .sum()
    }

    pub fn feasibility(&self) -> LpOutcome {
        self.minimize(&vec![Q::zero(); self.num_vars])
    }

    pub fn minimize(&self, objective: &[Q]) -> LpOutcome {
        assert_eq!(objective.len(), self.num_vars, "objective length");
        Simplex::build(self).solve(self, objective)
    }

    pub fn maximize(&self, objective: &[Q]) -> LpOutcome {
        let neg: Vec<Q> = objective.iter().map(|c| -c).collect();
        match self.minimize(&neg) {
            LpOutcome::Optimal { x, objective } => LpOutcome::Optimal {
                x,
                objective: -objective,
            },
            other => other,
        }
    }
}

/// Standard form `A x = b, x >= 0, b >= 0` plus bookkeeping back to the
/// original program.
struct Simplex {
    rows: usize,
    // Sparse columns: real variables first, then slacks.
    columns: Vec<Vec<(usize, Q)>>,
    b: Vec<Q>,
    // Original constraint index per standard row, and the sign applied.
    row_origin: Vec<(usize, bool)>,
    // Standard column per original variable (None when fixed at zero).
    var_column: Vec<Option<usize>>,
    // Original constraints eliminated as `x_v = 0`.
    zero_rows: Vec<(usize, usize)>,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Self {
        let mut fixed = vec![false; lp.num_vars];
        let mut zero_rows = Vec::new();
        for (k, c) in lp.constraints.iter().enumerate() {
            if let Some(v) = c.fixes_to_zero() {
                fixed[v] = true;
                zero_rows.push((k, v));
            }
        }
        let mut var_column = vec![None; lp.num_vars];
        let mut next = 0;
        for (v, slot) in var_column.iter_mut().enumerate() {
            if !fixed[v] {
                *slot = Some(next);
                next += 1;
            }
        }
        let mut columns: Vec<Vec<(usize, Q)>> = vec![Vec::new(); next];
        let mut b = Vec::new();
        let mut row_origin = Vec::new();
        let mut slack_rows = Vec::new();
        for (k, c) in lp.constraints.iter().enumerate() {
            if c.fixes_to_zero().is_some() {
                continue;
            }
            let r = b.len();
            let flip = c.rhs.is_negative();
            let sign = |q: &Q| if flip { -q.clone() } else { q.clone() };
            for (v, a) in &c.terms {
                if let Some(col) = var_column[*v] {
                    if !a.is_zero() {
                        columns[col].push((r, sign(a)));
                    }
                }
            }
            match c.relation {
                Relation::Eq => {}
                Relation::Le => slack_rows.push((r, sign(&Q::from_integer(1.into())))),
                Relation::Ge => slack_rows.push((r, sign(&Q::from_integer((-1).into())))),
            }
            b.push(sign(&c.rhs));
            row_origin.push((k, flip));
        }
        for (r, a) in slack_rows {
            columns.push(vec![(r, a)]);
        }
        // Merge duplicate terms on the same row.
        for col in &mut columns {
            col.sort_by_key(|(r, _)| *r);
            let mut merged: Vec<(usize, Q)> = Vec::with_capacity(col.len());
            for (r, a) in col.drain(..) {
                match merged.last_mut() {
                    Some((lr, la)) if *lr == r => *la += a,
                    _ => merged.push((r, a)),
                }
            }
            merged.retain(|(_, a)| !a.is_zero());
            *col = merged;
        }
        Self {
            rows: b.len(),
            columns,
            b,
            row_origin,
            var_column,
            zero_rows,
        }
    }

    fn solve(&self, lp: &LinearProgram, objective: &[Q]) -> LpOutcome {
        let m = self.rows;
        let n = self.columns.len();
        let mut state = Tableau::new(m, n, self.b.clone());

        // Phase 1: minimize the sum of artificials.
        let phase1_cost = |j: usize| -> Q {
            if j >= n {
                Q::from_integer(1.into())
            } else {
                Q::zero()
            }
        };
        match state.run(&self.columns, &phase1_cost) {
            RunResult::Optimal => {}
            RunResult::Unbounded => unreachable!("phase 1 is bounded below by zero"),
        }
        let infeasibility: Q = (0..m)
            .filter(|&r| state.basis[r] >= n)
            .map(|r| state.xb[r].clone())
            .sum();
        if infeasibility.is_positive() {
            let y = state.duals(&phase1_cost);
            return LpOutcome::Infeasible {
                farkas: self.certificate(lp, &y),
            };
        }
        state.drive_out_artificials(&self.columns);

        // Phase 2.
        let mut cost = vec![Q::zero(); n];
        for (v, c) in objective.iter().enumerate() {
            if let Some(col) = self.var_column[v] {
                cost[col] = c.clone();
            }
        }
        let phase2_cost = |j: usize| -> Q {
            if j >= n {
                Q::zero()
            } else {
                cost[j].clone()
            }
        };
        match state.run(&self.columns, &phase2_cost) {
            RunResult::Unbounded => LpOutcome::Unbounded,
            RunResult::Optimal => {
                let mut col_value = vec![Q::zero(); n];
                for r in 0..m {
                    if state.basis[r] < n {
                        col_value[state.basis[r]] = state.xb[r].clone();
                    }
                }
                let x: Vec<Q> = self
                    .var_column
                    .iter()
                    .map(|c| c.map(|c| col_value[c].clone()).unwrap_or_else(Q::zero))
                    .collect();
                let objective_value = objective
                    .iter()
                    .zip(&x)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, v)| c * v)
                    .sum();
                LpOutcome::Optimal {
                    x,
                    objective: objective_value,
                }
            }
        }
    }

    /// Maps phase-1 duals back onto the original constraints, filling in the
    /// multipliers of eliminated `x_v = 0` rows so every column condition holds.
    fn certificate(&self, lp: &LinearProgram, y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); lp.constraints.len()];
        for (r, &(k, flip)) in self.row_origin.iter().enumerate() {
            out[k] = if flip { -y[r].clone() } else { y[r].clone() };
        }
        let mut column = vec![Q::zero(); lp.num_vars];
        for (c, yr) in lp.constraints.iter().zip(&out) {
            if yr.is_zero() {
                continue;
            }
            for (v, a) in &c.terms {
                column[*v] += yr * a;
            }
        }
        let mut handled = vec![false; lp.num_vars];
        for &(k, v) in &self.zero_rows {
            if handled[v] {
                continue;
            }
            handled[v] = true;
            if column[v].is_positive() {
                let coeff: Q = lp.constraints[k].terms.iter().map(|(_, a)| a.clone()).sum();
                out[k] = -column[v].clone() / coeff;
            }
        }
        out
    }
}

enum RunResult {
    Optimal,
    Unbounded,
}

/// Revised-simplex state: basis, dense basis inverse and basic values.
/// Artificial column `r` has index `n + r`.
struct Tableau {
    m: usize,
    n: usize,
    basis: Vec<usize>,
    binv: Vec<Vec<Q>>,
    xb: Vec<Q>,
    in_basis: Vec<bool>,
}

impl Tableau {
    fn new(m: usize, n: usize, b: Vec<Q>) -> Self {
        let binv = (0..m)
            .map(|r| {
                (0..m)
                    .map(|k| {
                        if r == k {
                            Q::from_integer(1.into())
                        } else {
                            Q::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut in_basis = vec![false; n + m];
        for flag in in_basis.iter_mut().skip(n) {
            *flag = true;
        }
        Self {
            m,
            n,
            basis: (n..n + m).collect(),
            binv,
            xb: b,
            in_basis,
        }
    }

    fn duals(&self, cost: &dyn Fn(usize) -> Q) -> Vec<Q> {
        let mut y = vec![Q::zero(); self.m];
        for r in 0..self.m {
            let c = cost(self.basis[r]);
            if c.is_zero() {
                continue;
            }
            for (yk, bk) in y.iter_mut().zip(&self.binv[r]) {
                if !bk.is_zero() {
                    *yk += &c * bk;
                }
            }
        }
        y
    }

    fn ftran(&self, column: &[(usize, Q)]) -> Vec<Q> {
        (0..self.m)
            .map(|r| {
                column
                    .iter()
                    .filter(|(k, _)| !self.binv[r][*k].is_zero())
                    .map(|(k, a)| &self.binv[r][*k] * a)
                    .sum()
            })
            .collect()
    }

    #[allow(clippy::needless_range_loop)]
    fn pivot(&mut self, row: usize, entering: usize, u: &[Q]) {
        let inv = u[row].recip();
        for v in self.binv[row].iter_mut() {
            *v *= &inv;
        }
        self.xb[row] *= &inv;
        let pivot_row = self.binv[row].clone();
        let pivot_x = self.xb[row].clone();
        for r in 0..self.m {
            if r == row || u[r].is_zero() {
                continue;
            }
            let f = &u[r];
            for (v, p) in self.binv[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= f * p;
                }
            }
            self.xb[r] -= f * &pivot_x;
        }
        self.in_basis[self.basis[row]] = false;
        self.in_basis[entering] = true;
        self.basis[row] = entering;
    }

    /// Bland's rule: lowest-index entering column with negative reduced cost;
    /// among tied ratios, the row whose basic variable has the lowest index.
    #[allow(clippy::needless_range_loop)]
    fn run(&mut self, columns: &[Vec<(usize, Q)>], cost: &dyn Fn(usize) -> Q) -> RunResult {
        loop {
            let y = self.duals(cost);
            let entering = (0..self.n).find(|&j| {
                if self.in_basis[j] {
                    return false;
                }
                let d: Q = cost(j)
                    - columns[j]
                        .iter()
                        .filter(|(r, _)| !y[*r].is_zero())
                        .map(|(r, a)| &y[*r] * a)
                        .sum::<Q>();
                d.is_negative()
            });
            let Some(j) = entering else {
                return RunResult::Optimal;
            };
            let u = self.ftran(&columns[j]);
            let mut best: Option<(usize, Q)> = None;
            for r in 0..self.m {
                if !u[r].is_positive() {
                    continue;
                }
                let ratio = &self.xb[r] / &u[r];
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((row, _)) = best else {
                return RunResult::Unbounded;
            };
            self.pivot(row, j, &u);
        }
    }

    /// After a successful phase 1, replaces zero-valued artificial basics by
    /// real columns where possible. Rows where no real column can enter are
    /// redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self, columns: &[Vec<(usize, Q)>]) {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let candidate = (0..self.n).find(|&j| {
                if self.in_basis[j] {
                    return false;
                }
                let entry: Q = columns[j]
                    .iter()
                    .filter(|(k, _)| !self.binv[r][*k].is_zero())
                    .map(|(k, a)| &self.binv[r][*k] * a)
                    .sum();
                !entry.is_zero()
            });
            if let Some(j) = candidate {
                let u = self.ftran(&columns[j]);
                self.pivot(r, j, &u);
            }
        }
    }
}
