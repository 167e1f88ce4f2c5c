//! The consistent region of transfer probabilities as an exact LP.
//!
//! A [`ConsistencyProblem`] has one nonnegative variable `Pr(F)` per
//! admissible transfer function, one equation per transition `(i, j)`,
//! the normalization, and optional extra linear constraints.

pub mod hull;
pub mod lp;

mod derive;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::rational::Q;
use crate::stochastic::{transitions_from_transfers, TransferDistribution, TransitionTable};
use crate::systems::{
    decode_mixed, encode_mixed, enumerate_transfer_functions, EnumerationCap, PortLayout,
    TransferFunction,
};

pub use derive::{
    derive_inequalities, polytope_vertices, DerivationMethod, DerivedInequality,
    InequalityDerivation, LinearIdentity, Provenance, VariableClass,
};
pub use lp::{Constraint, LinearProgram, LpOutcome, Relation};

/// Split of a layout's ports into two regions by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    region_a: BTreeSet<String>,
    region_b: BTreeSet<String>,
}

/// Port indices of each region within a concrete layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedPartition {
    pub a_inputs: Vec<usize>,
    pub a_outputs: Vec<usize>,
    pub b_inputs: Vec<usize>,
    pub b_outputs: Vec<usize>,
}

impl Partition {
    pub fn new<A, B, S, T>(region_a: A, region_b: B) -> Self
    where
        A: IntoIterator<Item = S>,
        B: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        Self {
            region_a: region_a.into_iter().map(Into::into).collect(),
            region_b: region_b.into_iter().map(Into::into).collect(),
        }
    }

    pub fn region_a(&self) -> impl Iterator<Item = &str> {
        self.region_a.iter().map(String::as_str)
    }

    pub fn region_b(&self) -> impl Iterator<Item = &str> {
        self.region_b.iter().map(String::as_str)
    }

    pub fn resolve(&self, layout: &PortLayout) -> Result<ResolvedPartition> {
        if let Some(both) = self.region_a.intersection(&self.region_b).next() {
            return Err(Error::InvalidPartition(format!(
                "port `{both}` is in both regions"
            )));
        }
        let known: BTreeSet<&str> = layout.port_names().collect();
        for name in self.region_a.iter().chain(&self.region_b) {
            if !known.contains(name.as_str()) {
                return Err(Error::InvalidPartition(format!("unknown port `{name}`")));
            }
        }
        let mut out = ResolvedPartition {
            a_inputs: Vec::new(),
            a_outputs: Vec::new(),
            b_inputs: Vec::new(),
            b_outputs: Vec::new(),
        };
        for (k, p) in layout.inputs().iter().enumerate() {
            if self.region_a.contains(&p.name) {
                out.a_inputs.push(k);
            } else if self.region_b.contains(&p.name) {
                out.b_inputs.push(k);
            } else {
                return Err(Error::InvalidPartition(format!(
                    "port `{}` is not covered",
                    p.name
                )));
            }
        }
        for (k, p) in layout.outputs().iter().enumerate() {
            if self.region_a.contains(&p.name) {
                out.a_outputs.push(k);
            } else if self.region_b.contains(&p.name) {
                out.b_outputs.push(k);
            } else {
                return Err(Error::InvalidPartition(format!(
                    "port `{}` is not covered",
                    p.name
                )));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<&str> = self.region_a().collect();
        let b: Vec<&str> = self.region_b().collect();
        write!(f, "{}:{}", a.join(","), b.join(","))
    }
}

/// Which signals a transfer function carries across a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signalling {
    /// Some B output depends on an A input.
    pub a_to_b: bool,
    /// Some A output depends on a B input.
    pub b_to_a: bool,
}

impl Signalling {
    pub fn is_local(&self) -> bool {
        !self.a_to_b && !self.b_to_a
    }

    pub fn describe(&self) -> &'static str {
        match (self.a_to_b, self.b_to_a) {
            (false, false) => "no signals",
            (true, false) => "signal from A to B",
            (false, true) => "signal from B to A",
            (true, true) => "signals in both directions",
        }
    }
}

pub fn classify_signalling(f: &TransferFunction, partition: &Partition) -> Result<Signalling> {
    let layout = f.layout();
    let parts = partition.resolve(layout)?;
    let in_radices = layout.input_radices();
    let out_radices = layout.output_radices();
    let mut s = Signalling {
        a_to_b: false,
        b_to_a: false,
    };
    for i in 0..layout.input_count() {
        let digits = decode_mixed(i, &in_radices);
        let out = decode_mixed(f.apply(i), &out_radices);
        for &port in parts.a_inputs.iter().chain(&parts.b_inputs) {
            let from_a = parts.a_inputs.contains(&port);
            let watched = if from_a {
                &parts.b_outputs
            } else {
                &parts.a_outputs
            };
            for v in 0..in_radices[port] {
                if v == digits[port] {
                    continue;
                }
                let mut other = digits.clone();
                other[port] = v;
                let out2 = decode_mixed(f.apply(encode_mixed(&other, &in_radices)), &out_radices);
                if watched.iter().any(|&o| out[o] != out2[o]) {
                    if from_a {
                        s.a_to_b = true;
                    } else {
                        s.b_to_a = true;
                    }
                }
            }
        }
    }
    Ok(s)
}

/// All product functions `(F_A(inputs of A), F_B(inputs of B))`, sorted.
pub fn local_transfer_functions(
    layout: &Arc<PortLayout>,
    partition: &Partition,
    cap: EnumerationCap,
) -> Result<Vec<TransferFunction>> {
    let parts = partition.resolve(layout)?;
    let in_radices = layout.input_radices();
    let out_radices = layout.output_radices();
    let side = |ins: &[usize], outs: &[usize]| -> (Vec<usize>, Vec<usize>, usize, usize) {
        let ir: Vec<usize> = ins.iter().map(|&k| in_radices[k]).collect();
        let or: Vec<usize> = outs.iter().map(|&k| out_radices[k]).collect();
        let n_in = ir.iter().product();
        let n_out = or.iter().product();
        (ir, or, n_in, n_out)
    };
    let (a_ir, a_or, a_in, a_out) = side(&parts.a_inputs, &parts.a_outputs);
    let (b_ir, b_or, b_in, b_out) = side(&parts.b_inputs, &parts.b_outputs);
    let count_a = BigUint::from(a_out).pow(a_in as u32);
    let count_b = BigUint::from(b_out).pow(b_in as u32);
    cap.check("local transfer function", &(&count_a * &count_b))?;

    let tables = |n_in: usize, n_out: usize| -> Vec<Vec<usize>> {
        let mut all = Vec::new();
        let mut t = vec![0usize; n_in];
        loop {
            all.push(t.clone());
            let mut k = n_in;
            loop {
                if k == 0 {
                    return all;
                }
                k -= 1;
                t[k] += 1;
                if t[k] < n_out {
                    break;
                }
                t[k] = 0;
            }
        }
    };
    let ta = tables(a_in, a_out);
    let tb = tables(b_in, b_out);

    let mut out = Vec::with_capacity(ta.len() * tb.len());
    for fa in &ta {
        for fb in &tb {
            let table: Vec<usize> = (0..layout.input_count())
                .map(|i| {
                    let d = decode_mixed(i, &in_radices);
                    let ia = encode_mixed(
                        &parts.a_inputs.iter().map(|&k| d[k]).collect::<Vec<_>>(),
                        &a_ir,
                    );
                    let ib = encode_mixed(
                        &parts.b_inputs.iter().map(|&k| d[k]).collect::<Vec<_>>(),
                        &b_ir,
                    );
                    let oa = decode_mixed(fa[ia], &a_or);
                    let ob = decode_mixed(fb[ib], &b_or);
                    let mut digits = vec![0usize; out_radices.len()];
                    for (slot, &k) in parts.a_outputs.iter().enumerate() {
                        digits[k] = oa[slot];
                    }
                    for (slot, &k) in parts.b_outputs.iter().enumerate() {
                        digits[k] = ob[slot];
                    }
                    encode_mixed(&digits, &out_radices)
                })
                .collect();
            out.push(TransferFunction::new(layout.clone(), table)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// A linear constraint over the problem's variables (indices into
/// [`ConsistencyProblem::variables`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
    pub label: String,
}

impl LinearConstraint {
    pub fn zero(var: usize, label: impl Into<String>) -> Self {
        Self {
            terms: vec![(var, Q::one())],
            relation: Relation::Eq,
            rhs: Q::zero(),
            label: label.into(),
        }
    }

    pub fn tie(a: usize, b: usize, label: impl Into<String>) -> Self {
        Self {
            terms: vec![(a, Q::one()), (b, -Q::one())],
            relation: Relation::Eq,
            rhs: Q::zero(),
            label: label.into(),
        }
    }
}

/// Input/output port positions of a two-party layout with one setting and
/// one binary outcome per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BellPorts {
    pub alpha: usize,
    pub beta: usize,
    pub a: usize,
    pub b: usize,
}

/// Output value 0 is written `+`, value 1 is `-`.
pub fn sign_char(value: usize) -> char {
    if value == 0 {
        '+'
    } else {
        '-'
    }
}

fn bell_shaped(layout: &PortLayout) -> bool {
    layout.inputs().len() == 2
        && layout.outputs().len() == 2
        && layout.outputs().iter().all(|p| p.is_binary())
}

/// `Pr(+-|23)` style label for transition `(i, j)`: settings 1-based,
/// outcomes as signs. Other layouts get `Pr(j|i)` with digit tuples.
pub fn entry_label(layout: &PortLayout, i: usize, j: usize) -> String {
    let ins = decode_mixed(i, &layout.input_radices());
    let outs = decode_mixed(j, &layout.output_radices());
    if bell_shaped(layout) && layout.inputs().iter().all(|p| p.cardinality <= 9) {
        let o: String = outs.iter().map(|&v| sign_char(v)).collect();
        let s: String = ins.iter().map(|v| (v + 1).to_string()).collect();
        return format!("Pr({o}|{s})");
    }
    let join = |d: &[usize]| -> String {
        if d.len() == 1 {
            d[0].to_string()
        } else {
            let parts: Vec<String> = d.iter().map(|v| v.to_string()).collect();
            format!("({})", parts.join(","))
        }
    };
    format!("Pr({}|{})", join(&outs), join(&ins))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyProblem {
    target: TransitionTable,
    variables: Vec<TransferFunction>,
    index: HashMap<TransferFunction, usize>,
    extra: Vec<LinearConstraint>,
    partition: Option<Partition>,
}

/// All transfer functions of the target's layout as variables.
pub fn build_consistency_problem(
    target: &TransitionTable,
    cap: EnumerationCap,
) -> Result<ConsistencyProblem> {
    let variables = enumerate_transfer_functions(target.shared_layout(), cap)?;
    Ok(ConsistencyProblem::with_variables(
        target.clone(),
        variables,
        None,
    ))
}

/// Only product functions over `partition` as variables, without
/// enumerating the full function set first.
pub fn build_local_consistency_problem(
    target: &TransitionTable,
    partition: &Partition,
    cap: EnumerationCap,
) -> Result<ConsistencyProblem> {
    let variables = local_transfer_functions(target.shared_layout(), partition, cap)?;
    Ok(ConsistencyProblem::with_variables(
        target.clone(),
        variables,
        Some(partition.clone()),
    ))
}

impl ConsistencyProblem {
    fn with_variables(
        target: TransitionTable,
        variables: Vec<TransferFunction>,
        partition: Option<Partition>,
    ) -> Self {
        let index = variables
            .iter()
            .enumerate()
            .map(|(k, f)| (f.clone(), k))
            .collect();
        Self {
            target,
            variables,
            index,
            extra: Vec::new(),
            partition,
        }
    }

    pub fn layout(&self) -> &PortLayout {
        self.target.layout()
    }

    pub fn target(&self) -> &TransitionTable {
        &self.target
    }

    pub fn variables(&self) -> &[TransferFunction] {
        &self.variables
    }

    pub fn variable_index(&self, f: &TransferFunction) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn extra_constraints(&self) -> &[LinearConstraint] {
        &self.extra
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn with_constraint(mut self, constraint: LinearConstraint) -> Result<Self> {
        if let Some((v, _)) = constraint
            .terms
            .iter()
            .find(|(v, _)| *v >= self.variables.len())
        {
            return Err(Error::InvalidConstraint(format!(
                "`{}` references variable {v} of {}",
                constraint.label,
                self.variables.len()
            )));
        }
        self.extra.push(constraint);
        Ok(self)
    }

    /// Adds `Pr(F) = 0` for each listed function.
    pub fn with_zero_functions(mut self, functions: &[TransferFunction]) -> Result<Self> {
        for f in functions {
            let f = f.relabel(self.target.shared_layout().clone())?;
            let k = self.variable_index(&f).ok_or_else(|| {
                Error::InvalidConstraint(format!("{f} is not an admissible variable"))
            })?;
            let label = format!("Pr({}) = 0", self.variable_label(k));
            self = self.with_constraint(LinearConstraint::zero(k, label))?;
        }
        Ok(self)
    }

    /// Ports of a two-party layout; requires a partition.
    pub fn bell_ports(&self) -> Result<BellPorts> {
        let partition = self
            .partition
            .as_ref()
            .ok_or_else(|| Error::Unsupported("requires a locality-restricted problem".into()))?;
        let layout = self.layout();
        let parts = partition.resolve(layout)?;
        let single = |v: &[usize], what: &str| -> Result<usize> {
            match v {
                [k] => Ok(*k),
                _ => Err(Error::Unsupported(format!(
                    "a Bell layout needs exactly one {what} per region"
                ))),
            }
        };
        let ports = BellPorts {
            alpha: single(&parts.a_inputs, "input")?,
            beta: single(&parts.b_inputs, "input")?,
            a: single(&parts.a_outputs, "output")?,
            b: single(&parts.b_outputs, "output")?,
        };
        if !layout.outputs()[ports.a].is_binary() || !layout.outputs()[ports.b].is_binary() {
            return Err(Error::Unsupported("Bell outputs must be binary".into()));
        }
        Ok(ports)
    }

    /// Sign strings `(A outcomes over α, B outcomes over β)` of a local
    /// variable on a Bell layout.
    pub fn sign_strings(&self, f: &TransferFunction) -> Result<(String, String)> {
        let p = self.bell_ports()?;
        Ok(sign_strings_of(f, p))
    }

    /// `[+-+,+-+]` for local Bell variables, otherwise the function table.
    pub fn variable_label(&self, k: usize) -> String {
        let f = &self.variables[k];
        match self.bell_ports() {
            Ok(p) => {
                let (a, b) = sign_strings_of(f, p);
                format!("[{a},{b}]")
            }
            Err(_) => f.to_string(),
        }
    }

    /// The `(i, j)` transition equations, then the normalization, then the
    /// extra constraints.
    pub fn constraint_rows(&self) -> Vec<LinearConstraint> {
        let layout = self.layout();
        let n_in = layout.input_count();
        let n_out = layout.output_count();
        let mut by_entry: Vec<Vec<(usize, Q)>> = vec![Vec::new(); n_in * n_out];
        for (k, f) in self.variables.iter().enumerate() {
            for i in 0..n_in {
                by_entry[i * n_out + f.apply(i)].push((k, Q::one()));
            }
        }
        let mut rows = Vec::with_capacity(n_in * n_out + 1 + self.extra.len());
        for i in 0..n_in {
            for j in 0..n_out {
                rows.push(LinearConstraint {
                    terms: std::mem::take(&mut by_entry[i * n_out + j]),
                    relation: Relation::Eq,
                    rhs: self.target.get(i, j).clone(),
                    label: entry_label(layout, i, j),
                });
            }
        }
        rows.push(LinearConstraint {
            terms: (0..self.variables.len()).map(|k| (k, Q::one())).collect(),
            relation: Relation::Eq,
            rhs: Q::one(),
            label: "normalization".into(),
        });
        rows.extend(self.extra.iter().cloned());
        rows
    }

    pub fn to_lp(&self) -> LinearProgram {
        LinearProgram::new(
            self.variables.len(),
            self.constraint_rows()
                .into_iter()
                .map(|c| Constraint::new(c.terms, c.relation, c.rhs))
                .collect(),
        )
    }

    /// `true` when `dist` uses only admissible variables, satisfies the
    /// extra constraints and reproduces the target exactly.
    pub fn is_consistent(&self, dist: &TransferDistribution) -> bool {
        let Ok(x) = self.weights_vector(dist) else {
            return false;
        };
        transitions_from_transfers(dist) == self.target && self.to_lp().is_feasible_point(&x)
    }

    fn weights_vector(&self, dist: &TransferDistribution) -> Result<Vec<Q>> {
        let mut x = vec![Q::zero(); self.variables.len()];
        for (f, w) in dist.weights() {
            let f = f.relabel(self.target.shared_layout().clone())?;
            let k = self.variable_index(&f).ok_or_else(|| {
                Error::InvalidConstraint(format!("{f} is not an admissible variable"))
            })?;
            x[k] = w.clone();
        }
        Ok(x)
    }
}

/// Keeps only product functions over `partition`; constraints on dropped
/// variables lose those terms (the variables are forced to zero).
pub fn restrict_to_local(
    problem: &ConsistencyProblem,
    partition: &Partition,
) -> Result<ConsistencyProblem> {
    let layout = problem.layout();
    partition.resolve(layout)?;
    let mut keep = Vec::new();
    for (k, f) in problem.variables.iter().enumerate() {
        if classify_signalling(f, partition)?.is_local() {
            keep.push(k);
        }
    }
    let remap: HashMap<usize, usize> = keep
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let variables = keep.iter().map(|&k| problem.variables[k].clone()).collect();
    let mut out = ConsistencyProblem::with_variables(
        problem.target.clone(),
        variables,
        Some(partition.clone()),
    );
    for c in &problem.extra {
        let terms: Vec<(usize, Q)> = c
            .terms
            .iter()
            .filter_map(|(v, a)| remap.get(v).map(|&n| (n, a.clone())))
            .collect();
        if terms.is_empty() && c.relation == Relation::Eq && c.rhs.is_zero() {
            continue;
        }
        out.extra.push(LinearConstraint {
            terms,
            relation: c.relation,
            rhs: c.rhs.clone(),
            label: c.label.clone(),
        });
    }
    Ok(out)
}

fn sign_strings_of(f: &TransferFunction, p: BellPorts) -> (String, String) {
    let layout = f.layout();
    let in_radices = layout.input_radices();
    let out_radices = layout.output_radices();
    let string = |setting_port: usize, out_port: usize| -> String {
        (0..in_radices[setting_port])
            .map(|v| {
                let mut d = vec![0usize; in_radices.len()];
                d[setting_port] = v;
                let o = decode_mixed(f.apply(encode_mixed(&d, &in_radices)), &out_radices);
                sign_char(o[out_port])
            })
            .collect()
    };
    (string(p.alpha, p.a), string(p.beta, p.b))
}

/// Forces `Pr(F) = 0` for every local function whose A and B outcomes
/// differ at some pair of equal settings.
pub fn apply_perfect_correlation(
    problem: &ConsistencyProblem,
    angles_a: &[Angle],
    angles_b: &[Angle],
) -> Result<ConsistencyProblem> {
    let p = problem.bell_ports()?;
    let layout = problem.layout();
    let (na, nb) = (
        layout.inputs()[p.alpha].cardinality,
        layout.inputs()[p.beta].cardinality,
    );
    if angles_a.len() != na || angles_b.len() != nb {
        return Err(Error::InvalidConstraint(format!(
            "mismatched angle sets: {} and {} angles for {na} and {nb} settings",
            angles_a.len(),
            angles_b.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..na)
        .flat_map(|x| (0..nb).map(move |y| (x, y)))
        .filter(|&(x, y)| angles_a[x] == angles_b[y])
        .collect();
    let mut out = problem.clone();
    for k in 0..problem.variables.len() {
        let (a, b) = sign_strings_of(&problem.variables[k], p);
        let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        if pairs.iter().any(|&(x, y)| a[x] != b[y]) {
            let label = format!("perfect correlation: Pr({}) = 0", problem.variable_label(k));
            out = out.with_constraint(LinearConstraint::zero(k, label))?;
        }
    }
    Ok(out)
}

/// Ties `Pr(F) = Pr(F')` where `F'` flips every binary output of `F`.
pub fn apply_spin_reversal_symmetry(problem: &ConsistencyProblem) -> Result<ConsistencyProblem> {
    let layout = problem.layout();
    if !layout.outputs().iter().all(|p| p.is_binary()) {
        return Err(Error::Unsupported(
            "spin reversal needs binary outputs".into(),
        ));
    }
    let radices = layout.output_radices();
    let flip = |j: usize| -> usize {
        let d: Vec<usize> = decode_mixed(j, &radices)
            .into_iter()
            .map(|v| 1 - v)
            .collect();
        encode_mixed(&d, &radices)
    };
    let mut out = problem.clone();
    for (k, f) in problem.variables.iter().enumerate() {
        let g = TransferFunction::new(
            f.shared_layout().clone(),
            f.table().iter().map(|&j| flip(j)).collect(),
        )?;
        if let Some(m) = problem.variable_index(&g) {
            if m > k {
                let label = format!(
                    "spin reversal: Pr({}) = Pr({})",
                    problem.variable_label(k),
                    problem.variable_label(m)
                );
                out = out.with_constraint(LinearConstraint::tie(k, m, label))?;
            }
        }
    }
    Ok(out)
}

/// Farkas multipliers aligned with [`ConsistencyProblem::constraint_rows`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Q>,
}

impl FarkasCertificate {
    /// Exact check; no solver involved.
    pub fn verify(&self, problem: &ConsistencyProblem) -> bool {
        problem.to_lp().verify_farkas(&self.multipliers)
    }

    /// The positive value `yᵀb`: combining the constraints with `y` gives
    /// `0 >= yᵀb`.
    pub fn contradiction(&self, problem: &ConsistencyProblem) -> Q {
        problem.to_lp().farkas_value(&self.multipliers)
    }

    /// Labelled nonzero multipliers.
    pub fn support(&self, problem: &ConsistencyProblem) -> Vec<(String, Q)> {
        problem
            .constraint_rows()
            .into_iter()
            .zip(&self.multipliers)
            .filter(|(_, y)| !y.is_zero())
            .map(|(c, y)| (c.label, y.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityReport {
    Feasible { witness: TransferDistribution },
    Infeasible { certificate: FarkasCertificate },
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityReport::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&TransferDistribution> {
        match self {
            FeasibilityReport::Feasible { witness } => Some(witness),
            FeasibilityReport::Infeasible { .. } => None,
        }
    }

    pub fn certificate(&self) -> Option<&FarkasCertificate> {
        match self {
            FeasibilityReport::Infeasible { certificate } => Some(certificate),
            FeasibilityReport::Feasible { .. } => None,
        }
    }
}

pub fn solve_feasibility(problem: &ConsistencyProblem) -> Result<FeasibilityReport> {
    match problem.to_lp().feasibility() {
        LpOutcome::Optimal { x, .. } => {
            let weights: BTreeMap<TransferFunction, Q> = problem
                .variables
                .iter()
                .zip(x)
                .filter(|(_, w)| w.is_positive())
                .map(|(f, w)| (f.clone(), w))
                .collect();
            let witness =
                TransferDistribution::new(problem.target.shared_layout().clone(), weights)?;
            Ok(FeasibilityReport::Feasible { witness })
        }
        LpOutcome::Infeasible { farkas } => Ok(FeasibilityReport::Infeasible {
            certificate: FarkasCertificate {
                multipliers: farkas,
            },
        }),
        LpOutcome::Unbounded => unreachable!("feasibility objective is zero"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeakSignalVerdict {
    /// A local distribution reproduces the table.
    NoWeakSignal {
        problem: Box<ConsistencyProblem>,
        witness: TransferDistribution,
    },
    /// No local distribution does: every consistent distribution gives
    /// signalling functions nonzero weight.
    WeakSignal {
        problem: Box<ConsistencyProblem>,
        certificate: FarkasCertificate,
    },
}

impl WeakSignalVerdict {
    pub fn is_weak_signal(&self) -> bool {
        matches!(self, WeakSignalVerdict::WeakSignal { .. })
    }

    pub fn problem(&self) -> &ConsistencyProblem {
        match self {
            WeakSignalVerdict::NoWeakSignal { problem, .. }
            | WeakSignalVerdict::WeakSignal { problem, .. } => problem,
        }
    }

    /// Re-checks the attached witness or certificate.
    pub fn verify(&self) -> bool {
        match self {
            WeakSignalVerdict::NoWeakSignal { problem, witness } => problem.is_consistent(witness),
            WeakSignalVerdict::WeakSignal {
                problem,
                certificate,
            } => certificate.verify(problem),
        }
    }
}

pub fn certify_weak_signal(
    target: &TransitionTable,
    partition: &Partition,
    cap: EnumerationCap,
) -> Result<WeakSignalVerdict> {
    let problem = build_local_consistency_problem(target, partition, cap)?;
    Ok(match solve_feasibility(&problem)? {
        FeasibilityReport::Feasible { witness } => WeakSignalVerdict::NoWeakSignal {
            problem: Box::new(problem),
            witness,
        },
        FeasibilityReport::Infeasible { certificate } => WeakSignalVerdict::WeakSignal {
            problem: Box::new(problem),
            certificate,
        },
    })
}

/// `4·Pr(+-|αβ) - 1` for 0-based settings `α`, `β`.
pub fn expectation_value(table: &TransitionTable, alpha: usize, beta: usize) -> Result<Q> {
    let layout = table.layout();
    if !bell_shaped(layout) {
        return Err(Error::InvalidTable(
            "expectation values need two settings and two binary outcomes".into(),
        ));
    }
    let radices = layout.input_radices();
    if alpha >= radices[0] || beta >= radices[1] {
        return Err(Error::InvalidTable(format!(
            "setting pair ({alpha}, {beta}) out of range"
        )));
    }
    let i = encode_mixed(&[alpha, beta], &radices);
    let j = encode_mixed(&[0, 1], &layout.output_radices());
    Ok(Q::from_integer(4.into()) * table.get(i, j) - Q::one())
}
