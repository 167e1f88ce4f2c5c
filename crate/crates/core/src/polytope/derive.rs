//! Inequalities on transition probabilities implied by nonnegativity of the
//! transfer probabilities.
//!
//! Variables are grouped into classes by the problem's zero and equality
//! constraints. When the transition equations determine every class
//! probability, each class probability is solved for and `P_k >= 0` is
//! rewritten over transition probabilities. Otherwise the facets of the
//! hull of the admissible tables are enumerated.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::hull::{affine_hull, convex_hull};
use super::lp::{Constraint, LinearProgram, LpOutcome, Relation};
use super::{entry_label, ConsistencyProblem};
use crate::error::{Error, Result};
use crate::linalg::{inverse, rank, IndependentRows};
use crate::rational::{denominator_lcm, Q};
use crate::stochastic::TransitionTable;
use crate::systems::decode_mixed;

/// Variables forced to carry equal probability, named `P0`, `P1`, ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableClass {
    pub name: String,
    pub members: Vec<usize>,
    pub member_labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivationMethod {
    /// The class probabilities were solved for exactly.
    DirectSolve,
    /// Facets of the convex hull of the admissible tables.
    FacetEnumeration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// `multiplier · class >= 0` rewritten over transition probabilities.
    Nonnegativity {
        class: String,
        multiplier: Q,
    },
    Facet,
}

/// `Σ coeff·Pr(j|i)  sense  bound`, keyed by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedInequality {
    pub terms: Vec<((usize, usize), Q)>,
    pub sense: Relation,
    pub bound: Q,
    pub provenance: Provenance,
    /// Some nonnegative table obeying every linear identity of the
    /// admissible tables breaks it.
    pub violable: bool,
    pub text: String,
}

impl DerivedInequality {
    pub fn lhs(&self, table: &TransitionTable) -> Q {
        self.terms
            .iter()
            .map(|((i, j), c)| c * table.get(*i, *j))
            .sum()
    }

    /// Nonnegative exactly when the inequality holds.
    pub fn slack(&self, table: &TransitionTable) -> Q {
        let lhs = self.lhs(table);
        match self.sense {
            Relation::Le => &self.bound - lhs,
            _ => lhs - &self.bound,
        }
    }

    pub fn holds(&self, table: &TransitionTable) -> bool {
        !self.slack(table).is_negative()
    }

    /// `>=` form scaled so the coefficient with the smallest key is `±1`.
    pub fn normalized(&self) -> (BTreeMap<(usize, usize), Q>, Q) {
        normalize(&self.terms, self.sense, &self.bound)
    }
}

/// An equation every admissible table satisfies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearIdentity {
    pub terms: Vec<((usize, usize), Q)>,
    pub value: Q,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityDerivation {
    pub method: DerivationMethod,
    pub classes: Vec<VariableClass>,
    pub inequalities: Vec<DerivedInequality>,
    pub identities: Vec<LinearIdentity>,
}

impl InequalityDerivation {
    pub fn violable(&self) -> impl Iterator<Item = &DerivedInequality> {
        self.inequalities.iter().filter(|q| q.violable)
    }
}

fn normalize(
    terms: &[((usize, usize), Q)],
    sense: Relation,
    bound: &Q,
) -> (BTreeMap<(usize, usize), Q>, Q) {
    let flip = sense == Relation::Le;
    let mut map: BTreeMap<(usize, usize), Q> = BTreeMap::new();
    for (k, c) in terms {
        *map.entry(*k).or_insert_with(Q::zero) += if flip { -c.clone() } else { c.clone() };
    }
    map.retain(|_, c| !c.is_zero());
    let mut b = if flip { -bound.clone() } else { bound.clone() };
    if let Some(scale) = map.values().next().map(|c| c.abs()) {
        for c in map.values_mut() {
            *c /= &scale;
        }
        b /= scale;
    }
    (map, b)
}

/// Classes of nonzero variables and the entry vectors
/// `v[i·n_out + j][k] = #{F in class k : F(i) = j}`.
struct Structure {
    classes: Vec<Vec<usize>>,
    entries: Vec<Vec<Q>>,
    sizes: Vec<Q>,
}

fn analyze(problem: &ConsistencyProblem) -> Result<Structure> {
    let n = problem.variables().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let mut zero = vec![false; n];
    for c in problem.extra_constraints() {
        let mut merged: BTreeMap<usize, Q> = BTreeMap::new();
        for (v, a) in &c.terms {
            *merged.entry(*v).or_insert_with(Q::zero) += a;
        }
        merged.retain(|_, a| !a.is_zero());
        let terms: Vec<(usize, Q)> = merged.into_iter().collect();
        let unsupported = || {
            Error::Unsupported(format!(
                "only zero and equal-probability constraints can be solved for; got `{}`",
                c.label
            ))
        };
        if c.relation != Relation::Eq || !c.rhs.is_zero() {
            return Err(unsupported());
        }
        match terms.as_slice() {
            [] => {}
            [(v, _)] => zero[*v] = true,
            [(a, ca), (b, cb)] if *ca == -cb.clone() => {
                let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
                parent[ra] = rb;
            }
            _ => return Err(unsupported()),
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut classes: Vec<Vec<usize>> = groups
        .into_values()
        .filter(|members| !members.iter().any(|&v| zero[v]))
        .collect();
    if classes.is_empty() {
        return Err(Error::InvalidConstraint(
            "every variable is forced to zero".into(),
        ));
    }
    order_classes(problem, &mut classes);

    let layout = problem.layout();
    let (n_in, n_out) = (layout.input_count(), layout.output_count());
    let m = classes.len();
    let mut entries = vec![vec![Q::zero(); m]; n_in * n_out];
    for (k, members) in classes.iter().enumerate() {
        for &v in members {
            let f = &problem.variables()[v];
            for i in 0..n_in {
                entries[i * n_out + f.apply(i)][k] += Q::one();
            }
        }
    }
    let sizes = classes
        .iter()
        .map(|c| Q::from_integer(c.len().into()))
        .collect();
    Ok(Structure {
        classes,
        entries,
        sizes,
    })
}

/// Bell layouts: the representative is the member with fewest minus signs;
/// classes are sorted by that count, then by A outcomes (`-` before `+`).
/// Elsewhere classes keep their first-member order.
fn order_classes(problem: &ConsistencyProblem, classes: &mut [Vec<usize>]) {
    if problem.bell_ports().is_err() {
        return;
    }
    let key = |v: usize| -> (usize, Vec<u8>, Vec<u8>) {
        let (a, b) = problem
            .sign_strings(&problem.variables()[v])
            .expect("Bell ports checked");
        let minus = a.chars().chain(b.chars()).filter(|&c| c == '-').count();
        (minus, a.into_bytes(), b.into_bytes())
    };
    for c in classes.iter_mut() {
        c.sort_by_key(|&v| key(v));
    }
    // '+' < '-' in ASCII, so larger byte strings put minus signs first.
    classes.sort_by(|x, y| {
        let (mx, ax, _) = key(x[0]);
        let (my, ay, _) = key(y[0]);
        mx.cmp(&my).then(ay.cmp(&ax))
    });
}

pub fn polytope_vertices(problem: &ConsistencyProblem) -> Result<Vec<TransitionTable>> {
    let s = analyze(problem)?;
    vertex_points(&s)
        .into_iter()
        .map(|p| table_from_point(problem, &p))
        .collect()
}

fn vertex_points(s: &Structure) -> Vec<Vec<Q>> {
    (0..s.classes.len())
        .map(|k| s.entries.iter().map(|e| &e[k] / &s.sizes[k]).collect())
        .collect()
}

fn table_from_point(problem: &ConsistencyProblem, p: &[Q]) -> Result<TransitionTable> {
    let n_out = problem.layout().output_count();
    let rows = p.chunks(n_out).map(|r| r.to_vec()).collect();
    TransitionTable::new(problem.target().shared_layout().clone(), rows)
}

pub fn derive_inequalities(problem: &ConsistencyProblem) -> Result<InequalityDerivation> {
    let s = analyze(problem)?;
    let layout = problem.layout();
    let n_out = layout.output_count();
    let label = |e: usize| entry_label(layout, e / n_out, e % n_out);

    let classes: Vec<VariableClass> = s
        .classes
        .iter()
        .enumerate()
        .map(|(k, members)| VariableClass {
            name: format!("P{k}"),
            members: members.clone(),
            member_labels: members.iter().map(|&v| problem.variable_label(v)).collect(),
        })
        .collect();

    let points = vertex_points(&s);
    let (hull_equalities, _) = affine_hull(&points);
    let identities: Vec<LinearIdentity> = hull_equalities
        .iter()
        .map(|eq| {
            let terms = sparse(&eq.normal, n_out);
            let named: Vec<(String, Q)> = terms
                .iter()
                .map(|((i, j), c)| (entry_label(layout, *i, *j), c.clone()))
                .collect();
            LinearIdentity {
                text: format!("{} = {}", render_linear(&named, &Q::zero()), eq.value),
                terms,
                value: eq.value.clone(),
            }
        })
        .collect();
    let admissible = LinearProgram::new(
        points[0].len(),
        hull_equalities
            .iter()
            .map(|eq| {
                Constraint::new(
                    eq.normal
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| (k, c.clone()))
                        .collect(),
                    Relation::Eq,
                    eq.value.clone(),
                )
            })
            .collect(),
    );
    let is_violable = |terms: &[((usize, usize), Q)], sense: Relation, bound: &Q| -> bool {
        let mut objective = vec![Q::zero(); points[0].len()];
        for ((i, j), c) in terms {
            objective[i * n_out + j] += c;
        }
        match sense {
            Relation::Le => match admissible.maximize(&objective) {
                LpOutcome::Optimal { objective, .. } => objective > *bound,
                _ => true,
            },
            _ => match admissible.minimize(&objective) {
                LpOutcome::Optimal { objective, .. } => objective < *bound,
                _ => true,
            },
        }
    };

    let m = s.classes.len();
    let mut all_rows = s.entries.clone();
    all_rows.push(s.sizes.clone());
    let direct = rank(&all_rows, m) == m;

    let mut inequalities = Vec::new();
    let method;
    if direct {
        method = DerivationMethod::DirectSolve;
        let order = entry_order(problem);
        let mut seen = Vec::new();
        for family in 0..n_out {
            let basis = choose_basis(&s, &order, family, n_out);
            let mut matrix = vec![s.sizes.clone()];
            matrix.extend(basis.iter().map(|&e| s.entries[e].clone()));
            let inv = inverse(&matrix).expect("basis rows are independent");
            for (k, class) in classes.iter().enumerate() {
                // P_k = inv[k][0] + Σ_s inv[k][s] t_s
                let weights: Vec<(usize, Q)> = basis
                    .iter()
                    .enumerate()
                    .map(|(s_idx, &e)| (e, inv[k][s_idx + 1].clone()))
                    .filter(|(_, w)| !w.is_zero())
                    .collect();
                if weights.is_empty() {
                    continue;
                }
                let constant = inv[k][0].clone();
                let mult = Q::from_integer(denominator_lcm(weights.iter().map(|(_, w)| w)));
                let terms: Vec<((usize, usize), Q)> = weights
                    .iter()
                    .map(|(e, w)| ((e / n_out, e % n_out), w * &mult))
                    .collect();
                let bound = -(&constant * &mult);
                let key = normalize(&terms, Relation::Ge, &bound);
                if seen.contains(&key) {
                    continue;
                }
                seen.push(key);
                let named: Vec<(String, Q)> = weights
                    .iter()
                    .map(|(e, w)| (label(*e), w * &mult))
                    .collect();
                let text = format!(
                    "{}{} = {} >= 0",
                    coefficient_prefix(&mult),
                    class.name,
                    render_linear(&named, &(&constant * &mult))
                );
                inequalities.push(DerivedInequality {
                    violable: is_violable(&terms, Relation::Ge, &bound),
                    terms,
                    sense: Relation::Ge,
                    bound,
                    provenance: Provenance::Nonnegativity {
                        class: class.name.clone(),
                        multiplier: mult,
                    },
                    text,
                });
            }
        }
    } else {
        method = DerivationMethod::FacetEnumeration;
        let hull = convex_hull(&points)?;
        for facet in &hull.facets {
            let mut terms = sparse(&facet.normal, n_out);
            let mut bound = facet.bound.clone();
            let mut sense = Relation::Le;
            let negatives = terms.iter().filter(|(_, c)| c.is_negative()).count();
            if 2 * negatives > terms.len() {
                for (_, c) in terms.iter_mut() {
                    *c = -c.clone();
                }
                bound = -bound;
                sense = Relation::Ge;
            }
            let named: Vec<(String, Q)> = terms
                .iter()
                .map(|((i, j), c)| (entry_label(layout, *i, *j), c.clone()))
                .collect();
            let text = format!(
                "{} {} {}",
                render_linear(&named, &Q::zero()),
                sense.symbol(),
                bound
            );
            inequalities.push(DerivedInequality {
                violable: is_violable(&terms, sense, &bound),
                terms,
                sense,
                bound,
                provenance: Provenance::Facet,
                text,
            });
        }
    }
    Ok(InequalityDerivation {
        method,
        classes,
        inequalities,
        identities,
    })
}

/// Entry order used when picking a basis. On Bell layouts with equal
/// setting counts, pairs `(x, y)` come in cyclic-successor order
/// (`y - x ≡ 1`, then 2, ...), equal settings last.
fn entry_order(problem: &ConsistencyProblem) -> Vec<usize> {
    let layout = problem.layout();
    let n_in = layout.input_count();
    let mut inputs: Vec<usize> = (0..n_in).collect();
    if let Ok(p) = problem.bell_ports() {
        let radices = layout.input_radices();
        let n = radices[p.alpha];
        if radices[p.beta] == n {
            inputs.sort_by_key(|&i| {
                let d = decode_mixed(i, &radices);
                let (x, y) = (d[p.alpha], d[p.beta]);
                let gap = (y + n - x) % n;
                (if gap == 0 { n } else { gap }, x)
            });
        }
    }
    inputs
}

/// Normalization row first, then entries of output `family`, then anything
/// else needed to reach full rank.
fn choose_basis(s: &Structure, inputs: &[usize], family: usize, n_out: usize) -> Vec<usize> {
    let m = s.classes.len();
    let mut tracker = IndependentRows::new(m);
    tracker.try_insert(&s.sizes);
    let mut chosen = Vec::new();
    let fallback = (0..n_out)
        .filter(|&j| j != family)
        .flat_map(|j| inputs.iter().map(move |&i| i * n_out + j));
    let preferred = inputs.iter().map(|&i| i * n_out + family);
    for e in preferred.chain(fallback) {
        if tracker.len() == m {
            break;
        }
        if tracker.try_insert(&s.entries[e]) {
            chosen.push(e);
        }
    }
    chosen
}

fn sparse(normal: &[Q], n_out: usize) -> Vec<((usize, usize), Q)> {
    normal
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| ((k / n_out, k % n_out), c.clone()))
        .collect()
}

fn coefficient_prefix(c: &Q) -> String {
    if c.is_one() {
        String::new()
    } else if c.is_integer() {
        c.to_string()
    } else {
        format!("({c})")
    }
}

/// `Pr(a) + 2Pr(b) - 1/2`; a positive constant leads when the first term is
/// negative.
fn render_linear(terms: &[(String, Q)], constant: &Q) -> String {
    let mut pieces: Vec<(bool, String)> = terms
        .iter()
        .map(|(name, c)| {
            (
                c.is_negative(),
                format!("{}{name}", coefficient_prefix(&c.abs())),
            )
        })
        .collect();
    if !constant.is_zero() {
        let c = (constant.is_negative(), constant.abs().to_string());
        if pieces.first().is_some_and(|(neg, _)| *neg) && !c.0 {
            pieces.insert(0, c);
        } else {
            pieces.push(c);
        }
    }
    if pieces.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (neg, text)) in pieces.iter().enumerate() {
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(text);
    }
    out
}
