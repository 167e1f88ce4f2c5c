//! Stochastic systems in the transition and transfer pictures.
//!
//! A [`TransitionTable`] holds the conditional probabilities `Pr(j|i)`; a
//! [`TransferDistribution`] assigns probabilities to whole transfer
//! functions. The map from the second to the first is many-to-one.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{is_probability, Q};
use crate::systems::{close_loop, compose_series, PortLayout, TransferFunction};

/// Row-stochastic matrix `Pr(j|i)`: rows are joint inputs, columns joint outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTable {
    layout: Arc<PortLayout>,
    rows: Vec<Vec<Q>>,
}

impl TransitionTable {
    pub fn new(layout: impl Into<Arc<PortLayout>>, rows: Vec<Vec<Q>>) -> Result<Self> {
        let layout = layout.into();
        let (n_in, n_out) = (layout.input_count(), layout.output_count());
        if rows.len() != n_in {
            return Err(Error::InvalidTable(format!(
                "{} rows for {n_in} joint inputs",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_out {
                return Err(Error::InvalidTable(format!(
                    "row {i} has {} entries for {n_out} joint outputs",
                    row.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !is_probability(p)) {
                return Err(Error::InvalidProbability(format!("Pr(.|{i}) = {p}")));
            }
            let sum: Q = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::InvalidTable(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(Self { layout, rows })
    }

    /// 0/1 table of a deterministic function.
    pub fn deterministic(f: &TransferFunction) -> Self {
        let n_out = f.layout().output_count();
        let rows = f
            .table()
            .iter()
            .map(|&j| {
                (0..n_out)
                    .map(|k| if k == j { Q::one() } else { Q::zero() })
                    .collect()
            })
            .collect();
        Self {
            layout: Arc::clone(f.shared_layout()),
            rows,
        }
    }

    pub fn layout(&self) -> &PortLayout {
        &self.layout
    }

    pub fn shared_layout(&self) -> &Arc<PortLayout> {
        &self.layout
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn get(&self, input: usize, output: usize) -> &Q {
        &self.rows[input][output]
    }

    /// The function this table encodes, when every entry is 0 or 1.
    pub fn as_deterministic(&self) -> Option<TransferFunction> {
        let table: Option<Vec<usize>> = self
            .rows
            .iter()
            .map(|row| row.iter().position(|p| p.is_one()))
            .collect();
        TransferFunction::new(Arc::clone(&self.layout), table?).ok()
    }

    /// Stochastic-matrix product: `self` feeds `next`.
    pub fn then(&self, next: &TransitionTable) -> Result<TransitionTable> {
        if !self.layout.feeds(&next.layout) {
            return Err(Error::LayoutMismatch {
                expected: self.layout.describe_outputs(),
                found: next.layout.describe_inputs(),
            });
        }
        let n_out = next.layout.output_count();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                (0..n_out)
                    .map(|k| {
                        row.iter()
                            .zip(&next.rows)
                            .filter(|(p, _)| !p.is_zero())
                            .map(|(p, nrow)| p * &nrow[k])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(TransitionTable {
            layout: Arc::new(self.layout.with_outputs_of(&next.layout)?),
            rows,
        })
    }
}

/// N(i)·(N(j) − 1): free parameters of a transition table.
pub fn count_independent_transition_probabilities(layout: &PortLayout) -> usize {
    layout.input_count() * (layout.output_count() - 1)
}

/// A probability distribution over the transfer functions of one layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferDistribution {
    layout: Arc<PortLayout>,
    weights: BTreeMap<TransferFunction, Q>,
}

impl TransferDistribution {
    /// Zero weights are dropped; duplicate functions are summed.
    pub fn new(
        layout: impl Into<Arc<PortLayout>>,
        weights: impl IntoIterator<Item = (TransferFunction, Q)>,
    ) -> Result<Self> {
        let layout = layout.into();
        let mut map: BTreeMap<TransferFunction, Q> = BTreeMap::new();
        for (f, w) in weights {
            if f.layout().input_radices() != layout.input_radices()
                || f.layout().output_radices() != layout.output_radices()
            {
                return Err(Error::LayoutMismatch {
                    expected: layout.to_string(),
                    found: f.layout().to_string(),
                });
            }
            if !is_probability(&w) {
                return Err(Error::InvalidProbability(format!("Pr({f}) = {w}")));
            }
            if w.is_zero() {
                continue;
            }
            let f = f.relabel(Arc::clone(&layout))?;
            *map.entry(f).or_insert_with(Q::zero) += w;
        }
        let total: Q = map.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidProbability(format!(
                "transfer probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            layout,
            weights: map,
        })
    }

    pub fn point(f: &TransferFunction) -> Self {
        Self {
            layout: Arc::clone(f.shared_layout()),
            weights: BTreeMap::from([(f.clone(), Q::one())]),
        }
    }

    pub fn uniform(functions: &[TransferFunction]) -> Result<Self> {
        let first = functions
            .first()
            .ok_or_else(|| Error::InvalidProbability("uniform over no functions".into()))?;
        let w = Q::new(1.into(), functions.len().into());
        Self::new(
            Arc::clone(first.shared_layout()),
            functions.iter().map(|f| (f.clone(), w.clone())),
        )
    }

    pub fn layout(&self) -> &PortLayout {
        &self.layout
    }

    pub fn shared_layout(&self) -> &Arc<PortLayout> {
        &self.layout
    }

    /// Non-zero weights in canonical function order.
    pub fn weights(&self) -> &BTreeMap<TransferFunction, Q> {
        &self.weights
    }

    pub fn probability(&self, f: &TransferFunction) -> Q {
        f.relabel(Arc::clone(&self.layout))
            .ok()
            .and_then(|f| self.weights.get(&f).cloned())
            .unwrap_or_else(Q::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &TransferFunction> {
        self.weights.keys()
    }

    pub fn is_point_mass(&self) -> bool {
        self.weights.len() == 1
    }
}

impl fmt::Display for TransferDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .weights
            .iter()
            .map(|(func, w)| format!("Pr({func})={w}"))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// `Pr(j|i) = Σ_F Pr(F) δ(j, F(i))`.
pub fn transitions_from_transfers(dist: &TransferDistribution) -> TransitionTable {
    let layout = &dist.layout;
    let mut rows = vec![vec![Q::zero(); layout.output_count()]; layout.input_count()];
    for (f, w) in &dist.weights {
        for (i, &j) in f.table().iter().enumerate() {
            rows[i][j] += w;
        }
    }
    TransitionTable {
        layout: Arc::clone(layout),
        rows,
    }
}

/// Joint distribution over tuples of transfer functions, one per component.
///
/// The full joint table is stored, so correlated components are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTransferDistribution {
    layouts: Vec<Arc<PortLayout>>,
    weights: BTreeMap<Vec<TransferFunction>, Q>,
}

impl JointTransferDistribution {
    pub fn new(
        layouts: Vec<Arc<PortLayout>>,
        weights: impl IntoIterator<Item = (Vec<TransferFunction>, Q)>,
    ) -> Result<Self> {
        if layouts.is_empty() {
            return Err(Error::InvalidProbability("joint over no components".into()));
        }
        let mut map: BTreeMap<Vec<TransferFunction>, Q> = BTreeMap::new();
        for (tuple, w) in weights {
            if tuple.len() != layouts.len() {
                return Err(Error::InvalidProbability(format!(
                    "tuple of {} functions for {} components",
                    tuple.len(),
                    layouts.len()
                )));
            }
            if !is_probability(&w) {
                return Err(Error::InvalidProbability(format!("joint weight {w}")));
            }
            if w.is_zero() {
                continue;
            }
            let tuple = tuple
                .iter()
                .zip(&layouts)
                .map(|(f, l)| f.relabel(Arc::clone(l)))
                .collect::<Result<Vec<_>>>()?;
            *map.entry(tuple).or_insert_with(Q::zero) += w;
        }
        let total: Q = map.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidProbability(format!(
                "joint transfer probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            layouts,
            weights: map,
        })
    }

    pub fn components(&self) -> usize {
        self.layouts.len()
    }

    pub fn layouts(&self) -> &[Arc<PortLayout>] {
        &self.layouts
    }

    pub fn weights(&self) -> &BTreeMap<Vec<TransferFunction>, Q> {
        &self.weights
    }

    pub fn marginal(&self, component: usize) -> TransferDistribution {
        let mut map: BTreeMap<TransferFunction, Q> = BTreeMap::new();
        for (tuple, w) in &self.weights {
            *map.entry(tuple[component].clone()).or_insert_with(Q::zero) += w;
        }
        TransferDistribution {
            layout: Arc::clone(&self.layouts[component]),
            weights: map,
        }
    }
}

/// Independent components: `Pr(F^1, F^2, …) = Pr(F^1) Pr(F^2) …`.
pub fn product_distribution(parts: &[TransferDistribution]) -> Result<JointTransferDistribution> {
    if parts.is_empty() {
        return Err(Error::InvalidProbability(
            "product of no distributions".into(),
        ));
    }
    let mut tuples: Vec<(Vec<TransferFunction>, Q)> = vec![(Vec::new(), Q::one())];
    for part in parts {
        let mut next = Vec::with_capacity(tuples.len() * part.weights.len());
        for (prefix, pw) in &tuples {
            for (f, w) in &part.weights {
                let mut t = prefix.clone();
                t.push(f.clone());
                next.push((t, pw * w));
            }
        }
        tuples = next;
    }
    Ok(JointTransferDistribution {
        layouts: parts.iter().map(|p| Arc::clone(&p.layout)).collect(),
        weights: tuples.into_iter().collect(),
    })
}

/// `true` iff every joint weight (including zero ones) equals the product of
/// its marginals.
pub fn is_factorized(joint: &JointTransferDistribution) -> bool {
    let marginals: Vec<TransferDistribution> =
        (0..joint.components()).map(|k| joint.marginal(k)).collect();
    let product = product_distribution(&marginals).expect("marginals are non-empty");
    // Both tables are supported inside the product of the marginal supports,
    // and zero weights are never stored, so map equality is exact.
    product.weights == joint.weights
}

/// Pushes a joint distribution of a series chain through composition:
/// `Pr(F) = Σ Pr(F^1, F^2, …) δ(F, … ∘ F^2 ∘ F^1)`.
pub fn series_transfer_distribution(
    joint: &JointTransferDistribution,
) -> Result<TransferDistribution> {
    for pair in joint.layouts.windows(2) {
        if !pair[0].feeds(&pair[1]) {
            return Err(Error::LayoutMismatch {
                expected: pair[0].describe_outputs(),
                found: pair[1].describe_inputs(),
            });
        }
    }
    let mut map: BTreeMap<TransferFunction, Q> = BTreeMap::new();
    let mut layout: Option<Arc<PortLayout>> = None;
    for (tuple, w) in &joint.weights {
        let mut acc = tuple[0].clone();
        for f in &tuple[1..] {
            acc = compose_series(&acc, f)?;
        }
        let shared = layout.get_or_insert_with(|| Arc::clone(acc.shared_layout()));
        let acc = acc.relabel(Arc::clone(shared))?;
        *map.entry(acc).or_insert_with(Q::zero) += w;
    }
    Ok(TransferDistribution {
        layout: layout.expect("joint distributions are non-empty"),
        weights: map,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticLoopReport {
    /// Distribution over loop transfer functions induced by the joint.
    pub loop_distribution: TransferDistribution,
    /// Loop functions in the support that have no fixed point.
    pub forbidden_functions: Vec<TransferFunction>,
    /// Total probability mass on fixed-point-free loop functions.
    pub contradiction_probability: Q,
}

impl StochasticLoopReport {
    /// The stochastic loop constraint: forbidden iff the contradiction has
    /// non-zero probability.
    pub fn is_forbidden(&self) -> bool {
        !self.contradiction_probability.is_zero()
    }
}

/// Closes every joint outcome of a cyclic chain into a loop function and
/// collects the probability of the fixed-point-free ones.
pub fn stochastic_loop_analysis(joint: &JointTransferDistribution) -> Result<StochasticLoopReport> {
    let mut map: BTreeMap<TransferFunction, Q> = BTreeMap::new();
    let mut layout: Option<Arc<PortLayout>> = None;
    for (tuple, w) in &joint.weights {
        let f_loop = close_loop(tuple)?;
        let shared = layout.get_or_insert_with(|| Arc::clone(f_loop.shared_layout()));
        let f_loop = f_loop.relabel(Arc::clone(shared))?;
        *map.entry(f_loop).or_insert_with(Q::zero) += w;
    }
    let mut forbidden = Vec::new();
    let mut mass = Q::zero();
    for (f, w) in &map {
        if f.fixed_points()?.is_empty() {
            forbidden.push(f.clone());
            mass += w;
        }
    }
    Ok(StochasticLoopReport {
        loop_distribution: TransferDistribution {
            layout: layout.expect("joint distributions are non-empty"),
            weights: map,
        },
        forbidden_functions: forbidden,
        contradiction_probability: mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::systems::{loop_status, Elementary};

    fn channel(e: &Elementary, p_id: Q, p_not: Q, p_c0: Q, p_c1: Q) -> TransferDistribution {
        TransferDistribution::new(
            Arc::clone(e.identity.shared_layout()),
            [
                (e.identity.clone(), p_id),
                (e.not.clone(), p_not),
                (e.const0.clone(), p_c0),
                (e.const1.clone(), p_c1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn coin_toss_from_degenerate_and_signalling_pairs() {
        let e = Elementary::new();
        let half = q(1, 2);
        let degenerate =
            TransferDistribution::uniform(&[e.const0.clone(), e.const1.clone()]).unwrap();
        let signalling =
            TransferDistribution::uniform(&[e.identity.clone(), e.not.clone()]).unwrap();
        let a = transitions_from_transfers(&degenerate);
        let b = transitions_from_transfers(&signalling);
        assert_eq!(a, b);
        for row in a.rows() {
            assert!(row.iter().all(|p| *p == half));
        }
    }

    #[test]
    fn point_mass_is_deterministic_table() {
        let e = Elementary::new();
        let t = transitions_from_transfers(&TransferDistribution::point(&e.identity));
        assert_eq!(t, TransitionTable::deterministic(&e.identity));
        assert_eq!(t.as_deterministic().unwrap(), e.identity);
    }

    #[test]
    fn independent_transition_counts() {
        assert_eq!(
            count_independent_transition_probabilities(&PortLayout::elementary_binary()),
            2
        );
        assert_eq!(
            count_independent_transition_probabilities(&PortLayout::single(4, 1)),
            0
        );
        // Row normalization removes one degree of freedom per joint input.
        let layout = PortLayout::single(3, 2);
        let dof = layout.input_count() * layout.output_count() - layout.input_count();
        assert_eq!(count_independent_transition_probabilities(&layout), dof);
        assert_eq!(dof, 3);
    }

    #[test]
    fn table_validation() {
        let l = Arc::new(PortLayout::elementary_binary());
        assert!(TransitionTable::new(
            Arc::clone(&l),
            vec![vec![q(1, 2), q(1, 3)], vec![q(1, 1), q(0, 1)]]
        )
        .is_err());
        assert!(TransitionTable::new(
            Arc::clone(&l),
            vec![vec![q(3, 2), q(-1, 2)], vec![q(1, 1), q(0, 1)]]
        )
        .is_err());
        assert!(TransitionTable::new(l, vec![vec![q(1, 1), q(0, 1)]]).is_err());
    }

    #[test]
    fn product_and_factorization() {
        let e = Elementary::new();
        let p = product_distribution(&[
            TransferDistribution::point(&e.identity),
            TransferDistribution::point(&e.not),
        ])
        .unwrap();
        assert_eq!(p.weights().len(), 1);
        assert!(is_factorized(&p));

        let u = TransferDistribution::uniform(&[e.identity.clone(), e.not.clone()]).unwrap();
        let uu = product_distribution(&[u.clone(), u.clone()]).unwrap();
        assert_eq!(uu.weights().len(), 4);
        assert!(uu.weights().values().all(|w| *w == q(1, 4)));
        assert_eq!(uu.marginal(0), u);

        let d = channel(&e, q(1, 10), q(1, 10), q(2, 5), q(2, 5));
        let dd = product_distribution(&[d.clone(), d.clone()]).unwrap();
        let both_id = vec![e.identity.clone(), e.identity.clone()];
        assert_eq!(dd.weights()[&both_id], q(1, 100));
        assert_eq!(dd.marginal(1), d);

        let l = Arc::clone(e.identity.shared_layout());
        let correlated = JointTransferDistribution::new(
            vec![Arc::clone(&l), l],
            [
                (vec![e.identity.clone(), e.identity.clone()], q(1, 2)),
                (vec![e.not.clone(), e.not.clone()], q(1, 2)),
            ],
        )
        .unwrap();
        assert!(!is_factorized(&correlated));
    }

    #[test]
    fn series_distribution() {
        let e = Elementary::new();
        let nn = product_distribution(&[
            TransferDistribution::point(&e.not),
            TransferDistribution::point(&e.not),
        ])
        .unwrap();
        let s = series_transfer_distribution(&nn).unwrap();
        assert!(s.is_point_mass());
        assert_eq!(s.probability(&e.identity), Q::one());

        // Pr(Id) = p, Pr(NOT) = 1 - p in both stages.
        let p = q(3, 10);
        let stage = channel(&e, p.clone(), Q::one() - &p, Q::zero(), Q::zero());
        let joint = product_distribution(&[stage.clone(), stage]).unwrap();
        let s = series_transfer_distribution(&joint).unwrap();
        let one_minus = Q::one() - &p;
        assert_eq!(
            s.probability(&e.identity),
            &p * &p + &one_minus * &one_minus
        );
        assert_eq!(s.probability(&e.not), q(2, 1) * &p * &one_minus);
    }

    #[test]
    fn stochastic_loop_with_point_masses_matches_deterministic() {
        let e = Elementary::new();
        let chain = [
            e.identity.clone(),
            e.identity.clone(),
            e.identity.clone(),
            e.not.clone(),
        ];
        let joint = product_distribution(
            &chain
                .iter()
                .map(TransferDistribution::point)
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let r = stochastic_loop_analysis(&joint).unwrap();
        assert!(r.is_forbidden());
        assert_eq!(r.contradiction_probability, Q::one());
        assert!(loop_status(&close_loop(&chain).unwrap())
            .unwrap()
            .is_forbidden());

        let ids = product_distribution(&[
            TransferDistribution::point(&e.identity),
            TransferDistribution::point(&e.identity),
        ])
        .unwrap();
        let r = stochastic_loop_analysis(&ids).unwrap();
        assert!(!r.is_forbidden());
        assert_eq!(r.contradiction_probability, Q::zero());
    }

    #[test]
    fn two_stage_loop_with_not_link() {
        let e = Elementary::new();
        let stage = channel(&e, q(1, 10), q(1, 10), q(2, 5), q(2, 5));
        let joint =
            product_distribution(&[stage.clone(), TransferDistribution::point(&e.not), stage])
                .unwrap();
        let r = stochastic_loop_analysis(&joint).unwrap();
        // Oracle: enumerate the 16 channel pairs by hand.
        let fs = e.all();
        let w = |f: &TransferFunction| {
            if *f == e.identity || *f == e.not {
                q(1, 10)
            } else {
                q(2, 5)
            }
        };
        let mut expected = Q::zero();
        for a in fs {
            for b in fs {
                let table: Vec<usize> = (0..2).map(|i| b.apply(e.not.apply(a.apply(i)))).collect();
                if table.iter().enumerate().all(|(i, &j)| i != j) {
                    expected += w(a) * w(b);
                }
            }
        }
        assert_eq!(expected, q(1, 50));
        assert_eq!(r.contradiction_probability, expected);
    }
}
