use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::quantum::singlet_row;
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::polytope::{
    apply_perfect_correlation, apply_spin_reversal_symmetry, build_local_consistency_problem,
    derive_inequalities, ConsistencyProblem, Partition, Provenance, WeakSignalVerdict,
};
use crate::rational::Q;
use crate::spacetime::{classify_interval, pi_rotation, Event, IntervalClass, PortPlacement};
use crate::stochastic::{TransferDistribution, TransitionTable};
use crate::systems::{Elementary, EnumerationCap, PortLayout, PortSpec};

/// Setting and outcome port names of a two-party experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellPortNames {
    pub a_setting: String,
    pub a_outcome: String,
    pub b_setting: String,
    pub b_outcome: String,
}

impl BellPortNames {
    pub fn standard() -> Self {
        Self::with_suffix("")
    }

    pub fn with_suffix(suffix: &str) -> Self {
        Self {
            a_setting: format!("A1{suffix}"),
            a_outcome: format!("A2{suffix}"),
            b_setting: format!("B1{suffix}"),
            b_outcome: format!("B2{suffix}"),
        }
    }

    fn of(layout: &PortLayout) -> Self {
        Self {
            a_setting: layout.inputs()[0].name.clone(),
            b_setting: layout.inputs()[1].name.clone(),
            a_outcome: layout.outputs()[0].name.clone(),
            b_outcome: layout.outputs()[1].name.clone(),
        }
    }

    pub fn partition(&self) -> Partition {
        Partition::new(
            [self.a_setting.clone(), self.a_outcome.clone()],
            [self.b_setting.clone(), self.b_outcome.clone()],
        )
    }
}

/// Inputs `(A setting, B setting)`, outputs `(A sign, B sign)`.
pub fn bell_layout(names: &BellPortNames, na: usize, nb: usize) -> Result<Arc<PortLayout>> {
    Ok(Arc::new(PortLayout::new(
        vec![
            PortSpec::new(names.a_setting.clone(), na),
            PortSpec::new(names.b_setting.clone(), nb),
        ],
        vec![
            PortSpec::binary(names.a_outcome.clone()),
            PortSpec::binary(names.b_outcome.clone()),
        ],
    )?))
}

/// Settings at time 0 and outcomes at `duration`, with A at `-half_width`
/// and B at `+half_width`. With `duration < 2·half_width` every setting is
/// spacelike to the other side's outcome.
pub fn bell_placements(names: &BellPortNames, half_width: &Q, duration: &Q) -> Vec<PortPlacement> {
    let (w, d) = (half_width.clone(), duration.clone());
    vec![
        PortPlacement::new(names.a_setting.clone(), Event::new(Q::zero(), -w.clone())),
        PortPlacement::new(names.a_outcome.clone(), Event::new(d.clone(), -w.clone())),
        PortPlacement::new(names.b_setting.clone(), Event::new(Q::zero(), w.clone())),
        PortPlacement::new(names.b_outcome.clone(), Event::new(d, w)),
    ]
}

pub fn singlet_table(
    names: &BellPortNames,
    angles_a: &[Angle],
    angles_b: &[Angle],
    tolerance: Option<f64>,
) -> Result<TransitionTable> {
    if angles_a.is_empty() || angles_b.is_empty() {
        return Err(Error::InvalidScenario(
            "each side needs at least one angle".into(),
        ));
    }
    let layout = bell_layout(names, angles_a.len(), angles_b.len())?;
    let mut rows = Vec::with_capacity(angles_a.len() * angles_b.len());
    for a in angles_a {
        for b in angles_b {
            rows.push(singlet_row(a, b, tolerance)?.to_vec());
        }
    }
    TransitionTable::new(layout, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellScenario {
    angles_a: Vec<Angle>,
    angles_b: Vec<Angle>,
    placements: Vec<PortPlacement>,
    table: TransitionTable,
}

impl BellScenario {
    /// Checks the table shape, the perfect-correlation convention at equal
    /// angles, and that each setting is spacelike to the far outcome.
    pub fn new(
        angles_a: Vec<Angle>,
        angles_b: Vec<Angle>,
        table: TransitionTable,
        placements: Vec<PortPlacement>,
    ) -> Result<Self> {
        let layout = table.layout();
        let shape_ok = layout.inputs().len() == 2
            && layout.outputs().len() == 2
            && layout.outputs().iter().all(|p| p.is_binary())
            && layout.inputs()[0].cardinality == angles_a.len()
            && layout.inputs()[1].cardinality == angles_b.len();
        if !shape_ok {
            return Err(Error::InvalidScenario(format!(
                "table {layout} does not fit {} and {} angles",
                angles_a.len(),
                angles_b.len()
            )));
        }
        if angles_a.is_empty() || angles_b.is_empty() {
            return Err(Error::InvalidScenario(
                "each side needs at least one angle".into(),
            ));
        }
        let nb = angles_b.len();
        for (x, a) in angles_a.iter().enumerate() {
            for (y, b) in angles_b.iter().enumerate() {
                let i = x * nb + y;
                if a == b && !(table.get(i, 1).is_zero() && table.get(i, 2).is_zero()) {
                    return Err(Error::InvalidScenario(format!(
                        "equal angles {a} must give equal signs"
                    )));
                }
            }
        }
        let s = Self {
            angles_a,
            angles_b,
            placements,
            table,
        };
        let n = s.names();
        for (setting, outcome) in [(&n.a_setting, &n.b_outcome), (&n.b_setting, &n.a_outcome)] {
            let class = classify_interval(s.placement(setting)?, s.placement(outcome)?);
            if class != IntervalClass::Spacelike {
                return Err(Error::InvalidScenario(format!(
                    "{setting} and {outcome} must be spacelike separated, found {class}"
                )));
            }
        }
        Ok(s)
    }

    /// Singlet oracle table with the standard placements.
    pub fn singlet(
        angles_a: Vec<Angle>,
        angles_b: Vec<Angle>,
        tolerance: Option<f64>,
    ) -> Result<Self> {
        let names = BellPortNames::standard();
        let table = singlet_table(&names, &angles_a, &angles_b, tolerance)?;
        let placements = bell_placements(
            &names,
            &Q::from_integer(1.into()),
            &Q::from_integer(1.into()),
        );
        Self::new(angles_a, angles_b, table, placements)
    }

    pub fn angles_a(&self) -> &[Angle] {
        &self.angles_a
    }

    pub fn angles_b(&self) -> &[Angle] {
        &self.angles_b
    }

    pub fn table(&self) -> &TransitionTable {
        &self.table
    }

    pub fn placements(&self) -> &[PortPlacement] {
        &self.placements
    }

    pub fn names(&self) -> BellPortNames {
        BellPortNames::of(self.table.layout())
    }

    pub fn placement(&self, port: &str) -> Result<&Event> {
        self.placements
            .iter()
            .find(|p| p.port == port)
            .map(|p| &p.event)
            .ok_or_else(|| Error::UnplacedPort(port.into()))
    }

    pub fn partition(&self) -> Partition {
        self.names().partition()
    }

    pub fn local_problem(&self, cap: EnumerationCap) -> Result<ConsistencyProblem> {
        build_local_consistency_problem(&self.table, &self.partition(), cap)
    }

    /// Local problem with perfect correlation and spin-reversal symmetry.
    pub fn symmetric_problem(&self, cap: EnumerationCap) -> Result<ConsistencyProblem> {
        let p = self.local_problem(cap)?;
        let p = apply_perfect_correlation(&p, &self.angles_a, &self.angles_b)?;
        apply_spin_reversal_symmetry(&p)
    }

    /// The rotation by π about the midpoint between the two settings, which
    /// carries each side's placements onto the other's.
    pub fn rotated_placements(&self) -> Result<Vec<PortPlacement>> {
        let n = self.names();
        let (a, b) = (self.placement(&n.a_setting)?, self.placement(&n.b_setting)?);
        let half = Q::new(1.into(), 2.into());
        let center = Event::new(Q::zero(), (&a.x + &b.x) * half);
        Ok(self
            .placements
            .iter()
            .map(|p| PortPlacement::new(p.port.clone(), pi_rotation(&p.event, &center)))
            .collect())
    }
}

/// One derived inequality evaluated on a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityInstance {
    pub class: String,
    pub text: String,
    /// Negative when violated.
    pub value: Q,
    pub violable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellViolationReport {
    pub instances: Vec<InequalityInstance>,
    pub minimum: Q,
    pub violated: bool,
}

impl BellViolationReport {
    pub fn violations(&self) -> impl Iterator<Item = &InequalityInstance> {
        self.instances.iter().filter(|i| i.value.is_negative())
    }
}

/// Evaluates every `2P_k >= 0` form of the three-angle system on the
/// scenario's table.
pub fn bell_violation_report(scenario: &BellScenario) -> Result<BellViolationReport> {
    if scenario.angles_a.len() != 3 || scenario.angles_a != scenario.angles_b {
        return Err(Error::InvalidScenario(
            "the violation report needs the same three angles on both sides".into(),
        ));
    }
    let problem = scenario.symmetric_problem(EnumerationCap::default())?;
    let derivation = derive_inequalities(&problem)?;
    let instances: Vec<InequalityInstance> = derivation
        .inequalities
        .iter()
        .map(|q| InequalityInstance {
            class: match &q.provenance {
                Provenance::Nonnegativity { class, .. } => class.clone(),
                Provenance::Facet => "facet".into(),
            },
            text: q.text.clone(),
            value: q.slack(scenario.table()),
            violable: q.violable,
        })
        .collect();
    let minimum = instances
        .iter()
        .map(|i| i.value.clone())
        .min()
        .unwrap_or_else(Q::zero);
    Ok(BellViolationReport {
        violated: minimum.is_negative(),
        instances,
        minimum,
    })
}

/// One setting at A, two at B; the channel gives A's sign as a function of
/// B's setting index.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplifiedBell {
    base: BellScenario,
    channel: TransferDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplifiedBellConfig {
    pub theta1: Angle,
    pub theta2: Angle,
    /// `Pr(Id) = Pr(NOT) = epsilon`; constants share the rest.
    pub epsilon: Q,
    pub tolerance: Option<f64>,
}

impl Default for SimplifiedBellConfig {
    fn default() -> Self {
        Self {
            theta1: Angle::zero(),
            theta2: Angle::pi_fraction(1, 3),
            epsilon: Q::new(1.into(), 10.into()),
            tolerance: None,
        }
    }
}

/// The four binary functions with `Pr(Id) = Pr(NOT) = epsilon`.
pub fn signalling_channel(layout: Arc<PortLayout>, epsilon: &Q) -> Result<TransferDistribution> {
    let half = Q::new(1.into(), 2.into());
    if !epsilon.is_positive() || *epsilon > half {
        return Err(Error::InvalidProbability(format!(
            "epsilon = {epsilon} must lie in (0, 1/2]"
        )));
    }
    let e = Elementary::over(layout.clone())?;
    let rest = half - epsilon;
    TransferDistribution::new(
        layout,
        [
            (e.identity, epsilon.clone()),
            (e.not, epsilon.clone()),
            (e.const0, rest.clone()),
            (e.const1, rest),
        ],
    )
}

/// Binary channel from B's setting to A's sign in `base`.
fn channel_layout(base: &BellScenario) -> Result<Arc<PortLayout>> {
    let n = base.names();
    Ok(Arc::new(PortLayout::new(
        vec![PortSpec::binary(n.b_setting)],
        vec![PortSpec::binary(n.a_outcome)],
    )?))
}

/// Needs a verified weak-signal certificate and the Lorentz-symmetry
/// assumption that turns a signal in one direction into signals both ways.
pub fn build_simplified_bell(
    evidence: &WeakSignalVerdict,
    lorentz_symmetry: bool,
    config: &SimplifiedBellConfig,
) -> Result<SimplifiedBell> {
    match evidence {
        WeakSignalVerdict::NoWeakSignal { .. } => {
            return Err(Error::MissingEvidence(
                "the table has a local model, so there is no weak signal".into(),
            ))
        }
        WeakSignalVerdict::WeakSignal { .. } if !evidence.verify() => {
            return Err(Error::MissingEvidence(
                "the weak-signal certificate does not verify".into(),
            ))
        }
        WeakSignalVerdict::WeakSignal { .. } => {}
    }
    if !lorentz_symmetry {
        return Err(Error::MissingEvidence(
            "a violation alone does not give weak signals in both directions; \
             Lorentz symmetry must be assumed"
                .into(),
        ));
    }
    let base = BellScenario::singlet(
        vec![config.theta1.clone()],
        vec![config.theta1.clone(), config.theta2.clone()],
        config.tolerance,
    )?;
    let channel = signalling_channel(channel_layout(&base)?, &config.epsilon)?;
    SimplifiedBell::from_channel(base, channel)
}

impl SimplifiedBell {
    /// No evidence check: the channel weights are taken as given.
    pub fn from_channel(base: BellScenario, channel: TransferDistribution) -> Result<Self> {
        if base.angles_a.len() != 1 || base.angles_b.len() != 2 {
            return Err(Error::InvalidScenario(
                "a simplified Bell experiment has one setting at A and two at B".into(),
            ));
        }
        let layout = channel_layout(&base)?;
        let channel = TransferDistribution::new(layout, channel.weights().clone())?;
        Ok(Self { base, channel })
    }

    pub fn base(&self) -> &BellScenario {
        &self.base
    }

    pub fn channel(&self) -> &TransferDistribution {
        &self.channel
    }

    pub fn pr_identity(&self) -> Q {
        let e = Elementary::new();
        self.channel.probability(&e.identity)
    }

    pub fn pr_not(&self) -> Q {
        let e = Elementary::new();
        self.channel.probability(&e.not)
    }
}
