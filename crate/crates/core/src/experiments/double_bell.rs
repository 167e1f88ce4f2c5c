use std::fmt;
use std::sync::Arc;

use num_traits::One;

use super::bell::{bell_placements, BellPortNames, SimplifiedBell};
use crate::error::{Error, Result};
use crate::rational::Q;
use crate::spacetime::{
    boost_placements, classify_interval, validate_classical_wiring, IntervalClass, Link,
    PortPlacement, Velocity, WiringReport,
};
use crate::stochastic::{
    is_factorized, product_distribution, stochastic_loop_analysis, JointTransferDistribution,
    StochasticLoopReport, TransferDistribution,
};
use crate::systems::{PortLayout, PortSpec, TransferFunction};

fn unary(from: &str, to: &str) -> Arc<PortLayout> {
    Arc::new(
        PortLayout::new(vec![PortSpec::binary(from)], vec![PortSpec::binary(to)])
            .expect("distinct binary port names"),
    )
}

fn primed() -> BellPortNames {
    BellPortNames::with_suffix("'")
}

fn unprimed() -> BellPortNames {
    BellPortNames::standard()
}

/// Two simplified Bell experiments moving at ±3/5 in opposite directions.
/// At rest each has settings at `t = 0`, outcomes at `t = 1`, and its sides
/// at `x = ∓5`.
pub fn double_bell_placements() -> Vec<PortPlacement> {
    let (w, d) = (Q::from_integer(5.into()), Q::one());
    let v = Velocity::new(Q::new(3.into(), 5.into())).expect("3/5 has a rational Lorentz factor");
    // Coordinates at rest in a frame moving at +3/5 are mapped back to the
    // laboratory with the opposite boost, and vice versa.
    let mut out = boost_placements(&bell_placements(&primed(), &w, &d), &v.reversed());
    out.extend(boost_placements(&bell_placements(&unprimed(), &w, &d), &v));
    out
}

/// Two simplified Bell experiments joined by classical links
/// `A2' -> A1` and `B2 -> B1'`.
///
/// In the primed experiment the nonlocal channel runs from `B1'` to `A2'`;
/// the unprimed experiment is its mirror image, with the channel from `A1`
/// to `B2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleBellNetwork {
    primed: SimplifiedBell,
    unprimed: SimplifiedBell,
    link_a: TransferFunction,
    link_b: TransferFunction,
    placements: Vec<PortPlacement>,
    joint: JointTransferDistribution,
}

impl DoubleBellNetwork {
    /// Independent experiments with the standard placements.
    pub fn new(
        primed_exp: &SimplifiedBell,
        unprimed_exp: &SimplifiedBell,
        link_a: &TransferFunction,
        link_b: &TransferFunction,
    ) -> Result<Self> {
        let (p, u) = (primed(), unprimed());
        let relabel = |f: &TransferFunction, from: &str, to: &str| -> Result<TransferFunction> {
            if f.layout().input_radices() != [2] || f.layout().output_radices() != [2] {
                return Err(Error::InvalidScenario(format!(
                    "link {f} must be binary to binary"
                )));
            }
            f.relabel(unary(from, to))
        };
        let link_a = relabel(link_a, &p.a_outcome, &u.a_setting)?;
        let link_b = relabel(link_b, &u.b_outcome, &p.b_setting)?;
        let cp = Self::channel_over(primed_exp.channel(), &p.b_setting, &p.a_outcome)?;
        let cu = Self::channel_over(unprimed_exp.channel(), &u.a_setting, &u.b_outcome)?;
        let joint = product_distribution(&[cp, cu])?;
        let net = Self {
            primed: primed_exp.clone(),
            unprimed: unprimed_exp.clone(),
            link_a,
            link_b,
            placements: double_bell_placements(),
            joint,
        };
        net.check_geometry()?;
        Ok(net)
    }

    fn channel_over(
        c: &TransferDistribution,
        from: &str,
        to: &str,
    ) -> Result<TransferDistribution> {
        TransferDistribution::new(unary(from, to), c.weights().clone())
    }

    pub fn with_placements(mut self, placements: Vec<PortPlacement>) -> Result<Self> {
        self.placements = placements;
        self.check_geometry()?;
        Ok(self)
    }

    /// Replaces the joint channel distribution (components: primed, then
    /// unprimed), e.g. to model a background correlation.
    pub fn with_joint(mut self, joint: JointTransferDistribution) -> Result<Self> {
        if joint.components() != 2 {
            return Err(Error::InvalidScenario(
                "the joint needs two components".into(),
            ));
        }
        let layouts = self.joint.layouts().to_vec();
        let weights: Vec<(Vec<TransferFunction>, Q)> = joint
            .weights()
            .iter()
            .map(|(t, w)| (t.clone(), w.clone()))
            .collect();
        self.joint = JointTransferDistribution::new(layouts, weights)?;
        Ok(self)
    }

    /// The same network with the roles of the two experiments exchanged.
    pub fn swapped(&self) -> Result<Self> {
        let joint = JointTransferDistribution::new(
            self.joint.layouts().to_vec(),
            self.joint
                .weights()
                .iter()
                .map(|(t, w)| (vec![t[1].clone(), t[0].clone()], w.clone())),
        )?;
        Ok(Self {
            primed: self.unprimed.clone(),
            unprimed: self.primed.clone(),
            link_a: self.link_a.clone(),
            link_b: self.link_b.clone(),
            placements: self.placements.clone(),
            joint,
        })
    }

    pub fn links(&self) -> [Link; 2] {
        let (p, u) = (primed(), unprimed());
        [
            Link::new(p.a_outcome, u.a_setting),
            Link::new(u.b_outcome, p.b_setting),
        ]
    }

    pub fn link_a(&self) -> &TransferFunction {
        &self.link_a
    }

    pub fn link_b(&self) -> &TransferFunction {
        &self.link_b
    }

    pub fn placements(&self) -> &[PortPlacement] {
        &self.placements
    }

    pub fn joint(&self) -> &JointTransferDistribution {
        &self.joint
    }

    pub fn primed(&self) -> &SimplifiedBell {
        &self.primed
    }

    pub fn unprimed(&self) -> &SimplifiedBell {
        &self.unprimed
    }

    pub fn wiring_report(&self) -> Result<WiringReport> {
        validate_classical_wiring(&self.placements, &self.links())
    }

    /// Links must be admissible and, in each experiment, both A ports must
    /// be spacelike to both B ports.
    fn check_geometry(&self) -> Result<()> {
        let report = self.wiring_report()?;
        if let Some(bad) = report.violations().next() {
            return Err(Error::InadmissibleWiring(format!(
                "classical link {} is {}",
                bad.link, bad.class
            )));
        }
        let at = |name: &str| {
            self.placements
                .iter()
                .find(|p| p.port == name)
                .map(|p| &p.event)
                .ok_or_else(|| Error::UnplacedPort(name.into()))
        };
        for n in [primed(), unprimed()] {
            for a in [&n.a_setting, &n.a_outcome] {
                for b in [&n.b_setting, &n.b_outcome] {
                    let class = classify_interval(at(a)?, at(b)?);
                    if class != IntervalClass::Spacelike {
                        return Err(Error::InadmissibleWiring(format!(
                            "{a} and {b} must be spacelike separated, found {class}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleBellVerdict {
    pub wiring: WiringReport,
    /// Loop `A2' -> A1 -> B2 -> B1' -> A2'` over link A, the unprimed
    /// channel, link B and the primed channel.
    pub loop_report: StochasticLoopReport,
    pub factorized: bool,
    pub chain: Vec<String>,
}

impl DoubleBellVerdict {
    pub fn contradiction_probability(&self) -> &Q {
        &self.loop_report.contradiction_probability
    }

    pub fn is_forbidden(&self) -> bool {
        self.loop_report.is_forbidden()
    }
}

pub fn double_bell_verdict(net: &DoubleBellNetwork) -> Result<DoubleBellVerdict> {
    let wiring = net.wiring_report()?;
    if let Some(bad) = wiring.violations().next() {
        return Err(Error::InadmissibleWiring(format!(
            "classical link {} is {}",
            bad.link, bad.class
        )));
    }
    let layouts = vec![
        Arc::clone(net.link_a.shared_layout()),
        Arc::clone(&net.joint.layouts()[1]),
        Arc::clone(net.link_b.shared_layout()),
        Arc::clone(&net.joint.layouts()[0]),
    ];
    let chain_joint = JointTransferDistribution::new(
        layouts,
        net.joint.weights().iter().map(|(t, w)| {
            (
                vec![
                    net.link_a.clone(),
                    t[1].clone(),
                    net.link_b.clone(),
                    t[0].clone(),
                ],
                w.clone(),
            )
        }),
    )?;
    let loop_report = stochastic_loop_analysis(&chain_joint)?;
    let (p, u) = (primed(), unprimed());
    Ok(DoubleBellVerdict {
        wiring,
        loop_report,
        factorized: is_factorized(&net.joint),
        chain: vec![
            format!("{} -CL-> {}", p.a_outcome, u.a_setting),
            format!("{} -NI-> {}", u.a_setting, u.b_outcome),
            format!("{} -CL-> {}", u.b_outcome, p.b_setting),
            format!("{} -NI-> {}", p.b_setting, p.a_outcome),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// AS1: the systems can be combined as wired.
    FreeCombination,
    /// AS2: combining systems leaves their joint transfer probability
    /// unchanged.
    PreservedJointProbability,
    /// AS3: physical laws are invariant under the Lorentz group.
    LorentzInvariance,
}

impl Assumption {
    pub fn code(self) -> &'static str {
        match self {
            Assumption::FreeCombination => "AS1",
            Assumption::PreservedJointProbability => "AS2",
            Assumption::LorentzInvariance => "AS3",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditStatus {
    Holds,
    /// Possible in principle, judged implausible.
    Doubtful,
    /// The supplied model itself breaks the assumption.
    Caveat,
    Rejected,
}

impl AuditStatus {
    pub fn name(self) -> &'static str {
        match self {
            AuditStatus::Holds => "holds",
            AuditStatus::Doubtful => "doubtful",
            AuditStatus::Caveat => "caveat",
            AuditStatus::Rejected => "rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEntry {
    pub assumption: Assumption,
    pub scope: &'static str,
    pub status: AuditStatus,
    pub reason: String,
    /// `true` for the step the argument settles on by choice rather than by
    /// computation.
    pub resolution: bool,
}

/// The elimination argument behind a forbidden verdict: one of AS1, AS2,
/// AS3 must fail.
pub fn assumption_audit(verdict: &DoubleBellVerdict) -> Result<Vec<AuditEntry>> {
    if !verdict.is_forbidden() {
        return Err(Error::InvalidScenario(
            "only a forbidden loop refutes an assumption; this loop is allowed".into(),
        ));
    }
    let p = verdict.contradiction_probability();
    let joint_entry = if verdict.factorized {
        AuditEntry {
            assumption: Assumption::PreservedJointProbability,
            scope: "joint probabilities of the two Bell experiments",
            status: AuditStatus::Doubtful,
            reason: "independent before combination; a change caused by linking them through \
                     gates would be needed, which seems highly unlikely"
                .into(),
            resolution: false,
        }
    } else {
        AuditEntry {
            assumption: Assumption::PreservedJointProbability,
            scope: "joint probabilities of the two Bell experiments",
            status: AuditStatus::Caveat,
            reason: "the supplied joint distribution is correlated: an unsuspected background \
                     correlation between the experiments, so the verdict does not isolate AS3"
                .into(),
            resolution: false,
        }
    };
    Ok(vec![
        AuditEntry {
            assumption: Assumption::FreeCombination,
            scope: "combining the experiments and links",
            status: AuditStatus::Holds,
            reason: "nothing prevents combining the two experiments and the two classical links"
                .into(),
            resolution: false,
        },
        AuditEntry {
            assumption: Assumption::PreservedJointProbability,
            scope: "deterministic gates",
            status: AuditStatus::Holds,
            reason: "digital gates interact with other systems only through their ports".into(),
            resolution: false,
        },
        joint_entry,
        AuditEntry {
            assumption: Assumption::LorentzInvariance,
            scope: "flat spacetime",
            status: AuditStatus::Rejected,
            reason: format!(
                "the loop is forbidden with probability {p}; with AS1 and AS2 kept, quantum \
                 measurement breaks Lorentz symmetry"
            ),
            resolution: true,
        },
    ])
}
