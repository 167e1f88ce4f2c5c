use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::*;
use crate::angle::Angle;
use crate::error::Error;
use crate::polytope::{certify_weak_signal, solve_feasibility, Partition};
use crate::rational::{q, qi, Q};
use crate::spacetime::{Event, PortPlacement};
use crate::stochastic::{JointTransferDistribution, TransferDistribution};
use crate::systems::{Elementary, EnumerationCap, PortLayout};

fn sixty() -> Vec<Angle> {
    vec![
        Angle::zero(),
        Angle::pi_fraction(1, 3),
        Angle::pi_fraction(2, 3),
    ]
}

fn evidence() -> crate::polytope::WeakSignalVerdict {
    let s = BellScenario::singlet(sixty(), sixty(), None).unwrap();
    certify_weak_signal(s.table(), &s.partition(), EnumerationCap::default()).unwrap()
}

fn standard_network(eps: Q) -> DoubleBellNetwork {
    let config = SimplifiedBellConfig {
        epsilon: eps,
        ..Default::default()
    };
    let sb = build_simplified_bell(&evidence(), true, &config).unwrap();
    let e = Elementary::new();
    DoubleBellNetwork::new(&sb, &sb, &e.identity, &e.not).unwrap()
}

#[test]
fn singlet_table_shape() {
    let names = BellPortNames::standard();
    let t = singlet_table(&names, &sixty(), &sixty(), None).unwrap();
    assert_eq!(t.rows()[0], vec![q(1, 2), qi(0), qi(0), q(1, 2)]);
    assert_eq!(*t.get(1, 1), q(1, 8));
    assert_eq!(*t.get(2, 1), q(3, 8));
    for i in 0..9 {
        let (x, y) = (i / 3, i % 3);
        let swapped = y * 3 + x;
        assert_eq!(t.rows()[i], t.rows()[swapped]);
    }
    let opposite =
        singlet_table(&names, &[Angle::pi_fraction(1, 1)], &[Angle::zero()], None).unwrap();
    assert_eq!(opposite.rows()[0], vec![qi(0), q(1, 2), q(1, 2), qi(0)]);
    assert!(singlet_table(&names, &[], &sixty(), None).is_err());
}

#[test]
fn scenario_validation() {
    let s = BellScenario::singlet(sixty(), sixty(), None).unwrap();
    let names = s.names();
    // Outcome at B inside A's future light cone.
    let mut moved = s.placements().to_vec();
    for p in &mut moved {
        if p.port == names.b_outcome {
            p.event = Event::new(qi(5), qi(1));
        }
    }
    assert!(BellScenario::new(sixty(), sixty(), s.table().clone(), moved).is_err());
    // A table breaking the equal-sign convention.
    let flat = crate::stochastic::TransitionTable::new(
        s.table().shared_layout().clone(),
        vec![vec![q(1, 4); 4]; 9],
    )
    .unwrap();
    assert!(BellScenario::new(sixty(), sixty(), flat, s.placements().to_vec()).is_err());
}

#[test]
fn rotation_swaps_sides() {
    let s = BellScenario::singlet(sixty(), sixty(), None).unwrap();
    let rotated = s.rotated_placements().unwrap();
    let n = s.names();
    let at = |list: &[PortPlacement], name: &str| {
        list.iter().find(|p| p.port == name).unwrap().event.clone()
    };
    assert_eq!(at(&rotated, &n.a_setting), at(s.placements(), &n.b_setting));
    assert_eq!(at(&rotated, &n.b_outcome), at(s.placements(), &n.a_outcome));
}

#[test]
fn violation_at_sixty_degrees() {
    let s = BellScenario::singlet(sixty(), sixty(), None).unwrap();
    let r = bell_violation_report(&s).unwrap();
    assert!(r.violated);
    assert_eq!(r.minimum, q(-1, 8));
    let bad: Vec<&InequalityInstance> = r.violations().collect();
    assert_eq!(bad.len(), 4);
    // The ++, +-, -+ and -- forms of one cyclic instance.
    assert!(bad
        .iter()
        .any(|i| i.text == "2P2 = Pr(+-|12) + Pr(+-|23) - Pr(+-|31) >= 0"));
    assert!(bad.iter().all(|i| i.class == "P2"));
    assert!(
        !solve_feasibility(&s.local_problem(EnumerationCap::default()).unwrap())
            .unwrap()
            .is_feasible()
    );
}

#[test]
fn hundred_twenty_degrees() {
    let a = vec![
        Angle::zero(),
        Angle::pi_fraction(2, 3),
        Angle::pi_fraction(4, 3),
    ];
    let s = BellScenario::singlet(a.clone(), a, None).unwrap();
    let r = bell_violation_report(&s).unwrap();
    for i in r
        .instances
        .iter()
        .filter(|i| i.text.contains("Pr(+-|") && !i.text.starts_with("2P0"))
    {
        assert_eq!(i.value, q(3, 8), "{}", i.text);
    }
    let p0 = r
        .instances
        .iter()
        .find(|i| i.text.starts_with("2P0") && i.text.contains("Pr(++|"))
        .unwrap();
    assert_eq!(p0.value, q(-1, 8));
}

#[test]
fn local_tables_satisfy_every_instance() {
    let s = BellScenario::singlet(sixty(), sixty(), None).unwrap();
    let problem = s.symmetric_problem(EnumerationCap::default()).unwrap();
    let vertices = crate::polytope::polytope_vertices(&problem).unwrap();
    assert_eq!(vertices.len(), 4);
    for table in vertices {
        let local = BellScenario::new(sixty(), sixty(), table, s.placements().to_vec()).unwrap();
        let r = bell_violation_report(&local).unwrap();
        assert!(!r.violated);
    }
    assert!(bell_violation_report(
        &BellScenario::singlet(sixty()[..2].to_vec(), sixty()[..2].to_vec(), None).unwrap()
    )
    .is_err());
}

#[test]
fn simplified_bell_needs_evidence_and_symmetry() {
    let config = SimplifiedBellConfig::default();
    let sb = build_simplified_bell(&evidence(), true, &config).unwrap();
    assert_eq!(sb.pr_identity(), q(1, 10));
    assert_eq!(sb.pr_not(), q(1, 10));
    assert_eq!(sb.channel().weights().len(), 4);
    assert!(matches!(
        build_simplified_bell(&evidence(), false, &config),
        Err(Error::MissingEvidence(_))
    ));

    let coin = crate::stochastic::TransitionTable::new(
        std::sync::Arc::new(PortLayout::elementary_binary()),
        vec![vec![q(1, 2), q(1, 2)]; 2],
    )
    .unwrap();
    let coin_evidence = certify_weak_signal(
        &coin,
        &Partition::new(["i"], ["j"]),
        EnumerationCap::default(),
    )
    .unwrap();
    assert!(matches!(
        build_simplified_bell(&coin_evidence, true, &config),
        Err(Error::MissingEvidence(_))
    ));

    for bad in [qi(0), q(-1, 10), q(3, 5)] {
        let c = SimplifiedBellConfig {
            epsilon: bad,
            ..Default::default()
        };
        assert!(build_simplified_bell(&evidence(), true, &c).is_err());
    }
    let half = SimplifiedBellConfig {
        epsilon: q(1, 2),
        ..Default::default()
    };
    assert_eq!(
        build_simplified_bell(&evidence(), true, &half)
            .unwrap()
            .channel()
            .weights()
            .len(),
        2
    );
}

/// Brute force over every pair of channel functions.
fn brute_force(net: &DoubleBellNetwork) -> Q {
    let mut total = Q::zero();
    for (tuple, w) in net.joint().weights() {
        let (fp, fu) = (&tuple[0], &tuple[1]);
        let mut free = true;
        for x in 0..2 {
            let y = net.link_a().apply(x);
            let z = fu.apply(y);
            let u = net.link_b().apply(z);
            if fp.apply(u) == x {
                free = false;
            }
        }
        if free {
            total += w;
        }
    }
    total
}

#[test]
fn double_bell_contradiction() {
    let net = standard_network(q(1, 10));
    let v = double_bell_verdict(&net).unwrap();
    assert!(v.wiring.is_admissible());
    assert!(v.factorized);
    assert_eq!(*v.contradiction_probability(), q(1, 50));
    assert_eq!(brute_force(&net), q(1, 50));
    assert!(v.is_forbidden());
    assert_eq!(v.chain[0], "A2' -CL-> A1");

    let swapped = double_bell_verdict(&net.swapped().unwrap()).unwrap();
    assert_eq!(
        swapped.contradiction_probability(),
        v.contradiction_probability()
    );

    let audit = assumption_audit(&v).unwrap();
    let last = audit.last().unwrap();
    assert_eq!(last.assumption, Assumption::LorentzInvariance);
    assert_eq!(last.status, AuditStatus::Rejected);
    assert!(last.resolution);
    assert_eq!(audit.iter().filter(|a| a.resolution).count(), 1);
    assert_eq!(audit[0].assumption, Assumption::FreeCombination);
}

#[test]
fn double_bell_point_masses() {
    let e = Elementary::new();
    let base = build_simplified_bell(&evidence(), true, &SimplifiedBellConfig::default()).unwrap();
    let with = |f: &crate::systems::TransferFunction| {
        SimplifiedBell::from_channel(base.base().clone(), TransferDistribution::point(f)).unwrap()
    };
    let constant = with(&e.const0);
    let net = DoubleBellNetwork::new(&constant, &constant, &e.identity, &e.not).unwrap();
    let v = double_bell_verdict(&net).unwrap();
    assert!(v.contradiction_probability().is_zero());
    assert!(assumption_audit(&v).is_err());

    let id = with(&e.identity);
    let net = DoubleBellNetwork::new(&id, &id, &e.identity, &e.not).unwrap();
    assert!(double_bell_verdict(&net)
        .unwrap()
        .contradiction_probability()
        .is_one());

    // Nonlocal weight removed from one side only.
    let net = DoubleBellNetwork::new(&constant, &base, &e.identity, &e.not).unwrap();
    assert!(double_bell_verdict(&net)
        .unwrap()
        .contradiction_probability()
        .is_zero());

    // Both links Id: the mixed Id/NOT branches now close into NOT.
    let net = DoubleBellNetwork::new(&base, &base, &e.identity, &e.identity).unwrap();
    assert_eq!(
        *double_bell_verdict(&net)
            .unwrap()
            .contradiction_probability(),
        q(1, 50)
    );
}

#[test]
fn correlated_joint_gets_a_caveat() {
    let e = Elementary::new();
    let net = standard_network(q(1, 10));
    let layouts = net.joint().layouts().to_vec();
    let joint = JointTransferDistribution::new(
        layouts,
        BTreeMap::from([
            (vec![e.identity.clone(), e.identity.clone()], q(1, 2)),
            (vec![e.const0.clone(), e.const0.clone()], q(1, 2)),
        ]),
    )
    .unwrap();
    let net = net.with_joint(joint).unwrap();
    let v = double_bell_verdict(&net).unwrap();
    assert!(!v.factorized);
    assert_eq!(*v.contradiction_probability(), q(1, 2));
    let audit = assumption_audit(&v).unwrap();
    assert!(audit
        .iter()
        .any(|a| a.status == AuditStatus::Caveat && a.reason.contains("background correlation")));
}

#[test]
fn double_bell_geometry() {
    let places = double_bell_placements();
    let at = |name: &str| {
        places
            .iter()
            .find(|p| p.port == name)
            .unwrap()
            .event
            .clone()
    };
    assert_eq!(at("A1'"), Event::new(q(-15, 4), q(-25, 4)));
    assert_eq!(at("A2'"), Event::new(q(-5, 2), q(-11, 2)));
    assert_eq!(at("B1'"), Event::new(q(15, 4), q(25, 4)));
    assert_eq!(at("B2'"), Event::new(qi(5), qi(7)));
    assert_eq!(at("A1"), Event::new(q(15, 4), q(-25, 4)));
    assert_eq!(at("A2"), Event::new(qi(5), qi(-7)));
    assert_eq!(at("B1"), Event::new(q(-15, 4), q(25, 4)));
    assert_eq!(at("B2"), Event::new(q(-5, 2), q(11, 2)));

    let net = standard_network(q(1, 10));
    let mut moved = places.clone();
    for p in &mut moved {
        if p.port == "A1" {
            p.event = Event::new(q(-5, 2), qi(3));
        }
    }
    assert!(matches!(
        net.with_placements(moved),
        Err(Error::InadmissibleWiring(_))
    ));
}
