use std::sync::Arc;

use causal_transfer::angle::Angle;
use causal_transfer::experiments::quantum::singlet_row;
use causal_transfer::experiments::{
    bell_violation_report, build_simplified_bell, double_bell_placements, double_bell_verdict,
    BellScenario, DoubleBellNetwork, SimplifiedBellConfig,
};
use causal_transfer::polytope::{
    build_consistency_problem, certify_weak_signal, solve_feasibility,
};
use causal_transfer::rational::q;
use causal_transfer::spacetime::{
    boost, boost_placements, classify_interval, pi_rotation, rotate_placements,
    validate_classical_wiring, Event, Link, Velocity,
};
use causal_transfer::stochastic::{
    product_distribution, stochastic_loop_analysis, transitions_from_transfers,
    TransferDistribution,
};
use causal_transfer::systems::{
    close_loop, compose_series, count_transfer_functions, enumerate_transfer_functions,
    loop_status, Elementary, EnumerationCap, PortLayout, TransferFunction,
};
use causal_transfer::Q;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn cap() -> EnumerationCap {
    EnumerationCap::default()
}

fn single_function(n_in: usize, n_out: usize) -> impl Strategy<Value = TransferFunction> {
    proptest::collection::vec(0..n_out, n_in).prop_map(move |table| {
        TransferFunction::new(PortLayout::single(n_in, n_out), table).unwrap()
    })
}

fn elementary(k: usize) -> TransferFunction {
    Elementary::new().all()[k].clone()
}

/// Random distribution over all functions of a single-port layout.
fn distribution(n_in: usize, n_out: usize) -> impl Strategy<Value = TransferDistribution> {
    let layout = Arc::new(PortLayout::single(n_in, n_out));
    let all = enumerate_transfer_functions(&layout, cap()).unwrap();
    proptest::collection::vec(0u32..6, all.len()).prop_map(move |w| {
        let w = if w.iter().all(|&x| x == 0) {
            vec![1; all.len()]
        } else {
            w
        };
        let total: u32 = w.iter().sum();
        TransferDistribution::new(
            layout.clone(),
            all.iter()
                .cloned()
                .zip(w.iter().map(|&x| q(x.into(), total.into())))
                .filter(|(_, p)| !p.is_zero()),
        )
        .unwrap()
    })
}

fn event() -> impl Strategy<Value = Event> {
    (-60i64..=60, 1i64..=6, -60i64..=60, 1i64..=6)
        .prop_map(|(a, b, c, d)| Event::new(q(a, b), q(c, d)))
}

/// Velocities with rational gamma, from Pythagorean triples.
fn velocity() -> impl Strategy<Value = Velocity> {
    prop::sample::select(vec![
        q(3, 5),
        q(-3, 5),
        q(4, 5),
        q(5, 13),
        q(-12, 13),
        q(8, 17),
        q(0, 1),
    ])
    .prop_map(|v| Velocity::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_count(n_in in 1usize..=3, n_out in 1usize..=3) {
        let layout = Arc::new(PortLayout::single(n_in, n_out));
        let all = enumerate_transfer_functions(&layout, cap()).unwrap();
        prop_assert_eq!(all.len() as u64, count_transfer_functions(&layout, cap()).unwrap());
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn series_composition_is_associative(
        f in single_function(2, 3),
        g in single_function(3, 2),
        h in single_function(2, 3),
    ) {
        let left = compose_series(&compose_series(&f, &g).unwrap(), &h).unwrap();
        let right = compose_series(&f, &compose_series(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left.table(), right.table());
        for x in 0..2 {
            prop_assert_eq!(left.apply(x), h.apply(g.apply(f.apply(x))));
        }
    }

    #[test]
    fn elementary_loops_are_forbidden_iff_they_reduce_to_not(
        chain in proptest::collection::vec(0usize..4, 1..7)
    ) {
        let functions: Vec<TransferFunction> = chain.iter().map(|&k| elementary(k)).collect();
        let f = close_loop(&functions).unwrap();
        let folded = functions[1..].iter().fold(functions[0].clone(), |acc, g| compose_series(&acc, g).unwrap());
        prop_assert_eq!(f.table(), folded.table());
        let not = Elementary::new().not;
        prop_assert_eq!(loop_status(&f).unwrap().is_forbidden(), f.table() == not.table());

        let joint = product_distribution(
            &functions.iter().map(TransferDistribution::point).collect::<Vec<_>>()
        ).unwrap();
        let report = stochastic_loop_analysis(&joint).unwrap();
        prop_assert_eq!(report.is_forbidden(), loop_status(&f).unwrap().is_forbidden());
    }

    #[test]
    fn transition_rows_are_normalized(d in distribution(2, 3)) {
        let t = transitions_from_transfers(&d);
        for row in t.rows() {
            prop_assert!(row.iter().sum::<Q>().is_one());
            prop_assert!(row.iter().all(|p| !p.is_negative()));
        }
    }

    #[test]
    fn point_masses_round_trip(f in single_function(3, 2)) {
        let t = transitions_from_transfers(&TransferDistribution::point(&f));
        prop_assert_eq!(t.as_deterministic(), Some(f));
    }

    #[test]
    fn witnesses_reproduce_their_target(d in distribution(2, 2)) {
        let target = transitions_from_transfers(&d);
        let problem = build_consistency_problem(&target, cap()).unwrap();
        let report = solve_feasibility(&problem).unwrap();
        let witness = report.witness().expect("achievable tables are feasible");
        prop_assert_eq!(&transitions_from_transfers(witness), &target);
        prop_assert_eq!(&solve_feasibility(&problem).unwrap(), &report);
    }

    #[test]
    fn interval_classification_reverses_with_order(a in event(), b in event()) {
        prop_assert_eq!(classify_interval(&a, &b), classify_interval(&b, &a).reversed());
    }

    #[test]
    fn boosts_preserve_interval_and_class(a in event(), b in event(), v in velocity()) {
        let (a2, b2) = (boost(&a, &v), boost(&b, &v));
        prop_assert_eq!(a.interval_squared(&b), a2.interval_squared(&b2));
        prop_assert_eq!(classify_interval(&a, &b), classify_interval(&a2, &b2));
        prop_assert_eq!(boost(&a2, &v.reversed()), a);
    }

    #[test]
    fn pi_rotation_preserves_class(a in event(), b in event(), c in event()) {
        prop_assert_eq!(
            classify_interval(&a, &b),
            classify_interval(&pi_rotation(&a, &c), &pi_rotation(&b, &c))
        );
    }

    #[test]
    fn wiring_verdict_is_frame_independent(v in velocity(), c in event()) {
        let places = double_bell_placements();
        let links = [Link::new("A2'", "A1"), Link::new("B2", "B1'"), Link::new("A1", "B2")];
        let base = validate_classical_wiring(&places, &links).unwrap();
        for moved in [boost_placements(&places, &v), rotate_placements(&places, &c)] {
            let other = validate_classical_wiring(&moved, &links).unwrap();
            let status = |r: &causal_transfer::spacetime::WiringReport| {
                r.checks.iter().map(|c| c.status).collect::<Vec<_>>()
            };
            prop_assert_eq!(status(&base), status(&other));
        }
    }

    #[test]
    fn singlet_rows_are_distributions(a in -6i64..=6, b in -6i64..=6) {
        let row = singlet_row(&Angle::pi_fraction(a, 3), &Angle::pi_fraction(b, 3), None).unwrap();
        prop_assert!(row.iter().sum::<Q>().is_one());
        prop_assert!(row.iter().all(|p| !p.is_negative()));
        prop_assert_eq!(&row[1], &row[2]);
        prop_assert_eq!(&row[0], &row[3]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn double_bell_is_symmetric_under_swap(eps in 1i64..=5, la in 0usize..2, lb in 0usize..2) {
        let e = Elementary::new();
        let links = [&e.identity, &e.not];
        let angles = vec![Angle::zero(), Angle::pi_fraction(1, 3), Angle::pi_fraction(2, 3)];
        let s = BellScenario::singlet(angles.clone(), angles, None).unwrap();
        let evidence = certify_weak_signal(s.table(), &s.partition(), cap()).unwrap();
        let config = SimplifiedBellConfig { epsilon: q(eps, 10), ..SimplifiedBellConfig::default() };
        let sb = build_simplified_bell(&evidence, true, &config).unwrap();
        let net = DoubleBellNetwork::new(&sb, &sb, links[la], links[lb]).unwrap();
        let v = double_bell_verdict(&net).unwrap();
        let w = double_bell_verdict(&net.swapped().unwrap()).unwrap();
        prop_assert_eq!(v.contradiction_probability(), w.contradiction_probability());
    }
}

/// On exact angle grids, a reported violation coincides with LP infeasibility
/// of the symmetrized local problem, and infeasibility always carries a
/// verifying certificate.
#[test]
fn violation_report_matches_lp_on_angle_grids() {
    let grids = [
        (0..6).map(|k| Angle::pi_fraction(k, 3)).collect::<Vec<_>>(),
        (0..4).map(|k| Angle::pi_fraction(k, 2)).collect::<Vec<_>>(),
    ];
    let mut violated = 0;
    let mut total = 0;
    for grid in &grids {
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                for k in j + 1..grid.len() {
                    let angles = vec![grid[i].clone(), grid[j].clone(), grid[k].clone()];
                    let s = BellScenario::singlet(angles.clone(), angles, None).unwrap();
                    let report = bell_violation_report(&s).unwrap();
                    let problem = s.symmetric_problem(cap()).unwrap();
                    let lp = solve_feasibility(&problem).unwrap();
                    assert_eq!(report.violated, !lp.is_feasible(), "angles {i}, {j}, {k}");
                    if let Some(c) = lp.certificate() {
                        assert!(c.verify(&problem));
                        violated += 1;
                    }
                    total += 1;
                }
            }
        }
    }
    assert!(violated > 0 && violated < total, "{violated} of {total}");
}
