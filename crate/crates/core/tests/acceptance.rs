//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use causal_transfer::angle::Angle;
use causal_transfer::experiments::quantum::same_sign_probabilities;
use causal_transfer::experiments::{
    build_simplified_bell, double_bell_placements, double_bell_verdict, BellScenario,
    DoubleBellNetwork, SimplifiedBell, SimplifiedBellConfig,
};
use causal_transfer::polytope::{
    apply_perfect_correlation, build_consistency_problem, build_local_consistency_problem,
    certify_weak_signal, derive_inequalities, polytope_vertices, solve_feasibility,
    ConsistencyProblem, DerivedInequality, Partition, Provenance, Relation,
};
use causal_transfer::rational::{q, qi};
use causal_transfer::spacetime::{
    boost, classify_interval, validate_classical_wiring, Event, Link, Velocity,
};
use causal_transfer::stochastic::{
    product_distribution, series_transfer_distribution, transitions_from_transfers,
    TransferDistribution, TransitionTable,
};
use causal_transfer::systems::{
    close_loop, combine_parallel, compose_series, count_transfer_functions,
    enumerate_transfer_functions, loop_status, DeterministicSystem, Elementary, EnumerationCap,
    PortLayout, PortSpec, TransferFunction,
};
use causal_transfer::Q;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const ONE_SECOND: Duration = Duration::from_secs(1);
const FIVE_SECONDS: Duration = Duration::from_secs(5);
const THIRTY_SECONDS: Duration = Duration::from_secs(30);
/// Agreement required between the exact value and the floating-point oracle.
const ORACLE_TOLERANCE: f64 = 1e-12;
const SEED: u64 = 0x5eed_2026;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, what: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn err(e: causal_transfer::Error) -> String {
    e.to_string()
}

fn cap() -> EnumerationCap {
    EnumerationCap::default()
}

fn sixty() -> Vec<Angle> {
    vec![
        Angle::zero(),
        Angle::pi_fraction(1, 3),
        Angle::pi_fraction(2, 3),
    ]
}

fn coin_toss() -> TransitionTable {
    TransitionTable::new(
        Arc::new(PortLayout::elementary_binary()),
        vec![vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(1, 2)]],
    )
    .expect("coin table")
}

fn criterion_1() -> Check {
    let c = |n_in, n_out| {
        count_transfer_functions(&PortLayout::single(n_in, n_out), cap()).map_err(err)
    };
    ensure(c(3, 2)? == 8, "N(i)=3, N(j)=2 should give 8 functions")?;
    let two_by_two = PortLayout::new(
        vec![PortSpec::binary("i1"), PortSpec::binary("i2")],
        vec![PortSpec::binary("j1"), PortSpec::binary("j2")],
    )
    .map_err(err)?;
    ensure(
        count_transfer_functions(&two_by_two, cap()).map_err(err)? == 256,
        "4^4 = 256",
    )?;
    let e = Elementary::new();
    let s1 = DeterministicSystem::new("S1", e.identity.clone());
    let s2 = DeterministicSystem::new(
        "S2",
        e.not
            .relabel(Arc::new(
                PortLayout::new(vec![PortSpec::binary("i2")], vec![PortSpec::binary("j2")])
                    .unwrap(),
            ))
            .map_err(err)?,
    );
    let s = combine_parallel(&s1, &s2).map_err(err)?;
    ensure(
        s.transition_count() == 8u32.into(),
        "parallel transitions 2x2+2x2 = 8",
    )?;
    ensure(
        s.transfer_function_count() == 16u32.into(),
        "parallel transfer functions 2^2 x 2^2 = 16",
    )?;
    Ok("8, 256, and 8 transitions / 16 functions for the parallel pair".into())
}

fn criterion_2() -> Check {
    let e = Elementary::new();
    let f = close_loop(&[
        e.identity.clone(),
        e.identity.clone(),
        e.identity.clone(),
        e.not.clone(),
    ])
    .map_err(err)?;
    ensure(
        loop_status(&f).map_err(err)?.is_forbidden(),
        "[Id,Id,Id,NOT] must be forbidden",
    )?;
    let all = enumerate_transfer_functions(&Arc::new(PortLayout::elementary_binary()), cap())
        .map_err(err)?;
    ensure(all.len() == 4, "four binary unary functions")?;
    let forbidden: Vec<&TransferFunction> = all
        .iter()
        .filter(|f| loop_status(f).map(|s| s.is_forbidden()).unwrap_or(false))
        .collect();
    ensure(
        forbidden == vec![&e.not],
        "NOT must be the only fixed-point-free function",
    )?;
    Ok("loop forbidden; NOT is the unique fixed-point-free unary function".into())
}

fn criterion_3() -> Check {
    let e = Elementary::new();
    let layout = Arc::new(PortLayout::elementary_binary());
    let constants = TransferDistribution::new(
        layout.clone(),
        [(e.const0.clone(), q(1, 2)), (e.const1.clone(), q(1, 2))],
    )
    .map_err(err)?;
    let gates = TransferDistribution::new(
        layout,
        [(e.identity.clone(), q(1, 2)), (e.not.clone(), q(1, 2))],
    )
    .map_err(err)?;
    let coin = coin_toss();
    ensure(
        transitions_from_transfers(&constants) == coin,
        "constants must give the coin table",
    )?;
    ensure(
        transitions_from_transfers(&gates) == coin,
        "Id/NOT must give the coin table",
    )?;
    ensure(constants != gates, "the two distributions differ")?;
    let p = build_consistency_problem(&coin, cap()).map_err(err)?;
    ensure(
        p.is_consistent(&constants) && p.is_consistent(&gates),
        "both must be feasible witnesses",
    )?;
    Ok("both distributions reproduce the coin toss and are feasible witnesses".into())
}

fn three_angle_problem(
    table: &TransitionTable,
    symmetric: bool,
) -> std::result::Result<ConsistencyProblem, String> {
    let s = BellScenario::new(
        sixty(),
        sixty(),
        table.clone(),
        BellScenario::singlet(sixty(), sixty(), None)
            .map_err(err)?
            .placements()
            .to_vec(),
    )
    .map_err(err)?;
    if symmetric {
        s.symmetric_problem(cap()).map_err(err)
    } else {
        let p = s.local_problem(cap()).map_err(err)?;
        apply_perfect_correlation(&p, &sixty(), &sixty()).map_err(err)
    }
}

/// `Σ c·Pr(s|xy) >= bound` on 1-based settings, outcome as a sign pair.
fn expected(terms: &[(&str, usize, usize, i64)], bound: Q) -> DerivedInequality {
    let outcome = |s: &str| match s {
        "++" => 0,
        "+-" => 1,
        "-+" => 2,
        _ => 3,
    };
    DerivedInequality {
        terms: terms
            .iter()
            .map(|&(s, x, y, c)| (((x - 1) * 3 + (y - 1), outcome(s)), qi(c)))
            .collect(),
        sense: Relation::Ge,
        bound,
        provenance: Provenance::Facet,
        violable: false,
        text: String::new(),
    }
}

fn criterion_4() -> Check {
    let table = BellScenario::singlet(sixty(), sixty(), None)
        .map_err(err)?
        .table()
        .clone();
    let d = derive_inequalities(&three_angle_problem(&table, true)?).map_err(err)?;
    let found = |want: &DerivedInequality| {
        d.inequalities
            .iter()
            .any(|q| q.normalized() == want.normalized())
    };
    let cyc = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];
    // 2P0 = Pr(++|23) + Pr(++|31) + Pr(++|12) - 1/2 >= 0
    ensure(
        found(&expected(
            &[("++", 2, 3, 1), ("++", 3, 1, 1), ("++", 1, 2, 1)],
            q(1, 2),
        )),
        "missing the 2P0 sum form",
    )?;
    for (a, b, c) in cyc {
        // 2P1 = 1/2 + Pr(++|23) - Pr(++|31) - Pr(++|12) >= 0 and cyclic
        ensure(
            found(&expected(
                &[("++", a, b, 1), ("++", b, c, -1), ("++", c, a, -1)],
                q(-1, 2),
            )),
            format!("missing the ++ difference form at ({a}{b})"),
        )?;
        // 2P1 = Pr(+-|31) + Pr(+-|12) - Pr(+-|23) >= 0 and cyclic
        ensure(
            found(&expected(
                &[("+-", c, a, 1), ("+-", a, b, 1), ("+-", b, c, -1)],
                Q::zero(),
            )),
            format!("missing the Bell form with Pr(+-|{b}{c}) subtracted"),
        )?;
    }
    let verbatim = "2P1 = Pr(+-|12) - Pr(+-|23) + Pr(+-|31) >= 0";
    ensure(
        d.inequalities.iter().any(|q| q.text == verbatim),
        "symbolic 2P1 Bell form missing",
    )?;
    Ok(format!(
        "{} inequalities including all three families; e.g. {verbatim}",
        d.inequalities.len()
    ))
}

fn criterion_5() -> Check {
    let scenario = BellScenario::singlet(sixty(), sixty(), None).map_err(err)?;
    let t = scenario.table();
    let e = |x: usize, y: usize| t.get((x - 1) * 3 + (y - 1), 1).clone();
    // Pr(+-|12) + Pr(+-|23) - Pr(+-|31): the cyclic instance with 31 subtracted.
    let value = e(1, 2) + e(2, 3) - e(3, 1);
    ensure(
        value == q(-1, 8),
        format!("instance is {value}, expected -1/8"),
    )?;
    let angle = |k: usize| sixty()[k - 1].radians();
    let f = |x: usize, y: usize| same_sign_probabilities(angle(x), angle(y))[0][1];
    let float = f(1, 2) + f(2, 3) - f(3, 1);
    ensure(
        (float + 0.125).abs() < ORACLE_TOLERANCE,
        format!("oracle gives {float}"),
    )?;
    let problem = scenario.local_problem(cap()).map_err(err)?;
    let report = solve_feasibility(&problem).map_err(err)?;
    let cert = report
        .certificate()
        .ok_or("locality-restricted LP should be infeasible")?;
    ensure(cert.verify(&problem), "certificate must verify")?;
    let gap = cert.contradiction(&problem);
    ensure(gap.is_positive(), "certificate value must be positive")?;
    Ok(format!(
        "instance = -1/8 (oracle {float:.3e}); LP infeasible, certificate gives 0 >= {gap}"
    ))
}

fn criterion_6() -> Check {
    let coin =
        certify_weak_signal(&coin_toss(), &Partition::new(["i"], ["j"]), cap()).map_err(err)?;
    ensure(
        !coin.is_weak_signal() && coin.verify(),
        "coin toss must have a verified local witness",
    )?;
    let s = BellScenario::singlet(sixty(), sixty(), None).map_err(err)?;
    let singlet = certify_weak_signal(s.table(), &s.partition(), cap()).map_err(err)?;
    ensure(
        singlet.is_weak_signal() && singlet.verify(),
        "singlet must give a verified weak signal",
    )?;
    Ok("coin toss: no weak signal; singlet at 0, pi/3, 2pi/3: weak signal".into())
}

/// Independent enumeration of the 16 joint channel outcomes.
fn brute_force(channel_p: &TransferDistribution, channel_u: &TransferDistribution) -> Q {
    let e = Elementary::new();
    let mut total = Q::zero();
    for fp in e.all() {
        for fu in e.all() {
            let w = channel_p.probability(fp) * channel_u.probability(fu);
            // A2' -> Id -> A1 -> fu -> B2 -> NOT -> B1' -> fp -> A2'
            let fixed = (0..2).any(|x| fp.apply(1 - fu.apply(x)) == x);
            if !fixed {
                total += w;
            }
        }
    }
    total
}

fn criterion_7() -> Check {
    let e = Elementary::new();
    let s = BellScenario::singlet(sixty(), sixty(), None).map_err(err)?;
    let evidence = certify_weak_signal(s.table(), &s.partition(), cap()).map_err(err)?;
    let sb =
        build_simplified_bell(&evidence, true, &SimplifiedBellConfig::default()).map_err(err)?;
    let net = DoubleBellNetwork::new(&sb, &sb, &e.identity, &e.not).map_err(err)?;
    let v = double_bell_verdict(&net).map_err(err)?;
    ensure(v.factorized, "joint must be factorized")?;
    let p = v.contradiction_probability().clone();
    ensure(
        p == q(1, 50),
        format!("contradiction probability {p}, expected 1/50"),
    )?;
    let brute = brute_force(sb.channel(), sb.channel());
    ensure(brute == p, format!("brute force {brute} disagrees"))?;

    let local_only = SimplifiedBell::from_channel(
        sb.base().clone(),
        TransferDistribution::new(
            sb.channel().shared_layout().clone(),
            [(e.const0.clone(), q(1, 2)), (e.const1.clone(), q(1, 2))],
        )
        .map_err(err)?,
    )
    .map_err(err)?;
    for (primed, unprimed) in [(&local_only, &sb), (&sb, &local_only)] {
        let net = DoubleBellNetwork::new(primed, unprimed, &e.identity, &e.not).map_err(err)?;
        let v = double_bell_verdict(&net).map_err(err)?;
        ensure(
            v.contradiction_probability().is_zero(),
            "zero nonlocal weight must give probability 0",
        )?;
    }
    Ok("contradiction probability 1/50 (brute force agrees); 0 with either channel local".into())
}

fn criterion_8() -> Check {
    let places = double_bell_placements();
    let links = [Link::new("A2'", "A1"), Link::new("B2", "B1'")];
    let report = validate_classical_wiring(&places, &links).map_err(err)?;
    ensure(report.is_admissible(), "preset wiring must be admissible")?;
    ensure(
        report.flagged().count() == 0,
        "preset links are strictly timelike",
    )?;

    let mut moved = places.clone();
    for p in &mut moved {
        match p.port.as_str() {
            "A2'" => p.event = Event::new(qi(0), qi(-8)),
            "A1" => p.event = Event::new(qi(1), qi(-2)),
            _ => {}
        }
    }
    let bad = validate_classical_wiring(&moved, &links).map_err(err)?;
    ensure(!bad.is_admissible(), "spacelike link must be a violation")?;

    let v = Velocity::new(q(3, 5)).map_err(err)?;
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut coord = || q(rng.gen_range(-200..=200), rng.gen_range(1..=20));
    for _ in 0..100 {
        let a = Event::new(coord(), coord());
        let b = Event::new(coord(), coord());
        ensure(
            classify_interval(&a, &b) == classify_interval(&boost(&a, &v), &boost(&b, &v)),
            format!("classification of {a} -> {b} changed under the boost"),
        )?;
    }
    Ok("preset admissible; moved link rejected; 100 pairs invariant under v = 3/5".into())
}

fn random_distribution(rng: &mut StdRng) -> TransferDistribution {
    let layout = Arc::new(PortLayout::single(
        rng.gen_range(1..=3),
        rng.gen_range(1..=3),
    ));
    let all = enumerate_transfer_functions(&layout, cap()).expect("small layout");
    let picked: Vec<(TransferFunction, i64)> = all
        .into_iter()
        .filter_map(|f| rng.gen_bool(0.5).then(|| (f, rng.gen_range(1..=9))))
        .collect();
    let picked = if picked.is_empty() {
        vec![(TransferFunction::constant(layout.clone(), 0).unwrap(), 1)]
    } else {
        picked
    };
    let total: i64 = picked.iter().map(|(_, w)| w).sum();
    TransferDistribution::new(layout, picked.into_iter().map(|(f, w)| (f, q(w, total)))).unwrap()
}

fn criterion_9() -> Check {
    let mut rng = StdRng::seed_from_u64(SEED);
    for k in 0..1000 {
        let d = random_distribution(&mut rng);
        let t = transitions_from_transfers(&d);
        ensure(
            t.rows()
                .iter()
                .all(|r| r.iter().sum::<Q>().is_one() && r.iter().all(|v| !v.is_negative())),
            format!("distribution {k} gave an unnormalized row"),
        )?;
    }

    let e = Elementary::new();
    for f1 in e.all() {
        for f2 in e.all() {
            let c = compose_series(f1, f2).map_err(err)?;
            ensure(
                (0..2).all(|x| c.apply(x) == f2.apply(f1.apply(x))),
                format!("{f2} after {f1}"),
            )?;
            let joint = product_distribution(&[
                TransferDistribution::point(f1),
                TransferDistribution::point(f2),
            ])
            .map_err(err)?;
            let s = series_transfer_distribution(&joint).map_err(err)?;
            ensure(
                s == TransferDistribution::point(&c),
                "series distribution of point masses",
            )?;
        }
    }
    let channel = |rng: &mut StdRng| {
        let w: Vec<i64> = (0..4).map(|_| rng.gen_range(0..=5)).collect();
        let total: i64 = w.iter().sum::<i64>().max(1);
        let w: Vec<i64> = if w.iter().all(|&x| x == 0) {
            vec![1, 0, 0, 0]
        } else {
            w
        };
        TransferDistribution::new(
            Arc::new(PortLayout::elementary_binary()),
            e.all()
                .into_iter()
                .cloned()
                .zip(w.into_iter().map(|x| q(x, total))),
        )
        .unwrap()
    };
    for _ in 0..50 {
        let (a, b) = (channel(&mut rng), channel(&mut rng));
        let s =
            series_transfer_distribution(&product_distribution(&[a.clone(), b.clone()]).unwrap())
                .map_err(err)?;
        let via_tables = transitions_from_transfers(&a)
            .then(&transitions_from_transfers(&b))
            .map_err(err)?;
        ensure(
            transitions_from_transfers(&s) == via_tables,
            "series composition disagrees with the matrix product",
        )?;
    }

    let table3 = BellScenario::singlet(sixty(), sixty(), None)
        .map_err(err)?
        .table()
        .clone();
    let two = vec![Angle::zero(), Angle::pi_fraction(1, 3)];
    let scenario2 = BellScenario::singlet(two.clone(), two, None).map_err(err)?;
    let problems = vec![
        three_angle_problem(&table3, true)?,
        three_angle_problem(&table3, false)?,
        scenario2.symmetric_problem(cap()).map_err(err)?,
        build_local_consistency_problem(scenario2.table(), &scenario2.partition(), cap())
            .map_err(err)?,
    ];
    let mut checked = 0;
    for p in &problems {
        let d = derive_inequalities(p).map_err(err)?;
        for v in polytope_vertices(p).map_err(err)? {
            for ineq in &d.inequalities {
                ensure(ineq.holds(&v), format!("{} fails on a vertex", ineq.text))?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "1000 distributions normalized; 16 chains + 50 channel pairs agree; {checked} vertex checks sound"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 counting identities", ONE_SECOND, criterion_1),
        ("2 deterministic loop constraint", ONE_SECOND, criterion_2),
        ("3 transfer-picture non-uniqueness", ONE_SECOND, criterion_3),
        ("4 Bell linear system", FIVE_SECONDS, criterion_4),
        ("5 Bell violation", FIVE_SECONDS, criterion_5),
        ("6 weak-signal certification", FIVE_SECONDS, criterion_6),
        ("7 double Bell contradiction", ONE_SECOND, criterion_7),
        ("8 spacetime admissibility", ONE_SECOND, criterion_8),
        ("9 property suites", THIRTY_SECONDS, criterion_9),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
