use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use causal_transfer::angle::Angle;
use causal_transfer::experiments::{
    assumption_audit, bell_violation_report, build_simplified_bell, double_bell_verdict,
    BellScenario, DoubleBellNetwork, SimplifiedBell, SimplifiedBellConfig,
};
use causal_transfer::polytope::{
    build_consistency_problem, build_local_consistency_problem, certify_weak_signal,
    derive_inequalities, solve_feasibility, ConsistencyProblem, DerivationMethod,
    FarkasCertificate, FeasibilityReport, Provenance,
};
use causal_transfer::spacetime::{validate_classical_wiring, Link, LinkStatus, WiringReport};
use causal_transfer::stochastic::{
    product_distribution, stochastic_loop_analysis, transitions_from_transfers,
    TransferDistribution, TransitionTable,
};
use causal_transfer::systems::{
    close_loop, count_transitions, decode_mixed, encode_mixed, enumerate_transfer_functions,
    loop_status, transfer_function_count, LoopStatus, PortLayout, PortSpec, TransferFunction,
};
use causal_transfer::Q;
use serde_json::{json, Value};

use crate::scenario::{self, Preset, ScenarioFile};
use crate::{Failure, Options, Report, Verdict};

fn rat(v: &Q) -> Value {
    Value::String(v.to_string())
}

fn function_json(f: &TransferFunction) -> Value {
    let mut obj = json!({ "table": f.table() });
    if let Some(name) = f.elementary_name() {
        obj["name"] = json!(name);
    }
    obj
}

fn distribution_json(d: &TransferDistribution) -> Value {
    let weights: Vec<Value> = d
        .weights()
        .iter()
        .map(|(f, w)| json!({ "function": function_json(f), "probability": rat(w) }))
        .collect();
    json!({ "layout": d.layout().to_string(), "weights": weights })
}

fn wiring_json(report: &WiringReport) -> Value {
    Value::Array(
        report
            .checks
            .iter()
            .map(|c| {
                json!({
                    "link": c.link.to_string(),
                    "interval": c.class.name(),
                    "status": status_name(c.status),
                })
            })
            .collect(),
    )
}

fn status_name(s: LinkStatus) -> &'static str {
    match s {
        LinkStatus::Admissible => "admissible",
        LinkStatus::NullFlagged => "null (flagged)",
        LinkStatus::Violation => "violation",
    }
}

fn wiring_text(out: &mut String, report: &WiringReport) {
    for c in &report.checks {
        let _ = writeln!(
            out,
            "  {}: {}, {}",
            c.link,
            c.class.name(),
            status_name(c.status)
        );
    }
}

fn require_admissible(report: &WiringReport) -> Result<(), Failure> {
    let bad: Vec<String> = report
        .violations()
        .map(|c| format!("{} ({})", c.link, c.class.name()))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure(format!(
            "classical links outside the forward light cone: {}",
            bad.join(", ")
        )))
    }
}

fn digits_text(index: usize, layout: &PortLayout) -> String {
    let digits = decode_mixed(index, &layout.input_radices());
    let parts: Vec<String> = layout
        .inputs()
        .iter()
        .zip(digits)
        .map(|(p, d)| format!("{}={d}", p.name))
        .collect();
    parts.join(" ")
}

fn elementary_link(name: &str) -> Result<TransferFunction, Failure> {
    let layout = Arc::new(PortLayout::elementary_binary());
    scenario::function_arg(name, &layout)
}

// ---------------------------------------------------------------- check-loop

pub fn check_loop(file: &ScenarioFile, opts: &Options) -> Result<Report, Failure> {
    match &file.preset {
        Some(Preset::DoubleBell { .. }) => {
            double_bell(Some(file), &DoubleBellOverrides::default(), opts)
        }
        Some(Preset::SimplifiedBell { link, .. }) => simplified_loop(file, link.as_deref(), opts),
        Some(Preset::Bell { .. }) => Err(Failure(
            "a bell preset has no classical loop; use derive-inequalities or consistent-region"
                .into(),
        )),
        None => systems_loop(file, opts),
    }
}

/// Orders the systems around the cycle and rewrites each function so its
/// outputs follow the input order of its successor.
fn cycle_chain(
    file: &ScenarioFile,
    opts: &Options,
) -> Result<Vec<(String, TransferDistribution)>, Failure> {
    let systems = scenario::systems(file, opts.tolerance)?;
    if systems.is_empty() {
        return Err(Failure("check-loop needs systems and wiring".into()));
    }
    let mut output_of = BTreeMap::new();
    let mut input_of = BTreeMap::new();
    for (k, s) in systems.iter().enumerate() {
        for p in s.distribution.layout().outputs() {
            output_of.insert(p.name.clone(), k);
        }
        for p in s.distribution.layout().inputs() {
            input_of.insert(p.name.clone(), k);
        }
    }
    let mut source: BTreeMap<String, String> = BTreeMap::new();
    let mut linked_outputs = BTreeMap::new();
    for l in &file.wiring {
        if !output_of.contains_key(&l.from) {
            return Err(Failure(format!(
                "link source `{}` is not a declared output port",
                l.from
            )));
        }
        if !input_of.contains_key(&l.to) {
            return Err(Failure(format!(
                "link target `{}` is not a declared input port",
                l.to
            )));
        }
        if source.insert(l.to.clone(), l.from.clone()).is_some() {
            return Err(Failure(format!(
                "input port `{}` is fed by more than one link",
                l.to
            )));
        }
        if linked_outputs.insert(l.from.clone(), ()).is_some() {
            return Err(Failure(format!(
                "output port `{}` drives more than one link",
                l.from
            )));
        }
    }
    let mut successor = vec![None; systems.len()];
    for (k, s) in systems.iter().enumerate() {
        let mut preds: Vec<usize> = s
            .distribution
            .layout()
            .inputs()
            .iter()
            .map(|p| source.get(&p.name).map(|from| output_of[from]))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                Failure(format!(
                    "acyclic wiring: system `{}` has an unfed input",
                    s.name
                ))
            })?;
        preds.sort_unstable();
        preds.dedup();
        if preds.len() != 1 {
            return Err(Failure(format!(
                "the inputs of `{}` must all come from one system",
                s.name
            )));
        }
        let pred = preds[0];
        if successor[pred].replace(k).is_some() {
            return Err(Failure(format!(
                "`{}` feeds more than one system; the wiring must be a single cycle",
                systems[pred].name
            )));
        }
    }
    let mut order = vec![0];
    let mut at = 0;
    loop {
        let next = successor[at].ok_or_else(|| {
            Failure(format!(
                "acyclic wiring: `{}` feeds nothing",
                systems[at].name
            ))
        })?;
        if next == 0 {
            break;
        }
        if order.contains(&next) {
            return Err(Failure(
                "the wiring contains a cycle that skips the first system".into(),
            ));
        }
        order.push(next);
        at = next;
    }
    if order.len() != systems.len() {
        return Err(Failure(
            "the wiring must form a single cycle through every system".into(),
        ));
    }
    let mut chain = Vec::with_capacity(order.len());
    for (pos, &k) in order.iter().enumerate() {
        let s = &systems[k];
        let next = &systems[order[(pos + 1) % order.len()]];
        let layout = s.distribution.layout();
        let next_inputs = next.distribution.layout().inputs();
        let out_pos: Vec<usize> = next_inputs
            .iter()
            .map(|p| {
                layout
                    .output_index(&source[&p.name])
                    .expect("resolved above")
            })
            .collect();
        for (p, &o) in next_inputs.iter().zip(&out_pos) {
            if layout.outputs()[o].cardinality != p.cardinality {
                return Err(Failure(format!(
                    "link {} -> {} joins ports of different cardinality",
                    layout.outputs()[o].name,
                    p.name
                )));
            }
        }
        let rewired = Arc::new(PortLayout::new(
            layout.inputs().to_vec(),
            next_inputs
                .iter()
                .map(|p| PortSpec::new(format!("{}:{}", s.name, p.name), p.cardinality))
                .collect(),
        )?);
        let (in_r, out_r) = (layout.input_radices(), layout.output_radices());
        let mut weights = Vec::new();
        for (f, w) in s.distribution.weights() {
            let g = TransferFunction::from_ports(rewired.clone(), |x| {
                let digits = decode_mixed(f.apply(encode_mixed(x, &in_r)), &out_r);
                out_pos.iter().map(|&o| digits[o]).collect()
            })?;
            weights.push((g, w.clone()));
        }
        chain.push((s.name.clone(), TransferDistribution::new(rewired, weights)?));
    }
    Ok(chain)
}

fn systems_loop(file: &ScenarioFile, opts: &Options) -> Result<Report, Failure> {
    let chain = cycle_chain(file, opts)?;
    let names: Vec<&str> = chain.iter().map(|(n, _)| n.as_str()).collect();
    let mut text = format!("cycle: {} -> {}\n", names.join(" -> "), names[0]);
    let mut machine = json!({ "command": "check-loop", "cycle": names });

    if !file.placements.is_empty() {
        let report = validate_classical_wiring(
            &scenario::placements(file, opts.tolerance)?,
            &scenario::links(file),
        )?;
        text.push_str("wiring:\n");
        wiring_text(&mut text, &report);
        machine["wiring"] = wiring_json(&report);
        require_admissible(&report)?;
    }

    let deterministic = chain.iter().all(|(_, d)| d.is_point_mass());
    let forbidden = if deterministic {
        let functions: Vec<TransferFunction> = chain
            .iter()
            .map(|(_, d)| d.support().next().expect("point mass").clone())
            .collect();
        let f_loop = close_loop(&functions)?;
        let status = loop_status(&f_loop)?;
        machine["loop_function"] = function_json(&f_loop);
        let _ = writeln!(text, "loop function: {}", f_loop);
        match &status {
            LoopStatus::Allowed { fixed_points } => {
                let pts: Vec<String> = fixed_points
                    .iter()
                    .map(|&i| digits_text(i, f_loop.layout()))
                    .collect();
                let _ = writeln!(text, "allowed: consistent inputs {}", pts.join("; "));
                machine["fixed_points"] = json!(fixed_points);
            }
            LoopStatus::Forbidden => {
                text.push_str("forbidden: no input reproduces itself around the loop\n");
                machine["fixed_points"] = json!([]);
            }
        }
        status.is_forbidden()
    } else {
        let parts: Vec<TransferDistribution> = chain.iter().map(|(_, d)| d.clone()).collect();
        let report = stochastic_loop_analysis(&product_distribution(&parts)?)?;
        let _ = writeln!(text, "loop distribution: {}", report.loop_distribution);
        let _ = writeln!(
            text,
            "contradiction probability: {}",
            report.contradiction_probability
        );
        text.push_str(if report.is_forbidden() {
            "forbidden: the loop contradicts itself with non-zero probability\n"
        } else {
            "allowed: every loop function has a consistent input\n"
        });
        machine["loop_distribution"] = distribution_json(&report.loop_distribution);
        machine["contradiction_probability"] = rat(&report.contradiction_probability);
        report.is_forbidden()
    };
    machine["verdict"] = json!(if forbidden { "forbidden" } else { "allowed" });
    Ok(Report {
        text,
        machine,
        verdict: if forbidden {
            Verdict::Negative
        } else {
            Verdict::Positive
        },
    })
}

const DEFAULT_EVIDENCE_ANGLES: [(i64, i64); 3] = [(0, 1), (1, 3), (2, 3)];

fn evidence_angles(list: Option<&Vec<String>>) -> Result<Vec<Angle>, Failure> {
    match list {
        Some(l) => scenario::angles(l),
        None => Ok(DEFAULT_EVIDENCE_ANGLES
            .iter()
            .map(|&(n, d)| Angle::pi_fraction(n, d))
            .collect()),
    }
}

struct SimplifiedParams<'a> {
    angles: Option<&'a Vec<String>>,
    theta1: Option<&'a String>,
    theta2: Option<&'a String>,
    epsilon: Option<Q>,
}

/// Evidence, then the signalling channel built on it.
fn simplified_bell(
    p: &SimplifiedParams,
    opts: &Options,
) -> Result<(BellScenario, SimplifiedBell), Failure> {
    let angles = evidence_angles(p.angles)?;
    let evidence_scenario = BellScenario::singlet(angles.clone(), angles, opts.tolerance)?;
    let evidence = certify_weak_signal(
        evidence_scenario.table(),
        &evidence_scenario.partition(),
        opts.cap,
    )?;
    let mut config = SimplifiedBellConfig {
        tolerance: opts.tolerance,
        ..SimplifiedBellConfig::default()
    };
    if let Some(t) = p.theta1 {
        config.theta1 = scenario::angle(t)?;
    }
    if let Some(t) = p.theta2 {
        config.theta2 = scenario::angle(t)?;
    }
    if let Some(e) = &p.epsilon {
        config.epsilon = e.clone();
    }
    let sb = build_simplified_bell(&evidence, true, &config)?;
    Ok((evidence_scenario, sb))
}

fn simplified_loop(
    file: &ScenarioFile,
    link: Option<&str>,
    opts: &Options,
) -> Result<Report, Failure> {
    let Some(Preset::SimplifiedBell {
        angles,
        theta1,
        theta2,
        epsilon,
        ..
    }) = &file.preset
    else {
        unreachable!("dispatched on the preset kind");
    };
    let params = SimplifiedParams {
        angles: angles.as_ref(),
        theta1: theta1.as_ref(),
        theta2: theta2.as_ref(),
        epsilon: epsilon
            .as_ref()
            .map(|e| scenario::rational(e, opts.tolerance))
            .transpose()?,
    };
    let (_, sb) = simplified_bell(&params, opts)?;
    let names = sb.base().names();
    let link_fn = elementary_link(link.unwrap_or("id"))?.relabel(PortLayout::new(
        vec![PortSpec::binary(names.a_outcome.clone())],
        vec![PortSpec::binary(names.b_setting.clone())],
    )?)?;
    let back = Link::new(names.a_outcome.clone(), names.b_setting.clone());
    let wiring = validate_classical_wiring(sb.base().placements(), std::slice::from_ref(&back))?;
    require_admissible(&wiring)?;

    let joint =
        product_distribution(&[sb.channel().clone(), TransferDistribution::point(&link_fn)])?;
    let report = stochastic_loop_analysis(&joint)?;
    let mut text = format!(
        "loop: channel {} -> {}, link {back} ({link_fn})\nwiring:\n",
        names.b_setting, names.a_outcome
    );
    wiring_text(&mut text, &wiring);
    let _ = writeln!(
        text,
        "contradiction probability: {}",
        report.contradiction_probability
    );
    let forbidden = report.is_forbidden();
    Ok(Report {
        text,
        machine: json!({
            "command": "check-loop",
            "wiring": wiring_json(&wiring),
            "loop_distribution": distribution_json(&report.loop_distribution),
            "contradiction_probability": rat(&report.contradiction_probability),
            "verdict": if forbidden { "forbidden" } else { "allowed" },
        }),
        verdict: if forbidden {
            Verdict::Negative
        } else {
            Verdict::Positive
        },
    })
}

// ------------------------------------------------------------- double-bell

#[derive(Debug, Default)]
pub struct DoubleBellOverrides {
    pub epsilon: Option<String>,
    pub link_a: Option<String>,
    pub link_b: Option<String>,
}

pub fn double_bell(
    file: Option<&ScenarioFile>,
    overrides: &DoubleBellOverrides,
    opts: &Options,
) -> Result<Report, Failure> {
    let (mut params, mut link_a, mut link_b) = (
        SimplifiedParams {
            angles: None,
            theta1: None,
            theta2: None,
            epsilon: None,
        },
        "id".to_string(),
        "not".to_string(),
    );
    if let Some(f) = file {
        match &f.preset {
            Some(Preset::DoubleBell {
                angles,
                theta1,
                theta2,
                epsilon,
                link_a: la,
                link_b: lb,
            }) => {
                params.angles = angles.as_ref();
                params.theta1 = theta1.as_ref();
                params.theta2 = theta2.as_ref();
                params.epsilon = epsilon
                    .as_ref()
                    .map(|e| scenario::rational(e, opts.tolerance))
                    .transpose()?;
                if let Some(l) = la {
                    link_a = l.clone();
                }
                if let Some(l) = lb {
                    link_b = l.clone();
                }
            }
            _ => {
                return Err(Failure(
                    "double-bell needs a file with a `double-bell` preset".into(),
                ))
            }
        }
    }
    if let Some(e) = &overrides.epsilon {
        params.epsilon = Some(causal_transfer::rational::parse_rational(e)?);
    }
    if let Some(l) = &overrides.link_a {
        link_a = l.clone();
    }
    if let Some(l) = &overrides.link_b {
        link_b = l.clone();
    }

    let (evidence_scenario, sb) = simplified_bell(&params, opts)?;
    let bell = bell_violation_report(&evidence_scenario)?;
    let (fa, fb) = (elementary_link(&link_a)?, elementary_link(&link_b)?);
    let mut net = DoubleBellNetwork::new(&sb, &sb, &fa, &fb)?;
    if let Some(f) = file {
        if !f.placements.is_empty() {
            net = net.with_placements(scenario::placements(f, opts.tolerance)?)?;
        }
    }
    let verdict = double_bell_verdict(&net)?;
    let forbidden = verdict.is_forbidden();

    let mut text = String::new();
    let angles: Vec<String> = evidence_scenario
        .angles_a()
        .iter()
        .map(Angle::to_string)
        .collect();
    let _ = writeln!(
        text,
        "evidence: singlet at ({}): minimum inequality value {}, {} violated instances; locality LP infeasible",
        angles.join(", "),
        bell.minimum,
        bell.violations().count()
    );
    let _ = writeln!(text, "channel: {}", sb.channel());
    text.push_str("wiring:\n");
    wiring_text(&mut text, &verdict.wiring);
    let _ = writeln!(text, "chain: {}", verdict.chain.join(" -> "));
    let _ = writeln!(
        text,
        "loop distribution: {}",
        verdict.loop_report.loop_distribution
    );
    let _ = writeln!(
        text,
        "contradiction probability: {}",
        verdict.contradiction_probability()
    );
    let _ = writeln!(
        text,
        "verdict: {}",
        if forbidden { "forbidden" } else { "allowed" }
    );

    let mut machine = json!({
        "command": "double-bell",
        "evidence": {
            "angles": angles,
            "minimum": rat(&bell.minimum),
            "violations": bell.violations().map(|i| i.text.clone()).collect::<Vec<_>>(),
        },
        "channel": distribution_json(sb.channel()),
        "epsilon": rat(&sb.pr_identity()),
        "links": { "a": fa.to_string(), "b": fb.to_string() },
        "wiring": wiring_json(&verdict.wiring),
        "chain": verdict.chain,
        "factorized": verdict.factorized,
        "loop_distribution": distribution_json(&verdict.loop_report.loop_distribution),
        "contradiction_probability": rat(verdict.contradiction_probability()),
        "verdict": if forbidden { "forbidden" } else { "allowed" },
    });
    if forbidden {
        let audit = assumption_audit(&verdict)?;
        text.push_str("assumption audit:\n");
        for e in &audit {
            let _ = writeln!(
                text,
                "  {} [{}] {}: {}{}",
                e.assumption,
                e.scope,
                e.status.name(),
                e.reason,
                if e.resolution { " (resolution)" } else { "" }
            );
        }
        machine["audit"] = Value::Array(
            audit
                .iter()
                .map(|e| {
                    json!({
                        "assumption": e.assumption.code(),
                        "scope": e.scope,
                        "status": e.status.name(),
                        "reason": e.reason,
                        "resolution": e.resolution,
                    })
                })
                .collect(),
        );
    } else {
        text.push_str("no contradiction, so no assumption is refuted\n");
    }
    Ok(Report {
        text,
        machine,
        verdict: if forbidden {
            Verdict::Negative
        } else {
            Verdict::Positive
        },
    })
}

// ------------------------------------------------------ consistent-region

/// The table of a scenario and the preset's natural partition, if any.
fn scenario_table(
    file: &ScenarioFile,
    opts: &Options,
) -> Result<(TransitionTable, Option<BellScenario>), Failure> {
    match (&file.transition_table, &file.preset) {
        (Some(t), None) => Ok((scenario::transition_table(t, opts.tolerance)?, None)),
        (None, Some(Preset::Bell { angles_a, angles_b })) => {
            let a = scenario::angles(angles_a)?;
            let b = match angles_b {
                Some(b) => scenario::angles(b)?,
                None => a.clone(),
            };
            let s = BellScenario::singlet(a, b, opts.tolerance)?;
            Ok((s.table().clone(), Some(s)))
        }
        (None, Some(Preset::SimplifiedBell {
            angles,
            theta1,
            theta2,
            epsilon,
            ..
        })) => {
            let params = SimplifiedParams {
                angles: angles.as_ref(),
                theta1: theta1.as_ref(),
                theta2: theta2.as_ref(),
                epsilon: epsilon.as_ref().map(|e| scenario::rational(e, opts.tolerance)).transpose()?,
            };
            let (_, sb) = simplified_bell(&params, opts)?;
            Ok((sb.base().table().clone(), Some(sb.base().clone())))
        }
        (None, None) if file.systems.len() == 1 => {
            let s = scenario::systems(file, opts.tolerance)?.remove(0);
            Ok((transitions_from_transfers(&s.distribution), None))
        }
        _ => Err(Failure(
            "expected exactly one of `transition_table`, a bell or simplified-bell preset, or a single system".into(),
        )),
    }
}

fn build_problem(
    file: &ScenarioFile,
    local: Option<&str>,
    zero: &[String],
    opts: &Options,
) -> Result<ConsistencyProblem, Failure> {
    let (table, _) = scenario_table(file, opts)?;
    let problem = match local {
        Some(p) => build_local_consistency_problem(&table, &scenario::partition(p)?, opts.cap)?,
        None => build_consistency_problem(&table, opts.cap)?,
    };
    if zero.is_empty() {
        return Ok(problem);
    }
    let layout = table.shared_layout().clone();
    let functions = zero
        .iter()
        .map(|z| scenario::function_arg(z, &layout))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(problem.with_zero_functions(&functions)?)
}

fn witness_json(problem: &ConsistencyProblem, w: &TransferDistribution) -> Value {
    let weights: Vec<Value> = w
        .weights()
        .iter()
        .map(|(f, p)| {
            let k = problem.variable_index(f).expect("witness uses problem variables");
            json!({ "function": function_json(f), "label": problem.variable_label(k), "probability": rat(p) })
        })
        .collect();
    json!({ "layout": w.layout().to_string(), "weights": weights })
}

pub fn consistent_region(
    file: &ScenarioFile,
    local: Option<&str>,
    zero: &[String],
    check: Option<&Path>,
    opts: &Options,
) -> Result<Report, Failure> {
    let problem = build_problem(file, local, zero, opts)?;
    if let Some(path) = check {
        return recheck(&problem, path);
    }
    let report = solve_feasibility(&problem)?;
    let mut text = format!(
        "table: {}\nvariables: {}\nconstraints: {}\n",
        problem.layout(),
        problem.variables().len(),
        problem.constraint_rows().len()
    );
    let mut machine = json!({
        "command": "consistent-region",
        "layout": problem.layout().to_string(),
        "variables": problem.variables().len(),
        "feasible": report.is_feasible(),
    });
    if let Some(p) = problem.partition() {
        machine["partition"] = json!(p.to_string());
        let _ = writeln!(text, "partition: {p}");
    }
    match &report {
        FeasibilityReport::Feasible { witness } => {
            text.push_str("feasible; witness:\n");
            for (f, p) in witness.weights() {
                let k = problem
                    .variable_index(f)
                    .expect("witness uses problem variables");
                let _ = writeln!(text, "  Pr({}) = {p}", problem.variable_label(k));
            }
            machine["witness"] = witness_json(&problem, witness);
        }
        FeasibilityReport::Infeasible { certificate } => {
            let _ = writeln!(
                text,
                "infeasible; certificate (multiplier per constraint, combination gives 0 >= {}):",
                certificate.contradiction(&problem)
            );
            for (label, y) in certificate.support(&problem) {
                let _ = writeln!(text, "  {y} x [{label}]");
            }
            let rows: Vec<String> = problem
                .constraint_rows()
                .into_iter()
                .map(|c| c.label)
                .collect();
            machine["certificate"] = json!({
                "rows": rows,
                "multipliers": certificate.multipliers.iter().map(rat).collect::<Vec<_>>(),
                "contradiction": rat(&certificate.contradiction(&problem)),
            });
        }
    }
    Ok(Report {
        text,
        machine,
        verdict: if report.is_feasible() {
            Verdict::Positive
        } else {
            Verdict::Negative
        },
    })
}

/// Re-validates a machine report's witness or certificate against `problem`.
fn recheck(problem: &ConsistencyProblem, path: &Path) -> Result<Report, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let report: Value =
        serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let layout = problem.target().shared_layout().clone();
    let (kind, ok) = if let Some(w) = report.get("witness") {
        let weights = w["weights"]
            .as_array()
            .ok_or_else(|| Failure("witness has no `weights` list".into()))?;
        let mut pairs = Vec::new();
        for entry in weights {
            let table: Vec<usize> = serde_json::from_value(entry["function"]["table"].clone())
                .map_err(|e| Failure(format!("bad witness function: {e}")))?;
            let p = scenario::rational(&entry["probability"], None)?;
            pairs.push((TransferFunction::new(layout.clone(), table)?, p));
        }
        let dist = TransferDistribution::new(layout, pairs)?;
        ("witness", problem.is_consistent(&dist))
    } else if let Some(c) = report.get("certificate") {
        let multipliers = c["multipliers"]
            .as_array()
            .ok_or_else(|| Failure("certificate has no `multipliers` list".into()))?
            .iter()
            .map(|v| scenario::rational(v, None))
            .collect::<Result<Vec<_>, _>>()?;
        (
            "certificate",
            FarkasCertificate { multipliers }.verify(problem),
        )
    } else {
        return Err(Failure(format!(
            "{} holds neither a witness nor a certificate",
            path.display()
        )));
    };
    if !ok {
        return Err(Failure(format!(
            "the {kind} does not re-validate against this constraint system"
        )));
    }
    Ok(Report {
        text: format!("{kind} re-validated\n"),
        machine: json!({ "command": "consistent-region", "check": kind, "valid": true }),
        verdict: Verdict::Positive,
    })
}

// ---------------------------------------------------- derive-inequalities

pub fn derive(file: &ScenarioFile, local: Option<&str>, opts: &Options) -> Result<Report, Failure> {
    let (table, scenario) = scenario_table(file, opts)?;
    let problem = match (&scenario, local) {
        (Some(s), None) if s.angles_a() == s.angles_b() => s.symmetric_problem(opts.cap)?,
        (Some(s), None) => s.local_problem(opts.cap)?,
        (_, Some(p)) => {
            build_local_consistency_problem(&table, &scenario::partition(p)?, opts.cap)?
        }
        (None, None) => {
            return Err(Failure(
                "derive-inequalities needs a Bell preset or --local A:B".into(),
            ))
        }
    };
    let d = derive_inequalities(&problem)?;
    let method = match d.method {
        DerivationMethod::DirectSolve => "direct-solve",
        DerivationMethod::FacetEnumeration => "facet-enumeration",
    };
    let mut text = format!("method: {method}\n");
    if !d.classes.is_empty() {
        text.push_str("classes:\n");
        for c in &d.classes {
            let _ = writeln!(text, "  {} = {}", c.name, c.member_labels.join(" = "));
        }
    }
    if !d.identities.is_empty() {
        text.push_str("identities:\n");
        for i in &d.identities {
            let _ = writeln!(text, "  {}", i.text);
        }
    }
    text.push_str("inequalities (value on the table):\n");
    let mut items = Vec::new();
    for ineq in &d.inequalities {
        let slack = ineq.slack(&table);
        let holds = ineq.holds(&table);
        let _ = writeln!(
            text,
            "  {}    [{}{}{}]",
            ineq.text,
            slack,
            if ineq.violable { ", violable" } else { "" },
            if holds { "" } else { ", VIOLATED" }
        );
        let source = match &ineq.provenance {
            Provenance::Nonnegativity { class, multiplier } => {
                json!({ "nonnegativity": class, "multiplier": rat(multiplier) })
            }
            Provenance::Facet => json!("facet"),
        };
        items.push(json!({
            "text": ineq.text,
            "terms": ineq.terms.iter().map(|((i, j), c)| json!({
                "input": i, "output": j, "coefficient": rat(c)
            })).collect::<Vec<_>>(),
            "sense": ineq.sense.symbol(),
            "bound": rat(&ineq.bound),
            "source": source,
            "violable": ineq.violable,
            "slack": rat(&slack),
            "holds": holds,
        }));
    }
    let violated = d.inequalities.iter().filter(|i| !i.holds(&table)).count();
    let _ = writeln!(
        text,
        "{} inequalities, {} violable, {} violated by the table",
        d.inequalities.len(),
        d.violable().count(),
        violated
    );
    let machine = json!({
        "command": "derive-inequalities",
        "method": method,
        "classes": d.classes.iter().map(|c| json!({
            "name": c.name, "members": c.member_labels
        })).collect::<Vec<_>>(),
        "identities": d.identities.iter().map(|i| i.text.clone()).collect::<Vec<_>>(),
        "inequalities": items,
        "violated": violated,
    });
    Ok(Report {
        text,
        machine,
        verdict: Verdict::Positive,
    })
}

// -------------------------------------------------------------- enumerate

pub fn enumerate(
    inputs: &[usize],
    outputs: &[usize],
    count_only: bool,
    opts: &Options,
) -> Result<Report, Failure> {
    let port = |prefix: &str, k: usize, n: usize| PortSpec::new(format!("{prefix}{}", k + 1), n);
    let layout = Arc::new(PortLayout::new(
        inputs
            .iter()
            .enumerate()
            .map(|(k, &n)| port("i", k, n))
            .collect(),
        outputs
            .iter()
            .enumerate()
            .map(|(k, &n)| port("j", k, n))
            .collect(),
    )?);
    let transitions = count_transitions(&layout);
    let functions = transfer_function_count(&layout);
    let mut text =
        format!("layout: {layout}\ntransitions: {transitions}\ntransfer functions: {functions}\n");
    let mut machine = json!({
        "command": "enumerate",
        "layout": layout.to_string(),
        "transitions": transitions.to_string(),
        "transfer_functions": functions.to_string(),
    });
    if !count_only {
        let all = enumerate_transfer_functions(&layout, opts.cap)?;
        for (k, f) in all.iter().enumerate() {
            let _ = writeln!(
                text,
                "  F{k}: {:?}{}",
                f.table(),
                f.elementary_name()
                    .map(|n| format!(" ({n})"))
                    .unwrap_or_default()
            );
        }
        machine["functions"] = Value::Array(all.iter().map(function_json).collect());
    }
    Ok(Report {
        text,
        machine,
        verdict: Verdict::Positive,
    })
}
