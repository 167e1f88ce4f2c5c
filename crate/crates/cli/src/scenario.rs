//! Scenario files: JSON with probabilities as exact rational strings.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use causal_transfer::angle::Angle;
use causal_transfer::polytope::Partition;
use causal_transfer::rational::{parse_rational, simplest_within};
use causal_transfer::spacetime::{Event, Link, PortPlacement};
use causal_transfer::stochastic::{TransferDistribution, TransitionTable};
use causal_transfer::systems::{Elementary, PortLayout, PortSpec, TransferFunction};
use causal_transfer::Q;
use serde::Deserialize;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub systems: Vec<SystemDecl>,
    #[serde(default)]
    pub wiring: Vec<LinkDecl>,
    #[serde(default)]
    pub placements: Vec<PlacementDecl>,
    pub transition_table: Option<TableDecl>,
    pub preset: Option<Preset>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PortDecl {
    Binary(String),
    Sized { name: String, cardinality: usize },
}

impl PortDecl {
    fn spec(&self) -> PortSpec {
        match self {
            PortDecl::Binary(name) => PortSpec::binary(name.clone()),
            PortDecl::Sized { name, cardinality } => PortSpec::new(name.clone(), *cardinality),
        }
    }
}

/// An elementary name (`const0`, `id`, `not`, `const1`) or a table of joint
/// output indices, one per joint input.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionDecl {
    Named(String),
    Table(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightDecl {
    pub function: FunctionDecl,
    pub p: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDecl {
    pub name: String,
    pub inputs: Vec<PortDecl>,
    pub outputs: Vec<PortDecl>,
    pub function: Option<FunctionDecl>,
    pub distribution: Option<Vec<WeightDecl>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDecl {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementDecl {
    pub port: String,
    pub t: Value,
    pub x: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDecl {
    pub inputs: Vec<PortDecl>,
    pub outputs: Vec<PortDecl>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Preset {
    Bell {
        angles_a: Vec<String>,
        angles_b: Option<Vec<String>>,
    },
    SimplifiedBell {
        angles: Option<Vec<String>>,
        theta1: Option<String>,
        theta2: Option<String>,
        epsilon: Option<Value>,
        link: Option<String>,
    },
    DoubleBell {
        angles: Option<Vec<String>>,
        theta1: Option<String>,
        theta2: Option<String>,
        epsilon: Option<Value>,
        link_a: Option<String>,
        link_b: Option<String>,
    },
}

/// A system after resolving its function or distribution.
pub struct System {
    pub name: String,
    pub distribution: TransferDistribution,
}

pub fn load(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Exact rational from a JSON string; bare numbers need a tolerance.
pub fn rational(value: &Value, tolerance: Option<f64>) -> Result<Q, Failure> {
    match value {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(Q::from_integer(i.into()));
            }
            let tol = tolerance.ok_or_else(|| {
                Failure(format!(
                    "floating-point value {n} needs --tolerance; write it as a \"p/q\" string instead"
                ))
            })?;
            Ok(simplest_within(n.as_f64().unwrap_or(f64::NAN), tol)?)
        }
        other => Err(Failure(format!("expected a rational, found {other}"))),
    }
}

pub fn angle(text: &str) -> Result<Angle, Failure> {
    Ok(Angle::parse(text)?)
}

pub fn angles(list: &[String]) -> Result<Vec<Angle>, Failure> {
    list.iter().map(|s| angle(s)).collect()
}

fn layout(inputs: &[PortDecl], outputs: &[PortDecl]) -> Result<Arc<PortLayout>, Failure> {
    Ok(Arc::new(PortLayout::new(
        inputs.iter().map(PortDecl::spec).collect(),
        outputs.iter().map(PortDecl::spec).collect(),
    )?))
}

/// Resolves a function spec. Elementary names need one binary input and one
/// binary output.
pub fn function(
    decl: &FunctionDecl,
    layout: &Arc<PortLayout>,
) -> Result<TransferFunction, Failure> {
    match decl {
        FunctionDecl::Table(table) => Ok(TransferFunction::new(layout.clone(), table.clone())?),
        FunctionDecl::Named(name) => {
            let e = Elementary::over(layout.clone())?;
            match name.to_ascii_lowercase().as_str() {
                "const0" | "f0" => Ok(e.const0),
                "id" | "identity" => Ok(e.identity),
                "not" => Ok(e.not),
                "const1" => Ok(e.const1),
                _ => Err(Failure(format!(
                    "unknown function `{name}`; use const0, id, not, const1 or an output table"
                ))),
            }
        }
    }
}

/// `id`, `not`, or a comma-separated output table such as `1,0`.
pub fn function_arg(text: &str, layout: &Arc<PortLayout>) -> Result<TransferFunction, Failure> {
    let decl = if text.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        let table = text
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure(format!("bad function table `{text}`")))?;
        FunctionDecl::Table(table)
    } else {
        FunctionDecl::Named(text.to_string())
    };
    function(&decl, layout)
}

pub fn systems(file: &ScenarioFile, tolerance: Option<f64>) -> Result<Vec<System>, Failure> {
    let mut seen: BTreeMap<String, String> = BTreeMap::new();
    let mut out = Vec::new();
    for s in &file.systems {
        for port in s.inputs.iter().chain(&s.outputs) {
            let name = port.spec().name;
            if let Some(owner) = seen.insert(name.clone(), s.name.clone()) {
                return Err(Failure(format!(
                    "port `{name}` is declared by both `{owner}` and `{}`",
                    s.name
                )));
            }
        }
        let layout = layout(&s.inputs, &s.outputs)?;
        let distribution = match (&s.function, &s.distribution) {
            (Some(f), None) => TransferDistribution::point(&function(f, &layout)?),
            (None, Some(weights)) => {
                let mut pairs = Vec::with_capacity(weights.len());
                for w in weights {
                    pairs.push((function(&w.function, &layout)?, rational(&w.p, tolerance)?));
                }
                TransferDistribution::new(layout, pairs)?
            }
            _ => {
                return Err(Failure(format!(
                    "system `{}` needs exactly one of `function` or `distribution`",
                    s.name
                )))
            }
        };
        out.push(System {
            name: s.name.clone(),
            distribution,
        });
    }
    Ok(out)
}

pub fn links(file: &ScenarioFile) -> Vec<Link> {
    file.wiring
        .iter()
        .map(|l| Link::new(l.from.clone(), l.to.clone()))
        .collect()
}

pub fn placements(
    file: &ScenarioFile,
    tolerance: Option<f64>,
) -> Result<Vec<PortPlacement>, Failure> {
    file.placements
        .iter()
        .map(|p| {
            Ok(PortPlacement::new(
                p.port.clone(),
                Event::new(rational(&p.t, tolerance)?, rational(&p.x, tolerance)?),
            ))
        })
        .collect()
}

pub fn transition_table(
    decl: &TableDecl,
    tolerance: Option<f64>,
) -> Result<TransitionTable, Failure> {
    let layout = layout(&decl.inputs, &decl.outputs)?;
    let rows = decl
        .rows
        .iter()
        .map(|row| row.iter().map(|v| rational(v, tolerance)).collect())
        .collect::<Result<Vec<Vec<Q>>, Failure>>()?;
    Ok(TransitionTable::new(layout, rows)?)
}

/// `A1,A2:B1,B2`.
pub fn partition(text: &str) -> Result<Partition, Failure> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| Failure(format!("partition `{text}` must look like A1,A2:B1,B2")))?;
    let side = |s: &str| -> Vec<String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect()
    };
    Ok(Partition::new(side(a), side(b)))
}
