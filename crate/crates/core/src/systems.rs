//! Deterministic systems: ports, transfer functions, counting, composition
//! and loop closure.
//!
//! Joint values of several ports are encoded mixed-radix with the first
//! listed port most significant. Transfer functions of a layout are ordered
//! lexicographically by their output tuple (the output for joint input 0
//! first), so the elementary binary functions come out as
//! `const0, Id, NOT, const1`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Default limit on the number of transfer functions a layout may enumerate.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Environment variable that overrides [`DEFAULT_ENUMERATION_CAP`].
pub const CAP_ENV_VAR: &str = "CAUSAL_TRANSFER_CAP";

/// Upper bound on how many transfer functions (or variables) may be
/// materialized. Exceeding it is always an error, never a truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap(pub u64);

impl Default for EnumerationCap {
    fn default() -> Self {
        Self(DEFAULT_ENUMERATION_CAP)
    }
}

impl EnumerationCap {
    /// Reads [`CAP_ENV_VAR`], falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(CAP_ENV_VAR) {
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .map(Self)
                .map_err(|_| Error::Parse(format!("{CAP_ENV_VAR}=`{v}` is not a count"))),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn check(&self, what: &'static str, count: &BigUint) -> Result<usize> {
        match count.to_u64() {
            Some(n) if n <= self.0 => Ok(n as usize),
            _ => Err(Error::CapExceeded {
                what,
                count: count.to_string(),
                cap: self.0,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortSpec {
    pub name: String,
    pub cardinality: usize,
}

impl PortSpec {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Self {
        Self {
            name: name.into(),
            cardinality,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, 2)
    }

    pub fn is_binary(&self) -> bool {
        self.cardinality == 2
    }
}

/// Ordered input and output ports of a system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortLayout {
    inputs: Vec<PortSpec>,
    outputs: Vec<PortSpec>,
}

impl PortLayout {
    pub fn new(inputs: Vec<PortSpec>, outputs: Vec<PortSpec>) -> Result<Self> {
        if inputs.is_empty() || outputs.is_empty() {
            return Err(Error::InvalidLayout(
                "a layout needs at least one input and one output port".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for port in inputs.iter().chain(&outputs) {
            if port.cardinality == 0 {
                return Err(Error::InvalidLayout(format!(
                    "port `{}` has cardinality 0",
                    port.name
                )));
            }
            if !seen.insert(port.name.as_str()) {
                return Err(Error::DuplicatePort(port.name.clone()));
            }
        }
        Ok(Self { inputs, outputs })
    }

    /// Single binary input `i` and single binary output `j`.
    pub fn elementary_binary() -> Self {
        Self::single(2, 2)
    }

    /// One input port `i` with `n_in` values, one output port `j` with `n_out`.
    pub fn single(n_in: usize, n_out: usize) -> Self {
        Self::new(
            vec![PortSpec::new("i", n_in)],
            vec![PortSpec::new("j", n_out)],
        )
        .expect("single-port layout with positive cardinalities")
    }

    pub fn inputs(&self) -> &[PortSpec] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[PortSpec] {
        &self.outputs
    }

    /// N(i): number of joint input values.
    pub fn input_count(&self) -> usize {
        self.inputs.iter().map(|p| p.cardinality).product()
    }

    /// N(j): number of joint output values.
    pub fn output_count(&self) -> usize {
        self.outputs.iter().map(|p| p.cardinality).product()
    }

    pub fn input_radices(&self) -> Vec<usize> {
        self.inputs.iter().map(|p| p.cardinality).collect()
    }

    pub fn output_radices(&self) -> Vec<usize> {
        self.outputs.iter().map(|p| p.cardinality).collect()
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|p| p.name == name)
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|p| p.name == name)
    }

    pub fn port_names(&self) -> impl Iterator<Item = &str> {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .map(|p| p.name.as_str())
    }

    /// Layout with the inputs of `self` and the outputs of `other`.
    pub fn with_outputs_of(&self, other: &PortLayout) -> Result<PortLayout> {
        PortLayout::new(self.inputs.clone(), other.outputs.clone()).or_else(|_| {
            // Name clashes between the two sides are resolved by renaming
            // the outputs; composition only cares about cardinalities.
            let outputs = other
                .outputs
                .iter()
                .map(|p| PortSpec::new(format!("{}'", p.name), p.cardinality))
                .collect();
            PortLayout::new(self.inputs.clone(), outputs)
        })
    }

    /// `true` when the output side of `self` has the same port types
    /// (cardinalities, in order) as the input side of `next`.
    pub fn feeds(&self, next: &PortLayout) -> bool {
        self.output_radices() == next.input_radices()
    }

    pub fn describe_inputs(&self) -> String {
        describe_ports(&self.inputs)
    }

    pub fn describe_outputs(&self) -> String {
        describe_ports(&self.outputs)
    }
}

fn describe_ports(ports: &[PortSpec]) -> String {
    let parts: Vec<String> = ports
        .iter()
        .map(|p| format!("{}:{}", p.name, p.cardinality))
        .collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for PortLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {}",
            self.describe_inputs(),
            self.describe_outputs()
        )
    }
}

/// Mixed-radix encoding, first digit most significant.
pub fn encode_mixed(digits: &[usize], radices: &[usize]) -> usize {
    debug_assert_eq!(digits.len(), radices.len());
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| {
        debug_assert!(d < r);
        acc * r + d
    })
}

pub fn decode_mixed(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, &r) in digits.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

/// N(i)·N(j): the number of possible transitions `i -> j`.
pub fn count_transitions(layout: &PortLayout) -> BigUint {
    BigUint::from(layout.input_count()) * BigUint::from(layout.output_count())
}

/// N(j)^N(i), without any cap.
pub fn transfer_function_count(layout: &PortLayout) -> BigUint {
    num_traits::pow(BigUint::from(layout.output_count()), layout.input_count())
}

/// N(j)^N(i), failing when the count exceeds `cap`.
pub fn count_transfer_functions(layout: &PortLayout, cap: EnumerationCap) -> Result<u64> {
    cap.check("transfer function", &transfer_function_count(layout))
        .map(|n| n as u64)
}

/// A total map from joint input index to joint output index.
#[derive(Debug, Clone)]
pub struct TransferFunction {
    layout: Arc<PortLayout>,
    table: Vec<usize>,
}

impl TransferFunction {
    pub fn new(layout: impl Into<Arc<PortLayout>>, table: Vec<usize>) -> Result<Self> {
        let layout = layout.into();
        if table.len() != layout.input_count() {
            return Err(Error::InvalidFunction(format!(
                "table has {} entries, layout needs {}",
                table.len(),
                layout.input_count()
            )));
        }
        let n_out = layout.output_count();
        if let Some(bad) = table.iter().find(|&&j| j >= n_out) {
            return Err(Error::InvalidFunction(format!(
                "output index {bad} out of range 0..{n_out}"
            )));
        }
        Ok(Self { layout, table })
    }

    /// Builds a function from a closure over joint input indices.
    pub fn from_fn(layout: impl Into<Arc<PortLayout>>, f: impl Fn(usize) -> usize) -> Result<Self> {
        let layout = layout.into();
        let table = (0..layout.input_count()).map(f).collect();
        Self::new(layout, table)
    }

    /// Builds a function from a closure over per-port input digits returning
    /// per-port output digits.
    pub fn from_ports(
        layout: impl Into<Arc<PortLayout>>,
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let layout = layout.into();
        let in_r = layout.input_radices();
        let out_r = layout.output_radices();
        let mut table = Vec::with_capacity(layout.input_count());
        for i in 0..layout.input_count() {
            let out = f(&decode_mixed(i, &in_r));
            if out.len() != out_r.len() || out.iter().zip(&out_r).any(|(d, r)| d >= r) {
                return Err(Error::InvalidFunction(format!(
                    "output digits {out:?} do not fit {}",
                    layout.describe_outputs()
                )));
            }
            table.push(encode_mixed(&out, &out_r));
        }
        Self::new(layout, table)
    }

    pub fn identity(layout: impl Into<Arc<PortLayout>>) -> Result<Self> {
        let layout = layout.into();
        if layout.input_radices() != layout.output_radices() {
            return Err(Error::LayoutMismatch {
                expected: layout.describe_inputs(),
                found: layout.describe_outputs(),
            });
        }
        Self::from_fn(layout, |i| i)
    }

    pub fn constant(layout: impl Into<Arc<PortLayout>>, output: usize) -> Result<Self> {
        Self::from_fn(layout, |_| output)
    }

    pub fn layout(&self) -> &PortLayout {
        &self.layout
    }

    pub fn shared_layout(&self) -> &Arc<PortLayout> {
        &self.layout
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, input: usize) -> usize {
        self.table[input]
    }

    pub fn apply_ports(&self, input: &[usize]) -> Vec<usize> {
        let i = encode_mixed(input, &self.layout.input_radices());
        decode_mixed(self.table[i], &self.layout.output_radices())
    }

    /// Position in the canonical (lexicographic) enumeration order.
    pub fn canonical_index(&self) -> BigUint {
        let base = BigUint::from(self.layout.output_count());
        self.table.iter().fold(BigUint::from(0u32), |acc, &j| {
            acc * &base + BigUint::from(j)
        })
    }

    /// Name of an elementary binary function: `const0`, `const1`, `Id` or `NOT`.
    pub fn elementary_name(&self) -> Option<&'static str> {
        if self.layout.input_count() != 2 || self.layout.output_count() != 2 {
            return None;
        }
        Some(match self.table.as_slice() {
            [0, 0] => "const0",
            [1, 1] => "const1",
            [0, 1] => "Id",
            [1, 0] => "NOT",
            _ => unreachable!("binary table"),
        })
    }

    /// The set `{i : F(i) = i}`; requires matching input/output port types.
    pub fn fixed_points(&self) -> Result<Vec<usize>> {
        if self.layout.input_radices() != self.layout.output_radices() {
            return Err(Error::LayoutMismatch {
                expected: self.layout.describe_inputs(),
                found: self.layout.describe_outputs(),
            });
        }
        Ok((0..self.table.len())
            .filter(|&i| self.table[i] == i)
            .collect())
    }

    /// Returns a copy over `layout`, which must have the same port types.
    pub fn relabel(&self, layout: impl Into<Arc<PortLayout>>) -> Result<Self> {
        let layout = layout.into();
        if layout.input_radices() != self.layout.input_radices()
            || layout.output_radices() != self.layout.output_radices()
        {
            return Err(Error::LayoutMismatch {
                expected: self.layout.to_string(),
                found: layout.to_string(),
            });
        }
        Ok(Self {
            layout,
            table: self.table.clone(),
        })
    }
}

impl PartialEq for TransferFunction {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table && *self.layout == *other.layout
    }
}

impl Eq for TransferFunction {}

impl std::hash::Hash for TransferFunction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.layout.hash(state);
        self.table.hash(state);
    }
}

impl PartialOrd for TransferFunction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TransferFunction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.layout
            .cmp(&other.layout)
            .then_with(|| self.table.cmp(&other.table))
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = self.elementary_name() {
            return f.write_str(name);
        }
        let parts: Vec<String> = self.table.iter().map(|j| j.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// All N(j)^N(i) transfer functions of `layout` in canonical order.
pub fn enumerate_transfer_functions(
    layout: &PortLayout,
    cap: EnumerationCap,
) -> Result<Vec<TransferFunction>> {
    let total = cap.check("transfer function", &transfer_function_count(layout))?;
    let shared = Arc::new(layout.clone());
    let n_in = layout.input_count();
    let n_out = layout.output_count();
    let mut out = Vec::with_capacity(total);
    let mut table = vec![0usize; n_in];
    loop {
        out.push(TransferFunction {
            layout: Arc::clone(&shared),
            table: table.clone(),
        });
        // Odometer increment, last input least significant.
        let mut k = n_in;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            table[k] += 1;
            if table[k] < n_out {
                break;
            }
            table[k] = 0;
        }
    }
}

/// `second ∘ first`: the output of `first` feeds the input of `second`.
pub fn compose_series(
    first: &TransferFunction,
    second: &TransferFunction,
) -> Result<TransferFunction> {
    if !first.layout.feeds(&second.layout) {
        return Err(Error::LayoutMismatch {
            expected: first.layout.describe_outputs(),
            found: second.layout.describe_inputs(),
        });
    }
    let layout = if Arc::ptr_eq(&first.layout, &second.layout) {
        Arc::clone(&first.layout)
    } else {
        Arc::new(first.layout.with_outputs_of(&second.layout)?)
    };
    let table = first.table.iter().map(|&j| second.table[j]).collect();
    Ok(TransferFunction { layout, table })
}

/// Closes a chain into a loop: `F_loop = F^N ∘ … ∘ F^2 ∘ F^1`.
///
/// Consecutive functions must be composable and the last output must have
/// the port types of the first input.
pub fn close_loop(chain: &[TransferFunction]) -> Result<TransferFunction> {
    let (first, rest) = chain
        .split_first()
        .ok_or_else(|| Error::InvalidFunction("empty loop chain".into()))?;
    let last = chain.last().expect("non-empty");
    if !last.layout.feeds(&first.layout) {
        return Err(Error::LayoutMismatch {
            expected: first.layout.describe_inputs(),
            found: last.layout.describe_outputs(),
        });
    }
    let mut acc = first.clone();
    for f in rest {
        acc = compose_series(&acc, f)?;
    }
    // Present the loop function over the first system's input ports.
    let layout = PortLayout::new(
        first.layout.inputs.clone(),
        first
            .layout
            .inputs
            .iter()
            .map(|p| PortSpec::new(format!("{}'", p.name), p.cardinality))
            .collect(),
    )?;
    acc.relabel(layout)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoopStatus {
    /// At least one joint input reproduces itself; these are the allowed inputs.
    Allowed { fixed_points: Vec<usize> },
    /// No input is a fixed point: the loop always contradicts itself.
    Forbidden,
}

impl LoopStatus {
    pub fn is_forbidden(&self) -> bool {
        matches!(self, LoopStatus::Forbidden)
    }
}

/// The deterministic loop constraint.
pub fn loop_status(loop_function: &TransferFunction) -> Result<LoopStatus> {
    let fixed_points = loop_function.fixed_points()?;
    Ok(if fixed_points.is_empty() {
        LoopStatus::Forbidden
    } else {
        LoopStatus::Allowed { fixed_points }
    })
}

/// A named deterministic system.
///
/// A system built by [`combine_parallel`] remembers its independent blocks:
/// its transfer functions are restricted to blockwise products, which is
/// what the counting methods report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicSystem {
    pub id: String,
    function: TransferFunction,
    blocks: Vec<Arc<PortLayout>>,
}

impl DeterministicSystem {
    pub fn new(id: impl Into<String>, function: TransferFunction) -> Self {
        let blocks = vec![Arc::clone(function.shared_layout())];
        Self {
            id: id.into(),
            function,
            blocks,
        }
    }

    pub fn layout(&self) -> &PortLayout {
        self.function.layout()
    }

    pub fn function(&self) -> &TransferFunction {
        &self.function
    }

    /// Independent sub-layouts with no signals between them.
    pub fn blocks(&self) -> &[Arc<PortLayout>] {
        &self.blocks
    }

    /// `N(i→j)` summed over the independent blocks.
    pub fn transition_count(&self) -> BigUint {
        self.blocks.iter().map(|b| count_transitions(b)).sum()
    }

    /// `N(F)`: product of the block transfer-function counts.
    pub fn transfer_function_count(&self) -> BigUint {
        self.blocks
            .iter()
            .map(|b| transfer_function_count(b))
            .product()
    }
}

/// Side-by-side combination with no signals between the parts.
///
/// Ports are concatenated (`s1` first); the combined function acts blockwise.
pub fn combine_parallel(
    s1: &DeterministicSystem,
    s2: &DeterministicSystem,
) -> Result<DeterministicSystem> {
    let l1 = s1.layout();
    let l2 = s2.layout();
    let inputs: Vec<PortSpec> = l1.inputs.iter().chain(&l2.inputs).cloned().collect();
    let outputs: Vec<PortSpec> = l1.outputs.iter().chain(&l2.outputs).cloned().collect();
    let layout = Arc::new(PortLayout::new(inputs, outputs)?);
    let n_in2 = l2.input_count();
    let n_out2 = l2.output_count();
    let f1 = s1.function();
    let f2 = s2.function();
    let function = TransferFunction::from_fn(layout, |i| {
        let (i1, i2) = (i / n_in2, i % n_in2);
        f1.apply(i1) * n_out2 + f2.apply(i2)
    })?;
    let blocks = s1.blocks.iter().chain(&s2.blocks).cloned().collect();
    Ok(DeterministicSystem {
        id: format!("{}|{}", s1.id, s2.id),
        function,
        blocks,
    })
}

/// The four elementary binary functions over a shared layout.
#[derive(Debug, Clone)]
pub struct Elementary {
    pub const0: TransferFunction,
    pub const1: TransferFunction,
    pub identity: TransferFunction,
    pub not: TransferFunction,
}

impl Elementary {
    pub fn new() -> Self {
        Self::over(Arc::new(PortLayout::elementary_binary())).expect("binary layout")
    }

    /// The four functions over any layout with one binary input and one
    /// binary output.
    pub fn over(layout: Arc<PortLayout>) -> Result<Self> {
        if layout.input_count() != 2 || layout.output_count() != 2 {
            return Err(Error::InvalidLayout(format!(
                "{layout} is not an elementary binary layout"
            )));
        }
        Ok(Self {
            const0: TransferFunction::new(Arc::clone(&layout), vec![0, 0])?,
            const1: TransferFunction::new(Arc::clone(&layout), vec![1, 1])?,
            identity: TransferFunction::new(Arc::clone(&layout), vec![0, 1])?,
            not: TransferFunction::new(layout, vec![1, 0])?,
        })
    }

    pub fn all(&self) -> [&TransferFunction; 4] {
        [&self.const0, &self.const1, &self.identity, &self.not]
    }

    /// Look up by name (`const0`, `const1`, `Id`/`identity`, `NOT`/`not`).
    pub fn by_name(&self, name: &str) -> Option<&TransferFunction> {
        match name {
            "const0" | "F0" => Some(&self.const0),
            "const1" | "F1" => Some(&self.const1),
            "Id" | "id" | "identity" | "F2" => Some(&self.identity),
            "NOT" | "not" | "F3" => Some(&self.not),
            _ => None,
        }
    }
}

impl Default for Elementary {
    fn default() -> Self {
        Self::new()
    }
}
