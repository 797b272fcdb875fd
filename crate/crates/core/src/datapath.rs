//! Lowering of Π groups to serial multiply/divide schedules.
//!
//! Each Π product gets its own unit (one multiplier, one divider, one
//! accumulator). All units start together and the design finishes when the
//! slowest one does; inside a unit the steps run strictly one after another.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::fixedpoint::{encode, FxError, FxValue, QFormat};
use crate::pi::{PiBasis, PiGroup, SignalColumn, SignalKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatapathError {
    #[error("design has no dimensionless products")]
    EmptyBasis,
    #[error("constant `{name}` = {value} cannot be folded into {format}")]
    ConstantNotRepresentable { name: String, value: f64, format: QFormat },
    #[error("invalid latency model: {0}")]
    InvalidLatency(String),
    #[error("unknown constant policy `{0}` (expected fold or port)")]
    UnknownPolicy(String),
    #[error(transparent)]
    Fixed(#[from] FxError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Mul,
    Div,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Mul => "MUL",
            OpKind::Div => "DIV",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    /// A run-time input port.
    Signal(String),
    /// A constant folded into the design.
    Literal { name: String, value: FxValue },
}

impl Operand {
    pub fn name(&self) -> &str {
        match self {
            Operand::Signal(name) | Operand::Literal { name, .. } => name,
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Signal(name) => f.write_str(name),
            Operand::Literal { name, value } => write!(f, "{name}={value}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpStep {
    pub op: OpKind,
    pub operand: Operand,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    One,
    Operand(Operand),
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::One => f.write_str("1.0"),
            Init::Operand(op) => write!(f, "{op}"),
        }
    }
}

/// Serial evaluation of one Π: load `init`, then apply `steps` in order.
#[derive(Debug, Clone, PartialEq)]
pub struct OpSequence {
    /// 0-based Π index.
    pub pi_index: usize,
    pub init: Init,
    pub steps: Vec<OpStep>,
}

impl OpSequence {
    pub fn count(&self, op: OpKind) -> usize {
        self.steps.iter().filter(|s| s.op == op).count()
    }

    pub fn cycles(&self, latency: &LatencyModel) -> u64 {
        self.steps.iter().map(|s| latency.cost(s.op) as u64).sum()
    }
}

impl fmt::Display for OpSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "acc = {}", self.init)?;
        for s in &self.steps {
            write!(f, "; {} {}", s.op, s.operand)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantPolicy {
    /// Nonzero constants become literals inside the design.
    Fold,
    /// Constants are run-time inputs like any sensor signal.
    #[default]
    Port,
}

impl FromStr for ConstantPolicy {
    type Err = DatapathError;

    fn from_str(s: &str) -> Result<Self, DatapathError> {
        match s {
            "fold" => Ok(ConstantPolicy::Fold),
            "port" => Ok(ConstantPolicy::Port),
            other => Err(DatapathError::UnknownPolicy(other.to_string())),
        }
    }
}

impl fmt::Display for ConstantPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstantPolicy::Fold => "fold",
            ConstantPolicy::Port => "port",
        })
    }
}

/// Cycle costs of the functional units and the fixed start/done overhead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatencyModel {
    pub mul_cycles: u32,
    pub div_cycles: u32,
    pub overhead_cycles: u32,
}

impl LatencyModel {
    /// Registered array multiplier (2), restoring divider (W + 2), and three
    /// cycles of load / output latch / done.
    pub fn for_format(format: QFormat) -> Self {
        LatencyModel { mul_cycles: 2, div_cycles: format.width() + 2, overhead_cycles: 3 }
    }

    pub fn new(mul_cycles: u32, div_cycles: u32, overhead_cycles: u32) -> Result<Self, DatapathError> {
        if mul_cycles == 0 || div_cycles == 0 {
            return Err(DatapathError::InvalidLatency("unit latencies must be at least 1".into()));
        }
        Ok(LatencyModel { mul_cycles, div_cycles, overhead_cycles })
    }

    pub fn cost(&self, op: OpKind) -> u32 {
        match op {
            OpKind::Mul => self.mul_cycles,
            OpKind::Div => self.div_cycles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Port {
    pub name: String,
    /// SI value when the port carries a constant.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldedConstant {
    pub name: String,
    pub value: f64,
    pub fixed: FxValue,
}

/// A fully scheduled design, shared by the RTL emitter and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct RtlDesign {
    pub name: String,
    pub format: QFormat,
    pub constant_policy: ConstantPolicy,
    /// Run-time inputs in canonical column order.
    pub ports: Vec<Port>,
    pub sequences: Vec<OpSequence>,
    pub latency: LatencyModel,
    pub groups: Vec<PiGroup>,
    pub target: String,
    /// 0-based index of the Π that carries the target.
    pub target_pi: usize,
    pub folded: Vec<FoldedConstant>,
    /// Signals with a zero exponent in every group; they get no port.
    pub omitted: Vec<String>,
}

impl RtlDesign {
    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn has_div(&self) -> bool {
        self.sequences.iter().any(|s| s.count(OpKind::Div) > 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub format: QFormat,
    pub constants: ConstantPolicy,
    pub latency: LatencyModel,
}

impl Default for DesignOptions {
    fn default() -> Self {
        let format = QFormat::DEFAULT;
        DesignOptions {
            format,
            constants: ConstantPolicy::Port,
            latency: LatencyModel::for_format(format),
        }
    }
}

impl DesignOptions {
    pub fn with_format(format: QFormat) -> Self {
        DesignOptions { format, latency: LatencyModel::for_format(format), ..Default::default() }
    }
}

/// Lowers one group. Factors are visited in canonical column order: the first
/// positive power seeds the accumulator (or 1.0 if none), the remaining
/// positive powers become MULs, then every negative power a DIV.
pub fn schedule(
    group: &PiGroup,
    pi_index: usize,
    literals: &BTreeMap<String, FxValue>,
) -> OpSequence {
    let operand = |name: &str| match literals.get(name) {
        Some(&value) => Operand::Literal { name: name.to_string(), value },
        None => Operand::Signal(name.to_string()),
    };
    let mut init = Init::One;
    let mut steps = Vec::new();
    for f in group.factors.iter().filter(|f| f.exponent > 0) {
        for _ in 0..f.exponent {
            if init == Init::One {
                init = Init::Operand(operand(&f.signal));
            } else {
                steps.push(OpStep { op: OpKind::Mul, operand: operand(&f.signal) });
            }
        }
    }
    for f in group.factors.iter().filter(|f| f.exponent < 0) {
        for _ in 0..f.exponent.unsigned_abs() {
            steps.push(OpStep { op: OpKind::Div, operand: operand(&f.signal) });
        }
    }
    OpSequence { pi_index, init, steps }
}

fn fold_constant(col: &SignalColumn, format: QFormat) -> Result<Option<FoldedConstant>, DatapathError> {
    let SignalKind::Constant { value } = col.kind else {
        return Ok(None);
    };
    if value == 0.0 {
        return Ok(None);
    }
    let fixed = encode(value, format).map_err(|_| DatapathError::ConstantNotRepresentable {
        name: col.name.clone(),
        value,
        format,
    })?;
    // A constant that quantizes to zero stays a port, like an exact zero.
    if fixed.raw() == 0 {
        return Ok(None);
    }
    Ok(Some(FoldedConstant { name: col.name.clone(), value, fixed }))
}

pub fn build_design(
    basis: &PiBasis,
    name: &str,
    options: &DesignOptions,
) -> Result<RtlDesign, DatapathError> {
    if basis.groups.is_empty() {
        return Err(DatapathError::EmptyBasis);
    }
    let omitted: Vec<String> = basis.unused_signals().iter().map(|c| c.name.clone()).collect();
    let mut folded = Vec::new();
    if options.constants == ConstantPolicy::Fold {
        for col in basis.columns.iter().filter(|c| !omitted.contains(&c.name)) {
            if let Some(f) = fold_constant(col, options.format)? {
                folded.push(f);
            }
        }
    }
    let literals: BTreeMap<String, FxValue> =
        folded.iter().map(|f| (f.name.clone(), f.fixed)).collect();

    let ports = basis
        .columns
        .iter()
        .filter(|c| !omitted.contains(&c.name) && !literals.contains_key(&c.name))
        .map(|c| Port {
            name: c.name.clone(),
            constant: match c.kind {
                SignalKind::Constant { value } => Some(value),
                SignalKind::Parameter => None,
            },
        })
        .collect();

    let sequences =
        basis.groups.iter().enumerate().map(|(i, g)| schedule(g, i, &literals)).collect();

    Ok(RtlDesign {
        name: name.to_string(),
        format: options.format,
        constant_policy: options.constants,
        ports,
        sequences,
        latency: options.latency,
        groups: basis.groups.clone(),
        target: basis.target.clone(),
        target_pi: basis.target_group(),
        folded,
        omitted,
    })
}

/// overhead + the longest Π schedule (units run in parallel).
pub fn estimate_latency(d: &RtlDesign) -> u64 {
    let longest = d.sequences.iter().map(|s| s.cycles(&d.latency)).max().unwrap_or(0);
    d.latency.overhead_cycles as u64 + longest
}

/// Coarse gate-equivalent costs used by [`count_resources`].
pub mod cost {
    /// Per bit of a flip-flop.
    pub const REGISTER_BIT: u64 = 6;
    /// Per partial-product cell of a W×W array multiplier (AND + full adder).
    pub const MUL_CELL: u64 = 6;
    /// Per bit of a restoring-divider slice (subtractor, mux, shift bits).
    pub const DIV_SLICE_BIT: u64 = 14;
    /// Per schedule step of a unit controller (state decode, operand mux leg).
    pub const CONTROL_STEP: u64 = 12;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitResources {
    pub pi: usize,
    pub mul_steps: usize,
    pub div_steps: usize,
    pub cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub mul_steps: usize,
    pub div_steps: usize,
    pub pi_units: usize,
    pub multipliers: usize,
    pub dividers: usize,
    pub register_bits: u64,
    pub gate_estimate: u64,
    pub latency_cycles: u64,
    pub units: Vec<UnitResources>,
}

pub fn count_resources(d: &RtlDesign) -> ResourceReport {
    let w = d.format.width() as u64;
    let units: Vec<UnitResources> = d
        .sequences
        .iter()
        .map(|s| UnitResources {
            pi: s.pi_index + 1,
            mul_steps: s.count(OpKind::Mul),
            div_steps: s.count(OpKind::Div),
            cycles: s.cycles(&d.latency),
        })
        .collect();
    let multipliers = units.iter().filter(|u| u.mul_steps > 0).count();
    let dividers = units.iter().filter(|u| u.div_steps > 0).count();
    let register_bits = w * (d.sequences.len() + d.ports.len()) as u64;
    let steps: usize = d.sequences.iter().map(|s| s.steps.len()).sum();
    let gate_estimate = register_bits * cost::REGISTER_BIT
        + multipliers as u64 * w * w * cost::MUL_CELL
        + dividers as u64 * w * cost::DIV_SLICE_BIT
        + steps as u64 * cost::CONTROL_STEP;
    ResourceReport {
        mul_steps: units.iter().map(|u| u.mul_steps).sum(),
        div_steps: units.iter().map(|u| u.div_steps).sum(),
        pi_units: units.len(),
        multipliers,
        dividers,
        register_bits,
        gate_estimate,
        latency_cycles: estimate_latency(d),
        units,
    }
}

impl ResourceReport {
    /// Line-oriented key-value form.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("mul_steps={}\n", self.mul_steps));
        out.push_str(&format!("div_steps={}\n", self.div_steps));
        out.push_str(&format!("pi_units={}\n", self.pi_units));
        out.push_str(&format!("multipliers={}\n", self.multipliers));
        out.push_str(&format!("dividers={}\n", self.dividers));
        out.push_str(&format!("register_bits={}\n", self.register_bits));
        out.push_str(&format!("gate_estimate={}\n", self.gate_estimate));
        out.push_str(&format!("latency_cycles={}\n", self.latency_cycles));
        for u in &self.units {
            out.push_str(&format!(
                "pi_{}=mul:{},div:{},cycles:{}\n",
                u.pi, u.mul_steps, u.div_steps, u.cycles
            ));
        }
        out
    }
}
