//! Bit-accurate execution of a scheduled design.
//!
//! [`simulate`] applies the same fixed-point operations, in the same order, as
//! the emitted hardware, and reports the cycle count the hardware takes.
//! [`run_random`] drives a design with LFSR stimulus and compares every Π
//! against a double-precision evaluation of its monomial.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::datapath::{estimate_latency, Init, OpKind, Operand, RtlDesign};
use crate::fixedpoint::{decode, encode, fx_div, fx_mul, FxError, FxValue, QFormat};
use crate::pi::PiGroup;

/// Relative errors are not reported when |oracle| falls below this.
pub const ORACLE_EPSILON: f64 = 1e-9;

/// Bits of each LFSR word used to place a stimulus value inside its range.
pub const STIMULUS_BITS: u32 = 18;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("LFSR seed must be nonzero")]
    ZeroSeed,
    #[error("vector count must be at least 1")]
    NoVectors,
    #[error("missing input for port `{0}`")]
    MissingPort(String),
    #[error("input `{name}` is in {found}, design uses {expected}")]
    FormatMismatch { name: String, expected: QFormat, found: QFormat },
    #[error("invalid stimulus range [{min}, {max}): {reason}")]
    InvalidRange { min: f64, max: f64, reason: String },
    #[error("oracle input `{0}` missing")]
    MissingOracleInput(String),
    #[error("oracle: `{0}` is zero but has a negative exponent")]
    ZeroToNegativePower(String),
}

/// 32-bit Fibonacci LFSR with taps (32, 22, 2, 1), x^32 + x^22 + x^2 + x + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lfsr32 {
    state: u32,
}

impl Lfsr32 {
    pub fn new(seed: u32) -> Result<Self, SimError> {
        if seed == 0 {
            Err(SimError::ZeroSeed)
        } else {
            Ok(Lfsr32 { state: seed })
        }
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    /// One shift; returns the feedback bit that enters at the top.
    pub fn step(&mut self) -> u32 {
        let s = self.state;
        let bit = (s ^ (s >> 10) ^ (s >> 30) ^ (s >> 31)) & 1;
        self.state = (s >> 1) | (bit << 31);
        bit
    }

    /// 32 shifts; the feedback bits are packed MSB first.
    pub fn next_word(&mut self) -> u32 {
        (0..32).fold(0u32, |w, _| (w << 1) | self.step())
    }
}

/// Stimulus interval [min, max) in real units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StimulusRange {
    pub min: f64,
    pub max: f64,
}

impl Default for StimulusRange {
    fn default() -> Self {
        StimulusRange { min: 0.5, max: 8.0 }
    }
}

impl StimulusRange {
    fn invalid(&self, reason: &str) -> SimError {
        SimError::InvalidRange { min: self.min, max: self.max, reason: reason.to_string() }
    }

    /// Raw bounds (lo, span) in `format`, checked against the design.
    pub fn raw_bounds(&self, format: QFormat, has_div: bool) -> Result<(i64, i64), SimError> {
        if !(self.min < self.max) {
            return Err(self.invalid("min must be below max"));
        }
        if has_div && self.min <= 0.0 {
            return Err(self.invalid("values must be positive when the design divides"));
        }
        let lo = encode(self.min, format).map_err(|_| self.invalid("min not representable"))?;
        let hi = encode(self.max, format).map_err(|_| self.invalid("max not representable"))?;
        if hi.raw() <= lo.raw() {
            return Err(self.invalid("range collapses to a single value in this format"));
        }
        Ok((lo.raw(), hi.raw() - lo.raw()))
    }
}

/// Maps an LFSR word into [lo, lo + span) using its low [`STIMULUS_BITS`] bits.
pub fn scale_word(word: u32, lo: i64, span: i64) -> i64 {
    let offset = (word & ((1 << STIMULUS_BITS) - 1)) as i128;
    lo + ((offset * span as i128) >> STIMULUS_BITS) as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub outputs: Vec<FxValue>,
    /// Per Π: a step overflowed or divided by zero.
    pub unit_errors: Vec<bool>,
    /// Sticky flag: any unit errored.
    pub overflow: bool,
    pub cycles: u64,
    pub oracle: Vec<Option<f64>>,
    /// Absent when the unit was flagged or |oracle| < [`ORACLE_EPSILON`].
    pub rel_error: Vec<Option<f64>>,
}

/// Product of the group's powers in double precision, using repeated
/// multiplication rather than `powi`.
pub fn oracle_eval(g: &PiGroup, inputs: &BTreeMap<String, f64>) -> Result<f64, SimError> {
    let mut num = 1.0f64;
    let mut den = 1.0f64;
    for f in &g.factors {
        let x = *inputs.get(&f.signal).ok_or_else(|| SimError::MissingOracleInput(f.signal.clone()))?;
        if f.exponent < 0 && x == 0.0 {
            return Err(SimError::ZeroToNegativePower(f.signal.clone()));
        }
        for _ in 0..f.exponent.unsigned_abs() {
            if f.exponent > 0 {
                num *= x;
            } else {
                den *= x;
            }
        }
    }
    Ok(num / den)
}

fn operand_value(
    op: &Operand,
    inputs: &BTreeMap<String, FxValue>,
) -> Result<FxValue, SimError> {
    match op {
        Operand::Literal { value, .. } => Ok(*value),
        Operand::Signal(name) => {
            inputs.get(name).copied().ok_or_else(|| SimError::MissingPort(name.clone()))
        }
    }
}

/// Runs every Π schedule on `inputs`. A failing step sets the unit's error
/// flag; the unit then keeps its last valid value for the rest of the run.
pub fn simulate(d: &RtlDesign, inputs: &BTreeMap<String, FxValue>) -> Result<SimResult, SimError> {
    for port in &d.ports {
        let v = inputs.get(&port.name).ok_or_else(|| SimError::MissingPort(port.name.clone()))?;
        if v.format() != d.format {
            return Err(SimError::FormatMismatch {
                name: port.name.clone(),
                expected: d.format,
                found: v.format(),
            });
        }
    }

    let mut outputs = Vec::with_capacity(d.sequences.len());
    let mut unit_errors = Vec::with_capacity(d.sequences.len());
    for seq in &d.sequences {
        let mut acc = match &seq.init {
            Init::One => d.format.from_raw(d.format.one_raw()).expect("1.0 fits every format"),
            Init::Operand(op) => operand_value(op, inputs)?,
        };
        let mut failed = false;
        for step in &seq.steps {
            let operand = operand_value(&step.operand, inputs)?;
            if failed {
                continue;
            }
            let result: Result<FxValue, FxError> = match step.op {
                OpKind::Mul => fx_mul(acc, operand),
                OpKind::Div => fx_div(acc, operand),
            };
            match result {
                Ok(v) => acc = v,
                Err(_) => failed = true,
            }
        }
        outputs.push(acc);
        unit_errors.push(failed);
    }

    let mut real_inputs: BTreeMap<String, f64> =
        d.ports.iter().map(|p| (p.name.clone(), decode(inputs[&p.name]))).collect();
    for f in &d.folded {
        real_inputs.insert(f.name.clone(), f.value);
    }
    let oracle: Vec<Option<f64>> =
        d.groups.iter().map(|g| oracle_eval(g, &real_inputs).ok()).collect();
    // A flagged unit holds a partial value; it counts toward the flag rate,
    // not the error statistics.
    let rel_error = oracle
        .iter()
        .zip(&outputs)
        .zip(&unit_errors)
        .map(|((o, out), &failed)| match o {
            Some(o) if !failed && o.abs() >= ORACLE_EPSILON => {
                Some((decode(*out) - o).abs() / o.abs())
            }
            _ => None,
        })
        .collect();

    Ok(SimResult {
        overflow: unit_errors.iter().any(|&e| e),
        outputs,
        unit_errors,
        cycles: estimate_latency(d),
        oracle,
        rel_error,
    })
}

/// Draws one input vector (one word per port, in port order).
pub fn draw_inputs(
    d: &RtlDesign,
    lfsr: &mut Lfsr32,
    lo: i64,
    span: i64,
) -> BTreeMap<String, FxValue> {
    d.ports
        .iter()
        .map(|p| {
            let raw = scale_word(lfsr.next_word(), lo, span);
            let v = d.format.from_raw(raw).expect("scaled value lies inside the range");
            (p.name.clone(), v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorRun {
    pub inputs: BTreeMap<String, FxValue>,
    pub result: SimResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiErrorStats {
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    /// Vectors that contributed to the statistics.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub vectors: usize,
    pub cycles: u64,
    pub flagged: usize,
    pub per_pi: Vec<PiErrorStats>,
}

impl RunSummary {
    pub fn flag_rate(&self) -> f64 {
        self.flagged as f64 / self.vectors as f64
    }

    pub fn max_rel_error(&self) -> f64 {
        self.per_pi.iter().map(|s| s.max_rel_error).fold(0.0, f64::max)
    }

    pub fn mean_rel_error(&self) -> f64 {
        let (sum, n) = self
            .per_pi
            .iter()
            .fold((0.0, 0usize), |(s, n), p| (s + p.mean_rel_error * p.samples as f64, n + p.samples));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Samples per second at `clock_hz`.
    pub fn throughput(&self, clock_hz: f64) -> f64 {
        clock_hz / self.cycles as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomRun {
    pub runs: Vec<VectorRun>,
    pub summary: RunSummary,
}

/// Simulates `n` LFSR-drawn vectors. Deterministic in (design, n, seed, range).
pub fn run_random(
    d: &RtlDesign,
    n: usize,
    seed: u32,
    range: StimulusRange,
) -> Result<RandomRun, SimError> {
    if n == 0 {
        return Err(SimError::NoVectors);
    }
    let mut lfsr = Lfsr32::new(seed)?;
    let (lo, span) = range.raw_bounds(d.format, d.has_div())?;

    let mut runs = Vec::with_capacity(n);
    for _ in 0..n {
        let inputs = draw_inputs(d, &mut lfsr, lo, span);
        let result = simulate(d, &inputs)?;
        runs.push(VectorRun { inputs, result });
    }

    let per_pi = (0..d.sequences.len())
        .map(|i| {
            let errs: Vec<f64> = runs.iter().filter_map(|r| r.result.rel_error[i]).collect();
            PiErrorStats {
                max_rel_error: errs.iter().copied().fold(0.0, f64::max),
                mean_rel_error: if errs.is_empty() {
                    0.0
                } else {
                    errs.iter().sum::<f64>() / errs.len() as f64
                },
                samples: errs.len(),
            }
        })
        .collect();
    let summary = RunSummary {
        vectors: n,
        cycles: estimate_latency(d),
        flagged: runs.iter().filter(|r| r.result.overflow).count(),
        per_pi,
    };
    Ok(RandomRun { runs, summary })
}

/// Trace CSV: one row per vector with raw and decoded inputs and outputs,
/// oracle values, relative errors, the overflow flag and the cycle count.
pub fn trace_csv(d: &RtlDesign, run: &RandomRun) -> String {
    let mut out = String::from("vector");
    for p in &d.ports {
        let _ = write!(out, ",{0}_raw,{0}", p.name);
    }
    for i in 1..=d.sequences.len() {
        let _ = write!(out, ",pi_{i}_raw,pi_{i},pi_{i}_oracle,pi_{i}_rel_error");
    }
    out.push_str(",ovf,cycles\n");

    for (row, r) in run.runs.iter().enumerate() {
        let _ = write!(out, "{row}");
        for p in &d.ports {
            let v = r.inputs[&p.name];
            let _ = write!(out, ",{},{}", v.raw(), decode(v));
        }
        let res = &r.result;
        for i in 0..d.sequences.len() {
            let o = res.outputs[i];
            let oracle = res.oracle[i].map(|x| x.to_string()).unwrap_or_default();
            let err = res.rel_error[i].map(|x| x.to_string()).unwrap_or_default();
            let _ = write!(out, ",{},{},{},{}", o.raw(), decode(o), oracle, err);
        }
        let _ = writeln!(out, ",{},{}", u8::from(res.overflow), res.cycles);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datapath::{build_design, DesignOptions};
    use crate::dsl::{parse_spec, NoIncludes};
    use crate::pi::{synthesize_pi, PiFactor};

    const PENDULUM: &str = r#"include "NewtonBaseSignals.nt"
Pendulum : invariant(t: time, l: distance, m: mass) =
{
	t ~ {l, m, kNewtonUnithave_AccelerationDueToGravity}
}
"#;

    const GLIDER: &str = r#"include "NewtonBaseSignals.nt"
v0 : constant = 0 (meter*second**-1);
UAVglider : invariant(h: distance, v: speed, m: mass) =
{
	h ~ {v, m, v0, kNewtonUnithave_AccelerationDueToGravity}
}
"#;

    const G: &str = "kNewtonUnithave_AccelerationDueToGravity";

    fn design(text: &str, target: &str) -> RtlDesign {
        let basis = synthesize_pi(&parse_spec(text, &NoIncludes).unwrap(), None, target).unwrap();
        build_design(&basis, "d", &DesignOptions::default()).unwrap()
    }

    fn inputs(d: &RtlDesign, values: &[(&str, f64)]) -> BTreeMap<String, FxValue> {
        values.iter().map(|&(n, x)| (n.to_string(), encode(x, d.format).unwrap())).collect()
    }

    #[test]
    fn lfsr_rejects_zero_seed() {
        assert_eq!(Lfsr32::new(0), Err(SimError::ZeroSeed));
    }

    #[test]
    fn lfsr_no_repeat_in_first_million_states() {
        let mut l = Lfsr32::new(1).unwrap();
        let mut seen = std::collections::HashSet::with_capacity(1 << 20);
        for _ in 0..1_000_000 {
            assert!(seen.insert(l.state()));
            l.step();
            assert_ne!(l.state(), 0);
        }
    }

    #[test]
    fn pendulum_vector() {
        let d = design(PENDULUM, "t");
        let r = simulate(&d, &inputs(&d, &[("t", 2.0), ("l", 1.0), (G, 9.80665)])).unwrap();
        // t=65536, g=round(9.80665·2^15)=321344: ((65536·65536)>>15 · 321344)>>15, then /1.0.
        assert_eq!(r.outputs[0].raw(), 1_285_376);
        assert!(!r.overflow);
        assert_eq!(r.cycles, 41);
        let oracle = r.oracle[0].unwrap();
        assert!((oracle - 4.0 * decode(encode(9.80665, d.format).unwrap())).abs() < 1e-12);
        assert!((decode(r.outputs[0]) - 39.2266).abs() < 4.0 * d.format.resolution());
    }

    #[test]
    fn self_division_is_exact() {
        let d = design(GLIDER, "h");
        let r = simulate(&d, &inputs(&d, &[("h", 3.0), ("v", 2.75), ("v0", 2.75), (G, 9.80665)]))
            .unwrap();
        assert_eq!(r.outputs[0], encode(1.0, d.format).unwrap());
        assert_eq!(r.cycles, 73);
    }

    #[test]
    fn zero_divisor_is_flagged() {
        let d = design(GLIDER, "h");
        let r = simulate(&d, &inputs(&d, &[("h", 3.0), ("v", 2.0), ("v0", 0.0), (G, 9.80665)]))
            .unwrap();
        assert!(r.overflow);
        assert_eq!(r.unit_errors, vec![true, false]);
        // Last valid partial value: the initial v.
        assert_eq!(r.outputs[0], encode(2.0, d.format).unwrap());
        assert_eq!(r.oracle[0], None);
        assert_eq!(r.rel_error[0], None);
        assert_eq!(r.cycles, 73);
    }

    #[test]
    fn overflow_freezes_the_unit() {
        let d = design(PENDULUM, "t");
        // t·t = 40000 fits, ·g overflows; the DIV afterwards is skipped.
        let r = simulate(&d, &inputs(&d, &[("t", 200.0), ("l", 0.5), (G, 9.80665)])).unwrap();
        assert!(r.overflow);
        assert_eq!(r.outputs[0], encode(40000.0, d.format).unwrap());
        assert!(r.oracle[0].is_some());
        assert_eq!(r.rel_error[0], None);
    }

    #[test]
    fn simulate_input_errors() {
        let d = design(PENDULUM, "t");
        let mut partial = inputs(&d, &[("t", 2.0), ("l", 1.0)]);
        assert_eq!(simulate(&d, &partial), Err(SimError::MissingPort(G.into())));
        let narrow: QFormat = "q8.7".parse().unwrap();
        partial.insert(G.into(), encode(9.8, narrow).unwrap());
        assert!(matches!(simulate(&d, &partial), Err(SimError::FormatMismatch { .. })));
    }

    #[test]
    fn oracle_examples() {
        let g = PiGroup {
            factors: vec![
                PiFactor { signal: "t".into(), exponent: 2 },
                PiFactor { signal: "l".into(), exponent: -1 },
                PiFactor { signal: "g".into(), exponent: 1 },
            ],
        };
        let inputs: BTreeMap<String, f64> =
            [("t", 2.0), ("l", 1.0), ("g", 9.80665)].iter().map(|&(n, x)| (n.into(), x)).collect();
        assert_eq!(oracle_eval(&g, &inputs).unwrap(), 4.0 * 9.80665);
        let ones: BTreeMap<String, f64> =
            ["t", "l", "g"].iter().map(|&n| (n.to_string(), 1.0)).collect();
        assert_eq!(oracle_eval(&g, &ones).unwrap(), 1.0);

        let inv = PiGroup { factors: vec![PiFactor { signal: "x".into(), exponent: -1 }] };
        let zero: BTreeMap<String, f64> = [("x".to_string(), 0.0)].into();
        assert_eq!(oracle_eval(&inv, &zero), Err(SimError::ZeroToNegativePower("x".into())));
    }

    #[test]
    fn stimulus_scaling_stays_in_range() {
        let f = QFormat::DEFAULT;
        let (lo, span) = StimulusRange::default().raw_bounds(f, true).unwrap();
        assert_eq!((lo, span), (16384, 245760));
        assert_eq!(scale_word(0, lo, span), lo);
        assert_eq!(scale_word(u32::MAX, lo, span), lo + span - 1);
        assert_eq!(scale_word(0xFFFC_0000, lo, span), lo);
    }

    #[test]
    fn range_validation() {
        let f = QFormat::DEFAULT;
        let bad = StimulusRange { min: 2.0, max: 2.0 };
        assert!(matches!(bad.raw_bounds(f, false), Err(SimError::InvalidRange { .. })));
        let with_zero = StimulusRange { min: 0.0, max: 8.0 };
        assert!(with_zero.raw_bounds(f, true).is_err());
        assert!(with_zero.raw_bounds(f, false).is_ok());
        let d = design(PENDULUM, "t");
        assert!(matches!(run_random(&d, 10, 0xACE1, with_zero), Err(SimError::InvalidRange { .. })));
    }

    #[test]
    fn random_runs_are_prefix_deterministic() {
        let d = design(PENDULUM, "t");
        let one = run_random(&d, 1, 0xACE1, StimulusRange::default()).unwrap();
        let many = run_random(&d, 50, 0xACE1, StimulusRange::default()).unwrap();
        assert_eq!(one.runs[0], many.runs[0]);
        assert_eq!(many, run_random(&d, 50, 0xACE1, StimulusRange::default()).unwrap());
        assert_eq!(run_random(&d, 0, 1, StimulusRange::default()), Err(SimError::NoVectors));
        assert_eq!(run_random(&d, 5, 0, StimulusRange::default()), Err(SimError::ZeroSeed));
    }

    #[test]
    fn trace_has_one_row_per_vector() {
        let d = design(GLIDER, "h");
        let run = run_random(&d, 1, 0xACE1, StimulusRange::default()).unwrap();
        let csv = trace_csv(&d, &run);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("vector,h_raw,h,v_raw,v,v0_raw,v0,"));
        assert!(lines[0].ends_with(",pi_2_rel_error,ovf,cycles"));
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert!(lines[1].ends_with(",0,73"));
    }
}
