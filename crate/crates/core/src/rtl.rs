//! Verilog-2005 emission.
//!
//! A design becomes one top module with a controller per Π unit, plus two
//! parametric arithmetic modules shared by every design:
//!
//! * `fx_mul`: the product is registered on the issue edge; the shifted result
//!   and its range check are combinational, so a MUL needs 2 edges.
//! * `fx_div`: restoring divider, one setup edge then one quotient bit per
//!   edge, so a DIV needs W + 2 edges including writeback.
//!
//! Slower latency models are met by holding the writeback with wait states.
//! Faster ones cannot be met and are rejected.
//!
//! Edge timeline per run, counting the edge that samples `start` as edge 0:
//! load `init`, then each step for its cost, then an edge that latches the
//! unit's output. The global `done` rises on the edge after the last unit
//! finishes (later if the overhead exceeds 3 cycles).

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;
use thiserror::Error;

use crate::datapath::{
    count_resources, estimate_latency, Init, OpKind, OpSequence, Operand, RtlDesign,
};
use crate::fixedpoint::FxValue;
use crate::sim::{run_random, SimError, StimulusRange};

#[derive(Debug, Error)]
pub enum RtlError {
    #[error("design has no Π units")]
    EmptyDesign,
    #[error("latency model not implementable: {0}")]
    UnsupportedLatency(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Lowercase; anything outside [a-z0-9] becomes `_`.
pub fn mangle(name: &str) -> String {
    let m: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if m.is_empty() {
        "_".to_string()
    } else {
        m
    }
}

/// Mangles each name, appending `_2`, `_3`, ... on collisions.
pub fn mangle_all<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut used = HashSet::new();
    names
        .into_iter()
        .map(|n| {
            let base = mangle(n);
            let mut candidate = base.clone();
            let mut k = 2;
            while !used.insert(candidate.clone()) {
                candidate = format!("{base}_{k}");
                k += 1;
            }
            candidate
        })
        .collect()
}

pub fn top_module_name(d: &RtlDesign) -> String {
    format!("pi_compute_{}", mangle(&d.name))
}

/// Port identifier per design input, in port order.
pub fn port_identifiers(d: &RtlDesign) -> Vec<String> {
    mangle_all(d.ports.iter().map(|p| p.name.as_str()))
        .into_iter()
        .map(|m| format!("sig_{m}"))
        .collect()
}

fn bits_for(n: u64) -> u32 {
    (64 - n.leading_zeros()).max(1)
}

fn literal(v: FxValue) -> String {
    let w = v.format().width();
    format!("{w}'sh{:0digits$x}", v.bits(), digits = w.div_ceil(4) as usize)
}

pub fn check_latency(d: &RtlDesign) -> Result<(), RtlError> {
    let w = d.format.width();
    let l = d.latency;
    if l.mul_cycles < 2 {
        return Err(RtlError::UnsupportedLatency(format!(
            "multiply needs at least 2 cycles, model has {}",
            l.mul_cycles
        )));
    }
    if l.div_cycles < w + 2 {
        return Err(RtlError::UnsupportedLatency(format!(
            "divide needs at least {} cycles at width {w}, model has {}",
            w + 2,
            l.div_cycles
        )));
    }
    if l.overhead_cycles < 3 {
        return Err(RtlError::UnsupportedLatency(format!(
            "overhead needs at least 3 cycles, model has {}",
            l.overhead_cycles
        )));
    }
    Ok(())
}

pub const FX_MUL_V: &str = r#"// Fixed-point multiply: y = (a * b) >>> F.
// The full product is registered when go is high; y and ovf follow it.
module fx_mul #(
    parameter W = 32,
    parameter F = 15
) (
    input  wire                clk,
    input  wire                go,
    input  wire signed [W-1:0] a,
    input  wire signed [W-1:0] b,
    output wire signed [W-1:0] y,
    output wire                ovf
);
    reg  signed [2*W-1:0] prod;
    wire signed [2*W-1:0] shifted = prod >>> F;

    always @(posedge clk)
        if (go) prod <= a * b;

    assign y = shifted[W-1:0];
    // In range iff the bits above the sign bit all equal the sign bit.
    assign ovf = !((&shifted[2*W-1:W-1]) || !(|shifted[2*W-1:W-1]));
endmodule
"#;

pub const FX_DIV_V: &str = r#"// Fixed-point divide: y = (a << F) / b, truncated toward zero.
// Restoring division on magnitudes: one setup edge, then one quotient bit
// per edge for W edges. Results hold until the next go.
module fx_div #(
    parameter W = 32,
    parameter F = 15
) (
    input  wire                clk,
    input  wire                go,
    input  wire signed [W-1:0] a,
    input  wire signed [W-1:0] b,
    output wire signed [W-1:0] y,
    output wire                ovf
);
    wire [W-1:0] ua = a[W-1] ? -a : a;
    wire [W-1:0] ub = b[W-1] ? -b : b;
    wire [W-1:0] r_init = ua >> (W - F);

    reg          neg;
    reg          big;
    reg  [W:0]   r;
    reg  [W-1:0] d;
    reg  [W-1:0] q;
    reg  [W-1:0] n_lo;
    reg  [7:0]   count;

    wire [W:0] r_shift = {r[W-1:0], n_lo[W-1]};
    wire       take = r_shift >= {1'b0, d};

    always @(posedge clk) begin
        if (go) begin
            neg   <= a[W-1] ^ b[W-1];
            // Quotient needs more than W bits (or b is zero).
            big   <= r_init >= ub;
            r     <= {1'b0, r_init};
            d     <= ub;
            q     <= {W{1'b0}};
            n_lo  <= ua << F;
            count <= W;
        end else if (count != 0) begin
            r     <= take ? r_shift - {1'b0, d} : r_shift;
            q     <= {q[W-2:0], take};
            n_lo  <= n_lo << 1;
            count <= count - 8'd1;
        end
    end

    assign y = neg ? -q : q;
    assign ovf = big || (neg ? (q[W-1] && (|q[W-2:0])) : q[W-1]);
endmodule
"#;

fn operand_expr(op: &Operand, ids: &BTreeMap<&str, &str>) -> String {
    match op {
        Operand::Signal(name) => ids[name.as_str()].to_string(),
        Operand::Literal { value, .. } => literal(*value),
    }
}

fn emit_unit(
    out: &mut String,
    d: &RtlDesign,
    seq: &OpSequence,
    ids: &BTreeMap<&str, &str>,
    wait_bits: u32,
) {
    let u = seq.pi_index + 1;
    let m = seq.steps.len();
    let step_bits = bits_for(m as u64);
    let has_mul = seq.count(OpKind::Mul) > 0;
    let has_div = seq.count(OpKind::Div) > 0;
    let init = match &seq.init {
        Init::One => literal(d.format.from_raw(d.format.one_raw()).expect("1.0 fits")),
        Init::Operand(op) => operand_expr(op, ids),
    };

    let _ = writeln!(out, "    // Unit {u}: {}", d.groups[seq.pi_index]);
    let _ = writeln!(out, "    //   {seq}");
    let _ = writeln!(out, "    reg signed [W-1:0] acc_{u};");
    let _ = writeln!(out, "    reg signed [W-1:0] out_{u};");
    let _ = writeln!(out, "    reg [{}:0] step_{u};", step_bits - 1);
    let _ = writeln!(out, "    reg [{}:0] wait_{u};", wait_bits - 1);
    let _ = writeln!(out, "    reg run_{u}, issued_{u}, fin_{u}, err_{u};");
    let _ = writeln!(out, "    reg signed [W-1:0] opnd_{u};");
    let _ = writeln!(out, "    reg is_div_{u};");
    let _ = writeln!(out, "    always @* begin");
    let _ = writeln!(out, "        case (step_{u})");
    for (i, s) in seq.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "            {step_bits}'d{i}: begin opnd_{u} = {}; is_div_{u} = 1'b{}; end",
            operand_expr(&s.operand, ids),
            u8::from(s.op == OpKind::Div)
        );
    }
    let _ = writeln!(out, "            default: begin opnd_{u} = {{W{{1'b0}}}}; is_div_{u} = 1'b0; end");
    let _ = writeln!(out, "        endcase");
    let _ = writeln!(out, "    end");
    let _ = writeln!(out, "    wire go_{u} = run_{u} && !issued_{u} && step_{u} != {step_bits}'d{m};");

    if has_mul {
        let _ = writeln!(out, "    wire signed [W-1:0] mul_y_{u};");
        let _ = writeln!(out, "    wire mul_ovf_{u};");
        let _ = writeln!(
            out,
            "    fx_mul #(.W(W), .F(F)) u_mul_{u} (.clk(clk), .go(go_{u} && !is_div_{u}), \
             .a(acc_{u}), .b(opnd_{u}), .y(mul_y_{u}), .ovf(mul_ovf_{u}));"
        );
    }
    if has_div {
        let _ = writeln!(out, "    wire signed [W-1:0] div_y_{u};");
        let _ = writeln!(out, "    wire div_ovf_{u};");
        let _ = writeln!(
            out,
            "    fx_div #(.W(W), .F(F)) u_div_{u} (.clk(clk), .go(go_{u} && is_div_{u}), \
             .a(acc_{u}), .b(opnd_{u}), .y(div_y_{u}), .ovf(div_ovf_{u}));"
        );
    }
    let (res, res_ovf) = match (has_mul, has_div) {
        (true, true) => (
            format!("is_div_{u} ? div_y_{u} : mul_y_{u}"),
            format!("is_div_{u} ? div_ovf_{u} : mul_ovf_{u}"),
        ),
        (true, false) => (format!("mul_y_{u}"), format!("mul_ovf_{u}")),
        (false, true) => (format!("div_y_{u}"), format!("div_ovf_{u}")),
        (false, false) => (format!("acc_{u}"), "1'b0".to_string()),
    };
    let _ = writeln!(out, "    wire signed [W-1:0] res_{u} = {res};");
    let _ = writeln!(out, "    wire res_ovf_{u} = {res_ovf};");

    let _ = write!(
        out,
        "    always @(posedge clk) begin
        if (!rst_n) begin
            acc_{u} <= {{W{{1'b0}}}};
            out_{u} <= {{W{{1'b0}}}};
            step_{u} <= 0;
            wait_{u} <= 0;
            run_{u} <= 1'b0;
            issued_{u} <= 1'b0;
            fin_{u} <= 1'b0;
            err_{u} <= 1'b0;
        end else if (launch) begin
            acc_{u} <= {init};
            step_{u} <= 0;
            issued_{u} <= 1'b0;
            run_{u} <= 1'b1;
            fin_{u} <= 1'b0;
            err_{u} <= 1'b0;
        end else if (run_{u}) begin
            if (!issued_{u}) begin
                if (step_{u} == {step_bits}'d{m}) begin
                    out_{u} <= acc_{u};
                    fin_{u} <= 1'b1;
                    run_{u} <= 1'b0;
                end else begin
                    issued_{u} <= 1'b1;
                    wait_{u} <= is_div_{u} ? DIV_WAIT : MUL_WAIT;
                end
            end else if (wait_{u} != 0) begin
                wait_{u} <= wait_{u} - 1'b1;
            end else begin
                // After an error the unit keeps its last valid value.
                if (!err_{u}) begin
                    if (res_ovf_{u}) err_{u} <= 1'b1;
                    else acc_{u} <= res_{u};
                end
                step_{u} <= step_{u} + 1'b1;
                issued_{u} <= 1'b0;
            end
        end
    end
    assign pi_{u} = out_{u};

"
    );
}

/// Top module source.
pub fn emit_top(d: &RtlDesign) -> Result<String, RtlError> {
    if d.sequences.is_empty() {
        return Err(RtlError::EmptyDesign);
    }
    check_latency(d)?;
    let w = d.format.width();
    let port_ids = port_identifiers(d);
    let ids: BTreeMap<&str, &str> =
        d.ports.iter().zip(&port_ids).map(|(p, id)| (p.name.as_str(), id.as_str())).collect();
    let mul_wait = d.latency.mul_cycles as u64 - 2;
    let div_wait = d.latency.div_cycles as u64 - 2;
    let wait_bits = bits_for(mul_wait.max(div_wait));
    let pad = d.latency.overhead_cycles as u64 - 3;
    let n = d.sequences.len();

    let mut out = String::new();
    let _ = writeln!(out, "// Generated by dimgen. Design `{}`, format {}.", d.name, d.format);
    for (i, g) in d.groups.iter().enumerate() {
        let mark = if i == d.target_pi { format!("  (target {})", d.target) } else { String::new() };
        let _ = writeln!(out, "// pi_{} = {g}{mark}", i + 1);
    }
    for (p, id) in d.ports.iter().zip(&port_ids) {
        if id[4..] != p.name {
            let _ = writeln!(out, "// {id} carries `{}`", p.name);
        }
    }
    for f in &d.folded {
        let _ = writeln!(out, "// `{}` folded to {} ({})", f.name, literal(f.fixed), f.fixed);
    }
    let _ = writeln!(out, "// Latency: {} cycles from start to done.", estimate_latency(d));
    let _ = writeln!(out, "module {} (", top_module_name(d));
    let _ = writeln!(out, "    input  wire clk,");
    let _ = writeln!(out, "    input  wire rst_n,");
    let _ = writeln!(out, "    input  wire start,");
    for id in &port_ids {
        let _ = writeln!(out, "    input  wire signed [{}:0] {id},", w - 1);
    }
    for u in 1..=n {
        let _ = writeln!(out, "    output wire signed [{}:0] pi_{u},", w - 1);
    }
    let _ = writeln!(out, "    output reg  done,");
    let _ = writeln!(out, "    output wire ovf");
    let _ = writeln!(out, ");");
    let _ = writeln!(out, "    localparam W = {w};");
    let _ = writeln!(out, "    localparam F = {};", d.format.frac());
    let _ = writeln!(out, "    localparam [{}:0] MUL_WAIT = {mul_wait};", wait_bits - 1);
    let _ = writeln!(out, "    localparam [{}:0] DIV_WAIT = {div_wait};", wait_bits - 1);
    let pad_bits = bits_for(pad);
    let _ = writeln!(out, "    localparam [{}:0] PAD = {pad};", pad_bits - 1);
    let _ = writeln!(out);
    let _ = writeln!(out, "    reg active;");
    let _ = writeln!(out, "    reg [{}:0] pad;", pad_bits - 1);
    let _ = writeln!(out, "    wire launch = start && !active;");
    let _ = writeln!(out);

    for seq in &d.sequences {
        emit_unit(&mut out, d, seq, &ids, wait_bits);
    }

    let fins: Vec<String> = (1..=n).map(|u| format!("fin_{u}")).collect();
    let errs: Vec<String> = (1..=n).map(|u| format!("err_{u}")).collect();
    let _ = write!(
        out,
        "    wire all_fin = {};
    assign ovf = {};

    always @(posedge clk) begin
        if (!rst_n) begin
            active <= 1'b0;
            done <= 1'b0;
            pad <= 0;
        end else if (launch) begin
            active <= 1'b1;
            done <= 1'b0;
            pad <= PAD;
        end else if (active && all_fin) begin
            if (pad == 0) begin
                done <= 1'b1;
                active <= 1'b0;
            end else begin
                pad <= pad - 1'b1;
            end
        end
    end
endmodule
",
        fins.join(" && "),
        errs.join(" || ")
    );
    Ok(out)
}

fn signed_literal(bits: u32, v: i64) -> String {
    if v < 0 {
        format!("-{bits}'sd{}", v.unsigned_abs())
    } else {
        format!("{bits}'sd{v}")
    }
}

/// Self-checking testbench: regenerates the LFSR stimulus and compares every
/// output, the overflow flag and the cycle count with the simulator.
pub fn emit_testbench(
    d: &RtlDesign,
    vectors: usize,
    seed: u32,
    range: StimulusRange,
) -> Result<String, RtlError> {
    if d.sequences.is_empty() {
        return Err(RtlError::EmptyDesign);
    }
    let run = run_random(d, vectors, seed, range)?;
    let (lo, span) = range.raw_bounds(d.format, d.has_div())?;
    let w = d.format.width();
    let n = d.sequences.len();
    let ids = port_identifiers(d);
    let cycles = estimate_latency(d);
    let top = top_module_name(d);
    let hex = |v: FxValue| format!("{w}'h{:0digits$x}", v.bits(), digits = w.div_ceil(4) as usize);

    let mut out = String::new();
    let _ = writeln!(out, "// Generated by dimgen. Testbench for {top}: {vectors} vectors, seed 0x{seed:08x},");
    let _ = writeln!(out, "// inputs in [{}, {}).", range.min, range.max);
    let _ = writeln!(out, "`timescale 1ns/1ps");
    let _ = writeln!(out, "module tb_{};", mangle(&d.name));
    let _ = writeln!(out, "    localparam W = {w};");
    let _ = writeln!(out, "    localparam N = {vectors};");
    let _ = writeln!(out, "    localparam CYCLES = {cycles};");
    let _ = writeln!(out, "    localparam [31:0] SEED = 32'h{seed:08x};");
    let _ = writeln!(out, "    localparam signed [127:0] LO = {};", signed_literal(128, lo));
    let _ = writeln!(out, "    localparam signed [127:0] SPAN = {};", signed_literal(128, span));
    let _ = writeln!(out);
    let _ = writeln!(out, "    reg clk = 1'b0;");
    let _ = writeln!(out, "    reg rst_n = 1'b0;");
    let _ = writeln!(out, "    reg start = 1'b0;");
    for id in &ids {
        let _ = writeln!(out, "    reg signed [W-1:0] {id};");
    }
    for u in 1..=n {
        let _ = writeln!(out, "    wire signed [W-1:0] pi_{u};");
    }
    let _ = writeln!(out, "    wire done, ovf;");
    let _ = writeln!(out);
    let mut conns = vec![".clk(clk)".to_string(), ".rst_n(rst_n)".into(), ".start(start)".into()];
    conns.extend(ids.iter().map(|id| format!(".{id}({id})")));
    conns.extend((1..=n).map(|u| format!(".pi_{u}(pi_{u})")));
    conns.push(".done(done)".into());
    conns.push(".ovf(ovf)".into());
    let _ = writeln!(out, "    {top} dut (\n        {}\n    );", conns.join(",\n        "));
    let _ = writeln!(out);
    let _ = writeln!(out, "    always #5 clk = ~clk;");
    let _ = writeln!(out);

    for id in &ids {
        let _ = writeln!(out, "    reg [W-1:0] exp_{id} [0:N-1];");
    }
    for u in 1..=n {
        let _ = writeln!(out, "    reg [W-1:0] exp_pi_{u} [0:N-1];");
    }
    let _ = writeln!(out, "    reg exp_ovf [0:N-1];");
    let _ = writeln!(out, "    initial begin");
    for (i, r) in run.runs.iter().enumerate() {
        for (p, id) in d.ports.iter().zip(&ids) {
            let _ = writeln!(out, "        exp_{id}[{i}] = {};", hex(r.inputs[&p.name]));
        }
        for (u, v) in r.result.outputs.iter().enumerate() {
            let _ = writeln!(out, "        exp_pi_{}[{i}] = {};", u + 1, hex(*v));
        }
        let _ = writeln!(out, "        exp_ovf[{i}] = 1'b{};", u8::from(r.result.overflow));
    }
    let _ = writeln!(out, "    end");
    let _ = writeln!(out);

    let _ = write!(
        out,
        "    reg [31:0] lfsr;

    // 32 shifts of the (32, 22, 2, 1) Fibonacci LFSR, feedback bits MSB first.
    task next_word(output [31:0] word);
        integer k;
        reg fb;
        begin
            word = 32'd0;
            for (k = 0; k < 32; k = k + 1) begin
                fb = lfsr[0] ^ lfsr[10] ^ lfsr[30] ^ lfsr[31];
                lfsr = {{fb, lfsr[31:1]}};
                word = {{word[30:0], fb}};
            end
        end
    endtask

    // raw = LO + ((word & 0x3FFFF) * SPAN) >> 18
    task draw(output [W-1:0] value);
        reg [31:0] word;
        reg signed [127:0] t;
        begin
            next_word(word);
            t = {{110'd0, word[17:0]}};
            t = ((t * SPAN) >>> 18) + LO;
            value = t[W-1:0];
        end
    endtask

    integer i, cyc, errors;
    initial begin
        errors = 0;
        lfsr = SEED;
        repeat (2) @(negedge clk);
        rst_n = 1'b1;
        for (i = 0; i < N; i = i + 1) begin
            @(negedge clk);
"
    );
    for id in &ids {
        let _ = writeln!(out, "            draw({id});");
    }
    for id in &ids {
        let _ = writeln!(
            out,
            "            if ({id} !== exp_{id}[i]) begin errors = errors + 1; \
             $display(\"vector %0d: {id} = %h, expected %h\", i, {id}, exp_{id}[i]); end"
        );
    }
    let _ = write!(
        out,
        "            start = 1'b1;
            @(posedge clk);
            cyc = 1;
            @(negedge clk);
            start = 1'b0;
            while (!done) begin
                @(posedge clk);
                cyc = cyc + 1;
                @(negedge clk);
            end
"
    );
    for u in 1..=n {
        let _ = writeln!(
            out,
            "            if (pi_{u} !== exp_pi_{u}[i]) begin errors = errors + 1; \
             $display(\"vector %0d: pi_{u} = %h, expected %h\", i, pi_{u}, exp_pi_{u}[i]); end"
        );
    }
    let _ = write!(
        out,
        "            if (ovf !== exp_ovf[i]) begin errors = errors + 1; \
             $display(\"vector %0d: ovf = %b, expected %b\", i, ovf, exp_ovf[i]); end
            if (cyc != CYCLES) begin errors = errors + 1; \
             $display(\"vector %0d: %0d cycles, expected %0d\", i, cyc, CYCLES); end
        end
        if (errors == 0) $display(\"PASS: %0d vectors, %0d cycles each\", N, CYCLES);
        else $display(\"FAIL: %0d mismatches\", errors);
        $finish;
    end

    initial begin
        #({timeout});
        $display(\"FAIL: timeout\");
        $finish;
    end
endmodule
",
        timeout = (vectors as u64) * (cycles + 8) * 10 + 1000
    );
    Ok(out)
}

/// Machine-readable description of the emitted interface.
pub fn manifest(d: &RtlDesign) -> serde_json::Value {
    let ids = port_identifiers(d);
    json!({
        "design": d.name,
        "top": top_module_name(d),
        "format": d.format.to_string(),
        "width": d.format.width(),
        "frac": d.format.frac(),
        "constant_policy": d.constant_policy,
        "latency_model": d.latency,
        "latency_cycles": estimate_latency(d),
        "target": d.target,
        "target_pi": d.target_pi + 1,
        "inputs": d.ports.iter().zip(&ids).map(|(p, id)| json!({
            "signal": p.name,
            "port": id,
            "constant": p.constant,
        })).collect::<Vec<_>>(),
        "outputs": d.groups.iter().enumerate().map(|(i, g)| json!({
            "port": format!("pi_{}", i + 1),
            "expression": g.to_string(),
            "factors": g.factors.iter().map(|f| json!({"signal": f.signal, "exponent": f.exponent}))
                .collect::<Vec<_>>(),
            "schedule": d.sequences[i].to_string(),
            "target": i == d.target_pi,
        })).collect::<Vec<_>>(),
        "folded": d.folded.iter().map(|f| json!({
            "signal": f.name,
            "value": f.value,
            "raw": f.fixed.raw(),
        })).collect::<Vec<_>>(),
        "omitted": d.omitted,
        "resources": count_resources(d),
    })
}

/// Plain-text summary of basis, schedules and resources.
pub fn report(d: &RtlDesign) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "design={}", d.name);
    let _ = writeln!(out, "top={}", top_module_name(d));
    let _ = writeln!(out, "format={}", d.format);
    let _ = writeln!(out, "constants={}", d.constant_policy);
    let _ = writeln!(
        out,
        "latency_model=mul:{},div:{},overhead:{}",
        d.latency.mul_cycles, d.latency.div_cycles, d.latency.overhead_cycles
    );
    for (i, g) in d.groups.iter().enumerate() {
        let _ = writeln!(out, "pi_{}={g}", i + 1);
        let _ = writeln!(out, "schedule_{}={}", i + 1, d.sequences[i]);
    }
    let _ = writeln!(out, "target={} (pi_{})", d.target, d.target_pi + 1);
    if !d.omitted.is_empty() {
        let _ = writeln!(out, "omitted={}", d.omitted.join(","));
    }
    out.push_str(&count_resources(d).to_kv());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFile {
    pub name: String,
    pub contents: String,
}

/// Testbench settings for [`emit_all`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestbenchOptions {
    pub vectors: usize,
    pub seed: u32,
    pub range: StimulusRange,
}

impl Default for TestbenchOptions {
    fn default() -> Self {
        TestbenchOptions { vectors: 16, seed: 0xACE1, range: StimulusRange::default() }
    }
}

/// Every output file for a design, in a fixed order.
pub fn emit_all(d: &RtlDesign, tb: &TestbenchOptions) -> Result<Vec<EmittedFile>, RtlError> {
    let base = mangle(&d.name);
    let top = emit_top(d)?;
    let bench = emit_testbench(d, tb.vectors, tb.seed, tb.range)?;
    let manifest = serde_json::to_string_pretty(&manifest(d)).expect("manifest serializes") + "\n";
    let file = |name: String, contents: String| EmittedFile { name, contents };
    Ok(vec![
        file(format!("{base}_top.v"), top),
        file("fx_mul.v".into(), FX_MUL_V.into()),
        file("fx_div.v".into(), FX_DIV_V.into()),
        file(format!("{base}_tb.v"), bench),
        file("manifest.json".into(), manifest),
        file(format!("{base}_report.txt"), report(d)),
    ])
}

pub fn write_files(dir: &Path, files: &[EmittedFile]) -> Result<(), RtlError> {
    let io = |path: &Path, source| RtlError::Io { path: path.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for f in files {
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.contents).map_err(|e| io(&path, e))?;
    }
    Ok(())
}
