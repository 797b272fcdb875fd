//! `dimgen` command-line driver.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dimgen::corpus::{corpus_dir, CORPUS};
use dimgen::datapath::{
    build_design, count_resources, estimate_latency, ConstantPolicy, DesignOptions, LatencyModel,
    OpKind, RtlDesign,
};
use dimgen::dsl::parse_file;
use dimgen::fixedpoint::QFormat;
use dimgen::pi::{synthesize_pi, PiBasis};
use dimgen::rtl::{emit_all, write_files, TestbenchOptions};
use dimgen::sim::{run_random, trace_csv, RandomRun, StimulusRange};

#[derive(Debug, Parser)]
#[command(name = "dimgen", version, about = "Compile unit-annotated signal specs into dimensionless-product hardware")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the dimensionless-product basis of a spec.
    Pi(SpecArgs),
    /// Emit RTL, testbench, manifest and report.
    Compile {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        stim: StimulusArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Design name (default: spec file stem).
        #[arg(long)]
        name: Option<String>,
    },
    /// Run the bit-accurate simulator on LFSR stimulus.
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        stim: StimulusArgs,
        /// Clock frequency for throughput, in Hz.
        #[arg(long, default_value_t = 6e6)]
        clock: f64,
        /// Directory for the trace CSV and summary.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
    },
    /// Compile and simulate the seven bundled systems.
    Corpus {
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        stim: StimulusArgs,
        #[arg(long, default_value_t = 6e6)]
        clock: f64,
        /// Also write each system's RTL into a subdirectory here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Specification file.
    pub spec: PathBuf,
    /// Signal to isolate in a single product.
    #[arg(long)]
    pub target: String,
    /// Invariant to use when the file declares several.
    #[arg(long)]
    pub invariant: Option<String>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Fixed-point format qI.F.
    #[arg(long, default_value = "q16.15")]
    pub format: QFormat,
    /// fold: nonzero constants become literals; port: constants are inputs.
    #[arg(long, default_value = "port")]
    pub constants: ConstantPolicy,
    #[arg(long)]
    pub mul_cycles: Option<u32>,
    #[arg(long)]
    pub div_cycles: Option<u32>,
    #[arg(long)]
    pub overhead_cycles: Option<u32>,
}

#[derive(Debug, Args)]
pub struct StimulusArgs {
    /// LFSR seed in hex.
    #[arg(long, default_value = "ACE1", value_parser = parse_seed)]
    pub seed: u32,
    #[arg(long)]
    pub vectors: Option<usize>,
    /// Stimulus range MIN:MAX.
    #[arg(long, default_value = "0.5:8.0", value_parser = parse_range)]
    pub range: StimulusRange,
}

pub fn parse_seed(s: &str) -> Result<u32, String> {
    let hex = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u32::from_str_radix(hex, 16).map_err(|e| format!("`{s}` is not a 32-bit hex value: {e}"))
}

pub fn parse_range(s: &str) -> Result<StimulusRange, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("`{s}` is not MIN:MAX"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(StimulusRange { min: num(lo)?, max: num(hi)? })
}

impl DesignArgs {
    pub fn options(&self) -> Result<DesignOptions> {
        let base = LatencyModel::for_format(self.format);
        let latency = LatencyModel::new(
            self.mul_cycles.unwrap_or(base.mul_cycles),
            self.div_cycles.unwrap_or(base.div_cycles),
            self.overhead_cycles.unwrap_or(base.overhead_cycles),
        )?;
        Ok(DesignOptions { format: self.format, constants: self.constants, latency })
    }
}

fn load_basis(args: &SpecArgs) -> Result<PiBasis> {
    let spec = parse_file(&args.spec)?;
    synthesize_pi(&spec, args.invariant.as_deref(), &args.target)
        .with_context(|| args.spec.display().to_string())
}

fn design_name(spec: &Path, name: Option<&str>) -> String {
    name.map(str::to_string).unwrap_or_else(|| {
        spec.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "design".into())
    })
}

fn subscript(n: usize) -> String {
    n.to_string().chars().map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap()).unwrap()).collect()
}

/// Human-readable basis followed by its key-value form.
pub fn describe_basis(b: &PiBasis) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "invariant {}: {} signals, rank {}, {} dimensionless product{}",
        b.invariant,
        b.columns.len(),
        b.rank,
        b.n(),
        if b.n() == 1 { "" } else { "s" }
    );
    for (i, g) in b.groups.iter().enumerate() {
        let mark = if i == b.target_group() { format!("    <- target {}", b.target) } else { String::new() };
        let _ = writeln!(s, "  Π{} = {g}{mark}", subscript(i + 1));
    }
    let args: Vec<String> = (1..=b.n()).map(|i| format!("Π{}", subscript(i))).collect();
    let _ = writeln!(s, "  Φ({}) = 0", args.join(", "));
    let _ = writeln!(
        s,
        "  {} appears only in Π{}; solve Φ for it to predict {}",
        b.target,
        subscript(b.target_group() + 1),
        b.target
    );
    let unused: Vec<&str> = b.unused_signals().iter().map(|c| c.name.as_str()).collect();
    if !unused.is_empty() {
        let _ = writeln!(s, "  not in any product: {}", unused.join(", "));
    }
    s.push('\n');
    s.push_str(&b.to_kv());
    s
}

fn vectors_or(stim: &StimulusArgs, default: usize) -> usize {
    stim.vectors.unwrap_or(default)
}

/// Key-value summary of a random run.
pub fn describe_run(d: &RtlDesign, run: &RandomRun, clock: f64) -> String {
    let s = &run.summary;
    let mut out = String::new();
    let _ = writeln!(out, "design={}", d.name);
    let _ = writeln!(out, "vectors={}", s.vectors);
    let _ = writeln!(out, "cycles={}", s.cycles);
    let _ = writeln!(out, "clock_hz={clock}");
    let _ = writeln!(out, "throughput_samples_per_s={:.1}", s.throughput(clock));
    let _ = writeln!(out, "flagged={}", s.flagged);
    let _ = writeln!(out, "flag_rate={}", s.flag_rate());
    let _ = writeln!(out, "max_rel_error={:e}", s.max_rel_error());
    let _ = writeln!(out, "mean_rel_error={:e}", s.mean_rel_error());
    for (i, p) in s.per_pi.iter().enumerate() {
        let _ = writeln!(
            out,
            "pi_{}=max_rel_error:{:e},mean_rel_error:{:e},samples:{}",
            i + 1,
            p.max_rel_error,
            p.mean_rel_error,
            p.samples
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

struct CorpusRow {
    title: &'static str,
    target: &'static str,
    n: usize,
    muls: usize,
    divs: usize,
    cycles: u64,
    throughput: f64,
    flagged: usize,
    max_err: f64,
    mean_err: f64,
}

fn corpus_table(rows: &[CorpusRow], d: &DesignOptions, vectors: usize, clock: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "format {}, constants {}, latency mul {} / div {} / overhead {}, {} vectors, clock {} Hz",
        d.format,
        d.constants,
        d.latency.mul_cycles,
        d.latency.div_cycles,
        d.latency.overhead_cycles,
        vectors,
        clock
    );
    let _ = writeln!(
        s,
        "{:<22} {:<7} {:>2} {:>4} {:>4} {:>7} {:>12} {:>8} {:>12} {:>12}",
        "system", "target", "N", "MUL", "DIV", "cycles", "samples/s", "flagged", "max rel err", "mean rel err"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<22} {:<7} {:>2} {:>4} {:>4} {:>7} {:>12.0} {:>8} {:>12.3e} {:>12.3e}",
            r.title, r.target, r.n, r.muls, r.divs, r.cycles, r.throughput, r.flagged, r.max_err, r.mean_err
        );
    }
    s
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Pi(args) => {
            let basis = load_basis(&args)?;
            out.write_all(describe_basis(&basis).as_bytes())?;
        }
        Command::Compile { spec, design, stim, out: dir, name } => {
            let basis = load_basis(&spec)?;
            let name = design_name(&spec.spec, name.as_deref());
            let d = build_design(&basis, &name, &design.options()?)?;
            let tb = TestbenchOptions { vectors: vectors_or(&stim, 16), seed: stim.seed, range: stim.range };
            // Everything is generated before the first file is written.
            let files = emit_all(&d, &tb)?;
            write_files(&dir, &files)?;
            for f in &files {
                writeln!(out, "wrote {}", dir.join(&f.name).display())?;
            }
            let r = count_resources(&d);
            writeln!(
                out,
                "{}: {} MUL, {} DIV, {} cycles",
                d.name, r.mul_steps, r.div_steps, r.latency_cycles
            )?;
        }
        Command::Simulate { spec, design, stim, clock, out: dir, name } => {
            if !(clock > 0.0) {
                bail!("clock must be positive, got {clock}");
            }
            let basis = load_basis(&spec)?;
            let name = design_name(&spec.spec, name.as_deref());
            let d = build_design(&basis, &name, &design.options()?)?;
            let run = run_random(&d, vectors_or(&stim, 10_000), stim.seed, stim.range)?;
            let summary = describe_run(&d, &run, clock);
            if let Some(dir) = dir {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                let csv = dir.join(format!("{}_trace.csv", dimgen::rtl::mangle(&name)));
                write_file(&csv, &trace_csv(&d, &run))?;
                write_file(&dir.join(format!("{}_summary.txt", dimgen::rtl::mangle(&name))), &summary)?;
                writeln!(out, "wrote {}", csv.display())?;
            }
            out.write_all(summary.as_bytes())?;
        }
        Command::Corpus { design, stim, clock, out: dir } => {
            if !(clock > 0.0) {
                bail!("clock must be positive, got {clock}");
            }
            let options = design.options()?;
            let vectors = vectors_or(&stim, 10_000);
            let root = corpus_dir();
            // Members are independent; run them in parallel, report in order.
            let results: Vec<Result<(RtlDesign, RandomRun)>> = std::thread::scope(|scope| {
                let handles: Vec<_> = CORPUS
                    .iter()
                    .map(|e| {
                        let root = &root;
                        let options = &options;
                        scope.spawn(move || -> Result<(RtlDesign, RandomRun)> {
                            let (_, d) = e.design(root, options)?;
                            let run = run_random(&d, vectors, stim.seed, stim.range)
                                .with_context(|| e.key.to_string())?;
                            Ok((d, run))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("corpus worker panicked")).collect()
            });
            let mut rows = Vec::new();
            for (e, res) in CORPUS.iter().zip(results) {
                let (d, run) = res?;
                if let Some(dir) = &dir {
                    let tb = TestbenchOptions { vectors: 16, seed: stim.seed, range: stim.range };
                    write_files(&dir.join(e.key), &emit_all(&d, &tb)?)?;
                }
                rows.push(CorpusRow {
                    title: e.title,
                    target: e.target,
                    n: d.sequences.len(),
                    muls: d.sequences.iter().map(|s| s.count(OpKind::Mul)).sum(),
                    divs: d.sequences.iter().map(|s| s.count(OpKind::Div)).sum(),
                    cycles: estimate_latency(&d),
                    throughput: run.summary.throughput(clock),
                    flagged: run.summary.flagged,
                    max_err: run.summary.max_rel_error(),
                    mean_err: run.summary.mean_rel_error(),
                });
            }
            out.write_all(corpus_table(&rows, &options, vectors, clock).as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| anyhow!(e.to_string()))?;
    run(cli, out)
}
