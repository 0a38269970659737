//! `refstate`: generators, checkers, builders and the restriction lab behind
//! one binary.
//!
//! Exit codes: 0 on success or a passing check, 1 when a check finds a
//! violation (reported on stderr), 2 on usage or input errors.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use refstate::cnf::restrict_cnf;
use refstate::dimacs::{parse_dimacs, DimacsWriter};
use refstate::encoders::{
    emit_ref_am, emit_ref_f, emit_reflection, emit_sat, manifest_comments, AmLayout, VarLayout,
    LAYOUT_VERSION,
};
use refstate::lab::{
    check_level_bounds, check_no_falsified_axiom, check_parameter_regime, check_patterns,
    extend_to_admissible, is_admissible, monte_carlo, sample_rho, RandomRestriction, RhoParams,
    Variant,
};
use refstate::levelled::{
    check_levelled, decode_witness, encode_witness, parse_levelled, simulate, write_levelled,
};
use refstate::res2::{build_reflection_refutation, check_res2, parse_res2, write_res2};
use refstate::resolution::{parse_proof, restrict_proof, write_proof};
use refstate::{
    check_resolution, Clause, ClauseSink, Cnf, FamilyCounts, Literal, PartialAssignment,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "refstate",
    version,
    about = "Refutation statements: generate, check, restrict, sample"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Statement that a CNF has a levelled (s,t)-refutation.
    GenRef {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Unsatisfiable conjunction of the satisfiability and refutation statements.
    GenReflection {
        #[command(flatten)]
        dims: DimsArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Single-sequence refutation statement with s̃ clauses.
    GenAm {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        s_tilde: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Statement that some r-clause CNF over n variables is satisfiable.
    GenSat {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Check a resolution proof.
    CheckRes {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        /// Accept a derivation whose last clause is not empty.
        #[arg(long)]
        derivation: bool,
    },
    /// Check a levelled refutation.
    CheckLevelled {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        proof: PathBuf,
    },
    /// Check a Res(2) proof.
    CheckRes2 {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        derivation: bool,
    },
    /// Turn a resolution refutation into a levelled one.
    SimulateLevelled {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Build the Res(2) refutation of the reflection formula.
    BuildRes2 {
        #[command(flatten)]
        dims: DimsArgs,
        /// Where to write the refuted formula.
        #[arg(long)]
        cnf_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Restrict a CNF, and optionally a resolution proof of it.
    Restrict {
        #[arg(long)]
        cnf: PathBuf,
        /// Literals to set true, as DIMACS integers.
        #[arg(long)]
        assign: PathBuf,
        #[arg(long)]
        proof: Option<PathBuf>,
        #[arg(long, requires = "proof")]
        proof_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Encode a levelled refutation as an assignment to the statement's variables.
    WitnessEncode {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        levelled: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Decode a model of the statement back into a levelled refutation.
    WitnessDecode {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
        /// Model in solver output form (`v` lines) or bare DIMACS literals.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Sample one random restriction as JSON.
    SampleRho {
        #[command(flatten)]
        dims: DimsArgs,
        #[command(flatten)]
        lab: LabArgs,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Check a sampled restriction: level bounds, patterns, admissible extension.
    CheckRho {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        rho: PathBuf,
    },
    /// Empirical event frequencies against their analytic bounds.
    McStats {
        #[command(flatten)]
        dims: DimsArgs,
        #[command(flatten)]
        lab: LabArgs,
        #[arg(long)]
        trials: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate the inequalities of the lower-bound regime.
    Regime {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Accepts scientific notation, e.g. 1e14.
        #[arg(long, value_parser = parse_count)]
        s: usize,
        #[arg(long, value_parser = parse_count)]
        t: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
        variant: VariantArg,
    },
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(short = 'o', long = "out")]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct DimsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    t: usize,
}

#[derive(Args)]
struct LabArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    /// Overrides the derived restriction probability.
    #[arg(long)]
    p: Option<f64>,
    /// Overrides the derived width threshold.
    #[arg(long)]
    w: Option<f64>,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Shallow,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Shallow => Variant::Shallow,
        }
    }
}

impl LabArgs {
    fn params(&self) -> RhoParams {
        let mut p = RhoParams::new(self.eps, self.seed).with_variant(self.variant.into());
        if let Some(x) = self.p {
            p = p.with_p(x);
        }
        if let Some(x) = self.w {
            p = p.with_w(x);
        }
        p
    }
}

impl DimsArgs {
    fn ref_layout(&self) -> Result<VarLayout> {
        Ok(VarLayout::ref_f(self.n, self.r, self.s, self.t)?)
    }

    fn reflection_layout(&self) -> Result<VarLayout> {
        Ok(VarLayout::reflection(self.n, self.r, self.s, self.t)?)
    }
}

/// Integer flag that may be written as `1e14`.
fn parse_count(text: &str) -> Result<usize, String> {
    if let Ok(v) = text.parse::<usize>() {
        return Ok(v);
    }
    let x: f64 = text.parse().map_err(|_| format!("not a count: {text}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < usize::MAX as f64 {
        Ok(x as usize)
    } else {
        Err(format!("not a nonnegative integer: {text}"))
    }
}

/// A check that ran to completion but found violations.
#[derive(Debug)]
struct Violations(Vec<String>);

impl std::fmt::Display for Violations {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.0 {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

fn violations<T: ToString>(vs: impl IntoIterator<Item = T>) -> anyhow::Error {
    Violations(vs.into_iter().map(|v| v.to_string()).collect()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_cnf(path: &Path) -> Result<Cnf> {
    parse_dimacs(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn open_out(out: &Output) -> Result<Box<dyn Write>> {
    Ok(match &out.path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(out: &Output, text: &str) -> Result<()> {
    let mut w = open_out(out)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_json(out: &Output, value: &impl serde::Serialize) -> Result<()> {
    write_text(out, &(serde_json::to_string_pretty(value)? + "\n"))
}

/// Either pass of a two-pass DIMACS write.
enum Pass {
    Count(FamilyCounts),
    Write(DimacsWriter<Box<dyn Write>>),
}

impl ClauseSink for Pass {
    fn begin_family(&mut self, label: &'static str) {
        if let Pass::Count(c) = self {
            c.begin_family(label);
        }
    }

    fn push(&mut self, clause: Clause) {
        match self {
            Pass::Count(c) => c.push(clause),
            Pass::Write(w) => w.push(clause),
        }
    }
}

/// Runs `emit` once to count clauses per family, then again into a streaming
/// writer, so the clause list is never held in memory.
fn stream_dimacs(
    out: &Output,
    num_vars: u32,
    header: impl FnOnce(&FamilyCounts) -> Vec<String>,
    mut emit: impl FnMut(&mut Pass) -> Result<()>,
) -> Result<()> {
    let mut pass = Pass::Count(FamilyCounts::default());
    emit(&mut pass)?;
    let Pass::Count(counts) = pass else {
        unreachable!()
    };
    let comments = header(&counts);
    let mut pass = Pass::Write(DimacsWriter::new(
        open_out(out)?,
        num_vars,
        counts.total(),
        &comments,
    )?);
    emit(&mut pass)?;
    let Pass::Write(writer) = pass else {
        unreachable!()
    };
    writer.finish()?.flush()?;
    Ok(())
}

/// Parses solver output (`v` lines, `s`/`c` lines skipped) or bare literals.
fn parse_literals(text: &str) -> Result<PartialAssignment> {
    let mut alpha = PartialAssignment::new();
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('c') || line.starts_with('s') {
            continue;
        }
        for tok in line.trim_start_matches('v').split_whitespace() {
            let v: i64 = tok
                .parse()
                .with_context(|| format!("bad literal {tok:?}"))?;
            if v == 0 {
                continue;
            }
            let lit = Literal::from_dimacs(v).with_context(|| format!("bad literal {v}"))?;
            if alpha.value_of(lit) == Some(false) {
                bail!("literal {v} and its negation both appear");
            }
            alpha.satisfy(lit);
        }
    }
    Ok(alpha)
}

fn write_literals(alpha: &PartialAssignment) -> String {
    let mut s = String::from("v");
    for (v, b) in alpha.iter() {
        s.push(' ');
        s.push_str(&Literal::new(v, b).to_dimacs().to_string());
    }
    s.push_str(" 0\n");
    s
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenRef { cnf, s, t, out } => {
            let f = read_cnf(&cnf)?;
            let layout = VarLayout::ref_f(f.num_vars() as usize, f.len(), s, t)?;
            let params = format!("n={} r={} s={s} t={t}", f.num_vars(), f.len());
            stream_dimacs(
                &out,
                layout.num_vars(),
                |c| manifest_comments("ref", &params, &layout.describe(), c),
                |sink| Ok(emit_ref_f(&f, &layout, sink)?),
            )
        }
        Command::GenReflection { dims, out } => {
            let layout = dims.reflection_layout()?;
            let params = format!("n={} r={} s={} t={}", dims.n, dims.r, dims.s, dims.t);
            stream_dimacs(
                &out,
                layout.num_vars(),
                |c| manifest_comments("reflection", &params, &layout.describe(), c),
                |sink| Ok(emit_reflection(&layout, sink)?),
            )
        }
        Command::GenAm { cnf, s_tilde, out } => {
            let f = read_cnf(&cnf)?;
            let layout = AmLayout::new(f.num_vars() as usize, f.len(), s_tilde)?;
            let params = format!("n={} r={} s~={s_tilde}", f.num_vars(), f.len());
            stream_dimacs(
                &out,
                layout.num_vars(),
                |c| manifest_comments("am", &params, &[], c),
                |sink| Ok(emit_ref_am(&f, &layout, sink)?),
            )
        }
        Command::GenSat { n, r, out } => {
            let layout = VarLayout::sat(n, r)?;
            stream_dimacs(
                &out,
                layout.num_vars(),
                |c| manifest_comments("sat", &format!("n={n} r={r}"), &layout.describe(), c),
                |sink| Ok(emit_sat(&layout, sink)?),
            )
        }
        Command::CheckRes {
            cnf,
            proof,
            derivation,
        } => {
            let f = read_cnf(&cnf)?;
            let pi = parse_proof(&read(&proof)?)?;
            check_resolution(&f, &pi, !derivation).map_err(violations)?;
            println!("ok: {} steps", pi.len());
            Ok(())
        }
        Command::CheckLevelled { cnf, proof } => {
            let f = read_cnf(&cnf)?;
            let lr = parse_levelled(&read(&proof)?)?;
            check_levelled(&f, &lr).map_err(violations)?;
            println!("ok: {} levels of {} clauses", lr.s, lr.t);
            Ok(())
        }
        Command::CheckRes2 {
            cnf,
            proof,
            derivation,
        } => {
            let f = read_cnf(&cnf)?;
            let pi = parse_res2(&read(&proof)?)?;
            check_res2(&f, &pi, !derivation).map_err(violations)?;
            println!("ok: {} lines, size {}", pi.steps.len(), pi.size());
            Ok(())
        }
        Command::SimulateLevelled { cnf, proof, out } => {
            let f = read_cnf(&cnf)?;
            let pi = parse_proof(&read(&proof)?)?;
            write_text(&out, &write_levelled(&simulate(&f, &pi)?))
        }
        Command::BuildRes2 { dims, cnf_out, out } => {
            let rr = build_reflection_refutation(&dims.reflection_layout()?)?;
            if let Some(p) = cnf_out {
                write_text(
                    &Output { path: Some(p) },
                    &refstate::dimacs::emit_dimacs(&rr.formula),
                )?;
            }
            write_text(&out, &write_res2(&rr.proof))
        }
        Command::Restrict {
            cnf,
            assign,
            proof,
            proof_out,
            out,
        } => {
            let f = read_cnf(&cnf)?;
            let sigma = parse_literals(&read(&assign)?)?;
            match proof {
                Some(p) => {
                    let pi = parse_proof(&read(&p)?)?;
                    let (g, rho_pi) = restrict_proof(&f, &pi, &sigma)?;
                    write_text(&Output { path: proof_out }, &write_proof(&rho_pi))?;
                    write_text(&out, &refstate::dimacs::emit_dimacs(&g))
                }
                None => write_text(
                    &out,
                    &refstate::dimacs::emit_dimacs(&restrict_cnf(&f, &sigma)),
                ),
            }
        }
        Command::WitnessEncode { cnf, levelled, out } => {
            let f = read_cnf(&cnf)?;
            let lr = parse_levelled(&read(&levelled)?)?;
            let layout = VarLayout::ref_f(f.num_vars() as usize, f.len(), lr.s, lr.t)?;
            write_text(&out, &write_literals(&encode_witness(&lr, &layout)?))
        }
        Command::WitnessDecode {
            cnf,
            s,
            t,
            model,
            out,
        } => {
            let f = read_cnf(&cnf)?;
            let layout = VarLayout::ref_f(f.num_vars() as usize, f.len(), s, t)?;
            let alpha = parse_literals(&read(&model)?)?;
            write_text(&out, &write_levelled(&decode_witness(&alpha, &layout, &f)?))
        }
        Command::SampleRho {
            dims,
            lab,
            trial,
            out,
        } => write_json(
            &out,
            &sample_rho(&lab.params(), &dims.ref_layout()?, trial)?,
        ),
        Command::CheckRho { cnf, rho } => {
            let f = read_cnf(&cnf)?;
            let rr: RandomRestriction =
                serde_json::from_str(&read(&rho)?).context("parsing the restriction")?;
            let d = rr.dims;
            if (f.num_vars() as usize, f.len()) != (d.n, d.r) {
                bail!(
                    "--cnf has n={} r={} but the restriction was sampled for n={} r={}",
                    f.num_vars(),
                    f.len(),
                    d.n,
                    d.r
                );
            }
            let layout = VarLayout::ref_f(d.n, d.r, d.s, d.t)?;
            let bounds = check_level_bounds(&rr);
            let patterns = check_patterns(&rr);
            let mut problems = Vec::new();
            let extension = match extend_to_admissible(&rr, &f, &layout) {
                Ok(sigma) => {
                    if let Err(vs) = is_admissible(&sigma, &rr.rho, &f, &layout) {
                        problems.extend(vs.iter().map(|v| format!("{v:?}")));
                    }
                    if let Err(e) = check_no_falsified_axiom(&sigma, &f, &layout) {
                        problems.push(e.to_string());
                    }
                    json!({ "assigned": sigma.len() })
                }
                Err(e) => {
                    problems.push(e.to_string());
                    json!({ "error": e.to_string() })
                }
            };
            if !bounds.all() {
                problems.push("level bounds fail".into());
            }
            if !patterns.all() {
                problems.push("pattern check fails".into());
            }
            let report = json!({
                "level_bounds": bounds,
                "patterns": patterns,
                "extension": extension,
                "ok": problems.is_empty(),
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            if problems.is_empty() {
                Ok(())
            } else {
                Err(violations(problems))
            }
        }
        Command::McStats {
            dims,
            lab,
            trials,
            out,
        } => write_json(
            &out,
            &monte_carlo(&lab.params(), &dims.ref_layout()?, trials)?,
        ),
        Command::Regime {
            n,
            r,
            s,
            t,
            eps,
            delta,
            variant,
        } => {
            let rep = check_parameter_regime(n, r, s, t, eps, delta, variant.into())?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(pinned) = std::env::var("REFSTATE_LAYOUT_VERSION") {
        if pinned != LAYOUT_VERSION {
            eprintln!(
                "error: REFSTATE_LAYOUT_VERSION={pinned} but this build writes {LAYOUT_VERSION}"
            );
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Violations>() => {
            eprint!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
