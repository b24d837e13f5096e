//! Command dispatch for the `sebkit` binary.
//!
//! Every command prints one report:
//! `{command, inputs, tolerances, payload, ok, runtime_ms}`. Exit code 0 means
//! `ok`, 1 a completed analysis with `ok = false`, 2 a usage or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::channel::{
    check_weights, holevo_to_kraus, kraus_to_holevo, verify_cptp, Channel, HolevoChannel,
    KrausChannel,
};
use crate::dilation::{build_dilation, verify_dilation, DilationResult};
use crate::error::{Error, Result};
use crate::io::{
    channel_to_json, matrix_to_json, parse_channel_file, parse_projection_file,
    parse_subspace_file, sha256_hex, to_canonical_json, vector_to_json, write_channel_file,
};
use crate::linalg::{ComplexMatrix, Tolerances};
use crate::nullspace::{synthesize_channel, verify_nullspace};
use crate::seb::{
    decompose_seb, range_commutativity_test, verify_separable_decomposition, SebDecomposition,
};
use crate::structure::{
    adjoint_fixed_check, commutant_projections, multiplicative_projection_check, RankOneKraus,
};

#[derive(Debug, Parser)]
#[command(
    name = "sebkit",
    version,
    about = "Analyses of entanglement breaking quantum channels"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Commutator tolerance.
    #[arg(long, global = true, value_name = "EPS")]
    tol_comm: Option<f64>,
    /// Positive-semidefiniteness tolerance.
    #[arg(long, global = true, value_name = "EPS")]
    tol_psd: Option<f64>,
    /// Reconstruction tolerance.
    #[arg(long, global = true, value_name = "EPS")]
    tol_recon: Option<f64>,
    /// Hermiticity tolerance.
    #[arg(long, global = true, value_name = "EPS")]
    tol_herm: Option<f64>,
    /// Relative rank cutoff.
    #[arg(long, global = true, value_name = "EPS")]
    tol_rank: Option<f64>,
    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    report: ReportFormat,
    /// Skip CPTP validation of input channels.
    #[arg(long, global = true)]
    no_verify: bool,
    /// Record wall-clock time in `runtime_ms` (otherwise 0, keeping reports reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Representation {
    Kraus,
    Holevo,
    Choi,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check complete positivity and trace preservation.
    Verify { channel: PathBuf },
    /// Test whether all outputs of the channel commute.
    RangeComm { channel: PathBuf },
    /// Measure-and-prepare decomposition of a commutative-range channel.
    Decompose {
        channel: PathBuf,
        /// Comma-separated input weights (default uniform).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Write the derived measure-and-prepare channel file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a channel whose null space is the given subspace.
    SynthNull {
        subspace: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dilate a measure-and-prepare channel.
    Dilate {
        channel: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Commutant of the Kraus family and its fixed projections.
    FixedPoints { channel: PathBuf },
    /// Test a projection for membership in the multiplicative domain.
    MultDomain {
        channel: PathBuf,
        #[arg(long)]
        projection: PathBuf,
    },
    /// Convert between representations.
    Convert {
        channel: PathBuf,
        #[arg(long, value_enum)]
        to: Representation,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify { .. } => "verify",
            Command::RangeComm { .. } => "range-comm",
            Command::Decompose { .. } => "decompose",
            Command::SynthNull { .. } => "synth-null",
            Command::Dilate { .. } => "dilate",
            Command::FixedPoints { .. } => "fixed-points",
            Command::MultDomain { .. } => "mult-domain",
            Command::Convert { .. } => "convert",
        }
    }
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Failure tagged with the exit code it maps to.
struct Failure {
    code: i32,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = if is_input_error(&error) { 2 } else { 1 };
        Failure { code, error }
    }
}

fn input(error: Error) -> Failure {
    Failure { code: 2, error }
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse { .. }
            | Error::Validation { .. }
            | Error::Io(_)
            | Error::BadTolerances(_)
            | Error::BadWeights(_)
            | Error::BadShape { .. }
            | Error::NonFinite { .. }
            | Error::NotTraceZero { .. }
            | Error::NotSelfAdjoint { .. }
            | Error::NotProjection { .. }
            | Error::DimensionMismatch(_)
    )
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::BadShape { .. } => "BadShape",
        Error::NonFinite { .. } => "NonFinite",
        Error::DimensionMismatch(_) => "DimensionMismatch",
        Error::NotHermitian { .. } => "NotHermitian",
        Error::NotPsd { .. } => "NotPsd",
        Error::NumericalFailure(_) => "NumericalFailure",
        Error::NotCommutingFamily { .. } => "NotCommutingFamily",
        Error::DiagonalizationFailure { .. } => "DiagonalizationFailure",
        Error::BadWeights(_) => "BadWeights",
        Error::NotRankOne { .. } => "NotRankOne",
        Error::NotPsdInput { .. } => "NotPsdInput",
        Error::NotCommutativeRange { .. } => "NotCommutativeRange",
        Error::CertificationFailure { .. } => "CertificationFailure",
        Error::NotSelfAdjoint { .. } => "NotSelfAdjoint",
        Error::NotTraceZero { .. } => "NotTraceZero",
        Error::NotProjection { .. } => "NotProjection",
        Error::BadTolerances(_) => "BadTolerances",
        Error::KrausCount { .. } => "KrausCount",
        Error::Parse { .. } => "ParseError",
        Error::Validation { .. } => "ValidationError",
        Error::Io(_) => "IoError",
    }
}

fn error_json(e: &Error) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::from(error_kind(e)));
    obj.insert("message".into(), Value::from(e.to_string()));
    if let Error::Parse { path, .. } | Error::Validation { path, .. } = e {
        obj.insert("path".into(), Value::from(path.as_str()));
    }
    json!({ "error": Value::Object(obj) })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize to JSON")
}

struct Context {
    tol: Tolerances,
    seed: u64,
    verify_inputs: bool,
    inputs: Map<String, Value>,
}

impl Context {
    fn digest(&mut self, role: &str, path: &Path) -> Result<()> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.inputs
            .insert(role.into(), Value::from(sha256_hex(&bytes)));
        Ok(())
    }

    fn channel(&mut self, path: &Path) -> std::result::Result<Channel, Failure> {
        self.digest("channel", path).map_err(input)?;
        parse_channel_file(path, self.verify_inputs, &self.tol).map_err(input)
    }
}

fn tolerances(g: &GlobalArgs) -> Result<Tolerances> {
    let mut t = Tolerances::default();
    let overrides = [
        (g.tol_herm, &mut t.eps_herm),
        (g.tol_psd, &mut t.eps_psd),
        (g.tol_comm, &mut t.eps_comm),
        (g.tol_recon, &mut t.eps_recon),
        (g.tol_rank, &mut t.eps_rank),
    ];
    for (flag, slot) in overrides {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    t.validate()?;
    Ok(t)
}

/// Measure-and-prepare form of any channel; Kraus operators that are not
/// rank one go through the commutative-range decomposition.
pub fn holevo_form(ch: &Channel, seed: u64, tol: &Tolerances) -> Result<HolevoChannel> {
    match ch {
        Channel::Holevo(h) => Ok(h.clone()),
        Channel::Kraus(k) => kraus_holevo(ch, k, seed, tol),
        Channel::Choi(_) => kraus_holevo(ch, &ch.to_kraus(tol)?, seed, tol),
    }
}

fn kraus_holevo(
    ch: &Channel,
    k: &KrausChannel,
    seed: u64,
    tol: &Tolerances,
) -> Result<HolevoChannel> {
    match kraus_to_holevo(k, tol) {
        Err(Error::NotRankOne { .. }) => decompose_seb(ch, None, seed, tol)?.to_holevo(),
        other => other,
    }
}

/// Rank-one Kraus form of any entanglement breaking channel.
pub fn rank_one_form(ch: &Channel, seed: u64, tol: &Tolerances) -> Result<RankOneKraus> {
    if let Channel::Kraus(k) = ch {
        match RankOneKraus::from_kraus(k, tol) {
            Err(Error::NotRankOne { .. }) => {}
            other => return other,
        }
    }
    let h = holevo_form(ch, seed, tol)?;
    RankOneKraus::from_kraus(&holevo_to_kraus(&h, tol)?, tol)
}

fn matrices(ms: &[ComplexMatrix]) -> Value {
    Value::Array(ms.iter().map(matrix_to_json).collect())
}

fn decomposition_json(dec: &SebDecomposition) -> Value {
    let terms: Vec<Value> = dec
        .terms
        .iter()
        .map(|t| {
            json!({
                "index": t.index,
                "probability": t.probability,
                "state": matrix_to_json(&t.state),
                "vector": vector_to_json(&t.vector),
            })
        })
        .collect();
    json!({
        "dim_in": dec.dim_in,
        "dim_out": dec.dim_out,
        "unitary": matrix_to_json(&dec.u),
        "weights": dec.weights,
        "terms": terms,
        "effects": matrices(&dec.effects),
        "preparations": matrices(&dec.preparations),
        "dropped_mass": dec.dropped_mass,
    })
}

/// JSON form of a dilation, as written by `dilate -o`.
pub fn dilation_json(dil: &DilationResult) -> Value {
    json!({
        "dim_in": dil.dim_in,
        "dim_out": dil.dim_out,
        "block_count": dil.block_count,
        "dilation_dim": dil.dilation_dim,
        "isometry": matrix_to_json(&dil.isometry),
        "preparations": matrices(&dil.preparations),
    })
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_canonical_json(v))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_channel(path: &Path, ch: &Channel) -> Result<()> {
    write_channel_file(path, ch).map_err(|e| match e {
        Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn execute(cmd: &Command, ctx: &mut Context) -> std::result::Result<(Value, bool), Failure> {
    let tol = ctx.tol;
    let seed = ctx.seed;
    match cmd {
        Command::Verify { channel } => {
            ctx.verify_inputs = false;
            let ch = ctx.channel(channel)?;
            let rep = verify_cptp(&ch, &tol);
            let mut payload = to_value(&rep);
            let obj = payload.as_object_mut().expect("report is an object");
            obj.insert("representation".into(), Value::from(ch.representation()));
            obj.insert("dim_in".into(), Value::from(ch.dim_in()));
            obj.insert("dim_out".into(), Value::from(ch.dim_out()));
            Ok((payload, rep.ok))
        }
        Command::RangeComm { channel } => {
            let ch = ctx.channel(channel)?;
            let rep = range_commutativity_test(&ch, &tol);
            Ok((to_value(&rep), rep.commutes))
        }
        Command::Decompose {
            channel,
            weights,
            output,
        } => {
            let ch = ctx.channel(channel)?;
            if let Some(w) = weights {
                check_weights(w, ch.dim_in()).map_err(input)?;
            }
            let dec = decompose_seb(&ch, weights.as_deref(), seed, &tol)?;
            let rep = verify_separable_decomposition(&dec, &ch, &tol)?;
            if let Some(path) = output {
                write_channel(path, &Channel::Holevo(dec.to_holevo()?))?;
            }
            let mut payload = decomposition_json(&dec);
            let obj = payload.as_object_mut().expect("object");
            obj.insert("seed".into(), Value::from(seed));
            obj.insert("verification".into(), to_value(&rep));
            Ok((payload, rep.ok))
        }
        Command::SynthNull { subspace, output } => {
            ctx.digest("subspace", subspace).map_err(input)?;
            let spec = parse_subspace_file(subspace, &tol).map_err(input)?;
            let out = synthesize_channel(&spec, &tol)?;
            let rep = verify_nullspace(&out, &spec, &tol)?;
            if let Some(path) = output {
                write_channel(path, &Channel::Holevo(out.channel.clone()))?;
            }
            let effects: Vec<ComplexMatrix> = out.channel.effects().cloned().collect();
            let payload = json!({
                "dim": spec.dim(),
                "subspace_dim": spec.subspace_dim(),
                "dim_out": out.channel.dim_out(),
                "basis": matrices(&out.effects_basis),
                "effects": matrices(&effects),
                "lambda_min_f1": out.lambda_min_f1,
                "verification": to_value(&rep),
            });
            Ok((payload, rep.ok))
        }
        Command::Dilate { channel, output } => {
            let ch = ctx.channel(channel)?;
            let h = holevo_form(&ch, seed, &tol)?;
            let dil = build_dilation(&h, &tol)?;
            let rep = verify_dilation(&dil, &h, &tol)?;
            let dj = dilation_json(&dil);
            if let Some(path) = output {
                write_json(path, &dj)?;
            }
            let mut payload = dj;
            payload
                .as_object_mut()
                .expect("object")
                .insert("verification".into(), to_value(&rep));
            Ok((payload, rep.ok))
        }
        Command::FixedPoints { channel } => {
            let ch = ctx.channel(channel)?;
            let r1 = rank_one_form(&ch, seed, &tol)?;
            let comm = commutant_projections(&r1, seed, &tol)?;
            let checks = comm
                .projections
                .iter()
                .map(|p| adjoint_fixed_check(&r1, p, &tol))
                .collect::<Result<Vec<_>>>()?;
            let ok = comm.pairwise_comm_residual <= tol.eps_comm
                && checks.iter().all(|c| c.fixed && c.commutes_with_all_kraus);
            let payload = json!({
                "seed": seed,
                "commutant_dim": comm.basis.len(),
                "basis": matrices(&comm.basis),
                "projections": matrices(&comm.projections),
                "pairwise_comm_residual": comm.pairwise_comm_residual,
                "checks": to_value(&checks),
            });
            Ok((payload, ok))
        }
        Command::MultDomain {
            channel,
            projection,
        } => {
            let ch = ctx.channel(channel)?;
            ctx.digest("projection", projection).map_err(input)?;
            let p = parse_projection_file(projection).map_err(input)?;
            if p.rows() != ch.dim_in() {
                return Err(input(Error::DimensionMismatch(format!(
                    "projection is {0}x{0}, channel input dimension is {1}",
                    p.rows(),
                    ch.dim_in()
                ))));
            }
            let r1 = rank_one_form(&ch, seed, &tol)?;
            let rep = multiplicative_projection_check(&r1, &p, &tol)?;
            let mut payload = to_value(&rep);
            if r1.dim_in() == r1.dim_out() {
                let fixed = adjoint_fixed_check(&r1, &p, &tol)?;
                payload
                    .as_object_mut()
                    .expect("object")
                    .insert("fixed_point".into(), to_value(&fixed));
            }
            Ok((payload, rep.in_domain))
        }
        Command::Convert {
            channel,
            to,
            output,
        } => {
            let ch = ctx.channel(channel)?;
            let converted = match to {
                Representation::Kraus => Channel::Kraus(ch.to_kraus(&tol)?),
                Representation::Holevo => Channel::Holevo(holevo_form(&ch, seed, &tol)?),
                Representation::Choi => Channel::Choi(ch.to_choi(None)?),
            };
            let residual = (&ch.superoperator() - &converted.superoperator()).frobenius_norm();
            if let Some(path) = output {
                write_channel(path, &converted)?;
            }
            let payload = json!({
                "from": ch.representation(),
                "to": converted.representation(),
                "action_residual": residual,
                "channel": channel_to_json(&converted),
            });
            Ok((payload, residual <= tol.eps_recon))
        }
    }
}

fn text_lines(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                text_lines(&p, &map[k], out);
            }
        }
        Value::Array(items) if items.iter().any(Value::is_object) => {
            for (i, item) in items.iter().enumerate() {
                text_lines(&format!("{prefix}[{i}]"), item, out);
            }
        }
        Value::Array(items) if items.iter().any(Value::is_array) => {
            out.push(format!("{prefix}: <array of {}>", items.len()));
        }
        Value::String(s) => out.push(format!("{prefix}: {s}")),
        other => out.push(format!("{prefix}: {other}")),
    }
}

fn render(report: &Value, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_canonical_json(report),
        ReportFormat::Text => {
            let mut lines = Vec::new();
            text_lines("", report, &mut lines);
            lines.join("\n") + "\n"
        }
    }
}

/// Runs one invocation in process. `args` excludes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("sebkit")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let started = Instant::now();
    let tol = match tolerances(&cli.global) {
        Ok(t) => t,
        Err(e) => {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let mut ctx = Context {
        tol,
        seed: cli.global.seed,
        verify_inputs: !cli.global.no_verify,
        inputs: Map::new(),
    };
    let (payload, ok, code, stderr) = match execute(&cli.command, &mut ctx) {
        Ok((payload, ok)) => (payload, ok, if ok { 0 } else { 1 }, String::new()),
        Err(f) => {
            let msg = format!("error: {}\n", f.error);
            (error_json(&f.error), false, f.code, msg)
        }
    };
    let runtime_ms = if cli.global.timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    let report = json!({
        "command": cli.command.name(),
        "inputs": Value::Object(ctx.inputs),
        "tolerances": to_value(&ctx.tol),
        "payload": payload,
        "ok": ok,
        "runtime_ms": runtime_ms,
    });
    Outcome {
        code,
        stdout: render(&report, cli.global.report),
        stderr,
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let out = run(std::env::args_os().skip(1));
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}
