//! Argument parsing and command dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use sparse_diffres::bounds::{bezout_block, degree_bound, deleted_row_jacobi, order_bounds, BoundsError, OrderMatrix};
use sparse_diffres::diffpoly::parse_poly;
use sparse_diffres::essential::{is_essential, rank_essential_subset, Certainty, Mode, DEFAULT_SELECTION_BUDGET};
use sparse_diffres::linalg::Backend;
use sparse_diffres::resultant::{dresultant, sdresultant, Method, ResultantError, ResultantOptions, ResultantOutcome, DEFAULT_BUDGET};
use sparse_diffres::support::{rdm, upoly_to_string, SupportMatrix};
use sparse_diffres::verify::{
    homogeneity_check, membership_check, recover_solution, span_check, specialized_residuals, Series, SeriesPoint, DEFAULT_TRIALS, DEFAULT_TRUNCATION,
};
use sparse_diffres::{DiffIndex, DiffPoly, DiffSystem, Monomial};

use crate::document::{self as doc, ResultDocument, Status};
use crate::format::{is_system_file, parse_order_matrix, parse_system, ParseError, SystemFile};

pub const DEFAULT_SEED: u64 = 0x5d_5e5d;

#[derive(Debug, Parser)]
#[command(name = "sdres", version, about = "Sparse differential resultants of Laurent differential systems")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce the support matrix of a `mons:` list to T-shape.
    Tshape { file: PathBuf },
    /// Differential transcendence degree of a `mons:` list.
    Dtrdeg { file: PathBuf },
    /// Decide Laurent differential essentiality.
    Essential {
        file: PathBuf,
        #[command(flatten)]
        ess: EssentialArgs,
    },
    /// The rank-essential subset of an essential system.
    RankEssential { file: PathBuf },
    /// Jacobi numbers of an order matrix with each row deleted.
    Jacobi { file: PathBuf },
    /// Order and degree bounds for the resultant.
    Bounds { file: PathBuf },
    /// Sparse differential resultant with its certificate.
    Resultant(ResultantArgs),
    /// Resultant at the dense orders `s − s_i`.
    Dresultant(ResultantArgs),
    /// Check a candidate resultant by series membership and homogeneity.
    Verify {
        file: PathBuf,
        /// The polynomial, or `@path` to read it from a file.
        #[arg(long)]
        sr: String,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Recover the solution of a specialized system from its coefficient series.
    Recover {
        file: PathBuf,
        /// The resultant; computed when omitted.
        #[arg(long)]
        sr: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EssentialArgs {
    /// Decide by exhausting monomial selections instead of random evaluation.
    #[arg(long)]
    pub certify: bool,
    #[arg(long, default_value_t = DEFAULT_SELECTION_BUDGET)]
    pub selection_budget: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Series truncation `K`.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    pub truncation: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Substitution,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Modular,
    FractionFree,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Cap on the summed orders `Σ h_i`.
    #[arg(long)]
    pub max_order: Option<u32>,
    #[arg(long)]
    pub max_degree: Option<u64>,
    /// First cofactor degree tried by the joint method.
    #[arg(long, default_value_t = 0)]
    pub cofactor_start: i64,
    /// Largest number of unknowns in one linear system.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Substitution)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = BackendArg::Modular)]
    pub backend: BackendArg,
    /// Solve every component exactly, without the modular filters.
    #[arg(long)]
    pub no_filters: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ResultantArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Run membership and homogeneity checks on the result.
    #[arg(long)]
    pub verify: bool,
    /// Include the cofactors of the certificate in the output.
    #[arg(long)]
    pub cofactors: bool,
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{}:{}: {}", .source.line, .source.col, .source.msg)]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// A command's answer before it is wrapped into a document.
struct Answer {
    status: Status,
    output: Value,
    warnings: Vec<String>,
}

impl Answer {
    fn ok(output: Value) -> Self {
        Answer { status: Status::Ok, output, warnings: Vec::new() }
    }

    fn refused(reason: impl std::fmt::Display) -> Self {
        Answer { status: Status::Refused, output: json!({ "reason": reason.to_string() }), warnings: Vec::new() }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Tshape { .. } => "tshape",
        Command::Dtrdeg { .. } => "dtrdeg",
        Command::Essential { .. } => "essential",
        Command::RankEssential { .. } => "rank-essential",
        Command::Jacobi { .. } => "jacobi",
        Command::Bounds { .. } => "bounds",
        Command::Resultant(_) => "resultant",
        Command::Dresultant(_) => "dresultant",
        Command::Verify { .. } => "verify",
        Command::Recover { .. } => "recover",
    }
}

struct Input {
    path: String,
    text: String,
}

impl Input {
    fn read(path: &PathBuf) -> Result<Self, CliError> {
        let p = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: p.clone(), source })?;
        Ok(Input { path: p, text })
    }

    fn parse(&self) -> Result<SystemFile, CliError> {
        parse_system(&self.text).map_err(|source| CliError::Parse { path: self.path.clone(), source })
    }

    fn system(&self) -> Result<DiffSystem, CliError> {
        self.parse()?.system.ok_or_else(|| CliError::Usage(format!("{}: no polynomials P0..Pn given", self.path)))
    }

    fn monomials(&self) -> Result<(usize, Vec<Monomial>), CliError> {
        let f = self.parse()?;
        match f.mons {
            Some(m) => Ok((f.n, m)),
            None => Err(CliError::Usage(format!("{}: no `mons:` list given", self.path))),
        }
    }
}

fn read_sr(arg: &str) -> Result<(DiffPoly, String), CliError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?,
        None => arg.to_string(),
    };
    let p = parse_poly(text.trim()).map_err(|e| CliError::Usage(format!("--sr: {e}")))?;
    Ok((p, text))
}

/// Runs a parsed command line; the exit code is 0 for answers and 2 for refusals.
pub fn run(cli: &Cli) -> Result<(ResultDocument, i32), CliError> {
    let go = || run_inner(cli);
    if cli.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build().map_err(|e| CliError::Usage(e.to_string()))?;
        pool.install(go)
    } else {
        go()
    }
}

fn run_inner(cli: &Cli) -> Result<(ResultDocument, i32), CliError> {
    let start = Instant::now();
    let (digest, answer) = dispatch(cli)?;
    let code = if answer.status == Status::Ok { 0 } else { 2 };
    let document = ResultDocument {
        command: command_name(&cli.command).into(),
        version: doc::VERSION.into(),
        seed: cli.seed,
        inputs_digest: digest,
        timing_ms: start.elapsed().as_millis(),
        status: answer.status,
        output: answer.output,
        warnings: answer.warnings,
    };
    Ok((document, code))
}

/// Parses `args`, runs, and renders; returns the exit code and the text for stdout or stderr.
pub fn run_args<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (code, e.to_string());
        }
    };
    match run(&cli) {
        Ok((d, code)) => {
            let text = match cli.format {
                OutputFormat::Json => d.to_json() + "\n",
                OutputFormat::Text => d.to_text(),
            };
            (code, text)
        }
        Err(e) => (e.exit_code(), format!("error: {e}\n")),
    }
}

fn flags_of(cli: &Cli) -> String {
    // The subcommand's debug form, minus the file path, names every flag.
    let mut s = format!("{:?}", cli.command);
    if let Some(start) = s.find("file: \"") {
        if let Some(len) = s[start + 7..].find('"') {
            s.replace_range(start..start + 8 + len, "file");
        }
    }
    s
}

fn dispatch(cli: &Cli) -> Result<(String, Answer), CliError> {
    let seed = cli.seed;
    let flags = flags_of(cli);
    let digest_of = |input: &Input, extra: &[u8]| doc::digest(&[("input", input.text.as_bytes()), ("flags", flags.as_bytes()), ("sr", extra)]);
    Ok(match &cli.command {
        Command::Tshape { file } => {
            let input = Input::read(file)?;
            let (n, mons) = input.monomials()?;
            (digest_of(&input, b""), tshape(&mons, n))
        }
        Command::Dtrdeg { file } => {
            let input = Input::read(file)?;
            let (n, mons) = input.monomials()?;
            let ans = match SupportMatrix::from_monomials(&mons, n).and_then(|m| rdm(&m)) {
                Ok(t) => Answer::ok(json!({ "dtrdeg": t.rank(), "index": [t.index.0, t.index.1] })),
                Err(e) => Answer::refused(e),
            };
            (digest_of(&input, b""), ans)
        }
        Command::Essential { file, ess } => {
            let input = Input::read(file)?;
            let sys = input.system()?;
            (digest_of(&input, b""), essential(&sys, ess))
        }
        Command::RankEssential { file } => {
            let input = Input::read(file)?;
            let sys = input.system()?;
            let ans = match rank_essential_subset(&sys) {
                Ok(r) => Answer::ok(json!({ "subset": r.subset, "certified": r.certified })),
                Err(e) => Answer::refused(e),
            };
            (digest_of(&input, b""), ans)
        }
        Command::Jacobi { file } => {
            let input = Input::read(file)?;
            let rows = if is_system_file(&input.text) {
                OrderMatrix::from_system(&input.system()?).entries
            } else {
                parse_order_matrix(&input.text).map_err(|source| CliError::Parse { path: input.path.clone(), source })?
            };
            if rows.len() < 2 || rows.iter().any(|r| r.len() + 1 != rows.len()) {
                return Err(CliError::Usage(format!("{}: expected an (n+1) x n order matrix", input.path)));
            }
            let jac = deleted_row_jacobi(&OrderMatrix { entries: rows.clone() });
            let matrix: Vec<Value> = rows.iter().map(|r| doc::ext_orders(r)).collect();
            (digest_of(&input, b""), Answer::ok(json!({ "matrix": matrix, "J": doc::ext_orders(&jac) })))
        }
        Command::Bounds { file } => {
            let input = Input::read(file)?;
            let sys = input.system()?;
            (digest_of(&input, b""), bounds(&sys))
        }
        Command::Resultant(args) | Command::Dresultant(args) => {
            let input = Input::read(&args.file)?;
            let sys = input.system()?;
            let dense = matches!(cli.command, Command::Dresultant(_));
            (digest_of(&input, b""), resultant(&sys, args, dense, seed))
        }
        Command::Verify { file, sr, check } => {
            let input = Input::read(file)?;
            let sys = input.system()?;
            let (p, raw) = read_sr(sr)?;
            (digest_of(&input, raw.as_bytes()), verify(&p, &sys, check, seed))
        }
        Command::Recover { file, sr, search } => {
            let input = Input::read(file)?;
            let sys = input.system()?;
            let (p, raw) = match sr {
                Some(s) => {
                    let (p, raw) = read_sr(s)?;
                    (Some(p), raw)
                }
                None => (None, String::new()),
            };
            let coeffs = coefficient_point(&sys, &input.path)?;
            (digest_of(&input, raw.as_bytes()), recover(&sys, p, &coeffs, search, seed))
        }
    })
}

fn tshape(mons: &[Monomial], n: usize) -> Answer {
    let m = match SupportMatrix::from_monomials(mons, n) {
        Ok(m) => m,
        Err(e) => return Answer::refused(e),
    };
    match rdm(&m) {
        Ok(t) => {
            let cols = t.matrix.column_vars().to_vec();
            let rows: Vec<Value> = t
                .matrix
                .entries()
                .iter()
                .map(|r| Value::Array(r.iter().zip(&cols).map(|(e, j)| Value::String(upoly_to_string(e, *j))).collect()))
                .collect();
            Answer::ok(json!({
                "index": [t.index.0, t.index.1],
                "rank": t.rank(),
                "columns": cols.iter().map(|j| format!("y{j}")).collect::<Vec<_>>(),
                "matrix": rows,
                "operations": t.trace.len(),
            }))
        }
        Err(e) => Answer::refused(e),
    }
}

fn essential(sys: &DiffSystem, ess: &EssentialArgs) -> Answer {
    let mode = if ess.certify { Mode::Certified { budget: ess.selection_budget } } else { Mode::default() };
    match is_essential(sys, mode) {
        Ok(r) => Answer::ok(json!({
            "essential": r.essential,
            "rank": r.rank,
            "mode": match r.mode { Certainty::Certified => "certified", Certainty::Randomized => "randomized" },
            "witness": r.witness,
        })),
        Err(e) => Answer::refused(e),
    }
}

fn bounds(sys: &DiffSystem) -> Answer {
    let rep = match order_bounds(sys) {
        Ok(r) => r,
        Err(e @ (BoundsError::NotEssential | BoundsError::Essential(_))) => return Answer::refused(e),
    };
    let h: Vec<Option<u32>> = rep.bound.iter().map(|b| b.map(|x| x.max(0) as u32)).collect();
    let bezout: Vec<Value> = bezout_block(sys).into_iter().map(|b| b.map_or(Value::Null, |x| Value::String(x.to_string()))).collect();
    Answer::ok(json!({
        "order_matrix": rep.order_matrix.entries.iter().map(|r| doc::ext_orders(r)).collect::<Vec<_>>(),
        "jacobi": doc::ext_orders(&rep.jacobi),
        "gamma": rep.gamma,
        "modified": doc::ext_orders(&rep.modified),
        "l_bounds": doc::ext_orders(&rep.alt_l),
        "e_bounds": doc::ext_orders(&rep.alt_e),
        "rank_essential": rep.rank_essential,
        "refined": rep.refined.as_deref().map(doc::ext_orders),
        "order_bound": doc::ext_orders(&rep.bound),
        "degree_bound": degree_bound(sys, &h).to_string(),
        "block_degree_bound": bezout,
    }))
}

fn options(search: &SearchArgs, seed: u64) -> ResultantOptions {
    ResultantOptions {
        max_order: search.max_order,
        max_degree: search.max_degree,
        cofactor_start: search.cofactor_start,
        budget: search.budget,
        backend: match search.backend {
            BackendArg::Modular => Backend::Modular,
            BackendArg::FractionFree => Backend::FractionFree,
        },
        method: match search.method {
            MethodArg::Substitution => Method::Substitution,
            MethodArg::Joint => Method::Joint,
        },
        seed,
        jacobian_filter: !search.no_filters,
        modular_prefilter: !search.no_filters,
    }
}

fn compute(sys: &DiffSystem, search: &SearchArgs, dense: bool, seed: u64) -> Result<ResultantOutcome, ResultantError> {
    let opts = options(search, seed);
    if dense {
        dresultant(sys, &opts)
    } else {
        sdresultant(sys, &opts)
    }
}

fn resultant(sys: &DiffSystem, args: &ResultantArgs, dense: bool, seed: u64) -> Answer {
    let out = match compute(sys, &args.search, dense, seed) {
        Ok(o) => o,
        Err(e) => return resultant_refusal(e),
    };
    let c = &out.certificate;
    let mut cert = Map::new();
    cert.insert("sr".into(), doc::poly(&c.sr));
    cert.insert("orders".into(), doc::orders(&c.h));
    cert.insert("degree".into(), json!(c.d));
    cert.insert("degree_bound".into(), json!(degree_bound(sys, &c.h).to_string()));
    cert.insert("subset".into(), json!(c.subset));
    cert.insert("multiplier".into(), doc::monomial(&c.multiplier));
    cert.insert("identity_verified".into(), json!(true));
    if args.cofactors {
        let cof: Vec<Value> = c.cofactors.iter().map(|((i, j), p)| json!({ "i": i, "j": j, "cofactor": doc::poly(p) })).collect();
        cert.insert("cofactors".into(), Value::Array(cof));
    }
    let s = &out.stats;
    let mut output = json!({
        "certificate": Value::Object(cert),
        "stats": {
            "orders_tried": s.orders_tried,
            "jacobian_skips": s.jacobian_skips,
            "degrees_tried": s.degrees_tried,
            "components": s.components,
            "prefiltered": s.prefiltered,
            "exact_solves": s.exact_solves,
            "max_unknowns": s.max_unknowns,
        },
    });
    let mut ans = Answer::ok(Value::Null);
    if args.verify {
        let v = verify(&c.sr, sys, &args.check, seed);
        output["verification"] = v.output;
        ans.status = v.status;
    }
    ans.output = output;
    ans.warnings = out.warnings;
    ans
}

fn resultant_refusal(e: ResultantError) -> Answer {
    let mut a = Answer::refused(&e);
    if let ResultantError::BudgetExceeded { needed, budget } = e {
        a.output["needed"] = json!(needed.to_string());
        a.output["budget"] = json!(budget);
    }
    a
}

fn verify(sr: &DiffPoly, sys: &DiffSystem, check: &CheckArgs, seed: u64) -> Answer {
    let membership = match membership_check(sr, sys, check.truncation, check.trials, seed) {
        Ok(m) => m,
        Err(e) => return Answer::refused(e),
    };
    let blocks: Vec<usize> = (0..sys.num_polys()).filter(|&i| sr.order_in_block(i as u32).is_some()).collect();
    let homog: Vec<Value> = blocks
        .iter()
        .map(|&i| {
            let r = homogeneity_check(sr, i);
            json!({ "block": r.block, "degree": r.degree, "passed": r.passed })
        })
        .collect();
    let homog_ok = homog.iter().all(|h| h["passed"] == json!(true));
    let trials: Vec<Value> = membership.trials.iter().map(|t| json!({ "seed": t.seed, "first_nonzero": t.first_nonzero })).collect();
    let output = json!({
        "membership": { "passed": membership.passed, "truncation": check.truncation, "precision": membership.precision, "trials": trials },
        "homogeneity": { "passed": homog_ok, "blocks": homog },
        "passed": membership.passed && homog_ok,
    });
    Answer { status: if membership.passed && homog_ok { Status::Ok } else { Status::Refused }, output, warnings: Vec::new() }
}

/// Series values of every coefficient `u_{ik}`, from the file's assignments.
fn coefficient_point(sys: &DiffSystem, path: &str) -> Result<SeriesPoint, CliError> {
    let mut pt = SeriesPoint::new();
    for i in 0..sys.num_polys() {
        for k in 0..sys.support(i).len() {
            let v = sys.values().get(&(i, k)).ok_or_else(|| CliError::Usage(format!("{path}: recover needs a value for u{i}_{k}")))?;
            pt.set(DiffIndex::U { i: i as u32, k: k as u32 }, Series::new(v.clone()));
        }
    }
    Ok(pt)
}

fn recover(sys: &DiffSystem, sr: Option<DiffPoly>, coeffs: &SeriesPoint, search: &SearchArgs, seed: u64) -> Answer {
    let spans: Vec<Value> = span_check(sys)
        .iter()
        .map(|s| {
            let w = s.witness.as_ref().map(|w| w.iter().map(|((i, k), t)| json!({ "i": i, "k": k, "t": t.to_string() })).collect::<Vec<_>>());
            json!({ "j": s.j, "in_span": s.in_span, "witness": w })
        })
        .collect();
    let (sr, warnings) = match sr {
        Some(p) => (p, Vec::new()),
        None => match compute(sys, search, false, seed) {
            Ok(o) => (o.certificate.sr, o.warnings),
            Err(e) => return resultant_refusal(e),
        },
    };
    let rec = match recover_solution(&sr, sys, coeffs) {
        Ok(r) => r,
        Err(e) => {
            let mut a = Answer::refused(e);
            a.output["span"] = Value::Array(spans);
            return a;
        }
    };
    let y: Vec<Series> = rec.y.iter().map(|s| s.truncate(rec.precision)).collect();
    let residuals = match specialized_residuals(sys, coeffs, &y) {
        Ok(r) => r,
        Err(e) => return Answer::refused(e),
    };
    let zero = residuals.iter().all(|r| r.valuation().is_none());
    let output = json!({
        "sr": doc::poly(&sr),
        "span": spans,
        "precision": rec.precision,
        "y": y.iter().map(doc::series).collect::<Vec<_>>(),
        "ratios": rec.ratios.iter().map(|s| doc::series(&s.truncate(rec.precision))).collect::<Vec<_>>(),
        "residuals": residuals.iter().map(doc::series).collect::<Vec<_>>(),
        "residuals_vanish": zero,
    });
    Answer { status: if zero { Status::Ok } else { Status::Refused }, output, warnings }
}
