use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use triagg_core::analysis::{self, SearchFamily};
use triagg_core::engine::{decomposed_multiply, recursive_multiply_counted};
use triagg_core::generator::{self, Generated};
use triagg_core::io::{self, AnyAlgorithm};
use triagg_core::ops;
use triagg_core::verifier::{self, MultiplyDomain, VerifyMode};
use triagg_core::{
    BilinearAlgorithm, Domain, Error, FloatDomain, Matrix, PrimeDomain, PrimeField, RationalDomain,
};

const THREADS_ENV: &str = "TRIAGG_THREADS";

#[derive(Parser)]
#[command(name = "triagg", version, about = "Trilinear-aggregation matrix multiplication algorithms")]
struct Cli {
    /// Worker threads; defaults to $TRIAGG_THREADS, then to the core count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an algorithm file.
    Gen(GenArgs),
    /// Check that an algorithm multiplies matrices.
    Verify(VerifyArgs),
    /// Ranks, exponents and complexity statistics.
    Analyze(AnalyzeArgs),
    /// Tensor product of two algorithms (A outer, B inner).
    Compose { a: PathBuf, b: PathBuf, #[arg(short, long)] out: Option<PathBuf> },
    /// Cyclic rotation of the roles of the three matrices.
    Rotate { input: PathBuf, #[arg(short, long)] out: Option<PathBuf> },
    /// Composition of the three rotations.
    Symmetrize { input: PathBuf, #[arg(short, long)] out: Option<PathBuf> },
    /// Merge disjoint kin rows.
    MergeKin(MergeArgs),
    /// Multiply two matrices recursively.
    Multiply(MultiplyArgs),
    /// Rewrite an algorithm file in canonical form.
    Export {
        input: PathBuf,
        /// Multiply out a decomposed algorithm.
        #[arg(long)]
        expand: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Validate an algorithm file and print a summary.
    Import { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Pan,
    New25,
    New25b,
    Decomposed,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: GenFamily,
    /// Base size (single-step base for new25b).
    #[arg(long)]
    n0: usize,
    /// Verified 4x4x4 algorithm recomputing each pair of cancellation cells (new25b).
    #[arg(long)]
    subst: Option<PathBuf>,
    /// Build the full two-step algorithm instead of its rank report (new25b, small bases only).
    #[arg(long)]
    materialize: bool,
    /// Precursor of the decomposed family.
    #[arg(long, value_enum, default_value = "new25")]
    of: DecomposedOf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecomposedOf {
    Pan,
    New25,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Brent,
    Random,
    Multiply,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckDomain {
    Rational,
    Prime,
}

#[derive(Args)]
struct VerifyArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    mode: Mode,
    #[arg(long, default_value_t = verifier::DEFAULT_TRIALS)]
    trials: u32,
    #[arg(long, default_value_t = verifier::DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random operand pairs for multiply mode.
    #[arg(long, default_value_t = 2)]
    samples: u32,
    #[arg(long, default_value_t = 1)]
    levels: u32,
    #[arg(long, value_enum, default_value = "rational")]
    domain: CheckDomain,
    /// Cap on accumulated terms for exact and Brent modes.
    #[arg(long, default_value_t = verifier::DEFAULT_BUDGET)]
    budget: u128,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the algorithm with its new certificate here.
    #[arg(long)]
    certify: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    T1,
    T2,
    T4,
    Search,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Algorithm to analyze; without it the summary tables are printed.
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    table: Vec<Table>,
    /// Bases for the sparse-decomposition table.
    #[arg(long, value_delimiter = ',', default_values_t = [20, 30, 40, 42, 44, 46, 48, 50, 60])]
    n0: Vec<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MergeArgs {
    input: PathBuf,
    /// Only merge diagonal second-table products with their trace rows.
    #[arg(long)]
    targeted: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecDomain {
    Rational,
    Prime,
    Float,
}

#[derive(Args)]
struct MultiplyArgs {
    #[arg(long)]
    alg: PathBuf,
    /// Left operand, dense text (one row per line).
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 1)]
    levels: u32,
    /// Bottom levels done by schoolbook multiplication.
    #[arg(long, default_value_t = 0)]
    base_levels: u32,
    #[arg(long, value_enum, default_value = "rational")]
    domain: ExecDomain,
    #[arg(long, default_value_t = verifier::DEFAULT_PRIME)]
    prime: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Write the operation counts here instead of stderr.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Core(Error),
    Verification(serde_json::Value),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn exit_code(category: &str) -> u8 {
    match category {
        "usage" => 2,
        "verification" => 3,
        "format" => 4,
        "io" => 5,
        "budget" => 6,
        "prime" => 7,
        "dimension" | "degenerate" | "singular" | "kin" | "substitution" => 8,
        _ => 1,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn read(path: &Path) -> Result<AnyAlgorithm, Failure> {
    Ok(io::read(path)?)
}

fn read_bilinear(path: &Path) -> Result<BilinearAlgorithm, Failure> {
    Ok(read(path)?.into_bilinear()?)
}

fn write_bilinear(out: Option<&Path>, alg: BilinearAlgorithm) -> Outcome {
    emit(out, &io::to_json(&alg))
}

fn summary(alg: &AnyAlgorithm) -> serde_json::Value {
    match alg {
        AnyAlgorithm::Bilinear(a) => json!({
            "kind": "bilinear",
            "dims": a.dims(),
            "t": a.t(),
            "certificate": a.certificate(),
        }),
        AnyAlgorithm::Decomposed(d) => json!({
            "kind": "decomposed",
            "dims": d.dims(),
            "t": d.t(),
            "s0": d.s0(),
            "certificate": d.certificate(),
        }),
    }
}

fn gen(args: GenArgs) -> Outcome {
    let out = args.out.as_deref();
    if args.subst.is_some() && !matches!(args.family, GenFamily::New25b) {
        return Err(Failure::Usage("--subst only applies to new25b".into()));
    }
    let info = |g: &Generated| eprintln!("{}", json!({"n0": args.n0, "t": g.t()}));
    match args.family {
        GenFamily::Pan | GenFamily::New25 => {
            let g = if matches!(args.family, GenFamily::Pan) {
                generator::gen_pan_decomposed(args.n0)?
            } else {
                generator::gen_new25_decomposed(args.n0)?
            };
            info(&g);
            write_bilinear(out, g.to_full()?)
        }
        GenFamily::Decomposed => {
            let g = match args.of {
                DecomposedOf::Pan => generator::gen_pan_decomposed(args.n0)?,
                DecomposedOf::New25 => generator::gen_new25_decomposed(args.n0)?,
            };
            info(&g);
            emit(out, &io::decomposed_to_json(&g.decomposed))
        }
        GenFamily::New25b => {
            let rep = args.subst.as_deref().map(read_bilinear).transpose()?;
            let b = generator::gen_new25b(args.n0, rep)?;
            if args.materialize {
                eprintln!("{}", serde_json::to_string(&b.report()).expect("serializable"));
                write_bilinear(out, b.materialize()?)
            } else {
                emit(out, &to_json(&b.report()))
            }
        }
    }
}

fn verify(args: VerifyArgs) -> Outcome {
    let mode = match args.mode {
        Mode::Exact => VerifyMode::Exact { budget: args.budget },
        Mode::Brent => VerifyMode::Brent { budget: args.budget },
        Mode::Random => VerifyMode::Random {
            trials: args.trials,
            prime: args.prime,
            seed: args.seed,
        },
        Mode::Multiply => VerifyMode::Multiply {
            samples: args.samples,
            levels: args.levels,
            domain: match args.domain {
                CheckDomain::Rational => MultiplyDomain::Rational,
                CheckDomain::Prime => MultiplyDomain::Prime { p: args.prime },
            },
            seed: args.seed,
        },
    };
    let (report, certified) = match (read(&args.input)?, &mode) {
        (AnyAlgorithm::Decomposed(mut d), VerifyMode::Random { trials, prime, seed }) => {
            let report = verifier::run_scheme(&d, &mode)?;
            if report.result {
                verifier::certify_decomposed(&mut d, *trials, *prime, *seed)?;
            }
            (report, AnyAlgorithm::Decomposed(d))
        }
        (any, _) => {
            let mut alg = any.into_bilinear()?;
            let report = verifier::certify(&mut alg, &mode)?;
            (report, AnyAlgorithm::Bilinear(alg))
        }
    };
    let text = to_json(&report);
    emit(args.report.as_deref(), &text)?;
    if !report.result {
        return Err(Failure::Verification(serde_json::to_value(&report).expect("serializable")));
    }
    if let Some(p) = &args.certify {
        io::write(p, &certified)?;
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Outcome {
    if let Some(path) = &args.input {
        let value = match read(path)? {
            AnyAlgorithm::Bilinear(a) => {
                let d = a.dims();
                let exponent = (d.m == d.n && d.n == d.p && d.m > 1).then(|| analysis::exponent(d.m as u128, a.t() as u128));
                json!({
                    "dims": d,
                    "t": a.t(),
                    "exponent": exponent,
                    "stats": analysis::stats(&a),
                })
            }
            AnyAlgorithm::Decomposed(d) => {
                let lc = analysis::leading_coefficient(&d)?;
                json!({
                    "dims": d.dims(),
                    "t": d.t(),
                    "s0": d.s0(),
                    "exponent": analysis::exponent(d.n0() as u128, d.t() as u128),
                    "stats": analysis::decomposed_stats(&d),
                    "leading_coefficient": lc.to_f64(),
                    "leading_coefficient_exact": lc.to_string(),
                    "operations_one_level": analysis::additive_complexity(&d, d.n0() as u128)?.to_string(),
                })
            }
        };
        return emit(None, &to_json(&value));
    }
    let tables = if args.table.is_empty() {
        vec![Table::T1, Table::T2, Table::Search]
    } else {
        args.table
    };
    let mut texts = Vec::new();
    let mut values = serde_json::Map::new();
    for t in tables {
        match t {
            Table::T1 => {
                let rows = analysis::table1();
                texts.push(analysis::render_table1(&rows));
                values.insert("table1".into(), serde_json::to_value(rows).expect("serializable"));
            }
            Table::T2 => {
                let rows = analysis::table2();
                texts.push(analysis::render_table2(&rows));
                values.insert("table2".into(), serde_json::to_value(rows).expect("serializable"));
            }
            Table::T4 => {
                let rows = args
                    .n0
                    .iter()
                    .map(|&n0| analysis::table4_row(&generator::gen_new25_decomposed(n0)?.decomposed))
                    .collect::<Result<Vec<_>, Error>>()?;
                texts.push(analysis::render_table4(&rows));
                values.insert("table4".into(), serde_json::to_value(rows).expect("serializable"));
            }
            Table::Search => {
                let found = [SearchFamily::New25, SearchFamily::New25b].map(analysis::optimal_base);
                let mut s = String::from("family\tn0\trank\texponent\ttail_bound\n");
                for f in &found {
                    s.push_str(&format!(
                        "{:?}\t{}\t{}\t{:.6}\t{:.6}\n",
                        f.family, f.n0, f.rank, f.exponent, f.tail_bound
                    ));
                }
                texts.push(s);
                values.insert("search".into(), serde_json::to_value(found).expect("serializable"));
            }
        }
    }
    if args.json {
        emit(None, &to_json(&values))
    } else {
        emit(None, texts.join("\n").trim_end())
    }
}

fn merge(args: MergeArgs) -> Outcome {
    let alg = read_bilinear(&args.input)?;
    let merged = if args.targeted {
        generator::merge_targeted(&alg)?
    } else {
        ops::merge_kin(&alg, &ops::find_kin_pairs(&alg))?
    };
    eprintln!("{}", json!({"before": alg.t(), "after": merged.t()}));
    write_bilinear(args.out.as_deref(), merged)
}

fn load_operand<D: Domain>(d: &D, path: &Path) -> Result<Matrix<D::Elem>, Failure> {
    let m = io::parse_dense(&std::fs::read_to_string(path)?)?;
    Ok(m.try_map(|x| d.from_rational(x))?)
}

fn run_multiply<D: Domain>(d: &D, args: &MultiplyArgs) -> Outcome
where
    D::Elem: Display,
{
    let a = load_operand(d, &args.a)?;
    let b = load_operand(d, &args.b)?;
    let (c, count, path) = match read(&args.alg)? {
        AnyAlgorithm::Decomposed(dec) if args.base_levels == 0 => {
            let (c, k) = decomposed_multiply(d, &dec, &a, &b, args.levels)?;
            (c, k, "decomposed")
        }
        any => {
            let alg = any.into_bilinear()?;
            let (c, k) = recursive_multiply_counted(d, &alg, &a, &b, args.levels, args.base_levels)?;
            (c, k, "plain")
        }
    };
    emit(args.out.as_deref(), io::render_dense(&c).trim_end())?;
    let report = to_json(&json!({
        "domain": d.name(),
        "levels": args.levels,
        "path": path,
        "operations": count,
    }));
    match &args.report {
        Some(p) => std::fs::write(p, report)?,
        None => eprintln!("{report}"),
    }
    Ok(())
}

fn multiply(args: MultiplyArgs) -> Outcome {
    match args.domain {
        ExecDomain::Rational => run_multiply(&RationalDomain, &args),
        ExecDomain::Prime => run_multiply(&PrimeDomain(PrimeField::new(args.prime)?), &args),
        ExecDomain::Float => run_multiply(&FloatDomain, &args),
    }
}

fn run(cli: Cli) -> Outcome {
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.parse()
                    .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify(a),
        Command::Analyze(a) => analyze(a),
        Command::Compose { a, b, out } => {
            let (a, b) = (read_bilinear(&a)?, read_bilinear(&b)?);
            write_bilinear(out.as_deref(), ops::compose(&a, &b))
        }
        Command::Rotate { input, out } => write_bilinear(out.as_deref(), ops::rotate(&read_bilinear(&input)?)),
        Command::Symmetrize { input, out } => {
            write_bilinear(out.as_deref(), ops::symmetrize(&read_bilinear(&input)?))
        }
        Command::MergeKin(a) => merge(a),
        Command::Multiply(a) => multiply(a),
        Command::Export { input, expand, out } => {
            let alg = read(&input)?;
            let alg = if expand {
                AnyAlgorithm::Bilinear(alg.into_bilinear()?)
            } else {
                alg
            };
            emit(out.as_deref(), &alg.to_json())
        }
        Command::Import { input } => emit(None, &to_json(&summary(&read(&input)?))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", json!({"error": {"category": "usage", "message": msg.trim()}}));
            return ExitCode::from(exit_code("usage"));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (category, body) = match f {
                Failure::Core(e) => (e.category(), json!({"category": e.category(), "message": e.to_string()})),
                Failure::Verification(report) => (
                    "verification",
                    json!({"category": "verification", "message": "algorithm failed verification", "report": report}),
                ),
                Failure::Usage(m) => ("usage", json!({"category": "usage", "message": m})),
            };
            eprintln!("{}", json!({ "error": body }));
            ExitCode::from(exit_code(category))
        }
    }
}
