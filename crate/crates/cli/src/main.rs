//! Command-line front end: every report the library produces, as one-line
//! JSON (machine) or aligned text (`--pretty`), with a stable exit-status
//! taxonomy: argument errors exit 1, capacity errors 2, integrity errors 3.

use cantor_perm::finsets::{count_ample_power2, CountMethod};
use cantor_perm::gsets::{eqrel_classify, x_product_decompose, FormalGSet, GMap};
use cantor_perm::linmon::{find_trace_witness, semisimplicity_report, SemiringKind};
use cantor_perm::measures::{eval_measure, solve_regular_parameters, Measure};
use cantor_perm::permcat::{compose, trace, ComposeMode, PermMatrix, TraceMode};
use cantor_perm::selftest::{self, Level};
use cantor_perm::{rat_string, set_enum_budget_bits, Error, Result, BUDGET_ENV_VAR};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "cantor-perm",
    version,
    about = "Exact orbit counts, measures, matrix categories, and monoid algebras \
             over finite quotients of the Cantor space"
)]
struct Cli {
    /// Render aligned text instead of one-line JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Orbit counts on squares of the basic transitive sets.
    Ample {
        #[command(subcommand)]
        cmd: AmpleCmd,
    },
    /// Decompositions of fiber products into transitive pieces.
    Decompose {
        #[command(subcommand)]
        cmd: DecomposeCmd,
    },
    /// Evaluate or pin down the two regular measures.
    Measure {
        #[command(subcommand)]
        cmd: MeasureCmd,
    },
    /// Operate on matrices of the measured categories.
    Perm {
        #[command(subcommand)]
        cmd: PermCmd,
    },
    /// Contracted monoid-algebra structure reports.
    Alg {
        #[command(subcommand)]
        cmd: AlgCmd,
    },
    /// Validate a relation family and identify its permutation quotient.
    Classify(ClassifyArgs),
    /// Replay the claim battery end to end.
    Selftest(SelftestArgs),
}

#[derive(Subcommand)]
enum AmpleCmd {
    /// Count subsets of [n] x [n] that project onto both factors.
    Count(AmpleCountArgs),
}

#[derive(Args)]
struct AmpleCountArgs {
    /// Side of the square.
    #[arg(long)]
    n: u32,
    /// enum walks all subsets; ie uses the inclusion–exclusion closed form.
    #[arg(long, value_enum, default_value_t = MethodArg::Enum)]
    method: MethodArg,
}

#[derive(ValueEnum, Clone, Copy)]
enum MethodArg {
    Enum,
    Ie,
}

#[derive(Subcommand)]
enum DecomposeCmd {
    /// Decompose the fiber product of two surjections with a common codomain.
    Product(DecomposeProductArgs),
}

#[derive(Args)]
struct DecomposeProductArgs {
    /// Left surjection as a comma-separated value table, e.g. 0,0,1.
    #[arg(long)]
    f: String,
    /// Right surjection in the same format.
    #[arg(long)]
    g: String,
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Evaluate one measure on a formal sum of pieces read from a file.
    Eval(MeasureEvalArgs),
    /// Solve the square constraints for the transitive-piece parameter.
    Solve,
}

#[derive(Args)]
struct MeasureEvalArgs {
    #[arg(long, value_enum)]
    measure: MeasureArg,
    /// JSON file holding the formal sum.
    #[arg(long)]
    gset: PathBuf,
}

#[derive(ValueEnum, Clone, Copy)]
enum MeasureArg {
    Mu,
    Nu,
}

impl MeasureArg {
    fn to_measure(self) -> Measure {
        match self {
            MeasureArg::Mu => Measure::Mu,
            MeasureArg::Nu => Measure::Nu,
        }
    }
}

#[derive(Subcommand)]
enum PermCmd {
    /// Compose two matrices (lhs after rhs).
    Compose(PermComposeArgs),
    /// Trace of an endomorphism.
    Trace(PermTraceArgs),
}

#[derive(Args)]
struct PermComposeArgs {
    /// JSON file holding the outer matrix.
    #[arg(long)]
    lhs: PathBuf,
    /// JSON file holding the inner matrix.
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, value_enum, default_value_t = ComposeModeArg::Fast)]
    mode: ComposeModeArg,
}

#[derive(ValueEnum, Clone, Copy)]
enum ComposeModeArg {
    /// Direct chain-subset sum with parameter weights.
    Oracle,
    /// Bit-parallel stratified composition.
    Fast,
}

#[derive(Args)]
struct PermTraceArgs {
    /// JSON file holding the endomorphism.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = TraceModeArg::Categorical)]
    mode: TraceModeArg,
}

#[derive(ValueEnum, Clone, Copy)]
enum TraceModeArg {
    /// Loop composite through the duality maps.
    Categorical,
    /// Weighted diagonal-stratum sum.
    Closed,
}

#[derive(Subcommand)]
enum AlgCmd {
    /// Semisimplicity report for the contracted algebra of n x n matrices.
    Report(AlgReportArgs),
    /// Nilpotent endomorphism with non-zero trace on the Boolean side.
    Witness(AlgWitnessArgs),
}

#[derive(Args)]
struct AlgReportArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum KindArg {
    F2,
    Bool,
}

impl KindArg {
    fn to_kind(self) -> SemiringKind {
        match self {
            KindArg::F2 => SemiringKind::F2,
            KindArg::Bool => SemiringKind::Bool,
        }
    }
}

#[derive(Args)]
struct AlgWitnessArgs {
    /// Matrix size; the Boolean semiring is implied.
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Args)]
struct ClassifyArgs {
    /// JSON file holding the relation family.
    #[arg(long)]
    relation: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
}

#[derive(ValueEnum, Clone, Copy)]
enum LevelArg {
    /// Everything that finishes in seconds.
    Quick,
    /// Adds the two dimension-511 algebra analyses.
    Full,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version displays are successes; real parse errors are
            // argument errors and must exit 1, not clap's default 2.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Ok(raw) = std::env::var(BUDGET_ENV_VAR) {
        match raw.trim().parse::<u32>() {
            Ok(bits) => set_enum_budget_bits(bits),
            Err(_) => {
                eprintln!("error: argument error: {BUDGET_ENV_VAR} must be an integer bit count");
                std::process::exit(1);
            }
        }
    }
    match dispatch(&cli) {
        Ok(Output { text, exit }) => {
            println!("{text}");
            std::process::exit(exit);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

/// Rendered report plus the exit status it ships with (selftest may pass
/// through a failure status while still printing its report).
struct Output {
    text: String,
    exit: i32,
}

impl Output {
    fn ok(text: String) -> Output {
        Output { text, exit: 0 }
    }
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.verb {
        Verb::Ample { cmd: AmpleCmd::Count(args) } => ample_count(args, cli.pretty),
        Verb::Decompose { cmd: DecomposeCmd::Product(args) } => decompose_product(args, cli.pretty),
        Verb::Measure { cmd: MeasureCmd::Eval(args) } => measure_eval(args, cli.pretty),
        Verb::Measure { cmd: MeasureCmd::Solve } => measure_solve(cli.pretty),
        Verb::Perm { cmd: PermCmd::Compose(args) } => perm_compose(args, cli.pretty),
        Verb::Perm { cmd: PermCmd::Trace(args) } => perm_trace(args, cli.pretty),
        Verb::Alg { cmd: AlgCmd::Report(args) } => alg_report(args, cli.pretty),
        Verb::Alg { cmd: AlgCmd::Witness(args) } => alg_witness(args, cli.pretty),
        Verb::Classify(args) => classify(args, cli.pretty),
        Verb::Selftest(args) => run_selftest(args, cli.pretty),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::argument(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| Error::argument(format!("cannot parse {}: {e}", path.display())))
}

fn ample_count(args: &AmpleCountArgs, pretty: bool) -> Result<Output> {
    let (method, name) = match args.method {
        MethodArg::Enum => (CountMethod::Enumerate, "enum"),
        MethodArg::Ie => (CountMethod::InclusionExclusion, "ie"),
    };
    let count = count_ample_power2(args.n, method)?;
    let text = if pretty {
        format!("ample subsets of [{0}] x [{0}]: {1} ({name})", args.n, count)
    } else {
        serde_json::json!({ "n": args.n, "method": name, "count": count.to_string() }).to_string()
    };
    Ok(Output::ok(text))
}

/// Parse a comma-separated value table as a surjection onto its value range.
fn parse_table(raw: &str) -> Result<GMap> {
    let table: Vec<usize> = raw
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::argument(format!("bad table entry {t:?} in {raw:?}")))
        })
        .collect::<Result<_>>()?;
    let cod = table
        .iter()
        .max()
        .map(|&m| m + 1)
        .ok_or_else(|| Error::argument("empty value table"))?;
    GMap::from_table(table.len(), cod, table)
}

fn render_gset(g: &FormalGSet, pretty: bool) -> Result<String> {
    if pretty {
        let mut lines = Vec::new();
        for (piece, mult) in g.iter() {
            lines.push(format!("{mult} x piece of size {}", piece.size));
        }
        if lines.is_empty() {
            lines.push("empty sum".to_string());
        }
        Ok(lines.join("\n"))
    } else {
        serde_json::to_string(g).map_err(|e| Error::integrity(format!("serialization: {e}")))
    }
}

fn decompose_product(args: &DecomposeProductArgs, pretty: bool) -> Result<Output> {
    let f = parse_table(&args.f)?;
    let g = parse_table(&args.g)?;
    let decomposition = x_product_decompose(&f, &g)?;
    Ok(Output::ok(render_gset(&decomposition, pretty)?))
}

fn measure_eval(args: &MeasureEvalArgs, pretty: bool) -> Result<Output> {
    let gset: FormalGSet = read_json(&args.gset)?;
    let measure = args.measure.to_measure();
    let value = eval_measure(measure, &gset);
    let text = if pretty {
        format!("{}(gset) = {}", measure.name(), value)
    } else {
        serde_json::json!({ "measure": measure.name(), "value": rat_string(&value) }).to_string()
    };
    Ok(Output::ok(text))
}

fn measure_solve(pretty: bool) -> Result<Output> {
    let roots = solve_regular_parameters()?;
    let rendered: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
    let text = if pretty {
        format!("admissible parameters: {}", rendered.join(", "))
    } else {
        serde_json::json!({ "alphas": rendered }).to_string()
    };
    Ok(Output::ok(text))
}

fn render_matrix(m: &PermMatrix, pretty: bool) -> Result<String> {
    if pretty {
        let mut lines = vec![format!(
            "{}: {} -> {} ({} entries)",
            m.measure().name(),
            describe_object_short(m.source()),
            describe_object_short(m.target()),
            m.entry_count()
        )];
        for (tgt, src, stratum, coeff) in m.entries() {
            lines.push(format!(
                "  target piece {tgt}, source piece {src}, stratum {}: {}",
                stratum.to_hex(),
                coeff
            ));
        }
        Ok(lines.join("\n"))
    } else {
        serde_json::to_string(m).map_err(|e| Error::integrity(format!("serialization: {e}")))
    }
}

fn describe_object_short(o: &cantor_perm::permcat::PermObject) -> String {
    format!("{:?}x{}", o.ground(), o.piece_count())
}

fn perm_compose(args: &PermComposeArgs, pretty: bool) -> Result<Output> {
    let lhs: PermMatrix = read_json(&args.lhs)?;
    let rhs: PermMatrix = read_json(&args.rhs)?;
    let mode = match args.mode {
        ComposeModeArg::Oracle => ComposeMode::Oracle,
        ComposeModeArg::Fast => ComposeMode::Fast,
    };
    let out = compose(&lhs, &rhs, mode)?;
    Ok(Output::ok(render_matrix(&out, pretty)?))
}

fn perm_trace(args: &PermTraceArgs, pretty: bool) -> Result<Output> {
    let m: PermMatrix = read_json(&args.input)?;
    let (mode, name) = match args.mode {
        TraceModeArg::Categorical => (TraceMode::Categorical, "categorical"),
        TraceModeArg::Closed => (TraceMode::ClosedForm, "closed"),
    };
    let value = trace(&m, mode)?;
    let text = if pretty {
        format!("trace = {value} ({name})")
    } else {
        serde_json::json!({ "mode": name, "trace": rat_string(&value) }).to_string()
    };
    Ok(Output::ok(text))
}

fn alg_report(args: &AlgReportArgs, pretty: bool) -> Result<Output> {
    let kind = args.kind.to_kind();
    let mut report = semisimplicity_report(kind, args.n)?;
    if !report.semisimple {
        report.witness = find_trace_witness(kind, args.n)?.map(|w| w.report());
    }
    let json = serde_json::to_string(&report)
        .map_err(|e| Error::integrity(format!("serialization: {e}")))?;
    if let Some(out) = &args.out {
        std::fs::write(out, format!("{json}\n"))
            .map_err(|e| Error::argument(format!("cannot write {}: {e}", out.display())))?;
    }
    let text = if pretty {
        let mut lines = vec![
            format!("kind: {}", report.kind.name()),
            format!("n: {}", report.n),
            format!("algebra_dim: {}", report.algebra_dim),
            format!("radical_dim: {}", report.radical_dim),
            format!("semisimple: {}", report.semisimple),
        ];
        if let Some(p) = report.certificate_prime {
            lines.push(format!("certificate_prime: {p}"));
        }
        if let Some(w) = &report.witness {
            lines.push(format!(
                "witness: {} terms, nilpotency exponent {}, trace {}",
                w.terms.len(),
                w.nilpotency_exponent,
                w.trace
            ));
        }
        lines.join("\n")
    } else {
        json
    };
    Ok(Output::ok(text))
}

fn alg_witness(args: &AlgWitnessArgs, pretty: bool) -> Result<Output> {
    let witness = find_trace_witness(SemiringKind::Bool, args.n)?.map(|w| w.report());
    let text = if pretty {
        match &witness {
            None => "no witness: the radical is trivial".to_string(),
            Some(w) => {
                let mut lines = vec![format!(
                    "nilpotent of exponent {} with trace {}",
                    w.nilpotency_exponent, w.trace
                )];
                for t in &w.terms {
                    lines.push(format!("  matrix {}: {}", t.mask_hex, t.coeff));
                }
                lines.join("\n")
            }
        }
    } else {
        serde_json::to_string(&witness)
            .map_err(|e| Error::integrity(format!("serialization: {e}")))?
    };
    Ok(Output::ok(text))
}

fn classify(args: &ClassifyArgs, pretty: bool) -> Result<Output> {
    let family = read_json(&args.relation)?;
    let quotient = eqrel_classify(&family)?;
    let text = if pretty {
        let mut lines = vec![format!(
            "quotient of the full object on {} points by a group of order {}",
            quotient.base,
            quotient.group_order()
        )];
        for p in &quotient.group {
            lines.push(format!("  {p:?}"));
        }
        lines.join("\n")
    } else {
        serde_json::to_string(&quotient)
            .map_err(|e| Error::integrity(format!("serialization: {e}")))?
    };
    Ok(Output::ok(text))
}

fn run_selftest(args: &SelftestArgs, pretty: bool) -> Result<Output> {
    let (level, name) = match args.level {
        LevelArg::Quick => (Level::Quick, "quick"),
        LevelArg::Full => (Level::Full, "full"),
    };
    let claims = selftest::run(level);
    let all_pass = claims.iter().all(|c| c.pass);
    let text = if pretty {
        let mut lines: Vec<String> = claims
            .iter()
            .map(|c| {
                format!(
                    "{} {:24} {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.key,
                    c.detail
                )
            })
            .collect();
        lines.push(format!(
            "{}: {} of {} claims hold",
            if all_pass { "pass" } else { "FAIL" },
            claims.iter().filter(|c| c.pass).count(),
            claims.len()
        ));
        lines.join("\n")
    } else {
        let rows: Vec<serde_json::Value> = claims
            .iter()
            .map(|c| serde_json::json!({ "key": c.key, "detail": c.detail, "pass": c.pass }))
            .collect();
        serde_json::json!({ "level": name, "pass": all_pass, "claims": rows }).to_string()
    };
    if !all_pass {
        let failing: Vec<&str> = claims
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.key.as_str())
            .collect();
        eprintln!("error: self-test failed at: {}", failing.join(", "));
        return Ok(Output { text, exit: 3 });
    }
    Ok(Output::ok(text))
}
