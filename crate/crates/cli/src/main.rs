//! `latsem`: command-line front end for latent-semantics analysis of pattern matrices.

mod behavior;
mod json;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latsem_core::bell::{self, QuadrupleSource, UserQuadruple, BELL_BOUND, VIOLATION_TOL};
use latsem_core::fca::{self, FormalContext};
use latsem_core::measures::{self, SubspaceBasis};
use latsem_core::pattern::{self, correlations, to_state};
use latsem_core::spectral::{svd_with, SvdOptions};
use latsem_core::{Adjustment, BoolPattern, Dataset, Error, Matrix, RealPattern};
use serde_json::{json, Map, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_UNKNOWN_ID: u8 = 4;
const EXIT_VIOLATION: u8 = 10;

#[derive(Parser)]
#[command(name = "latsem", version, about = "SVD topics, concept lattices, similarity and Bell audits over pattern matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Comma-separated adjustments applied in order: item-balance, user-balance,
    /// item-normalize, user-normalize
    #[arg(long, global = true, value_delimiter = ',')]
    adjust: Vec<String>,

    /// Fail unless the input declares this rig
    #[arg(long, global = true, value_enum)]
    rig: Option<RigArg>,

    /// Seed for sampled audits
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Violation margin for `bell`; relative rank cutoff for `decompose`
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RigArg {
    Real,
    Bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimKind {
    Item,
    User,
    Topic,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a pattern file and summarize it
    Ingest { path: PathBuf },

    /// Singular value decomposition and leading topics
    Decompose {
        path: PathBuf,
        /// Number of topics to report (default: all)
        #[arg(long)]
        k: Option<usize>,
    },

    /// Concept lattice of a boolean context
    Fca {
        path: PathBuf,
        /// List every triple violating distributivity
        #[arg(long)]
        audit: bool,
        /// Export the lattice instead of printing the report
        #[arg(long, value_enum)]
        export: Option<ExportFormat>,
        /// Write the export here; the report still goes to stdout
        #[arg(long, requires = "export")]
        out: Option<PathBuf>,
    },

    /// Similarity of two items, two users, or two topic vectors over users
    Similar {
        path: PathBuf,
        #[arg(value_enum)]
        kind: SimKind,
        /// Identifier, or comma-separated weights for `topic`
        first: String,
        second: String,
    },

    /// Trace rank of a vector or subspace over users
    Rank {
        path: PathBuf,
        #[command(flatten)]
        target: RankTarget,
        /// Rank against the unit-trace state instead of `A‡A`
        #[arg(long)]
        state: bool,
    },

    /// Audit the similarity inequality on user quadruples, or on behaviors
    Bell {
        /// Pattern file (not needed with --classical)
        path: Option<PathBuf>,
        /// Users `x0,x1,y0,y1`; repeatable
        #[arg(long = "quad")]
        quads: Vec<String>,
        /// Users to draw quadruples from (default: all)
        #[arg(long, value_delimiter = ',')]
        users: Vec<String>,
        /// Draw this many random quadruples instead of all of them
        #[arg(long, conflicts_with = "quads")]
        sample: Option<usize>,
        /// Behavior file with lines `x0:`, `x1:`, `y0:`, `y1:` of 0/1 values
        #[arg(long, conflicts_with_all = ["quads", "users", "sample"])]
        classical: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RankTarget {
    /// Comma-separated weights over users
    #[arg(long)]
    vector: Option<String>,
    /// A single user, as a basis vector
    #[arg(long)]
    user: Option<String>,
    /// Orthonormal basis: vectors separated by `;`, weights by `,`
    #[arg(long)]
    subspace: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::DuplicateAssignment { .. } | Error::DuplicateIdentifier(_) => EXIT_PARSE,
            Error::UnknownIdentifier(_) | Error::IndexOutOfRange { .. } => EXIT_UNKNOWN_ID,
            Error::NoConvergence { .. } | Error::PowerIteration { .. } => EXIT_FAILURE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

struct Report {
    json: Value,
    text: String,
    code: u8,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report { json, text, code: 0 }
    }
}

struct Config {
    adjustments: Vec<Adjustment>,
    rig: Option<RigArg>,
    seed: u64,
    tol: Option<f64>,
}

impl Config {
    fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let mut adjustments = Vec::new();
        for name in cli.adjust.iter().filter(|s| !s.trim().is_empty()) {
            let a: Adjustment = name.parse()?;
            if adjustments.contains(&a) {
                return Err(invalid(format!("adjustment `{}` listed twice", a.name())));
            }
            adjustments.push(a);
        }
        if let Some(t) = cli.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid(format!("--tol must be a nonnegative number, got {t}")));
            }
        }
        Ok(Config {
            adjustments,
            rig: cli.rig,
            seed: cli.seed,
            tol: cli.tol,
        })
    }

    fn load(&self, path: &Path) -> Result<Dataset, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure {
            code: EXIT_PARSE,
            message: format!("{}: {e}", path.display()),
        })?;
        let data = pattern::parse(&text).map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("{}: {}", path.display(), f.message);
            f
        })?;
        let declared = match data {
            Dataset::Real(_) => RigArg::Real,
            Dataset::Bool(_) => RigArg::Bool,
        };
        if self.rig.is_some_and(|r| r != declared) {
            return Err(invalid(format!("input declares rig `{}`", data.rig_name())));
        }
        Ok(data)
    }

    /// Real-valued input with the adjustments applied; boolean input is read as 0/1.
    fn load_real(&self, path: &Path) -> Result<RealPattern, Failure> {
        match self.load(path)? {
            Dataset::Real(p) => Ok(self.adjustments.iter().fold(p, |p, &a| p.apply(a))),
            Dataset::Bool(p) if self.adjustments.is_empty() => Ok(lift_bool(&p)?),
            Dataset::Bool(_) => Err(invalid("adjustments apply to real-valued input only")),
        }
    }
}

fn lift_bool(p: &BoolPattern) -> latsem_core::Result<RealPattern> {
    let (rows, cols) = p.shape();
    let values = Matrix::from_fn(rows, cols, |i, u| if p.values().get(i, u) { 1.0 } else { 0.0 });
    let mask = (0..rows * cols).map(|k| p.is_assigned(k / cols.max(1), k % cols.max(1))).collect();
    RealPattern::new(p.items().to_vec(), p.users().to_vec(), values, mask)
}

fn keyed(ids: &[String], values: &[f64]) -> Value {
    Value::Object(ids.iter().cloned().zip(values.iter().map(|&v| json!(v))).collect::<Map<_, _>>())
}

fn parse_vector(text: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let v = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: `{}`", t.trim()))))
        .collect::<Result<Vec<f64>, Failure>>()?;
    if v.len() != dim {
        return Err(invalid(format!("expected {dim} weights, found {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid("weights must be finite"));
    }
    Ok(v)
}

fn adjustment_names(cfg: &Config) -> Vec<&'static str> {
    cfg.adjustments.iter().map(|a| a.name()).collect()
}

struct Summary {
    items: Vec<String>,
    users: Vec<String>,
    row_counts: Vec<usize>,
    column_counts: Vec<usize>,
    empty_rows: Vec<String>,
    empty_columns: Vec<String>,
    assigned: usize,
    density: f64,
}

impl Summary {
    fn of<R: latsem_core::Rig>(p: &latsem_core::PatternMatrix<R>) -> Self {
        let name = |ids: &[String], ks: Vec<usize>| ks.into_iter().map(|k| ids[k].clone()).collect();
        Summary {
            items: p.items().to_vec(),
            users: p.users().to_vec(),
            row_counts: p.row_counts(),
            column_counts: p.column_counts(),
            empty_rows: name(p.items(), p.empty_rows()),
            empty_columns: name(p.users(), p.empty_columns()),
            assigned: p.assigned_count(),
            density: p.density(),
        }
    }
}

fn cmd_ingest(cfg: &Config, path: &Path) -> Result<Report, Failure> {
    let data = cfg.load(path)?;
    let s = match &data {
        Dataset::Real(p) => Summary::of(p),
        Dataset::Bool(p) => Summary::of(p),
    };
    let (n, m) = data.shape();
    let counts = |ids: &[String], v: &[usize]| -> Value {
        Value::Object(ids.iter().cloned().zip(v.iter().map(|&c| json!(c))).collect())
    };
    let json = json!({
        "rig": data.rig_name(),
        "items": n,
        "users": m,
        "assigned": s.assigned,
        "density": s.density,
        "row_counts": counts(&s.items, &s.row_counts),
        "column_counts": counts(&s.users, &s.column_counts),
        "empty_rows": s.empty_rows,
        "empty_columns": s.empty_columns,
    });

    let mut text = format!(
        "rig: {}\nshape: {n} items x {m} users\nassigned: {} (density {})\n",
        data.rig_name(),
        s.assigned,
        s.density
    );
    for (id, c) in s.items.iter().zip(&s.row_counts) {
        let _ = writeln!(text, "  item {id}: {c}");
    }
    for (id, c) in s.users.iter().zip(&s.column_counts) {
        let _ = writeln!(text, "  user {id}: {c}");
    }
    if !s.empty_rows.is_empty() {
        let _ = writeln!(text, "empty items: {}", s.empty_rows.join(", "));
    }
    if !s.empty_columns.is_empty() {
        let _ = writeln!(text, "empty users: {}", s.empty_columns.join(", "));
    }
    Ok(Report::ok(json, text))
}

fn cmd_decompose(cfg: &Config, path: &Path, k: Option<usize>) -> Result<Report, Failure> {
    let p = cfg.load_real(path)?;
    let mut opts = SvdOptions::default();
    if let Some(t) = cfg.tol {
        opts.rank_tol = t;
    }
    let model = svd_with(p.values(), &opts)?;
    let kept = model.truncate(k.unwrap_or(model.rank()))?;
    let topics: Vec<Value> = kept
        .topic_pairs()
        .iter()
        .enumerate()
        .map(|(n, t)| {
            json!({
                "topic": n + 1,
                "weight": t.weight,
                "style": keyed(p.items(), &t.style),
                "taste": keyed(p.users(), &t.taste),
            })
        })
        .collect();
    let (rows, cols) = model.shape();
    let json = json!({
        "shape": [rows, cols],
        "adjustments": adjustment_names(cfg),
        "rank": model.rank(),
        "singular_values": model.singular_values(),
        "spectrum": model.spectrum(),
        "topics": topics,
    });

    let mut text = format!("shape: {rows} x {cols}\nrank: {}\nsingular values:", model.rank());
    for d in model.singular_values() {
        let _ = write!(text, " {d}");
    }
    text.push('\n');
    for (n, t) in kept.topic_pairs().iter().enumerate() {
        let _ = writeln!(text, "topic {} (weight {})", n + 1, t.weight);
        let _ = writeln!(text, "  style: {}", pairs(p.items(), &t.style));
        let _ = writeln!(text, "  taste: {}", pairs(p.users(), &t.taste));
    }
    Ok(Report::ok(json, text))
}

fn pairs(ids: &[String], values: &[f64]) -> String {
    ids.iter()
        .zip(values)
        .map(|(id, v)| format!("{id}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_fca(cfg: &Config, path: &Path, audit: bool, export: Option<ExportFormat>, out: Option<&Path>) -> Result<Report, Failure> {
    if !cfg.adjustments.is_empty() {
        return Err(invalid("adjustments apply to real-valued input only"));
    }
    let ctx = match cfg.load(path)? {
        Dataset::Bool(p) => FormalContext::from_pattern(&p),
        Dataset::Real(_) => return Err(invalid("fca needs a `rig: bool` context")),
    };
    let lattice = fca::enumerate_concepts(&ctx)?;
    let exported = lattice.export();

    if let Some(format) = export {
        let body = match format {
            ExportFormat::Json => json::render(serde_json::to_value(&exported).expect("serializable")) + "\n",
            ExportFormat::Dot => lattice.to_dot(),
        };
        match out {
            Some(file) => fs::write(file, body).map_err(|e| Failure {
                code: EXIT_FAILURE,
                message: format!("{}: {e}", file.display()),
            })?,
            None => {
                return Ok(Report {
                    json: Value::Null,
                    text: body,
                    code: 0,
                })
            }
        }
    }

    let mut json = json!({
        "objects": ctx.objects().len(),
        "attributes": ctx.attributes().len(),
        "concept_count": lattice.len(),
        "concepts": exported.concepts,
        "edges": exported.edges,
    });
    let mut text = format!(
        "{} objects, {} attributes, {} concepts\n",
        ctx.objects().len(),
        ctx.attributes().len(),
        lattice.len()
    );
    for c in &exported.concepts {
        let _ = writeln!(text, "  c{}: {{{}}} / {{{}}}", c.id, c.extent.join(", "), c.intent.join(", "));
    }
    if audit {
        let violations = fca::audit_distributivity(&lattice);
        let triples: Vec<Value> = violations
            .iter()
            .map(|v| json!({"x": v.x, "y": v.y, "z": v.z, "lhs": v.lhs, "rhs": v.rhs}))
            .collect();
        json["distributivity"] = json!({"violations": violations.len(), "triples": triples});
        let _ = writeln!(text, "distributivity violations: {}", violations.len());
        for v in &violations {
            let _ = writeln!(
                text,
                "  x=c{} y=c{} z=c{}: x^(yvz)=c{} (x^y)v(x^z)=c{}",
                v.x, v.y, v.z, v.lhs, v.rhs
            );
        }
    }
    Ok(Report::ok(json, text))
}

fn cmd_similar(cfg: &Config, path: &Path, kind: SimKind, first: &str, second: &str) -> Result<Report, Failure> {
    let p = cfg.load_real(path)?;
    let a = p.values();
    let (label, score) = match kind {
        SimKind::Item => ("item", measures::sim_items(a, p.item_index(first)?, p.item_index(second)?)?),
        SimKind::User => ("user", measures::sim_users(a, p.user_index(first)?, p.user_index(second)?)?),
        SimKind::Topic => {
            let x = parse_vector(first, a.cols())?;
            let y = parse_vector(second, a.cols())?;
            ("topic", measures::sim_topics(a, &x, &y)?)
        }
    };
    let mut json = json!({
        "kind": label,
        "first": first,
        "second": second,
        "adjustments": adjustment_names(cfg),
        "similarity": score,
    });
    let mut text = format!("{label} similarity: {score}\n");
    if kind != SimKind::Topic {
        let agree = bell::agreement_probability(score)?;
        json["agreement_probability"] = json!(agree);
        let _ = writeln!(text, "agreement probability: {agree}");
    }
    Ok(Report::ok(json, text))
}

fn cmd_rank(cfg: &Config, path: &Path, target: &RankTarget, state: bool) -> Result<Report, Failure> {
    let p = cfg.load_real(path)?;
    let dim = p.values().cols();
    let (label, basis): (String, Vec<Vec<f64>>) = if let Some(v) = &target.vector {
        ("vector".into(), vec![parse_vector(v, dim)?])
    } else if let Some(u) = &target.user {
        let mut e = vec![0.0; dim];
        e[p.user_index(u)?] = 1.0;
        (format!("user {u}"), vec![e])
    } else {
        let spec = target.subspace.as_deref().unwrap_or_default();
        let vectors = spec
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_vector(s, dim))
            .collect::<Result<Vec<_>, _>>()?;
        let basis = SubspaceBasis::new(dim, vectors)?;
        (format!("subspace of dimension {}", basis.len()), basis.vectors().to_vec())
    };

    let (_, mu) = correlations(p.values())?;
    let normalized;
    let observable = if state {
        normalized = to_state(&mu)?;
        normalized.observable()
    } else {
        &mu
    };
    let score = basis
        .iter()
        .map(|b| observable.expectation(b, b))
        .sum::<latsem_core::Result<f64>>()?;
    let json = json!({
        "target": label,
        "state": state,
        "adjustments": adjustment_names(cfg),
        "score": score,
    });
    Ok(Report::ok(json, format!("trace rank of {label}: {score}\n")))
}

fn cmd_bell(
    cfg: &Config,
    path: Option<&Path>,
    quads: &[String],
    users: &[String],
    sample: Option<usize>,
    classical: Option<&Path>,
) -> Result<Report, Failure> {
    if let Some(file) = classical {
        return bell_classical(file);
    }
    let path = path.ok_or_else(|| invalid("bell needs a pattern file or --classical"))?;
    let p = cfg.load_real(path)?;
    for u in users {
        p.user_index(u)?;
    }
    let pool = if users.is_empty() { p.users().to_vec() } else { users.to_vec() };
    let source = if !quads.is_empty() {
        let list = quads
            .iter()
            .map(|q| {
                let names: Vec<String> = q.split(',').map(|s| s.trim().to_string()).collect();
                UserQuadruple::try_from(names).map_err(|n| invalid(format!("--quad needs 4 users, got {}", n.len())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        QuadrupleSource::Explicit(list)
    } else if let Some(count) = sample {
        QuadrupleSource::Sampled {
            users: pool,
            count,
            seed: cfg.seed,
        }
    } else {
        QuadrupleSource::Exhaustive(pool)
    };
    let mut report = bell::audit(&p, &source.resolve()?)?;
    let tol = cfg.tol.unwrap_or(VIOLATION_TOL);
    for r in &mut report.quadruples {
        r.violated = r.statistic > BELL_BOUND + tol;
    }
    report.summary.violated = report.quadruples.iter().filter(|r| r.violated).count();

    let mut text = format!(
        "checked {} quadruples, {} violate the bound {BELL_BOUND}\n",
        report.summary.checked, report.summary.violated
    );
    if let Some(m) = report.summary.max_margin {
        let _ = writeln!(text, "largest margin: {m}");
    }
    for r in &report.quadruples {
        let s = &r.sims;
        let _ = writeln!(
            text,
            "  {} x0={} x1={} y0={} y1={}: {} + {} + {} - ({}) = {}",
            if r.violated { "VIOLATED" } else { "ok      " },
            r.users[0],
            r.users[1],
            r.users[2],
            r.users[3],
            s.x0y1,
            s.x1y1,
            s.x1y0,
            s.x0y0,
            r.statistic
        );
    }
    let code = if report.has_violation() { EXIT_VIOLATION } else { 0 };
    Ok(Report {
        json: serde_json::to_value(&report).expect("serializable"),
        text,
        code,
    })
}

fn bell_classical(file: &Path) -> Result<Report, Failure> {
    let text = fs::read_to_string(file).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", file.display()),
    })?;
    let set = behavior::parse(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", file.display(), f.message);
        f
    })?;
    let [x0, x1, y0, y1] = &set.behaviors;
    let r = bell::classical_statistic(x0, x1, y0, y1)?;
    let names = ["x0y1", "x1y1", "x1y0", "x0y0"];
    let n = r.items as i64;
    let sims: Vec<f64> = r.agreements.iter().map(|&a| (2 * a as i64 - n) as f64 / n as f64).collect();
    let json = json!({
        "items": set.universe.items(),
        "agreements": Value::Object(names.iter().map(|k| k.to_string()).zip(r.agreements.iter().map(|&a| json!(a))).collect()),
        "sims": keyed(&names.map(String::from), &sims),
        "statistic": r.statistic,
        "within_bound": r.within_bound(),
    });
    let mut text = format!("classical statistic over {} items: {}\n", r.items, r.statistic);
    for ((name, a), s) in names.iter().zip(r.agreements).zip(&sims) {
        let _ = writeln!(text, "  {name}: {a} agreements, s = {s}");
    }
    let _ = writeln!(text, "within bound {BELL_BOUND}: {}", r.within_bound());
    let code = if r.within_bound() { 0 } else { EXIT_VIOLATION };
    Ok(Report { json, text, code })
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let cfg = Config::from_cli(cli)?;
    match &cli.command {
        Command::Ingest { path } => cmd_ingest(&cfg, path),
        Command::Decompose { path, k } => cmd_decompose(&cfg, path, *k),
        Command::Fca { path, audit, export, out } => cmd_fca(&cfg, path, *audit, *export, out.as_deref()),
        Command::Similar { path, kind, first, second } => cmd_similar(&cfg, path, *kind, first, second),
        Command::Rank { path, target, state } => cmd_rank(&cfg, path, target, *state),
        Command::Bell { path, quads, users, sample, classical } => {
            cmd_bell(&cfg, path.as_deref(), quads, users, *sample, classical.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID),
            };
        }
    };
    match run(&cli) {
        Ok(report) => {
            let body = if report.json.is_null() || cli.format == Format::Text {
                report.text
            } else {
                json::render(report.json) + "\n"
            };
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(report.code)
        }
        Err(f) => {
            eprintln!("latsem: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
