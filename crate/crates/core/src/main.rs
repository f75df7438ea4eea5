use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use gsi::catalog::{self, NamedSpec, Params};
use gsi::engine::{estimate_batch, estimate_with, Correction, EstimateResult, SampleConfig};
use gsi::models::{AnyModel, IndexKind, LowerOracle, Model};
use gsi::tables::{run_table, Table, TableOptions};
use gsi::{verify, GsiError, GsiSpec, SubsetMask};

const DEFAULT_SEED: u64 = 2013;

#[derive(Parser)]
#[command(name = "gsi", version, about = "Generalized Sobol' index estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog estimators with their targets, costs and classes.
    List {
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
    /// Estimate one catalog entry or the specs in a spec file.
    Estimate(EstimateArgs),
    /// Exact value of an index for a model with a closed form or a grid.
    Exact {
        #[arg(long)]
        model: String,
        /// One of mean, total_variance, sigma, lower, upper, superset, mean_dimension.
        #[arg(long)]
        index: String,
        /// Comma-separated 1-based indices; empty for the empty set.
        #[arg(long, default_value = "")]
        u: String,
    },
    /// Rerun one of the three comparison studies.
    Table(TableArgs),
    /// Run the oracle self-check suites.
    Verify {
        #[arg(long, env = "GSI_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Run a single suite by name.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
}

#[derive(Args)]
struct EstimateArgs {
    /// `min:d=5`, `product:tau=1,1,0.5`, inline JSON, or a JSON/CSV file.
    #[arg(long)]
    model: String,
    #[arg(long, conflicts_with = "spec_file", required_unless_present = "spec_file")]
    estimator: Option<String>,
    /// JSON file holding one spec or an array of specs.
    #[arg(long)]
    spec_file: Option<PathBuf>,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    w1: Option<String>,
    /// Adds the pairwise lower indices to batch entries.
    #[arg(long)]
    extended: bool,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Replicates; only bias-corrected estimates use more than one.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, env = "GSI_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// `auto` leaves contrasts alone and mean-corrects everything else.
    #[arg(long, default_value = "auto")]
    correction: String,
    #[arg(long, value_enum, default_value_t = RecordFormat::Json)]
    format: RecordFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// 1, 2 or 3.
    which: String,
    /// Divides the full-scale pair count and replicate count.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, env = "GSI_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    format: TableFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecordFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Io(String),
    Verify(String),
}

impl From<GsiError> for Failure {
    fn from(e: GsiError) -> Self {
        match e {
            GsiError::Io(m) => Failure::Io(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List { format } => cmd_list(format),
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Exact { model, index, u } => cmd_exact(&model, &index, &u),
        Command::Table(args) => cmd_table(&args),
        Command::Verify { seed, suite, format } => cmd_verify(seed, suite.as_deref(), format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verify(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(3)
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn cmd_list(format: ListFormat) -> CmdResult {
    let entries = catalog::catalog();
    let text = match format {
        ListFormat::Json => {
            let rows: Vec<Value> = entries
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "params": e.params,
                        "target": e.target,
                        "cost": e.cost,
                        "class": e.class,
                        "identity": e.identity,
                        "batch": e.batch,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("static listing serializes") + "\n"
        }
        ListFormat::Text => {
            let mut s = String::new();
            for e in entries {
                s += &format!("{}\n", e.name);
                s += &format!("    params:   {}\n", e.params);
                s += &format!("    target:   {}\n", e.target);
                s += &format!("    cost:     {}\n", e.cost);
                s += &format!("    class:    {}\n", e.class);
                s += &format!("    identity: {}\n", e.identity);
            }
            s
        }
    };
    emit(None, &text)
}

fn load_model(arg: &str) -> Result<AnyModel, Failure> {
    AnyModel::parse(arg).map_err(|e| match e {
        GsiError::Io(m) => Failure::Io(m),
        other => Failure::Usage(format!("model `{arg}`: {other}")),
    })
}

fn parse_set(text: &Option<String>, d: usize, flag: &str) -> Result<Option<SubsetMask>, Failure> {
    text.as_deref()
        .map(|t| SubsetMask::parse(t, d).map_err(|e| Failure::Usage(format!("--{flag}: {e}"))))
        .transpose()
}

#[derive(Serialize)]
struct Record<'a> {
    estimator: &'a str,
    label: &'a str,
    model: &'a str,
    params: &'a Map<String, Value>,
    correction: &'a str,
    estimate: f64,
    std_error: f64,
    n: usize,
    replicates: usize,
    cost: usize,
    evals_per_pair: usize,
    total_evals: u64,
    seed: u64,
}

fn cmd_estimate(a: &EstimateArgs) -> CmdResult {
    if a.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    if a.reps == 0 || a.workers == 0 {
        return Err(Failure::Usage("--reps and --workers must be at least 1".into()));
    }
    let correction = match a.correction.as_str() {
        "auto" => None,
        other => Some(other.parse::<Correction>()?),
    };
    let model = load_model(&a.model)?;
    let d = model.dim();

    let mut params = Map::new();
    params.insert("d".into(), json!(d));
    let (estimator, specs): (String, Vec<NamedSpec>) = match (&a.estimator, &a.spec_file) {
        (Some(name), _) => {
            let mut p = Params::new(d).with_extended(a.extended);
            p.u = parse_set(&a.u, d, "u")?;
            p.w = parse_set(&a.w, d, "w")?;
            p.w1 = parse_set(&a.w1, d, "w1")?;
            for (key, set) in [("u", p.u), ("w", p.w), ("w1", p.w1)] {
                if let Some(s) = set {
                    params.insert(key.into(), json!(s.to_string()));
                }
            }
            if a.extended {
                params.insert("extended".into(), json!(true));
            }
            (name.clone(), catalog::build(name, &p)?)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let specs = GsiSpec::many_from_json(&text)?;
            params.insert("spec_file".into(), json!(path.display().to_string()));
            let named = specs
                .into_iter()
                .enumerate()
                .map(|(i, spec)| NamedSpec { label: format!("spec[{i}]"), spec })
                .collect();
            ("spec_file".into(), named)
        }
        (None, None) => return Err(Failure::Usage("give --estimator or --spec-file".into())),
    };
    for ns in &specs {
        if ns.spec.dim() != d {
            return Err(Failure::Usage(format!("{} has d = {}, model has d = {d}", ns.label, ns.spec.dim())));
        }
    }

    let cfg = SampleConfig::new(a.n, a.seed).with_replicates(a.reps).with_workers(a.workers);
    let chosen: Vec<Correction> = specs.iter().map(|ns| correction.unwrap_or_else(|| Correction::auto(&ns.spec))).collect();
    let results: Vec<EstimateResult> = if specs.len() > 1 && chosen.iter().all(|&c| c == Correction::None) {
        let plain: Vec<GsiSpec> = specs.iter().map(|ns| ns.spec.clone()).collect();
        let batch = estimate_batch(&plain, &model, &cfg)?;
        // report the shared pass, not each spec's own support
        batch
            .results
            .into_iter()
            .map(|r| EstimateResult { evals_per_pair: batch.evals_per_pair, total_evals: batch.total_evals, ..r })
            .collect()
    } else {
        specs
            .iter()
            .zip(&chosen)
            .map(|(ns, &c)| estimate_with(&ns.spec, &model, &cfg, c))
            .collect::<gsi::Result<_>>()?
    };

    let records: Vec<Record> = specs
        .iter()
        .zip(&results)
        .zip(&chosen)
        .map(|((ns, r), c)| Record {
            estimator: &estimator,
            label: &ns.label,
            model: model.kind_name(),
            params: &params,
            correction: c.name(),
            estimate: r.estimate,
            std_error: r.std_error,
            n: r.n,
            replicates: r.replicates,
            cost: ns.spec.cost(),
            evals_per_pair: r.evals_per_pair,
            total_evals: r.total_evals,
            seed: a.seed,
        })
        .collect();

    let text = match a.format {
        RecordFormat::Json => records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect::<String>(),
        RecordFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "estimator", "label", "model", "params", "correction", "estimate", "std_error", "n", "replicates",
                "cost", "evals_per_pair", "total_evals", "seed",
            ])
            .map_err(|e| Failure::Io(e.to_string()))?;
            let params_text = Value::Object(params.clone()).to_string();
            for r in &records {
                w.write_record([
                    r.estimator.to_string(),
                    r.label.to_string(),
                    r.model.to_string(),
                    params_text.clone(),
                    r.correction.to_string(),
                    r.estimate.to_string(),
                    r.std_error.to_string(),
                    r.n.to_string(),
                    r.replicates.to_string(),
                    r.cost.to_string(),
                    r.evals_per_pair.to_string(),
                    r.total_evals.to_string(),
                    r.seed.to_string(),
                ])
                .map_err(|e| Failure::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Failure::Io(e.to_string()))?
        }
    };
    emit(a.out.as_ref(), &text)
}

fn cmd_exact(model: &str, index: &str, u: &str) -> CmdResult {
    let model = load_model(model)?;
    let kind: IndexKind = index.parse()?;
    let set = SubsetMask::parse(u, model.dim()).map_err(|e| Failure::Usage(format!("--u: {e}")))?;
    let value = match &model {
        AnyModel::Grid(_) => gsi::models::index_from_lower(&model.oracle()?, kind, set)?,
        _ => model.exact_index(kind, set)?,
    };
    let oracle = model.oracle()?;
    let rec = json!({
        "model": model.kind_name(),
        "index": kind.name(),
        "u": set.to_string(),
        "value": value,
        "mean": oracle.mean(),
    });
    emit(None, &(rec.to_string() + "\n"))
}

fn cmd_table(a: &TableArgs) -> CmdResult {
    let table: Table = a.which.parse()?;
    if a.n == Some(0) || a.reps == Some(0) || a.workers == 0 {
        return Err(Failure::Usage("--n, --reps and --workers must be at least 1".into()));
    }
    let opts = TableOptions { scale: a.scale, n: a.n, replicates: a.reps, seed: a.seed, workers: a.workers };
    let run = run_table(table, &opts)?;
    let text = match a.format {
        TableFormat::Text => run.to_text(),
        TableFormat::Csv => run.to_csv()?,
        TableFormat::Json => run.to_json() + "\n",
    };
    emit(a.out.as_ref(), &text)
}

fn cmd_verify(seed: u64, suite: Option<&str>, format: ListFormat) -> CmdResult {
    let results = match suite {
        Some(name) => vec![verify::run_one(name, seed)?],
        None => verify::run_all(seed),
    };
    let text = match format {
        ListFormat::Json => serde_json::to_string_pretty(&results).expect("suite results serialize") + "\n",
        ListFormat::Text => {
            let mut s = String::new();
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                s += &format!("{status} {:<26} {:>6} checks  max error {:.1e}", r.name, r.checks, r.max_error);
                if let Some(detail) = &r.detail {
                    s += &format!("  ({detail})");
                }
                s += "\n";
            }
            s
        }
    };
    emit(None, &text)?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed.join(", ")))
    }
}
