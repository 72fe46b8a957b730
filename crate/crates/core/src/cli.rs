//! The `cdetect` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::detect::{detect_with_rules, expand_hint_counts, saturate_constraint, DetectError};
use crate::gen::{generate, Kind};
use crate::model::{
    parse_data, parse_problem, serialize_data, serialize_problem, DataBindings, ProblemDef,
};
use crate::rewrite::{Rewrite, RunnerConfig};
use crate::rules::{default_rules, rule_subset};

#[derive(Parser, Debug)]
#[command(
    name = "cdetect",
    version,
    about = "Detect one-hot and SOS1 constraints in symbolic optimization models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunnerArgs {
    /// Maximum saturation iterations per constraint.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stop saturating a constraint once its e-graph has this many nodes.
    #[arg(long)]
    node_limit: Option<usize>,
    /// Wall-clock budget per constraint.
    #[arg(long)]
    time_limit_ms: Option<u64>,
    /// Rule selection, e.g. `no-shortcuts` or `constraint,arith`.
    #[arg(long)]
    rules: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect constraint hints in a model.
    Detect {
        model: PathBuf,
        /// Also expand hint families against this data file.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        runner: RunnerArgs,
        /// Include per-phase wall-clock times.
        #[arg(long)]
        timing: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Count the concrete constraints covered by each hint kind.
    Expand {
        model: PathBuf,
        data: PathBuf,
        #[command(flatten)]
        runner: RunnerArgs,
    },
    /// Write a benchmark model and matching data.
    Gen {
        kind: GenKind,
        #[arg(long)]
        n: usize,
        /// Number of customers (plant only); defaults to `n`.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(short = 'o', long = "output", default_value = ".")]
        output: PathBuf,
    },
    /// Saturate a single constraint and report on the run.
    Saturate {
        model: PathBuf,
        #[arg(long)]
        constraint: String,
        /// Print the full report, including per-rule match counts.
        #[arg(long)]
        stats: bool,
        #[command(flatten)]
        runner: RunnerArgs,
    },
    /// Show the rewrite-rule catalog.
    Rules {
        #[arg(long)]
        list: bool,
        #[arg(long)]
        json: bool,
    },
    /// Time detection on generated models; CSV on stdout.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        kind: Option<GenKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    Tsp,
    Plant,
}

impl From<GenKind> for Kind {
    fn from(k: GenKind) -> Kind {
        match k {
            GenKind::Tsp => Kind::Tsp,
            GenKind::Plant => Kind::Plant,
        }
    }
}

/// Failure with its exit code: 1 for bad input, 2 for engine errors.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

impl From<DetectError> for Failure {
    fn from(e: DetectError) -> Failure {
        let code = match e {
            DetectError::Invalid(_) => 1,
            DetectError::Engine { .. } | DetectError::Raise(_) => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ProblemDef, Failure> {
    parse_problem(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_data(path: &Path, p: &ProblemDef) -> Result<DataBindings, Failure> {
    let d = parse_data(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    d.check_against(p)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(d)
}

impl RunnerArgs {
    fn config(&self) -> RunnerConfig {
        let mut cfg = RunnerConfig::default();
        if let Some(n) = self.max_iters {
            cfg.max_iterations = n;
        }
        if let Some(n) = self.node_limit {
            cfg.node_limit = n;
        }
        if let Some(n) = self.time_limit_ms {
            cfg.time_limit_ms = n;
        }
        cfg
    }

    fn rules(&self) -> Result<Vec<Rewrite>, Failure> {
        let catalog = default_rules();
        match &self.rules {
            None => Ok(catalog.rules()),
            Some(sel) => rule_subset(&catalog, sel)
                .map(|c| c.rules())
                .map_err(|e| usage(e.to_string())),
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure {
            code: 2,
            message: e.to_string(),
        }),
        _ => Ok(()),
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Detect {
            model,
            data,
            runner,
            timing,
            output,
        } => {
            let start = Instant::now();
            let p = load_model(&model)?;
            let data = data.map(|d| load_data(&d, &p)).transpose()?;
            let parsed = start.elapsed();
            let report = detect_with_rules(&p, &runner.rules()?, &runner.config())?;
            let mut v = report.to_json();
            if let Some(d) = &data {
                let counts = expand_hint_counts(&report, d).map_err(|e| usage(e.to_string()))?;
                v["counts"] = serde_json::to_value(counts).expect("counts serialize");
            }
            if timing {
                let mut t = report.timing_json();
                t["parse_ms"] = json!(parsed.as_secs_f64() * 1e3);
                v["timing"] = t;
            }
            let text = pretty(&v);
            match output {
                Some(path) => fs::write(&path, text + "\n")
                    .map_err(|e| usage(format!("{}: {e}", path.display()))),
                None => emit(out, &text),
            }
        }
        Command::Expand {
            model,
            data,
            runner,
        } => {
            let p = load_model(&model)?;
            let d = load_data(&data, &p)?;
            let report = detect_with_rules(&p, &runner.rules()?, &runner.config())?;
            let counts = expand_hint_counts(&report, &d).map_err(|e| usage(e.to_string()))?;
            emit(
                out,
                &serde_json::to_string(&counts).expect("counts serialize"),
            )
        }
        Command::Gen {
            kind,
            n,
            m,
            seed,
            output,
        } => {
            let (p, d) =
                generate(kind.into(), n, m.unwrap_or(n), seed).map_err(|e| usage(e.to_string()))?;
            fs::create_dir_all(&output).map_err(|e| usage(format!("{}: {e}", output.display())))?;
            let name = Kind::from(kind).as_str();
            let model_path = output.join(format!("{name}_model.json"));
            let data_path = output.join(format!("{name}_data.json"));
            for (path, text) in [
                (&model_path, serialize_problem(&p)),
                (&data_path, serialize_data(&d)),
            ] {
                fs::write(path, text + "\n")
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            emit(out, &model_path.display().to_string())?;
            emit(out, &data_path.display().to_string())
        }
        Command::Saturate {
            model,
            constraint,
            stats,
            runner,
        } => {
            let p = load_model(&model)?;
            let c = p
                .constraint(&constraint)
                .ok_or_else(|| usage(format!("no constraint named `{constraint}`")))?;
            let g = saturate_constraint(c, &p, &runner.rules()?, &runner.config())?;
            if stats {
                let v = serde_json::to_value(&g.report).expect("reports serialize");
                emit(out, &pretty(&v))
            } else {
                emit(
                    out,
                    &format!(
                        "{}: {} after {} iterations, {} nodes in {} classes",
                        constraint,
                        g.report.stop_reason.as_str(),
                        g.report.iterations,
                        g.report.nodes,
                        g.report.classes
                    ),
                )
            }
        }
        Command::Rules { list, json } => {
            if !list && !json {
                return Err(usage("nothing to do: pass --list or --json"));
            }
            let catalog = default_rules();
            if json {
                let rules: Vec<Value> = catalog
                    .listing()
                    .into_iter()
                    .map(|(g, l)| {
                        json!({
                            "name": l.name,
                            "group": g.as_str(),
                            "searcher": l.searcher,
                            "applier": l.applier,
                            "conditions": l.conditions,
                        })
                    })
                    .collect();
                return emit(out, &pretty(&Value::Array(rules)));
            }
            for e in &catalog.entries {
                emit(out, &format!("[{}] {}", e.group, e.rule))?;
            }
            Ok(())
        }
        Command::Bench { sizes, kind, seed } => {
            let kinds = match kind {
                Some(k) => vec![Kind::from(k)],
                None => vec![Kind::Tsp, Kind::Plant],
            };
            let rules = default_rules().rules();
            let cfg = RunnerConfig::default();
            emit(
                out,
                "kind,n,m,detect_ms,saturate_iters,one_hot,sos1_binary,sos1_general",
            )?;
            for kind in kinds {
                for &n in &sizes {
                    let m = n;
                    let (p, _data) =
                        generate(kind, n, m, seed).map_err(|e| usage(e.to_string()))?;
                    let start = Instant::now();
                    let r = detect_with_rules(&p, &rules, &cfg)?;
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    let iters: usize = r.stats.iter().map(|s| s.run.iterations).sum();
                    let m_col = if kind == Kind::Plant {
                        m.to_string()
                    } else {
                        String::new()
                    };
                    emit(
                        out,
                        &format!(
                            "{},{n},{m_col},{ms:.3},{iters},{},{},{}",
                            kind.as_str(),
                            r.one_hot.len(),
                            r.sos1_binary.len(),
                            r.sos1_general.len()
                        ),
                    )?;
                }
            }
            Ok(())
        }
    }
}

/// Runs the CLI on `args` (program name first). Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Initializes logging from `DETECT_LOG` (`off`, `info`, `debug`, ...).
pub fn init_logging() {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("DETECT_LOG", "off"))
        .format_timestamp(None)
        .try_init();
}
