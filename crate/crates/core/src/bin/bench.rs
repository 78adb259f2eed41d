use std::fs;
use std::io::{self, BufReader};
use std::os::unix::net::UnixListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use fulfillment::bench::{run_experiment, run_suite, write_outputs, ExperimentConfig, ExperimentId, SuiteId, DEFAULT_SEED};
use fulfillment::error::{Error, Result};
use fulfillment::instances::{gen_adversarial, gen_stochastic, read_instance, write_instance, AdversarialParams, StochasticConfig};
use fulfillment::oracle::{bruteforce_opt, SearchLimits};
use fulfillment::service::{serve_lines, serve_unix, SessionStore};

#[derive(Parser)]
#[command(name = "bench", about = "Experiments, acceptance suites, instance generation and the decision service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write rows, timings and aggregate CSVs.
    Run {
        #[arg(long)]
        experiment: String,
        /// JSON object overriding the experiment's preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        full_scale: bool,
    },
    /// Run one acceptance suite, or `all`.
    Accept {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Print the full reports as JSON lines after the verdicts.
        #[arg(long)]
        json: bool,
    },
    /// Generate an instance file. Two-member families write `<stem>.0.json` and `<stem>.1.json`.
    Gen {
        #[arg(long)]
        family: String,
        /// JSON text, or `@path` to read it from a file.
        #[arg(long)]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive clairvoyant optimum of an instance file.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        max_states: Option<u64>,
    },
    /// Serve the decision protocol on stdin/stdout, or on a Unix socket.
    Serve {
        #[arg(long)]
        socket: Option<PathBuf>,
        /// Append-only journal; existing entries are replayed first.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
}

enum Failure {
    Acceptance,
    Config(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn read_json_arg(text: &str) -> Result<Value> {
    let body = match text.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)?,
        None => text.to_string(),
    };
    serde_json::from_str(&body).map_err(|e| Error::Parse { pointer: String::new(), message: e.to_string() })
}

fn run(
    experiment: &str,
    config: Option<&Path>,
    out: &Path,
    replications: Option<usize>,
    seed: Option<u64>,
    full_scale: bool,
) -> Result<()> {
    let id: ExperimentId = experiment.parse()?;
    let overrides = match config {
        Some(p) => read_json_arg(&format!("@{}", p.display()))?,
        None => json!({}),
    };
    let mut cfg = ExperimentConfig::from_json(id, full_scale, &overrides)?;
    if let Some(r) = replications {
        cfg.replications = r;
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    cfg.validate()?;
    let result = run_experiment(&cfg)?;
    for path in write_outputs(&cfg, &result, out)? {
        println!("wrote {}", path.display());
    }
    if result.failures() > 0 {
        eprintln!("{} runs failed; see the status column", result.failures());
    }
    Ok(())
}

fn accept(suite: &str, seed: u64, as_json: bool) -> std::result::Result<(), Failure> {
    let ids: Vec<SuiteId> = if suite == "all" { SuiteId::ALL.to_vec() } else { vec![suite.parse()?] };
    let mut failed = false;
    let mut reports = Vec::new();
    for id in ids {
        let report = run_suite(id, seed);
        println!("{report}");
        for d in &report.details {
            println!("    {d}");
        }
        failed |= !report.passed;
        reports.push(report);
    }
    if as_json {
        for r in &reports {
            println!("{}", serde_json::to_string(r).expect("report serializes"));
        }
    }
    if failed {
        Err(Failure::Acceptance)
    } else {
        Ok(())
    }
}

fn gen(family: &str, params: &str, out: &Path) -> Result<()> {
    let mut value = read_json_arg(params)?;
    let instances = if family == "stochastic" {
        let seed = value.as_object_mut().and_then(|o| o.remove("seed")).and_then(|s| s.as_u64()).unwrap_or(0);
        let cfg: StochasticConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        vec![gen_stochastic(&cfg, seed)?]
    } else {
        let obj = value.as_object_mut().ok_or_else(|| Error::Config("params must be a JSON object".into()))?;
        obj.insert("family".into(), json!(family));
        let p: AdversarialParams = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        gen_adversarial(&p)?
    };
    if instances.len() == 1 {
        write_instance(&instances[0], out)?;
        println!("wrote {}", out.display());
    } else {
        let stem = out.with_extension("");
        for (m, inst) in instances.iter().enumerate() {
            let path = PathBuf::from(format!("{}.{m}.json", stem.display()));
            write_instance(inst, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn opt(instance: &Path, max_states: Option<u64>) -> Result<()> {
    let inst = read_instance(instance)?;
    let mut limits = SearchLimits { want_plan: false, ..SearchLimits::default() };
    if let Some(m) = max_states {
        limits.max_states = m;
    }
    let r = bruteforce_opt(&inst, &limits)?;
    let annotated = inst.meta.opt_annotation().map(|a| json!({"value": a.value, "method": a.method}));
    let report = json!({
        "opt_cost": r.opt_cost,
        "method": r.method,
        "stats": r.stats,
        "annotation": annotated,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn serve(socket: Option<&Path>, journal: Option<&Path>) -> Result<()> {
    let store = match journal {
        Some(p) => SessionStore::resume(p)?,
        None => SessionStore::new(),
    };
    match socket {
        Some(path) => {
            let listener = UnixListener::bind(path)?;
            log::info!("listening on {}", path.display());
            serve_unix(Arc::new(store), listener)
        }
        None => serve_lines(&store, BufReader::new(io::stdin().lock()), io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome: std::result::Result<(), Failure> = match cli.command {
        Command::Run { experiment, config, out, replications, seed, full_scale } => {
            run(&experiment, config.as_deref(), &out, replications, seed, full_scale).map_err(Failure::from)
        }
        Command::Accept { suite, seed, json } => accept(&suite, seed, json),
        Command::Gen { family, params, out } => gen(&family, &params, &out).map_err(Failure::from),
        Command::Opt { instance, max_states } => opt(&instance, max_states).map_err(Failure::from),
        Command::Serve { socket, journal } => serve(socket.as_deref(), journal.as_deref()).map_err(Failure::from),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Acceptance) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
