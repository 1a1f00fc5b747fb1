mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use starcount::report::{Obj, Value};

use commands::{Failure, Output, EXIT_CONFIG};
use config::{RunConfig, CSV_CONFIG_PREFIX};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Signed subgraph counts for planted subgraph detection.
#[derive(Parser)]
#[command(name = "starcount", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Star criterion, total low-degree advantage and regime for one model.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        margins: MarginArgs,
        /// Maximum degree D.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Monte Carlo separation of a statistic under both distributions.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        /// `star:t`, `shape:<key|file>`, `clique-count:k` or `trace:l`.
        #[arg(long)]
        stat: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Regime map over a grid of exponents (pds or pbc), one CSV row per cell.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `pds` or `pbc`.
        #[arg(long)]
        preset: Option<String>,
        /// Comma-separated sizes.
        #[arg(long)]
        n: Option<String>,
        /// Grid `start:stop:step`, a list, or one value.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        margins: MarginArgs,
        /// Also run a Monte Carlo per cell with this many trials per arm.
        #[arg(long)]
        mc_trials: Option<usize>,
        #[arg(long)]
        mc_stat: Option<String>,
    },
    /// Exact oracles and identity checks.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// `battery`, `pattern-count` or `aut`.
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        s1: Option<String>,
        #[arg(long)]
        s2: Option<String>,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Lists all shapes with at most the given number of edges.
    Shapes {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_edges: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file, or a previous output to re-run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `report` or `csv`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Step budget for exact routines (also read from STARCOUNT_WORK_LIMIT).
    #[arg(long)]
    work_limit: Option<String>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    /// Planted graph: clique:k, star:t, biclique:a,b, cycle:L, matching:k, path:L, er:k,q or file:<path>.
    #[arg(long)]
    h: Option<String>,
    /// pds, clique, independent-set, pbc, counterexample-small-p or counterexample-trace.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    gamma: Option<String>,
    /// Constant C of the trace preset (k = round(C sqrt(n))).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Args)]
struct MarginArgs {
    #[arg(long)]
    c_edge: Option<f64>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

impl ModelArgs {
    fn apply(self, cfg: &mut RunConfig) {
        cfg.n = self.n;
        cfg.p = self.p;
        cfg.h = self.h;
        cfg.preset = self.preset;
        cfg.k = self.k;
        cfg.q = self.q;
        cfg.a = self.a;
        cfg.b = self.b;
        cfg.gamma = self.gamma;
        cfg.c = self.c;
        cfg.l = self.l;
    }
}

impl MarginArgs {
    fn apply(self, cfg: &mut RunConfig) {
        cfg.c_edge = self.c_edge;
        cfg.eps_min = self.eps_min;
        cfg.tau = self.tau;
    }
}

/// Flags given on the command line, as a configuration to lay over the file.
fn flags(command: Command) -> Result<(RunConfig, Common), Failure> {
    let (mut cfg, common) = match command {
        Command::Analyze { common, model, margins, d } => {
            let mut c = RunConfig::new("analyze");
            model.apply(&mut c);
            margins.apply(&mut c);
            c.d = d;
            (c, common)
        }
        Command::Simulate { common, model, stat, trials } => {
            let mut c = RunConfig::new("simulate");
            model.apply(&mut c);
            c.stat = stat;
            c.trials = trials;
            (c, common)
        }
        Command::Sweep { common, preset, n, alpha, beta, gamma, d, margins, mc_trials, mc_stat } => {
            let mut c = RunConfig::new("sweep");
            (c.preset, c.n, c.alpha, c.beta, c.gamma, c.d, c.mc_trials, c.mc_stat) = (preset, n, alpha, beta, gamma, d, mc_trials, mc_stat);
            margins.apply(&mut c);
            (c, common)
        }
        Command::Oracle { common, check, s1, s2, shape, instances, trials } => {
            let mut c = RunConfig::new("oracle");
            (c.check, c.s1, c.s2, c.shape, c.instances, c.trials) = (check, s1, s2, shape, instances, trials);
            (c, common)
        }
        Command::Shapes { common, max_edges } => {
            let mut c = RunConfig::new("shapes");
            c.max_edges = max_edges;
            (c, common)
        }
    };
    cfg.seed = common.seed;
    cfg.format = common.format.clone();
    if let Some(w) = &common.work_limit {
        let v = starcount::parse_count(w).ok_or_else(|| Failure { code: EXIT_CONFIG, message: format!("--work-limit `{w}` is not a count") })?;
        cfg.work_limit = Some(v);
    }
    Ok((cfg, common))
}

fn render(cfg: &RunConfig, out: &Output) -> Result<String, Failure> {
    let lines: Vec<Value> = cfg.pairs().into_iter().map(|(k, v)| Value::Str(format!("{k}={v}"))).collect();
    match cfg.format.as_deref().unwrap_or("report") {
        "report" => {
            let header = Obj::new()
                .with("tool", "starcount")
                .with("version", VERSION)
                .with("seed", cfg.seed.unwrap_or(0))
                .with("config", Value::List(lines));
            Ok(Obj::new().with("header", header).with("result", out.result.clone()).build().render())
        }
        "csv" => {
            let mut s = format!("# starcount {VERSION}\n# seed={}\n", cfg.seed.unwrap_or(0));
            for line in cfg.emit().lines() {
                s.push_str(&format!("{CSV_CONFIG_PREFIX}{line}\n"));
            }
            s.push_str(&out.csv_header);
            s.push('\n');
            for row in &out.csv_rows {
                s.push_str(row);
                s.push('\n');
            }
            Ok(s)
        }
        other => Err(Failure { code: EXIT_CONFIG, message: format!("unknown format `{other}` (report or csv)") }),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let (given, common) = flags(cli.command)?;
    let mut cfg = RunConfig::new(&given.command);
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", path.display()) })?;
        let loaded = RunConfig::load(&text)?;
        if !loaded.command.is_empty() && loaded.command != given.command {
            return Err(Failure {
                code: EXIT_CONFIG,
                message: format!("config is for `{}`, not `{}`", loaded.command, given.command),
            });
        }
        cfg.overlay(&loaded);
    }
    cfg.overlay(&given);
    cfg.seed = Some(cfg.seed.unwrap_or(0));
    cfg.work_limit = Some(commands::work_limit(&cfg)?.0);

    let output = match cfg.command.as_str() {
        "analyze" => commands::analyze(&cfg)?,
        "simulate" => commands::simulate(&cfg)?,
        "sweep" => commands::sweep(&cfg)?,
        "oracle" => commands::oracle(&cfg)?,
        _ => commands::shapes(&cfg)?,
    };
    let text = render(&cfg, &output)?;
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })?,
        None => print!("{text}"),
    }
    Ok(output.exit)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
