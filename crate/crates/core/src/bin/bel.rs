use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use bel_core::balanced_energy::NodeConfig;
use bel_core::experiments::{self, strip_version, ExperimentRecord, Table};
use bel_core::profiles::ProfileOptions;
use bel_core::solver_1d::{linspace, DirichletOptions};

/// Balanced-energy experiments for the Allen-Cahn functional in one dimension.
#[derive(Parser)]
#[command(name = "bel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dirichlet minimizer on [0, L]
    Solve(Common),
    /// Balanced energy of a node configuration
    Be(Common),
    /// First variation next to a finite difference
    Variation(Common),
    /// Morse index and nullity from the BE Hessian and the AC spectrum
    Index(Common),
    /// Balanced energy as eps decreases, with the recovery comparator
    GammaSweep(Common),
    /// Profile functions and constants
    Profiles(Common),
    /// Balanced energy of {0, p} over a grid of p
    TwoNodeScan(Common),
    /// Logarithmic cutoff energies in R^2 and R^3
    CutoffNd(Common),
    /// Dirichlet spectral gap of the linearized operator
    GapSweep(Common),
    /// Difference quotients of the minimal energy in eps
    Lipschitz(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Comma-separated list of eps values
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Comma-separated node positions on the unit circle
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<f64>>,
    /// Half the node count for `index`, split points for `two-node-scan`
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<String>>,
    /// Interval length
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long, default_value_t = 50)]
    grid_per_eps: usize,
    /// Newton residual tolerance
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Truncation length for the profiles
    #[arg(long = "T", default_value_t = 40.0)]
    t_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overwrite an existing output file instead of comparing against it
    #[arg(long)]
    regen: bool,
}

impl Common {
    fn dirichlet(&self) -> anyhow::Result<DirichletOptions> {
        if self.grid_per_eps == 0 || self.tol.is_nan() || self.tol <= 0.0 {
            bail!("--grid-per-eps and --tol must be positive");
        }
        Ok(DirichletOptions {
            grid_per_eps: self.grid_per_eps,
            tol: self.tol,
            ..DirichletOptions::default()
        })
    }

    fn eps_or(&self, default: &[f64]) -> Vec<f64> {
        self.eps.clone().unwrap_or_else(|| default.to_vec())
    }

    fn single_eps(&self, default: f64) -> anyhow::Result<f64> {
        match self.eps.as_deref() {
            None => Ok(default),
            Some([e]) => Ok(*e),
            Some(_) => bail!("this subcommand takes a single --eps value"),
        }
    }

    fn config_or(&self, default: &[f64]) -> anyhow::Result<NodeConfig> {
        let nodes = self.nodes.clone().unwrap_or_else(|| default.to_vec());
        Ok(NodeConfig::new(nodes)?)
    }

    fn length(&self) -> f64 {
        self.length.unwrap_or(0.5)
    }

    fn p_as<T: std::str::FromStr>(&self) -> anyhow::Result<Option<Vec<T>>>
    where
        T::Err: std::error::Error + Send + Sync + 'static,
    {
        self.p
            .as_ref()
            .map(|v| {
                v.iter()
                    .map(|s| s.trim().parse::<T>().with_context(|| format!("invalid --p value {s:?}")))
                    .collect()
            })
            .transpose()
    }
}

enum Output {
    Record(ExperimentRecord),
    Csv(String),
}

fn run(command: &Command) -> anyhow::Result<(Output, &Common)> {
    use experiments::*;
    let out = match command {
        Command::Solve(c) => Output::Record(solve_record(c.length(), c.single_eps(0.02)?, &c.dirichlet()?)?),
        Command::Be(c) => Output::Record(be_record(&c.config_or(&[0.0, 0.5])?, &c.eps_or(&[0.02]), &c.dirichlet()?)?),
        Command::Variation(c) => Output::Record(variation_record(
            &c.config_or(&[0.0, 0.4])?,
            c.single_eps(0.05)?,
            &c.dirichlet()?,
        )?),
        Command::Index(c) => {
            let p = c.p_as::<usize>()?.unwrap_or_else(|| vec![1]);
            Output::Record(index_record(&p, &c.eps_or(&[0.05]), &c.dirichlet()?)?)
        }
        Command::GammaSweep(c) => Output::Record(gamma_record(
            &c.config_or(&[0.0, 0.5])?,
            &c.eps_or(&[0.02, 0.01, 0.005]),
            &c.dirichlet()?,
        )?),
        Command::Profiles(c) => {
            let opts = ProfileOptions {
                t_max: c.t_max,
                ..ProfileOptions::default()
            };
            if opts.t_max.is_nan() || opts.t_max <= 0.0 {
                bail!("--T must be positive");
            }
            match c.format.unwrap_or(Format::Csv) {
                Format::Csv => Output::Csv(profiles_csv(&opts, 10)?),
                Format::Json => Output::Record(profiles_record(&opts)?),
            }
        }
        Command::TwoNodeScan(c) => {
            let grid = c.p_as::<f64>()?.unwrap_or_else(|| linspace(0.05, 0.95, 37));
            Output::Record(two_node_record(c.single_eps(0.02)?, &grid)?)
        }
        Command::CutoffNd(c) => Output::Record(cutoff_record(c.single_eps(0.1)?)?),
        Command::GapSweep(c) => Output::Record(gap_record(c.length(), &c.eps_or(&[0.05, 0.03, 0.02, 0.01]))?),
        Command::Lipschitz(c) => {
            let grid = c.eps.clone().unwrap_or_else(|| linspace(0.01, 0.1, 20));
            Output::Record(lipschitz_record(c.length(), &grid)?)
        }
    };
    let common = match command {
        Command::Solve(c)
        | Command::Be(c)
        | Command::Variation(c)
        | Command::Index(c)
        | Command::GammaSweep(c)
        | Command::Profiles(c)
        | Command::TwoNodeScan(c)
        | Command::CutoffNd(c)
        | Command::GapSweep(c)
        | Command::Lipschitz(c) => c,
    };
    Ok((out, common))
}

/// Long-format CSV of a record: one row per leaf of its results.
fn record_csv(rec: &ExperimentRecord) -> String {
    fn walk(prefix: &str, v: &Value, t: &mut Table) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, t);
                }
            }
            Value::Array(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), x, t);
                }
            }
            Value::String(s) => t.push(vec![prefix.to_string(), s.clone()]),
            Value::Null => t.push(vec![prefix.to_string(), String::new()]),
            other => t.push(vec![prefix.to_string(), other.to_string()]),
        }
    }
    let mut t = Table::new(&["key", "value"]);
    let v = rec.to_value();
    for section in ["params", "results"] {
        walk(section, &v[section], &mut t);
    }
    t.to_csv()
}

fn same_output(old: &str, new: &str, json: bool) -> bool {
    if json {
        match (strip_version(old), strip_version(new)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    } else {
        old == new
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<ExitCode> {
    if let Ok(n) = std::env::var("BEL_THREADS") {
        let n: usize = n.parse().context("BEL_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let (output, common) = run(&cli.command)?;
    let (text, json, failures) = match &output {
        Output::Csv(s) => (s.clone(), false, Vec::new()),
        Output::Record(rec) => {
            let failures: Vec<String> = rec
                .failures()
                .iter()
                .map(|a| format!("{}: {}", a.tag, a.detail))
                .collect();
            match common.format.unwrap_or(Format::Json) {
                Format::Json => (rec.to_json(), true, failures),
                Format::Csv => (record_csv(rec), false, failures),
            }
        }
    };

    let mut code = ExitCode::SUCCESS;
    match &common.out {
        None => print!("{text}"),
        Some(path) if path.exists() && !common.regen => {
            let old = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            if !same_output(&old, &text, json) {
                eprintln!("output differs from {} (rerun with --regen to overwrite)", path.display());
                code = ExitCode::from(2);
            }
        }
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("assertion failed: {f}");
        }
        code = ExitCode::from(2);
    }
    Ok(code)
}
