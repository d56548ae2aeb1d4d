//! `petsync`: synchronizing sequences for synchronized Petri nets.
//!
//! Exit codes: 0 success, 1 parse or malformed net (also internal
//! consistency failures), 2 no synchronizing sequence exists, 3 the chosen
//! method is insufficient for this net, 4 budget or time limit, 5 invalid
//! arguments.

mod sync_cmd;

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use petsync::genbench::{self, FixedInstance};
use petsync::sm_structure::{decompose, ComponentClass, ComponentPartition};
use petsync::{
    build_rg_seeded, count_reachable_sm, BenchConfig, Deadline, Error, GenParams, Marking, NetDocument,
    SynchronizedNet, DEFAULT_NODE_BUDGET,
};

#[derive(Parser)]
#[command(name = "petsync")]
#[command(about = "Synchronizing sequences for synchronized Petri nets")]
#[command(version)]
struct Cli {
    /// Repeat for more log output on stderr
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Report state-machine status, determinism and the component structure
    Classify {
        file: PathBuf,

        /// Token count for the reachable-marking formula (default: the file's marking)
        #[arg(long)]
        k: Option<u32>,
    },

    /// Compute a synchronizing sequence and print it with its certified target
    Sync(SyncArgs),

    /// Generate a random deterministic strongly connected state machine
    Gen {
        m: usize,
        q: usize,
        alphabet_size: usize,
        seed: u64,

        /// Write the net file here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Compare the structural and reachability methods on random nets
    Bench {
        /// Place range, `lo-hi` or a single value
        #[arg(long, default_value = "2-4")]
        m: Span,

        /// Transition range
        #[arg(long, default_value = "2-8")]
        q: Span,

        /// Token range
        #[arg(long, default_value = "1")]
        k: Span,

        #[arg(long, default_value_t = 20)]
        trials: usize,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Per instance and method, in seconds; 0 disables the limit
        #[arg(long, default_value_t = 10.0)]
        time_budget: f64,

        /// Reachability graph node budget
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,

        /// Net file with a `target_place`, evaluated as a fixed instance
        #[arg(long)]
        fixture: Vec<PathBuf>,

        /// CSV destination; the ratio summary then goes to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Print the reachability graph as an edge list
    Rg {
        file: PathBuf,

        /// Initial marking, e.g. `p1=2,p3` (default: the file's marking)
        #[arg(long)]
        marking: Option<String>,

        /// Seed with every k-token marking instead (state machines only)
        #[arg(long, conflicts_with = "marking")]
        k: Option<u32>,

        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,

        /// Add the self-loops of non-receptive events
        #[arg(long)]
        complete: bool,
    },
}

#[derive(clap::Args)]
pub struct SyncArgs {
    pub file: PathBuf,

    #[arg(long, conflicts_with = "target_marking")]
    pub target_place: Option<String>,

    /// Target marking, e.g. `p4=2` or `p1:1 p3:1`
    #[arg(long)]
    pub target_marking: Option<String>,

    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,

    /// Token count for a place target (default: the file's marking, else 1)
    #[arg(long)]
    pub k: Option<u32>,

    /// Reachability graph node budget
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: usize,

    /// Wall-clock limit in seconds
    #[arg(long)]
    pub timeout: Option<f64>,

    /// Breadth-first structural search (shortest path first)
    #[arg(long)]
    pub bfs: bool,

    /// Emit {sequence, target, method, verified_from} as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Structural first, reachability graph as fallback
    Auto,
    Rg,
    Sts,
    Condensed,
    Subnet,
}

#[derive(Clone, Debug)]
struct Span(RangeInclusive<usize>);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad range `{s}`"));
        match s.split_once('-') {
            Some((lo, hi)) => Ok(Span(num(lo)?..=num(hi)?)),
            None => {
                let v = num(s)?;
                Ok(Span(v..=v))
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Net(#[from] Error),

    #[error("no synchronizing sequence exists: {0}")]
    NoSequence(String),

    #[error("method failed: {0}")]
    Insufficient(String),

    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Net(e) => match e {
                Error::Parse { .. } | Error::Structural(_) | Error::Consistency(_) => 1,
                Error::Obstruction { .. } | Error::UnreachableTarget(_) => 2,
                Error::NotApplicable(_) | Error::NotStateMachine(_) | Error::Nondeterministic(_) => 3,
                Error::Boundedness { .. } | Error::Timeout | Error::Arithmetic(_) => 4,
                Error::Input(_) | Error::Generation { .. } => 5,
            },
            CliError::NoSequence(_) => 2,
            CliError::Insufficient(_) => 3,
            CliError::Usage(_) | CliError::Io { .. } => 5,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(5) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    // no environment variables: the filter comes from the flags only
    env_logger::Builder::new().filter_level(level).init();

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Commands::Classify { file, k } => classify(&mut out, &file, k),
        Commands::Sync(args) => sync_cmd::run(&mut out, &args),
        Commands::Gen { m, q, alphabet_size, seed, out: path } => generate(&mut out, m, q, alphabet_size, seed, path),
        Commands::Bench { m, q, k, trials, seed, time_budget, budget, fixture, out: path } => {
            let k = *k.0.start() as u32..=*k.0.end() as u32;
            let cfg = BenchConfig {
                m: m.0,
                q: q.0,
                k,
                trials,
                seed,
                time_budget: (time_budget > 0.0).then(|| Duration::from_secs_f64(time_budget)),
                node_budget: budget,
                fixtures: Vec::new(),
            };
            bench(&mut out, cfg, &fixture, path)
        }
        Commands::Rg { file, marking, k, budget, complete } => rg(&mut out, &file, marking, k, budget, complete),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn load(path: &Path) -> CliResult<(NetDocument, SynchronizedNet)> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let doc = NetDocument::parse(&text)?;
    let net = doc.to_net()?;
    Ok((doc, net))
}

pub fn write_out(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
}

pub fn component_list(net: &SynchronizedNet, partition: &ComponentPartition, class: ComponentClass) -> String {
    let groups: Vec<String> = partition
        .components
        .iter()
        .filter(|c| c.class == class)
        .map(|c| {
            let names: Vec<&str> = c.places.iter().map(|&p| net.net().place_name(p)).collect();
            format!("{{{}}}", names.join(","))
        })
        .collect();
    if groups.is_empty() {
        "none".to_string()
    } else {
        groups.join(",")
    }
}

fn classify(out: &mut dyn Write, path: &Path, k: Option<u32>) -> CliResult<()> {
    let (doc, net) = load(path)?;
    let pt = net.net();
    let mut text = format!(
        "places: {}\ntransitions: {}\nevents: {}\n",
        net.place_count(),
        net.transition_count(),
        net.event_count()
    );

    let report = net.check_determinism();
    if report.is_deterministic() {
        text.push_str("deterministic: yes\n");
    } else {
        let items: Vec<String> = report
            .violations
            .iter()
            .map(|v| {
                format!(
                    "{}: {} and {} share {}",
                    pt.place_name(v.place),
                    pt.transition_name(v.first),
                    pt.transition_name(v.second),
                    net.event_name(net.label(v.first))
                )
            })
            .collect();
        text.push_str(&format!("deterministic: no ({})\n", items.join("; ")));
    }

    if !pt.is_state_machine() {
        text.push_str("SM: no\n");
        return write_out(out, &text);
    }
    text.push_str("SM: yes\n");
    let partition = decompose(pt)?;
    let eta = partition.ergodic().count();
    let mu = partition.transient().count();
    if partition.components.iter().all(|c| c.places.len() == 1) {
        text.push_str(&format!("components: {} (one per place)\n", partition.len()));
    } else {
        text.push_str(&format!("components: {}\n", partition.len()));
    }
    text.push_str(&format!(
        "transient: {}; ergodic: {}; η={eta}; μ={mu}\n",
        component_list(&net, &partition, ComponentClass::Transient),
        component_list(&net, &partition, ComponentClass::Ergodic),
    ));
    let connected = partition.is_strongly_connected();
    text.push_str(&format!("strongly connected: {}\n", if connected { "yes" } else { "no" }));

    let tokens = match k {
        Some(k) => Some(u64::from(k)),
        None => doc.marking(&net)?.map(|m| m.total()),
    };
    if connected {
        if let Some(k) = tokens {
            let n = count_reachable_sm(net.place_count() as u64, k)?;
            text.push_str(&format!("tokens: {k}\nreachable markings: {n}\n"));
        }
    }
    write_out(out, &text)
}

fn generate(out: &mut dyn Write, m: usize, q: usize, alphabet_size: usize, seed: u64, path: Option<PathBuf>) -> CliResult<()> {
    let net = petsync::random_sm(GenParams { m, q, alphabet_size, seed })?;
    let text = NetDocument::from_net(&net).to_json();
    match path {
        Some(path) => fs::write(&path, text).map_err(|source| CliError::Io { path, source }),
        None => write_out(out, &text),
    }
}

fn bench(out: &mut dyn Write, mut cfg: BenchConfig, fixtures: &[PathBuf], path: Option<PathBuf>) -> CliResult<()> {
    for file in fixtures {
        let (doc, net) = load(file)?;
        let target = doc
            .target_place(&net)?
            .ok_or_else(|| CliError::Usage(format!("{}: fixture needs a target_place", file.display())))?;
        let name = file.file_stem().map_or("fixture".into(), |s| s.to_string_lossy().into_owned());
        cfg.fixtures.push(FixedInstance { name, net, target });
    }
    let records = petsync::run_benchmark(&cfg)?;

    let mut csv = Vec::new();
    genbench::write_csv(&mut csv, &cfg, &records)?;
    let mut summary = String::from("m q k N_STS/N_RG T_STS/T_RG L_STS/L_RG\n");
    let fmt = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{v:.4}"));
    for r in &records {
        let cell = match &r.fixture {
            Some(name) => format!("{name} k={}", r.k),
            None => format!("{} {} {}", r.m, r.q, r.k),
        };
        if r.feasible {
            summary.push_str(&format!("{cell} {} {} {}\n", fmt(r.n_ratio()), fmt(r.t_ratio()), fmt(r.l_ratio())));
        } else {
            summary.push_str(&format!("{cell} infeasible\n"));
        }
    }
    match path {
        Some(path) => {
            fs::write(&path, csv).map_err(|source| CliError::Io { path, source })?;
            write_out(out, &summary)
        }
        None => {
            eprint!("{summary}");
            out.write_all(&csv)
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn rg(out: &mut dyn Write, path: &Path, marking: Option<String>, k: Option<u32>, budget: usize, complete: bool) -> CliResult<()> {
    let (doc, net) = load(path)?;
    let starts: Vec<Marking> = if let Some(k) = k {
        if !net.net().is_state_machine() {
            return Err(CliError::Usage("--k needs a state machine".into()));
        }
        petsync::net::token_distributions(net.place_count(), k).collect()
    } else {
        let m0 = match marking {
            Some(spec) => petsync::document::parse_marking_spec(&net, &spec)?,
            None => doc
                .marking(&net)?
                .ok_or_else(|| CliError::Usage("no initial marking: pass --marking or --k".into()))?,
        };
        vec![m0]
    };
    let mut graph = build_rg_seeded(&net, &starts, budget, Deadline::none())?;
    if complete {
        graph = graph.complete();
    }
    write_out(out, &graph.to_edge_list(&net))
}
