use std::io::{BufReader, IsTerminal};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ksubs_core::seed::substream;
use ksubs_core::StateCodec;
use ksubs_envs::gridworld::GridConfig;
use ksubs_envs::rubik::RubikCube;
use ksubs_envs::sokoban::Sokoban;
use ksubs_harness::analyze::{self, certify};
use ksubs_harness::config::{EnvKind, ExperimentConfig, Planner, ProviderSpec};
use ksubs_harness::output::emit;
use ksubs_harness::sweep::{self, build_instances, instance_seed, load_corpus, Instances, Shared};
use ksubs_harness::table4::{table4, Table4Csv, TABLE4_HEADER};
use ksubs_harness::{datagen, run_k_sweep, run_sweep, SweepReport};
use ksubs_providers::bridge::server::{serve_stdio, spawn_tcp, ServerOptions};
use ksubs_providers::bridge::{BridgeClient, Endpoint, Transport};
use ksubs_providers::{read_records, TabularModel};

#[derive(Parser)]
#[command(name = "ksubs", version, about = "Subgoal search experiments")]
struct Cli {
    /// Master seed; per-instance seeds are derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Experiment {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Environment, when no config file is given.
    #[arg(long, value_enum)]
    env: Option<EnvKind>,
    #[arg(long, value_enum)]
    planner: Option<Planner>,
    #[arg(long)]
    provider: Option<ProviderSpec>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    budgets: Vec<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    scramble_len: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and print the result.
    Solve {
        #[command(flatten)]
        exp: Experiment,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Success rate against budget.
    Sweep {
        #[command(flatten)]
        exp: Experiment,
    },
    /// Success rate against budget for several k.
    Ksweep {
        #[command(flatten)]
        exp: Experiment,
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<usize>,
    },
    /// Grid-world noise table.
    Table4 {
        #[arg(long, value_delimiter = ',', default_values_t = [3.0, 10.0, 20.0])]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        c3: usize,
    },
    /// Write a dataset of trajectory records.
    GenData {
        #[arg(value_enum)]
        env: DataEnv,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 30)]
        len: usize,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Sokoban analyses.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Serve a tabular model over the bridge protocol.
    Serve {
        #[arg(long, value_enum)]
        env: EnvKind,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ServeTransport::Stdio)]
        transport: ServeTransport,
        #[arg(long, default_value_t = 0)]
        port: u16,
    },
    /// Connect to a bridge endpoint and perform the handshake.
    ServeCheck {
        /// `tcp:host:port` or `cmd:program args`.
        #[arg(long)]
        endpoint: String,
        #[arg(long, value_enum)]
        env: EnvKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DataEnv {
    Rubik,
    Sokoban,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ServeTransport {
    Stdio,
    Tcp,
}

#[derive(Args, Clone)]
struct CorpusArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Analysis {
    /// Δ histogram of oracle (optionally corrupted) subgoals.
    Delta {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        c3: usize,
        #[arg(long, default_value_t = 0.0)]
        corrupt: f64,
    },
    /// Spread and over-optimism of a noisy distance value.
    ValueErrors {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        #[arg(long, default_value_t = 1)]
        realizations: usize,
    },
    /// Decrease rate of a noisy distance value along solutions.
    Monotonicity {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4])]
        ls: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        realizations: usize,
    },
}

fn experiment(cli: &Cli, exp: &Experiment) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match (&exp.config, exp.env) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(env)) => ExperimentConfig::new(env),
        (None, None) => bail!("either --config or --env is required"),
    };
    if let Some(env) = exp.env {
        cfg.env = env;
    }
    if let Some(p) = exp.planner {
        cfg.planner = p;
    }
    if let Some(p) = &exp.provider {
        cfg.provider = p.clone();
    }
    if exp.trials.is_some() {
        cfg.trials = exp.trials;
    }
    if !exp.budgets.is_empty() {
        cfg.budgets = exp.budgets.clone();
    }
    if exp.k.is_some() {
        cfg.search.k = exp.k;
    }
    if exp.scramble_len.is_some() {
        cfg.instances.scramble_len = exp.scramble_len;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn report_problems(report: &SweepReport) {
    for i in &report.skipped_boards {
        eprintln!("skipped board {i}: state graph exceeds the cap");
    }
    if !report.errors.is_empty() {
        eprintln!("{} solves failed with an error", report.errors.len());
        for (budget, i, e) in report.errors.iter().take(10) {
            eprintln!("  budget {budget}, instance {i}: {e}");
        }
    }
}

fn corpus_from(path: &Option<PathBuf>) -> anyhow::Result<Vec<ksubs_envs::sokoban::SokobanBoard>> {
    let mut cfg = ExperimentConfig::new(EnvKind::Sokoban);
    cfg.instances.corpus = path.clone();
    load_corpus(&cfg)
}

fn solve(cfg: &ExperimentConfig, index: usize) -> anyhow::Result<()> {
    let budget = *cfg.budgets.first().context("solve needs --budgets or a budgets entry in the config")?;
    let mut single = cfg.clone();
    single.trials = Some(index + 1);
    let (instances, _) = build_instances(&single)?;
    if index >= instances.len() {
        bail!("instance {index} does not exist");
    }
    let shared = Shared::load(cfg, cfg.search_config(1)?.k)?;
    let seed = substream(instance_seed(cfg.seed, index), 5);
    let provider_seed = substream(instance_seed(cfg.seed, index), 1);
    let line = match &instances {
        Instances::Grid { world, .. } => {
            let mut b = sweep::grid_bundle(&cfg.provider, &shared, provider_seed)?;
            let (r, p) = sweep::run_planner(cfg, world, &world.start(), &mut *b, budget, seed)?;
            describe(world, &r, p)
        }
        Instances::Rubik { starts } => {
            let mut b = sweep::rubik_bundle(&cfg.provider, &shared, provider_seed)?;
            let (r, p) = sweep::run_planner(cfg, &RubikCube, &starts[index], &mut *b, budget, seed)?;
            format!("start={} {}", starts[index], describe(&RubikCube, &r, p))
        }
        Instances::Sokoban { boards } => {
            let (board, map) = &boards[index];
            let mut b = sweep::sokoban_bundle(&cfg.provider, &shared, map, provider_seed)?;
            let (r, p) = sweep::run_planner(cfg, &Sokoban, board, &mut *b, budget, seed)?;
            format!("start={} {}", Sokoban.encode_state(board), describe(&Sokoban, &r, p))
        }
    };
    println!("{line}");
    Ok(())
}

fn describe<E: StateCodec>(
    env: &E,
    r: &ksubs_core::SearchResult<E::Action>,
    policy: ksubs_core::CountingPolicy,
) -> String {
    let actions: Vec<String> = r.actions.iter().map(|a| env.encode_action(a)).collect();
    format!(
        "status={} graph_size={} length={} actions={}",
        r.status.as_str(),
        r.metrics.graph_size(policy),
        r.actions.len(),
        actions.join(" ")
    )
}

fn load_model(dataset: &Path, k: usize) -> anyhow::Result<TabularModel> {
    let file = std::fs::File::open(dataset).with_context(|| format!("opening {}", dataset.display()))?;
    let records = read_records(BufReader::new(file)).map_err(|e| anyhow::anyhow!("{}: {e}", dataset.display()))?;
    Ok(TabularModel::fit(&records, k))
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    match &cli.cmd {
        Cmd::Solve { exp, index } => solve(&experiment(&cli, exp)?, *index)?,
        Cmd::Sweep { exp } => {
            let cfg = experiment(&cli, exp)?;
            let report = run_sweep(&cfg)?;
            report_problems(&report);
            emit(cfg.out.as_deref(), &sweep::SWEEP_HEADER, &report.rows)?;
        }
        Cmd::Ksweep { exp, ks } => {
            let cfg = experiment(&cli, exp)?;
            let (rows, report) = run_k_sweep(&cfg, ks)?;
            report_problems(&report);
            emit(cfg.out.as_deref(), &sweep::KSWEEP_HEADER, &rows)?;
        }
        Cmd::Table4 { sigmas, budget, trials, k, c3 } => {
            let cfg = GridConfig { k: *k, c3: *c3, seed, ..GridConfig::table4(0.0) };
            let pool = sweep::pool(cli.workers.unwrap_or(1))?;
            let rows: Vec<Table4Csv> = table4(&pool, &cfg, sigmas, *budget, *trials).iter().map(Into::into).collect();
            emit(out, &TABLE4_HEADER, &rows)?;
        }
        Cmd::GenData { env, count, len, corpus } => {
            let lines = match env {
                DataEnv::Rubik => datagen::rubik_records(*count, *len, seed),
                DataEnv::Sokoban => {
                    let (lines, skipped) = datagen::sokoban_records(&corpus_from(corpus)?);
                    for i in skipped {
                        eprintln!("skipped board {i}: over the cap or unsolvable");
                    }
                    lines
                }
            };
            match out {
                Some(p) => datagen::write_lines(std::fs::File::create(p)?, &lines)?,
                None => datagen::write_lines(std::io::stdout().lock(), &lines)?,
            }
        }
        Cmd::Analyze { what } => {
            let corpus = match what {
                Analysis::Delta { corpus, .. }
                | Analysis::ValueErrors { corpus, .. }
                | Analysis::Monotonicity { corpus, .. } => corpus_from(&corpus.corpus)?,
            };
            let certified = certify(&corpus);
            for i in &certified.skipped {
                eprintln!("skipped board {i}: state graph exceeds the cap");
            }
            match what {
                Analysis::Delta { k, c3, corrupt, .. } => {
                    let (_, rows) = analyze::delta(&certified, *k, *c3, *corrupt, seed);
                    emit(out, &analyze::DELTA_HEADER, &rows)?;
                }
                Analysis::ValueErrors { sigma, radius, realizations, .. } => {
                    let rows = analyze::value_errors(&certified, *sigma, *radius, *realizations, seed);
                    emit(out, &analyze::VALUE_ERROR_HEADER, &rows)?;
                }
                Analysis::Monotonicity { sigma, ls, realizations, .. } => {
                    let rows = analyze::monotonicity(&certified, *sigma, ls, *realizations, seed);
                    emit(out, &analyze::MONOTONICITY_HEADER, &rows)?;
                }
            }
        }
        Cmd::Serve { env, dataset, k, transport, port } => {
            let model = load_model(dataset, *k)?;
            let opts = ServerOptions::new(env.as_str());
            match transport {
                ServeTransport::Stdio => {
                    if std::io::stdin().is_terminal() {
                        eprintln!("serving on stdin/stdout; one JSON request per line");
                    }
                    let mut model = model;
                    serve_stdio(&mut model, &opts)?;
                }
                ServeTransport::Tcp => {
                    let (addr, handle) = spawn_tcp(&format!("127.0.0.1:{port}"), opts, move || model.clone())?;
                    println!("listening on {addr}");
                    handle.join().map_err(|_| anyhow::anyhow!("server thread panicked"))?;
                }
            }
        }
        Cmd::ServeCheck { endpoint, env } => {
            let transport = Transport::parse(endpoint).map_err(anyhow::Error::msg)?;
            let e = Endpoint::new(transport, env.as_str());
            BridgeClient::connect(&e).with_context(|| format!("handshake with {endpoint}"))?;
            println!("ok: {endpoint} speaks protocol {} for {}", e.version, env.as_str());
        }
    }
    Ok(())
}
