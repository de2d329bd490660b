//! Budget and k sweeps: per-instance seeded solves on a bounded worker pool,
//! aggregated in instance order.

use std::sync::Arc;

use anyhow::{bail, Context};
use ksubs_core::mcts::SubgoalChildren;
use ksubs_core::seed::{derive_seed, substream};
use ksubs_core::{
    bf_ksubs_solve, chain_sampler_solve, mcts_solve, Environment, ProviderBundle, SearchResult, StateCodec,
};
use ksubs_envs::gridworld::{GridBundle, GridState, GridWorld};
use ksubs_envs::rubik::{scramble, CubeState, RubikCube};
use ksubs_envs::sokoban::corpus::micro_corpus;
use ksubs_envs::sokoban::{dijkstra_all, parse_boards, DistanceMap, Sokoban, SokobanBoard, DEFAULT_CAP};
use ksubs_providers::bridge::{BridgeBundle, BridgeClient, Endpoint, Transport};
use ksubs_providers::{read_records, CorruptedGenerator, NoisyValue, RubikOracle, SokobanOracle, TabularBundle, TabularModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EnvKind, ExperimentConfig, Planner, ProviderSpec};

pub const SWEEP_HEADER: [&str; 7] = [
    "budget",
    "method",
    "success_rate",
    "mean_graph_size",
    "mean_path_length",
    "trials",
    "seed",
];

pub const KSWEEP_HEADER: [&str; 8] = [
    "k",
    "budget",
    "method",
    "success_rate",
    "mean_graph_size",
    "mean_path_length",
    "trials",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub budget: usize,
    pub method: String,
    pub success_rate: f64,
    pub mean_graph_size: f64,
    /// Over solved instances; empty when none was solved.
    pub mean_path_length: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSweepRow {
    pub k: usize,
    pub row: SweepRow,
}

impl Serialize for KSweepRow {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let r = &self.row;
        (self.k, r.budget, &r.method, r.success_rate, r.mean_graph_size, r.mean_path_length, r.trials, r.seed)
            .serialize(serializer)
    }
}

/// One solved (or not) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub solved: bool,
    pub graph_size: usize,
    pub path_len: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// `(budget, instance, message)` for every solve that returned an error.
    pub errors: Vec<(usize, usize, String)>,
    /// Corpus boards dropped because their state graph exceeded the cap.
    pub skipped_boards: Vec<usize>,
}

/// Start states plus what the providers need to know about them.
pub enum Instances {
    Grid { world: GridWorld, count: usize },
    Rubik { starts: Vec<CubeState> },
    Sokoban { boards: Vec<(SokobanBoard, Arc<DistanceMap>)> },
}

impl Instances {
    pub fn len(&self) -> usize {
        match self {
            Self::Grid { count, .. } => *count,
            Self::Rubik { starts } => starts.len(),
            Self::Sokoban { boards } => boards.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn instance_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, index as u64)
}

pub fn load_corpus(cfg: &ExperimentConfig) -> anyhow::Result<Vec<SokobanBoard>> {
    match &cfg.instances.corpus {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_boards(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
        }
        None => Ok(micro_corpus()),
    }
}

/// Builds the instance list; also returns corpus indices skipped as over-cap.
pub fn build_instances(cfg: &ExperimentConfig) -> anyhow::Result<(Instances, Vec<usize>)> {
    let inst = &cfg.instances;
    Ok(match cfg.env {
        EnvKind::Grid => {
            let world = GridWorld::new(inst.grid_m.unwrap_or(6), inst.grid_n.unwrap_or(10));
            (Instances::Grid { world, count: cfg.trials.unwrap_or(100) }, Vec::new())
        }
        EnvKind::Rubik => {
            let max = inst.scramble_len.unwrap_or(4);
            let min = inst.scramble_min.unwrap_or(max);
            if min > max {
                bail!("scramble_min exceeds scramble_len");
            }
            let starts = (0..cfg.trials.unwrap_or(100))
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(substream(instance_seed(cfg.seed, i), 0));
                    let len = rng.random_range(min..=max);
                    scramble(len, &mut rng).0
                })
                .collect();
            (Instances::Rubik { starts }, Vec::new())
        }
        EnvKind::Sokoban => {
            let corpus = load_corpus(cfg)?;
            let maps: Vec<_> = corpus.par_iter().map(|b| dijkstra_all(b, DEFAULT_CAP)).collect();
            let mut live = Vec::new();
            let mut skipped = Vec::new();
            for (i, (board, map)) in corpus.into_iter().zip(maps).enumerate() {
                match map {
                    Ok(m) => live.push((board, Arc::new(m))),
                    Err(_) => skipped.push(i),
                }
            }
            let count = cfg.trials.unwrap_or(live.len());
            let boards = if live.is_empty() {
                Vec::new()
            } else {
                (0..count).map(|i| live[i % live.len()].clone()).collect()
            };
            (Instances::Sokoban { boards }, skipped)
        }
    })
}

/// Provider resources loaded once per sweep and shared by all instances.
pub struct Shared {
    pub tabular: Option<TabularModel>,
}

impl Shared {
    pub fn load(cfg: &ExperimentConfig, k: usize) -> anyhow::Result<Self> {
        let tabular = match &cfg.provider {
            ProviderSpec::Tabular(path) => {
                let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let records = read_records(std::io::BufReader::new(file))
                    .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                Some(TabularModel::fit(&records, k))
            }
            _ => None,
        };
        Ok(Self { tabular })
    }
}

type Bundle<'a, E> = Box<dyn ProviderBundle<E, f64> + 'a>;

fn learned<'a, E: StateCodec + 'a>(
    spec: &ProviderSpec,
    shared: &'a Shared,
    env: EnvKind,
) -> Option<anyhow::Result<Bundle<'a, E>>> {
    match spec {
        ProviderSpec::Tabular(_) => {
            let model = shared.tabular.as_ref().expect("tabular model loaded");
            Some(Ok(Box::new(TabularBundle::new(model))))
        }
        ProviderSpec::Bridge(endpoint) => Some((|| {
            let transport = Transport::parse(endpoint).map_err(anyhow::Error::msg)?;
            let client = BridgeClient::connect(&Endpoint::new(transport, env.as_str()))
                .with_context(|| format!("bridge handshake with {endpoint}"))?;
            Ok(Box::new(BridgeBundle::new(client)) as Bundle<'a, E>)
        })()),
        _ => None,
    }
}

fn wrap<'a, E, B>(spec: &ProviderSpec, oracle: B, seed: u64) -> anyhow::Result<Bundle<'a, E>>
where
    E: Environment + 'a,
    E::State: 'a,
    B: ProviderBundle<E, f64> + 'a,
{
    Ok(match *spec {
        ProviderSpec::Oracle => Box::new(oracle),
        ProviderSpec::Noisy(sigma) => Box::new(NoisyValue::new(oracle, sigma, substream(seed, 3))),
        ProviderSpec::Corrupt(rate) => Box::new(CorruptedGenerator::new(oracle, rate, substream(seed, 4))),
        _ => bail!("provider {spec} is not available here"),
    })
}

pub fn grid_bundle<'a>(spec: &ProviderSpec, shared: &'a Shared, seed: u64) -> anyhow::Result<Bundle<'a, GridWorld>> {
    if let Some(b) = learned(spec, shared, EnvKind::Grid) {
        return b;
    }
    match *spec {
        ProviderSpec::Synthetic(sigma) => Ok(Box::new(GridBundle::synthetic(sigma, seed))),
        _ => wrap(spec, GridBundle::<f64>::oracle(), seed),
    }
}

pub fn rubik_bundle<'a>(spec: &ProviderSpec, shared: &'a Shared, seed: u64) -> anyhow::Result<Bundle<'a, RubikCube>> {
    if let Some(b) = learned(spec, shared, EnvKind::Rubik) {
        return b;
    }
    wrap(spec, RubikOracle::default(), seed)
}

pub fn sokoban_bundle<'a>(
    spec: &ProviderSpec,
    shared: &'a Shared,
    map: &Arc<DistanceMap>,
    seed: u64,
) -> anyhow::Result<Bundle<'a, Sokoban>> {
    if let Some(b) = learned(spec, shared, EnvKind::Sokoban) {
        return b;
    }
    wrap(spec, SokobanOracle::from_map(map.clone()), seed)
}

/// Runs the configured planner once. `budget` is `C1` for best-first and the
/// chain sampler, and passes per planner call for MCTS.
pub fn run_planner<E, B>(
    cfg: &ExperimentConfig,
    env: &E,
    start: &E::State,
    bundle: &mut B,
    budget: usize,
    seed: u64,
) -> anyhow::Result<(SearchResult<E::Action>, ksubs_core::CountingPolicy)>
where
    E: Environment,
    B: ProviderBundle<E, f64> + ?Sized,
{
    let mcts_search = || -> anyhow::Result<_> {
        let mut s = cfg.search_config(usize::MAX)?;
        if cfg.planner == Planner::MctsBaseline {
            s.k = 1;
        }
        Ok(s)
    };
    let result = match cfg.planner {
        Planner::BfKsubs | Planner::BestfsBaseline => {
            let mut search = cfg.search_config(budget)?.with_seed(seed);
            if cfg.planner == Planner::BestfsBaseline {
                search.k = 1;
            }
            let policy = search.counting_policy;
            (bf_ksubs_solve(start, env, bundle, &search)?, policy)
        }
        Planner::ChainSampler => {
            let mut chain = cfg.chain_config(budget)?;
            chain.search.rng_seed = seed;
            let policy = chain.search.counting_policy;
            (chain_sampler_solve(start, env, bundle, &chain)?, policy)
        }
        Planner::MctsKsubs | Planner::MctsBaseline => {
            let mut mcts = cfg.mcts_config(budget)?;
            mcts.rng_seed = seed;
            let search = mcts_search()?;
            let policy = search.counting_policy;
            let mut children = SubgoalChildren { search };
            (mcts_solve(start, env, bundle, &mut children, &mcts)?, policy)
        }
    };
    Ok(result)
}

fn outcome<E: Environment, B: ProviderBundle<E, f64> + ?Sized>(
    cfg: &ExperimentConfig,
    env: &E,
    start: &E::State,
    bundle: &mut B,
    budget: usize,
    seed: u64,
) -> Outcome {
    match run_planner(cfg, env, start, bundle, budget, substream(seed, 5)) {
        Ok((r, policy)) => {
            let graph_size = r.metrics.graph_size(policy);
            if r.is_solved() && !env.is_solved(&env.replay(start, &r.actions)) {
                return Outcome {
                    solved: false,
                    graph_size,
                    path_len: 0,
                    error: Some("solution does not replay to a solved state".into()),
                };
            }
            Outcome {
                solved: r.is_solved(),
                graph_size,
                path_len: r.actions.len(),
                error: None,
            }
        }
        Err(e) => Outcome {
            solved: false,
            graph_size: 0,
            path_len: 0,
            error: Some(format!("{e:#}")),
        },
    }
}

/// Solves instance `i`. Provider construction failures (a bridge that refuses
/// the handshake, say) are returned as errors; solver failures are recorded in the outcome.
pub fn solve_instance(
    cfg: &ExperimentConfig,
    instances: &Instances,
    shared: &Shared,
    i: usize,
    budget: usize,
) -> anyhow::Result<Outcome> {
    let seed = instance_seed(cfg.seed, i);
    let provider_seed = substream(seed, 1);
    Ok(match instances {
        Instances::Grid { world, .. } => {
            let mut b = grid_bundle(&cfg.provider, shared, provider_seed)?;
            let start: GridState = world.start();
            outcome(cfg, world, &start, &mut *b, budget, seed)
        }
        Instances::Rubik { starts } => {
            let mut b = rubik_bundle(&cfg.provider, shared, provider_seed)?;
            outcome(cfg, &RubikCube, &starts[i], &mut *b, budget, seed)
        }
        Instances::Sokoban { boards } => {
            let (board, map) = &boards[i];
            let mut b = sokoban_bundle(&cfg.provider, shared, map, provider_seed)?;
            outcome(cfg, &Sokoban, board, &mut *b, budget, seed)
        }
    })
}

pub fn aggregate(cfg: &ExperimentConfig, budget: usize, outcomes: &[Outcome]) -> SweepRow {
    let n = outcomes.len();
    let solved: Vec<&Outcome> = outcomes.iter().filter(|o| o.solved).collect();
    let mean = |xs: &mut dyn Iterator<Item = usize>, count: usize| {
        (count > 0).then(|| xs.map(|x| x as f64).sum::<f64>() / count as f64)
    };
    SweepRow {
        budget,
        method: cfg.planner.as_str().to_string(),
        success_rate: if n == 0 { 0.0 } else { solved.len() as f64 / n as f64 },
        mean_graph_size: mean(&mut outcomes.iter().map(|o| o.graph_size), n).unwrap_or(0.0),
        mean_path_length: mean(&mut solved.iter().map(|o| o.path_len), solved.len()),
        trials: n,
        seed: cfg.seed,
    }
}

pub fn pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?)
}

/// Every instance at every budget in `cfg.budgets`, in that order.
pub fn run_sweep(cfg: &ExperimentConfig) -> anyhow::Result<SweepReport> {
    let (instances, skipped_boards) = build_instances(cfg)?;
    let k = cfg.search_config(1)?.k;
    let shared = Shared::load(cfg, k)?;
    let pool = pool(cfg.workers)?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &budget in &cfg.budgets {
        let outcomes: Vec<Outcome> = pool.install(|| {
            (0..instances.len())
                .into_par_iter()
                .map(|i| solve_instance(cfg, &instances, &shared, i, budget))
                .collect::<anyhow::Result<_>>()
        })?;
        for (i, o) in outcomes.iter().enumerate() {
            if let Some(e) = &o.error {
                errors.push((budget, i, e.clone()));
            }
        }
        if !instances.is_empty() {
            rows.push(aggregate(cfg, budget, &outcomes));
        }
    }
    Ok(SweepReport { rows, errors, skipped_boards })
}

/// [`run_sweep`] once per `k`, with providers rebuilt for each.
pub fn run_k_sweep(cfg: &ExperimentConfig, ks: &[usize]) -> anyhow::Result<(Vec<KSweepRow>, SweepReport)> {
    let mut rows = Vec::new();
    let mut all = SweepReport { rows: Vec::new(), errors: Vec::new(), skipped_boards: Vec::new() };
    for &k in ks {
        let mut c = cfg.clone();
        c.search.k = Some(k);
        let report = run_sweep(&c)?;
        rows.extend(report.rows.iter().cloned().map(|row| KSweepRow { k, row }));
        all.errors.extend(report.errors);
        all.skipped_boards = report.skipped_boards;
        all.rows.extend(report.rows);
    }
    Ok((rows, all))
}
