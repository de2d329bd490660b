//! Experiment configuration: a TOML file whose keys mirror the CLI flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::ValueEnum;
use ksubs_core::{ChainConfig64, CountingPolicy, MctsConfig64, SearchConfig64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Grid,
    Rubik,
    Sokoban,
}

impl EnvKind {
    /// Name announced in the bridge handshake.
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Grid => "grid",
            Self::Rubik => "rubik",
            Self::Sokoban => "sokoban",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Planner {
    BfKsubs,
    MctsKsubs,
    BestfsBaseline,
    MctsBaseline,
    ChainSampler,
}

impl Planner {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BfKsubs => "bf-ksubs",
            Self::MctsKsubs => "mcts-ksubs",
            Self::BestfsBaseline => "bestfs-baseline",
            Self::MctsBaseline => "mcts-baseline",
            Self::ChainSampler => "chain-sampler",
        }
    }

    pub fn is_mcts(self) -> bool {
        matches!(self, Self::MctsKsubs | Self::MctsBaseline)
    }
}

/// Where generator, value and policy come from.
///
/// `oracle`, `noisy:<sigma>` (oracle with Gaussian value noise),
/// `corrupt:<rate>` (oracle whose proposals are replaced by random walks at
/// `rate`), `synthetic:<sigma>` (grid world only), `tabular:<dataset>`
/// (fit from a record file) or `bridge:<tcp:host:port | cmd:program args>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProviderSpec {
    Oracle,
    Noisy(f64),
    Corrupt(f64),
    Synthetic(f64),
    Tabular(PathBuf),
    Bridge(String),
}

impl FromStr for ProviderSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        let number = |what: &str| -> anyhow::Result<f64> {
            let x: f64 = arg.parse().with_context(|| format!("{what} needs a number, got {arg:?}"))?;
            if !(x >= 0.0) {
                bail!("{what} must be non-negative");
            }
            Ok(x)
        };
        Ok(match head {
            "oracle" if arg.is_empty() => Self::Oracle,
            "noisy" => Self::Noisy(number("noisy")?),
            "corrupt" => {
                let r = number("corrupt")?;
                if r > 1.0 {
                    bail!("corruption rate must lie in [0, 1]");
                }
                Self::Corrupt(r)
            }
            "synthetic" => Self::Synthetic(number("synthetic")?),
            "tabular" if !arg.is_empty() => Self::Tabular(PathBuf::from(arg)),
            "bridge" if !arg.is_empty() => Self::Bridge(arg.to_string()),
            _ => bail!("unknown provider spec {s:?}"),
        })
    }
}

impl TryFrom<String> for ProviderSpec {
    type Error = anyhow::Error;

    fn try_from(s: String) -> anyhow::Result<Self> {
        s.parse()
    }
}

impl From<ProviderSpec> for String {
    fn from(p: ProviderSpec) -> String {
        p.to_string()
    }
}

impl fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Oracle => write!(f, "oracle"),
            Self::Noisy(s) => write!(f, "noisy:{s}"),
            Self::Corrupt(r) => write!(f, "corrupt:{r}"),
            Self::Synthetic(s) => write!(f, "synthetic:{s}"),
            Self::Tabular(p) => write!(f, "tabular:{}", p.display()),
            Self::Bridge(e) => write!(f, "bridge:{e}"),
        }
    }
}

/// Overrides of the per-environment search defaults. `C1` comes from the budget list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub k: Option<usize>,
    pub c2: Option<usize>,
    pub c3: Option<usize>,
    pub c4: Option<f64>,
    pub counting: Option<String>,
    pub detect_intermediate_solved: Option<bool>,
}

/// MCTS settings; the budget list sweeps the passes per planner call.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MctsSection {
    pub gamma: Option<f64>,
    pub c_puct: Option<f64>,
    pub tau: Option<f64>,
    pub argmax_actions: Option<bool>,
    pub action_limit: Option<usize>,
    pub planner_call_limit: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub num_chains: Option<usize>,
    pub chain_length: Option<usize>,
}

/// Instance source. Rubik scrambles are drawn per instance with a length
/// uniform in `scramble_min..=scramble_len`; Sokoban boards come from
/// `corpus` (default: the bundled micro-corpus), cycled when `trials` exceeds it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    pub scramble_len: Option<usize>,
    pub scramble_min: Option<usize>,
    pub corpus: Option<PathBuf>,
    pub grid_m: Option<usize>,
    pub grid_n: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    #[serde(default = "default_planner")]
    pub planner: Planner,
    #[serde(default = "default_provider")]
    pub provider: ProviderSpec,
    pub trials: Option<usize>,
    #[serde(default)]
    pub budgets: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub mcts: MctsSection,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub instances: InstanceSection,
}

fn default_planner() -> Planner {
    Planner::BfKsubs
}

fn default_provider() -> ProviderSpec {
    ProviderSpec::Oracle
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(env: EnvKind) -> Self {
        Self {
            env,
            planner: default_planner(),
            provider: default_provider(),
            trials: None,
            budgets: Vec::new(),
            seed: 0,
            workers: default_workers(),
            out: None,
            search: SearchSection::default(),
            mcts: MctsSection::default(),
            chain: ChainSection::default(),
            instances: InstanceSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Search settings with environment defaults filled in and `C1 = budget`.
    pub fn search_config(&self, budget: usize) -> anyhow::Result<SearchConfig64> {
        let mut cfg = match self.env {
            EnvKind::Grid => SearchConfig64::new(4, budget, 4, 4, 1.0),
            EnvKind::Rubik => SearchConfig64::rubik(),
            EnvKind::Sokoban => SearchConfig64::sokoban(),
        };
        let s = &self.search;
        if let Some(k) = s.k {
            cfg.k = k;
            if self.env == EnvKind::Grid && s.c2.is_none() {
                cfg.c2_step_limit = k;
            }
        }
        if let Some(c2) = s.c2 {
            cfg.c2_step_limit = c2;
        }
        if let Some(c3) = s.c3 {
            cfg.c3_num_subgoals = c3;
        }
        if let Some(c4) = s.c4 {
            cfg.c4_target_prob = c4;
        }
        if let Some(name) = &s.counting {
            cfg.counting_policy =
                CountingPolicy::parse(name).with_context(|| format!("unknown counting policy {name:?}"))?;
        }
        if let Some(flag) = s.detect_intermediate_solved {
            cfg.detect_intermediate_solved = flag;
        }
        cfg.c1_max_nodes = budget;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mcts_config(&self, passes: usize) -> anyhow::Result<MctsConfig64> {
        let d = MctsConfig64::default();
        let m = &self.mcts;
        let cfg = MctsConfig64 {
            passes_per_call: passes,
            gamma: m.gamma.unwrap_or(d.gamma),
            c_puct: m.c_puct.unwrap_or(d.c_puct),
            tau: m.tau.unwrap_or(d.tau),
            argmax_actions: m.argmax_actions.unwrap_or(d.argmax_actions),
            action_limit: m.action_limit.unwrap_or(d.action_limit),
            planner_call_limit: m.planner_call_limit.unwrap_or(d.planner_call_limit),
            rng_seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn chain_config(&self, budget: usize) -> anyhow::Result<ChainConfig64> {
        let cfg = ChainConfig64 {
            search: self.search_config(budget)?,
            num_chains: self.chain.num_chains.unwrap_or(usize::MAX),
            chain_length: self.chain.chain_length.unwrap_or(10),
        };
        cfg.validate()?;
        Ok(cfg)
    }

}
