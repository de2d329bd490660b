//! Grid-world noise table: BestFS (`k = 1`) against BF-kSubS over noise levels.

use ksubs_envs::gridworld::{grid_trial, table4_trial_seed, GridConfig, GridMethod, Table4Row};
use rayon::prelude::*;
use serde::Serialize;

pub const TABLE4_HEADER: [&str; 5] = ["sigma", "method", "success_rate", "trials", "seed"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table4Csv {
    pub sigma: f64,
    pub method: &'static str,
    pub success_rate: f64,
    pub trials: usize,
    pub seed: u64,
}

impl From<&Table4Row> for Table4Csv {
    fn from(r: &Table4Row) -> Self {
        Self {
            sigma: r.sigma,
            method: r.method.as_str(),
            success_rate: r.success_rate,
            trials: r.trials,
            seed: r.seed,
        }
    }
}

/// Same cells and seeds as the sequential table, with trials spread over `pool`.
pub fn table4(
    pool: &rayon::ThreadPool,
    cfg: &GridConfig<f64>,
    sigmas: &[f64],
    budget: usize,
    trials: usize,
) -> Vec<Table4Row> {
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let cell = GridConfig { sigma, ..cfg.clone() };
        for method in [GridMethod::BestFs, GridMethod::KSubS] {
            let k = if method == GridMethod::BestFs { 1 } else { cfg.k };
            let solved = pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .filter(|&i| grid_trial(&cell, k, budget, table4_trial_seed(cfg.seed, i)))
                    .count()
            });
            rows.push(Table4Row {
                sigma,
                method,
                success_rate: solved as f64 / trials.max(1) as f64,
                trials,
                seed: cfg.seed,
            });
        }
    }
    rows
}
