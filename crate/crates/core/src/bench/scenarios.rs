//! Built-in benchmark scenarios: eight single-dataset distributions and four
//! update workloads, at desk scale by default.

use serde::{Deserialize, Serialize};

use super::generate::Distribution;
use super::Algorithm;
use crate::bin_engine::BinParams;
use crate::error::{MedianError, Result};

/// Default dataset size for single-dataset scenarios.
pub const DESK_SINGLE_N: usize = 100_001;
/// Default base size for the small-batch update scenarios.
pub const DESK_UPDATE_LARGE_N0: usize = 100_001;
/// Default base size for the equal-size-batch update scenarios.
pub const DESK_UPDATE_SMALL_N0: usize = 10_001;
pub const UPDATE_BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateBatch {
    pub size: usize,
    pub dist: Distribution,
}

/// One benchmark row group: a base dataset, optional update batches, and the
/// algorithms to time on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchScenario {
    pub name: String,
    pub base_size: usize,
    pub base_dist: Distribution,
    #[serde(default)]
    pub update_batches: Vec<UpdateBatch>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    /// Medians timed per contiguous block (single-dataset scenarios).
    #[serde(default = "default_block")]
    pub block_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
}

fn default_reps() -> usize {
    10
}

fn default_block() -> usize {
    20
}

fn default_bins() -> usize {
    BinParams::DEFAULT_BINS
}

fn default_cutoff() -> usize {
    BinParams::DEFAULT_CUTOFF
}

impl BenchScenario {
    pub fn is_update(&self) -> bool {
        !self.update_batches.is_empty()
    }

    pub fn params(&self) -> Result<BinParams> {
        BinParams::new(self.bins, self.cutoff)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MedianError::Config(format!("scenario {}: {m}", self.name)));
        if self.base_size == 0 {
            return bad("base size must be at least 1");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.block_size == 0 {
            return bad("block size must be at least 1");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected");
        }
        if self.update_batches.iter().any(|b| b.size == 0) {
            return bad("update batch sizes must be at least 1");
        }
        self.base_dist.validate()?;
        for b in &self.update_batches {
            b.dist.validate()?;
        }
        self.params().map(|_| ())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_repetitions(mut self, r: usize) -> Self {
        self.repetitions = r;
        self
    }

    pub fn with_block_size(mut self, b: usize) -> Self {
        self.block_size = b;
        self
    }
}

/// The eight single-dataset distributions, keyed by scenario name.
pub fn single_distributions() -> Vec<(&'static str, Distribution)> {
    let std_normal = || Distribution::normal(0.0, 1.0);
    vec![
        ("table1-uniform", Distribution::uniform(0.0, 1.0)),
        ("table1-normal", std_normal()),
        ("table1-exponential", Distribution::exponential(1.0)),
        ("table1-chisq5", Distribution::chi_square(5)),
        ("table1-normal-unif1e3", Distribution::mixture(std_normal(), Distribution::uniform(-1e3, 1e3))),
        ("table1-normal-unif1e4", Distribution::mixture(std_normal(), Distribution::uniform(-1e4, 1e4))),
        ("table1-normal-exp1e-3", Distribution::mixture(std_normal(), Distribution::exponential(1e-3))),
        ("table1-normal-exp1e-4", Distribution::mixture(std_normal(), Distribution::exponential(1e-4))),
    ]
}

pub fn single_scenario(name: &str, dist: Distribution, n: usize) -> BenchScenario {
    BenchScenario {
        name: name.to_string(),
        base_size: n,
        base_dist: dist,
        update_batches: Vec::new(),
        algorithms: Algorithm::ALL.to_vec(),
        repetitions: default_reps(),
        block_size: default_block(),
        seed: 0,
        bins: default_bins(),
        cutoff: default_cutoff(),
    }
}

/// Update workload `which` in 1..=4 with base size `n0`.
///
/// 1 and 2 add 20 batches of `n0 / 100` points from `N(0,25)` and `N(2,4)`
/// (data mostly inside the initial bins); 3 and 4 add 20 batches of `n0 - 1`
/// points from `N(j/2, 25)` for batch `j` and from `N(10, 25)`.
pub fn update_scenario(which: usize, n0: usize) -> Result<BenchScenario> {
    let small = (n0 / 100).max(1);
    let equal = n0.saturating_sub(1).max(1);
    let batches: Vec<UpdateBatch> = match which {
        1 => (0..UPDATE_BATCHES)
            .map(|_| UpdateBatch { size: small, dist: Distribution::normal(0.0, 25.0) })
            .collect(),
        2 => (0..UPDATE_BATCHES)
            .map(|_| UpdateBatch { size: small, dist: Distribution::normal(2.0, 4.0) })
            .collect(),
        3 => (1..=UPDATE_BATCHES)
            .map(|j| UpdateBatch { size: equal, dist: Distribution::normal(j as f64 / 2.0, 25.0) })
            .collect(),
        4 => (0..UPDATE_BATCHES)
            .map(|_| UpdateBatch { size: equal, dist: Distribution::normal(10.0, 25.0) })
            .collect(),
        _ => return Err(MedianError::Config(format!("no update scenario {which}"))),
    };
    Ok(BenchScenario {
        name: format!("table2-s{which}"),
        base_size: n0,
        base_dist: Distribution::normal(0.0, 25.0),
        update_batches: batches,
        algorithms: vec![Algorithm::Quickselect, Algorithm::Binmedian, Algorithm::Binapprox],
        repetitions: default_reps(),
        block_size: 1,
        seed: 0,
        bins: default_bins(),
        cutoff: default_cutoff(),
    })
}

pub fn builtin_names() -> Vec<String> {
    let mut names: Vec<String> = single_distributions().iter().map(|(n, _)| n.to_string()).collect();
    names.extend((1..=4).map(|i| format!("table2-s{i}")));
    names.push("table1".into());
    names.push("table2".into());
    names
}

/// Resolves a built-in name to its scenarios. `table1` and `table2` expand to
/// their whole groups. `n` overrides the dataset (or base) size.
pub fn builtin(name: &str, n: Option<usize>) -> Result<Vec<BenchScenario>> {
    if name == "table1" {
        return Ok(single_distributions()
            .into_iter()
            .map(|(s, d)| single_scenario(s, d, n.unwrap_or(DESK_SINGLE_N)))
            .collect());
    }
    if name == "table2" {
        return (1..=4)
            .map(|i| update_scenario(i, n.unwrap_or(default_update_n0(i))))
            .collect();
    }
    if let Some((s, d)) = single_distributions().into_iter().find(|(s, _)| *s == name) {
        return Ok(vec![single_scenario(s, d, n.unwrap_or(DESK_SINGLE_N))]);
    }
    if let Some(i) = name.strip_prefix("table2-s").and_then(|s| s.parse::<usize>().ok()) {
        if (1..=4).contains(&i) {
            return Ok(vec![update_scenario(i, n.unwrap_or(default_update_n0(i)))?]);
        }
    }
    Err(MedianError::Config(format!(
        "unknown scenario '{name}' (known: {})",
        builtin_names().join(", ")
    )))
}

fn default_update_n0(which: usize) -> usize {
    if which <= 2 {
        DESK_UPDATE_LARGE_N0
    } else {
        DESK_UPDATE_SMALL_N0
    }
}
