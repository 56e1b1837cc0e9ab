//! Timing harness.
//!
//! Single-dataset scenarios time blocks of `block_size` independent medians
//! and divide by the block size, so short runs are not dominated by timer
//! resolution. Update scenarios time one contiguous sequence of "compute,
//! then add a batch and recompute" steps. Every result is checked against a
//! sort oracle before any timing is reported.

mod generate;
mod scenarios;

pub use generate::{generate, generate_stream, Distribution, GENERATOR};
pub use scenarios::{
    builtin, builtin_names, single_distributions, single_scenario, update_scenario, BenchScenario, UpdateBatch,
    DESK_SINGLE_N, DESK_UPDATE_LARGE_N0, DESK_UPDATE_SMALL_N0, UPDATE_BATCHES,
};

use std::fmt::{self, Write as _};
use std::hint::black_box;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bin_engine::{binapprox_with, binmedian_with, BinParams, Moments};
use crate::error::{MedianError, Result};
use crate::select::{median_select, sort_median};
use crate::updatable::UpdatableMedian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Quickselect,
    Binmedian,
    Binapprox,
    Sort,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Quickselect,
        Algorithm::Binmedian,
        Algorithm::Binapprox,
        Algorithm::Sort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Quickselect => "quickselect",
            Algorithm::Binmedian => "binmedian",
            Algorithm::Binapprox => "binapprox",
            Algorithm::Sort => "sort",
        }
    }

    pub fn is_exact(self) -> bool {
        self != Algorithm::Binapprox
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    /// Per-repetition times in milliseconds (per median for single-dataset
    /// scenarios, per whole sequence for update scenarios).
    pub times_ms: Vec<f64>,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub median_ms: f64,
    /// Mean time relative to the fastest algorithm in the scenario.
    pub ratio: f64,
    /// Full rebuilds per repetition on the updatable paths.
    pub rebuilds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    pub description: String,
    pub seed: u64,
    pub generator: String,
    pub base_size: usize,
    pub total_size: usize,
    pub repetitions: usize,
    pub block_size: usize,
    pub bins: usize,
    pub cutoff: usize,
    /// SHA-256 prefix over all generated data.
    pub data_checksum: String,
    /// Medians checked against the sort oracle.
    pub checked: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, alg: Algorithm) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.algorithm == alg)
    }

    pub fn fastest(&self) -> Algorithm {
        self.rows
            .iter()
            .min_by(|a, b| a.mean_ms.total_cmp(&b.mean_ms))
            .expect("at least one row")
            .algorithm
    }
}

struct Checksum(Sha256);

impl Checksum {
    fn new() -> Self {
        Checksum(Sha256::new())
    }

    fn feed(&mut self, data: &[f64]) {
        for x in data {
            self.0.update(x.to_le_bytes());
        }
    }

    fn finish(self) -> String {
        hex::encode(&self.0.finalize()[..8])
    }
}

fn violation(scenario: &str, alg: Algorithm, detail: String) -> MedianError {
    MedianError::Config(format!("correctness check failed in {scenario} for {alg}: {detail}"))
}

/// Approximate answers can exceed their bound by rounding when the median
/// sits exactly on a bin edge; the error then equals the bound in exact
/// arithmetic.
fn within_bound(got: f64, want: f64, bound: f64, bins: usize) -> bool {
    let slack = 8.0 * f64::EPSILON * (got.abs() + want.abs() + bound * bins as f64);
    (got - want).abs() <= bound + slack
}

fn summarize_times(alg: Algorithm, times: Vec<Duration>, rebuilds: Option<usize>) -> BenchRow {
    let ms: Vec<f64> = times.iter().map(|d| d.as_secs_f64() * 1e3).collect();
    let m = Moments::of(&ms);
    let mut sorted = ms.clone();
    let median_ms = sort_median(&mut sorted).expect("at least one repetition");
    BenchRow {
        algorithm: alg,
        mean_ms: m.mean(),
        std_ms: m.std_dev(),
        median_ms,
        times_ms: ms,
        ratio: 0.0,
        rebuilds,
    }
}

fn fill_ratios(rows: &mut [BenchRow]) {
    let fastest = rows.iter().map(|r| r.mean_ms).fold(f64::INFINITY, f64::min);
    for r in rows {
        r.ratio = if fastest > 0.0 { r.mean_ms / fastest } else { 1.0 };
    }
}

fn stream_id(rep: usize, index: usize) -> u64 {
    ((rep as u64) << 32) | index as u64
}

fn report_shell(s: &BenchScenario, checksum: String, checked: usize, rows: Vec<BenchRow>) -> BenchReport {
    let total = s.base_size + s.update_batches.iter().map(|b| b.size).sum::<usize>();
    let description = if s.is_update() {
        format!(
            "{} pts ~ {} then {} batches (first: {} pts ~ {})",
            s.base_size,
            s.base_dist.label(),
            s.update_batches.len(),
            s.update_batches[0].size,
            s.update_batches[0].dist.label()
        )
    } else {
        format!("{} pts ~ {}", s.base_size, s.base_dist.label())
    };
    BenchReport {
        scenario: s.name.clone(),
        description,
        seed: s.seed,
        generator: GENERATOR.to_string(),
        base_size: s.base_size,
        total_size: total,
        repetitions: s.repetitions,
        block_size: if s.is_update() { 1 } else { s.block_size },
        bins: s.bins,
        cutoff: s.cutoff,
        data_checksum: checksum,
        checked,
        rows,
    }
}

/// Runs whichever harness fits the scenario.
pub fn run(scenario: &BenchScenario) -> Result<BenchReport> {
    if scenario.is_update() {
        run_update(scenario)
    } else {
        run_single(scenario)
    }
}

/// Times each algorithm on blocks of independent datasets.
pub fn run_single(s: &BenchScenario) -> Result<BenchReport> {
    s.validate()?;
    if s.is_update() {
        return Err(MedianError::Config(format!("{} has update batches; use run_update", s.name)));
    }
    let params = s.params()?;
    let mut checksum = Checksum::new();
    let mut times: Vec<Vec<Duration>> = vec![Vec::new(); s.algorithms.len()];
    let mut checked = 0;
    for rep in 0..s.repetitions {
        let block: Vec<Vec<f64>> = (0..s.block_size)
            .map(|i| generate_stream(&s.base_dist, s.base_size, s.seed, stream_id(rep, i)))
            .collect::<Result<_>>()?;
        for d in &block {
            checksum.feed(d);
        }
        let oracle: Vec<(f64, f64)> = block
            .iter()
            .map(|d| (sort_median(&mut d.clone()).expect("non-empty"), Moments::of(d).std_dev()))
            .collect();
        // rotate the order so no algorithm always runs first on a cold cache
        for a in 0..s.algorithms.len() {
            let slot = (a + rep) % s.algorithms.len();
            let alg = s.algorithms[slot];
            let mut copies: Vec<Vec<f64>> = match alg {
                Algorithm::Quickselect | Algorithm::Sort => block.clone(),
                _ => Vec::new(),
            };
            let mut results = Vec::with_capacity(s.block_size);
            let start = Instant::now();
            match alg {
                Algorithm::Quickselect => {
                    for c in &mut copies {
                        results.push(median_select(black_box(c))?);
                    }
                }
                Algorithm::Sort => {
                    for c in &mut copies {
                        results.push(sort_median(black_box(c))?);
                    }
                }
                Algorithm::Binmedian => {
                    for d in &block {
                        results.push(binmedian_with(black_box(d), params)?);
                    }
                }
                Algorithm::Binapprox => {
                    for d in &block {
                        results.push(binapprox_with(black_box(d), params.bins)?.value);
                    }
                }
            }
            let elapsed = start.elapsed();
            times[slot].push(elapsed / s.block_size as u32);
            for (got, &(want, sigma)) in results.iter().zip(&oracle) {
                let ok = if alg.is_exact() {
                    got.to_bits() == want.to_bits()
                } else {
                    within_bound(*got, want, sigma / params.bins as f64, params.bins)
                };
                if !ok {
                    return Err(violation(&s.name, alg, format!("got {got}, oracle median {want}")));
                }
                checked += 1;
            }
        }
    }
    let mut rows: Vec<BenchRow> = s
        .algorithms
        .iter()
        .zip(times)
        .map(|(&alg, t)| summarize_times(alg, t, None))
        .collect();
    fill_ratios(&mut rows);
    Ok(report_shell(s, checksum.finish(), checked, rows))
}

/// Base data and batches of one update repetition.
fn update_data(s: &BenchScenario, rep: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let base = generate_stream(&s.base_dist, s.base_size, s.seed, stream_id(rep, 0))?;
    let batches = s
        .update_batches
        .iter()
        .enumerate()
        .map(|(j, b)| generate_stream(&b.dist, b.size, s.seed, stream_id(rep, j + 1)))
        .collect::<Result<_>>()?;
    Ok((base, batches))
}

/// Oracle medians after the base and after each batch.
fn update_oracle(base: &[f64], batches: &[Vec<f64>]) -> Vec<f64> {
    let mut all = base.to_vec();
    let mut out = vec![sort_median(&mut all.clone()).expect("non-empty")];
    for b in batches {
        all.extend_from_slice(b);
        out.push(sort_median(&mut all.clone()).expect("non-empty"));
    }
    out
}

/// Medians (and approximate bounds) along one update sequence, plus the
/// rebuild count for the updatable paths.
fn run_update_path(
    alg: Algorithm,
    base: &[f64],
    batches: &[Vec<f64>],
    params: BinParams,
) -> Result<(Duration, Vec<(f64, f64)>, Option<usize>)> {
    let mut out = Vec::with_capacity(batches.len() + 1);
    let capacity = base.len() + batches.iter().map(Vec::len).sum::<usize>();
    match alg {
        Algorithm::Quickselect | Algorithm::Sort => {
            let mut aggregate = Vec::with_capacity(capacity);
            let mut scratch: Vec<f64> = Vec::with_capacity(capacity);
            aggregate.extend_from_slice(base);
            let recompute = |scratch: &mut Vec<f64>| {
                if alg == Algorithm::Sort {
                    sort_median(black_box(scratch))
                } else {
                    median_select(black_box(scratch))
                }
            };
            let start = Instant::now();
            // the aggregate keeps arrival order; each recomputation works on a copy
            scratch.extend_from_slice(&aggregate);
            out.push((recompute(&mut scratch)?, 0.0));
            for b in batches {
                aggregate.extend_from_slice(b);
                scratch.clear();
                scratch.extend_from_slice(&aggregate);
                out.push((recompute(&mut scratch)?, 0.0));
            }
            Ok((start.elapsed(), out, None))
        }
        Algorithm::Binmedian | Algorithm::Binapprox => {
            let exact = alg == Algorithm::Binmedian;
            let start = Instant::now();
            let mut um = UpdatableMedian::with_params(base, params)?;
            let query = |um: &mut UpdatableMedian<f64>| -> Result<(f64, f64)> {
                if exact {
                    um.query_exact().map(|v| (v, 0.0))
                } else {
                    um.query_approx().map(|a| (a.value, a.bound))
                }
            };
            out.push(query(&mut um)?);
            for b in batches {
                um.add(b)?;
                out.push(query(&mut um)?);
            }
            Ok((start.elapsed(), out, Some(um.rebuild_count())))
        }
    }
}

/// Times each algorithm over the scenario's sequence of additions.
pub fn run_update(s: &BenchScenario) -> Result<BenchReport> {
    s.validate()?;
    if !s.is_update() {
        return Err(MedianError::Config(format!("{} has no update batches; use run_single", s.name)));
    }
    let params = s.params()?;
    let mut checksum = Checksum::new();
    let mut times: Vec<Vec<Duration>> = vec![Vec::new(); s.algorithms.len()];
    let mut rebuilds: Vec<Option<usize>> = vec![None; s.algorithms.len()];
    let mut checked = 0;
    for rep in 0..s.repetitions {
        let (base, batches) = update_data(s, rep)?;
        checksum.feed(&base);
        for b in &batches {
            checksum.feed(b);
        }
        let oracle = update_oracle(&base, &batches);
        for a in 0..s.algorithms.len() {
            let slot = (a + rep) % s.algorithms.len();
            let alg = s.algorithms[slot];
            let (elapsed, results, rb) = run_update_path(alg, &base, &batches, params)?;
            for (step, (&(got, bound), &want)) in results.iter().zip(&oracle).enumerate() {
                let ok = if alg.is_exact() {
                    got.to_bits() == want.to_bits()
                } else {
                    within_bound(got, want, bound, params.bins)
                };
                if !ok {
                    return Err(violation(
                        &s.name,
                        alg,
                        format!("step {step}: got {got}, oracle median {want}, bound {bound}"),
                    ));
                }
                checked += 1;
            }
            times[slot].push(elapsed);
            rebuilds[slot] = rb;
        }
    }
    let mut rows: Vec<BenchRow> = s
        .algorithms
        .iter()
        .zip(times)
        .zip(rebuilds)
        .map(|((&alg, t), rb)| summarize_times(alg, t, rb))
        .collect();
    fill_ratios(&mut rows);
    Ok(report_shell(s, checksum.finish(), checked, rows))
}

/// Outcome of a correctness-only pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub scenario: String,
    pub data_checksum: String,
    pub checked: usize,
}

/// Checks every algorithm against the oracle without timing, optionally
/// running scenarios on separate threads.
pub fn verify(scenarios: &[BenchScenario], parallel: bool) -> Result<Vec<Verification>> {
    let one = |s: &BenchScenario| -> Result<Verification> {
        let quick = s.clone().with_repetitions(1);
        let r = run(&quick)?;
        Ok(Verification {
            scenario: r.scenario,
            data_checksum: r.data_checksum,
            checked: r.checked,
        })
    };
    if !parallel {
        return scenarios.iter().map(one).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios.iter().map(|s| scope.spawn(move || one(s))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    })
}

/// Human-readable table, one block per scenario.
pub fn render_table(reports: &[BenchReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "{} : {}", r.scenario, r.description);
        let _ = writeln!(
            out,
            "  seed={} reps={} block={} bins={} cutoff={} checksum={} checked={}",
            r.seed, r.repetitions, r.block_size, r.bins, r.cutoff, r.data_checksum, r.checked
        );
        let _ = writeln!(
            out,
            "  {:<12} {:>12} {:>10} {:>12} {:>8} {:>9}",
            "algorithm", "mean ms", "std ms", "median ms", "ratio", "rebuilds"
        );
        for row in &r.rows {
            let rb = row.rebuilds.map_or("-".to_string(), |n| n.to_string());
            let _ = writeln!(
                out,
                "  {:<12} {:>12.4} {:>10.4} {:>12.4} {:>8.2} {:>9}",
                row.algorithm.name(),
                row.mean_ms,
                row.std_ms,
                row.median_ms,
                row.ratio,
                rb
            );
        }
        out.push('\n');
    }
    out
}

/// One `key=value` record per scenario and algorithm.
pub fn render_records(reports: &[BenchReport]) -> String {
    let mut out = String::new();
    for r in reports {
        for row in &r.rows {
            let _ = write!(
                out,
                "scenario={} algorithm={} mean_ms={} std_ms={} median_ms={} ratio={} reps={} block={} \
                 base_size={} total_size={} bins={} cutoff={} seed={} checksum={} checked={}",
                r.scenario,
                row.algorithm.name(),
                row.mean_ms,
                row.std_ms,
                row.median_ms,
                row.ratio,
                r.repetitions,
                r.block_size,
                r.base_size,
                r.total_size,
                r.bins,
                r.cutoff,
                r.seed,
                r.data_checksum,
                r.checked
            );
            if let Some(rb) = row.rebuilds {
                let _ = write!(out, " rebuilds={rb}");
            }
            let _ = writeln!(out, " generator=\"{}\"", r.generator);
        }
    }
    out
}
