//! Monte-Carlo sweeps over the element count or the RIS position.
//!
//! Every (sweep value, seed) cell is independent and runs on a rayon pool;
//! results are gathered back in cell order, so the aggregates do not depend
//! on scheduling.

use rayon::prelude::*;

use crate::eavesdrop::solve_eavesdrop;
use crate::jamming::{solve_jamming, JammingStart};
use crate::model::{generate_channels, mrt_precoder};
use crate::{Error, Result};

use super::config::ExperimentConfig;
use super::{baseline_no_ris, Case};

/// Environment variable capping worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "RIS_ADV_THREADS";

/// Rows with more than this fraction of failed seeds are flagged.
const FLAG_FRACTION: f64 = 0.1;

/// Outcome of one case on one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub seed: u64,
    pub case: Case,
    /// Secrecy rate in bits/s/Hz, or the failure message.
    pub outcome: std::result::Result<CaseOutcome, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseOutcome {
    pub rate: f64,
    pub jam_power: f64,
    /// Alternating-minimization iterations; zero for the other cases.
    pub iterations: usize,
}

/// Aggregate over seeds for one (sweep value, case) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `"N"` or `"y"`.
    pub variable: String,
    pub value: f64,
    pub case: Case,
    pub mean_rate: f64,
    /// Sample standard deviation over successful seeds.
    pub std_rate: f64,
    /// Successful seeds.
    pub n_seeds: usize,
    pub mean_jam_power: f64,
    pub mean_iters: f64,
    pub failures: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Per-seed results in (value, seed, case) order.
    pub samples: Vec<Sample>,
}

impl SweepReport {
    pub fn row(&self, value: f64, case: Case) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.value == value && r.case == case)
    }

    /// Successful per-seed rates of one row, in seed order.
    pub fn rates(&self, value: f64, case: Case) -> Vec<(u64, f64)> {
        self.samples
            .iter()
            .filter(|s| s.value == value && s.case == case)
            .filter_map(|s| s.outcome.as_ref().ok().map(|o| (s.seed, o.rate)))
            .collect()
    }
}

/// Per-case results of one channel realization.
pub type CellResults = Vec<(Case, Result<CaseOutcome>)>;

/// Runs every configured case on one channel realization.
pub fn run_cell(config: &ExperimentConfig, value: f64, seed: u64) -> Result<CellResults> {
    let (geometry, params) = config.scenario(value);
    let channels = generate_channels(&geometry, &params, seed)?;
    let precoder = mrt_precoder(&channels.tx_bob, params.tx_power)?;

    let mut out = Vec::with_capacity(config.cases.len());
    // the passive solution warm-starts the jamming attack when both run
    let mut passive_relaxed = None;
    for case in Case::ALL {
        if !config.cases.contains(&case) {
            continue;
        }
        let result = match case {
            Case::NoRis => baseline_no_ris(&channels, &precoder).map(|rate| CaseOutcome {
                rate,
                jam_power: 0.0,
                iterations: 0,
            }),
            Case::EavesdropOnly => solve_eavesdrop(&channels, &precoder, &config.eavesdrop_options(seed)).map(|s| {
                let rate = s.rate;
                passive_relaxed = Some(s.relaxed);
                CaseOutcome {
                    rate,
                    jam_power: 0.0,
                    iterations: 0,
                }
            }),
            Case::EavesdropJam => {
                let start = passive_relaxed
                    .take()
                    .map_or(JammingStart::Relaxed, JammingStart::Matrix);
                let options = config.jamming_options(seed, start);
                solve_jamming(&channels, &precoder, params.jam_power_max, &options).map(|s| CaseOutcome {
                    rate: s.rate,
                    jam_power: s.jam_power,
                    iterations: s.iterations,
                })
            }
        };
        out.push((case, result));
    }
    Ok(out)
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{s}`"))),
    }
}

/// Runs the configured sweep. Solver failures are counted per row rather
/// than aborting the sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    let cells: Vec<(f64, u64)> = config
        .values
        .iter()
        .flat_map(|&v| config.seeds.iter().map(move |&s| (v, s)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<CellResults>> =
        pool.install(|| cells.par_iter().map(|&(v, s)| run_cell(config, v, s)).collect());

    let mut samples = Vec::new();
    for (&(value, seed), result) in cells.iter().zip(results) {
        match result {
            Ok(list) => samples.extend(list.into_iter().map(|(case, r)| Sample {
                value,
                seed,
                case,
                outcome: r.map_err(|e| e.to_string()),
            })),
            // channel generation failed: every case of the cell fails
            Err(e) => samples.extend(config.cases.iter().map(|&case| Sample {
                value,
                seed,
                case,
                outcome: Err(e.to_string()),
            })),
        }
    }

    let mut rows = Vec::new();
    for &value in &config.values {
        for case in Case::ALL.into_iter().filter(|c| config.cases.contains(c)) {
            let cell: Vec<&Sample> = samples.iter().filter(|s| s.value == value && s.case == case).collect();
            rows.push(aggregate(config.variable.label(), value, case, &cell));
        }
    }
    Ok(SweepReport { rows, samples })
}

fn aggregate(variable: &str, value: f64, case: Case, samples: &[&Sample]) -> SweepRow {
    let ok: Vec<&CaseOutcome> = samples.iter().filter_map(|s| s.outcome.as_ref().ok()).collect();
    let failures = samples.len() - ok.len();
    let n = ok.len();
    let mean = |f: &dyn Fn(&CaseOutcome) -> f64| {
        if n == 0 {
            f64::NAN
        } else {
            kahan_sum(ok.iter().map(|o| f(o))) / n as f64
        }
    };
    let mean_rate = mean(&|o| o.rate);
    let std_rate = if n > 1 {
        (kahan_sum(ok.iter().map(|o| (o.rate - mean_rate).powi(2))) / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SweepRow {
        variable: variable.to_string(),
        value,
        case,
        mean_rate,
        std_rate,
        n_seeds: n,
        mean_jam_power: mean(&|o| o.jam_power),
        mean_iters: mean(&|o| o.iterations as f64),
        failures,
        flagged: n == 0 || failures as f64 > FLAG_FRACTION * samples.len() as f64,
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0, 0.0);
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
