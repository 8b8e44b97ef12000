//! Timing harness comparing the matrix path with the a-trous path on
//! identical 2-D inputs.
//!
//! Everything runs inside a one-worker pool so the numbers describe a single
//! core. `first_apply_secs` is the cost of transforming one input from
//! scratch (build plus one median apply); `amortized_apply_secs` spreads the
//! build over the `repeats` reuses.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{NdwtError, Result};
use crate::filter_bank::get_filter;
use crate::ndwt_matrix::{MemoryGuard, NdwtMatrix};
use crate::par;
use crate::siggen::gaussian_noise_2d;
use crate::transforms::{atrous_forward_2d, forward_2d};

pub const AGREEMENT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub rows: usize,
    pub cols: usize,
    pub depth: usize,
    pub filter: String,
    pub repeats: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl TimingSummary {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let k = s.len();
        let median = if k % 2 == 1 { s[k / 2] } else { 0.5 * (s[k / 2 - 1] + s[k / 2]) };
        Some(Self { median, min: s[0], max: s[k - 1] })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub rows: usize,
    pub cols: usize,
    pub depth: usize,
    pub filter: String,
    pub repeats: usize,
    pub status: BenchStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub build_secs: Option<f64>,
    pub cold_apply_secs: Option<f64>,
    pub first_apply_secs: Option<f64>,
    pub amortized_apply_secs: Option<f64>,
    pub matrix_apply: Option<TimingSummary>,
    pub convolution: Option<TimingSummary>,
    pub max_abs_difference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub os: String,
    pub arch: String,
    pub available_cores: usize,
    pub parallel_feature: bool,
    pub timing_threads: usize,
}

impl Environment {
    pub fn detect() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            available_cores: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            parallel_feature: par::is_parallel(),
            timing_threads: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub environment: Environment,
    pub agreement_tolerance: f64,
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != BenchStatus::Failed)
    }
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn skeleton(cfg: &BenchConfig, status: BenchStatus, message: Option<String>) -> BenchEntry {
    BenchEntry {
        rows: cfg.rows,
        cols: cfg.cols,
        depth: cfg.depth,
        filter: cfg.filter.clone(),
        repeats: cfg.repeats,
        status,
        message,
        build_secs: None,
        cold_apply_secs: None,
        first_apply_secs: None,
        amortized_apply_secs: None,
        matrix_apply: None,
        convolution: None,
        max_abs_difference: None,
    }
}

/// Times one configuration. A guard trip yields a `Skipped` entry; other
/// errors (bad filter, zero repeats) are returned.
pub fn run_config(cfg: &BenchConfig, guard: &MemoryGuard) -> Result<BenchEntry> {
    if cfg.repeats == 0 {
        return Err(NdwtError::InvalidArgument("repetitions must be at least 1".into()));
    }
    let filter = get_filter(&cfg.filter)?;
    for side in [cfg.rows, cfg.cols] {
        match guard.check(side, cfg.depth) {
            Ok(_) => {}
            Err(e @ NdwtError::ResourceLimit { .. }) => {
                return Ok(skeleton(cfg, BenchStatus::Skipped, Some(e.to_string())));
            }
            Err(e) => return Err(e),
        }
    }
    let input = gaussian_noise_2d(cfg.rows, cfg.cols, 1.0, cfg.seed)?;

    par::with_threads(1, || {
        let (built, build_secs) = timed(|| -> Result<(NdwtMatrix, NdwtMatrix)> {
            let w1 = NdwtMatrix::build(&filter, cfg.rows, cfg.depth, 0, guard)?;
            let w2 = NdwtMatrix::build(&filter, cfg.cols, cfg.depth, 0, guard)?;
            Ok((w1, w2))
        });
        let (w1, w2) = built?;

        let (first, cold) = timed(|| forward_2d(&w1, &w2, &input));
        let matrix_out = first?;
        let mut apply = Vec::with_capacity(cfg.repeats);
        for _ in 0..cfg.repeats {
            let (r, t) = timed(|| forward_2d(&w1, &w2, &input));
            r?;
            apply.push(t);
        }
        let (conv_first, _) = timed(|| atrous_forward_2d(&filter, &filter, &input, cfg.depth, cfg.depth, 0));
        let conv_out = conv_first?;
        let mut conv = Vec::with_capacity(cfg.repeats);
        for _ in 0..cfg.repeats {
            let (r, t) = timed(|| atrous_forward_2d(&filter, &filter, &input, cfg.depth, cfg.depth, 0));
            r?;
            conv.push(t);
        }

        let diff = matrix_out
            .data()
            .iter()
            .zip(conv_out.data().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let apply_summary = TimingSummary::from_samples(&apply).expect("repeats >= 1");
        let agrees = diff <= AGREEMENT_TOLERANCE;
        let mut entry = skeleton(
            cfg,
            if agrees { BenchStatus::Ok } else { BenchStatus::Failed },
            (!agrees).then(|| format!("matrix and convolution paths differ by {diff:.3e}")),
        );
        entry.build_secs = Some(build_secs);
        entry.cold_apply_secs = Some(cold);
        entry.first_apply_secs = Some(build_secs + apply_summary.median);
        entry.amortized_apply_secs = Some(build_secs / cfg.repeats as f64 + apply_summary.median);
        entry.matrix_apply = Some(apply_summary);
        entry.convolution = TimingSummary::from_samples(&conv);
        entry.max_abs_difference = Some(diff);
        Ok(entry)
    })
}

pub fn run_bench(configs: &[BenchConfig], guard: &MemoryGuard) -> Result<BenchReport> {
    let entries = configs
        .iter()
        .map(|c| run_config(c, guard))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        environment: Environment::detect(),
        agreement_tolerance: AGREEMENT_TOLERANCE,
        entries,
    })
}
