use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::{ReservoirKind, ReservoirSpec};

use super::seeing_double::{run_seeing_double_trial_with, SeeingDoubleReport, TrialOptions, TrialStatus};

/// One trial of a sweep, tagged with its cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTrial {
    pub row: usize,
    pub col: usize,
    pub row_value: f64,
    pub col_value: Option<f64>,
    pub trial: usize,
    pub report: SeeingDoubleReport,
}

/// Success counts over a one- or two-axis grid of seeing-double trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: String,
    pub row_axis: String,
    pub row_values: Vec<f64>,
    /// Absent for one-axis sweeps, which then have a single column.
    pub col_axis: Option<String>,
    pub col_values: Vec<f64>,
    pub successes: Vec<Vec<usize>>,
    /// Trials that completed (success or failure); errored trials are excluded.
    pub completed: Vec<Vec<usize>>,
    pub errors: Vec<Vec<usize>>,
    /// Seed of trial `t` in every cell.
    pub seeds: Vec<u64>,
    pub trials: Vec<CellTrial>,
}

impl SweepResult {
    pub fn cols(&self) -> usize {
        self.successes.first().map_or(0, Vec::len)
    }

    /// Success counts as a CSV matrix. One-axis sweeps get `axis,successes,completed,errors`
    /// rows; grids get one row per row value and one column per column value.
    pub fn counts_csv(&self) -> String {
        let mut out = String::new();
        match &self.col_axis {
            None => {
                out.push_str(&format!("{},successes,completed,errors\n", self.row_axis));
                for (i, v) in self.row_values.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        v, self.successes[i][0], self.completed[i][0], self.errors[i][0]
                    ));
                }
            }
            Some(col) => {
                out.push_str(&format!("{}\\{}", self.row_axis, col));
                for c in &self.col_values {
                    out.push_str(&format!(",{c}"));
                }
                out.push('\n');
                for (i, v) in self.row_values.iter().enumerate() {
                    out.push_str(&v.to_string());
                    for s in &self.successes[i] {
                        out.push_str(&format!(",{s}"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Long-format `axis1,axis2,value` with the success rate over completed trials.
    pub fn plot_csv(&self) -> String {
        let col_name = self.col_axis.as_deref().unwrap_or("none");
        let mut out = format!("{},{},success_rate\n", self.row_axis, col_name);
        for (i, r) in self.row_values.iter().enumerate() {
            for j in 0..self.cols() {
                let c = self.col_values.get(j).map_or(String::new(), |v| v.to_string());
                let n = self.completed[i][j];
                let rate = if n == 0 { f64::NAN } else { self.successes[i][j] as f64 / n as f64 };
                out.push_str(&format!("{r},{c},{rate}\n"));
            }
        }
        out
    }

    pub fn trials_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for t in &self.trials {
            out.push_str(&serde_json::to_string(t).map_err(|e| Error::Io(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn seeds_text(&self) -> String {
        self.seeds.iter().map(|s| format!("{s}\n")).collect()
    }
}

/// Trial seeds `seed0, seed0 + 1, …`.
pub fn seed_ledger(seed0: u64, n_trials: usize) -> Vec<u64> {
    (0..n_trials as u64).map(|i| seed0.wrapping_add(i)).collect()
}

/// Runs `jobs` on `workers` threads (0 = rayon default) and returns results in job order.
pub fn run_parallel<T: Send, J: Sync>(jobs: &[J], workers: usize, f: impl Fn(&J) -> T + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(&f).collect()))
}

struct Job {
    row: usize,
    col: usize,
    trial: usize,
    spec: ReservoirSpec,
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    kind: ReservoirKind,
    row_axis: &str,
    row_values: &[f64],
    col_axis: Option<&str>,
    col_values: &[f64],
    seeds: &[u64],
    options: &TrialOptions,
    workers: usize,
    cell_spec: impl Fn(f64, Option<f64>) -> ReservoirSpec,
) -> Result<SweepResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("n_trials must be >= 1".into()));
    }
    let cols = col_values.len().max(1);
    let mut jobs = Vec::with_capacity(row_values.len() * cols * seeds.len());
    for (row, &rv) in row_values.iter().enumerate() {
        for col in 0..cols {
            let spec = cell_spec(rv, col_values.get(col).copied());
            spec.validate()?;
            for trial in 0..seeds.len() {
                jobs.push(Job { row, col, trial, spec });
            }
        }
    }
    let reports = run_parallel(&jobs, workers, |j| run_seeing_double_trial_with(kind, &j.spec, seeds[j.trial], options))?;

    let mut successes = vec![vec![0; cols]; row_values.len()];
    let mut completed = vec![vec![0; cols]; row_values.len()];
    let mut errors = vec![vec![0; cols]; row_values.len()];
    let mut trials = Vec::with_capacity(jobs.len());
    for (j, report) in jobs.iter().zip(reports) {
        match report.status {
            TrialStatus::Success => {
                successes[j.row][j.col] += 1;
                completed[j.row][j.col] += 1;
            }
            TrialStatus::Failure => completed[j.row][j.col] += 1,
            TrialStatus::Error => errors[j.row][j.col] += 1,
        }
        trials.push(CellTrial {
            row: j.row,
            col: j.col,
            row_value: row_values[j.row],
            col_value: col_values.get(j.col).copied(),
            trial: j.trial,
            report,
        });
    }
    Ok(SweepResult {
        kind: kind.label().into(),
        row_axis: row_axis.into(),
        row_values: row_values.to_vec(),
        col_axis: col_axis.map(Into::into),
        col_values: col_values.to_vec(),
        successes,
        completed,
        errors,
        seeds: seeds.to_vec(),
        trials,
    })
}

/// Success counts against spectral radius, `n_trials` seeds per value.
pub fn sweep_rho(
    kind: ReservoirKind,
    base: &ReservoirSpec,
    rho_values: &[f64],
    seeds: &[u64],
    options: &TrialOptions,
    workers: usize,
) -> Result<SweepResult> {
    sweep(kind, "rho", rho_values, None, &[], seeds, options, workers, |rho, _| ReservoirSpec {
        spectral_radius: rho,
        ..*base
    })
}

/// Success counts over the (β, rate) plane, where the rate is γ for CT and α for LI. The
/// spectral radius is taken from `base`.
pub fn sweep_grid(
    kind: ReservoirKind,
    base: &ReservoirSpec,
    beta_values: &[f64],
    rate_values: &[f64],
    seeds: &[u64],
    options: &TrialOptions,
    workers: usize,
) -> Result<SweepResult> {
    let rate_axis = match kind {
        ReservoirKind::Ct => "gamma",
        ReservoirKind::Li => "alpha",
    };
    sweep(kind, "beta", beta_values, Some(rate_axis), rate_values, seeds, options, workers, |beta, rate| {
        let rate = rate.expect("grid column");
        match kind {
            ReservoirKind::Ct => ReservoirSpec { regularization: beta, timescale: rate, ..*base },
            ReservoirKind::Li => ReservoirSpec { regularization: beta, leak_rate: rate, ..*base },
        }
    })
}
