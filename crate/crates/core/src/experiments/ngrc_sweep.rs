use serde::{Deserialize, Serialize};

use crate::analysis::{multifunctionality_success, MultifunctionalityReport, OutcomeClass};
use crate::error::{Error, Result};
use crate::ngrc::{ngrc_accumulate, ngrc_accumulate_with, ngrc_predict, NgrcSpec, QR_FEATURE_LIMIT};
use crate::numerics::Matrix;
use crate::series::TimeSeries;
use crate::tasks::CIRCLE_PERIOD;

use super::seeing_double::{prediction_steps, seeing_double_set, DEFAULT_PREDICTION_PERIODS};

/// Sampling of an NG-RC seeing-double run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NgrcTask {
    pub step: f64,
    pub train_horizon: f64,
    /// Length of the judged tail.
    pub prediction_periods: f64,
    /// Total closed-loop run; slow decays toward the origin only settle after many periods.
    pub settle_periods: f64,
}

pub const DEFAULT_SETTLE_PERIODS: f64 = 200.0;

impl Default for NgrcTask {
    fn default() -> Self {
        Self {
            step: 0.01,
            train_horizon: 15.0 * CIRCLE_PERIOD,
            prediction_periods: DEFAULT_PREDICTION_PERIODS,
            settle_periods: DEFAULT_SETTLE_PERIODS,
        }
    }
}

impl NgrcTask {
    pub fn train_index(&self) -> usize {
        (self.train_horizon / self.step).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgrcBetaRecord {
    pub beta: f64,
    /// Row-major 2×F readout.
    pub weights: Vec<Vec<f64>>,
    pub success: bool,
    /// Worst closed-loop outcome over the two orbits (`diverged` when either blew up).
    pub outcome: OutcomeClass,
    pub report: MultifunctionalityReport,
}

/// Closed-loop predictions of a trained NG-RC from the end of each training circle, run for
/// `settle_periods` and cut to the trailing `prediction_periods`.
pub fn ngrc_seeing_double_predict(
    spec: &NgrcSpec,
    w_out: &Matrix,
    inputs: [&TimeSeries; 2],
    task: &NgrcTask,
) -> [Result<TimeSeries>; 2] {
    let i_train = task.train_index();
    let steps = prediction_steps(task.step, task.settle_periods.max(task.prediction_periods));
    let keep = prediction_steps(task.step, task.prediction_periods) + 1;
    inputs.map(|u| ngrc_predict(spec, w_out, &u.slice(0, i_train + 1), steps).map(|p| p.tail(keep)))
}

fn judge(predictions: [Result<TimeSeries>; 2], step: f64) -> (MultifunctionalityReport, OutcomeClass) {
    let diverged = predictions.iter().any(|p| matches!(p, Err(Error::Divergence { .. })));
    let series = predictions.map(|p| p.unwrap_or_else(|_| blown(step)));
    let report = multifunctionality_success(&series[0], &series[1]);
    let outcome = if diverged {
        OutcomeClass::Diverged
    } else {
        let classes = [report.outcome_a.as_ref(), report.outcome_b.as_ref()].map(|o| o.map(|o| o.class));
        worst(classes)
    };
    (report, outcome)
}

fn worst(classes: [Option<OutcomeClass>; 2]) -> OutcomeClass {
    let rank = |c: Option<OutcomeClass>| match c {
        None | Some(OutcomeClass::Diverged) => 3,
        Some(OutcomeClass::BoundedAperiodic) => 2,
        Some(OutcomeClass::FixedPoint) => 1,
        Some(OutcomeClass::Periodic) => 0,
    };
    let c = if rank(classes[0]) >= rank(classes[1]) { classes[0] } else { classes[1] };
    c.unwrap_or(OutcomeClass::Diverged)
}

fn blown(step: f64) -> TimeSeries {
    TimeSeries::from_raw(2, step, vec![f64::MAX; 2 * crate::analysis::outcome::MIN_CLASSIFY_SAMPLES])
}

/// Trains the NG-RC on C_A ⊕ C_B once per β (sharing the normal-equation sums) and records the
/// readout and closed-loop outcome.
pub fn ngrc_beta_sweep(template: &NgrcSpec, betas: &[f64], task: &NgrcTask) -> Result<Vec<NgrcBetaRecord>> {
    ngrc_beta_sweep_with(template, betas, task, QR_FEATURE_LIMIT)
}

/// [`ngrc_beta_sweep`] with the feature count above which the Gram-matrix solver is used
/// (`0` always uses it).
pub fn ngrc_beta_sweep_with(
    template: &NgrcSpec,
    betas: &[f64],
    task: &NgrcTask,
    qr_limit: usize,
) -> Result<Vec<NgrcBetaRecord>> {
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0)) {
        return Err(Error::InvalidParameter(format!("beta values must be > 0, got {b}")));
    }
    let i_train = task.train_index();
    let ts = seeing_double_set(task.step, i_train + 1)?;
    let acc = ngrc_accumulate_with(template, &ts.inputs(), i_train, qr_limit)?;
    betas
        .iter()
        .map(|&beta| {
            let w = acc.solve(beta)?;
            let spec = NgrcSpec { regularization: beta, ..template.clone() };
            let (report, outcome) = judge(ngrc_seeing_double_predict(&spec, &w, ts.inputs(), task), task.step);
            Ok(NgrcBetaRecord { beta, weights: w.to_rows(), success: report.success, outcome, report })
        })
        .collect()
}

/// One NG-RC seeing-double trial; the model is deterministic so the result does not depend on
/// any seed.
pub fn ngrc_seeing_double_trial(spec: &NgrcSpec, task: &NgrcTask) -> Result<(Matrix, MultifunctionalityReport)> {
    let i_train = task.train_index();
    let ts = seeing_double_set(task.step, i_train + 1)?;
    let w = ngrc_accumulate(spec, &ts.inputs(), i_train)?.solve(spec.regularization)?;
    let (report, _) = judge(ngrc_seeing_double_predict(spec, &w, ts.inputs(), task), task.step);
    Ok((w, report))
}

/// `n` values spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

/// Closed-loop behaviour of the seeing-double NG-RC with its four dominant weights rounded to
/// exactly ±1 and everything else zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundedWeightProbe {
    /// Largest norm within each period of the run.
    pub period_peaks: Vec<f64>,
    /// Mean increase of the peak norm per period over the second half of the run.
    pub growth_per_period: f64,
    /// Peaks increase every period and the last is at least `DRIFT_FACTOR` times the starting
    /// norm (the circle radius).
    pub diverging: bool,
    /// The run crossed the hard divergence norm.
    pub blew_up: bool,
}

/// Ratio of the final peak norm to the starting norm that counts as unbounded growth.
pub const DRIFT_FACTOR: f64 = 100.0;

/// `u[n+1] = 2u[n] − u[n−1]` on both coordinates: the readout that the weights found by the
/// β-sweep approximate.
pub fn rounded_weights() -> Matrix {
    Matrix::from_rows(&[
        vec![1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ])
    .expect("rectangular")
}

/// Runs the rounded readout for `periods` periods from the end of the C_A training window.
pub fn rounded_weight_probe(spec: &NgrcSpec, task: &NgrcTask, periods: usize) -> Result<RoundedWeightProbe> {
    let i_train = task.train_index();
    let ts = seeing_double_set(task.step, i_train + 1)?;
    let per = prediction_steps(task.step, 1.0);
    let history = ts.input_1.slice(0, i_train + 1);
    let (run, blew_up) = match ngrc_predict(spec, &rounded_weights(), &history, per * periods) {
        Ok(run) => (Some(run), false),
        Err(Error::Divergence { .. }) => (None, true),
        Err(e) => return Err(e),
    };
    let Some(run) = run else {
        return Ok(RoundedWeightProbe { period_peaks: vec![], growth_per_period: f64::INFINITY, diverging: true, blew_up });
    };
    let norms: Vec<f64> = run.values().chunks(run.dims()).map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let period_peaks: Vec<f64> = norms[1..].chunks(per).map(|c| c.iter().copied().fold(0.0, f64::max)).collect();
    let half = period_peaks.len() / 2;
    let tail = &period_peaks[half..];
    let growth_per_period = if tail.len() > 1 { (tail[tail.len() - 1] - tail[0]) / (tail.len() - 1) as f64 } else { 0.0 };
    let monotone = period_peaks.windows(2).all(|w| w[1] > w[0]);
    let ratio = period_peaks.last().copied().unwrap_or(0.0) / norms[0];
    Ok(RoundedWeightProbe { diverging: monotone && ratio >= DRIFT_FACTOR, period_peaks, growth_per_period, blew_up })
}
