use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

use super::cycle::{rotation_direction, roundness, Rotation};

/// Any point farther than this from the origin counts as divergence.
pub const DIVERGENCE_NORM: f64 = 1e6;
/// Per-coordinate standard deviation over the trailing half below which the run has settled.
pub const FIXED_POINT_STD: f64 = 1e-4;
/// RMS recurrence distance, relative to amplitude, below which the run is periodic.
pub const RECURRENCE_RTOL: f64 = 1e-2;
/// Fraction of the series (from the end) examined for periodicity.
pub const PERIODICITY_WINDOW: f64 = 0.6;
pub const MIN_CLASSIFY_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    Diverged,
    FixedPoint,
    Periodic,
    BoundedAperiodic,
}

impl OutcomeClass {
    pub fn label(&self) -> &'static str {
        match self {
            OutcomeClass::Diverged => "diverged",
            OutcomeClass::FixedPoint => "fixed_point",
            OutcomeClass::Periodic => "periodic",
            OutcomeClass::BoundedAperiodic => "bounded_aperiodic",
        }
    }
}

/// Classification of a closed-loop prediction. `rotation` and `roundness` are only filled for
/// periodic runs with at least two dimensions (measured on the last period, about the origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub class: OutcomeClass,
    pub period_estimate: Option<f64>,
    /// Period in samples (fractional).
    pub period_samples: Option<f64>,
    pub recurrence_error: Option<f64>,
    pub rotation: Option<Rotation>,
    pub roundness: Option<f64>,
}

impl TrialOutcome {
    fn simple(class: OutcomeClass) -> Self {
        Self { class, period_estimate: None, period_samples: None, recurrence_error: None, rotation: None, roundness: None }
    }
}

pub fn classify_outcome(series: &TimeSeries) -> Result<TrialOutcome> {
    let len = series.len();
    if len < MIN_CLASSIFY_SAMPLES {
        return Err(Error::DataTooShort { needed: MIN_CLASSIFY_SAMPLES, got: len });
    }
    let diverged = series
        .points()
        .any(|p| p.iter().any(|v| !v.is_finite()) || p.iter().map(|v| v * v).sum::<f64>().sqrt() > DIVERGENCE_NORM);
    if diverged {
        return Ok(TrialOutcome::simple(OutcomeClass::Diverged));
    }
    let half = series.tail(len / 2);
    if std_per_coordinate(&half).iter().all(|s| *s < FIXED_POINT_STD) {
        return Ok(TrialOutcome::simple(OutcomeClass::FixedPoint));
    }
    let window = series.tail((len as f64 * PERIODICITY_WINDOW).ceil() as usize);
    let Some((lag, err)) = estimate_period(&window) else {
        return Ok(TrialOutcome::simple(OutcomeClass::BoundedAperiodic));
    };
    if err >= RECURRENCE_RTOL {
        let mut out = TrialOutcome::simple(OutcomeClass::BoundedAperiodic);
        out.recurrence_error = Some(err);
        return Ok(out);
    }
    let mut out = TrialOutcome {
        class: OutcomeClass::Periodic,
        period_estimate: Some(lag * series.step()),
        period_samples: Some(lag),
        recurrence_error: Some(err),
        rotation: None,
        roundness: None,
    };
    if series.dims() >= 2 {
        let cycle = last_cycle(series, lag);
        out.rotation = rotation_direction(&cycle).ok();
        out.roundness = roundness(&cycle, &[0.0, 0.0]).ok();
    }
    Ok(out)
}

/// The trailing `ceil(period)` samples, projected on the first two coordinates.
pub fn last_cycle(series: &TimeSeries, period_samples: f64) -> TimeSeries {
    let n = (period_samples.ceil() as usize).max(1);
    let tail = series.tail(n);
    if series.dims() == 2 {
        tail
    } else {
        let values = tail.points().flat_map(|p| [p[0], p[1]]).collect();
        TimeSeries::from_raw(2, series.step(), values)
    }
}

fn std_per_coordinate(s: &TimeSeries) -> Vec<f64> {
    let mean = s.mean();
    let mut var = vec![0.0; s.dims()];
    for p in s.points() {
        for ((v, x), m) in var.iter_mut().zip(p).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let n = s.len().max(1) as f64;
    var.iter().map(|v| (v / n).sqrt()).collect()
}

/// Period estimate from the autocorrelation of the first coordinate, refined to a fractional
/// lag by minimizing the RMS recurrence distance. Returns `(lag in samples, relative error)`.
pub fn estimate_period(window: &TimeSeries) -> Option<(f64, f64)> {
    let len = window.len();
    if len < 16 {
        return None;
    }
    let x = window.coordinate(0);
    let mean = x.iter().sum::<f64>() / len as f64;
    let xc: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let energy: f64 = xc.iter().map(|v| v * v).sum::<f64>() / len as f64;
    if energy <= 0.0 {
        return None;
    }
    let max_lag = len / 2;
    let ac: Vec<f64> = (0..=max_lag)
        .map(|lag| {
            let m = len - lag;
            crate::numerics::dot(&xc[..m], &xc[lag..]) / m as f64 / energy
        })
        .collect();
    let first_negative = ac.iter().position(|v| *v < 0.0)?;
    let best = ac[first_negative..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return None;
    }
    let peak = (first_negative + 1..max_lag)
        .find(|&l| ac[l] >= ac[l - 1] && ac[l] >= ac[l + 1] && ac[l] >= 0.8 * best)?;

    let amplitude = window.bounds().iter().map(|(lo, hi)| 0.5 * (hi - lo)).fold(0.0, f64::max);
    if amplitude <= 0.0 {
        return None;
    }
    let lo = peak.saturating_sub(3).max(1);
    let hi = (peak + 3).min(len - 2);
    let (mut best_lag, mut best_err) = (peak as f64, f64::INFINITY);
    for lag in lo..=hi {
        for k in -10i32..=10 {
            let frac = lag as f64 + k as f64 * 0.05;
            if let Some(e) = recurrence_rms(window, frac) {
                if e < best_err {
                    best_err = e;
                    best_lag = frac;
                }
            }
        }
    }
    if !best_err.is_finite() {
        return None;
    }
    Some((best_lag, best_err / amplitude))
}

/// RMS distance between `p(n)` and the linearly interpolated `p(n + lag)`.
fn recurrence_rms(s: &TimeSeries, lag: f64) -> Option<f64> {
    if lag <= 0.0 {
        return None;
    }
    let base = lag.floor() as usize;
    let frac = lag - base as f64;
    let len = s.len();
    if base + 1 >= len {
        return None;
    }
    let count = len - base - 1;
    let mut acc = 0.0;
    for n in 0..count {
        let p = s.point(n);
        let a = s.point(n + base);
        let b = s.point(n + base + 1);
        let mut d2 = 0.0;
        for k in 0..s.dims() {
            let q = a[k] + frac * (b[k] - a[k]);
            d2 += (q - p[k]) * (q - p[k]);
        }
        acc += d2;
    }
    Some((acc / count as f64).sqrt())
}
