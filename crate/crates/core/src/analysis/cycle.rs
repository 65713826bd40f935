//! Roundness and rotation sense of predicted cycles, and the multifunctionality test for the
//! counter-rotating circle task.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

use super::outcome::{classify_outcome, OutcomeClass, TrialOutcome};

/// Both predicted cycles must have roundness below this.
pub const ROUNDNESS_THRESHOLD: f64 = 0.5;
pub const MIN_CYCLE_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rotation {
    #[serde(rename = "CW")]
    Cw,
    #[serde(rename = "CCW")]
    Ccw,
}

/// Radial spread of a cycle: largest minus smallest distance to `center`.
pub fn roundness(cycle: &TimeSeries, center: &[f64; 2]) -> Result<f64> {
    if cycle.dims() != 2 {
        return Err(Error::Dimension(format!("roundness needs a 2-D cycle, got {}", cycle.dims())));
    }
    if cycle.len() < MIN_CYCLE_SAMPLES {
        return Err(Error::DataTooShort { needed: MIN_CYCLE_SAMPLES, got: cycle.len() });
    }
    let (lo, hi) = cycle
        .points()
        .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(hi - lo)
}

/// Counter-clockwise iff `Σ (x_n y_{n+1} − x_{n+1} y_n) > 0` over consecutive samples.
pub fn rotation_direction(cycle: &TimeSeries) -> Result<Rotation> {
    if cycle.dims() != 2 {
        return Err(Error::Dimension(format!("rotation needs a 2-D cycle, got {}", cycle.dims())));
    }
    let area: f64 = cycle
        .values()
        .windows(4)
        .step_by(2)
        .map(|w| w[0] * w[3] - w[2] * w[1])
        .sum();
    if area > 0.0 {
        Ok(Rotation::Ccw)
    } else if area < 0.0 {
        Ok(Rotation::Cw)
    } else {
        Err(Error::Indeterminate)
    }
}

/// Metrics behind a multifunctionality verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifunctionalityReport {
    pub success: bool,
    pub reasons: Vec<String>,
    pub outcome_a: Option<TrialOutcome>,
    pub outcome_b: Option<TrialOutcome>,
    pub max_roundness: Option<f64>,
}

/// Success iff both predictions are periodic, rotate like their training circles (A
/// counter-clockwise, B clockwise) and both have roundness below 0.5 about the origin.
pub fn multifunctionality_success(pred_a: &TimeSeries, pred_b: &TimeSeries) -> MultifunctionalityReport {
    multifunctionality_check(pred_a, pred_b, Rotation::Ccw, Rotation::Cw)
}

pub fn multifunctionality_check(
    pred_a: &TimeSeries,
    pred_b: &TimeSeries,
    expected_a: Rotation,
    expected_b: Rotation,
) -> MultifunctionalityReport {
    let mut reasons = Vec::new();
    let mut judge = |label: &str, pred: &TimeSeries, expected: Rotation| -> Option<TrialOutcome> {
        match classify_outcome(pred) {
            Ok(o) => {
                if o.class != OutcomeClass::Periodic {
                    reasons.push(format!("{label}: not periodic ({})", o.class.label()));
                } else if o.rotation != Some(expected) {
                    reasons.push(format!("{label}: wrong rotation"));
                } else if o.roundness.map_or(true, |r| r >= ROUNDNESS_THRESHOLD) {
                    reasons.push(format!("{label}: roundness above threshold"));
                }
                Some(o)
            }
            Err(e) => {
                reasons.push(format!("{label}: {e}"));
                None
            }
        }
    };
    let outcome_a = judge("A", pred_a, expected_a);
    let outcome_b = judge("B", pred_b, expected_b);
    let max_roundness = match (
        outcome_a.as_ref().and_then(|o| o.roundness),
        outcome_b.as_ref().and_then(|o| o.roundness),
    ) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    MultifunctionalityReport { success: reasons.is_empty(), reasons, outcome_a, outcome_b, max_roundness }
}
