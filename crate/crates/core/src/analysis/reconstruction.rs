use serde::{Deserialize, Serialize};

use crate::series::TimeSeries;

use super::outcome::{classify_outcome, OutcomeClass};

/// Fraction of predicted points that must fall inside the inflated reference box.
pub const BOX_FRACTION: f64 = 0.9;
/// Each side of the reference bounding box is widened by this fraction of its extent.
pub const BOX_INFLATION: f64 = 0.2;
/// Below this |mean z| of the reference the sign test is skipped.
pub const MEAN_Z_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub success: bool,
    pub reasons: Vec<String>,
    pub class: Option<OutcomeClass>,
    pub inside_fraction: f64,
    pub mean_z_prediction: f64,
    pub mean_z_reference: f64,
}

/// Whether a 3-D closed-loop prediction plausibly reproduces the chaotic attractor sampled
/// by `reference`: it must stay aperiodic and bounded, mostly inside the reference's
/// (inflated) bounding box, and on the same side of z = 0.
pub fn attractor_reconstruction_check(prediction: &TimeSeries, reference: &TimeSeries) -> ReconstructionReport {
    let mut reasons = Vec::new();
    if prediction.dims() != 3 || reference.dims() != 3 || reference.is_empty() {
        return ReconstructionReport {
            success: false,
            reasons: vec!["expected two 3-D series".into()],
            class: None,
            inside_fraction: 0.0,
            mean_z_prediction: f64::NAN,
            mean_z_reference: f64::NAN,
        };
    }
    let class = match classify_outcome(prediction) {
        Ok(o) => Some(o.class),
        Err(e) => {
            reasons.push(format!("unclassifiable: {e}"));
            None
        }
    };
    if let Some(c) = class {
        if c != OutcomeClass::BoundedAperiodic {
            reasons.push(c.label().to_string());
        }
    }
    let bounds: Vec<(f64, f64)> = reference
        .bounds()
        .into_iter()
        .map(|(lo, hi)| {
            let pad = BOX_INFLATION * (hi - lo);
            (lo - pad, hi + pad)
        })
        .collect();
    let inside = prediction
        .points()
        .filter(|p| p.iter().zip(&bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi))
        .count();
    let inside_fraction = if prediction.is_empty() { 0.0 } else { inside as f64 / prediction.len() as f64 };
    if inside_fraction < BOX_FRACTION {
        reasons.push(format!("only {:.1}% of points inside the reference box", 100.0 * inside_fraction));
    }
    let mean_z_prediction = prediction.mean().get(2).copied().unwrap_or(f64::NAN);
    let mean_z_reference = reference.mean()[2];
    if mean_z_reference.abs() > MEAN_Z_FLOOR && !(mean_z_prediction.signum() == mean_z_reference.signum()) {
        reasons.push("mean z on the wrong side".into());
    }
    ReconstructionReport {
        success: reasons.is_empty(),
        reasons,
        class,
        inside_fraction,
        mean_z_prediction,
        mean_z_reference,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{generate_lorenz, normalize_to_unit_ball, LORENZ_INITIAL};

    #[test]
    fn reference_reconstructs_itself() {
        let l = generate_lorenz(100.0, 0.01, LORENZ_INITIAL, 20.0).unwrap();
        let (l, _) = normalize_to_unit_ball(&l).unwrap();
        let r = attractor_reconstruction_check(&l, &l);
        assert!(r.success, "{:?}", r.reasons);
    }

    #[test]
    fn fixed_point_fails() {
        let l = generate_lorenz(50.0, 0.01, LORENZ_INITIAL, 20.0).unwrap();
        let still = TimeSeries::from_raw(3, 0.01, l.last_point().repeat(5000));
        let r = attractor_reconstruction_check(&still, &l);
        assert!(!r.success);
        assert!(r.reasons.iter().any(|s| s == "fixed_point"));
    }
}
