use serde::{Deserialize, Serialize};

use crate::analysis::{
    floquet_multipliers, li_floquet_multipliers, multifunctionality_success, stm, FloquetSpectrum,
    MultifunctionalityReport, OrbitLabel, StmConfig, STABILITY_TOLERANCE,
};
use crate::error::Result;
use crate::reservoir::{generate_network, predict_output, ReservoirKind, ReservoirSpec, TrainedModel};
use crate::series::TimeSeries;
use crate::tasks::{circle_samples, CircleSpec, CIRCLE_PERIOD};

use super::training::{train_multifunctional, MultifunctionalModel, MultifunctionalTrainingSet};

pub const DEFAULT_PREDICTION_PERIODS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Success,
    Failure,
    /// The trial could not be completed; never counted as a failure.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeeingDoubleReport {
    pub kind: String,
    pub seed: u64,
    /// Seed that produced `M` after degenerate-matrix retries.
    pub network_seed: Option<u64>,
    pub status: TrialStatus,
    pub error: Option<String>,
    pub multifunctionality: Option<MultifunctionalityReport>,
    /// Spectra for C_A and C_B, when requested.
    pub floquet: Option<Vec<FloquetSpectrum>>,
    /// Every non-trivial multiplier of both orbits inside the unit circle (within tolerance).
    pub floquet_stable: Option<bool>,
    /// Short-term memory of the realization's `M`, when requested.
    pub stm: Option<f64>,
}

/// Optional diagnostics attached to a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    pub prediction_periods: f64,
    pub floquet: bool,
    /// STM settings; the seed is replaced by the trial seed.
    pub stm: Option<StmConfig>,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self { prediction_periods: DEFAULT_PREDICTION_PERIODS, floquet: false, stm: None }
    }
}

impl SeeingDoubleReport {
    pub fn success(&self) -> bool {
        self.status == TrialStatus::Success
    }

    pub fn errored(kind: &str, seed: u64, err: &crate::Error) -> Self {
        Self {
            kind: kind.into(),
            seed,
            network_seed: None,
            status: TrialStatus::Error,
            error: Some(err.to_string()),
            multifunctionality: None,
            floquet: None,
            floquet_stable: None,
            stm: None,
        }
    }
}

/// C_A and C_B sampled on `[0, horizon]` with the reservoir step.
pub fn seeing_double_set(step: f64, samples: usize) -> Result<MultifunctionalTrainingSet> {
    let a = circle_samples(&CircleSpec::seeing_double_a(step, 1.0), samples);
    let b = circle_samples(&CircleSpec::seeing_double_b(step, 1.0), samples);
    MultifunctionalTrainingSet::new(a, b, "C_A", "C_B")
}

pub fn prediction_steps(step: f64, periods: f64) -> usize {
    (periods * CIRCLE_PERIOD / step).round() as usize
}

/// A trained seeing-double reservoir with its closed-loop predictions from both listening
/// end states.
#[derive(Debug, Clone)]
pub struct SeeingDoubleRun {
    pub trained: MultifunctionalModel,
    pub network_seed: u64,
    pub predictions: [Option<TimeSeries>; 2],
    pub report: MultifunctionalityReport,
}

pub fn seeing_double_run(kind: ReservoirKind, spec: &ReservoirSpec, periods: f64) -> Result<SeeingDoubleRun> {
    let (m, w_in, network_seed) = generate_network(spec, 2)?;
    let ts = seeing_double_set(spec.step, spec.train_index() + 1)?;
    let trained = train_multifunctional(kind, spec, m, w_in, &ts)?;
    let steps = prediction_steps(spec.step, periods);
    // a closed-loop blow-up is an unsuccessful trial, not an error
    let predict = |i: usize| predict_output(&trained.model, &trained.final_states[i], steps).ok();
    let predictions = [predict(0), predict(1)];
    let report = match &predictions {
        [Some(a), Some(b)] => multifunctionality_success(a, b),
        _ => {
            let blown = |p: &Option<TimeSeries>| p.as_ref().map_or_else(|| huge(spec.step), Clone::clone);
            multifunctionality_success(&blown(&predictions[0]), &blown(&predictions[1]))
        }
    };
    Ok(SeeingDoubleRun { trained, network_seed, predictions, report })
}

/// Stand-in for a prediction that left the finite numbers.
fn huge(step: f64) -> TimeSeries {
    TimeSeries::from_raw(2, step, vec![f64::MAX; 2 * crate::analysis::outcome::MIN_CLASSIFY_SAMPLES])
}

/// One CT or LI seeing-double trial at `seed` (overrides `spec.seed`).
pub fn run_seeing_double_trial(kind: ReservoirKind, spec: &ReservoirSpec, seed: u64) -> SeeingDoubleReport {
    run_seeing_double_trial_with(kind, spec, seed, &TrialOptions::default())
}

pub fn run_seeing_double_trial_with(
    kind: ReservoirKind,
    spec: &ReservoirSpec,
    seed: u64,
    options: &TrialOptions,
) -> SeeingDoubleReport {
    let spec = ReservoirSpec { seed, ..*spec };
    let run = match seeing_double_run(kind, &spec, options.prediction_periods) {
        Ok(run) => run,
        Err(e) => return SeeingDoubleReport::errored(kind.label(), seed, &e),
    };
    let mut report = SeeingDoubleReport {
        kind: kind.label().into(),
        seed,
        network_seed: Some(run.network_seed),
        status: if run.report.success { TrialStatus::Success } else { TrialStatus::Failure },
        error: None,
        multifunctionality: Some(run.report.clone()),
        floquet: None,
        floquet_stable: None,
        stm: None,
    };
    if options.floquet {
        match orbit_spectra(&run.trained.model) {
            Ok(spectra) => {
                report.floquet_stable = Some(spectra.iter().all(|s| s.is_stable(STABILITY_TOLERANCE)));
                report.floquet = Some(spectra);
            }
            Err(e) => {
                report.status = TrialStatus::Error;
                report.error = Some(format!("floquet: {e}"));
            }
        }
    }
    if let Some(cfg) = options.stm {
        let cfg = StmConfig { seed, ..cfg };
        match stm(&run.trained.model.adjacency, &spec, &cfg) {
            Ok(v) => report.stm = Some(v),
            Err(e) => {
                report.status = TrialStatus::Error;
                report.error = Some(format!("stm: {e}"));
            }
        }
    }
    report
}

/// Floquet spectra along the driven responses to C_A and C_B.
pub fn orbit_spectra(model: &TrainedModel) -> Result<Vec<FloquetSpectrum>> {
    let samples = (TRANSIENT_SAMPLES_PERIODS * CIRCLE_PERIOD / model.spec.step).round() as usize + 2;
    let ts = seeing_double_set(model.spec.step, samples)?;
    let labels = [OrbitLabel::CA, OrbitLabel::CB];
    ts.inputs()
        .into_iter()
        .zip(labels)
        .map(|(u, label)| match model.kind {
            ReservoirKind::Ct => floquet_multipliers(model, u, label),
            ReservoirKind::Li => li_floquet_multipliers(model, u, label),
        })
        .collect()
}

/// Transient plus one reference period.
const TRANSIENT_SAMPLES_PERIODS: f64 = crate::analysis::floquet::TRANSIENT_PERIODS + 1.0;
