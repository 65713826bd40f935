use serde::{Deserialize, Serialize};

use crate::analysis::{attractor_reconstruction_check, ReconstructionReport};
use crate::error::{Error, Result};
use crate::ngrc::{ngrc_predict, ngrc_train_multi, NgrcSpec};
use crate::reservoir::{generate_network, predict_output, ReservoirKind, ReservoirSpec};
use crate::series::TimeSeries;
use crate::tasks::{attractor_pair, AttractorPairSpec, DEFAULT_TRANSIENT};

use super::presets::{ngrc_preset, reservoir_preset, Preset, STEP};
use super::sweeps::run_parallel;
use super::training::{train_multifunctional, MultifunctionalTrainingSet};

/// The three model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ct,
    Li,
    Ngrc,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Ct => "ct",
            ModelKind::Li => "li",
            ModelKind::Ngrc => "ngrc",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "ct" => Some(ModelKind::Ct),
            "li" => Some(ModelKind::Li),
            "ngrc" | "ng" => Some(ModelKind::Ngrc),
            _ => None,
        }
    }

    pub fn reservoir(&self) -> Option<ReservoirKind> {
        match self {
            ModelKind::Ct => Some(ReservoirKind::Ct),
            ModelKind::Li => Some(ReservoirKind::Li),
            ModelKind::Ngrc => None,
        }
    }
}

/// Models and sampling of the attractor-pair experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzHalvorsenSetup {
    pub ct: ReservoirSpec,
    pub li: ReservoirSpec,
    pub ngrc: NgrcSpec,
    pub ngrc_train_horizon: f64,
    /// Closed-loop run length in time units.
    pub prediction_horizon: f64,
    pub transient: f64,
}

impl Default for LorenzHalvorsenSetup {
    fn default() -> Self {
        let (ngrc, ngrc_train_horizon) = ngrc_preset(Preset::Table3Fig1).expect("NG-RC preset");
        Self {
            ct: reservoir_preset(Preset::Table1Fig1).expect("CT preset"),
            li: reservoir_preset(Preset::Table2Fig1).expect("LI preset"),
            ngrc,
            ngrc_train_horizon,
            prediction_horizon: 100.0,
            transient: DEFAULT_TRANSIENT,
        }
    }
}

/// One realization (seed) of one model at one shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRun {
    /// `None` for the deterministic NG-RC.
    pub seed: Option<u64>,
    pub lorenz: Option<ReconstructionReport>,
    pub halvorsen: Option<ReconstructionReport>,
    pub both: bool,
    /// Set when a closed-loop run blew up (counted as failed reconstruction) or the model
    /// could not be built.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRecord {
    pub kind: ModelKind,
    pub dz: f64,
    pub runs: Vec<ReconstructionRun>,
    pub successes: usize,
}

fn judge(seed: Option<u64>, predictions: Result<[Result<TimeSeries>; 2]>, refs: [&TimeSeries; 2]) -> ReconstructionRun {
    let predictions = match predictions {
        Ok(p) => p,
        Err(e) => {
            return ReconstructionRun { seed, lorenz: None, halvorsen: None, both: false, error: Some(e.to_string()) }
        }
    };
    let mut error = None;
    let [l, h] = predictions.map(|p| match p {
        Ok(p) => Some(p),
        Err(e) => {
            error.get_or_insert_with(|| e.to_string());
            None
        }
    });
    let lorenz = l.map(|p| attractor_reconstruction_check(&p, refs[0]));
    let halvorsen = h.map(|p| attractor_reconstruction_check(&p, refs[1]));
    let both = lorenz.as_ref().is_some_and(|r| r.success) && halvorsen.as_ref().is_some_and(|r| r.success);
    ReconstructionRun { seed, lorenz, halvorsen, both, error }
}

fn reservoir_predictions(
    kind: ReservoirKind,
    spec: &ReservoirSpec,
    ts: &MultifunctionalTrainingSet,
    steps: usize,
) -> Result<[Result<TimeSeries>; 2]> {
    let (m, w_in, _) = generate_network(spec, 3)?;
    let trained = train_multifunctional(kind, spec, m, w_in, ts)?;
    Ok([0, 1].map(|i| predict_output(&trained.model, &trained.final_states[i], steps)))
}

fn ngrc_predictions(
    spec: &NgrcSpec,
    ts: &MultifunctionalTrainingSet,
    i_train: usize,
    steps: usize,
) -> Result<[Result<TimeSeries>; 2]> {
    let w = ngrc_train_multi(spec, &ts.inputs(), i_train)?;
    Ok(ts.inputs().map(|u| ngrc_predict(spec, &w, &u.slice(0, i_train + 1), steps)))
}

/// Training pair for shift `dz` long enough for every model in `setup`.
pub fn attractor_training_set(setup: &LorenzHalvorsenSetup, dz: f64) -> Result<MultifunctionalTrainingSet> {
    let horizon = setup.ct.train_horizon.max(setup.li.train_horizon).max(setup.ngrc_train_horizon);
    let pair = AttractorPairSpec { z_shift: dz, horizon, step: STEP, transient_discard: setup.transient };
    let (l, h) = attractor_pair(&pair)?;
    MultifunctionalTrainingSet::new(l, h, "lorenz", "halvorsen")
}

/// Trains every kind at every shift and checks the closed-loop predictions against the
/// training attractors. CT and LI are repeated for each seed; the NG-RC runs once.
pub fn lorenz_halvorsen_experiment(
    kinds: &[ModelKind],
    dz_values: &[f64],
    seeds: &[u64],
    setup: &LorenzHalvorsenSetup,
    workers: usize,
) -> Result<Vec<ReconstructionRecord>> {
    if let Some(dz) = dz_values.iter().find(|d| !(**d >= 0.0)) {
        return Err(Error::InvalidParameter(format!("z shifts must be >= 0, got {dz}")));
    }
    let steps = (setup.prediction_horizon / STEP).round() as usize;
    let sets = dz_values.iter().map(|&dz| attractor_training_set(setup, dz)).collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for (di, _) in dz_values.iter().enumerate() {
        for &kind in kinds {
            match kind {
                ModelKind::Ngrc => jobs.push((di, kind, None)),
                _ => jobs.extend(seeds.iter().map(|&s| (di, kind, Some(s)))),
            }
        }
    }
    let runs = run_parallel(&jobs, workers, |&(di, kind, seed)| {
        let ts = &sets[di];
        let predictions = match kind {
            ModelKind::Ct | ModelKind::Li => {
                let base = if kind == ModelKind::Ct { &setup.ct } else { &setup.li };
                let spec = ReservoirSpec { seed: seed.unwrap_or(0), ..*base };
                let rk = kind.reservoir().expect("reservoir kind");
                reservoir_predictions(rk, &spec, ts, steps)
            }
            ModelKind::Ngrc => {
                let i_train = (setup.ngrc_train_horizon / STEP).round() as usize;
                ngrc_predictions(&setup.ngrc, ts, i_train, steps)
            }
        };
        judge(seed, predictions, ts.inputs())
    })?;

    let mut records: Vec<ReconstructionRecord> = Vec::new();
    for ((di, kind, _), run) in jobs.into_iter().zip(runs) {
        let dz = dz_values[di];
        match records.last_mut() {
            Some(r) if r.kind == kind && r.dz == dz => {
                r.successes += run.both as usize;
                r.runs.push(run);
            }
            _ => records.push(ReconstructionRecord { kind, dz, successes: run.both as usize, runs: vec![run] }),
        }
    }
    Ok(records)
}
