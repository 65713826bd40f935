use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RidgeAccumulator};
use crate::reservoir::{drive, Network, ReservoirKind, ReservoirSpec, ReservoirState, TrainedModel};
use crate::series::TimeSeries;

/// Rows buffered before they are folded into the Gram matrix.
const CHUNK_ROWS: usize = 256;

/// The two signals a single reservoir is trained to reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifunctionalTrainingSet {
    pub input_1: TimeSeries,
    pub input_2: TimeSeries,
    pub label_1: String,
    pub label_2: String,
}

impl MultifunctionalTrainingSet {
    pub fn new(input_1: TimeSeries, input_2: TimeSeries, label_1: &str, label_2: &str) -> Result<Self> {
        if input_1.dims() != input_2.dims() {
            return Err(Error::Dimension(format!(
                "training inputs have {} and {} dims",
                input_1.dims(),
                input_2.dims()
            )));
        }
        if (input_1.step() - input_2.step()).abs() > 1e-15 {
            return Err(Error::InvalidParameter("training inputs have different steps".into()));
        }
        Ok(Self { input_1, input_2, label_1: label_1.into(), label_2: label_2.into() })
    }

    pub fn inputs(&self) -> [&TimeSeries; 2] {
        [&self.input_1, &self.input_2]
    }
}

#[derive(Debug, Clone)]
pub struct MultifunctionalModel {
    pub model: TrainedModel,
    /// `r[i_train]` of the listening pass on each input.
    pub final_states: [ReservoirState; 2],
}

/// Drives `(M, W_in)` with both inputs (from `r = 0` each time), stacks the two windows of
/// `q(r[i])` and `u[i]` column-wise and fits one readout by ridge regression.
pub fn train_multifunctional(
    kind: ReservoirKind,
    spec: &ReservoirSpec,
    adjacency: Matrix,
    input_matrix: Matrix,
    ts: &MultifunctionalTrainingSet,
) -> Result<MultifunctionalModel> {
    spec.validate()?;
    let net = Network::new(&adjacency, &input_matrix, spec.input_strength);
    let n = net.n;
    let d = net.d;
    let mut acc = RidgeAccumulator::new(2 * n, d);
    let mut finals = Vec::with_capacity(2);
    for input in ts.inputs() {
        crate::reservoir::check_input(spec, &net, input)?;
        let (start, end) = (spec.listen_index(), spec.train_index());
        let mut feats = Vec::with_capacity(CHUNK_ROWS * 2 * n);
        let mut targs = Vec::with_capacity(CHUNK_ROWS * d);
        let mut failure = None;
        let last = drive(kind, spec, &net, input, end, |i, r| {
            if i < start || failure.is_some() {
                return;
            }
            feats.extend_from_slice(r);
            feats.extend(r.iter().map(|v| v * v));
            targs.extend_from_slice(input.point(i));
            if targs.len() == CHUNK_ROWS * d {
                if let Err(e) = acc.add_rows(&feats, &targs, CHUNK_ROWS) {
                    failure = Some(e);
                }
                feats.clear();
                targs.clear();
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if !targs.is_empty() {
            acc.add_rows(&feats, &targs, targs.len() / d)?;
        }
        finals.push(ReservoirState { values: last, time: end as f64 * spec.step });
    }
    let readout = acc.solve(spec.regularization)?;
    let model = TrainedModel::new(kind, adjacency, input_matrix, readout, *spec)?;
    let second = finals.pop().expect("two passes");
    let first = finals.pop().expect("two passes");
    Ok(MultifunctionalModel { model, final_states: [first, second] })
}
