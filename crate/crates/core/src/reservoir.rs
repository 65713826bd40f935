//! Continuous-time (CT) and leaky-integrator (LI) reservoir computers.
//!
//! A reservoir is a fixed random recurrent network `(M, W_in)`. While listening it is driven
//! by an input signal; after the quadratic readout `W_out q(r)` has been fitted the readout is
//! fed back in place of the input and the network runs autonomously (predicting).
//!
//! CT listening:  `ṙ = γ(−r + tanh(M r + σ W_in u))`, RK4 with the input held over each step.
//! LI listening:  `r[i+1] = (1 − α) r[i] + α tanh(M r[i] + σ W_in u[i])`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{scale_to_spectral_radius, CsrMatrix, Matrix, Rk4, StreamRng, StreamRole};
use crate::series::TimeSeries;

/// Re-draws allowed when a realized adjacency matrix has zero spectral radius.
pub const ADJACENCY_RETRIES: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReservoirKind {
    Ct,
    Li,
}

impl ReservoirKind {
    pub fn label(&self) -> &'static str {
        match self {
            ReservoirKind::Ct => "ct",
            ReservoirKind::Li => "li",
        }
    }
}

/// Scalar hyperparameters of one CT or LI reservoir realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub n_neurons: usize,
    pub connectivity: f64,
    pub spectral_radius: f64,
    pub input_strength: f64,
    /// γ, used by the CT model.
    pub timescale: f64,
    /// α, used by the LI model.
    pub leak_rate: f64,
    pub regularization: f64,
    pub step: f64,
    pub listen_horizon: f64,
    pub train_horizon: f64,
    pub seed: u64,
}

impl ReservoirSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_neurons == 0 {
            return bad("n_neurons must be >= 1".into());
        }
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return bad(format!("connectivity must lie in (0, 1], got {}", self.connectivity));
        }
        if !(self.spectral_radius > 0.0) {
            return bad(format!("spectral radius must be > 0, got {}", self.spectral_radius));
        }
        if !(0.0..=1.0).contains(&self.leak_rate) {
            return bad(format!("leak rate must lie in [0, 1], got {}", self.leak_rate));
        }
        if !(self.timescale > 0.0) {
            return bad(format!("timescale must be > 0, got {}", self.timescale));
        }
        if !(self.regularization >= 0.0) {
            return bad(format!("regularization must be >= 0, got {}", self.regularization));
        }
        if !(self.step > 0.0) {
            return bad(format!("step must be > 0, got {}", self.step));
        }
        if !(self.listen_horizon > 0.0 && self.listen_horizon < self.train_horizon) {
            return bad(format!(
                "need 0 < listen horizon < train horizon, got {} and {}",
                self.listen_horizon, self.train_horizon
            ));
        }
        Ok(())
    }

    /// First sample index collected into the training matrix.
    pub fn listen_index(&self) -> usize {
        (self.listen_horizon / self.step).round() as usize
    }

    /// Last sample index collected into the training matrix (inclusive).
    pub fn train_index(&self) -> usize {
        self.listen_index() + ((self.train_horizon - self.listen_horizon) / self.step + 1e-9).floor() as usize
    }

    /// Number of training columns per input signal.
    pub fn training_columns(&self) -> usize {
        self.train_index() - self.listen_index() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirState {
    pub values: Vec<f64>,
    pub time: f64,
}

impl ReservoirState {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n], time: 0.0 }
    }
}

/// Erdős–Rényi adjacency: each entry nonzero with probability `p`, uniform on (−1, 1), then
/// rescaled to spectral radius `rho`.
pub fn generate_adjacency(n: usize, p: f64, rho: f64, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("adjacency needs n >= 1".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("connectivity must lie in (0, 1], got {p}")));
    }
    let mut rng = StreamRng::new(seed, StreamRole::Adjacency);
    let mut m = Matrix::zeros(n, n);
    for v in m.as_mut_slice() {
        if rng.bernoulli(p) {
            *v = rng.uniform(-1.0, 1.0);
        }
    }
    scale_to_spectral_radius(&m, rho)
}

/// Input matrix with exactly one nonzero per row, column uniform over `d`, value on (−1, 1).
pub fn generate_input_matrix(n: usize, d: usize, seed: u64) -> Matrix {
    generate_input_matrix_with(n, d, &mut StreamRng::new(seed, StreamRole::Input))
}

pub(crate) fn generate_input_matrix_with(n: usize, d: usize, rng: &mut StreamRng) -> Matrix {
    let mut w = Matrix::zeros(n, d.max(1));
    for i in 0..n {
        let col = rng.index(d.max(1));
        w[(i, col)] = rng.uniform(-1.0, 1.0);
    }
    w
}

/// Draws `(M, W_in)` for `spec`, retrying the adjacency with `seed + 1, seed + 2, …` when the
/// realization is degenerate. Returns the seed actually used for `M`.
pub fn generate_network(spec: &ReservoirSpec, input_dims: usize) -> Result<(Matrix, Matrix, u64)> {
    spec.validate()?;
    let mut last_err = None;
    for attempt in 0..=ADJACENCY_RETRIES {
        let seed = spec.seed.wrapping_add(attempt);
        match generate_adjacency(spec.n_neurons, spec.connectivity, spec.spectral_radius, seed) {
            Ok(m) => {
                let w_in = generate_input_matrix(spec.n_neurons, input_dims, spec.seed);
                return Ok((m, w_in, seed));
            }
            Err(e @ Error::DegenerateMatrix(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::DegenerateMatrix("adjacency".into())))
}

/// `q(r) = (r, r²)`
pub fn quadratic_readout(r: &[f64]) -> Vec<f64> {
    let mut q = Vec::with_capacity(2 * r.len());
    q.extend_from_slice(r);
    q.extend(r.iter().map(|v| v * v));
    q
}

pub(crate) fn quadratic_readout_into(r: &[f64], out: &mut [f64]) {
    let n = r.len();
    out[..n].copy_from_slice(r);
    for (o, v) in out[n..2 * n].iter_mut().zip(r) {
        *o = v * v;
    }
}

/// A trained CT or LI reservoir: the closed-loop system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ReservoirKind,
    pub adjacency: Matrix,
    pub input_matrix: Matrix,
    /// D×2N quadratic readout.
    pub readout: Matrix,
    pub spec: ReservoirSpec,
}

impl TrainedModel {
    pub fn new(
        kind: ReservoirKind,
        adjacency: Matrix,
        input_matrix: Matrix,
        readout: Matrix,
        spec: ReservoirSpec,
    ) -> Result<Self> {
        let n = adjacency.rows();
        if !adjacency.is_square() || input_matrix.rows() != n {
            return Err(Error::Dimension("adjacency and input matrix disagree on N".into()));
        }
        if readout.cols() != 2 * n || readout.rows() != input_matrix.cols() {
            return Err(Error::Dimension(format!(
                "readout must be {}x{}, got {}x{}",
                input_matrix.cols(),
                2 * n,
                readout.rows(),
                readout.cols()
            )));
        }
        Ok(Self { kind, adjacency, input_matrix, readout, spec })
    }

    pub fn n_neurons(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn output_dims(&self) -> usize {
        self.readout.rows()
    }

    /// `W_out q(r)`
    pub fn output(&self, r: &[f64]) -> Vec<f64> {
        self.readout.matvec(&quadratic_readout(r)).expect("readout shape checked at construction")
    }
}

/// Fast simulation view of `(M, W_in)`.
#[derive(Debug, Clone)]
pub(crate) struct Network {
    pub n: usize,
    pub d: usize,
    pub adjacency: CsrMatrix,
    /// Row-major N×D input weights (mostly zeros).
    pub input: Vec<f64>,
    pub input_strength: f64,
}

impl Network {
    pub fn new(adjacency: &Matrix, input: &Matrix, input_strength: f64) -> Self {
        Self {
            n: adjacency.rows(),
            d: input.cols(),
            adjacency: CsrMatrix::from_dense(adjacency),
            input: input.as_slice().to_vec(),
            input_strength,
        }
    }

    /// `out = M r + σ W_in u`
    #[inline]
    pub fn activation(&self, r: &[f64], u: &[f64], out: &mut [f64]) {
        self.adjacency.matvec_into(r, out);
        let s = self.input_strength;
        for (i, o) in out.iter_mut().enumerate() {
            let w = &self.input[i * self.d..(i + 1) * self.d];
            let mut acc = 0.0;
            for (wv, uv) in w.iter().zip(u) {
                acc += wv * uv;
            }
            *o += s * acc;
        }
    }
}

/// Readout evaluation with preallocated buffers.
#[derive(Debug, Clone)]
pub(crate) struct Readout {
    w: Matrix,
    q: Vec<f64>,
}

impl Readout {
    pub fn new(w: &Matrix) -> Self {
        Self { w: w.clone(), q: vec![0.0; w.cols()] }
    }

    #[inline]
    pub fn apply(&mut self, r: &[f64], out: &mut [f64]) {
        quadratic_readout_into(r, &mut self.q);
        for (d, o) in out.iter_mut().enumerate() {
            *o = crate::numerics::dot(self.w.row(d), &self.q);
        }
    }
}

/// CT vector field `γ(−r + tanh(a))` for a fixed input `u`.
#[inline]
fn ct_field(net: &Network, gamma: f64, r: &[f64], u: &[f64], act: &mut [f64], dr: &mut [f64]) {
    net.activation(r, u, act);
    for i in 0..r.len() {
        dr[i] = gamma * (act[i].tanh() - r[i]);
    }
}

#[inline]
fn li_update(net: &Network, alpha: f64, r: &mut [f64], u: &[f64], act: &mut [f64]) {
    net.activation(r, u, act);
    for i in 0..r.len() {
        r[i] = (1.0 - alpha) * r[i] + alpha * act[i].tanh();
    }
}

pub(crate) fn check_input(spec: &ReservoirSpec, net: &Network, input: &TimeSeries) -> Result<()> {
    if input.dims() != net.d {
        return Err(Error::Dimension(format!("input has {} dims, W_in expects {}", input.dims(), net.d)));
    }
    if (input.step() - spec.step).abs() > 1e-12 * spec.step.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "input step {} differs from reservoir step {}",
            input.step(),
            spec.step
        )));
    }
    let needed = spec.train_index() + 1;
    if input.len() < needed {
        return Err(Error::DataTooShort { needed, got: input.len() });
    }
    Ok(())
}

/// Drives the reservoir from `r = 0` over input samples `0..=last`, calling `visit(i, r[i])`
/// for every index. CT uses RK4 with the input held constant across each step.
pub(crate) fn drive(
    kind: ReservoirKind,
    spec: &ReservoirSpec,
    net: &Network,
    input: &TimeSeries,
    last: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    let n = net.n;
    let mut r = vec![0.0; n];
    let mut act = vec![0.0; n];
    visit(0, &r);
    match kind {
        ReservoirKind::Ct => {
            let mut rk = Rk4::new(n);
            let gamma = spec.timescale;
            for i in 0..last {
                let u = input.point(i);
                let mut field = |_t: f64, x: &[f64], dx: &mut [f64]| ct_field(net, gamma, x, u, &mut act, dx);
                rk.step(&mut field, i as f64 * spec.step, &mut r, spec.step);
                if r.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Divergence { step: i + 1 });
                }
                visit(i + 1, &r);
            }
        }
        ReservoirKind::Li => {
            for i in 0..last {
                li_update(net, spec.leak_rate, &mut r, input.point(i), &mut act);
                visit(i + 1, &r);
            }
        }
    }
    Ok(r)
}

/// Output of a listening pass.
#[derive(Debug, Clone)]
pub struct Listening {
    /// `r[i]` for `i = 0..=train_index`.
    pub trajectory: Vec<Vec<f64>>,
    /// 2N×L matrix of `q(r[i])` for `i ∈ [listen_index, train_index]`.
    pub features: Matrix,
    /// D×L matrix of the inputs `u[i]` over the same window.
    pub targets: Matrix,
    pub step: f64,
}

impl Listening {
    pub fn final_state(&self) -> ReservoirState {
        ReservoirState {
            values: self.trajectory.last().cloned().unwrap_or_default(),
            time: self.trajectory.len().saturating_sub(1) as f64 * self.step,
        }
    }
}

fn listen(kind: ReservoirKind, spec: &ReservoirSpec, m: &Matrix, w_in: &Matrix, input: &TimeSeries) -> Result<Listening> {
    spec.validate()?;
    let net = Network::new(m, w_in, spec.input_strength);
    check_input(spec, &net, input)?;
    let (start, end) = (spec.listen_index(), spec.train_index());
    let cols = end - start + 1;
    let mut trajectory = Vec::with_capacity(end + 1);
    let mut features = Matrix::zeros(2 * net.n, cols);
    let mut targets = Matrix::zeros(net.d, cols);
    drive(kind, spec, &net, input, end, |i, r| {
        trajectory.push(r.to_vec());
        if i >= start {
            let c = i - start;
            for (k, v) in r.iter().enumerate() {
                features[(k, c)] = *v;
                features[(net.n + k, c)] = v * v;
            }
            for (d, u) in input.point(i).iter().enumerate() {
                targets[(d, c)] = *u;
            }
        }
    })?;
    let mut out = Listening { trajectory, features, targets, step: spec.step };
    for s in out.trajectory.iter_mut().skip(1) {
        s.shrink_to_fit();
    }
    Ok(out)
}

/// Drives the CT reservoir from `r(0) = 0` (RK4, zero-order-hold input).
pub fn ct_listen(spec: &ReservoirSpec, m: &Matrix, w_in: &Matrix, input: &TimeSeries) -> Result<Listening> {
    listen(ReservoirKind::Ct, spec, m, w_in, input)
}

/// Iterates the LI reservoir from `r[0] = 0`.
pub fn li_listen(spec: &ReservoirSpec, m: &Matrix, w_in: &Matrix, input: &TimeSeries) -> Result<Listening> {
    listen(ReservoirKind::Li, spec, m, w_in, input)
}

/// Forward-Euler discretization of the CT listening equation (same sampling as `ct_listen`);
/// used to check the LI/CT correspondence.
pub fn ct_listen_euler(spec: &ReservoirSpec, m: &Matrix, w_in: &Matrix, input: &TimeSeries) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let net = Network::new(m, w_in, spec.input_strength);
    check_input(spec, &net, input)?;
    let n = net.n;
    let mut r = vec![0.0; n];
    let mut act = vec![0.0; n];
    let mut out = vec![r.clone()];
    // r + τγ(tanh(a) − r), grouped as the LI update so that α = γτ reproduces it bit for bit
    let h = spec.timescale * spec.step;
    for i in 0..spec.train_index() {
        li_update(&net, h, &mut r, input.point(i), &mut act);
        out.push(r.clone());
    }
    Ok(out)
}

/// Output of a closed-loop run.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub states: Vec<Vec<f64>>,
    /// `W_out q(r̂[n])` for `n = 0..=steps`.
    pub output: TimeSeries,
}

fn predict(model: &TrainedModel, kind: ReservoirKind, r0: &ReservoirState, steps: usize, keep_states: bool) -> Result<Prediction> {
    if model.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "model is {:?}, operation expects {:?}",
            model.kind, kind
        )));
    }
    let n = model.n_neurons();
    if r0.values.len() != n {
        return Err(Error::Dimension(format!("initial state has {} entries, model has {n}", r0.values.len())));
    }
    let spec = &model.spec;
    let net = Network::new(&model.adjacency, &model.input_matrix, spec.input_strength);
    let d = model.output_dims();
    let mut readout = Readout::new(&model.readout);
    let mut r = r0.values.clone();
    let mut act = vec![0.0; n];
    let mut u = vec![0.0; d];
    let mut outputs = Vec::with_capacity((steps + 1) * d);
    let mut states = Vec::new();
    readout.apply(&r, &mut u);
    outputs.extend_from_slice(&u);
    if keep_states {
        states.push(r.clone());
    }
    let mut rk = Rk4::new(n);
    for step in 0..steps {
        match kind {
            ReservoirKind::Ct => {
                let gamma = spec.timescale;
                let mut uu = vec![0.0; d];
                let mut field = |_t: f64, x: &[f64], dx: &mut [f64]| {
                    readout.apply(x, &mut uu);
                    ct_field(&net, gamma, x, &uu, &mut act, dx);
                };
                rk.step(&mut field, step as f64 * spec.step, &mut r, spec.step);
            }
            ReservoirKind::Li => {
                readout.apply(&r, &mut u);
                li_update(&net, spec.leak_rate, &mut r, &u, &mut act);
            }
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: step + 1 });
        }
        readout.apply(&r, &mut u);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: step + 1 });
        }
        outputs.extend_from_slice(&u);
        if keep_states {
            states.push(r.clone());
        }
    }
    Ok(Prediction { states, output: TimeSeries::from_raw(d, spec.step, outputs) })
}

/// Closed-loop CT integration from `r0` for `steps` RK4 steps.
pub fn ct_predict(model: &TrainedModel, r0: &ReservoirState, steps: usize) -> Result<Prediction> {
    predict(model, ReservoirKind::Ct, r0, steps, true)
}

/// Closed-loop LI iteration from `r0` for `steps` steps.
pub fn li_predict(model: &TrainedModel, r0: &ReservoirState, steps: usize) -> Result<Prediction> {
    predict(model, ReservoirKind::Li, r0, steps, true)
}

/// Closed-loop run of either kind without retaining the reservoir states.
pub fn predict_output(model: &TrainedModel, r0: &ReservoirState, steps: usize) -> Result<TimeSeries> {
    Ok(predict(model, model.kind, r0, steps, false)?.output)
}

/// Pieces shared by the CT and LI Jacobians: `s = 1 − tanh²(a)` and `B = W_out D_q(r)` (D×N).
pub(crate) fn jacobian_parts(model: &TrainedModel, net: &Network, r: &[f64]) -> (Vec<f64>, Matrix) {
    let n = net.n;
    let d = model.output_dims();
    let mut readout = Readout::new(&model.readout);
    let mut u = vec![0.0; d];
    readout.apply(r, &mut u);
    let mut act = vec![0.0; n];
    net.activation(r, &u, &mut act);
    let s: Vec<f64> = act.iter().map(|a| 1.0 - a.tanh().powi(2)).collect();
    let b = Matrix::from_fn(d, n, |k, j| model.readout[(k, j)] + 2.0 * r[j] * model.readout[(k, n + j)]);
    (s, b)
}

/// `M + σ W_in B` as a dense matrix, scaled row-wise by `s`.
fn coupled_matrix(model: &TrainedModel, s: &[f64], b: &Matrix) -> Matrix {
    let n = model.n_neurons();
    let d = model.output_dims();
    let sigma = model.spec.input_strength;
    let mut j = model.adjacency.clone();
    for i in 0..n {
        let row = j.row_mut(i);
        for k in 0..d {
            let w = model.input_matrix[(i, k)];
            if w != 0.0 {
                for (c, v) in row.iter_mut().enumerate() {
                    *v += sigma * w * b[(k, c)];
                }
            }
        }
        for v in row.iter_mut() {
            *v *= s[i];
        }
    }
    j
}

/// Jacobian of the closed-loop CT vector field at `r`:
/// `γ[−I + diag(1 − tanh²(a)) (M + σ W_in W_out D_q(r))]`, `a = M r + σ W_in W_out q(r)`.
pub fn ct_jacobian(model: &TrainedModel, r: &ReservoirState) -> Result<Matrix> {
    if model.kind != ReservoirKind::Ct {
        return Err(Error::InvalidParameter("ct_jacobian needs a CT model".into()));
    }
    let net = Network::new(&model.adjacency, &model.input_matrix, model.spec.input_strength);
    if r.values.len() != net.n {
        return Err(Error::Dimension("state length differs from N".into()));
    }
    let (s, b) = jacobian_parts(model, &net, &r.values);
    let mut j = coupled_matrix(model, &s, &b);
    let gamma = model.spec.timescale;
    for i in 0..net.n {
        for v in j.row_mut(i) {
            *v *= gamma;
        }
        j[(i, i)] -= gamma;
    }
    Ok(j)
}

/// Jacobian of the closed-loop LI map at `r`: `(1 − α) I + α diag(1 − tanh²(a)) (M + σ W_in B)`.
pub fn li_jacobian(model: &TrainedModel, r: &ReservoirState) -> Result<Matrix> {
    if model.kind != ReservoirKind::Li {
        return Err(Error::InvalidParameter("li_jacobian needs an LI model".into()));
    }
    let net = Network::new(&model.adjacency, &model.input_matrix, model.spec.input_strength);
    if r.values.len() != net.n {
        return Err(Error::Dimension("state length differs from N".into()));
    }
    let (s, b) = jacobian_parts(model, &net, &r.values);
    let mut j = coupled_matrix(model, &s, &b);
    let alpha = model.spec.leak_rate;
    for i in 0..net.n {
        for v in j.row_mut(i) {
            *v *= alpha;
        }
        j[(i, i)] += 1.0 - alpha;
    }
    Ok(j)
}

/// Closed-loop CT vector field, exposed for finite-difference checks.
pub fn ct_closed_loop_field(model: &TrainedModel, r: &[f64]) -> Vec<f64> {
    let net = Network::new(&model.adjacency, &model.input_matrix, model.spec.input_strength);
    let mut readout = Readout::new(&model.readout);
    let mut u = vec![0.0; model.output_dims()];
    readout.apply(r, &mut u);
    let mut act = vec![0.0; net.n];
    let mut dr = vec![0.0; net.n];
    ct_field(&net, model.spec.timescale, r, &u, &mut act, &mut dr);
    dr
}
