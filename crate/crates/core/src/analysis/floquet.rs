//! Floquet multipliers of periodic orbits via the variational equation `Q̇ = J(t) Q`, `Q(0) = I`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, split_horizon, Complex, ComplexSpectrum, Matrix, Rk4};
use crate::reservoir::{Network, ReservoirKind, TrainedModel};
use crate::series::TimeSeries;
use crate::tasks::CIRCLE_PERIOD;

/// Periods of driven response discarded before the reference period.
pub const TRANSIENT_PERIODS: f64 = 6.0;
/// `‖Q‖_max` beyond which the integration stops and the spectrum is flagged.
pub const OVERFLOW_NORM: f64 = 1e12;
/// Slack on `|λ| < 1` when judging stability.
pub const STABILITY_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitLabel {
    #[serde(rename = "C_A")]
    CA,
    #[serde(rename = "C_B")]
    CB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSpectrum {
    pub multipliers: ComplexSpectrum,
    pub orbit_label: OrbitLabel,
    pub period: f64,
    /// Set when `Q` grew past [`OVERFLOW_NORM`]; the multipliers are then those of the partial
    /// monodromy matrix at the point of overflow.
    pub overflow: bool,
    /// `‖r(T) − r(0)‖∞` of the driven reference orbit.
    pub orbit_drift: f64,
    /// Discrete-time (LI) product of Jacobians rather than the CT variational equation.
    pub extension: bool,
}

impl FloquetSpectrum {
    /// Index of the multiplier closest to `1 + 0i`, which belongs to the flow direction.
    pub fn trivial_index(&self) -> Option<usize> {
        let one = Complex::new(1.0, 0.0);
        self.multipliers
            .values()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance(&one).total_cmp(&b.1.distance(&one)))
            .map(|(i, _)| i)
    }

    /// Largest magnitude among the non-trivial multipliers.
    pub fn max_nontrivial(&self) -> f64 {
        let skip = self.trivial_index();
        self.multipliers
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// All non-trivial multipliers lie inside the unit circle up to `tol`.
    pub fn is_stable(&self, tol: f64) -> bool {
        !self.overflow && self.max_nontrivial() < 1.0 + tol
    }

    /// The two largest multiplier magnitudes.
    pub fn leading(&self) -> (f64, f64) {
        let m = self.multipliers.magnitudes();
        (m.first().copied().unwrap_or(0.0), m.get(1).copied().unwrap_or(0.0))
    }
}

/// Joint RK4 integration of `ẋ = f(t, x)` and `Q̇ = J(t, x) Q` over `[t0, t0 + period]`, with a
/// fractional final step. Returns `x(t0 + period)` and `Q(t0 + period)`.
pub fn variational_monodromy<F, J>(
    mut field: F,
    mut jacobian: J,
    x0: &[f64],
    t0: f64,
    period: f64,
    tau: f64,
) -> Result<(Vec<f64>, Matrix)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    J: FnMut(f64, &[f64]) -> Matrix,
{
    if !(tau > 0.0) || !(period > 0.0) {
        return Err(Error::InvalidParameter("period and step must be > 0".into()));
    }
    let n = x0.len();
    let mut state = x0.to_vec();
    state.extend_from_slice(Matrix::identity(n).as_slice());
    let mut combined = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (x, q) = y.split_at(n);
        let (dx, dq) = dy.split_at_mut(n);
        field(t, x, dx);
        let j = jacobian(t, x);
        for i in 0..n {
            let out = &mut dq[i * n..(i + 1) * n];
            out.fill(0.0);
            for (k, jik) in j.row(i).iter().enumerate() {
                for (o, v) in out.iter_mut().zip(&q[k * n..(k + 1) * n]) {
                    *o += jik * v;
                }
            }
        }
    };
    let (whole, rem) = split_horizon(period, tau);
    let mut rk = Rk4::new(n + n * n);
    for s in 0..whole {
        rk.step(&mut combined, t0 + s as f64 * tau, &mut state, tau);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: s + 1 });
        }
    }
    if rem > 0.0 {
        rk.step(&mut combined, t0 + whole as f64 * tau, &mut state, rem);
    }
    let q = Matrix::new(n, n, state.split_off(n))?;
    Ok((state, q))
}

/// Closed-loop Jacobian pieces at `r`: `s = 1 − tanh²(a)` with `a = M r + σ W_in W_out q(r)`,
/// and `B = W_out D_q(r)` (row-major D×N).
struct JacobianWork {
    mr: Vec<f64>,
    u: Vec<f64>,
    s: Vec<f64>,
    b: Vec<f64>,
    bq: Vec<f64>,
    mq: Vec<f64>,
}

impl JacobianWork {
    fn new(n: usize, d: usize) -> Self {
        Self {
            mr: vec![0.0; n],
            u: vec![0.0; d],
            s: vec![0.0; n],
            b: vec![0.0; d * n],
            bq: vec![0.0; d * n],
            mq: vec![0.0; n * n],
        }
    }

    /// Fills `mr`, `s` and `b` for state `r`.
    fn linearize(&mut self, model: &TrainedModel, net: &Network, r: &[f64]) {
        let n = net.n;
        let d = net.d;
        net.adjacency.matvec_into(r, &mut self.mr);
        let w = &model.readout;
        for k in 0..d {
            let row = w.row(k);
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * r[j] + row[n + j] * r[j] * r[j];
                self.b[k * n + j] = row[j] + 2.0 * r[j] * row[n + j];
            }
            self.u[k] = acc;
        }
        let sigma = net.input_strength;
        for i in 0..n {
            let mut a = self.mr[i];
            for k in 0..d {
                a += sigma * net.input[i * d + k] * self.u[k];
            }
            let t = a.tanh();
            self.s[i] = 1.0 - t * t;
        }
    }

    /// `out = diag(s) (M P + σ W_in (B P))`, all N×N row-major.
    fn coupled_product(&mut self, net: &Network, p: &[f64], out: &mut [f64]) {
        let n = net.n;
        let d = net.d;
        net.adjacency.matmul_dense_into(p, n, &mut self.mq);
        for k in 0..d {
            let dst = &mut self.bq[k * n..(k + 1) * n];
            dst.fill(0.0);
            for j in 0..n {
                let bkj = self.b[k * n + j];
                if bkj != 0.0 {
                    for (o, v) in dst.iter_mut().zip(&p[j * n..(j + 1) * n]) {
                        *o += bkj * v;
                    }
                }
            }
        }
        let sigma = net.input_strength;
        for i in 0..n {
            let si = self.s[i];
            let row = &mut out[i * n..(i + 1) * n];
            row.copy_from_slice(&self.mq[i * n..(i + 1) * n]);
            for k in 0..d {
                let w = sigma * net.input[i * d + k];
                if w != 0.0 {
                    for (o, v) in row.iter_mut().zip(&self.bq[k * n..(k + 1) * n]) {
                        *o += w * v;
                    }
                }
            }
            row.iter_mut().for_each(|v| *v *= si);
        }
    }
}

fn check_driving(model: &TrainedModel, driving: &TimeSeries, needed: usize) -> Result<()> {
    if driving.dims() != model.input_matrix.cols() {
        return Err(Error::Dimension(format!(
            "driving signal has {} dims, model expects {}",
            driving.dims(),
            model.input_matrix.cols()
        )));
    }
    if (driving.step() - model.spec.step).abs() > 1e-12 {
        return Err(Error::InvalidParameter("driving step differs from model step".into()));
    }
    if driving.len() < needed {
        return Err(Error::DataTooShort { needed, got: driving.len() });
    }
    Ok(())
}

/// Floquet multipliers of the closed-loop CT reservoir linearized along its periodic response
/// to `driving` (one circle period, after [`TRANSIENT_PERIODS`] of transient).
pub fn floquet_multipliers(model: &TrainedModel, driving: &TimeSeries, label: OrbitLabel) -> Result<FloquetSpectrum> {
    if model.kind != ReservoirKind::Ct {
        return Err(Error::InvalidParameter("variational Floquet analysis needs a CT model".into()));
    }
    let spec = &model.spec;
    let tau = spec.step;
    let period = CIRCLE_PERIOD;
    let transient = (TRANSIENT_PERIODS * period / tau).round() as usize;
    let (whole, rem) = split_horizon(period, tau);
    check_driving(model, driving, transient + whole + 1)?;

    let net = Network::new(&model.adjacency, &model.input_matrix, spec.input_strength);
    let n = net.n;
    let gamma = spec.timescale;
    let mut act = vec![0.0; n];

    let mut r = vec![0.0; n];
    let mut rk = Rk4::new(n);
    for i in 0..transient {
        let u = driving.point(i);
        let mut f = |_t: f64, x: &[f64], dx: &mut [f64]| driven_field(&net, gamma, x, u, &mut act, dx);
        rk.step(&mut f, i as f64 * tau, &mut r, tau);
    }
    let r_start = r.clone();

    let mut state = r;
    state.extend_from_slice(Matrix::identity(n).as_slice());
    let mut rk = Rk4::new(n + n * n);
    let mut work = JacobianWork::new(n, net.d);
    let mut overflow = false;
    let mut steps = Vec::with_capacity(whole + 1);
    steps.extend((0..whole).map(|s| (transient + s, tau)));
    if rem > 0.0 {
        steps.push((transient + whole, rem));
    }
    for (idx, h) in steps {
        let u = driving.point(idx);
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            let (x, q) = y.split_at(n);
            let (dx, dq) = dy.split_at_mut(n);
            driven_field(&net, gamma, x, u, &mut act, dx);
            work.linearize(model, &net, x);
            work.coupled_product(&net, q, dq);
            for (o, v) in dq.iter_mut().zip(q) {
                *o = gamma * (*o - v);
            }
        };
        rk.step(&mut f, idx as f64 * tau, &mut state, h);
        let qmax = state[n..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !qmax.is_finite() {
            return Err(Error::Divergence { step: idx });
        }
        if qmax > OVERFLOW_NORM {
            overflow = true;
            break;
        }
    }
    let orbit_drift = state[..n].iter().zip(&r_start).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let q = Matrix::new(n, n, state.split_off(n))?;
    Ok(FloquetSpectrum {
        multipliers: eigenvalues(&q)?,
        orbit_label: label,
        period,
        overflow,
        orbit_drift,
        extension: false,
    })
}

/// Discrete analogue for LI models: eigenvalues of the product of closed-loop Jacobians along
/// `round(T/τ)` steps of the driven response.
pub fn li_floquet_multipliers(model: &TrainedModel, driving: &TimeSeries, label: OrbitLabel) -> Result<FloquetSpectrum> {
    if model.kind != ReservoirKind::Li {
        return Err(Error::InvalidParameter("discrete Floquet analysis needs an LI model".into()));
    }
    let spec = &model.spec;
    let tau = spec.step;
    let transient = (TRANSIENT_PERIODS * CIRCLE_PERIOD / tau).round() as usize;
    let steps = (CIRCLE_PERIOD / tau).round() as usize;
    check_driving(model, driving, transient + steps + 1)?;

    let net = Network::new(&model.adjacency, &model.input_matrix, spec.input_strength);
    let n = net.n;
    let alpha = spec.leak_rate;
    let mut act = vec![0.0; n];
    let mut r = vec![0.0; n];
    let advance = |r: &mut [f64], u: &[f64], act: &mut [f64]| {
        net.activation(r, u, act);
        for (x, a) in r.iter_mut().zip(act.iter()) {
            *x = (1.0 - alpha) * *x + alpha * a.tanh();
        }
    };
    for i in 0..transient {
        advance(&mut r, driving.point(i), &mut act);
    }
    let r_start = r.clone();
    let mut p = Matrix::identity(n).into_vec();
    let mut next = vec![0.0; n * n];
    let mut work = JacobianWork::new(n, net.d);
    let mut overflow = false;
    for i in transient..transient + steps {
        work.linearize(model, &net, &r);
        work.coupled_product(&net, &p, &mut next);
        for (o, v) in next.iter_mut().zip(&p) {
            *o = alpha * *o + (1.0 - alpha) * v;
        }
        std::mem::swap(&mut p, &mut next);
        advance(&mut r, driving.point(i), &mut act);
        let pmax = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !pmax.is_finite() {
            return Err(Error::Divergence { step: i });
        }
        if pmax > OVERFLOW_NORM {
            overflow = true;
            break;
        }
    }
    let orbit_drift = r.iter().zip(&r_start).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(FloquetSpectrum {
        multipliers: eigenvalues(&Matrix::new(n, n, p)?)?,
        orbit_label: label,
        period: steps as f64 * tau,
        overflow,
        orbit_drift,
        extension: true,
    })
}

#[inline]
fn driven_field(net: &Network, gamma: f64, r: &[f64], u: &[f64], act: &mut [f64], dr: &mut [f64]) {
    net.activation(r, u, act);
    for i in 0..r.len() {
        dr[i] = gamma * (act[i].tanh() - r[i]);
    }
}
