//! Next-generation reservoir computer: polynomial features of time-shifted inputs, trained to
//! predict one-step increments.
//!
//! Monomials of each order are listed squares-first: by number of distinct variables, then
//! lexicographically by variable index. For two variables and orders 1, 2 this gives
//! `(u1, u2, u1², u2², u1·u2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RidgeSums};
use crate::series::TimeSeries;

/// Prediction aborts once a point leaves this ball.
pub const DIVERGENCE_NORM: f64 = 1e6;
const CHUNK_ROWS: usize = 256;
/// Feature counts up to this are fitted through a QR factor rather than the Gram matrix.
pub const QR_FEATURE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgrcSpec {
    pub orders: Vec<usize>,
    /// k
    pub shifts: usize,
    /// s
    pub stride: usize,
    pub regularization: f64,
    pub use_quadratic_readout: bool,
}

impl NgrcSpec {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.orders[0] == 0 || self.orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "orders must be nonempty, positive and strictly increasing, got {:?}",
                self.orders
            )));
        }
        if self.shifts == 0 || self.stride == 0 {
            return Err(Error::InvalidParameter("shifts and stride must be >= 1".into()));
        }
        if !(self.regularization >= 0.0) {
            return Err(Error::InvalidParameter(format!("regularization must be >= 0, got {}", self.regularization)));
        }
        Ok(())
    }

    /// `i_warm = k·s`
    pub fn warmup(&self) -> usize {
        self.shifts * self.stride
    }

    /// Oldest sample a feature vector at index `i` reaches back to is `i − (k−1)s`.
    pub fn span(&self) -> usize {
        (self.shifts - 1) * self.stride
    }

    /// Regression features per sample for `d`-dimensional input (doubled by the quadratic
    /// readout wrapper).
    pub fn feature_count(&self, d: usize) -> usize {
        let f = ngrc_feature_count(d, self.shifts, &self.orders);
        if self.use_quadratic_readout {
            2 * f
        } else {
            f
        }
    }
}

/// `(u[i], u[i−s], …, u[i−(k−1)s])`
pub fn time_shift_embed(series: &TimeSeries, i: usize, k: usize, s: usize) -> Result<Vec<f64>> {
    let span = k.saturating_sub(1) * s;
    if k == 0 || s == 0 {
        return Err(Error::InvalidParameter("k and s must be >= 1".into()));
    }
    if i < span || i >= series.len() {
        return Err(Error::WarmupViolation { index: i, warmup: span });
    }
    let mut out = Vec::with_capacity(k * series.dims());
    for j in 0..k {
        out.extend_from_slice(series.point(i - j * s));
    }
    Ok(out)
}

/// Exponent patterns of the dictionary as sorted variable-index lists.
pub fn monomials(d: usize, orders: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for &o in orders {
        let mut level = Vec::new();
        let mut current = Vec::with_capacity(o);
        multisets(d, o, 0, &mut current, &mut level);
        level.sort_by(|a: &Vec<usize>, b: &Vec<usize>| support(a).cmp(&support(b)).then_with(|| a.cmp(b)));
        out.extend(level);
    }
    out
}

fn multisets(d: usize, remaining: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for v in start..d {
        current.push(v);
        multisets(d, remaining - 1, v, current, out);
        current.pop();
    }
}

fn support(m: &[usize]) -> usize {
    1 + m.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Every unique monomial of each order over the entries of `v`.
pub fn poly_dictionary(v: &[f64], orders: &[usize]) -> Vec<f64> {
    Dictionary::new(v.len(), orders).evaluate(v)
}

/// `Σ_{o∈orders} C(kd + o − 1, o)`
pub fn ngrc_feature_count(d: usize, k: usize, orders: &[usize]) -> usize {
    let n = k * d;
    orders.iter().map(|&o| binomial(n + o - 1, o)).sum()
}

fn binomial(n: usize, r: usize) -> usize {
    let r = r.min(n.saturating_sub(r));
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as usize
}

/// Column labels for `W_out`, e.g. `u1[t]`, `u1[t]*u2[t-1]`, `u1[t-2]^2`; with the quadratic
/// wrapper the squared copies are suffixed `^2` as a whole (`(u1[t]*u2[t])^2`).
pub fn feature_names(d: usize, spec: &NgrcSpec) -> Vec<String> {
    let var = |v: usize| {
        let (lag, dim) = (v / d, v % d);
        let shift = lag * spec.stride;
        if shift == 0 {
            format!("u{}[t]", dim + 1)
        } else {
            format!("u{}[t-{shift}]", dim + 1)
        }
    };
    let mut names: Vec<String> = monomials(d * spec.shifts, &spec.orders)
        .iter()
        .map(|m| {
            let mut parts = Vec::new();
            let mut i = 0;
            while i < m.len() {
                let run = m[i..].iter().take_while(|&&x| x == m[i]).count();
                parts.push(if run == 1 { var(m[i]) } else { format!("{}^{run}", var(m[i])) });
                i += run;
            }
            parts.join("*")
        })
        .collect();
    if spec.use_quadratic_readout {
        let squares: Vec<String> = names.iter().map(|n| format!("({n})^2")).collect();
        names.extend(squares);
    }
    names
}

/// Precomputed monomial evaluation plan.
#[derive(Debug, Clone)]
pub(crate) struct Dictionary {
    terms: Vec<Vec<usize>>,
}

impl Dictionary {
    pub fn new(vars: usize, orders: &[usize]) -> Self {
        Self { terms: monomials(vars, orders) }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn evaluate_into(&self, v: &[f64], out: &mut [f64]) {
        for (o, t) in out.iter_mut().zip(&self.terms) {
            *o = t.iter().map(|&i| v[i]).product();
        }
    }

    pub fn evaluate(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.evaluate_into(v, &mut out);
        out
    }
}

/// Sliding feature builder shared by training and prediction.
struct Featurizer<'a> {
    spec: &'a NgrcSpec,
    dict: Dictionary,
    d: usize,
    lagged: Vec<f64>,
    poly: Vec<f64>,
}

impl<'a> Featurizer<'a> {
    fn new(spec: &'a NgrcSpec, d: usize) -> Self {
        let dict = Dictionary::new(d * spec.shifts, &spec.orders);
        let poly = vec![0.0; dict.len()];
        Self { spec, dict, d, lagged: vec![0.0; d * spec.shifts], poly }
    }

    fn width(&self) -> usize {
        self.spec.feature_count(self.d)
    }

    /// Features at the newest point of `window`, where `point(j)` returns the sample `j` steps
    /// back.
    fn features<'p>(&mut self, point: impl Fn(usize) -> &'p [f64], out: &mut Vec<f64>) {
        for j in 0..self.spec.shifts {
            self.lagged[j * self.d..(j + 1) * self.d].copy_from_slice(point(j * self.spec.stride));
        }
        self.dict.evaluate_into(&self.lagged, &mut self.poly);
        out.extend_from_slice(&self.poly);
        if self.spec.use_quadratic_readout {
            out.extend(self.poly.iter().map(|v| v * v));
        }
    }
}

/// Trains on a single series; see [`ngrc_train_multi`].
pub fn ngrc_train(spec: &NgrcSpec, input: &TimeSeries, i_train: usize) -> Result<Matrix> {
    ngrc_train_multi(spec, &[input], i_train)
}

/// Ridge fit of `u[i] − u[i−1]` on the features at `i − 1`, for `i ∈ [k·s, i_train]` of every
/// input; the columns of all inputs are concatenated.
pub fn ngrc_train_multi(spec: &NgrcSpec, inputs: &[&TimeSeries], i_train: usize) -> Result<Matrix> {
    ngrc_accumulate(spec, inputs, i_train)?.solve(spec.regularization)
}

/// Ridge sums of [`ngrc_train_multi`], reusable across regularization values.
pub fn ngrc_accumulate(spec: &NgrcSpec, inputs: &[&TimeSeries], i_train: usize) -> Result<RidgeSums> {
    ngrc_accumulate_with(spec, inputs, i_train, QR_FEATURE_LIMIT)
}

/// As [`ngrc_accumulate`], with the triangular path used only up to `qr_limit` features
/// (`0` forces the Gram matrix).
pub fn ngrc_accumulate_with(
    spec: &NgrcSpec,
    inputs: &[&TimeSeries],
    i_train: usize,
    qr_limit: usize,
) -> Result<RidgeSums> {
    spec.validate()?;
    let first = inputs.first().ok_or_else(|| Error::InvalidParameter("no training input".into()))?;
    let d = first.dims();
    if inputs.iter().any(|s| s.dims() != d) {
        return Err(Error::Dimension("training inputs differ in dimension".into()));
    }
    let warm = spec.warmup();
    for s in inputs {
        if s.len() <= i_train || i_train < warm {
            return Err(Error::DataTooShort { needed: (i_train + 1).max(warm + 1), got: s.len() });
        }
    }
    let mut feat = Featurizer::new(spec, d);
    let width = feat.width();
    let mut acc = RidgeSums::new(width, d, qr_limit);
    let mut rows = Vec::with_capacity(CHUNK_ROWS * width);
    let mut targets = Vec::with_capacity(CHUNK_ROWS * d);
    for s in inputs {
        for i in warm..=i_train {
            feat.features(|j| s.point(i - 1 - j), &mut rows);
            let (now, prev) = (s.point(i), s.point(i - 1));
            targets.extend(now.iter().zip(prev).map(|(a, b)| a - b));
            if targets.len() == CHUNK_ROWS * d {
                acc.add_rows(&rows, &targets, CHUNK_ROWS)?;
                rows.clear();
                targets.clear();
            }
        }
    }
    if !targets.is_empty() {
        acc.add_rows(&rows, &targets, targets.len() / d)?;
    }
    Ok(acc)
}

/// Closed-loop run: `u[n+1] = u[n] + W_out·features(u[n], u[n−s], …)`. `history` must hold at
/// least `(k−1)s + 1` samples; its last sample is the first output point, followed by `steps`
/// predicted points.
pub fn ngrc_predict(spec: &NgrcSpec, w_out: &Matrix, history: &TimeSeries, steps: usize) -> Result<TimeSeries> {
    spec.validate()?;
    let d = history.dims();
    let needed = spec.span() + 1;
    if history.len() < needed {
        return Err(Error::DataTooShort { needed, got: history.len() });
    }
    let mut feat = Featurizer::new(spec, d);
    if w_out.rows() != d || w_out.cols() != feat.width() {
        return Err(Error::Dimension(format!(
            "W_out must be {d}x{}, got {}x{}",
            feat.width(),
            w_out.rows(),
            w_out.cols()
        )));
    }
    let span = spec.span();
    let mut buf: Vec<f64> = history.tail(span + 1).values().to_vec();
    buf.reserve(steps * d);
    let mut f = Vec::with_capacity(feat.width());
    for n in 0..steps {
        let newest = span + n;
        f.clear();
        feat.features(|j| &buf[(newest - j) * d..(newest - j + 1) * d], &mut f);
        for k in 0..d {
            let next = buf[newest * d + k] + crate::numerics::dot(w_out.row(k), &f);
            buf.push(next);
        }
        let p = &buf[(newest + 1) * d..];
        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= DIVERGENCE_NORM) {
            return Err(Error::Divergence { step: n + 1 });
        }
    }
    TimeSeries::new(d, history.step(), buf.split_off(span * d))
}

/// `W_out` as CSV with one named column per feature.
pub fn readout_to_csv(spec: &NgrcSpec, w_out: &Matrix) -> String {
    let names = feature_names(w_out.rows(), spec);
    w_out.to_csv(Some(&names))
}
