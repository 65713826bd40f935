use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled D-dimensional real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    dims: usize,
    step: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    /// `values` holds the samples back to back, `dims` reals per sample.
    pub fn new(dims: usize, step: f64, values: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::Dimension("time series needs at least one dimension".into()));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!("step must be > 0, got {step}")));
        }
        if values.len() % dims != 0 {
            return Err(Error::Dimension(format!(
                "{} values is not a multiple of {dims} dimensions",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: i / dims });
        }
        Ok(Self { dims, step, values })
    }

    pub fn from_points(step: f64, points: &[Vec<f64>]) -> Result<Self> {
        let dims = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dims) {
            return Err(Error::Dimension("points have differing dimensions".into()));
        }
        Self::new(dims, step, points.concat())
    }

    pub(crate) fn from_raw(dims: usize, step: f64, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len() % dims, 0);
        Self { dims, step, values }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn last_point(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dims)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coordinate(&self, d: usize) -> Vec<f64> {
        self.points().map(|p| p[d]).collect()
    }

    /// Samples `start..end` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> TimeSeries {
        let end = end.min(self.len());
        let start = start.min(end);
        Self::from_raw(self.dims, self.step, self.values[start * self.dims..end * self.dims].to_vec())
    }

    /// The trailing `n` samples.
    pub fn tail(&self, n: usize) -> TimeSeries {
        let len = self.len();
        self.slice(len.saturating_sub(n), len)
    }

    pub fn map_points(&self, mut f: impl FnMut(&mut [f64])) -> TimeSeries {
        let mut values = self.values.clone();
        for p in values.chunks_exact_mut(self.dims) {
            f(p);
        }
        Self::from_raw(self.dims, self.step, values)
    }

    /// Concatenates two series with matching dims and step.
    pub fn concat(&self, other: &TimeSeries) -> Result<TimeSeries> {
        if self.dims != other.dims || (self.step - other.step).abs() > 1e-15 {
            return Err(Error::Dimension("series differ in dims or step".into()));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self::from_raw(self.dims, self.step, values))
    }

    pub fn max_norm(&self) -> f64 {
        self.points()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dims];
        for p in self.points() {
            for (a, v) in m.iter_mut().zip(p) {
                *a += v;
            }
        }
        let n = self.len().max(1) as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Per-coordinate (min, max).
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dims];
        for p in self.points() {
            for (bb, v) in b.iter_mut().zip(p) {
                bb.0 = bb.0.min(*v);
                bb.1 = bb.1.max(*v);
            }
        }
        b
    }

    /// CSV with header `t,x1,…,xD`, one row per sample, round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for d in 1..=self.dims {
            let _ = write!(out, ",x{d}");
        }
        out.push('\n');
        for (i, p) in self.points().enumerate() {
            let _ = write!(out, "{:?}", i as f64 * self.step);
            for v in p {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`TimeSeries::to_csv`]; the step is taken from the
    /// first two time stamps.
    pub fn from_csv(text: &str) -> Result<TimeSeries> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Io("empty csv".into()))?;
        let dims = header.split(',').count().saturating_sub(1);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let fields = fields.map_err(|e| Error::Io(format!("row {}: {e}", n + 1)))?;
            if fields.len() != dims + 1 {
                return Err(Error::Io(format!("row {} has {} fields, expected {}", n + 1, fields.len(), dims + 1)));
            }
            times.push(fields[0]);
            values.extend_from_slice(&fields[1..]);
        }
        if times.len() < 2 {
            return Err(Error::DataTooShort { needed: 2, got: times.len() });
        }
        Self::new(dims, times[1] - times[0], values)
    }
}
