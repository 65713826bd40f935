use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RidgeAccumulator, StreamRng, StreamRole};
use crate::reservoir::{generate_input_matrix_with, Network, ReservoirSpec};

/// Settings of the short-term memory measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StmConfig {
    /// J_max
    pub max_shift: usize,
    pub signal_length: usize,
    pub washout: usize,
    pub regularization: f64,
    /// Seeds both the fresh input weights and the drive signal.
    pub seed: u64,
}

impl Default for StmConfig {
    fn default() -> Self {
        Self { max_shift: 100, signal_length: 5000, washout: 500, regularization: 1e-6, seed: 0 }
    }
}

impl StmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_shift < 1 {
            return Err(Error::InvalidParameter("max_shift must be >= 1".into()));
        }
        if self.signal_length <= self.washout + self.max_shift {
            return Err(Error::InvalidParameter(format!(
                "signal_length {} must exceed washout {} + max_shift {}",
                self.signal_length, self.washout, self.max_shift
            )));
        }
        if !(self.regularization >= 0.0) {
            return Err(Error::InvalidParameter("regularization must be >= 0".into()));
        }
        Ok(())
    }

    /// First state index used for fitting: after the washout and late enough for every delay.
    fn first(&self) -> usize {
        self.washout.max(self.max_shift)
    }
}

/// Short-term memory capacity `Σ_j cor²(μ[n−j], W_j r[n])` of the leaky-integrator reservoir
/// with adjacency `m`, driven open-loop by i.i.d. uniform noise on [−1, 1].
pub fn stm(m: &Matrix, spec: &ReservoirSpec, cfg: &StmConfig) -> Result<f64> {
    Ok(stm_terms(m, spec, cfg, &(1..=cfg.max_shift).collect::<Vec<_>>())?.iter().sum())
}

/// Per-delay squared correlations for the delays in `shifts` (each in `1..=max_shift`), in
/// the same order.
///
/// Readouts are fitted on the first two thirds of the post-washout states and scored on the
/// rest. Every delay gets its own readout row; they share one factorization of the Gram
/// matrix but are otherwise independent.
pub fn stm_terms(m: &Matrix, spec: &ReservoirSpec, cfg: &StmConfig, shifts: &[usize]) -> Result<Vec<f64>> {
    cfg.validate()?;
    if let Some(j) = shifts.iter().find(|&&j| j == 0 || j > cfg.max_shift) {
        return Err(Error::InvalidParameter(format!("delay {j} outside 1..={}", cfg.max_shift)));
    }
    if !m.is_square() {
        return Err(Error::Dimension("adjacency must be square".into()));
    }
    let n = m.rows();
    let alpha = spec.leak_rate;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("leak rate must lie in (0, 1], got {alpha}")));
    }
    let w_in = generate_input_matrix_with(n, 1, &mut StreamRng::new(cfg.seed, StreamRole::StmInput));
    let mut signal_rng = StreamRng::new(cfg.seed, StreamRole::StmSignal);
    let mu: Vec<f64> = (0..cfg.signal_length).map(|_| signal_rng.uniform(-1.0, 1.0)).collect();

    let net = Network::new(m, &w_in, spec.input_strength);
    let first = cfg.first();
    let used = cfg.signal_length - first;
    let train = used * 2 / 3;
    let mut states = Vec::with_capacity(used * n);
    let mut r = vec![0.0; n];
    let mut act = vec![0.0; n];
    // r[i + 1] has seen μ[0..=i]
    for i in 0..cfg.signal_length - 1 {
        net.activation(&r, &mu[i..i + 1], &mut act);
        for (rv, a) in r.iter_mut().zip(&act) {
            *rv = (1.0 - alpha) * *rv + alpha * a.tanh();
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: i + 1 });
        }
        if i + 1 >= first {
            states.extend_from_slice(&r);
        }
    }
    let mu = &mu;
    let mut acc = RidgeAccumulator::new(n, shifts.len());
    let target_rows: Vec<f64> = (0..train).flat_map(|k| shifts.iter().map(move |&j| mu[first + k - j])).collect();
    acc.add_rows(&states[..train * n], &target_rows, train)?;
    let w = acc.solve(cfg.regularization)?;

    let test = used - train;
    let mut outputs = vec![vec![0.0; test]; shifts.len()];
    for k in 0..test {
        let row = &states[(train + k) * n..(train + k + 1) * n];
        for (c, out) in outputs.iter_mut().enumerate() {
            out[k] = crate::numerics::dot(w.row(c), row);
        }
    }
    Ok(shifts
        .iter()
        .zip(&outputs)
        .map(|(&j, out)| {
            let delayed: Vec<f64> = (0..test).map(|k| mu[first + train + k - j]).collect();
            let c = pearson(&delayed, out);
            c * c
        })
        .collect())
}

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let (ma, mb) = (a[..n].iter().sum::<f64>() / n as f64, b[..n].iter().sum::<f64>() / n as f64);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a[..n].iter().zip(&b[..n]) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Point-biserial correlation between `values` and a binary outcome (Pearson against 0/1).
/// Returns 0 when every flag is the same.
pub fn point_biserial(values: &[f64], flags: &[bool]) -> f64 {
    let coded: Vec<f64> = flags.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    pearson(values, &coded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-12);
        assert!((pearson(&a, &[-1.0, -2.0, -3.0, -4.0]) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&a, &[1.0; 4]), 0.0);
        assert_eq!(point_biserial(&a, &[true; 4]), 0.0);
    }

    #[test]
    fn config_invariants() {
        let cfg = StmConfig { signal_length: 600, ..StmConfig::default() };
        assert!(cfg.validate().is_err());
        assert!(StmConfig { max_shift: 0, ..StmConfig::default() }.validate().is_err());
        assert!(StmConfig::default().validate().is_ok());
    }
}
