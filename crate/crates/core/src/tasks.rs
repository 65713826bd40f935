//! Training and driving signals: the Lorenz/Halvorsen attractor pair and the counter-rotating
//! circle pair.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rk4;
pub use crate::series::TimeSeries;

/// One period of the circle signals.
pub const CIRCLE_PERIOD: f64 = 2.0 * PI;

pub const LORENZ_INITIAL: [f64; 3] = [1.0, 1.0, 1.0];
pub const HALVORSEN_INITIAL: [f64; 3] = [-5.0, 0.0, 0.0];
pub const DEFAULT_TRANSIENT: f64 = 20.0;

/// Lorenz system with the additional `+x` term in the z equation.
pub fn lorenz_field(x: &[f64], dx: &mut [f64]) {
    dx[0] = 10.0 * (x[1] - x[0]);
    dx[1] = x[0] * (28.0 - x[2]) - x[1];
    dx[2] = x[0] * x[1] - 8.0 / 3.0 * x[2] + x[0];
}

/// Cyclically symmetric Halvorsen system.
pub fn halvorsen_field(x: &[f64], dx: &mut [f64]) {
    dx[0] = -1.3 * x[0] - 4.0 * x[1] - 4.0 * x[2] - x[1] * x[1];
    dx[1] = -1.3 * x[1] - 4.0 * x[2] - 4.0 * x[0] - x[2] * x[2];
    dx[2] = -1.3 * x[2] - 4.0 * x[0] - 4.0 * x[1] - x[0] * x[0];
}

fn integrate_autonomous(
    field: fn(&[f64], &mut [f64]),
    horizon: f64,
    step: f64,
    initial: &[f64],
    transient: f64,
) -> Result<TimeSeries> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {step}")));
    }
    if horizon < 0.0 || transient < 0.0 {
        return Err(Error::InvalidParameter("horizon and transient must be >= 0".into()));
    }
    let mut f = |_t: f64, x: &[f64], dx: &mut [f64]| field(x, dx);
    let mut rk = Rk4::new(initial.len());
    let mut state = initial.to_vec();
    let discard = (transient / step).round() as usize;
    for n in 0..discard {
        rk.step(&mut f, n as f64 * step, &mut state, step);
    }
    let samples = (horizon / step).round() as usize + 1;
    let mut values = Vec::with_capacity(samples * initial.len());
    values.extend_from_slice(&state);
    for n in 1..samples {
        rk.step(&mut f, n as f64 * step, &mut state, step);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: n });
        }
        values.extend_from_slice(&state);
    }
    TimeSeries::new(initial.len(), step, values)
}

/// RK4 solution of the modified Lorenz system sampled every `step` over `[0, horizon]`, after
/// discarding `transient` time units.
pub fn generate_lorenz(horizon: f64, step: f64, initial: [f64; 3], transient: f64) -> Result<TimeSeries> {
    integrate_autonomous(lorenz_field, horizon, step, &initial, transient)
}

/// RK4 solution of the Halvorsen system; see [`generate_lorenz`].
pub fn generate_halvorsen(horizon: f64, step: f64, initial: [f64; 3], transient: f64) -> Result<TimeSeries> {
    integrate_autonomous(halvorsen_field, horizon, step, &initial, transient)
}

/// Divides every point by the largest Euclidean norm in the series; returns the divisor.
pub fn normalize_to_unit_ball(series: &TimeSeries) -> Result<(TimeSeries, f64)> {
    if series.is_empty() {
        return Err(Error::DegenerateSeries("empty series".into()));
    }
    let scale = series.max_norm();
    if scale == 0.0 {
        return Err(Error::DegenerateSeries("all points are at the origin".into()));
    }
    Ok((series.map_points(|p| p.iter_mut().for_each(|v| *v /= scale)), scale))
}

/// Moves `a` up and `b` down the z axis by `dz`.
pub fn shift_pair(a: &TimeSeries, b: &TimeSeries, dz: f64) -> Result<(TimeSeries, TimeSeries)> {
    if a.dims() != 3 || b.dims() != 3 {
        return Err(Error::Dimension(format!(
            "shift_pair needs 3-D series, got {} and {}",
            a.dims(),
            b.dims()
        )));
    }
    Ok((a.map_points(|p| p[2] += dz), b.map_points(|p| p[2] -= dz)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorPairSpec {
    pub z_shift: f64,
    pub horizon: f64,
    pub step: f64,
    pub transient_discard: f64,
}

impl AttractorPairSpec {
    pub fn new(z_shift: f64, horizon: f64, step: f64) -> Self {
        Self { z_shift, horizon, step, transient_discard: DEFAULT_TRANSIENT }
    }
}

/// Normalized Lorenz (shifted up) and Halvorsen (shifted down) series.
pub fn attractor_pair(spec: &AttractorPairSpec) -> Result<(TimeSeries, TimeSeries)> {
    if !(spec.step > 0.0) || spec.transient_discard < 0.0 {
        return Err(Error::InvalidParameter("attractor pair needs step > 0 and transient >= 0".into()));
    }
    let lorenz = generate_lorenz(spec.horizon, spec.step, LORENZ_INITIAL, spec.transient_discard)?;
    let halvorsen = generate_halvorsen(spec.horizon, spec.step, HALVORSEN_INITIAL, spec.transient_discard)?;
    let (lorenz, _) = normalize_to_unit_ball(&lorenz)?;
    let (halvorsen, _) = normalize_to_unit_ball(&halvorsen)?;
    shift_pair(&lorenz, &halvorsen, spec.z_shift)
}

/// Circle `u(t) = (cx cos t, cy sin t)` with `|cx| = |cy|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub cx: f64,
    pub cy: f64,
    pub step: f64,
    pub periods: f64,
}

impl CircleSpec {
    pub fn new(cx: f64, cy: f64, step: f64, periods: f64) -> Result<Self> {
        if (cx.abs() - cy.abs()).abs() > 1e-12 || cx == 0.0 {
            return Err(Error::InvalidParameter(format!("circle needs |cx| = |cy| > 0, got {cx}, {cy}")));
        }
        if !(step > 0.0) || !(periods > 0.0) {
            return Err(Error::InvalidParameter("circle needs step > 0 and periods > 0".into()));
        }
        Ok(Self { cx, cy, step, periods })
    }

    /// Counter-clockwise circle C_A of radius 5.
    pub fn seeing_double_a(step: f64, periods: f64) -> Self {
        Self { cx: 5.0, cy: 5.0, step, periods }
    }

    /// Clockwise circle C_B of radius 5.
    pub fn seeing_double_b(step: f64, periods: f64) -> Self {
        Self { cx: -5.0, cy: 5.0, step, periods }
    }

    pub fn radius(&self) -> f64 {
        self.cx.abs()
    }

    pub fn at(&self, t: f64) -> [f64; 2] {
        [self.cx * t.cos(), self.cy * t.sin()]
    }

    pub fn samples(&self) -> usize {
        (self.periods * CIRCLE_PERIOD / self.step).round() as usize + 1
    }
}

/// Samples the circle at `t_n = n·step` for `n = 0..=round(periods·2π/step)`.
pub fn generate_circle(spec: &CircleSpec) -> TimeSeries {
    circle_samples(spec, spec.samples())
}

/// Samples the circle at `t_n = n·step` for `n = 0..count`.
pub fn circle_samples(spec: &CircleSpec, count: usize) -> TimeSeries {
    let mut values = Vec::with_capacity(2 * count);
    for n in 0..count {
        values.extend_from_slice(&spec.at(n as f64 * spec.step));
    }
    TimeSeries::from_raw(2, spec.step, values)
}
