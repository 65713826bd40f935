//! Classical fourth-order Runge-Kutta integration.

use crate::error::{Error, Result};

/// Reusable RK4 stepper with preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.k1.len()
    }

    /// Advances `state` from `t` to `t + h` in place. `field(t, x, dx)` writes the derivative.
    pub fn step<F>(&mut self, field: &mut F, t: f64, state: &mut [f64], h: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = state.len();
        debug_assert_eq!(n, self.k1.len());
        field(t, state, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = state[i] + 0.5 * h * self.k1[i];
        }
        field(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = state[i] + 0.5 * h * self.k2[i];
        }
        field(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = state[i] + h * self.k3[i];
        }
        field(t + h, &self.tmp, &mut self.k4);
        let h6 = h / 6.0;
        for i in 0..n {
            state[i] += h6 * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// Integrates `steps` RK4 steps of size `tau` and returns all states including the initial one.
pub fn rk4_integrate<F>(mut field: F, state0: &[f64], t0: f64, steps: usize, tau: f64) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    check_tau(tau)?;
    if state0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { step: 0 });
    }
    let mut stepper = Rk4::new(state0.len());
    let mut state = state0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for n in 0..steps {
        stepper.step(&mut field, t0 + n as f64 * tau, &mut state, tau);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: n + 1 });
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Integrates from `t0` to exactly `t_end`: whole steps of `tau`, then one shortened step for
/// any remainder. Returns the final state.
pub fn rk4_integrate_to<F>(mut field: F, state0: &[f64], t0: f64, t_end: f64, tau: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    check_tau(tau)?;
    let (whole, rem) = split_horizon(t_end - t0, tau);
    let mut stepper = Rk4::new(state0.len());
    let mut state = state0.to_vec();
    for n in 0..whole {
        stepper.step(&mut field, t0 + n as f64 * tau, &mut state, tau);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: n + 1 });
        }
    }
    if rem > 0.0 {
        stepper.step(&mut field, t0 + whole as f64 * tau, &mut state, rem);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: whole + 1 });
        }
    }
    Ok(state)
}

/// Splits `span` into whole steps of `tau` plus a remainder in `[0, tau)`; remainders below
/// `1e-9·tau` are absorbed.
pub fn split_horizon(span: f64, tau: f64) -> (usize, f64) {
    let ratio = span / tau;
    let mut whole = ratio.floor();
    let mut rem = span - whole * tau;
    if rem > tau * (1.0 - 1e-9) {
        whole += 1.0;
        rem = 0.0;
    }
    if rem < tau * 1e-9 {
        rem = 0.0;
    }
    (whole.max(0.0) as usize, rem.max(0.0))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {tau}")));
    }
    Ok(())
}
