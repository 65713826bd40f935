//! Independent oracles and the property checks shared by the property and acceptance suites.
//!
//! Every check returns `Err(message)` instead of panicking so the acceptance run can report
//! each one on its own line.
#![allow(dead_code)]

use std::collections::HashSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use multirc::analysis::{rotation_direction, roundness, stm_terms, variational_monodromy, StmConfig};
use multirc::experiments::{
    reservoir_preset, run_seeing_double_trial_with, seed_ledger, sweep_rho, Preset, TrialOptions, TrialStatus,
};
use multirc::ngrc::{ngrc_feature_count, ngrc_train, poly_dictionary, time_shift_embed, NgrcSpec};
use multirc::numerics::{eigenvalues, ridge_solve, rk4_integrate, scale_to_spectral_radius, Matrix, StreamRng, StreamRole};
use multirc::reservoir::{
    ct_closed_loop_field, ct_jacobian, ct_listen, ct_listen_euler, ct_predict, generate_network, li_jacobian, li_listen,
    li_predict, ReservoirKind, ReservoirSpec, ReservoirState, TrainedModel,
};
use multirc::tasks::{
    circle_samples, generate_lorenz, normalize_to_unit_ball, shift_pair, CircleSpec, LORENZ_INITIAL,
};
use multirc::TimeSeries;

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn rng(seed: u64) -> StreamRng {
    StreamRng::new(seed, StreamRole::Test)
}

pub fn random_matrix(rng: &mut StreamRng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-scale, scale))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn prop<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- oracles

/// Minimizes `‖W X − Y‖² + β‖W‖²` row by row with conjugate gradients, touching `X` only
/// through products `X v` and `Xᵀ v`.
pub fn cg_ridge(x: &Matrix, y: &Matrix, beta: f64) -> Matrix {
    let (f, l) = x.shape();
    let apply = |v: &[f64]| -> Vec<f64> {
        let xt_v: Vec<f64> = (0..l).map(|c| (0..f).map(|r| x[(r, c)] * v[r]).sum()).collect();
        (0..f).map(|r| (0..l).map(|c| x[(r, c)] * xt_v[c]).sum::<f64>() + beta * v[r]).collect()
    };
    let mut w = Matrix::zeros(y.rows(), f);
    for t in 0..y.rows() {
        let b: Vec<f64> = (0..f).map(|r| (0..l).map(|c| x[(r, c)] * y[(t, c)]).sum()).collect();
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut sol = vec![0.0; f];
        for _restart in 0..4 {
            let ax = apply(&sol);
            let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let mut p = r.clone();
            let mut rr: f64 = r.iter().map(|v| v * v).sum();
            for _ in 0..4 * f {
                if rr.sqrt() <= 1e-16 * b_norm {
                    break;
                }
                let ap = apply(&p);
                let step = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
                for i in 0..f {
                    sol[i] += step * p[i];
                    r[i] -= step * ap[i];
                }
                let rr_new: f64 = r.iter().map(|v| v * v).sum();
                for i in 0..f {
                    p[i] = r[i] + rr_new / rr * p[i];
                }
                rr = rr_new;
            }
        }
        w.row_mut(t).copy_from_slice(&sol);
    }
    w
}

/// `exp(A)` by scaling and squaring of a 30-term Taylor series.
pub fn matrix_exp(a: &Matrix) -> Matrix {
    let n = a.rows();
    let norm = a.max_abs() * n as f64;
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scaled = a.scaled(0.5f64.powi(squarings as i32));
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..30 {
        term = term.matmul(&scaled).unwrap().scaled(1.0 / k as f64);
        for (s, t) in sum.as_mut_slice().iter_mut().zip(term.as_slice()) {
            *s += t;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum).unwrap();
    }
    sum
}

/// Hopf normal form `ṙ = r(1 − r²)`, `θ̇ = 1` in Cartesian coordinates.
pub fn hopf_field(_t: f64, x: &[f64], dx: &mut [f64]) {
    let r2 = x[0] * x[0] + x[1] * x[1];
    dx[0] = x[0] - x[1] - x[0] * r2;
    dx[1] = x[0] + x[1] - x[1] * r2;
}

pub fn hopf_jacobian(_t: f64, x: &[f64]) -> Matrix {
    let (a, b) = (x[0], x[1]);
    Matrix::from_rows(&[
        vec![1.0 - 3.0 * a * a - b * b, -1.0 - 2.0 * a * b],
        vec![1.0 - 2.0 * a * b, 1.0 - a * a - 3.0 * b * b],
    ])
    .unwrap()
}

/// Distinct monomials found by sorting every ordered variable tuple of each order.
pub fn brute_force_monomials(vars: usize, orders: &[usize]) -> usize {
    let mut total = 0;
    for &o in orders {
        let mut seen = HashSet::new();
        let mut idx = vec![0usize; o];
        loop {
            let mut key = idx.clone();
            key.sort_unstable();
            seen.insert(key);
            let mut pos = 0;
            while pos < o {
                idx[pos] += 1;
                if idx[pos] < vars {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == o {
                break;
            }
        }
        total += seen.len();
    }
    total
}

/// Max |λ − μ| over a greedy nearest pairing of two spectra.
pub fn spectrum_distance(a: &[multirc::numerics::Complex], b: &[multirc::numerics::Complex]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, x.distance(y)))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn rk4_exp_error(steps: usize, tau: f64) -> f64 {
    let path = rk4_integrate(|_t, x: &[f64], dx: &mut [f64]| dx[0] = x[0], &[1.0], 0.0, steps, tau).unwrap();
    (path[steps][0] - (steps as f64 * tau).exp()).abs()
}

pub fn small_spec(seed: u64, n: usize) -> ReservoirSpec {
    ReservoirSpec {
        n_neurons: n,
        connectivity: 0.2,
        spectral_radius: 1.2,
        input_strength: 0.5,
        timescale: 5.0,
        leak_rate: 0.3,
        regularization: 1e-2,
        step: 0.01,
        listen_horizon: 0.5,
        train_horizon: 1.0,
        seed,
    }
}

/// A model with a random (untrained) readout of entries on `(−scale, scale)`.
pub fn random_model(kind: ReservoirKind, spec: &ReservoirSpec, scale: f64) -> TrainedModel {
    let (m, w_in, _) = generate_network(spec, 2).unwrap();
    let mut r = rng(spec.seed ^ 0x5eed);
    let readout = random_matrix(&mut r, 2, 2 * spec.n_neurons, scale);
    TrainedModel::new(kind, m, w_in, readout, *spec).unwrap()
}

pub fn random_drive(seed: u64, len: usize, amplitude: f64) -> TimeSeries {
    let mut r = rng(seed);
    TimeSeries::new(2, 0.01, (0..2 * len).map(|_| r.uniform(-amplitude, amplitude)).collect()).unwrap()
}

fn random_state(r: &mut StreamRng, n: usize) -> ReservoirState {
    ReservoirState { values: (0..n).map(|_| r.symmetric_closed()).collect(), time: 0.0 }
}

// ---------------------------------------------------------------- numerics

pub fn ridge_normal_equations() -> Check {
    let s = (1usize..12, 1usize..40, 1usize..4, -6.0f64..2.0, any::<u64>());
    prop(48, s, |(f, l, d, log_beta, seed)| {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, f, l, 1.0);
        let y = random_matrix(&mut r, d, l, 1.0);
        let beta = 10f64.powf(log_beta);
        let w = ridge_solve(&x, &y, beta).unwrap();
        let mut gram = x.matmul_transposed(&x).unwrap();
        for i in 0..f {
            gram[(i, i)] += beta;
        }
        let lhs = w.matmul(&gram).unwrap();
        let rhs = y.matmul_transposed(&x).unwrap();
        let scale = rhs.max_abs().max(w.max_abs() * gram.max_abs()).max(1e-300);
        let rel = lhs.max_abs_diff(&rhs) / scale;
        prop_assert!(rel <= 1e-9, "relative residual {rel:e}");
        Ok(())
    })
}

pub fn rk4_halving() -> Check {
    let coarse = rk4_exp_error(100, 0.01);
    let fine = rk4_exp_error(200, 0.005);
    ensure!(coarse / fine >= 14.0, "halving τ reduced the error by {:.2} only", coarse / fine);
    Ok(())
}

pub fn spectral_scaling_idempotent() -> Check {
    prop(32, (2usize..14, 0.1f64..3.0, any::<u64>()), |(n, rho, seed)| {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n, n, 1.0);
        let once = scale_to_spectral_radius(&a, rho).unwrap();
        let twice = scale_to_spectral_radius(&once, rho).unwrap();
        prop_assert!(once.max_abs_diff(&twice) <= 1e-12, "moved by {:e}", once.max_abs_diff(&twice));
        Ok(())
    })
}

pub fn transpose_spectrum() -> Check {
    prop(32, (1usize..16, any::<u64>()), |(n, seed)| {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n, n, 1.0);
        let ev = eigenvalues(&a).unwrap();
        let evt = eigenvalues(&a.transpose()).unwrap();
        let d = spectrum_distance(ev.values(), evt.values());
        prop_assert!(d <= 1e-8, "spectra differ by {d:e}");
        Ok(())
    })
}

// ---------------------------------------------------------------- reservoir

pub fn li_boundedness() -> Check {
    prop(24, (any::<u64>(), 0.01f64..=1.0, 0.1f64..3.0, 0.1f64..20.0), |(seed, alpha, rho, scale)| {
        let spec = ReservoirSpec { leak_rate: alpha, spectral_radius: rho, input_strength: 2.0, ..small_spec(seed, 20) };
        let model = random_model(ReservoirKind::Li, &spec, scale);
        let r0 = random_state(&mut rng(seed.wrapping_add(1)), 20);
        let p = li_predict(&model, &r0, 200).unwrap();
        let worst = p.states.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst <= 1.0, "state left [-1, 1]: {worst}");
        Ok(())
    })
}

pub fn ct_trap() -> Check {
    prop(16, (any::<u64>(), 0.5f64..20.0, 0.1f64..5.0), |(seed, gamma, scale)| {
        let spec = ReservoirSpec { timescale: gamma, input_strength: 2.0, ..small_spec(seed, 20) };
        let model = random_model(ReservoirKind::Ct, &spec, scale);
        let r0 = random_state(&mut rng(seed.wrapping_add(1)), 20);
        let p = ct_predict(&model, &r0, 300).unwrap();
        let worst = p.states.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst <= 1.0 + 1e-3, "closed loop left the trap: {worst}");

        let drive = random_drive(seed, spec.train_index() + 1, 10.0);
        let listened = ct_listen(&spec, &model.adjacency, &model.input_matrix, &drive).unwrap();
        let worst = listened.trajectory.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst <= 1.0 + 1e-3, "driven run left the trap: {worst}");
        Ok(())
    })
}

pub fn euler_correspondence() -> Check {
    prop(16, (any::<u64>(), 0.5f64..50.0), |(seed, gamma)| {
        let ct = ReservoirSpec { timescale: gamma, ..small_spec(seed, 25) };
        let li = ReservoirSpec { leak_rate: gamma * ct.step, ..ct };
        let (m, w_in, _) = generate_network(&ct, 2).unwrap();
        let drive = random_drive(seed, ct.train_index() + 1, 3.0);
        let euler = ct_listen_euler(&ct, &m, &w_in, &drive).unwrap();
        let leaky = li_listen(&li, &m, &w_in, &drive).unwrap();
        prop_assert!(euler == leaky.trajectory, "trajectories differ");
        Ok(())
    })
}

pub fn reservoir_determinism() -> Check {
    let spec = small_spec(17, 40);
    let (m1, w1, s1) = generate_network(&spec, 2).map_err(|e| e.to_string())?;
    let (m2, w2, s2) = generate_network(&spec, 2).map_err(|e| e.to_string())?;
    ensure!(m1 == m2 && w1 == w2 && s1 == s2, "network draws differ");
    let drive = random_drive(3, spec.train_index() + 1, 2.0);
    for kind in [ReservoirKind::Ct, ReservoirKind::Li] {
        let listen = |m: &Matrix, w: &Matrix| match kind {
            ReservoirKind::Ct => ct_listen(&spec, m, w, &drive),
            ReservoirKind::Li => li_listen(&spec, m, w, &drive),
        };
        let a = listen(&m1, &w1).map_err(|e| e.to_string())?;
        let b = listen(&m2, &w2).map_err(|e| e.to_string())?;
        ensure!(a.trajectory == b.trajectory && a.features == b.features, "{kind:?} trajectories differ");
    }
    Ok(())
}

/// Central differences of the closed-loop CT field against `ct_jacobian` at 20 random states.
pub fn ct_jacobian_finite_differences() -> Check {
    let spec = small_spec(5, 15);
    let model = random_model(ReservoirKind::Ct, &spec, 0.5);
    let mut r = rng(99);
    let h = 1e-6;
    for trial in 0..20 {
        let state = random_state(&mut r, 15);
        let j = ct_jacobian(&model, &state).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for c in 0..15 {
            let mut plus = state.values.clone();
            let mut minus = state.values.clone();
            plus[c] += h;
            minus[c] -= h;
            let fp = ct_closed_loop_field(&model, &plus);
            let fm = ct_closed_loop_field(&model, &minus);
            for row in 0..15 {
                worst = worst.max(((fp[row] - fm[row]) / (2.0 * h) - j[(row, c)]).abs());
            }
        }
        let rel = worst / j.max_abs();
        ensure!(rel <= 1e-5, "state {trial}: relative error {rel:e}");
    }
    Ok(())
}

/// One-step LI map differenced against `li_jacobian`.
pub fn li_jacobian_finite_differences() -> Check {
    let spec = small_spec(6, 15);
    let model = random_model(ReservoirKind::Li, &spec, 0.5);
    let step = |x: &[f64]| {
        let s = ReservoirState { values: x.to_vec(), time: 0.0 };
        li_predict(&model, &s, 1).unwrap().states[1].clone()
    };
    let mut r = rng(100);
    let h = 1e-6;
    for trial in 0..20 {
        let state = random_state(&mut r, 15);
        let j = li_jacobian(&model, &state).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for c in 0..15 {
            let mut plus = state.values.clone();
            let mut minus = state.values.clone();
            plus[c] += h;
            minus[c] -= h;
            let (fp, fm) = (step(&plus), step(&minus));
            for row in 0..15 {
                worst = worst.max(((fp[row] - fm[row]) / (2.0 * h) - j[(row, c)]).abs());
            }
        }
        let rel = worst / j.max_abs();
        ensure!(rel <= 1e-5, "state {trial}: relative error {rel:e}");
    }
    Ok(())
}

// ---------------------------------------------------------------- ngrc

pub fn feature_count_identity() -> Check {
    let orders = proptest::sample::subsequence(vec![1usize, 2, 3, 4, 5], 1..=3);
    prop(24, (1usize..=3, 1usize..=4, orders), |(d, k, orders)| {
        prop_assume!(k * d <= 12);
        let series = TimeSeries::new(d, 1.0, (0..d * 10).map(|v| 0.1 + v as f64 * 0.01).collect()).unwrap();
        let lagged = time_shift_embed(&series, 9, k, 1).unwrap();
        let len = poly_dictionary(&lagged, &orders).len();
        let expected = ngrc_feature_count(d, k, &orders);
        prop_assert_eq!(len, expected);
        prop_assert_eq!(brute_force_monomials(k * d, &orders), expected);
        Ok(())
    })
}

/// Regularized objective of a readout on explicitly built NG-RC features.
fn ngrc_objective(spec: &NgrcSpec, u: &TimeSeries, i_train: usize, w: &Matrix) -> f64 {
    let (x, y) = ngrc_design(spec, u, i_train);
    let pred = w.matmul(&x).unwrap();
    let misfit: f64 = pred.as_slice().iter().zip(y.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    misfit + spec.regularization * w.as_slice().iter().map(|v| v * v).sum::<f64>()
}

/// Feature and increment matrices assembled sample by sample from the public primitives.
pub fn ngrc_design(spec: &NgrcSpec, u: &TimeSeries, i_train: usize) -> (Matrix, Matrix) {
    let warm = spec.shifts * spec.stride;
    let cols: Vec<Vec<f64>> = (warm..=i_train)
        .map(|i| {
            let mut f = poly_dictionary(&time_shift_embed(u, i - 1, spec.shifts, spec.stride).unwrap(), &spec.orders);
            if spec.use_quadratic_readout {
                let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
                f.extend(sq);
            }
            f
        })
        .collect();
    let x = Matrix::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r]);
    let y = Matrix::from_fn(u.dims(), cols.len(), |r, c| u.point(warm + c)[r] - u.point(warm + c - 1)[r]);
    (x, y)
}

pub fn ngrc_delta_consistency() -> Check {
    prop(12, (any::<u64>(), 1usize..=3, 1usize..=2, -6.0f64..-1.0), |(seed, k, s, log_beta)| {
        let spec = NgrcSpec {
            orders: vec![1, 2],
            shifts: k,
            stride: s,
            regularization: 10f64.powf(log_beta),
            use_quadratic_readout: false,
        };
        let u = random_drive(seed, 200, 1.0);
        let w = ngrc_train(&spec, &u, 150).unwrap();
        let (x, y) = ngrc_design(&spec, &u, 150);
        let oracle = cg_ridge(&x, &y, spec.regularization);
        let ours = ngrc_objective(&spec, &u, 150, &w);
        let best = ngrc_objective(&spec, &u, 150, &oracle);
        prop_assert!(ours <= best * (1.0 + 1e-9) + 1e-9, "objective {ours} vs oracle {best}");
        Ok(())
    })
}

/// The circle-pair readout decouples into two linear second-order recurrences whose
/// companion matrices sit on the unit circle.
pub fn ngrc_seeing_double_structure() -> Check {
    let (spec, _) = multirc::experiments::ngrc_preset(Preset::Table3Fig5).unwrap();
    let task = multirc::experiments::ngrc_sweep::NgrcTask::default();
    let ts = multirc::experiments::seeing_double_set(task.step, task.train_index() + 1).map_err(|e| e.to_string())?;
    let w = multirc::ngrc::ngrc_train_multi(&spec, &ts.inputs(), task.train_index()).map_err(|e| e.to_string())?;
    ensure!(w.shape() == (2, 14), "readout is {:?}", w.shape());
    for row in 0..2 {
        let (own_now, own_prev) = (row, row + 2);
        for c in 0..14 {
            if c != own_now && c != own_prev {
                ensure!(w[(row, c)].abs() < 1e-3, "row {row} col {c} = {:e}", w[(row, c)]);
            }
        }
        // u[n+1] = (1 + a) u[n] + b u[n−1]: z² − (1 + a) z − b
        let (a, b) = (w[(row, own_now)], w[(row, own_prev)]);
        let disc = (1.0 + a) * (1.0 + a) + 4.0 * b;
        let mags = if disc < 0.0 {
            let m = (-b).sqrt();
            [m, m]
        } else {
            [((1.0 + a) + disc.sqrt()).abs() / 2.0, ((1.0 + a) - disc.sqrt()).abs() / 2.0]
        };
        for m in mags {
            ensure!((m - 1.0).abs() <= 1e-3, "row {row}: companion eigenvalue magnitude {m}");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- tasks

pub fn shift_pair_rigid() -> Check {
    let lorenz = generate_lorenz(5.0, 0.01, LORENZ_INITIAL, 1.0).map_err(|e| e.to_string())?;
    let (a, _) = normalize_to_unit_ball(&lorenz).map_err(|e| e.to_string())?;
    prop(16, 0.0f64..3.0, |dz| {
        let (up, down) = shift_pair(&a, &a, dz).unwrap();
        let dist = |s: &TimeSeries, i: usize, j: usize| {
            s.point(i).iter().zip(s.point(j)).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
        };
        for (i, j) in [(0, 1), (0, 250), (17, 400), (300, 499)] {
            prop_assert!((dist(&up, i, j) - dist(&a, i, j)).abs() <= 1e-12);
            prop_assert!((dist(&down, i, j) - dist(&a, i, j)).abs() <= 1e-12);
        }
        for i in 0..a.len() {
            prop_assert_eq!(&up.point(i)[..2], &a.point(i)[..2]);
        }
        Ok(())
    })
}

fn signed_area(s: &TimeSeries) -> f64 {
    (1..s.len()).map(|i| s.point(i - 1)[0] * s.point(i)[1] - s.point(i)[0] * s.point(i - 1)[1]).sum()
}

pub fn circle_direction() -> Check {
    let a = circle_samples(&CircleSpec::seeing_double_a(0.01, 1.0), 700);
    let b = circle_samples(&CircleSpec::seeing_double_b(0.01, 1.0), 700);
    ensure!(signed_area(&a) > 0.0, "C_A area {}", signed_area(&a));
    ensure!(signed_area(&b) < 0.0, "C_B area {}", signed_area(&b));
    Ok(())
}

pub fn normalization_idempotent() -> Check {
    prop(32, (1usize..4, 2usize..50, any::<u64>(), 0.01f64..100.0), |(d, n, seed, amp)| {
        let mut r = rng(seed);
        let s = TimeSeries::new(d, 0.1, (0..d * n).map(|_| r.uniform(-amp, amp)).collect()).unwrap();
        let (once, _) = normalize_to_unit_ball(&s).unwrap();
        let (twice, scale) = normalize_to_unit_ball(&once).unwrap();
        prop_assert!((scale - 1.0).abs() <= 4.0 * f64::EPSILON, "second scale {scale}");
        let moved = once.values().iter().zip(twice.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(moved <= 4.0 * f64::EPSILON);
        Ok(())
    })
}

pub fn task_determinism() -> Check {
    let a = generate_lorenz(3.0, 0.01, LORENZ_INITIAL, 1.0).map_err(|e| e.to_string())?;
    let b = generate_lorenz(3.0, 0.01, LORENZ_INITIAL, 1.0).map_err(|e| e.to_string())?;
    ensure!(a == b, "Lorenz runs differ");
    Ok(())
}

// ---------------------------------------------------------------- analysis

fn wobbly_cycle(seed: u64, n: usize) -> TimeSeries {
    let mut r = rng(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            let rad = 1.0 + 0.3 * r.uniform(-1.0, 1.0);
            vec![rad * t.cos(), rad * t.sin()]
        })
        .collect();
    TimeSeries::from_points(0.01, &pts).unwrap()
}

pub fn roundness_covariances() -> Check {
    prop(48, (any::<u64>(), -50.0f64..50.0, -50.0f64..50.0, 0.01f64..100.0), |(seed, dx, dy, s)| {
        let cycle = wobbly_cycle(seed, 64);
        let base = roundness(&cycle, &[0.0, 0.0]).unwrap();
        let moved = cycle.map_points(|p| {
            p[0] += dx;
            p[1] += dy;
        });
        let shifted = roundness(&moved, &[dx, dy]).unwrap();
        prop_assert!((shifted - base).abs() <= 1e-12 * (1.0 + dx.abs() + dy.abs()), "{shifted} vs {base}");
        let scaled = roundness(&cycle.map_points(|p| p.iter_mut().for_each(|v| *v *= s)), &[0.0, 0.0]).unwrap();
        prop_assert!((scaled - s * base).abs() <= 1e-12 * s, "{scaled} vs {}", s * base);
        Ok(())
    })
}

pub fn rotation_flip() -> Check {
    prop(48, any::<u64>(), |seed| {
        let cycle = wobbly_cycle(seed, 64);
        let flipped = cycle.map_points(|p| p[1] = -p[1]);
        let a = rotation_direction(&cycle).unwrap();
        let b = rotation_direction(&flipped).unwrap();
        prop_assert_ne!(a, b);
        Ok(())
    })
}

pub fn stm_order_invariance() -> Check {
    let spec = ReservoirSpec { leak_rate: 0.5, ..small_spec(8, 40) };
    let (m, _, _) = generate_network(&spec, 2).map_err(|e| e.to_string())?;
    let cfg = StmConfig { max_shift: 12, signal_length: 1200, washout: 100, ..StmConfig::default() };
    let forward: Vec<usize> = (1..=12).collect();
    let base = stm_terms(&m, &spec, &cfg, &forward).map_err(|e| e.to_string())?;
    prop(16, Just(forward.clone()).prop_shuffle(), |order| {
        let terms = stm_terms(&m, &spec, &cfg, &order).unwrap();
        for (j, t) in order.iter().zip(&terms) {
            prop_assert!((t - base[j - 1]).abs() <= 1e-12, "delay {j}: {t} vs {}", base[j - 1]);
        }
        Ok(())
    })
}

/// Multipliers of the Hopf cycle `r = 1` over one period.
pub fn hopf_multipliers() -> Result<Vec<multirc::numerics::Complex>, String> {
    let period = std::f64::consts::TAU;
    let (end, q) =
        variational_monodromy(hopf_field, hopf_jacobian, &[1.0, 0.0], 0.0, period, 0.01).map_err(|e| e.to_string())?;
    if (end[0] - 1.0).abs() > 1e-6 || end[1].abs() > 1e-6 {
        return Err(format!("orbit did not close: {end:?}"));
    }
    Ok(eigenvalues(&q).map_err(|e| e.to_string())?.values().to_vec())
}

pub fn floquet_trivial_multiplier() -> Check {
    let m = hopf_multipliers()?;
    let one = multirc::numerics::Complex::new(1.0, 0.0);
    let closest = m.iter().map(|c| c.distance(&one)).fold(f64::INFINITY, f64::min);
    ensure!(closest <= 1e-3, "no multiplier near 1: {m:?}");
    Ok(())
}

// ---------------------------------------------------------------- experiments

fn tiny_li() -> ReservoirSpec {
    ReservoirSpec { n_neurons: 60, ..reservoir_preset(Preset::Table2Fig2).unwrap() }
}

pub fn seed_ledger_reproduces() -> Check {
    let seeds = seed_ledger(4, 3);
    let base = tiny_li();
    let opts = TrialOptions::default();
    let a = sweep_rho(ReservoirKind::Li, &base, &[0.8, 1.2], &seeds, &opts, 1).map_err(|e| e.to_string())?;
    ensure!(a.seeds == seeds, "ledger {:?} not embedded", a.seeds);
    let b = sweep_rho(ReservoirKind::Li, &base, &[0.8, 1.2], &a.seeds, &opts, 1).map_err(|e| e.to_string())?;
    ensure!(a.successes == b.successes && a.counts_csv() == b.counts_csv(), "rerun changed the counts");
    // no state carried between cells: a cell trial equals the same trial run alone
    let t = &a.trials[4];
    let alone = run_seeing_double_trial_with(
        ReservoirKind::Li,
        &ReservoirSpec { spectral_radius: t.row_value, ..base },
        seeds[t.trial],
        &opts,
    );
    ensure!(alone == t.report, "trial in a sweep differs from the same trial alone");
    Ok(())
}

pub fn errors_disjoint_from_failures() -> Check {
    let seeds = seed_ledger(0, 3);
    let broken = StmConfig { signal_length: 10, ..StmConfig::default() };
    let opts = TrialOptions { stm: Some(broken), ..TrialOptions::default() };
    let r = sweep_rho(ReservoirKind::Li, &tiny_li(), &[1.0], &seeds, &opts, 1).map_err(|e| e.to_string())?;
    ensure!(r.errors[0][0] == 3 && r.completed[0][0] == 0 && r.successes[0][0] == 0, "counts {:?}", r.counts_csv());
    ensure!(r.trials.iter().all(|t| t.report.status == TrialStatus::Error), "error trial counted as a failure");

    let ok = sweep_rho(ReservoirKind::Li, &tiny_li(), &[1.0, 1.4], &seeds, &TrialOptions::default(), 1)
        .map_err(|e| e.to_string())?;
    for row in 0..2 {
        ensure!(
            ok.completed[row][0] + ok.errors[row][0] == seeds.len() && ok.successes[row][0] <= ok.completed[row][0],
            "row {row} does not partition its trials"
        );
    }
    Ok(())
}

/// Every property check by name, in suite order.
pub fn property_checks() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("ridge normal equations", ridge_normal_equations),
        ("rk4 halving factor", rk4_halving),
        ("spectral scaling idempotent", spectral_scaling_idempotent),
        ("transpose spectrum", transpose_spectrum),
        ("LI boundedness", li_boundedness),
        ("CT trap region", ct_trap),
        ("Euler correspondence", euler_correspondence),
        ("reservoir determinism", reservoir_determinism),
        ("CT Jacobian vs finite differences", ct_jacobian_finite_differences),
        ("LI Jacobian vs finite differences", li_jacobian_finite_differences),
        ("NG-RC feature count identity", feature_count_identity),
        ("NG-RC delta consistency", ngrc_delta_consistency),
        ("NG-RC seeing-double structure", ngrc_seeing_double_structure),
        ("shift_pair rigid", shift_pair_rigid),
        ("circle direction", circle_direction),
        ("normalization idempotent", normalization_idempotent),
        ("task determinism", task_determinism),
        ("roundness covariances", roundness_covariances),
        ("rotation flip", rotation_flip),
        ("STM delay-order invariance", stm_order_invariance),
        ("Floquet trivial multiplier", floquet_trivial_multiplier),
        ("seed ledger", seed_ledger_reproduces),
        ("errors disjoint from failures", errors_disjoint_from_failures),
    ]
}
