//! Parameter sets of the published figures.
//!
//! Rows whose parameter is the swept axis carry a representative value (ρ = 1.4, α = 0.05,
//! γ = 5) so every preset is runnable as-is.

use serde::{Deserialize, Serialize};

use crate::ngrc::NgrcSpec;
use crate::reservoir::{ReservoirKind, ReservoirSpec};
use crate::tasks::CIRCLE_PERIOD;

pub const STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Table1Fig1,
    Table1Fig3,
    Table1Fig4,
    Table2Fig1,
    Table2Fig2,
    Table2Fig4,
    Table3Fig1,
    Table3Fig5,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Table1Fig1,
        Preset::Table1Fig3,
        Preset::Table1Fig4,
        Preset::Table2Fig1,
        Preset::Table2Fig2,
        Preset::Table2Fig4,
        Preset::Table3Fig1,
        Preset::Table3Fig5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Table1Fig1 => "table1-fig1",
            Preset::Table1Fig3 => "table1-fig3",
            Preset::Table1Fig4 => "table1-fig4",
            Preset::Table2Fig1 => "table2-fig1",
            Preset::Table2Fig2 => "table2-fig2",
            Preset::Table2Fig4 => "table2-fig4",
            Preset::Table3Fig1 => "table3-fig1",
            Preset::Table3Fig5 => "table3-fig5",
        }
    }

    pub fn parse(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    /// `None` for the NG-RC rows.
    pub fn reservoir_kind(&self) -> Option<ReservoirKind> {
        match self {
            Preset::Table1Fig1 | Preset::Table1Fig3 | Preset::Table1Fig4 => Some(ReservoirKind::Ct),
            Preset::Table2Fig1 | Preset::Table2Fig2 | Preset::Table2Fig4 => Some(ReservoirKind::Li),
            Preset::Table3Fig1 | Preset::Table3Fig5 => None,
        }
    }

    /// True for the attractor-pair rows.
    pub fn is_attractor_task(&self) -> bool {
        matches!(self, Preset::Table1Fig1 | Preset::Table2Fig1 | Preset::Table3Fig1)
    }
}

fn circles(n: usize, p: f64, rho: f64, sigma: f64, gamma: f64, alpha: f64, beta: f64) -> ReservoirSpec {
    ReservoirSpec {
        n_neurons: n,
        connectivity: p,
        spectral_radius: rho,
        input_strength: sigma,
        timescale: gamma,
        leak_rate: alpha,
        regularization: beta,
        step: STEP,
        listen_horizon: 6.0 * CIRCLE_PERIOD,
        train_horizon: 15.0 * CIRCLE_PERIOD,
        seed: 0,
    }
}

/// CT and LI rows; NG-RC presets return `None`.
pub fn reservoir_preset(p: Preset) -> Option<ReservoirSpec> {
    let spec = match p {
        Preset::Table1Fig1 => ReservoirSpec {
            n_neurons: 1000,
            connectivity: 0.05,
            spectral_radius: 1.6,
            input_strength: 5.0,
            timescale: 7.0,
            leak_rate: 1.0,
            regularization: 1e2,
            step: STEP,
            listen_horizon: 100.0,
            train_horizon: 200.0,
            seed: 0,
        },
        Preset::Table1Fig3 => circles(500, 0.05, 1.4, 0.2, 5.0, 1.0, 1e-2),
        Preset::Table1Fig4 => circles(500, 0.05, 1.4, 0.2, 5.0, 1.0, 1e-2),
        Preset::Table2Fig1 => ReservoirSpec {
            n_neurons: 1000,
            connectivity: 0.012,
            spectral_radius: 0.9,
            input_strength: 1.2,
            timescale: 1.0,
            leak_rate: 0.2,
            regularization: 1e-3,
            step: STEP,
            listen_horizon: 100.0,
            train_horizon: 200.0,
            seed: 0,
        },
        Preset::Table2Fig2 => circles(500, 0.05, 1.4, 0.2, 1.0, 0.05, 1e-2),
        Preset::Table2Fig4 => circles(500, 0.05, 1.4, 0.2, 1.0, 0.05, 1e-2),
        Preset::Table3Fig1 | Preset::Table3Fig5 => return None,
    };
    Some(spec)
}

/// NG-RC rows with their training horizon (time units); `None` for CT and LI presets.
pub fn ngrc_preset(p: Preset) -> Option<(NgrcSpec, f64)> {
    match p {
        Preset::Table3Fig1 => Some((
            NgrcSpec {
                orders: vec![1, 2, 3, 4, 5],
                shifts: 3,
                stride: 2,
                regularization: 3e-5,
                use_quadratic_readout: true,
            },
            200.0,
        )),
        Preset::Table3Fig5 => Some((
            NgrcSpec { orders: vec![1, 2], shifts: 2, stride: 1, regularization: 1e-6, use_quadratic_readout: false },
            15.0 * CIRCLE_PERIOD,
        )),
        _ => None,
    }
}

/// Spectral radii of the success-vs-ρ curves.
pub fn default_rho_values() -> Vec<f64> {
    vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0]
}

/// β axis of the rate/regularization planes, two decades apart.
pub fn default_beta_values() -> Vec<f64> {
    vec![1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1e0, 1e2]
}

pub fn default_rate_values(kind: ReservoirKind) -> Vec<f64> {
    match kind {
        ReservoirKind::Ct => vec![1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0],
        ReservoirKind::Li => vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
    }
}

/// z shifts of the attractor-pair panels.
pub fn default_dz_values() -> Vec<f64> {
    (0..=6).map(|i| 0.25 * i as f64).collect()
}
