//! Flat key-value run configuration shared by every command.
//!
//! Values are layered: built-in defaults, then the preset (if any), then the keys of the
//! config file, then `key=value` overrides. Horizons accept either time units (`94.2`) or
//! multiples of the circle period (`"15T"`).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::analysis::StmConfig;
use crate::experiments::presets::{
    default_beta_values, default_dz_values, default_rate_values, default_rho_values, ngrc_preset, reservoir_preset,
    Preset,
};
use crate::experiments::{log_space, LorenzHalvorsenSetup, ModelKind, NgrcTask, TrialOptions};
use crate::ngrc::NgrcSpec;
use crate::reservoir::{ReservoirKind, ReservoirSpec};
use crate::tasks::CIRCLE_PERIOD;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}` expects {expected}")]
    TypeMismatch { key: String, expected: &'static str },
    #[error("key `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
}

impl From<ConfigError> for crate::Error {
    fn from(e: ConfigError) -> Self {
        crate::Error::Config(e.to_string())
    }
}

/// A duration in time units or in circle periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Time(f64),
    Periods(f64),
}

impl Horizon {
    pub fn time(&self) -> f64 {
        match *self {
            Horizon::Time(t) => t,
            Horizon::Periods(m) => m * CIRCLE_PERIOD,
        }
    }

    pub fn parse(s: &str) -> Option<Horizon> {
        let s = s.trim();
        match s.strip_suffix('T') {
            Some(m) => m.trim().parse().ok().map(Horizon::Periods),
            None => s.parse().ok().map(Horizon::Time),
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Time(t) => write!(f, "{t}"),
            Horizon::Periods(m) => write!(f, "{m}T"),
        }
    }
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Horizon::Time(t) => s.serialize_f64(*t),
            Horizon::Periods(_) => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            I(i64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(t) => Ok(Horizon::Time(t)),
            Raw::I(t) => Ok(Horizon::Time(t as f64)),
            Raw::S(s) => Horizon::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad horizon `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    GenData,
    Train,
    Predict,
    SweepRho,
    SweepGrid,
    NgrcBetaSweep,
    LorenzHalvorsen,
    Floquet,
    Stm,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::GenData,
        Command::Train,
        Command::Predict,
        Command::SweepRho,
        Command::SweepGrid,
        Command::NgrcBetaSweep,
        Command::LorenzHalvorsen,
        Command::Floquet,
        Command::Stm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::GenData => "gen-data",
            Command::Train => "train",
            Command::Predict => "predict",
            Command::SweepRho => "sweep-rho",
            Command::SweepGrid => "sweep-grid",
            Command::NgrcBetaSweep => "ngrc-beta-sweep",
            Command::LorenzHalvorsen => "lorenz-halvorsen",
            Command::Floquet => "floquet",
            Command::Stm => "stm",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Every setting of a run. Field names are the config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// `ct`, `li` or `ngrc`
    pub kind: String,
    /// `seeing-double` or `lorenz-halvorsen`
    pub task: String,
    pub n_neurons: usize,
    pub connectivity: f64,
    pub spectral_radius: f64,
    pub input_strength: f64,
    pub timescale: f64,
    pub leak_rate: f64,
    pub regularization: f64,
    pub step: f64,
    pub listen_horizon: Horizon,
    pub train_horizon: Horizon,
    pub ngrc_orders: Vec<usize>,
    pub ngrc_shifts: usize,
    pub ngrc_stride: usize,
    pub ngrc_regularization: f64,
    pub ngrc_quadratic: bool,
    pub ngrc_train_horizon: Horizon,
    pub ngrc_beta_values: Vec<f64>,
    pub settle_periods: f64,
    pub rho_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub rate_values: Vec<f64>,
    pub dz_values: Vec<f64>,
    pub kinds: Vec<String>,
    /// Seeing-double closed-loop length in circle periods.
    pub prediction_periods: f64,
    /// Attractor-pair closed-loop length in time units.
    pub prediction_horizon: f64,
    pub floquet: bool,
    pub with_stm: bool,
    pub stm_max_shift: usize,
    pub stm_signal_length: usize,
    pub stm_washout: usize,
    pub stm_regularization: f64,
    pub seed0: u64,
    pub n_trials: usize,
    /// 0 lets the pool pick.
    pub workers: usize,
    pub output_dir: String,
    pub plot_csv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FieldType {
    Int,
    Float,
    Bool,
    Str,
    Horizon,
    IntList,
    FloatList,
    StrList,
}

impl FieldType {
    fn describe(&self) -> &'static str {
        match self {
            FieldType::Int => "a nonnegative integer",
            FieldType::Float => "a number",
            FieldType::Bool => "a boolean",
            FieldType::Str => "a string",
            FieldType::Horizon => "a number or a string like \"15T\"",
            FieldType::IntList => "a list of nonnegative integers",
            FieldType::FloatList => "a list of numbers",
            FieldType::StrList => "a list of strings",
        }
    }
}

const SCHEMA: &[(&str, FieldType)] = &[
    ("command", FieldType::Str),
    ("preset", FieldType::Str),
    ("kind", FieldType::Str),
    ("task", FieldType::Str),
    ("n_neurons", FieldType::Int),
    ("connectivity", FieldType::Float),
    ("spectral_radius", FieldType::Float),
    ("input_strength", FieldType::Float),
    ("timescale", FieldType::Float),
    ("leak_rate", FieldType::Float),
    ("regularization", FieldType::Float),
    ("step", FieldType::Float),
    ("listen_horizon", FieldType::Horizon),
    ("train_horizon", FieldType::Horizon),
    ("ngrc_orders", FieldType::IntList),
    ("ngrc_shifts", FieldType::Int),
    ("ngrc_stride", FieldType::Int),
    ("ngrc_regularization", FieldType::Float),
    ("ngrc_quadratic", FieldType::Bool),
    ("ngrc_train_horizon", FieldType::Horizon),
    ("ngrc_beta_values", FieldType::FloatList),
    ("settle_periods", FieldType::Float),
    ("rho_values", FieldType::FloatList),
    ("beta_values", FieldType::FloatList),
    ("rate_values", FieldType::FloatList),
    ("dz_values", FieldType::FloatList),
    ("kinds", FieldType::StrList),
    ("prediction_periods", FieldType::Float),
    ("prediction_horizon", FieldType::Float),
    ("floquet", FieldType::Bool),
    ("with_stm", FieldType::Bool),
    ("stm_max_shift", FieldType::Int),
    ("stm_signal_length", FieldType::Int),
    ("stm_washout", FieldType::Int),
    ("stm_regularization", FieldType::Float),
    ("seed0", FieldType::Int),
    ("n_trials", FieldType::Int),
    ("workers", FieldType::Int),
    ("output_dir", FieldType::Str),
    ("plot_csv", FieldType::Bool),
];

fn field_type(key: &str) -> Option<FieldType> {
    SCHEMA.iter().find(|(k, _)| *k == key).map(|(_, t)| *t)
}

/// Checks `value` against the schema type, widening integers where numbers are expected.
fn coerce(key: &str, ty: FieldType, value: toml::Value) -> Result<toml::Value, ConfigError> {
    use toml::Value as V;
    let mismatch = || ConfigError::TypeMismatch { key: key.into(), expected: ty.describe() };
    let number = |v: &V| match v {
        V::Float(f) => Some(*f),
        V::Integer(i) => Some(*i as f64),
        _ => None,
    };
    let out = match (ty, &value) {
        (FieldType::Int, V::Integer(i)) if *i >= 0 => value,
        (FieldType::Float, v) => V::Float(number(v).ok_or_else(mismatch)?),
        (FieldType::Bool, V::Boolean(_)) | (FieldType::Str, V::String(_)) => value,
        (FieldType::Horizon, V::String(s)) if Horizon::parse(s).is_some() => value,
        (FieldType::Horizon, v) => V::Float(number(v).ok_or_else(mismatch)?),
        (FieldType::IntList, V::Array(a)) if a.iter().all(|x| matches!(x, V::Integer(i) if *i >= 0)) => value,
        (FieldType::FloatList, V::Array(a)) => {
            V::Array(a.iter().map(|x| number(x).map(V::Float)).collect::<Option<Vec<_>>>().ok_or_else(mismatch)?)
        }
        (FieldType::StrList, V::Array(a)) if a.iter().all(|x| matches!(x, V::String(_))) => value,
        _ => return Err(mismatch()),
    };
    Ok(out)
}

/// Reads `key=value`, with the value in TOML syntax; bare words are taken as strings.
pub fn parse_override(text: &str) -> Result<(String, toml::Value), ConfigError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| ConfigError::Parse(format!("override `{text}` is not key=value")))?;
    let (key, raw) = (key.trim(), raw.trim());
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

impl Default for RunConfig {
    fn default() -> Self {
        let li = reservoir_preset(Preset::Table2Fig2).expect("LI preset");
        Self {
            command: Command::SweepRho.name().into(),
            preset: None,
            kind: "li".into(),
            task: "seeing-double".into(),
            n_neurons: li.n_neurons,
            connectivity: li.connectivity,
            spectral_radius: li.spectral_radius,
            input_strength: li.input_strength,
            timescale: 5.0,
            leak_rate: li.leak_rate,
            regularization: li.regularization,
            step: li.step,
            listen_horizon: Horizon::Periods(6.0),
            train_horizon: Horizon::Periods(15.0),
            ngrc_orders: vec![1, 2],
            ngrc_shifts: 2,
            ngrc_stride: 1,
            ngrc_regularization: 1e-6,
            ngrc_quadratic: false,
            ngrc_train_horizon: Horizon::Periods(15.0),
            ngrc_beta_values: log_space(1e-12, 1e3, 40),
            settle_periods: NgrcTask::default().settle_periods,
            rho_values: default_rho_values(),
            beta_values: default_beta_values(),
            rate_values: default_rate_values(ReservoirKind::Li),
            dz_values: default_dz_values(),
            kinds: vec!["ct".into(), "li".into(), "ngrc".into()],
            prediction_periods: TrialOptions::default().prediction_periods,
            prediction_horizon: 100.0,
            floquet: false,
            with_stm: false,
            stm_max_shift: StmConfig::default().max_shift,
            stm_signal_length: StmConfig::default().signal_length,
            stm_washout: StmConfig::default().washout,
            stm_regularization: StmConfig::default().regularization,
            seed0: 0,
            n_trials: 20,
            workers: 1,
            output_dir: "runs".into(),
            plot_csv: true,
        }
    }
}

impl RunConfig {
    /// Overwrites the model fields with a table row.
    pub fn apply_preset(&mut self, p: Preset) {
        self.preset = Some(p.name().into());
        self.task = if p.is_attractor_task() { "lorenz-halvorsen" } else { "seeing-double" }.into();
        let horizon = |t: f64| {
            let m = t / CIRCLE_PERIOD;
            if (m - m.round()).abs() < 1e-9 {
                Horizon::Periods(m.round())
            } else {
                Horizon::Time(t)
            }
        };
        if let Some(spec) = reservoir_preset(p) {
            let kind = p.reservoir_kind().expect("reservoir preset");
            self.kind = kind.label().into();
            self.n_neurons = spec.n_neurons;
            self.connectivity = spec.connectivity;
            self.spectral_radius = spec.spectral_radius;
            self.input_strength = spec.input_strength;
            self.timescale = spec.timescale;
            self.leak_rate = spec.leak_rate;
            self.regularization = spec.regularization;
            self.step = spec.step;
            self.listen_horizon = horizon(spec.listen_horizon);
            self.train_horizon = horizon(spec.train_horizon);
            self.rate_values = default_rate_values(kind);
        }
        if let Some((spec, t_train)) = ngrc_preset(p) {
            self.kind = "ngrc".into();
            self.ngrc_orders = spec.orders;
            self.ngrc_shifts = spec.shifts;
            self.ngrc_stride = spec.stride;
            self.ngrc_regularization = spec.regularization;
            self.ngrc_quadratic = spec.use_quadratic_readout;
            self.ngrc_train_horizon = horizon(t_train);
        }
    }

    /// Sets one key from a TOML value, checking the key and its type.
    pub fn set(&mut self, key: &str, value: toml::Value) -> Result<(), ConfigError> {
        let ty = field_type(key).ok_or_else(|| ConfigError::UnknownKey(key.into()))?;
        let value = coerce(key, ty, value)?;
        if key == "preset" {
            let name = value.as_str().unwrap_or_default();
            let p = Preset::parse(name)
                .ok_or_else(|| ConfigError::InvalidValue { key: key.into(), message: format!("unknown preset `{name}`") })?;
            self.apply_preset(p);
            return Ok(());
        }
        let mut table = toml::Table::try_from(&*self).map_err(|e| ConfigError::Parse(e.to_string()))?;
        table.insert(key.into(), value);
        *self = table
            .try_into()
            .map_err(|_: toml::de::Error| ConfigError::TypeMismatch { key: key.into(), expected: ty.describe() })?;
        Ok(())
    }

    /// Layers the file contents and overrides over the defaults. A `preset` (from the file or
    /// `preset_name`, the latter winning) is expanded before any other key.
    pub fn parse(
        file: Option<&str>,
        preset_name: Option<&str>,
        overrides: &[(String, toml::Value)],
    ) -> Result<RunConfig, ConfigError> {
        let mut table = match file {
            Some(text) => toml::from_str::<toml::Table>(text).map_err(|e| ConfigError::Parse(e.to_string()))?,
            None => toml::Table::new(),
        };
        let mut cfg = RunConfig::default();
        let file_preset = table.remove("preset");
        if let Some(p) = preset_name {
            cfg.set("preset", toml::Value::String(p.into()))?;
        } else if let Some(v) = file_preset {
            cfg.set("preset", v)?;
        }
        for (k, v) in table {
            cfg.set(&k, v)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v.clone())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: String| Err(ConfigError::InvalidValue { key: key.into(), message });
        if Command::parse(&self.command).is_none() {
            return bad("command", format!("unknown command `{}`", self.command));
        }
        if ModelKind::parse(&self.kind).is_none() {
            return bad("kind", format!("expected ct, li or ngrc, got `{}`", self.kind));
        }
        if let Some(k) = self.kinds.iter().find(|k| ModelKind::parse(k).is_none()) {
            return bad("kinds", format!("unknown kind `{k}`"));
        }
        if self.task != "seeing-double" && self.task != "lorenz-halvorsen" {
            return bad("task", format!("expected seeing-double or lorenz-halvorsen, got `{}`", self.task));
        }
        if self.n_trials == 0 {
            return bad("n_trials", "must be >= 1".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn command(&self) -> Command {
        Command::parse(&self.command).expect("validated command")
    }

    pub fn model_kind(&self) -> ModelKind {
        ModelKind::parse(&self.kind).expect("validated kind")
    }

    pub fn model_kinds(&self) -> Vec<ModelKind> {
        self.kinds.iter().filter_map(|k| ModelKind::parse(k)).collect()
    }

    pub fn reservoir_spec(&self) -> ReservoirSpec {
        ReservoirSpec {
            n_neurons: self.n_neurons,
            connectivity: self.connectivity,
            spectral_radius: self.spectral_radius,
            input_strength: self.input_strength,
            timescale: self.timescale,
            leak_rate: self.leak_rate,
            regularization: self.regularization,
            step: self.step,
            listen_horizon: self.listen_horizon.time(),
            train_horizon: self.train_horizon.time(),
            seed: self.seed0,
        }
    }

    pub fn ngrc_spec(&self) -> NgrcSpec {
        NgrcSpec {
            orders: self.ngrc_orders.clone(),
            shifts: self.ngrc_shifts,
            stride: self.ngrc_stride,
            regularization: self.ngrc_regularization,
            use_quadratic_readout: self.ngrc_quadratic,
        }
    }

    pub fn ngrc_task(&self) -> NgrcTask {
        NgrcTask {
            step: self.step,
            train_horizon: self.ngrc_train_horizon.time(),
            prediction_periods: self.prediction_periods,
            settle_periods: self.settle_periods,
        }
    }

    pub fn stm_config(&self) -> StmConfig {
        StmConfig {
            max_shift: self.stm_max_shift,
            signal_length: self.stm_signal_length,
            washout: self.stm_washout,
            regularization: self.stm_regularization,
            seed: self.seed0,
        }
    }

    pub fn trial_options(&self) -> TrialOptions {
        TrialOptions {
            prediction_periods: self.prediction_periods,
            floquet: self.floquet,
            stm: self.with_stm.then(|| self.stm_config()),
        }
    }

    /// Table rows for all three models; the model named by `kind` takes the configured
    /// fields instead, so overrides reach it.
    pub fn lorenz_halvorsen_setup(&self) -> LorenzHalvorsenSetup {
        let mut setup = LorenzHalvorsenSetup { prediction_horizon: self.prediction_horizon, ..Default::default() };
        match self.model_kind() {
            ModelKind::Ct => setup.ct = self.reservoir_spec(),
            ModelKind::Li => setup.li = self.reservoir_spec(),
            ModelKind::Ngrc => {
                setup.ngrc = self.ngrc_spec();
                setup.ngrc_train_horizon = self.ngrc_train_horizon.time();
            }
        }
        setup
    }

    /// Trial seeds `seed0, seed0 + 1, …, seed0 + n_trials − 1`.
    pub fn seeds(&self) -> Vec<u64> {
        crate::experiments::seed_ledger(self.seed0, self.n_trials)
    }
}
