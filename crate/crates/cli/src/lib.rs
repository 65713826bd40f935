//! Command dispatch and artifact layout for the `multirc` binary.
//!
//! Every run writes into a fresh `<output_dir>/<command>-<UTC timestamp>` directory holding
//! `results.csv`, `trials.jsonl`, `config.echo` and `seeds.txt`, plus `plot.csv` for the
//! sweeps and CSV data files for single-model commands. Existing directories are never
//! reused.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use multirc::analysis::{classify_outcome, point_biserial, STABILITY_TOLERANCE};
use multirc::config::{Command, RunConfig};
use multirc::experiments::{
    attractor_training_set, lorenz_halvorsen_experiment, ngrc_beta_sweep, orbit_spectra,
    run_parallel, run_seeing_double_trial_with, seeing_double_run, seeing_double_set, sweep_grid, sweep_rho,
    train_multifunctional, ModelKind, MultifunctionalTrainingSet, SweepResult, TrialOptions,
};
use multirc::experiments::ngrc_sweep::ngrc_seeing_double_predict;
use multirc::ngrc::{ngrc_predict, ngrc_train_multi, readout_to_csv};
use multirc::reservoir::{generate_network, predict_output, ReservoirKind};
use multirc::{Error, Result, TimeSeries};

/// Files produced by one run, keyed by name.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

/// Runs the configured command and returns its artifacts without touching the disk.
pub fn execute(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.validate()?;
    let mut out = Artifacts::default();
    out.add("config.echo", cfg.to_toml());
    out.add("seeds.txt", cfg.seeds().iter().map(|s| format!("{s}\n")).collect());
    match cfg.command() {
        Command::GenData => gen_data(cfg, &mut out)?,
        Command::Train => train(cfg, &mut out)?,
        Command::Predict => predict(cfg, &mut out)?,
        Command::SweepRho => {
            let r = sweep_rho(
                reservoir_kind(cfg)?,
                &cfg.reservoir_spec(),
                &cfg.rho_values,
                &cfg.seeds(),
                &cfg.trial_options(),
                cfg.workers,
            )?;
            write_sweep(cfg, &r, &mut out)?;
        }
        Command::SweepGrid => {
            let r = sweep_grid(
                reservoir_kind(cfg)?,
                &cfg.reservoir_spec(),
                &cfg.beta_values,
                &cfg.rate_values,
                &cfg.seeds(),
                &cfg.trial_options(),
                cfg.workers,
            )?;
            write_sweep(cfg, &r, &mut out)?;
        }
        Command::NgrcBetaSweep => beta_sweep(cfg, &mut out)?,
        Command::LorenzHalvorsen => lorenz_halvorsen(cfg, &mut out)?,
        Command::Floquet => floquet(cfg, &mut out)?,
        Command::Stm => stm_command(cfg, &mut out)?,
    }
    Ok(out)
}

/// Creates `<base>/<command>-<timestamp>` (with a numeric suffix on collision) and writes
/// every artifact into it.
pub fn persist(cfg: &RunConfig, base: &Path, artifacts: &Artifacts) -> Result<PathBuf> {
    fs::create_dir_all(base)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let stem = format!("{}-{stamp}", cfg.command);
    let mut dir = base.join(&stem);
    let mut n = 1;
    loop {
        match fs::create_dir(&dir) {
            Ok(()) => break,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                dir = base.join(format!("{stem}-{n}"));
                n += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    for (name, contents) in &artifacts.files {
        fs::write(dir.join(name), contents)?;
    }
    Ok(dir)
}

fn reservoir_kind(cfg: &RunConfig) -> Result<ReservoirKind> {
    cfg.model_kind()
        .reservoir()
        .ok_or_else(|| Error::InvalidParameter(format!("command {} needs kind ct or li", cfg.command)))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Io(e.to_string()))
}

fn jsonl<T: serde::Serialize>(items: &[T]) -> Result<String> {
    let mut s = String::new();
    for item in items {
        s.push_str(&json(item)?);
        s.push('\n');
    }
    Ok(s)
}

fn write_sweep(cfg: &RunConfig, r: &SweepResult, out: &mut Artifacts) -> Result<()> {
    out.add("results.csv", r.counts_csv());
    out.add("trials.jsonl", r.trials_jsonl()?);
    out.add("seeds.txt", r.seeds_text());
    if cfg.plot_csv {
        out.add("plot.csv", r.plot_csv());
    }
    Ok(())
}

/// Training pair for the configured task; the attractor pair uses the first z shift.
fn training_set(cfg: &RunConfig) -> Result<MultifunctionalTrainingSet> {
    if cfg.task == "lorenz-halvorsen" {
        let dz = cfg.dz_values.first().copied().unwrap_or(1.0);
        attractor_training_set(&cfg.lorenz_halvorsen_setup(), dz)
    } else {
        let horizon = match cfg.model_kind() {
            ModelKind::Ngrc => cfg.ngrc_task().train_index(),
            _ => cfg.reservoir_spec().train_index(),
        };
        seeing_double_set(cfg.step, horizon + 1)
    }
}

fn gen_data(cfg: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let mut summary = String::from("name,samples,dims,max_norm\n");
    let mut emit = |name: String, s: &TimeSeries, out: &mut Artifacts| {
        let _ = writeln!(summary, "{name},{},{},{:?}", s.len(), s.dims(), s.max_norm());
        out.add(&format!("{name}.csv"), s.to_csv());
    };
    if cfg.task == "lorenz-halvorsen" {
        let setup = cfg.lorenz_halvorsen_setup();
        for &dz in &cfg.dz_values {
            let ts = attractor_training_set(&setup, dz)?;
            emit(format!("lorenz_dz{dz}"), &ts.input_1, out);
            emit(format!("halvorsen_dz{dz}"), &ts.input_2, out);
        }
    } else {
        let ts = training_set(cfg)?;
        emit("circle_a".into(), &ts.input_1, out);
        emit("circle_b".into(), &ts.input_2, out);
    }
    out.add("results.csv", summary);
    out.add("trials.jsonl", String::new());
    Ok(())
}

struct Fitted {
    readout_csv: String,
    predictions: [Result<TimeSeries>; 2],
    network_seed: Option<u64>,
}

fn fit(cfg: &RunConfig, steps: usize) -> Result<Fitted> {
    let ts = training_set(cfg)?;
    match cfg.model_kind() {
        ModelKind::Ngrc => {
            let spec = cfg.ngrc_spec();
            let i_train = cfg.ngrc_task().train_index();
            let w = ngrc_train_multi(&spec, &ts.inputs(), i_train)?;
            let predictions = if cfg.task == "lorenz-halvorsen" {
                ts.inputs().map(|u| ngrc_predict(&spec, &w, &u.slice(0, i_train + 1), steps))
            } else {
                ngrc_seeing_double_predict(&spec, &w, ts.inputs(), &cfg.ngrc_task())
            };
            Ok(Fitted { readout_csv: readout_to_csv(&spec, &w), predictions, network_seed: None })
        }
        kind => {
            let rk = kind.reservoir().expect("reservoir kind");
            let spec = cfg.reservoir_spec();
            let (m, w_in, network_seed) = generate_network(&spec, ts.input_1.dims())?;
            let trained = train_multifunctional(rk, &spec, m, w_in, &ts)?;
            let predictions = [0, 1].map(|i| predict_output(&trained.model, &trained.final_states[i], steps));
            Ok(Fitted {
                readout_csv: trained.model.readout.to_csv(None),
                predictions,
                network_seed: Some(network_seed),
            })
        }
    }
}

fn prediction_steps(cfg: &RunConfig) -> usize {
    if cfg.task == "lorenz-halvorsen" {
        (cfg.prediction_horizon / cfg.step).round() as usize
    } else {
        multirc::experiments::seeing_double::prediction_steps(cfg.step, cfg.prediction_periods)
    }
}

fn train(cfg: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let fitted = fit(cfg, 0)?;
    let rows = fitted.readout_csv.lines().filter(|l| !l.starts_with('u')).count();
    out.add(
        "results.csv",
        format!(
            "kind,task,seed,network_seed,readout_rows\n{},{},{},{},{rows}\n",
            cfg.kind,
            cfg.task,
            cfg.seed0,
            fitted.network_seed.map_or(String::new(), |s| s.to_string())
        ),
    );
    out.add("readout.csv", fitted.readout_csv);
    out.add("trials.jsonl", String::new());
    Ok(())
}

fn predict(cfg: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let fitted = fit(cfg, prediction_steps(cfg))?;
    let mut csv = String::from("orbit,class,period,rotation,roundness,error\n");
    let mut records = Vec::new();
    for (label, p) in ["a", "b"].iter().zip(&fitted.predictions) {
        match p {
            Ok(series) => {
                let o = classify_outcome(series)?;
                let _ = writeln!(
                    csv,
                    "{label},{},{},{},{},",
                    o.class.label(),
                    o.period_estimate.map_or(String::new(), |v| format!("{v:?}")),
                    o.rotation.map_or(String::new(), |r| json(&r).unwrap_or_default().replace('"', "")),
                    o.roundness.map_or(String::new(), |v| format!("{v:?}"))
                );
                out.add(&format!("prediction_{label}.csv"), series.to_csv());
                records.push(json(&o)?);
            }
            Err(e) => {
                let _ = writeln!(csv, "{label},diverged,,,,{e}");
                records.push(json(&e.to_string())?);
            }
        }
    }
    out.add("results.csv", csv);
    out.add("readout.csv", fitted.readout_csv);
    out.add("trials.jsonl", records.join("\n") + "\n");
    Ok(())
}

fn beta_sweep(cfg: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let records = ngrc_beta_sweep(&cfg.ngrc_spec(), &cfg.ngrc_beta_values, &cfg.ngrc_task())?;
    let d = records.first().map_or(0, |r| r.weights.len());
    let f = records.first().map_or(0, |r| r.weights.first().map_or(0, Vec::len));
    let mut csv = String::from("beta,success,outcome");
    for i in 1..=d {
        for j in 1..=f {
            let _ = write!(csv, ",w{i}_{j}");
        }
    }
    csv.push('\n');
    let mut plot = String::from("beta,weight,value\n");
    for r in &records {
        let _ = write!(csv, "{:?},{},{}", r.beta, r.success, r.outcome.label());
        for (i, row) in r.weights.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                let _ = write!(csv, ",{w:?}");
                let _ = writeln!(plot, "{:?},w{}_{},{w:?}", r.beta, i + 1, j + 1);
            }
        }
        csv.push('\n');
    }
    out.add("results.csv", csv);
    out.add("trials.jsonl", jsonl(&records)?);
    out.add("seeds.txt", String::new());
    if cfg.plot_csv {
        out.add("plot.csv", plot);
    }
    Ok(())
}

fn lorenz_halvorsen(cfg: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let records = lorenz_halvorsen_experiment(
        &cfg.model_kinds(),
        &cfg.dz_values,
        &cfg.seeds(),
        &cfg.lorenz_halvorsen_setup(),
        cfg.workers,
    )?;
    let mut csv = String::from("kind,dz,successes,runs\n");
    let mut plot = String::from("kind,dz,success_rate\n");
    for r in &records {
        let _ = writeln!(csv, "{},{},{},{}", r.kind.label(), r.dz, r.successes, r.runs.len());
        let _ = writeln!(plot, "{},{},{}", r.kind.label(), r.dz, r.successes as f64 / r.runs.len() as f64);
    }
    out.add("results.csv", csv);
    out.add("trials.jsonl", jsonl(&records)?);
    if cfg.plot_csv {
        out.add("plot.csv", plot);
    }
    Ok(())
}

fn floquet(cfg: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let kind = reservoir_kind(cfg)?;
    let spec = cfg.reservoir_spec();
    let seeds = cfg.seeds();
    let rows = run_parallel(&seeds, cfg.workers, |&seed| -> Result<(bool, Vec<_>)> {
        let spec = multirc::reservoir::ReservoirSpec { seed, ..spec };
        let run = seeing_double_run(kind, &spec, cfg.prediction_periods)?;
        Ok((run.report.success, orbit_spectra(&run.trained.model)?))
    })?;
    let mut csv = String::from("seed,success,orbit,lambda1,lambda2,max_nontrivial,stable,overflow,extension\n");
    let mut lines = Vec::new();
    for (seed, row) in seeds.iter().zip(rows) {
        match row {
            Ok((success, spectra)) => {
                for s in &spectra {
                    let (l1, l2) = s.leading();
                    let _ = writeln!(
                        csv,
                        "{seed},{success},{},{l1:?},{l2:?},{:?},{},{},{}",
                        json(&s.orbit_label)?.replace('"', ""),
                        s.max_nontrivial(),
                        s.is_stable(STABILITY_TOLERANCE),
                        s.overflow,
                        s.extension
                    );
                }
                lines.push(json(&serde_json::json!({ "seed": seed, "success": success, "spectra": spectra }))?);
            }
            Err(e) => {
                let _ = writeln!(csv, "{seed},,,,,,,,");
                lines.push(json(&serde_json::json!({ "seed": seed, "error": e.to_string() }))?);
            }
        }
    }
    out.add("results.csv", csv);
    out.add("trials.jsonl", lines.join("\n") + "\n");
    Ok(())
}

fn stm_command(cfg: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let kind = reservoir_kind(cfg)?;
    let spec = cfg.reservoir_spec();
    let options = TrialOptions { stm: Some(cfg.stm_config()), ..cfg.trial_options() };
    let reports = run_parallel(&cfg.seeds(), cfg.workers, |&s| run_seeing_double_trial_with(kind, &spec, s, &options))?;
    let mut csv = String::from("seed,status,stm\n");
    let mut values = Vec::new();
    let mut flags = Vec::new();
    for r in &reports {
        let status = json(&r.status)?.replace('"', "");
        let _ = writeln!(csv, "{},{status},{}", r.seed, r.stm.map_or(String::new(), |v| format!("{v:?}")));
        if let (Some(v), None) = (r.stm, &r.error) {
            values.push(v);
            flags.push(r.success());
        }
    }
    out.add("results.csv", csv);
    out.add("trials.jsonl", jsonl(&reports)?);
    out.add("summary.csv", format!("point_biserial\n{:?}\n", point_biserial(&values, &flags)));
    Ok(())
}
