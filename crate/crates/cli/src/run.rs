//! Dispatch of a validated `RunConfig` and collection of its artifacts.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bosonic_core::analytic::CouplingWeights;
use bosonic_core::fockspace::{linspace, step_bound, wigner};
use bosonic_core::pulsedesign::{amplitude_error, qst_pulse, speed_limit, PulseParams};
use bosonic_core::tasks::{
    dominant_harmonic, fmt_float, run_ep, run_qst, run_qst_outcome, run_w_transfer_with_channel, EpRecord, EpTask,
    InputState, JitterRow, Method, Numerics, QstRecord, QstTask, Table,
};
use bosonic_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Job, RunConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn from_core(e: &CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::UnboundedPotential { .. }
            | CoreError::StepSize { .. }
            | CoreError::Unreachable { .. }
            | CoreError::TruncationTooSmall(_)
            | CoreError::MixedReference => Failure::Validation(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn io(path: &Path, e: impl fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Serialize)]
struct FileEntry {
    path: String,
    description: String,
    sha256: String,
}

#[derive(Debug, Clone, Serialize)]
struct RunEntry {
    label: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pulse: Option<PulseParams<f64>>,
    dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tail: Option<f64>,
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    wall_time: f64,
}

impl RunEntry {
    fn failed(label: String, e: &CoreError) -> Self {
        Self {
            label,
            status: format!("failed: {e}"),
            pulse: None,
            dims: Vec::new(),
            max_tail: None,
            converged: None,
            note: None,
            wall_time: 0.0,
        }
    }

    fn from_qst(label: String, r: &QstRecord<f64>) -> Self {
        Self {
            label,
            status: "ok".into(),
            pulse: Some(r.pulse),
            dims: r.dims.clone(),
            max_tail: Some(r.max_tail),
            converged: r.converged,
            note: None,
            wall_time: r.wall_time,
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    command: &'a str,
    params: &'a std::collections::BTreeMap<String, String>,
    config_hash: String,
    truncation: String,
    integrator_step: f64,
    workers: usize,
    status: &'static str,
    files: Vec<FileEntry>,
    runs: Vec<RunEntry>,
    wall_time: f64,
}

/// Output files written so far plus per-run diagnostics.
struct Collector {
    dir: PathBuf,
    files: Vec<FileEntry>,
    runs: Vec<RunEntry>,
    first_error: Option<Failure>,
}

impl Collector {
    fn write(&mut self, name: &str, description: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        let sha256 = format!("{:x}", Sha256::digest(bytes));
        self.files.push(FileEntry { path: name.into(), description: description.into(), sha256 });
        Ok(())
    }

    fn table(&mut self, name: &str, description: &str, t: &Table) -> Result<(), Failure> {
        let text = t.to_csv_string().map_err(|e| Failure::Io(e.to_string()))?;
        self.write(name, description, text.as_bytes())
    }

    fn jsonl<S: Serialize>(&mut self, name: &str, description: &str, items: &[S]) -> Result<(), Failure> {
        let mut buf = Vec::new();
        for item in items {
            serde_json::to_writer(&mut buf, item).map_err(|e| Failure::Io(e.to_string()))?;
            buf.push(b'\n');
        }
        self.write(name, description, &buf)
    }

    fn json<S: Serialize>(&mut self, name: &str, description: &str, value: &S) -> Result<(), Failure> {
        let mut buf = serde_json::to_vec_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
        buf.push(b'\n');
        self.write(name, description, &buf)
    }

    fn failed(&mut self, label: String, e: &CoreError) {
        eprintln!("run failed ({label}): {e}");
        self.first_error.get_or_insert_with(|| Failure::from_core(e));
        self.runs.push(RunEntry::failed(label, e));
    }
}

/// Hash of everything that determines the numerical output.
pub fn config_hash(cfg: &RunConfig, numerics: &Numerics<f64>) -> String {
    let mut h = Sha256::new();
    h.update(format!("command={}\n", cfg.command));
    for (k, v) in &cfg.params {
        h.update(format!("{k}={v}\n"));
    }
    h.update(format!("truncation={:?}\ndt={:e}\n", numerics.truncation, numerics.evolve.dt));
    format!("{:x}", h.finalize())
}

pub fn numerics(cfg: &RunConfig) -> Numerics<f64> {
    let mut n = Numerics::<f64>::default();
    if let Some(t) = cfg.trunc {
        n = n.with_truncation(t.truncation());
    }
    if let Some(dt) = cfg.dt {
        n.evolve = n.evolve.with_dt(dt);
    }
    n
}

fn fan_out<I: Sync, O: Send>(
    items: &[I],
    f: impl Fn(&I) -> Result<O, CoreError> + Sync + Send,
) -> Vec<Result<O, CoreError>> {
    items.par_iter().map(f).collect()
}

fn qst_label(t: &QstTask<f64>) -> String {
    let mut s = format!("input={} m={} method={}", t.input, t.m, t.method.as_str());
    if t.channel_temp != 0.0 {
        s += &format!(" temperature={}", t.channel_temp);
    }
    if t.jitter != 0.0 {
        s += &format!(" jitter={}", t.jitter);
    }
    s
}

/// Row for a point that produced no record: identifying columns filled, the rest empty.
fn failure_row(header: &[String], known: &[(&str, String)]) -> Vec<String> {
    header.iter().map(|h| known.iter().find(|(k, _)| h == k).map_or(String::new(), |(_, v)| v.clone())).collect()
}

fn push_column(t: &mut Table, name: &str, values: Vec<String>) {
    t.header.push(name.into());
    for (row, v) in t.rows.iter_mut().zip(values) {
        row.push(v);
    }
}

fn status(r: &Result<impl Sized, CoreError>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("failed: {e}"),
    }
}

/// QST record table; failed points keep their identifying columns.
fn qst_table(tasks: &[QstTask<f64>], results: &[Result<QstRecord<f64>, CoreError>]) -> Table {
    let mut t = QstRecord::<f64>::table(&[]);
    for (task, r) in tasks.iter().zip(results) {
        let row = match r {
            Ok(rec) => QstRecord::table(std::slice::from_ref(rec)).rows.remove(0),
            Err(_) => failure_row(
                &t.header,
                &[
                    ("input", task.input.to_string()),
                    ("method", task.method.as_str().into()),
                    ("m", task.m.to_string()),
                    ("temperature [omega]", fmt_float(task.channel_temp)),
                    ("jitter [1/omega]", fmt_float(task.jitter)),
                    ("correction", task.apply_correction.to_string()),
                ],
            ),
        };
        t.push(row);
    }
    t
}

fn run_qst_points(
    c: &mut Collector,
    tasks: &[QstTask<f64>],
    numerics: &Numerics<f64>,
) -> Vec<Result<QstRecord<f64>, CoreError>> {
    let results = fan_out(tasks, |t| run_qst(t, numerics));
    for (t, r) in tasks.iter().zip(&results) {
        match r {
            Ok(rec) => c.runs.push(RunEntry::from_qst(qst_label(t), rec)),
            Err(e) => c.failed(qst_label(t), e),
        }
    }
    results
}

fn ok_records<R: Clone>(results: &[Result<R, CoreError>]) -> Vec<R> {
    results.iter().filter_map(|r| r.as_ref().ok().cloned()).collect()
}

fn with_omega(mut t: QstTask<f64>, omega: f64) -> QstTask<f64> {
    t.omega = omega;
    t
}

/// Rejects an integrator step above the stability bound of any run.
fn check_step(cfg: &RunConfig, numerics: &Numerics<f64>) -> Result<(), Failure> {
    let dt = numerics.evolve.dt;
    let pair = || CouplingWeights::uniform(2).expect("two nodes");
    let systems: Vec<(PulseParams<f64>, f64, CouplingWeights<f64>)> = match &cfg.job {
        Job::Qst(t) | Job::Wigner { task: t, .. } => {
            vec![(t.pulse().map_err(|e| Failure::from_core(&e))?, t.omega, pair())]
        }
        Job::SweepM { ms, methods, omega, input } => {
            let mut v = Vec::new();
            for &m in ms {
                for &me in methods {
                    let p = QstTask::new(*input, m).with_method(me).pulse().map_err(|e| Failure::from_core(&e))?;
                    v.push((p, *omega, pair()));
                }
            }
            v
        }
        Job::SweepTemp { m, omega, .. } | Job::SweepPhase { m, omega, .. } => {
            vec![(qst_pulse(*m).map_err(|e| Failure::from_core(&e))?, *omega, pair())]
        }
        Job::SweepJitter { ms, omega, .. } => ms
            .iter()
            .map(|&m| Ok((qst_pulse(m).map_err(|e| Failure::from_core(&e))?, *omega, pair())))
            .collect::<Result<_, Failure>>()?,
        Job::WState { m, .. } => vec![(qst_pulse(*m).map_err(|e| Failure::from_core(&e))?, 1.0, pair())],
        Job::Ep { weights, ms, methods, omega, .. } => {
            let mut v = Vec::new();
            for &m in ms {
                for &me in methods {
                    let p =
                        EpTask::new(weights.clone(), m).with_method(me).pulse().map_err(|e| Failure::from_core(&e))?;
                    v.push((p, *omega, weights.clone()));
                }
            }
            v
        }
        Job::Tradeoff { ms, .. } => ms
            .iter()
            .map(|&m| Ok((qst_pulse(m).map_err(|e| Failure::from_core(&e))?, 1.0, pair())))
            .collect::<Result<_, Failure>>()?,
    };
    for (p, omega, w) in systems {
        let sys = p.config(omega, w).map_err(|e| Failure::from_core(&e))?;
        let bound = step_bound(&sys);
        if dt > bound {
            return Err(Failure::Validation(format!(
                "integrator step dt = {dt:e} exceeds the stability bound {bound:e} for m = {:?}",
                p.m
            )));
        }
    }
    Ok(())
}

/// Runs the job, writes its artifacts into `dir` and the manifest last.
/// Returns the first per-run failure, if any, after everything is written.
pub fn run(cfg: &RunConfig, dir: &Path, workers: usize) -> Result<Option<Failure>, Failure> {
    let start = Instant::now();
    let numerics = numerics(cfg);
    check_step(cfg, &numerics)?;
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let manifest_path = dir.join(MANIFEST);
    // A stale manifest would make an interrupted run look complete.
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(|e| io(&manifest_path, e))?;
    }
    let mut c = Collector { dir: dir.to_path_buf(), files: Vec::new(), runs: Vec::new(), first_error: None };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Failure::Io(e.to_string()))?;
    pool.install(|| dispatch(cfg, &numerics, &mut c))?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name(),
        params: &cfg.params,
        config_hash: config_hash(cfg, &numerics),
        truncation: format!("{:?}", numerics.truncation),
        integrator_step: numerics.evolve.dt,
        workers,
        status: if c.first_error.is_some() { "partial" } else { "complete" },
        files: c.files.clone(),
        runs: c.runs.clone(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    let tmp = dir.join(format!("{MANIFEST}.tmp"));
    let text = serde_json::to_vec_pretty(&manifest).map_err(|e| Failure::Io(e.to_string()))?;
    let mut f = fs::File::create(&tmp).map_err(|e| io(&tmp, e))?;
    f.write_all(&text).and_then(|_| f.write_all(b"\n")).and_then(|_| f.sync_all()).map_err(|e| io(&tmp, e))?;
    fs::rename(&tmp, &manifest_path).map_err(|e| io(&manifest_path, e))?;
    Ok(c.first_error)
}

fn dispatch(cfg: &RunConfig, numerics: &Numerics<f64>, c: &mut Collector) -> Result<(), Failure> {
    match &cfg.job {
        Job::Qst(task) => {
            let tasks = [*task];
            let results = run_qst_points(c, &tasks, numerics);
            c.table("qst.csv", "state-transfer record", &with_status(qst_table(&tasks, &results), &results))?;
            c.jsonl("records.jsonl", "full state-transfer records", &ok_records(&results))?;
        }
        Job::SweepM { input, ms, methods, omega } => {
            let tasks: Vec<QstTask<f64>> = ms
                .iter()
                .flat_map(|&m| {
                    methods.iter().map(move |&me| with_omega(QstTask::new(*input, m).with_method(me), *omega))
                })
                .collect();
            let results = run_qst_points(c, &tasks, numerics);
            let mean_n = input.moments().map_err(|e| Failure::from_core(&e))?.number;
            let mut t = qst_table(&tasks, &results);
            let predicted = tasks
                .iter()
                .map(|t| match t.method {
                    Method::Optimized => fmt_float(mean_n * amplitude_error(t.m as f64).powi(2)),
                    Method::Rwa => String::new(),
                })
                .collect();
            push_column(&mut t, "predicted_infidelity", predicted);
            c.table(
                "sweep_m.csv",
                "infidelity against pulse index; predicted = <n> G(m)^2",
                &with_status(t, &results),
            )?;
            c.jsonl("records.jsonl", "full state-transfer records", &ok_records(&results))?;
        }
        Job::SweepTemp { input, m, temperatures, method, omega } => {
            let tasks: Vec<QstTask<f64>> = temperatures
                .iter()
                .map(|&temp| with_omega(QstTask::new(*input, *m).with_method(*method).with_temperature(temp), *omega))
                .collect();
            let results = run_qst_points(c, &tasks, numerics);
            c.table(
                "sweep_temp.csv",
                "infidelity against channel temperature",
                &with_status(qst_table(&tasks, &results), &results),
            )?;
            c.jsonl("records.jsonl", "full state-transfer records", &ok_records(&results))?;
        }
        Job::SweepPhase { alpha, m, phases, method, omega } => {
            let grid: Vec<f64> = (0..*phases).map(|k| std::f64::consts::TAU * k as f64 / *phases as f64).collect();
            let tasks: Vec<QstTask<f64>> = grid
                .iter()
                .map(|&phi| {
                    with_omega(QstTask::new(InputState::coherent_polar(*alpha, phi), *m).with_method(*method), *omega)
                })
                .collect();
            let results = run_qst_points(c, &tasks, numerics);
            let mut t = Table::new(&["phi [rad]", "method", "m", "infidelity"]);
            for (phi, r) in grid.iter().zip(&results) {
                let inf = r.as_ref().map_or(String::new(), |rec| fmt_float(rec.infidelity));
                t.push(vec![fmt_float(*phi), method.as_str().into(), m.to_string(), inf]);
            }
            c.table("sweep_phase.csv", "infidelity against coherent-state phase", &with_status(t, &results))?;
            let inf: Vec<f64> = ok_records(&results).iter().map(|r| r.infidelity).collect();
            #[derive(Serialize)]
            struct Summary {
                alpha: f64,
                m: u32,
                method: Method,
                points: usize,
                spread: Option<f64>,
                dominant_harmonic: Option<usize>,
            }
            let complete = inf.len() == grid.len();
            let spread = complete
                .then(|| inf.iter().cloned().fold(f64::MIN, f64::max) - inf.iter().cloned().fold(f64::MAX, f64::min));
            let summary = Summary {
                alpha: *alpha,
                m: *m,
                method: *method,
                points: grid.len(),
                spread,
                dominant_harmonic: complete.then(|| dominant_harmonic(&inf)),
            };
            c.json(
                "sweep_phase_summary.json",
                "max-min infidelity spread and dominant Fourier harmonic in phi",
                &summary,
            )?;
            c.jsonl("records.jsonl", "full state-transfer records", &ok_records(&results))?;
        }
        Job::SweepJitter { input, ms, jitters, omega } => {
            let tasks: Vec<QstTask<f64>> = ms
                .iter()
                .flat_map(|&m| jitters.iter().map(move |&j| with_omega(QstTask::new(*input, m).with_jitter(j), *omega)))
                .collect();
            let results = run_qst_points(c, &tasks, numerics);
            let mut t = JitterRow::<f64>::table(&[]);
            for (task, r) in tasks.iter().zip(&results) {
                let row = match r {
                    Ok(rec) => {
                        let jr = JitterRow {
                            m: task.m,
                            delta_tau: task.jitter,
                            tau: rec.pulse.tau,
                            nominal: rec.infidelity,
                            worst: rec.worst_infidelity,
                            increase: rec.worst_infidelity - rec.infidelity,
                        };
                        JitterRow::table(&[jr]).rows.remove(0)
                    }
                    Err(_) => failure_row(
                        &t.header,
                        &[("m", task.m.to_string()), ("delta_tau [1/omega]", fmt_float(task.jitter))],
                    ),
                };
                t.push(row);
            }
            c.table(
                "sweep_jitter.csv",
                "worst-case infidelity over [tau - dtau, tau + dtau]",
                &with_status(t, &results),
            )?;
            c.jsonl("records.jsonl", "full state-transfer records", &ok_records(&results))?;
        }
        Job::WState { spec, m, channel_fock } => {
            let label = format!("amplitudes={:?} m={m} channel_fock={channel_fock}", spec.amplitudes);
            let result = run_w_transfer_with_channel(spec, *m, *channel_fock, numerics);
            let mut t = Table::new(&[
                "amplitudes",
                "weights",
                "m",
                "tau [1/omega]",
                "g_prime [omega]",
                "channel_fock",
                "fidelity_ideal_transform",
                "fidelity_full",
                "sender_residual",
            ]);
            let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            match &result {
                Ok(r) => {
                    t.push(vec![
                        join(&r.amplitudes),
                        join(&r.weights),
                        r.m.to_string(),
                        fmt_float(r.pulse.tau),
                        fmt_float(r.pulse.g_prime),
                        r.channel_fock.to_string(),
                        fmt_float(r.fidelity_ideal_transform),
                        fmt_float(r.fidelity_full),
                        fmt_float(r.sender_residual),
                    ]);
                    c.runs.push(RunEntry {
                        label,
                        status: "ok".into(),
                        pulse: Some(r.pulse),
                        dims: r.dims.clone(),
                        max_tail: Some(r.max_tail),
                        converged: None,
                        note: None,
                        wall_time: r.wall_time,
                    });
                }
                Err(e) => {
                    let row = failure_row(&t.header, &[("amplitudes", join(&spec.amplitudes)), ("m", m.to_string())]);
                    t.push(row);
                    c.failed(label, e);
                }
            }
            let results = [result];
            c.table("wstate.csv", "W-type transfer with designed couplings", &with_status(t, &results))?;
            c.jsonl("records.jsonl", "full W-transfer records", &ok_records(&results))?;
        }
        Job::Ep { weights, ms, methods, seed, omega } => {
            let tasks: Vec<EpTask<f64>> = ms
                .iter()
                .flat_map(|&m| {
                    methods.iter().map(move |&me| {
                        let mut t = EpTask::new(weights.clone(), m).with_method(me);
                        t.seed = *seed;
                        t.omega = *omega;
                        t
                    })
                })
                .collect();
            let results: Vec<Result<EpRecord<f64>, CoreError>> =
                fan_out(&tasks, |t| run_ep(t, numerics).map(|o| o.record));
            let mut t = EpRecord::<f64>::table(&[]);
            let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            for (task, r) in tasks.iter().zip(&results) {
                let label = format!("k={} m={} method={}", join(task.weights.as_slice()), task.m, task.method.as_str());
                match r {
                    Ok(rec) => {
                        t.push(EpRecord::table(std::slice::from_ref(rec)).rows.remove(0));
                        c.runs.push(RunEntry {
                            label,
                            status: "ok".into(),
                            pulse: Some(rec.pulse),
                            dims: rec.dims.clone(),
                            max_tail: Some(rec.max_tail),
                            converged: rec.converged,
                            note: rec.note.clone(),
                            wall_time: rec.wall_time,
                        });
                    }
                    Err(e) => {
                        t.push(failure_row(
                            &t.header,
                            &[
                                ("weights", join(task.weights.as_slice())),
                                ("method", task.method.as_str().into()),
                                ("m", task.m.to_string()),
                            ],
                        ));
                        c.failed(label, e);
                    }
                }
            }
            c.table(
                "ep.csv",
                "entanglement preparation: final fidelity and logarithmic negativity",
                &with_status(t, &results),
            )?;
            for rec in ok_records(&results) {
                let name = format!("ep_trace_{}_m{}.csv", rec.method.as_str(), rec.m);
                c.table(&name, "logarithmic negativity of the first node pair over the pulse", &rec.trace_table())?;
            }
            c.jsonl("records.jsonl", "full entanglement-preparation records", &ok_records(&results))?;
        }
        Job::Tradeoff { e_tol, mean_n, ms, verify } => {
            let r = speed_limit(*e_tol, *mean_n).map_err(|e| Failure::from_core(&e))?;
            let input = InputState::fock(*mean_n as usize);
            let mut t = Table::new(&[
                "e_tol",
                "mean_n",
                "m_th",
                "m_chosen",
                "theta_th [rad]",
                "tau_th [1/omega]",
                "predicted_infidelity",
                "simulated_infidelity",
            ]);
            let simulated = if *verify {
                let task = QstTask::new(input, r.m_chosen);
                let res = run_qst_points(c, &[task], numerics).remove(0);
                res.map_or(String::new(), |rec| fmt_float(rec.infidelity))
            } else {
                String::new()
            };
            t.push(vec![
                fmt_float(*e_tol),
                fmt_float(*mean_n),
                fmt_float(r.m_th),
                r.m_chosen.to_string(),
                fmt_float(r.theta_th),
                fmt_float(r.tau_th),
                fmt_float(r.predicted_infidelity),
                simulated,
            ]);
            c.table("tradeoff.csv", "fastest pulse meeting the error tolerance", &t)?;
            if !ms.is_empty() {
                let mut curve =
                    Table::new(&["m", "tau [1/omega]", "G_squared", "predicted_infidelity", "simulated_infidelity"]);
                let sims: Vec<Option<Result<QstRecord<f64>, CoreError>>> = if *verify {
                    let tasks: Vec<QstTask<f64>> = ms.iter().map(|&m| QstTask::new(input, m)).collect();
                    run_qst_points(c, &tasks, numerics).into_iter().map(Some).collect()
                } else {
                    ms.iter().map(|_| None).collect()
                };
                for (&m, sim) in ms.iter().zip(&sims) {
                    let p = qst_pulse::<f64>(m).map_err(|e| Failure::from_core(&e))?;
                    let g2 = amplitude_error(m as f64).powi(2);
                    let s = match sim {
                        Some(Ok(rec)) => fmt_float(rec.infidelity),
                        _ => String::new(),
                    };
                    curve.push(vec![m.to_string(), fmt_float(p.tau), fmt_float(g2), fmt_float(mean_n * g2), s]);
                }
                let statuses: Vec<String> = sims.iter().map(|s| s.as_ref().map_or("ok".into(), status)).collect();
                push_column(&mut curve, "status", statuses);
                c.table(
                    "tradeoff_curve.csv",
                    "predicted <n> G(m)^2 and, with verify, the simulated infidelity",
                    &curve,
                )?;
            }
        }
        Job::Wigner { task, xmax, points } => {
            let label = qst_label(task);
            match run_qst_outcome(task, numerics) {
                Ok(out) => {
                    let axis = linspace(-*xmax, *xmax, *points);
                    let grid = wigner(&out.receiver, &axis, &axis).map_err(|e| Failure::from_core(&e))?;
                    let mut buf = Vec::new();
                    grid.write_csv(&mut buf).map_err(|e| Failure::Io(e.to_string()))?;
                    c.write("wigner.csv", "Wigner function of the received state (dimensionless quadratures)", &buf)?;
                    #[derive(Serialize)]
                    struct Sidecar<'a> {
                        input: String,
                        m: u32,
                        method: Method,
                        correction: bool,
                        fidelity: f64,
                        infidelity: f64,
                        theta_r: Option<f64>,
                        wigner_integral: f64,
                        convention: &'a str,
                    }
                    let rec = &out.record;
                    c.json(
                        "wigner_fidelity.json",
                        "fidelity of the received state shown in wigner.csv",
                        &Sidecar {
                            input: rec.input.clone(),
                            m: rec.m,
                            method: rec.method,
                            correction: rec.apply_correction,
                            fidelity: rec.fidelity,
                            infidelity: rec.infidelity,
                            theta_r: rec.theta_r,
                            wigner_integral: grid.integral(),
                            convention: grid.convention,
                        },
                    )?;
                    c.runs.push(RunEntry::from_qst(label, rec));
                }
                Err(e) => c.failed(label, &e),
            }
        }
    }
    Ok(())
}

fn with_status<R>(mut t: Table, results: &[Result<R, CoreError>]) -> Table {
    let values = results.iter().map(status).collect();
    push_column(&mut t, "status", values);
    t
}
