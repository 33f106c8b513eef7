//! `key=value` experiment configs.
//!
//! A config file holds one `key = value` pair per line; `#` starts a comment.
//! Inline command-line pairs use the same syntax and are merged on top of the
//! file, each argument counting as its own line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use bosonic_core::analytic::CouplingWeights;
use bosonic_core::pulsedesign::{ep_pulse, qst_pulse};
use bosonic_core::tasks::{InputState, Method, QstTask, Truncation, WTransferSpec};
use bosonic_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Qst,
    SweepM,
    SweepTemp,
    SweepPhase,
    SweepJitter,
    WState,
    Ep,
    Tradeoff,
    Wigner,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Qst,
        Command::SweepM,
        Command::SweepTemp,
        Command::SweepPhase,
        Command::SweepJitter,
        Command::WState,
        Command::Ep,
        Command::Tradeoff,
        Command::Wigner,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Qst => "qst",
            Command::SweepM => "sweep-m",
            Command::SweepTemp => "sweep-temp",
            Command::SweepPhase => "sweep-phase",
            Command::SweepJitter => "sweep-jitter",
            Command::WState => "wstate",
            Command::Ep => "ep",
            Command::Tradeoff => "tradeoff",
            Command::Wigner => "wigner",
        }
    }

    /// Accepted keys and their defaults (`None` = required).
    fn keys(&self) -> &'static [(&'static str, Option<&'static str>)] {
        match self {
            Command::Qst => &[
                ("input", None),
                ("m", None),
                ("method", Some("optimized")),
                ("temperature", Some("0")),
                ("jitter", Some("0")),
                ("correction", Some("false")),
                ("omega", Some("1")),
            ],
            Command::SweepM => {
                &[("input", None), ("m", Some("5..17")), ("method", Some("optimized")), ("omega", Some("1"))]
            }
            Command::SweepTemp => &[
                ("input", None),
                ("m", None),
                ("temperature", None),
                ("method", Some("optimized")),
                ("omega", Some("1")),
            ],
            Command::SweepPhase => &[
                ("alpha", None),
                ("m", None),
                ("phases", Some("24")),
                ("method", Some("optimized")),
                ("omega", Some("1")),
            ],
            Command::SweepJitter => &[("input", None), ("m", None), ("jitter", None), ("omega", Some("1"))],
            Command::WState => {
                &[("amplitudes", None), ("receiver_weights", Some("")), ("m", Some("11")), ("channel_fock", Some("0"))]
            }
            Command::Ep => &[
                ("k", Some("1,1")),
                ("m", Some("2..7")),
                ("method", Some("optimized")),
                ("seed", Some("1")),
                ("omega", Some("1")),
            ],
            Command::Tradeoff => {
                &[("e_tol", Some("0.01")), ("mean_n", Some("1")), ("m", Some("")), ("verify", Some("false"))]
            }
            Command::Wigner => &[
                ("input", None),
                ("m", None),
                ("method", Some("optimized")),
                ("temperature", Some("0")),
                ("correction", Some("false")),
                ("omega", Some("1")),
                ("xmax", Some("4")),
                ("points", Some("101")),
            ],
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s.trim()).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            format!("unknown command `{}` (expected one of {})", s.trim(), names.join(", "))
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keys accepted by every command; command-line flags take precedence.
const GLOBAL_KEYS: [&str; 5] = ["command", "out", "trunc", "dt", "workers"];
/// Spellings folded onto a canonical key.
const ALIASES: [(&str, &str); 3] = [("apply_correction", "correction"), ("T", "temperature"), ("dtau", "jitter")];

/// Where a key or value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub origin: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.origin, self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub at: Option<Position>,
    pub message: String,
}

impl ConfigError {
    fn at(pos: &Position, message: impl Into<String>) -> Self {
        Self { at: Some(pos.clone()), message: message.into() }
    }

    fn bare(message: impl Into<String>) -> Self {
        Self { at: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.at {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    key_at: Position,
    value_at: Position,
}

/// Parsed but not yet validated pairs.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

fn valid_key(k: &str) -> bool {
    let mut chars = k.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl RawConfig {
    /// One `key = value` line; `None` for blank lines and comments.
    fn parse_line(text: &str, origin: &str, line: usize) -> Result<Option<(String, Entry)>, ConfigError> {
        let body = text.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            return Ok(None);
        }
        let pos = |byte: usize| Position { origin: origin.to_string(), line, col: text[..byte].chars().count() + 1 };
        let lead = body.len() - body.trim_start().len();
        let Some(eq) = body.find('=') else {
            return Err(ConfigError::at(&pos(lead), "expected `key=value`"));
        };
        let key = body[..eq].trim();
        if !valid_key(key) {
            return Err(ConfigError::at(&pos(lead), format!("`{key}` is not a valid key")));
        }
        let raw_value = &body[eq + 1..];
        let value = raw_value.trim();
        let value_byte = eq + 1 + (raw_value.len() - raw_value.trim_start().len());
        if value.is_empty() {
            return Err(ConfigError::at(&pos(value_byte), format!("missing value for `{key}`")));
        }
        let canonical = ALIASES.iter().find(|(a, _)| *a == key).map_or(key, |(_, c)| *c);
        let entry = Entry { value: value.to_string(), key_at: pos(lead), value_at: pos(value_byte) };
        Ok(Some((canonical.to_string(), entry)))
    }

    /// Parses a whole config file; a key may appear only once per file.
    pub fn parse(source: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut out = Self::default();
        for (i, text) in source.lines().enumerate() {
            if let Some((key, entry)) = Self::parse_line(text, origin, i + 1)? {
                if out.entries.contains_key(&key) {
                    return Err(ConfigError::at(&entry.key_at, format!("duplicate key `{key}`")));
                }
                out.entries.insert(key, entry);
            }
        }
        Ok(out)
    }

    /// Merges inline `key=value` arguments, numbered from `first`; they
    /// override values from a file.
    pub fn add_args(&mut self, args: &[String], first: usize) -> Result<(), ConfigError> {
        for (i, a) in args.iter().enumerate() {
            if let Some((key, entry)) = Self::parse_line(a, &format!("argument {}", first + i), 1)? {
                self.entries.insert(key, entry);
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, origin: &str) {
        let pos = Position { origin: origin.to_string(), line: 1, col: 1 };
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), key_at: pos.clone(), value_at: pos });
    }
}

/// Truncation override; `None` keeps the library default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncSpec {
    Auto,
    Converged,
    Fixed(usize),
}

impl TruncSpec {
    pub fn truncation(&self) -> Truncation {
        match *self {
            TruncSpec::Auto => Truncation::Auto,
            TruncSpec::Converged => Truncation::Converged,
            TruncSpec::Fixed(d) => Truncation::Fixed(d),
        }
    }
}

impl FromStr for TruncSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "auto" => Ok(TruncSpec::Auto),
            "converged" => Ok(TruncSpec::Converged),
            d => match d.parse::<usize>() {
                Ok(d) if d >= 2 => Ok(TruncSpec::Fixed(d)),
                _ => Err(format!("expected `auto`, `converged` or an integer >= 2, got `{d}`")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Qst(QstTask<f64>),
    SweepM { input: InputState<f64>, ms: Vec<u32>, methods: Vec<Method>, omega: f64 },
    SweepTemp { input: InputState<f64>, m: u32, temperatures: Vec<f64>, method: Method, omega: f64 },
    SweepPhase { alpha: f64, m: u32, phases: usize, method: Method, omega: f64 },
    SweepJitter { input: InputState<f64>, ms: Vec<u32>, jitters: Vec<f64>, omega: f64 },
    WState { spec: WTransferSpec<f64>, m: u32, channel_fock: usize },
    Ep { weights: CouplingWeights<f64>, ms: Vec<u32>, methods: Vec<Method>, seed: usize, omega: f64 },
    Tradeoff { e_tol: f64, mean_n: f64, ms: Vec<u32>, verify: bool },
    Wigner { task: QstTask<f64>, xmax: f64, points: usize },
}

/// A validated run request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Command parameters with defaults filled, as written in the manifest.
    pub params: BTreeMap<String, String>,
    pub job: Job,
    pub output_dir: Option<String>,
    pub trunc: Option<TruncSpec>,
    pub dt: Option<f64>,
    pub workers: Option<usize>,
}

/// Integer list: `5`, `2,4,7`, `5..17` (inclusive) or a mix such as `2..4,9`.
pub fn parse_int_list(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let int = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("`{t}` is not a non-negative integer"));
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b)?);
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(int(part)?),
        }
    }
    Ok(out)
}

/// Float list: `0.5`, `0,1,3` or an inclusive grid `lo..hi:n` of `n` points.
pub fn parse_float_list(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| -> Result<f64, String> {
        let x: f64 = t.trim().parse().map_err(|_| format!("`{}` is not a number", t.trim()))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("`{}` is not finite", t.trim()))
        }
    };
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        match part.split_once("..") {
            Some((a, rest)) => {
                let (b, n) =
                    rest.split_once(':').ok_or_else(|| format!("grid `{part}` needs a point count, `lo..hi:n`"))?;
                let n: usize = n.trim().parse().map_err(|_| format!("`{}` is not a point count", n.trim()))?;
                if n < 2 {
                    return Err(format!("grid `{part}` needs at least 2 points"));
                }
                let (a, b) = (num(a)?, num(b)?);
                out.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64));
            }
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_methods(s: &str) -> Result<Vec<Method>, String> {
    s.split(',').map(|p| p.parse::<Method>().map_err(|e| e.to_string())).collect()
}

/// Typed access to one command's pairs with positions for errors.
struct Fields<'a> {
    raw: &'a RawConfig,
    defaults: BTreeMap<&'static str, Option<&'static str>>,
}

impl Fields<'_> {
    fn text(&self, key: &str) -> Result<(String, Option<&Position>), ConfigError> {
        if let Some(e) = self.raw.entries.get(key) {
            return Ok((e.value.clone(), Some(&e.value_at)));
        }
        match self.defaults.get(key) {
            Some(Some(d)) => Ok((d.to_string(), None)),
            _ => Err(ConfigError::bare(format!("missing required key `{key}`"))),
        }
    }

    fn get<V>(&self, key: &str, parse: impl FnOnce(&str) -> Result<V, String>) -> Result<V, ConfigError> {
        let (text, pos) = self.text(key)?;
        parse(&text).map_err(|why| {
            let message = format!("invalid value for `{key}`: {why}");
            match pos {
                Some(p) => ConfigError::at(p, message),
                None => ConfigError::bare(message),
            }
        })
    }

    /// Domain error from the library, attributed to `key`.
    fn reject(&self, key: &str, e: impl fmt::Display) -> ConfigError {
        let message = format!("invalid value for `{key}`: {e}");
        match self.raw.entries.get(key) {
            Some(entry) => ConfigError::at(&entry.value_at, message),
            None => ConfigError::bare(message),
        }
    }
}

fn positive(x: f64) -> Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn one_int(s: &str) -> Result<u32, String> {
    s.trim().parse().map_err(|_| format!("expected one non-negative integer, got `{}`", s.trim()))
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let command_entry = raw.entries.get("command").ok_or_else(|| ConfigError::bare("no command given"))?;
        let command: Command =
            command_entry.value.parse().map_err(|e: String| ConfigError::at(&command_entry.value_at, e))?;
        let keys = command.keys();
        for (k, e) in &raw.entries {
            if !GLOBAL_KEYS.contains(&k.as_str()) && !keys.iter().any(|(name, _)| name == k) {
                let allowed: Vec<&str> = keys.iter().map(|(n, _)| *n).collect();
                return Err(ConfigError::at(
                    &e.key_at,
                    format!("unknown key `{k}` for `{command}` (accepted: {})", allowed.join(", ")),
                ));
            }
        }
        let f = Fields { raw, defaults: keys.iter().copied().collect() };
        let mut params = BTreeMap::new();
        for (k, _) in keys {
            let (text, _) = f.text(k)?;
            params.insert(k.to_string(), text);
        }

        let input = || f.get("input", |s| s.parse::<InputState<f64>>().map_err(|e| e.to_string()));
        let method = || f.get("method", |s| s.parse::<Method>().map_err(|e| e.to_string()));
        let omega = || f.get("omega", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()).and_then(positive));
        let temperature = || f.get("temperature", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()));
        let check_qst = |task: QstTask<f64>, key: &str| task.validate().map(|_| task).map_err(|e| f.reject(key, e));
        let check_ms = |ms: &[u32], pulse: fn(u32) -> Result<bosonic_core::PulseParams64, CoreError>| {
            for &m in ms {
                pulse(m).map_err(|e| f.reject("m", e))?;
            }
            Ok::<_, ConfigError>(())
        };
        let nonempty = |v: Vec<u32>| if v.is_empty() { Err("list is empty".to_string()) } else { Ok(v) };

        let job = match command {
            Command::Qst | Command::Wigner => {
                let mut task = QstTask::new(input()?, f.get("m", one_int)?)
                    .with_method(method()?)
                    .with_temperature(temperature()?)
                    .with_correction(f.get("correction", parse_bool)?);
                task.omega = omega()?;
                if command == Command::Qst {
                    task = task.with_jitter(f.get("jitter", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()))?);
                }
                // Rejections name the key the user is most likely to change.
                let key = if task.apply_correction && task.method == Method::Rwa { "correction" } else { "m" };
                let task = check_qst(task, key)?;
                if command == Command::Qst {
                    Job::Qst(task)
                } else {
                    let xmax =
                        f.get("xmax", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()).and_then(positive))?;
                    let points = f.get("points", |s| match s.trim().parse::<usize>() {
                        Ok(n) if n >= 2 => Ok(n),
                        _ => Err(format!("expected an integer >= 2, got `{}`", s.trim())),
                    })?;
                    Job::Wigner { task, xmax, points }
                }
            }
            Command::SweepM => {
                let (input, methods, omega) = (input()?, f.get("method", parse_methods)?, omega()?);
                let ms = f.get("m", |s| parse_int_list(s).and_then(nonempty))?;
                check_ms(&ms, qst_pulse::<f64>)?;
                input.validate().map_err(|e| f.reject("input", e))?;
                Job::SweepM { input, ms, methods, omega }
            }
            Command::SweepTemp => {
                let (input, m, method, omega) = (input()?, f.get("m", one_int)?, method()?, omega()?);
                let temperatures = f.get("temperature", parse_float_list)?;
                for &t in &temperatures {
                    let mut task = QstTask::new(input, m).with_method(method).with_temperature(t);
                    task.omega = omega;
                    let key = if t < 0.0 { "temperature" } else { "m" };
                    check_qst(task, key)?;
                }
                Job::SweepTemp { input, m, temperatures, method, omega }
            }
            Command::SweepPhase => {
                let alpha =
                    f.get("alpha", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()).and_then(positive))?;
                let (m, method, omega) = (f.get("m", one_int)?, method()?, omega()?);
                let phases = f.get("phases", |s| match s.trim().parse::<usize>() {
                    Ok(n) if n >= 4 => Ok(n),
                    _ => Err(format!("expected a point count >= 4, got `{}`", s.trim())),
                })?;
                check_ms(&[m], qst_pulse::<f64>)?;
                Job::SweepPhase { alpha, m, phases, method, omega }
            }
            Command::SweepJitter => {
                let (input, omega) = (input()?, omega()?);
                let ms = f.get("m", |s| parse_int_list(s).and_then(nonempty))?;
                let jitters = f.get("jitter", parse_float_list)?;
                for &m in &ms {
                    for &j in &jitters {
                        let mut task = QstTask::new(input, m).with_jitter(j);
                        task.omega = omega;
                        check_qst(task, if j < 0.0 { "jitter" } else { "m" })?;
                    }
                }
                Job::SweepJitter { input, ms, jitters, omega }
            }
            Command::WState => {
                let amplitudes = f.get("amplitudes", parse_float_list)?;
                let receiver =
                    f.get("receiver_weights", |s| if s.is_empty() { Ok(Vec::new()) } else { parse_float_list(s) })?;
                let receiver = if receiver.is_empty() { amplitudes.clone() } else { receiver };
                let spec = WTransferSpec::new(amplitudes, receiver).map_err(|e| f.reject("amplitudes", e))?;
                let m = f.get("m", one_int)?;
                check_ms(&[m], qst_pulse::<f64>)?;
                let channel_fock = f.get("channel_fock", |s| s.trim().parse::<usize>().map_err(|e| e.to_string()))?;
                Job::WState { spec, m, channel_fock }
            }
            Command::Ep => {
                let weights = f.get("k", parse_float_list)?;
                let weights = CouplingWeights::new(weights).map_err(|e| f.reject("k", e))?;
                if weights.len() < 2 {
                    return Err(f.reject("k", "entanglement preparation needs at least two nodes"));
                }
                let ms = f.get("m", |s| parse_int_list(s).and_then(nonempty))?;
                check_ms(&ms, ep_pulse::<f64>)?;
                let seed = f.get("seed", |s| match s.trim().parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n),
                    _ => Err(format!("expected an integer >= 1, got `{}`", s.trim())),
                })?;
                Job::Ep { weights, ms, methods: f.get("method", parse_methods)?, seed, omega: omega()? }
            }
            Command::Tradeoff => {
                let e_tol = f.get("e_tol", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()))?;
                let mean_n = f.get("mean_n", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()))?;
                bosonic_core::pulsedesign::speed_limit(e_tol, mean_n).map_err(|e| f.reject("e_tol", e))?;
                let ms = f.get("m", |s| if s.is_empty() { Ok(Vec::new()) } else { parse_int_list(s) })?;
                check_ms(&ms, qst_pulse::<f64>)?;
                let verify = f.get("verify", parse_bool)?;
                if verify && (mean_n.fract() != 0.0 || mean_n < 1.0) {
                    return Err(f.reject(
                        "verify",
                        "simulation checks use the Fock state |mean_n⟩, so mean_n must be a positive integer",
                    ));
                }
                Job::Tradeoff { e_tol, mean_n, ms, verify }
            }
        };

        let global = |key: &str| raw.entries.get(key);
        let trunc = global("trunc")
            .map(|e| {
                e.value
                    .parse::<TruncSpec>()
                    .map_err(|why| ConfigError::at(&e.value_at, format!("invalid value for `trunc`: {why}")))
            })
            .transpose()?;
        let dt = global("dt")
            .map(|e| {
                e.value
                    .trim()
                    .parse::<f64>()
                    .map_err(|x| x.to_string())
                    .and_then(positive)
                    .map_err(|why| ConfigError::at(&e.value_at, format!("invalid value for `dt`: {why}")))
            })
            .transpose()?;
        let workers = global("workers")
            .map(|e| match e.value.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(ConfigError::at(&e.value_at, "invalid value for `workers`: expected an integer >= 1")),
            })
            .transpose()?;
        Ok(Self { command, params, job, output_dir: global("out").map(|e| e.value.clone()), trunc, dt, workers })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, ConfigError> {
        let mut raw = RawConfig::default();
        raw.add_args(&args.iter().map(|s| s.to_string()).collect::<Vec<_>>(), 1)?;
        RunConfig::from_raw(&raw)
    }

    #[test]
    fn minimal_qst_gets_defaults() {
        let c = parse(&["command=qst", "input=fock:1", "m=8"]).unwrap();
        let Job::Qst(task) = c.job else { panic!() };
        assert_eq!(
            (task.m, task.method, task.channel_temp, task.jitter, task.omega),
            (8, Method::Optimized, 0.0, 0.0, 1.0)
        );
        assert!(!task.apply_correction);
        assert_eq!(c.params["method"], "optimized");
    }

    #[test]
    fn lists_and_grids() {
        assert_eq!(parse_int_list("2..4,9").unwrap(), vec![2, 3, 4, 9]);
        assert!(parse_int_list("5..3").is_err());
        assert_eq!(parse_float_list("0..1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_float_list("0..1").is_err());
        assert!(parse_float_list("nan").is_err());
    }

    #[test]
    fn file_errors_carry_line_and_column() {
        let e = RawConfig::parse("command = qst\n  input fock:1\n", "run.cfg").unwrap_err();
        assert_eq!(e.at.unwrap(), Position { origin: "run.cfg".into(), line: 2, col: 3 });
        let e = RawConfig::parse("m = 5\nm = 6\n", "run.cfg").unwrap_err();
        assert!(e.message.contains("duplicate"), "{e}");
        assert_eq!(e.at.unwrap().line, 2);
        let raw = RawConfig::parse("command = qst # comment\ninput = fock:1\nm =   eight\n", "run.cfg").unwrap();
        let e = RunConfig::from_raw(&raw).unwrap_err();
        assert_eq!(e.at.clone().unwrap(), Position { origin: "run.cfg".into(), line: 3, col: 7 });
        assert!(e.message.contains("`m`"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse(&["command=qst", "input=fock:1", "m=8", "colour=red"]).unwrap_err();
        assert!(e.message.contains("unknown key `colour`"), "{e}");
    }

    #[test]
    fn domain_rules() {
        let e = parse(&["command=ep", "m=1"]).unwrap_err();
        assert!(e.message.contains("unbounded potential"), "{e}");
        let e = parse(&["command=qst", "input=fock:1", "m=8", "method=rwa", "apply_correction=true"]).unwrap_err();
        assert!(e.message.contains("`correction`") && e.message.contains("optimized"), "{e}");
        assert!(parse(&["command=qst", "input=fock:1", "m=8", "temperature=-1"]).is_err());
        assert!(parse(&["command=tradeoff", "mean_n=1.5", "verify=true"]).is_err());
    }
}
