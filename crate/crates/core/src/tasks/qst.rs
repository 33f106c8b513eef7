use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::analytic::{CouplingWeights, Frame, SystemConfig};
use crate::error::{Error, Result};
use crate::fockspace::{
    apply_local_rotation, evolve_checkpoints, fidelity, linspace, network_labels, partial_trace, thermal_weights,
    truncation_tail, FockBasis, ModeState, PairRotation, Representation, TruncatedState,
};
use crate::linalg::svd;
use crate::pulsedesign::{qst_pulse, rotation_angle, rwa_pulse, PulseParams};
use crate::scalar::{cis, czero, Real, C};

use super::input::InputState;
use super::table::{fmt_float, Table};
use super::truncation::{
    auto_dims, grow, peak_occupations, safety_factor, Moments, Numerics, Reduction, Truncation, MAX_BRANCH_TAIL,
    MAX_GROWTH_RETRIES,
};
use super::Method;

/// Durations sampled across `[τ−Δτ, τ+Δτ]`: 21 interior points plus both ends.
pub const JITTER_SAMPLES: usize = 23;

const SENDER: usize = 0;
const RECEIVER: usize = 1;
const CHANNEL: usize = 2;

/// Schmidt components of the rotated input below this are dropped.
const SCHMIDT_CUTOFF: f64 = 1e-9;
/// Populations below this are skipped when rotating back to `a1, a2`.
const NEGLIGIBLE: f64 = 1e-18;
const UNITED_LABELS: [&str; 2] = ["a_united", "c"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QstTask<T> {
    pub input: InputState<T>,
    pub m: u32,
    /// Channel temperature in units of ω (`k_B = ħ = 1`).
    pub channel_temp: T,
    /// Half-width Δτ of the duration scan, in units of 1/ω.
    pub jitter: T,
    pub apply_correction: bool,
    pub method: Method,
    pub omega: T,
}

impl<T: Real> QstTask<T> {
    pub fn new(input: InputState<T>, m: u32) -> Self {
        Self {
            input,
            m,
            channel_temp: T::zero(),
            jitter: T::zero(),
            apply_correction: false,
            method: Method::Optimized,
            omega: T::one(),
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_temperature(mut self, t: T) -> Self {
        self.channel_temp = t;
        self
    }

    pub fn with_jitter(mut self, dtau: T) -> Self {
        self.jitter = dtau;
        self
    }

    pub fn with_correction(mut self, on: bool) -> Self {
        self.apply_correction = on;
        self
    }

    /// Pulse used by this task: `qst_pulse(m)`, or the rotating-wave duration
    /// `g'τ = π` at the same `g'`.
    pub fn pulse(&self) -> Result<PulseParams<T>> {
        let opt = qst_pulse(self.m)?;
        match self.method {
            Method::Optimized => Ok(opt),
            Method::Rwa => rwa_pulse(opt.g_prime),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.input.validate()?;
        if !(self.channel_temp >= T::zero()) || !self.channel_temp.is_finite() {
            return Err(Error::param("channel_temp", "must be finite and non-negative"));
        }
        if !(self.jitter >= T::zero()) || !self.jitter.is_finite() {
            return Err(Error::param("jitter", "must be finite and non-negative"));
        }
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(Error::param("omega", "must be positive"));
        }
        if self.apply_correction && self.method == Method::Rwa {
            return Err(Error::param(
                "apply_correction",
                "the local phase correction is defined for optimized pulses only",
            ));
        }
        let tau = self.pulse()?.duration(self.omega);
        if self.jitter >= tau {
            return Err(Error::param("jitter", "scan window would start before t = 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QstRecord<T> {
    pub input: String,
    pub m: u32,
    pub method: Method,
    pub temperature: T,
    pub jitter: T,
    pub apply_correction: bool,
    /// At the nominal duration τ.
    pub fidelity: T,
    pub infidelity: T,
    /// Largest infidelity over the jitter scan (equals `infidelity` without jitter).
    pub worst_infidelity: T,
    /// Residual rotation angle of the optimized pulse.
    pub theta_r: Option<T>,
    pub pulse: PulseParams<T>,
    /// Number of channel Fock branches simulated.
    pub branches: usize,
    /// Largest cutoff used per mode over all branches: `(a1, a2, c)`, or
    /// `(ā, input, c)` with the united reduction.
    pub dims: Vec<usize>,
    /// Largest top-level population seen over branches and checkpoints.
    pub max_tail: f64,
    /// `Some` for `Truncation::Converged`.
    pub converged: Option<bool>,
    pub wall_time: f64,
}

/// Record plus the receiver state at the nominal duration (after the phase
/// correction when requested) and the target it was scored against.
#[derive(Debug, Clone)]
pub struct QstOutcome<T> {
    pub record: QstRecord<T>,
    pub receiver: TruncatedState<T>,
    pub target: TruncatedState<T>,
    /// `(duration, infidelity)` across the jitter scan.
    pub scan: Vec<(T, T)>,
}

/// Receiver target with the transfer sign absorbed: `ψ_n → (−1)ⁿ ψ_n`.
pub fn transfer_target<T: Real>(input: &InputState<T>, d: usize) -> Result<TruncatedState<T>> {
    let mut ket = input.ket(d)?;
    for (n, z) in ket.iter_mut().enumerate() {
        if n % 2 == 1 {
            *z = -*z;
        }
    }
    TruncatedState::pure(FockBasis::new(vec![d], vec![network_labels(2)[RECEIVER].clone()])?, ket)
}

struct BranchResult<T> {
    rhos: Vec<Array2<C<T>>>,
    dims: Vec<usize>,
    tail: f64,
}

struct Plan<'a, T> {
    task: &'a QstTask<T>,
    cfg: SystemConfig<T>,
    times: Vec<T>,
    moments: Moments<T>,
    numerics: &'a Numerics<T>,
}

impl<T: Real> Plan<'_, T> {
    fn branch_limit(&self, weight: T) -> f64 {
        let base = self.numerics.evolve.tail_limit;
        let scaled = self.numerics.thermal_budget / weight.to_f64_lossy();
        if scaled > base {
            scaled.min(MAX_BRANCH_TAIL).max(base)
        } else {
            base
        }
    }

    fn initial_dims(&self, n_c: usize, limit: f64, scale: usize) -> Result<Vec<usize>> {
        match self.numerics.truncation {
            Truncation::Fixed(d) => Ok(vec![d; 3]),
            Truncation::Auto | Truncation::Converged => {
                let t_end = *self.times.last().expect("at least one checkpoint");
                let moments = [self.moments, Moments::fock(0), Moments::fock(n_c)];
                let peaks = peak_occupations(&self.cfg, t_end, &moments)?;
                let k = safety_factor(self.numerics.evolve.tail_limit, limit);
                let floors = [self.task.input.min_dim(), 2, n_c + 2];
                Ok(auto_dims(&peaks, k, &floors).into_iter().map(|d| d * scale).collect())
            }
        }
    }

    fn simulate(&self, n_c: usize, weight: T, scale: usize) -> Result<BranchResult<T>> {
        if self.numerics.reduction == Reduction::United {
            return self.simulate_united(n_c, weight, scale);
        }
        let limit = self.branch_limit(weight);
        let mut dims = self.initial_dims(n_c, limit, scale)?;
        let adaptive = !matches!(self.numerics.truncation, Truncation::Fixed(_));
        let mut opts = self.numerics.evolve;
        opts.tail_limit = limit;
        let mut attempt = 0;
        loop {
            let state = TruncatedState::product(
                &[
                    self.task.input.mode_state(dims[SENDER])?,
                    ModeState::vacuum(dims[RECEIVER])?,
                    ModeState::fock(n_c, dims[CHANNEL])?,
                ],
                Some(network_labels(2)),
            )?;
            match evolve_checkpoints(&state, &self.cfg, T::zero(), &self.times, &opts) {
                Ok(states) => {
                    let mut tail = 0.0f64;
                    let mut rhos = Vec::with_capacity(states.len());
                    for s in &states {
                        let psi = s.as_pure().expect("pure branch");
                        tail =
                            tail.max(truncation_tail(s.basis(), &[(T::one(), psi.as_slice().expect("contiguous"))]).1);
                        rhos.push(partial_trace(s, &[RECEIVER])?.to_density());
                    }
                    return Ok(BranchResult { rhos, dims, tail });
                }
                Err(Error::NonConvergence { mode, .. }) if adaptive && attempt < MAX_GROWTH_RETRIES => {
                    let j = network_labels(2).iter().position(|l| *l == mode).expect("known mode label");
                    dims[j] = grow(dims[j]);
                    attempt += 1;
                    log::debug!("branch n_c={n_c}: enlarging {mode} to {}", dims[j]);
                }
                Err(e) => return Err(e),
            }
        }
    }
}

impl<T: Real> Plan<'_, T> {
    /// Cutoffs `(ā, input, c)` for the united reduction.
    fn united_dims(&self, n_c: usize, limit: f64, scale: usize, w1: T) -> Result<Vec<usize>> {
        match self.numerics.truncation {
            Truncation::Fixed(d) => Ok(vec![d; 3]),
            Truncation::Auto | Truncation::Converged => {
                let t_end = *self.times.last().expect("at least one checkpoint");
                let m = self.moments;
                let w_sq = w1 * w1;
                let united = Moments { mean: m.mean * w1, number: m.number * w_sq, square: m.square * w_sq };
                let cfg = SystemConfig::with_effective_coupling(
                    self.cfg.omega,
                    self.cfg.g_prime(),
                    CouplingWeights::uniform(1)?,
                )?;
                let peaks = peak_occupations(&cfg, t_end, &[united, Moments::fock(n_c)])?;
                let k = safety_factor(self.numerics.evolve.tail_limit, limit);
                let d_in = auto_dims(&[m.number], k, &[self.task.input.min_dim()])[0] * scale;
                let d = auto_dims(&peaks, k, &[d_in, n_c + 2]);
                Ok(vec![d[0] * scale, d_in, d[1] * scale])
            }
        }
    }

    fn simulate_united(&self, n_c: usize, weight: T, scale: usize) -> Result<BranchResult<T>> {
        let limit = self.branch_limit(weight);
        let w = self.cfg.weights.unit();
        let (w1, w2) = (w[SENDER], w[RECEIVER]);
        let mut dims = self.united_dims(n_c, limit, scale, w1)?;
        let d_in = dims[1];
        let cfg =
            SystemConfig::with_effective_coupling(self.cfg.omega, self.cfg.g_prime(), CouplingWeights::uniform(1)?)?;

        // |ψ⟩_{a1}|0⟩_{a2} = Σ_s σ_s |u_s⟩_ā |v_s⟩_dark
        let psi = self.task.input.ket(d_in)?;
        let x = Array2::from_shape_fn((d_in, 1), |(n, _)| psi[n]);
        let z = PairRotation::new(w1, w2, d_in - 1)?.to_rotated(&x)?;
        let parts: Vec<_> = svd(&z).into_iter().filter(|(sigma, _, _)| *sigma > SCHMIDT_CUTOFF).collect();

        let adaptive = !matches!(self.numerics.truncation, Truncation::Fixed(_));
        let mut opts = self.numerics.evolve;
        opts.tail_limit = limit;
        let mut attempt = 0;
        let states = loop {
            let (d_u, d_c) = (dims[0], dims[2]);
            let basis = FockBasis::new(vec![d_u, d_c], UNITED_LABELS.iter().map(|l| l.to_string()).collect())?;
            let branches = parts
                .iter()
                .map(|(sigma, u, _)| {
                    let mut v = ndarray::Array1::from_elem(d_u * d_c, czero());
                    for (p, a) in u.iter().enumerate() {
                        v[p * d_c + n_c] = *a;
                    }
                    (T::lit(sigma * sigma), v)
                })
                .collect();
            let state = TruncatedState::from_parts(basis, Representation::Mixture(branches));
            match evolve_checkpoints(&state, &cfg, T::zero(), &self.times, &opts) {
                Ok(states) => break states,
                Err(Error::NonConvergence { mode, .. }) if adaptive && attempt < MAX_GROWTH_RETRIES => {
                    let j = if mode == UNITED_LABELS[0] { 0 } else { 2 };
                    dims[j] = grow(dims[j]);
                    attempt += 1;
                    log::debug!("branch n_c={n_c}: enlarging {mode} to {}", dims[j]);
                }
                Err(e) => return Err(e),
            }
        };

        let (d_u, d_c) = (dims[0], dims[2]);
        let rotation = PairRotation::new(w1, w2, d_u + d_in - 2)?;
        let mut tail = 0.0f64;
        let mut rhos = Vec::with_capacity(states.len());
        for (state, &t) in states.iter().zip(&self.times) {
            let evolved = state.branches();
            let refs: Vec<(T, &[C<T>])> =
                evolved.iter().map(|(w, v)| (*w, v.as_slice().expect("contiguous"))).collect();
            tail = tail.max(truncation_tail(state.basis(), &refs).1);
            let dark: Vec<ndarray::Array1<C<T>>> = parts
                .iter()
                .map(|(_, _, v)| match opts.frame {
                    Frame::Interaction => v.clone(),
                    Frame::Schrodinger => ndarray::Array1::from_shape_fn(v.len(), |q| {
                        v[q] * cis(-self.cfg.omega * t * T::from_usize_lossy(q))
                    }),
                })
                .collect();
            rhos.push(receiver_from_united(&rotation, &parts, &evolved, &dark, d_u, d_c, d_in)?);
        }
        Ok(BranchResult { rhos, dims, tail })
    }
}

/// `Tr_{a1,c}` of `Σ_s σ_s |Φ_s⟩_{ā,c} |v_s⟩_dark` after rotating back to `a1, a2`.
fn receiver_from_united<T: Real>(
    rotation: &PairRotation<T>,
    parts: &[crate::linalg::SingularTriple<T>],
    evolved: &[(T, ndarray::Array1<C<T>>)],
    dark: &[ndarray::Array1<C<T>>],
    d_u: usize,
    d_c: usize,
    d_in: usize,
) -> Result<Array2<C<T>>> {
    let sigmas: Vec<T> = parts.iter().map(|(s, _, _)| T::lit(*s)).collect();
    let mut rows = vec![0.0f64; d_u];
    let mut levels = vec![0.0f64; d_c];
    for ((_, phi), s) in evolved.iter().zip(&sigmas) {
        let w = (*s * *s).to_f64_lossy();
        for (idx, a) in phi.iter().enumerate() {
            let p = w * a.norm_sqr().to_f64_lossy();
            rows[idx / d_c] += p;
            levels[idx % d_c] += p;
        }
    }
    let p_top = rows.iter().rposition(|&r| r > NEGLIGIBLE).unwrap_or(0);
    let n_top = p_top + d_in - 1;
    let mut rho = Array2::from_elem((n_top + 1, n_top + 1), czero::<T>());
    for (l, _) in levels.iter().enumerate().filter(|(_, &p)| p > NEGLIGIBLE) {
        let mut m = Array2::from_elem((p_top + 1, d_in), czero::<T>());
        for (((_, phi), s), v) in evolved.iter().zip(&sigmas).zip(dark) {
            for p in 0..=p_top {
                let a = phi[p * d_c + l] * *s;
                if a == czero() {
                    continue;
                }
                for (q, b) in v.iter().enumerate() {
                    m[[p, q]] += a * *b;
                }
            }
        }
        let x = rotation.from_rotated(&m)?;
        rho += &x.t().dot(&x.mapv(|z| z.conj()));
    }
    let keep = (0..=n_top).rev().find(|&i| rho[[i, i]].re.to_f64_lossy() > NEGLIGIBLE).unwrap_or(0).max(1) + 1;
    Ok(rho.slice(ndarray::s![..keep, ..keep]).to_owned())
}

struct Pass<T> {
    receivers: Vec<Array2<C<T>>>,
    dims: Vec<usize>,
    tail: f64,
    branches: usize,
}

fn run_pass<T: Real>(plan: &Plan<'_, T>, channel: &[(T, usize)], scale: usize) -> Result<Pass<T>> {
    let results: Vec<BranchResult<T>> =
        channel.par_iter().map(|&(w, n_c)| plan.simulate(n_c, w, scale)).collect::<Result<_>>()?;
    let d_max = results.iter().flat_map(|r| r.rhos.iter().map(|rho| rho.nrows())).max().unwrap_or(2);
    let mut receivers = vec![Array2::from_elem((d_max, d_max), czero::<T>()); plan.times.len()];
    let mut dims = vec![0usize; 3];
    let mut tail = 0.0f64;
    for ((w, _), r) in channel.iter().zip(&results) {
        for (acc, rho) in receivers.iter_mut().zip(&r.rhos) {
            let d = rho.nrows();
            acc.slice_mut(ndarray::s![..d, ..d]).scaled_add(C::new(*w, T::zero()), rho);
        }
        for (a, b) in dims.iter_mut().zip(&r.dims) {
            *a = (*a).max(*b);
        }
        tail = tail.max(r.tail);
    }
    Ok(Pass { receivers, dims, tail, branches: channel.len() })
}

fn score<T: Real>(
    task: &QstTask<T>,
    theta_r: Option<T>,
    rho: &Array2<C<T>>,
) -> Result<(TruncatedState<T>, TruncatedState<T>, T)> {
    let d = rho.nrows().max(task.input.min_dim());
    let mut padded = Array2::from_elem((d, d), czero::<T>());
    padded.slice_mut(ndarray::s![..rho.nrows(), ..rho.ncols()]).assign(rho);
    let basis = FockBasis::new(vec![d], vec![network_labels(2)[RECEIVER].clone()])?;
    // Evolved states carry the integrator's norm drift; no renormalization.
    let mut receiver = TruncatedState::from_parts(basis, Representation::Density(padded));
    if task.apply_correction {
        receiver = apply_local_rotation(&receiver, 0, theta_r.expect("validated: optimized pulse"))?;
    }
    let target = transfer_target(&task.input, d)?;
    let f = fidelity(&target, &receiver)?;
    Ok((receiver, target, f))
}

/// Transfer `|ψ, 0, χ_c⟩ → |·, ψ', ·⟩` from `a1` to `a2` and score the receiver.
pub fn run_qst_outcome<T: Real>(task: &QstTask<T>, numerics: &Numerics<T>) -> Result<QstOutcome<T>> {
    let start = Instant::now();
    task.validate()?;
    let pulse = task.pulse()?;
    let cfg = pulse.config(task.omega, CouplingWeights::uniform(2)?)?;
    let tau = pulse.duration(task.omega);
    let (times, nominal) = if task.jitter.is_zero() {
        (vec![tau], 0)
    } else {
        (linspace(tau - task.jitter, tau + task.jitter, JITTER_SAMPLES), JITTER_SAMPLES / 2)
    };
    let theta_r = (task.method == Method::Optimized).then(|| rotation_angle(&pulse));
    let channel: Vec<(T, usize)> =
        thermal_weights(task.channel_temp, task.omega)?.into_iter().enumerate().map(|(n, w)| (w, n)).collect();
    let plan = Plan { task, cfg, times, moments: task.input.moments()?, numerics };

    let infidelities = |pass: &Pass<T>| -> Result<Vec<T>> {
        pass.receivers.iter().map(|rho| Ok(T::one() - score(task, theta_r, rho)?.2)).collect()
    };
    let mut pass = run_pass(&plan, &channel, 1)?;
    let mut converged = None;
    if numerics.truncation == Truncation::Converged {
        let mut prev = infidelities(&pass)?;
        converged = Some(false);
        let mut scale = 1;
        for _ in 0..numerics.max_doublings {
            scale *= 2;
            let next = run_pass(&plan, &channel, scale)?;
            let cur = infidelities(&next)?;
            let change = prev.iter().zip(&cur).fold(0.0f64, |a, (p, c)| a.max((*p - *c).abs().to_f64_lossy()));
            pass = next;
            prev = cur;
            if change < numerics.convergence_tol {
                converged = Some(true);
                break;
            }
        }
        if converged == Some(false) {
            log::warn!("{}: observable still changing after {} doublings", task.input, numerics.max_doublings);
        }
    }

    let mut scan = Vec::with_capacity(plan.times.len());
    let mut nominal_scored = None;
    for (k, rho) in pass.receivers.iter().enumerate() {
        let (receiver, target, f) = score(task, theta_r, rho)?;
        scan.push((plan.times[k], T::one() - f));
        if k == nominal {
            nominal_scored = Some((receiver, target, f));
        }
    }
    let (receiver, target, f) = nominal_scored.expect("nominal checkpoint present");
    let worst = scan.iter().fold(T::one() - f, |a, &(_, x)| a.max(x));
    let record = QstRecord {
        input: task.input.to_string(),
        m: task.m,
        method: task.method,
        temperature: task.channel_temp,
        jitter: task.jitter,
        apply_correction: task.apply_correction,
        fidelity: f,
        infidelity: T::one() - f,
        worst_infidelity: worst,
        theta_r,
        pulse,
        branches: pass.branches,
        dims: pass.dims,
        max_tail: pass.tail,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(QstOutcome { record, receiver, target, scan })
}

pub fn run_qst<T: Real>(task: &QstTask<T>, numerics: &Numerics<T>) -> Result<QstRecord<T>> {
    Ok(run_qst_outcome(task, numerics)?.record)
}

/// One run per `(m, method)`, ordered by `m` then by the order of `methods`.
pub fn sweep_m<T: Real>(
    input: &InputState<T>,
    ms: &[u32],
    methods: &[Method],
    numerics: &Numerics<T>,
) -> Result<Vec<QstRecord<T>>> {
    let tasks: Vec<QstTask<T>> =
        ms.iter().flat_map(|&m| methods.iter().map(move |&me| QstTask::new(*input, m).with_method(me))).collect();
    tasks.par_iter().map(|t| run_qst(t, numerics)).collect()
}

pub fn sweep_temp<T: Real>(
    input: &InputState<T>,
    m: u32,
    temperatures: &[T],
    method: Method,
    numerics: &Numerics<T>,
) -> Result<Vec<QstRecord<T>>> {
    temperatures
        .par_iter()
        .map(|&temp| run_qst(&QstTask::new(*input, m).with_method(method).with_temperature(temp), numerics))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep<T> {
    pub phases: Vec<T>,
    pub records: Vec<QstRecord<T>>,
    /// `max − min` of the infidelity over the grid.
    pub spread: T,
    /// Harmonic of φ with the largest non-constant Fourier amplitude; only for
    /// uniform grids covering one period `[φ₀, φ₀ + 2π)`.
    pub dominant_frequency: Option<usize>,
}

fn uniform_period<T: Real>(phases: &[T]) -> bool {
    let n = phases.len();
    n >= 4
        && phases.iter().enumerate().all(|(k, &p)| {
            let expect = phases[0] + T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(n);
            (p - expect).abs() < T::lit(1e-9)
        })
}

/// Index of the largest `|X_k|`, `1 ≤ k ≤ n/2`, of the discrete Fourier transform.
pub fn dominant_harmonic(values: &[f64]) -> usize {
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
        values.iter().map(|&v| rustfft::num_complex::Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    (1..=values.len() / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap_or(0)
}

/// Coherent input `|α|e^{iφ}` over a grid of phases.
pub fn sweep_phase<T: Real>(
    magnitude: T,
    m: u32,
    phases: &[T],
    method: Method,
    numerics: &Numerics<T>,
) -> Result<PhaseSweep<T>> {
    if phases.is_empty() {
        return Err(Error::param("phases", "grid is empty"));
    }
    let records: Vec<QstRecord<T>> = phases
        .par_iter()
        .map(|&phi| run_qst(&QstTask::new(InputState::coherent_polar(magnitude, phi), m).with_method(method), numerics))
        .collect::<Result<_>>()?;
    let inf: Vec<f64> = records.iter().map(|r| r.infidelity.to_f64_lossy()).collect();
    let spread =
        inf.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - inf.iter().cloned().fold(f64::INFINITY, f64::min);
    let dominant_frequency = uniform_period(phases).then(|| dominant_harmonic(&inf));
    Ok(PhaseSweep { phases: phases.to_vec(), records, spread: T::lit(spread), dominant_frequency })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterRow<T> {
    pub m: u32,
    pub delta_tau: T,
    pub tau: T,
    pub nominal: T,
    pub worst: T,
    pub increase: T,
}

/// Worst-case infidelity of the optimized pulse over durations `[τ−Δτ, τ+Δτ]`.
pub fn sweep_jitter<T: Real>(
    input: &InputState<T>,
    ms: &[u32],
    delta_taus: &[T],
    numerics: &Numerics<T>,
) -> Result<Vec<JitterRow<T>>> {
    let cases: Vec<(u32, T)> = ms.iter().flat_map(|&m| delta_taus.iter().map(move |&d| (m, d))).collect();
    cases
        .par_iter()
        .map(|&(m, dtau)| {
            let r = run_qst(&QstTask::new(*input, m).with_jitter(dtau), numerics)?;
            Ok(JitterRow {
                m,
                delta_tau: dtau,
                tau: r.pulse.tau,
                nominal: r.infidelity,
                worst: r.worst_infidelity,
                increase: r.worst_infidelity - r.infidelity,
            })
        })
        .collect()
}

impl<T: Real> QstRecord<T> {
    pub fn table(records: &[Self]) -> Table {
        let mut t = Table::new(&[
            "input",
            "method",
            "m",
            "tau [1/omega]",
            "g_prime [omega]",
            "temperature [omega]",
            "jitter [1/omega]",
            "correction",
            "fidelity",
            "infidelity",
            "worst_infidelity",
            "theta_r [rad]",
        ]);
        for r in records {
            t.push(vec![
                r.input.clone(),
                r.method.as_str().to_string(),
                r.m.to_string(),
                fmt_float(r.pulse.tau.to_f64_lossy()),
                fmt_float(r.pulse.g_prime.to_f64_lossy()),
                fmt_float(r.temperature.to_f64_lossy()),
                fmt_float(r.jitter.to_f64_lossy()),
                r.apply_correction.to_string(),
                fmt_float(r.fidelity.to_f64_lossy()),
                fmt_float(r.infidelity.to_f64_lossy()),
                fmt_float(r.worst_infidelity.to_f64_lossy()),
                r.theta_r.map_or(String::new(), |x| fmt_float(x.to_f64_lossy())),
            ]);
        }
        t
    }
}

impl<T: Real> PhaseSweep<T> {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["phi [rad]", "method", "m", "infidelity"]);
        for (phi, r) in self.phases.iter().zip(&self.records) {
            t.push(vec![
                fmt_float(phi.to_f64_lossy()),
                r.method.as_str().to_string(),
                r.m.to_string(),
                fmt_float(r.infidelity.to_f64_lossy()),
            ]);
        }
        t
    }
}

impl<T: Real> JitterRow<T> {
    pub fn table(rows: &[Self]) -> Table {
        let mut t = Table::new(&[
            "m",
            "delta_tau [1/omega]",
            "tau [1/omega]",
            "nominal_infidelity",
            "worst_infidelity",
            "increase",
        ]);
        for r in rows {
            t.push(vec![
                r.m.to_string(),
                fmt_float(r.delta_tau.to_f64_lossy()),
                fmt_float(r.tau.to_f64_lossy()),
                fmt_float(r.nominal.to_f64_lossy()),
                fmt_float(r.worst.to_f64_lossy()),
                fmt_float(r.increase.to_f64_lossy()),
            ]);
        }
        t
    }
}
