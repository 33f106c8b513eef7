use std::time::Instant;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::analytic::CouplingWeights;
use crate::error::{Error, Result};
use crate::fockspace::{
    evolve_checkpoints, fidelity, log_negativity, partial_trace, truncation_tail, uniform_times, FockBasis, ModeState,
    TruncatedState,
};
use crate::pulsedesign::{ep_pulse, rwa_pulse, PulseParams};
use crate::scalar::{czero, real, Real};

use super::truncation::{auto_dims, grow, peak_occupations, Moments, Numerics, Truncation, MAX_GROWTH_RETRIES};
use super::Method;

/// Time samples of the negativity trace over `[0, τ]`, both ends included.
pub const NEGATIVITY_SAMPLES: usize = 200;

const RWA_NOTE: &str = "rotating-wave comparison: same g' as the optimized pulse, duration g'tau = pi/2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpTask<T> {
    pub weights: CouplingWeights<T>,
    pub m: u32,
    /// Fock level loaded into the channel; the nodes start in vacuum.
    pub seed: usize,
    pub method: Method,
    pub omega: T,
}

impl<T: Real> EpTask<T> {
    pub fn new(weights: CouplingWeights<T>, m: u32) -> Self {
        Self { weights, m, seed: 1, method: Method::Optimized, omega: T::one() }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// `ep_pulse(m)`, or the half exchange `g'τ = π/2` at the same `g'`.
    pub fn pulse(&self) -> Result<PulseParams<T>> {
        let opt = ep_pulse(self.m)?;
        match self.method {
            Method::Optimized => Ok(opt),
            Method::Rwa => {
                let mut p = rwa_pulse(opt.g_prime)?;
                p.tau /= T::lit(2.0);
                p.theta = p.tau;
                Ok(p)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.weights.len() < 2 {
            return Err(Error::param("weights", "entanglement preparation needs at least two nodes"));
        }
        if self.seed == 0 {
            return Err(Error::param("seed", "the channel must hold at least one excitation"));
        }
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(Error::param("omega", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpRecord<T> {
    pub weights: Vec<T>,
    pub m: u32,
    pub method: Method,
    pub pulse: PulseParams<T>,
    /// `|⟨ψ_f, 0_c|ψ(τ)⟩|²`; the global phase drops out.
    pub fidelity: T,
    pub infidelity: T,
    /// Logarithmic negativity between `a1` and `a2` at `t = τ`.
    pub negativity: T,
    pub times: Vec<T>,
    pub negativity_trace: Vec<T>,
    pub dims: Vec<usize>,
    pub max_tail: f64,
    pub converged: Option<bool>,
    pub note: Option<String>,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct EpOutcome<T> {
    pub record: EpRecord<T>,
    /// Full state of nodes and channel at `t = τ`.
    pub final_state: TruncatedState<T>,
    pub target: TruncatedState<T>,
}

/// `(Σ_j w_j a_j†)^n / sqrt(n!) |0⟩ ⊗ |0_c⟩` with `w = k/‖k‖`.
fn target_state<T: Real>(basis: &FockBasis, weights: &CouplingWeights<T>, n: usize) -> Result<TruncatedState<T>> {
    let w = weights.unit();
    let nodes = w.len();
    let mut psi = Array1::from_elem(basis.total_dim(), czero::<T>());
    let ln_fact = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let mut occ = vec![0usize; nodes + 1];
    // Every composition of n over the nodes.
    fn visit(j: usize, left: usize, occ: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if j + 1 == occ.len() - 1 {
            occ[j] = left;
            f(occ);
            return;
        }
        for k in 0..=left {
            occ[j] = k;
            visit(j + 1, left - k, occ, f);
        }
    }
    let mut err = None;
    visit(0, n, &mut occ, &mut |o: &[usize]| {
        let mut amp = T::lit((0.5 * (ln_fact(n) - o[..nodes].iter().map(|&k| ln_fact(k)).sum::<f64>())).exp());
        for (wj, &k) in w.iter().zip(o) {
            amp *= wj.powi(k as i32);
        }
        if amp.is_zero() {
            return;
        }
        match basis.index_of(o) {
            Ok(i) => psi[i] = real(amp),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    TruncatedState::pure(basis.clone(), psi)
}

struct EpPass<T> {
    states: Vec<TruncatedState<T>>,
    dims: Vec<usize>,
    tail: f64,
}

fn ep_pass<T: Real>(
    task: &EpTask<T>,
    cfg: &crate::analytic::SystemConfig<T>,
    times: &[T],
    numerics: &Numerics<T>,
    scale: usize,
) -> Result<EpPass<T>> {
    let n = task.weights.len();
    let mut dims = match numerics.truncation {
        Truncation::Fixed(d) => vec![d; n + 1],
        Truncation::Auto | Truncation::Converged => {
            let mut moments = vec![Moments::fock(0); n];
            moments.push(Moments::fock(task.seed));
            let peaks = peak_occupations(cfg, *times.last().expect("samples"), &moments)?;
            let mut floors = vec![task.seed + 2; n];
            floors.push(task.seed + 2);
            auto_dims(&peaks, 6.0, &floors).into_iter().map(|d| d * scale).collect()
        }
    };
    let adaptive = !matches!(numerics.truncation, Truncation::Fixed(_));
    let labels = crate::fockspace::network_labels(n);
    let mut attempt = 0;
    loop {
        let mut factors = dims[..n].iter().map(|&d| ModeState::vacuum(d)).collect::<Result<Vec<_>>>()?;
        factors.push(ModeState::fock(task.seed, dims[n])?);
        let state = TruncatedState::product(&factors, Some(labels.clone()))?;
        match evolve_checkpoints(&state, cfg, T::zero(), times, &numerics.evolve) {
            Ok(states) => {
                let tail = states
                    .iter()
                    .map(|s| {
                        let psi = s.as_pure().expect("pure evolution");
                        truncation_tail(s.basis(), &[(T::one(), psi.as_slice().expect("contiguous"))]).1
                    })
                    .fold(0.0, f64::max);
                return Ok(EpPass { states, dims, tail });
            }
            Err(Error::NonConvergence { mode, .. }) if adaptive && attempt < MAX_GROWTH_RETRIES => {
                let j = labels.iter().position(|l| *l == mode).expect("known label");
                dims[j] = grow(dims[j]);
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn pair_negativity<T: Real>(s: &TruncatedState<T>) -> Result<T> {
    log_negativity(&partial_trace(s, &[0, 1])?)
}

/// Seed the channel, evolve under the EP pulse and track the `a1`–`a2`
/// negativity on `NEGATIVITY_SAMPLES` uniform times.
pub fn run_ep<T: Real>(task: &EpTask<T>, numerics: &Numerics<T>) -> Result<EpOutcome<T>> {
    let start = Instant::now();
    task.validate()?;
    let pulse = task.pulse()?;
    let cfg = pulse.config(task.omega, task.weights.clone())?;
    let times = uniform_times(pulse.duration(task.omega), NEGATIVITY_SAMPLES - 1);

    let summary = |pass: &EpPass<T>| -> Result<(T, T)> {
        let last = pass.states.last().expect("samples");
        let target = target_state(last.basis(), &task.weights, task.seed)?;
        Ok((fidelity(&target, last)?, pair_negativity(last)?))
    };
    let mut pass = ep_pass(task, &cfg, &times, numerics, 1)?;
    let mut converged = None;
    if numerics.truncation == Truncation::Converged {
        converged = Some(false);
        let mut prev = summary(&pass)?;
        let mut scale = 1;
        for _ in 0..numerics.max_doublings {
            scale *= 2;
            let next = ep_pass(task, &cfg, &times, numerics, scale)?;
            let cur = summary(&next)?;
            let change = (prev.0 - cur.0).abs().max((prev.1 - cur.1).abs()).to_f64_lossy();
            pass = next;
            prev = cur;
            if change < numerics.convergence_tol {
                converged = Some(true);
                break;
            }
        }
    }
    let negativity_trace = pass.states.iter().map(pair_negativity).collect::<Result<Vec<T>>>()?;
    let final_state = pass.states.pop().expect("samples");
    let target = target_state(final_state.basis(), &task.weights, task.seed)?;
    let f = fidelity(&target, &final_state)?;
    let record = EpRecord {
        weights: task.weights.as_slice().to_vec(),
        m: task.m,
        method: task.method,
        pulse,
        fidelity: f,
        infidelity: T::one() - f,
        negativity: *negativity_trace.last().expect("samples"),
        times,
        negativity_trace,
        dims: pass.dims,
        max_tail: pass.tail,
        converged,
        note: (task.method == Method::Rwa).then(|| RWA_NOTE.to_string()),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(EpOutcome { record, final_state, target })
}

/// Shortest perfect-entanglement pulse: `ep_pulse(2)` for any number of nodes.
pub fn min_ep_time<T: Real>(n_nodes: usize) -> Result<PulseParams<T>> {
    if n_nodes < 2 {
        return Err(Error::param("n_nodes", "entanglement needs at least two nodes"));
    }
    ep_pulse(2)
}

impl<T: Real> EpRecord<T> {
    pub fn table(records: &[Self]) -> super::Table {
        use super::table::fmt_float;
        let mut t = super::Table::new(&[
            "weights",
            "method",
            "m",
            "tau [1/omega]",
            "g_prime [omega]",
            "fidelity",
            "infidelity",
            "log_negativity",
        ]);
        for r in records {
            t.push(vec![
                r.weights.iter().map(|w| w.to_f64_lossy().to_string()).collect::<Vec<_>>().join(";"),
                r.method.as_str().to_string(),
                r.m.to_string(),
                fmt_float(r.pulse.tau.to_f64_lossy()),
                fmt_float(r.pulse.g_prime.to_f64_lossy()),
                fmt_float(r.fidelity.to_f64_lossy()),
                fmt_float(r.infidelity.to_f64_lossy()),
                fmt_float(r.negativity.to_f64_lossy()),
            ]);
        }
        t
    }

    pub fn trace_table(&self) -> super::Table {
        use super::table::fmt_float;
        let mut t = super::Table::new(&["t [1/omega]", "log_negativity"]);
        for (time, e) in self.times.iter().zip(&self.negativity_trace) {
            t.push(vec![fmt_float(time.to_f64_lossy()), fmt_float(e.to_f64_lossy())]);
        }
        t
    }
}
