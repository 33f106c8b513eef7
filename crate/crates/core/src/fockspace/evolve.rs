use ndarray::Array1;
use rayon::prelude::*;

use crate::analytic::{eigen_frequencies, Frame, SystemConfig};
use crate::error::{Error, Result};
use crate::scalar::{cis, czero, Real, C};

use super::basis::FockBasis;
use super::hamiltonian::{check_basis, Generator, HamiltonianKind};
use super::state::{Representation, TruncatedState};

/// Default cap on the population of any mode's top Fock level after evolution.
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta with `dt` shrunk to land on every checkpoint.
    Rk4,
    /// RK4 with step-doubling error control; `dt` is the initial and maximum step.
    Adaptive { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions<T> {
    pub integrator: Integrator,
    /// Step in units of 1/ω.
    pub dt: T,
    /// Frame of the input and output states.
    pub frame: Frame,
    pub hamiltonian: HamiltonianKind,
    /// Top-level population that triggers a non-convergence error; `f64::INFINITY` disables it.
    pub tail_limit: f64,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk4,
            dt: T::TAU() / T::lit(200.0),
            frame: Frame::Interaction,
            hamiltonian: HamiltonianKind::Full,
            tail_limit: DEFAULT_TAIL_LIMIT,
        }
    }
}

impl<T: Real> EvolveOptions<T> {
    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn rotating_wave(mut self) -> Self {
        self.hamiltonian = HamiltonianKind::RotatingWave;
        self
    }
}

/// Stability bound `2π/(50·ω_max)` for `dt`, in units of 1/ω.
pub fn step_bound<T: Real>(cfg: &SystemConfig<T>) -> T {
    let w_max = eigen_frequencies(cfg).values.iter().fold(cfg.omega, |m, z| m.max(z.norm()));
    T::TAU() / (T::lit(50.0) * w_max)
}

fn validate<T: Real>(cfg: &SystemConfig<T>, opts: &EvolveOptions<T>) -> Result<()> {
    let bound = step_bound(cfg);
    if !(opts.dt > T::zero()) || !opts.dt.is_finite() {
        return Err(Error::param("dt", "must be positive and finite"));
    }
    if opts.dt > bound {
        return Err(Error::StepSize { dt: opts.dt.to_f64_lossy(), bound: bound.to_f64_lossy() });
    }
    if let Integrator::Adaptive { tol } = opts.integrator {
        if !(tol > 0.0) {
            return Err(Error::param("tol", "adaptive tolerance must be positive"));
        }
    }
    Ok(())
}

struct Workspace<T> {
    k1: Vec<C<T>>,
    k2: Vec<C<T>>,
    k3: Vec<C<T>>,
    k4: Vec<C<T>>,
    tmp: Vec<C<T>>,
}

impl<T: Real> Workspace<T> {
    fn new(n: usize) -> Self {
        let z = vec![czero(); n];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }
}

#[allow(clippy::needless_range_loop)]
fn rk4_step<T: Real>(gen: &Generator<T>, t: T, h: T, psi: &mut [C<T>], w: &mut Workspace<T>) {
    let half = h / T::lit(2.0);
    gen.derivative(t, psi, &mut w.k1);
    for i in 0..psi.len() {
        w.tmp[i] = psi[i] + w.k1[i] * half;
    }
    gen.derivative(t + half, &w.tmp, &mut w.k2);
    for i in 0..psi.len() {
        w.tmp[i] = psi[i] + w.k2[i] * half;
    }
    gen.derivative(t + half, &w.tmp, &mut w.k3);
    for i in 0..psi.len() {
        w.tmp[i] = psi[i] + w.k3[i] * h;
    }
    gen.derivative(t + h, &w.tmp, &mut w.k4);
    let sixth = h / T::lit(6.0);
    for i in 0..psi.len() {
        psi[i] += (w.k1[i] + (w.k2[i] + w.k3[i]) * T::lit(2.0) + w.k4[i]) * sixth;
    }
}

/// Propagate `psi` from `t0` through the increasing `times`, calling `visit` at each.
fn propagate<T: Real>(
    gen: &Generator<T>,
    psi: &mut [C<T>],
    t0: T,
    times: &[T],
    opts: &EvolveOptions<T>,
    mut visit: impl FnMut(usize, &[C<T>]) -> Result<()>,
) -> Result<()> {
    let mut w = Workspace::new(psi.len());
    let mut t = t0;
    let mut h_adapt = opts.dt;
    for (k, &target) in times.iter().enumerate() {
        let span = target - t;
        match opts.integrator {
            Integrator::Rk4 => {
                if span > T::zero() {
                    let steps = (span / opts.dt).ceil().to_f64_lossy().max(1.0) as usize;
                    let h = span / T::from_usize_lossy(steps);
                    for s in 0..steps {
                        rk4_step(gen, t + h * T::from_usize_lossy(s), h, psi, &mut w);
                    }
                }
            }
            Integrator::Adaptive { tol } => {
                let tol = T::lit(tol);
                let mut full = vec![czero(); psi.len()];
                let mut halfway = vec![czero(); psi.len()];
                while target - t > T::epsilon() * target.abs().max(T::one()) {
                    let h = h_adapt.min(target - t);
                    full.copy_from_slice(psi);
                    rk4_step(gen, t, h, &mut full, &mut w);
                    halfway.copy_from_slice(psi);
                    let hh = h / T::lit(2.0);
                    rk4_step(gen, t, hh, &mut halfway, &mut w);
                    rk4_step(gen, t + hh, hh, &mut halfway, &mut w);
                    let err =
                        full.iter().zip(&halfway).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm())) / T::lit(15.0);
                    let factor = if err.is_zero() {
                        T::lit(2.0)
                    } else {
                        (T::lit(0.9) * (tol / err).powf(T::lit(0.2))).min(T::lit(2.0)).max(T::lit(0.2))
                    };
                    if err <= tol {
                        psi.copy_from_slice(&halfway);
                        t += h;
                    }
                    h_adapt = (h * factor).min(opts.dt);
                }
            }
        }
        t = target;
        visit(k, psi)?;
    }
    Ok(())
}

fn excitation_phase<T: Real>(basis: &FockBasis, omega: T, t: T, sign: T, psi: &mut [C<T>]) {
    if t.is_zero() {
        return;
    }
    let n_modes = basis.n_modes();
    for (idx, z) in psi.iter_mut().enumerate() {
        let n: usize = (0..n_modes).map(|m| basis.occupation(idx, m)).sum();
        *z *= cis(sign * omega * t * T::from_usize_lossy(n));
    }
}

/// Largest top-level population over modes, with the offending mode label.
pub fn truncation_tail<T: Real>(basis: &FockBasis, branches: &[(T, &[C<T>])]) -> (String, f64) {
    let mut worst = (String::new(), 0.0);
    for m in 0..basis.n_modes() {
        let top = basis.dims()[m] - 1;
        let mut p = 0.0;
        for (w, psi) in branches {
            let wf = w.to_f64_lossy();
            for (idx, z) in psi.iter().enumerate() {
                if basis.occupation(idx, m) == top {
                    p += wf * z.norm_sqr().to_f64_lossy();
                }
            }
        }
        if p > worst.1 || worst.0.is_empty() {
            worst = (basis.labels()[m].clone(), p);
        }
    }
    worst
}

fn check_tail<T: Real>(basis: &FockBasis, branches: &[(T, &[C<T>])], limit: f64) -> Result<()> {
    if limit.is_finite() {
        let (mode, tail) = truncation_tail(basis, branches);
        if tail > limit {
            return Err(Error::NonConvergence { mode, tail, limit });
        }
    }
    Ok(())
}

fn evolve_branch<T: Real>(
    gen: &Generator<T>,
    basis: &FockBasis,
    omega: T,
    mut psi: Vec<C<T>>,
    t0: T,
    times: &[T],
    opts: &EvolveOptions<T>,
) -> Result<Vec<Vec<C<T>>>> {
    if opts.frame == Frame::Schrodinger {
        excitation_phase(basis, omega, t0, T::one(), &mut psi);
    }
    let mut out = Vec::with_capacity(times.len());
    propagate(gen, &mut psi, t0, times, opts, |k, v| {
        let mut snap = v.to_vec();
        if opts.frame == Frame::Schrodinger {
            excitation_phase(basis, omega, times[k], -T::one(), &mut snap);
        }
        out.push(snap);
        Ok(())
    })?;
    Ok(out)
}

/// States at each of the increasing absolute times `times ≥ t0`, starting from
/// `state` at `t0`. Mixture branches (and density eigenvectors) evolve independently.
pub fn evolve_checkpoints<T: Real>(
    state: &TruncatedState<T>,
    cfg: &SystemConfig<T>,
    t0: T,
    times: &[T],
    opts: &EvolveOptions<T>,
) -> Result<Vec<TruncatedState<T>>> {
    check_basis(cfg, state.basis())?;
    validate(cfg, opts)?;
    if !t0.is_finite() {
        return Err(Error::param("t0", "must be finite"));
    }
    let mut prev = t0;
    for &t in times {
        if !(t >= prev) || !t.is_finite() {
            return Err(Error::param("times", "checkpoints must be finite, increasing and not before t0"));
        }
        prev = t;
    }
    let basis = state.basis();
    let gen = Generator::new(cfg, basis, opts.hamiltonian)?;
    let branches = state.branches();
    let evolved: Vec<Vec<Vec<C<T>>>> = branches
        .par_iter()
        .map(|(_, v)| evolve_branch(&gen, basis, cfg.omega, v.to_vec(), t0, times, opts))
        .collect::<Result<_>>()?;

    let pure_input = matches!(state.representation(), Representation::Pure(_));
    (0..times.len())
        .map(|k| {
            let refs: Vec<(T, &[C<T>])> =
                branches.iter().zip(&evolved).map(|((w, _), e)| (*w, e[k].as_slice())).collect();
            check_tail(basis, &refs, opts.tail_limit)?;
            let repr = if pure_input {
                Representation::Pure(Array1::from(evolved[0][k].clone()))
            } else {
                Representation::Mixture(
                    branches.iter().zip(&evolved).map(|((w, _), e)| (*w, Array1::from(e[k].clone()))).collect(),
                )
            };
            Ok(TruncatedState::from_parts(basis.clone(), repr))
        })
        .collect()
}

/// Evolve from `t0` to `t1` under the interaction-frame Hamiltonian.
pub fn evolve_interval<T: Real>(
    state: &TruncatedState<T>,
    cfg: &SystemConfig<T>,
    t0: T,
    t1: T,
    opts: &EvolveOptions<T>,
) -> Result<TruncatedState<T>> {
    Ok(evolve_checkpoints(state, cfg, t0, &[t1], opts)?.pop().expect("one checkpoint"))
}

/// Evolve for duration `tau` starting at `t = 0`.
pub fn evolve<T: Real>(
    state: &TruncatedState<T>,
    cfg: &SystemConfig<T>,
    tau: T,
    opts: &EvolveOptions<T>,
) -> Result<TruncatedState<T>> {
    if !(tau >= T::zero()) {
        return Err(Error::param("tau", "duration must be non-negative"));
    }
    evolve_interval(state, cfg, T::zero(), tau, opts)
}

/// `n + 1` uniformly spaced times on `[0, tau]`.
pub fn uniform_times<T: Real>(tau: T, n: usize) -> Vec<T> {
    (0..=n).map(|k| tau * T::from_usize_lossy(k) / T::from_usize_lossy(n.max(1))).collect()
}
