use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::analytic::{full_transform, BogoliubovTransform, SystemConfig};
use crate::error::{Error, Result};
use crate::fockspace::{uniform_times, EvolveOptions};
use crate::scalar::{czero, real, Real, C};

/// Per-mode Fock cutoff policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy", content = "d")]
pub enum Truncation {
    /// `d = max(8, ⌈n_peak + k·sqrt(n_peak + 1)⌉)` per mode with `k = 6`, where
    /// `n_peak` is the largest mean occupancy over the pulse from the exact
    /// transform. Modes that trip the tail sentinel are enlarged and rerun.
    Auto,
    /// `Auto`, then every cutoff is doubled until the observable changes by
    /// less than `Numerics::convergence_tol`.
    Converged,
    /// The same cutoff for every mode.
    Fixed(usize),
}

/// How two-node transfer runs are mapped onto the Fock-space oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    /// Simulate `a1, a2, c` directly.
    Direct,
    /// Rotate the nodes into `ā = Σ w_j a_j` and its uncoupled complement,
    /// Schmidt-decompose the input across the pair and simulate only `ā, c`
    /// per component. Exact up to truncation.
    United,
}

/// Numerical settings shared by all drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics<T> {
    pub truncation: Truncation,
    /// Used by state transfer only.
    pub reduction: Reduction,
    pub evolve: EvolveOptions<T>,
    /// Weighted truncation error allowed per thermal branch; a branch of
    /// weight `p` gets tail limit `max(tail_limit, budget/p)` (capped at
    /// `MAX_BRANCH_TAIL`) and a correspondingly smaller cutoff.
    pub thermal_budget: f64,
    pub convergence_tol: f64,
    /// Upper bound on doublings for `Truncation::Converged`.
    pub max_doublings: u32,
}

impl<T: Real> Default for Numerics<T> {
    fn default() -> Self {
        Self {
            truncation: Truncation::Auto,
            reduction: Reduction::United,
            evolve: EvolveOptions::default(),
            thermal_budget: 1e-7,
            convergence_tol: 1e-6,
            max_doublings: 3,
        }
    }
}

impl<T: Real> Numerics<T> {
    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }
}

pub(crate) const MAX_BRANCH_TAIL: f64 = 0.05;
const MIN_AUTO_DIM: usize = 8;
const SAFETY_FACTOR: f64 = 6.0;
const OCCUPATION_SAMPLES: usize = 64;
pub(crate) const MAX_GROWTH_RETRIES: usize = 5;

/// `⟨a⟩`, `⟨a†a⟩`, `⟨a²⟩` of one mode of a product state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean: C<T>,
    pub number: T,
    pub square: C<T>,
}

impl<T: Real> Moments<T> {
    pub fn fock(n: usize) -> Self {
        Self { mean: czero(), number: T::from_usize_lossy(n), square: czero() }
    }

    pub fn of_ket(psi: &Array1<C<T>>) -> Self {
        let mut mean = czero();
        let mut number = T::zero();
        let mut square = czero();
        for n in 0..psi.len() {
            let nf = T::from_usize_lossy(n);
            number += nf * psi[n].norm_sqr();
            if n >= 1 {
                mean += psi[n - 1].conj() * psi[n] * nf.sqrt();
            }
            if n >= 2 {
                square += psi[n - 2].conj() * psi[n] * (nf * (nf - T::one())).sqrt();
            }
        }
        Self { mean, number, square }
    }
}

/// Mean occupancy of every mode under `tr` for a product input with the given
/// single-mode moments. Exact for any product input.
pub(crate) fn occupations_under<T: Real>(tr: &BogoliubovTransform<T>, moments: &[Moments<T>]) -> Vec<T> {
    let n = moments.len();
    // (⟨a_k† a_l⟩, ⟨a_k a_l⟩) of the product state.
    let pair = |k: usize, l: usize| -> (C<T>, C<T>) {
        if k == l {
            (real(moments[k].number), moments[k].square)
        } else {
            (moments[k].mean.conj() * moments[l].mean, moments[k].mean * moments[l].mean)
        }
    };
    (0..n)
        .map(|j| {
            let mut acc = czero::<T>();
            for k in 0..n {
                for l in 0..n {
                    let (ad_a, a_a) = pair(k, l);
                    let a_ad = if k == l { pair(l, k).0 + real(T::one()) } else { pair(l, k).0 };
                    let (ak, al) = (tr.u_a[[j, k]], tr.u_a[[j, l]]);
                    let (bk, bl) = (tr.u_b[[j, k]], tr.u_b[[j, l]]);
                    acc += ak.conj() * al * ad_a
                        + ak.conj() * bl * a_a.conj()
                        + bk.conj() * al * a_a
                        + bk.conj() * bl * a_ad;
                }
            }
            acc.re
        })
        .collect()
}

/// Largest mean occupancy of every mode over `[0, t_end]` for a product input
/// with the given single-mode moments, from the exact Heisenberg transform.
pub fn peak_occupations<T: Real>(cfg: &SystemConfig<T>, t_end: T, moments: &[Moments<T>]) -> Result<Vec<T>> {
    let n = cfg.n_modes() + 1;
    if moments.len() != n {
        return Err(Error::DimensionMismatch(format!("{} moments for {n} modes", moments.len())));
    }
    let mut peak: Vec<T> = moments.iter().map(|m| m.number).collect();
    for t in uniform_times(t_end, OCCUPATION_SAMPLES) {
        let occ = occupations_under(&full_transform(cfg, t)?, moments);
        for (p, o) in peak.iter_mut().zip(occ) {
            *p = p.max(o);
        }
    }
    Ok(peak)
}

/// Safety factor for a branch whose tail limit was relaxed from `base` to `limit`.
pub(crate) fn safety_factor(base: f64, limit: f64) -> f64 {
    if limit <= base {
        return SAFETY_FACTOR;
    }
    (SAFETY_FACTOR * ((1.0 / limit).ln() / (1.0 / base).ln()).sqrt()).clamp(2.5, SAFETY_FACTOR)
}

pub(crate) fn auto_dims<T: Real>(peaks: &[T], k: f64, floors: &[usize]) -> Vec<usize> {
    peaks
        .iter()
        .zip(floors)
        .map(|(p, &floor)| {
            let p = p.to_f64_lossy().max(0.0);
            ((p + k * (p + 1.0).sqrt()).ceil() as usize).max(MIN_AUTO_DIM).max(floor)
        })
        .collect()
}

pub(crate) fn grow(d: usize) -> usize {
    (d * 3).div_ceil(2).max(d + 2)
}
