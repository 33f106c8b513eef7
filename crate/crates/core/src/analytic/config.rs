use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C};

/// Relative coupling amplitudes `k_1..k_n` of the node modes to the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingWeights<T> {
    weights: Vec<T>,
}

impl<T: Real> CouplingWeights<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("weights", "at least one node mode is required"));
        }
        if weights.iter().any(|k| !k.is_finite()) {
            return Err(Error::param("weights", "weights must be finite"));
        }
        if weights.iter().all(|k| k.is_zero()) {
            return Err(Error::param("weights", "at least one weight must be non-zero"));
        }
        Ok(Self { weights })
    }

    /// `n` equal unit weights.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![T::one(); n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm_sq(&self) -> T {
        self.weights.iter().fold(T::zero(), |acc, &k| acc + k * k)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Weights scaled to unit Euclidean norm; the united mode is `Σ w_j a_j`.
    pub fn unit(&self) -> Vec<T> {
        let n = self.norm();
        self.weights.iter().map(|&k| k / n).collect()
    }
}

/// Resonant star network: `n` node modes of frequency `omega`, each coupled
/// with strength `g·k_j` to a single channel mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig<T> {
    pub omega: T,
    pub g: T,
    pub weights: CouplingWeights<T>,
}

impl<T: Real> SystemConfig<T> {
    pub fn new(omega: T, g: T, weights: CouplingWeights<T>) -> Result<Self> {
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::param("omega", "must be positive and finite"));
        }
        if !g.is_finite() {
            return Err(Error::param("g", "must be finite"));
        }
        let cfg = Self { omega, g, weights };
        if !cfg.g_prime().is_finite() {
            return Err(Error::param("g", "effective coupling g·|k| overflows"));
        }
        Ok(cfg)
    }

    /// Configuration whose effective coupling equals `g_prime` for the given weights.
    pub fn with_effective_coupling(omega: T, g_prime: T, weights: CouplingWeights<T>) -> Result<Self> {
        let g = g_prime / weights.norm();
        Self::new(omega, g, weights)
    }

    pub fn n_modes(&self) -> usize {
        self.weights.len()
    }

    /// `g' = g·sqrt(Σ k_j²)`
    pub fn g_prime(&self) -> T {
        self.g * self.weights.norm()
    }

    /// Inverse coupling `ζ = ω/g'`; infinite for a decoupled system.
    pub fn zeta(&self) -> T {
        let gp = self.g_prime();
        if gp.is_zero() {
            T::infinity()
        } else {
            self.omega / gp
        }
    }

    /// Dimensionless coupling `r = g'/ω = 1/ζ`.
    pub fn coupling_ratio(&self) -> T {
        self.g_prime() / self.omega
    }
}

/// The four normal-mode frequencies of the united-mode/channel pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenFrequencies<T> {
    /// `[+Ω₋, −Ω₋, +Ω₊, −Ω₊]` with `Ω∓ = sqrt(ω² ∓ 2g'ω)`.
    pub values: [C<T>; 4],
    /// Set when `2|g'| > ω`: one radicand is negative and that pair is imaginary.
    pub hyperbolic: bool,
}

/// `sqrt(x)` continued to `i·sqrt(-x)` for negative radicands.
pub(crate) fn branch_sqrt<T: Real>(x: T) -> C<T> {
    if x >= T::zero() {
        cplx(x.sqrt(), T::zero())
    } else {
        cplx(T::zero(), (-x).sqrt())
    }
}

pub fn eigen_frequencies<T: Real>(cfg: &SystemConfig<T>) -> EigenFrequencies<T> {
    let w = cfg.omega;
    let gp = cfg.g_prime();
    let two = T::lit(2.0);
    let minus = branch_sqrt(w * w - two * gp * w);
    let plus = branch_sqrt(w * w + two * gp * w);
    EigenFrequencies { values: [minus, -minus, plus, -plus], hyperbolic: two * gp.abs() > w }
}
