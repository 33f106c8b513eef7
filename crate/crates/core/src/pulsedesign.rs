//! Excitation-conserving pulse conditions for state transfer (QST) and
//! entanglement preparation (EP), the rotating-wave baseline `g'τ = π`, the
//! residual rotation angle and the speed/fidelity tradeoff.
//!
//! All quantities are dimensionless: frequencies in units of ω, times in 1/ω.

use serde::{Deserialize, Serialize};

use crate::analytic::{CouplingWeights, SystemConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PulseKind {
    Qst,
    Ep,
    Rwa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseFlag {
    /// `m ≤ 4`: legal but the residual amplitude error is large.
    UltraStrong,
    /// QST with `m = 2` sits on `g' = ω/2` where one eigenfrequency vanishes.
    /// The counter-rotating contributions no longer cancel at `τ`.
    SingularPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams<T> {
    /// Pulse index; `None` for the rotating-wave baseline.
    pub m: Option<u32>,
    pub zeta: T,
    /// `ωτ`
    pub theta: T,
    /// `g'/ω`
    pub g_prime: T,
    /// `ωτ`, i.e. τ in units of 1/ω
    pub tau: T,
    pub kind: PulseKind,
}

impl<T: Real> PulseParams<T> {
    /// System realizing this pulse at mode frequency `omega`.
    pub fn config(&self, omega: T, weights: CouplingWeights<T>) -> Result<SystemConfig<T>> {
        SystemConfig::with_effective_coupling(omega, self.g_prime * omega, weights)
    }

    pub fn duration(&self, omega: T) -> T {
        self.tau / omega
    }

    pub fn flags(&self) -> Vec<PulseFlag> {
        let mut out = Vec::new();
        if let Some(m) = self.m {
            if m <= 4 {
                out.push(PulseFlag::UltraStrong);
            }
            if m == 2 && self.kind == PulseKind::Qst {
                out.push(PulseFlag::SingularPoint);
            }
        }
        out
    }

    /// Residuals of `(s₊ − s₋)θ = Δπ` and `s₊θ = mπ` with `s± = sqrt(1 ± 2/ζ)`,
    /// `Δ = 2` for QST and `1` for EP.
    pub fn constraint_residuals(&self) -> Option<(T, T)> {
        let m = T::from_u32(self.m?)?;
        let delta = match self.kind {
            PulseKind::Qst => T::lit(2.0),
            PulseKind::Ep => T::one(),
            PulseKind::Rwa => return None,
        };
        let two_over = T::lit(2.0) / self.zeta;
        let sp = (T::one() + two_over).sqrt();
        let sm = (T::one() - two_over).sqrt();
        let pi = T::PI();
        Some(((sp - sm) * self.theta - delta * pi, sp * self.theta - m * pi))
    }
}

fn check_m(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::UnboundedPotential { m: m as i64 });
    }
    Ok(())
}

/// `(ζ, θ)` for ratio `q = s₋/s₊` and index `m`.
fn zeta_theta<T: Real>(q: T, m: T) -> (T, T) {
    let two = T::lit(2.0);
    let q2 = q * q;
    let zeta = two * (T::one() + q2) / (T::one() - q2);
    let theta = m * T::PI() * ((T::one() + q2) / two).sqrt();
    (zeta, theta)
}

fn build<T: Real>(m: u32, q: T, kind: PulseKind) -> PulseParams<T> {
    let (zeta, theta) = zeta_theta(q, T::lit(m as f64));
    PulseParams { m: Some(m), zeta, theta, g_prime: zeta.recip(), tau: theta, kind }
}

/// Optimized QST pulse: `s₊θ = mπ`, `s₋θ = (m−2)π`.
pub fn qst_pulse<T: Real>(m: u32) -> Result<PulseParams<T>> {
    check_m(m)?;
    let q = T::one() - T::lit(2.0) / T::lit(m as f64);
    let mut p = build(m, q, PulseKind::Qst);
    if m == 2 {
        // q = 0 lands on ζ = 2 exactly; keep it exact so downstream code routes to the limit.
        p.zeta = T::lit(2.0);
        p.g_prime = T::lit(0.5);
    }
    Ok(p)
}

/// Optimized EP pulse: `s₊θ = mπ`, `s₋θ = (m−1)π`.
pub fn ep_pulse<T: Real>(m: u32) -> Result<PulseParams<T>> {
    check_m(m)?;
    let q = T::one() - T::one() / T::lit(m as f64);
    Ok(build(m, q, PulseKind::Ep))
}

/// Rotating-wave baseline `g'τ = π` (`g_prime` in units of ω).
pub fn rwa_pulse<T: Real>(g_prime: T) -> Result<PulseParams<T>> {
    if !(g_prime > T::zero()) || !g_prime.is_finite() {
        return Err(Error::param("g_prime", "must be positive and finite"));
    }
    let tau = T::PI() / g_prime;
    Ok(PulseParams { m: None, zeta: g_prime.recip(), theta: tau, g_prime, tau, kind: PulseKind::Rwa })
}

/// `θ_r` of a QST pulse with continuous index `m`, written without cancellation:
/// `π / (2m (sqrt(1 − 2/m + 2/m²) + 1 − 1/m))`.
fn qst_rotation<T: Real>(m: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let p = m.recip();
    let root = (one - two * p + two * p * p).sqrt();
    T::PI() / (two * m * (root + one - p))
}

/// Residual rotation `θ_r = −(sqrt(1+2/ζ) + sqrt(1−2/ζ) − 2)·θ/4`.
///
/// Requires `ζ ≥ 2`; NaN otherwise.
pub fn rotation_angle<T: Real>(p: &PulseParams<T>) -> T {
    match (p.kind, p.m) {
        (PulseKind::Qst, Some(m)) => qst_rotation(T::lit(m as f64)),
        (PulseKind::Ep, Some(m)) => qst_rotation(T::lit(2.0 * m as f64)) / T::lit(2.0),
        _ => rotation_angle_literal(p.zeta, p.theta),
    }
}

pub fn rotation_angle_literal<T: Real>(zeta: T, theta: T) -> T {
    let two_over = T::lit(2.0) / zeta;
    let s = (T::one() + two_over).sqrt() + (T::one() - two_over).sqrt() - T::lit(2.0);
    -s * theta / T::lit(4.0)
}

/// `G(m) = sin θ_r(m)` for continuous `m ≥ 2`: the magnitude of the residual
/// sender amplitude `|K11(τ)|`.
pub fn amplitude_error<T: Real>(m: T) -> T {
    qst_rotation(m).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffResult<T> {
    pub m_th: T,
    pub m_chosen: u32,
    pub theta_th: T,
    pub tau_th: T,
    /// First-order estimate `⟨n⟩·G(m_chosen)²`, valid while `G ≪ 1`.
    pub predicted_infidelity: T,
}

pub const M_SEARCH_MAX: f64 = 1e6;

/// Fastest integer QST pulse whose predicted infidelity `⟨n⟩G(m)²` stays
/// within `e_tol`.
///
/// `m_th` solves `G(m_th) = sqrt(e_tol/⟨n⟩)`. `m_chosen` is the smallest
/// integer `≥ 3` with `G(m_chosen)` strictly below the target, so an exact
/// integer threshold `m_th = k` gives `k + 1`.
pub fn speed_limit<T: Real>(e_tol: T, mean_n: T) -> Result<TradeoffResult<T>> {
    if !(e_tol > T::zero() && e_tol < T::one()) {
        return Err(Error::param("e_tol", "must lie in (0, 1)"));
    }
    if !(mean_n > T::zero()) || !mean_n.is_finite() {
        return Err(Error::param("mean_n", "must be positive and finite"));
    }
    let target = (e_tol / mean_n).sqrt();
    let m_max = T::lit(M_SEARCH_MAX);
    let g_max = amplitude_error(m_max);
    if target <= g_max {
        return Err(Error::Unreachable {
            target: target.to_f64_lossy(),
            m_max: M_SEARCH_MAX,
            g_at_max: g_max.to_f64_lossy(),
        });
    }
    let two = T::lit(2.0);
    let m_th = if target >= amplitude_error(two) {
        two
    } else {
        let (mut lo, mut hi) = (two, m_max);
        for _ in 0..200 {
            let mid = (lo + hi) / two;
            if amplitude_error(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        (lo + hi) / two
    };

    // Integer selection on G itself; a relative tie band absorbs rounding in target.
    let tie = T::lit(1e-12);
    let below = |k: u32| amplitude_error(T::lit(k as f64)) < target * (T::one() - tie);
    let mut k = (m_th.floor().to_f64_lossy() as u32).saturating_add(1).max(3);
    while k > 3 && below(k - 1) {
        k -= 1;
    }
    while !below(k) {
        k += 1;
    }
    let m_th = {
        let prev = k - 1;
        let g_prev = amplitude_error(T::lit(prev as f64));
        if prev >= 2 && ((g_prev - target).abs() <= tie * target) {
            T::lit(prev as f64)
        } else {
            m_th
        }
    };
    let p = qst_pulse::<T>(k)?;
    let g = amplitude_error(T::lit(k as f64));
    Ok(TradeoffResult {
        m_th,
        m_chosen: k,
        theta_th: p.theta,
        tau_th: p.tau,
        predicted_infidelity: (mean_n * g * g).min(T::one()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn qst_examples() {
        let p = qst_pulse::<f64>(2).unwrap();
        assert_eq!(p.zeta, 2.0);
        assert!((p.theta - 2f64.sqrt() * PI).abs() < 1e-14);
        assert!(p.flags().contains(&PulseFlag::SingularPoint));
        let p = qst_pulse::<f64>(5).unwrap();
        assert!((p.zeta - 4.25).abs() < 1e-14);
        assert!((p.theta - 5.0 * PI * 0.68f64.sqrt()).abs() < 1e-13);
        assert_eq!(p.flags(), vec![]);
        assert!(matches!(qst_pulse::<f64>(1), Err(Error::UnboundedPotential { m: 1 })));
        assert!(qst_pulse::<f64>(0).is_err());
    }

    #[test]
    fn ep_examples() {
        let p = ep_pulse::<f64>(2).unwrap();
        assert!((p.zeta - 10.0 / 3.0).abs() < 1e-14);
        assert!((p.theta - 10f64.sqrt() / 2.0 * PI).abs() < 1e-13);
        assert!(ep_pulse::<f64>(1).is_err());
        for m in 2..50 {
            let e = ep_pulse::<f64>(m).unwrap();
            let q = qst_pulse::<f64>(2 * m).unwrap();
            assert!((e.zeta - q.zeta).abs() < 1e-12 * q.zeta);
            assert!((2.0 * e.theta - q.theta).abs() < 1e-12 * q.theta);
        }
    }

    #[test]
    fn constraints_hold() {
        for m in (2..200).chain([1000, 5000, 10_000]) {
            for p in [qst_pulse::<f64>(m).unwrap(), ep_pulse::<f64>(m).unwrap()] {
                let (r1, r2) = p.constraint_residuals().unwrap();
                assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10, "m={m} {:?}: {r1} {r2}", p.kind);
            }
        }
    }

    #[test]
    fn rwa_baseline() {
        let p = rwa_pulse(0.1f64).unwrap();
        assert!((p.tau - 10.0 * PI).abs() < 1e-12);
        assert!(rwa_pulse(0.0f64).is_err());
        assert!(rotation_angle(&p).is_finite());
    }

    #[test]
    fn rotation_angle_forms_agree() {
        for m in [3u32, 5, 11, 40] {
            let p = qst_pulse::<f64>(m).unwrap();
            let lit = rotation_angle_literal(p.zeta, p.theta);
            assert!((rotation_angle(&p) - lit).abs() < 1e-12);
            // θ_r = θ/2 − (m−1)π/2
            assert!((lit - (p.theta / 2.0 - (m as f64 - 1.0) * PI / 2.0)).abs() < 1e-12);
        }
        let p = qst_pulse::<f64>(11).unwrap();
        assert!((rotation_angle(&p) - 0.078344).abs() < 1e-6);
    }

    #[test]
    fn amplitude_error_values() {
        assert!((amplitude_error(2.0f64) - 0.6057).abs() < 1e-4);
        assert!((amplitude_error(3.0f64) - 0.3624).abs() < 1e-4);
        assert!(amplitude_error(1e9f64) < 1e-8);
    }

    #[test]
    fn tradeoff_exact_threshold() {
        let g7 = amplitude_error(7.0f64);
        let r = speed_limit(g7 * g7, 1.0).unwrap();
        assert_eq!(r.m_chosen, 8);
        assert!((r.m_th - 7.0).abs() < 1e-9);
        let r = speed_limit(2.0 * g7 * g7, 2.0).unwrap();
        assert_eq!(r.m_chosen, 8);
    }

    #[test]
    fn tradeoff_bracket_and_limits() {
        for e in [1e-2, 3e-3, 1e-4, 1e-6] {
            let r = speed_limit(e, 1.0f64).unwrap();
            let t = e.sqrt();
            assert!(amplitude_error(r.m_chosen as f64) <= t);
            if r.m_chosen > 3 {
                assert!(t < amplitude_error(r.m_chosen as f64 - 1.0));
            }
            assert!((amplitude_error(r.m_th) - t).abs() < 1e-10);
        }
        assert_eq!(speed_limit(0.5f64, 1.0).unwrap().m_chosen, 3);
        assert!(matches!(speed_limit(1e-20f64, 1.0), Err(Error::Unreachable { .. })));
        let a = speed_limit(1e-3f64, 1.0).unwrap();
        let b = speed_limit(1e-3f64, 3.0).unwrap();
        assert!(b.tau_th >= a.tau_th);
    }

    #[test]
    fn generic_over_f32() {
        let p = qst_pulse::<f32>(11).unwrap();
        assert!((rotation_angle(&p) - 0.078344).abs() < 1e-5);
    }
}
