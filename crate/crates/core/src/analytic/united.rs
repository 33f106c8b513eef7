//! Closed-form Heisenberg solution for one united node mode `ā` coupled to
//! the channel `c`, counter-rotating terms included.
//!
//! Rows are coefficients over the basis `(ā(0), ā†(0), c(0), c†(0))` and are
//! reported in the interaction frame. With `r = g'/ω` and `s∓² = 1 ∓ 2r`:
//!
//! ```text
//! ā(t) = e^{iωt}/2 · { ā [C₋ + C₊ − i(1−r)S₋ − i(1+r)S₊]
//!                    + c [C₊ − C₋ + i(1−r)S₋ − i(1+r)S₊]
//!                    + ā† [i r S₋ − i r S₊]
//!                    + c† [−i r S₋ − i r S₊] }
//! ```
//!
//! where `C∓ = cos(s∓ωt)` and `S∓ = sin(s∓ωt)/s∓`. Both are entire in `s²`,
//! so this form is regular at `ζ = 2` (`s₋ = 0`) and on the hyperbolic branch
//! (`s₋² < 0`, where they become `cosh` and `sinh/κ`).

use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, czero, imag, real, Real, C};

use super::config::SystemConfig;

/// Coefficients over `(a(0), a†(0), c(0), c†(0))`.
pub type ModeRow<T> = [C<T>; 4];

/// Below this distance from `ζ = 2` the dedicated special-point formula is used.
pub const SPECIAL_POINT_EPS: f64 = 1e-8;

/// `(cos(s·x), sin(s·x)/s)` as entire functions of `s²`.
pub(crate) fn oscillation<T: Real>(s_sq: T, x: T) -> (T, T) {
    let u = s_sq * x * x;
    if u.abs() < T::one() {
        // Taylor series in u; 18 terms reach machine precision for |u| < 1.
        let mut cos_sum = T::zero();
        let mut sinc_sum = T::zero();
        let mut term_c = T::one();
        let mut term_s = T::one();
        for k in 0..18 {
            cos_sum += term_c;
            sinc_sum += term_s;
            let k2 = T::from_usize_lossy(2 * k + 1);
            let k3 = T::from_usize_lossy(2 * k + 2);
            let k4 = T::from_usize_lossy(2 * k + 3);
            term_c = -term_c * u / (k2 * k3);
            term_s = -term_s * u / (k3 * k4);
        }
        (cos_sum, sinc_sum * x)
    } else if s_sq > T::zero() {
        let s = s_sq.sqrt();
        ((s * x).cos(), (s * x).sin() / s)
    } else {
        let kappa = (-s_sq).sqrt();
        ((kappa * x).cosh(), (kappa * x).sinh() / kappa)
    }
}

/// Interaction-frame row of `ā(t)`.
pub fn united_mode_transform<T: Real>(cfg: &SystemConfig<T>, t: T) -> Result<ModeRow<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::param("t", "duration must be finite and non-negative"));
    }
    let gp = cfg.g_prime();
    if gp.is_zero() || t.is_zero() {
        return Ok([real(T::one()), czero(), czero(), czero()]);
    }
    if (cfg.zeta() - T::lit(2.0)).abs() < T::lit(SPECIAL_POINT_EPS) {
        return Ok(special_point_row(cfg.omega, t));
    }
    Ok(entire_row(cfg.omega, cfg.coupling_ratio(), t))
}

/// Channel row `c(t)`: the united-mode row with the roles of `ā` and `c` exchanged,
/// expressed over `(ā(0), ā†(0), c(0), c†(0))`.
pub fn channel_row<T: Real>(united: &ModeRow<T>) -> ModeRow<T> {
    [united[2], united[3], united[0], united[1]]
}

pub(crate) fn entire_row<T: Real>(omega: T, r: T, t: T) -> ModeRow<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let x = omega * t;
    let (cm, sm) = oscillation(one - two * r, x);
    let (cp, sp) = oscillation(one + two * r, x);
    let phase = cis(x);
    let a = cplx(cm + cp, -(one - r) * sm - (one + r) * sp);
    let c = cplx(cp - cm, (one - r) * sm - (one + r) * sp);
    let ad = imag(r * sm - r * sp);
    let cd = imag(-r * sm - r * sp);
    [a, ad, c, cd].map(|z| z * phase * half)
}

/// Exact limit of the united-mode row at `g' = ω/2` (`ζ = 2`).
///
/// With `Ω₊ = sqrt(2)ω` and `S₊ = sin(sqrt(2)ωt)/sqrt(2)`:
/// `ā(t) = e^{iωt}/2 {ā[1 + cos Ω₊t − ig't − (3/2)iS₊] + c[cos Ω₊t − 1 + ig't − (3/2)iS₊]
///          + ā†[ig't − (1/2)iS₊] + c†[−ig't − (1/2)iS₊]}`.
pub fn special_point_row<T: Real>(omega: T, t: T) -> ModeRow<T> {
    let half = T::lit(0.5);
    let x = omega * t;
    let gt = half * x;
    let sqrt2 = T::SQRT_2();
    let cp = (sqrt2 * x).cos();
    let sp = (sqrt2 * x).sin() / sqrt2;
    let three_half = T::lit(1.5);
    let phase = cis(x);
    let a = cplx(T::one() + cp, -gt - three_half * sp);
    let c = cplx(cp - T::one(), gt - three_half * sp);
    let ad = imag(gt - half * sp);
    let cd = imag(-gt - half * sp);
    [a, ad, c, cd].map(|z| z * phase * half)
}

/// The 4×4 mixing matrix `M(ζ)` of the exponential form `ā(t) = μ(t)·M·v₀·e^{iωt}`.
///
/// Undefined at `ζ = 2` (0/0 entries), `ζ = 0` and `ζ = ∞`. The square roots
/// are taken positive, which matches the dynamics for `ζ > 0` only.
pub fn m_matrix<T: Real>(zeta: T) -> Result<[[C<T>; 4]; 4]> {
    if !zeta.is_finite() || zeta.is_zero() {
        return Err(Error::param("zeta", "M matrix requires finite non-zero ζ (decoupled system has no M form)"));
    }
    let two = T::lit(2.0);
    let rad_m = (zeta * zeta - two * zeta).abs();
    let rad_p = (zeta * zeta + two * zeta).abs();
    if rad_m.is_zero() || rad_p.is_zero() {
        return Err(Error::param("zeta", "M matrix is singular at |ζ| = 2; use the special-point limit"));
    }
    let one = real(T::one());
    let root_m = super::config::branch_sqrt(zeta * zeta - two * zeta);
    let root_p = super::config::branch_sqrt(zeta * zeta + two * zeta);
    let xm = real(zeta - T::one()) / root_m;
    let ym = one / root_m;
    let xp = real(zeta + T::one()) / root_p;
    let yp = one / root_p;
    let q = real(T::lit(0.25));
    Ok([
        [one - xm, ym, -one + xm, -ym],
        [one + xm, -ym, -one - xm, ym],
        [one - xp, -yp, one - xp, -yp],
        [one + xp, yp, one + xp, yp],
    ]
    .map(|row| row.map(|z| z * q)))
}

/// Direct evaluation of `μ(t)·M·e^{iωt}` from the exponential form.
pub fn m_matrix_row<T: Real>(cfg: &SystemConfig<T>, t: T) -> Result<ModeRow<T>> {
    let m = m_matrix(cfg.zeta())?;
    let freqs = super::config::eigen_frequencies(cfg).values;
    let i = imag(T::one());
    let mu = [(i * freqs[0] * t).exp(), (-i * freqs[0] * t).exp(), (i * freqs[2] * t).exp(), (-i * freqs[2] * t).exp()];
    let phase = cis(cfg.omega * t);
    let mut row: ModeRow<T> = [czero(); 4];
    for (col, out) in row.iter_mut().enumerate() {
        let mut acc: C<T> = czero();
        for k in 0..4 {
            acc += mu[k] * m[k][col];
        }
        *out = acc * phase;
    }
    Ok(row)
}

/// Number-conserving (rotating-wave) united row: `ā(t) = ā cos g't − i c sin g't`.
pub fn rwa_row<T: Real>(g_prime: T, t: T) -> ModeRow<T> {
    let phi = g_prime * t;
    [real(phi.cos()), czero(), imag(-phi.sin()), czero()]
}
