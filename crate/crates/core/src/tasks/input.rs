use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{CatParity, ModeState};
use crate::scalar::{czero, Real, C};

use super::truncation::Moments;

/// Single-mode input loaded into the sender.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputState<T> {
    Fock { n: usize },
    Coherent { re: T, im: T },
    Cat { re: T, im: T, odd: bool },
}

impl<T: Real> InputState<T> {
    pub fn fock(n: usize) -> Self {
        InputState::Fock { n }
    }

    pub fn coherent(alpha: C<T>) -> Self {
        InputState::Coherent { re: alpha.re, im: alpha.im }
    }

    /// `|α| e^{iφ}`
    pub fn coherent_polar(magnitude: T, phase: T) -> Self {
        Self::coherent(C::from_polar(magnitude, phase))
    }

    pub fn cat(alpha: C<T>, parity: CatParity) -> Self {
        InputState::Cat { re: alpha.re, im: alpha.im, odd: parity == CatParity::Odd }
    }

    fn alpha(&self) -> C<T> {
        match *self {
            InputState::Fock { .. } => czero(),
            InputState::Coherent { re, im } | InputState::Cat { re, im, .. } => C::new(re, im),
        }
    }

    /// Smallest truncation that can represent the state.
    pub fn min_dim(&self) -> usize {
        match self {
            InputState::Fock { n } => n + 2,
            _ => {
                let a = self.alpha().norm().to_f64_lossy();
                ((a * a + 6.0 * a).ceil() as usize).max(2)
            }
        }
    }

    pub fn mode_state(&self, d: usize) -> Result<ModeState<T>> {
        match *self {
            InputState::Fock { n } => ModeState::fock(n, d),
            InputState::Coherent { re, im } => ModeState::coherent(C::new(re, im), d),
            InputState::Cat { re, im, odd } => {
                ModeState::cat(C::new(re, im), if odd { CatParity::Odd } else { CatParity::Even }, d)
            }
        }
    }

    pub fn ket(&self, d: usize) -> Result<Array1<C<T>>> {
        Ok(self.mode_state(d)?.ket().expect("inputs are pure").clone())
    }

    /// Low-order moments `⟨a⟩`, `⟨a†a⟩`, `⟨a²⟩` of the prepared state.
    pub fn moments(&self) -> Result<Moments<T>> {
        Ok(Moments::of_ket(&self.ket(self.min_dim().max(8) + 8)?))
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha();
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::param("input", "amplitude must be finite"));
        }
        if let InputState::Cat { odd: true, .. } = self {
            if a.norm().is_zero() {
                return Err(Error::param("input", "odd cat needs α ≠ 0"));
            }
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for InputState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let polar = |re: T, im: T| {
            let z = C::new(re, im);
            let (r, p) = (z.norm().to_f64_lossy(), z.arg().to_f64_lossy());
            if p == 0.0 {
                format!("{r}")
            } else {
                format!("{r}@{p}")
            }
        };
        match *self {
            InputState::Fock { n } => write!(f, "fock:{n}"),
            InputState::Coherent { re, im } => write!(f, "coherent:{}", polar(re, im)),
            InputState::Cat { re, im, odd } => {
                write!(f, "cat:{}{}", polar(re, im), if odd { ":odd" } else { "" })
            }
        }
    }
}

/// `fock:N`, `coherent:R[@PHASE]`, `cat:R[@PHASE][:even|:odd]`; phases in radians.
impl<T: Real> FromStr for InputState<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::param("input", format!("`{s}`: {why}"));
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let arg = parts.next().ok_or_else(|| bad("missing parameter after `:`"))?;
        let amplitude = |text: &str| -> Result<C<T>> {
            let (r, p) = text.split_once('@').unwrap_or((text, "0"));
            let r: f64 = r.trim().parse().map_err(|_| bad("magnitude is not a number"))?;
            let p: f64 = p.trim().parse().map_err(|_| bad("phase is not a number"))?;
            if r < 0.0 {
                return Err(bad("magnitude must be non-negative"));
            }
            Ok(C::from_polar(T::lit(r), T::lit(p)))
        };
        let state = match kind.as_str() {
            "fock" => InputState::Fock { n: arg.trim().parse().map_err(|_| bad("Fock level must be an integer"))? },
            "coherent" => Self::coherent(amplitude(arg)?),
            "cat" => {
                let parity = match parts.next().map(|p| p.trim().to_ascii_lowercase()) {
                    None => CatParity::Even,
                    Some(p) if p == "even" => CatParity::Even,
                    Some(p) if p == "odd" => CatParity::Odd,
                    Some(_) => return Err(bad("cat parity must be `even` or `odd`")),
                };
                Self::cat(amplitude(arg)?, parity)
            }
            _ => return Err(bad("kind must be fock, coherent or cat")),
        };
        if parts.next().is_some() {
            return Err(bad("too many `:` fields"));
        }
        state.validate()?;
        Ok(state)
    }
}
