use std::io::Write;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};

use super::state::TruncatedState;

/// Quadratures `x = (a + a†)/√2`, `p = (a − a†)/(√2 i)`, `[x, p] = i`,
/// normalized so that `∫∫ W dx dp = 1`.
pub const WIGNER_CONVENTION: &str = "x=(a+a^dag)/sqrt2, p=(a-a^dag)/(sqrt2 i), [x,p]=i, integral W dx dp = 1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid<T> {
    pub xs: Vec<T>,
    pub ps: Vec<T>,
    /// `values[[ix, ip]] = W(xs[ix], ps[ip])`
    #[serde(skip)]
    pub values: Array2<T>,
    pub convention: &'static str,
}

impl<T: Real> WignerGrid<T> {
    /// Trapezoidal `∫∫ W dx dp` (only meaningful on uniform grids that cover the state).
    pub fn integral(&self) -> T {
        let weights = |v: &[T]| -> Vec<T> {
            (0..v.len())
                .map(|i| {
                    let left = if i > 0 { v[i] - v[i - 1] } else { T::zero() };
                    let right = if i + 1 < v.len() { v[i + 1] - v[i] } else { T::zero() };
                    (left + right) / T::lit(2.0)
                })
                .collect()
        };
        let (wx, wp) = (weights(&self.xs), weights(&self.ps));
        let mut acc = T::zero();
        for (ix, &a) in wx.iter().enumerate() {
            for (ip, &b) in wp.iter().enumerate() {
                acc += a * b * self.values[[ix, ip]];
            }
        }
        acc
    }

    /// `x,p,W` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Unsupported(format!("csv write failed: {e}"));
        w.write_record(["x", "p", "W"]).map_err(io)?;
        for (ix, x) in self.xs.iter().enumerate() {
            for (ip, p) in self.ps.iter().enumerate() {
                w.write_record([
                    format!("{:.11e}", x.to_f64_lossy()),
                    format!("{:.11e}", p.to_f64_lossy()),
                    format!("{:.11e}", self.values[[ix, ip]].to_f64_lossy()),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Unsupported(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Wigner function of a single-mode state on the grid `xs × ps`.
///
/// Uses the Laguerre recursion over `W_mn` (the iterative scheme popularised
/// by QuTiP) with `α = (x + ip)/√2`.
pub fn wigner<T: Real>(state: &TruncatedState<T>, xs: &[T], ps: &[T]) -> Result<WignerGrid<T>> {
    if state.basis().n_modes() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "Wigner function needs a single-mode state, got {} modes",
            state.basis().n_modes()
        )));
    }
    if xs.is_empty() || ps.is_empty() || xs.iter().chain(ps).any(|v| !v.is_finite()) {
        return Err(Error::param("grid", "grid axes must be non-empty and finite"));
    }
    let rho = state.to_density();
    let d = rho.nrows();
    let sqrt: Vec<T> = (0..=d).map(|n| T::from_usize_lossy(n).sqrt()).collect();
    let pi = T::PI();
    let two = T::lit(2.0);
    let mut values = Array2::from_elem((xs.len(), ps.len()), T::zero());
    let mut wl: Vec<C<T>> = vec![czero(); d];
    for (ix, &x) in xs.iter().enumerate() {
        for (ip, &p) in ps.iter().enumerate() {
            let a = C::new(x, p) / T::SQRT_2();
            wl[0] = C::new((-two * a.norm_sqr()).exp() / pi, T::zero());
            let mut w = rho[[0, 0]].re * wl[0].re;
            for n in 1..d {
                wl[n] = a * wl[n - 1] * two / sqrt[n];
                w += two * (rho[[0, n]] * wl[n]).re;
            }
            for m in 1..d {
                let mut temp = wl[m];
                wl[m] = (a.conj() * temp * two - wl[m - 1] * sqrt[m]) / sqrt[m];
                w += (rho[[m, m]] * wl[m]).re;
                for n in m + 1..d {
                    let next = (a * wl[n - 1] * two - temp * sqrt[m]) / sqrt[n];
                    temp = wl[n];
                    wl[n] = next;
                    w += two * (rho[[m, n]] * wl[n]).re;
                }
            }
            values[[ix, ip]] = w;
        }
    }
    let grid = WignerGrid { xs: xs.to_vec(), ps: ps.to_vec(), values, convention: WIGNER_CONVENTION };
    if xs.len() > 1 && ps.len() > 1 {
        let total = grid.integral().to_f64_lossy();
        if (total - 1.0).abs() > 1e-2 {
            log::warn!("Wigner grid integrates to {total:.4}; grid too coarse or too small to capture the state");
        }
    }
    Ok(grid)
}

/// `n` uniformly spaced points on `[lo, hi]`.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1)).collect()
}
