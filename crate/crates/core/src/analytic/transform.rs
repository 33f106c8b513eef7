use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, cone, czero, Real, C};

use super::config::SystemConfig;
use super::united::{channel_row, rwa_row, united_mode_transform, ModeRow};

/// Reference frame of a transform. The interaction frame removes the free
/// rotation `e^{-iωt}` of every mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Interaction,
    Schrodinger,
}

/// Linear Heisenberg map `b(t) = U_A b(0) + U_B b†(0)` on the mode vector
/// `(a_1, …, a_n, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform<T> {
    pub u_a: Array2<C<T>>,
    pub u_b: Array2<C<T>>,
    pub time: T,
    pub omega: T,
    pub frame: Frame,
}

/// Residuals of the bosonic commutation constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticResidual {
    /// `‖U_A U_A† − U_B U_B† − I‖∞`
    pub unitarity: f64,
    /// `‖U_A U_Bᵀ − (U_A U_Bᵀ)ᵀ‖∞`
    pub symmetry: f64,
    /// `max(1, max_i Σ_j |U_A|² + |U_B|²)`; divides the residuals for growing solutions.
    pub scale: f64,
}

impl SymplecticResidual {
    pub fn max_abs(&self) -> f64 {
        self.unitarity.max(self.symmetry)
    }

    pub fn max_relative(&self) -> f64 {
        self.max_abs() / self.scale
    }
}

/// Serializable form with complex entries as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub frame: Frame,
    pub time: f64,
    pub omega: f64,
    pub mode_order: Vec<String>,
    pub u_a: Vec<Vec<[f64; 2]>>,
    pub u_b: Vec<Vec<[f64; 2]>>,
}

fn inf_norm<T: Real>(m: &Array2<C<T>>) -> f64 {
    m.rows().into_iter().map(|row| row.iter().map(|z| z.norm().to_f64_lossy()).sum::<f64>()).fold(0.0, f64::max)
}

fn adjoint<T: Real>(m: &Array2<C<T>>) -> Array2<C<T>> {
    m.t().mapv(|z| z.conj())
}

impl<T: Real> BogoliubovTransform<T> {
    pub fn n_total(&self) -> usize {
        self.u_a.nrows()
    }

    pub fn identity(n_total: usize, omega: T, frame: Frame) -> Self {
        Self {
            u_a: Array2::from_diag_elem(n_total, cone()),
            u_b: Array2::from_elem((n_total, n_total), czero()),
            time: T::zero(),
            omega,
            frame,
        }
    }

    /// `true` when no creation operators mix in, i.e. the map conserves excitation number.
    pub fn is_number_conserving(&self, tol: T) -> bool {
        self.u_b.iter().all(|z| z.norm() <= tol)
    }

    pub fn to_frame(&self, frame: Frame) -> Self {
        if frame == self.frame {
            return self.clone();
        }
        let phi = match frame {
            Frame::Schrodinger => -self.omega * self.time,
            Frame::Interaction => self.omega * self.time,
        };
        let p = cis(phi);
        Self { u_a: self.u_a.mapv(|z| z * p), u_b: self.u_b.mapv(|z| z * p), time: self.time, omega: self.omega, frame }
    }

    /// Transform for evolving by `self` and then by `later` under the same
    /// time-independent Schrödinger-frame Hamiltonian. Returned in the
    /// Schrödinger frame.
    pub fn then(&self, later: &Self) -> Result<Self> {
        if self.n_total() != later.n_total() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}-mode and {}-mode transforms",
                self.n_total(),
                later.n_total()
            )));
        }
        if self.omega != later.omega {
            return Err(Error::param("omega", "composed transforms must share the mode frequency"));
        }
        let first = self.to_frame(Frame::Schrodinger);
        let second = later.to_frame(Frame::Schrodinger);
        let b1c = first.u_b.mapv(|z| z.conj());
        let a1c = first.u_a.mapv(|z| z.conj());
        let u_a = second.u_a.dot(&first.u_a) + second.u_b.dot(&b1c);
        let u_b = second.u_a.dot(&first.u_b) + second.u_b.dot(&a1c);
        Ok(Self { u_a, u_b, time: self.time + later.time, omega: self.omega, frame: Frame::Schrodinger })
    }

    pub fn symplectic_residual(&self) -> SymplecticResidual {
        let n = self.n_total();
        let id: Array2<C<T>> = Array2::from_diag_elem(n, cone());
        let unit = self.u_a.dot(&adjoint(&self.u_a)) - self.u_b.dot(&adjoint(&self.u_b)) - id;
        let sym = self.u_a.dot(&self.u_b.t());
        let asym = &sym - &sym.t();
        let scale = (0..n)
            .map(|i| {
                self.u_a.row(i).iter().chain(self.u_b.row(i).iter()).map(|z| z.norm_sqr().to_f64_lossy()).sum::<f64>()
            })
            .fold(1.0, f64::max);
        SymplecticResidual { unitarity: inf_norm(&unit), symmetry: inf_norm(&asym), scale }
    }

    pub fn to_record(&self) -> TransformRecord {
        let n = self.n_total();
        let pairs = |m: &Array2<C<T>>| -> Vec<Vec<[f64; 2]>> {
            m.rows()
                .into_iter()
                .map(|row| row.iter().map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]).collect())
                .collect()
        };
        let mut mode_order: Vec<String> = (1..n).map(|i| format!("a{i}")).collect();
        mode_order.push("c".to_string());
        TransformRecord {
            frame: self.frame,
            time: self.time.to_f64_lossy(),
            omega: self.omega.to_f64_lossy(),
            mode_order,
            u_a: pairs(&self.u_a),
            u_b: pairs(&self.u_b),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("transform record serializes")
    }
}

/// Spread a united-mode row over the node modes; the orthogonal complement of
/// the united mode is left untouched.
fn assemble<T: Real>(cfg: &SystemConfig<T>, united: &ModeRow<T>, t: T) -> BogoliubovTransform<T> {
    let w = cfg.weights.unit();
    let n = w.len();
    let chan = channel_row(united);
    let mut u_a = Array2::from_elem((n + 1, n + 1), czero());
    let mut u_b = Array2::from_elem((n + 1, n + 1), czero());
    for i in 0..n {
        for j in 0..n {
            let wij = w[i] * w[j];
            let delta = if i == j { T::one() } else { T::zero() };
            u_a[[i, j]] = united[0] * wij + C::new(delta - wij, T::zero());
            u_b[[i, j]] = united[1] * wij;
        }
        u_a[[i, n]] = united[2] * w[i];
        u_b[[i, n]] = united[3] * w[i];
        u_a[[n, i]] = chan[0] * w[i];
        u_b[[n, i]] = chan[1] * w[i];
    }
    u_a[[n, n]] = chan[2];
    u_b[[n, n]] = chan[3];
    BogoliubovTransform { u_a, u_b, time: t, omega: cfg.omega, frame: Frame::Interaction }
}

/// Exact interaction-frame transform after duration `t`.
pub fn full_transform<T: Real>(cfg: &SystemConfig<T>, t: T) -> Result<BogoliubovTransform<T>> {
    let row = united_mode_transform(cfg, t)?;
    Ok(assemble(cfg, &row, t))
}

/// Transform generated by the rotating-wave Hamiltonian `g Σ k_j (a_j c† + c a_j†)`.
pub fn rwa_transform<T: Real>(cfg: &SystemConfig<T>, t: T) -> Result<BogoliubovTransform<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::param("t", "duration must be finite and non-negative"));
    }
    let row = rwa_row(cfg.g_prime(), t);
    Ok(assemble(cfg, &row, t))
}

/// Row of `a_1(t)` for two equally weighted nodes, over
/// `(a_1, a_2, c)` annihilators (`k11, k21, kc1`) and creators (`k12, k22, kc2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferCoefficients<T> {
    pub k11: C<T>,
    pub k21: C<T>,
    pub kc1: C<T>,
    pub k12: C<T>,
    pub k22: C<T>,
    pub kc2: C<T>,
}

impl<T: Real> TransferCoefficients<T> {
    /// `|K11|² + |K21|² + |Kc1|² − |K12|² − |K22|² − |Kc2|² − 1`, zero for a valid solution.
    pub fn commutator_residual(&self) -> T {
        self.k11.norm_sqr() + self.k21.norm_sqr() + self.kc1.norm_sqr()
            - self.k12.norm_sqr()
            - self.k22.norm_sqr()
            - self.kc2.norm_sqr()
            - T::one()
    }
}

pub fn transfer_coefficients<T: Real>(cfg: &SystemConfig<T>, t: T) -> Result<TransferCoefficients<T>> {
    let k = cfg.weights.as_slice();
    if k.len() != 2 {
        return Err(Error::param("weights", format!("transfer coefficients need 2 node modes, got {}", k.len())));
    }
    if k[0] != k[1] {
        return Err(Error::param("weights", "transfer coefficients need equal weights k1 = k2"));
    }
    let tr = full_transform(cfg, t)?;
    Ok(TransferCoefficients {
        k11: tr.u_a[[0, 0]],
        k21: tr.u_a[[0, 1]],
        kc1: tr.u_a[[0, 2]],
        k12: tr.u_b[[0, 0]],
        k22: tr.u_b[[0, 1]],
        kc2: tr.u_b[[0, 2]],
    })
}
