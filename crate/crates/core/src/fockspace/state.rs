use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::scalar::{cone, czero, real, Real, C};

use super::basis::FockBasis;

/// Tolerance on norms, weight sums and traces of constructed states.
pub const NORM_TOL: f64 = 1e-10;

/// Weight below which mixture branches and density eigenvalues are discarded.
pub const THERMAL_TAIL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Representation<T> {
    Pure(Array1<C<T>>),
    /// Classical mixture of normalized pure branches.
    Mixture(Vec<(T, Array1<C<T>>)>),
    Density(Array2<C<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState<T> {
    basis: FockBasis,
    repr: Representation<T>,
}

pub(crate) fn norm_sq<T: Real>(v: &Array1<C<T>>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

fn check_len<T>(basis: &FockBasis, v: &Array1<C<T>>) -> Result<()> {
    if v.len() != basis.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "amplitude vector of length {} for basis of dimension {}",
            v.len(),
            basis.total_dim()
        )));
    }
    Ok(())
}

fn check_unit<T: Real>(v: &Array1<C<T>>) -> Result<()> {
    let n = norm_sq(v).sqrt().to_f64_lossy();
    if (n - 1.0).abs() > NORM_TOL.max(tol_for::<T>()) {
        return Err(Error::Normalization(format!("vector norm {n}")));
    }
    Ok(())
}

/// Normalization tolerance adjusted for the scalar precision.
fn tol_for<T: Real>() -> f64 {
    (T::epsilon().to_f64_lossy() * 1e3).max(NORM_TOL)
}

impl<T: Real> TruncatedState<T> {
    pub fn pure(basis: FockBasis, amplitudes: Array1<C<T>>) -> Result<Self> {
        check_len(&basis, &amplitudes)?;
        check_unit(&amplitudes)?;
        Ok(Self { basis, repr: Representation::Pure(amplitudes) })
    }

    pub fn mixture(basis: FockBasis, branches: Vec<(T, Array1<C<T>>)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::Normalization("empty mixture".into()));
        }
        let mut total = 0.0;
        for (w, v) in &branches {
            if *w < T::zero() {
                return Err(Error::Normalization(format!("negative weight {w}")));
            }
            check_len(&basis, v)?;
            check_unit(v)?;
            total += w.to_f64_lossy();
        }
        if (total - 1.0).abs() > tol_for::<T>() {
            return Err(Error::Normalization(format!("mixture weights sum to {total}")));
        }
        Ok(Self { basis, repr: Representation::Mixture(branches) })
    }

    pub fn density(basis: FockBasis, rho: Array2<C<T>>) -> Result<Self> {
        let d = basis.total_dim();
        if rho.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!("density of shape {:?} for dimension {d}", rho.dim())));
        }
        let tr = rho.diag().iter().fold(czero::<T>(), |a, &z| a + z);
        if (tr.re.to_f64_lossy() - 1.0).abs() > tol_for::<T>() || tr.im.abs().to_f64_lossy() > tol_for::<T>() {
            return Err(Error::Normalization(format!("density trace {tr}")));
        }
        Ok(Self { basis, repr: Representation::Density(rho) })
    }

    /// Product Fock state with the given occupations.
    pub fn fock(basis: FockBasis, occupations: &[usize]) -> Result<Self> {
        let idx = basis.index_of(occupations)?;
        let mut v = Array1::from_elem(basis.total_dim(), czero());
        v[idx] = cone();
        Ok(Self { basis, repr: Representation::Pure(v) })
    }

    /// Tensor product of single-mode states; labels default to `a1..an, c`.
    pub fn product(factors: &[ModeState<T>], labels: Option<Vec<String>>) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
        let labels = labels.unwrap_or_else(|| super::basis::network_labels(factors.len().saturating_sub(1)));
        let basis = FockBasis::new(dims, labels)?;
        let mut branches: Vec<(T, Array1<C<T>>)> = vec![(T::one(), Array1::from_elem(1, cone()))];
        for f in factors {
            let mut next = Vec::with_capacity(branches.len() * f.branches.len());
            for (w, v) in &branches {
                for (wf, k) in &f.branches {
                    next.push((*w * *wf, kron(v, k)));
                }
            }
            branches = next;
        }
        if branches.len() == 1 {
            let (_, v) = branches.pop().expect("one branch");
            Ok(Self { basis, repr: Representation::Pure(v) })
        } else {
            Ok(Self { basis, repr: Representation::Mixture(branches) })
        }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn representation(&self) -> &Representation<T> {
        &self.repr
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Representation::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&Array1<C<T>>> {
        match &self.repr {
            Representation::Pure(v) => Some(v),
            _ => None,
        }
    }

    pub(crate) fn from_parts(basis: FockBasis, repr: Representation<T>) -> Self {
        Self { basis, repr }
    }

    /// Weighted pure branches; a density matrix is eigendecomposed and
    /// eigenvalues below the thermal tail are dropped.
    pub fn branches(&self) -> Vec<(T, Array1<C<T>>)> {
        match &self.repr {
            Representation::Pure(v) => vec![(T::one(), v.clone())],
            Representation::Mixture(b) => b.clone(),
            Representation::Density(rho) => {
                let (vals, vecs) = hermitian_eigen(rho);
                vals.into_iter()
                    .zip(vecs)
                    .filter(|(l, _)| *l > THERMAL_TAIL * 1e-6)
                    .map(|(l, v)| (T::lit(l), v))
                    .collect()
            }
        }
    }

    /// Dense density matrix over the full basis.
    pub fn to_density(&self) -> Array2<C<T>> {
        match &self.repr {
            Representation::Density(rho) => rho.clone(),
            _ => {
                let d = self.basis.total_dim();
                let mut rho = Array2::from_elem((d, d), czero());
                for (w, v) in self.branches() {
                    for i in 0..d {
                        if v[i] == czero() {
                            continue;
                        }
                        let vi = v[i] * w;
                        for j in 0..d {
                            rho[[i, j]] += vi * v[j].conj();
                        }
                    }
                }
                rho
            }
        }
    }

    /// `Tr ρ` (1 for valid states; drifts under lossy evolution).
    pub fn trace(&self) -> T {
        match &self.repr {
            Representation::Pure(v) => norm_sq(v),
            Representation::Mixture(b) => b.iter().fold(T::zero(), |a, (w, v)| a + *w * norm_sq(v)),
            Representation::Density(rho) => rho.diag().iter().fold(T::zero(), |a, z| a + z.re),
        }
    }
}

pub(crate) fn kron<T: Real>(a: &Array1<C<T>>, b: &Array1<C<T>>) -> Array1<C<T>> {
    let mut out = Array1::from_elem(a.len() * b.len(), czero());
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatParity {
    Even,
    Odd,
}

/// Single-mode state as weighted pure branches; used to assemble product states.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<T> {
    branches: Vec<(T, Array1<C<T>>)>,
}

impl<T: Real> ModeState<T> {
    pub fn from_ket(ket: Array1<C<T>>) -> Result<Self> {
        check_unit(&ket)?;
        Ok(Self { branches: vec![(T::one(), ket)] })
    }

    pub fn vacuum(d: usize) -> Result<Self> {
        Self::fock(0, d)
    }

    pub fn fock(n: usize, d: usize) -> Result<Self> {
        if n >= d {
            return Err(Error::TruncationTooSmall(format!("Fock level {n} needs d > {n}, got {d}")));
        }
        let mut v = Array1::from_elem(d, czero());
        v[n] = cone();
        Ok(Self { branches: vec![(T::one(), v)] })
    }

    /// Coherent state, renormalized after truncation. Requires `|α|² + 6|α| ≤ d`.
    pub fn coherent(alpha: C<T>, d: usize) -> Result<Self> {
        Ok(Self { branches: vec![(T::one(), coherent_ket(alpha, d)?)] })
    }

    /// `(|α⟩ ± |−α⟩)/N`.
    pub fn cat(alpha: C<T>, parity: CatParity, d: usize) -> Result<Self> {
        let plus = coherent_ket_unchecked(alpha, d);
        let minus = coherent_ket_unchecked(-alpha, d);
        check_coherent_budget(alpha, d)?;
        let mut v = match parity {
            CatParity::Even => &plus + &minus,
            CatParity::Odd => &plus - &minus,
        };
        let n = norm_sq(&v).sqrt();
        if n.is_zero() {
            return Err(Error::param("alpha", "odd cat with α = 0 is the zero vector"));
        }
        v.mapv_inplace(|z| z / n);
        Ok(Self { branches: vec![(T::one(), v)] })
    }

    /// Thermal mode at temperature `temperature` (units of ω, `k_B = ħ = 1`):
    /// Fock mixture with weights `(1−x)xⁿ`, `x = e^{−ω/T}`, cut where the
    /// remaining tail `x^N` drops below `1e-8`, then renormalized.
    pub fn thermal(temperature: T, omega: T, d: usize) -> Result<Self> {
        let weights = thermal_weights(temperature, omega)?;
        if weights.len() > d {
            return Err(Error::TruncationTooSmall(format!(
                "thermal state at T={temperature} needs {} levels, got {d}",
                weights.len()
            )));
        }
        let branches = weights
            .into_iter()
            .enumerate()
            .map(|(n, w)| {
                let mut v = Array1::from_elem(d, czero());
                v[n] = cone();
                (w, v)
            })
            .collect();
        Ok(Self { branches })
    }

    pub fn dim(&self) -> usize {
        self.branches[0].1.len()
    }

    pub fn branches(&self) -> &[(T, Array1<C<T>>)] {
        &self.branches
    }

    pub fn is_pure(&self) -> bool {
        self.branches.len() == 1
    }

    pub fn ket(&self) -> Option<&Array1<C<T>>> {
        if self.is_pure() {
            Some(&self.branches[0].1)
        } else {
            None
        }
    }

    pub fn mean_occupation(&self) -> T {
        self.branches.iter().fold(T::zero(), |acc, (w, v)| {
            acc + *w * v.iter().enumerate().fold(T::zero(), |a, (n, z)| a + T::from_usize_lossy(n) * z.norm_sqr())
        })
    }
}

/// Boltzmann weights of a thermal mode, truncated at tail `1e-8` and renormalized.
pub fn thermal_weights<T: Real>(temperature: T, omega: T) -> Result<Vec<T>> {
    if !(temperature >= T::zero()) || !temperature.is_finite() {
        return Err(Error::param("temperature", "must be finite and non-negative"));
    }
    if temperature.is_zero() {
        return Ok(vec![T::one()]);
    }
    let x = (-omega / temperature).exp();
    let tail = T::lit(THERMAL_TAIL);
    let mut weights = Vec::new();
    let mut xn = T::one();
    while xn >= tail {
        weights.push((T::one() - x) * xn);
        xn *= x;
        if weights.len() > 1 << 20 {
            return Err(Error::param("temperature", "thermal occupation too large to truncate"));
        }
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    Ok(weights.into_iter().map(|w| w / total).collect())
}

fn check_coherent_budget<T: Real>(alpha: C<T>, d: usize) -> Result<()> {
    let a = alpha.norm();
    let need = a * a + T::lit(6.0) * a;
    if need > T::from_usize_lossy(d) {
        return Err(Error::TruncationTooSmall(format!(
            "coherent amplitude |α|={a} needs d ≥ |α|²+6|α| = {need}, got {d}"
        )));
    }
    Ok(())
}

fn coherent_ket_unchecked<T: Real>(alpha: C<T>, d: usize) -> Array1<C<T>> {
    let mut v = Array1::from_elem(d, czero());
    let mut c = real((-alpha.norm_sqr() / T::lit(2.0)).exp());
    for (n, slot) in v.iter_mut().enumerate() {
        if n > 0 {
            c = c * alpha / T::from_usize_lossy(n).sqrt();
        }
        *slot = c;
    }
    v
}

pub fn coherent_ket<T: Real>(alpha: C<T>, d: usize) -> Result<Array1<C<T>>> {
    check_coherent_budget(alpha, d)?;
    let mut v = coherent_ket_unchecked(alpha, d);
    let n = norm_sq(&v).sqrt();
    v.mapv_inplace(|z| z / n);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn cat_normalization_matches_closed_form() {
        let a = 1.2f64;
        let d = 30;
        let cat = ModeState::cat(cplx(a, 0.0), CatParity::Even, d).unwrap();
        let v = cat.ket().unwrap();
        assert!((norm_sq(v) - 1.0).abs() < 1e-14);
        // Unnormalized norm² is 2 + 2e^{−2|α|²}.
        let raw = &coherent_ket_unchecked(cplx(a, 0.0), d) + &coherent_ket_unchecked(cplx(-a, 0.0), d);
        assert!((norm_sq(&raw) - (2.0 + 2.0 * (-2.0 * a * a).exp())).abs() < 1e-12);
        // Even cat has no odd components.
        assert!(v.iter().skip(1).step_by(2).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn thermal_zero_is_vacuum() {
        let t = ModeState::<f64>::thermal(0.0, 1.0, 4).unwrap();
        assert!(t.is_pure());
        assert_eq!(t.mean_occupation(), 0.0);
    }

    #[test]
    fn thermal_mean_matches_bose_einstein() {
        let t = ModeState::<f64>::thermal(3.0, 1.0, 80).unwrap();
        let exact = 1.0 / ((1.0f64 / 3.0).exp() - 1.0);
        // The discarded tail carries about N·1e-8 occupation.
        assert!((t.mean_occupation() - exact).abs() < 1e-5, "{}", t.mean_occupation());
        assert!(ModeState::<f64>::thermal(3.0, 1.0, 20).is_err());
    }

    #[test]
    fn coherent_budget_enforced() {
        assert!(ModeState::coherent(cplx(1.4f64, 0.0), 10).is_err());
        assert!(ModeState::coherent(cplx(1.4f64, 0.0), 11).is_ok());
        assert!(ModeState::<f64>::fock(3, 3).is_err());
    }

    #[test]
    fn product_of_pure_and_thermal_is_mixture() {
        let f = ModeState::<f64>::fock(1, 3).unwrap();
        let th = ModeState::thermal(0.5, 1.0, 12).unwrap();
        let s = TruncatedState::product(&[f, ModeState::vacuum(3).unwrap(), th], None).unwrap();
        assert!(!s.is_pure());
        assert!((s.trace() - 1.0).abs() < 1e-12);
        assert_eq!(s.basis().labels(), &["a1", "a2", "c"]);
    }

    #[test]
    fn validation() {
        let b = FockBasis::uniform(2, 2).unwrap();
        let v = Array1::from_elem(4, cplx(0.6f64, 0.0));
        assert!(TruncatedState::pure(b.clone(), v).is_err());
        assert!(TruncatedState::<f64>::pure(b, Array1::from_elem(3, cone())).is_err());
    }
}
