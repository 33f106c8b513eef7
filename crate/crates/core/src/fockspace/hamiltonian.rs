use ndarray::Array2;

use crate::analytic::SystemConfig;
use crate::error::{Error, Result};
use crate::scalar::{cis, czero, real, Real, C};

use super::basis::FockBasis;

/// Compressed-row sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<V> {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<V>,
}

impl<V: Copy> Csr<V> {
    fn from_triplets(dim: usize, mut trip: Vec<(usize, usize, V)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; dim + 1];
        for &(r, _, _) in &trip {
            indptr[r + 1] += 1;
        }
        for i in 0..dim {
            indptr[i + 1] += indptr[i];
        }
        let indices = trip.iter().map(|t| t.1).collect();
        let values = trip.into_iter().map(|t| t.2).collect();
        Self { dim, indptr, indices, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, V)> + '_ {
        (0..self.dim)
            .flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k])))
    }
}

impl<T: Real> Csr<T> {
    /// `y += coeff · A x`
    #[inline]
    fn mul_add(&self, coeff: C<T>, x: &[C<T>], y: &mut [C<T>]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = czero::<T>();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += x[self.indices[k]] * self.values[k];
            }
            *yr += coeff * acc;
        }
    }
}

/// Sparse complex operator on a truncated Fock space.
pub type SparseOperator<T> = Csr<C<T>>;

impl<T: Real> SparseOperator<T> {
    pub fn apply(&self, x: &[C<T>]) -> Vec<C<T>> {
        (0..self.dim)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1]).fold(czero(), |acc, k| acc + self.values[k] * x[self.indices[k]])
            })
            .collect()
    }

    pub fn to_dense(&self) -> Array2<C<T>> {
        let mut m = Array2::from_elem((self.dim, self.dim), czero());
        for (r, c, v) in self.triplets() {
            m[[r, c]] += v;
        }
        m
    }

    /// `max_ij |H_ij − conj(H_ji)|`
    pub fn hermiticity_residual(&self) -> T {
        let m = self.to_dense();
        let mut worst = T::zero();
        for ((i, j), &z) in m.indexed_iter() {
            worst = worst.max((z - m[[j, i]].conj()).norm());
        }
        worst
    }
}

/// Which interaction to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HamiltonianKind {
    /// Beam-splitter terms plus the counter-rotating pair terms.
    #[default]
    Full,
    /// Beam-splitter terms only.
    RotatingWave,
}

/// Interaction-frame Hamiltonian split as `H(t) = B + e^{−2iωt} P + e^{2iωt} P†`
/// with `B = Σ g k_j (a_j c† + a_j† c)` and `P = Σ g k_j a_j c`.
#[derive(Debug, Clone)]
pub struct Generator<T> {
    omega: T,
    hop: Csr<T>,
    pair: Csr<T>,
    pair_adj: Csr<T>,
    kind: HamiltonianKind,
}

pub(crate) fn check_basis<T: Real>(cfg: &SystemConfig<T>, basis: &FockBasis) -> Result<()> {
    if basis.n_modes() != cfg.n_modes() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} modes but the system has {} nodes plus a channel",
            basis.n_modes(),
            cfg.n_modes()
        )));
    }
    Ok(())
}

impl<T: Real> Generator<T> {
    pub fn new(cfg: &SystemConfig<T>, basis: &FockBasis, kind: HamiltonianKind) -> Result<Self> {
        check_basis(cfg, basis)?;
        let dim = basis.total_dim();
        let ch = basis.n_modes() - 1;
        let dc = basis.dims()[ch];
        let sc = basis.stride(ch);
        let sqrt: Vec<T> =
            (0..=basis.dims().iter().copied().max().unwrap_or(1)).map(|n| T::from_usize_lossy(n).sqrt()).collect();
        let mut hop = Vec::new();
        let mut pair = Vec::new();
        for idx in 0..dim {
            let nc = basis.occupation(idx, ch);
            for (j, &k) in cfg.weights.as_slice().iter().enumerate() {
                let gk = cfg.g * k;
                let nj = basis.occupation(idx, j);
                if gk.is_zero() || nj == 0 {
                    continue;
                }
                let sj = basis.stride(j);
                if nc + 1 < dc {
                    let v = gk * sqrt[nj] * sqrt[nc + 1];
                    let tgt = idx - sj + sc;
                    hop.push((tgt, idx, v));
                    hop.push((idx, tgt, v));
                }
                if nc >= 1 {
                    pair.push((idx - sj - sc, idx, gk * sqrt[nj] * sqrt[nc]));
                }
            }
        }
        let pair_adj = pair.iter().map(|&(r, c, v)| (c, r, v)).collect();
        Ok(Self {
            omega: cfg.omega,
            hop: Csr::from_triplets(dim, hop),
            pair: Csr::from_triplets(dim, pair),
            pair_adj: Csr::from_triplets(dim, pair_adj),
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.hop.dim
    }

    /// `out = −i H(t) ψ`
    pub fn derivative(&self, t: T, psi: &[C<T>], out: &mut [C<T>]) {
        out.iter_mut().for_each(|z| *z = czero());
        let mi = C::new(T::zero(), -T::one());
        self.hop.mul_add(mi, psi, out);
        if self.kind == HamiltonianKind::Full {
            let rot = cis(-T::lit(2.0) * self.omega * t);
            self.pair.mul_add(mi * rot, psi, out);
            self.pair_adj.mul_add(mi * rot.conj(), psi, out);
        }
    }

    /// Assembled `H(t)`.
    pub fn at(&self, t: T) -> SparseOperator<T> {
        let mut trip: Vec<(usize, usize, C<T>)> = self.hop.triplets().map(|(r, c, v)| (r, c, real(v))).collect();
        if self.kind == HamiltonianKind::Full {
            let rot = cis(-T::lit(2.0) * self.omega * t);
            trip.extend(self.pair.triplets().map(|(r, c, v)| (r, c, rot * v)));
            trip.extend(self.pair_adj.triplets().map(|(r, c, v)| (r, c, rot.conj() * v)));
        }
        Csr::from_triplets(self.dim(), trip)
    }
}

/// Interaction-frame `H̃(t)` on the truncated space.
pub fn build_hamiltonian<T: Real>(cfg: &SystemConfig<T>, basis: &FockBasis, t: T) -> Result<SparseOperator<T>> {
    Ok(Generator::new(cfg, basis, HamiltonianKind::Full)?.at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::CouplingWeights;

    fn cfg(g: f64, k: Vec<f64>) -> SystemConfig<f64> {
        SystemConfig::new(1.0, g, CouplingWeights::new(k).unwrap()).unwrap()
    }

    #[test]
    fn zero_coupling_is_zero_operator() {
        let b = FockBasis::uniform(3, 3).unwrap();
        let h = build_hamiltonian(&cfg(0.0, vec![1.0, 1.0]), &b, 0.3).unwrap();
        assert_eq!(h.nnz(), 0);
    }

    #[test]
    fn single_hopping_element() {
        let b = FockBasis::uniform(2, 3).unwrap();
        let h = build_hamiltonian(&cfg(0.3, vec![0.7]), &b, 0.0).unwrap().to_dense();
        let i10 = b.index_of(&[1, 0]).unwrap();
        let i01 = b.index_of(&[0, 1]).unwrap();
        assert!((h[[i10, i01]] - real(0.3 * 0.7)).norm() < 1e-15);
    }

    #[test]
    fn hermitian_at_random_times() {
        let b = FockBasis::network(&[3, 4], 5).unwrap();
        let c = cfg(0.4, vec![1.0, -0.6]);
        for t in [0.0, 0.37, 2.9, 11.3] {
            assert!(build_hamiltonian(&c, &b, t).unwrap().hermiticity_residual() < 1e-14);
        }
    }

    #[test]
    fn mode_count_checked() {
        let b = FockBasis::uniform(2, 3).unwrap();
        assert!(build_hamiltonian(&cfg(0.1, vec![1.0, 1.0]), &b, 0.0).is_err());
    }
}
