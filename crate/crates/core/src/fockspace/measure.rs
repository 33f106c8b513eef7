use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::{cis, czero, Real, C};

use super::basis::FockBasis;
use super::state::{Representation, TruncatedState};

/// Largest reduced density matrix (rows × columns) that partial traces will build.
pub const DENSE_BUDGET: usize = 1 << 26;

/// `⟨n_mode⟩`
pub fn mode_occupation<T: Real>(state: &TruncatedState<T>, mode: usize) -> Result<T> {
    let basis = state.basis();
    basis.check_mode(mode)?;
    Ok(diagonal_expectation(state, |idx| T::from_usize_lossy(basis.occupation(idx, mode))))
}

/// `⟨a₁†a₁ + … + c†c⟩`
pub fn total_excitations<T: Real>(state: &TruncatedState<T>) -> T {
    let basis = state.basis();
    diagonal_expectation(state, |idx| T::from_usize_lossy((0..basis.n_modes()).map(|m| basis.occupation(idx, m)).sum()))
}

fn diagonal_expectation<T: Real>(state: &TruncatedState<T>, f: impl Fn(usize) -> T) -> T {
    let probe = |v: &Array1<C<T>>| v.iter().enumerate().fold(T::zero(), |a, (i, z)| a + f(i) * z.norm_sqr());
    match state.representation() {
        Representation::Pure(v) => probe(v),
        Representation::Mixture(b) => b.iter().fold(T::zero(), |a, (w, v)| a + *w * probe(v)),
        Representation::Density(rho) => rho.diag().iter().enumerate().fold(T::zero(), |a, (i, z)| a + f(i) * z.re),
    }
}

/// `⟨a_mode⟩`
pub fn expect_annihilation<T: Real>(state: &TruncatedState<T>, mode: usize) -> Result<C<T>> {
    let basis = state.basis();
    basis.check_mode(mode)?;
    let s = basis.stride(mode);
    let pure = |v: &Array1<C<T>>| {
        (0..v.len()).fold(czero::<T>(), |acc, x| {
            let n = basis.occupation(x, mode);
            if n == 0 {
                acc
            } else {
                acc + v[x - s].conj() * v[x] * T::from_usize_lossy(n).sqrt()
            }
        })
    };
    Ok(match state.representation() {
        Representation::Pure(v) => pure(v),
        Representation::Mixture(b) => b.iter().fold(czero(), |a, (w, v)| a + pure(v) * *w),
        Representation::Density(rho) => (0..rho.nrows()).fold(czero(), |acc, x| {
            let n = basis.occupation(x, mode);
            if n == 0 {
                acc
            } else {
                acc + rho[[x, x - s]] * T::from_usize_lossy(n).sqrt()
            }
        }),
    })
}

fn same_basis(a: &FockBasis, b: &FockBasis) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!("dims {:?} vs {:?}", a.dims(), b.dims())));
    }
    Ok(())
}

/// `f = ⟨ψ_i|ρ_f|ψ_i⟩`, the Uhlmann fidelity for a pure reference `ψ_i`.
pub fn fidelity<T: Real>(reference: &TruncatedState<T>, state: &TruncatedState<T>) -> Result<T> {
    let psi = reference.as_pure().ok_or(Error::MixedReference)?;
    same_basis(reference.basis(), state.basis())?;
    let overlap = |v: &Array1<C<T>>| psi.iter().zip(v).fold(czero::<T>(), |a, (p, z)| a + p.conj() * z).norm_sqr();
    Ok(match state.representation() {
        Representation::Pure(v) => overlap(v),
        Representation::Mixture(b) => b.iter().fold(T::zero(), |a, (w, v)| a + *w * overlap(v)),
        Representation::Density(rho) => {
            let rp = rho.dot(psi);
            psi.iter().zip(rp.iter()).fold(czero::<T>(), |a, (p, z)| a + p.conj() * z).re
        }
    })
}

/// Reduced density matrix of the modes in `keep` (in that order).
pub fn partial_trace<T: Real>(state: &TruncatedState<T>, keep: &[usize]) -> Result<TruncatedState<T>> {
    let basis = state.basis();
    if keep.is_empty() {
        return Err(Error::param("keep", "must name at least one mode"));
    }
    let mut seen = vec![false; basis.n_modes()];
    for &k in keep {
        basis.check_mode(k)?;
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::param("keep", format!("mode {k} listed twice")));
        }
    }
    let env: Vec<usize> = (0..basis.n_modes()).filter(|m| !seen[*m]).collect();
    let kept = basis.subset(keep)?;
    let dk = kept.total_dim();
    if dk.checked_mul(dk).is_none_or(|n| n > DENSE_BUDGET) {
        return Err(Error::DimensionBudget { requested: dk.saturating_mul(dk), budget: DENSE_BUDGET });
    }
    let env_basis = if env.is_empty() { None } else { Some(basis.subset(&env)?) };
    let de = env_basis.as_ref().map_or(1, |b| b.total_dim());
    // (kept index, environment index) of every full basis state.
    let split: Vec<(usize, usize)> = (0..basis.total_dim())
        .map(|idx| {
            let ki = keep.iter().enumerate().map(|(p, &m)| basis.occupation(idx, m) * kept.stride(p)).sum();
            let ei = env_basis
                .as_ref()
                .map_or(0, |eb| env.iter().enumerate().map(|(p, &m)| basis.occupation(idx, m) * eb.stride(p)).sum());
            (ki, ei)
        })
        .collect();

    let mut rho = Array2::from_elem((dk, dk), czero::<T>());
    let mut add_pure = |w: T, v: &Array1<C<T>>| {
        let mut psi = Array2::from_elem((dk, de), czero::<T>());
        for (idx, &(ki, ei)) in split.iter().enumerate() {
            psi[[ki, ei]] = v[idx];
        }
        let adj = psi.t().mapv(|z| z.conj());
        rho.scaled_add(C::new(w, T::zero()), &psi.dot(&adj));
    };
    match state.representation() {
        Representation::Pure(v) => add_pure(T::one(), v),
        Representation::Mixture(b) => b.iter().for_each(|(w, v)| add_pure(*w, v)),
        Representation::Density(full) => {
            for (a, &(ka, ea)) in split.iter().enumerate() {
                for (b, &(kb, eb)) in split.iter().enumerate() {
                    if ea == eb {
                        rho[[ka, kb]] += full[[a, b]];
                    }
                }
            }
        }
    }
    Ok(TruncatedState::from_parts(kept, Representation::Density(rho)))
}

/// Marginal population below which a Fock level is dropped before the
/// partial transpose; its rows and columns are then zero up to `sqrt` of this.
const EMPTY_LEVEL: f64 = 1e-24;

/// `log₂ ‖ρ^{T_B}‖₁` of a two-mode state, transposing the second mode.
///
/// Empty Fock levels are dropped, and when `ρ` carries no coherence between
/// states of different `n_A + n_B` parity (always the case for states evolved
/// from a parity-definite input) the two parity blocks are diagonalized
/// separately.
pub fn log_negativity<T: Real>(state: &TruncatedState<T>) -> Result<T> {
    let basis = state.basis();
    if basis.n_modes() != 2 {
        return Err(Error::DimensionMismatch(format!("log-negativity needs 2 modes, got {}", basis.n_modes())));
    }
    let rho = state.to_density();
    let (da, db) = (basis.dims()[0], basis.dims()[1]);
    let at = |i: usize, j: usize, k: usize, l: usize| rho[[i * db + j, k * db + l]];
    let pop = |i: usize, j: usize| at(i, j, i, j).re.to_f64_lossy();
    let keep_a: Vec<usize> = (0..da).filter(|&i| (0..db).map(|j| pop(i, j)).sum::<f64>() > EMPTY_LEVEL).collect();
    let keep_b: Vec<usize> = (0..db).filter(|&j| (0..da).map(|i| pop(i, j)).sum::<f64>() > EMPTY_LEVEL).collect();

    let scale = rho.iter().fold(0.0f64, |m, z| m.max(z.norm().to_f64_lossy()));
    let mut parity_blocked = true;
    'scan: for &i in &keep_a {
        for &j in &keep_b {
            for &k in &keep_a {
                for &l in &keep_b {
                    if (i + j + k + l) % 2 == 1 && at(i, j, k, l).norm().to_f64_lossy() > 1e-15 * scale {
                        parity_blocked = false;
                        break 'scan;
                    }
                }
            }
        }
    }

    let pairs: Vec<(usize, usize)> = keep_a.iter().flat_map(|&i| keep_b.iter().map(move |&j| (i, j))).collect();
    let blocks: Vec<Vec<(usize, usize)>> = if parity_blocked {
        (0..2).map(|p| pairs.iter().copied().filter(|(i, j)| (i + j) % 2 == p).collect()).collect()
    } else {
        vec![pairs]
    };
    let mut trace_norm = 0.0f64;
    for block in blocks.iter().filter(|b| !b.is_empty()) {
        let pt = Array2::from_shape_fn((block.len(), block.len()), |(r, c)| {
            let ((i, j), (k, l)) = (block[r], block[c]);
            at(i, l, k, j)
        });
        trace_norm += hermitian_eigenvalues(&pt).iter().map(|l| l.abs()).sum::<f64>();
    }
    Ok(T::lit(trace_norm.log2().max(0.0)))
}

/// `½‖ρ − σ‖₁`
pub fn trace_distance<T: Real>(a: &TruncatedState<T>, b: &TruncatedState<T>) -> Result<T> {
    same_basis(a.basis(), b.basis())?;
    let diff = a.to_density() - b.to_density();
    Ok(T::lit(hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>() / 2.0))
}

/// Phase `e^{−iθ n}` on Fock level `n` of `mode`, generated by `θ·a†a`.
pub fn apply_local_rotation<T: Real>(state: &TruncatedState<T>, mode: usize, angle: T) -> Result<TruncatedState<T>> {
    let basis = state.basis();
    basis.check_mode(mode)?;
    if !angle.is_finite() {
        return Err(Error::param("angle", "must be finite"));
    }
    let phases: Vec<C<T>> = (0..basis.dims()[mode]).map(|n| cis(-angle * T::from_usize_lossy(n))).collect();
    let rotate =
        |v: &Array1<C<T>>| Array1::from_iter(v.iter().enumerate().map(|(i, z)| *z * phases[basis.occupation(i, mode)]));
    let repr = match state.representation() {
        Representation::Pure(v) => Representation::Pure(rotate(v)),
        Representation::Mixture(b) => Representation::Mixture(b.iter().map(|(w, v)| (*w, rotate(v))).collect()),
        Representation::Density(rho) => Representation::Density(Array2::from_shape_fn(rho.dim(), |(i, j)| {
            rho[[i, j]] * phases[basis.occupation(i, mode)] * phases[basis.occupation(j, mode)].conj()
        })),
    };
    Ok(TruncatedState::from_parts(basis.clone(), repr))
}
