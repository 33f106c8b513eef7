//! Dense Hermitian eigen-decomposition and SVD through nalgebra, evaluated in `f64`.

use nalgebra::{Complex as NComplex, DMatrix};
use ndarray::{Array1, Array2};

use crate::scalar::{cplx, Real, C};

fn to_nalgebra<T: Real>(m: &Array2<C<T>>) -> DMatrix<NComplex<f64>> {
    let (r, c) = m.dim();
    DMatrix::from_fn(r, c, |i, j| {
        let z = m[[i, j]];
        NComplex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
    })
}

/// Eigenvalues of a Hermitian matrix (ascending).
pub fn hermitian_eigenvalues<T: Real>(m: &Array2<C<T>>) -> Vec<f64> {
    let mut v: Vec<f64> = to_nalgebra(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenpairs of a Hermitian matrix; eigenvectors as columns converted back to `T`.
pub fn hermitian_eigen<T: Real>(m: &Array2<C<T>>) -> (Vec<f64>, Vec<Array1<C<T>>>) {
    let eig = to_nalgebra(m).symmetric_eigen();
    let vecs = eig
        .eigenvectors
        .column_iter()
        .map(|col| col.iter().map(|z| cplx(T::lit(z.re), T::lit(z.im))).collect::<Array1<_>>())
        .collect();
    (eig.eigenvalues.iter().copied().collect(), vecs)
}

/// `(σ, u, v)` of one singular triple.
pub type SingularTriple<T> = (f64, Array1<C<T>>, Array1<C<T>>);

/// Thin SVD `m = Σ_s σ_s u_s v_sᵀ` (note: `v_s` is a row of `V†`, not conjugated
/// back), singular values descending.
pub fn svd<T: Real>(m: &Array2<C<T>>) -> Vec<SingularTriple<T>> {
    let svd = to_nalgebra(m).svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let back = |z: &NComplex<f64>| cplx(T::lit(z.re), T::lit(z.im));
    let mut out: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(s, &sigma)| {
            (sigma, u.column(s).iter().map(back).collect::<Array1<_>>(), v_t.row(s).iter().map(back).collect())
        })
        .collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pauli_y_spectrum() {
        let m: Array2<C<f64>> = array![[cplx(0.0, 0.0), cplx(0.0, -1.0)], [cplx(0.0, 1.0), cplx(0.0, 0.0)]];
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let (vals, vecs) = hermitian_eigen(&m);
        for (l, v) in vals.iter().zip(&vecs) {
            let mv = m.dot(v);
            assert!((&mv - &v.mapv(|z| z * *l)).iter().all(|z| z.norm() < 1e-13));
        }
    }

    #[test]
    fn svd_reconstructs() {
        let m: Array2<C<f64>> =
            Array2::from_shape_fn((4, 3), |(i, j)| cplx((i * 3 + j) as f64 * 0.1, (i as f64) - (j as f64)));
        let parts = svd(&m);
        assert!(parts.windows(2).all(|w| w[0].0 >= w[1].0));
        let mut r = Array2::from_elem((4, 3), cplx(0.0, 0.0));
        for (s, u, v) in &parts {
            for i in 0..4 {
                for j in 0..3 {
                    r[[i, j]] += u[i] * v[j] * *s;
                }
            }
        }
        assert!((&r - &m).iter().all(|z| z.norm() < 1e-12));
    }
}
