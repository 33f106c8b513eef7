//! Passive two-mode rotation `b1 = w1 a1 + w2 a2`, `b2 = −w2 a1 + w1 a2` on
//! Fock amplitudes. Excitation number is conserved, so the map is block
//! diagonal in `N = n1 + n2`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};

#[derive(Debug, Clone)]
pub struct PairRotation<T> {
    /// `blocks[N][[p, n1]] = ⟨n1, N−n1 | p, N−p⟩_b`, real.
    blocks: Vec<Array2<T>>,
}

/// `out[n1'] += c·(creation on mode 1 or 2) v`, from total `N−1` (len `N`) to `N` (len `N+1`).
fn create<T: Real>(v: &[T], w_first: T, w_second: T) -> Vec<T> {
    let n = v.len();
    let mut out = vec![T::zero(); n + 1];
    for (n1, &x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        // a1†: n1 → n1+1; a2†: n2 = n−1−n1 → n2+1 = n−n1.
        out[n1 + 1] += w_first * T::from_usize_lossy(n1 + 1).sqrt() * x;
        out[n1] += w_second * T::from_usize_lossy(n - n1).sqrt() * x;
    }
    out
}

impl<T: Real> PairRotation<T> {
    /// Blocks up to total excitation `n_max`; `(w1, w2)` must be a unit vector.
    pub fn new(w1: T, w2: T, n_max: usize) -> Result<Self> {
        if ((w1 * w1 + w2 * w2) - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::param("w", "rotation weights must satisfy w1² + w2² = 1"));
        }
        let mut blocks: Vec<Array2<T>> = (0..=n_max).map(|n| Array2::zeros((n + 1, n + 1))).collect();
        // |0, q⟩ then |p, q⟩ by repeated creation, normalized by 1/sqrt(p), 1/sqrt(q).
        let mut dark = vec![T::one()];
        for q in 0..=n_max {
            if q > 0 {
                dark = create(&dark, -w2, w1);
                let s = T::from_usize_lossy(q).sqrt();
                dark.iter_mut().for_each(|x| *x /= s);
            }
            let mut v = dark.clone();
            for p in 0..=(n_max - q) {
                if p > 0 {
                    v = create(&v, w1, w2);
                    let s = T::from_usize_lossy(p).sqrt();
                    v.iter_mut().for_each(|x| *x /= s);
                }
                let block = &mut blocks[p + q];
                for (n1, &x) in v.iter().enumerate() {
                    block[[p, n1]] = x;
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn n_max(&self) -> usize {
        self.blocks.len() - 1
    }

    fn check(&self, rows: usize, cols: usize) -> Result<usize> {
        let n = rows + cols - 2;
        if n > self.n_max() {
            return Err(Error::DimensionMismatch(format!(
                "rotation built up to N = {} but input reaches N = {n}",
                self.n_max()
            )));
        }
        Ok(n)
    }

    /// `x[[n1, n2]]` in the `a` basis → `z[[p, q]]` in the `b` basis; output is `(N+1) × (N+1)`.
    pub fn to_rotated(&self, x: &Array2<C<T>>) -> Result<Array2<C<T>>> {
        let n_top = self.check(x.nrows(), x.ncols())?;
        let mut z = Array2::from_elem((n_top + 1, n_top + 1), czero());
        for (n, block) in self.blocks.iter().enumerate().take(n_top + 1) {
            for n1 in n.saturating_sub(x.ncols() - 1)..=n.min(x.nrows() - 1) {
                let amp = x[[n1, n - n1]];
                if amp == czero() {
                    continue;
                }
                for p in 0..=n {
                    z[[p, n - p]] += amp * block[[p, n1]];
                }
            }
        }
        Ok(z)
    }

    /// Inverse of `to_rotated`.
    pub fn from_rotated(&self, z: &Array2<C<T>>) -> Result<Array2<C<T>>> {
        let n_top = self.check(z.nrows(), z.ncols())?;
        let mut x = Array2::from_elem((n_top + 1, n_top + 1), czero());
        for (n, block) in self.blocks.iter().enumerate().take(n_top + 1) {
            for p in n.saturating_sub(z.ncols() - 1)..=n.min(z.nrows() - 1) {
                let amp = z[[p, n - p]];
                if amp == czero() {
                    continue;
                }
                for n1 in 0..=n {
                    x[[n1, n - n1]] += amp * block[[p, n1]];
                }
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::coherent_ket;
    use crate::scalar::cplx;

    fn outer(a: &ndarray::Array1<C<f64>>, b: &ndarray::Array1<C<f64>>) -> Array2<C<f64>> {
        Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j])
    }

    #[test]
    fn blocks_are_orthogonal() {
        let r = PairRotation::new(0.6f64, 0.8, 40).unwrap();
        for b in &r.blocks {
            let g = b.dot(&b.t());
            for ((i, j), v) in g.indexed_iter() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-10, "N={} ({i},{j}) {v}", b.nrows() - 1);
            }
        }
    }

    #[test]
    fn coherent_product_maps_to_coherent_product() {
        let (w1, w2) = (0.6f64, 0.8);
        let (a, b) = (cplx(0.7, -0.2), cplx(-0.3, 0.5));
        let d = 30;
        let x = outer(&coherent_ket(a, d).unwrap(), &coherent_ket(b, d).unwrap());
        let r = PairRotation::new(w1, w2, 4 * d).unwrap();
        let z = r.to_rotated(&x).unwrap();
        let expect = outer(
            &coherent_ket(a * w1 + b * w2, 2 * d - 1).unwrap(),
            &coherent_ket(-a * w2 + b * w1, 2 * d - 1).unwrap(),
        );
        let err = z.iter().zip(expect.iter()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        let back = r.from_rotated(&z).unwrap();
        let err = x.indexed_iter().map(|((i, j), v)| (back[[i, j]] - v).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn single_excitation_rows() {
        // b1†|0⟩ = w1|1,0⟩ + w2|0,1⟩
        let r = PairRotation::new(0.6f64, 0.8, 3).unwrap();
        let mut z = Array2::from_elem((2, 2), czero());
        z[[1, 0]] = cplx(1.0, 0.0);
        let x = r.from_rotated(&z).unwrap();
        assert!((x[[1, 0]].re - 0.6).abs() < 1e-15 && (x[[0, 1]].re - 0.8).abs() < 1e-15);
        assert!(PairRotation::new(1.0f64, 1.0, 3).is_err());
    }
}
