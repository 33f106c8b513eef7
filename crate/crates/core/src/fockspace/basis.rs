use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_BUDGET: usize = 1 << 22;

/// Tensor-product Fock basis. Mode 0 is the most significant index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockBasis {
    dims: Vec<usize>,
    labels: Vec<String>,
    strides: Vec<usize>,
    total: usize,
}

impl FockBasis {
    pub fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        Self::with_budget(dims, labels, DEFAULT_DIM_BUDGET)
    }

    pub fn with_budget(dims: Vec<usize>, labels: Vec<String>, budget: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::param("dims", "at least one mode required"));
        }
        if dims.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!("{} dims but {} labels", dims.len(), labels.len())));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::param("dims", format!("every mode needs at least 2 levels, got {d}")));
        }
        let total =
            dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).filter(|&t| t <= budget).ok_or_else(|| {
                Error::DimensionBudget { requested: dims.iter().fold(1usize, |a, &d| a.saturating_mul(d)), budget }
            })?;
        let mut strides = vec![1; dims.len()];
        for j in (0..dims.len() - 1).rev() {
            strides[j] = strides[j + 1] * dims[j + 1];
        }
        Ok(Self { dims, labels, strides, total })
    }

    /// `n` node modes `a1..an` followed by the channel `c`.
    pub fn network(node_dims: &[usize], channel_dim: usize) -> Result<Self> {
        let mut dims = node_dims.to_vec();
        dims.push(channel_dim);
        Self::new(dims, network_labels(node_dims.len()))
    }

    /// `n_modes` modes (nodes plus channel), all truncated at `d`.
    pub fn uniform(n_modes: usize, d: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::param("n_modes", "at least one mode required"));
        }
        Self::network(&vec![d; n_modes - 1], d)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    /// Occupation of `mode` in basis state `index`.
    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.dims[mode]
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} occupations for {} modes",
                occupations.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (j, (&n, &d)) in occupations.iter().zip(&self.dims).enumerate() {
            if n >= d {
                return Err(Error::TruncationTooSmall(format!("level {n} of mode {} needs d > {n}", self.labels[j])));
            }
            idx += n * self.strides[j];
        }
        Ok(idx)
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Basis over a subset of modes, in the given order.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        let labels = keep.iter().map(|&k| self.labels[k].clone()).collect();
        Self::with_budget(dims, labels, usize::MAX)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.dims.len() {
            return Err(Error::param("mode", format!("mode {mode} out of range for {} modes", self.dims.len())));
        }
        Ok(())
    }
}

pub fn network_labels(n_nodes: usize) -> Vec<String> {
    let mut labels: Vec<String> = (1..=n_nodes).map(|i| format!("a{i}")).collect();
    labels.push("c".into());
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrip() {
        let b = FockBasis::network(&[3, 4], 5).unwrap();
        assert_eq!(b.total_dim(), 60);
        let idx = b.index_of(&[2, 1, 3]).unwrap();
        assert_eq!(idx, 2 * 20 + 5 + 3);
        assert_eq!((0..3).map(|m| b.occupation(idx, m)).collect::<Vec<_>>(), vec![2, 1, 3]);
        assert_eq!(b.labels(), &["a1", "a2", "c"]);
    }

    #[test]
    fn budget_and_minimum_dim() {
        assert!(matches!(
            FockBasis::with_budget(vec![10, 10, 10], network_labels(2), 999),
            Err(Error::DimensionBudget { requested: 1000, budget: 999 })
        ));
        assert!(FockBasis::network(&[1], 4).is_err());
        assert!(FockBasis::network(&[usize::MAX, 4], 4).is_err());
    }
}
