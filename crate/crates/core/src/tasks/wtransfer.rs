use std::time::Instant;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::analytic::CouplingWeights;
use crate::error::{Error, Result};
use crate::fockspace::{evolve, network_labels, truncation_tail, FockBasis, TruncatedState};
use crate::pulsedesign::{qst_pulse, PulseParams};
use crate::scalar::{czero, real, Real};

use super::truncation::{auto_dims, grow, peak_occupations, Moments, Numerics, Truncation, MAX_GROWTH_RETRIES};

const NORM_TOL: f64 = 1e-10;

/// Single-excitation state `Σ_j C_j |1_j⟩` on `n_s` senders, to be moved onto
/// `n_s` receivers coupled with weights `receiver_weights`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WTransferSpec<T> {
    pub amplitudes: Vec<T>,
    pub receiver_weights: Vec<T>,
}

impl<T: Real> WTransferSpec<T> {
    /// Receiver weights must be proportional to the amplitudes (either sign).
    pub fn new(amplitudes: Vec<T>, receiver_weights: Vec<T>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::param("amplitudes", "at least one sender required"));
        }
        if amplitudes.len() != receiver_weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes but {} receiver weights",
                amplitudes.len(),
                receiver_weights.len()
            )));
        }
        if amplitudes.iter().chain(&receiver_weights).any(|x| !x.is_finite()) {
            return Err(Error::param("amplitudes", "entries must be finite"));
        }
        let norm = amplitudes.iter().fold(T::zero(), |a, &c| a + c * c);
        if (norm - T::one()).abs().to_f64_lossy() > NORM_TOL {
            return Err(Error::Normalization(format!("Σ C_j² = {norm}, expected 1")));
        }
        let spec = Self { amplitudes, receiver_weights };
        let kr = spec.receiver_norm();
        if kr.is_zero() {
            return Err(Error::param("receiver_weights", "all receiver weights are zero"));
        }
        let s = spec.receiver_sign();
        let mismatch = spec
            .amplitudes
            .iter()
            .zip(&spec.receiver_weights)
            .fold(T::zero(), |a, (&c, &k)| a.max((k - s * kr * c).abs()));
        if mismatch.to_f64_lossy() > NORM_TOL * kr.to_f64_lossy().max(1.0) {
            return Err(Error::param(
                "receiver_weights",
                "receiver weights must be in the ratio of the amplitudes, k_(n_s+i)/k_(n_s+j) = C_i/C_j",
            ));
        }
        Ok(spec)
    }

    pub fn n_senders(&self) -> usize {
        self.amplitudes.len()
    }

    fn receiver_norm(&self) -> T {
        self.receiver_weights.iter().fold(T::zero(), |a, &k| a + k * k).sqrt()
    }

    /// `s` in `k_receiver = s‖k_receiver‖C`.
    fn receiver_sign(&self) -> T {
        let dot = self.amplitudes.iter().zip(&self.receiver_weights).fold(T::zero(), |a, (&c, &k)| a + c * k);
        if dot < T::zero() {
            -T::one()
        } else {
            T::one()
        }
    }
}

/// Couplings `(k_1..k_{n_s}, k_{n_s+1}..k_{2n_s})` for which the approximate
/// transform `a_i → a_i − (2k_i/Σk²) Σ_j k_j a_j` leaves no excitation on the
/// senders. The sender restrictions are solved by `k_j = ‖k_receiver‖·C_j`.
pub fn design_w_couplings<T: Real>(spec: &WTransferSpec<T>) -> Result<CouplingWeights<T>> {
    let kr = spec.receiver_norm();
    let mut k: Vec<T> = spec.amplitudes.iter().map(|&c| kr * c).collect();
    k.extend_from_slice(&spec.receiver_weights);
    CouplingWeights::new(k)
}

/// `Σ_{j₀ ≤ n_s} |Σ_i C_i (δ_{ij₀} − 2 k_i k_{j₀}/Σk²)|`, the sender amplitude
/// left behind by the approximate transform.
pub fn sender_residual<T: Real>(weights: &CouplingWeights<T>, amplitudes: &[T]) -> T {
    let k = weights.as_slice();
    let total = weights.norm_sq();
    let proj = amplitudes.iter().zip(k).fold(T::zero(), |a, (&c, &kj)| a + c * kj);
    amplitudes.iter().zip(k).fold(T::zero(), |a, (&c, &kj)| a + (c - T::lit(2.0) * kj * proj / total).abs())
}

/// Node amplitudes after the approximate transform applied to `Σ C_j |1_j⟩`.
fn ideal_amplitudes<T: Real>(weights: &CouplingWeights<T>, amplitudes: &[T]) -> Vec<T> {
    let k = weights.as_slice();
    let total = weights.norm_sq();
    let proj = amplitudes.iter().zip(k).fold(T::zero(), |a, (&c, &kj)| a + c * kj);
    k.iter()
        .enumerate()
        .map(|(i, &ki)| amplitudes.get(i).copied().unwrap_or(T::zero()) - T::lit(2.0) * ki * proj / total)
        .collect()
}

/// `|⟨W_r|ψ⟩|²` for the approximate transform with the designed couplings,
/// where `W_r = Σ_j C_j |1_{n_s+j}⟩`.
pub fn ideal_transfer_fidelity<T: Real>(spec: &WTransferSpec<T>) -> Result<T> {
    let weights = design_w_couplings(spec)?;
    let ideal = ideal_amplitudes(&weights, &spec.amplitudes);
    let overlap = spec.amplitudes.iter().zip(&ideal[spec.n_senders()..]).fold(T::zero(), |a, (&c, &u)| a + c * u);
    Ok(overlap * overlap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WTransferRecord<T> {
    pub amplitudes: Vec<T>,
    pub weights: Vec<T>,
    pub m: u32,
    pub pulse: PulseParams<T>,
    pub channel_fock: usize,
    /// Overlap of the approximate-transform output with `Σ C_j |1_{n_s+j}⟩`.
    pub fidelity_ideal_transform: T,
    /// Same target, Fock-space evolution under the optimized pulse, channel traced out.
    pub fidelity_full: T,
    pub sender_residual: T,
    pub dims: Vec<usize>,
    pub max_tail: f64,
    pub wall_time: f64,
}

pub fn run_w_transfer<T: Real>(spec: &WTransferSpec<T>, m: u32, numerics: &Numerics<T>) -> Result<WTransferRecord<T>> {
    run_w_transfer_with_channel(spec, m, 0, numerics)
}

/// As `run_w_transfer` with the channel initially in Fock state `channel_fock`.
pub fn run_w_transfer_with_channel<T: Real>(
    spec: &WTransferSpec<T>,
    m: u32,
    channel_fock: usize,
    numerics: &Numerics<T>,
) -> Result<WTransferRecord<T>> {
    let start = Instant::now();
    let weights = design_w_couplings(spec)?;
    let ns = spec.n_senders();
    let n = 2 * ns;
    let fidelity_ideal_transform = ideal_transfer_fidelity(spec)?;

    let pulse = qst_pulse(m)?;
    let cfg = pulse.config(T::one(), weights.clone())?;
    let labels = network_labels(n);
    let mut dims = match numerics.truncation {
        Truncation::Fixed(d) => vec![d; n + 1],
        Truncation::Auto | Truncation::Converged => {
            let mut moments: Vec<Moments<T>> =
                spec.amplitudes.iter().map(|&c| Moments { mean: czero(), number: c * c, square: czero() }).collect();
            moments.extend(std::iter::repeat_n(Moments::fock(0), ns));
            moments.push(Moments::fock(channel_fock));
            let peaks = peak_occupations(&cfg, pulse.tau, &moments)?;
            let mut floors = vec![3; n];
            floors.push(channel_fock + 2);
            auto_dims(&peaks, 6.0, &floors)
        }
    };
    let adaptive = !matches!(numerics.truncation, Truncation::Fixed(_));
    let mut attempt = 0;
    let (out, basis) = loop {
        let basis = FockBasis::new(dims.clone(), labels.clone())?;
        let mut psi = Array1::from_elem(basis.total_dim(), czero::<T>());
        let mut occ = vec![0usize; n + 1];
        occ[n] = channel_fock;
        for (j, &c) in spec.amplitudes.iter().enumerate() {
            occ[j] = 1;
            psi[basis.index_of(&occ)?] = real(c);
            occ[j] = 0;
        }
        let state = TruncatedState::pure(basis.clone(), psi)?;
        match evolve(&state, &cfg, pulse.tau, &numerics.evolve) {
            Ok(out) => break (out, basis),
            Err(Error::NonConvergence { mode, .. }) if adaptive && attempt < MAX_GROWTH_RETRIES => {
                let j = labels.iter().position(|l| *l == mode).expect("known label");
                dims[j] = grow(dims[j]);
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let psi = out.as_pure().expect("pure evolution");
    // ⟨W_r|ρ_nodes|W_r⟩ = Σ_{n_c} |Σ_j C_j ⟨1_{n_s+j}, n_c|ψ⟩|²
    let mut fidelity_full = T::zero();
    let mut occ = vec![0usize; n + 1];
    for nc in 0..dims[n] {
        occ[n] = nc;
        let mut amp = czero::<T>();
        for (j, &c) in spec.amplitudes.iter().enumerate() {
            occ[ns + j] = 1;
            amp += psi[basis.index_of(&occ)?] * c;
            occ[ns + j] = 0;
        }
        fidelity_full += amp.norm_sqr();
    }
    let tail = truncation_tail(&basis, &[(T::one(), psi.as_slice().expect("contiguous"))]).1;
    Ok(WTransferRecord {
        amplitudes: spec.amplitudes.clone(),
        sender_residual: sender_residual(&weights, &spec.amplitudes),
        weights: weights.as_slice().to_vec(),
        m,
        pulse,
        channel_fock,
        fidelity_ideal_transform,
        fidelity_full,
        dims,
        max_tail: tail,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_case_gives_equal_weights() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let spec = WTransferSpec::new(vec![c, c], vec![1.0, 1.0]).unwrap();
        let w = design_w_couplings(&spec).unwrap();
        for k in w.as_slice() {
            assert!((k - 1.0).abs() < 1e-15);
        }
        assert!(sender_residual(&w, &spec.amplitudes) < 1e-15);
    }

    #[test]
    fn generic_case_solves_the_quadratic() {
        let (c1, c2) = (0.8f64.sqrt(), 0.2f64.sqrt());
        let (k3, k4) = (2.0, 1.0);
        let spec = WTransferSpec::new(vec![c1, c2], vec![k3, k4]).unwrap();
        let w = design_w_couplings(&spec).unwrap();
        let k = w.as_slice();
        // Positive root of x² + b x − q² = 0.
        let s = c1 * c1 + c2 * c2;
        let r = k3 * k3 + k4 * k4;
        let b = (c1 * c1 - c2 * c2) / s * r;
        let q = c1 * c2 * r / s;
        let x = (-b + (b * b + 4.0 * q * q).sqrt()) / 2.0;
        assert!((k[1] * k[1] - x).abs() < 1e-12);
        assert!((k[0] * k[0] - (x + b)).abs() < 1e-12);
        // Both sender restrictions vanish.
        let total: f64 = k.iter().map(|v| v * v).sum();
        let proj = c1 * k[0] + c2 * k[1];
        for (j, c) in [c1, c2].iter().enumerate() {
            assert!((c - 2.0 * k[j] * proj / total).abs() < 1e-12);
        }
        assert!(sender_residual(&w, &spec.amplitudes) < 1e-12);
    }

    #[test]
    fn ratio_rule_and_degenerate_inputs() {
        let (c1, c2) = (0.8f64.sqrt(), 0.2f64.sqrt());
        assert!(WTransferSpec::new(vec![c1, c2], vec![1.0, 1.0]).is_err());
        assert!(WTransferSpec::new(vec![c1, c2], vec![0.0, 0.0]).is_err());
        assert!(WTransferSpec::new(vec![0.5, 0.5], vec![1.0, 1.0]).is_err());
        // Opposite-sign receiver weights are allowed.
        let s = WTransferSpec::new(vec![c1, c2], vec![-2.0, -1.0]).unwrap();
        assert!(sender_residual(&design_w_couplings(&s).unwrap(), &s.amplitudes) < 1e-12);
        // A zero amplitude decouples that sender.
        let s = WTransferSpec::new(vec![1.0, 0.0], vec![3.0, 0.0]).unwrap();
        let w = design_w_couplings(&s).unwrap();
        assert_eq!(w.as_slice()[1], 0.0);
        assert!(sender_residual(&w, &s.amplitudes) < 1e-15);
    }

    #[test]
    fn three_senders() {
        let c = [0.6f64, 0.0, 0.8];
        let spec = WTransferSpec::new(c.to_vec(), vec![1.2, 0.0, 1.6]).unwrap();
        let w = design_w_couplings(&spec).unwrap();
        assert!(sender_residual(&w, &c) < 1e-14);
        let ideal = ideal_amplitudes(&w, &c);
        let overlap: f64 = c.iter().zip(&ideal[3..]).map(|(a, b)| a * b).sum();
        assert!((overlap * overlap - 1.0).abs() < 1e-12);
    }
}
