//! State serialization.
//!
//! Binary layout (little-endian): magic `BOSN`, `u32` version, `u8` kind
//! (0 pure, 1 mixture, 2 density), `u32` mode count, one `u32` per mode
//! dimension, then the payload as `(re, im)` `f64` pairs. A mixture payload
//! is a `u32` branch count followed by `f64` weight + amplitudes per branch;
//! a density payload is the row-major matrix.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

use super::basis::{network_labels, FockBasis};
use super::state::{Representation, TruncatedState};

pub const MAGIC: &[u8; 4] = b"BOSN";
pub const FORMAT_VERSION: u32 = 1;
/// Largest Hilbert-space dimension written as JSON.
pub const JSON_MAX_DIM: usize = 4096;

fn io_err(e: std::io::Error) -> Error {
    Error::Unsupported(format!("state i/o failed: {e}"))
}

fn write_vec<T: Real, W: Write>(w: &mut W, v: impl IntoIterator<Item = C<T>>) -> Result<()> {
    for z in v {
        w.write_all(&z.re.to_f64_lossy().to_le_bytes()).map_err(io_err)?;
        w.write_all(&z.im.to_f64_lossy().to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

pub fn write_binary<T: Real, W: Write>(state: &TruncatedState<T>, mut w: W) -> Result<()> {
    let basis = state.basis();
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io_err)?;
    let kind: u8 = match state.representation() {
        Representation::Pure(_) => 0,
        Representation::Mixture(_) => 1,
        Representation::Density(_) => 2,
    };
    w.write_all(&[kind]).map_err(io_err)?;
    w.write_all(&(basis.n_modes() as u32).to_le_bytes()).map_err(io_err)?;
    for &d in basis.dims() {
        w.write_all(&(d as u32).to_le_bytes()).map_err(io_err)?;
    }
    match state.representation() {
        Representation::Pure(v) => write_vec(&mut w, v.iter().copied())?,
        Representation::Mixture(b) => {
            w.write_all(&(b.len() as u32).to_le_bytes()).map_err(io_err)?;
            for (wt, v) in b {
                w.write_all(&wt.to_f64_lossy().to_le_bytes()).map_err(io_err)?;
                write_vec(&mut w, v.iter().copied())?;
            }
        }
        Representation::Density(rho) => write_vec(&mut w, rho.iter().copied())?,
    }
    Ok(())
}

struct Reader<R>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(io_err)?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn complex<T: Real>(&mut self, n: usize) -> Result<Vec<C<T>>> {
        (0..n).map(|_| Ok(C::new(T::lit(self.f64()?), T::lit(self.f64()?)))).collect()
    }
}

/// Reads a state written by [`write_binary`]; modes are labelled `a1..an, c`.
pub fn read_binary<T: Real, R: Read>(r: R) -> Result<TruncatedState<T>> {
    let mut r = Reader(r);
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::Unsupported("not a state container (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Unsupported(format!("unsupported container version {version}")));
    }
    let kind = r.bytes::<1>()?[0];
    let n_modes = r.u32()? as usize;
    if n_modes == 0 {
        return Err(Error::Unsupported("container declares zero modes".into()));
    }
    let dims = (0..n_modes).map(|_| Ok(r.u32()? as usize)).collect::<Result<Vec<_>>>()?;
    let basis = FockBasis::new(dims, network_labels(n_modes - 1))?;
    let d = basis.total_dim();
    match kind {
        0 => TruncatedState::pure(basis, Array1::from(r.complex(d)?)),
        1 => {
            let count = r.u32()? as usize;
            let branches =
                (0..count).map(|_| Ok((T::lit(r.f64()?), Array1::from(r.complex(d)?)))).collect::<Result<Vec<_>>>()?;
            TruncatedState::mixture(basis, branches)
        }
        2 => {
            let rho = Array2::from_shape_vec((d, d), r.complex(d * d)?)
                .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
            TruncatedState::density(basis, rho)
        }
        k => Err(Error::Unsupported(format!("unknown state kind {k}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub weight: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StatePayload {
    Pure { amplitudes: Vec<[f64; 2]> },
    Mixture { branches: Vec<BranchRecord> },
    Density { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
    #[serde(flatten)]
    pub payload: StatePayload,
}

fn pairs<T: Real>(v: impl IntoIterator<Item = C<T>>) -> Vec<[f64; 2]> {
    v.into_iter().map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]).collect()
}

fn unpairs<T: Real>(v: &[[f64; 2]]) -> Array1<C<T>> {
    v.iter().map(|p| C::new(T::lit(p[0]), T::lit(p[1]))).collect()
}

pub fn to_record<T: Real>(state: &TruncatedState<T>) -> Result<StateRecord> {
    let basis = state.basis();
    if basis.total_dim() > JSON_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "JSON export limited to dimension {JSON_MAX_DIM}, state has {}",
            basis.total_dim()
        )));
    }
    let payload = match state.representation() {
        Representation::Pure(v) => StatePayload::Pure { amplitudes: pairs(v.iter().copied()) },
        Representation::Mixture(b) => StatePayload::Mixture {
            branches: b
                .iter()
                .map(|(w, v)| BranchRecord { weight: w.to_f64_lossy(), amplitudes: pairs(v.iter().copied()) })
                .collect(),
        },
        Representation::Density(rho) => {
            StatePayload::Density { matrix: rho.rows().into_iter().map(|r| pairs(r.iter().copied())).collect() }
        }
    };
    Ok(StateRecord { dims: basis.dims().to_vec(), labels: basis.labels().to_vec(), payload })
}

pub fn from_record<T: Real>(rec: &StateRecord) -> Result<TruncatedState<T>> {
    let basis = FockBasis::new(rec.dims.clone(), rec.labels.clone())?;
    match &rec.payload {
        StatePayload::Pure { amplitudes } => TruncatedState::pure(basis, unpairs(amplitudes)),
        StatePayload::Mixture { branches } => TruncatedState::mixture(
            basis,
            branches.iter().map(|b| (T::lit(b.weight), unpairs(&b.amplitudes))).collect(),
        ),
        StatePayload::Density { matrix } => {
            let d = matrix.len();
            let flat: Vec<C<T>> = matrix.iter().flat_map(|r| unpairs::<T>(r)).collect();
            let rho = Array2::from_shape_vec((d, flat.len() / d.max(1)), flat)
                .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
            TruncatedState::density(basis, rho)
        }
    }
}

pub fn to_json<T: Real>(state: &TruncatedState<T>) -> Result<String> {
    serde_json::to_string(&to_record(state)?).map_err(|e| Error::Unsupported(e.to_string()))
}

pub fn from_json<T: Real>(text: &str) -> Result<TruncatedState<T>> {
    let rec: StateRecord =
        serde_json::from_str(text).map_err(|e| Error::Unsupported(format!("bad state JSON: {e}")))?;
    from_record(&rec)
}
