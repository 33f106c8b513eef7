//! Experiment drivers: state transfer and its sweeps (pulse index,
//! temperature, input phase, timing jitter), W-type transfer with designed
//! couplings, and entanglement preparation with negativity tracking.
//!
//! Two nodes `a1` (sender) and `a2` (receiver) with equal couplings are used
//! for state transfer. Every run goes through the truncated Fock-space oracle.

mod ep;
mod input;
mod qst;
mod table;
mod truncation;
mod wtransfer;

use serde::{Deserialize, Serialize};

pub use ep::{min_ep_time, run_ep, EpOutcome, EpRecord, EpTask, NEGATIVITY_SAMPLES};
pub use input::InputState;
pub use qst::{
    dominant_harmonic, run_qst, run_qst_outcome, sweep_jitter, sweep_m, sweep_phase, sweep_temp, transfer_target,
    JitterRow, PhaseSweep, QstOutcome, QstRecord, QstTask, JITTER_SAMPLES,
};
pub use table::{fmt_float, Table};
pub use truncation::{peak_occupations, Moments, Numerics, Reduction, Truncation};
pub use wtransfer::{
    design_w_couplings, ideal_transfer_fidelity, run_w_transfer, run_w_transfer_with_channel, sender_residual,
    WTransferRecord, WTransferSpec,
};

/// How the pulse for a run is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Excitation-conserving pulse `qst_pulse(m)` (or `ep_pulse(m)`).
    Optimized,
    /// Same `g'` as the optimized pulse, duration from the rotating-wave rule.
    Rwa,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Optimized => "optimized",
            Method::Rwa => "rwa",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimized" | "opt" => Ok(Method::Optimized),
            "rwa" => Ok(Method::Rwa),
            other => Err(crate::Error::param("method", format!("expected `optimized` or `rwa`, got `{other}`"))),
        }
    }
}
