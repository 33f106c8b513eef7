//! Closed-form Heisenberg dynamics of a star network of resonant bosonic
//! modes, with and without the rotating-wave approximation.

mod config;
mod transform;
mod united;

pub use config::{eigen_frequencies, CouplingWeights, EigenFrequencies, SystemConfig};
pub use transform::{
    full_transform, rwa_transform, transfer_coefficients, BogoliubovTransform, Frame, SymplecticResidual,
    TransferCoefficients, TransformRecord,
};
pub use united::{
    channel_row, m_matrix, m_matrix_row, rwa_row, special_point_row, united_mode_transform, ModeRow, SPECIAL_POINT_EPS,
};
