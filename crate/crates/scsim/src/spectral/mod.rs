//! Frequency-grid construction, spectral-amplitude algebra, self-conjugated
//! mode operations, orthonormal basis completion, and the fiber parametric
//! amplifier phase-matching model.

mod fopa;
mod grid;
mod mode;

pub use fopa::{
    calibrate_peak_detuning, fopa_joint_spectrum, pia_gain_from_xi, xi_at_detuning,
    xi_from_pia_gain, FopaParams, JointSpectrum,
};
pub use grid::FrequencyGrid;
pub use mode::{
    conjugate_mode, gram_schmidt_complete, sc_extend, ModeKind, SpectralAmplitude, TimeFreqMode,
    NORM_TOL, SC_TOL,
};

pub(crate) use mode::orthonormal_complement;
