//! Symmetric frequency grid around the pump.
//!
//! Bins come in signal/idler pairs at detunings `±k·spacing` from the pump
//! frequency, `k = 1..=half_bins`. The degenerate bin at the pump frequency
//! itself is excluded so that every bin has a distinct conjugate partner.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Discretized signal/idler frequency axis.
///
/// Bin indices run `0..2*half_bins`. Index `k` with `k < half_bins` is the
/// signal bin at `center + (k+1)*spacing`; index `half_bins + k` is the idler
/// bin at `center - (k+1)*spacing`. `conj` swaps the two halves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    /// Pump angular frequency (rad/s).
    center: f64,
    /// Bin spacing (rad/s).
    spacing: f64,
    /// Bins per branch.
    half_bins: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, spacing: f64, half_bins: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(format!(
                "grid spacing must be positive and finite, got {spacing}"
            )));
        }
        if half_bins == 0 {
            return Err(Error::invalid("grid needs at least one bin per branch"));
        }
        if !center.is_finite() {
            return Err(Error::invalid(format!(
                "grid center frequency must be finite, got {center}"
            )));
        }
        Ok(FrequencyGrid {
            center,
            spacing,
            half_bins,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Bins per branch.
    pub fn half_bins(&self) -> usize {
        self.half_bins
    }

    /// Total bin count (both branches).
    pub fn num_bins(&self) -> usize {
        2 * self.half_bins
    }

    /// Conjugate partner of a bin. An involution: `conj(conj(i)) == i`.
    pub fn conj(&self, bin: usize) -> usize {
        debug_assert!(bin < self.num_bins());
        if bin < self.half_bins {
            bin + self.half_bins
        } else {
            bin - self.half_bins
        }
    }

    /// True when the bin lies on the signal (higher-frequency) branch.
    pub fn is_signal(&self, bin: usize) -> bool {
        bin < self.half_bins
    }

    /// Signed detuning of a bin from the pump (rad/s).
    pub fn detuning(&self, bin: usize) -> f64 {
        let k = (bin % self.half_bins + 1) as f64;
        if self.is_signal(bin) {
            k * self.spacing
        } else {
            -k * self.spacing
        }
    }

    /// Absolute angular frequency of a bin (rad/s).
    pub fn frequency(&self, bin: usize) -> f64 {
        self.center + self.detuning(bin)
    }

    /// Signal-branch bin index (0-based) closest to a positive detuning.
    pub fn signal_bin_at(&self, detuning: f64) -> Result<usize> {
        if !(detuning > 0.0) {
            return Err(Error::invalid(format!(
                "signal detuning must be positive, got {detuning}"
            )));
        }
        let k = (detuning / self.spacing).round() as i64;
        let k = k.clamp(1, self.half_bins as i64);
        Ok((k - 1) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_grid_pairs_the_two_bins() {
        let g = FrequencyGrid::new(1.0e15, 2.0e9, 1).unwrap();
        assert_eq!(g.num_bins(), 2);
        assert_eq!(g.conj(0), 1);
        assert_eq!(g.conj(1), 0);
        assert_eq!(g.detuning(0), 2.0e9);
        assert_eq!(g.detuning(1), -2.0e9);
    }

    #[test]
    fn conj_is_an_involution() {
        for half in [4usize, 128] {
            let g = FrequencyGrid::new(1.0e15, 1.0e9, half).unwrap();
            for bin in 0..g.num_bins() {
                assert_eq!(g.conj(g.conj(bin)), bin);
                assert_ne!(g.conj(bin), bin);
                assert_eq!(g.detuning(bin), -g.detuning(g.conj(bin)));
            }
        }
    }

    #[test]
    fn no_bin_sits_at_the_center() {
        let g = FrequencyGrid::new(5.0e14, 3.0e9, 16).unwrap();
        for bin in 0..g.num_bins() {
            assert!(g.detuning(bin).abs() >= g.spacing());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FrequencyGrid::new(1.0e15, 0.0, 4).is_err());
        assert!(FrequencyGrid::new(1.0e15, -1.0, 4).is_err());
        assert!(FrequencyGrid::new(1.0e15, 1.0e9, 0).is_err());
    }
}
