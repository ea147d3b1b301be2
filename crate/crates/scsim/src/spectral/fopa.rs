//! Parametric gain spectrum of the fiber amplifier.
//!
//! The per-bin squeezing parameter is taken from the lossless parametric
//! amplifier closed form: with pump power `P`, nonlinear coefficient `gamma`,
//! linear mismatch `db(W) = beta2*W^2 + beta4*W^4/12` at detuning `W`, and
//! `kappa = db + 2*gamma*P`, the parametric gain coefficient is
//! `g = sqrt((gamma*P)^2 - (kappa/2)^2)` and
//! `sinh|xi| = gamma*P * sinh(g*L)/g`, analytically continued through
//! `g -> 0` (where `sinh(g*L)/g -> L`) and imaginary `g` (where it becomes
//! `sin(|g|*L)/|g|`). The phase is the argument of the anomalous Bogoliubov
//! coefficient of the same solution, `pi/2 - kappa*L/2` (plus `pi` where the
//! continued `sinh(g*L)/g` is negative), with the pump phase set to zero.

use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::spectral::FrequencyGrid;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fiber and pump parameters of the parametric amplifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FopaParams {
    /// Group-velocity dispersion (s^2/m); negative for anomalous dispersion.
    pub beta2: f64,
    /// Fourth-order dispersion (s^4/m).
    pub beta4: f64,
    /// Nonlinear coefficient (1/(W*m)).
    pub gamma_nl: f64,
    /// Pump peak power (W).
    pub pump_peak_power: f64,
    /// Fiber length (m).
    pub length: f64,
    /// Linear attenuation (1/m).
    pub loss_per_length: f64,
    /// Mean thermal photon number of the scattering reservoir.
    pub raman_n: f64,
    /// Segment count for the distributed propagation model.
    pub segments: usize,
}

impl FopaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::invalid("fiber length must be positive"));
        }
        if self.pump_peak_power < 0.0 {
            return Err(Error::invalid("pump power must be non-negative"));
        }
        if self.segments == 0 {
            return Err(Error::invalid("segment count must be at least 1"));
        }
        if self.raman_n < 0.0 {
            return Err(Error::invalid("reservoir photon number must be non-negative"));
        }
        if self.loss_per_length < 0.0 {
            return Err(Error::invalid("loss must be non-negative"));
        }
        if !(self.gamma_nl >= 0.0) {
            return Err(Error::invalid("nonlinear coefficient must be non-negative"));
        }
        Ok(())
    }

    /// Linear phase mismatch at detuning `omega` (rad/s) from the pump.
    pub fn linear_mismatch(&self, detuning: f64) -> f64 {
        let w2 = detuning * detuning;
        self.beta2 * w2 + self.beta4 * w2 * w2 / 12.0
    }
}

/// Per-conjugate-pair squeezing magnitude and phase.
///
/// Stored on the signal branch only; the idler branch is the symmetric
/// extension `xi(w) = xi(2*w0 - w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSpectrum {
    grid: FrequencyGrid,
    magnitude: Vec<f64>,
    phase: Vec<f64>,
}

impl JointSpectrum {
    pub fn new(grid: FrequencyGrid, magnitude: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if magnitude.len() != grid.half_bins() || phase.len() != grid.half_bins() {
            return Err(Error::invalid(format!(
                "joint spectrum needs {} signal-side values, got {} magnitudes / {} phases",
                grid.half_bins(),
                magnitude.len(),
                phase.len()
            )));
        }
        if magnitude.iter().any(|m| *m < 0.0 || !m.is_finite()) {
            return Err(Error::invalid(
                "squeezing magnitudes must be finite and non-negative",
            ));
        }
        Ok(JointSpectrum {
            grid,
            magnitude,
            phase,
        })
    }

    /// Flat real spectrum `|xi| = r`, zero phase.
    pub fn flat(grid: FrequencyGrid, r: f64) -> Result<Self> {
        Self::new(grid, vec![r; grid.half_bins()], vec![0.0; grid.half_bins()])
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Signal-side magnitudes, pair index `0..half_bins`.
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn phases(&self) -> &[f64] {
        &self.phase
    }

    /// `|xi|` at any bin via the symmetric extension.
    pub fn magnitude_at(&self, bin: usize) -> f64 {
        self.magnitude[bin % self.grid.half_bins()]
    }

    pub fn phase_at(&self, bin: usize) -> f64 {
        self.phase[bin % self.grid.half_bins()]
    }

    /// Pair index of the largest magnitude.
    pub fn peak_pair(&self) -> usize {
        self.magnitude
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Rescale all magnitudes.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.grid,
            self.magnitude.iter().map(|m| m * factor).collect(),
            self.phase.clone(),
        )
    }
}

/// `sinh(g*L)/g` continued through `g^2 <= 0`; `h` is `g^2`.
fn sinhc_continued(h: f64, length: f64) -> Result<f64> {
    if h > 0.0 {
        let g = h.sqrt();
        let x = g * length;
        if x > 700.0 {
            return Err(Error::Range(format!(
                "parametric gain exponent {x:.1} overflows sinh"
            )));
        }
        Ok(x.sinh() / g)
    } else if h == 0.0 {
        Ok(length)
    } else {
        let g = (-h).sqrt();
        Ok((g * length).sin() / g)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Squeezing magnitude and phase at a single detuning.
pub fn xi_at_detuning(params: &FopaParams, detuning: f64) -> Result<(f64, f64)> {
    let gp = params.gamma_nl * params.pump_peak_power;
    if gp == 0.0 {
        return Ok((0.0, 0.0));
    }
    let kappa = params.linear_mismatch(detuning) + 2.0 * gp;
    let h = gp * gp - 0.25 * kappa * kappa;
    let s = sinhc_continued(h, params.length)?;
    let sinh_xi = gp * s.abs();
    let magnitude = sinh_xi.asinh();
    let mut phase = PI / 2.0 - 0.5 * kappa * params.length;
    if s < 0.0 {
        phase += PI;
    }
    Ok((magnitude, wrap_angle(phase)))
}

/// Evaluate the phase-matching spectrum on a grid.
pub fn fopa_joint_spectrum(params: &FopaParams, grid: &FrequencyGrid) -> Result<JointSpectrum> {
    params.validate()?;
    let mut magnitude = Vec::with_capacity(grid.half_bins());
    let mut phase = Vec::with_capacity(grid.half_bins());
    for pair in 0..grid.half_bins() {
        let (m, p) = xi_at_detuning(params, grid.detuning(pair))?;
        magnitude.push(m);
        phase.push(p);
    }
    JointSpectrum::new(*grid, magnitude, phase)
}

/// Pump power that moves the gain peak (`kappa = 0`) to `target_detuning`.
///
/// Solves `beta2*W^2 + beta4*W^4/12 + 2*gamma*P = 0` for `P` by bisection to
/// a relative tolerance of `1e-12`.
pub fn calibrate_peak_detuning(target_detuning: f64, params: &FopaParams) -> Result<f64> {
    if !(params.beta2 < 0.0) {
        return Err(Error::invalid(
            "an off-center gain peak requires anomalous dispersion (beta2 < 0)",
        ));
    }
    if !(params.gamma_nl > 0.0) {
        return Err(Error::invalid("nonlinear coefficient must be positive"));
    }
    if !target_detuning.is_finite() || target_detuning < 0.0 {
        return Err(Error::invalid("target detuning must be non-negative"));
    }
    if target_detuning == 0.0 {
        return Ok(0.0);
    }
    let mismatch = params.linear_mismatch(target_detuning);
    let objective = |p: f64| mismatch + 2.0 * params.gamma_nl * p;
    // Expand the bracket until the objective changes sign.
    let mut hi = 1.0;
    for _ in 0..64 {
        if objective(hi) > 0.0 {
            break;
        }
        hi *= 2.0;
    }
    bisect(objective, 0.0, hi, 1e-12, "peak-detuning pump power")
}

/// Phase-insensitive amplification gain from the squeezing magnitude:
/// `G = 2*sinh^2(|xi|) + 1 = cosh(2*|xi|)`.
pub fn pia_gain_from_xi(xi_mag: f64) -> Result<f64> {
    if xi_mag < 0.0 || !xi_mag.is_finite() {
        return Err(Error::invalid("squeezing magnitude must be non-negative"));
    }
    if 2.0 * xi_mag > 700.0 {
        return Err(Error::Range("squeezing magnitude overflows cosh".into()));
    }
    Ok((2.0 * xi_mag).cosh())
}

/// Inverse of [`pia_gain_from_xi`].
pub fn xi_from_pia_gain(gain: f64) -> Result<f64> {
    if gain < 1.0 || !gain.is_finite() {
        return Err(Error::invalid(format!(
            "phase-insensitive gain must be at least 1, got {gain}"
        )));
    }
    Ok(0.5 * gain.acosh())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BETA2: f64 = -21.7e-27;
    const GAMMA: f64 = 1.3e-3;

    fn params(pump: f64) -> FopaParams {
        FopaParams {
            beta2: BETA2,
            beta4: 0.0,
            gamma_nl: GAMMA,
            pump_peak_power: pump,
            length: 1500.0,
            loss_per_length: 0.0,
            raman_n: 0.0,
            segments: 1,
        }
    }

    fn peak_detuning_target() -> f64 {
        2.0 * PI * 50.62e9
    }

    #[test]
    fn zero_pump_gives_zero_gain() {
        let grid = FrequencyGrid::new(1.2e15, 5.0e9, 32).unwrap();
        let joint = fopa_joint_spectrum(&params(0.0), &grid).unwrap();
        assert!(joint.magnitudes().iter().all(|m| *m == 0.0));
    }

    #[test]
    fn phase_matched_bin_gives_gamma_p_l_exactly() {
        // Place a bin exactly at the kappa = 0 detuning.
        let target = peak_detuning_target();
        let p = calibrate_peak_detuning(target, &params(0.0)).unwrap();
        let grid = FrequencyGrid::new(1.2e15, target / 16.0, 32).unwrap();
        let joint = fopa_joint_spectrum(&params(p), &grid).unwrap();
        let expect = GAMMA * p * 1500.0;
        // Bin index 15 sits at detuning 16 * spacing = target.
        let got = joint.magnitudes()[15];
        assert!(
            (got - expect).abs() <= 1e-9 * expect,
            "got {got}, expected {expect}"
        );
    }

    #[test]
    fn peak_sits_at_calibrated_detuning_within_one_bin() {
        let target = peak_detuning_target();
        let p = calibrate_peak_detuning(target, &params(0.0)).unwrap();
        let grid = FrequencyGrid::new(1.2e15, 2.0 * PI * 0.5e9, 128).unwrap();
        let joint = fopa_joint_spectrum(&params(p), &grid).unwrap();
        let peak = joint.peak_pair();
        let peak_detuning = grid.detuning(peak);
        assert!(
            (peak_detuning - target).abs() <= grid.spacing(),
            "peak at {peak_detuning}, target {target}"
        );
    }

    #[test]
    fn calibration_matches_beta4_zero_closed_form() {
        let target = peak_detuning_target();
        let p = calibrate_peak_detuning(target, &params(0.0)).unwrap();
        let closed = -BETA2 * target * target / (2.0 * GAMMA);
        assert!(
            (p - closed).abs() <= 1e-10 * closed,
            "bisection {p} vs closed form {closed}"
        );
    }

    #[test]
    fn calibration_zero_target_is_degenerate() {
        assert_eq!(calibrate_peak_detuning(0.0, &params(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn calibration_requires_anomalous_dispersion() {
        let mut p = params(0.0);
        p.beta2 = 21.7e-27;
        assert!(calibrate_peak_detuning(1.0e11, &p).is_err());
    }

    #[test]
    fn magnitude_is_even_in_detuning() {
        let grid = FrequencyGrid::new(1.2e15, 2.0 * PI * 1.0e9, 64).unwrap();
        let joint = fopa_joint_spectrum(&params(0.8), &grid).unwrap();
        for bin in 0..grid.num_bins() {
            assert_eq!(joint.magnitude_at(bin), joint.magnitude_at(grid.conj(bin)));
        }
    }

    #[test]
    fn magnitude_is_continuous_across_g_zero() {
        // Scan kappa through zero by scanning detuning; check left/right limits.
        let p = params(0.8);
        let gp = GAMMA * 0.8;
        // Detuning where kappa = 0: beta2*W^2 = -2*gamma*P.
        let w0 = (2.0 * gp / -BETA2).sqrt();
        let eps = w0 * 1e-9;
        let (lo, _) = xi_at_detuning(&p, w0 - eps).unwrap();
        let (mid, _) = xi_at_detuning(&p, w0).unwrap();
        let (hi, _) = xi_at_detuning(&p, w0 + eps).unwrap();
        assert!((lo - mid).abs() < 1e-9 * mid);
        assert!((hi - mid).abs() < 1e-9 * mid);
    }

    #[test]
    fn strongly_mismatched_magnitude_decays() {
        let p = params(0.8);
        let gp = GAMMA * 0.8;
        let peak = (2.0 * gp / -BETA2).sqrt();
        let (at_peak, _) = xi_at_detuning(&p, peak).unwrap();
        let (far, _) = xi_at_detuning(&p, 6.0 * peak).unwrap();
        assert!(far < 0.2 * at_peak);
        // Far out the envelope is bounded by the sinc-like bound gamma*P*L scaled
        // by the inverse mismatch.
        assert!(far < gp * p.length);
    }

    #[test]
    fn small_detuning_matches_kappa_2gp_value() {
        let p = params(0.8);
        let gp = GAMMA * 0.8;
        // g = 0 at kappa = 2*gamma*P, i.e. detuning -> 0.
        let (xi, _) = xi_at_detuning(&p, 1.0e3).unwrap();
        let expect = (gp * p.length).asinh();
        assert!((xi - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn pia_gain_identities() {
        assert_eq!(pia_gain_from_xi(0.0).unwrap(), 1.0);
        // 22 dB of antisqueezing: exp(2r) = 10^2.2, so r = 1.1 ln(10) = 2.5328
        // and G = cosh(2r) = (10^2.2 + 10^-2.2)/2 = 79.25.
        let r = 1.1 * std::f64::consts::LN_10;
        assert!((r - 2.5328).abs() < 5e-5);
        let g = pia_gain_from_xi(r).unwrap();
        assert!((g - 79.25).abs() < 5e-3, "G = {g}");
        assert!((g - 0.5 * (10f64.powf(2.2) + 10f64.powf(-2.2))).abs() < 1e-9);
        assert!((g - (2.0 * r.sinh().powi(2) + 1.0)).abs() < 1e-9);
        for gain in [1.5, 10.0, 100.0] {
            let xi = xi_from_pia_gain(gain).unwrap();
            assert!((pia_gain_from_xi(xi).unwrap() - gain).abs() <= 1e-12 * gain);
        }
        assert!(xi_from_pia_gain(0.99).is_err());
        assert!(pia_gain_from_xi(-0.1).is_err());
    }
}
