//! Balanced homodyne detection, the loss/noise budget, the heralding
//! pipeline, and pump-power sweeps.
//!
//! All measured levels are linear power ratios relative to the true shot
//! noise of an ideal local oscillator; dB figures are `10 log10` of those
//! ratios (negative below shot noise).

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeSelector, VACUUM_VARIANCE};
use crate::lo::LoRealization;
use crate::numeric::db_from_linear;
use crate::sfwm::apply_sfwm_distributed;
use crate::spectral::{FopaParams, TimeFreqMode};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Ordered efficiency factors plus the electronic noise terms of the
/// detection path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    /// Transmissivities applied between the fiber output and the
    /// photocurrent, each in (0, 1].
    pub efficiencies: Vec<f64>,
    /// Detector dark noise relative to true shot noise (linear).
    pub dark_rel: f64,
    /// LO classical intensity noise surviving common-mode rejection,
    /// relative to true shot noise (linear).
    pub rin_excess: f64,
    /// Common-mode rejection ratio applied to the raw LO intensity noise
    /// before `rin_excess` is formed (dB, informational).
    pub cmrr_db: f64,
}

impl DetectionChain {
    /// Lossless, noiseless chain.
    pub fn ideal() -> Self {
        DetectionChain {
            efficiencies: Vec::new(),
            dark_rel: 0.0,
            rin_excess: 0.0,
            cmrr_db: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, eff) in self.efficiencies.iter().enumerate() {
            if !(*eff > 0.0 && *eff <= 1.0) {
                return Err(Error::invalid(format!(
                    "chain efficiency #{i} = {eff} must lie in (0, 1]"
                )));
            }
        }
        if self.dark_rel < 0.0 {
            return Err(Error::invalid("dark noise must be non-negative"));
        }
        if self.rin_excess < 0.0 {
            return Err(Error::invalid("excess intensity noise must be non-negative"));
        }
        Ok(())
    }

    /// Product of the chain efficiencies.
    pub fn efficiency(&self) -> f64 {
        self.efficiencies.iter().product()
    }

    /// Measured level of an internal quadrature variance after the chain:
    /// `[eta v + (1 - eta)/2] / (1/2) + dark + rin`.
    pub fn level_rel_true_shot(&self, v_internal: f64) -> f64 {
        let eta = self.efficiency();
        (eta * v_internal + (1.0 - eta) * VACUUM_VARIANCE) / VACUUM_VARIANCE
            + self.dark_rel
            + self.rin_excess
    }
}

/// Noise levels of one measurement, relative to true shot noise (linear).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasuredLevel {
    pub squeezed_rel_true_shot: f64,
    pub antisqueezed_rel_true_shot: f64,
    pub apparent_shot_rel_true_shot: f64,
    pub dark_rel_true_shot: f64,
}

impl MeasuredLevel {
    pub fn squeezed_db(&self) -> f64 {
        db_from_linear(self.squeezed_rel_true_shot)
    }

    pub fn antisqueezed_db(&self) -> f64 {
        db_from_linear(self.antisqueezed_rel_true_shot)
    }
}

/// Budget composition for a single internal variance.
///
/// Only one variance is supplied, so the squeezed and antisqueezed fields
/// coincide; [`bhd_measure`] fills them from the two conjugate quadratures.
pub fn measured_level(v_internal: f64, chain: &DetectionChain) -> Result<MeasuredLevel> {
    if !(v_internal > 0.0) {
        return Err(Error::invalid("internal variance must be positive"));
    }
    chain.validate()?;
    let level = chain.level_rel_true_shot(v_internal);
    Ok(MeasuredLevel {
        squeezed_rel_true_shot: level,
        antisqueezed_rel_true_shot: level,
        apparent_shot_rel_true_shot: 1.0 + chain.rin_excess,
        dark_rel_true_shot: chain.dark_rel,
    })
}

/// Shift an already-measured level to a different dark-noise floor and add
/// classical LO noise: `baseline - dark_from + dark_to + added_rin`.
pub fn rebudget_level(baseline: f64, dark_from: f64, dark_to: f64, added_rin: f64) -> f64 {
    baseline - dark_from + dark_to + added_rin
}

/// Apply the chain's combined efficiency as a frequency-flat loss on every
/// bin. The electronic terms (dark noise, intensity noise) are not part of
/// the optical state; they are added to measured levels afterwards.
pub fn apply_chain_loss(state: &GaussianState, chain: &DetectionChain) -> Result<GaussianState> {
    chain.validate()?;
    let eta = chain.efficiency();
    let mut out = state.clone();
    if eta < 1.0 {
        for bin in 0..state.grid().num_bins() {
            out.loss_channel_mut(bin, eta, 0.0)?;
        }
    }
    Ok(out)
}

/// Homodyne measurement of the LO-defined mode at quadrature angle `theta`.
///
/// The chain efficiencies act as frequency-flat loss channels before the
/// projection; dark noise and residual intensity noise are added to the
/// measured level afterwards. The squeezed field holds the level at `theta`,
/// the antisqueezed field the level at the conjugate angle `theta + pi/2`.
pub fn bhd_measure(
    state: &GaussianState,
    lo: &LoRealization,
    theta: f64,
    chain: &DetectionChain,
) -> Result<MeasuredLevel> {
    let mode = lo.mode()?;
    let detected = apply_chain_loss(state, chain)?;
    let (_, v_theta) = detected.mode_quadrature_stats(&ModeSelector::new(mode.clone(), theta))?;
    let (_, v_conj) =
        detected.mode_quadrature_stats(&ModeSelector::new(mode, theta + FRAC_PI_2))?;
    Ok(MeasuredLevel {
        squeezed_rel_true_shot: v_theta / VACUUM_VARIANCE + chain.dark_rel + chain.rin_excess,
        antisqueezed_rel_true_shot: v_conj / VACUUM_VARIANCE + chain.dark_rel + chain.rin_excess,
        apparent_shot_rel_true_shot: 1.0 + chain.rin_excess,
        dark_rel_true_shot: chain.dark_rel,
    })
}

/// Like [`bhd_measure`] but sweeping the quadrature angle analytically:
/// the squeezed field holds the minimum level over `theta`, the
/// antisqueezed field the maximum.
pub fn bhd_extrema(
    state: &GaussianState,
    lo: &LoRealization,
    chain: &DetectionChain,
) -> Result<MeasuredLevel> {
    let mode = lo.mode()?;
    let detected = apply_chain_loss(state, chain)?;
    let (v_min, v_max) = detected.mode_variance_extrema(&mode)?;
    Ok(MeasuredLevel {
        squeezed_rel_true_shot: v_min / VACUUM_VARIANCE + chain.dark_rel + chain.rin_excess,
        antisqueezed_rel_true_shot: v_max / VACUUM_VARIANCE + chain.dark_rel + chain.rin_excess,
        apparent_shot_rel_true_shot: 1.0 + chain.rin_excess,
        dark_rel_true_shot: chain.dark_rel,
    })
}

/// Outcome of the heralding pipeline.
#[derive(Clone, Copy, Debug)]
pub struct HeraldReport {
    /// Regression slope of the conditional signal mean against the heralding
    /// outcome.
    pub slope: f64,
    /// Conditional signal mean at heralding outcome zero.
    pub mean_intercept: f64,
    /// Conditional signal variance at quadrature angle zero (vacuum units);
    /// independent of the heralding outcome.
    pub variance: f64,
    /// Monte-Carlo mean photon number of the heralded ensemble averaged over
    /// the supplied outcomes.
    pub thermal_mean_photons: f64,
    /// Standard error of that mean.
    pub thermal_std_error: f64,
    pub n_samples: usize,
}

/// Condition on the idler-mode X quadrature for each heralding outcome and
/// collect the statistics of the signal mode.
///
/// The conditional covariance is outcome-independent, so the conditioning is
/// performed once; the outcome dependence of the conditional means is affine
/// and evaluated per sample. `herald_efficiency` applies a pre-measurement
/// loss on the idler-support bins (1 = ideal heralding detector).
pub fn herald_pipeline(
    state: &GaussianState,
    idler_mode: &TimeFreqMode,
    signal_mode: &TimeFreqMode,
    gamma_samples: &[f64],
    herald_efficiency: f64,
) -> Result<HeraldReport> {
    if !idler_mode.is_idler_only() || !signal_mode.is_signal_only() {
        return Err(Error::invalid(
            "heralding needs an idler-only measured mode and a signal-only heralded mode",
        ));
    }
    if !(0.0 < herald_efficiency && herald_efficiency <= 1.0) {
        return Err(Error::invalid("herald efficiency must lie in (0, 1]"));
    }
    let mut prepared = state.clone();
    if herald_efficiency < 1.0 {
        for (bin, v) in idler_mode.values().iter().enumerate() {
            if v.norm_sqr() > 0.0 {
                prepared.loss_channel_mut(bin, herald_efficiency, 0.0)?;
            }
        }
    }
    let sel = ModeSelector::new(idler_mode.clone(), 0.0);
    let cond0 = prepared.homodyne_condition(&sel, 0.0)?;
    let cond1 = prepared.homodyne_condition(&sel, 1.0)?;
    let (mx0, vx) = cond0.mode_quadrature_stats(signal_mode, 0.0)?;
    let (mx1, vx1) = cond1.mode_quadrature_stats(signal_mode, 0.0)?;
    let (mp0, vp) = cond0.mode_quadrature_stats(signal_mode, FRAC_PI_2)?;
    let (mp1, _) = cond1.mode_quadrature_stats(signal_mode, FRAC_PI_2)?;
    if (vx1 - vx).abs() > 1e-10 * (1.0 + vx.abs()) {
        return Err(Error::Internal(
            "conditional variance depends on the heralding outcome".into(),
        ));
    }
    let slope_x = mx1 - mx0;
    let slope_p = mp1 - mp0;

    let n = gamma_samples.len();
    let slope = if n >= 2 {
        let mean_g: f64 = gamma_samples.iter().sum::<f64>() / n as f64;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for &g in gamma_samples {
            let d = g - mean_g;
            sxx += d * d;
            sxy += d * (mx0 + slope_x * g);
        }
        if sxx > 0.0 {
            sxy / sxx
        } else {
            slope_x
        }
    } else {
        slope_x
    };

    let (mut acc, mut acc2) = (0.0, 0.0);
    for &g in gamma_samples {
        let mx = mx0 + slope_x * g;
        let mp = mp0 + slope_p * g;
        let photons = 0.5 * (vx + vp + mx * mx + mp * mp - 1.0);
        acc += photons;
        acc2 += photons * photons;
    }
    let (thermal_mean, thermal_se) = if n > 1 {
        let mean = acc / n as f64;
        let var = (acc2 / n as f64 - mean * mean).max(0.0) * n as f64 / (n - 1) as f64;
        (mean, (var / n as f64).sqrt())
    } else {
        (if n == 1 { acc } else { 0.0 }, 0.0)
    };

    Ok(HeraldReport {
        slope,
        mean_intercept: mx0,
        variance: vx,
        thermal_mean_photons: thermal_mean,
        thermal_std_error: thermal_se,
        n_samples: n,
    })
}

/// One row of a pump sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub pump_peak_power: f64,
    /// Minimum measured level over the quadrature angle (dB re true shot).
    pub squeezed_db: f64,
    /// Maximum measured level over the quadrature angle (dB re true shot).
    pub antisqueezed_db: f64,
}

/// Run the distributed model at each pump power and measure the LO mode
/// through the chain.
pub fn sweep_pump(
    powers: &[f64],
    params: &FopaParams,
    chain: &DetectionChain,
    lo: &LoRealization,
) -> Result<Vec<SweepPoint>> {
    if powers.is_empty() {
        return Err(Error::invalid("pump sweep needs at least one power"));
    }
    let grid = *lo.spectrum.grid();
    let mut rows = Vec::with_capacity(powers.len());
    for &p in powers {
        let run_params = FopaParams {
            pump_peak_power: p,
            ..*params
        };
        let state = apply_sfwm_distributed(&GaussianState::vacuum(grid), &run_params, &grid)?;
        let level = bhd_extrema(&state, lo, chain)?;
        rows.push(SweepPoint {
            pump_peak_power: p,
            squeezed_db: level.squeezed_db(),
            antisqueezed_db: level.antisqueezed_db(),
        });
    }
    Ok(rows)
}
