//! Local-oscillator synthesis.
//!
//! A signal seed is amplified by seeded four-wave mixing, which adds the
//! mirror-conjugated idler component; balancing the signal branch down by
//! `(G-1)/G` then leaves a spectrum proportional to a self-conjugated mode.
//! Seed generators cover a coherent carrier, a noise-modulated laser
//! (Ornstein-Uhlenbeck phase + sinusoidal modulation + slow dither), and
//! filtered amplified spontaneous emission (independent complex-Gaussian
//! bins under a Gaussian envelope).
//!
//! Sample batches are reproducible: sample `i` of a batch uses the base
//! `rng_seed` with the ChaCha stream id set to `i`, so batches can be split
//! across workers without changing the realizations.

use crate::error::{Error, Result};
use crate::numeric::linear_from_db;
use crate::spectral::{FrequencyGrid, SpectralAmplitude, TimeFreqMode};
use num_complex::Complex64 as C64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Which seed source produced an LO realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedKind {
    Coherent,
    NoiseModulated,
    FilteredAse,
}

/// One synthesized local-oscillator spectrum (unnormalized; carries the
/// relative power of its components).
#[derive(Clone, Debug)]
pub struct LoRealization {
    pub spectrum: SpectralAmplitude,
    pub seed_kind: SeedKind,
    /// Classical intensity noise in excess of shot noise (linear, >= 0).
    pub excess_rin: f64,
}

impl LoRealization {
    /// Normalized measurement mode defined by this LO.
    pub fn mode(&self) -> Result<TimeFreqMode> {
        TimeFreqMode::from_unnormalized(&self.spectrum)
    }
}

/// Generative model of the FWM signal seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeedModel {
    /// Single-frequency carrier at the given detuning from the pump.
    Coherent { center_detuning: f64 },
    /// Carrier with three phase-modulation stages.
    NoiseModulated {
        /// Carrier detuning from the pump (rad/s).
        center_detuning: f64,
        /// Slow coherence-control dither rate (Hz).
        coherence_control_rate: f64,
        /// Bandwidth of the random phase stage (Hz).
        random_pm_bandwidth: f64,
        /// Sinusoidal modulation frequency (Hz).
        sine_pm_freq: f64,
        /// Stationary depth of the random stage (rad).
        ou_depth: f64,
        /// Depth of the sinusoidal stage (rad).
        sine_depth: f64,
        /// Depth of the dither stage (rad).
        dither_depth: f64,
    },
    /// Complex-Gaussian bins shaped by a Gaussian power envelope.
    FilteredAse {
        /// Envelope center detuning from the pump (rad/s).
        center_detuning: f64,
        /// Envelope standard deviation (rad/s).
        bandwidth: f64,
    },
}

impl SeedModel {
    pub fn kind(&self) -> SeedKind {
        match self {
            SeedModel::Coherent { .. } => SeedKind::Coherent,
            SeedModel::NoiseModulated { .. } => SeedKind::NoiseModulated,
            SeedModel::FilteredAse { .. } => SeedKind::FilteredAse,
        }
    }

    fn center_detuning(&self) -> f64 {
        match self {
            SeedModel::Coherent { center_detuning }
            | SeedModel::NoiseModulated {
                center_detuning, ..
            }
            | SeedModel::FilteredAse {
                center_detuning, ..
            } => *center_detuning,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_detuning() > 0.0) {
            return Err(Error::invalid(
                "seed center detuning must be positive (signal branch)",
            ));
        }
        match self {
            SeedModel::Coherent { .. } => {}
            SeedModel::NoiseModulated {
                coherence_control_rate,
                random_pm_bandwidth,
                sine_pm_freq,
                ou_depth,
                sine_depth,
                dither_depth,
                ..
            } => {
                for (name, v) in [
                    ("coherence_control_rate", coherence_control_rate),
                    ("random_pm_bandwidth", random_pm_bandwidth),
                    ("sine_pm_freq", sine_pm_freq),
                    ("ou_depth", ou_depth),
                    ("sine_depth", sine_depth),
                    ("dither_depth", dither_depth),
                ] {
                    if *v < 0.0 || !v.is_finite() {
                        return Err(Error::invalid(format!("{name} must be non-negative")));
                    }
                }
            }
            SeedModel::FilteredAse { bandwidth, .. } => {
                if !(*bandwidth > 0.0) {
                    return Err(Error::invalid("envelope bandwidth must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// FWM amplification of a signal seed:
/// `sqrt(G) f0` on the signal branch plus `sqrt(G-1)` times the
/// mirror-conjugate of `f0` on the idler branch.
pub fn fwm_output(seed: &TimeFreqMode, gain: f64, seed_kind: SeedKind) -> Result<LoRealization> {
    if gain < 1.0 || !gain.is_finite() {
        return Err(Error::invalid(format!(
            "FWM gain must be at least 1, got {gain}"
        )));
    }
    if !seed.is_signal_only() {
        return Err(Error::invalid("FWM seed must be signal-only"));
    }
    let mirrored = seed.amplitude().conjugate_mirror();
    let gs = gain.sqrt();
    let gi = (gain - 1.0).sqrt();
    let grid = *seed.grid();
    let mut values = Vec::with_capacity(grid.num_bins());
    for k in 0..grid.num_bins() {
        values.push(seed.values()[k] * gs + mirrored.values()[k] * gi);
    }
    Ok(LoRealization {
        spectrum: SpectralAmplitude::new(grid, values)?,
        seed_kind,
        excess_rin: 0.0,
    })
}

/// Attenuate the signal branch by `(G-1)/G` in power, balancing the FWM
/// output into a spectrum proportional to a self-conjugated mode.
///
/// Not idempotent: balancing an already balanced LO attenuates the signal
/// branch again.
pub fn balance(lo: &LoRealization, gain: f64) -> Result<LoRealization> {
    if gain <= 1.0 {
        return Err(Error::invalid(
            "balancing is degenerate at G = 1 (empty idler branch)",
        ));
    }
    let factor = ((gain - 1.0) / gain).sqrt();
    let mut spectrum = lo.spectrum.clone();
    let half = spectrum.grid().half_bins();
    for v in &mut spectrum.values_mut()[..half] {
        *v *= factor;
    }
    Ok(LoRealization {
        spectrum,
        seed_kind: lo.seed_kind,
        excess_rin: lo.excess_rin,
    })
}

/// Convert an apparent-shot-noise rise in dB to linear excess intensity
/// noise: `10^(dB/10) - 1`.
pub fn lo_excess_rin(apparent_shot_db_above_true: f64) -> Result<f64> {
    if apparent_shot_db_above_true < 0.0 {
        return Err(Error::invalid(
            "apparent shot noise cannot sit below true shot noise",
        ));
    }
    Ok(linear_from_db(apparent_shot_db_above_true) - 1.0)
}

fn sample_rng(rng_seed: u64, sample: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    rng.set_stream(sample);
    rng
}

/// Draw `n_samples` unit-norm signal-only seed modes from the model.
/// Sample `i` depends only on `(rng_seed, i)`.
pub fn synth_seed(
    model: &SeedModel,
    grid: &FrequencyGrid,
    n_samples: usize,
    rng_seed: u64,
) -> Result<Vec<TimeFreqMode>> {
    model.validate()?;
    let center_bin = grid.signal_bin_at(model.center_detuning())?;
    match model {
        SeedModel::Coherent { .. } => {
            let mode = TimeFreqMode::delta(*grid, center_bin)?;
            Ok(vec![mode; n_samples])
        }
        SeedModel::NoiseModulated {
            coherence_control_rate,
            random_pm_bandwidth,
            sine_pm_freq,
            ou_depth,
            sine_depth,
            dither_depth,
            ..
        } => {
            // Carson-rule support estimate, in rad/s.
            let support = TAU
                * ((sine_depth + 1.0) * sine_pm_freq
                    + (ou_depth + 1.0) * random_pm_bandwidth
                    + (dither_depth + 1.0) * coherence_control_rate);
            let center = model.center_detuning();
            let branch_top = grid.half_bins() as f64 * grid.spacing();
            if center - support < 0.5 * grid.spacing()
                || center + support > branch_top + 0.5 * grid.spacing()
            {
                return Err(Error::Aliasing(format!(
                    "modulation support {support:.3e} rad/s around detuning {center:.3e} leaves the signal branch"
                )));
            }

            let n = grid.half_bins();
            let dt = TAU / (n as f64 * grid.spacing());
            let mut planner = FftPlanner::new();
            let fft = planner.plan_fft_forward(n);
            let lambda = TAU * random_pm_bandwidth;
            let rho = (-lambda * dt).exp();
            let ou_kick = ou_depth * (1.0 - rho * rho).sqrt();
            let normal = Normal::new(0.0, 1.0).expect("unit normal");

            let mut out = Vec::with_capacity(n_samples);
            for i in 0..n_samples {
                let mut rng = sample_rng(rng_seed, i as u64);
                let ph_sine = TAU * rng.random::<f64>();
                let ph_dither = TAU * rng.random::<f64>();
                let mut ou = ou_depth * normal.sample(&mut rng);
                let mut wave = Vec::with_capacity(n);
                for j in 0..n {
                    let t = j as f64 * dt;
                    let phase = ou
                        + sine_depth * (TAU * sine_pm_freq * t + ph_sine).sin()
                        + dither_depth * (TAU * coherence_control_rate * t + ph_dither).sin();
                    wave.push(C64::from_polar(1.0, phase));
                    ou = rho * ou + ou_kick * normal.sample(&mut rng);
                }
                fft.process(&mut wave);

                let mut amp = SpectralAmplitude::zeros(*grid);
                let mut dropped = 0.0;
                let mut total = 0.0;
                for (m, v) in wave.iter().enumerate() {
                    let offset = if m <= n / 2 {
                        m as isize
                    } else {
                        m as isize - n as isize
                    };
                    let bin = center_bin as isize + offset;
                    total += v.norm_sqr();
                    if bin >= 0 && (bin as usize) < n {
                        amp.values_mut()[bin as usize] = *v;
                    } else {
                        dropped += v.norm_sqr();
                    }
                }
                // A finite-window stochastic phase leaks a broadband floor;
                // the branch edge acts as a bandpass filter on it. Only a
                // non-negligible out-of-branch fraction is an error.
                if dropped > 1e-3 * total {
                    return Err(Error::Aliasing(format!(
                        "{:.2e} of the seed power falls outside the signal branch",
                        dropped / total
                    )));
                }
                out.push(TimeFreqMode::from_unnormalized(&amp)?);
            }
            Ok(out)
        }
        SeedModel::FilteredAse {
            center_detuning,
            bandwidth,
        } => {
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            let mut out = Vec::with_capacity(n_samples);
            for i in 0..n_samples {
                let mut rng = sample_rng(rng_seed, i as u64);
                let mut amp = SpectralAmplitude::zeros(*grid);
                for k in 0..grid.half_bins() {
                    let x = (grid.detuning(k) - center_detuning) / bandwidth;
                    let envelope = (-0.5 * x * x).exp();
                    let g = C64::new(normal.sample(&mut rng), normal.sample(&mut rng))
                        * std::f64::consts::FRAC_1_SQRT_2;
                    amp.values_mut()[k] = g * envelope.sqrt();
                }
                out.push(TimeFreqMode::from_unnormalized(&amp)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeKind;

    fn grid(half: usize) -> FrequencyGrid {
        FrequencyGrid::new(1.2e15, TAU * 0.5e9, half).unwrap()
    }

    fn random_seed_mode(grid: FrequencyGrid, seed: u64) -> TimeFreqMode {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut a = SpectralAmplitude::zeros(grid);
        for k in 0..grid.half_bins() {
            a.values_mut()[k] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        TimeFreqMode::from_unnormalized(&a).unwrap()
    }

    #[test]
    fn fwm_gain_one_has_no_idler() {
        let g = grid(8);
        let lo = fwm_output(&random_seed_mode(g, 1), 1.0, SeedKind::Coherent).unwrap();
        assert_eq!(lo.spectrum.idler_power(), 0.0);
        assert!((lo.spectrum.signal_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fwm_delta_seed_powers() {
        let g = grid(8);
        let seed = TimeFreqMode::delta(g, 3).unwrap();
        let lo = fwm_output(&seed, 2.0, SeedKind::Coherent).unwrap();
        assert!((lo.spectrum.values()[3].norm_sqr() - 2.0).abs() < 1e-12);
        assert!((lo.spectrum.values()[g.conj(3)].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fwm_idler_mirrors_seed_intensity() {
        let g = grid(32);
        let seed = random_seed_mode(g, 7);
        let gain = 3.7;
        let lo = fwm_output(&seed, gain, SeedKind::Coherent).unwrap();
        for k in 0..g.half_bins() {
            let s = lo.spectrum.values()[k].norm_sqr();
            let i = lo.spectrum.values()[g.conj(k)].norm_sqr();
            assert!((s / gain - i / (gain - 1.0)).abs() < 1e-12);
        }
        assert!((lo.spectrum.signal_power() / lo.spectrum.idler_power()
            - gain / (gain - 1.0))
            .abs()
            < 1e-12);
    }

    #[test]
    fn fwm_rejects_bad_inputs() {
        let g = grid(4);
        let seed = TimeFreqMode::delta(g, 0).unwrap();
        assert!(fwm_output(&seed, 0.5, SeedKind::Coherent).is_err());
        let idler = TimeFreqMode::delta(g, g.conj(0)).unwrap();
        assert!(fwm_output(&idler, 2.0, SeedKind::Coherent).is_err());
    }

    #[test]
    fn balance_equalizes_delta_powers() {
        let g = grid(4);
        let seed = TimeFreqMode::delta(g, 1).unwrap();
        let lo = fwm_output(&seed, 2.0, SeedKind::Coherent).unwrap();
        let bal = balance(&lo, 2.0).unwrap();
        assert!((bal.spectrum.values()[1].norm_sqr() - 1.0).abs() < 1e-12);
        assert!((bal.spectrum.values()[g.conj(1)].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_lo_is_self_conjugated() {
        let g = grid(16);
        for seed_id in 0..20 {
            let seed = random_seed_mode(g, seed_id);
            let lo = fwm_output(&seed, 10.0, SeedKind::Coherent).unwrap();
            let mode = balance(&lo, 10.0).unwrap().mode().unwrap();
            assert!(mode.is_self_conjugated(None, 1e-10));
            assert_eq!(mode.kind(), ModeKind::SelfConjugated);
        }
    }

    #[test]
    fn rebalancing_is_not_idempotent() {
        let g = grid(4);
        let seed = TimeFreqMode::delta(g, 1).unwrap();
        let lo = fwm_output(&seed, 2.0, SeedKind::Coherent).unwrap();
        let once = balance(&lo, 2.0).unwrap();
        let twice = balance(&once, 2.0).unwrap();
        assert!(
            (once.spectrum.values()[1].norm_sqr() - twice.spectrum.values()[1].norm_sqr()).abs()
                > 0.1
        );
    }

    #[test]
    fn balance_rejects_unit_gain() {
        let g = grid(4);
        let seed = TimeFreqMode::delta(g, 1).unwrap();
        let lo = fwm_output(&seed, 1.0, SeedKind::Coherent).unwrap();
        assert!(balance(&lo, 1.0).is_err());
    }

    #[test]
    fn excess_rin_values() {
        assert_eq!(lo_excess_rin(0.0).unwrap(), 0.0);
        assert!((lo_excess_rin(0.74).unwrap() - 0.1857).abs() < 1e-4);
        assert!((lo_excess_rin(0.11).unwrap() - 0.0257).abs() < 1e-4);
        assert!(lo_excess_rin(-0.1).is_err());
    }

    #[test]
    fn coherent_seed_is_deterministic_delta() {
        let g = grid(16);
        let model = SeedModel::Coherent {
            center_detuning: 8.0 * g.spacing(),
        };
        let modes = synth_seed(&model, &g, 4, 1).unwrap();
        assert_eq!(modes.len(), 4);
        for m in &modes {
            assert_eq!(m, &modes[0]);
            assert_eq!(m.kind(), ModeKind::SignalOnly);
        }
    }

    fn noise_model(g: &FrequencyGrid, sine_hz: f64) -> SeedModel {
        SeedModel::NoiseModulated {
            center_detuning: (g.half_bins() / 2) as f64 * g.spacing(),
            coherence_control_rate: 40e6,
            random_pm_bandwidth: 300e6,
            sine_pm_freq: sine_hz,
            ou_depth: 0.4,
            sine_depth: 0.5,
            dither_depth: 0.2,
        }
    }

    #[test]
    fn noise_modulated_seeds_are_reproducible_and_unit_norm() {
        let g = grid(64);
        let model = noise_model(&g, 1.0e9);
        let a = synth_seed(&model, &g, 3, 42).unwrap();
        let b = synth_seed(&model, &g, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = synth_seed(&model, &g, 3, 43).unwrap();
        assert_ne!(a, c);
        for m in &a {
            assert!(m.is_signal_only());
            assert!((m.amplitude().norm() - 1.0).abs() < NORM_EPS);
        }
    }
    const NORM_EPS: f64 = 1e-12;

    #[test]
    fn sine_modulation_sidebands_match_bessel_weights() {
        // Pure sinusoidal phase modulation aligned with the bin raster:
        // sideband n carries |J_n(depth)|^2 of the power (Jacobi-Anger).
        let g = grid(64);
        let depth = 0.7;
        let sine_hz = 2.0e9; // 4 bins of 0.5 GHz spacing
        let model = SeedModel::NoiseModulated {
            center_detuning: 32.0 * g.spacing(),
            coherence_control_rate: 0.0,
            random_pm_bandwidth: 0.0,
            sine_pm_freq: sine_hz,
            ou_depth: 0.0,
            sine_depth: depth,
            dither_depth: 0.0,
        };
        let mode = &synth_seed(&model, &g, 1, 5).unwrap()[0];
        let center = 31; // 0-based bin of the carrier
        let step = 4;
        let bessel = |n: i32, m: f64| {
            // J_n(m) by Simpson quadrature of (1/pi) int_0^pi cos(n t - m sin t) dt.
            let steps = 4000;
            let h = std::f64::consts::PI / steps as f64;
            let f = |t: f64| (n as f64 * t - m * t.sin()).cos();
            let mut acc = f(0.0) + f(std::f64::consts::PI);
            for i in 1..steps {
                let t = i as f64 * h;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
            }
            acc * h / 3.0 / std::f64::consts::PI
        };
        let carrier = mode.values()[center].norm_sqr();
        let up = mode.values()[center + step].norm_sqr();
        let down = mode.values()[center - step].norm_sqr();
        let expect = (bessel(1, depth) / bessel(0, depth)).powi(2);
        assert!((up / carrier - expect).abs() < 1e-6, "upper sideband");
        assert!((down / carrier - expect).abs() < 1e-6, "lower sideband");
    }

    #[test]
    fn oversized_modulation_support_errors() {
        let g = grid(16);
        let model = noise_model(&g, 20.0e9);
        assert!(matches!(
            synth_seed(&model, &g, 1, 1),
            Err(Error::Aliasing(_))
        ));
    }

    #[test]
    fn ase_mean_spectrum_matches_envelope() {
        let g = grid(32);
        let sigma = 3.0 * g.spacing();
        let model = SeedModel::FilteredAse {
            center_detuning: 16.0 * g.spacing(),
            bandwidth: sigma,
        };
        let samples = synth_seed(&model, &g, 10_000, 9).unwrap();
        let mut mean = vec![0.0; g.half_bins()];
        for s in &samples {
            for k in 0..g.half_bins() {
                mean[k] += s.values()[k].norm_sqr();
            }
        }
        let total: f64 = mean.iter().sum();
        for m in &mut mean {
            *m /= total;
        }
        let mut envelope: Vec<f64> = (0..g.half_bins())
            .map(|k| {
                let x = (g.detuning(k) - 16.0 * g.spacing()) / sigma;
                (-0.5 * x * x).exp() // power envelope = PSD shape
            })
            .collect();
        let env_total: f64 = envelope.iter().sum();
        for e in &mut envelope {
            *e /= env_total;
        }
        // Kolmogorov distance between the two normalized spectra.
        let mut cdf_a = 0.0;
        let mut cdf_b = 0.0;
        let mut dist: f64 = 0.0;
        for k in 0..g.half_bins() {
            cdf_a += mean[k];
            cdf_b += envelope[k];
            dist = dist.max((cdf_a - cdf_b).abs());
        }
        assert!(dist < 0.02, "Kolmogorov distance {dist}");
    }
}
