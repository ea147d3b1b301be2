//! Squeezing propagation models and their closed-form companions.
//!
//! The lumped model applies the full-length joint spectrum as one two-mode
//! squeezer per conjugate bin pair. The distributed model splits the fiber
//! into segments; within each segment every conjugate pair evolves under the
//! simultaneous squeeze-plus-loss generator, integrated exactly with the
//! pump power held at the segment midpoint, and the loss couples every bin
//! to a thermal reservoir. In the lossless limit the two models coincide for
//! any segment count because the pair squeezers compose additively.

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, VACUUM_VARIANCE};
use crate::numeric::{bisect, db_from_linear, linear_from_db};
use crate::spectral::{FopaParams, FrequencyGrid, JointSpectrum, TimeFreqMode, SC_TOL};
use crate::spectral::fopa_joint_spectrum;

/// Propagation model choice.
#[derive(Clone, Debug, PartialEq)]
pub enum SfwmModel {
    /// Single application of the full-length joint spectrum.
    Lumped,
    /// Split-step propagation with loss and reservoir mixing.
    Distributed(FopaParams),
}

/// A completed squeezing run: the spectrum that drove it, the model used,
/// and the output state.
#[derive(Clone, Debug)]
pub struct SqueezeRun {
    pub joint: JointSpectrum,
    pub model: SfwmModel,
    pub output: GaussianState,
}

impl SqueezeRun {
    /// Run the chosen model from vacuum on the given grid.
    pub fn execute(params: &FopaParams, grid: &FrequencyGrid, model: SfwmModel) -> Result<Self> {
        let joint = fopa_joint_spectrum(params, grid)?;
        let vacuum = GaussianState::vacuum(*grid);
        let output = match &model {
            SfwmModel::Lumped => apply_sfwm_lumped(&vacuum, &joint)?,
            SfwmModel::Distributed(p) => apply_sfwm_distributed(&vacuum, p, grid)?,
        };
        Ok(SqueezeRun {
            joint,
            model,
            output,
        })
    }
}

/// Apply one two-mode squeezer per conjugate pair with `r = |xi|`,
/// `phi = arg(xi)`. Pairs act on disjoint bins, so the application order is
/// irrelevant.
pub fn apply_sfwm_lumped(state: &GaussianState, joint: &JointSpectrum) -> Result<GaussianState> {
    if joint.grid() != state.grid() {
        return Err(Error::invalid("joint spectrum grid differs from state grid"));
    }
    let mut out = state.clone();
    apply_lumped_mut(&mut out, joint, 1.0)?;
    Ok(out)
}

fn apply_lumped_mut(state: &mut GaussianState, joint: &JointSpectrum, scale: f64) -> Result<()> {
    let grid = *state.grid();
    for pair in 0..grid.half_bins() {
        let r = scale * joint.magnitudes()[pair];
        if r != 0.0 {
            state.two_mode_squeeze_mut((pair, grid.conj(pair)), r, joint.phases()[pair])?;
        }
    }
    Ok(())
}

/// Variance of `X_0` on a self-conjugated mode after the squeezing run:
/// the spectral average `(1/2) * sum_k |f_k|^2 exp(-2 |xi_k|)` over all bins.
///
/// Valid only for modes satisfying the self-conjugation predicate with the
/// joint spectrum's phase.
pub fn sc_variance_closed_form(f_conj: &TimeFreqMode, joint: &JointSpectrum) -> Result<f64> {
    if f_conj.grid() != joint.grid() {
        return Err(Error::invalid("mode grid differs from joint spectrum grid"));
    }
    if !f_conj.is_self_conjugated(Some(joint), SC_TOL) {
        return Err(Error::invalid(
            "the spectral-average variance formula holds only on self-conjugated modes",
        ));
    }
    let sum: f64 = f_conj
        .values()
        .iter()
        .enumerate()
        .map(|(bin, v)| v.norm_sqr() * (-2.0 * joint.magnitude_at(bin)).exp())
        .sum();
    Ok(VACUUM_VARIANCE * sum)
}

/// Closed forms for heralding on the idler partner of a flat-spectrum pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeraldedParams {
    /// Conditional-mean slope of the signal quadrature per unit heralding
    /// outcome. Equals `-tanh(2r)`: the regression coefficient forced by the
    /// pair covariance (see the variance identity below, which fixes the
    /// slope through the law of total variance).
    pub slope: f64,
    /// Heralded squeezing parameter `-(1/2) ln cosh(2r)`; the conditional
    /// variance is `exp(2 r_heralded) / 2 = 1 / (2 cosh 2r)`.
    pub r_heralded: f64,
}

impl HeraldedParams {
    /// Conditional signal variance in vacuum units.
    pub fn variance(&self) -> f64 {
        VACUUM_VARIANCE * (2.0 * self.r_heralded).exp()
    }

    /// Conditional variance relative to vacuum, in dB.
    pub fn variance_db(&self) -> f64 {
        db_from_linear(self.variance() / VACUUM_VARIANCE)
    }
}

/// Heralded-squeezing closed forms for pair squeezing parameter `r >= 0`.
pub fn heralded_params(r: f64) -> Result<HeraldedParams> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::invalid("squeezing parameter must be non-negative"));
    }
    Ok(HeraldedParams {
        slope: -(2.0 * r).tanh(),
        r_heralded: -0.5 * (2.0 * r).cosh().ln(),
    })
}

/// Distributed propagation core shared by the public model and the Raman
/// calibration. Per segment, each conjugate pair passes through the exact
/// squeeze-plus-loss slice channel with squeezer magnitude
/// `|xi(pair)| * exp(-alpha * z_mid) / segments` (the full-length spectrum
/// distributed along the fiber proportionally to the attenuated pump power)
/// and integrated attenuation `alpha * L / segments` against a reservoir of
/// `raman_n` photons. The only segment-count dependence left is the midpoint
/// sampling of the pump decay.
pub(crate) fn distributed_run_mut(
    state: &mut GaussianState,
    base_joint: &JointSpectrum,
    alpha_length: f64,
    raman_n: f64,
    segments: usize,
) -> Result<()> {
    if segments == 0 {
        return Err(Error::invalid("segment count must be at least 1"));
    }
    let grid = *state.grid();
    let n = segments as f64;
    let alpha_dz = alpha_length / n;
    for k in 0..segments {
        let weight = (-alpha_length * (k as f64 + 0.5) / n).exp() / n;
        for pair in 0..grid.half_bins() {
            state.pair_squeeze_loss_mut(
                (pair, grid.conj(pair)),
                weight * base_joint.magnitudes()[pair],
                base_joint.phases()[pair],
                alpha_dz,
                raman_n,
            )?;
        }
    }
    Ok(())
}

/// Split-step propagation with fiber loss and reservoir mixing.
pub fn apply_sfwm_distributed(
    state: &GaussianState,
    params: &FopaParams,
    grid: &FrequencyGrid,
) -> Result<GaussianState> {
    params.validate()?;
    if grid != state.grid() {
        return Err(Error::invalid("grid differs from state grid"));
    }
    let joint = fopa_joint_spectrum(params, grid)?;
    apply_sfwm_distributed_spectrum(
        state,
        &joint,
        params.loss_per_length * params.length,
        params.raman_n,
        params.segments,
    )
}

/// Distributed propagation driven by an explicit base joint spectrum instead
/// of the amplifier closed form. `alpha_length` is the integrated
/// attenuation over the full fiber (`alpha * L`).
pub fn apply_sfwm_distributed_spectrum(
    state: &GaussianState,
    base_joint: &JointSpectrum,
    alpha_length: f64,
    raman_n: f64,
    segments: usize,
) -> Result<GaussianState> {
    if base_joint.grid() != state.grid() {
        return Err(Error::invalid("joint spectrum grid differs from state grid"));
    }
    if alpha_length < 0.0 {
        return Err(Error::invalid("integrated attenuation must be non-negative"));
    }
    if raman_n < 0.0 {
        return Err(Error::invalid("reservoir photon number must be non-negative"));
    }
    let mut out = state.clone();
    distributed_run_mut(&mut out, base_joint, alpha_length, raman_n, segments)?;
    Ok(out)
}

/// Squeezed / antisqueezed levels (relative to vacuum) of a flat-spectrum
/// self-conjugated mode after the distributed run. Scalar reduction of
/// [`distributed_run_mut`] on the two extremal quadratures; exact because
/// uniform per-bin loss and flat squeezing act identically on the pair.
pub(crate) fn flat_distributed_levels(
    r_total: f64,
    loss_total: f64,
    raman_n: f64,
    segments: usize,
) -> (f64, f64) {
    let n = segments as f64;
    let alpha_length = -(1.0 - loss_total).ln();
    let alpha_dz = alpha_length / n;
    let reservoir = raman_n + VACUUM_VARIANCE;
    let weight = |c: f64| if c == 0.0 { 1.0 } else { c.exp_m1() / c };
    let mut v_minus = VACUUM_VARIANCE;
    let mut v_plus = VACUUM_VARIANCE;
    for k in 0..segments {
        let r = r_total * (-alpha_length * (k as f64 + 0.5) / n).exp() / n;
        let damp = (-alpha_dz).exp();
        v_minus = damp * (-2.0 * r).exp() * v_minus
            + alpha_dz * reservoir * weight(-(2.0 * r + alpha_dz));
        v_plus = damp * (2.0 * r).exp() * v_plus
            + alpha_dz * reservoir * weight(2.0 * r - alpha_dz);
    }
    (v_minus / VACUUM_VARIANCE, v_plus / VACUUM_VARIANCE)
}

/// Result of the reservoir calibration.
#[derive(Clone, Copy, Debug)]
pub struct RamanCalibration {
    /// Calibrated reservoir mean thermal photon number.
    pub raman_n: f64,
    /// Flat squeezing magnitude (before loss weighting) that places the
    /// antisqueezing at the target.
    pub flat_xi: f64,
    /// Squeezing depth of the forward model at the calibrated point (dB).
    pub achieved_squeeze_db: f64,
    /// Antisqueezing of the forward model at the calibrated point (dB).
    pub achieved_antisqueeze_db: f64,
}

/// Tolerance (dB) of the Raman calibration root find.
pub const RAMAN_CAL_TOL_DB: f64 = 1e-6;

/// Find the reservoir photon number so that, with the flat squeezing
/// magnitude always re-tuned to hold the distributed model's antisqueezing
/// at `target_antisqueeze_db`, its squeezing depth equals
/// `target_squeeze_db`. Nested bisections, tolerance [`RAMAN_CAL_TOL_DB`].
pub fn calibrate_raman(
    target_squeeze_db: f64,
    target_antisqueeze_db: f64,
    loss_total: f64,
    segments: usize,
) -> Result<RamanCalibration> {
    if !(0.0..1.0).contains(&loss_total) {
        return Err(Error::invalid("total loss must lie in [0, 1)"));
    }
    if target_antisqueeze_db <= 0.0 || target_squeeze_db <= 0.0 {
        return Err(Error::invalid("calibration targets must be positive dB depths"));
    }
    if segments == 0 {
        return Err(Error::invalid("segment count must be at least 1"));
    }

    let anti_target = linear_from_db(target_antisqueeze_db);
    let fit_xi = |raman_n: f64| -> Result<f64> {
        let objective =
            |r: f64| flat_distributed_levels(r, loss_total, raman_n, segments).1 - anti_target;
        let mut hi = 1.0;
        for _ in 0..64 {
            if objective(hi) > 0.0 {
                break;
            }
            hi *= 2.0;
        }
        bisect(objective, 0.0, hi, 1e-13, "antisqueezing magnitude")
    };
    let squeeze_depth = |raman_n: f64| -> Result<f64> {
        let r = fit_xi(raman_n)?;
        let (level, _) = flat_distributed_levels(r, loss_total, raman_n, segments);
        Ok(-db_from_linear(level))
    };

    let at_zero = squeeze_depth(0.0)?;
    let raman_n = if (at_zero - target_squeeze_db).abs() <= RAMAN_CAL_TOL_DB {
        0.0
    } else if at_zero < target_squeeze_db {
        return Err(Error::Calibration {
            context: format!(
                "squeezing target {target_squeeze_db} dB exceeds the reservoir-free bound {at_zero:.4} dB"
            ),
            lo: 0.0,
            hi: 0.0,
            f_lo: at_zero - target_squeeze_db,
            f_hi: at_zero - target_squeeze_db,
        });
    } else {
        let mut hi = 1.0;
        let mut bracketed = false;
        for _ in 0..64 {
            if squeeze_depth(hi)? < target_squeeze_db {
                bracketed = true;
                break;
            }
            hi *= 2.0;
        }
        if !bracketed {
            return Err(Error::Calibration {
                context: "no reservoir photon number degrades squeezing to the target".into(),
                lo: 0.0,
                hi,
                f_lo: at_zero - target_squeeze_db,
                f_hi: squeeze_depth(hi)? - target_squeeze_db,
            });
        }
        // The objective is monotone in raman_n; bisect it through a cached
        // evaluation to keep the error type simple.
        let f = |n: f64| squeeze_depth(n).unwrap_or(f64::NAN) - target_squeeze_db;
        bisect(f, 0.0, hi, 1e-12, "reservoir photon number")?
    };

    let flat_xi = fit_xi(raman_n)?;
    let (sq, anti) = flat_distributed_levels(flat_xi, loss_total, raman_n, segments);
    Ok(RamanCalibration {
        raman_n,
        flat_xi,
        achieved_squeeze_db: -db_from_linear(sq),
        achieved_antisqueeze_db: db_from_linear(anti),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::ModeSelector;
    use crate::spectral::{sc_extend, SpectralAmplitude};
    use num_complex::Complex64 as C64;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::FRAC_PI_2;

    fn grid(half: usize) -> FrequencyGrid {
        FrequencyGrid::new(1.2e15, 2.0e10, half).unwrap()
    }

    fn random_signal_mode(grid: FrequencyGrid, rng: &mut impl Rng) -> TimeFreqMode {
        let mut a = SpectralAmplitude::zeros(grid);
        for k in 0..grid.half_bins() {
            a.values_mut()[k] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        TimeFreqMode::from_unnormalized(&a).unwrap()
    }

    fn random_joint(grid: FrequencyGrid, rng: &mut impl Rng) -> JointSpectrum {
        let mags = (0..grid.half_bins())
            .map(|_| 1.2 * rng.random::<f64>())
            .collect();
        let phases = (0..grid.half_bins())
            .map(|_| std::f64::consts::TAU * (rng.random::<f64>() - 0.5))
            .collect();
        JointSpectrum::new(grid, mags, phases).unwrap()
    }

    #[test]
    fn zero_spectrum_is_identity() {
        let g = grid(4);
        let v = GaussianState::vacuum(g);
        let out = apply_sfwm_lumped(&v, &JointSpectrum::flat(g, 0.0).unwrap()).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn flat_spectrum_squeezes_any_sc_mode() {
        let g = grid(8);
        let r = 0.85;
        let out = apply_sfwm_lumped(
            &GaussianState::vacuum(g),
            &JointSpectrum::flat(g, r).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..5 {
            let sc = sc_extend(&random_signal_mode(g, &mut rng), None).unwrap();
            let (_, v) = out
                .mode_quadrature_stats(&ModeSelector::new(sc, 0.0))
                .unwrap();
            assert!((v - 0.5 * (-2.0 * r).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_hand_values() {
        let g = grid(1);
        let flat = JointSpectrum::flat(g, 1.0).unwrap();
        let sc = sc_extend(&TimeFreqMode::delta(g, 0).unwrap(), None).unwrap();
        let v = sc_variance_closed_form(&sc, &flat).unwrap();
        assert!((v - 0.5 * (-2.0f64).exp()).abs() < 1e-12);
        assert!((v - 0.06767).abs() < 5e-6);

        // Two-level spectrum |xi| in {1, 0} with mode weights {0.6, 0.4}.
        let g2 = grid(2);
        let joint = JointSpectrum::new(g2, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let mut a = SpectralAmplitude::zeros(g2);
        let w0 = (0.6f64 / 2.0).sqrt();
        let w1 = (0.4f64 / 2.0).sqrt();
        a.values_mut()[0] = C64::new(w0, 0.0);
        a.values_mut()[2] = C64::new(w0, 0.0);
        a.values_mut()[1] = C64::new(w1, 0.0);
        a.values_mut()[3] = C64::new(w1, 0.0);
        let sc2 = TimeFreqMode::new(a).unwrap();
        let v2 = sc_variance_closed_form(&sc2, &joint).unwrap();
        let expect = 0.5 * (0.6 * (-2.0f64).exp() + 0.4);
        assert!((v2 - expect).abs() < 1e-12);
        assert!((v2 - 0.2406).abs() < 5e-5);
    }

    #[test]
    fn closed_form_rejects_non_sc_modes() {
        let g = grid(2);
        let flat = JointSpectrum::flat(g, 0.5).unwrap();
        let signal_only = TimeFreqMode::delta(g, 0).unwrap();
        assert!(sc_variance_closed_form(&signal_only, &flat).is_err());
    }

    #[test]
    fn closed_form_matches_numeric_propagation() {
        let g = grid(8);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..10 {
            let joint = random_joint(g, &mut rng);
            let sc = sc_extend(&random_signal_mode(g, &mut rng), Some(&joint)).unwrap();
            let out = apply_sfwm_lumped(&GaussianState::vacuum(g), &joint).unwrap();
            let (_, numeric) = out
                .mode_quadrature_stats(&ModeSelector::new(sc.clone(), 0.0))
                .unwrap();
            let closed = sc_variance_closed_form(&sc, &joint).unwrap();
            assert!(
                (numeric - closed).abs() <= 1e-10,
                "numeric {numeric} vs closed {closed}"
            );
        }
    }

    #[test]
    fn pair_order_is_irrelevant() {
        let g = grid(6);
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let joint = random_joint(g, &mut rng);
        let forward = apply_sfwm_lumped(&GaussianState::vacuum(g), &joint).unwrap();
        // Apply the pairs in reverse order by hand.
        let mut reversed = GaussianState::vacuum(g);
        for pair in (0..g.half_bins()).rev() {
            reversed = reversed
                .two_mode_squeeze(
                    (pair, g.conj(pair)),
                    joint.magnitudes()[pair],
                    joint.phases()[pair],
                )
                .unwrap();
        }
        assert_eq!(forward, reversed);
    }

    #[test]
    fn heralded_closed_forms() {
        let p0 = heralded_params(0.0).unwrap();
        assert_eq!(p0.slope, 0.0);
        assert_eq!(p0.r_heralded, 0.0);

        let p = heralded_params(2.5328).unwrap();
        assert!((p.variance_db() - (-18.99)).abs() < 5e-3);
        // Direct squeezing at the same r is 22.00 dB; the gap is 3.01 dB.
        let direct_db = db_from_linear((-2.0 * 2.5328f64).exp());
        assert!((direct_db - (-22.0)).abs() < 5e-3);
        assert!(((p.variance_db() - direct_db) - 3.01).abs() < 5e-3);

        // Large-r limit of the gap.
        let big = heralded_params(12.0).unwrap();
        let gap = big.variance_db() - db_from_linear((-24.0f64).exp());
        assert!((gap - 10.0 * 2.0f64.log10()).abs() < 1e-6);
    }

    #[test]
    fn distributed_lossless_limit_matches_lumped() {
        let g = grid(8);
        let params = FopaParams {
            beta2: -21.7e-27,
            beta4: 0.0,
            gamma_nl: 1.3e-3,
            pump_peak_power: 0.9,
            length: 1500.0,
            loss_per_length: 0.0,
            raman_n: 0.0,
            segments: 1,
        };
        let joint = fopa_joint_spectrum(&params, &g).unwrap();
        let lumped = apply_sfwm_lumped(&GaussianState::vacuum(g), &joint).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(30);
        for segments in [1usize, 64] {
            let p = FopaParams { segments, ..params };
            let dist = apply_sfwm_distributed(&GaussianState::vacuum(g), &p, &g).unwrap();
            for _ in 0..5 {
                let sc = sc_extend(&random_signal_mode(g, &mut rng), Some(&joint)).unwrap();
                let (_, v_l) = lumped
                    .mode_quadrature_stats(&ModeSelector::new(sc.clone(), 0.0))
                    .unwrap();
                let (_, v_d) = dist
                    .mode_quadrature_stats(&ModeSelector::new(sc, 0.0))
                    .unwrap();
                assert!(
                    ((v_d - v_l) / v_l).abs() < 1e-6,
                    "segments {segments}: {v_d} vs {v_l}"
                );
            }
        }
    }

    #[test]
    fn loss_degrades_both_quadratures() {
        let (sq_lossless, anti_lossless) = flat_distributed_levels(2.0, 0.0, 0.0, 64);
        let (sq_lossy, anti_lossy) = flat_distributed_levels(2.0, 0.072, 0.0, 64);
        assert!(sq_lossy > sq_lossless);
        assert!(anti_lossy < anti_lossless);
    }

    #[test]
    fn purity_product_detects_mixing() {
        let (sq, anti) = flat_distributed_levels(1.3, 0.0, 0.0, 32);
        assert!((sq * anti - 1.0).abs() < 1e-9);
        let (sq_l, anti_l) = flat_distributed_levels(1.3, 0.05, 0.0, 32);
        assert!(sq_l * anti_l > 1.0 + 1e-6);
        let (sq_r, anti_r) = flat_distributed_levels(1.3, 0.05, 1.0, 32);
        assert!(sq_r * anti_r > sq_l * anti_l);
    }

    #[test]
    fn flat_reduction_matches_full_machinery() {
        let g = grid(1);
        let r = 1.1;
        let loss_total: f64 = 0.072;
        let raman_n = 0.8;
        let segments = 16;
        let joint = JointSpectrum::flat(g, r).unwrap();
        let mut state = GaussianState::vacuum(g);
        distributed_run_mut(
            &mut state,
            &joint,
            -(1.0 - loss_total).ln(),
            raman_n,
            segments,
        )
        .unwrap();
        let sc = sc_extend(&TimeFreqMode::delta(g, 0).unwrap(), None).unwrap();
        let (_, v_min) = state
            .mode_quadrature_stats(&ModeSelector::new(sc.clone(), 0.0))
            .unwrap();
        let (_, v_max) = state
            .mode_quadrature_stats(&ModeSelector::new(sc, FRAC_PI_2))
            .unwrap();
        let (sq, anti) = flat_distributed_levels(r, loss_total, raman_n, segments);
        assert!((v_min / VACUUM_VARIANCE - sq).abs() < 1e-12);
        assert!((v_max / VACUUM_VARIANCE - anti).abs() < 1e-12);
    }

    #[test]
    fn segment_doubling_converges() {
        for raman in [0.0, 1.5] {
            let (s64, a64) = flat_distributed_levels(2.5, 0.072, raman, 64);
            let (s128, a128) = flat_distributed_levels(2.5, 0.072, raman, 128);
            assert!(((s128 - s64) / s64).abs() < 1e-4, "squeezed side");
            assert!(((a128 - a64) / a64).abs() < 1e-4, "antisqueezed side");
        }
    }

    #[test]
    fn raman_calibration_reproduces_lossless_targets() {
        // With no loss the inner fit alone meets both targets at raman_n = 0.
        let cal = calibrate_raman(22.0, 22.0, 0.0, 32).unwrap();
        assert_eq!(cal.raman_n, 0.0);
        assert!((cal.achieved_squeeze_db - 22.0).abs() < 1e-6);
        assert!((cal.achieved_antisqueeze_db - 22.0).abs() < 1e-6);
    }

    #[test]
    fn raman_calibration_paper_targets_roundtrip() {
        let cal = calibrate_raman(10.3, 22.0, 0.072, 64).unwrap();
        assert!(cal.raman_n > 0.0);
        let (sq, anti) = flat_distributed_levels(cal.flat_xi, 0.072, cal.raman_n, 64);
        assert!((-db_from_linear(sq) - 10.3).abs() < 0.01);
        assert!((db_from_linear(anti) - 22.0).abs() < 1e-6);
    }

    #[test]
    fn squeezing_degrades_monotonically_with_reservoir() {
        let cal = calibrate_raman(10.3, 22.0, 0.072, 64).unwrap();
        let depth = |n: f64| {
            let (sq, _) = flat_distributed_levels(cal.flat_xi, 0.072, n, 64);
            -db_from_linear(sq)
        };
        let d0 = depth(0.0);
        let d1 = depth(cal.raman_n);
        let d2 = depth(2.0 * cal.raman_n);
        assert!(d0 > d1 && d1 > d2);
    }

    #[test]
    fn unreachable_target_reports_calibration_failure() {
        // Asking for better squeezing than the loss-only bound cannot work.
        let err = calibrate_raman(30.0, 22.0, 0.072, 32).unwrap_err();
        assert!(matches!(err, Error::Calibration { .. }));
    }
}


