//! Scenario execution: drive the simulation modules from a parsed
//! [`Scenario`] and write the CSV table plus a human-readable summary.
//!
//! Output is deterministic: a scenario re-run with the same seed produces
//! byte-identical files. Every CSV column name carries its unit; dB columns
//! are relative to true shot noise (negative below shot noise).

use crate::detect::{
    apply_chain_loss, bhd_extrema, herald_pipeline, rebudget_level, sweep_pump, DetectionChain,
    MeasuredLevel,
};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeSelector, VACUUM_VARIANCE};
use crate::lo::{balance, fwm_output, lo_excess_rin, synth_seed, LoRealization, SeedKind, SeedModel};
use crate::numeric::{db_from_linear, linear_from_db};
use crate::scenario::{
    Directive, ModelKind, Scenario, SeedKindKey, SpectrumKind,
};
use crate::sfwm::{
    apply_sfwm_distributed_spectrum, apply_sfwm_lumped, calibrate_raman, sc_variance_closed_form,
};
use crate::spectral::{
    calibrate_peak_detuning, fopa_joint_spectrum, sc_extend, FopaParams, FrequencyGrid,
    JointSpectrum, TimeFreqMode,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Shipped scenario files, embedded for `list-scenarios` and for running by
/// name when no matching path exists.
pub const SHIPPED_SCENARIOS: &[(&str, &str)] = &[
    ("fig1d", include_str!("../../../scenarios/fig1d.scenario")),
    ("fig3c", include_str!("../../../scenarios/fig3c.scenario")),
    (
        "herald_flat",
        include_str!("../../../scenarios/herald_flat.scenario"),
    ),
    (
        "budget_noisemod",
        include_str!("../../../scenarios/budget_noisemod.scenario"),
    ),
    (
        "calibrate_raman",
        include_str!("../../../scenarios/calibrate_raman.scenario"),
    ),
    (
        "calibrate_detuning",
        include_str!("../../../scenarios/calibrate_detuning.scenario"),
    ),
    (
        "laser_bichromatic",
        include_str!("../../../scenarios/laser_bichromatic.scenario"),
    ),
    (
        "ase_ensemble",
        include_str!("../../../scenarios/ase_ensemble.scenario"),
    ),
    ("modfreq", include_str!("../../../scenarios/modfreq.scenario")),
];

/// Paths written by a run plus the summary text (also printed by the CLI).
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: String,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn fnum(v: f64) -> String {
    format!("{v}")
}

fn grid_of(sc: &Scenario) -> Result<FrequencyGrid> {
    FrequencyGrid::new(
        TAU * sc.grid.center_hz,
        TAU * sc.grid.spacing_hz,
        sc.grid.half_bins,
    )
}

fn fopa_of(sc: &Scenario) -> FopaParams {
    let loss_per_length = if sc.fopa.loss_total > 0.0 {
        -(1.0 - sc.fopa.loss_total).ln() / sc.fopa.length_m
    } else {
        0.0
    };
    FopaParams {
        beta2: sc.fopa.beta2_s2_per_m,
        beta4: sc.fopa.beta4_s4_per_m,
        gamma_nl: sc.fopa.gamma_per_w_m,
        pump_peak_power: sc.fopa.pump_peak_power_w,
        length: sc.fopa.length_m,
        loss_per_length,
        raman_n: sc.fopa.raman_n,
        segments: sc.fopa.segments,
    }
}

fn joint_of(sc: &Scenario, grid: &FrequencyGrid) -> Result<JointSpectrum> {
    match sc.model.spectrum {
        SpectrumKind::Fopa => fopa_joint_spectrum(&fopa_of(sc), grid),
        SpectrumKind::Flat => JointSpectrum::flat(*grid, sc.model.flat_xi),
    }
}

fn state_of(sc: &Scenario, grid: &FrequencyGrid, joint: &JointSpectrum) -> Result<GaussianState> {
    let vacuum = GaussianState::vacuum(*grid);
    match sc.model.kind {
        ModelKind::Lumped => apply_sfwm_lumped(&vacuum, joint),
        ModelKind::Distributed => {
            let params = fopa_of(sc);
            apply_sfwm_distributed_spectrum(
                &vacuum,
                joint,
                params.loss_per_length * params.length,
                params.raman_n,
                params.segments,
            )
        }
    }
}

fn seed_model_of(sc: &Scenario, grid: &FrequencyGrid) -> SeedModel {
    let center = if sc.seed.center_detuning_hz > 0.0 {
        TAU * sc.seed.center_detuning_hz
    } else {
        // Default: middle of the signal branch.
        grid.spacing() * ((grid.half_bins() / 2).max(1)) as f64
    };
    match sc.seed.kind {
        SeedKindKey::Coherent => SeedModel::Coherent {
            center_detuning: center,
        },
        SeedKindKey::NoiseModulated => SeedModel::NoiseModulated {
            center_detuning: center,
            coherence_control_rate: sc.seed.coherence_control_rate_hz,
            random_pm_bandwidth: sc.seed.random_pm_bandwidth_hz,
            sine_pm_freq: sc.seed.sine_pm_freq_hz,
            ou_depth: sc.seed.ou_depth_rad,
            sine_depth: sc.seed.sine_depth_rad,
            dither_depth: sc.seed.dither_depth_rad,
        },
        SeedKindKey::FilteredAse => SeedModel::FilteredAse {
            center_detuning: center,
            bandwidth: TAU * sc.seed.ase_bandwidth_hz,
        },
    }
}

fn chain_of(sc: &Scenario) -> Result<DetectionChain> {
    let chain = DetectionChain {
        efficiencies: sc.chain.efficiencies.clone(),
        dark_rel: linear_from_db(sc.chain.dark_db),
        rin_excess: lo_excess_rin(sc.lo.excess_rin_db)?,
        cmrr_db: sc.chain.cmrr_db,
    };
    chain.validate()?;
    Ok(chain)
}

fn lo_of(sc: &Scenario, seed: &TimeFreqMode) -> Result<LoRealization> {
    let kind = match sc.seed.kind {
        SeedKindKey::Coherent => SeedKind::Coherent,
        SeedKindKey::NoiseModulated => SeedKind::NoiseModulated,
        SeedKindKey::FilteredAse => SeedKind::FilteredAse,
    };
    let mut lo = balance(&fwm_output(seed, sc.lo.gain, kind)?, sc.lo.gain)?;
    lo.excess_rin = lo_excess_rin(sc.lo.excess_rin_db)?;
    Ok(lo)
}

fn level_cells(sample: usize, level: &MeasuredLevel) -> Vec<String> {
    vec![
        sample.to_string(),
        fnum(level.squeezed_db()),
        fnum(level.antisqueezed_db()),
        fnum(db_from_linear(level.apparent_shot_rel_true_shot)),
        fnum(db_from_linear(level.dark_rel_true_shot)),
    ]
}

/// The chain's electronic terms alone; used after the optical loss has been
/// applied to the state once per run.
fn electronic_chain(chain: &DetectionChain) -> DetectionChain {
    DetectionChain {
        efficiencies: Vec::new(),
        ..chain.clone()
    }
}

fn run_single(sc: &Scenario) -> Result<(Table, String)> {
    let grid = grid_of(sc)?;
    let joint = joint_of(sc, &grid)?;
    let state = state_of(sc, &grid, &joint)?;
    let chain = chain_of(sc)?;
    let detected = apply_chain_loss(&state, &chain)?;
    let electronic = electronic_chain(&chain);
    let seeds = synth_seed(&seed_model_of(sc, &grid), &grid, sc.run.seed_samples, sc.run.rng_seed)?;
    let mut table = Table::new(&[
        "seed_sample",
        "squeezed_db_re_true_shot",
        "antisqueezed_db_re_true_shot",
        "apparent_shot_db_re_true_shot",
        "dark_db_re_true_shot",
    ]);
    let mut sq_sum = 0.0;
    let mut sq_best = f64::INFINITY;
    let mut sq_worst = f64::NEG_INFINITY;
    let mut anti_sum = 0.0;
    for (i, seed) in seeds.iter().enumerate() {
        let lo = lo_of(sc, seed)?;
        let level = bhd_extrema(&detected, &lo, &electronic)?;
        sq_sum += level.squeezed_rel_true_shot;
        anti_sum += level.antisqueezed_rel_true_shot;
        sq_best = sq_best.min(level.squeezed_db());
        sq_worst = sq_worst.max(level.squeezed_db());
        table.push(level_cells(i, &level));
    }
    let n = seeds.len() as f64;
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = single");
    let _ = writeln!(summary, "seed_samples = {}", seeds.len());
    let _ = writeln!(
        summary,
        "ensemble_mean_squeezed_db_re_true_shot = {}",
        fnum(db_from_linear(sq_sum / n))
    );
    let _ = writeln!(
        summary,
        "ensemble_mean_antisqueezed_db_re_true_shot = {}",
        fnum(db_from_linear(anti_sum / n))
    );
    let _ = writeln!(summary, "best_squeezed_db_re_true_shot = {}", fnum(sq_best));
    let _ = writeln!(summary, "worst_squeezed_db_re_true_shot = {}", fnum(sq_worst));
    Ok((table, summary))
}

fn run_pump_sweep(sc: &Scenario) -> Result<(Table, String)> {
    let grid = grid_of(sc)?;
    let chain = chain_of(sc)?;
    let params = fopa_of(sc);
    let seeds = synth_seed(&seed_model_of(sc, &grid), &grid, 1, sc.run.rng_seed)?;
    let lo = lo_of(sc, &seeds[0])?;
    let rows = sweep_pump(&sc.run.pump_powers_w, &params, &chain, &lo)?;
    let mut table = Table::new(&[
        "pump_peak_power_w",
        "squeezed_db_re_true_shot",
        "antisqueezed_db_re_true_shot",
    ]);
    let mut best = rows[0];
    for row in &rows {
        if row.squeezed_db < best.squeezed_db {
            best = *row;
        }
        table.push(vec![
            fnum(row.pump_peak_power),
            fnum(row.squeezed_db),
            fnum(row.antisqueezed_db),
        ]);
    }
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = pump-sweep");
    let _ = writeln!(summary, "points = {}", rows.len());
    let _ = writeln!(summary, "best_squeezed_db_re_true_shot = {}", fnum(best.squeezed_db));
    let _ = writeln!(summary, "best_squeezed_pump_w = {}", fnum(best.pump_peak_power));
    let _ = writeln!(
        summary,
        "antisqueezed_db_at_best_pump = {}",
        fnum(best.antisqueezed_db)
    );
    Ok((table, summary))
}

fn run_mod_freq_sweep(sc: &Scenario) -> Result<(Table, String)> {
    let grid = grid_of(sc)?;
    let joint = joint_of(sc, &grid)?;
    let state = state_of(sc, &grid, &joint)?;
    let chain = chain_of(sc)?;
    let detected = apply_chain_loss(&state, &chain)?;
    let electronic = electronic_chain(&chain);
    let mut table = Table::new(&[
        "mod_freq_hz",
        "mean_squeezed_db_re_true_shot",
        "min_squeezed_db_re_true_shot",
        "max_squeezed_db_re_true_shot",
        "mean_antisqueezed_db_re_true_shot",
    ]);
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = mod-freq-sweep");
    for &freq in &sc.run.mod_freqs_hz {
        let mut sc_f = sc.clone();
        sc_f.seed.sine_pm_freq_hz = freq;
        let model = seed_model_of(&sc_f, &grid);
        let seeds = synth_seed(&model, &grid, sc.run.seed_samples, sc.run.rng_seed)?;
        let mut sq_sum = 0.0;
        let mut anti_sum = 0.0;
        let mut sq_min = f64::INFINITY;
        let mut sq_max = f64::NEG_INFINITY;
        for seed in &seeds {
            let lo = lo_of(sc, seed)?;
            let level = bhd_extrema(&detected, &lo, &electronic)?;
            sq_sum += level.squeezed_rel_true_shot;
            anti_sum += level.antisqueezed_rel_true_shot;
            sq_min = sq_min.min(level.squeezed_db());
            sq_max = sq_max.max(level.squeezed_db());
        }
        let n = seeds.len() as f64;
        table.push(vec![
            fnum(freq),
            fnum(db_from_linear(sq_sum / n)),
            fnum(sq_min),
            fnum(sq_max),
            fnum(db_from_linear(anti_sum / n)),
        ]);
    }
    let _ = writeln!(summary, "frequencies = {}", sc.run.mod_freqs_hz.len());
    let _ = writeln!(summary, "seed_samples_per_frequency = {}", sc.run.seed_samples);
    Ok((table, summary))
}

fn run_herald(sc: &Scenario) -> Result<(Table, String)> {
    let grid = grid_of(sc)?;
    let joint = joint_of(sc, &grid)?;
    let state = state_of(sc, &grid, &joint)?;
    let model = seed_model_of(sc, &grid);
    let center_detuning = match &model {
        SeedModel::Coherent { center_detuning }
        | SeedModel::NoiseModulated {
            center_detuning, ..
        }
        | SeedModel::FilteredAse {
            center_detuning, ..
        } => *center_detuning,
    };
    let signal_bin = grid.signal_bin_at(center_detuning)?;
    let signal = TimeFreqMode::delta(grid, signal_bin)?;
    let idler = TimeFreqMode::delta(grid, grid.conj(signal_bin))?;

    // Heralding outcomes drawn from the marginal of the measured quadrature.
    let (_, sigma2) = state.mode_quadrature_stats(&ModeSelector::new(idler.clone(), 0.0))?;
    let normal = Normal::new(0.0, sigma2.sqrt())
        .map_err(|e| Error::Internal(format!("bad marginal width: {e}")))?;
    let mut rng = ChaCha12Rng::seed_from_u64(sc.run.rng_seed);
    let gammas: Vec<f64> = (0..sc.run.gamma_samples)
        .map(|_| normal.sample(&mut rng))
        .collect();

    let report = herald_pipeline(&state, &idler, &signal, &gammas, sc.run.herald_efficiency)?;
    let sc_mode = sc_extend(&signal, Some(&joint))?;
    let direct_variance = sc_variance_closed_form(&sc_mode, &joint).or_else(|_| {
        state
            .mode_quadrature_stats(&ModeSelector::new(sc_mode.clone(), 0.0))
            .map(|(_, v)| v)
    })?;
    let direct_db = db_from_linear(direct_variance / VACUUM_VARIANCE);
    let heralded_db = db_from_linear(report.variance / VACUUM_VARIANCE);

    let mut table = Table::new(&["sample_index", "gamma", "heralded_mean_x"]);
    for (i, g) in gammas.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            fnum(*g),
            fnum(report.mean_intercept + report.slope * g),
        ]);
    }
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = herald");
    let _ = writeln!(summary, "signal_bin_detuning_hz = {}", fnum(grid.detuning(signal_bin) / TAU));
    let _ = writeln!(summary, "conditional_mean_slope = {}", fnum(report.slope));
    let _ = writeln!(summary, "heralded_variance_vacuum_units = {}", fnum(report.variance));
    let _ = writeln!(summary, "heralded_db_re_true_shot = {}", fnum(heralded_db));
    let _ = writeln!(summary, "direct_sc_db_re_true_shot = {}", fnum(direct_db));
    let _ = writeln!(summary, "herald_gap_db = {}", fnum(heralded_db - direct_db));
    let _ = writeln!(
        summary,
        "thermal_mean_photons = {}",
        fnum(report.thermal_mean_photons)
    );
    let _ = writeln!(
        summary,
        "thermal_std_error = {}",
        fnum(report.thermal_std_error)
    );
    let _ = writeln!(summary, "gamma_samples = {}", report.n_samples);
    Ok((table, summary))
}

fn run_calibrate_raman(sc: &Scenario) -> Result<(Table, String)> {
    let cal = calibrate_raman(
        sc.run.target_squeeze_db,
        sc.run.target_antisqueeze_db,
        sc.fopa.loss_total,
        sc.fopa.segments,
    )?;
    let mut table = Table::new(&[
        "raman_n",
        "flat_xi",
        "achieved_squeezed_db_re_true_shot",
        "achieved_antisqueezed_db_re_true_shot",
    ]);
    table.push(vec![
        fnum(cal.raman_n),
        fnum(cal.flat_xi),
        fnum(-cal.achieved_squeeze_db),
        fnum(cal.achieved_antisqueeze_db),
    ]);
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = calibrate-raman");
    let _ = writeln!(summary, "raman_n = {}", fnum(cal.raman_n));
    let _ = writeln!(summary, "flat_xi = {}", fnum(cal.flat_xi));
    let _ = writeln!(summary, "achieved_squeeze_depth_db = {}", fnum(cal.achieved_squeeze_db));
    let _ = writeln!(
        summary,
        "achieved_antisqueeze_db = {}",
        fnum(cal.achieved_antisqueeze_db)
    );
    Ok((table, summary))
}

fn run_calibrate_detuning(sc: &Scenario) -> Result<(Table, String)> {
    let grid = grid_of(sc)?;
    let target = TAU * sc.run.target_peak_detuning_hz;
    let mut params = fopa_of(sc);
    let pump = calibrate_peak_detuning(target, &params)?;
    params.pump_peak_power = pump;
    let joint = fopa_joint_spectrum(&params, &grid)?;
    let peak = joint.peak_pair();
    let mut table = Table::new(&[
        "target_detuning_hz",
        "pump_peak_power_w",
        "peak_detuning_hz",
        "peak_xi_magnitude",
    ]);
    table.push(vec![
        fnum(sc.run.target_peak_detuning_hz),
        fnum(pump),
        fnum(grid.detuning(peak) / TAU),
        fnum(joint.magnitudes()[peak]),
    ]);
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = calibrate-detuning");
    let _ = writeln!(summary, "pump_peak_power_w = {}", fnum(pump));
    let _ = writeln!(summary, "peak_detuning_hz = {}", fnum(grid.detuning(peak) / TAU));
    let _ = writeln!(
        summary,
        "peak_offset_bins = {}",
        fnum((grid.detuning(peak) - target) / grid.spacing())
    );
    Ok((table, summary))
}

fn run_phase_match_spectrum(sc: &Scenario) -> Result<(Table, String)> {
    let grid = grid_of(sc)?;
    let joint = joint_of(sc, &grid)?;
    let mut table = Table::new(&[
        "detuning_hz",
        "xi_magnitude",
        "xi_phase_rad",
        "sc_squeezed_db_re_true_shot",
        "heralded_db_re_true_shot",
    ]);
    for pair in 0..grid.half_bins() {
        let xi = joint.magnitudes()[pair];
        // Per-pair closed forms: direct SC level exp(-2 xi), heralded level
        // 1/cosh(2 xi).
        let sc_db = db_from_linear((-2.0 * xi).exp());
        let heralded_db = db_from_linear(1.0 / (2.0 * xi).cosh());
        table.push(vec![
            fnum(grid.detuning(pair) / TAU),
            fnum(xi),
            fnum(joint.phases()[pair]),
            fnum(sc_db),
            fnum(heralded_db),
        ]);
    }
    let peak = joint.peak_pair();
    let xi_peak = joint.magnitudes()[peak];
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = phase-match-spectrum");
    let _ = writeln!(summary, "pairs = {}", grid.half_bins());
    let _ = writeln!(summary, "peak_detuning_hz = {}", fnum(grid.detuning(peak) / TAU));
    let _ = writeln!(summary, "peak_xi_magnitude = {}", fnum(xi_peak));
    let _ = writeln!(
        summary,
        "peak_sc_squeezed_db_re_true_shot = {}",
        fnum(db_from_linear((-2.0 * xi_peak).exp()))
    );
    let _ = writeln!(
        summary,
        "peak_heralded_db_re_true_shot = {}",
        fnum(db_from_linear(1.0 / (2.0 * xi_peak).cosh()))
    );
    Ok((table, summary))
}

fn run_noise_budget(sc: &Scenario) -> Result<(Table, String)> {
    let added_rin = lo_excess_rin(sc.run.added_rin_db)?;
    let predicted = rebudget_level(
        linear_from_db(sc.run.baseline_db),
        linear_from_db(sc.run.baseline_dark_db),
        linear_from_db(sc.run.new_dark_db),
        added_rin,
    );
    let mut table = Table::new(&[
        "baseline_db_re_true_shot",
        "baseline_dark_db_re_true_shot",
        "new_dark_db_re_true_shot",
        "added_rin_db",
        "predicted_db_re_true_shot",
    ]);
    table.push(vec![
        fnum(sc.run.baseline_db),
        fnum(sc.run.baseline_dark_db),
        fnum(sc.run.new_dark_db),
        fnum(sc.run.added_rin_db),
        fnum(db_from_linear(predicted)),
    ]);
    let mut summary = String::new();
    let _ = writeln!(summary, "directive = noise-budget");
    let _ = writeln!(summary, "predicted_level_rel_true_shot = {}", fnum(predicted));
    let _ = writeln!(
        summary,
        "predicted_db_re_true_shot = {}",
        fnum(db_from_linear(predicted))
    );
    Ok((table, summary))
}

/// Execute a validated scenario, writing `<out>/<stem>.csv` and
/// `<out>/<stem>_summary.txt`.
pub fn run_scenario(sc: &Scenario, out_dir: &Path) -> Result<RunArtifacts> {
    let (table, mut summary) = match sc.run.directive {
        Directive::Single => run_single(sc),
        Directive::PumpSweep => run_pump_sweep(sc),
        Directive::ModFreqSweep => run_mod_freq_sweep(sc),
        Directive::Herald => run_herald(sc),
        Directive::CalibrateRaman => run_calibrate_raman(sc),
        Directive::CalibrateDetuning => run_calibrate_detuning(sc),
        Directive::PhaseMatchSpectrum => run_phase_match_spectrum(sc),
        Directive::NoiseBudget => run_noise_budget(sc),
    }?;
    let _ = writeln!(summary, "rng_seed = {}", sc.run.rng_seed);

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Internal(format!("cannot create output directory: {e}")))?;
    let csv_path = out_dir.join(format!("{}.csv", sc.run.output));
    let summary_path = out_dir.join(format!("{}_summary.txt", sc.run.output));
    std::fs::write(&csv_path, table.to_csv())
        .map_err(|e| Error::Internal(format!("cannot write {}: {e}", csv_path.display())))?;
    std::fs::write(&summary_path, &summary)
        .map_err(|e| Error::Internal(format!("cannot write {}: {e}", summary_path.display())))?;
    Ok(RunArtifacts {
        csv_path,
        summary_path,
        summary,
    })
}
