//! Complex spectral amplitudes and time-frequency modes on the grid.

use crate::error::{Error, Result};
use crate::spectral::{FrequencyGrid, JointSpectrum};
use num_complex::Complex64 as C64;

/// Norm tolerance accepted by [`TimeFreqMode::new`].
pub const NORM_TOL: f64 = 1e-12;
/// Default tolerance for the self-conjugation predicate.
pub const SC_TOL: f64 = 1e-10;

/// Complex amplitude per grid bin. Not necessarily normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralAmplitude {
    grid: FrequencyGrid,
    values: Vec<C64>,
}

impl SpectralAmplitude {
    pub fn new(grid: FrequencyGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.num_bins() {
            return Err(Error::invalid(format!(
                "amplitude has {} values but the grid has {} bins",
                values.len(),
                grid.num_bins()
            )));
        }
        Ok(SpectralAmplitude { grid, values })
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        SpectralAmplitude {
            values: vec![C64::new(0.0, 0.0); grid.num_bins()],
            grid,
        }
    }

    /// Unit amplitude concentrated on a single bin.
    pub fn delta(grid: FrequencyGrid, bin: usize) -> Result<Self> {
        if bin >= grid.num_bins() {
            return Err(Error::invalid(format!(
                "bin {bin} out of range for a {}-bin grid",
                grid.num_bins()
            )));
        }
        let mut a = Self::zeros(grid);
        a.values[bin] = C64::new(1.0, 0.0);
        Ok(a)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sum_k conj(self_k) * other_k`.
    pub fn inner(&self, other: &SpectralAmplitude) -> C64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Power (squared magnitude) restricted to the signal branch.
    pub fn signal_power(&self) -> f64 {
        self.values[..self.grid.half_bins()]
            .iter()
            .map(|v| v.norm_sqr())
            .sum()
    }

    /// Power restricted to the idler branch.
    pub fn idler_power(&self) -> f64 {
        self.values[self.grid.half_bins()..]
            .iter()
            .map(|v| v.norm_sqr())
            .sum()
    }

    pub fn scale(&mut self, factor: C64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn normalized(&self) -> Result<SpectralAmplitude> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero amplitude"));
        }
        let mut out = self.clone();
        out.scale(C64::new(1.0 / n, 0.0));
        Ok(out)
    }

    /// Mirror-conjugate amplitude: `out[conj(k)] = conj(self[k])`.
    pub fn conjugate_mirror(&self) -> SpectralAmplitude {
        let mut out = Self::zeros(self.grid);
        for (k, v) in self.values.iter().enumerate() {
            out.values[self.grid.conj(k)] = v.conj();
        }
        out
    }
}

/// Support/symmetry classification of a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeKind {
    SignalOnly,
    IdlerOnly,
    SelfConjugated,
    General,
}

/// Unit-norm spectral amplitude acting as a measurement or seed mode.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeFreqMode {
    amplitude: SpectralAmplitude,
    kind: ModeKind,
}

impl TimeFreqMode {
    /// Wrap an amplitude, requiring unit norm within [`NORM_TOL`].
    /// The kind is classified from the support (self-conjugation is checked
    /// against a flat spectral phase).
    pub fn new(amplitude: SpectralAmplitude) -> Result<Self> {
        if (amplitude.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "mode norm {} deviates from 1 by more than {NORM_TOL}",
                amplitude.norm()
            )));
        }
        let kind = classify(&amplitude);
        Ok(TimeFreqMode { amplitude, kind })
    }

    /// Normalize an arbitrary amplitude into a mode.
    pub fn from_unnormalized(amplitude: &SpectralAmplitude) -> Result<Self> {
        Self::new(amplitude.normalized()?)
    }

    /// Unit mode on a single bin.
    pub fn delta(grid: FrequencyGrid, bin: usize) -> Result<Self> {
        Self::new(SpectralAmplitude::delta(grid, bin)?)
    }

    pub(crate) fn with_kind(amplitude: SpectralAmplitude, kind: ModeKind) -> Self {
        TimeFreqMode { amplitude, kind }
    }

    pub fn amplitude(&self) -> &SpectralAmplitude {
        &self.amplitude
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.amplitude.grid()
    }

    pub fn values(&self) -> &[C64] {
        self.amplitude.values()
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn is_signal_only(&self) -> bool {
        self.amplitude.idler_power() == 0.0
    }

    pub fn is_idler_only(&self) -> bool {
        self.amplitude.signal_power() == 0.0
    }

    /// Self-conjugation predicate: per conjugate pair, equal magnitude and
    /// opposite phase after dividing out the dispersion factor carried from
    /// the joint spectrum (`exp(i*phase/2)` per bin; see [`sc_extend`]).
    pub fn is_self_conjugated(&self, joint: Option<&JointSpectrum>, tol: f64) -> bool {
        let grid = self.grid();
        let vals = self.values();
        for k in 0..grid.half_bins() {
            let ck = grid.conj(k);
            let rot = match joint {
                Some(j) => C64::from_polar(1.0, -0.5 * j.phase_at(k)),
                None => C64::new(1.0, 0.0),
            };
            let a = vals[k] * rot;
            let b = vals[ck] * rot;
            if (a - b.conj()).norm() > tol {
                return false;
            }
        }
        true
    }
}

fn classify(amplitude: &SpectralAmplitude) -> ModeKind {
    if amplitude.idler_power() == 0.0 {
        ModeKind::SignalOnly
    } else if amplitude.signal_power() == 0.0 {
        ModeKind::IdlerOnly
    } else {
        let probe = TimeFreqMode {
            amplitude: amplitude.clone(),
            kind: ModeKind::General,
        };
        if probe.is_self_conjugated(None, SC_TOL) {
            ModeKind::SelfConjugated
        } else {
            ModeKind::General
        }
    }
}

/// Mirror a mode onto the conjugate branch: `out[conj(k)] = conj(in[k])`.
///
/// An involution and an isometry.
pub fn conjugate_mode(mode: &TimeFreqMode) -> TimeFreqMode {
    let amplitude = mode.amplitude.conjugate_mirror();
    let kind = classify(&amplitude);
    TimeFreqMode { amplitude, kind }
}

/// Build the self-conjugated extension of a signal-only mode:
/// `(f + conjugate_mode(f)) / sqrt(2)`, with each bin multiplied by the
/// dispersion factor `exp(i*phase(bin)/2)` when a joint spectrum with
/// nonzero phase is supplied.
///
/// The factor is chosen so that the mode's annihilation operator carries
/// `exp(-i*phase/2)`, which turns the dispersive pair squeezers into a
/// canonical single-mode squeezer on the extension (squeezed at quadrature
/// angle zero).
pub fn sc_extend(signal: &TimeFreqMode, joint: Option<&JointSpectrum>) -> Result<TimeFreqMode> {
    if !signal.is_signal_only() {
        return Err(Error::invalid(
            "sc_extend requires a mode supported only on the signal branch",
        ));
    }
    if let Some(j) = joint {
        if j.grid() != signal.grid() {
            return Err(Error::invalid("joint spectrum grid differs from mode grid"));
        }
    }
    let grid = *signal.grid();
    let mirrored = signal.amplitude.conjugate_mirror();
    let mut values = Vec::with_capacity(grid.num_bins());
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..grid.num_bins() {
        let base = (signal.values()[k] + mirrored.values()[k]) * inv_sqrt2;
        let rot = match joint {
            Some(j) => C64::from_polar(1.0, 0.5 * j.phase_at(k)),
            None => C64::new(1.0, 0.0),
        };
        values.push(base * rot);
    }
    let amplitude = SpectralAmplitude::new(grid, values)?;
    debug_assert!((amplitude.norm() - 1.0).abs() < 1e-9);
    Ok(TimeFreqMode::with_kind(amplitude, ModeKind::SelfConjugated))
}

/// Residual threshold below which a Gram-Schmidt candidate is skipped.
const GS_RESIDUAL_TOL: f64 = 1e-8;

/// Orthonormalize `seeds` and extend with canonical basis vectors (in bin
/// order, restricted to `allowed_bins`), skipping candidates whose residual
/// norm falls below `1e-8`. Deterministic.
fn complete_basis(
    grid: FrequencyGrid,
    seeds: &[SpectralAmplitude],
    allowed_bins: impl Iterator<Item = usize> + Clone,
    count: usize,
) -> Result<Vec<SpectralAmplitude>> {
    let mut basis: Vec<SpectralAmplitude> = Vec::with_capacity(count);
    let push_orthonormalized = |cand: &SpectralAmplitude, basis: &mut Vec<SpectralAmplitude>| {
        let mut v = cand.clone();
        for b in basis.iter() {
            let c = b.inner(&v);
            for (vi, bi) in v.values_mut().iter_mut().zip(b.values()) {
                *vi -= c * bi;
            }
        }
        let n = v.norm();
        if n < GS_RESIDUAL_TOL {
            return false;
        }
        v.scale(C64::new(1.0 / n, 0.0));
        basis.push(v);
        true
    };

    for s in seeds {
        if !push_orthonormalized(s, &mut basis) {
            return Err(Error::invalid(
                "seed modes are numerically linearly dependent",
            ));
        }
        if basis.len() == count {
            return Ok(basis);
        }
    }
    for bin in allowed_bins {
        if basis.len() == count {
            break;
        }
        let cand = SpectralAmplitude::delta(grid, bin)?;
        push_orthonormalized(&cand, &mut basis);
    }
    if basis.len() < count {
        return Err(Error::Internal(format!(
            "basis completion produced {} of {count} requested modes",
            basis.len()
        )));
    }
    Ok(basis)
}

/// Complete `f0` into `count` orthonormal signal-only modes.
///
/// `out[0] == f0`; completion candidates are the signal-branch canonical
/// basis vectors in bin order.
pub fn gram_schmidt_complete(f0: &TimeFreqMode, count: usize) -> Result<Vec<TimeFreqMode>> {
    if !f0.is_signal_only() {
        return Err(Error::invalid(
            "gram_schmidt_complete requires a signal-only starting mode",
        ));
    }
    let grid = *f0.grid();
    if count == 0 || count > grid.half_bins() {
        return Err(Error::invalid(format!(
            "requested {count} modes from a {}-dimensional branch",
            grid.half_bins()
        )));
    }
    let basis = complete_basis(
        grid,
        std::slice::from_ref(&f0.amplitude),
        0..grid.half_bins(),
        count,
    )?;
    let mut out = Vec::with_capacity(count);
    out.push(f0.clone());
    for a in basis.into_iter().skip(1) {
        out.push(TimeFreqMode::with_kind(a, ModeKind::SignalOnly));
    }
    Ok(out)
}

/// Orthonormal complement of a mode within the full bin space
/// (`num_bins - 1` modes, canonical candidates in bin order).
pub(crate) fn orthonormal_complement(mode: &TimeFreqMode) -> Result<Vec<SpectralAmplitude>> {
    let grid = *mode.grid();
    let full = complete_basis(
        grid,
        std::slice::from_ref(&mode.amplitude),
        0..grid.num_bins(),
        grid.num_bins(),
    )?;
    Ok(full.into_iter().skip(1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn grid(half: usize) -> FrequencyGrid {
        FrequencyGrid::new(1.2e15, 2.0e10, half).unwrap()
    }

    fn random_mode(grid: FrequencyGrid, rng: &mut impl Rng, signal_only: bool) -> TimeFreqMode {
        let mut a = SpectralAmplitude::zeros(grid);
        let limit = if signal_only {
            grid.half_bins()
        } else {
            grid.num_bins()
        };
        for k in 0..limit {
            a.values_mut()[k] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        TimeFreqMode::from_unnormalized(&a).unwrap()
    }

    #[test]
    fn conjugate_of_signal_delta_is_idler_delta() {
        let g = grid(4);
        let f = TimeFreqMode::delta(g, 2).unwrap();
        let c = conjugate_mode(&f);
        assert_eq!(c.kind(), ModeKind::IdlerOnly);
        assert_eq!(c.values()[g.conj(2)], C64::new(1.0, 0.0));
    }

    #[test]
    fn conjugate_negates_the_phase() {
        let g = grid(4);
        let mut a = SpectralAmplitude::zeros(g);
        let theta = 0.9_f64;
        a.values_mut()[1] = C64::from_polar(1.0, theta);
        let f = TimeFreqMode::new(a).unwrap();
        let c = conjugate_mode(&f);
        let v = c.values()[g.conj(1)];
        assert!((v - C64::from_polar(1.0, -theta)).norm() < 1e-15);
    }

    #[test]
    fn conjugate_mode_roundtrip_is_exact() {
        let g = grid(32); // 64 bins
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let f = random_mode(g, &mut rng, false);
        let back = conjugate_mode(&conjugate_mode(&f));
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() <= 1e-15);
        }
        assert!((conjugate_mode(&f).amplitude().norm() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn sc_extend_delta_gives_bichromatic_pair() {
        let g = grid(4);
        let f = TimeFreqMode::delta(g, 1).unwrap();
        let sc = sc_extend(&f, None).unwrap();
        assert_eq!(sc.kind(), ModeKind::SelfConjugated);
        let w = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sc.values()[1] - C64::new(w, 0.0)).norm() < 1e-15);
        assert!((sc.values()[g.conj(1)] - C64::new(w, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sc_extend_intensity_is_mirror_symmetric() {
        let g = grid(16);
        // Gaussian envelope over the signal branch with a linear phase.
        let mut a = SpectralAmplitude::zeros(g);
        for k in 0..g.half_bins() {
            let x = (k as f64 - 6.0) / 3.0;
            a.values_mut()[k] = C64::from_polar((-0.5 * x * x).exp(), 0.3 * k as f64);
        }
        let f = TimeFreqMode::from_unnormalized(&a).unwrap();
        let sc = sc_extend(&f, None).unwrap();
        for k in 0..g.half_bins() {
            let ik = g.conj(k);
            assert!((sc.values()[k].norm() - sc.values()[ik].norm()).abs() < 1e-12);
        }
        assert!(sc.is_self_conjugated(None, 1e-12));
    }

    #[test]
    fn sc_extend_with_chirped_phase_passes_predicate_after_removal() {
        let g = grid(8);
        let joint = JointSpectrum::new(
            g,
            vec![0.5; 8],
            (0..8).map(|k| 0.02 * (k * k) as f64).collect(),
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let f = random_mode(g, &mut rng, true);
        let sc = sc_extend(&f, Some(&joint)).unwrap();
        assert!(sc.is_self_conjugated(Some(&joint), 1e-12));
        // Without removing the dispersion factor the raw predicate fails.
        assert!(!sc.is_self_conjugated(None, 1e-6));
    }

    #[test]
    fn sc_extend_rejects_idler_support() {
        let g = grid(4);
        let f = TimeFreqMode::delta(g, g.conj(0)).unwrap();
        assert!(sc_extend(&f, None).is_err());
    }

    #[test]
    fn gram_schmidt_delta_start_yields_deltas() {
        let g = grid(4);
        let f0 = TimeFreqMode::delta(g, 0).unwrap();
        let basis = gram_schmidt_complete(&f0, 3).unwrap();
        assert_eq!(basis.len(), 3);
        for (i, m) in basis.iter().enumerate() {
            assert!((m.values()[i].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_schmidt_full_branch_gram_matrix_is_identity() {
        let g = grid(12);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let f0 = random_mode(g, &mut rng, true);
        let basis = gram_schmidt_complete(&f0, g.half_bins()).unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let dot = a.amplitude().inner(b.amplitude());
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (dot - C64::new(expect, 0.0)).norm() <= 1e-12,
                    "gram[{i}][{j}] = {dot}"
                );
            }
        }
    }

    #[test]
    fn gram_schmidt_single_mode_is_identity_case() {
        let g = grid(6);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let f0 = random_mode(g, &mut rng, true);
        let basis = gram_schmidt_complete(&f0, 1).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], f0);
    }

    #[test]
    fn gram_schmidt_rejects_overfull_request() {
        let g = grid(4);
        let f0 = TimeFreqMode::delta(g, 0).unwrap();
        assert!(gram_schmidt_complete(&f0, 5).is_err());
    }

    #[test]
    fn complement_spans_the_rest() {
        let g = grid(5);
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let f = random_mode(g, &mut rng, false);
        let comp = orthonormal_complement(&f).unwrap();
        assert_eq!(comp.len(), g.num_bins() - 1);
        for c in &comp {
            assert!(f.amplitude().inner(c).norm() < 1e-12);
        }
    }
}
