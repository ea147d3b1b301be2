//! Gaussian states over the grid quadratures and their channels.
//!
//! A state is a mean vector and covariance matrix over the `2M` quadratures
//! of an `M`-bin grid, ordered `x_1, p_1, ..., x_M, p_M` with the vacuum
//! convention `Var(x) = Var(p) = 1/2` (`x = (a + a^dag)/sqrt(2)`). All
//! channel operations are pure: they return new states and never mutate
//! shared data, so everything here is safe to drive from multiple threads.

use crate::error::{Error, Result};
use crate::spectral::{orthonormal_complement, FrequencyGrid, SpectralAmplitude, TimeFreqMode};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Vacuum quadrature variance.
pub const VACUUM_VARIANCE: f64 = 0.5;
/// Tolerance on the symplectic eigenvalue test of [`GaussianState::check_physical`].
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// A time-frequency mode together with the homodyne quadrature angle
/// measured on it.
#[derive(Clone, Debug)]
pub struct ModeSelector {
    pub mode: TimeFreqMode,
    pub phase: f64,
}

impl ModeSelector {
    pub fn new(mode: TimeFreqMode, phase: f64) -> Self {
        ModeSelector { mode, phase }
    }
}

/// Phase-space direction of the quadrature `X_theta` of a mode with the
/// given amplitude coefficients: `u[2k] = Re(conj(f_k) e^{-i theta})`,
/// `u[2k+1] = -Im(conj(f_k) e^{-i theta})`. Unit 2-norm for unit-norm modes.
fn quadrature_direction(values: &[C64], theta: f64) -> DVector<f64> {
    let rot = C64::from_polar(1.0, -theta);
    let mut u = DVector::zeros(2 * values.len());
    for (k, f) in values.iter().enumerate() {
        let c = f.conj() * rot;
        u[2 * k] = c.re;
        u[2 * k + 1] = -c.im;
    }
    u
}

/// Mean vector and covariance matrix over the grid quadratures.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    grid: FrequencyGrid,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Vacuum on every bin: zero mean, covariance `I/2`.
    pub fn vacuum(grid: FrequencyGrid) -> Self {
        let dim = 2 * grid.num_bins();
        GaussianState {
            grid,
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Number of quadratures (`2 * bins`).
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check_bin(&self, bin: usize) -> Result<()> {
        if bin >= self.grid.num_bins() {
            return Err(Error::invalid(format!(
                "bin {bin} out of range for a {}-bin grid",
                self.grid.num_bins()
            )));
        }
        Ok(())
    }

    /// Apply `S cov S^T` / `S mean` where `S` is the identity outside the
    /// quadrature indices `idx`, on which it equals `block` (row-major k*k).
    fn apply_block(&mut self, idx: &[usize], block: &[f64]) {
        let k = idx.len();
        debug_assert_eq!(block.len(), k * k);
        let dim = self.dim();
        // Rows.
        let mut rows = vec![0.0; k * dim];
        for i in 0..k {
            for c in 0..dim {
                let mut acc = 0.0;
                for j in 0..k {
                    acc += block[i * k + j] * self.cov[(idx[j], c)];
                }
                rows[i * dim + c] = acc;
            }
        }
        for i in 0..k {
            for c in 0..dim {
                self.cov[(idx[i], c)] = rows[i * dim + c];
            }
        }
        // Columns.
        let mut cols = vec![0.0; k * dim];
        for i in 0..k {
            for r in 0..dim {
                let mut acc = 0.0;
                for j in 0..k {
                    acc += self.cov[(r, idx[j])] * block[i * k + j];
                }
                cols[i * dim + r] = acc;
            }
        }
        for i in 0..k {
            for r in 0..dim {
                self.cov[(r, idx[i])] = cols[i * dim + r];
            }
        }
        // Mean.
        let mut m = vec![0.0; k];
        for i in 0..k {
            let mut acc = 0.0;
            for j in 0..k {
                acc += block[i * k + j] * self.mean[idx[j]];
            }
            m[i] = acc;
        }
        for i in 0..k {
            self.mean[idx[i]] = m[i];
        }
    }

    pub(crate) fn two_mode_squeeze_mut(
        &mut self,
        pair: (usize, usize),
        r: f64,
        phi: f64,
    ) -> Result<()> {
        let (a, b) = pair;
        self.check_bin(a)?;
        self.check_bin(b)?;
        if a == b {
            return Err(Error::invalid(
                "two-mode squeezing needs two distinct bins",
            ));
        }
        if r == 0.0 {
            return Ok(());
        }
        let (ch, sh) = (r.cosh(), r.sinh());
        let (cp, sp) = (phi.cos(), phi.sin());
        let idx = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1];
        #[rustfmt::skip]
        let block = [
            ch,       0.0,      -sh * cp, -sh * sp,
            0.0,      ch,       -sh * sp,  sh * cp,
            -sh * cp, -sh * sp,  ch,       0.0,
            -sh * sp,  sh * cp,  0.0,      ch,
        ];
        self.apply_block(&idx, &block);
        Ok(())
    }

    /// Two-mode squeezer `exp(-(xi a^dag b^dag - h.c.))` with `xi = r e^{i phi}`
    /// on the given bin pair. In the Heisenberg picture
    /// `a -> cosh(r) a - e^{i phi} sinh(r) b^dag`.
    pub fn two_mode_squeeze(&self, pair: (usize, usize), r: f64, phi: f64) -> Result<Self> {
        let mut out = self.clone();
        out.two_mode_squeeze_mut(pair, r, phi)?;
        Ok(out)
    }

    /// Exact fiber-slice channel on one conjugate pair: the simultaneous
    /// action of a two-mode squeezer of total magnitude `r` (phase `phi`) and
    /// a loss of integrated attenuation `alpha_dz` coupling both bins to a
    /// reservoir of `n_thermal` photons, integrated in closed form.
    ///
    /// Drift: `T = exp(-alpha_dz/2) * S(r, phi)`. Injected noise:
    /// `N = alpha R  integral_0^1 e^{-alpha_dz s} e^{2 r K s} ds`
    /// with `K` the squeeze generator (`K^2 = I`), which splits into
    /// `c_I I + c_K K` through `cosh`/`sinh` integrals.
    pub(crate) fn pair_squeeze_loss_mut(
        &mut self,
        pair: (usize, usize),
        r: f64,
        phi: f64,
        alpha_dz: f64,
        n_thermal: f64,
    ) -> Result<()> {
        let (a, b) = pair;
        self.check_bin(a)?;
        self.check_bin(b)?;
        if a == b {
            return Err(Error::invalid("the pair channel needs two distinct bins"));
        }
        if alpha_dz < 0.0 {
            return Err(Error::invalid("integrated attenuation must be non-negative"));
        }
        if n_thermal < 0.0 {
            return Err(Error::invalid("thermal photon number must be non-negative"));
        }
        if alpha_dz == 0.0 {
            return self.two_mode_squeeze_mut(pair, r, phi);
        }
        let (ch, sh) = (r.cosh(), r.sinh());
        let (cp, sp) = (phi.cos(), phi.sin());
        let damp = (-0.5 * alpha_dz).exp();
        let idx = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1];
        #[rustfmt::skip]
        let block = [
            damp * ch,         0.0,               damp * -sh * cp,   damp * -sh * sp,
            0.0,               damp * ch,         damp * -sh * sp,   damp *  sh * cp,
            damp * -sh * cp,   damp * -sh * sp,   damp * ch,         0.0,
            damp * -sh * sp,   damp *  sh * cp,   0.0,               damp * ch,
        ];
        self.apply_block(&idx, &block);

        // (e^c - 1)/c with the unit-interval parametrization absorbed.
        let weight = |c: f64| if c == 0.0 { 1.0 } else { c.exp_m1() / c };
        let reservoir = n_thermal + VACUUM_VARIANCE;
        let e_plus = weight(2.0 * r - alpha_dz);
        let e_minus = weight(-(2.0 * r + alpha_dz));
        let c_i = alpha_dz * reservoir * 0.5 * (e_plus + e_minus);
        let c_k = alpha_dz * reservoir * 0.5 * (e_plus - e_minus);
        for q in idx {
            self.cov[(q, q)] += c_i;
        }
        let (xa, pa, xb, pb) = (idx[0], idx[1], idx[2], idx[3]);
        for (i, j, v) in [
            (xa, xb, -c_k * cp),
            (xa, pb, -c_k * sp),
            (pa, xb, -c_k * sp),
            (pa, pb, c_k * cp),
        ] {
            self.cov[(i, j)] += v;
            self.cov[(j, i)] += v;
        }
        Ok(())
    }

    pub(crate) fn loss_channel_mut(
        &mut self,
        bin: usize,
        transmissivity: f64,
        n_thermal: f64,
    ) -> Result<()> {
        self.check_bin(bin)?;
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::invalid(format!(
                "transmissivity must lie in [0, 1], got {transmissivity}"
            )));
        }
        if n_thermal < 0.0 {
            return Err(Error::invalid("thermal photon number must be non-negative"));
        }
        if transmissivity == 1.0 {
            return Ok(());
        }
        let s = transmissivity.sqrt();
        let idx = [2 * bin, 2 * bin + 1];
        let block = [s, 0.0, 0.0, s];
        self.apply_block(&idx, &block);
        let add = (1.0 - transmissivity) * (n_thermal + VACUUM_VARIANCE);
        self.cov[(idx[0], idx[0])] += add;
        self.cov[(idx[1], idx[1])] += add;
        Ok(())
    }

    /// Mix a bin with a reservoir of mean photon number `n_thermal` through a
    /// beam splitter of the given transmissivity:
    /// `mean -> sqrt(t) mean`, `cov -> t cov + (1-t)(n + 1/2) I` on the bin.
    pub fn loss_channel(&self, bin: usize, transmissivity: f64, n_thermal: f64) -> Result<Self> {
        let mut out = self.clone();
        out.loss_channel_mut(bin, transmissivity, n_thermal)?;
        Ok(out)
    }

    pub(crate) fn phase_shift_mut(&mut self, bin: usize, angle: f64) -> Result<()> {
        self.check_bin(bin)?;
        let (c, s) = (angle.cos(), angle.sin());
        let idx = [2 * bin, 2 * bin + 1];
        let block = [c, s, -s, c];
        self.apply_block(&idx, &block);
        Ok(())
    }

    /// Rotate a bin's quadratures by `angle`.
    pub fn phase_shift(&self, bin: usize, angle: f64) -> Result<Self> {
        let mut out = self.clone();
        out.phase_shift_mut(bin, angle)?;
        Ok(out)
    }

    /// Mean and variance of the quadrature `X_theta` of the selected mode.
    pub fn mode_quadrature_stats(&self, sel: &ModeSelector) -> Result<(f64, f64)> {
        if sel.mode.grid() != &self.grid {
            return Err(Error::invalid("mode grid differs from state grid"));
        }
        let u = quadrature_direction(sel.mode.values(), sel.phase);
        let mean = u.dot(&self.mean);
        let var = (&self.cov * &u).dot(&u);
        Ok((mean, var))
    }

    /// Minimum and maximum of the mode variance over the quadrature angle,
    /// computed from the closed form of the theta dependence.
    pub fn mode_variance_extrema(&self, mode: &TimeFreqMode) -> Result<(f64, f64)> {
        if mode.grid() != &self.grid {
            return Err(Error::invalid("mode grid differs from state grid"));
        }
        let u0 = quadrature_direction(mode.values(), 0.0);
        let u1 = quadrature_direction(mode.values(), std::f64::consts::FRAC_PI_2);
        let v00 = (&self.cov * &u0).dot(&u0);
        let v11 = (&self.cov * &u1).dot(&u1);
        let v01 = (&self.cov * &u1).dot(&u0);
        let mid = 0.5 * (v00 + v11);
        let amp = (0.25 * (v00 - v11) * (v00 - v11) + v01 * v01).sqrt();
        Ok((mid - amp, mid + amp))
    }

    /// Mean photon number in a mode:
    /// `(Var(X) + Var(P) + <X>^2 + <P>^2 - 1) / 2`.
    pub fn marginal_photon_stats(&self, mode: &TimeFreqMode) -> Result<f64> {
        let (mx, vx) = self.mode_quadrature_stats(&ModeSelector::new(mode.clone(), 0.0))?;
        let (mp, vp) =
            self.mode_quadrature_stats(&ModeSelector::new(mode.clone(), std::f64::consts::FRAC_PI_2))?;
        Ok(0.5 * (vx + vp + mx * mx + mp * mp - 1.0))
    }

    /// Smallest eigenvalue of the Hermitian matrix `cov + (i/2) Omega`.
    ///
    /// Computed through the real embedding `[[A, -B], [B, A]]` of `A + iB`,
    /// whose spectrum equals that of the Hermitian matrix (doubled).
    pub fn symplectic_margin(&self) -> f64 {
        let dim = self.dim();
        let mut emb = DMatrix::zeros(2 * dim, 2 * dim);
        emb.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        emb.view_mut((dim, dim), (dim, dim)).copy_from(&self.cov);
        // B = Omega / 2 with Omega block-diagonal [[0, 1], [-1, 0]] per mode.
        for k in 0..self.grid.num_bins() {
            let (x, p) = (2 * k, 2 * k + 1);
            emb[(x, dim + p)] = -0.5;
            emb[(p, dim + x)] = 0.5;
            emb[(dim + x, p)] = 0.5;
            emb[(dim + p, x)] = -0.5;
        }
        emb.symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e))
    }

    /// Physicality test: `cov` symmetric and `cov + (i/2) Omega >= -1e-9`.
    pub fn check_physical(&self) -> bool {
        let dim = self.dim();
        for r in 0..dim {
            for c in (r + 1)..dim {
                if (self.cov[(r, c)] - self.cov[(c, r)]).abs() > 1e-12 {
                    return false;
                }
            }
        }
        self.symplectic_margin() >= -PHYSICALITY_TOL
    }

    /// `|det(2 cov)|`; equals 1 for pure states.
    pub fn purity_det(&self) -> f64 {
        (self.cov.clone() * 2.0).determinant().abs()
    }

    /// Condition on the outcome `gamma` of a homodyne measurement of the
    /// selected mode quadrature and trace the measured mode out.
    ///
    /// The returned state lives on the orthonormal complement of the measured
    /// mode (see [`ConditionedState`]); the conditional covariance does not
    /// depend on `gamma`.
    pub fn homodyne_condition(&self, sel: &ModeSelector, gamma: f64) -> Result<ConditionedState> {
        if sel.mode.grid() != &self.grid {
            return Err(Error::invalid("mode grid differs from state grid"));
        }
        let u = quadrature_direction(sel.mode.values(), sel.phase);
        let sigma2 = (&self.cov * &u).dot(&u);
        if !(sigma2 > 0.0) {
            return Err(Error::Internal(format!(
                "measured quadrature variance {sigma2} is not positive"
            )));
        }
        let cu = &self.cov * &u;
        let innovation = gamma - u.dot(&self.mean);
        let mean_c = &self.mean + &cu * (innovation / sigma2);
        let cov_c = &self.cov - (&cu * cu.transpose()) / sigma2;

        let modes = orthonormal_complement(&sel.mode)?;
        let red_dim = 2 * modes.len();
        let mut projector = DMatrix::zeros(red_dim, self.dim());
        for (j, g) in modes.iter().enumerate() {
            let ux = quadrature_direction(g.values(), 0.0);
            let up = quadrature_direction(g.values(), std::f64::consts::FRAC_PI_2);
            projector.row_mut(2 * j).copy_from(&ux.transpose());
            projector.row_mut(2 * j + 1).copy_from(&up.transpose());
        }
        let mean = &projector * mean_c;
        let cov = &projector * cov_c * projector.transpose();
        let out = ConditionedState { modes, mean, cov };
        if out.symplectic_margin() < -PHYSICALITY_TOL {
            return Err(Error::Internal(format!(
                "conditioning produced an unphysical state (margin {})",
                out.symplectic_margin()
            )));
        }
        Ok(out)
    }
}

/// Gaussian state left after a homodyne measurement consumed one mode.
///
/// Coordinates are the quadratures of the orthonormal complement modes of the
/// measured mode, interleaved `x_1, p_1, ..., x_{M-1}, p_{M-1}` in the order
/// the completion produced them. Statistics of any grid mode orthogonal to
/// the measured mode can still be queried.
#[derive(Clone, Debug)]
pub struct ConditionedState {
    modes: Vec<SpectralAmplitude>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl ConditionedState {
    pub fn modes(&self) -> &[SpectralAmplitude] {
        &self.modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Expansion coefficients of a grid mode in the complement basis.
    /// Errors when the mode leaks onto the measured (consumed) mode.
    fn coefficients(&self, mode: &TimeFreqMode) -> Result<Vec<C64>> {
        let coeffs: Vec<C64> = self
            .modes
            .iter()
            .map(|g| g.inner(mode.amplitude()))
            .collect();
        let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (captured - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "mode overlaps the measured mode (complement captures {captured:.12} of its power)"
            )));
        }
        Ok(coeffs)
    }

    /// Mean and variance of `X_theta` of a grid mode within the complement.
    pub fn mode_quadrature_stats(&self, mode: &TimeFreqMode, theta: f64) -> Result<(f64, f64)> {
        let coeffs = self.coefficients(mode)?;
        let u = quadrature_direction(&coeffs, theta);
        let mean = u.dot(&self.mean);
        let var = (&self.cov * &u).dot(&u);
        Ok((mean, var))
    }

    /// Mean photon number of a grid mode within the complement.
    pub fn marginal_photon_stats(&self, mode: &TimeFreqMode) -> Result<f64> {
        let (mx, vx) = self.mode_quadrature_stats(mode, 0.0)?;
        let (mp, vp) = self.mode_quadrature_stats(mode, std::f64::consts::FRAC_PI_2)?;
        Ok(0.5 * (vx + vp + mx * mx + mp * mp - 1.0))
    }

    fn symplectic_margin(&self) -> f64 {
        let dim = self.mean.len();
        let mut emb = DMatrix::zeros(2 * dim, 2 * dim);
        emb.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        emb.view_mut((dim, dim), (dim, dim)).copy_from(&self.cov);
        for k in 0..self.modes.len() {
            let (x, p) = (2 * k, 2 * k + 1);
            emb[(x, dim + p)] = -0.5;
            emb[(p, dim + x)] = 0.5;
            emb[(dim + x, p)] = 0.5;
            emb[(dim + p, x)] = -0.5;
        }
        emb.symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e))
    }
}
