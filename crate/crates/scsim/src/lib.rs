//! Simulation toolkit for multimode squeezed-light generation in fiber.
//!
//! Models spontaneous four-wave mixing on a discretized frequency grid as a
//! set of two-mode squeezers over conjugate bin pairs, self-conjugated
//! time-frequency modes and the local oscillators that read them out,
//! balanced homodyne detection with a realistic loss and noise chain, and
//! heralded squeezing through partial homodyne conditioning.
//!
//! The crate is organized around five library modules plus a scenario-driven
//! runner used by the `scsim` binary:
//!
//! - [`spectral`]: frequency grid, mode algebra, and the parametric gain
//!   spectrum of the fiber amplifier;
//! - [`gaussian`]: Gaussian states, symplectic channels, mode-projected
//!   statistics, and homodyne conditioning;
//! - [`sfwm`]: lumped and distributed squeezing propagation plus the
//!   closed-form oracles and calibrations tied to them;
//! - [`lo`]: local-oscillator synthesis from coherent, noise-modulated, and
//!   filtered-ASE seeds;
//! - [`detect`]: the homodyne detection chain, noise budgets, heralding
//!   pipeline, and pump sweeps;
//! - [`scenario`] / [`runner`]: the config file format and the CSV-emitting
//!   execution layer.

pub mod detect;
pub mod error;
pub mod gaussian;
pub mod lo;
pub mod numeric;
pub mod runner;
pub mod scenario;
pub mod sfwm;
pub mod spectral;

pub use error::{Error, Result};
