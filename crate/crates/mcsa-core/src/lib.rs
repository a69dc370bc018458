//! Motor current signature analysis toolkit.
//!
//! Detecting winding faults from the stator line current: a faulted
//! induction motor leaks slip-dependent sideband components into its current
//! spectrum, and their frequencies and amplitudes identify the fault. This
//! crate covers the full desk-scale pipeline around that idea:
//!
//! - [`motor`] — nameplate data, slip arithmetic, and synthesis of
//!   healthy/faulted current waveforms with seeded noise.
//! - [`sideband`] — predicted sideband frequency grids for inter-turn and
//!   broken-rotor-bar faults, and row-by-row scoring against the shipped
//!   harmonic tables.
//! - [`spectrum`] — arbitrary-length windowed DFT and peak amplitude
//!   measurement.
//! - [`features`] — the harmonic tables as verbatim fixtures, and
//!   fixed-length feature vectors for the classifier.
//! - [`ann`] — a small feed-forward softmax classifier with training,
//!   gradient verification, and a text model format.
//! - [`daq`] — behavioral emulation of the acquisition chain down to the
//!   printer-port nibble protocol.
//! - [`io`] — deterministic text file formats for everything above.

pub mod ann;
pub mod daq;
pub mod error;
pub mod features;
pub mod io;
pub mod motor;
pub mod sideband;
pub mod spectrum;

pub use error::{Error, Result};
