//! Secrecy-rate maximization for RIS-assisted MIMO wiretap links with lossy
//! reflecting elements.
//!
//! The crate is organised bottom-up:
//!
//! - [`ris`] and [`circuit`]: the reflection physics of a resistive RIS element,
//!   the fitted amplitude/phase law and the bounded-angle projection.
//! - [`channel`]: geometry, path loss, seeded Rayleigh channel draws and the
//!   effective end-to-end channels.
//! - [`secrecy`]: rates, the secrecy objective, the channel power difference and
//!   their analytic gradients.
//! - [`pgm`]: joint projected-gradient ascent over precoder and phases with
//!   step-size initialization and backtracking.
//! - [`cpdm`]: the channel-power-difference surrogate, its eigen precoder, the
//!   phase ascent and the upper-bound checker.
//! - [`oracle`]: finite differences, extended-precision determinants and grid
//!   search used to certify everything above.

pub mod channel;
pub mod circuit;
pub mod cpdm;
mod ascent;
mod error;
pub mod linalg;
pub mod oracle;
pub mod pgm;
pub mod ris;
pub mod rng;
pub mod secrecy;
pub mod serde_cmat;

pub use error::{Error, Result};

pub use channel::{ChannelSet, Geometry, PathLossModel, SystemConfig};
pub use circuit::CircuitParams;
pub use cpdm::{CpdmOptions, CpdmReport, PowerSplit};
pub use pgm::{PgmOptions, SolveReport, StepRule, Termination};
pub use ris::{RisParams, RisState};
pub use secrecy::{Precoder, RateBundle};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
