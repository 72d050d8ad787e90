//! Worst-case secrecy rate of a multi-antenna wiretap link when the
//! eavesdropper controls a reconfigurable intelligent surface (RIS).
//!
//! The crate models the downlink from a multi-antenna transmitter to a
//! single-antenna legitimate receiver, with an eavesdropper that steers the
//! RIS phases to degrade the link, optionally while jamming in full-duplex
//! mode. Two attacks are solved:
//!
//! * [`eavesdrop`]: passive eavesdropping, solved by a Charnes–Cooper
//!   semidefinite relaxation followed by Gaussian randomization.
//! * [`jamming`]: eavesdropping plus jamming, solved by alternating
//!   minimization over surrogate multipliers, the relaxed phase matrix and
//!   the jamming power.
//!
//! [`conic`] holds the interior-point solver both attacks rely on, [`oracle`]
//! provides exhaustive grid search for small validation instances and
//! [`harness`] drives the parameter sweeps and the command line tool.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conic;
pub mod eavesdrop;
pub mod error;
pub mod harness;
pub mod jamming;
pub mod model;
pub mod oracle;
pub mod search;
pub mod secrecy;

pub use error::{Error, Result};

pub use nalgebra::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector. Row channels are stored in this type too.
pub type CVector = nalgebra::DVector<C64>;
