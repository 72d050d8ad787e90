//! Experiment driver: configuration, parameter sweeps, CSV output and the
//! command line tool.

pub mod cli;
pub mod config;
pub mod csv;
pub mod plot;
pub mod sweep;

use std::fmt;
use std::str::FromStr;

use crate::model::{ChannelSet, Precoder};
use crate::secrecy::{secrecy_rate, Sinr};
use crate::{Error, Result};

pub use config::ExperimentConfig;
pub use csv::{emit_csv, CSV_HEADER};
pub use sweep::{run_sweep, SweepReport, SweepRow};

/// Attack scenario evaluated for every channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// Direct links only.
    NoRis,
    /// The eavesdropper steers the RIS and listens.
    EavesdropOnly,
    /// The eavesdropper steers the RIS, listens and jams.
    EavesdropJam,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::NoRis, Case::EavesdropOnly, Case::EavesdropJam];

    pub fn label(self) -> &'static str {
        match self {
            Case::NoRis => "no_ris",
            Case::EavesdropOnly => "eavesdrop_only",
            Case::EavesdropJam => "eavesdrop_jam",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL.into_iter().find(|c| c.label() == s.trim()).ok_or_else(|| {
            Error::Config(format!(
                "unknown case `{s}` (expected no_ris, eavesdrop_only or eavesdrop_jam)"
            ))
        })
    }
}

/// Secrecy rate with every RIS path removed.
pub fn baseline_no_ris(channels: &ChannelSet, precoder: &Precoder) -> Result<f64> {
    if precoder.w.len() != channels.tx_bob.len() || precoder.w.len() != channels.tx_eve.len() {
        return Err(Error::Dimension("precoder length differs from antenna count".into()));
    }
    let sinr = Sinr {
        bob: channels.tx_bob.dot(&precoder.w).norm_sqr() / channels.noise_bob,
        eve: channels.tx_eve.dot(&precoder.w).norm_sqr() / channels.noise_eve,
    };
    Ok(secrecy_rate(sinr.bob, sinr.eve))
}
