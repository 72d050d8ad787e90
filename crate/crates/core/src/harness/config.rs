//! Experiment configuration.
//!
//! Configurations are TOML files, usually written with dotted keys:
//!
//! ```toml
//! params.M = 8
//! params.noise_b_dbw = -120
//! sweep.variable = "N"
//! sweep.values = [20, 30, 40, 50, 60]
//! seeds = 20
//! cases = ["no_ris", "eavesdrop_only", "eavesdrop_jam"]
//! ```
//!
//! Every key is optional and defaults to the reference scenario. Keys ending
//! in `_db` or `_dbw` are decibel values and are converted to linear units
//! once, when the file is loaded. `seeds` is either a count (seeds `0..count`)
//! or an explicit list.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::conic::SolverOptions;
use crate::eavesdrop::EavesdropOptions;
use crate::jamming::{JammingOptions, JammingStart};
use crate::model::{db_to_linear, Geometry, PathLossExponents, SystemParams};
use crate::{Error, Result};

use super::Case;

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawGeometry {
    tx: [f64; 3],
    bob: [f64; 3],
    eve: [f64; 3],
    ris_x: f64,
    ris_y: f64,
    ris_z: f64,
}

impl Default for RawGeometry {
    fn default() -> Self {
        let g = Geometry::reference(-10.0);
        RawGeometry {
            tx: g.tx,
            bob: g.bob,
            eve: g.eve,
            ris_x: g.ris[0],
            ris_y: g.ris[1],
            ris_z: g.ris[2],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawParams {
    M: usize,
    N: usize,
    tx_power_w: f64,
    jam_power_max_w: f64,
    noise_b_dbw: f64,
    noise_e_dbw: f64,
    /// Suppression of the eavesdropper's own jamming, in dB.
    self_interference_db: f64,
    l0_db: f64,
    beta_ab: f64,
    beta_ae: f64,
    beta_ai: f64,
    beta_ib: f64,
    beta_ie: f64,
    beta_ei: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        let e = PathLossExponents::default();
        RawParams {
            M: 8,
            N: 60,
            tx_power_w: 5.0,
            jam_power_max_w: 5.0,
            noise_b_dbw: -120.0,
            noise_e_dbw: -120.0,
            self_interference_db: 120.0,
            l0_db: -30.0,
            beta_ab: e.tx_bob,
            beta_ae: e.tx_eve,
            beta_ai: e.tx_ris,
            beta_ib: e.ris_bob,
            beta_ie: e.ris_eve,
            beta_ei: e.eve_ris,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSweep {
    variable: String,
    values: Vec<f64>,
}

impl Default for RawSweep {
    fn default() -> Self {
        RawSweep {
            variable: "N".into(),
            values: SweepVariable::Elements.default_values(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSolver {
    randomizations: usize,
    rank_one_tol: f64,
    max_iters: usize,
    tol: f64,
    gap_tol: f64,
    feas_tol: f64,
    conic_max_iters: usize,
}

impl Default for RawSolver {
    fn default() -> Self {
        let j = JammingOptions::default();
        let s = SolverOptions::default();
        RawSolver {
            randomizations: j.randomizations,
            rank_one_tol: j.rank_one_tol,
            max_iters: j.max_iters,
            tol: j.tol,
            gap_tol: s.gap_tol,
            feas_tol: s.feas_tol,
            conic_max_iters: s.max_iters,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSeeds {
    Count(u64),
    List(Vec<u64>),
}

impl Default for RawSeeds {
    fn default() -> Self {
        RawSeeds::Count(20)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    geometry: RawGeometry,
    params: RawParams,
    sweep: RawSweep,
    seeds: RawSeeds,
    cases: Option<Vec<String>>,
    solver: RawSolver,
    output: Option<PathBuf>,
}

/// Quantity varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Number of RIS elements.
    Elements,
    /// `y` coordinate of the RIS center, meters.
    RisY,
}

impl SweepVariable {
    pub fn label(self) -> &'static str {
        match self {
            SweepVariable::Elements => "N",
            SweepVariable::RisY => "y",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "N" => Ok(SweepVariable::Elements),
            "y" => Ok(SweepVariable::RisY),
            other => Err(Error::Config(format!(
                "sweep.variable must be \"N\" or \"y\", got `{other}`"
            ))),
        }
    }

    /// Sweep points of the reference experiments.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVariable::Elements => vec![20.0, 30.0, 40.0, 50.0, 60.0],
            SweepVariable::RisY => vec![-20.0, -10.0, 0.0, 10.0, 20.0],
        }
    }
}

/// Validated experiment description in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Geometry; the RIS `y` coordinate is replaced in `y` sweeps.
    pub geometry: Geometry,
    /// System parameters; the element count is replaced in `N` sweeps.
    pub params: SystemParams,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub cases: Vec<Case>,
    pub randomizations: usize,
    pub rank_one_tol: f64,
    /// Iteration cap of the alternating minimization.
    pub max_iters: usize,
    /// Convergence threshold of the alternating minimization.
    pub tol: f64,
    pub solver: SolverOptions,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::from_raw(RawConfig::default()).expect("reference configuration is valid")
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let p = &raw.params;
        let params = SystemParams {
            antennas: p.M,
            elements: p.N,
            tx_power: p.tx_power_w,
            jam_power_max: p.jam_power_max_w,
            noise_bob: db_to_linear(p.noise_b_dbw),
            noise_eve: db_to_linear(p.noise_e_dbw),
            self_interference: db_to_linear(-p.self_interference_db),
            ref_gain: db_to_linear(p.l0_db),
            exponents: PathLossExponents {
                tx_bob: p.beta_ab,
                tx_eve: p.beta_ae,
                tx_ris: p.beta_ai,
                ris_bob: p.beta_ib,
                ris_eve: p.beta_ie,
                eve_ris: p.beta_ei,
            },
        };
        params.validate().map_err(|e| Error::Config(format!("params: {e}")))?;
        let g = &raw.geometry;
        let geometry = Geometry {
            tx: g.tx,
            bob: g.bob,
            eve: g.eve,
            ris: [g.ris_x, g.ris_y, g.ris_z],
        };
        let seeds = match raw.seeds {
            RawSeeds::Count(n) => (0..n).collect(),
            RawSeeds::List(list) => list,
        };
        let cases = match raw.cases {
            None => Case::ALL.to_vec(),
            Some(list) => list.iter().map(|s| s.parse()).collect::<Result<Vec<Case>>>()?,
        };
        let s = &raw.solver;
        let config = ExperimentConfig {
            geometry,
            params,
            variable: SweepVariable::parse(&raw.sweep.variable)?,
            values: raw.sweep.values,
            seeds,
            cases,
            randomizations: s.randomizations,
            rank_one_tol: s.rank_one_tol,
            max_iters: s.max_iters,
            tol: s.tol,
            solver: SolverOptions {
                gap_tol: s.gap_tol,
                feas_tol: s.feas_tol,
                max_iters: s.conic_max_iters,
            },
            output: raw.output,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep.values is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds".into()));
        }
        if self.cases.is_empty() {
            return Err(Error::Config("no cases".into()));
        }
        if self.randomizations == 0 {
            return Err(Error::Config("solver.randomizations must be positive".into()));
        }
        for v in &self.values {
            let ok = match self.variable {
                SweepVariable::Elements => *v >= 1.0 && v.fract() == 0.0,
                SweepVariable::RisY => v.is_finite(),
            };
            if !ok {
                return Err(Error::Config(format!(
                    "sweep value {v} is invalid for variable {}",
                    self.variable.label()
                )));
            }
        }
        Ok(())
    }

    /// Switches to a sweep over `variable`, keeping the configured values
    /// when they already belong to it.
    pub fn with_variable(mut self, variable: SweepVariable) -> Self {
        if self.variable != variable {
            self.variable = variable;
            self.values = variable.default_values();
        }
        self
    }

    /// Geometry and parameters at one sweep point.
    pub fn scenario(&self, value: f64) -> (Geometry, SystemParams) {
        let mut geometry = self.geometry;
        let mut params = self.params;
        match self.variable {
            SweepVariable::Elements => params.elements = value as usize,
            SweepVariable::RisY => geometry.ris[1] = value,
        }
        (geometry, params)
    }

    pub fn eavesdrop_options(&self, seed: u64) -> EavesdropOptions {
        EavesdropOptions {
            randomizations: self.randomizations,
            rank_one_tol: self.rank_one_tol,
            seed,
            solver: self.solver,
        }
    }

    pub fn jamming_options(&self, seed: u64, start: JammingStart) -> JammingOptions {
        JammingOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            randomizations: self.randomizations,
            rank_one_tol: self.rank_one_tol,
            seed,
            start,
            solver: self.solver,
        }
    }
}
