//! Exhaustive grid search over RIS phases (and jamming power) for small
//! instances, used to validate the solvers.
//!
//! Phases range over `theta_n in {2 pi k / L}`. The search minimizes the
//! unclamped rate gap, which also minimizes the clamped secrecy rate; ties go
//! to the lowest grid index so results do not depend on evaluation order.

use std::f64::consts::{LN_2, TAU};

use rayon::prelude::*;

use crate::model::{ChannelSet, Precoder};
use crate::secrecy::ReflectConfig;
use crate::{Error, Result, C64};

/// Grid resolution and evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Phase levels per element, at least 2.
    pub phase_levels: usize,
    /// Jamming powers, evenly spaced on `[0, max]` (one point means zero).
    pub power_points: usize,
    /// Largest admissible number of evaluations.
    pub budget: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            phase_levels: 16,
            power_points: 21,
            budget: 1e8,
        }
    }
}

/// Best grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub reflect: ReflectConfig,
    pub jam_power: f64,
    /// Secrecy rate, bits/s/Hz.
    pub rate: f64,
    /// Unclamped rate gap, bits/s/Hz.
    pub gap: f64,
}

/// Per-element contributions `h_I[k] * (H_AI w)[k]` and jamming couplings,
/// to be multiplied by `e^{j theta_k}`.
struct Contributions {
    direct_bob: C64,
    direct_eve: C64,
    bob: Vec<C64>,
    eve: Vec<C64>,
    direct_jam_eve: C64,
    jam_bob: Vec<C64>,
    jam_eve: Vec<C64>,
}

impl Contributions {
    fn new(channels: &ChannelSet, precoder: &Precoder) -> Result<Self> {
        channels.validate()?;
        if precoder.w.len() != channels.antennas() {
            return Err(Error::Dimension("precoder length differs from antenna count".into()));
        }
        let through = &channels.tx_ris * &precoder.w;
        let n = channels.elements();
        Ok(Contributions {
            direct_bob: channels.tx_bob.dot(&precoder.w),
            direct_eve: channels.tx_eve.dot(&precoder.w),
            bob: (0..n).map(|k| channels.ris_bob[k] * through[k]).collect(),
            eve: (0..n).map(|k| channels.ris_eve[k] * through[k]).collect(),
            direct_jam_eve: channels.eve_self * channels.self_interference.sqrt(),
            jam_bob: (0..n).map(|k| channels.ris_bob[k] * channels.eve_ris[k]).collect(),
            jam_eve: (0..n).map(|k| channels.ris_eve[k] * channels.eve_ris[k]).collect(),
        })
    }
}

fn grid_size(elements: usize, spec: &GridSpec) -> Result<usize> {
    if spec.phase_levels < 2 {
        return Err(Error::Domain("at least two phase levels are needed".into()));
    }
    if spec.power_points == 0 {
        return Err(Error::Domain("at least one power point is needed".into()));
    }
    let requested = (spec.phase_levels as f64).powi(elements as i32) * spec.power_points as f64;
    if requested > spec.budget {
        return Err(Error::Budget {
            requested,
            budget: spec.budget,
        });
    }
    Ok(spec.phase_levels.pow(elements as u32))
}

fn digits(mut index: usize, levels: usize, elements: usize) -> Vec<usize> {
    let mut out = vec![0; elements];
    for d in out.iter_mut() {
        *d = index % levels;
        index /= levels;
    }
    out
}

fn search(channels: &ChannelSet, precoder: &Precoder, spec: &GridSpec, max_power: f64) -> Result<GridOptimum> {
    let n = channels.elements();
    let total = grid_size(n, spec)?;
    let c = Contributions::new(channels, precoder)?;
    let levels = spec.phase_levels;
    let rotations: Vec<C64> = (0..levels)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / levels as f64))
        .collect();
    let powers: Vec<f64> = if spec.power_points == 1 {
        vec![0.0]
    } else {
        (0..spec.power_points)
            .map(|i| max_power * i as f64 / (spec.power_points - 1) as f64)
            .collect()
    };
    let (nb, ne) = (channels.noise_bob, channels.noise_eve);

    let evaluate = |index: usize| -> (f64, usize, usize) {
        let idx = digits(index, levels, n);
        let (mut sb, mut se) = (c.direct_bob, c.direct_eve);
        let (mut jb, mut je) = (C64::new(0.0, 0.0), c.direct_jam_eve);
        for k in 0..n {
            let r = rotations[idx[k]];
            sb += c.bob[k] * r;
            se += c.eve[k] * r;
            jb += c.jam_bob[k] * r;
            je += c.jam_eve[k] * r;
        }
        let (sb, se, jb, je) = (sb.norm_sqr(), se.norm_sqr(), jb.norm_sqr(), je.norm_sqr());
        let mut best = (f64::INFINITY, 0usize);
        for (pi, p) in powers.iter().enumerate() {
            let gap = (sb / (p * jb + nb)).ln_1p() - (se / (p * je + ne)).ln_1p();
            if gap < best.0 {
                best = (gap, pi);
            }
        }
        (best.0, index, best.1)
    };
    let better = |a: (f64, usize, usize), b: (f64, usize, usize)| {
        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (gap, index, power_index) = (0..total)
        .into_par_iter()
        .map(evaluate)
        .reduce(|| (f64::INFINITY, usize::MAX, 0), better);

    let theta = digits(index, levels, n)
        .into_iter()
        .map(|k| TAU * k as f64 / levels as f64)
        .collect();
    let gap = gap / LN_2;
    Ok(GridOptimum {
        reflect: ReflectConfig::new(theta)?,
        jam_power: powers[power_index],
        rate: gap.max(0.0),
        gap,
    })
}

/// Minimum secrecy rate over the phase grid under passive eavesdropping.
pub fn grid_search_eavesdrop(channels: &ChannelSet, precoder: &Precoder, spec: &GridSpec) -> Result<GridOptimum> {
    let spec = GridSpec {
        power_points: 1,
        ..*spec
    };
    search(channels, precoder, &spec, 0.0)
}

/// Minimum secrecy rate jointly over the phase grid and
/// `spec.power_points` jamming powers on `[0, max_power]`.
pub fn grid_search_jamming(
    channels: &ChannelSet,
    precoder: &Precoder,
    max_power: f64,
    spec: &GridSpec,
) -> Result<GridOptimum> {
    if !(max_power >= 0.0 && max_power.is_finite()) {
        return Err(Error::Domain(format!("maximum jamming power {max_power} is invalid")));
    }
    search(channels, precoder, spec, max_power)
}
