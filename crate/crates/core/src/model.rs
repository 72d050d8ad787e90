//! Scenario geometry, channel generation and the transmitter's precoder.
//!
//! Every channel is `sqrt(L0 * d^-beta) * g` with `g ~ CN(0, 1)` i.i.d.
//! Small-scale fading is drawn from a ChaCha20 stream (`rand_chacha` 0.9)
//! seeded with `seed_from_u64(seed)`, consumed in a fixed layout:
//!
//! 1. transmitter to receiver, `M` entries;
//! 2. transmitter to eavesdropper, `M` entries;
//! 3. eavesdropper self-interference, one entry;
//! 4. for each RIS element `n` in order: row `n` of the transmitter to RIS
//!    matrix (`M` entries), then RIS to receiver, RIS to eavesdropper and
//!    eavesdropper to RIS for that element.
//!
//! The per-element layout makes the fading of an `N`-element surface a prefix
//! of the fading of any larger surface drawn with the same seed, and the
//! geometry only rescales the draws. Sweeps over `N` or the RIS position
//! therefore compare the same fading realizations across sweep points.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Positions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub tx: [f64; 3],
    pub bob: [f64; 3],
    pub eve: [f64; 3],
    /// Center of the RIS.
    pub ris: [f64; 3],
}

impl Geometry {
    /// Transmitter at the origin, receiver at (50, -10, 0), eavesdropper at
    /// (50, 10, 0) and the RIS centered at (40, `ris_y`, 10).
    pub fn reference(ris_y: f64) -> Self {
        Geometry {
            tx: [0.0, 0.0, 0.0],
            bob: [50.0, -10.0, 0.0],
            eve: [50.0, 10.0, 0.0],
            ris: [40.0, ris_y, 10.0],
        }
    }

    pub fn distances(&self) -> Result<LinkDistances> {
        let d = |a: [f64; 3], b: [f64; 3]| {
            let dist = (Vector3::from(a) - Vector3::from(b)).norm();
            if dist > 0.0 && dist.is_finite() {
                Ok(dist)
            } else {
                Err(Error::Domain(format!(
                    "coincident or invalid positions {a:?} and {b:?}"
                )))
            }
        };
        Ok(LinkDistances {
            tx_bob: d(self.tx, self.bob)?,
            tx_eve: d(self.tx, self.eve)?,
            tx_ris: d(self.tx, self.ris)?,
            ris_bob: d(self.ris, self.bob)?,
            ris_eve: d(self.ris, self.eve)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDistances {
    pub tx_bob: f64,
    pub tx_eve: f64,
    pub tx_ris: f64,
    pub ris_bob: f64,
    /// Also used for the eavesdropper to RIS link.
    pub ris_eve: f64,
}

/// Path-loss exponents per link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossExponents {
    pub tx_bob: f64,
    pub tx_eve: f64,
    pub tx_ris: f64,
    pub ris_bob: f64,
    pub ris_eve: f64,
    pub eve_ris: f64,
}

impl Default for PathLossExponents {
    fn default() -> Self {
        PathLossExponents {
            tx_bob: 4.0,
            tx_eve: 4.0,
            tx_ris: 3.5,
            ris_bob: 2.5,
            ris_eve: 2.5,
            eve_ris: 2.5,
        }
    }
}

/// System parameters in linear units (watts, linear gains).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Transmit antennas `M`.
    pub antennas: usize,
    /// RIS elements `N`.
    pub elements: usize,
    pub tx_power: f64,
    /// Maximum jamming power available to the eavesdropper.
    pub jam_power_max: f64,
    pub noise_bob: f64,
    pub noise_eve: f64,
    /// Residual self-interference factor of the full-duplex eavesdropper.
    pub self_interference: f64,
    /// Path gain at the 1 m reference distance.
    pub ref_gain: f64,
    pub exponents: PathLossExponents,
}

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemParams {
    /// Defaults of the reference scenario: 8 antennas, 5 W transmit and
    /// jamming power, -120 dBW noise, 120 dB self-interference suppression,
    /// -30 dB reference gain.
    pub fn reference(elements: usize) -> Self {
        SystemParams {
            antennas: 8,
            elements,
            tx_power: 5.0,
            jam_power_max: 5.0,
            noise_bob: db_to_linear(-120.0),
            noise_eve: db_to_linear(-120.0),
            self_interference: db_to_linear(-120.0),
            ref_gain: db_to_linear(-30.0),
            exponents: PathLossExponents::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.exponents;
        let checks: [(bool, &str); 10] = [
            (self.antennas > 0, "antenna count must be positive"),
            (self.elements > 0, "RIS element count must be positive"),
            (self.tx_power > 0.0, "transmit power must be positive"),
            (self.jam_power_max >= 0.0, "jamming power must be non-negative"),
            (self.noise_bob > 0.0, "receiver noise must be positive"),
            (self.noise_eve > 0.0, "eavesdropper noise must be positive"),
            (
                (0.0..=1.0).contains(&self.self_interference),
                "self-interference factor must lie in [0, 1]",
            ),
            (self.ref_gain > 0.0, "reference gain must be positive"),
            (
                [e.tx_bob, e.tx_eve, e.tx_ris].iter().all(|b| *b > 0.0),
                "path-loss exponents must be positive",
            ),
            (
                [e.ris_bob, e.ris_eve, e.eve_ris].iter().all(|b| *b > 0.0),
                "path-loss exponents must be positive",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Domain(msg.to_string()));
            }
        }
        Ok(())
    }
}

/// One realization of every baseband channel.
///
/// Row channels (`1 x M`, `1 x N`) are stored as vectors and applied with the
/// non-conjugating product.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Transmitter to RIS, `N x M`.
    pub tx_ris: CMatrix,
    pub tx_bob: CVector,
    pub tx_eve: CVector,
    pub ris_bob: CVector,
    pub ris_eve: CVector,
    /// Eavesdropper to RIS, `N x 1`.
    pub eve_ris: CVector,
    /// Self-interference channel, before suppression.
    pub eve_self: C64,
    pub noise_bob: f64,
    pub noise_eve: f64,
    pub self_interference: f64,
}

impl ChannelSet {
    pub fn antennas(&self) -> usize {
        self.tx_bob.len()
    }

    pub fn elements(&self) -> usize {
        self.ris_bob.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.elements(), self.antennas());
        let shapes_ok = self.tx_ris.shape() == (n, m)
            && self.tx_eve.len() == m
            && self.ris_eve.len() == n
            && self.eve_ris.len() == n;
        if !shapes_ok {
            return Err(Error::Dimension(format!(
                "channel set inconsistent with N = {n}, M = {m}"
            )));
        }
        let finite = self
            .tx_ris
            .iter()
            .chain(self.tx_bob.iter())
            .chain(self.tx_eve.iter())
            .chain(self.ris_bob.iter())
            .chain(self.ris_eve.iter())
            .chain(self.eve_ris.iter())
            .chain(std::iter::once(&self.eve_self))
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::Domain("non-finite channel entry".into()));
        }
        Ok(())
    }

    /// Same channels with every RIS-to-receiver and RIS-to-eavesdropper
    /// coefficient zeroed, i.e. the surface disconnected.
    pub fn without_ris(&self) -> ChannelSet {
        let mut out = self.clone();
        out.ris_bob.fill(C64::new(0.0, 0.0));
        out.ris_eve.fill(C64::new(0.0, 0.0));
        out
    }
}

/// Linear power gain `L0 * d^-beta`.
pub fn path_loss(distance: f64, exponent: f64, ref_gain: f64) -> Result<f64> {
    if !(distance > 0.0) || !(exponent > 0.0) || !(ref_gain > 0.0) {
        return Err(Error::Domain(format!(
            "path loss needs positive distance, exponent and reference gain \
             (got d = {distance}, beta = {exponent}, L0 = {ref_gain})"
        )));
    }
    Ok(ref_gain * distance.powf(-exponent))
}

fn cn01(rng: &mut ChaCha20Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws one channel realization. Deterministic in `seed`.
pub fn generate_channels(geometry: &Geometry, params: &SystemParams, seed: u64) -> Result<ChannelSet> {
    params.validate()?;
    let dist = geometry.distances()?;
    let e = &params.exponents;
    let l0 = params.ref_gain;
    let amp = |d: f64, beta: f64| path_loss(d, beta, l0).map(f64::sqrt);
    let a_tx_bob = amp(dist.tx_bob, e.tx_bob)?;
    let a_tx_eve = amp(dist.tx_eve, e.tx_eve)?;
    let a_tx_ris = amp(dist.tx_ris, e.tx_ris)?;
    let a_ris_bob = amp(dist.ris_bob, e.ris_bob)?;
    let a_ris_eve = amp(dist.ris_eve, e.ris_eve)?;
    let a_eve_ris = amp(dist.ris_eve, e.eve_ris)?;

    let (n, m) = (params.elements, params.antennas);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let tx_bob = CVector::from_fn(m, |_, _| cn01(&mut rng) * a_tx_bob);
    let tx_eve = CVector::from_fn(m, |_, _| cn01(&mut rng) * a_tx_eve);
    let eve_self = cn01(&mut rng);

    let mut tx_ris = CMatrix::zeros(n, m);
    let mut ris_bob = CVector::zeros(n);
    let mut ris_eve = CVector::zeros(n);
    let mut eve_ris = CVector::zeros(n);
    for k in 0..n {
        for j in 0..m {
            tx_ris[(k, j)] = cn01(&mut rng) * a_tx_ris;
        }
        ris_bob[k] = cn01(&mut rng) * a_ris_bob;
        ris_eve[k] = cn01(&mut rng) * a_ris_eve;
        eve_ris[k] = cn01(&mut rng) * a_eve_ris;
    }

    Ok(ChannelSet {
        tx_ris,
        tx_bob,
        tx_eve,
        ris_bob,
        ris_eve,
        eve_ris,
        eve_self,
        noise_bob: params.noise_bob,
        noise_eve: params.noise_eve,
        self_interference: params.self_interference,
    })
}

/// Transmit beamformer `w`, with `||w||^2` equal to the transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub w: CVector,
}

impl Precoder {
    pub fn power(&self) -> f64 {
        self.w.norm_squared()
    }
}

/// Maximum-ratio transmission toward `channel` at full power.
pub fn mrt_precoder(channel: &CVector, power: f64) -> Result<Precoder> {
    if !(power > 0.0) {
        return Err(Error::Domain(format!("transmit power {power} must be positive")));
    }
    let norm = channel.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Degenerate("cannot steer toward a zero channel".into()));
    }
    Ok(Precoder {
        w: channel.map(|z| z.conj()) * C64::new(power.sqrt() / norm, 0.0),
    })
}
