//! SINR and secrecy-rate evaluation, and the lifting of RIS phases into the
//! `(N+1)`-dimensional vector form shared by both solvers.
//!
//! Phase convention: the reflect coefficients are `e^{j theta_n}` and the
//! lifted vector is `v = [e^{-j theta_1}, ..., e^{-j theta_N}, 1]^T`, so that
//! `v^H f` reproduces the cascaded channel `h_direct + h_ris Theta H`.
//! The lifted phase matrix is `V = v v^H`.

use std::f64::consts::{LN_2, TAU};

use crate::model::{ChannelSet, Precoder};
use crate::{CMatrix, CVector, Error, Result, C64};

/// RIS phases `theta_n` in `[0, 2 pi)`, unit amplitude per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectConfig {
    theta: Vec<f64>,
}

impl ReflectConfig {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("phase must be finite".into()));
        }
        Ok(ReflectConfig {
            theta: theta.into_iter().map(|t| t.rem_euclid(TAU)).collect(),
        })
    }

    pub fn zeros(elements: usize) -> Self {
        ReflectConfig {
            theta: vec![0.0; elements],
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Reflect coefficients `e^{j theta_n}`.
    pub fn coefficients(&self) -> CVector {
        CVector::from_iterator(self.theta.len(), self.theta.iter().map(|t| C64::from_polar(1.0, *t)))
    }
}

/// Lifted phase vector `v` with unit-modulus entries and last entry 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPhase {
    v: CVector,
}

impl LiftedPhase {
    pub fn from_reflect(config: &ReflectConfig) -> Self {
        let n = config.len();
        let mut v = CVector::from_element(n + 1, C64::new(1.0, 0.0));
        for (k, t) in config.theta().iter().enumerate() {
            v[k] = C64::from_polar(1.0, -t);
        }
        LiftedPhase { v }
    }

    /// Projects an arbitrary vector onto the feasible set: every entry keeps
    /// only its phase relative to the last entry.
    pub fn project(u: &CVector) -> Result<Self> {
        let len = u.len();
        if len == 0 {
            return Err(Error::Dimension("empty vector".into()));
        }
        let anchor = u[len - 1];
        let reference = if anchor.norm() > 0.0 {
            anchor.conj() / anchor.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let v = CVector::from_fn(len, |k, _| {
            if k + 1 == len {
                return C64::new(1.0, 0.0);
            }
            let z = u[k] * reference;
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        });
        Ok(LiftedPhase { v })
    }

    pub fn vector(&self) -> &CVector {
        &self.v
    }

    pub fn to_reflect(&self) -> ReflectConfig {
        let n = self.v.len() - 1;
        ReflectConfig {
            theta: (0..n).map(|k| (-self.v[k].arg()).rem_euclid(TAU)).collect(),
        }
    }

    pub fn outer(&self) -> CMatrix {
        &self.v * self.v.adjoint()
    }
}

/// Stacked effective channels of the lifted formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVectors {
    /// `[diag(h_IB) H_AI ; h_AB]`, `(N+1) x M`.
    pub f_bob: CMatrix,
    /// `[diag(h_IE) H_AI ; h_AE]`, `(N+1) x M`.
    pub f_eve: CMatrix,
    /// `[diag(h_IB) h_EI ; 0]`.
    pub jam_bob: CVector,
    /// `[diag(h_IE) h_EI ; sqrt(rho) h_EE]`.
    pub jam_eve: CVector,
    /// `w w^H`.
    pub w_outer: CMatrix,
    /// `f_bob w`, so that `Tr(f_bob W f_bob^H V) = signal_bob^H V signal_bob`.
    pub signal_bob: CVector,
    /// `f_eve w`.
    pub signal_eve: CVector,
    pub noise_bob: f64,
    pub noise_eve: f64,
}

impl LiftedVectors {
    pub fn dim(&self) -> usize {
        self.signal_bob.len()
    }
}

pub fn lift_channels(channels: &ChannelSet, precoder: &Precoder) -> Result<LiftedVectors> {
    channels.validate()?;
    let (n, m) = (channels.elements(), channels.antennas());
    if precoder.w.len() != m {
        return Err(Error::Dimension(format!(
            "precoder has {} entries, channels have {m} antennas",
            precoder.w.len()
        )));
    }
    let stack = |ris: &CVector, direct: &CVector| {
        let mut f = CMatrix::zeros(n + 1, m);
        for k in 0..n {
            for j in 0..m {
                f[(k, j)] = ris[k] * channels.tx_ris[(k, j)];
            }
        }
        for j in 0..m {
            f[(n, j)] = direct[j];
        }
        f
    };
    let f_bob = stack(&channels.ris_bob, &channels.tx_bob);
    let f_eve = stack(&channels.ris_eve, &channels.tx_eve);

    let mut jam_bob = CVector::zeros(n + 1);
    let mut jam_eve = CVector::zeros(n + 1);
    for k in 0..n {
        jam_bob[k] = channels.ris_bob[k] * channels.eve_ris[k];
        jam_eve[k] = channels.ris_eve[k] * channels.eve_ris[k];
    }
    jam_eve[n] = channels.eve_self * channels.self_interference.sqrt();

    let signal_bob = &f_bob * &precoder.w;
    let signal_eve = &f_eve * &precoder.w;
    Ok(LiftedVectors {
        f_bob,
        f_eve,
        jam_bob,
        jam_eve,
        w_outer: &precoder.w * precoder.w.adjoint(),
        signal_bob,
        signal_eve,
        noise_bob: channels.noise_bob,
        noise_eve: channels.noise_eve,
    })
}

/// Receiver and eavesdropper SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinr {
    pub bob: f64,
    pub eve: f64,
}

impl Sinr {
    pub fn secrecy_rate(&self) -> f64 {
        secrecy_rate(self.bob, self.eve)
    }

    /// `log2(1 + bob) - log2(1 + eve)` without the clamp at zero.
    pub fn rate_gap(&self) -> f64 {
        rate_gap(self.bob, self.eve)
    }
}

fn check_config(channels: &ChannelSet, config: &ReflectConfig, precoder: &Precoder) -> Result<()> {
    if config.len() != channels.elements() {
        return Err(Error::Dimension(format!(
            "{} phases for {} RIS elements",
            config.len(),
            channels.elements()
        )));
    }
    if precoder.w.len() != channels.antennas() {
        return Err(Error::Dimension("precoder length differs from antenna count".into()));
    }
    Ok(())
}

/// Cascaded transmitter gains `(h_direct + h_ris Theta H_AI) w` at the
/// receiver and the eavesdropper.
fn signal_amplitudes(channels: &ChannelSet, coeffs: &CVector, w: &CVector) -> (C64, C64) {
    let through = &channels.tx_ris * w;
    let mut bob = channels.tx_bob.dot(w);
    let mut eve = channels.tx_eve.dot(w);
    for k in 0..coeffs.len() {
        bob += channels.ris_bob[k] * coeffs[k] * through[k];
        eve += channels.ris_eve[k] * coeffs[k] * through[k];
    }
    (bob, eve)
}

/// Jamming amplitudes `h_IB Theta h_EI` and `sqrt(rho) h_EE + h_IE Theta h_EI`.
fn jam_amplitudes(channels: &ChannelSet, coeffs: &CVector) -> (C64, C64) {
    let mut bob = C64::new(0.0, 0.0);
    let mut eve = channels.eve_self * channels.self_interference.sqrt();
    for k in 0..coeffs.len() {
        bob += channels.ris_bob[k] * coeffs[k] * channels.eve_ris[k];
        eve += channels.ris_eve[k] * coeffs[k] * channels.eve_ris[k];
    }
    (bob, eve)
}

/// SINRs under passive eavesdropping.
pub fn sinr_eavesdrop(channels: &ChannelSet, config: &ReflectConfig, precoder: &Precoder) -> Result<Sinr> {
    check_config(channels, config, precoder)?;
    let (bob, eve) = signal_amplitudes(channels, &config.coefficients(), &precoder.w);
    Ok(Sinr {
        bob: bob.norm_sqr() / channels.noise_bob,
        eve: eve.norm_sqr() / channels.noise_eve,
    })
}

/// SINRs when the eavesdropper also jams with power `jam_power`.
pub fn sinr_jamming(
    channels: &ChannelSet,
    config: &ReflectConfig,
    precoder: &Precoder,
    jam_power: f64,
) -> Result<Sinr> {
    check_config(channels, config, precoder)?;
    if !(jam_power >= 0.0) {
        return Err(Error::Domain(format!("jamming power {jam_power} must be non-negative")));
    }
    let coeffs = config.coefficients();
    let (bob, eve) = signal_amplitudes(channels, &coeffs, &precoder.w);
    let (jam_bob, jam_eve) = jam_amplitudes(channels, &coeffs);
    Ok(Sinr {
        bob: bob.norm_sqr() / (jam_power * jam_bob.norm_sqr() + channels.noise_bob),
        eve: eve.norm_sqr() / (jam_power * jam_eve.norm_sqr() + channels.noise_eve),
    })
}

/// `log2(1 + gamma_bob) - log2(1 + gamma_eve)`.
pub fn rate_gap(gamma_bob: f64, gamma_eve: f64) -> f64 {
    (gamma_bob.ln_1p() - gamma_eve.ln_1p()) / LN_2
}

/// Secrecy rate in bits/s/Hz, clamped at zero.
pub fn secrecy_rate(gamma_bob: f64, gamma_eve: f64) -> f64 {
    rate_gap(gamma_bob, gamma_eve).max(0.0)
}

/// `Re(a^H V a)`.
pub fn quad_form(v_mat: &CMatrix, a: &CVector) -> f64 {
    a.dotc(&(v_mat * a)).re
}

/// `(Tr(F_B V)/sigma_B^2 + 1) / (Tr(F_E V)/sigma_E^2 + 1)`, the ratio
/// minimized by the passive attack. For `V = v v^H` it equals
/// `(1 + gamma_bob) / (1 + gamma_eve)`.
pub fn fractional_objective(v_mat: &CMatrix, lifted: &LiftedVectors) -> Result<f64> {
    let n = lifted.dim();
    if v_mat.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "phase matrix is {:?}, expected {n} x {n}",
            v_mat.shape()
        )));
    }
    let num = quad_form(v_mat, &lifted.signal_bob) / lifted.noise_bob + 1.0;
    let den = quad_form(v_mat, &lifted.signal_eve) / lifted.noise_eve + 1.0;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_channels, mrt_precoder, Geometry, SystemParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn unit_channels(rho: f64) -> ChannelSet {
        let one = CVector::from_element(1, c(1.0));
        ChannelSet {
            tx_ris: CMatrix::from_element(1, 1, c(1.0)),
            tx_bob: one.clone(),
            tx_eve: one.clone(),
            ris_bob: one.clone(),
            ris_eve: one.clone(),
            eve_ris: one,
            eve_self: c(1.0),
            noise_bob: 1.0,
            noise_eve: 1.0,
            self_interference: rho,
        }
    }

    fn random_instance(seed: u64, n: usize) -> (ChannelSet, Precoder, ReflectConfig) {
        let mut params = SystemParams::reference(n);
        params.antennas = 3;
        let ch = generate_channels(&Geometry::reference(-5.0), &params, seed).unwrap();
        let pre = mrt_precoder(&ch.tx_bob, params.tx_power).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        let theta = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        (ch, pre, ReflectConfig::new(theta).unwrap())
    }

    #[test]
    fn lifting_unit_scalars() {
        let ch = unit_channels(0.0);
        let pre = Precoder {
            w: CVector::from_element(1, c(1.0)),
        };
        let l = lift_channels(&ch, &pre).unwrap();
        assert_eq!(l.f_bob, CMatrix::from_column_slice(2, 1, &[c(1.0), c(1.0)]));
        assert_eq!(l.jam_bob, CVector::from_vec(vec![c(1.0), c(0.0)]));
        assert_eq!(l.jam_eve[1], c(0.0));
    }

    #[test]
    fn lifted_last_rows() {
        let (ch, pre, _) = random_instance(3, 4);
        let l = lift_channels(&ch, &pre).unwrap();
        for j in 0..ch.antennas() {
            assert_eq!(l.f_bob[(4, j)], ch.tx_bob[j]);
            assert_eq!(l.f_eve[(4, j)], ch.tx_eve[j]);
        }
        assert_eq!(l.jam_bob[4], c(0.0));
        assert_eq!(l.jam_eve[4], ch.eve_self * ch.self_interference.sqrt());
        assert!((l.w_outer.trace().re - pre.power()).abs() < 1e-12);
    }

    #[test]
    fn lifting_matches_cascade() {
        for seed in 0..100 {
            let (ch, pre, cfg) = random_instance(seed, 5);
            let l = lift_channels(&ch, &pre).unwrap();
            let v = LiftedPhase::from_reflect(&cfg);
            let lifted = (v.vector().adjoint() * &l.f_bob * &pre.w)[0];
            let (direct, _) = signal_amplitudes(&ch, &cfg.coefficients(), &pre.w);
            assert!((lifted - direct).norm() <= 1e-10 * direct.norm().max(1e-300));

            let lifted = v.vector().dotc(&l.jam_eve);
            let (_, direct) = jam_amplitudes(&ch, &cfg.coefficients());
            assert!((lifted - direct).norm() <= 1e-10 * direct.norm().max(1e-300));
        }
    }

    #[test]
    fn phase_round_trip() {
        let cfg = ReflectConfig::new(vec![0.1, 3.0, 6.0, -1.0]).unwrap();
        let back = LiftedPhase::from_reflect(&cfg).to_reflect();
        for (a, b) in cfg.theta().iter().zip(back.theta()) {
            assert!((a - b).abs() < 1e-12 || (a - b).abs() > TAU - 1e-12);
        }
    }

    #[test]
    fn project_fixes_last_entry() {
        let u = CVector::from_vec(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.1), C64::new(0.0, 3.0)]);
        let v = LiftedPhase::project(&u).unwrap();
        assert_eq!(v.vector()[2], c(1.0));
        for z in v.vector().iter() {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
        // relative phase to the anchor is preserved
        let expected = (u[0] / u[2]).arg();
        assert!((v.vector()[0].arg() - expected).abs() < 1e-12);
    }

    #[test]
    fn sinr_without_ris_path() {
        let (mut ch, pre, cfg) = random_instance(9, 3);
        ch.ris_bob.fill(c(0.0));
        let s = sinr_eavesdrop(&ch, &cfg, &pre).unwrap();
        let direct = ch.tx_bob.dot(&pre.w).norm_sqr() / ch.noise_bob;
        assert!((s.bob - direct).abs() <= 1e-12 * direct);
        let s2 = sinr_eavesdrop(&ch, &ReflectConfig::zeros(3), &pre).unwrap();
        assert!((s.bob - s2.bob).abs() <= 1e-12 * direct);
    }

    #[test]
    fn destructive_interference() {
        let ch = unit_channels(0.0);
        let pre = Precoder {
            w: CVector::from_element(1, c(1.0)),
        };
        let s = sinr_eavesdrop(&ch, &ReflectConfig::new(vec![std::f64::consts::PI]).unwrap(), &pre).unwrap();
        assert!(s.bob < 1e-30);
    }

    #[test]
    fn sinr_matches_lifting() {
        for seed in 0..20 {
            let (ch, pre, cfg) = random_instance(seed, 4);
            let l = lift_channels(&ch, &pre).unwrap();
            let v = LiftedPhase::from_reflect(&cfg);
            let s = sinr_eavesdrop(&ch, &cfg, &pre).unwrap();
            let lifted = (v.vector().adjoint() * &l.f_bob * &pre.w)[0].norm_sqr() / ch.noise_bob;
            assert!((s.bob - lifted).abs() <= 1e-10 * s.bob);
        }
    }

    #[test]
    fn jamming_reduces_to_passive() {
        for seed in 0..10 {
            let (ch, pre, cfg) = random_instance(seed, 4);
            assert_eq!(
                sinr_jamming(&ch, &cfg, &pre, 0.0).unwrap(),
                sinr_eavesdrop(&ch, &cfg, &pre).unwrap()
            );
        }
    }

    #[test]
    fn jamming_monotone_in_power() {
        let (ch, pre, cfg) = random_instance(1, 4);
        let mut prev = f64::INFINITY;
        for p in [0.0, 0.1, 1.0, 5.0] {
            let s = sinr_jamming(&ch, &cfg, &pre, p).unwrap();
            assert!(s.bob < prev);
            prev = s.bob;
        }
        assert!(sinr_jamming(&ch, &cfg, &pre, -1.0).is_err());
    }

    #[test]
    fn jamming_denominators_match_lifting() {
        for seed in 0..20 {
            let (ch, pre, cfg) = random_instance(seed, 4);
            let l = lift_channels(&ch, &pre).unwrap();
            let v = LiftedPhase::from_reflect(&cfg);
            let pj = 2.5;
            let s = sinr_jamming(&ch, &cfg, &pre, pj).unwrap();
            let sig_b = v.vector().dotc(&l.signal_bob).norm_sqr();
            let sig_e = v.vector().dotc(&l.signal_eve).norm_sqr();
            let den_b = pj * v.vector().dotc(&l.jam_bob).norm_sqr() + ch.noise_bob;
            let den_e = pj * v.vector().dotc(&l.jam_eve).norm_sqr() + ch.noise_eve;
            assert!((sig_b / s.bob - den_b).abs() <= 1e-10 * den_b);
            assert!((sig_e / s.eve - den_e).abs() <= 1e-10 * den_e);
        }
    }

    #[test]
    fn secrecy_rate_examples() {
        assert_eq!(secrecy_rate(2.0, 2.0), 0.0);
        assert!((secrecy_rate(3.0, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(secrecy_rate(1.0, 3.0), 0.0);
    }

    #[test]
    fn fractional_objective_identical_links() {
        let (mut ch, pre, _) = random_instance(4, 3);
        ch.tx_eve = ch.tx_bob.clone();
        ch.ris_eve = ch.ris_bob.clone();
        let l = lift_channels(&ch, &pre).unwrap();
        let mut v = CMatrix::identity(4, 4);
        v[(0, 1)] = C64::new(0.3, 0.2);
        v[(1, 0)] = C64::new(0.3, -0.2);
        assert!((fractional_objective(&v, &l).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fractional_objective_rank_one() {
        for seed in 0..20 {
            let (ch, pre, cfg) = random_instance(seed, 5);
            let l = lift_channels(&ch, &pre).unwrap();
            let s = sinr_eavesdrop(&ch, &cfg, &pre).unwrap();
            let ratio = fractional_objective(&LiftedPhase::from_reflect(&cfg).outer(), &l).unwrap();
            let expected = (1.0 + s.bob) / (1.0 + s.eve);
            assert!((ratio - expected).abs() <= 1e-10 * expected);
            assert!((s.rate_gap() - ratio.log2()).abs() < 1e-9);
        }
    }

    #[test]
    fn fractional_objective_identity_trace_form() {
        let (ch, pre, _) = random_instance(11, 4);
        let l = lift_channels(&ch, &pre).unwrap();
        let v = CMatrix::identity(5, 5);
        let fb = &l.f_bob * &l.w_outer * l.f_bob.adjoint();
        let fe = &l.f_eve * &l.w_outer * l.f_eve.adjoint();
        let expected = ((fb * &v).trace().re / l.noise_bob + 1.0) / ((fe * &v).trace().re / l.noise_eve + 1.0);
        let got = fractional_objective(&v, &l).unwrap();
        assert!((got - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn dimension_errors() {
        let (ch, pre, _) = random_instance(0, 3);
        assert!(sinr_eavesdrop(&ch, &ReflectConfig::zeros(2), &pre).is_err());
        let l = lift_channels(&ch, &pre).unwrap();
        assert!(fractional_objective(&CMatrix::identity(3, 3), &l).is_err());
        let bad = Precoder { w: CVector::zeros(1) };
        assert!(lift_channels(&ch, &bad).is_err());
    }
}
