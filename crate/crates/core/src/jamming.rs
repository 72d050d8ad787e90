//! Eavesdropping plus full-duplex jamming: joint choice of RIS phases and
//! jamming power.
//!
//! The rate gap `ln(1 + gamma_bob) - ln(1 + gamma_eve)` is written as the
//! minimum over multipliers `lambda_B, lambda_E > 0` of two surrogates,
//! using `ln x = min_t (t x - ln t - 1)`:
//!
//! ```text
//! phi_B = lambda_B (S_B + P I_B + s_B) - ln(P I_B + s_B) - ln lambda_B - 1
//! phi_E = -ln(S_E + P I_E + s_E) + lambda_E (P I_E + s_E) - ln lambda_E - 1
//! ```
//!
//! where `S` and `I` are the signal and jamming powers, `s` the noise powers
//! and `P` the jamming power. Block coordinate descent over the
//! multipliers (closed form), the relaxed phase matrix (a log-SDP) and `P`
//! (a convex scalar problem) decreases `phi_B + phi_E` monotonically.

use crate::conic::{solve_log_sdp, ConicProblem, FactoredHermitian, LinearForm, SolverOptions};
use crate::eavesdrop::{gaussian_randomize, principal_phase, solve_eavesdrop, EavesdropOptions};
use crate::error::StageExt;
use crate::model::{ChannelSet, Precoder};
use crate::search::golden_section_min;
use crate::secrecy::{lift_channels, quad_form, sinr_jamming, LiftedPhase, LiftedVectors, ReflectConfig};
use crate::{CMatrix, Error, Result, C64};

/// Signal and jamming powers seen through a phase matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateTerms {
    pub signal_bob: f64,
    pub jam_bob: f64,
    pub signal_eve: f64,
    pub jam_eve: f64,
    pub noise_bob: f64,
    pub noise_eve: f64,
}

impl SurrogateTerms {
    pub fn from_matrix(v_mat: &CMatrix, lifted: &LiftedVectors) -> Self {
        SurrogateTerms {
            signal_bob: quad_form(v_mat, &lifted.signal_bob),
            jam_bob: quad_form(v_mat, &lifted.jam_bob),
            signal_eve: quad_form(v_mat, &lifted.signal_eve),
            jam_eve: quad_form(v_mat, &lifted.jam_eve),
            noise_bob: lifted.noise_bob,
            noise_eve: lifted.noise_eve,
        }
    }

    pub fn from_phase(phase: &LiftedPhase, lifted: &LiftedVectors) -> Self {
        let v = phase.vector();
        SurrogateTerms {
            signal_bob: v.dotc(&lifted.signal_bob).norm_sqr(),
            jam_bob: v.dotc(&lifted.jam_bob).norm_sqr(),
            signal_eve: v.dotc(&lifted.signal_eve).norm_sqr(),
            jam_eve: v.dotc(&lifted.jam_eve).norm_sqr(),
            noise_bob: lifted.noise_bob,
            noise_eve: lifted.noise_eve,
        }
    }

    /// Interference-plus-noise at the receiver and the eavesdropper.
    fn interference(&self, jam_power: f64) -> (f64, f64) {
        (
            jam_power * self.jam_bob + self.noise_bob,
            jam_power * self.jam_eve + self.noise_eve,
        )
    }

    /// `ln(1 + gamma_bob) - ln(1 + gamma_eve)` in nats.
    pub fn rate_gap_nats(&self, jam_power: f64) -> f64 {
        let (ib, ie) = self.interference(jam_power);
        (self.signal_bob / ib).ln_1p() - (self.signal_eve / ie).ln_1p()
    }
}

fn positive_log(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 {
        Ok(x.ln())
    } else {
        Err(Error::Domain(format!("{what} {x:e} must be positive")))
    }
}

/// `phi_B`. Equals `ln(1 + gamma_bob)` at the optimal multiplier.
pub fn legit_surrogate(terms: &SurrogateTerms, lambda: f64, jam_power: f64) -> Result<f64> {
    let (ib, _) = terms.interference(jam_power);
    Ok(lambda * (terms.signal_bob + ib)
        - positive_log(ib, "receiver interference")?
        - positive_log(lambda, "multiplier")?
        - 1.0)
}

/// `phi_E`. Equals `-ln(1 + gamma_eve)` at the optimal multiplier.
pub fn eve_surrogate(terms: &SurrogateTerms, lambda: f64, jam_power: f64) -> Result<f64> {
    let (_, ie) = terms.interference(jam_power);
    Ok(
        -positive_log(terms.signal_eve + ie, "eavesdropper power")? + lambda * ie
            - positive_log(lambda, "multiplier")?
            - 1.0,
    )
}

/// Multipliers minimizing both surrogates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub bob: f64,
    pub eve: f64,
}

impl Multipliers {
    pub fn optimal(terms: &SurrogateTerms, jam_power: f64) -> Result<Self> {
        let (ib, ie) = terms.interference(jam_power);
        let total = terms.signal_bob + ib;
        if !(total > 0.0 && ie > 0.0) {
            return Err(Error::Degenerate("zero interference-plus-noise power".into()));
        }
        Ok(Multipliers {
            bob: 1.0 / total,
            eve: 1.0 / ie,
        })
    }
}

/// `phi_B + phi_E`.
pub fn surrogate(terms: &SurrogateTerms, lambdas: Multipliers, jam_power: f64) -> Result<f64> {
    Ok(legit_surrogate(terms, lambdas.bob, jam_power)? + eve_surrogate(terms, lambdas.eve, jam_power)?)
}

/// Builds the phase subproblem: `phi_B + phi_E` as a function of the relaxed
/// phase matrix with unit diagonal, for fixed multipliers and jamming power.
pub fn phase_subproblem(lifted: &LiftedVectors, lambdas: Multipliers, jam_power: f64) -> Result<ConicProblem> {
    if !(lambdas.bob > 0.0 && lambdas.eve > 0.0) {
        return Err(Error::Domain("multipliers must be positive".into()));
    }
    if !(jam_power >= 0.0) {
        return Err(Error::Domain(format!("jamming power {jam_power} must be non-negative")));
    }
    let n = lifted.dim();
    let mut cost = FactoredHermitian::rank_one(lambdas.bob, lifted.signal_bob.clone());
    cost.push(lambdas.bob * jam_power, lifted.jam_bob.clone())?;
    cost.push(lambdas.eve * jam_power, lifted.jam_eve.clone())?;
    let mut problem = ConicProblem::new(n, 0, LinearForm::matrix_only(cost));
    problem.offset =
        lambdas.bob * lifted.noise_bob + lambdas.eve * lifted.noise_eve - lambdas.bob.ln() - lambdas.eve.ln() - 2.0;

    let receiver_jam = lifted.jam_bob.norm_squared() * jam_power;
    if receiver_jam > 0.0 {
        problem.add_log(
            FactoredHermitian::rank_one(jam_power, lifted.jam_bob.clone()),
            lifted.noise_bob,
            1.0,
        );
    } else {
        problem.offset -= lifted.noise_bob.ln();
    }
    let mut eve_power = FactoredHermitian::rank_one(1.0, lifted.signal_eve.clone());
    if jam_power > 0.0 {
        eve_power.push(jam_power, lifted.jam_eve.clone())?;
    }
    problem.add_log(eve_power, lifted.noise_eve, 1.0);

    for k in 0..n {
        problem.constrain(LinearForm::matrix_only(FactoredHermitian::unit_diagonal(n, k)), 1.0);
    }
    Ok(problem)
}

/// Minimizes `phi_B + phi_E` over `[0, max_power]` by golden-section search
/// to absolute tolerance `1e-6 * max_power`.
pub fn optimize_jam_power(terms: &SurrogateTerms, lambdas: Multipliers, max_power: f64) -> Result<f64> {
    if !(max_power >= 0.0 && max_power.is_finite()) {
        return Err(Error::Domain(format!("maximum jamming power {max_power} is invalid")));
    }
    if max_power == 0.0 {
        return Ok(0.0);
    }
    let objective = |p: f64| surrogate(terms, lambdas, p).unwrap_or(f64::INFINITY);
    Ok(golden_section_min(objective, 0.0, max_power, 1e-6 * max_power)?.0)
}

/// Starting phase matrix of the alternating minimization.
#[derive(Debug, Clone, PartialEq)]
pub enum JammingStart {
    /// The relaxed solution of the passive attack.
    Relaxed,
    /// `V = 1 1^T`, all phases zero.
    AllOnes,
    Matrix(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammingOptions {
    pub max_iters: usize,
    /// Stop once an iteration lowers the surrogate by less than this.
    pub tol: f64,
    pub randomizations: usize,
    pub rank_one_tol: f64,
    pub seed: u64,
    pub start: JammingStart,
    pub solver: SolverOptions,
}

impl Default for JammingOptions {
    fn default() -> Self {
        JammingOptions {
            max_iters: 50,
            tol: 1e-4,
            randomizations: 500,
            rank_one_tol: 1e-6,
            seed: 0,
            start: JammingStart::Relaxed,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammingSolution {
    /// Relaxed phase matrix at the last iterate.
    pub relaxed: CMatrix,
    pub phase: LiftedPhase,
    pub reflect: ReflectConfig,
    pub jam_power: f64,
    /// Secrecy rate at the extracted phases and jamming power, bits/s/Hz.
    pub rate: f64,
    /// Surrogate value at the start and after every iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternates multiplier, phase-matrix and power updates from `v_mat`.
/// Returns the final `(V, P, trace, iterations, converged)`.
fn alternate(
    lifted: &LiftedVectors,
    mut v_mat: CMatrix,
    max_power: f64,
    options: &JammingOptions,
) -> Result<(CMatrix, f64, Vec<f64>, usize, bool)> {
    let mut power = 0.5 * max_power;
    let mut terms = SurrogateTerms::from_matrix(&v_mat, lifted);
    let mut lambdas = Multipliers::optimal(&terms, power)?;
    let mut value = surrogate(&terms, lambdas, power)?;
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    // with every reflected path zero the phase subproblem is constant in V
    // and has no interior optimum to converge to
    let reflected = lifted.dim() - 1;
    let phases_matter = [&lifted.signal_bob, &lifted.signal_eve, &lifted.jam_bob, &lifted.jam_eve]
        .iter()
        .any(|a| a.rows(0, reflected).iter().any(|z| z.norm_sqr() > 0.0));
    while iterations < options.max_iters {
        iterations += 1;
        lambdas = Multipliers::optimal(&terms, power).stage("multipliers")?;
        let mut current = surrogate(&terms, lambdas, power)?;

        if phases_matter {
            let problem = phase_subproblem(lifted, lambdas, power).stage("phase update")?;
            let solution = solve_log_sdp(&problem, &options.solver)
                .and_then(|s| s.into_optimal())
                .stage("phase update")?;
            let candidate = SurrogateTerms::from_matrix(&solution.x, lifted);
            if let Ok(v) = surrogate(&candidate, lambdas, power) {
                // keep the old matrix when the solve does not improve on it
                if v <= current {
                    v_mat = solution.x;
                    terms = candidate;
                    current = v;
                }
            }
        }

        let next_power = optimize_jam_power(&terms, lambdas, max_power).stage("power update")?;
        let v = surrogate(&terms, lambdas, next_power)?;
        if v <= current {
            power = next_power;
            current = v;
        }

        trace.push(current);
        let decrease = value - current;
        value = current;
        if decrease < options.tol {
            converged = true;
            break;
        }
    }
    Ok((v_mat, power, trace, iterations, converged))
}

/// Alternates multiplier and power updates at fixed phases, from `power`.
fn refine_power(terms: &SurrogateTerms, mut power: f64, max_power: f64) -> Result<f64> {
    for _ in 0..50 {
        let lambdas = Multipliers::optimal(terms, power)?;
        let before = surrogate(terms, lambdas, power)?;
        let next = optimize_jam_power(terms, lambdas, max_power)?;
        let after = surrogate(terms, lambdas, next)?;
        if after < before {
            power = next;
        }
        if before - after < 1e-12 {
            break;
        }
    }
    Ok(power)
}

/// Solves the eavesdrop-and-jam attack for fixed channels and precoder,
/// with jamming power limited to `max_power` watts.
pub fn solve_jamming(
    channels: &ChannelSet,
    precoder: &Precoder,
    max_power: f64,
    options: &JammingOptions,
) -> Result<JammingSolution> {
    if !(max_power >= 0.0 && max_power.is_finite()) {
        return Err(Error::Domain(format!("maximum jamming power {max_power} is invalid")));
    }
    let lifted = lift_channels(channels, precoder).stage("lift")?;
    let n = lifted.dim();
    let start = match &options.start {
        JammingStart::Relaxed => {
            let eopts = EavesdropOptions {
                randomizations: options.randomizations,
                rank_one_tol: options.rank_one_tol,
                seed: options.seed,
                solver: options.solver,
            };
            solve_eavesdrop(channels, precoder, &eopts)
                .stage("initialization")?
                .relaxed
        }
        JammingStart::AllOnes => CMatrix::from_element(n, n, C64::new(1.0, 0.0)),
        JammingStart::Matrix(m) => {
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "starting matrix is {:?}, expected {n} x {n}",
                    m.shape()
                )))
                .stage("initialization");
            }
            m.clone()
        }
    };
    let (relaxed, power, trace, iterations, converged) = alternate(&lifted, start.clone(), max_power, options)?;

    let gap = |p: &LiftedPhase, power: f64| SurrogateTerms::from_phase(p, &lifted).rate_gap_nats(power);
    let drawn =
        gaussian_randomize(&relaxed, |p| gap(p, power), options.randomizations, options.seed).stage("randomization")?;
    let mut candidates = vec![drawn, principal_phase(&relaxed).stage("randomization")?];
    // the starting point's own phases stay available to the attacker
    candidates.push(principal_phase(&start).stage("randomization")?);

    let mut best: Option<(f64, LiftedPhase, f64)> = None;
    for phase in candidates {
        let terms = SurrogateTerms::from_phase(&phase, &lifted);
        let refined = refine_power(&terms, power, max_power).stage("power refresh")?;
        let (chosen, value) = [
            (power, terms.rate_gap_nats(power)),
            (refined, terms.rate_gap_nats(refined)),
        ]
        .into_iter()
        .fold((power, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
            best = Some((value, phase, chosen));
        }
    }
    let (_, phase, jam_power) = best.expect("candidate list is non-empty");

    let reflect = phase.to_reflect();
    let sinr = sinr_jamming(channels, &reflect, precoder, jam_power).stage("evaluation")?;
    Ok(JammingSolution {
        relaxed,
        phase,
        reflect,
        jam_power,
        rate: sinr.secrecy_rate(),
        trace,
        iterations,
        converged,
    })
}
