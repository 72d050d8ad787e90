//! Passive eavesdropping attack: RIS phases minimizing the secrecy rate.
//!
//! Minimizing `log2((1 + gamma_bob) / (1 + gamma_eve))` over unit-modulus
//! phases is relaxed to a fractional program in the lifted matrix `V`, which
//! the Charnes–Cooper substitution `X = mu V` turns into the linear SDP
//!
//! ```text
//! min  Tr(C_B X) + mu
//! s.t. Tr(C_E X) + mu = 1,   X_nn = mu,   X >= 0,   mu >= 0
//! ```
//!
//! with `C_B = g_B g_B^H / sigma_B^2`, `C_E = g_E g_E^H / sigma_E^2`. The
//! relaxed `V = X / mu` is turned back into phases by Gaussian
//! randomization.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::conic::{solve_linear_sdp, ConicProblem, ConicSolution, FactoredHermitian, LinearForm, SolverOptions};
use crate::error::StageExt;
use crate::model::{ChannelSet, Precoder};
use crate::secrecy::{fractional_objective, lift_channels, sinr_eavesdrop, LiftedPhase, LiftedVectors, ReflectConfig};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Smallest admissible Charnes–Cooper scale.
const MIN_SCALE: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL * max(1, largest)` count as non-negative.
const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EavesdropOptions {
    /// Gaussian randomization draws.
    pub randomizations: usize,
    /// The relaxed matrix counts as rank one when its second eigenvalue is
    /// below this fraction of the first.
    pub rank_one_tol: f64,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for EavesdropOptions {
    fn default() -> Self {
        EavesdropOptions {
            randomizations: 500,
            rank_one_tol: 1e-6,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EavesdropSolution {
    /// Relaxed phase matrix, unit diagonal.
    pub relaxed: CMatrix,
    /// Charnes–Cooper scale.
    pub scale: f64,
    pub phase: LiftedPhase,
    pub reflect: ReflectConfig,
    /// Optimal value of the relaxation, a lower bound on
    /// `(1 + gamma_bob) / (1 + gamma_eve)` over all phases.
    pub relaxed_ratio: f64,
    /// `(1 + gamma_bob) / (1 + gamma_eve)` at the extracted phases.
    pub ratio: f64,
    /// Secrecy rate at the extracted phases, bits/s/Hz.
    pub rate: f64,
}

impl EavesdropSolution {
    /// `log2` of the relaxed ratio: no phase choice pushes the unclamped
    /// rate gap below this.
    pub fn rate_bound(&self) -> f64 {
        self.relaxed_ratio.log2()
    }
}

/// Builds the Charnes–Cooper SDP. The matrix variable has size `N + 1`,
/// the single scalar is the scale `mu`.
pub fn build_relaxed_sdp(lifted: &LiftedVectors) -> Result<ConicProblem> {
    let n = lifted.dim();
    if lifted.signal_eve.len() != n || n == 0 {
        return Err(Error::Dimension("signal vectors of different lengths".into()));
    }
    if !(lifted.noise_bob > 0.0 && lifted.noise_eve > 0.0) {
        return Err(Error::Domain("noise powers must be positive".into()));
    }
    let objective = LinearForm {
        matrix: FactoredHermitian::rank_one(1.0 / lifted.noise_bob, lifted.signal_bob.clone()),
        scalars: vec![1.0],
    };
    let mut problem = ConicProblem::new(n, 1, objective);
    problem.constrain(
        LinearForm {
            matrix: FactoredHermitian::rank_one(1.0 / lifted.noise_eve, lifted.signal_eve.clone()),
            scalars: vec![1.0],
        },
        1.0,
    );
    for k in 0..n {
        problem.constrain(
            LinearForm {
                matrix: FactoredHermitian::unit_diagonal(n, k),
                scalars: vec![-1.0],
            },
            0.0,
        );
    }
    Ok(problem)
}

/// Undoes the Charnes–Cooper substitution: returns `(X / mu, mu)`.
pub fn recover_phase_matrix(solution: &ConicSolution) -> Result<(CMatrix, f64)> {
    let mu = solution.scalars.first().copied().unwrap_or(0.0);
    if !(mu > MIN_SCALE) {
        return Err(Error::Degenerate(format!(
            "Charnes-Cooper scale {mu:e} is not positive"
        )));
    }
    Ok((&solution.x / C64::new(mu, 0.0), mu))
}

/// Eigendecomposition of a Hermitian PSD matrix with rounding-level
/// eigenvalues set to zero. Eigenvalues come sorted in decreasing order.
fn psd_eigen(v_mat: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = SymmetricEigen::new(crate::conic::hermitianize(v_mat));
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(*l));
    let low = eig.eigenvalues.iter().fold(f64::INFINITY, |a, l| a.min(*l));
    if low < -PSD_TOL * top.max(1.0) {
        return Err(Error::NotPsd(low));
    }
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let floor = f64::EPSILON * eig.eigenvalues.len() as f64 * top;
    let values = order
        .iter()
        .map(|k| eig.eigenvalues[*k])
        .map(|l| if l > floor { l } else { 0.0 })
        .collect();
    let vectors = CMatrix::from_columns(&order.iter().map(|k| eig.eigenvectors.column(*k)).collect::<Vec<_>>());
    Ok((values, vectors))
}

/// Phase-projected principal eigenvector of `v_mat`.
pub fn principal_phase(v_mat: &CMatrix) -> Result<LiftedPhase> {
    let (_, vectors) = psd_eigen(v_mat)?;
    LiftedPhase::project(&vectors.column(0).into_owned())
}

/// Draws `count` vectors `u = V^{1/2} r` with `r ~ CN(0, I)`, projects each
/// onto unit-modulus phases and returns the one minimizing `objective`.
/// The earliest draw wins ties.
pub fn gaussian_randomize<F: FnMut(&LiftedPhase) -> f64>(
    v_mat: &CMatrix,
    mut objective: F,
    count: usize,
    seed: u64,
) -> Result<LiftedPhase> {
    if count == 0 {
        return Err(Error::Domain("randomization needs at least one draw".into()));
    }
    let (values, vectors) = psd_eigen(v_mat)?;
    let n = values.len();
    let mut root = vectors;
    for (k, mut col) in root.column_iter_mut().enumerate() {
        col *= C64::new(values[k].sqrt(), 0.0);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut best: Option<(f64, LiftedPhase)> = None;
    for _ in 0..count {
        let r = CVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re * scale, im * scale)
        });
        let candidate = LiftedPhase::project(&(&root * r))?;
        let value = objective(&candidate);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, candidate));
        }
    }
    Ok(best.expect("count is positive").1)
}

/// Solves the passive eavesdropping attack for fixed channels and precoder.
pub fn solve_eavesdrop(
    channels: &ChannelSet,
    precoder: &Precoder,
    options: &EavesdropOptions,
) -> Result<EavesdropSolution> {
    let lifted = lift_channels(channels, precoder).stage("lift")?;
    let problem = build_relaxed_sdp(&lifted).stage("relaxation")?;
    let solution = solve_linear_sdp(&problem, &options.solver)
        .and_then(|s| s.into_optimal())
        .stage("relaxation")?;
    let relaxed_ratio = solution.objective;
    let (relaxed, scale) = recover_phase_matrix(&solution).stage("recovery")?;

    let ratio_at = |p: &LiftedPhase| fractional_objective(&p.outer(), &lifted).unwrap_or(f64::INFINITY);
    let (values, _) = psd_eigen(&relaxed).stage("randomization")?;
    let principal = principal_phase(&relaxed).stage("randomization")?;
    let rank_one = values.len() < 2 || values[1] < options.rank_one_tol * values[0];
    let phase = if rank_one {
        principal
    } else {
        let drawn =
            gaussian_randomize(&relaxed, ratio_at, options.randomizations, options.seed).stage("randomization")?;
        // the principal direction is one more candidate
        if ratio_at(&principal) < ratio_at(&drawn) {
            principal
        } else {
            drawn
        }
    };

    let reflect = phase.to_reflect();
    let sinr = sinr_eavesdrop(channels, &reflect, precoder).stage("evaluation")?;
    Ok(EavesdropSolution {
        relaxed,
        scale,
        ratio: ratio_at(&phase),
        phase,
        reflect,
        relaxed_ratio,
        rate: sinr.secrecy_rate(),
    })
}
