//! Convex programs over the Hermitian PSD cone.
//!
//! A [`ConicProblem`] has a Hermitian matrix variable `X` of size `n` and,
//! optionally, a vector `s` of non-negative scalars. It minimizes
//!
//! ```text
//! Tr(C X) + c_s . s + offset - sum_k w_k ln(Tr(A_k X) + b_k)
//! ```
//!
//! subject to `Tr(G_i X) + g_i . s = c_i`, `X >= 0` and `s >= 0`. Linear
//! programs (no log terms) go through [`solve_linear_sdp`], the general case
//! through [`solve_log_sdp`]; both share one primal-dual interior-point method
//! that works on the real embedding of `X` (see [`embed`]).
//!
//! All data matrices are held in factored form `sum_r w_r v_r v_r^H`. The
//! solver exploits the factors: its Newton systems reduce to small dense
//! matrices built from the factors, so the per-step cost stays cubic in `n`.

pub mod embed;
mod interior;

use nalgebra::SymmetricEigen;

use crate::{CMatrix, CVector, Error, Result, C64};

pub use embed::{embed_hermitian, hermitianize, unembed};

/// Hermitian matrix `sum_r w_r v_r v_r^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredHermitian {
    dim: usize,
    terms: Vec<(f64, CVector)>,
}

impl FactoredHermitian {
    pub fn zero(dim: usize) -> Self {
        FactoredHermitian { dim, terms: Vec::new() }
    }

    pub fn rank_one(weight: f64, v: CVector) -> Self {
        FactoredHermitian {
            dim: v.len(),
            terms: vec![(weight, v)],
        }
    }

    /// `E_i`: a single one at row and column `i`.
    pub fn unit_diagonal(dim: usize, i: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[i] = C64::new(1.0, 0.0);
        Self::rank_one(1.0, v)
    }

    /// Factors a dense Hermitian matrix through its eigendecomposition,
    /// dropping eigenvalues below `1e-14` of the largest.
    pub fn from_dense(h: &CMatrix) -> Result<Self> {
        embed::check_hermitian(h)?;
        let dim = h.nrows();
        let eig = SymmetricEigen::new(hermitianize(h));
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let terms = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() > 1e-14 * top)
            .map(|(k, l)| (*l, eig.eigenvectors.column(k).into_owned()))
            .collect();
        Ok(FactoredHermitian { dim, terms })
    }

    pub fn push(&mut self, weight: f64, v: CVector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!(
                "factor of length {} added to {}-dimensional matrix",
                v.len(),
                self.dim
            )));
        }
        self.terms.push((weight, v));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, CVector)] {
        &self.terms
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (w, v) in &self.terms {
            out += v * v.adjoint() * C64::new(*w, 0.0);
        }
        out
    }

    /// `Re Tr(self * X)`.
    pub fn trace_with(&self, x: &CMatrix) -> f64 {
        self.terms.iter().map(|(w, v)| w * v.dotc(&(x * v)).re).sum()
    }

    /// Sum of `|w_r| ||v_r||^2`, an upper bound on the nuclear norm.
    pub fn magnitude(&self) -> f64 {
        self.terms.iter().map(|(w, v)| w.abs() * v.norm_squared()).sum()
    }
}

/// `Tr(M X) + coeffs . s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub matrix: FactoredHermitian,
    pub scalars: Vec<f64>,
}

impl LinearForm {
    pub fn matrix_only(matrix: FactoredHermitian) -> Self {
        LinearForm {
            matrix,
            scalars: Vec::new(),
        }
    }

    pub fn eval(&self, x: &CMatrix, s: &[f64]) -> f64 {
        self.matrix.trace_with(x) + self.scalars.iter().zip(s).map(|(a, b)| a * b).sum::<f64>()
    }

    fn magnitude(&self) -> f64 {
        self.matrix.magnitude() + self.scalars.iter().map(|a| a.abs()).sum::<f64>()
    }
}

/// Contributes `-weight * ln(Tr(A X) + constant)` to the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTerm {
    pub matrix: FactoredHermitian,
    pub constant: f64,
    pub weight: f64,
}

/// `form = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub form: LinearForm,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub dim: usize,
    pub scalars: usize,
    pub objective: LinearForm,
    pub offset: f64,
    pub log_terms: Vec<LogTerm>,
    pub constraints: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new(dim: usize, scalars: usize, objective: LinearForm) -> Self {
        ConicProblem {
            dim,
            scalars,
            objective,
            offset: 0.0,
            log_terms: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn constrain(&mut self, form: LinearForm, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { form, rhs });
        self
    }

    pub fn add_log(&mut self, matrix: FactoredHermitian, constant: f64, weight: f64) -> &mut Self {
        self.log_terms.push(LogTerm {
            matrix,
            constant,
            weight,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check_form = |f: &LinearForm, what: &str| -> Result<()> {
            if f.matrix.dim() != self.dim {
                return Err(Error::Dimension(format!(
                    "{what} matrix has dimension {}, problem has {}",
                    f.matrix.dim(),
                    self.dim
                )));
            }
            if f.scalars.len() > self.scalars {
                return Err(Error::Dimension(format!(
                    "{what} has {} scalar coefficients, problem has {} scalars",
                    f.scalars.len(),
                    self.scalars
                )));
            }
            let finite = f.scalars.iter().all(|a| a.is_finite())
                && f.matrix
                    .terms()
                    .iter()
                    .all(|(w, v)| w.is_finite() && v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
            if !finite {
                return Err(Error::Domain(format!("{what} has non-finite data")));
            }
            Ok(())
        };
        if self.dim == 0 {
            return Err(Error::Dimension("empty matrix variable".into()));
        }
        check_form(&self.objective, "objective")?;
        for c in &self.constraints {
            check_form(&c.form, "constraint")?;
            if !c.rhs.is_finite() {
                return Err(Error::Domain("constraint right-hand side is not finite".into()));
            }
        }
        for t in &self.log_terms {
            check_form(&LinearForm::matrix_only(t.matrix.clone()), "log term")?;
            if !(t.weight > 0.0) || !t.constant.is_finite() {
                return Err(Error::Domain(
                    "log terms need a positive weight and finite constant".into(),
                ));
            }
        }
        Ok(())
    }

    /// Objective value, or an error when a log argument is not positive.
    pub fn objective_value(&self, x: &CMatrix, s: &[f64]) -> Result<f64> {
        let mut value = self.objective.eval(x, s) + self.offset;
        for t in &self.log_terms {
            let arg = t.matrix.trace_with(x) + t.constant;
            if !(arg > 0.0) {
                return Err(Error::Domain(format!("log argument {arg:e} is not positive")));
            }
            value -= t.weight * arg.ln();
        }
        Ok(value)
    }

    /// Largest equality violation, each scaled by `max(|rhs|, size of row)`.
    pub fn constraint_residual(&self, x: &CMatrix, s: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let scale = c.form.magnitude().max(c.rhs.abs()).max(f64::MIN_POSITIVE);
                (c.form.eval(x, s) - c.rhs).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target duality gap, relative to `max(1, |objective|)`.
    pub gap_tol: f64,
    /// Target relative primal and dual residuals.
    pub feas_tol: f64,
    /// Cap on interior-point iterations.
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tol: 1e-8,
            feas_tol: 1e-9,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub x: CMatrix,
    pub scalars: Vec<f64>,
    pub objective: f64,
    /// See [`ConicProblem::constraint_residual`].
    pub primal_residual: f64,
    /// Relative residual of the dual equations.
    pub dual_residual: f64,
    /// Certified suboptimality bound `<X, Z>`, relative to `max(1, |objective|)`.
    pub gap: f64,
    /// Multipliers of the equality constraints.
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Smallest eigenvalue of `X`.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.x.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, l| a.min(*l))
    }

    /// Converts a non-optimal status into an error.
    pub fn into_optimal(self) -> Result<ConicSolution> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Solver { status: self.status })
        }
    }
}

/// Solves a problem without log terms.
pub fn solve_linear_sdp(problem: &ConicProblem, options: &SolverOptions) -> Result<ConicSolution> {
    if !problem.log_terms.is_empty() {
        return Err(Error::Domain("linear SDP solver given log terms".into()));
    }
    problem.validate()?;
    interior::solve(problem, options)
}

/// Solves a problem whose objective may include `-ln` of affine terms.
/// Log arguments must be positive somewhere on the feasible set.
pub fn solve_log_sdp(problem: &ConicProblem, options: &SolverOptions) -> Result<ConicSolution> {
    problem.validate()?;
    interior::solve(problem, options)
}
