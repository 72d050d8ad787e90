//! Primal-dual interior-point method on the real embedding.
//!
//! Each log term `-w ln(Tr(A X) + b)` becomes a non-negative slack `tau`
//! tied to `X` by the row `Tr(A X) - tau = -b`, with the smooth objective
//! `-w ln tau` on the slack. The remaining problem is a linear SDP in
//! `(X, s, tau)` plus a separable convex term, solved by infeasible
//! Mehrotra predictor-corrector steps in the HKM direction.
//!
//! The Schur complement `M_ij = Tr(A_i X A_j Z^-1)` is assembled from the
//! data factors: with `P = U^T X U` and `Q = U^T Z^-1 U` every entry is a
//! weighted sum of `P_rq Q_rq`.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::embed::{embed_factor, unembed};
use super::{ConicProblem, ConicSolution, SolveStatus, SolverOptions};
use crate::{CVector, Result};

const STEP_FRACTION: f64 = 0.95;
const DIVERGENCE: f64 = 1e12;
const MIN_STEP: f64 = 1e-10;
/// Tolerances under which a stalled run still counts as solved.
const LOOSE_FEAS: f64 = 1e-7;
const LOOSE_GAP: f64 = 1e-6;

struct Data {
    dim: usize,
    user_scalars: usize,
    rows: usize,
    constraints: usize,
    /// Factor columns of the constraint and log rows, `2n x R`.
    factors: DMatrix<f64>,
    weights: Vec<f64>,
    owner: Vec<usize>,
    /// Scalar coefficients, `rows x (user scalars + logs)`.
    coupling: DMatrix<f64>,
    rhs: DVector<f64>,
    row_scale: Vec<f64>,
    cost: DMatrix<f64>,
    cost_scalars: DVector<f64>,
    log_weight: Vec<f64>,
    log_size: Vec<f64>,
    /// Objective scale: the solver minimizes `f / kappa`.
    kappa: f64,
}

impl Data {
    fn new(problem: &ConicProblem) -> Self {
        let m = problem.constraints.len();
        let k = problem.log_terms.len();
        let p = problem.scalars;
        let dim = 2 * problem.dim;
        let rows = m + k;

        let mut columns: Vec<DVector<f64>> = Vec::new();
        let mut weights = Vec::new();
        let mut owner = Vec::new();
        let mut push = |row: usize, terms: &[(f64, CVector)], scale: f64| {
            for (w, v) in terms {
                let (a, b) = embed_factor(v);
                for col in [a, b] {
                    columns.push(col);
                    weights.push(0.5 * w * scale);
                    owner.push(row);
                }
            }
        };

        let mut coupling = DMatrix::zeros(rows, p + k);
        let mut rhs = DVector::zeros(rows);
        let mut row_scale = Vec::with_capacity(m);
        for (i, c) in problem.constraints.iter().enumerate() {
            let size = c.form.magnitude();
            let scale = if size > 0.0 { 1.0 / size } else { 1.0 };
            push(i, c.form.matrix.terms(), scale);
            for (l, a) in c.form.scalars.iter().enumerate() {
                coupling[(i, l)] = a * scale;
            }
            rhs[i] = c.rhs * scale;
            row_scale.push(scale);
        }

        let objective_size = problem.objective.magnitude() + problem.log_terms.iter().map(|t| t.weight).sum::<f64>();
        let kappa = if objective_size > 0.0 { objective_size } else { 1.0 };

        let mut log_weight = Vec::with_capacity(k);
        let mut log_size = Vec::with_capacity(k);
        for (j, t) in problem.log_terms.iter().enumerate() {
            let size = if t.constant > 0.0 {
                t.constant
            } else {
                t.matrix.magnitude().max(t.constant.abs()).max(f64::MIN_POSITIVE)
            };
            push(m + j, t.matrix.terms(), 1.0 / size);
            coupling[(m + j, p + j)] = -1.0;
            rhs[m + j] = -t.constant / size;
            log_weight.push(t.weight / kappa);
            log_size.push(size);
        }

        let factors = if columns.is_empty() {
            DMatrix::zeros(dim, 0)
        } else {
            DMatrix::from_columns(&columns)
        };

        let mut cost = DMatrix::zeros(dim, dim);
        for (w, v) in problem.objective.matrix.terms() {
            let (a, b) = embed_factor(v);
            cost.ger(0.5 * w / kappa, &a, &a, 1.0);
            cost.ger(0.5 * w / kappa, &b, &b, 1.0);
        }
        let mut cost_scalars = DVector::zeros(p + k);
        for (l, a) in problem.objective.scalars.iter().enumerate() {
            cost_scalars[l] = a / kappa;
        }

        Data {
            dim,
            user_scalars: p,
            rows,
            constraints: m,
            factors,
            weights,
            owner,
            coupling,
            rhs,
            row_scale,
            cost,
            cost_scalars,
            log_weight,
            log_size,
            kappa,
        }
    }

    fn scalars(&self) -> usize {
        self.coupling.ncols()
    }

    fn nu(&self) -> f64 {
        (self.dim + self.scalars()) as f64
    }

    /// `A(X)` without the scalar part.
    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let xu = x * &self.factors;
        let mut out = DVector::zeros(self.rows);
        for r in 0..self.weights.len() {
            out[self.owner[r]] += self.weights[r] * self.factors.column(r).dot(&xu.column(r));
        }
        out
    }

    /// `A^*(y)`.
    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = self.factors.clone();
        for (r, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.weights[r] * y[self.owner[r]];
        }
        &scaled * self.factors.transpose()
    }

    fn schur(&self, x: &DMatrix<f64>, z_inv: &DMatrix<f64>) -> DMatrix<f64> {
        let ut = self.factors.transpose();
        let p = &ut * (x * &self.factors);
        let q = &ut * (z_inv * &self.factors);
        let count = self.weights.len();
        let mut m = DMatrix::zeros(self.rows, self.rows);
        for r in 0..count {
            let (wr, or) = (self.weights[r], self.owner[r]);
            for c in 0..count {
                m[(or, self.owner[c])] += wr * self.weights[c] * p[(r, c)] * q[(r, c)];
            }
        }
        m
    }

    /// Gradient and curvature of the separable term on the scalars.
    fn smooth(&self, s: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let mut grad = DVector::zeros(self.scalars());
        let mut curv = DVector::zeros(self.scalars());
        for (j, w) in self.log_weight.iter().enumerate() {
            let v = s[self.user_scalars + j];
            grad[self.user_scalars + j] = -w / v;
            curv[self.user_scalars + j] = w / (v * v);
        }
        (grad, curv)
    }

    fn scaled_objective(&self, x: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
        let mut f = self.cost.dot(x) + self.cost_scalars.dot(s);
        for (j, w) in self.log_weight.iter().enumerate() {
            f -= w * s[self.user_scalars + j].ln();
        }
        f
    }
}

struct State {
    x: DMatrix<f64>,
    z: DMatrix<f64>,
    s: DVector<f64>,
    zs: DVector<f64>,
    y: DVector<f64>,
}

struct Residuals {
    primal: DVector<f64>,
    dual: DMatrix<f64>,
    dual_scalars: DVector<f64>,
    primal_rel: f64,
    dual_rel: f64,
    complementarity: f64,
}

struct Direction {
    dx: DMatrix<f64>,
    dz: DMatrix<f64>,
    ds: DVector<f64>,
    dzs: DVector<f64>,
    dy: DVector<f64>,
}

/// Linear algebra shared by the predictor and corrector solves.
struct Factorization {
    x_chol: Cholesky<f64, nalgebra::Dyn>,
    z_chol: Cholesky<f64, nalgebra::Dyn>,
    z_inv: DMatrix<f64>,
    schur: Schur,
    curv: DVector<f64>,
}

enum Schur {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Schur {
    fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let out = match self {
            Schur::Chol(c) => c.solve(b),
            Schur::Lu(l) => l.solve(b)?,
        };
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}

fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

impl Data {
    fn residuals(&self, st: &State) -> Residuals {
        let (grad, _) = self.smooth(&st.s);
        let primal = &self.rhs - self.apply(&st.x) - &self.coupling * &st.s;
        let dual = symmetrize(&(&self.cost - self.adjoint(&st.y) - &st.z));
        let dual_scalars = &self.cost_scalars + grad - self.coupling.transpose() * &st.y - &st.zs;
        let primal_rel = primal.norm() / (1.0 + self.rhs.norm());
        let dual_rel = (dual.norm_squared() + dual_scalars.norm_squared()).sqrt()
            / (1.0 + self.cost.norm() + self.cost_scalars.norm());
        let complementarity = st.x.dot(&st.z) + st.s.dot(&st.zs);
        Residuals {
            primal,
            dual,
            dual_scalars,
            primal_rel,
            dual_rel,
            complementarity,
        }
    }

    fn factorize(&self, st: &State) -> Option<Factorization> {
        let x_chol = Cholesky::new(st.x.clone())?;
        let z_chol = Cholesky::new(st.z.clone())?;
        let z_inv = symmetrize(&z_chol.inverse());
        let (_, curv) = self.smooth(&st.s);
        let mut m = self.schur(&st.x, &z_inv);
        for l in 0..self.scalars() {
            let d = st.s[l] / (st.zs[l] + st.s[l] * curv[l]);
            let col = self.coupling.column(l);
            m.ger(d, &col, &col, 1.0);
        }
        let m = symmetrize(&m);
        let schur = match Cholesky::new(m.clone()) {
            Some(c) => Schur::Chol(c),
            None => Schur::Lu(m.lu()),
        };
        Some(Factorization {
            x_chol,
            z_chol,
            z_inv,
            schur,
            curv,
        })
    }

    /// Solves the Newton system for the complementarity target `sigma_mu`
    /// with optional second-order corrections.
    fn direction(
        &self,
        st: &State,
        res: &Residuals,
        f: &Factorization,
        sigma_mu: f64,
        corr: Option<(&DMatrix<f64>, &DVector<f64>)>,
    ) -> Option<Direction> {
        let mut t = &f.z_inv * sigma_mu - &st.x - &st.x * &res.dual * &f.z_inv;
        if let Some((cm, _)) = corr {
            t -= cm * &f.z_inv;
        }
        let scalars = self.scalars();
        let mut q = DVector::zeros(scalars);
        let mut gain = DVector::zeros(scalars);
        for l in 0..scalars {
            let (s, z) = (st.s[l], st.zs[l]);
            let c = corr.map_or(0.0, |(_, cs)| cs[l]);
            let denom = z + s * f.curv[l];
            q[l] = (sigma_mu - s * z - c - s * res.dual_scalars[l]) / denom;
            gain[l] = s / denom;
        }
        let rhs = &res.primal - self.apply(&t) - &self.coupling * &q;
        let dy = f.schur.solve(&rhs)?;
        let at_dy = self.adjoint(&dy);
        let dx = symmetrize(&(t + &st.x * &at_dy * &f.z_inv));
        let bty = self.coupling.transpose() * &dy;
        let ds = q + gain.component_mul(&bty);
        let dz = &res.dual - at_dy;
        let dzs = &res.dual_scalars - bty + f.curv.component_mul(&ds);
        Some(Direction { dx, dz, ds, dzs, dy })
    }
}

/// Largest `alpha` keeping `X + alpha dX` positive semidefinite.
fn matrix_step(chol: &Cholesky<f64, nalgebra::Dyn>, dx: &DMatrix<f64>) -> f64 {
    if dx.nrows() == 0 {
        return f64::INFINITY;
    }
    let l = chol.l();
    let Some(a) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(b) = l.solve_lower_triangular(&a.transpose()) else {
        return 0.0;
    };
    let lo = symmetrize(&b).symmetric_eigenvalues().min();
    if lo < 0.0 {
        -1.0 / lo
    } else {
        f64::INFINITY
    }
}

fn vector_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

fn step_lengths(st: &State, f: &Factorization, dir: &Direction) -> (f64, f64) {
    let primal = matrix_step(&f.x_chol, &dir.dx).min(vector_step(&st.s, &dir.ds));
    let dual = matrix_step(&f.z_chol, &dir.dz).min(vector_step(&st.zs, &dir.dzs));
    (primal, dual)
}

pub(super) fn solve(problem: &ConicProblem, options: &SolverOptions) -> Result<ConicSolution> {
    let data = Data::new(problem);
    let d = data.dim;
    let scalars = data.scalars();
    let logs = data.log_weight.len();
    let nu = data.nu();
    let root = (d as f64).sqrt().max(1.0);

    let mut size_a = vec![0.0f64; data.rows];
    for r in 0..data.weights.len() {
        size_a[data.owner[r]] += data.weights[r].abs() * data.factors.column(r).norm_squared();
    }
    let xi = (0..data.rows)
        .map(|i| d as f64 * (1.0 + data.rhs[i].abs()) / (1.0 + size_a[i]))
        .fold(root.max(10.0), f64::max);
    let eta = size_a
        .iter()
        .copied()
        .fold(root.max(10.0).max(data.cost.norm()), f64::max);

    let mut st = State {
        x: DMatrix::identity(d, d) * xi,
        z: DMatrix::identity(d, d) * eta,
        s: DVector::from_element(scalars, xi),
        zs: DVector::from_element(scalars, eta),
        y: DVector::zeros(data.rows),
    };
    let (x0, z0) = (xi * d as f64, eta * d as f64);

    let mut iterations = 0;
    let status = loop {
        let res = data.residuals(&st);
        let objective = data.scaled_objective(&st.x, &st.s);
        let gap_rel = res.complementarity / objective.abs().max(1.0 / data.kappa);
        let solved = |feas: f64, gap: f64| res.primal_rel <= feas && res.dual_rel <= feas && gap_rel <= gap;
        if solved(options.feas_tol, options.gap_tol) {
            break SolveStatus::Optimal;
        }
        if st.x.trace() + st.s.sum() > DIVERGENCE * x0.max(1.0) {
            break SolveStatus::Unbounded;
        }
        if st.z.trace() + st.zs.sum() > DIVERGENCE * z0.max(1.0) || st.y.amax() > DIVERGENCE * eta {
            break SolveStatus::Infeasible;
        }
        if iterations >= options.max_iters {
            break if solved(LOOSE_FEAS, LOOSE_GAP) {
                SolveStatus::Optimal
            } else {
                SolveStatus::MaxIterations
            };
        }
        iterations += 1;

        let stall = if solved(LOOSE_FEAS, LOOSE_GAP) {
            SolveStatus::Optimal
        } else {
            SolveStatus::NumericalFailure
        };
        let Some(fact) = data.factorize(&st) else { break stall };
        let mu = res.complementarity / nu;

        let Some(aff) = data.direction(&st, &res, &fact, 0.0, None) else {
            break stall;
        };
        let (ap, ad) = step_lengths(&st, &fact, &aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let x_aff = &st.x + &aff.dx * ap;
        let z_aff = &st.z + &aff.dz * ad;
        let mu_aff = (x_aff.dot(&z_aff) + (&st.s + &aff.ds * ap).dot(&(&st.zs + &aff.dzs * ad))) / nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let corr_m = &aff.dx * &aff.dz;
        let corr_s = aff.ds.component_mul(&aff.dzs);
        let Some(dir) = data.direction(&st, &res, &fact, sigma * mu, Some((&corr_m, &corr_s))) else {
            break stall;
        };
        let (ap, ad) = step_lengths(&st, &fact, &dir);
        let (mut ap, mut ad) = ((STEP_FRACTION * ap).min(1.0), (STEP_FRACTION * ad).min(1.0));
        if logs > 0 {
            // the log gradient couples both sides
            ap = ap.min(ad);
            ad = ap;
        }
        if ap.max(ad) < MIN_STEP {
            break stall;
        }
        st.x = symmetrize(&(&st.x + &dir.dx * ap));
        st.s += &dir.ds * ap;
        st.z = symmetrize(&(&st.z + &dir.dz * ad));
        st.zs += &dir.dzs * ad;
        st.y += &dir.dy * ad;
    };

    Ok(finish(problem, &data, &st, iterations, status))
}

fn finish(problem: &ConicProblem, data: &Data, st: &State, iterations: usize, status: SolveStatus) -> ConicSolution {
    let res = data.residuals(st);
    let x = unembed(&st.x);
    let scalars: Vec<f64> = st.s.iter().take(data.user_scalars).copied().collect();
    let objective = problem.objective_value(&x, &scalars).unwrap_or_else(|_| {
        // fall back on the slacks when a log argument drifted to zero
        let mut f = data.kappa * (data.cost.dot(&st.x) + data.cost_scalars.dot(&st.s)) + problem.offset;
        for (j, t) in problem.log_terms.iter().enumerate() {
            f -= t.weight * (st.s[data.user_scalars + j] * data.log_size[j]).ln();
        }
        f
    });
    ConicSolution {
        primal_residual: problem.constraint_residual(&x, &scalars),
        x,
        scalars,
        objective,
        dual_residual: res.dual_rel,
        gap: res.complementarity * data.kappa / objective.abs().max(1.0),
        multipliers: (0..data.constraints)
            .map(|i| st.y[i] * data.row_scale[i] * data.kappa)
            .collect(),
        iterations,
        status,
    }
}
