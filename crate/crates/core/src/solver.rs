//! Dual augmented-Lagrangian solver with symmetric Gauss–Seidel slot sweeps.
//!
//! Each iteration sweeps the dual slots backward (sparsity multipliers, then
//! vertex multipliers, then the cone multiplier once) and forward (vertex
//! multipliers, then sparsity multipliers) against the augmented Lagrangian,
//! then takes a damped multiplier step on the design variable. Vertex slots
//! are updated through a proximal majorization whose curvature weights αᵢ
//! come from [`crate::numerics::max_eig_kron`]; the cone slot and the vertex
//! slots stay inside the positive-semidefinite cone by projection, and the
//! sparsity slots have an exact closed-form minimizer.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::conic::{
    apply_a, eval_dual_objective, slot_contribution, ConicProblem, DualPoint,
};
use crate::control::{recover_gain, GainMatrix};
use crate::error::Error;
use crate::model::symmetrize;
use crate::numerics::{max_eig_kron, project_psd};
use crate::scalar::Scalar;

/// Penalty, step, tolerance, and bookkeeping knobs for [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T: Scalar> {
    sigma: T,
    tau: T,
    epsilon: T,
    max_iterations: usize,
    log_every: usize,
}

impl<T: Scalar> SolverConfig<T> {
    /// Largest admissible multiplier step factor, (1+√5)/2.
    pub fn max_step_factor() -> T {
        (T::one() + T::c(5.0).sqrt()) / T::c(2.0)
    }

    /// Validated configuration: σ > 0, 0 < τ < (1+√5)/2, ε > 0.
    pub fn new(sigma: T, tau: T, epsilon: T) -> Result<Self, Error> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidConfig {
                context: format!("penalty sigma must be positive, got {}", sigma.as_f64()),
            });
        }
        if !(tau > T::zero()) || !(tau < Self::max_step_factor()) {
            return Err(Error::InvalidConfig {
                context: format!(
                    "step factor tau must lie in (0, (1+sqrt 5)/2), got {}",
                    tau.as_f64()
                ),
            });
        }
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidConfig {
                context: format!("tolerance epsilon must be positive, got {}", epsilon.as_f64()),
            });
        }
        Ok(Self { sigma, tau, epsilon, max_iterations: 50_000, log_every: 100 })
    }

    /// Cap on outer iterations (at least 1).
    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations.max(1);
        self
    }

    /// History/divergence sampling stride (at least 1).
    pub fn with_log_every(mut self, log_every: usize) -> Self {
        self.log_every = log_every.max(1);
        self
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn log_every(&self) -> usize {
        self.log_every
    }
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            sigma: T::one(),
            tau: T::c(0.618),
            epsilon: T::c(1e-3),
            max_iterations: 50_000,
            log_every: 100,
        }
    }
}

/// Mutable solver state: the dual point, the design-variable multiplier, the
/// cached per-vertex curvature weights, and the iteration counter.
#[derive(Debug, Clone)]
pub struct SolverState<T: Scalar> {
    pub x: DualPoint<T>,
    pub w: DMatrix<T>,
    pub alphas: Vec<T>,
    pub iteration: usize,
}

impl<T: Scalar> SolverState<T> {
    /// Cold start at the origin, with curvature weights computed once.
    pub fn initialize(problem: &ConicProblem<T>, config: &SolverConfig<T>) -> Result<Self, Error> {
        let p = problem.p();
        Self::from_point(problem, config, DualPoint::zeros(problem), DMatrix::zeros(p, p))
    }

    /// Warm start from a given dual point and multiplier.
    pub fn from_point(
        problem: &ConicProblem<T>,
        config: &SolverConfig<T>,
        x: DualPoint<T>,
        w: DMatrix<T>,
    ) -> Result<Self, Error> {
        let p = problem.p();
        let n = problem.n();
        let point_ok = x.x0.shape() == (p, p)
            && x.xi.len() == problem.num_vertices()
            && x.xi.iter().all(|m| m.shape() == (n, n))
            && x.xeq.len() == problem.num_equalities()
            && x.xeq
                .iter()
                .zip(problem.selectors().pairs())
                .all(|(m, pair)| m.shape() == (pair.left.nrows(), pair.right.ncols()));
        if !point_ok || w.shape() != (p, p) {
            return Err(Error::DimensionMismatch {
                context: "warm-start point does not match the problem layout".to_string(),
            });
        }
        let v = &problem.extended().v;
        let mut alphas = Vec::with_capacity(problem.num_vertices());
        for i in 0..problem.num_vertices() {
            let alpha = max_eig_kron(problem.vertex_f(i), v, config.sigma())?;
            if !(alpha > T::zero()) {
                return Err(Error::NumericalBreakdown {
                    context: format!(
                        "curvature weight for vertex {i} is not positive ({})",
                        alpha.as_f64()
                    ),
                });
            }
            alphas.push(alpha);
        }
        Ok(Self { x, w, alphas, iteration: 0 })
    }
}

/// Residuals and objective value at one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord<T: Scalar> {
    pub iteration: usize,
    pub err_x0: T,
    pub err_xi_max: T,
    pub err_xeq_max: T,
    pub err_eq: T,
    pub err_max: T,
    pub dual_objective: T,
}

/// Terminal classification of a solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    Diverged,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIterations => "max_iterations",
            SolverStatus::Diverged => "diverged",
        };
        f.write_str(s)
    }
}

/// Everything a solver run produces: the design-variable certificate, the
/// recovered gain (when the certificate supports one), the guaranteed-cost
/// bound ⟨R, W⟩, the status, and the sampled convergence history.
#[derive(Debug, Clone)]
pub struct SynthesisResult<T: Scalar> {
    pub w_opt: DMatrix<T>,
    pub gain: Option<GainMatrix<T>>,
    pub bound: T,
    pub status: SolverStatus,
    pub history: Vec<ConvergenceRecord<T>>,
    pub iterations: usize,
    pub wall_time: Duration,
}

fn ensure_finite<T: Scalar>(m: &DMatrix<T>, context: &str) -> Result<(), Error> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalBreakdown { context: format!("non-finite values in {context}") })
    }
}

/// Minimize the augmented Lagrangian in one dual slot, holding every other
/// slot at its current occupant, then refresh the running operator sum.
///
/// `offset` is the constant part R − W/σ of the augmented-Lagrangian
/// argument; `asum` must equal the full operator sum of the current
/// occupants and is updated in place to stay consistent.
fn update_slot<T: Scalar>(
    problem: &ConicProblem<T>,
    x: &mut DualPoint<T>,
    asum: &mut DMatrix<T>,
    slot: usize,
    offset: &DMatrix<T>,
    sigma: T,
    alphas: &[T],
) -> Result<(), Error> {
    let old_contrib = slot_contribution(problem, x, slot);
    let d = &*asum - &old_contrib + offset;
    let m_count = problem.num_vertices();

    if slot == 0 {
        ensure_finite(&d, "cone-slot update")?;
        x.x0 = project_psd(&d)?;
    } else if slot <= m_count {
        let i = slot - 1;
        let alpha = alphas[i];
        let v = &problem.extended().v;
        let pmat = problem.vf(i) * &d * v.transpose();
        let center = &x.xi[i];
        let h = problem.h_block(i);
        let b = problem.b_block(i);
        // Curvature action on the proximal center.
        let lc = h * center + center * h + b * center * b + b.transpose() * center * b.transpose();
        let arg = (problem.vqv() - (&pmat + pmat.transpose()) * sigma + center * alpha
            - lc * sigma)
            / alpha;
        ensure_finite(&arg, "vertex-slot update")?;
        x.xi[i] = project_psd(&arg)?;
    } else {
        let j = slot - 1 - m_count;
        let pair = &problem.selectors().pairs()[j];
        let y = &pair.left * &d * &pair.right * T::c(-2.0);
        ensure_finite(&y, "sparsity-slot update")?;
        x.xeq[j] = y;
    }

    let new_contrib = slot_contribution(problem, x, slot);
    *asum += new_contrib - old_contrib;
    Ok(())
}

fn lagrangian_offset<T: Scalar>(problem: &ConicProblem<T>, state: &SolverState<T>, sigma: T) -> DMatrix<T> {
    &problem.extended().r - &state.w / sigma
}

/// Backward half-sweep: sparsity slots last-to-first, vertex slots
/// last-to-first, then the cone slot once. Returns the updated dual point;
/// the cone slot already carries its final value for this iteration.
pub fn backward_sweep<T: Scalar>(
    problem: &ConicProblem<T>,
    state: &SolverState<T>,
    config: &SolverConfig<T>,
) -> Result<DualPoint<T>, Error> {
    let sigma = config.sigma();
    let offset = lagrangian_offset(problem, state, sigma);
    let mut x = state.x.clone();
    let mut asum = apply_a(problem, &x);
    let m_count = problem.num_vertices();
    let n_count = problem.num_equalities();

    for slot in (m_count + 1..=m_count + n_count).rev() {
        update_slot(problem, &mut x, &mut asum, slot, &offset, sigma, &state.alphas)?;
    }
    for slot in (1..=m_count).rev() {
        update_slot(problem, &mut x, &mut asum, slot, &offset, sigma, &state.alphas)?;
    }
    update_slot(problem, &mut x, &mut asum, 0, &offset, sigma, &state.alphas)?;
    Ok(x)
}

/// Forward half-sweep: vertex slots first-to-last, then sparsity slots
/// first-to-last, starting from the backward result. The cone slot is left
/// untouched.
pub fn forward_sweep<T: Scalar>(
    problem: &ConicProblem<T>,
    state: &SolverState<T>,
    xbar: &DualPoint<T>,
    config: &SolverConfig<T>,
) -> Result<DualPoint<T>, Error> {
    let sigma = config.sigma();
    let offset = lagrangian_offset(problem, state, sigma);
    let mut x = xbar.clone();
    let mut asum = apply_a(problem, &x);
    let m_count = problem.num_vertices();
    let n_count = problem.num_equalities();

    for slot in 1..=m_count {
        update_slot(problem, &mut x, &mut asum, slot, &offset, sigma, &state.alphas)?;
    }
    for slot in m_count + 1..=m_count + n_count {
        update_slot(problem, &mut x, &mut asum, slot, &offset, sigma, &state.alphas)?;
    }
    Ok(x)
}

/// Damped multiplier step on the design variable:
/// W ← sym(W − τσ(𝒜(X) + R)), evaluated at the state's current dual point.
pub fn update_multiplier<T: Scalar>(
    problem: &ConicProblem<T>,
    state: &SolverState<T>,
    config: &SolverConfig<T>,
) -> DMatrix<T> {
    let residual = apply_a(problem, &state.x) + &problem.extended().r;
    symmetrize(&(&state.w - residual * (config.tau() * config.sigma())))
}

/// Relative KKT residuals of the state's (X, W) pair.
///
/// A non-finite state short-circuits to a NaN record so downstream checks
/// classify the run as diverged without feeding NaNs into eigensolvers.
pub fn residuals<T: Scalar>(problem: &ConicProblem<T>, state: &SolverState<T>) -> ConvergenceRecord<T> {
    let nan = T::c(f64::NAN);
    let finite = state.x.is_finite() && state.w.iter().all(|v| v.is_finite());
    if !finite {
        return ConvergenceRecord {
            iteration: state.iteration,
            err_x0: nan,
            err_xi_max: nan,
            err_xeq_max: nan,
            err_eq: nan,
            err_max: nan,
            dual_objective: nan,
        };
    }

    let one = T::one();
    let w = &state.w;
    let project = |m: &DMatrix<T>| {
        project_psd(&symmetrize(m)).expect("projection of a symmetrized matrix cannot fail")
    };

    // Complementarity between the cone slot and the design variable.
    let x0 = &state.x.x0;
    let err_x0 = (x0 - project(&(x0 - w))).norm() / (one + w.norm() + x0.norm());

    // Complementarity between each vertex slot and its affine cone term.
    let v = &problem.extended().v;
    let mut err_xi_max = T::zero();
    for (i, xi) in state.x.xi.iter().enumerate() {
        let t = problem.vf(i) * w * v.transpose();
        let ti = &t + t.transpose() + problem.vqv();
        let err = (xi - project(&(&ti + xi))).norm() / (one + ti.norm() + xi.norm());
        err_xi_max = err_xi_max.max(err);
    }

    // Primal sparsity violation of the design variable.
    let mut err_xeq_max = T::zero();
    for pair in problem.selectors().pairs() {
        let err = (&pair.left * w * &pair.right).norm();
        err_xeq_max = err_xeq_max.max(err);
    }

    // Dual feasibility.
    let r = &problem.extended().r;
    let err_eq = (apply_a(problem, &state.x) + r).norm() / (one + r.norm());

    let err_max = err_x0.max(err_xi_max).max(err_xeq_max).max(err_eq);
    ConvergenceRecord {
        iteration: state.iteration,
        err_x0,
        err_xi_max,
        err_xeq_max,
        err_eq,
        err_max,
        dual_objective: eval_dual_objective(problem, &state.x),
    }
}

/// Run the full iteration to convergence, iteration cap, or divergence.
///
/// The history carries one record per `log_every` iterations plus the final
/// iterate. Divergence is declared on non-finite residuals, on a failed
/// sweep, or after 100 consecutive sampled records with err_max above 1e6.
pub fn solve<T: Scalar>(
    problem: &ConicProblem<T>,
    config: &SolverConfig<T>,
) -> Result<SynthesisResult<T>, Error> {
    let start = Instant::now();
    let mut state = SolverState::initialize(problem, config)?;
    let mut history: Vec<ConvergenceRecord<T>> = Vec::new();
    let mut status = SolverStatus::MaxIterations;
    let mut high_residual_streak = 0usize;
    let blowup = T::c(1e6);

    for k in 0..config.max_iterations() {
        let swept = backward_sweep(problem, &state, config)
            .and_then(|xbar| forward_sweep(problem, &state, &xbar, config));
        match swept {
            Ok(x) => state.x = x,
            Err(_) => {
                status = SolverStatus::Diverged;
                break;
            }
        }
        state.w = update_multiplier(problem, &state, config);
        state.iteration = k + 1;

        let record = residuals(problem, &state);
        let sampled = state.iteration % config.log_every() == 0;
        let nonfinite = !record.err_max.is_finite();
        let converged = !nonfinite && record.err_max < config.epsilon();
        if sampled || nonfinite || converged {
            history.push(record.clone());
        }
        if nonfinite {
            status = SolverStatus::Diverged;
            break;
        }
        if converged {
            status = SolverStatus::Converged;
            break;
        }
        if sampled {
            if record.err_max > blowup {
                high_residual_streak += 1;
                if high_residual_streak >= 100 {
                    status = SolverStatus::Diverged;
                    break;
                }
            } else {
                high_residual_streak = 0;
            }
        }
    }

    if status == SolverStatus::MaxIterations
        && history.last().map(|r| r.iteration) != Some(state.iteration)
    {
        history.push(residuals(problem, &state));
    }

    let w_opt = state.w.clone();
    let bound = problem.extended().r.dot(&w_opt);
    let sparsity_tol = T::c(10.0) * config.epsilon();
    let gain = recover_gain(&w_opt, problem.structure(), sparsity_tol).ok();

    Ok(SynthesisResult {
        w_opt,
        gain,
        bound,
        status,
        history,
        iterations: state.iteration,
        wall_time: start.elapsed(),
    })
}
