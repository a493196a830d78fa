//! Gain recovery from the solver's design-variable certificate, independent
//! closed-loop verification, and impulse-response simulation.
//!
//! Verification deliberately shares no machinery with the solver: stability
//! is checked through eigenvalues of the closed loop at every uncertainty
//! vertex, and the quadratic cost through per-vertex controllability
//! Gramians, so a bug in the conic iteration cannot vouch for itself.

use nalgebra::DMatrix;

use crate::conic::build_selectors;
use crate::error::Error;
use crate::model::{BlockStructure, PlantModel, UncertaintyPolytope};
use crate::numerics::{eig_sym, is_hurwitz, lyapunov_solve};
use crate::scalar::Scalar;

/// A decentralized state-feedback gain: block `j` acts on block `j`'s states
/// only, and every off-pattern entry is exactly zero when the gain is
/// assembled blockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix<T: Scalar> {
    matrix: DMatrix<T>,
    structure: BlockStructure,
}

impl<T: Scalar> GainMatrix<T> {
    /// Assemble from per-block rows (block `j` is 1×Dⱼ); all off-pattern
    /// entries are set to exact zeros.
    pub fn from_blocks(structure: &BlockStructure, blocks: &[DMatrix<T>]) -> Result<Self, Error> {
        let m = structure.m();
        let n = structure.n();
        if blocks.len() != m {
            return Err(Error::DimensionMismatch {
                context: format!("expected {} gain blocks, got {}", m, blocks.len()),
            });
        }
        let offsets = structure.offsets();
        let mut matrix = DMatrix::zeros(m, n);
        for (j, block) in blocks.iter().enumerate() {
            let dj = structure.block_sizes()[j];
            if block.shape() != (1, dj) {
                return Err(Error::DimensionMismatch {
                    context: format!(
                        "gain block {} must be 1×{}, got {}×{}",
                        j,
                        dj,
                        block.nrows(),
                        block.ncols()
                    ),
                });
            }
            for (t, col) in (offsets[j]..offsets[j + 1]).enumerate() {
                matrix[(j, col)] = block[(0, t)];
            }
        }
        Ok(Self { matrix, structure: structure.clone() })
    }

    /// Wrap a dense m×n matrix without zeroing anything; off-pattern content
    /// is preserved and reported by [`Self::respects_structure`].
    pub fn from_dense(structure: &BlockStructure, matrix: DMatrix<T>) -> Result<Self, Error> {
        if matrix.shape() != (structure.m(), structure.n()) {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "gain must be {}×{}, got {}×{}",
                    structure.m(),
                    structure.n(),
                    matrix.nrows(),
                    matrix.ncols()
                ),
            });
        }
        Ok(Self { matrix, structure: structure.clone() })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn structure(&self) -> &BlockStructure {
        &self.structure
    }

    /// Row `j` restricted to block `j`'s state columns (1×Dⱼ).
    pub fn block(&self, j: usize) -> DMatrix<T> {
        let offsets = self.structure.offsets();
        self.matrix.view((j, offsets[j]), (1, offsets[j + 1] - offsets[j])).into_owned()
    }

    /// Largest magnitude among entries outside the block pattern.
    pub fn max_off_pattern(&self) -> T {
        let offsets = self.structure.offsets();
        let mut worst = T::zero();
        for j in 0..self.structure.m() {
            for col in 0..self.structure.n() {
                if col < offsets[j] || col >= offsets[j + 1] {
                    worst = worst.max(self.matrix[(j, col)].abs());
                }
            }
        }
        worst
    }

    /// Whether every off-pattern entry is exactly zero.
    pub fn respects_structure(&self) -> bool {
        self.max_off_pattern() == T::zero()
    }
}

/// Recover the decentralized gain from a design-variable certificate W:
/// split off the state block W₁ and the coupling block W₂, require W₁ to be
/// safely positive definite and W to respect the pinned sparsity pattern,
/// then solve each block's normal equations.
pub fn recover_gain<T: Scalar>(
    w: &DMatrix<T>,
    structure: &BlockStructure,
    sparsity_tol: T,
) -> Result<GainMatrix<T>, Error> {
    let n = structure.n();
    let m = structure.m();
    let p = n + m;
    if w.shape() != (p, p) {
        return Err(Error::DimensionMismatch {
            context: format!("certificate must be {}×{}, got {}×{}", p, p, w.nrows(), w.ncols()),
        });
    }

    let w1 = w.view((0, 0), (n, n)).into_owned();
    let eig = eig_sym(&w1);
    let min_eig = *eig.values.last().expect("state block is non-empty");
    if !(min_eig > T::c(1e-9) * w1.norm()) {
        return Err(Error::SingularW1 { min_eig: min_eig.as_f64() });
    }

    let selectors = build_selectors::<T>(structure);
    for (j, pair) in selectors.pairs().iter().enumerate() {
        let residual = (&pair.left * w * &pair.right).norm();
        if residual > sparsity_tol {
            return Err(Error::SparsityViolated {
                pair: j,
                residual: residual.as_f64(),
                tol: sparsity_tol.as_f64(),
            });
        }
    }

    let offsets = structure.offsets();
    let mut blocks = Vec::with_capacity(m);
    for j in 0..m {
        let dj = offsets[j + 1] - offsets[j];
        let w1_block = w.view((offsets[j], offsets[j]), (dj, dj)).into_owned();
        let w2_block = w.view((offsets[j], n + j), (dj, 1)).into_owned();
        let chol = w1_block.cholesky().ok_or(Error::SingularW1 { min_eig: min_eig.as_f64() })?;
        let solved = chol.solve(&w2_block);
        blocks.push(solved.transpose());
    }
    GainMatrix::from_blocks(structure, &blocks)
}

/// Stability and cost data for one uncertainty vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCheck<T: Scalar> {
    pub hurwitz: bool,
    pub max_real_eig: T,
    /// Squared quadratic cost of the closed loop at this vertex; absent when
    /// the vertex is unstable or its Gramian solve fails.
    pub h2_squared: Option<T>,
    pub gramian: Option<DMatrix<T>>,
}

/// Outcome of an independent closed-loop audit of a gain against a claimed
/// cost bound.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<T: Scalar> {
    /// Off-pattern entries of the gain are exactly zero.
    pub structure_ok: bool,
    /// The closed loop is Hurwitz at every vertex.
    pub all_stable: bool,
    /// Every vertex cost is below the claimed bound (with a small relative
    /// slack); implies `all_stable`.
    pub bound_ok: bool,
    /// The audited bound.
    pub bound: T,
    /// Largest per-vertex cost observed, when any vertex admitted one.
    pub worst_h2_squared: Option<T>,
    /// Largest closed-loop spectral abscissa across vertices.
    pub worst_abscissa: T,
    pub vertex_checks: Vec<VertexCheck<T>>,
}

/// Audit a gain: closed-loop eigenvalues and Gramian-based quadratic cost at
/// every uncertainty vertex, compared against the claimed bound. Per-vertex
/// numerical failures are recorded in that vertex's entry instead of
/// aborting the audit.
pub fn verify<T: Scalar>(
    plant: &PlantModel<T>,
    polytope: &UncertaintyPolytope<T>,
    gain: &GainMatrix<T>,
    bound: T,
) -> Result<VerificationReport<T>, Error> {
    let n = plant.n();
    let m = plant.m();
    if gain.matrix().shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            context: format!(
                "gain is {}×{} but the plant needs {}×{}",
                gain.matrix().nrows(),
                gain.matrix().ncols(),
                m,
                n
            ),
        });
    }
    if polytope.n() != n || polytope.p() != n + m {
        return Err(Error::DimensionMismatch {
            context: "polytope does not match the plant dimensions".to_string(),
        });
    }

    let k = gain.matrix();
    let q_gram = &plant.b1 * plant.b1.transpose();
    let c_cl = &plant.c - &plant.d * k;
    let cost_weight = c_cl.transpose() * &c_cl;

    let mut checks = Vec::with_capacity(polytope.count());
    let mut worst_abscissa = T::c(f64::NEG_INFINITY);
    let mut worst_h2: Option<T> = None;
    for i in 0..polytope.count() {
        let a_cl = polytope.a_block(i) - polytope.b2_block(i) * k;
        let (hurwitz, max_real_eig) = is_hurwitz(&a_cl);
        if !(max_real_eig <= worst_abscissa) {
            worst_abscissa = max_real_eig;
        }
        let (h2_squared, gramian) = if hurwitz {
            match lyapunov_solve(&a_cl, &q_gram) {
                Ok(wc) => {
                    let cost = (&cost_weight * &wc).trace();
                    worst_h2 = Some(match worst_h2 {
                        Some(cur) => cur.max(cost),
                        None => cost,
                    });
                    (Some(cost), Some(wc))
                }
                Err(_) => (None, None),
            }
        } else {
            (None, None)
        };
        checks.push(VertexCheck { hurwitz, max_real_eig, h2_squared, gramian });
    }

    let structure_ok = gain.respects_structure();
    let all_stable = checks.iter().all(|c| c.hurwitz);
    let slack = T::c(1e-6) * (T::one() + bound);
    let bound_ok = all_stable
        && checks
            .iter()
            .all(|c| c.h2_squared.map(|h| h <= bound + slack).unwrap_or(false));

    Ok(VerificationReport {
        structure_ok,
        all_stable,
        bound_ok,
        bound,
        worst_h2_squared: worst_h2,
        worst_abscissa,
        vertex_checks: checks,
    })
}

/// Closed-loop impulse responses: one trajectory matrix per disturbance
/// channel, each row a time sample of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse<T: Scalar> {
    pub times: Vec<T>,
    /// `states[c]` is (steps+1)×n: the state trajectory for an impulse on
    /// disturbance channel `c`.
    pub states: Vec<DMatrix<T>>,
}

impl<T: Scalar> ImpulseResponse<T> {
    pub fn channels(&self) -> usize {
        self.states.len()
    }
}

/// Integrate the closed loop ẋ = (A − B₂K)x from x(0) = B₁eᶜ for every
/// disturbance channel c, with fixed-step fourth-order Runge–Kutta.
pub fn simulate_impulse<T: Scalar>(
    plant: &PlantModel<T>,
    gain: &GainMatrix<T>,
    horizon: T,
    dt: T,
) -> Result<ImpulseResponse<T>, Error> {
    if !(dt > T::zero()) || !(horizon >= dt) {
        return Err(Error::InvalidConfig {
            context: format!(
                "need 0 < dt <= horizon, got dt {} and horizon {}",
                dt.as_f64(),
                horizon.as_f64()
            ),
        });
    }
    if gain.matrix().shape() != (plant.m(), plant.n()) {
        return Err(Error::DimensionMismatch {
            context: "gain does not match the plant dimensions".to_string(),
        });
    }
    let a_cl = &plant.a - &plant.b2 * gain.matrix();
    let steps = (horizon / dt).round().to_usize().ok_or(Error::InvalidConfig {
        context: "horizon/dt does not fit in an iteration count".to_string(),
    })?;
    let steps = steps.max(1);

    let n = plant.n();
    let times: Vec<T> = (0..=steps).map(|s| dt * T::c(s as f64)).collect();
    let mut states = Vec::with_capacity(plant.l());
    let half = T::c(0.5);
    let sixth = T::one() / T::c(6.0);
    for c in 0..plant.l() {
        let mut x = plant.b1.column(c).into_owned();
        let mut traj = DMatrix::zeros(steps + 1, n);
        traj.row_mut(0).tr_copy_from(&x);
        for s in 0..steps {
            let k1 = &a_cl * &x;
            let k2 = &a_cl * (&x + &k1 * (dt * half));
            let k3 = &a_cl * (&x + &k2 * (dt * half));
            let k4 = &a_cl * (&x + &k3 * dt);
            x += (k1 + k2 * T::c(2.0) + k3 * T::c(2.0) + k4) * (dt * sixth);
            traj.row_mut(s + 1).tr_copy_from(&x);
        }
        states.push(traj);
    }
    Ok(ImpulseResponse { times, states })
}
