//! Conic program assembly: the dual variable layout, the sparsity selector
//! pairs that pin off-pattern entries of the decision variable to zero, and
//! the linear operators the solver iterates with.
//!
//! The decision variable of the underlying design problem is a symmetric
//! p×p matrix W (p = n + m) whose top-left n×n block must be block-diagonal
//! and whose top-right n×m block must follow the same block pattern. The
//! dual variable is one p×p multiplier for the cone constraint on W itself,
//! one n×n multiplier per uncertainty vertex, and one small rectangular
//! multiplier per pinned sparsity pair.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::model::{
    build_extended, symmetrize, validate_plant, BlockStructure, ExtendedData, PlantModel,
    UncertaintyPolytope,
};
use crate::scalar::Scalar;

/// One pinned sparsity pattern: the constraint `left · W · right = 0`.
///
/// `left` (v₁×p) selects rows and `right` (p×v₂) selects columns of the
/// decision variable; both are slices of the identity, so `left·leftᵀ = I`,
/// `rightᵀ·right = I`, and `left·right = 0` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorPair<T: Scalar> {
    pub left: DMatrix<T>,
    pub right: DMatrix<T>,
}

/// All sparsity selector pairs for a block structure, in a fixed order:
/// first the strictly-upper off-diagonal block pairs of the state part,
/// then every ordered pair coupling a state block to another block's input
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsitySelectors<T: Scalar> {
    pairs: Vec<SelectorPair<T>>,
}

impl<T: Scalar> SparsitySelectors<T> {
    pub fn pairs(&self) -> &[SelectorPair<T>] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn identity_rows<T: Scalar>(rows: &[usize], p: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(rows.len(), p);
    for (i, &r) in rows.iter().enumerate() {
        m[(i, r)] = T::one();
    }
    m
}

fn identity_cols<T: Scalar>(cols: &[usize], p: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(p, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        m[(c, j)] = T::one();
    }
    m
}

/// Build the selector pairs that pin every off-pattern entry of the decision
/// variable to zero. For `m` blocks this yields 3·m·(m−1)/2 pairs.
pub fn build_selectors<T: Scalar>(structure: &BlockStructure) -> SparsitySelectors<T> {
    let m = structure.m();
    let n = structure.n();
    let p = n + m;
    let offsets = structure.offsets();
    let state_rows = |blk: usize| -> Vec<usize> { (offsets[blk]..offsets[blk + 1]).collect() };

    let mut pairs = Vec::with_capacity(3 * m * (m.saturating_sub(1)) / 2);
    // Off-diagonal blocks of the state part; symmetry of W makes one
    // triangle sufficient.
    for a in 0..m {
        for b in (a + 1)..m {
            pairs.push(SelectorPair {
                left: identity_rows(&state_rows(a), p),
                right: identity_cols(&state_rows(b), p),
            });
        }
    }
    // Couplings between a state block and a different block's input column.
    for a in 0..m {
        for b in 0..m {
            if b == a {
                continue;
            }
            pairs.push(SelectorPair {
                left: identity_rows(&state_rows(a), p),
                right: identity_cols(&[n + b], p),
            });
        }
    }
    SparsitySelectors { pairs }
}

/// The assembled conic program: extended data, uncertainty vertices,
/// sparsity selectors, and the per-vertex products the solver reuses every
/// iteration.
#[derive(Debug, Clone)]
pub struct ConicProblem<T: Scalar> {
    extended: ExtendedData<T>,
    vertices: Vec<DMatrix<T>>,
    selectors: SparsitySelectors<T>,
    structure: BlockStructure,
    /// V·Q·Vᵀ, the n×n restriction of the disturbance weight.
    vqv: DMatrix<T>,
    /// V·Fᵢ per vertex (n×p).
    vf: Vec<DMatrix<T>>,
    /// (V·Fᵢ)(V·Fᵢ)ᵀ per vertex (n×n).
    h: Vec<DMatrix<T>>,
    /// (V·Fᵢ)·Vᵀ per vertex (n×n).
    b: Vec<DMatrix<T>>,
}

impl<T: Scalar> ConicProblem<T> {
    /// Assemble the program for a validated plant, an enumerated uncertainty
    /// polytope, and a block structure. Re-runs plant validation so an
    /// inconsistent plant cannot slip in through this entry point.
    pub fn new(
        plant: &PlantModel<T>,
        polytope: &UncertaintyPolytope<T>,
        structure: BlockStructure,
    ) -> Result<Self, Error> {
        let plant = validate_plant(plant.clone())?;
        let (n, m) = (plant.n(), plant.m());
        if structure.n() != n || structure.m() != m {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "block structure covers {} states and {} blocks but the plant has {} states and {} inputs",
                    structure.n(),
                    structure.m(),
                    n,
                    m
                ),
            });
        }
        if polytope.n() != n || polytope.p() != n + m {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "polytope vertices are {}×{} with state split {}, expected {}×{} with state split {}",
                    polytope.p(),
                    polytope.p(),
                    polytope.n(),
                    n + m,
                    n + m,
                    n
                ),
            });
        }
        let extended = build_extended(&plant);
        let selectors = build_selectors(&structure);
        let vqv = symmetrize(&(&extended.v * &extended.q * extended.v.transpose()));
        let vertices: Vec<DMatrix<T>> = polytope.vertices().to_vec();
        let vf: Vec<DMatrix<T>> = vertices.iter().map(|f| &extended.v * f).collect();
        let h: Vec<DMatrix<T>> = vf.iter().map(|vf| symmetrize(&(vf * vf.transpose()))).collect();
        let b: Vec<DMatrix<T>> = vf.iter().map(|vf| vf * extended.v.transpose()).collect();
        Ok(Self { extended, vertices, selectors, structure, vqv, vf, h, b })
    }

    pub fn extended(&self) -> &ExtendedData<T> {
        &self.extended
    }

    pub fn structure(&self) -> &BlockStructure {
        &self.structure
    }

    pub fn selectors(&self) -> &SparsitySelectors<T> {
        &self.selectors
    }

    /// Number of uncertainty vertices M.
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of pinned sparsity pairs N.
    pub fn num_equalities(&self) -> usize {
        self.selectors.len()
    }

    /// Total number of dual slots: the cone multiplier, one slot per vertex,
    /// one per sparsity pair.
    pub fn num_slots(&self) -> usize {
        1 + self.num_vertices() + self.num_equalities()
    }

    pub fn p(&self) -> usize {
        self.extended.p()
    }

    pub fn n(&self) -> usize {
        self.extended.n()
    }

    pub fn m(&self) -> usize {
        self.extended.m()
    }

    /// Extended vertex matrix Fᵢ (p×p).
    pub fn vertex_f(&self, i: usize) -> &DMatrix<T> {
        &self.vertices[i]
    }

    /// V·Q·Vᵀ.
    pub fn vqv(&self) -> &DMatrix<T> {
        &self.vqv
    }

    /// V·Fᵢ.
    pub fn vf(&self, i: usize) -> &DMatrix<T> {
        &self.vf[i]
    }

    /// (V·Fᵢ)(V·Fᵢ)ᵀ.
    pub fn h_block(&self, i: usize) -> &DMatrix<T> {
        &self.h[i]
    }

    /// (V·Fᵢ)·Vᵀ.
    pub fn b_block(&self, i: usize) -> &DMatrix<T> {
        &self.b[i]
    }
}

/// A point in the dual space: the cone multiplier `x0` (p×p), one n×n
/// multiplier per uncertainty vertex, and one v₁×v₂ multiplier per sparsity
/// pair. The same layout carries images of the forward map
/// [`apply_G`], so it doubles as an element of the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint<T: Scalar> {
    pub x0: DMatrix<T>,
    pub xi: Vec<DMatrix<T>>,
    pub xeq: Vec<DMatrix<T>>,
}

impl<T: Scalar> DualPoint<T> {
    /// The origin of the dual space for a given problem.
    pub fn zeros(problem: &ConicProblem<T>) -> Self {
        let p = problem.p();
        let n = problem.n();
        Self {
            x0: DMatrix::zeros(p, p),
            xi: (0..problem.num_vertices()).map(|_| DMatrix::zeros(n, n)).collect(),
            xeq: problem
                .selectors()
                .pairs()
                .iter()
                .map(|pair| DMatrix::zeros(pair.left.nrows(), pair.right.ncols()))
                .collect(),
        }
    }

    /// Whether every entry of every component is finite.
    pub fn is_finite(&self) -> bool {
        let finite = |m: &DMatrix<T>| m.iter().all(|x| x.is_finite());
        finite(&self.x0) && self.xi.iter().all(&finite) && self.xeq.iter().all(&finite)
    }
}

/// Forward map of the design variable into the product space:
/// the identity slot, the per-vertex affine cone terms
/// −V(FᵢW + WFᵢᵀ + Q)Vᵀ, and the pinned products `left·W·right`.
pub fn apply_g<T: Scalar>(problem: &ConicProblem<T>, w: &DMatrix<T>) -> DualPoint<T> {
    let p = problem.p();
    debug_assert_eq!(w.nrows(), p);
    debug_assert_eq!(w.ncols(), p);
    let v = &problem.extended().v;
    let xi = (0..problem.num_vertices())
        .map(|i| {
            let t = problem.vf(i) * w * v.transpose();
            -(&t + t.transpose() + problem.vqv())
        })
        .collect();
    let xeq = problem
        .selectors()
        .pairs()
        .iter()
        .map(|pair| &pair.left * w * &pair.right)
        .collect();
    DualPoint { x0: w.clone(), xi, xeq }
}

/// The additive p×p term a single dual slot contributes to [`apply_a`].
/// Slot 0 is the cone multiplier; slots 1..=M the vertex multipliers; slots
/// M+1..=M+N the sparsity multipliers.
pub fn slot_contribution<T: Scalar>(
    problem: &ConicProblem<T>,
    x: &DualPoint<T>,
    slot: usize,
) -> DMatrix<T> {
    let m_count = problem.num_vertices();
    if slot == 0 {
        return -&x.x0;
    }
    if slot <= m_count {
        let i = slot - 1;
        let v = &problem.extended().v;
        let t = problem.vf(i).transpose() * &x.xi[i] * v;
        return &t + t.transpose();
    }
    let j = slot - 1 - m_count;
    let pair = &problem.selectors().pairs()[j];
    let s = pair.left.transpose() * &x.xeq[j] * pair.right.transpose() * T::c(0.5);
    &s + s.transpose()
}

/// Adjoint of [`apply_g`] with the vertex and sparsity components negated:
/// the p×p matrix −X₀ + Σᵢ(FᵢᵀVᵀXᵢV + VᵀXᵢVFᵢ) + ½Σⱼ(leftᵀ·Xⱼ·rightᵀ + …ᵀ).
pub fn apply_a<T: Scalar>(problem: &ConicProblem<T>, x: &DualPoint<T>) -> DMatrix<T> {
    let mut acc = -&x.x0;
    for slot in 1..problem.num_slots() {
        acc += slot_contribution(problem, x, slot);
    }
    acc
}

/// Same sum as [`apply_a`] but skipping one slot. The skipped slot's term is
/// never formed, so the result is free of cancellation against it.
pub fn apply_a_excluding<T: Scalar>(
    problem: &ConicProblem<T>,
    x: &DualPoint<T>,
    skip: usize,
) -> DMatrix<T> {
    debug_assert!(skip < problem.num_slots());
    let p = problem.p();
    let mut acc = DMatrix::zeros(p, p);
    for slot in 0..problem.num_slots() {
        if slot == skip {
            continue;
        }
        acc += slot_contribution(problem, x, slot);
    }
    acc
}

/// Dual objective: −⟨Σᵢ Xᵢ, V·Q·Vᵀ⟩. At a converged dual point this equals
/// the guaranteed-cost bound of the primal design.
pub fn eval_dual_objective<T: Scalar>(problem: &ConicProblem<T>, x: &DualPoint<T>) -> T {
    let mut total = T::zero();
    for xi in &x.xi {
        total += xi.dot(problem.vqv());
    }
    -total
}
