//! Uncertain plant description, decentralized block pattern, and the
//! extended matrices consumed by the conic assembly.
//!
//! The plant is the linear system ẋ = Ax + B₁w + B₂u with performance output
//! z = Cx + Du. Entrywise relative perturbations on A span a polytope whose
//! vertices are enumerated explicitly; each vertex is packed into an extended
//! square matrix so that the downstream operators act on a single space of
//! dimension p = n + m.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::numerics::eig_sym;
use crate::scalar::Scalar;

/// Largest admissible vertex count for [`enumerate_vertices`].
pub const DEFAULT_VERTEX_CAP: usize = 1 << 20;

/// State-space data of the synthesis plant.
///
/// Shapes: `a` is n×n, `b1` n×l (disturbance), `b2` n×m (control),
/// `c` q×n (state weighting rows), `d` q×m (input weighting rows).
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel<T: Scalar> {
    pub a: DMatrix<T>,
    pub b1: DMatrix<T>,
    pub b2: DMatrix<T>,
    pub c: DMatrix<T>,
    pub d: DMatrix<T>,
}

impl<T: Scalar> PlantModel<T> {
    pub fn new(
        a: DMatrix<T>,
        b1: DMatrix<T>,
        b2: DMatrix<T>,
        c: DMatrix<T>,
        d: DMatrix<T>,
    ) -> Self {
        Self { a, b1, b2, c, d }
    }

    /// Number of states.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of control inputs.
    pub fn m(&self) -> usize {
        self.b2.ncols()
    }

    /// Number of disturbance channels.
    pub fn l(&self) -> usize {
        self.b1.ncols()
    }

    /// Number of performance outputs.
    pub fn q(&self) -> usize {
        self.c.nrows()
    }
}

/// Sizes D₁..D_m of the state groups owned by each controller; the gain is
/// constrained to the block-diagonal pattern these sizes induce, one row of
/// gains per group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    block_sizes: Vec<usize>,
}

impl BlockStructure {
    pub fn new(block_sizes: Vec<usize>) -> Result<Self, Error> {
        if block_sizes.is_empty() {
            return Err(Error::InvalidConfig {
                context: "block structure needs at least one block".into(),
            });
        }
        if block_sizes.contains(&0) {
            return Err(Error::InvalidConfig {
                context: "every block size must be at least 1".into(),
            });
        }
        Ok(Self { block_sizes })
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Total state dimension ΣD_j.
    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Number of blocks (= number of control inputs in this formulation).
    pub fn m(&self) -> usize {
        self.block_sizes.len()
    }

    /// Starting state index of each block (length m+1, last entry = n).
    pub fn offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.block_sizes.len() + 1);
        let mut acc = 0;
        offs.push(0);
        for &s in &self.block_sizes {
            acc += s;
            offs.push(acc);
        }
        offs
    }
}

/// One relative perturbation of an entry of A: the entry ranges over
/// `nominal·(1 ± relative_magnitude)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainEntry<T: Scalar> {
    pub row: usize,
    pub col: usize,
    pub relative_magnitude: T,
}

/// Set of independently perturbed entries of A. An empty set describes a
/// precisely known plant.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySpec<T: Scalar> {
    pub entries: Vec<UncertainEntry<T>>,
}

impl<T: Scalar> UncertaintySpec<T> {
    pub fn new(entries: Vec<UncertainEntry<T>>) -> Self {
        Self { entries }
    }

    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T: Scalar> Default for UncertaintySpec<T> {
    fn default() -> Self {
        Self::empty()
    }
}

/// The extreme systems of the uncertainty polytope, each packed as the
/// extended p×p matrix `[[A_i, −B₂],[0, 0]]` with p = n + m.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyPolytope<T: Scalar> {
    vertices: Vec<DMatrix<T>>,
    n: usize,
}

impl<T: Scalar> UncertaintyPolytope<T> {
    /// Wrap explicit extended vertices. Every vertex must be square of the
    /// same size p > n with its lower p−n rows exactly zero.
    pub fn new(vertices: Vec<DMatrix<T>>, n: usize) -> Result<Self, Error> {
        if vertices.is_empty() {
            return Err(Error::InvalidConfig {
                context: "polytope needs at least one vertex".into(),
            });
        }
        let p = vertices[0].nrows();
        if p <= n {
            return Err(Error::DimensionMismatch {
                context: format!("extended dimension {p} must exceed state dimension {n}"),
            });
        }
        for (i, f) in vertices.iter().enumerate() {
            if f.nrows() != p || f.ncols() != p {
                return Err(Error::DimensionMismatch {
                    context: format!(
                        "vertex {i} is {}×{}, expected {p}×{p}",
                        f.nrows(),
                        f.ncols()
                    ),
                });
            }
            for r in n..p {
                for c in 0..p {
                    if f[(r, c)] != T::zero() {
                        return Err(Error::InvalidConfig {
                            context: format!(
                                "vertex {i} has a nonzero entry at ({r}, {c}); \
                                 rows {n}.. must be exactly zero"
                            ),
                        });
                    }
                }
            }
        }
        Ok(Self { vertices, n })
    }

    /// Number of vertices M.
    pub fn count(&self) -> usize {
        self.vertices.len()
    }

    /// Extended dimension p = n + m.
    pub fn p(&self) -> usize {
        self.vertices[0].nrows()
    }

    /// State dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[DMatrix<T>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &DMatrix<T> {
        &self.vertices[i]
    }

    /// The A matrix of vertex `i` (leading n×n block).
    pub fn a_block(&self, i: usize) -> DMatrix<T> {
        self.vertices[i].view((0, 0), (self.n, self.n)).into_owned()
    }

    /// The B₂ matrix of vertex `i` (negated upper-right block).
    pub fn b2_block(&self, i: usize) -> DMatrix<T> {
        let p = self.p();
        -self.vertices[i]
            .view((0, self.n), (self.n, p - self.n))
            .into_owned()
    }
}

/// Constant matrices of the lifted program on the extended space:
/// `q = blkdiag(B₁B₁ᵀ, 0)` (disturbance intensity), `r = blkdiag(CᵀC, DᵀD)`
/// (cost weight), `v = [I_n 0]` (state extractor), and the inert companion
/// `g = [0; I_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedData<T: Scalar> {
    pub q: DMatrix<T>,
    pub r: DMatrix<T>,
    pub v: DMatrix<T>,
    pub g: DMatrix<T>,
}

impl<T: Scalar> ExtendedData<T> {
    /// Extended dimension p = n + m.
    pub fn p(&self) -> usize {
        self.q.nrows()
    }

    /// State dimension n.
    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    /// Input dimension m.
    pub fn m(&self) -> usize {
        self.g.ncols()
    }
}

/// Check every structural requirement on the plant matrices and hand the
/// plant back unchanged if they all hold.
///
/// Requirements: mutually consistent shapes, no cross weighting (CᵀD = 0 up
/// to round-off), and a positive-definite input weight DᵀD.
pub fn validate_plant<T: Scalar>(plant: PlantModel<T>) -> Result<PlantModel<T>, Error> {
    let (n, m, l, q) = (plant.n(), plant.m(), plant.l(), plant.q());
    if n == 0 || m == 0 || l == 0 || q == 0 {
        return Err(Error::DimensionMismatch {
            context: "all of n, m, l, q must be positive".into(),
        });
    }
    if plant.a.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: format!("A is {}×{}, expected square", plant.a.nrows(), plant.a.ncols()),
        });
    }
    if plant.b1.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: format!("B1 has {} rows, expected {n}", plant.b1.nrows()),
        });
    }
    if plant.b2.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: format!("B2 has {} rows, expected {n}", plant.b2.nrows()),
        });
    }
    if plant.c.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: format!("C has {} columns, expected {n}", plant.c.ncols()),
        });
    }
    if plant.d.nrows() != q || plant.d.ncols() != m {
        return Err(Error::DimensionMismatch {
            context: format!(
                "D is {}×{}, expected {q}×{m}",
                plant.d.nrows(),
                plant.d.ncols()
            ),
        });
    }

    // No cross weighting: every entry of CᵀD must vanish up to round-off in
    // the product scale.
    let ctd = plant.c.transpose() * &plant.d;
    let scale = T::one().max(plant.c.norm() * plant.d.norm());
    let max_abs = ctd.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    if max_abs > T::c(1e-12) * scale {
        return Err(Error::CrossWeighting { max_abs: max_abs.as_f64() });
    }

    let dtd = plant.d.transpose() * &plant.d;
    let eig = eig_sym(&dtd);
    let min_eig = *eig.values.last().expect("DᵀD has at least one eigenvalue");
    if min_eig <= T::zero() {
        return Err(Error::SingularControlWeight { min_eig: min_eig.as_f64() });
    }

    Ok(plant)
}

/// Enumerate all sign combinations of the relative perturbations with the
/// default vertex cap. See [`enumerate_vertices_capped`].
pub fn enumerate_vertices<T: Scalar>(
    plant: &PlantModel<T>,
    spec: &UncertaintySpec<T>,
) -> Result<UncertaintyPolytope<T>, Error> {
    enumerate_vertices_capped(plant, spec, DEFAULT_VERTEX_CAP)
}

/// Enumerate all 2^k extreme systems of a k-entry perturbation set.
///
/// Vertex `v` perturbs entry `t` to its upper value when bit `t` of `v` is
/// set and to its lower value otherwise, so vertex 0 is the all-lower system
/// and vertex 2^k−1 the all-upper one. Each vertex is packed as the extended
/// matrix `[[A_v, −B₂],[0, 0]]`.
pub fn enumerate_vertices_capped<T: Scalar>(
    plant: &PlantModel<T>,
    spec: &UncertaintySpec<T>,
    cap: usize,
) -> Result<UncertaintyPolytope<T>, Error> {
    let n = plant.n();
    let m = plant.m();
    let p = n + m;
    let k = spec.entries.len();

    for (t, e) in spec.entries.iter().enumerate() {
        if e.row >= n || e.col >= n {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "perturbation {t} addresses entry ({}, {}) outside the {n}×{n} dynamics",
                    e.row, e.col
                ),
            });
        }
        if e.relative_magnitude < T::zero() {
            return Err(Error::InvalidConfig {
                context: format!("perturbation {t} has a negative magnitude"),
            });
        }
    }
    if k >= usize::BITS as usize - 1 || (1usize << k) > cap {
        return Err(Error::TooManyVertices { entries: k, cap });
    }

    let count = 1usize << k;
    let mut vertices = Vec::with_capacity(count);
    for v in 0..count {
        let mut a_v = plant.a.clone();
        for (t, e) in spec.entries.iter().enumerate() {
            let factor = if (v >> t) & 1 == 1 {
                T::one() + e.relative_magnitude
            } else {
                T::one() - e.relative_magnitude
            };
            a_v[(e.row, e.col)] = plant.a[(e.row, e.col)] * factor;
        }
        let mut f = DMatrix::zeros(p, p);
        f.view_mut((0, 0), (n, n)).copy_from(&a_v);
        f.view_mut((0, n), (n, m)).copy_from(&(-&plant.b2));
        vertices.push(f);
    }
    UncertaintyPolytope::new(vertices, n)
}

/// Assemble the constant extended matrices of the lifted program.
pub fn build_extended<T: Scalar>(plant: &PlantModel<T>) -> ExtendedData<T> {
    let n = plant.n();
    let m = plant.m();
    let p = n + m;

    let b1b1t = &plant.b1 * plant.b1.transpose();
    let mut q = DMatrix::zeros(p, p);
    q.view_mut((0, 0), (n, n)).copy_from(&b1b1t);
    let q = symmetrize(&q);

    let ctc = plant.c.transpose() * &plant.c;
    let dtd = plant.d.transpose() * &plant.d;
    let mut r = DMatrix::zeros(p, p);
    r.view_mut((0, 0), (n, n)).copy_from(&ctc);
    r.view_mut((n, n), (m, m)).copy_from(&dtd);
    let r = symmetrize(&r);

    let mut v = DMatrix::zeros(n, p);
    v.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));

    let mut g = DMatrix::zeros(p, m);
    g.view_mut((n, 0), (m, m)).copy_from(&DMatrix::identity(m, m));

    ExtendedData { q, r, v, g }
}

/// The plant as seen at one vertex of the polytope: A (and B₂) replaced by
/// the vertex values, everything else nominal.
pub fn vertex_plant<T: Scalar>(
    plant: &PlantModel<T>,
    polytope: &UncertaintyPolytope<T>,
    index: usize,
) -> Result<PlantModel<T>, Error> {
    if index >= polytope.count() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "vertex index {index} out of range for {} vertices",
                polytope.count()
            ),
        });
    }
    if polytope.n() != plant.n() || polytope.p() != plant.n() + plant.m() {
        return Err(Error::DimensionMismatch {
            context: "polytope dimensions do not match the plant".into(),
        });
    }
    Ok(PlantModel {
        a: polytope.a_block(index),
        b1: plant.b1.clone(),
        b2: polytope.b2_block(index),
        c: plant.c.clone(),
        d: plant.d.clone(),
    })
}

/// (M + Mᵀ)/2.
pub fn symmetrize<T: Scalar>(mat: &DMatrix<T>) -> DMatrix<T> {
    let half = T::c(0.5);
    (mat + mat.transpose()) * half
}
