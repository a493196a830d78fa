//! Shared fixtures for the integration suites: the three-state benchmark
//! plant, small analytic plants, and assembled conic programs for each.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rdh2_core::conic::ConicProblem;
use rdh2_core::model::{
    enumerate_vertices, validate_plant, BlockStructure, PlantModel, UncertainEntry,
    UncertaintySpec, UncertaintyPolytope,
};

pub type Setup = (PlantModel<f64>, UncertaintyPolytope<f64>, ConicProblem<f64>);

/// Three states, two inputs, identity disturbance, one weighted state and
/// both inputs weighted; feedback blocks of sizes 2 and 1.
pub fn bench_plant() -> PlantModel<f64> {
    validate_plant(PlantModel::new(
        DMatrix::from_row_slice(
            3,
            3,
            &[0.1054, 0.6248, 0.1958, 0.2393, 0.6948, 0.6950, 0.4520, 0.3189, 0.8708],
        ),
        DMatrix::identity(3, 3),
        DMatrix::from_row_slice(3, 2, &[0.9315, 0.7939, 0.9722, 0.1061, 0.5317, 0.7750]),
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
    ))
    .expect("benchmark plant is valid")
}

pub fn bench_structure() -> BlockStructure {
    BlockStructure::new(vec![2, 1]).unwrap()
}

/// ±5% interval uncertainty on the leading k entries of the state matrix
/// (row-major over the leading principal submatrix): k ∈ {0, 1, 4, 9}.
pub fn bench_uncertainty(k: usize) -> UncertaintySpec<f64> {
    let coords: &[(usize, usize)] = match k {
        0 => &[],
        1 => &[(0, 0)],
        4 => &[(0, 0), (0, 1), (1, 0), (1, 1)],
        9 => &[
            (0, 0),
            (0, 1),
            (0, 2),
            (1, 0),
            (1, 1),
            (1, 2),
            (2, 0),
            (2, 1),
            (2, 2),
        ],
        _ => panic!("unsupported uncertain-entry count {k}"),
    };
    UncertaintySpec::new(
        coords
            .iter()
            .map(|&(row, col)| UncertainEntry { row, col, relative_magnitude: 0.05 })
            .collect(),
    )
}

/// Benchmark plant with 2^k uncertainty vertices and the (2, 1) block split.
pub fn bench_setup(k: usize) -> Setup {
    let plant = bench_plant();
    let polytope = enumerate_vertices(&plant, &bench_uncertainty(k)).unwrap();
    let problem = ConicProblem::new(&plant, &polytope, bench_structure()).unwrap();
    (plant, polytope, problem)
}

/// One unstable state, one input, no uncertainty; optimum known in closed
/// form.
pub fn scalar_toy_setup() -> Setup {
    let plant = validate_plant(PlantModel::new(
        DMatrix::from_row_slice(1, 1, &[1.0]),
        DMatrix::from_row_slice(1, 1, &[1.0]),
        DMatrix::from_row_slice(1, 1, &[1.0]),
        DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
        DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
    ))
    .unwrap();
    let polytope = enumerate_vertices(&plant, &UncertaintySpec::empty()).unwrap();
    let structure = BlockStructure::new(vec![1]).unwrap();
    let problem = ConicProblem::new(&plant, &polytope, structure).unwrap();
    (plant, polytope, problem)
}

/// Two decoupled copies of the scalar toy, so every sparsity pair is active
/// while the optimum stays known in closed form.
pub fn two_block_setup() -> Setup {
    let plant = validate_plant(PlantModel::new(
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2),
        DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
        DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
    ))
    .unwrap();
    let polytope = enumerate_vertices(&plant, &UncertaintySpec::empty()).unwrap();
    let structure = BlockStructure::new(vec![1, 1]).unwrap();
    let problem = ConicProblem::new(&plant, &polytope, structure).unwrap();
    (plant, polytope, problem)
}

/// A chain whose first state is disturbed but reachable by no decentralized
/// input: the cone constraint's (0,0) entry is identically one on the
/// structured subspace, so no feasible design exists.
pub fn infeasible_setup() -> Setup {
    let plant = validate_plant(PlantModel::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        DMatrix::identity(2, 2),
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
        DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
    ))
    .unwrap();
    let polytope = enumerate_vertices(&plant, &UncertaintySpec::empty()).unwrap();
    let structure = BlockStructure::new(vec![1, 1]).unwrap();
    let problem = ConicProblem::new(&plant, &polytope, structure).unwrap();
    (plant, polytope, problem)
}
