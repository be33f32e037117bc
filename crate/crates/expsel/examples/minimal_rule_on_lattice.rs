//! The smallest-selection probability rule straight on a lattice: two sharp
//! experiences partitioning a slice behind a diagonal step recover the
//! diagonal weights of the initial boundary operator.
//!
//! Run with: cargo run --example minimal_rule_on_lattice

use expsel::hilbert::{DensityOperator, OperatorMatrix, C64};
use expsel::pathsum::{
    minimal_probability, BoundaryCondition, EngineConfig, LatticeModel, SelectionEvent,
};

fn main() {
    let slices: Vec<Vec<String>> = vec![vec!["up".into(), "down".into()]; 2];
    let model = LatticeModel::from_rule(slices, |_, from, to| {
        if from == to {
            C64::from_polar(1.0, 0.7 + from as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
    .unwrap();

    let rho = DensityOperator::new(
        OperatorMatrix::from_rows(vec![
            vec![C64::new(0.7, 0.0), C64::new(0.2, 0.1)],
            vec![C64::new(0.2, -0.1), C64::new(0.3, 0.0)],
        ])
        .unwrap(),
    )
    .unwrap();
    let boundary = BoundaryCondition::new(rho, DensityOperator::identity(2));

    let experiences = vec![
        ("up".to_string(), vec![SelectionEvent::keep_one(1, 0, 2)]),
        ("down".to_string(), vec![SelectionEvent::keep_one(1, 1, 2)]),
    ];
    let table =
        minimal_probability(&model, &boundary, &[], &experiences, &EngineConfig::default())
            .unwrap();
    for (label, p) in table.entries() {
        println!("{label}: {p:.12}");
    }
    println!("applied normalization: {:.6}", table.normalization());
    assert!((table.probability("up").unwrap() - 0.7).abs() < 1e-12);
}
