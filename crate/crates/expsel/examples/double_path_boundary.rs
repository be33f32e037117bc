//! The doubled configuration-pair sum with a factorized boundary operator:
//! unitarity keeps the no-selection value at one, and sharp selections
//! reproduce the operator-form trace.
//!
//! Run with: cargo run --example double_path_boundary

use expsel::hilbert::{DensityOperator, StateVector, C64};
use expsel::pathsum::{
    double_path_functional, propagator, BoundaryCondition, EngineConfig, LatticeModel,
    SelectionEvent,
};

fn main() {
    // A two-configuration lattice with unitary rotation steps.
    let angle: f64 = 0.6;
    let slices: Vec<Vec<String>> = vec![vec!["a".into(), "b".into()]; 3];
    let model = LatticeModel::from_rule(slices, move |_, from, to| {
        let m = [
            [angle.cos(), -angle.sin()],
            [angle.sin(), angle.cos()],
        ];
        C64::new(m[to][from], 0.0)
    })
    .unwrap();
    let cfg = EngineConfig::default();

    let psi = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)]).unwrap();
    let boundary = BoundaryCondition::pure_identity(&psi).unwrap();

    // Unitary steps, pure normalized start, identity end: the doubled sum is 1.
    let plain = double_path_functional(&model, &boundary, &[], &cfg).unwrap();
    println!("no-selection doubled sum: {:.12} {:+.3e}i", plain.re, plain.im);

    // Sharp selection on the middle slice, applied to both branches.
    let sel = SelectionEvent::keep_one(1, 0, 2);
    let selected = double_path_functional(&model, &boundary, &[sel.clone()], &cfg).unwrap();
    println!("selected doubled sum:     {:.12}", selected.re);

    // Operator-form oracle: Tr[rho_F K rho_I K†] with the selected propagator.
    let k = propagator(&model, &[sel], &cfg).unwrap();
    let k_dag = k.t().mapv(|z| z.conj());
    let rho_i = DensityOperator::from_pure(&psi).unwrap();
    let trace: C64 = k.dot(rho_i.op().array()).dot(&k_dag).diag().sum();
    println!("operator-form value:      {:.12}", trace.re);
    assert!((selected - trace).norm() < 1e-12);
}
