//! States, operators, tensor composition over labeled factors, and the
//! structural validators.
//!
//! Run with: cargo run --example state_operator_basics

use expsel::hilbert::{
    embed, hermitian_eigenvalues, tensor, validate_projector_set, validate_unitary,
    CompositeSpace, OperatorMatrix, StateVector, C64,
};

fn main() {
    // A labeled three-factor space; the leftmost factor is most significant.
    let space = CompositeSpace::new(vec![("S", 2), ("F", 2), ("W", 2)]).unwrap();
    println!("total dimension: {}", space.total_dim());

    // Lift a single-factor projector onto the full space.
    let p0 = StateVector::basis(2, 0).projector();
    let lifted = embed(&p0, "W", &space).unwrap();
    println!("embedded projector trace: {}", lifted.trace().re);

    // Tensor products keep traces multiplicative.
    let x = OperatorMatrix::from_rows(vec![
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
    .unwrap();
    let xx = tensor(&x, &x);
    let flipped = xx.apply(&StateVector::basis(4, 0));
    println!("(X ⊗ X)|00⟩ has amplitude {} on |11⟩", flipped.amplitude(3).re);

    // Validators: a projector is not unitary, and a complete basis family
    // reports completeness separately from validity.
    println!("identity unitary?        {}", validate_unitary(&OperatorMatrix::identity(4), 1e-10));
    println!("projector unitary?       {}", validate_unitary(&p0, 1e-9));
    let p1 = StateVector::basis(2, 1).projector();
    let check = validate_projector_set(&[p0, p1], 1e-9).unwrap();
    println!("basis family valid: {}, complete: {}", check.valid, check.complete);

    // Eigenvalues of a small Hermitian matrix.
    let h = OperatorMatrix::from_rows(vec![
        vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
        vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
    ])
    .unwrap();
    println!("eigenvalues: {:?}", hermitian_eigenvalues(&h));
}
