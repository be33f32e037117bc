//! Deterministic random generators for the randomized test suites. All
//! callers seed explicitly, so the same seed gives the same objects on every
//! run and platform.

use rand::Rng;

use crate::hilbert::{cr, OperatorMatrix, StateVector, C64};

/// Standard-normal pair via Box-Muller.
fn gaussian(rng: &mut impl Rng) -> (f64, f64) {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let a = std::f64::consts::TAU * u2;
    (r * a.cos(), r * a.sin())
}

pub fn random_complex(rng: &mut impl Rng) -> C64 {
    let (re, im) = gaussian(rng);
    C64::new(re, im)
}

/// Unit-norm random state.
pub fn random_state(rng: &mut impl Rng, dim: usize) -> StateVector {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| random_complex(rng)).collect();
        let s = StateVector::new(v).unwrap();
        if let Ok(unit) = s.unit() {
            return unit;
        }
    }
}

/// Unitary from Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> OperatorMatrix {
    loop {
        let cols: Vec<ndarray::Array1<C64>> = (0..dim)
            .map(|_| ndarray::Array1::from((0..dim).map(|_| random_complex(rng)).collect::<Vec<_>>()))
            .collect();
        let basis = crate::hilbert::orthonormalize(&cols, 1e-6);
        if basis.len() != dim {
            continue;
        }
        let u = OperatorMatrix::from_fn(dim, |i, j| basis[j][i]);
        if u.unitary_defect() < 1e-10 {
            return u;
        }
    }
}

/// Mixed density operator with unit trace: a random convex mixture of `rank`
/// random pure states.
pub fn random_density(rng: &mut impl Rng, dim: usize, rank: usize) -> OperatorMatrix {
    let rank = rank.clamp(1, dim);
    let mut weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut rho = OperatorMatrix::zeros(dim);
    for w in weights {
        let psi = random_state(rng, dim);
        rho = &rho + &psi.projector().scaled(cr(w));
    }
    rho
}

/// A complete family of orthogonal projectors: random unitary columns
/// partitioned into `parts` consecutive groups.
pub fn random_complete_projectors(
    rng: &mut impl Rng,
    dim: usize,
    parts: usize,
) -> Vec<OperatorMatrix> {
    let parts = parts.clamp(1, dim);
    let u = random_unitary(rng, dim);
    // Group sizes: as even as possible.
    let base = dim / parts;
    let extra = dim % parts;
    let mut start = 0usize;
    let mut out = Vec::with_capacity(parts);
    for g in 0..parts {
        let size = base + usize::from(g < extra);
        let mut p = OperatorMatrix::zeros(dim);
        for col in start..start + size {
            let v: Vec<C64> = (0..dim).map(|i| u.entry(i, col)).collect();
            let ket = StateVector::new(v).unwrap();
            p = &p + &ket.projector();
        }
        out.push(p);
        start += size;
    }
    out
}

/// A random projector of the given rank.
pub fn random_projector(rng: &mut impl Rng, dim: usize, rank: usize) -> OperatorMatrix {
    let rank = rank.clamp(1, dim);
    let u = random_unitary(rng, dim);
    let mut p = OperatorMatrix::zeros(dim);
    for col in 0..rank {
        let v: Vec<C64> = (0..dim).map(|i| u.entry(i, col)).collect();
        p = &p + &StateVector::new(v).unwrap().projector();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{validate_projector_set, validate_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2, 3, 5, 8] {
            let u = random_unitary(&mut rng, dim);
            assert!(validate_unitary(&u, 1e-9));
            let rho = random_density(&mut rng, dim, 2);
            assert!(crate::hilbert::DensityOperator::new(rho).is_ok());
            let set = random_complete_projectors(&mut rng, dim, 2.min(dim));
            let check = validate_projector_set(&set, 1e-9).unwrap();
            assert!(check.valid && check.complete);
        }
    }

    #[test]
    fn seeding_is_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        let ua = random_unitary(&mut a, 4);
        let ub = random_unitary(&mut b, 4);
        assert!(ua.approx_eq(&ub, 0.0_f64.max(f64::MIN_POSITIVE)));
    }
}
