//! Finite-dimensional complex linear algebra: state vectors, dense square
//! operators, validated density and projector structure, and tensor
//! composition over labeled factors.
//!
//! Everything here is dense, double precision, and immutable after
//! construction. Comparisons take explicit tolerances; the crate-wide
//! defaults are [`EQ_TOL`] for numerical equality and [`VALIDATION_TOL`]
//! for structural validation (unitarity, projector sets).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Default tolerance for numerical equality.
pub const EQ_TOL: f64 = 1e-10;

/// Default tolerance for structural validation.
pub const VALIDATION_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A ket in a finite-dimensional space, stored as dense amplitudes in the
/// computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<C64>,
    normalized: bool,
}

impl StateVector {
    /// Builds a state from raw amplitudes. The `normalized` flag is set iff
    /// the Euclidean norm is within [`EQ_TOL`] of one.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("state vector needs dim >= 1".into()));
        }
        let amplitudes = Array1::from(amplitudes);
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(StateVector {
            normalized: (norm - 1.0).abs() < EQ_TOL,
            amplitudes,
        })
    }

    /// Computational basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amplitudes = Array1::zeros(dim);
        amplitudes[index] = cr(1.0);
        StateVector { amplitudes, normalized: true }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// True iff the constructor found the norm within [`EQ_TOL`] of one.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amplitudes[i]
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tensor product with `other`, this factor outermost.
    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in self.amplitudes.iter() {
            for b in other.amplitudes.iter() {
                out.push(a * b);
            }
        }
        let amplitudes = Array1::from(out);
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        StateVector { normalized: (norm - 1.0).abs() < EQ_TOL, amplitudes }
    }

    /// Rank-one projector |ψ⟩⟨ψ|.
    pub fn projector(&self) -> OperatorMatrix {
        let d = self.dim();
        OperatorMatrix::from_fn(d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    pub fn scaled(&self, z: C64) -> StateVector {
        let amplitudes = self.amplitudes.mapv(|a| a * z);
        let norm = amplitudes.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        StateVector { normalized: (norm - 1.0).abs() < EQ_TOL, amplitudes }
    }

    /// Unit-norm copy; errors on the zero vector.
    pub fn unit(&self) -> Result<StateVector> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(self.scaled(cr(1.0 / n)))
    }
}

/// A dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn from_array(entries: Array2<C64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::DimensionMismatch {
                context: "operator matrix must be square with dim >= 1".into(),
                expected: r.max(1),
                got: c,
            });
        }
        Ok(OperatorMatrix { entries })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: format!("row {i} of operator matrix"),
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, z) in row.iter().enumerate() {
                entries[[i, j]] = *z;
            }
        }
        OperatorMatrix::from_array(entries)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                entries[[i, j]] = f(i, j);
            }
        }
        OperatorMatrix { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix { entries: Array2::zeros((dim, dim)) }
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix { entries: Array2::eye(dim) }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        OperatorMatrix::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[[i, j]]
    }

    pub fn array(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_array(self) -> Array2<C64> {
        self.entries
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix { entries: self.entries.t().mapv(|z| z.conj()) }
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn scaled(&self, z: C64) -> OperatorMatrix {
        OperatorMatrix { entries: self.entries.mapv(|a| a * z) }
    }

    /// Matrix-vector application.
    pub fn apply(&self, psi: &StateVector) -> StateVector {
        assert_eq!(self.dim(), psi.dim(), "apply dimension mismatch");
        let out = self.entries.dot(psi.amplitudes());
        let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        StateVector { normalized: (norm - 1.0).abs() < EQ_TOL, amplitudes: out }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &OperatorMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && (self - other).max_abs() < tol
    }

    /// max |A − A†| over entries.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = (self.entries[[i, j]] - self.entries[[j, i]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// max |A†A − I| over entries.
    pub fn unitary_defect(&self) -> f64 {
        let prod = self.adjoint().entries.dot(&self.entries);
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { cr(1.0) } else { cr(0.0) };
                worst = worst.max((prod[[i, j]] - want).norm());
            }
        }
        worst
    }

    /// Returns `Some(c)` when the matrix equals `c · I` within `tol` entrywise.
    pub fn scalar_identity(&self, tol: f64) -> Option<C64> {
        let c = self.entries[[0, 0]];
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { c } else { cr(0.0) };
                if (self.entries[[i, j]] - want).norm() >= tol {
                    return None;
                }
            }
        }
        Some(c)
    }
}

impl std::ops::Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix product dimension mismatch");
        OperatorMatrix { entries: self.entries.dot(&rhs.entries) }
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix sum dimension mismatch");
        OperatorMatrix { entries: &self.entries + &rhs.entries }
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix difference dimension mismatch");
        OperatorMatrix { entries: &self.entries - &rhs.entries }
    }
}

/// A positive-semidefinite boundary operator. Hermitian within 1e-10
/// entrywise, eigenvalues above −1e-10, and positive trace. Normalization to
/// unit trace is not required; the identity is a legal final boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: OperatorMatrix,
}

impl DensityOperator {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let herm = op.hermitian_defect();
        if herm >= EQ_TOL {
            return Err(Error::InvalidDensity {
                detail: format!("not Hermitian (defect {herm:.3e})"),
            });
        }
        let eigs = hermitian_eigenvalues(&op);
        if let Some(min) = eigs.first() {
            if *min < -EQ_TOL {
                return Err(Error::InvalidDensity {
                    detail: format!("negative eigenvalue {min:.3e}"),
                });
            }
        }
        let tr = op.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidDensity {
                detail: format!("trace {tr:.3e} is not positive"),
            });
        }
        Ok(DensityOperator { op })
    }

    pub fn identity(dim: usize) -> Self {
        DensityOperator { op: OperatorMatrix::identity(dim) }
    }

    /// |ψ⟩⟨ψ| for a non-zero state (normalization is not required).
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        if psi.norm_sqr() < 1e-14 {
            return Err(Error::InvalidDensity {
                detail: "pure boundary state has zero norm".into(),
            });
        }
        Ok(DensityOperator { op: psi.projector() })
    }

    pub fn op(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }
}

/// An ordered tensor product of labeled factors. The leftmost factor is the
/// most significant index (row-major composite indexing).
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSpace {
    factors: Vec<(String, usize)>,
}

impl CompositeSpace {
    pub fn new<L: Into<String>>(factors: Vec<(L, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if factors.is_empty() {
            return Err(Error::InvalidArgument("composite space needs at least one factor".into()));
        }
        for (i, (label, dim)) in factors.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::DimensionMismatch {
                    context: format!("factor {label:?}"),
                    expected: 1,
                    got: 0,
                });
            }
            if factors[..i].iter().any(|(other, _)| other == label) {
                return Err(Error::InvalidArgument(format!("duplicate factor label {label:?}")));
            }
        }
        Ok(CompositeSpace { factors })
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, d)| *d)
            .ok_or_else(|| Error::UnknownLabel { label: label.into() })
    }

    /// Product of factor dims strictly left, and strictly right, of `label`.
    pub fn dims_around(&self, label: &str) -> Result<(usize, usize)> {
        let pos = self
            .factors
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel { label: label.into() })?;
        let before = self.factors[..pos].iter().map(|(_, d)| d).product();
        let after = self.factors[pos + 1..].iter().map(|(_, d)| d).product();
        Ok((before, after))
    }
}

/// Kronecker product with `a`'s indices outermost.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix { entries: ndarray::linalg::kron(a.array(), b.array()) }
}

/// Lifts `op` onto the labeled factor of `space`, identity elsewhere.
pub fn embed(op: &OperatorMatrix, target: &str, space: &CompositeSpace) -> Result<OperatorMatrix> {
    let dim = space.dim_of(target)?;
    if op.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: format!("embed onto factor {target:?}"),
            expected: dim,
            got: op.dim(),
        });
    }
    let (before, after) = space.dims_around(target)?;
    let mut out = tensor(&OperatorMatrix::identity(before), op);
    if after > 1 {
        out = tensor(&out, &OperatorMatrix::identity(after));
    }
    Ok(out)
}

/// True iff max |op†op − I| < tol.
pub fn validate_unitary(op: &OperatorMatrix, tol: f64) -> bool {
    assert!(tol > 0.0, "tolerance must be positive");
    op.unitary_defect() < tol
}

/// Outcome of [`validate_projector_set`]. Completeness (Σ op = I) is reported
/// separately and is not required for validity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorSetCheck {
    pub valid: bool,
    pub complete: bool,
    /// Largest violation found among idempotence, hermiticity and
    /// pairwise-orthogonality checks.
    pub max_defect: f64,
}

/// Checks that every operator is an orthogonal projector and that distinct
/// members annihilate each other, all within `tol` in max-entry norm.
pub fn validate_projector_set(ops: &[OperatorMatrix], tol: f64) -> Result<ProjectorSetCheck> {
    assert!(tol > 0.0, "tolerance must be positive");
    if ops.is_empty() {
        return Err(Error::EmptyProjectorSet);
    }
    let dim = ops[0].dim();
    for (i, op) in ops.iter().enumerate() {
        if op.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("projector {i} in set"),
                expected: dim,
                got: op.dim(),
            });
        }
    }
    let mut max_defect = 0.0f64;
    for op in ops {
        let idem = (&(op * op) - op).max_abs();
        max_defect = max_defect.max(idem).max(op.hermitian_defect());
    }
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            max_defect = max_defect.max((&ops[i] * &ops[j]).max_abs());
        }
    }
    let mut sum = OperatorMatrix::zeros(dim);
    for op in ops {
        sum = &sum + op;
    }
    let complete = (&sum - &OperatorMatrix::identity(dim)).max_abs() < tol;
    Ok(ProjectorSetCheck { valid: max_defect < tol, complete, max_defect })
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi rotations.
///
/// The input is assumed Hermitian; callers validate separately. Accuracy is
/// near machine precision for the desk-scale dimensions used in this crate.
pub fn hermitian_eigenvalues(op: &OperatorMatrix) -> Vec<f64> {
    let n = op.dim();
    let mut a = op.array().clone();
    let scale = op.max_abs();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let target = 1e-30 * scale * scale * (n as f64);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[[p, q]].norm_sqr();
                }
            }
        }
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                // Phase away a_pq, then a real Jacobi rotation on the 2x2 block.
                let phase = apq / b;
                let delta = a[[p, p]].re - a[[q, q]].re;
                let t = if delta == 0.0 {
                    1.0
                } else {
                    let sign = if delta > 0.0 { 1.0 } else { -1.0 };
                    sign * 2.0 * b / (delta.abs() + (delta * delta + 4.0 * b * b).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = phase.conj(); // e^{-i arg(a_pq)}
                // Column update: A <- A V with V spanning the (p, q) plane.
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * c + akq * e * s;
                    a[[k, q]] = -akp * s + akq * e * c;
                }
                // Row update: A <- V† A.
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = apk * c + aqk * e.conj() * s;
                    a[[q, k]] = -apk * s + aqk * e.conj() * c;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Orthonormalizes `vectors` by modified Gram-Schmidt with one
/// re-orthogonalization pass, dropping members whose residual norm falls
/// below `tol`.
pub fn orthonormalize(vectors: &[Array1<C64>], tol: f64) -> Vec<Array1<C64>> {
    let mut basis: Vec<Array1<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
                w = &w - &b.mapv(|x| x * proj);
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol {
            basis.push(w.mapv(|z| z / cr(norm)));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_gate() -> OperatorMatrix {
        OperatorMatrix::from_rows(vec![
            vec![cr(0.0), cr(1.0)],
            vec![cr(1.0), cr(0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = OperatorMatrix::identity(2);
        let t = tensor(&i2, &i2);
        assert!(t.approx_eq(&OperatorMatrix::identity(4), 1e-15));
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let p0 = OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]);
        let p1 = OperatorMatrix::diagonal(&[cr(0.0), cr(1.0)]);
        let t = tensor(&p0, &p1);
        let want = OperatorMatrix::diagonal(&[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert!(t.approx_eq(&want, 1e-15));
    }

    #[test]
    fn tensor_xx_flips_both_qubits() {
        // Hand 4x4 multiply: (X ⊗ X)|00⟩ = |11⟩.
        let xx = tensor(&x_gate(), &x_gate());
        let ket00 = StateVector::basis(4, 0);
        let out = xx.apply(&ket00);
        for i in 0..4 {
            let want = if i == 3 { 1.0 } else { 0.0 };
            assert!((out.amplitude(i) - cr(want)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_trace_is_multiplicative() {
        let a = OperatorMatrix::from_rows(vec![
            vec![C64::new(1.0, 0.5), C64::new(0.0, -2.0)],
            vec![C64::new(3.0, 0.0), C64::new(-1.0, 1.0)],
        ])
        .unwrap();
        let b = OperatorMatrix::from_rows(vec![
            vec![C64::new(0.2, 0.0), C64::new(1.0, 1.0)],
            vec![C64::new(-1.0, 0.1), C64::new(2.0, -0.4)],
        ])
        .unwrap();
        let lhs = tensor(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn embed_places_projector_on_last_factor() {
        let space = CompositeSpace::new(vec![("S", 2), ("F", 2), ("W", 2)]).unwrap();
        let p0 = OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]);
        let e = embed(&p0, "W", &space).unwrap();
        assert_eq!(e.dim(), 8);
        for i in 0..8 {
            let want = if i % 2 == 0 { 1.0 } else { 0.0 };
            assert!((e.entry(i, i) - cr(want)).norm() < 1e-15);
        }
        assert!((e.trace() - cr(4.0)).norm() < 1e-12);
    }

    #[test]
    fn embed_identity_is_global_identity() {
        let space = CompositeSpace::new(vec![("A", 3), ("B", 2)]).unwrap();
        let e = embed(&OperatorMatrix::identity(2), "B", &space).unwrap();
        assert!(e.approx_eq(&OperatorMatrix::identity(6), 1e-15));
    }

    #[test]
    fn embed_on_first_factor_matches_tensor() {
        let space = CompositeSpace::new(vec![("S", 2), ("F", 2)]).unwrap();
        let by_embed = embed(&x_gate(), "S", &space).unwrap();
        let by_tensor = tensor(&x_gate(), &OperatorMatrix::identity(2));
        assert!(by_embed.approx_eq(&by_tensor, 1e-15));
    }

    #[test]
    fn embed_rejects_unknown_label_and_bad_dim() {
        let space = CompositeSpace::new(vec![("S", 2), ("F", 2)]).unwrap();
        assert!(matches!(
            embed(&x_gate(), "Q", &space),
            Err(Error::UnknownLabel { .. })
        ));
        assert!(matches!(
            embed(&OperatorMatrix::identity(3), "S", &space),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unitary_validation() {
        assert!(validate_unitary(&OperatorMatrix::identity(4), 1e-12));
        let proj = OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]);
        assert!(!validate_unitary(&proj, 1e-9));
    }

    #[test]
    fn projector_set_basis_is_valid_and_complete() {
        let p0 = OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]);
        let p1 = OperatorMatrix::diagonal(&[cr(0.0), cr(1.0)]);
        let check = validate_projector_set(&[p0.clone(), p1], 1e-9).unwrap();
        assert!(check.valid && check.complete);
        let lone = validate_projector_set(&[p0], 1e-9).unwrap();
        assert!(lone.valid && !lone.complete);
    }

    #[test]
    fn projector_set_rejects_empty() {
        assert!(matches!(validate_projector_set(&[], 1e-9), Err(Error::EmptyProjectorSet)));
    }

    #[test]
    fn entangled_pair_projector_set() {
        // {|Φ⟩⟨Φ|, 1 − |Φ⟩⟨Φ|} with Φ the uniform two-qubit pair state.
        let phi = StateVector::new(vec![
            cr(1.0 / 2f64.sqrt()),
            cr(0.0),
            cr(0.0),
            cr(1.0 / 2f64.sqrt()),
        ])
        .unwrap();
        let p = phi.projector();
        let q = &OperatorMatrix::identity(4) - &p;
        let check = validate_projector_set(&[p, q], 1e-9).unwrap();
        assert!(check.valid && check.complete);
    }

    #[test]
    fn jacobi_matches_known_spectra() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = OperatorMatrix::from_rows(vec![
            vec![cr(2.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, -1.0), cr(2.0)],
        ])
        .unwrap();
        let eigs = hermitian_eigenvalues(&m);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);

        let x = x_gate();
        let eigs = hermitian_eigenvalues(&x);
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_preserves_trace_moments() {
        let m = OperatorMatrix::from_rows(vec![
            vec![cr(1.0), C64::new(0.3, 0.2), C64::new(-0.1, 0.7)],
            vec![C64::new(0.3, -0.2), cr(-0.5), C64::new(0.0, -0.4)],
            vec![C64::new(-0.1, -0.7), C64::new(0.0, 0.4), cr(2.0)],
        ])
        .unwrap();
        let eigs = hermitian_eigenvalues(&m);
        let tr: f64 = eigs.iter().sum();
        assert!((tr - m.trace().re).abs() < 1e-10);
        let sq: f64 = eigs.iter().map(|e| e * e).sum();
        let frob: f64 = m.array().iter().map(|z| z.norm_sqr()).sum();
        assert!((sq - frob).abs() < 1e-10);
    }

    #[test]
    fn embed_preserves_spectrum_with_multiplicity() {
        let space = CompositeSpace::new(vec![("A", 2), ("B", 3)]).unwrap();
        let m = OperatorMatrix::from_rows(vec![
            vec![cr(0.5), C64::new(0.0, 0.25)],
            vec![C64::new(0.0, -0.25), cr(-1.5)],
        ])
        .unwrap();
        let base = hermitian_eigenvalues(&m);
        let lifted = hermitian_eigenvalues(&embed(&m, "A", &space).unwrap());
        let mut expected: Vec<f64> = base.iter().flat_map(|e| std::iter::repeat(*e).take(3)).collect();
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in lifted.iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-8);
        }
    }

    #[test]
    fn density_operator_validation() {
        let psi = StateVector::new(vec![cr(0.6), cr(0.8)]).unwrap();
        assert!(psi.is_normalized());
        let rho = DensityOperator::from_pure(&psi).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);

        let not_herm = OperatorMatrix::from_rows(vec![
            vec![cr(1.0), cr(1.0)],
            vec![cr(0.0), cr(1.0)],
        ])
        .unwrap();
        assert!(DensityOperator::new(not_herm).is_err());

        let indefinite = OperatorMatrix::diagonal(&[cr(1.0), cr(-0.5)]);
        assert!(DensityOperator::new(indefinite).is_err());

        // Identity is allowed even though its trace exceeds one.
        assert_eq!(DensityOperator::identity(8).trace(), 8.0);
    }

    #[test]
    fn scalar_identity_detection() {
        let m = OperatorMatrix::identity(3).scaled(C64::new(2.5, 0.0));
        assert_eq!(m.scalar_identity(1e-12), Some(cr(2.5)));
        assert_eq!(x_gate().scalar_identity(1e-12), None);
    }

    #[test]
    fn state_vector_flags_and_products() {
        let raw = StateVector::new(vec![cr(1.0), cr(1.0)]).unwrap();
        assert!(!raw.is_normalized());
        let unit = raw.unit().unwrap();
        assert!(unit.is_normalized());
        let pair = unit.kron(&StateVector::basis(2, 1));
        assert_eq!(pair.dim(), 4);
        assert!((pair.amplitude(1).re - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((pair.amplitude(3).re - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }
}
