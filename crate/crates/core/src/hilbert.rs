//! Dense vectors and operators on tensor products with labelled legs.
//!
//! Flattening is row-major with the leftmost leg most significant: the basis
//! vector `|i_1> (x) ... (x) |i_k>` has index `sum_j i_j * stride_j` with
//! `stride_k = 1`. CSV dumps follow the same order.

use std::collections::HashMap;
use std::fmt::Write as _;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension for which a dense operator is ever materialized.
pub const MAX_DENSE_DIM: usize = 4096;

/// Tolerance used by the `is_*` predicates (unitarity scales with dimension).
pub const FLAG_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LegSpace {
    legs: Vec<(String, usize)>,
}

impl LegSpace {
    pub fn new<S: Into<String>>(legs: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let legs: Vec<(String, usize)> = legs.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in legs.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::EmptyLeg(label.clone()));
            }
            if legs[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::DuplicateLeg(label.clone()));
            }
        }
        Ok(Self { legs })
    }

    pub fn single(label: &str, dim: usize) -> Self {
        assert!(dim > 0, "leg `{label}` must have positive dimension");
        Self { legs: vec![(label.to_string(), dim)] }
    }

    pub fn legs(&self) -> &[(String, usize)] {
        &self.legs
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.legs.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.legs.iter().map(|&(_, d)| d).collect()
    }

    pub fn dim(&self) -> usize {
        self.legs.iter().map(|&(_, d)| d).product()
    }

    pub fn len(&self) -> usize {
        self.legs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.legs.iter().position(|(l, _)| l == label).ok_or_else(|| Error::UnknownLeg(label.to_string()))
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.legs.len()];
        for j in (0..self.legs.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.legs[j + 1].1;
        }
        strides
    }

    /// Concatenate the legs of `self` and `other`.
    pub fn tensor(&self, other: &LegSpace) -> Result<LegSpace> {
        LegSpace::new(self.legs.iter().chain(&other.legs).cloned())
    }

    /// Same leg dimensions, compared positionally.
    pub fn same_shape(&self, other: &LegSpace) -> bool {
        self.dims() == other.dims()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: LegSpace,
    amps: Array1<Complex64>,
}

impl StateVector {
    pub fn new(space: LegSpace, amps: Array1<Complex64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: amps.len() });
        }
        Ok(Self { space, amps })
    }

    pub fn from_vec(space: LegSpace, amps: Vec<Complex64>) -> Result<Self> {
        Self::new(space, Array1::from(amps))
    }

    pub fn zeros(space: LegSpace) -> Self {
        let amps = Array1::zeros(space.dim());
        Self { space, amps }
    }

    pub fn basis(space: LegSpace, index: usize) -> Self {
        let mut v = Self::zeros(space);
        v.amps[index] = ONE;
        v
    }

    pub fn space(&self) -> &LegSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut Array1<Complex64> {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Array1<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        self.amps.mapv_inplace(|a| a / n);
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_shape(&other.space)?;
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// `self (x) other` with `other`'s legs appended on the right.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let space = self.space.tensor(&other.space)?;
        let n = other.amps.len();
        let amps = Array1::from_shape_fn(space.dim(), |i| self.amps[i / n] * other.amps[i % n]);
        Ok(Self { space, amps })
    }

    /// Euclidean distance, positional shape check only.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check_shape(&other.space)?;
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    /// Apply `op` to the legs `targets` in place, without materializing the
    /// embedding. Zero entries of `op` are skipped.
    pub fn apply_local(&mut self, op: &DenseOperator, targets: &[&str]) -> Result<()> {
        let action = LocalAction::new(op, targets, &self.space)?;
        action.apply_dense(self.amps.as_slice_mut().expect("contiguous amplitudes"));
        Ok(())
    }

    /// `|self><self|` as a density operator.
    pub fn projector(&self) -> DenseOperator {
        let n = self.amps.len();
        let m = Array2::from_shape_fn((n, n), |(i, j)| self.amps[i] * self.amps[j].conj());
        DenseOperator { space: self.space.clone(), mat: m }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,real,imag\n");
        for (i, a) in self.amps.iter().enumerate() {
            let _ = writeln!(s, "{i},{:.17e},{:.17e}", a.re, a.im);
        }
        s
    }

    fn check_shape(&self, other: &LegSpace) -> Result<()> {
        if !self.space.same_shape(other) {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// A square complex matrix acting on a [`LegSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    space: LegSpace,
    mat: Array2<Complex64>,
}

impl DenseOperator {
    pub fn new(space: LegSpace, mat: Array2<Complex64>) -> Result<Self> {
        let d = space.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: mat.nrows().max(mat.ncols()) });
        }
        Ok(Self { space, mat })
    }

    pub(crate) fn from_matrix(space: LegSpace, mat: Array2<Complex64>) -> Self {
        debug_assert_eq!(mat.dim(), (space.dim(), space.dim()));
        Self { space, mat }
    }

    pub fn identity(space: LegSpace) -> Self {
        let d = space.dim();
        Self { space, mat: Array2::eye(d) }
    }

    pub fn zeros(space: LegSpace) -> Self {
        let d = space.dim();
        Self { space, mat: Array2::zeros((d, d)) }
    }

    /// Build from a closure `(row, col) -> entry`.
    pub fn from_fn(space: LegSpace, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let d = space.dim();
        Self { space, mat: Array2::from_shape_fn((d, d), |(i, j)| f(i, j)) }
    }

    /// Diagonal operator with the given entries.
    pub fn diagonal(space: LegSpace, diag: &[Complex64]) -> Result<Self> {
        if diag.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: diag.len() });
        }
        Ok(Self::from_fn(space, |i, j| if i == j { diag[i] } else { ZERO }))
    }

    pub fn space(&self) -> &LegSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.mat
    }

    /// Same matrix, different leg labels (dimensions must agree).
    pub fn relabel(self, space: LegSpace) -> Result<Self> {
        Self::new(space, self.mat)
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), mat: self.mat.t().mapv(|z| z.conj()) }
    }

    pub fn matmul(&self, other: &DenseOperator) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self { space: self.space.clone(), mat: self.mat.dot(&other.mat) })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self { space: self.space.clone(), mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self { space: self.space.clone(), mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { space: self.space.clone(), mat: self.mat.mapv(|z| z * c) }
    }

    /// `self (x) other`, legs of `other` appended on the right.
    pub fn kron(&self, other: &DenseOperator) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        if space.dim() > MAX_DENSE_DIM {
            return Err(Error::CapExceeded { size: space.dim(), cap: MAX_DENSE_DIM });
        }
        let n = other.dim();
        let mat = Array2::from_shape_fn((space.dim(), space.dim()), |(i, j)| {
            self.mat[[i / n, j / n]] * other.mat[[i % n, j % n]]
        });
        Ok(Self { space, mat })
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diag().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance; an upper bound for the operator-norm distance.
    pub fn distance(&self, other: &DenseOperator) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    /// `||A - I||`.
    pub fn identity_residual(&self) -> f64 {
        self.mat
            .indexed_iter()
            .map(|((i, j), z)| if i == j { (z - ONE).norm_sqr() } else { z.norm_sqr() })
            .sum::<f64>()
            .sqrt()
    }

    /// `||A^dagger A - I||`.
    pub fn unitarity_residual(&self) -> f64 {
        self.dagger().matmul(self).expect("same space").identity_residual()
    }

    /// `||P^2 - P||`.
    pub fn idempotency_residual(&self) -> f64 {
        let sq = Self { space: self.space.clone(), mat: self.mat.dot(&self.mat) };
        sq.distance(self).expect("same space")
    }

    /// `||A - A^dagger||`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.distance(&self.dagger()).expect("same space")
    }

    /// Largest off-diagonal modulus.
    pub fn off_diagonal_max(&self) -> f64 {
        self.mat.indexed_iter().filter(|((i, j), _)| i != j).map(|(_, z)| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() <= FLAG_TOL * self.dim() as f64
    }

    pub fn is_projection(&self) -> bool {
        self.idempotency_residual() <= FLAG_TOL && self.is_hermitian()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= FLAG_TOL
    }

    /// Columns as `(row, value)` lists of nonzero entries.
    pub fn sparse_columns(&self) -> Vec<Vec<(usize, Complex64)>> {
        (0..self.dim())
            .map(|j| self.mat.column(j).iter().enumerate().filter(|(_, z)| **z != ZERO).map(|(i, &z)| (i, z)).collect())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,real,imag\n");
        for ((i, j), a) in self.mat.indexed_iter() {
            let _ = writeln!(s, "{i},{j},{:.17e},{:.17e}", a.re, a.im);
        }
        s
    }

    fn check_shape(&self, other: &DenseOperator) -> Result<()> {
        if !self.space.same_shape(&other.space) {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// `op (x) 1` on `space`, with `op`'s legs placed (in order) on `targets`.
pub fn embed(op: &DenseOperator, targets: &[&str], space: &LegSpace) -> Result<DenseOperator> {
    if space.dim() > MAX_DENSE_DIM {
        return Err(Error::CapExceeded { size: space.dim(), cap: MAX_DENSE_DIM });
    }
    let action = LocalAction::new(op, targets, space)?;
    let d = space.dim();
    let mut mat = Array2::zeros((d, d));
    let local = op.dim();
    for &rest in &action.rest_offsets {
        for a in 0..local {
            for b in 0..local {
                let z = op.mat[[a, b]];
                if z != ZERO {
                    mat[[rest + action.local_offsets[a], rest + action.local_offsets[b]]] = z;
                }
            }
        }
    }
    Ok(DenseOperator { space: space.clone(), mat })
}

/// Matrix-vector product.
pub fn apply(op: &DenseOperator, xi: &StateVector) -> Result<StateVector> {
    if !op.space.same_shape(&xi.space) {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: xi.amps.len() });
    }
    Ok(StateVector { space: xi.space.clone(), amps: op.mat.dot(&xi.amps) })
}

/// `<xi|op|xi>`.
pub fn expectation(xi: &StateVector, op: &DenseOperator) -> Result<Complex64> {
    let image = apply(op, xi)?;
    xi.inner(&image)
}

type SparseVec = HashMap<usize, Complex64>;

/// An operator acting on a subset of the legs of a larger space, applied
/// without materializing its embedding.
#[derive(Debug, Clone)]
pub struct LocalAction {
    // offsets of the local basis states inside the full index
    local_offsets: Vec<usize>,
    // offsets of the complementary basis states
    rest_offsets: Vec<usize>,
    // (stride in full space, dim, stride in local space) per target leg
    targets: Vec<(usize, usize, usize)>,
    columns: Vec<Vec<(usize, Complex64)>>,
    dim: usize,
}

impl LocalAction {
    pub fn new(op: &DenseOperator, targets: &[&str], space: &LegSpace) -> Result<Self> {
        let positions = targets.iter().map(|t| space.position(t)).collect::<Result<Vec<_>>>()?;
        for (i, p) in positions.iter().enumerate() {
            if positions[..i].contains(p) {
                return Err(Error::DuplicateLeg(targets[i].to_string()));
            }
        }
        let dims = space.dims();
        let strides = space.strides();
        let target_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
        if target_dims != op.space.dims() {
            return Err(Error::DimensionMismatch { expected: target_dims.iter().product(), found: op.dim() });
        }
        let local_space = LegSpace::new(targets.iter().zip(&target_dims).map(|(t, &d)| (t.to_string(), d)))?;
        let local_strides = local_space.strides();
        let local_offsets = (0..op.dim())
            .map(|a| positions.iter().zip(&local_strides).map(|(&p, &ls)| (a / ls % dims[p]) * strides[p]).sum())
            .collect();
        let rest: Vec<usize> = (0..space.len()).filter(|p| !positions.contains(p)).collect();
        let rest_dim: usize = rest.iter().map(|&p| dims[p]).product();
        let rest_offsets = (0..rest_dim)
            .map(|r| {
                let mut rem = r;
                let mut off = 0;
                for &p in rest.iter().rev() {
                    off += (rem % dims[p]) * strides[p];
                    rem /= dims[p];
                }
                off
            })
            .collect();
        let targets = positions.iter().zip(&local_strides).map(|(&p, &ls)| (strides[p], dims[p], ls)).collect();
        Ok(Self { local_offsets, rest_offsets, targets, columns: op.sparse_columns(), dim: space.dim() })
    }

    pub fn apply_dense(&self, amps: &mut [Complex64]) {
        debug_assert_eq!(amps.len(), self.dim);
        let local = self.local_offsets.len();
        let mut sub = vec![ZERO; local];
        let mut out = vec![ZERO; local];
        for &rest in &self.rest_offsets {
            for (a, s) in sub.iter_mut().enumerate() {
                *s = amps[rest + self.local_offsets[a]];
            }
            out.iter_mut().for_each(|o| *o = ZERO);
            for (a, &s) in sub.iter().enumerate() {
                if s != ZERO {
                    for &(b, z) in &self.columns[a] {
                        out[b] += z * s;
                    }
                }
            }
            for (b, &o) in out.iter().enumerate() {
                amps[rest + self.local_offsets[b]] = o;
            }
        }
    }

    fn split(&self, index: usize) -> (usize, usize) {
        let mut local = 0;
        let mut rest = index;
        for &(stride, dim, ls) in &self.targets {
            let digit = index / stride % dim;
            local += digit * ls;
            rest -= digit * stride;
        }
        (local, rest)
    }

    fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::with_capacity(v.len());
        for (&idx, &amp) in v {
            let (a, rest) = self.split(idx);
            for &(b, z) in &self.columns[a] {
                *out.entry(rest + self.local_offsets[b]).or_insert(ZERO) += z * amp;
            }
        }
        out
    }
}

/// A product of local actions, written left to right as in a formula and
/// applied right to left.
pub type Word<'a> = &'a [LocalAction];

fn apply_word_sparse(word: Word<'_>, index: usize) -> SparseVec {
    let mut v = SparseVec::from([(index, ONE)]);
    for action in word.iter().rev() {
        v = action.apply_sparse(&v);
    }
    v
}

/// Frobenius norm of `lhs - rhs` where both are operator words on a space
/// of dimension `dim`. Works column by column on sparse vectors, so products
/// of permutation-like operators on large spaces stay cheap.
pub fn word_residual(dim: usize, lhs: Word<'_>, rhs: Word<'_>) -> f64 {
    let mut total = 0.0;
    for j in 0..dim {
        let l = apply_word_sparse(lhs, j);
        let r = apply_word_sparse(rhs, j);
        for (k, a) in &l {
            total += (a - r.get(k).copied().unwrap_or(ZERO)).norm_sqr();
        }
        for (k, b) in &r {
            if !l.contains_key(k) {
                total += b.norm_sqr();
            }
        }
    }
    total.sqrt()
}

/// Materialize an operator word as a dense matrix.
pub fn word_matrix(space: &LegSpace, word: Word<'_>) -> Result<DenseOperator> {
    let d = space.dim();
    if d > MAX_DENSE_DIM {
        return Err(Error::CapExceeded { size: d, cap: MAX_DENSE_DIM });
    }
    let mut mat = Array2::zeros((d, d));
    for j in 0..d {
        for (i, z) in apply_word_sparse(word, j) {
            mat[[i, j]] = z;
        }
    }
    Ok(DenseOperator { space: space.clone(), mat })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pauli_x() -> DenseOperator {
        DenseOperator::from_fn(LegSpace::single("q", 2), |i, j| if i != j { ONE } else { ZERO })
    }

    fn pauli_z() -> DenseOperator {
        DenseOperator::diagonal(LegSpace::single("q", 2), &[c(1.0), c(-1.0)]).unwrap()
    }

    fn two_qubits() -> LegSpace {
        LegSpace::new([("a", 2), ("b", 2)]).unwrap()
    }

    #[test]
    fn leg_space_validation() {
        assert!(matches!(LegSpace::new([("a", 2), ("a", 3)]), Err(Error::DuplicateLeg(_))));
        assert!(matches!(LegSpace::new([("a", 0)]), Err(Error::EmptyLeg(_))));
        let s = LegSpace::new([("a", 2), ("b", 3), ("c", 4)]).unwrap();
        assert_eq!(s.dim(), 24);
        assert_eq!(s.strides(), vec![12, 4, 1]);
        assert!(matches!(s.position("z"), Err(Error::UnknownLeg(_))));
    }

    #[test]
    fn embed_single_leg_action() {
        let space = two_qubits();
        let x2 = embed(&pauli_x(), &["b"], &space).unwrap();
        let out = apply(&x2, &StateVector::basis(space.clone(), 0)).unwrap();
        // |0>|0> -> |0>|1>
        assert_eq!(out.amplitudes()[1], ONE);
        assert_eq!(out.norm(), 1.0);
    }

    #[test]
    fn embed_identity_is_identity() {
        let space = LegSpace::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let id = DenseOperator::identity(LegSpace::new([("x", 3), ("y", 2)]).unwrap());
        let e = embed(&id, &["b", "c"], &space).unwrap();
        assert_eq!(e.identity_residual(), 0.0);
    }

    #[test]
    fn embed_respects_target_order() {
        // CNOT with control on the second listed leg
        let space = two_qubits();
        let cnot = DenseOperator::from_fn(two_qubits(), |i, j| {
            let target = [0, 1, 3, 2];
            if target[j] == i {
                ONE
            } else {
                ZERO
            }
        });
        let flipped = embed(&cnot, &["b", "a"], &space).unwrap();
        // |a=1,b=0>: control b=0, nothing happens
        let out = apply(&flipped, &StateVector::basis(space.clone(), 2)).unwrap();
        assert_eq!(out.amplitudes()[2], ONE);
        // |a=0,b=1>: control b=1 flips a
        let out = apply(&flipped, &StateVector::basis(space, 1)).unwrap();
        assert_eq!(out.amplitudes()[3], ONE);
    }

    #[test]
    fn embed_errors() {
        let space = two_qubits();
        assert!(matches!(embed(&pauli_x(), &["c"], &space), Err(Error::UnknownLeg(_))));
        let big = DenseOperator::identity(LegSpace::single("q", 3));
        assert!(matches!(embed(&big, &["a"], &space), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn expectation_examples() {
        let q = LegSpace::single("q", 2);
        let up = StateVector::basis(q.clone(), 0);
        assert_eq!(expectation(&up, &pauli_z()).unwrap(), c(1.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_vec(q.clone(), vec![c(h), c(h)]).unwrap();
        assert!((expectation(&plus, &DenseOperator::identity(q)).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(expectation(&plus, &pauli_z()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let xi = StateVector::basis(LegSpace::single("q", 3), 0);
        assert!(apply(&pauli_x(), &xi).is_err());
    }

    #[test]
    fn local_action_matches_embedding() {
        let space = LegSpace::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let op = DenseOperator::from_fn(LegSpace::new([("x", 2), ("y", 2)]).unwrap(), |i, j| {
            Complex64::new((i * 4 + j) as f64, (i as f64) - (j as f64))
        });
        let embedded = embed(&op, &["c", "a"], &space).unwrap();
        let xi = StateVector::from_vec(
            space.clone(),
            (0..12).map(|k| Complex64::new(k as f64, 1.0 / (k as f64 + 1.0))).collect(),
        )
        .unwrap();
        let direct = apply(&embedded, &xi).unwrap();
        let mut lazy = xi.clone();
        lazy.apply_local(&op, &["c", "a"]).unwrap();
        assert!(direct.distance(&lazy).unwrap() < 1e-12);

        let action = LocalAction::new(&op, &["c", "a"], &space).unwrap();
        let m = word_matrix(&space, &[action]).unwrap();
        assert!(m.distance(&embedded).unwrap() < 1e-12);
    }

    #[test]
    fn word_residual_detects_noncommuting_products() {
        let space = two_qubits();
        let x = LocalAction::new(&pauli_x(), &["a"], &space).unwrap();
        let z = LocalAction::new(&pauli_z(), &["a"], &space).unwrap();
        let zb = LocalAction::new(&pauli_z(), &["b"], &space).unwrap();
        assert_eq!(word_residual(4, &[x.clone(), zb.clone()], &[zb, x.clone()]), 0.0);
        // XZ = -ZX, so ||XZ - ZX|| = 2 ||XZ|| = 2 * 2
        assert!((word_residual(4, &[x.clone(), z.clone()], &[z, x]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn flags() {
        assert!(pauli_x().is_unitary());
        assert!(pauli_x().is_hermitian());
        assert!(!pauli_x().is_projection());
        let p = DenseOperator::diagonal(LegSpace::single("q", 2), &[ONE, ZERO]).unwrap();
        assert!(p.is_projection());
        let n = DenseOperator::from_fn(LegSpace::single("q", 2), |i, j| if i == 0 && j == 1 { ONE } else { ZERO });
        assert!(!n.is_hermitian());
        assert!(!n.is_unitary());
    }

    #[test]
    fn kron_and_tensor_agree() {
        let a = StateVector::from_vec(LegSpace::single("a", 2), vec![c(0.6), Complex64::new(0.0, 0.8)]).unwrap();
        let b = StateVector::from_vec(LegSpace::single("b", 3), vec![c(1.0), c(0.0), c(0.0)]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.space().dims(), vec![2, 3]);
        let op = pauli_x().relabel(LegSpace::single("a", 2)).unwrap();
        let full = op.kron(&DenseOperator::identity(LegSpace::single("b", 3))).unwrap();
        let lhs = apply(&full, &ab).unwrap();
        let rhs = apply(&op, &a).unwrap().tensor(&b).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn csv_dumps() {
        let v = StateVector::basis(LegSpace::single("q", 2), 1);
        let csv = v.to_csv();
        assert!(csv.starts_with("index,real,imag\n0,"));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(pauli_x().to_csv().lines().count(), 5);
    }
}
