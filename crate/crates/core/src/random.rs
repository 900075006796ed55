//! Random states and operators for property checks.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::group::FiniteAbelianGroup;
use crate::hilbert::{DenseOperator, LegSpace, StateVector};
use crate::measurement::SpectralRepresentation;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unit vector.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, space: LegSpace) -> StateVector {
    let amps = (0..space.dim()).map(|_| gaussian(rng)).collect();
    StateVector::from_vec(space, amps).and_then(StateVector::normalized).expect("a gaussian vector is nonzero")
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, space: LegSpace) -> DenseOperator {
    let d = space.dim();
    let m = Array2::from_shape_fn((d, d), |_| gaussian(rng));
    DenseOperator::new(space, m).expect("square matrix of the space dimension")
}

/// `(M + M^*) / 2` for a gaussian `M`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, space: LegSpace) -> DenseOperator {
    let m = random_matrix(rng, space);
    m.add(&m.dagger()).expect("same space").scale(Complex64::new(0.5, 0.0))
}

/// `A^* A` for a gaussian `A`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, space: LegSpace) -> DenseOperator {
    let a = random_matrix(rng, space);
    a.dagger().matmul(&a).expect("same space")
}

/// Haar unitary via Gram-Schmidt on the columns of a gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, space: LegSpace) -> DenseOperator {
    let d = space.dim();
    let mut m = Array2::from_shape_fn((d, d), |_| gaussian(rng));
    for j in 0..d {
        for k in 0..j {
            let proj: Complex64 = (0..d).map(|i| m[[i, k]].conj() * m[[i, j]]).sum();
            for i in 0..d {
                let v = m[[i, k]];
                m[[i, j]] -= proj * v;
            }
        }
        let norm = (0..d).map(|i| m[[i, j]].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..d {
            m[[i, j]] /= norm;
        }
    }
    DenseOperator::new(space, m).expect("square matrix of the space dimension")
}

/// A random subset of `0..n`, each member kept with probability 1/2.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.random_bool(0.5)).collect()
}

/// Spectral representation with a random eigenbasis: each column of a Haar
/// unitary is assigned to a uniformly chosen character, so some characters
/// may end up with no weight and others with a multi-dimensional range.
pub fn random_spectral_representation<R: Rng + ?Sized>(
    rng: &mut R,
    group: FiniteAbelianGroup,
    system_dim: usize,
) -> Result<SpectralRepresentation> {
    let space = LegSpace::single("sys", system_dim);
    let u = random_unitary(rng, space.clone());
    let labels: Vec<usize> = (0..system_dim).map(|_| rng.random_range(0..group.size())).collect();
    let mut assignments = Vec::new();
    for chi in 0..group.size() {
        let cols: Vec<usize> = (0..system_dim).filter(|&k| labels[k] == chi).collect();
        if cols.is_empty() {
            continue;
        }
        let m = u.matrix();
        let p = DenseOperator::from_fn(space.clone(), |i, j| cols.iter().map(|&k| m[[i, k]] * m[[j, k]].conj()).sum());
        assignments.push((group.character_at(chi), p));
    }
    SpectralRepresentation::new(group, system_dim, assignments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_have_the_advertised_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let space = LegSpace::single("s", 5);
        assert!(random_state(&mut rng, space.clone()).is_normalized(1e-14));
        assert!(random_hermitian(&mut rng, space.clone()).hermiticity_residual() < 1e-14);
        assert!(random_unitary(&mut rng, space.clone()).unitarity_residual() < 1e-13);
        let p = random_psd(&mut rng, space);
        assert!(p.hermiticity_residual() < 1e-13);
        assert!(p.trace().re > 0.0);
    }

    #[test]
    fn random_representation_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = FiniteAbelianGroup::new(&[2, 3]).unwrap();
            let rep = random_spectral_representation(&mut rng, g, 4).unwrap();
            assert!(rep.homomorphism_residual() < 1e-12);
        }
    }
}
