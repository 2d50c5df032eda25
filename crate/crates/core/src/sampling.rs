//! Seeded random states and operators.

use ndarray::Array1;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::linalg::{self, CMat};
use crate::operators::{HermitianOperator, StateVector};
use crate::state::DensityMatrix;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_shape_simple_fn((rows, cols), || complex_gaussian(rng))
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    let v: Array1<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    StateVector::normalized(v).expect("gaussian vector is nonzero")
}

/// Induced-measure mixed state `G G† / tr(G G†)` with `G` of size `dim × rank`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let m = g.dot(&linalg::dagger(&g));
    let tr = linalg::trace(&m).re;
    DensityMatrix::from_matrix_unchecked(linalg::hermitize(&m.mapv(|z| z / tr)))
}

/// Random state supported on the first `support` basis levels of a `dim`-dimensional space.
pub fn random_density_on<R: Rng + ?Sized>(dim: usize, support: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let small = random_density(support, rank, rng);
    let mut m = CMat::zeros((dim, dim));
    m.slice_mut(ndarray::s![..support, ..support]).assign(small.matrix());
    DensityMatrix::from_matrix_unchecked(m)
}

/// GUE-like Hermitian matrix scaled to unit spectral radius on average.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(dim, dim, rng);
    let h = (&g + &linalg::dagger(&g)).mapv(|z| z / (2.0 * (2.0 * dim as f64).sqrt()));
    HermitianOperator::new(linalg::hermitize(&h)).expect("hermitized by construction")
}

/// Flat Dirichlet draw of length `n`.
pub fn dirichlet<R: Rng + ?Sized>(n: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let g = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut w: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|x| *x /= s);
    } else {
        w = vec![1.0 / n as f64; n];
    }
    w
}
