//! Seeded random matrices and states.
//!
//! Every randomized routine takes an explicit generator. [`seeded_rng`] derives
//! independent ChaCha streams from one seed so trials can be replayed one at a
//! time, in any order.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, ComplexMatrix};
use crate::state::{DensityMatrix, DimsSpec};

/// ChaCha8 generator for `(seed, stream)`; distinct streams never overlap.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ginibre(n, n, rng).hermitian_part()
}

/// Haar-distributed unitary: Gram-Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let g = ginibre(n, n, rng);
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut degenerate = false;
        for j in 0..n {
            let mut v = g.column(j);
            // two passes keep the basis orthonormal to working precision
            for _ in 0..2 {
                for q in &cols {
                    let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= overlap * qi;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
        if !degenerate {
            return ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// G G^dagger / Tr for a Ginibre G with `rank` columns.
pub fn random_density(dims: &DimsSpec, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    let n = dims.total_dim();
    let g = ginibre(n, rank.max(1), rng);
    DensityMatrix::from_unnormalized(&g * &g.adjoint(), dims.clone()).expect("Gram matrix is a valid state")
}

/// Haar-random pure state vector.
pub fn random_pure_vector(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
