//! Seeded sampling of random states, unitaries and operators.
//!
//! Every sampler takes the generator explicitly; nothing reads global state.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, identity, r, CMatrix, CVector, Hermitian, C64};

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for sub-stream `stream` of `seed`.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    rng_from_seed(stream_seed(seed, stream))
}

pub fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn uniform(rng: &mut Rng) -> f64 {
    rng.gen::<f64>()
}

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_normal(rng: &mut Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    c(normal(rng) * s, normal(rng) * s)
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Uniformly random unit vector.
pub fn haar_vector(d: usize, rng: &mut Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| complex_normal(rng));
    let n = v.norm();
    v / r(n)
}

/// Haar-random `rows x cols` isometry (`cols <= rows`) via Gram-Schmidt on Gaussian columns.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    assert!(cols <= rows, "haar_isometry: more columns than rows");
    let mut q = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        let g = CVector::from_fn(rows, |_, _| complex_normal(rng));
        let v = orthogonalize(&g, q.columns(0, j).into_owned());
        q.set_column(j, &v);
    }
    q
}

/// Projects `g` off the orthonormal columns of `basis` (twice, for stability) and normalizes.
pub fn orthogonalize(g: &CVector, basis: CMatrix) -> CVector {
    let mut v = g.clone();
    for _ in 0..2 {
        for k in 0..basis.ncols() {
            let b = basis.column(k);
            let proj = b.dotc(&v);
            v -= b * proj;
        }
    }
    let n = v.norm();
    v / r(n)
}

pub fn haar_unitary(d: usize, rng: &mut Rng) -> CMatrix {
    haar_isometry(d, d, rng)
}

/// Random Hermitian matrix with Gaussian entries (GUE scaling).
pub fn random_hermitian(d: usize, rng: &mut Rng) -> Hermitian {
    let g = ginibre(d, d, rng);
    Hermitian::symmetrized(&g + g.adjoint())
}

/// Random density matrix of the given rank, normalized `G G†`.
pub fn random_density_matrix(d: usize, rank: usize, rng: &mut Rng) -> CMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m / r(t)
}

/// Random full-rank density matrix mixed slightly with the identity so its spectrum
/// stays away from zero.
pub fn random_full_rank_density(d: usize, rng: &mut Rng) -> CMatrix {
    let rho = random_density_matrix(d, d, rng);
    rho * r(0.9) + identity(d) * r(0.1 / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(7);
        for d in 1..6 {
            assert!(unitarity_residual(&haar_unitary(d, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = haar_vector(4, &mut rng_from_seed(11));
        let b = haar_vector(4, &mut rng_from_seed(11));
        assert_eq!(a, b);
        assert_ne!(stream_seed(1, 0), stream_seed(1, 1));
    }
}
