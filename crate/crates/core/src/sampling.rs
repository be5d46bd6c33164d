//! Seeded generators for implementations and test ensembles used by sweeps and tests.

use crate::channels::Implementation;
use crate::error::Result;
use crate::linalg::{exp_i, kron, CMatrix, Hermitian, TensorFactorization};
use crate::random::{haar_isometry, haar_unitary, random_density_matrix, random_hermitian, stream, uniform, Rng};
use crate::scrambling::block_haar_unitary;
use crate::states::{gibbs_state, DensityMatrix, TestEnsemble};

/// Charge with integer levels in `{0, 1, 2}` in a Haar-random eigenbasis. Levels 0 and 1
/// always occur, so two such charges share a unit gap and a conserving unitary can move
/// charge between the systems; beyond that, degeneracies are likely.
fn random_charge(d: usize, rng: &mut Rng) -> (Hermitian, CMatrix) {
    let levels: Vec<f64> = (0..d)
        .map(|i| if i < 2 { i as f64 } else { (uniform(rng) * 3.0).floor() })
        .collect();
    let basis = haar_unitary(d, rng);
    let h = Hermitian::diagonal(&levels).conjugate_by(&basis.adjoint());
    (h, basis)
}

/// Unitary conserving `X_A ⊗ I + I ⊗ X_B` for charges diagonal in the given bases.
fn conserving_unitary(x_a: &Hermitian, va: &CMatrix, x_b: &Hermitian, vb: &CMatrix, seed: u64) -> Result<CMatrix> {
    let basis = kron(va, vb);
    let total = x_a.kron(&Hermitian::identity(x_b.dim())).add(&Hermitian::identity(x_a.dim()).kron(x_b));
    let diag = total.conjugate_by(&basis);
    let diag = Hermitian::diagonal(&(0..diag.dim()).map(|i| diag.matrix()[(i, i)].re).collect::<Vec<_>>());
    let f = TensorFactorization::new(vec![x_a.dim(), x_b.dim()])?;
    let block = block_haar_unitary(&f, &diag, seed)?;
    Ok(&basis * block * basis.adjoint())
}

/// Random exactly conserving implementation on `A ⊗ B` with the same split on the output.
pub fn conserving_implementation(d_a: usize, d_b: usize, seed: u64) -> Result<Implementation> {
    let mut rng = stream(seed, 0xc0);
    let (x_a, va) = random_charge(d_a, &mut rng);
    let (x_b, vb) = random_charge(d_b, &mut rng);
    let u = conserving_unitary(&x_a, &va, &x_b, &vb, seed)?;
    let rank = 1 + (uniform(&mut rng) * d_b as f64) as usize;
    let rho_b = DensityMatrix::from_computed(random_density_matrix(d_b, rank.min(d_b), &mut rng))?;
    Implementation::new(u, rho_b, x_a.clone(), x_b.clone(), x_a, x_b)
}

/// Conserving implementation followed by `exp(-i t G)` for a random `G` with `‖G‖ = 1`,
/// with `t` chosen so that the conservation defect has spread `u · max_spread` for a
/// uniform `u`.
pub fn violating_implementation(d_a: usize, d_b: usize, max_spread: f64, seed: u64) -> Result<Implementation> {
    let base = conserving_implementation(d_a, d_b, seed)?;
    let mut rng = stream(seed, 0xd1);
    let g = random_hermitian(d_a * d_b, &mut rng);
    let g = g.scale(1.0 / g.operator_norm()?.max(1e-300));
    let target = max_spread * uniform(&mut rng);
    let build = |t: f64| -> Result<Implementation> {
        Implementation::new(
            exp_i(&g, -t)? * base.unitary(),
            base.rho_b().clone(),
            base.x_a().clone(),
            base.x_b().clone(),
            base.x_a_out().clone(),
            base.x_b_out().clone(),
        )
    };
    let (mut lo, mut hi) = (0.0, 0.0);
    while hi < std::f64::consts::PI {
        hi += 0.05;
        if build(hi)?.defect_spread()? >= target {
            break;
        }
        lo = hi;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if build(mid)?.defect_spread()? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    build(lo)
}

/// Conserving implementation whose environment starts in the Gibbs state of `X_B`, so the
/// induced channel preserves the Gibbs state of `X_A` at the same `beta`.
pub fn gibbs_preserving_implementation(d_a: usize, d_b: usize, beta: f64, seed: u64) -> Result<Implementation> {
    let mut rng = stream(seed, 0x9b);
    let (x_a, va) = random_charge(d_a, &mut rng);
    let (x_b, vb) = random_charge(d_b, &mut rng);
    let u = conserving_unitary(&x_a, &va, &x_b, &vb, seed)?;
    let rho_b = gibbs_state(&x_b, beta)?;
    Implementation::new(u, rho_b, x_a.clone(), x_b.clone(), x_a, x_b)
}

fn random_weights(n: usize, rng: &mut Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.2 + uniform(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random orthonormal pure states (2 up to `d` of them) with random weights.
pub fn orthogonal_pure_ensemble(d: usize, seed: u64) -> Result<TestEnsemble> {
    let mut rng = stream(seed, 0x0e);
    let size = 2 + (uniform(&mut rng) * (d - 1) as f64) as usize;
    let size = size.min(d);
    let iso = haar_isometry(d, size, &mut rng);
    let states = (0..size)
        .map(|k| DensityMatrix::pure(&iso.column(k).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    TestEnsemble::new(random_weights(size, &mut rng), states)
}

/// Two to four random mixed states of random rank with random weights; generically
/// neither orthogonal nor commuting.
pub fn mixed_ensemble(d: usize, seed: u64) -> Result<TestEnsemble> {
    let mut rng = stream(seed, 0x3e);
    let size = 2 + (uniform(&mut rng) * 3.0) as usize;
    let states = (0..size)
        .map(|_| {
            let rank = 1 + (uniform(&mut rng) * d as f64) as usize;
            DensityMatrix::from_computed(random_density_matrix(d, rank.min(d), &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    TestEnsemble::new(random_weights(size, &mut rng), states)
}

/// Random state of the given rank.
pub fn random_state(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = stream(seed, 0x57);
    DensityMatrix::from_computed(random_density_matrix(d, rank, &mut rng))
}
