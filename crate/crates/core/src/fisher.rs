//! Symmetric-logarithmic-derivative quantum Fisher information.

use crate::error::{Error, Result};
use crate::linalg::{check_dim, exp_i, CMatrix, CVector, Hermitian};
use crate::states::{fidelity_matrices, DensityMatrix, SUPPORT_CUTOFF};

/// QFI of the family `e^{-iXt} ρ e^{iXt}` at `t = 0`:
/// `2 Σ (λ_i - λ_j)² / (λ_i + λ_j) |⟨i|X|j⟩|²` over pairs with `λ_i + λ_j` above the cutoff.
pub fn sld_qfi(rho: &DensityMatrix, x: &Hermitian) -> Result<f64> {
    check_dim(rho.dim(), x.dim(), "sld_qfi")?;
    let (vals, vecs) = rho.support()?;
    Ok(qfi_from_support(&vals, &vecs, x.matrix()))
}

/// QFI from the support of the state only.
///
/// Pairs inside the support use the closed form; pairs with one index in the kernel
/// contribute `4 Σ_i λ_i ‖(1 - P) X v_i‖²` with `P` the support projector, so the kernel
/// basis never has to be built. Norms of residuals are used instead of differences of
/// second moments so that the result stays accurate near zero.
pub fn qfi_from_support(vals: &[f64], vecs: &[CVector], x: &CMatrix) -> f64 {
    let xv: Vec<CVector> = vecs.iter().map(|v| x * v).collect();
    let mut inside = 0.0;
    let mut kernel = 0.0;
    for i in 0..vals.len() {
        let mut residual = xv[i].clone();
        for j in 0..vals.len() {
            let amp = vecs[j].dotc(&xv[i]);
            residual -= &vecs[j] * amp;
            let s = vals[i] + vals[j];
            if s > SUPPORT_CUTOFF {
                let d = vals[i] - vals[j];
                inside += d * d / s * amp.norm_sqr();
            }
        }
        kernel += vals[i] * residual.norm_squared();
    }
    (2.0 * inside + 4.0 * kernel).max(0.0)
}

/// QFI of a pure state: `4 ‖(X - ⟨X⟩)ψ‖²`.
pub fn pure_qfi(psi: &CVector, x: &CMatrix) -> f64 {
    let xv = x * psi;
    let mean = psi.dotc(&xv);
    4.0 * (xv - psi * mean).norm_squared()
}

/// `Tr[ρ X²] - Tr[ρ X]²`.
pub fn variance(rho: &DensityMatrix, x: &Hermitian) -> Result<f64> {
    check_dim(rho.dim(), x.dim(), "variance")?;
    let mean = x.expectation(rho.matrix());
    let sq = x.square().expectation(rho.matrix());
    Ok((sq - mean * mean).max(0.0))
}

/// Independent QFI estimate from the fidelity of nearby states:
/// `8 (1 - F(ρ, ρ_ε)) / ε²`, Richardson-extrapolated to `ε → 0` in powers of `ε²`.
pub fn qfi_limit_check(rho: &DensityMatrix, x: &Hermitian, eps: &[f64]) -> Result<f64> {
    check_dim(rho.dim(), x.dim(), "qfi_limit_check")?;
    if eps.is_empty() || eps.iter().any(|&e| e < 1e-5 || !e.is_finite()) {
        return Err(Error::InvalidInput(
            "finite-difference steps must all be at least 1e-5".into(),
        ));
    }
    let mut h2 = Vec::with_capacity(eps.len());
    let mut g = Vec::with_capacity(eps.len());
    for &e in eps {
        let u = exp_i(x, -e)?;
        let moved: CMatrix = &u * rho.matrix() * u.adjoint();
        let f = fidelity_matrices(rho.matrix(), &moved)?;
        h2.push(e * e);
        g.push(8.0 * (1.0 - f) / (e * e));
    }
    // Neville's scheme evaluated at h² = 0.
    let n = g.len();
    let mut p = g;
    for level in 1..n {
        for i in 0..(n - level) {
            let (a, b) = (h2[i], h2[i + level]);
            p[i] = (a * p[i + 1] - b * p[i]) / (a - b);
        }
    }
    Ok(p[0])
}

/// Default finite-difference steps for [`qfi_limit_check`].
pub const DEFAULT_LIMIT_STEPS: [f64; 4] = [0.08, 0.04, 0.02, 0.01];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, r};

    #[test]
    fn pure_plus_state_with_z() {
        let v = (basis_vector(2, 0) + basis_vector(2, 1)) * r(std::f64::consts::FRAC_1_SQRT_2);
        let rho = DensityMatrix::pure(&v).unwrap();
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        assert!((sld_qfi(&rho, &z).unwrap() - 4.0).abs() < 1e-13);
        assert!((pure_qfi(&v, z.matrix()) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn eigenstate_has_zero_qfi() {
        let z = Hermitian::diagonal(&[1.0, -1.0, 0.5]);
        let rho = DensityMatrix::basis(3, 2);
        assert!(sld_qfi(&rho, &z).unwrap().abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(3);
        assert!(sld_qfi(&mixed, &z).unwrap().abs() < 1e-14);
    }

    #[test]
    fn qubit_closed_form() {
        // ρ = diag(p, 1-p), X = σx: F = 2 (2p-1)² / 1 · 2 = 4 (2p-1)²
        let p = 0.8;
        let rho = DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[r(p), r(0.0), r(0.0), r(1.0 - p)]))
            .unwrap();
        let x = Hermitian::new(CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)])).unwrap();
        let expect = 4.0 * (2.0 * p - 1.0) * (2.0 * p - 1.0);
        assert!((sld_qfi(&rho, &x).unwrap() - expect).abs() < 1e-13);
        let lim = qfi_limit_check(&rho, &x, &DEFAULT_LIMIT_STEPS).unwrap();
        assert!((lim - expect).abs() / expect < 1e-4);
    }
}
