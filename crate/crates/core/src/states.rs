//! Density matrices, test ensembles and distance measures between states.

use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, identity, kron, psd_sqrt, r, trace_norm, CMatrix, CVector, Eigh,
    Hermitian,
};
use crate::random::{haar_vector, rng_from_seed};

/// Eigenvalues at or below this are treated as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Trace and positivity tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-9;

/// A positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Hermitian);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = Hermitian::new(m)?;
        Self::from_hermitian(h)
    }

    pub fn from_hermitian(h: Hermitian) -> Result<Self> {
        let trace = h.trace();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let e = h.eigh()?;
        if e.min() < -STATE_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: e.min(),
            });
        }
        Ok(Self(h))
    }

    /// Builds a state from a matrix known to be a state up to rounding, renormalizing the trace.
    pub fn from_computed(m: CMatrix) -> Result<Self> {
        let h = Hermitian::symmetrized(m);
        let t = h.trace();
        if t <= 0.0 {
            return Err(Error::BadTrace { trace: t });
        }
        Self::from_hermitian(h.scale(1.0 / t))
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `ψ`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidInput(format!("state vector has norm {n}")));
        }
        Ok(Self(Hermitian::projector(&(psi / r(n)))))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[i] = r(1.0);
        Self(Hermitian::projector(&v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(Hermitian::identity(d).scale(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn hermitian(&self) -> &Hermitian {
        &self.0
    }

    pub fn eigh(&self) -> Result<Eigh> {
        self.0.eigh()
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    pub fn purity(&self) -> f64 {
        crate::linalg::trace_product(self.matrix(), self.matrix()).re
    }

    /// The state vector when the state is pure within `tol` (purity above `1 - tol`).
    pub fn pure_vector(&self, tol: f64) -> Result<Option<CVector>> {
        if self.purity() < 1.0 - tol {
            return Ok(None);
        }
        let e = self.eigh()?;
        Ok(Some(e.vector(e.dim() - 1)))
    }

    /// Eigenvalues and eigenvectors with eigenvalue above `SUPPORT_CUTOFF`.
    pub fn support(&self) -> Result<(Vec<f64>, Vec<CVector>)> {
        let e = self.eigh()?;
        let mut vals = Vec::new();
        let mut vecs = Vec::new();
        for (i, &v) in e.values.iter().enumerate() {
            if v > SUPPORT_CUTOFF {
                vals.push(v);
                vecs.push(e.vector(i));
            }
        }
        Ok((vals, vecs))
    }
}

/// Weighted family of test states `{p_k, ρ_k}` on a common space.
#[derive(Clone, Debug)]
pub struct TestEnsemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl TestEnsemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::InvalidInput(format!(
                "ensemble needs matching non-empty weights and states ({} vs {})",
                weights.len(),
                states.len()
            )));
        }
        if weights.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("ensemble weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "ensemble weights sum to {total}"
            )));
        }
        let d = states[0].dim();
        for s in &states {
            check_dim(d, s.dim(), "TestEnsemble::new")?;
        }
        Ok(Self { weights, states })
    }

    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len().max(1);
        Self::new(vec![1.0 / n as f64; states.len()], states)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest pairwise overlap `Tr[ρ_k ρ_k']`, zero exactly when supports are orthogonal.
    pub fn max_overlap(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let o = crate::linalg::trace_product(self.states[i].matrix(), self.states[j].matrix())
                    .re;
                worst = worst.max(o.abs());
            }
        }
        worst
    }

    /// Largest pairwise fidelity between distinct test states.
    pub fn max_pairwise_fidelity(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                worst = worst.max(fidelity(&self.states[i], &self.states[j])?);
            }
        }
        Ok(worst)
    }

    /// Pairwise fidelities all below `tol`.
    pub fn is_orthogonal(&self, tol: f64) -> Result<bool> {
        Ok(self.max_pairwise_fidelity()? < tol)
    }

    pub fn is_two_state_uniform(&self) -> bool {
        self.len() == 2 && (self.weights[0] - 0.5).abs() < 1e-12
    }

    /// `Σ p_k ρ_k`.
    pub fn average(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, s) in self.weights.iter().zip(&self.states) {
            m += s.matrix() * r(*p);
        }
        DensityMatrix(Hermitian::symmetrized(m))
    }

    /// Orthonormal basis (as columns) of the span of all supports.
    pub fn support_basis(&self) -> Result<CMatrix> {
        let (_, vecs) = self.average().support()?;
        let d = self.dim();
        let mut out = CMatrix::zeros(d, vecs.len());
        for (j, v) in vecs.iter().enumerate() {
            out.set_column(j, v);
        }
        Ok(out)
    }
}

/// Uhlmann fidelity `‖√ρ √σ‖₁ = Tr√(√σ ρ √σ)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim(), "fidelity")?;
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

/// Fidelity for matrices already known to be states.
///
/// With `ρ = W W†` restricted to its support, `F = Tr√(W† σ W)`. The factor is taken
/// from whichever state has the smaller support, which keeps pure-state cases exact.
pub fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let er = Hermitian::symmetrized(rho.clone()).eigh()?;
    let es = Hermitian::symmetrized(sigma.clone()).eigh()?;
    let rank = |e: &Eigh| {
        let top = e.max().max(0.0);
        e.values.iter().filter(|&&v| v > FIDELITY_CUTOFF * top).count()
    };
    let (e, other) = if rank(&er) <= rank(&es) { (&er, sigma) } else { (&es, rho) };
    let top = e.max().max(0.0);
    let keep: Vec<usize> = (0..e.dim()).filter(|&i| e.values[i] > FIDELITY_CUTOFF * top).collect();
    let w = CMatrix::from_fn(e.dim(), keep.len(), |row, c| e.vectors[(row, keep[c])] * r(e.values[keep[c]].sqrt()));
    let m = Hermitian::symmetrized(w.adjoint() * other * &w);
    let f: f64 = m.eigh()?.values.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Relative cutoff for the support used by [`fidelity_matrices`].
const FIDELITY_CUTOFF: f64 = 1e-14;

/// Fidelity of a pure state with a state: `√⟨ψ|σ|ψ⟩`.
pub fn fidelity_pure(psi: &CVector, sigma: &CMatrix) -> f64 {
    psi.dotc(&(sigma * psi)).re.max(0.0).sqrt().min(1.0)
}

/// Purified distance `√(1 - F²)`.
pub fn purified_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(distance_from_fidelity(fidelity(rho, sigma)?))
}

pub fn distance_from_fidelity(f: f64) -> f64 {
    (1.0 - f * f).max(0.0).sqrt()
}

/// `½‖ρ - σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim(), "trace_distance")?;
    Ok(0.5 * trace_norm(&(rho.matrix() - sigma.matrix())))
}

fn xlnx_sum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > SUPPORT_CUTOFF)
        .map(|&x| x * x.ln())
        .sum()
}

/// von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(-xlnx_sum(&rho.eigh()?.values))
}

/// `D(ρ‖σ)` in nats; `+∞` when the support of ρ is not inside that of σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim(), "relative_entropy")?;
    let er = rho.eigh()?;
    let es = sigma.eigh()?;
    let mut cross = 0.0;
    let mut outside = 0.0;
    for (j, &s) in es.values.iter().enumerate() {
        let v = es.vector(j);
        let w = v.dotc(&(rho.matrix() * &v)).re;
        if s > SUPPORT_CUTOFF {
            cross += w * s.ln();
        } else {
            outside += w;
        }
    }
    if outside > 1e-10 {
        return Ok(f64::INFINITY);
    }
    Ok((xlnx_sum(&er.values) - cross).max(0.0))
}

/// `e^{-βH} / Tr e^{-βH}`.
pub fn gibbs_state(h: &Hermitian, beta: f64) -> Result<DensityMatrix> {
    let e = h.eigh()?;
    let reference = if beta >= 0.0 { e.min() } else { e.max() };
    let g = e.map(|x| (-beta * (x - reference)).exp());
    let z = g.trace();
    Ok(DensityMatrix(g.scale(1.0 / z)))
}

/// `Σ_i |i⟩|i⟩ / √d`.
pub fn maximally_entangled_vector(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    let amp = r(1.0 / (d as f64).sqrt());
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

pub fn maximally_entangled(d: usize) -> DensityMatrix {
    DensityMatrix(Hermitian::projector(&maximally_entangled_vector(d)))
}

/// Canonical purification `(√ρ ⊗ I) Σ_i |i⟩|i⟩` on `A ⊗ R` with `dim R = dim A`.
pub fn purification(rho: &DensityMatrix) -> Result<CVector> {
    let d = rho.dim();
    let s = psd_sqrt(rho.hermitian())?;
    let op = kron(s.matrix(), &identity(d));
    let v = op * maximally_entangled_vector(d) * r((d as f64).sqrt());
    let n = v.norm();
    Ok(v / r(n))
}

pub fn haar_random_pure(d: usize, seed: u64) -> DensityMatrix {
    let v = haar_vector(d, &mut rng_from_seed(seed));
    DensityMatrix(Hermitian::projector(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c};

    fn plus() -> DensityMatrix {
        let v = (basis_vector(2, 0) + basis_vector(2, 1)) * r(std::f64::consts::FRAC_1_SQRT_2);
        DensityMatrix::pure(&v).unwrap()
    }

    #[test]
    fn fidelity_with_mixed() {
        let f = fidelity(&plus(), &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((f - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        let d = purified_distance(&plus(), &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_states_have_zero_fidelity() {
        let f = fidelity(&DensityMatrix::basis(3, 0), &DensityMatrix::basis(3, 2)).unwrap();
        assert!(f < 1e-12);
        let t = trace_distance(&DensityMatrix::basis(3, 0), &DensityMatrix::basis(3, 2)).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropies() {
        let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!((s - 4f64.ln()).abs() < 1e-12);
        let d = relative_entropy(&plus(), &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-12);
        let inf = relative_entropy(&plus(), &DensityMatrix::basis(2, 0)).unwrap();
        assert!(inf.is_infinite());
    }

    #[test]
    fn gibbs_of_pauli_z() {
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        let g = gibbs_state(&z, 1.0).unwrap();
        let e = std::f64::consts::E;
        let p0 = (1.0 / e) / (e + 1.0 / e);
        assert!((g.matrix()[(0, 0)].re - p0).abs() < 1e-14);
        assert!(g.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_states() {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.2), r(0.0), r(0.0), r(-0.2)]);
        assert!(DensityMatrix::new(m).is_err());
        let m = CMatrix::from_row_slice(2, 2, &[r(0.5), c(0.0, 0.1), c(0.0, 0.1), r(0.5)]);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn purification_reduces_back() {
        let rho = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[r(0.7), c(0.1, 0.2), c(0.1, -0.2), r(0.3)],
        ))
        .unwrap();
        let v = purification(&rho).unwrap();
        let f = crate::linalg::TensorFactorization::new(vec![2, 2]).unwrap();
        let red = crate::linalg::partial_trace(&(&v * v.adjoint()), &f, &[0]).unwrap();
        assert!(crate::linalg::max_abs_diff(&red, rho.matrix()) < 1e-14);
    }
}
