//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Tensor products use the row-major convention: in `A ⊗ B` the leftmost
//! factor is the most significant index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entrywise tolerance (relative to the largest entry) for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues below `-PSD_TOL * max(1, ‖A‖)` make an operator non-PSD.
pub const PSD_TOL: f64 = 1e-9;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Builds a complex matrix from real entries given row by row.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols, "real_matrix: wrong entry count");
    CMatrix::from_fn(rows, cols, |i, j| r(data[i * cols + j]))
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn basis_vector(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = r(1.0);
    v
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for m in ms {
        out = out.kronecker(*m);
    }
    out
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// `max |(U†U - I)_{ij}|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.ncols()))
}

pub fn check_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    let residual = unitarity_residual(u);
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

pub fn check_square(m: &CMatrix, context: &'static str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn check_dim(expected: usize, found: usize, context: &'static str) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        Hermitian::symmetrized(scaled * self.vectors.adjoint())
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|` for complex-valued `f`.
    pub fn map_complex(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigendecomposition of a matrix assumed Hermitian (only its Hermitian part is used).
pub fn eigh_matrix(m: &CMatrix) -> Result<Eigh> {
    let d = check_square(m, "eigh")?;
    if d == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let herm = (m + m.adjoint()) * r(0.5);
    let eig = SymmetricEigen::try_new(herm, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure { dim: d })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigh { values, vectors })
}

/// A validated Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Rejects matrices that are not square or not Hermitian within tolerance,
    /// then symmetrizes away the residual.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m, "Hermitian::new")?;
        let scale = max_abs(&m).max(1.0);
        let deviation = max_abs_diff(&m, &m.adjoint());
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Hermitian part `(m + m†)/2`, for operators known to be Hermitian up to rounding.
    pub fn symmetrized(m: CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "Hermitian::symmetrized: non-square input");
        let h = (&m + m.adjoint()) * r(0.5);
        Hermitian(h)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Hermitian(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                r(values[i])
            } else {
                r(0.0)
            }
        }))
    }

    pub fn zeros(d: usize) -> Self {
        Hermitian(CMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Hermitian(identity(d))
    }

    pub fn projector(v: &CVector) -> Self {
        Self::symmetrized(projector(v))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eigh(&self) -> Result<Eigh> {
        eigh_matrix(&self.0)
    }

    /// `λ_max - λ_min`.
    pub fn spread(&self) -> Result<f64> {
        let e = self.eigh()?;
        Ok(e.max() - e.min())
    }

    /// `Tr[ρ H]` as a real number.
    pub fn expectation(&self, rho: &CMatrix) -> f64 {
        trace_product(rho, &self.0).re
    }

    /// `⟨v|H|v⟩` for a (not necessarily normalized) vector.
    pub fn expectation_vec(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.0 * v)).re
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Hermitian(&self.0 * r(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Hermitian(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Hermitian(&self.0 - &other.0)
    }

    pub fn shift(&self, s: f64) -> Self {
        Hermitian(&self.0 + identity(self.dim()) * r(s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Hermitian(kron(&self.0, &other.0))
    }

    /// `U† H U` for a square `U`, or `V† H V` for an isometry.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::symmetrized(u.adjoint() * &self.0 * u)
    }

    pub fn square(&self) -> Self {
        Self::symmetrized(&self.0 * &self.0)
    }

    pub fn operator_norm(&self) -> Result<f64> {
        let e = self.eigh()?;
        Ok(e.max().abs().max(e.min().abs()))
    }

    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigh()?.values.iter().map(|v| v.abs()).sum())
    }
}

/// Jordan decomposition `H = H₊ - H₋` with both parts positive semidefinite.
pub fn jordan_parts(h: &Hermitian) -> Result<(Hermitian, Hermitian)> {
    let e = h.eigh()?;
    Ok((e.map(|x| x.max(0.0)), e.map(|x| (-x).max(0.0))))
}

fn check_psd(e: &Eigh, scale: f64) -> Result<()> {
    if e.min() < -PSD_TOL * scale.max(1.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    Ok(())
}

/// Principal square root of a positive semidefinite operator.
pub fn psd_sqrt(h: &Hermitian) -> Result<Hermitian> {
    let e = h.eigh()?;
    check_psd(&e, e.max().abs())?;
    Ok(e.map(|x| x.max(0.0).sqrt()))
}

/// `H^{-1/2}` on the eigenspaces with eigenvalue above `cutoff`, zero elsewhere.
pub fn pseudo_inverse_sqrt(h: &Hermitian, cutoff: f64) -> Result<Hermitian> {
    let e = h.eigh()?;
    check_psd(&e, e.max().abs())?;
    Ok(e.map(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 }))
}

/// Projector onto the eigenspaces with eigenvalue above `cutoff`.
pub fn support_projector(h: &Hermitian, cutoff: f64) -> Result<Hermitian> {
    let e = h.eigh()?;
    Ok(e.map(|x| if x > cutoff { 1.0 } else { 0.0 }))
}

/// `exp(i t H)`.
pub fn exp_i(h: &Hermitian, t: f64) -> Result<CMatrix> {
    let e = h.eigh()?;
    Ok(e.map_complex(|x| C64::from_polar(1.0, t * x)))
}

/// Local dimensions of a tensor-product space, leftmost factor most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorFactorization {
    dims: Vec<usize>,
}

impl TensorFactorization {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidInput(format!(
                "tensor factor dimensions must be positive, got {dims:?}"
            )));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Splits a flat index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn flat(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their original order.
pub fn partial_trace(m: &CMatrix, fact: &TensorFactorization, keep: &[usize]) -> Result<CMatrix> {
    let n = check_square(m, "partial_trace")?;
    check_dim(fact.total(), n, "partial_trace")?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= fact.len()) {
        return Err(Error::InvalidInput(format!(
            "invalid factor selection {keep:?} for {} factors",
            fact.len()
        )));
    }
    let traced: Vec<usize> = (0..fact.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| fact.dims()[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| fact.dims()[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    // groups[t][k] = flat index of (kept multi-index k, traced multi-index t)
    let mut groups = vec![vec![0usize; dk]; dt];
    for i in 0..n {
        let digits = fact.digits(i);
        let k = keep_sorted
            .iter()
            .zip(&kept_dims)
            .fold(0, |acc, (&f, &d)| acc * d + digits[f]);
        let t = traced
            .iter()
            .zip(&traced_dims)
            .fold(0, |acc, (&f, &d)| acc * d + digits[f]);
        groups[t][k] = i;
    }
    let mut out = CMatrix::zeros(dk, dk);
    for g in &groups {
        for (a, &ia) in g.iter().enumerate() {
            for (b, &ib) in g.iter().enumerate() {
                out[(a, b)] += m[(ia, ib)];
            }
        }
    }
    Ok(out)
}

/// Reorders tensor factors: output factor `j` is input factor `perm[j]`.
pub fn permute_factors(m: &CMatrix, fact: &TensorFactorization, perm: &[usize]) -> Result<CMatrix> {
    let n = check_square(m, "permute_factors")?;
    check_dim(fact.total(), n, "permute_factors")?;
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..fact.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidInput(format!("{perm:?} is not a permutation")));
    }
    let new_fact = TensorFactorization::new(perm.iter().map(|&p| fact.dims()[p]).collect())?;
    let map: Vec<usize> = (0..n)
        .map(|i| {
            let digits = fact.digits(i);
            let permuted: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
            new_fact.flat(&permuted)
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0)])
    }

    #[test]
    fn eigenvalues_of_pauli_y() {
        let e = eigh_matrix(&pauli_y()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let rebuilt = e.map(|x| x);
        assert!(max_abs_diff(rebuilt.matrix(), &pauli_y()) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = real_matrix(2, 2, &[0.7, 0.1, 0.1, 0.3]);
        let b = real_matrix(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25]);
        let ab = kron(&a, &b);
        let f = TensorFactorization::new(vec![2, 3]).unwrap();
        assert!(max_abs_diff(&partial_trace(&ab, &f, &[0]).unwrap(), &a) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&ab, &f, &[1]).unwrap(), &b) < 1e-15);
    }

    #[test]
    fn permutation_swaps_kron_order() {
        let a = real_matrix(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = real_matrix(3, 3, &[1.0, 0.0, 5.0, 0.0, 2.0, 0.0, 7.0, 0.0, 3.0]);
        let f = TensorFactorization::new(vec![2, 3]).unwrap();
        let swapped = permute_factors(&kron(&a, &b), &f, &[1, 0]).unwrap();
        assert!(max_abs_diff(&swapped, &kron(&b, &a)) < 1e-15);
    }

    #[test]
    fn jordan_parts_recombine() {
        let h = Hermitian::new(pauli_y() + real_matrix(2, 2, &[0.3, 0.0, 0.0, -0.1])).unwrap();
        let (p, n) = jordan_parts(&h).unwrap();
        assert!(max_abs_diff(&(p.matrix() - n.matrix()), h.matrix()) < 1e-14);
        assert!(trace_product(p.matrix(), n.matrix()).norm() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let h = Hermitian::new(real_matrix(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let s = psd_sqrt(&h).unwrap();
        assert!(max_abs_diff(&(s.matrix() * s.matrix()), h.matrix()) < 1e-13);
        let inv = pseudo_inverse_sqrt(&h, 1e-12).unwrap();
        let prod = inv.matrix() * h.matrix() * inv.matrix();
        assert!(max_abs_diff(&prod, &identity(2)) < 1e-13);
    }

    #[test]
    fn norms_of_diagonal() {
        let m = real_matrix(2, 2, &[3.0, 0.0, 0.0, -4.0]);
        assert!((trace_norm(&m) - 7.0).abs() < 1e-12);
        assert!((operator_norm(&m) - 4.0).abs() < 1e-12);
    }
}
