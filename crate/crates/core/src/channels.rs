//! Quantum channels in Kraus form and their unitary implementations.

use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, check_square, eigh_matrix, exp_i, identity, kron, max_abs_diff, partial_trace, r,
    unitarity_residual, CMatrix, CVector, Hermitian, TensorFactorization,
};
use crate::states::DensityMatrix;

/// Tolerance on `‖Σ K†K - I‖` for trace preservation.
pub const TP_TOL: f64 = 1e-9;
/// Tolerance on `‖U†U - I‖` for implementations.
pub const UNITARY_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are grouped into one eigenspace.
pub const EIGENSPACE_TOL: f64 = 1e-9;

/// A completely positive trace-preserving map `ρ ↦ Σ K ρ K†`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::new_unchecked(kraus)?;
        let residual = ch.tp_residual();
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    /// Validates shapes only; trace preservation is left to the caller.
    pub(crate) fn new_unchecked(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidInput("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        for k in &kraus {
            check_dim(dim_out, k.nrows(), "Kraus operator rows")?;
            check_dim(dim_in, k.ncols(), "Kraus operator columns")?;
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn tp_residual(&self) -> f64 {
        let mut s = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        max_abs_diff(&s, &identity(self.dim_in))
    }

    /// Applies the channel to an arbitrary operator on the input space.
    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_dim(self.dim_in, rho.dim(), "channel input")?;
        DensityMatrix::from_computed(self.apply(rho.matrix()))
    }

    /// Heisenberg-picture map `X ↦ Σ K† X K`.
    pub fn dual(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * m * k;
        }
        out
    }

    pub fn dual_hermitian(&self, h: &Hermitian) -> Result<Hermitian> {
        check_dim(self.dim_out, h.dim(), "dual channel input")?;
        Ok(Hermitian::symmetrized(self.dual(h.matrix())))
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` on `in ⊗ out`.
    pub fn choi(&self) -> CMatrix {
        let (di, dout) = (self.dim_in, self.dim_out);
        let mut j = CMatrix::zeros(di * dout, di * dout);
        for k in &self.kraus {
            let v = CVector::from_fn(di * dout, |idx, _| k[(idx % dout, idx / dout)]);
            j += &v * v.adjoint();
        }
        j
    }

    /// Number of Choi eigenvalues above `tol` (relative to the largest).
    pub fn kraus_rank(&self, tol: f64) -> Result<usize> {
        let e = eigh_matrix(&self.choi())?;
        let top = e.max().max(f64::MIN_POSITIVE);
        Ok(e.values.iter().filter(|&&v| v > tol * top).count())
    }

    pub fn is_completely_positive(&self) -> Result<bool> {
        let e = eigh_matrix(&self.choi())?;
        Ok(e.min() >= -1e-9 * e.max().abs().max(1.0))
    }

    /// Minimal Kraus representation from the Choi eigendecomposition.
    pub fn canonical(&self) -> Result<Self> {
        let (di, dout) = (self.dim_in, self.dim_out);
        let e = eigh_matrix(&self.choi())?;
        let top = e.max().max(f64::MIN_POSITIVE);
        let mut kraus = Vec::new();
        for (idx, &lam) in e.values.iter().enumerate().rev() {
            if lam <= 1e-13 * top {
                continue;
            }
            let s = lam.sqrt();
            let w = e.vector(idx);
            kraus.push(CMatrix::from_fn(dout, di, |o, i| w[i * dout + o] * r(s)));
        }
        Self::new_unchecked(kraus)
    }

    /// `E ⊗ id_d`.
    pub fn tensor_identity(&self, d: usize) -> Self {
        let id = identity(d);
        Self {
            dim_in: self.dim_in * d,
            dim_out: self.dim_out * d,
            kraus: self.kraus.iter().map(|k| kron(k, &id)).collect(),
        }
    }

    /// `id_d ⊗ E`.
    pub fn identity_tensor(&self, d: usize) -> Self {
        let id = identity(d);
        Self {
            dim_in: self.dim_in * d,
            dim_out: self.dim_out * d,
            kraus: self.kraus.iter().map(|k| kron(&id, k)).collect(),
        }
    }
}

/// `outer ∘ inner`, compressed to a minimal Kraus set when that is smaller.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    check_dim(inner.dim_out, outer.dim_in, "compose")?;
    let mut kraus = Vec::with_capacity(outer.kraus.len() * inner.kraus.len());
    for a in &outer.kraus {
        for b in &inner.kraus {
            kraus.push(a * b);
        }
    }
    let ch = KrausChannel::new(kraus)?;
    if ch.kraus.len() > ch.dim_in * ch.dim_out {
        ch.canonical()
    } else {
        Ok(ch)
    }
}

pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel {
        dim_in: d,
        dim_out: d,
        kraus: vec![identity(d)],
    }
}

pub fn unitary_channel(u: &CMatrix) -> Result<KrausChannel> {
    check_square(u, "unitary_channel")?;
    let residual = unitarity_residual(u);
    if residual > UNITARY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    KrausChannel::new(vec![u.clone()])
}

/// `ρ ↦ V ρ V†` for an isometry `V` (`V†V = I`).
pub fn isometry_channel(v: &CMatrix) -> Result<KrausChannel> {
    let residual = max_abs_diff(&(v.adjoint() * v), &identity(v.ncols()));
    if residual > UNITARY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    KrausChannel::new(vec![v.clone()])
}

/// `ρ ↦ Tr[ρ] τ`.
pub fn constant_channel(dim_in: usize, tau: &DensityMatrix) -> Result<KrausChannel> {
    let (vals, vecs) = tau.support()?;
    let mut kraus = Vec::new();
    for (lam, v) in vals.iter().zip(&vecs) {
        for j in 0..dim_in {
            let mut k = CMatrix::zeros(tau.dim(), dim_in);
            k.set_column(j, &(v * r(lam.sqrt())));
            kraus.push(k);
        }
    }
    KrausChannel::new(kraus)
}

/// `ρ ↦ (1-p) ρ + p Tr[ρ] I/d`.
pub fn depolarizing_channel(d: usize, p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("depolarizing probability {p}")));
    }
    let mut kraus = vec![identity(d) * r((1.0 - p).sqrt())];
    let s = (p / d as f64).sqrt();
    for i in 0..d {
        for j in 0..d {
            let mut k = CMatrix::zeros(d, d);
            k[(i, j)] = r(s);
            kraus.push(k);
        }
    }
    KrausChannel::new(kraus)
}

/// Spectral projectors of `x`, one per distinct eigenvalue, in ascending order.
pub fn eigenspace_projectors(x: &Hermitian) -> Result<Vec<(f64, CMatrix)>> {
    let e = x.eigh()?;
    let d = e.dim();
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for i in 0..d {
        match out.last_mut() {
            Some((val, idx)) if (e.values[i] - *val).abs() <= EIGENSPACE_TOL => idx.push(i),
            _ => out.push((e.values[i], vec![i])),
        }
    }
    Ok(out
        .into_iter()
        .map(|(val, idx)| {
            let mut p = CMatrix::zeros(d, d);
            for i in idx {
                let v = e.vector(i);
                p += &v * v.adjoint();
            }
            (val, p)
        })
        .collect())
}

/// Pinching onto the eigenspaces of `x`.
pub fn dephasing_channel(x: &Hermitian) -> Result<KrausChannel> {
    let kraus = eigenspace_projectors(x)?.into_iter().map(|(_, p)| p).collect();
    KrausChannel::new(kraus)
}

/// A POVM `{P_k}` viewed as the channel `ρ ↦ Σ_k Tr[P_k ρ] |k⟩⟨k|`.
#[derive(Clone, Debug)]
pub struct MeasurementChannel {
    elements: Vec<Hermitian>,
}

impl MeasurementChannel {
    pub fn new(elements: Vec<Hermitian>) -> Result<Self> {
        let d = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("POVM needs at least one element".into()))?
            .dim();
        let mut sum = CMatrix::zeros(d, d);
        for p in &elements {
            check_dim(d, p.dim(), "POVM element")?;
            let e = p.eigh()?;
            if e.min() < -1e-10 {
                return Err(Error::NotPsd {
                    min_eigenvalue: e.min(),
                });
            }
            sum += p.matrix();
        }
        let residual = max_abs_diff(&sum, &identity(d));
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { elements })
    }

    /// Projective measurement in the orthonormal basis given by the columns of `basis`.
    pub fn projective(basis: &CMatrix) -> Result<Self> {
        let elements = (0..basis.ncols())
            .map(|k| Hermitian::projector(&basis.column(k).into_owned()))
            .collect();
        Self::new(elements)
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    /// Outcome probabilities `Tr[P_k ρ]`.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|p| p.expectation(rho)).collect()
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        self.elements
            .iter()
            .all(|p| max_abs_diff(&(p.matrix() * p.matrix()), p.matrix()) <= tol)
    }

    pub fn channel(&self) -> Result<KrausChannel> {
        let n = self.outcomes();
        let d = self.dim();
        let mut kraus = Vec::new();
        for (k, p) in self.elements.iter().enumerate() {
            let e = p.eigh()?;
            for (i, &lam) in e.values.iter().enumerate() {
                if lam <= 1e-14 {
                    continue;
                }
                let v = e.vector(i);
                let mut op = CMatrix::zeros(n, d);
                for j in 0..d {
                    op[(k, j)] = v[j].conj() * r(lam.sqrt());
                }
                kraus.push(op);
            }
        }
        KrausChannel::new(kraus)
    }
}

/// Erasure of one uniformly chosen subsystem `P_i`, which is replaced by `|τ_i⟩`
/// while a classical flag `|i⟩` is written to a memory `M`. Output lives on `M ⊗ P`.
pub fn erasure_noise_channel(
    factors: &TensorFactorization,
    replacements: &[CVector],
) -> Result<KrausChannel> {
    let n = factors.len();
    check_dim(n, replacements.len(), "erasure replacement states")?;
    let dims = factors.dims();
    let total = factors.total();
    let s = r(1.0 / (n as f64).sqrt());
    let mut kraus = Vec::new();
    for (i, tau) in replacements.iter().enumerate() {
        check_dim(dims[i], tau.len(), "erasure replacement state")?;
        let left: usize = dims[..i].iter().product();
        let right: usize = dims[i + 1..].iter().product();
        let mut flag = CMatrix::zeros(n, 1);
        flag[(i, 0)] = r(1.0);
        for e in 0..dims[i] {
            let mut local = CMatrix::zeros(dims[i], dims[i]);
            for a in 0..dims[i] {
                local[(a, e)] = tau[a];
            }
            let on_p = kron(&kron(&identity(left), &local), &identity(right));
            debug_assert_eq!(on_p.nrows(), total);
            kraus.push(kron(&flag, &on_p) * s);
        }
    }
    KrausChannel::new(kraus)
}

/// Dimensions of `A ⊗ B → A' ⊗ B'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImplementationDims {
    pub a: usize,
    pub b: usize,
    pub a_out: usize,
    pub b_out: usize,
}

/// Unitary implementation `E(ρ) = Tr_{B'}[U (ρ ⊗ ρ_B) U†]` together with the charges
/// on every subsystem.
#[derive(Clone, Debug)]
pub struct Implementation {
    dims: ImplementationDims,
    unitary: CMatrix,
    rho_b: DensityMatrix,
    x_a: Hermitian,
    x_b: Hermitian,
    x_a_out: Hermitian,
    x_b_out: Hermitian,
    defect: Hermitian,
}

impl Implementation {
    pub fn new(
        unitary: CMatrix,
        rho_b: DensityMatrix,
        x_a: Hermitian,
        x_b: Hermitian,
        x_a_out: Hermitian,
        x_b_out: Hermitian,
    ) -> Result<Self> {
        let dims = ImplementationDims {
            a: x_a.dim(),
            b: x_b.dim(),
            a_out: x_a_out.dim(),
            b_out: x_b_out.dim(),
        };
        check_dim(dims.b, rho_b.dim(), "implementation environment state")?;
        check_dim(dims.a * dims.b, dims.a_out * dims.b_out, "implementation output")?;
        check_dim(dims.a * dims.b, check_square(&unitary, "implementation unitary")?, "implementation unitary")?;
        let residual = unitarity_residual(&unitary);
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        let total_in = x_a.kron(&Hermitian::identity(dims.b)).add(&Hermitian::identity(dims.a).kron(&x_b));
        let total_out = x_a_out
            .kron(&Hermitian::identity(dims.b_out))
            .add(&Hermitian::identity(dims.a_out).kron(&x_b_out));
        let defect = total_out.conjugate_by(&unitary).sub(&total_in);
        Ok(Self {
            dims,
            unitary,
            rho_b,
            x_a,
            x_b,
            x_a_out,
            x_b_out,
            defect,
        })
    }

    pub fn dims(&self) -> ImplementationDims {
        self.dims
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn rho_b(&self) -> &DensityMatrix {
        &self.rho_b
    }

    pub fn x_a(&self) -> &Hermitian {
        &self.x_a
    }

    pub fn x_b(&self) -> &Hermitian {
        &self.x_b
    }

    pub fn x_a_out(&self) -> &Hermitian {
        &self.x_a_out
    }

    pub fn x_b_out(&self) -> &Hermitian {
        &self.x_b_out
    }

    /// `Z = U†(X_A' + X_B')U - (X_A + X_B)`.
    pub fn conservation_defect(&self) -> &Hermitian {
        &self.defect
    }

    /// Spectral spread of the conservation defect.
    pub fn defect_spread(&self) -> Result<f64> {
        self.defect.spread()
    }

    pub fn is_conserving(&self, tol: f64) -> bool {
        crate::linalg::max_abs(self.defect.matrix()) <= tol
    }

    /// The induced channel `A → A'`.
    pub fn channel(&self) -> Result<KrausChannel> {
        let d = self.dims;
        let (vals, vecs) = self.rho_b.support()?;
        let mut kraus = Vec::with_capacity(vals.len() * d.b_out);
        for (q, b) in vals.iter().zip(&vecs) {
            let embed = kron(&identity(d.a), &CMatrix::from_column_slice(d.b, 1, b.as_slice()));
            let full = &self.unitary * embed;
            for m in 0..d.b_out {
                let k = CMatrix::from_fn(d.a_out, d.a, |ap, a| full[(ap * d.b_out + m, a)] * r(q.sqrt()));
                kraus.push(k);
            }
        }
        let ch = KrausChannel::new(kraus)?;
        debug_assert!(ch.is_completely_positive().unwrap_or(false));
        Ok(ch)
    }

    /// `Tr_{B'}[U (ρ ⊗ ρ_B) U†]` evaluated directly on the dilation.
    pub fn apply_dilation(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.dims;
        check_dim(d.a, rho.nrows(), "dilation input")?;
        let joint = &self.unitary * kron(rho, self.rho_b.matrix()) * self.unitary.adjoint();
        let f = TensorFactorization::new(vec![d.a_out, d.b_out])?;
        partial_trace(&joint, &f, &[0])
    }
}

/// Result of sampling the covariance condition on an angle grid.
#[derive(Clone, Copy, Debug)]
pub struct CovarianceCheck {
    pub max_deviation: f64,
    pub covariant: bool,
}

/// Compares `E(e^{-iXt} ρ e^{iXt})` with `e^{-iX't} E(ρ) e^{iX't}` on all matrix units for
/// `n_angles` angles spread over several periods, including incommensurate ones.
pub fn is_covariant(
    ch: &KrausChannel,
    x_in: &Hermitian,
    x_out: &Hermitian,
    n_angles: usize,
) -> Result<CovarianceCheck> {
    check_dim(ch.dim_in(), x_in.dim(), "covariance input charge")?;
    check_dim(ch.dim_out(), x_out.dim(), "covariance output charge")?;
    let n = n_angles.max(1);
    let golden = 0.618_033_988_749_894_9;
    let mut worst = 0.0_f64;
    for j in 0..n {
        let t = if j % 2 == 0 {
            std::f64::consts::TAU * (j as f64 + golden) / n as f64
        } else {
            std::f64::consts::SQRT_2 * (j as f64 + 1.0)
        };
        let ui = exp_i(x_in, -t)?;
        let uo = exp_i(x_out, -t)?;
        for a in 0..ch.dim_in() {
            for b in 0..ch.dim_in() {
                let mut unit = CMatrix::zeros(ch.dim_in(), ch.dim_in());
                unit[(a, b)] = r(1.0);
                let lhs = ch.apply(&(&ui * &unit * ui.adjoint()));
                let rhs = &uo * ch.apply(&unit) * uo.adjoint();
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    Ok(CovarianceCheck {
        max_deviation: worst,
        covariant: worst < 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, max_abs_diff, real_matrix};

    fn cnot() -> CMatrix {
        real_matrix(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0,
            ],
        )
    }

    #[test]
    fn cnot_dilation_dephases() {
        let z = Hermitian::diagonal(&[0.0, 1.0]);
        let imp = Implementation::new(
            cnot(),
            DensityMatrix::basis(2, 0),
            z.clone(),
            Hermitian::zeros(2),
            z.clone(),
            Hermitian::zeros(2),
        )
        .unwrap();
        assert!(imp.is_conserving(1e-14));
        let ch = imp.channel().unwrap();
        let deph = dephasing_channel(&z).unwrap();
        let rho = real_matrix(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(max_abs_diff(&ch.apply(&rho), &deph.apply(&rho)) < 1e-14);
        assert!(max_abs_diff(&imp.apply_dilation(&rho).unwrap(), &ch.apply(&rho)) < 1e-14);
        assert!(is_covariant(&ch, &z, &z, 8).unwrap().covariant);
    }

    #[test]
    fn choi_rank_and_canonical_form() {
        let ch = depolarizing_channel(2, 0.3).unwrap();
        assert_eq!(ch.kraus_rank(1e-10).unwrap(), 4);
        let can = ch.canonical().unwrap();
        assert_eq!(can.kraus().len(), 4);
        assert!(max_abs_diff(&can.choi(), &ch.choi()) < 1e-13);
        assert_eq!(identity_channel(3).kraus_rank(1e-10).unwrap(), 1);
    }

    #[test]
    fn dual_is_adjoint() {
        let ch = depolarizing_channel(2, 0.4).unwrap();
        let a = real_matrix(2, 2, &[0.3, 0.2, 0.2, 0.7]);
        let b = real_matrix(2, 2, &[1.0, -0.5, -0.5, 2.0]);
        let lhs = crate::linalg::trace_product(&ch.apply(&a), &b);
        let rhs = crate::linalg::trace_product(&a, &ch.dual(&b));
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn erasure_writes_flag() {
        let f = TensorFactorization::new(vec![2, 2]).unwrap();
        let zero = basis_vector(2, 0);
        let ch = erasure_noise_channel(&f, &[zero.clone(), zero]).unwrap();
        assert_eq!(ch.dim_out(), 8);
        let rho = DensityMatrix::basis(4, 3);
        let out = ch.apply(rho.matrix());
        // flag 0: qubit 0 reset, |01⟩; flag 1: qubit 1 reset, |10⟩
        assert!((out[(1, 1)].re - 0.5).abs() < 1e-14);
        assert!((out[(4 + 2, 4 + 2)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_tp() {
        let k = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!(matches!(KrausChannel::new(vec![k]), Err(Error::NotTracePreserving { .. })));
    }
}
