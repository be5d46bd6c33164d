//! Consequences of the trade-off for measurements, unitary gates, exact channel
//! implementation and covariant error-correcting codes, plus a battery-assisted
//! construction that realizes gates and measurements under a conservation law.

use serde::{Deserialize, Serialize};

use crate::channels::{compose, erasure_noise_channel, isometry_channel, Implementation, KrausChannel, MeasurementChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, commutator, identity, kron, max_abs, operator_norm, projector, r, unitarity_residual, CMatrix,
    CVector, Hermitian, TensorFactorization,
};
use crate::optimize::maximize_over_span;
use crate::random::{haar_unitary, haar_vector, stream};
use crate::recovery::{optimize_delta, OptimizerBudget};
use crate::states::{distance_from_fidelity, fidelity_matrices, DensityMatrix, TestEnsemble};
use crate::thermo::CostBound;
use crate::tradeoff::{compute_c, compute_y, delta_1, ORTHOGONAL_TOL};

/// Tolerance on `[X_A', |k⟩⟨k|] = 0` for the pointer of a measurement.
pub const YANASE_TOL: f64 = 1e-9;
/// Tolerance on `V X_L = X_P V` for a covariant code.
pub const CODE_COVARIANCE_TOL: f64 = 1e-8;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidInput(format!("error {epsilon} outside (0, 1]")));
    }
    Ok(())
}

/// Cost lower bound for a POVM `P` approximating the projective measurement `Q` within
/// fidelity error `epsilon`: `(max_k √2‖[X_A, Q_k]‖/ε - Δ')²` with
/// `Δ' = Δ_{X_A} + 2Δ_{X_A'}`, clamped at zero.
pub fn way_bound(
    q_pvm: &MeasurementChannel,
    p_povm: &MeasurementChannel,
    x_a: &Hermitian,
    x_a_out: &Hermitian,
    epsilon: f64,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    crate::linalg::check_dim(q_pvm.dim(), x_a.dim(), "measured system")?;
    crate::linalg::check_dim(p_povm.dim(), x_a.dim(), "approximating measurement")?;
    crate::linalg::check_dim(q_pvm.outcomes(), p_povm.outcomes(), "measurement outcomes")?;
    crate::linalg::check_dim(q_pvm.outcomes(), x_a_out.dim(), "pointer charge")?;
    if !q_pvm.is_projective(1e-9) {
        return Err(Error::InvalidInput("target measurement is not projective".into()));
    }
    let pointer = x_a_out.dim();
    let mut residual = 0.0_f64;
    for k in 0..pointer {
        let pk = projector(&basis_vector(pointer, k));
        residual = residual.max(max_abs(&commutator(x_a_out.matrix(), &pk)));
    }
    if residual > YANASE_TOL {
        return Err(Error::YanaseViolation { residual });
    }
    let strength = q_pvm
        .elements()
        .iter()
        .map(|q| operator_norm(&commutator(x_a.matrix(), q.matrix())))
        .fold(0.0, f64::max);
    let spread = x_a.spread()? + 2.0 * x_a_out.spread()?;
    Ok((std::f64::consts::SQRT_2 * strength / epsilon - spread).max(0.0).powi(2))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GateBound {
    /// Half the spectral spread of `X - U†XU`.
    pub a_value: f64,
    pub commutator_norm: f64,
    pub bound: CostBound,
}

/// `(A/(√2 ε) - 3Δ_X)²` for a channel within fidelity error `ε` of the unitary `U`.
pub fn gate_cost_bound(u: &CMatrix, x: &Hermitian, epsilon: f64) -> Result<GateBound> {
    crate::linalg::check_unitary(u, 1e-10)?;
    crate::linalg::check_dim(x.dim(), u.nrows(), "gate charge")?;
    let change = x.sub(&x.conjugate_by(u));
    let a_value = 0.5 * change.spread()?;
    let commutator_norm = operator_norm(&commutator(u, x.matrix()));
    if a_value < commutator_norm - 1e-8 || a_value > 2.0 * commutator_norm + 1e-8 {
        return Err(Error::Consistency(format!(
            "gate asymmetry {a_value} outside [{commutator_norm}, {}]",
            2.0 * commutator_norm
        )));
    }
    let bound = if epsilon == 0.0 {
        if a_value > 1e-12 {
            CostBound::Unbounded
        } else {
            CostBound::Finite(0.0)
        }
    } else {
        check_epsilon(epsilon)?;
        let v = a_value / (std::f64::consts::SQRT_2 * epsilon) - 3.0 * x.spread()?;
        CostBound::Finite(v.max(0.0).powi(2))
    };
    Ok(GateBound {
        a_value,
        commutator_norm,
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoGo,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct NoGoWitness {
    pub x1: CVector,
    pub x2: CVector,
    /// `|⟨x₁|U†XU|x₂⟩|`.
    pub element: f64,
    /// Largest fixed-point residual of the pair under `N`.
    pub fixed_residual: f64,
}

#[derive(Clone, Debug)]
pub struct NoGoReport {
    pub verdict: Verdict,
    pub witness: Option<NoGoWitness>,
    pub candidates: usize,
}

/// Looks for eigenvectors `x₁ ⊥ x₂` of `X` fixed by `N` with `⟨x₁|U†XU|x₂⟩ ≠ 0`, which
/// rules out an exact implementation of `N∘U` with a finite coherence resource.
/// Degenerate eigenspaces are swept with seeded random bases.
pub fn nogo_channel_check(u: &CMatrix, n: &KrausChannel, x: &Hermitian, seed: u64) -> Result<NoGoReport> {
    crate::linalg::check_unitary(u, 1e-10)?;
    let d = x.dim();
    crate::linalg::check_dim(d, u.nrows(), "no-go unitary")?;
    crate::linalg::check_dim(d, n.dim_in(), "no-go channel input")?;
    crate::linalg::check_dim(d, n.dim_out(), "no-go channel output")?;
    let e = x.eigh()?;
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..d {
        match blocks.last_mut() {
            Some(b) if (e.values[i] - e.values[b[0]]).abs() <= 1e-9 => b.push(i),
            _ => blocks.push(vec![i]),
        }
    }
    let mut candidates: Vec<CVector> = Vec::new();
    for (bi, block) in blocks.iter().enumerate() {
        let basis = CMatrix::from_fn(d, block.len(), |row, c| e.vectors[(row, block[c])]);
        for k in 0..block.len() {
            candidates.push(basis.column(k).into_owned());
        }
        if block.len() > 1 {
            for t in 0..8u64 {
                let rot = haar_unitary(block.len(), &mut stream(seed, ((bi as u64) << 8) | t));
                let turned = &basis * rot;
                for k in 0..block.len() {
                    candidates.push(turned.column(k).into_owned());
                }
            }
        }
    }
    let residuals: Vec<f64> = candidates
        .iter()
        .map(|v| {
            let p = projector(v);
            max_abs(&(n.apply(&p) - &p))
        })
        .collect();
    let moved = x.conjugate_by(u);
    let mut best: Option<NoGoWitness> = None;
    for i in 0..candidates.len() {
        if residuals[i] >= 1e-9 {
            continue;
        }
        for j in 0..candidates.len() {
            if i == j || residuals[j] >= 1e-9 || candidates[i].dotc(&candidates[j]).norm() > 1e-9 {
                continue;
            }
            let element = candidates[i].dotc(&(moved.matrix() * &candidates[j])).norm();
            if element > 1e-6 && best.as_ref().map_or(true, |b| element > b.element) {
                best = Some(NoGoWitness {
                    x1: candidates[i].clone(),
                    x2: candidates[j].clone(),
                    element,
                    fixed_residual: residuals[i].max(residuals[j]),
                });
            }
        }
    }
    Ok(NoGoReport {
        verdict: if best.is_some() { Verdict::NoGo } else { Verdict::Inconclusive },
        witness: best,
        candidates: candidates.len(),
    })
}

/// `Δ_{X_L} / (Δ_{X_L} + 4√2 N max_i Δ_{X_{P_i}})`.
pub fn faist_formula(delta_xl: f64, n: usize, max_delta_p: f64) -> f64 {
    let den = delta_xl + 4.0 * std::f64::consts::SQRT_2 * n as f64 * max_delta_p;
    if den > 0.0 {
        delta_xl / den
    } else {
        0.0
    }
}

/// `{(|j*⟩ ± |j'*⟩)/√2}` built from eigenvectors of the largest and smallest eigenvalue.
pub fn extremal_ensemble(x: &Hermitian) -> Result<TestEnsemble> {
    let e = x.eigh()?;
    let hi = e.vector(e.dim() - 1);
    let lo = e.vector(0);
    let s = r(std::f64::consts::FRAC_1_SQRT_2);
    let plus = (&hi + &lo) * s;
    let minus = (&hi - &lo) * s;
    TestEnsemble::uniform(vec![DensityMatrix::pure(&plus)?, DensityMatrix::pure(&minus)?])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeBound {
    /// `δ` of an explicit recovery after erasure of one random subsystem.
    pub lhs_error: f64,
    /// `C/Δ₁` for orthogonal ensembles, `(C/Δ₁)²` otherwise.
    pub rhs_bound: f64,
    pub faist_style: f64,
    pub c_value: f64,
    pub delta_1: f64,
    /// Spread of `Y - X_L/N`, which vanishes for covariant codes.
    pub y_residual: f64,
}

/// Bounds on the recovery error of a covariant code under erasure of one uniformly
/// chosen subsystem, each replaced by a ground state of its local charge.
pub fn covariant_code_bound(
    encode: &CMatrix,
    x_l: &Hermitian,
    x_p_parts: &[Hermitian],
    ensemble: &TestEnsemble,
    budget: OptimizerBudget,
    seed: u64,
) -> Result<CodeBound> {
    let n = x_p_parts.len();
    if n == 0 {
        return Err(Error::InvalidInput("code needs at least one physical subsystem".into()));
    }
    let dims: Vec<usize> = x_p_parts.iter().map(Hermitian::dim).collect();
    let factors = TensorFactorization::new(dims.clone())?;
    crate::linalg::check_dim(factors.total(), encode.nrows(), "code physical dimension")?;
    crate::linalg::check_dim(x_l.dim(), encode.ncols(), "code logical dimension")?;
    crate::linalg::check_dim(x_l.dim(), ensemble.dim(), "code ensemble")?;
    let iso = (encode.adjoint() * encode - identity(encode.ncols())).norm();
    if iso > 1e-9 {
        return Err(Error::InvalidInput(format!("encoding is not an isometry (residual {iso:.3e})")));
    }

    let mut x_p = CMatrix::zeros(factors.total(), factors.total());
    for (i, part) in x_p_parts.iter().enumerate() {
        let left: usize = dims[..i].iter().product();
        let right: usize = dims[i + 1..].iter().product();
        x_p += kron(&kron(&identity(left), part.matrix()), &identity(right));
    }
    let residual = (encode * x_l.matrix() - &x_p * encode).norm();
    if residual > CODE_COVARIANCE_TOL {
        return Err(Error::NotCovariantCode { residual });
    }

    let grounds: Vec<CVector> = x_p_parts.iter().map(|p| p.eigh().map(|e| e.vector(0))).collect::<Result<_>>()?;
    let noise = erasure_noise_channel(&factors, &grounds)?;
    let forward = compose(&noise, &isometry_channel(encode)?)?;
    let x_out = Hermitian::symmetrized(kron(&identity(n), &x_p));
    let y = compute_y(&forward, x_l, &x_out)?;
    let c_value = compute_c(ensemble, &y)?;
    let d1 = delta_1(x_l, &x_out)?;
    let y_residual = y.sub(&x_l.scale(1.0 / n as f64)).spread()?;

    let lhs_error = optimize_delta(ensemble, &forward, budget, seed)?.delta_upper;
    let ratio = if d1 > 0.0 { c_value / d1 } else { 0.0 };
    let rhs_bound = if ensemble.is_orthogonal(ORTHOGONAL_TOL)? { ratio } else { ratio * ratio };
    let max_dp = x_p_parts
        .iter()
        .map(Hermitian::spread)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CodeBound {
        lhs_error,
        rhs_bound,
        faist_style: faist_formula(x_l.spread()?, n, max_dp),
        c_value,
        delta_1: d1,
        y_residual,
    })
}

/// Largest `D_F(a(ψ), b(ψ))` found over `probes` seeded pure inputs, the computational
/// basis and a local search started from the worst of them. A lower estimate of the
/// true maximum over all inputs.
pub fn max_output_distance(a: &KrausChannel, b: &KrausChannel, probes: usize, seed: u64) -> Result<f64> {
    crate::linalg::check_dim(a.dim_in(), b.dim_in(), "compared channels")?;
    crate::linalg::check_dim(a.dim_out(), b.dim_out(), "compared channels")?;
    let d = a.dim_in();
    let objective = |v: &CVector| {
        let p = projector(v);
        distance_from_fidelity(fidelity_matrices(&a.apply(&p), &b.apply(&p)).unwrap_or(0.0))
    };
    let mut rng = stream(seed, 0x5eed);
    let cands: Vec<CVector> = (0..probes).map(|_| haar_vector(d, &mut rng)).collect();
    let (v, _) = maximize_over_span(&identity(d), &objective, &cands, 2, 200, seed);
    Ok(v.clamp(0.0, 1.0))
}

/// Qubit `A` with `X_A = |1⟩⟨1|` and a battery with `X_B = diag(0, …, d-1)` prepared in
/// a uniform superposition of `window` charge levels centred in the ladder. The
/// interaction rotates by `theta` inside every two-level charge sector
/// `span{|0, b+1⟩, |1, b⟩}`, which approximates `exp(-iθσ_y)` on the qubit.
pub fn battery_rotation(theta: f64, d: usize, window: usize) -> Result<Implementation> {
    if d < 2 || window == 0 || window > d - 1 {
        return Err(Error::InvalidInput(format!(
            "battery needs 2 ≤ d and 1 ≤ window ≤ d - 1, got d = {d}, window = {window}"
        )));
    }
    let (cs, sn) = (theta.cos(), theta.sin());
    let mut u = identity(2 * d);
    let idx = |a: usize, b: usize| a * d + b;
    for b in 0..(d - 1) {
        let (p, q) = (idx(0, b + 1), idx(1, b));
        u[(p, p)] = r(cs);
        u[(p, q)] = r(-sn);
        u[(q, p)] = r(sn);
        u[(q, q)] = r(cs);
    }
    let start = (d - window) / 2;
    let mut beta = CVector::zeros(d);
    for b in start..start + window {
        beta[b] = r(1.0 / (window as f64).sqrt());
    }
    let x_a = Hermitian::diagonal(&[0.0, 1.0]);
    let x_b = Hermitian::diagonal(&(0..d).map(|b| b as f64).collect::<Vec<_>>());
    Implementation::new(u, DensityMatrix::pure(&beta)?, x_a.clone(), x_b.clone(), x_a, x_b)
}

/// Measurement built from [`battery_rotation`] by `-π/4`, which maps `|±⟩` to `|0⟩, |1⟩`,
/// followed by a CNOT copying the qubit into a pointer qubit with zero charge. The
/// output `A'` is the qubit read in the computational basis.
pub fn battery_measurement(d: usize, window: usize) -> Result<Implementation> {
    let rot = battery_rotation(-std::f64::consts::FRAC_PI_4, d, window)?;
    let cnot = CMatrix::from_fn(4, 4, |i, j| {
        let target = if j >= 2 { j ^ 1 } else { j };
        r(if i == target { 1.0 } else { 0.0 })
    });
    // Order A ⊗ battery ⊗ pointer; the CNOT acts on A and the pointer.
    let mut copy = CMatrix::zeros(4 * d, 4 * d);
    for a in 0..2 {
        for b in 0..d {
            for e in 0..2 {
                for a2 in 0..2 {
                    for e2 in 0..2 {
                        let v = cnot[(a2 * 2 + e2, a * 2 + e)];
                        if v.norm() > 0.0 {
                            copy[((a2 * d + b) * 2 + e2, (a * d + b) * 2 + e)] = v;
                        }
                    }
                }
            }
        }
    }
    let u = copy * kron(rot.unitary(), &identity(2));
    let pointer = basis_vector(2, 0);
    let rho_b = DensityMatrix::from_computed(kron(rot.rho_b().matrix(), &projector(&pointer)))?;
    let x_b = Hermitian::symmetrized(kron(rot.x_b().matrix(), &identity(2)));
    debug_assert!(unitarity_residual(&u) < 1e-10);
    Implementation::new(u, rho_b, rot.x_a().clone(), x_b.clone(), rot.x_a().clone(), x_b)
}

/// The POVM `P_k = E†(|k⟩⟨k|)` realized by reading the output of `ch` in the
/// computational basis.
pub fn induced_povm(ch: &KrausChannel) -> Result<MeasurementChannel> {
    let d = ch.dim_out();
    let elements = (0..d)
        .map(|k| ch.dual_hermitian(&Hermitian::projector(&basis_vector(d, k))))
        .collect::<Result<Vec<_>>>()?;
    MeasurementChannel::new(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing_channel, depolarizing_channel, unitary_channel};
    use crate::linalg::real_matrix;

    fn hadamard() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        real_matrix(2, 2, &[s, s, s, -s])
    }

    #[test]
    fn hadamard_asymmetry() {
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        let g = gate_cost_bound(&hadamard(), &z, 0.1).unwrap();
        assert!((g.a_value - std::f64::consts::SQRT_2).abs() < 1e-9);
        let none = gate_cost_bound(&identity(2), &z, 0.0).unwrap();
        assert_eq!(none.bound, CostBound::Finite(0.0));
        assert!(gate_cost_bound(&hadamard(), &z, 0.0).unwrap().bound.is_unbounded());
    }

    #[test]
    fn way_plus_minus() {
        let q = MeasurementChannel::projective(&hadamard()).unwrap();
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        let v = way_bound(&q, &q, &z, &Hermitian::zeros(2), 0.1).unwrap();
        let expected = (std::f64::consts::SQRT_2 / 0.1 - 2.0).powi(2);
        assert!((v - expected).abs() < 1e-9);
        let bad = Hermitian::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!(matches!(way_bound(&q, &q, &z, &bad, 0.1), Err(Error::YanaseViolation { .. })));
    }

    #[test]
    fn nogo_rotated_dephasing() {
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        let deph = dephasing_channel(&z).unwrap();
        let t = 0.3_f64;
        let rot = real_matrix(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert_eq!(nogo_channel_check(&rot, &deph, &z, 1).unwrap().verdict, Verdict::NoGo);
        assert_eq!(nogo_channel_check(&identity(2), &deph, &z, 1).unwrap().verdict, Verdict::Inconclusive);
        let dep = depolarizing_channel(2, 1.0).unwrap();
        assert_eq!(nogo_channel_check(&rot, &dep, &z, 1).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn battery_is_conserving_and_close_to_rotation() {
        let imp = battery_rotation(0.4, 12, 8).unwrap();
        assert!(imp.is_conserving(1e-9));
        let t = 0.4_f64;
        let target = unitary_channel(&real_matrix(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])).unwrap();
        let eps = max_output_distance(&imp.channel().unwrap(), &target, 16, 2).unwrap();
        assert!(eps < 0.3, "{eps}");
        let meas = battery_measurement(8, 6).unwrap();
        assert!(meas.is_conserving(1e-9));
    }

    #[test]
    fn faist_arithmetic() {
        let v = faist_formula(2.0, 3, 1.0);
        assert!((v - 2.0 / (2.0 + 12.0 * std::f64::consts::SQRT_2)).abs() < 1e-12);
    }
}
