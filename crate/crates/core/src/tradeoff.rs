//! The symmetry / irreversibility / coherence-cost trade-off and its ingredients.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channels::{Implementation, KrausChannel};
use crate::error::{Error, Result};
use crate::fisher::{pure_qfi, qfi_from_support, sld_qfi, variance};
use crate::linalg::{
    check_dim, commutator, identity, kron, kron_vec, operator_norm, trace_product, CMatrix, CVector,
    Hermitian,
};
use crate::optimize::maximize_over_span;
use crate::states::{trace_distance, DensityMatrix, TestEnsemble};

/// A report counts as a violation when its slack drops below `-SLACK_TOL`.
pub const SLACK_TOL: f64 = 1e-7;
/// Pairwise fidelity below which an ensemble counts as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-6;
/// Numerators (`C`, or `C - Δ_Z/2`) at or below this are rounding noise and give a zero
/// left-hand side; otherwise a rounding-level `C` over a rounding-level denominator can
/// produce an order-one ratio.
pub const ZERO_NUMERATOR_TOL: f64 = 1e-12;

/// `Y = X_A - E†(X_A')`.
pub fn compute_y(ch: &KrausChannel, x_a: &Hermitian, x_a_out: &Hermitian) -> Result<Hermitian> {
    check_dim(ch.dim_in(), x_a.dim(), "compute_y input charge")?;
    Ok(x_a.sub(&ch.dual_hermitian(x_a_out)?))
}

/// `C = √(Σ_{k≠k'} p_k p_k' Tr[(ρ_k - ρ_k')₊ Y (ρ_k - ρ_k')₋ Y])`.
///
/// Each trace is evaluated as `Σ λ_i |μ_j| |⟨u_j|Y|v_i⟩|²` over the positive (`λ_i, v_i`)
/// and negative (`μ_j, u_j`) eigenpairs of the difference, which is nonnegative term by
/// term and keeps `C` accurate when it is close to zero.
pub fn compute_c(ensemble: &TestEnsemble, y: &Hermitian) -> Result<f64> {
    check_dim(ensemble.dim(), y.dim(), "compute_c")?;
    let w = ensemble.weights();
    let s = ensemble.states();
    let mut total = 0.0;
    for i in 0..s.len() {
        for j in 0..s.len() {
            if i == j {
                continue;
            }
            let e = Hermitian::symmetrized(s[i].matrix() - s[j].matrix()).eigh()?;
            let yv: Vec<(f64, CVector)> = (0..e.dim())
                .filter(|&k| e.values[k] > 0.0)
                .map(|k| (e.values[k], y.matrix() * e.vector(k)))
                .collect();
            let mut term = 0.0;
            for k in (0..e.dim()).filter(|&k| e.values[k] < 0.0) {
                let u = e.vector(k);
                for (lam, v) in &yv {
                    term += lam * (-e.values[k]) * u.dotc(v).norm_sqr();
                }
            }
            total += w[i] * w[j] * term;
        }
    }
    Ok(total.sqrt())
}

/// `Δ₁ = Δ_{X_A} + Δ_{X_A'}`.
pub fn delta_1(x_a: &Hermitian, x_a_out: &Hermitian) -> Result<f64> {
    Ok(x_a.spread()? + x_a_out.spread()?)
}

/// `Δ₂ = Δ_Y + 2 √‖E†(X_A'²) - E†(X_A')²‖_∞`.
///
/// The gap equals `W†W` for the stacked blocks `W_i = X_A' K_i - K_i E†(X_A')`, so its
/// root is `‖W‖_∞`, which avoids taking the square root of a rounding-level norm.
pub fn delta_2(ch: &KrausChannel, x_a: &Hermitian, x_a_out: &Hermitian) -> Result<f64> {
    let y = compute_y(ch, x_a, x_a_out)?;
    check_dim(ch.dim_out(), x_a_out.dim(), "delta_2 output charge")?;
    let first = ch.dual_hermitian(x_a_out)?;
    let (d_out, d_in) = (ch.dim_out(), ch.dim_in());
    let mut w = CMatrix::zeros(d_out * ch.kraus().len(), d_in);
    for (i, k) in ch.kraus().iter().enumerate() {
        let block = x_a_out.matrix() * k - k * first.matrix();
        w.rows_mut(i * d_out, d_out).copy_from(&block);
    }
    Ok(y.spread()? + 2.0 * operator_norm(&w))
}

/// Budget for the maximizations over pure states in the span of the test supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanSearch {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SpanSearch {
    fn default() -> Self {
        Self {
            restarts: 16,
            iterations: 400,
            seed: 0,
        }
    }
}

/// QFI of `ψ ⊗ ρ_B` for the operator `w` on `A ⊗ B`.
struct ProductQfi {
    q: Vec<f64>,
    b: Vec<CVector>,
}

impl ProductQfi {
    fn new(rho_b: &DensityMatrix) -> Result<Self> {
        let (q, b) = rho_b.support()?;
        Ok(Self { q, b })
    }

    fn eval(&self, psi: &CVector, w: &CMatrix) -> f64 {
        let vecs: Vec<CVector> = self.b.iter().map(|b| kron_vec(psi, b)).collect();
        qfi_from_support(&self.q, &vecs, w)
    }
}

fn defect_operator(imp: &Implementation) -> CMatrix {
    let d = imp.dims();
    let left = kron(imp.x_a().matrix(), &identity(d.b));
    let out = kron(imp.x_a_out().matrix(), &identity(d.b_out));
    left - imp.unitary().adjoint() * out * imp.unitary()
}

fn ensemble_candidates(ensemble: &TestEnsemble) -> Result<Vec<CVector>> {
    let mut out = Vec::new();
    for s in ensemble.states() {
        let (_, vecs) = s.support()?;
        out.extend(vecs);
    }
    Ok(out)
}

/// Estimated maximizer and value of
/// `Δ_def = max_ψ √F_{ψ⊗ρ_B}(X_A ⊗ I - U†(X_A' ⊗ I)U)` over pure `ψ` in the span
/// of the test supports.
pub fn delta_def_search(
    ensemble: &TestEnsemble,
    imp: &Implementation,
    search: &SpanSearch,
) -> Result<(f64, CVector)> {
    check_dim(imp.dims().a, ensemble.dim(), "delta_def")?;
    let basis = ensemble.support_basis()?;
    let w = defect_operator(imp);
    let pq = ProductQfi::new(imp.rho_b())?;
    let obj = |psi: &CVector| pq.eval(psi, &w).sqrt();
    let candidates = ensemble_candidates(ensemble)?;
    Ok(maximize_over_span(
        &basis,
        &obj,
        &candidates,
        search.restarts,
        search.iterations,
        search.seed,
    ))
}

pub fn delta_def(ensemble: &TestEnsemble, imp: &Implementation, search: &SpanSearch) -> Result<f64> {
    Ok(delta_def_search(ensemble, imp, search)?.0)
}

/// Estimated `Δ₃ = max_ψ [√F_ψ(Y) + √F_{ψ⊗ρ_B}(U†(X_A' ⊗ I)U - E†(X_A') ⊗ I)]`.
///
/// `extra` candidates are evaluated before the search; passing the maximizer of
/// [`delta_def_search`] keeps the estimate above the one for `Δ_def`.
pub fn delta_3(
    ensemble: &TestEnsemble,
    imp: &Implementation,
    search: &SpanSearch,
    extra: &[CVector],
) -> Result<f64> {
    check_dim(imp.dims().a, ensemble.dim(), "delta_3")?;
    let d = imp.dims();
    let ch = imp.channel()?;
    let y = compute_y(&ch, imp.x_a(), imp.x_a_out())?;
    let pulled = ch.dual_hermitian(imp.x_a_out())?;
    let out = kron(imp.x_a_out().matrix(), &identity(d.b_out));
    let w = imp.unitary().adjoint() * out * imp.unitary() - kron(pulled.matrix(), &identity(d.b));
    let pq = ProductQfi::new(imp.rho_b())?;
    let ym = y.matrix().clone();
    let obj = |psi: &CVector| pure_qfi(psi, &ym).sqrt() + pq.eval(psi, &w).sqrt();
    let mut candidates = ensemble_candidates(ensemble)?;
    candidates.extend_from_slice(extra);
    let basis = ensemble.support_basis()?;
    Ok(maximize_over_span(&basis, &obj, &candidates, search.restarts, search.iterations, search.seed ^ 0x5eed).0)
}

/// `T̄ = √(Σ_{k,k'} p_k p_k' T(ρ_k, ρ_k')²)`.
pub fn mean_trace_distance(ensemble: &TestEnsemble) -> Result<f64> {
    let w = ensemble.weights();
    let s = ensemble.states();
    let mut acc = 0.0;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let t = trace_distance(&s[i], &s[j])?;
            acc += 2.0 * w[i] * w[j] * t * t;
        }
    }
    Ok(acc.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Orthogonal,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaChoice {
    Def,
    D1,
    D2,
    D3,
}

/// Irreversibility of an explicit recovery: purified-distance error `δ` and
/// trace-distance error `δ_T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Irreversibility {
    pub delta: f64,
    pub delta_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub scenario_id: String,
    pub c_value: f64,
    pub delta_def: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_3: f64,
    #[serde(rename = "fisher_B")]
    pub fisher_b: f64,
    pub delta_irrev: f64,
    #[serde(rename = "delta_irrev_T")]
    pub delta_irrev_t: f64,
    #[serde(rename = "delta_Z")]
    pub delta_z: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tight_variant_used: bool,
    pub wall_time_ms: f64,
}

impl TradeoffReport {
    pub fn holds(&self) -> bool {
        self.slack >= -SLACK_TOL
    }

    pub fn ensure_holds(&self) -> Result<()> {
        if self.holds() {
            Ok(())
        } else {
            Err(Error::InequalityViolated {
                lhs: self.lhs,
                rhs: self.rhs,
                slack: self.slack,
            })
        }
    }

    /// The left-hand side is clamped to zero because the defect dominates.
    pub fn is_vacuous(&self) -> bool {
        self.delta_z > 0.0 && self.delta_z >= 2.0 * self.c_value
    }

    pub fn delta(&self, choice: DeltaChoice) -> f64 {
        match choice {
            DeltaChoice::Def => self.delta_def,
            DeltaChoice::D1 => self.delta_1,
            DeltaChoice::D2 => self.delta_2,
            DeltaChoice::D3 => self.delta_3,
        }
    }
}

/// Scalars entering the inequality once all operators have been reduced.
#[derive(Clone, Copy, Debug)]
pub struct BoundInputs {
    pub c: f64,
    pub fisher_b: f64,
    pub delta: f64,
    pub delta_z: f64,
    pub irreversibility: Irreversibility,
    pub min_weight: f64,
    pub mean_trace_distance: f64,
    pub variant: Variant,
}

/// Returns `(lhs, rhs)`:
/// `lhs = max(0, C - Δ_Z/2) / (√F_B + Δ + Δ_Z)` and
/// `rhs = δ √(1 - min p)` (orthogonal) or `√min(δ T̄, δ_T (1 - min p))` (general).
pub fn evaluate_bound(b: &BoundInputs) -> (f64, f64) {
    let num = (b.c - 0.5 * b.delta_z).max(0.0);
    let den = b.fisher_b.max(0.0).sqrt() + b.delta + b.delta_z;
    let lhs = if num <= ZERO_NUMERATOR_TOL {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    };
    let spread = (1.0 - b.min_weight).max(0.0);
    let rhs = match b.variant {
        Variant::Orthogonal => b.irreversibility.delta * spread.sqrt(),
        Variant::General => {
            let multi1 = b.irreversibility.delta * b.mean_trace_distance;
            let multi2 = b.irreversibility.delta_t * spread;
            multi1.min(multi2).max(0.0).sqrt()
        }
    };
    (lhs, rhs)
}

#[derive(Clone, Debug)]
pub struct TradeoffOptions {
    pub variant: Variant,
    pub delta_choice: DeltaChoice,
    pub search: SpanSearch,
    pub scenario_id: String,
}

impl Default for TradeoffOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Orthogonal,
            delta_choice: DeltaChoice::D1,
            search: SpanSearch::default(),
            scenario_id: String::new(),
        }
    }
}

/// Every scalar of the trade-off for one implementation and ensemble.
#[derive(Clone, Debug)]
pub struct TradeoffQuantities {
    pub c: f64,
    pub y: Hermitian,
    pub delta_def: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_3: f64,
    pub fisher_b: f64,
    pub delta_z: f64,
}

pub fn tradeoff_quantities(
    ensemble: &TestEnsemble,
    imp: &Implementation,
    search: &SpanSearch,
) -> Result<TradeoffQuantities> {
    check_dim(imp.dims().a, ensemble.dim(), "tradeoff ensemble")?;
    let ch = imp.channel()?;
    let y = compute_y(&ch, imp.x_a(), imp.x_a_out())?;
    let c = compute_c(ensemble, &y)?;
    let (d_def, psi_def) = delta_def_search(ensemble, imp, search)?;
    let d1 = delta_1(imp.x_a(), imp.x_a_out())?;
    let d2 = delta_2(&ch, imp.x_a(), imp.x_a_out())?;
    let d3 = delta_3(ensemble, imp, search, &[psi_def])?;
    let fisher_b = sld_qfi(imp.rho_b(), imp.x_b())?;
    let delta_z = imp.defect_spread()?;
    Ok(TradeoffQuantities {
        c,
        y,
        delta_def: d_def,
        delta_1: d1,
        delta_2: d2,
        delta_3: d3,
        fisher_b,
        delta_z,
    })
}

/// Evaluates the trade-off inequality. The report is returned whether or not the
/// inequality holds; use [`TradeoffReport::ensure_holds`] to turn a violation into an error.
pub fn check_main_inequality(
    ensemble: &TestEnsemble,
    imp: &Implementation,
    irreversibility: Irreversibility,
    opts: &TradeoffOptions,
) -> Result<TradeoffReport> {
    let start = Instant::now();
    if opts.variant == Variant::Orthogonal && !ensemble.is_orthogonal(ORTHOGONAL_TOL)? {
        return Err(Error::NotOrthogonal {
            overlap: ensemble.max_pairwise_fidelity()?,
        });
    }
    let q = tradeoff_quantities(ensemble, imp, &opts.search)?;
    let delta = match opts.delta_choice {
        DeltaChoice::Def => q.delta_def,
        DeltaChoice::D1 => q.delta_1,
        DeltaChoice::D2 => q.delta_2,
        DeltaChoice::D3 => q.delta_3,
    };
    let inputs = BoundInputs {
        c: q.c,
        fisher_b: q.fisher_b,
        delta,
        delta_z: q.delta_z,
        irreversibility,
        min_weight: ensemble.min_weight(),
        mean_trace_distance: mean_trace_distance(ensemble)?,
        variant: opts.variant,
    };
    let (lhs, rhs) = evaluate_bound(&inputs);
    Ok(TradeoffReport {
        scenario_id: opts.scenario_id.clone(),
        c_value: q.c,
        delta_def: q.delta_def,
        delta_1: q.delta_1,
        delta_2: q.delta_2,
        delta_3: q.delta_3,
        fisher_b: q.fisher_b,
        delta_irrev: irreversibility.delta,
        delta_irrev_t: irreversibility.delta_t,
        delta_z: q.delta_z,
        lhs,
        rhs,
        slack: rhs - lhs,
        tight_variant_used: ensemble.is_two_state_uniform(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Operator-level conversion between a projector on the input and a projector on
/// the output of an implementation.
#[derive(Clone, Copy, Debug)]
pub struct ConversionCheck {
    /// `ε` from `ε² = ⟨Λ†(P)⟩_{(1-Q)ρ(1-Q)} + ⟨1 - Λ†(P)⟩_{QρQ}`.
    pub epsilon: f64,
    /// `|⟨[Q, Y]⟩_ρ|`.
    pub commutator: f64,
    pub delta_s: f64,
    pub fisher_e: f64,
    pub delta_z: f64,
    pub bound: f64,
    pub slack: f64,
}

/// Checks `ε ≥ (|⟨[Q,Y]⟩_ρ| - Δ_Z/2) / (Δ_{S,S',ρ} + Δ_Z + √F_{ρ_E}(X_E))`.
pub fn operator_conversion_check(
    q: &Hermitian,
    p: &Hermitian,
    rho: &DensityMatrix,
    imp: &Implementation,
) -> Result<ConversionCheck> {
    let d = imp.dims();
    check_dim(d.a, q.dim(), "conversion input projector")?;
    check_dim(d.a_out, p.dim(), "conversion output projector")?;
    check_dim(d.a, rho.dim(), "conversion state")?;
    let ch = imp.channel()?;
    let lp = ch.dual_hermitian(p)?;
    let one = identity(d.a);
    let qc = &one - q.matrix();
    let outside = &qc * rho.matrix() * &qc;
    let inside = q.matrix() * rho.matrix() * q.matrix();
    let eps2 = trace_product(&outside, lp.matrix()).re + trace_product(&inside, &(&one - lp.matrix())).re;
    let epsilon = eps2.max(0.0).sqrt();

    let y = compute_y(&ch, imp.x_a(), imp.x_a_out())?;
    let comm = trace_product(rho.matrix(), &commutator(q.matrix(), y.matrix())).norm();
    let w = Hermitian::symmetrized(defect_operator(imp));
    let delta_s = sld_qfi(&rho.kron(imp.rho_b()), &w)?.sqrt();
    let fisher_e = sld_qfi(imp.rho_b(), imp.x_b())?;
    let delta_z = imp.defect_spread()?;
    let num = (comm - 0.5 * delta_z).max(0.0);
    let den = delta_s + delta_z + fisher_e.sqrt();
    let bound = if num <= ZERO_NUMERATOR_TOL { 0.0 } else { num / den };
    Ok(ConversionCheck {
        epsilon,
        commutator: comm,
        delta_s,
        fisher_e,
        delta_z,
        bound,
        slack: epsilon - bound,
    })
}

/// `|⟨[O₁, O₂]⟩_ρ| ≤ √F_ρ(O₁) √V_ρ(O₂)`.
#[derive(Clone, Copy, Debug)]
pub struct UncertaintyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

pub fn improved_kr_check(rho: &DensityMatrix, o1: &Hermitian, o2: &Hermitian) -> Result<UncertaintyCheck> {
    check_dim(rho.dim(), o1.dim(), "uncertainty first operator")?;
    check_dim(rho.dim(), o2.dim(), "uncertainty second operator")?;
    let lhs = trace_product(rho.matrix(), &commutator(o1.matrix(), o2.matrix())).norm();
    let rhs = sld_qfi(rho, o1)?.sqrt() * variance(rho, o2)?.sqrt();
    Ok(UncertaintyCheck {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::dephasing_channel;
    use crate::linalg::{basis_vector, c, r, real_matrix};

    fn plus_minus() -> TestEnsemble {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = (basis_vector(2, 0) + basis_vector(2, 1)) * r(s);
        let m = (basis_vector(2, 0) - basis_vector(2, 1)) * r(s);
        TestEnsemble::uniform(vec![DensityMatrix::pure(&p).unwrap(), DensityMatrix::pure(&m).unwrap()]).unwrap()
    }

    #[test]
    fn c_for_plus_minus_with_z() {
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        let cv = compute_c(&plus_minus(), &z).unwrap();
        assert!((cv - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn delta_2_of_dephasing() {
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        let x = Hermitian::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let ch = dephasing_channel(&z).unwrap();
        assert!((delta_2(&ch, &x, &x).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn kr_equality_on_y_eigenstate() {
        let v = CVector::from_vec(vec![r(std::f64::consts::FRAC_1_SQRT_2), c(0.0, std::f64::consts::FRAC_1_SQRT_2)]);
        let rho = DensityMatrix::pure(&v).unwrap();
        let z = Hermitian::diagonal(&[1.0, -1.0]);
        let x = Hermitian::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let chk = improved_kr_check(&rho, &z, &x).unwrap();
        assert!((chk.lhs - 2.0).abs() < 1e-12);
        assert!(chk.slack.abs() < 1e-9);
    }

    #[test]
    fn bound_clamps_when_defect_dominates() {
        let b = BoundInputs {
            c: 0.3,
            fisher_b: 1.0,
            delta: 2.0,
            delta_z: 0.6,
            irreversibility: Irreversibility { delta: 0.0, delta_t: 0.0 },
            min_weight: 0.5,
            mean_trace_distance: 1.0,
            variant: Variant::Orthogonal,
        };
        let (lhs, rhs) = evaluate_bound(&b);
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }
}
