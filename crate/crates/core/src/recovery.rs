//! Recovery channels: the irreversibility `δ` of a channel against a test ensemble,
//! entanglement-fidelity errors, the Petz map and Helstrom measurements.
//!
//! Every optimized value returned here is the error of an explicit channel that is
//! returned alongside it, so it is an upper bound on the true minimum.

use serde::{Deserialize, Serialize};

use crate::channels::{constant_channel, identity_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, check_dim, identity, jordan_parts, kron, max_abs_diff, outer, psd_sqrt, pseudo_inverse_sqrt, r, support_projector,
    CMatrix, CVector, Hermitian, C64,
};
use crate::optimize::nelder_mead;
use crate::random::{ginibre, haar_vector, stream};
use crate::states::{
    distance_from_fidelity, fidelity_matrices, fidelity_pure, maximally_entangled_vector,
    trace_distance, DensityMatrix, TestEnsemble,
};

/// Cutoff for the pseudo-inverse square root inside the Petz map.
pub const PETZ_CUTOFF: f64 = 1e-12;
/// Nelder-Mead is skipped when the Kraus parameterization has more real coordinates.
pub const NM_MAX_PARAMS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizerBudget {
    pub restarts: usize,
    pub iterations: usize,
}

impl OptimizerBudget {
    pub const MIN: OptimizerBudget = OptimizerBudget {
        restarts: 4,
        iterations: 200,
    };

    pub fn new(restarts: usize, iterations: usize) -> Result<Self> {
        if restarts < Self::MIN.restarts || iterations < Self::MIN.iterations {
            return Err(Error::InvalidInput(format!(
                "optimizer budget ({restarts}, {iterations}) is below the minimum ({}, {})",
                Self::MIN.restarts,
                Self::MIN.iterations
            )));
        }
        Ok(Self {
            restarts,
            iterations,
        })
    }
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self {
            restarts: 8,
            iterations: 400,
        }
    }
}

/// Errors of one explicit recovery on an ensemble.
#[derive(Clone, Debug)]
pub struct RecoveryError {
    /// `√(Σ p_k D_F(ρ_k, R∘E(ρ_k))²)`.
    pub delta: f64,
    /// `Σ p_k T(ρ_k, R∘E(ρ_k))`.
    pub delta_t: f64,
    pub per_state: Vec<f64>,
}

pub fn delta_for_recovery(
    ensemble: &TestEnsemble,
    forward: &KrausChannel,
    recovery: &KrausChannel,
) -> Result<RecoveryError> {
    check_dim(forward.dim_in(), ensemble.dim(), "forward channel input")?;
    check_dim(forward.dim_out(), recovery.dim_in(), "recovery input")?;
    check_dim(forward.dim_in(), recovery.dim_out(), "recovery output")?;
    let mut per_state = Vec::with_capacity(ensemble.len());
    let mut sq = 0.0;
    let mut delta_t = 0.0;
    for (p, rho) in ensemble.weights().iter().zip(ensemble.states()) {
        let back = DensityMatrix::from_computed(recovery.apply(&forward.apply(rho.matrix())))?;
        let f = fidelity_matrices(rho.matrix(), back.matrix())?;
        let d = distance_from_fidelity(f);
        sq += p * d * d;
        delta_t += p * trace_distance(rho, &back)?;
        per_state.push(d);
    }
    Ok(RecoveryError {
        delta: sq.sqrt(),
        delta_t,
        per_state,
    })
}

/// Adds Kraus operators sending the missing weight `I - Σ K†K` to `fallback`.
fn complete_to_tp(mut kraus: Vec<CMatrix>, dim_in: usize, fallback: &DensityMatrix) -> Result<KrausChannel> {
    let mut s = CMatrix::zeros(dim_in, dim_in);
    for k in &kraus {
        s += k.adjoint() * k;
    }
    let rest = Hermitian::symmetrized(identity(dim_in) - s).eigh()?;
    let (tv, tvec) = fallback.support()?;
    for (j, &mu) in rest.values.iter().enumerate() {
        if mu <= 1e-12 {
            continue;
        }
        let e = rest.vector(j);
        for (t, v) in tv.iter().zip(&tvec) {
            kraus.push(v * e.adjoint() * r((t * mu).sqrt()));
        }
    }
    // Small eigenvalues of the reference image amplify rounding in `Σ K†K`.
    normalize_kraus(&mut kraus);
    KrausChannel::new(kraus)
}

/// Petz map `R(·) = √σ N†(N(σ)^{-1/2} · N(σ)^{-1/2}) √σ`, completed outside the support of
/// `N(σ)` by preparing the normalized projector onto the support of `σ`.
pub fn petz_map(n: &KrausChannel, sigma: &DensityMatrix) -> Result<KrausChannel> {
    check_dim(n.dim_in(), sigma.dim(), "petz reference state")?;
    let ns = Hermitian::symmetrized(n.apply(sigma.matrix()));
    let a = pseudo_inverse_sqrt(&ns, PETZ_CUTOFF)?;
    let rs = psd_sqrt(sigma.hermitian())?;
    let kraus: Vec<CMatrix> = n
        .kraus()
        .iter()
        .map(|k| rs.matrix() * k.adjoint() * a.matrix())
        .collect();
    let proj = support_projector(sigma.hermitian(), PETZ_CUTOFF)?;
    let fallback = DensityMatrix::from_computed(proj.into_matrix())?;
    complete_to_tp(kraus, n.dim_out(), &fallback)
}

/// `δ_P = D_F(ρ, R∘N(ρ))` for the Petz map at reference `σ`.
pub fn petz_error(n: &KrausChannel, sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    let rmap = petz_map(n, sigma)?;
    let back = rmap.apply(&n.apply(rho.matrix()));
    Ok(distance_from_fidelity(fidelity_matrices(rho.matrix(), &back)?))
}

/// Reversal of a channel with a single Kraus operator (up to tolerance): `V†` plus a
/// completion on the complement of the range of `V`.
fn adjoint_isometry_recovery(forward: &KrausChannel) -> Result<Option<KrausChannel>> {
    if forward.kraus_rank(1e-6)? != 1 {
        return Ok(None);
    }
    let can = forward.canonical()?;
    let v = &can.kraus()[0];
    if v.nrows() < v.ncols() {
        return Ok(None);
    }
    let fallback = DensityMatrix::maximally_mixed(forward.dim_in());
    Ok(complete_to_tp(vec![v.adjoint()], forward.dim_out(), &fallback).ok())
}

/// Keeps the first `min(d_in, d_out)` basis states and prepares the maximally mixed
/// state from the rest.
fn truncating_recovery(d_in: usize, d_out: usize) -> Result<KrausChannel> {
    if d_in == d_out {
        return Ok(identity_channel(d_in));
    }
    let kraus = (0..d_in.min(d_out))
        .map(|i| outer(&basis_vector(d_out, i), &basis_vector(d_in, i)))
        .collect();
    complete_to_tp(kraus, d_in, &DensityMatrix::maximally_mixed(d_out))
}

/// `Tr_R` of a `(d_out·q) x (d_in·q)` matrix over the trailing factor of dimension `q`.
fn trace_out_reference(m: &CMatrix, d_out: usize, d_in: usize, q: usize) -> CMatrix {
    if q == 1 {
        return m.clone();
    }
    let mut out = CMatrix::zeros(d_out, d_in);
    for i in 0..d_out {
        for j in 0..d_in {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..q {
                acc += m[(i * q + s, j * q + s)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `Σ_t w_t Tr[a_t (R ⊗ id)(b_t)]`, linear in the recovery `R`.
struct LinearObjective {
    terms: Vec<(f64, CMatrix, CMatrix, usize)>,
}

impl LinearObjective {
    /// Ascent direction for every Kraus operator: `Σ_t w_t Tr_R[a_t (K ⊗ I) b_t]`.
    fn gradient(&self, kraus: &[CMatrix]) -> Vec<CMatrix> {
        kraus
            .iter()
            .map(|k| {
                let (d_out, d_in) = k.shape();
                let mut g = CMatrix::zeros(d_out, d_in);
                for (w, a, b, q) in &self.terms {
                    let kk = if *q == 1 { k.clone() } else { kron(k, &identity(*q)) };
                    let m = a * kk * b;
                    g += trace_out_reference(&m, d_out, d_in, *q) * r(*w);
                }
                g
            })
            .collect()
    }
}

/// `K ↦ K (Σ K†K)^{-1/2}`.
fn normalize_kraus(kraus: &mut [CMatrix]) -> bool {
    let d = kraus[0].ncols();
    // A second pass repairs the rounding left by an ill-conditioned first one.
    for _ in 0..3 {
        let mut s = CMatrix::zeros(d, d);
        for k in kraus.iter() {
            s += k.adjoint() * k;
        }
        if max_abs_diff(&s, &identity(d)) < 1e-13 {
            return true;
        }
        let Ok(inv) = pseudo_inverse_sqrt(&Hermitian::symmetrized(s), 1e-14) else {
            return false;
        };
        for k in kraus.iter_mut() {
            *k = &*k * inv.matrix();
        }
    }
    let mut s = CMatrix::zeros(d, d);
    for k in kraus.iter() {
        s += k.adjoint() * k;
    }
    max_abs_diff(&s, &identity(d)) < 1e-11
}

fn kraus_from_params(params: &[f64], rank: usize, d_out: usize, d_in: usize) -> Option<Vec<CMatrix>> {
    let per = d_out * d_in;
    let mut kraus: Vec<CMatrix> = (0..rank)
        .map(|m| {
            CMatrix::from_fn(d_out, d_in, |i, j| {
                let idx = 2 * (m * per + i * d_in + j);
                C64::new(params[idx], params[idx + 1])
            })
        })
        .collect();
    normalize_kraus(&mut kraus).then_some(kraus)
}

fn params_from_kraus(kraus: &[CMatrix]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in kraus {
        for i in 0..k.nrows() {
            for j in 0..k.ncols() {
                out.push(k[(i, j)].re);
                out.push(k[(i, j)].im);
            }
        }
    }
    out
}

struct Candidate {
    kraus: Vec<CMatrix>,
    value: f64,
    source: String,
}

/// Gradient steps on the linear surrogate, accepted only when the true objective improves.
fn ascend(
    start: Candidate,
    objective: &dyn Fn(&[CMatrix]) -> f64,
    surrogate: &LinearObjective,
    iterations: usize,
) -> Candidate {
    let mut current = start;
    let mut eta = 1.0;
    for _ in 0..iterations {
        let grad = surrogate.gradient(&current.kraus);
        let mut improved = false;
        while eta > 1e-7 {
            let mut trial: Vec<CMatrix> = current
                .kraus
                .iter()
                .zip(&grad)
                .map(|(k, g)| k + g * r(eta))
                .collect();
            if normalize_kraus(&mut trial) {
                let v = objective(&trial);
                if v < current.value - 1e-15 {
                    current.kraus = trial;
                    current.value = v;
                    improved = true;
                    eta *= 1.5;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    current
}

/// Pads a Kraus list with small random operators so gradient steps can raise its rank.
fn pad_kraus(kraus: &[CMatrix], target: usize, seed: u64) -> Vec<CMatrix> {
    let mut out = kraus.to_vec();
    let (d_out, d_in) = kraus[0].shape();
    let mut rng = stream(seed, 0xad);
    while out.len() < target {
        out.push(ginibre(d_out, d_in, &mut rng) * r(1e-3));
    }
    normalize_kraus(&mut out);
    out
}

fn optimize_recovery(
    d_in: usize,
    d_out: usize,
    objective: &dyn Fn(&[CMatrix]) -> f64,
    surrogate: &LinearObjective,
    seeds: Vec<(String, KrausChannel)>,
    budget: OptimizerBudget,
    seed: u64,
) -> Result<(KrausChannel, f64, String)> {
    let max_rank = d_in * d_out;
    let mut best: Option<Candidate> = None;
    for (i, (source, ch)) in seeds.into_iter().enumerate() {
        let ch = if ch.kraus().len() > max_rank { ch.canonical()? } else { ch };
        let value = objective(ch.kraus());
        let mut cand = Candidate {
            kraus: ch.kraus().to_vec(),
            value,
            source,
        };
        if best.as_ref().map_or(true, |b| cand.value < b.value) {
            best = Some(Candidate {
                kraus: cand.kraus.clone(),
                value: cand.value,
                source: cand.source.clone(),
            });
        }
        if budget.iterations > 0 {
            let target = (cand.kraus.len() + 2).min(max_rank).max(cand.kraus.len());
            cand.kraus = pad_kraus(&cand.kraus, target, seed ^ i as u64);
            cand.value = objective(&cand.kraus);
            let refined = ascend(cand, objective, surrogate, budget.iterations);
            if best.as_ref().map_or(true, |b| refined.value < b.value) {
                best = Some(Candidate {
                    source: format!("{}+ascent", refined.source),
                    ..refined
                });
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::InvalidInput("no recovery seeds".into()))?;

    let min_rank = d_in.div_ceil(d_out).max(1);
    for restart in 0..budget.restarts {
        let (rank, x0) = if restart == 0 {
            let can = KrausChannel::new_unchecked(best.kraus.clone())?.canonical()?;
            let mut k = can.kraus().to_vec();
            if k.len() < min_rank {
                k = pad_kraus(&k, min_rank, seed);
            }
            (k.len(), params_from_kraus(&k))
        } else {
            let rank = min_rank.max(2).min(max_rank);
            let mut rng = stream(seed, restart as u64 + 1);
            let k: Vec<CMatrix> = (0..rank).map(|_| ginibre(d_out, d_in, &mut rng)).collect();
            (rank, params_from_kraus(&k))
        };
        if x0.len() > NM_MAX_PARAMS {
            continue;
        }
        let mut f = |p: &[f64]| match kraus_from_params(p, rank, d_out, d_in) {
            Some(k) => objective(&k),
            None => f64::INFINITY,
        };
        let m = nelder_mead(&mut f, &x0, 0.1, budget.iterations);
        if m.value < best.value {
            if let Some(k) = kraus_from_params(&m.x, rank, d_out, d_in) {
                let mut cand = Candidate {
                    value: objective(&k),
                    kraus: k,
                    source: format!("search#{restart}"),
                };
                cand = ascend(cand, objective, surrogate, budget.iterations);
                if cand.value < best.value {
                    best = cand;
                }
            }
        }
    }
    // Seeds are only trace preserving to the channel tolerance and canonicalization drops
    // tiny Kraus weights, so the winner is renormalized before it is validated.
    let mut kraus = best.kraus;
    normalize_kraus(&mut kraus);
    let value = objective(&kraus);
    let ch = KrausChannel::new(kraus)?;
    Ok((ch, value, best.source))
}

/// Either a pure test vector or a mixed test state.
enum Target {
    Pure(CVector),
    Mixed(CMatrix),
}

impl Target {
    fn new(rho: &DensityMatrix) -> Result<Self> {
        Ok(match rho.pure_vector(1e-12)? {
            Some(v) => Target::Pure(v),
            None => Target::Mixed(rho.matrix().clone()),
        })
    }

    fn fidelity(&self, sigma: &CMatrix) -> f64 {
        match self {
            Target::Pure(v) => fidelity_pure(v, sigma),
            Target::Mixed(m) => fidelity_matrices(m, sigma).unwrap_or(0.0),
        }
    }
}

fn apply_kraus(kraus: &[CMatrix], m: &CMatrix) -> CMatrix {
    let d = kraus[0].nrows();
    let mut out = CMatrix::zeros(d, d);
    for k in kraus {
        out += k * m * k.adjoint();
    }
    out
}

/// Result of [`optimize_delta`].
#[derive(Clone, Debug)]
pub struct OptimizedRecovery {
    /// `δ` of `recovery`, an upper bound on the minimum over all recoveries.
    pub delta_upper: f64,
    /// `δ_T` of the same recovery.
    pub delta_t: f64,
    pub recovery: KrausChannel,
    pub source: String,
}

/// Minimizes `δ` over recovery channels, starting from the Petz maps at the ensemble
/// average and at each test state, the reversal of near-isometric channels, the
/// identity when shapes allow, and constant channels onto the test states.
pub fn optimize_delta(
    ensemble: &TestEnsemble,
    forward: &KrausChannel,
    budget: OptimizerBudget,
    seed: u64,
) -> Result<OptimizedRecovery> {
    optimize_delta_seeded(ensemble, forward, budget, seed, &[])
}

/// [`optimize_delta`] with caller-supplied recoveries added to the starting points, so
/// the result is never worse than any of them.
pub fn optimize_delta_seeded(
    ensemble: &TestEnsemble,
    forward: &KrausChannel,
    budget: OptimizerBudget,
    seed: u64,
    extra: &[KrausChannel],
) -> Result<OptimizedRecovery> {
    check_dim(forward.dim_in(), ensemble.dim(), "forward channel input")?;
    let targets: Vec<Target> = ensemble.states().iter().map(Target::new).collect::<Result<_>>()?;
    let images: Vec<CMatrix> = ensemble.states().iter().map(|s| forward.apply(s.matrix())).collect();
    let weights = ensemble.weights().to_vec();
    let objective = |kraus: &[CMatrix]| -> f64 {
        let mut sq = 0.0;
        for ((p, t), w) in weights.iter().zip(&targets).zip(&images) {
            let f = t.fidelity(&apply_kraus(kraus, w));
            sq += p * (1.0 - f * f).max(0.0);
        }
        sq.sqrt()
    };
    let surrogate = LinearObjective {
        terms: weights
            .iter()
            .zip(ensemble.states())
            .zip(&images)
            .map(|((p, s), w)| (*p, s.matrix().clone(), w.clone(), 1))
            .collect(),
    };

    let mut seeds = vec![("petz(average)".to_string(), petz_map(forward, &ensemble.average())?)];
    if ensemble.len() <= 8 {
        for (k, s) in ensemble.states().iter().enumerate() {
            seeds.push((format!("petz(state {k})"), petz_map(forward, s)?));
        }
    }
    if let Some(rev) = adjoint_isometry_recovery(forward)? {
        seeds.push(("adjoint".to_string(), rev));
    }
    seeds.push(("identity".to_string(), truncating_recovery(forward.dim_out(), forward.dim_in())?));
    seeds.push((
        "constant(average)".to_string(),
        constant_channel(forward.dim_out(), &ensemble.average())?,
    ));
    for (k, s) in ensemble.states().iter().enumerate() {
        seeds.push((format!("constant(state {k})"), constant_channel(forward.dim_out(), s)?));
    }
    for (k, ch) in extra.iter().enumerate() {
        check_dim(forward.dim_out(), ch.dim_in(), "supplied recovery input")?;
        check_dim(forward.dim_in(), ch.dim_out(), "supplied recovery output")?;
        seeds.push((format!("supplied {k}"), ch.clone()));
    }

    let (recovery, value, source) = optimize_recovery(
        forward.dim_out(),
        forward.dim_in(),
        &objective,
        &surrogate,
        seeds,
        budget,
        seed,
    )?;
    let check = delta_for_recovery(ensemble, forward, &recovery)?;
    // Purified distances near zero are square roots of rounding noise, so the two
    // evaluation paths are compared on the squared scale.
    if (check.delta * check.delta - value * value).abs() > 1e-9 {
        return Err(Error::Consistency(format!(
            "re-evaluated recovery error {} differs from optimizer value {value}",
            check.delta
        )));
    }
    Ok(OptimizedRecovery {
        delta_upper: check.delta,
        delta_t: check.delta_t,
        recovery,
        source,
    })
}

/// `D_F((R∘E ⊗ id)(ψ), ψ)` for a pure `ψ` on `A ⊗ R`.
pub fn entanglement_error(forward: &KrausChannel, recovery: &KrausChannel, psi: &CVector) -> Result<f64> {
    let d_a = forward.dim_in();
    if psi.len() % d_a != 0 {
        return Err(Error::DimensionMismatch {
            context: "entangled input",
            expected: d_a,
            found: psi.len(),
        });
    }
    let q = psi.len() / d_a;
    let rho = psi * psi.adjoint();
    let out = recovery.tensor_identity(q).apply(&forward.tensor_identity(q).apply(&rho));
    Ok(distance_from_fidelity(fidelity_pure(psi, &out)))
}

fn reduced_state(psi: &CVector, d_a: usize) -> Result<DensityMatrix> {
    let q = psi.len() / d_a;
    let f = crate::linalg::TensorFactorization::new(vec![d_a, q])?;
    DensityMatrix::from_computed(crate::linalg::partial_trace(&(psi * psi.adjoint()), &f, &[0])?)
}

fn entangled_seeds(forward: &KrausChannel, reduced: &DensityMatrix) -> Result<Vec<(String, KrausChannel)>> {
    let mut seeds = vec![("petz(reduced)".to_string(), petz_map(forward, reduced)?)];
    if let Some(rev) = adjoint_isometry_recovery(forward)? {
        seeds.push(("adjoint".to_string(), rev));
    }
    seeds.push(("identity".to_string(), truncating_recovery(forward.dim_out(), forward.dim_in())?));
    seeds.push(("constant(reduced)".to_string(), constant_channel(forward.dim_out(), reduced)?));
    seeds.push((
        "constant(mixed)".to_string(),
        constant_channel(forward.dim_out(), &DensityMatrix::maximally_mixed(forward.dim_in()))?,
    ));
    Ok(seeds)
}

fn optimize_entanglement_error(
    forward: &KrausChannel,
    psi: &CVector,
    budget: OptimizerBudget,
    seed: u64,
) -> Result<(KrausChannel, f64)> {
    let d_a = forward.dim_in();
    let q = psi.len() / d_a;
    let rho = psi * psi.adjoint();
    let image = forward.tensor_identity(q).apply(&rho);
    let id_q = identity(q);
    let objective = |kraus: &[CMatrix]| -> f64 {
        let lifted: Vec<CMatrix> = kraus.iter().map(|k| kron(k, &id_q)).collect();
        distance_from_fidelity(fidelity_pure(psi, &apply_kraus(&lifted, &image)))
    };
    let surrogate = LinearObjective {
        terms: vec![(1.0, rho.clone(), image.clone(), q)],
    };
    let seeds = entangled_seeds(forward, &reduced_state(psi, d_a)?)?;
    let (ch, v, _) = optimize_recovery(forward.dim_out(), d_a, &objective, &surrogate, seeds, budget, seed)?;
    Ok((ch, v))
}

/// Entanglement-fidelity errors with optimized recoveries.
#[derive(Clone, Debug)]
pub struct EntanglementErrors {
    /// Error on the maximally entangled state of `A ⊗ A`.
    pub eps_bar: f64,
    /// Error on the supplied state (equal to `eps_bar` when none is given).
    pub eps_psi: f64,
    pub recovery_bar: KrausChannel,
}

pub fn entanglement_fidelity_errors(
    forward: &KrausChannel,
    budget: OptimizerBudget,
    seed: u64,
    psi: Option<&CVector>,
) -> Result<EntanglementErrors> {
    let phi = maximally_entangled_vector(forward.dim_in());
    let (recovery_bar, eps_bar) = optimize_entanglement_error(forward, &phi, budget, seed)?;
    let eps_psi = match psi {
        Some(v) => {
            if v.len() % forward.dim_in() != 0 {
                return Err(Error::DimensionMismatch {
                    context: "entangled input",
                    expected: forward.dim_in(),
                    found: v.len(),
                });
            }
            optimize_entanglement_error(forward, v, budget, seed ^ 0x9e37)?.1
        }
        None => eps_bar,
    };
    Ok(EntanglementErrors {
        eps_bar,
        eps_psi,
        recovery_bar,
    })
}

/// Seeded probe states on `A ⊗ A` for worst-case surrogates, followed by `extra`.
pub fn probe_states(d_a: usize, count: usize, seed: u64, extra: &[CVector]) -> Vec<CVector> {
    let mut rng = stream(seed, 0x9b0be);
    let mut out: Vec<CVector> = (0..count).map(|_| haar_vector(d_a * d_a, &mut rng)).collect();
    out.extend_from_slice(extra);
    out
}

/// Largest entanglement error of a fixed recovery over a probe set; a lower estimate
/// of the true worst case.
pub fn worst_case_surrogate(forward: &KrausChannel, recovery: &KrausChannel, probes: &[CVector]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for p in probes {
        worst = worst.max(entanglement_error(forward, recovery, p)?);
    }
    Ok(worst)
}

/// Recovery minimizing [`worst_case_surrogate`] over 32 seeded probes plus `extra`.
pub fn epsilon_worst_surrogate(
    forward: &KrausChannel,
    budget: OptimizerBudget,
    seed: u64,
    extra: &[CVector],
) -> Result<(f64, KrausChannel)> {
    let d_a = forward.dim_in();
    let probes = probe_states(d_a, 32, seed, extra);
    let images: Vec<(CMatrix, CMatrix)> = probes
        .iter()
        .map(|p| {
            let rho = p * p.adjoint();
            let img = forward.tensor_identity(d_a).apply(&rho);
            (rho, img)
        })
        .collect();
    let id = identity(d_a);
    let objective = |kraus: &[CMatrix]| -> f64 {
        let lifted: Vec<CMatrix> = kraus.iter().map(|k| kron(k, &id)).collect();
        probes
            .iter()
            .zip(&images)
            .map(|(p, (_, img))| distance_from_fidelity(fidelity_pure(p, &apply_kraus(&lifted, img))))
            .fold(0.0, f64::max)
    };
    let w = 1.0 / probes.len() as f64;
    let surrogate = LinearObjective {
        terms: images.iter().map(|(a, b)| (w, a.clone(), b.clone(), d_a)).collect(),
    };
    let seeds = entangled_seeds(forward, &DensityMatrix::maximally_mixed(d_a))?;
    let (ch, v, _) = optimize_recovery(forward.dim_out(), d_a, &objective, &surrogate, seeds, budget, seed)?;
    Ok((v, ch))
}

/// Optimal two-outcome discrimination of `ρ₀` (prior `p₀`) against `ρ₁`.
#[derive(Clone, Debug)]
pub struct Helstrom {
    /// Projector onto the positive part of `p₀ρ₀ - (1-p₀)ρ₁`; guess `ρ₀` on this outcome.
    pub projector: Hermitian,
    pub error_prob: f64,
}

pub fn helstrom_measurement(rho0: &DensityMatrix, rho1: &DensityMatrix, p0: f64) -> Result<Helstrom> {
    check_dim(rho0.dim(), rho1.dim(), "helstrom")?;
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidInput(format!("prior {p0} outside [0, 1]")));
    }
    let diff = Hermitian::symmetrized(rho0.matrix() * r(p0) - rho1.matrix() * r(1.0 - p0));
    let e = diff.eigh()?;
    let projector = e.map(|x| if x > 0.0 { 1.0 } else { 0.0 });
    let norm: f64 = e.values.iter().map(|v| v.abs()).sum();
    let (plus, _) = jordan_parts(&diff)?;
    debug_assert!((plus.trace() * 2.0 - (norm + 2.0 * p0 - 1.0)).abs() < 1e-9);
    Ok(Helstrom {
        projector,
        error_prob: (0.5 * (1.0 - norm)).max(0.0),
    })
}
