//! Hand-computed and brute-force reference values checked against the library.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, SQRT_2};

use symcost::apps::{
    battery_measurement, battery_rotation, covariant_code_bound, extremal_ensemble, gate_cost_bound, induced_povm,
    max_output_distance, way_bound,
};
use symcost::channels::{
    compose, constant_channel, dephasing_channel, identity_channel, is_covariant, unitary_channel, Implementation,
    KrausChannel, MeasurementChannel,
};
use symcost::fisher::{qfi_limit_check, sld_qfi, variance, DEFAULT_LIMIT_STEPS};
use symcost::linalg::{basis_vector, c, identity, kron, kron_vec, r, real_matrix, CMatrix, CVector, Hermitian};
use symcost::recovery::{
    delta_for_recovery, entanglement_error, entanglement_fidelity_errors, optimize_delta, OptimizerBudget,
};
use symcost::scrambling::{block_channel, encode_vector, qubit_charge, run_scenario, Decoder, ScrambleScenario};
use symcost::states::{
    gibbs_state, maximally_entangled_vector, purified_distance, trace_distance, DensityMatrix, TestEnsemble,
};
use symcost::thermo::{check_thermo_bound, coherence_cost_lower_bound, CostBound};
use symcost::tradeoff::{
    check_main_inequality, compute_c, compute_y, delta_1, improved_kr_check, DeltaChoice, Irreversibility,
    SpanSearch, TradeoffOptions,
};

fn pauli_x() -> Hermitian {
    Hermitian::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
}

fn pauli_z() -> Hermitian {
    Hermitian::diagonal(&[1.0, -1.0])
}

fn plus_vec() -> CVector {
    (basis_vector(2, 0) + basis_vector(2, 1)) * r(FRAC_1_SQRT_2)
}

fn minus_vec() -> CVector {
    (basis_vector(2, 0) - basis_vector(2, 1)) * r(FRAC_1_SQRT_2)
}

fn pure(v: &CVector) -> DensityMatrix {
    DensityMatrix::pure(v).unwrap()
}

fn plus_minus() -> TestEnsemble {
    TestEnsemble::uniform(vec![pure(&plus_vec()), pure(&minus_vec())]).unwrap()
}

fn bloch(theta: f64, phi: f64) -> CVector {
    CVector::from_vec(vec![r((theta / 2.0).cos()), c(phi.cos(), phi.sin()) * (theta / 2.0).sin()])
}

fn bloch_grid() -> Vec<CVector> {
    let mut out = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            let theta = std::f64::consts::PI * i as f64 / 19.0;
            let phi = std::f64::consts::TAU * j as f64 / 20.0;
            out.push(bloch(theta, phi));
        }
    }
    out
}

fn swap() -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| {
        let (a, b) = (j / 2, j % 2);
        r(if i == b * 2 + a { 1.0 } else { 0.0 })
    })
}

fn budget() -> OptimizerBudget {
    OptimizerBudget::default()
}

#[test]
fn distances_between_zero_and_plus() {
    let zero = DensityMatrix::basis(2, 0);
    let plus = pure(&plus_vec());
    assert!((purified_distance(&zero, &plus).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((trace_distance(&zero, &plus).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn gibbs_and_variance_of_z() {
    let e = std::f64::consts::E;
    let g = gibbs_state(&pauli_z(), 1.0).unwrap();
    assert!((g.matrix()[(0, 0)].re - 1.0 / (e * e + 1.0)).abs() < 1e-12);
    let v = variance(&g, &pauli_z()).unwrap();
    assert!((v - (1.0 - 1f64.tanh().powi(2))).abs() < 1e-12);
}

#[test]
fn qfi_of_tilted_qubit() {
    let rho = DensityMatrix::new(real_matrix(2, 2, &[0.5, 0.25, 0.25, 0.5])).unwrap();
    let f = sld_qfi(&rho, &pauli_z()).unwrap();
    assert!((f - 1.0).abs() < 1e-12);
    let limit = qfi_limit_check(&rho, &pauli_z(), &DEFAULT_LIMIT_STEPS).unwrap();
    assert!((limit - 1.0).abs() < 1e-3);
}

#[test]
fn y_and_c_of_dephasing() {
    let ch = dephasing_channel(&pauli_z()).unwrap();
    let y = compute_y(&ch, &pauli_x(), &pauli_x()).unwrap();
    assert!((y.matrix() - pauli_x().matrix()).norm() < 1e-12);
    let cv = compute_c(&plus_minus(), &pauli_z()).unwrap();
    assert!((cv - FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn defect_spread_of_shifted_output_charge() {
    let x = Hermitian::diagonal(&[0.0, 1.0]);
    let imp = Implementation::new(
        identity(4),
        DensityMatrix::basis(2, 0),
        x.clone(),
        Hermitian::zeros(2),
        x.add(&pauli_z()),
        Hermitian::zeros(2),
    )
    .unwrap();
    assert!((imp.defect_spread().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn hadamard_is_not_covariant_for_z() {
    let h = real_matrix(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
    let ch = unitary_channel(&h).unwrap();
    let check = is_covariant(&ch, &pauli_z(), &pauli_z(), 8).unwrap();
    assert!(!check.covariant);
    assert!(check.max_deviation > 0.9);
    let ok = is_covariant(&dephasing_channel(&pauli_z()).unwrap(), &pauli_z(), &pauli_z(), 8).unwrap();
    assert!(ok.covariant);
}

#[test]
fn dilation_agrees_with_kraus_form() {
    let imp = symcost::sampling::conserving_implementation(2, 3, 11).unwrap();
    let ch = imp.channel().unwrap();
    let rho = symcost::sampling::random_state(2, 2, 4).unwrap();
    let a = ch.apply(rho.matrix());
    let b = imp.apply_dilation(rho.matrix()).unwrap();
    assert!((a - b).norm() < 1e-9);
}

#[test]
fn swap_with_plus_environment() {
    let imp = Implementation::new(swap(), pure(&plus_vec()), pauli_z(), pauli_z(), pauli_z(), pauli_z()).unwrap();
    assert!(imp.is_conserving(1e-12));
    let ens = plus_minus();
    let opt = optimize_delta(&ens, &imp.channel().unwrap(), budget(), 1).unwrap();
    // The environment swaps in a fixed state, so nothing about the input survives.
    assert!((opt.delta_upper - FRAC_1_SQRT_2).abs() < 1e-6);
    let report = check_main_inequality(
        &ens,
        &imp,
        Irreversibility {
            delta: opt.delta_upper,
            delta_t: opt.delta_t,
        },
        &TradeoffOptions::default(),
    )
    .unwrap();
    assert!((report.fisher_b - 4.0).abs() < 1e-12);
    assert!((report.c_value - FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((report.delta_1 - 4.0).abs() < 1e-12);
    let lhs = FRAC_1_SQRT_2 / (2.0 + 4.0);
    assert!((report.lhs - lhs).abs() < 1e-9);
    assert!((report.rhs - 0.5).abs() < 1e-6);
    assert!(report.slack >= 0.0);

    let cost = coherence_cost_lower_bound(
        &ens,
        &imp.channel().unwrap(),
        imp.x_a(),
        imp.x_a_out(),
        opt.delta_upper,
        DeltaChoice::D1,
    )
    .unwrap();
    assert!(cost.admits(4.0, 1e-9));
}

#[test]
fn kr_on_eigenstates() {
    let zero = DensityMatrix::basis(2, 0);
    let k = improved_kr_check(&zero, &pauli_z(), &pauli_x()).unwrap();
    assert!(k.lhs.abs() < 1e-12 && k.rhs.abs() < 1e-12);
    let plus_i = CVector::from_vec(vec![r(FRAC_1_SQRT_2), c(0.0, FRAC_1_SQRT_2)]);
    let k = improved_kr_check(&pure(&plus_i), &pauli_z(), &pauli_x()).unwrap();
    assert!((k.lhs - 2.0).abs() < 1e-9 && (k.rhs - 2.0).abs() < 1e-9);
}

#[test]
fn identity_recovery_of_constant_channel() {
    let sigma = DensityMatrix::basis(2, 0);
    let forward = constant_channel(2, &sigma).unwrap();
    let ens = TestEnsemble::uniform(vec![sigma.clone(), DensityMatrix::basis(2, 1)]).unwrap();
    let e = delta_for_recovery(&ens, &forward, &identity_channel(2)).unwrap();
    assert!((e.delta - FRAC_1_SQRT_2).abs() < 1e-12);
    assert!(e.per_state[0].abs() < 1e-12 && (e.per_state[1] - 1.0).abs() < 1e-12);
}

#[test]
fn optimized_delta_of_constant_channel_matches_grid() {
    let forward = constant_channel(2, &pure(&bloch(1.1, 0.4))).unwrap();
    let ens = TestEnsemble::uniform(vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)]).unwrap();
    let grid_min = bloch_grid()
        .iter()
        .map(|v| {
            let rec = constant_channel(2, &pure(v)).unwrap();
            delta_for_recovery(&ens, &forward, &rec).unwrap().delta
        })
        .fold(f64::INFINITY, f64::min);
    assert!((grid_min - FRAC_1_SQRT_2).abs() < 1e-9);
    let opt = optimize_delta(&ens, &forward, budget(), 3).unwrap();
    assert!((opt.delta_upper - FRAC_1_SQRT_2).abs() < 1e-4);
    assert!(opt.delta_upper <= grid_min + 1e-9);
}

/// `F_e = Σ_K |Tr K|² / d²` for the composite channel.
fn channel_fidelity(ch: &KrausChannel) -> f64 {
    let d = ch.dim_in() as f64;
    ch.kraus().iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / (d * d)
}

#[test]
fn entanglement_error_of_constant_channel_matches_grid() {
    let forward = constant_channel(2, &DensityMatrix::maximally_mixed(2)).unwrap();
    let phi = maximally_entangled_vector(2);
    let mut grid_min = f64::INFINITY;
    for v in bloch_grid() {
        let rec = constant_channel(2, &pure(&v)).unwrap();
        let e = entanglement_error(&forward, &rec, &phi).unwrap();
        let fe = channel_fidelity(&compose(&rec, &forward).unwrap());
        assert!((e - (1.0 - fe).sqrt()).abs() < 1e-9);
        grid_min = grid_min.min(e);
    }
    let expected = (1.0 - 0.25f64).sqrt();
    assert!((grid_min - expected).abs() < 1e-9);
    let errs = entanglement_fidelity_errors(&forward, budget(), 5, None).unwrap();
    assert!((errs.eps_bar - expected).abs() < 1e-6);
    assert!(errs.eps_bar <= grid_min + 1e-9);
}

#[test]
fn identity_has_no_entanglement_error() {
    let errs = entanglement_fidelity_errors(&identity_channel(3), budget(), 2, None).unwrap();
    assert!(errs.eps_bar < 1e-7);
}

#[test]
fn product_input_reduces_to_single_state_error() {
    let forward = dephasing_channel(&pauli_z()).unwrap();
    let psi = kron_vec(&plus_vec(), &basis_vector(2, 0));
    let errs = entanglement_fidelity_errors(&forward, budget(), 7, Some(&psi)).unwrap();
    let single = TestEnsemble::uniform(vec![pure(&plus_vec())]).unwrap();
    let opt = optimize_delta(&single, &forward, budget(), 7).unwrap();
    assert!(opt.delta_upper < 1e-6);
    assert!((errs.eps_psi - opt.delta_upper).abs() < 1e-6);
    // The entangled error of dephasing stays large.
    assert!(errs.eps_bar > 0.5);
}

#[test]
fn thermo_pipeline_on_dephasing_dilation() {
    // CNOT from the system into an uncharged pointer in |0⟩ dephases the system in Z.
    let cnot = real_matrix(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]);
    let imp = Implementation::new(
        cnot,
        DensityMatrix::basis(2, 0),
        pauli_z(),
        Hermitian::zeros(2),
        pauli_z(),
        Hermitian::zeros(2),
    )
    .unwrap();
    let rep = check_thermo_bound(
        &imp,
        &pure(&plus_vec()),
        1.0,
        DeltaChoice::D1,
        &SpanSearch::default(),
        budget(),
        1,
    )
    .unwrap();
    assert!((rep.sigma_beta - LN_2).abs() < 1e-12);
    assert!(rep.entropy_gap >= 0.0);
    assert!(rep.report.delta_irrev <= 0.5 + 1e-9);
    assert!(rep.holds());
}

#[test]
fn exact_recovery_with_charge_change_is_unbounded() {
    // Dephasing in the X basis keeps |±⟩ but removes every trace of Z.
    let ch = dephasing_channel(&pauli_x()).unwrap();
    let ens = plus_minus();
    let opt = optimize_delta(&ens, &ch, budget(), 2).unwrap();
    assert!(opt.delta_upper < 1e-6);
    let cost = coherence_cost_lower_bound(&ens, &ch, &pauli_z(), &pauli_z(), opt.delta_upper, DeltaChoice::D1).unwrap();
    assert_eq!(cost, CostBound::Unbounded);
    let json = serde_json::to_string(&cost).unwrap();
    assert_eq!(json, r#"{"kind":"unbounded"}"#);
}

#[test]
fn repetition_code_y_matches_closed_form() {
    let mut v = CMatrix::zeros(8, 2);
    v[(0, 0)] = r(1.0);
    v[(7, 1)] = r(1.0);
    let parts: Vec<Hermitian> = (0..3).map(|_| pauli_z().scale(1.0 / 3.0)).collect();
    let ens = extremal_ensemble(&pauli_z()).unwrap();
    let b = covariant_code_bound(&v, &pauli_z(), &parts, &ens, budget(), 1).unwrap();
    assert!(b.y_residual < 1e-8);
    assert!(b.c_value > 0.0);
    assert!(b.lhs_error >= b.rhs_bound - 1e-6);
    let expected = 2.0 / (2.0 + 4.0 * SQRT_2 * 3.0 * (2.0 / 3.0));
    assert!((b.faist_style - expected).abs() < 1e-12);

    let zero = covariant_code_bound(&v, &Hermitian::zeros(2), &vec![Hermitian::zeros(2); 3], &ens, budget(), 1)
        .unwrap();
    assert_eq!(zero.c_value, 0.0);
    assert_eq!(zero.rhs_bound, 0.0);
}

#[test]
fn battery_gate_meets_gate_bound() {
    let theta = 0.5_f64;
    let imp = battery_rotation(theta, 14, 10).unwrap();
    let target = real_matrix(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
    let eps = max_output_distance(&imp.channel().unwrap(), &unitary_channel(&target).unwrap(), 32, 1).unwrap();
    let bound = gate_cost_bound(&target, imp.x_a(), eps).unwrap();
    let fisher = sld_qfi(imp.rho_b(), imp.x_b()).unwrap();
    assert!(bound.bound.admits(fisher, 1e-6), "{:?} vs {fisher}", bound.bound);
}

#[test]
fn battery_measurement_meets_way_bound() {
    let imp = battery_measurement(14, 10).unwrap();
    let ch = imp.channel().unwrap();
    let q = MeasurementChannel::projective(&CMatrix::from_columns(&[plus_vec(), minus_vec()])).unwrap();
    let eps = max_output_distance(&ch, &q.channel().unwrap(), 32, 1).unwrap();
    assert!(eps > 0.0 && eps < 0.5, "{eps}");
    let p = induced_povm(&ch).unwrap();
    let bound = way_bound(&q, &p, imp.x_a(), imp.x_a_out(), eps).unwrap();
    let fisher = sld_qfi(imp.rho_b(), imp.x_b()).unwrap();
    assert!(fisher >= bound - 1e-6, "{bound} vs {fisher}");
}

/// `ρ_{A'R_B}` for string `bits`, assembled directly from the dilation.
fn radiation_state(s: &ScrambleScenario, u: &CMatrix, bits: &[u8]) -> CMatrix {
    let nb = 1usize << s.big_n;
    let a = encode_vector(bits, s.n).unwrap();
    // (U ⊗ I)(|a⟩ ⊗ Σ_r |r⟩|r⟩/√nb), stored as out[(a'b'), r].
    let dim = u.nrows();
    let mut out = CMatrix::zeros(dim, nb);
    for rr in 0..nb {
        let mut col = CVector::zeros(dim);
        for (alpha, amp) in a.iter().enumerate() {
            col[alpha * nb + rr] = *amp / r((nb as f64).sqrt());
        }
        out.set_column(rr, &(u * col));
    }
    let rad = 1usize << s.l;
    let rest = 1usize << (s.total_qubits() - s.l);
    // Keep (a', r) and sum over b'.
    let m = CMatrix::from_fn(rad * nb, rest, |row, b| {
        let (ap, rr) = (row / nb, row % nb);
        out[(ap * rest + b, rr)]
    });
    &m * m.adjoint()
}

#[test]
fn scrambling_helstrom_sum_from_scratch() {
    let s = ScrambleScenario {
        m: 2,
        n: 2,
        big_n: 6,
        l: 4,
        seed: 17,
    };
    let res = run_scenario(&s, Decoder::PerBitHelstromProduct).unwrap();
    assert!((0.0..=2.0).contains(&res.delta_h_lower));
    let u = s.unitary().unwrap();
    let states: Vec<CMatrix> = (0..4u8)
        .map(|a| radiation_state(&s, &u, &[(a >> 1) & 1, a & 1]))
        .collect();
    let mut total = 0.0;
    for (j, mask) in [2usize, 1].into_iter().enumerate() {
        let mut diff = CMatrix::zeros(states[0].nrows(), states[0].ncols());
        for (a, st) in states.iter().enumerate() {
            if a & mask == 0 {
                diff += st * r(0.5);
            } else {
                diff -= st * r(0.5);
            }
        }
        let norm = Hermitian::symmetrized(diff).trace_norm().unwrap();
        let err = 0.5 * (1.0 - 0.5 * norm);
        assert!((err - res.bits[j].helstrom_error).abs() < 1e-8);
        total += err;
    }
    assert!(res.delta_h_lower >= total - 1e-8);
    assert!((res.delta_h_lower - total).abs() < 1e-8);
}

#[test]
fn scrambling_c_from_explicit_block_channel() {
    let s = ScrambleScenario {
        m: 2,
        n: 1,
        big_n: 3,
        l: 2,
        seed: 5,
    };
    let res = run_scenario(&s, Decoder::Optimizer).unwrap();
    for j in 0..s.m {
        let ch = block_channel(&s, j).unwrap();
        let x_out = Hermitian::symmetrized(kron(qubit_charge(s.l).matrix(), &identity(1 << s.big_n)));
        let y = compute_y(&ch, &qubit_charge(s.n), &x_out).unwrap();
        let ens = TestEnsemble::uniform(vec![
            pure(&encode_vector(&[0], s.n).unwrap()),
            pure(&encode_vector(&[1], s.n).unwrap()),
        ])
        .unwrap();
        let cv = compute_c(&ens, &y).unwrap();
        assert!((cv - res.bits[j].c_value).abs() < 1e-9, "{cv} vs {}", res.bits[j].c_value);
        let d1 = delta_1(&qubit_charge(s.n), &x_out).unwrap();
        assert!((d1 - res.bits[j].delta_1).abs() < 1e-12);
    }
}
