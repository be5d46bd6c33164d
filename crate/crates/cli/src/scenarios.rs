//! Builds the objects for each scenario kind and evaluates one seed.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use serde_json::json;
use symcost::apps::{
    battery_measurement, battery_rotation, covariant_code_bound, extremal_ensemble, gate_cost_bound, induced_povm,
    max_output_distance, nogo_channel_check, way_bound, Verdict,
};
use symcost::channels::{dephasing_channel, depolarizing_channel, unitary_channel, Implementation, MeasurementChannel};
use symcost::fisher::sld_qfi;
use symcost::linalg::{basis_vector, c, r, real_matrix, CMatrix, CVector, Hermitian};
use symcost::random::{random_hermitian, stream, stream_seed};
use symcost::recovery::{optimize_delta, petz_error, petz_map, OptimizerBudget};
use symcost::sampling::{
    conserving_implementation, gibbs_preserving_implementation, mixed_ensemble, orthogonal_pure_ensemble,
    random_state, violating_implementation,
};
use symcost::scrambling::{run_scenario, Decoder, ScrambleScenario};
use symcost::states::{DensityMatrix, TestEnsemble};
use symcost::thermo::{check_thermo_bound, generalized_entropy_production, CostBound};
use symcost::tradeoff::{
    check_main_inequality, improved_kr_check, Irreversibility, SpanSearch, TradeoffOptions, Variant,
};

use crate::config::{ConfigError, Kind, Params, ScenarioConfig};
use crate::report::{blank_report, ReportLine};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario {id:?}, seed {seed}: {source}")]
    Engine {
        id: String,
        seed: u64,
        source: symcost::error::Error,
    },
}

type Res<T> = Result<T, symcost::error::Error>;

fn pauli_z() -> Hermitian {
    Hermitian::diagonal(&[1.0, -1.0])
}

fn plus_vec() -> CVector {
    (basis_vector(2, 0) + basis_vector(2, 1)) * r(FRAC_1_SQRT_2)
}

fn minus_vec() -> CVector {
    (basis_vector(2, 0) - basis_vector(2, 1)) * r(FRAC_1_SQRT_2)
}

fn plus_minus() -> Res<TestEnsemble> {
    TestEnsemble::uniform(vec![DensityMatrix::pure(&plus_vec())?, DensityMatrix::pure(&minus_vec())?])
}

/// `exp(-iθσ_y)`, a real rotation.
fn rotation(theta: f64) -> CMatrix {
    real_matrix(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

fn swap_plus() -> Res<Implementation> {
    let swap = CMatrix::from_fn(4, 4, |i, j| {
        let (a, b) = (j / 2, j % 2);
        r(if i == b * 2 + a { 1.0 } else { 0.0 })
    });
    let z = pauli_z();
    Implementation::new(swap, DensityMatrix::pure(&plus_vec())?, z.clone(), z.clone(), z.clone(), z)
}

/// CNOT into an uncharged pointer in `|0⟩`, which dephases the system in the `Z` basis.
fn dephasing_cnot() -> Res<Implementation> {
    let cnot = real_matrix(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]);
    Implementation::new(
        cnot,
        DensityMatrix::basis(2, 0),
        pauli_z(),
        Hermitian::zeros(2),
        pauli_z(),
        Hermitian::zeros(2),
    )
}

fn budget(s: &ScenarioConfig) -> Result<OptimizerBudget, ConfigError> {
    OptimizerBudget::new(s.optimizer_budget.restarts, s.optimizer_budget.iterations).map_err(|e| {
        ConfigError::Scenario {
            id: s.id.clone(),
            message: e.to_string(),
        }
    })
}

/// Evaluates one seed of a scenario. `seed` is the configured seed and `eff` the one
/// derived from the master seed; all randomness comes from `eff`.
pub fn evaluate(s: &ScenarioConfig, seed: u64, eff: u64) -> Result<ReportLine, ScenarioError> {
    let p = Params::new(s);
    let wrap = |source| ScenarioError::Engine {
        id: s.id.clone(),
        seed,
        source,
    };
    let mut line = match s.kind {
        Kind::Tradeoff => tradeoff(s, &p, eff)?.map_err(wrap)?,
        Kind::Thermo => thermo(s, &p, eff)?.map_err(wrap)?,
        Kind::Petz => petz(s, &p, eff)?.map_err(wrap)?,
        Kind::Scramble => scramble(s, &p, eff)?.map_err(wrap)?,
        Kind::Way => way(s, &p, eff)?.map_err(wrap)?,
        Kind::Gate => gate(s, &p, eff)?.map_err(wrap)?,
        Kind::Nogo => nogo(s, &p, eff)?.map_err(wrap)?,
        Kind::Qec => qec(s, &p, eff)?.map_err(wrap)?,
        Kind::Kr => kr(s, &p, eff)?.map_err(wrap)?,
    };
    line.report.scenario_id = s.id.clone();
    line.seed = seed;
    line.effective_seed = eff;
    if let Some(scale) = s.inject_lhs_scale {
        let lhs = line.report.lhs * scale;
        line.report.slack = line.report.slack.min(line.report.rhs - lhs);
        line.report.lhs = lhs;
        line.extras.insert("inject_lhs_scale".into(), json!(scale));
    }
    line.finish();
    Ok(line)
}

fn tradeoff(s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let which = p.str("implementation")?;
    p.choice(
        "implementation",
        which,
        &["swap_plus", "random_conserving", "random_violating", "random_gibbs", "battery"],
    )?;
    let d_a = p.usize_or("d_a", 2)?;
    let d_b = p.usize_or("d_b", 2)?;
    let max_spread = p.f64_or("max_spread", 1.0)?;
    let beta = p.f64_or("beta", 1.0)?;
    let theta = p.f64_or("theta", 0.5)?;
    let d = p.usize_or("d", 12)?;
    let window = p.usize_or("window", 8)?;
    let qubit_default = matches!(which, "swap_plus" | "battery");
    let ens_kind = p.str_or("ensemble", if qubit_default { "plus_minus" } else { "orthogonal" })?;
    p.choice("ensemble", ens_kind, &["orthogonal", "mixed", "plus_minus", "extremal"])?;
    let variant = p.pick(
        "variant",
        if ens_kind == "mixed" { "general" } else { "orthogonal" },
        &[("orthogonal", Variant::Orthogonal), ("general", Variant::General)],
    )?;
    let budget = budget(s)?;
    let delta_choice = s.delta_choice;
    let id = s.id.clone();
    Ok((|| {
        let imp = match which {
            "swap_plus" => swap_plus()?,
            "random_conserving" => conserving_implementation(d_a, d_b, eff)?,
            "random_violating" => violating_implementation(d_a, d_b, max_spread, eff)?,
            "random_gibbs" => gibbs_preserving_implementation(d_a, d_b, beta, eff)?,
            _ => battery_rotation(theta, d, window)?,
        };
        let dim = imp.dims().a;
        let ens_seed = stream_seed(eff, 2);
        let ens = match ens_kind {
            "orthogonal" => orthogonal_pure_ensemble(dim, ens_seed)?,
            "mixed" => mixed_ensemble(dim, ens_seed)?,
            "extremal" => extremal_ensemble(imp.x_a())?,
            _ => plus_minus()?,
        };
        let ch = imp.channel()?;
        let opt = optimize_delta(&ens, &ch, budget, stream_seed(eff, 1))?;
        let report = check_main_inequality(
            &ens,
            &imp,
            Irreversibility {
                delta: opt.delta_upper,
                delta_t: opt.delta_t,
            },
            &TradeoffOptions {
                variant,
                delta_choice,
                search: SpanSearch::default(),
                scenario_id: id,
            },
        )?;
        let vacuous = report.is_vacuous();
        Ok(ReportLine::new(Kind::Tradeoff, which, report)
            .extra("ensemble", ens_kind)
            .extra("ensemble_size", ens.len())
            .extra("variant", variant)
            .extra("delta_choice", delta_choice)
            .extra("vacuous", vacuous)
            .extra("recovery_source", &opt.source)
            .extra("d_a", dim)
            .extra("d_b", imp.dims().b))
    })())
}

fn thermo(s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let which = p.str("implementation")?;
    p.choice("implementation", which, &["dephasing_cnot", "random_gibbs"])?;
    let beta = p.f64("beta")?;
    let d_a = p.usize_or("d_a", 2)?;
    let d_b = p.usize_or("d_b", 2)?;
    let state = p.str_or("state", if which == "dephasing_cnot" { "plus" } else { "random" })?;
    p.choice("state", state, &["plus", "random"])?;
    let budget = budget(s)?;
    let choice = s.delta_choice;
    Ok((|| {
        let imp = match which {
            "dephasing_cnot" => dephasing_cnot()?,
            _ => gibbs_preserving_implementation(d_a, d_b, beta, eff)?,
        };
        let dim = imp.dims().a;
        let rho = match state {
            "plus" if dim == 2 => DensityMatrix::pure(&plus_vec())?,
            "plus" => {
                return Err(symcost::error::Error::InvalidInput(format!(
                    "state \"plus\" needs a qubit system, got dimension {dim}"
                )))
            }
            _ => random_state(dim, dim, stream_seed(eff, 3))?,
        };
        let t = check_thermo_bound(&imp, &rho, beta, choice, &SpanSearch::default(), budget, stream_seed(eff, 1))?;
        let mut report = t.report.clone();
        let lhs = [report.lhs, t.lhs_d1, t.lhs_d2, t.lhs_d3].into_iter().fold(f64::NEG_INFINITY, f64::max);
        report.lhs = lhs;
        report.slack = (report.rhs - lhs).min(t.entropy_gap);
        Ok(ReportLine::new(Kind::Thermo, which, report)
            .extra("sigma_beta", t.sigma_beta)
            .extra("sigma_beta_bits", t.sigma_beta / LN_2)
            .extra("lhs_d1", t.lhs_d1)
            .extra("lhs_d2", t.lhs_d2)
            .extra("lhs_d3", t.lhs_d3)
            .extra("entropy_gap", t.entropy_gap)
            .extra("beta", beta))
    })())
}

fn petz(_s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let which = p.str_or("channel", "random")?;
    p.choice("channel", which, &["random", "dephasing_plus"])?;
    let d_a = p.usize("d_a")?;
    let d_b = p.usize("d_b")?;
    let rank = p.usize_or("rank", 0)?;
    Ok((|| {
        let (ch, sigma, rho) = if which == "dephasing_plus" {
            (
                dephasing_channel(&pauli_z())?,
                DensityMatrix::maximally_mixed(2),
                DensityMatrix::pure(&plus_vec())?,
            )
        } else {
            let ch = conserving_implementation(d_a, d_b, eff)?.channel()?;
            let d = ch.dim_in();
            let sigma = random_state(d, d, stream_seed(eff, 4))?;
            let rank = if rank == 0 { 1 + (eff % d as u64) as usize } else { rank.min(d) };
            let rho = random_state(d, rank, stream_seed(eff, 5))?;
            (ch, sigma, rho)
        };
        let back = petz_map(&ch, &sigma)?.apply(&ch.apply(sigma.matrix()));
        let fixed = symcost::linalg::max_abs_diff(&back, sigma.matrix());
        let dp = petz_error(&ch, &sigma, &rho)?;
        let entropy = generalized_entropy_production(&ch, &rho, &sigma)?;
        let middle = -(1.0 - dp * dp).max(1e-300).ln();
        let mut report = blank_report("");
        report.lhs = middle;
        report.rhs = entropy;
        report.delta_irrev = dp;
        let mut slack = (entropy - middle).min(middle - dp * dp);
        // The reference state must come back exactly; a miss fails the line outright.
        if fixed > 1e-8 {
            slack = slack.min(-fixed);
        }
        report.slack = slack;
        Ok(ReportLine::new(Kind::Petz, which, report)
            .extra("delta_p", dp)
            .extra("delta_p_squared", dp * dp)
            .extra("entropy_production", entropy)
            .extra("entropy_production_bits", entropy / LN_2)
            .extra("fixed_point_residual", fixed))
    })())
}

fn scramble(_s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let decoder = p.pick(
        "decoder",
        "per_bit_helstrom_product",
        &[
            ("per_bit_helstrom_product", Decoder::PerBitHelstromProduct),
            ("optimizer", Decoder::Optimizer),
            ("random_guess", Decoder::RandomGuess),
        ],
    )?;
    let sc = ScrambleScenario {
        m: p.usize("m")?,
        n: p.usize("n")?,
        big_n: p.usize("N")?,
        l: p.usize("l")?,
        seed: eff,
    };
    Ok((|| {
        let h = run_scenario(&sc, decoder)?;
        let mut report = blank_report("");
        report.lhs = h.delta_h_lower;
        report.rhs = h.delta_h_achieved;
        let bit_slack = h.bits.iter().map(|b| b.slack).fold(f64::INFINITY, f64::min);
        report.slack = (h.delta_h_achieved - h.delta_h_lower).min(bit_slack);
        Ok(ReportLine::new(Kind::Scramble, "scrambling", report)
            .extra("bound", &h.bound)
            .extra("bits", &h.bits)
            .extra("bit_slack_min", bit_slack)
            .extra("achieved_by_decoder", &h.achieved_by_decoder)
            .extra("assumption_checks", &h.assumption_checks)
            .extra("decoder", decoder)
            .extra("gamma", sc.gamma()))
    })())
}

fn way(_s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let d = p.usize("d")?;
    let window = p.usize("window")?;
    let probes = p.usize_or("probes", 32)?;
    Ok((|| {
        let imp = battery_measurement(d, window)?;
        let ch = imp.channel()?;
        let q = MeasurementChannel::projective(&CMatrix::from_columns(&[plus_vec(), minus_vec()]))?;
        let eps = max_output_distance(&ch, &q.channel()?, probes, eff)?;
        let bound = way_bound(&q, &induced_povm(&ch)?, imp.x_a(), imp.x_a_out(), eps)?;
        let fisher = sld_qfi(imp.rho_b(), imp.x_b())?;
        let mut report = blank_report("");
        report.fisher_b = fisher;
        report.lhs = bound;
        report.rhs = fisher;
        report.slack = fisher - bound;
        Ok(ReportLine::new(Kind::Way, "battery_measurement", report)
            .extra("epsilon", eps)
            .extra("d", d)
            .extra("window", window))
    })())
}

fn gate(_s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let theta = p.f64("theta")?;
    let d = p.usize("d")?;
    let window = p.usize("window")?;
    let probes = p.usize_or("probes", 32)?;
    Ok((|| {
        let imp = battery_rotation(theta, d, window)?;
        let target = rotation(theta);
        let eps = max_output_distance(&imp.channel()?, &unitary_channel(&target)?, probes, eff)?;
        let g = gate_cost_bound(&target, imp.x_a(), eps)?;
        let fisher = sld_qfi(imp.rho_b(), imp.x_b())?;
        let lhs = match g.bound {
            CostBound::Finite(v) => v,
            CostBound::Unbounded => f64::INFINITY,
        };
        let mut report = blank_report("");
        report.fisher_b = fisher;
        report.lhs = lhs;
        report.rhs = fisher;
        report.slack = fisher - lhs;
        Ok(ReportLine::new(Kind::Gate, "battery_rotation", report)
            .extra("epsilon", eps)
            .extra("a_value", g.a_value)
            .extra("commutator_norm", g.commutator_norm)
            .extra("theta", theta)
            .extra("d", d)
            .extra("window", window))
    })())
}

fn nogo(_s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let theta = p.f64("theta")?;
    let which = p.str("channel")?;
    p.choice("channel", which, &["dephasing", "depolarizing"])?;
    let expect = p.pick(
        "expect",
        "any",
        &[("no_go", Some(Verdict::NoGo)), ("inconclusive", Some(Verdict::Inconclusive)), ("any", None)],
    )?;
    Ok((|| {
        let n = match which {
            "dephasing" => dephasing_channel(&pauli_z())?,
            _ => depolarizing_channel(2, 1.0)?,
        };
        let rep = nogo_channel_check(&rotation(theta), &n, &pauli_z(), eff)?;
        let matched = expect.map_or(true, |v| v == rep.verdict);
        let mut report = blank_report("");
        // A verdict other than the expected one is the only way this line fails.
        report.lhs = if matched { 0.0 } else { 1.0 };
        report.rhs = 0.0;
        report.slack = report.rhs - report.lhs;
        Ok(ReportLine::new(Kind::Nogo, which, report)
            .extra("verdict", rep.verdict)
            .extra("expected", expect)
            .extra("witness_element", rep.witness.as_ref().map(|w| w.element))
            .extra("candidates", rep.candidates)
            .extra("theta", theta))
    })())
}

fn qec(s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let code = p.str("code")?;
    p.choice("code", code, &["repetition"])?;
    let n = p.usize_or("n", 3)?;
    if !(2..=4).contains(&n) {
        return Err(ConfigError::Scenario {
            id: s.id.clone(),
            message: format!("repetition code needs 2 ≤ n ≤ 4, got {n}"),
        });
    }
    let budget = budget(s)?;
    Ok((|| {
        let dim = 1usize << n;
        let mut v = CMatrix::zeros(dim, 2);
        v[(0, 0)] = r(1.0);
        v[(dim - 1, 1)] = r(1.0);
        let z = pauli_z();
        let parts: Vec<Hermitian> = (0..n).map(|_| z.scale(1.0 / n as f64)).collect();
        let ens = extremal_ensemble(&z)?;
        let b = covariant_code_bound(&v, &z, &parts, &ens, budget, eff)?;
        let mut report = blank_report("");
        report.c_value = b.c_value;
        report.delta_1 = b.delta_1;
        report.delta_irrev = b.lhs_error;
        // The recovery error can be no smaller than the bound.
        report.lhs = b.rhs_bound;
        report.rhs = b.lhs_error;
        report.slack = b.lhs_error - b.rhs_bound;
        if b.y_residual > 1e-8 {
            report.slack = report.slack.min(-b.y_residual);
        }
        Ok(ReportLine::new(Kind::Qec, code, report)
            .extra("faist_style", b.faist_style)
            .extra("y_residual", b.y_residual)
            .extra("n", n))
    })())
}

fn kr(s: &ScenarioConfig, p: &Params, eff: u64) -> Result<Res<ReportLine>, ConfigError> {
    let d = p.usize("d")?;
    let state = p.str_or("state", "random")?;
    p.choice("state", state, &["random", "y_eigenstate"])?;
    if state == "y_eigenstate" && d != 2 {
        return Err(ConfigError::Scenario {
            id: s.id.clone(),
            message: format!("state \"y_eigenstate\" needs d = 2, got {d}"),
        });
    }
    Ok((|| {
        let (rho, o1, o2) = if state == "y_eigenstate" {
            let v = CVector::from_vec(vec![r(FRAC_1_SQRT_2), c(0.0, FRAC_1_SQRT_2)]);
            let x = Hermitian::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]))?;
            (DensityMatrix::pure(&v)?, pauli_z(), x)
        } else {
            let mut rng = stream(eff, 6);
            let rank = 1 + (eff % d as u64) as usize;
            let rho = random_state(d, rank, stream_seed(eff, 7))?;
            (rho, random_hermitian(d, &mut rng), random_hermitian(d, &mut rng))
        };
        let chk = improved_kr_check(&rho, &o1, &o2)?;
        let mut report = blank_report("");
        report.lhs = chk.lhs;
        report.rhs = chk.rhs;
        report.slack = chk.slack;
        Ok(ReportLine::new(Kind::Kr, state, report).extra("d", d))
    })())
}
