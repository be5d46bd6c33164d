//! Information scrambling with a conserved charge: charge-sector Haar unitaries, classical
//! strings encoded in charge superpositions, and Hamming-error estimation for decoders
//! acting on the radiation together with the black hole's early partner.
//!
//! Qubit order is big-endian: the first qubit is the most significant bit of an index.
//! The system is `A = A_1 … A_m` (n qubits each) followed by `B` (N qubits); after the
//! dynamics the first `l` qubits form `A'` and the rest `B'`. `R_B` is maximally
//! entangled with `B`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, pseudo_inverse_sqrt, trace_product, CMatrix, CVector, Hermitian, TensorFactorization, C64};
use crate::random::{haar_unitary, stream};
use crate::states::DensityMatrix;
use crate::tradeoff::{evaluate_bound, BoundInputs, Irreversibility, Variant};

/// Largest `2^(N+k)` simulated densely.
pub const DENSE_CAP: usize = 4096;
/// Largest dimension of the space in which decoders are evaluated.
pub const DECODER_CAP: usize = 1024;

/// Haar-random unitary within each eigenspace of a diagonal `x_total`.
pub fn block_haar_unitary(factors: &TensorFactorization, x_total: &Hermitian, seed: u64) -> Result<CMatrix> {
    let d = x_total.dim();
    check_dim(factors.total(), d, "block unitary")?;
    let m = x_total.matrix();
    let mut off = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    if off > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "block unitary needs a diagonal charge, off-diagonal entry {off:.3e}"
        )));
    }
    let diag: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    let mut levels: Vec<f64> = Vec::new();
    for &v in &diag {
        if !levels.iter().any(|&l| (l - v).abs() <= 1e-9) {
            levels.push(v);
        }
    }
    levels.sort_by(f64::total_cmp);
    let mut u = CMatrix::zeros(d, d);
    for (b, &level) in levels.iter().enumerate() {
        let idx: Vec<usize> = (0..d).filter(|&i| (diag[i] - level).abs() <= 1e-9).collect();
        let block = haar_unitary(idx.len(), &mut stream(seed, b as u64));
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                u[(i, j)] = block[(r, c)];
            }
        }
    }
    Ok(u)
}

/// Number of excited qubits in `count` qubits starting at qubit `first` of a `total`-qubit index.
fn excitations(index: usize, first: usize, count: usize, total: usize) -> usize {
    let shift = total - first - count;
    ((index >> shift) & ((1 << count) - 1)).count_ones() as usize
}

/// Total charge `Σ_i |1⟩⟨1|_i` on `qubits` qubits.
pub fn qubit_charge(qubits: usize) -> Hermitian {
    let d = 1usize << qubits;
    Hermitian::diagonal(&(0..d).map(|i| i.count_ones() as f64).collect::<Vec<_>>())
}

/// `⊗_j (|0…0⟩ ± |1…1⟩)/√2` with the sign set by bit `j`.
pub fn encode_vector(bits: &[u8], n: usize) -> Result<CVector> {
    if n == 0 {
        return Err(Error::InvalidInput("blocks need at least one qubit".into()));
    }
    let m = bits.len();
    let k = m * n;
    let mut v = CVector::zeros(1 << k);
    let ones = (1usize << n) - 1;
    let amp = (0.5f64).powf(m as f64 / 2.0);
    for pattern in 0..(1usize << m) {
        let mut index = 0usize;
        let mut sign = 1.0;
        for (j, &bit) in bits.iter().enumerate() {
            let up = (pattern >> (m - 1 - j)) & 1 == 1;
            index = (index << n) | if up { ones } else { 0 };
            if up && bit == 1 {
                sign = -sign;
            }
        }
        v[index] = C64::new(sign * amp, 0.0);
    }
    Ok(v)
}

pub fn encode_string(bits: &[u8], n: usize) -> Result<DensityMatrix> {
    DensityMatrix::pure(&encode_vector(bits, n)?)
}

fn bits_of(a: usize, m: usize) -> Vec<u8> {
    (0..m).map(|j| ((a >> (m - 1 - j)) & 1) as u8).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrambleScenario {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub l: usize,
    pub seed: u64,
}

impl ScrambleScenario {
    pub fn k(&self) -> usize {
        self.m * self.n
    }

    pub fn total_qubits(&self) -> usize {
        self.big_n + self.k()
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.l as f64 / self.total_qubits() as f64
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidInput("scrambling needs m ≥ 1 and n ≥ 1".into()));
        }
        if self.l > self.total_qubits() {
            return Err(Error::InvalidInput(format!(
                "l = {} exceeds the {} qubits of the system",
                self.l,
                self.total_qubits()
            )));
        }
        let dim = 1usize.checked_shl(self.total_qubits() as u32).unwrap_or(usize::MAX);
        if self.total_qubits() >= 63 || dim > DENSE_CAP {
            return Err(Error::SimulationTooLarge { dim, cap: DENSE_CAP });
        }
        Ok(())
    }

    pub fn unitary(&self) -> Result<CMatrix> {
        let q = self.total_qubits();
        block_haar_unitary(&TensorFactorization::new(vec![2; q])?, &qubit_charge(q), self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    /// Each bit read out by its own Helstrom measurement.
    PerBitHelstromProduct,
    /// The better of the pretty-good measurement on whole strings and the per-bit product.
    Optimizer,
    /// Ignores the radiation and guesses uniformly.
    RandomGuess,
}

/// Value of the Hamming lower bound `(m/4)(1 + 3/(aγ))⁻²` with its validity flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFormula {
    pub value: f64,
    pub a: f64,
    pub gamma: f64,
    pub flags: Vec<String>,
}

pub fn bound_from_a_gamma(m: f64, a: f64, gamma: f64) -> BoundFormula {
    let mut flags = Vec::new();
    let value = if gamma <= 0.0 || a * gamma < 1e-12 {
        flags.push("gamma_zero".to_string());
        0.0
    } else {
        let t = 1.0 + 3.0 / (a * gamma);
        m / 4.0 / (t * t)
    };
    if a < 2.0 {
        flags.push("a_below_2".to_string());
    }
    BoundFormula { value, a, gamma, flags }
}

/// Hamming lower bound with `a = n/√N` and `γ = 1 - l/(N + mn)`; sizes may be astronomically large.
pub fn bound_rhs_formula(m: f64, n: f64, big_n: f64, l: f64) -> BoundFormula {
    let k = m * n;
    let a = n / big_n.sqrt();
    let gamma = (1.0 - l / (big_n + k)).clamp(0.0, 1.0);
    let mut out = bound_from_a_gamma(m, a, gamma);
    if big_n < 1e3 {
        out.flags.push("N_below_1000".to_string());
    }
    if k > big_n {
        out.flags.push("k_above_N".to_string());
    }
    out
}

/// Per-block data: discrimination error and the single-block trade-off check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitReport {
    pub helstrom_error: f64,
    pub c_value: f64,
    pub fisher_b: f64,
    pub delta_1: f64,
    /// `δ` of the measure-and-prepare recovery built from the Helstrom measurement.
    pub delta_upper: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingResult {
    pub scenario: ScrambleScenario,
    pub decoder: Decoder,
    pub delta_h_achieved: f64,
    pub delta_h_lower: f64,
    pub achieved_by_decoder: BTreeMap<String, f64>,
    pub bound: BoundFormula,
    pub bits: Vec<BitReport>,
    pub assumption_checks: BTreeMap<String, f64>,
}

/// Global output vectors for every string `a`, as matrices `out[(a'b'), r]` over `A'B' ⊗ R_B`.
fn global_outputs(s: &ScrambleScenario, u: &CMatrix) -> Result<Vec<CMatrix>> {
    let nb = 1usize << s.big_n;
    let norm = 1.0 / (nb as f64).sqrt();
    (0..(1usize << s.m))
        .map(|a| {
            let psi = encode_vector(&bits_of(a, s.m), s.n)?;
            let mut out = CMatrix::zeros(u.nrows(), nb);
            for (idx, amp) in psi.iter().enumerate() {
                if amp.norm() == 0.0 {
                    continue;
                }
                out += u.columns(idx * nb, nb) * (amp * norm);
            }
            Ok(out)
        })
        .collect()
}

/// Rearranges `out[(a'b'), r]` into `M[(a'r), b']` so that `ρ_{A'R_B} = M M†`.
fn radiation_factor(out: &CMatrix, l: usize, total: usize, nb: usize) -> CMatrix {
    let rest = 1usize << (total - l);
    let rad = 1usize << l;
    CMatrix::from_fn(rad * nb, rest, |row, b| {
        let (ap, r) = (row / nb, row % nb);
        out[(ap * rest + b, r)]
    })
}

/// Decoder-side states `ρ_a` on `A'R_B`, expressed isometrically in the smallest
/// space containing all of them.
fn decoder_states(factors: &[CMatrix]) -> Result<Vec<Hermitian>> {
    let full = factors[0].nrows();
    let per = factors[0].ncols();
    let span = per * factors.len();
    if full <= span {
        if full > DECODER_CAP {
            return Err(Error::SimulationTooLarge { dim: full, cap: DECODER_CAP });
        }
        return Ok(factors.iter().map(|m| Hermitian::symmetrized(m * m.adjoint())).collect());
    }
    if span > DECODER_CAP {
        return Err(Error::SimulationTooLarge { dim: span, cap: DECODER_CAP });
    }
    let mut w = CMatrix::zeros(full, span);
    for (i, m) in factors.iter().enumerate() {
        w.columns_mut(i * per, per).copy_from(m);
    }
    let gram = Hermitian::symmetrized(w.adjoint() * &w);
    let e = gram.eigh()?;
    let top = e.max().max(0.0);
    let keep: Vec<usize> = (0..span).filter(|&i| e.values[i] > 1e-12 * top.max(1e-300)).collect();
    let basis = CMatrix::from_fn(span, keep.len(), |r, c| e.vectors[(r, keep[c])] / e.values[keep[c]].sqrt());
    Ok((0..factors.len())
        .map(|i| {
            let t = basis.adjoint() * gram.matrix().columns(i * per, per);
            Hermitian::symmetrized(&t * t.adjoint())
        })
        .collect())
}

fn average(states: &[&Hermitian]) -> Hermitian {
    let d = states[0].dim();
    let mut acc = CMatrix::zeros(d, d);
    for s in states {
        acc += s.matrix();
    }
    Hermitian::symmetrized(acc / C64::new(states.len() as f64, 0.0))
}

/// Expected Hamming distance of the pretty-good measurement on uniformly drawn strings.
fn pgm_hamming(states: &[Hermitian], m: usize) -> Result<f64> {
    let refs: Vec<&Hermitian> = states.iter().collect();
    let avg = average(&refs);
    let inv = pseudo_inverse_sqrt(&avg, 1e-12)?;
    let w = 1.0 / states.len() as f64;
    let mut total = 0.0;
    for (b, sb) in states.iter().enumerate() {
        let e = inv.matrix() * sb.matrix() * inv.matrix() * C64::new(w, 0.0);
        for (a, sa) in states.iter().enumerate() {
            let dist = (a ^ b).count_ones() as f64;
            if dist > 0.0 {
                total += w * dist * trace_product(&e, sa.matrix()).re;
            }
        }
    }
    Ok(total.clamp(0.0, m as f64))
}

/// Simulates one scenario and evaluates every decoder.
pub fn run_scenario(s: &ScrambleScenario, decoder: Decoder) -> Result<HammingResult> {
    s.validate()?;
    let total = s.total_qubits();
    let nb = 1usize << s.big_n;
    let u = s.unitary()?;
    let outs = global_outputs(s, &u)?;
    let factors: Vec<CMatrix> = outs.iter().map(|o| radiation_factor(o, s.l, total, nb)).collect();
    let states = decoder_states(&factors)?;
    let strings = states.len();

    let x_rad: Vec<f64> = (0..u.nrows()).map(|i| excitations(i, 0, s.l, total) as f64).collect();
    let charge_overlap = |x: &CMatrix, y: &CMatrix| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..x.nrows() {
            for r in 0..x.ncols() {
                acc += x[(i, r)].conj() * x_rad[i] * y[(i, r)];
            }
        }
        acc
    };

    let fisher_b = s.big_n as f64;
    let delta_1 = (s.n + s.l) as f64;
    let mut bits = Vec::with_capacity(s.m);
    for j in 0..s.m {
        let mask = 1usize << (s.m - 1 - j);
        let zero: Vec<&Hermitian> = (0..strings).filter(|a| a & mask == 0).map(|a| &states[a]).collect();
        let one: Vec<&Hermitian> = (0..strings).filter(|a| a & mask != 0).map(|a| &states[a]).collect();
        let diff = average(&zero).sub(&average(&one));
        let helstrom_error = (0.5 * (1.0 - 0.5 * diff.trace_norm()?)).max(0.0);

        let mut y01 = C64::new(-(s.n as f64) / 2.0, 0.0);
        let others = strings / 2;
        for a in (0..strings).filter(|a| a & mask == 0) {
            y01 -= charge_overlap(&outs[a], &outs[a | mask]) / C64::new(others as f64, 0.0);
        }
        let c_value = y01.norm() / std::f64::consts::SQRT_2;
        let delta_upper = helstrom_error.sqrt();
        let (lhs, rhs) = evaluate_bound(&BoundInputs {
            c: c_value,
            fisher_b,
            delta: delta_1,
            delta_z: 0.0,
            irreversibility: Irreversibility {
                delta: delta_upper,
                delta_t: helstrom_error,
            },
            min_weight: 0.5,
            mean_trace_distance: 1.0,
            variant: Variant::Orthogonal,
        });
        bits.push(BitReport {
            helstrom_error,
            c_value,
            fisher_b,
            delta_1,
            delta_upper,
            lhs,
            rhs,
            slack: rhs - lhs,
        });
    }

    let lower: f64 = bits.iter().map(|b| b.helstrom_error).sum();
    let pgm = pgm_hamming(&states, s.m)?;
    let mut achieved_by_decoder = BTreeMap::new();
    achieved_by_decoder.insert("per_bit_helstrom_product".to_string(), lower);
    achieved_by_decoder.insert("pretty_good_measurement".to_string(), pgm);
    achieved_by_decoder.insert("random_guess".to_string(), s.m as f64 / 2.0);
    let delta_h_achieved = match decoder {
        Decoder::PerBitHelstromProduct => lower,
        Decoder::Optimizer => pgm.min(lower),
        Decoder::RandomGuess => s.m as f64 / 2.0,
    };

    let gamma = s.gamma();
    let mut checks = BTreeMap::new();
    let mut defect = 0.0_f64;
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            if i.count_ones() != j.count_ones() {
                defect = defect.max(u[(i, j)].norm());
            }
        }
    }
    checks.insert("conservation_defect".to_string(), defect);
    let predicted_mean = (1.0 - gamma) * (s.k() + s.big_n) as f64 / 2.0;
    let input_var = (s.m * s.n * s.n + s.big_n) as f64 / 4.0;
    let (mut mean_dev, mut var_ratio) = (0.0_f64, 0.0);
    for o in &outs {
        let mean = charge_overlap(o, o).re;
        let second: f64 = (0..o.nrows())
            .map(|i| x_rad[i] * x_rad[i] * o.row(i).norm_squared())
            .sum();
        mean_dev = mean_dev.max((mean - predicted_mean).abs());
        var_ratio += (second - mean * mean) / ((1.0 - gamma).max(1e-300) * input_var) / strings as f64;
    }
    checks.insert("charge_mean_deviation".to_string(), mean_dev);
    checks.insert("charge_variance_ratio".to_string(), if gamma < 1.0 { var_ratio } else { 0.0 });
    checks.insert("gamma".to_string(), gamma);
    checks.insert("min_bit_slack".to_string(), bits.iter().map(|b| b.slack).fold(f64::INFINITY, f64::min));

    Ok(HammingResult {
        scenario: *s,
        decoder,
        delta_h_achieved,
        delta_h_lower: lower,
        achieved_by_decoder,
        bound: bound_rhs_formula(s.m as f64, s.n as f64, s.big_n as f64, s.l as f64),
        bits,
        assumption_checks: checks,
    })
}

/// Channel from block `j` to `A'R_B`, the other blocks prepared in the average of their
/// two code states. Built explicitly from the dilation; meant for small cross-checks.
pub fn block_channel(s: &ScrambleScenario, j: usize) -> Result<KrausChannel> {
    s.validate()?;
    if j >= s.m {
        return Err(Error::InvalidInput(format!("block {j} out of range")));
    }
    let total = s.total_qubits();
    let nb = 1usize << s.big_n;
    let u = s.unitary()?;
    let d_in = 1usize << s.n;
    let rest = 1usize << (total - s.l);
    let rad = 1usize << s.l;
    let others = s.m - 1;
    let ones = (1usize << s.n) - 1;
    let weight = (0.5f64).powi(others as i32).sqrt() / (nb as f64).sqrt();
    let mut kraus = Vec::new();
    for o in 0..(1usize << others) {
        let mut cols: Vec<CMatrix> = Vec::with_capacity(d_in);
        for x in 0..d_in {
            let mut a_index = 0usize;
            let mut bit = others;
            for blk in 0..s.m {
                let block_value = if blk == j {
                    x
                } else {
                    bit -= 1;
                    if (o >> bit) & 1 == 1 {
                        ones
                    } else {
                        0
                    }
                };
                a_index = (a_index << s.n) | block_value;
            }
            cols.push(u.columns(a_index * nb, nb) * C64::new(weight, 0.0));
        }
        for b in 0..rest {
            kraus.push(CMatrix::from_fn(rad * nb, d_in, |row, x| {
                let (ap, r) = (row / nb, row % nb);
                cols[x][(ap * rest + b, r)]
            }));
        }
    }
    KrausChannel::new(kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;

    #[test]
    fn two_qubit_block_structure() {
        let f = TensorFactorization::new(vec![2, 2]).unwrap();
        let u = block_haar_unitary(&f, &qubit_charge(2), 3).unwrap();
        assert!(unitarity_residual(&u) < 1e-10);
        assert!(u[(0, 1)].norm() == 0.0 && u[(3, 1)].norm() == 0.0);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
        let again = block_haar_unitary(&f, &qubit_charge(2), 3).unwrap();
        assert_eq!(u, again);
    }

    #[test]
    fn encoding_is_ghz_blocks() {
        let v = encode_vector(&[0], 1).unwrap();
        assert!((v[0].re - v[1].re).abs() < 1e-15);
        let a = encode_vector(&[0, 1], 2).unwrap();
        let b = encode_vector(&[1, 1], 2).unwrap();
        assert!(a.dotc(&b).norm() < 1e-15);
        let x = qubit_charge(4);
        assert!((x.expectation_vec(&a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn formula_examples() {
        let b = bound_rhs_formula(4.0, 4.0, 16.0, 16.0);
        assert!((b.value - 1.0 / 49.0).abs() < 1e-12);
        let z = bound_rhs_formula(1.0, 1.0, 3.0, 4.0);
        assert_eq!(z.value, 0.0);
        assert!(z.flags.contains(&"gamma_zero".to_string()));
    }

    #[test]
    fn gram_and_full_states_agree() {
        let s = ScrambleScenario { m: 1, n: 1, big_n: 2, l: 2, seed: 4 };
        let u = s.unitary().unwrap();
        let outs = global_outputs(&s, &u).unwrap();
        let f: Vec<CMatrix> = outs.iter().map(|o| radiation_factor(o, 2, 3, 4)).collect();
        let full: Vec<Hermitian> = f.iter().map(|m| Hermitian::symmetrized(m * m.adjoint())).collect();
        let reduced = decoder_states(&f).unwrap();
        assert!(reduced[0].dim() < full[0].dim());
        let a = full[0].sub(&full[1]).trace_norm().unwrap();
        let b = reduced[0].sub(&reduced[1]).trace_norm().unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
