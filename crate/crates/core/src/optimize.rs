//! Derivative-free minimization and parameterizations used by the estimators.

use crate::linalg::{c, CMatrix, CVector, C64};
use crate::random::{stream, uniform, Rng};

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Nelder-Mead simplex minimization with the standard coefficients.
pub fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], step: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    if n == 0 {
        return Minimum {
            x: Vec::new(),
            value: f(x0),
        };
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= 1e-15 * (1.0 + values[0].abs()) {
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (cj, pj) in centroid.iter_mut().zip(p) {
                *cj += pj / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(cj, wj)| cj + t * (wj - cj))
                .collect()
        };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (pj, bj) in simplex[i].iter_mut().zip(&best) {
                *pj = bj + 0.5 * (*pj - bj);
            }
            values[i] = f(&simplex[i]);
        }
    }
    let (mut bi, mut bv) = (0, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v < bv {
            bi = i;
            bv = v;
        }
    }
    Minimum {
        x: simplex[bi].clone(),
        value: bv,
    }
}

/// Number of real parameters describing a unit vector in `C^s` up to global phase.
pub fn sphere_params(s: usize) -> usize {
    2 * s.saturating_sub(1)
}

/// Unit vector from `s - 1` hyperspherical angles followed by `s - 1` relative phases.
pub fn unit_vector_from_params(params: &[f64], s: usize) -> CVector {
    let mut v = CVector::zeros(s);
    if s == 0 {
        return v;
    }
    let (angles, phases) = params.split_at(s - 1);
    let mut remaining = 1.0;
    for i in 0..s {
        let mag = if i + 1 < s {
            let m = remaining * angles[i].cos();
            remaining *= angles[i].sin();
            m
        } else {
            remaining
        };
        let phase = if i == 0 { 0.0 } else { phases[i - 1] };
        v[i] = C64::from_polar(mag, phase);
    }
    v
}

/// Inverse of [`unit_vector_from_params`] up to global phase.
pub fn params_from_unit_vector(v: &CVector) -> Vec<f64> {
    let s = v.len();
    if s <= 1 {
        return Vec::new();
    }
    let mut angles = Vec::with_capacity(s - 1);
    for i in 0..(s - 1) {
        let tail: f64 = (i + 1..s).map(|j| v[j].norm_sqr()).sum::<f64>().sqrt();
        angles.push(tail.atan2(v[i].norm()));
    }
    let ref_phase = v[0].arg();
    let phases = (1..s).map(|j| v[j].arg() - ref_phase);
    angles.into_iter().chain(phases).collect()
}

fn random_sphere_params(s: usize, rng: &mut Rng) -> Vec<f64> {
    let n = sphere_params(s);
    (0..n)
        .map(|i| {
            if i < s - 1 {
                std::f64::consts::FRAC_PI_2 * uniform(rng)
            } else {
                std::f64::consts::TAU * uniform(rng)
            }
        })
        .collect()
}

/// Maximizes `objective(ψ)` over unit vectors `ψ` in the column span of `basis`
/// (orthonormal columns). Candidate vectors are evaluated first; the best of them
/// seeds the first Nelder-Mead run and the remaining runs start at random points.
pub fn maximize_over_span(
    basis: &CMatrix,
    objective: &dyn Fn(&CVector) -> f64,
    candidates: &[CVector],
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> (f64, CVector) {
    let s = basis.ncols();
    let embed = |coeffs: &CVector| -> CVector { basis * coeffs };
    let mut best_val = f64::NEG_INFINITY;
    let mut best_vec = CVector::zeros(basis.nrows());
    let mut best_coeffs = CVector::zeros(s);

    let consider = |coeffs: CVector, best_val: &mut f64, best_vec: &mut CVector, best_coeffs: &mut CVector| {
        let v = embed(&coeffs);
        let val = objective(&v);
        if val > *best_val {
            *best_val = val;
            *best_vec = v;
            *best_coeffs = coeffs;
        }
    };

    for j in 0..s {
        let mut e = CVector::zeros(s);
        e[j] = c(1.0, 0.0);
        consider(e, &mut best_val, &mut best_vec, &mut best_coeffs);
    }
    for cand in candidates {
        let coeffs = basis.adjoint() * cand;
        let n = coeffs.norm();
        if n > 1e-9 {
            consider(coeffs / c(n, 0.0), &mut best_val, &mut best_vec, &mut best_coeffs);
        }
    }
    if s <= 1 {
        return (best_val, best_vec);
    }

    for k in 0..restarts {
        let x0 = if k == 0 {
            params_from_unit_vector(&best_coeffs)
        } else {
            random_sphere_params(s, &mut stream(seed, k as u64))
        };
        let mut f = |p: &[f64]| -objective(&embed(&unit_vector_from_params(p, s)));
        let m = nelder_mead(&mut f, &x0, 0.3, iterations);
        if -m.value > best_val {
            best_val = -m.value;
            best_coeffs = unit_vector_from_params(&m.x, s);
            best_vec = embed(&best_coeffs);
        }
    }
    (best_val, best_vec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, r};

    #[test]
    fn minimizes_rosenbrock() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(&mut f, &[-1.2, 1.0], 0.5, 2000);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn sphere_round_trip() {
        let v = CVector::from_vec(vec![c(0.5, 0.0), c(0.1, 0.6), c(-0.3, 0.2), c(0.0, -0.4)]);
        let v = &v / r(v.norm());
        let p = params_from_unit_vector(&v);
        let w = unit_vector_from_params(&p, 4);
        assert!(((w.dotc(&v)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finds_top_eigenvector() {
        let h = crate::linalg::real_matrix(3, 3, &[1.0, 0.4, 0.0, 0.4, 2.0, 0.3, 0.0, 0.3, 0.5]);
        let obj = |v: &CVector| v.dotc(&(&h * v)).re;
        let (val, _) = maximize_over_span(&identity(3), &obj, &[], 4, 400, 1);
        let top = crate::linalg::eigh_matrix(&h).unwrap().max();
        assert!((val - top).abs() < 1e-8);
    }
}
