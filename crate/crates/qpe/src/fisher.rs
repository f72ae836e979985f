//! Classical Fisher information, Fisher information matrix, pure-state
//! quantum Fisher information and Cramér–Rao bounds.
//!
//! Derivatives are central finite differences with a default step of 1e-5
//! radians; outcomes with probability below 1e-12 are dropped from the sums.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::qudit::StateVector;
use crate::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-5;
const PROB_FLOOR: f64 = 1e-12;

fn check_probs(p: &[f64], where_: &str) -> Result<()> {
    let mut sum = 0.0;
    for &v in p {
        if v < -1e-10 {
            return Err(Error::NegativeProbability(format!(
                "p = {v} at {where_}"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::NegativeProbability(format!(
            "probabilities sum to {sum} at {where_}"
        )));
    }
    Ok(())
}

/// Classical Fisher information sum_k (p_k')^2 / p_k at x, with p_k' by
/// central difference.
pub fn classical_fisher<F>(model: F, x: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    if step <= 0.0 || step > 1e-3 {
        return Err(Error::Config(format!("step {step} outside (0, 1e-3]")));
    }
    let p0 = model(x);
    let pp = model(x + step);
    let pm = model(x - step);
    check_probs(&p0, "x")?;
    check_probs(&pp, "x + step")?;
    check_probs(&pm, "x - step")?;
    let mut fi = 0.0;
    for k in 0..p0.len() {
        if p0[k] < PROB_FLOOR {
            continue;
        }
        let dp = (pp[k] - pm[k]) / (2.0 * step);
        fi += dp * dp / p0[k];
    }
    Ok(fi)
}

/// Fisher information matrix with entries
/// F_jk = sum_i (d_j p_i)(d_k p_i) / p_i, symmetrized.
pub fn fisher_matrix<F>(model: F, x: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if step <= 0.0 || step > 1e-3 {
        return Err(Error::Config(format!("step {step} outside (0, 1e-3]")));
    }
    let m = x.len();
    let p0 = model(x);
    check_probs(&p0, "x")?;
    let n_out = p0.len();

    // d_j p_i by central differences.
    let mut grads = vec![vec![0.0; n_out]; m];
    let mut xs = x.to_vec();
    for j in 0..m {
        xs[j] = x[j] + step;
        let pp = model(&xs);
        xs[j] = x[j] - step;
        let pm = model(&xs);
        xs[j] = x[j];
        check_probs(&pp, "x + step")?;
        check_probs(&pm, "x - step")?;
        for i in 0..n_out {
            grads[j][i] = (pp[i] - pm[i]) / (2.0 * step);
        }
    }

    let mut f = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        for k in 0..m {
            let mut acc = 0.0;
            for i in 0..n_out {
                if p0[i] < PROB_FLOOR {
                    continue;
                }
                acc += grads[j][i] * grads[k][i] / p0[i];
            }
            f[(j, k)] = acc;
        }
    }
    // Symmetrize: average of F and F^T.
    let ft = f.transpose();
    Ok((f + ft) * 0.5)
}

/// Pure-state quantum Fisher information
/// 4 [ <dpsi|dpsi> - |<dpsi|psi>|^2 ], derivative by central difference.
pub fn qfi_pure<F>(state_fn: F, x: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> StateVector,
{
    if step <= 0.0 || step > 1e-3 {
        return Err(Error::Config(format!("step {step} outside (0, 1e-3]")));
    }
    let psi = state_fn(x);
    let psi_p = state_fn(x + step);
    let psi_m = state_fn(x - step);
    for s in [&psi, &psi_p, &psi_m] {
        let drift = (s.norm_sqr() - 1.0).abs();
        if drift > 1e-8 {
            return Err(Error::NormalizationDrift { drift });
        }
    }
    let d = psi.dim();
    if psi_p.dim() != d || psi_m.dim() != d {
        return Err(Error::DimensionMismatch {
            state: d,
            operator: psi_p.dim(),
        });
    }
    let dpsi: Vec<Complex64> = (0..d)
        .map(|i| (psi_p.amps()[i] - psi_m.amps()[i]) / (2.0 * step))
        .collect();
    let dd: f64 = dpsi.iter().map(|a| a.norm_sqr()).sum();
    let overlap: Complex64 = dpsi
        .iter()
        .zip(psi.amps())
        .map(|(dp, p)| dp.conj() * p)
        .sum();
    Ok(4.0 * (dd - overlap.norm_sqr()))
}

/// Fisher information, scalar or matrix.
#[derive(Debug, Clone)]
pub enum FisherInfo {
    Scalar(f64),
    Matrix(DMatrix<f64>),
}

/// Cramér–Rao standard-deviation bound(s) for nu repetitions:
/// scalar 1/sqrt(nu F), or sqrt((F^-1)_jj / nu) per parameter.
pub fn cramer_rao(fi: &FisherInfo, nu: u64) -> Result<Vec<f64>> {
    if nu == 0 {
        return Err(Error::Config("nu must be >= 1".into()));
    }
    let nu = nu as f64;
    match fi {
        FisherInfo::Scalar(f) => {
            if *f <= 0.0 {
                return Err(Error::NonPositiveFisher(*f));
            }
            Ok(vec![1.0 / (nu * f).sqrt()])
        }
        FisherInfo::Matrix(m) => {
            let sym = nalgebra::SymmetricEigen::new(m.clone());
            let min_idx = sym
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let scale = sym.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
            if sym.eigenvalues[min_idx].abs() <= scale * 1e-12 || scale == 0.0 {
                let null: DVector<f64> = sym.eigenvectors.column(min_idx).into();
                return Err(Error::SingularFisher {
                    null_direction: null.iter().copied().collect(),
                });
            }
            let inv = m
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::SingularFisher {
                    null_direction: sym.eigenvectors.column(min_idx).iter().copied().collect(),
                })?;
            Ok((0..m.nrows()).map(|j| (inv[(j, j)] / nu).sqrt()).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cos_model(n: f64) -> impl Fn(f64) -> Vec<f64> {
        move |phi: f64| {
            let p = (1.0 + (n * phi).cos()) / 2.0;
            vec![p, 1.0 - p]
        }
    }

    #[test]
    fn two_outcome_cosine_model_has_fi_n_squared() {
        // Analytic FI of P = (1 + cos(n phi))/2 is n^2 for all phi.
        let fi = classical_fisher(cos_model(3.0), 0.7, DEFAULT_STEP).unwrap();
        assert_abs_diff_eq!(fi, 9.0, epsilon = 1e-6);
    }

    #[test]
    fn fi_matches_analytic_across_grid() {
        for n in 1..=8u32 {
            let nf = n as f64;
            for i in 0..40 {
                let phi = 0.06 + i as f64 * 0.07;
                let near_singular = (phi * nf / std::f64::consts::PI)
                    .round()
                    .mul_add(-std::f64::consts::PI / nf, phi)
                    .abs()
                    < 0.05;
                if near_singular {
                    continue;
                }
                let fi = classical_fisher(cos_model(nf), phi, DEFAULT_STEP).unwrap();
                assert!(
                    (fi - nf * nf).abs() / (nf * nf) < 1e-5,
                    "n = {n}, phi = {phi}: fi = {fi}"
                );
            }
        }
    }

    #[test]
    fn constant_model_has_zero_fi() {
        let fi = classical_fisher(|_| vec![0.3, 0.7], 1.0, DEFAULT_STEP).unwrap();
        assert_abs_diff_eq!(fi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fi_step_halving_converges() {
        let f1 = classical_fisher(cos_model(3.0), 0.7, 1e-5).unwrap();
        let f2 = classical_fisher(cos_model(3.0), 0.7, 5e-6).unwrap();
        assert!((f1 - f2).abs() / f1 < 1e-4);
    }

    #[test]
    fn matrix_of_independent_blocks_is_diagonal() {
        // Two independent binary cosine blocks, equal weight.
        let model = |x: &[f64]| {
            let p1 = (1.0 + (2.0 * x[0]).cos()) / 2.0;
            let p2 = (1.0 + (3.0 * x[1]).cos()) / 2.0;
            vec![p1 / 2.0, (1.0 - p1) / 2.0, p2 / 2.0, (1.0 - p2) / 2.0]
        };
        let f = fisher_matrix(model, &[0.4, 0.6], DEFAULT_STEP).unwrap();
        assert_abs_diff_eq!(f[(0, 1)], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(f[(1, 0)], 0.0, epsilon = 1e-6);
        // Half the rounds interrogate each block.
        assert_abs_diff_eq!(f[(0, 0)], 4.0 / 2.0, epsilon = 1e-4);
        assert_abs_diff_eq!(f[(1, 1)], 9.0 / 2.0, epsilon = 1e-4);
        assert_eq!(f[(0, 1)], f[(1, 0)]);
    }

    #[test]
    fn one_parameter_matrix_reduces_to_scalar() {
        let scalar = classical_fisher(cos_model(2.0), 0.5, DEFAULT_STEP).unwrap();
        let m = fisher_matrix(|x: &[f64]| cos_model(2.0)(x[0]), &[0.5], DEFAULT_STEP).unwrap();
        assert_abs_diff_eq!(m[(0, 0)], scalar, epsilon = 1e-10);
    }

    #[test]
    fn qfi_of_sequential_encoding_is_n_squared() {
        use crate::encoding::encode_sequential;
        use crate::qudit::{make_pair_superposition, Sign};
        for n in [1u32, 5] {
            let state_fn = move |phi: f64| {
                let s = make_pair_superposition(4, 1, 3, Sign::Plus).unwrap();
                encode_sequential(&s, phi, n, (1, 3)).unwrap()
            };
            let q = qfi_pure(state_fn, 0.3, DEFAULT_STEP).unwrap();
            let expect = (n * n) as f64;
            assert!((q - expect).abs() < 1e-5 * expect.max(1.0), "n = {n}: {q}");
        }
    }

    #[test]
    fn qfi_of_constant_state_is_zero() {
        use crate::qudit::{make_pair_superposition, Sign};
        let q = qfi_pure(
            |_| make_pair_superposition(3, 1, 2, Sign::Plus).unwrap(),
            0.2,
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(q.abs() < 1e-8);
    }

    #[test]
    fn qfi_bounds_classical_fi() {
        // QFI is the max over POVMs; the Eq.-style standard measurement
        // saturates it away from singular points.
        for n in [1.0f64, 2.0, 4.0] {
            let fi = classical_fisher(cos_model(n), 0.9, DEFAULT_STEP).unwrap();
            assert!(fi <= n * n + 1e-6);
        }
    }

    #[test]
    fn cramer_rao_scalar_and_matrix() {
        let b = cramer_rao(&FisherInfo::Scalar(25.0), 100).unwrap();
        assert_abs_diff_eq!(b[0], 0.02, epsilon = 1e-15);

        let b = cramer_rao(&FisherInfo::Matrix(DMatrix::identity(3, 3)), 4).unwrap();
        for v in b {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        }

        // Sequential model n = 4, nu = 1e4.
        let b = cramer_rao(&FisherInfo::Scalar(16.0), 10_000).unwrap();
        assert_abs_diff_eq!(b[0], 0.0025, epsilon = 1e-15);
    }

    #[test]
    fn singular_matrix_names_null_direction() {
        let mut m = DMatrix::<f64>::zeros(2, 2);
        m[(0, 0)] = 4.0;
        match cramer_rao(&FisherInfo::Matrix(m), 10) {
            Err(Error::SingularFisher { null_direction }) => {
                assert!(null_direction[1].abs() > 0.99);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn negative_probability_in_stencil_is_an_error() {
        let model = |x: f64| vec![x, 1.0 - x];
        assert!(classical_fisher(model, 0.0, 1e-5).is_err());
    }
}
