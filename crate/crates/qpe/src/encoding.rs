//! Parameter-encoding unitaries for the sequential, parallel-entangled and
//! multi-parameter strategies.
//!
//! The parallel strategy is represented in the two-dimensional effective
//! subspace span{|j>^(x)n, |k>^(x)n}; every POVM applied to it acts within
//! that subspace plus its complement, so measurement statistics are exactly
//! preserved without d^n storage.

use num_complex::Complex64;

use crate::qudit::{Sign, StateVector};
use crate::{Error, Result};

/// Which encoding strategy a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
    Multiparam,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sequential => "sequential",
            Strategy::Parallel => "parallel",
            Strategy::Multiparam => "multiparam",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Strategy::Sequential),
            "parallel" => Ok(Strategy::Parallel),
            "multiparam" => Ok(Strategy::Multiparam),
            other => Err(Error::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Two-branch effective state of the parallel-entangled strategy:
/// amplitudes on |j>^(x)n and |k>^(x)n.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveState {
    branch_amps: [Complex64; 2],
    branch_labels: (usize, usize),
    probes: u32,
}

impl EffectiveState {
    pub fn new(branch_amps: [Complex64; 2], branch_labels: (usize, usize), probes: u32) -> Result<Self> {
        let norm2 = branch_amps[0].norm_sqr() + branch_amps[1].norm_sqr();
        if (norm2 - 1.0).abs() > crate::qudit::NORM_TOL {
            return Err(Error::InvalidState(format!(
                "effective state not normalized: {norm2}"
            )));
        }
        Ok(Self { branch_amps, branch_labels, probes })
    }

    pub fn branch_amps(&self) -> [Complex64; 2] {
        self.branch_amps
    }

    pub fn branch_labels(&self) -> (usize, usize) {
        self.branch_labels
    }

    pub fn probes(&self) -> u32 {
        self.probes
    }

    /// View as a 2-level state vector for Born-rule machinery.
    pub fn as_state_vector(&self) -> StateVector {
        StateVector::new(self.branch_amps.to_vec()).expect("normalized by construction")
    }

    /// Apply a relative phase between the two branches, preserving the norm.
    pub fn with_branch_phases(&self, theta_j: f64, theta_k: f64) -> Self {
        let amps = [
            self.branch_amps[0] * Complex64::from_polar(1.0, theta_j),
            self.branch_amps[1] * Complex64::from_polar(1.0, theta_k),
        ];
        Self { branch_amps: amps, branch_labels: self.branch_labels, probes: self.probes }
    }
}

/// Single application of the phase map on the (j, k) subspace: amplitudes pick
/// up e^{-i phi/2} at j and e^{+i phi/2} at k.
fn phase_step(state: &StateVector, phi: f64, j: usize, k: usize) -> Result<StateVector> {
    let mut phases = vec![0.0; state.dim()];
    phases[j - 1] = -phi / 2.0;
    phases[k - 1] = phi / 2.0;
    crate::qudit::apply_diagonal_phases(state, &phases)
}

/// Sequential strategy: n applications of the single-step unitary on (j, k).
pub fn encode_sequential(
    state: &StateVector,
    phi: f64,
    n: u32,
    pair: (usize, usize),
) -> Result<StateVector> {
    let (j, k) = pair;
    let d = state.dim();
    if j < 1 || k < 1 || j > d || k > d || j == k {
        return Err(Error::InvalidLevels(format!("bad pair ({j}, {k}) for d = {d}")));
    }
    let support: f64 = state
        .amps()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j - 1 && *i != k - 1)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if support > crate::qudit::NORM_TOL {
        return Err(Error::InvalidState(format!(
            "state has weight {support:e} outside the ({j}, {k}) subspace"
        )));
    }
    phase_step(state, n as f64 * phi, j, k)
}

/// Parallel-entangled strategy: branch amplitudes
/// (e^{-i n phi/2}, sign * e^{+i n phi/2}) / sqrt(2) on (j^n, k^n).
pub fn encode_parallel(n: u32, phi: f64, pair: (usize, usize), sign: Sign) -> Result<EffectiveState> {
    if n < 1 {
        return Err(Error::Config("parallel strategy needs n >= 1".into()));
    }
    let (j, k) = pair;
    if j == k || j < 1 || k < 1 {
        return Err(Error::InvalidLevels(format!("bad pair ({j}, {k})")));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let half = n as f64 * phi / 2.0;
    let amps = [
        Complex64::from_polar(r, -half),
        Complex64::from_polar(r, half) * sign.as_f64(),
    ];
    EffectiveState::new(amps, (j, k), n)
}

/// Multi-parameter encoding:
/// (|k0> + sum_a sign_a e^{i n phi_a} |k_a>) / sqrt(m + 1).
pub fn encode_multiparam(
    d: usize,
    levels: &[usize],
    signs: &[Sign],
    phases: &[f64],
    n: u32,
) -> Result<StateVector> {
    let m = phases.len();
    if levels.len() != m + 1 {
        return Err(Error::InvalidLevels(format!(
            "need m + 1 = {} levels, got {}",
            m + 1,
            levels.len()
        )));
    }
    if signs.len() != m {
        return Err(Error::InvalidLevels(format!(
            "need m = {m} signs, got {}",
            signs.len()
        )));
    }
    if d <= m + 1 {
        return Err(Error::InvalidLevels(format!(
            "multi-parameter encoding requires d > m + 1, got d = {d}, m = {m}"
        )));
    }
    let mut seen = vec![false; d];
    for &lv in levels {
        if lv < 1 || lv > d {
            return Err(Error::InvalidLevels(format!("level {lv} out of range 1..={d}")));
        }
        if seen[lv - 1] {
            return Err(Error::InvalidLevels(format!("duplicate level {lv}")));
        }
        seen[lv - 1] = true;
    }
    let norm = 1.0 / ((m + 1) as f64).sqrt();
    let mut amps = vec![Complex64::ZERO; d];
    amps[levels[0] - 1] = Complex64::new(norm, 0.0);
    for (a, (&lv, &sg)) in levels[1..].iter().zip(signs).enumerate() {
        amps[lv - 1] = Complex64::from_polar(norm, n as f64 * phases[a]) * sg.as_f64();
    }
    StateVector::new(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{build_pair_povm, build_parallel_povm, Basis};
    use crate::qudit::{born_probabilities, make_pair_superposition};
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_phase_is_identity() {
        let s = make_pair_superposition(4, 2, 4, Sign::Minus).unwrap();
        let enc = encode_sequential(&s, 0.0, 5, (2, 4)).unwrap();
        assert_eq!(s, enc);
    }

    #[test]
    fn single_step_pi_gives_plus_minus_i() {
        let s = make_pair_superposition(3, 1, 2, Sign::Plus).unwrap();
        let enc = encode_sequential(&s, std::f64::consts::PI, 1, (1, 2)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(enc.amp(1).im, -r, epsilon = 1e-12);
        assert_abs_diff_eq!(enc.amp(1).re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(enc.amp(2).im, r, epsilon = 1e-12);
    }

    #[test]
    fn n_fold_encoding_equals_composition() {
        let s = make_pair_superposition(5, 2, 5, Sign::Minus).unwrap();
        let phi = 0.317;
        let once = encode_sequential(&s, phi, 4, (2, 5)).unwrap();
        let mut step = s;
        for _ in 0..4 {
            step = encode_sequential(&step, phi, 1, (2, 5)).unwrap();
        }
        for i in 1..=5 {
            assert_abs_diff_eq!(once.amp(i).re, step.amp(i).re, epsilon = 1e-12);
            assert_abs_diff_eq!(once.amp(i).im, step.amp(i).im, epsilon = 1e-12);
        }
    }

    #[test]
    fn encoding_rejects_support_outside_pair() {
        let s = StateVector::uniform(4).unwrap();
        assert!(encode_sequential(&s, 0.1, 1, (1, 2)).is_err());
    }

    #[test]
    fn encoding_preserves_inner_products() {
        let phi = 1.234;
        let a = make_pair_superposition(4, 1, 3, Sign::Plus).unwrap();
        let b = make_pair_superposition(4, 1, 3, Sign::Minus).unwrap();
        let before = a.inner(&b);
        let ea = encode_sequential(&a, phi, 3, (1, 3)).unwrap();
        let eb = encode_sequential(&b, phi, 3, (1, 3)).unwrap();
        let after = ea.inner(&eb);
        assert_abs_diff_eq!(before.re, after.re, epsilon = 1e-12);
        assert_abs_diff_eq!(before.im, after.im, epsilon = 1e-12);
    }

    #[test]
    fn parallel_zero_phase_branches() {
        let e = encode_parallel(3, 0.0, (1, 2), Sign::Plus).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(e.branch_amps()[0].re, r, epsilon = 1e-12);
        assert_abs_diff_eq!(e.branch_amps()[1].re, r, epsilon = 1e-12);
    }

    #[test]
    fn parallel_and_sequential_distributions_agree() {
        // Both reduce to P = (1 +/- cos(n phi))/2 on the full phi grid.
        let d = 4;
        for n in 1..=8u32 {
            for i in 0..64 {
                let phi = i as f64 * std::f64::consts::TAU / 64.0;
                for sign in [Sign::Plus, Sign::Minus] {
                    let prepared = make_pair_superposition(d, 1, 3, sign).unwrap();
                    let seq = encode_sequential(&prepared, phi, n, (1, 3)).unwrap();
                    let p_seq = born_probabilities(
                        &seq,
                        &build_pair_povm(d, 1, 3, Basis::Standard).unwrap(),
                    )
                    .unwrap();
                    let par = encode_parallel(n, phi, (1, 3), sign).unwrap();
                    let p_par = born_probabilities(
                        &par.as_state_vector(),
                        &build_parallel_povm(Basis::Standard).unwrap(),
                    )
                    .unwrap();
                    for (a, b) in p_seq.iter().take(2).zip(p_par.iter().take(2)) {
                        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn multiparam_norm_and_limits() {
        // all phases zero, all signs plus: uniform over the chosen levels.
        let s = encode_multiparam(5, &[1, 2, 4], &[Sign::Plus, Sign::Plus], &[0.0, 0.0], 2).unwrap();
        let expect = 1.0 / 3.0f64.sqrt();
        for lv in [1, 2, 4] {
            assert_abs_diff_eq!(s.amp(lv).re, expect, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);

        // m = 1 reduces to a two-level state with relative phase n*phi.
        let s = encode_multiparam(4, &[1, 3], &[Sign::Plus], &[0.7], 3).unwrap();
        let rel = (s.amp(3) / s.amp(1)).arg();
        assert_abs_diff_eq!(rel, 3.0 * 0.7, epsilon = 1e-12);
    }

    #[test]
    fn multiparam_rejects_bad_inputs() {
        assert!(encode_multiparam(3, &[1, 2, 3], &[Sign::Plus, Sign::Plus], &[0.0, 0.0], 1).is_err());
        assert!(encode_multiparam(5, &[1, 1, 2], &[Sign::Plus, Sign::Plus], &[0.0, 0.0], 1).is_err());
    }
}
