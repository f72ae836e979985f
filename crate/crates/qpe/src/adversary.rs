//! Eve's attack strategies, behind one contract: an attack receives only the
//! in-flight probe state and its own random substream, and emits the state
//! Bob receives plus Eve's side record. Alice's (pair, sign) metadata never
//! crosses this interface.

use num_complex::Complex64;

use crate::encoding::EffectiveState;
use crate::qudit::{
    born_probabilities, make_pair_superposition, sample_index, Povm, PovmElement, Sign,
    StateVector,
};
use crate::rng::{sample_normal, UnitStream};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// What Eve does to each intercepted probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackSpec {
    /// Untouched channel.
    None,
    /// Per-level random phases theta_i ~ Normal(0, delta^2/2); the induced
    /// pairwise shift theta_k - theta_j is Normal(0, delta^2) and
    /// antisymmetric by construction.
    GaussianPhase { delta: f64 },
    /// A fixed diagonal channel with level phases delta * (i - 1); the shift
    /// on pair (j, k) is delta * (k - j), so different pairs see different
    /// shifts.
    FixedPhase { delta: f64 },
    /// Forward nothing; send a fresh random pair superposition.
    ResendRandomPair,
    /// Forward nothing; send the uniform superposition over all d levels.
    ResendUniform,
    /// With probability `fraction` per round, measure in the computational
    /// basis and resend the projective outcome |k'>.
    ProjectiveResend { fraction: f64 },
    /// Measure projectively, then send (|k'> + e^{i theta}|k''>)/sqrt(2) with
    /// theta uniform and k'' uniform over levels != k'.
    SuperpositionResend,
    /// With probability `fraction`, measure the pairwise POVM; on outcome
    /// P_jk resend (|j> + |k>)/sqrt(2), on P_0 resend a random pair.
    PairwisePovmResend { fraction: f64 },
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            AttackSpec::GaussianPhase { delta } | AttackSpec::FixedPhase { delta } => {
                if *delta < 0.0 {
                    return Err(Error::Config(format!("delta must be >= 0, got {delta}")));
                }
            }
            AttackSpec::ProjectiveResend { fraction }
            | AttackSpec::PairwisePovmResend { fraction } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(Error::Config(format!(
                        "fraction must lie in [0, 1], got {fraction}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AttackSpec::None => "none",
            AttackSpec::GaussianPhase { .. } => "gaussian_phase",
            AttackSpec::FixedPhase { .. } => "fixed_phase",
            AttackSpec::ResendRandomPair => "resend_random_pair",
            AttackSpec::ResendUniform => "resend_uniform",
            AttackSpec::ProjectiveResend { .. } => "projective_resend",
            AttackSpec::SuperpositionResend => "superposition_resend",
            AttackSpec::PairwisePovmResend { .. } => "pairwise_povm_resend",
        }
    }

    /// Resend-style attacks replace the probe and need the full state vector.
    pub fn is_resend(&self) -> bool {
        matches!(
            self,
            AttackSpec::ResendRandomPair
                | AttackSpec::ResendUniform
                | AttackSpec::ProjectiveResend { .. }
                | AttackSpec::SuperpositionResend
                | AttackSpec::PairwisePovmResend { .. }
        )
    }
}

/// The probe in flight: full d-level vector, or the two-branch effective
/// state of the parallel strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Full(StateVector),
    Effective(EffectiveState),
}

impl Probe {
    pub fn norm_sqr(&self) -> f64 {
        match self {
            Probe::Full(s) => s.norm_sqr(),
            Probe::Effective(e) => e.as_state_vector().norm_sqr(),
        }
    }
}

/// Eve's per-round record.
#[derive(Debug, Clone, PartialEq)]
pub struct EveRecord {
    pub acted: bool,
    pub outcome: Option<String>,
    pub substituted: bool,
}

impl EveRecord {
    fn idle() -> Self {
        Self { acted: false, outcome: None, substituted: false }
    }
}

/// Per-level Gaussian phases with standard deviation delta/sqrt(2).
pub fn gaussian_level_phases(delta: f64, d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sd = delta / std::f64::consts::SQRT_2;
    (0..d).map(|_| sample_normal(rng, sd)).collect()
}

fn fixed_level_phases(delta: f64, d: usize) -> Vec<f64> {
    (0..d).map(|i| delta * i as f64).collect()
}

fn apply_level_phases(probe: &Probe, phases: &[f64]) -> Result<Probe> {
    match probe {
        Probe::Full(s) => Ok(Probe::Full(crate::qudit::apply_diagonal_phases(s, phases)?)),
        Probe::Effective(e) => {
            let (j, k) = e.branch_labels();
            if j > phases.len() || k > phases.len() {
                return Err(Error::InvalidLevels(format!(
                    "branch labels ({j}, {k}) exceed phase vector length {}",
                    phases.len()
                )));
            }
            // Each of the n probes in branch |j>^n picks up theta_j.
            let n = e.probes() as f64;
            Ok(Probe::Effective(e.with_branch_phases(
                n * phases[j - 1],
                n * phases[k - 1],
            )))
        }
    }
}

/// Uniformly random (j < k, sign) pair superposition.
pub fn random_pair_state(d: usize, rng: &mut ChaCha8Rng) -> Result<StateVector> {
    let (j, k) = random_pair(d, rng);
    let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
    make_pair_superposition(d, j, k, sign)
}

/// Uniform draw over all C(d, 2) pairs j < k.
pub fn random_pair(d: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let total = d * (d - 1) / 2;
    let mut idx = rng.gen_range(0..total);
    for j in 1..d {
        let row = d - j;
        if idx < row {
            return (j, j + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index within C(d,2)")
}

/// Projective measurement in the computational basis; returns the 1-based
/// outcome level.
fn projective_measure(state: &StateVector, rng: &mut ChaCha8Rng) -> Result<usize> {
    let probs: Vec<f64> = state.amps().iter().map(|a| a.norm_sqr()).collect();
    let mut stream = RngStream(rng);
    Ok(sample_index(&probs, &mut stream)? + 1)
}

struct RngStream<'a>(&'a mut ChaCha8Rng);

impl UnitStream for RngStream<'_> {
    fn next_unit(&mut self) -> Option<f64> {
        Some(self.0.gen::<f64>())
    }
}

/// The pairwise POVM: P_jk = (|j> + |k>)(<j| + <k|)/(2d - 2) over all j < k,
/// completed by P_0. Elements are labelled "Pj,k" and "P0".
pub fn pairwise_povm(d: usize) -> Result<Povm> {
    if d < 3 {
        return Err(Error::InvalidLevels(format!("pairwise POVM needs d >= 3, got {d}")));
    }
    let scale = 1.0 / ((2 * d - 2) as f64).sqrt();
    let mut elements = Vec::with_capacity(d * (d - 1) / 2 + 1);
    for j in 1..=d {
        for k in (j + 1)..=d {
            let mut v = vec![Complex64::ZERO; d];
            v[j - 1] = Complex64::new(scale, 0.0);
            v[k - 1] = Complex64::new(scale, 0.0);
            elements.push(PovmElement::rank_one(&v, format!("P{j},{k}"))?);
        }
    }
    elements.push(Povm::completion_element(&elements, d, "P0")?);
    Povm::new(elements)
}

/// Sample Eve's pairwise-POVM outcome and build her resend state.
pub fn pairwise_povm_attack(
    d: usize,
    state: &StateVector,
    rng: &mut ChaCha8Rng,
) -> Result<(StateVector, String)> {
    let povm = pairwise_povm(d)?;
    let probs = born_probabilities(state, &povm)?;
    let mut stream = RngStream(rng);
    let idx = sample_index(&probs, &mut stream)?;
    let label = povm.label_of(idx).to_string();
    let out = if idx + 1 == povm.len() {
        // P0: the protocol never says what to send; a random pair is Eve's
        // concealment-preserving guess.
        random_pair_state(d, rng)?
    } else {
        let body = &label[1..];
        let (j, k) = body.split_once(',').expect("pair label");
        make_pair_superposition(d, j.parse().unwrap(), k.parse().unwrap(), Sign::Plus)?
    };
    Ok((out, label))
}

/// Apply the attack to one intercepted probe.
pub fn attack(spec: &AttackSpec, probe: &Probe, rng: &mut ChaCha8Rng) -> Result<(Probe, EveRecord)> {
    spec.validate()?;
    let full = |p: &Probe| -> Result<StateVector> {
        match p {
            Probe::Full(s) => Ok(s.clone()),
            Probe::Effective(_) => Err(Error::Unsupported(format!(
                "{} attack needs the full probe; the parallel strategy sends an entangled block",
                spec.kind_name()
            ))),
        }
    };
    match spec {
        AttackSpec::None => Ok((probe.clone(), EveRecord::idle())),
        AttackSpec::GaussianPhase { delta } => {
            let d = match probe {
                Probe::Full(s) => s.dim(),
                Probe::Effective(e) => e.branch_labels().0.max(e.branch_labels().1),
            };
            let phases = gaussian_level_phases(*delta, d, rng);
            let out = apply_level_phases(probe, &phases)?;
            Ok((out, EveRecord { acted: true, outcome: None, substituted: false }))
        }
        AttackSpec::FixedPhase { delta } => {
            let d = match probe {
                Probe::Full(s) => s.dim(),
                Probe::Effective(e) => e.branch_labels().0.max(e.branch_labels().1),
            };
            let out = apply_level_phases(probe, &fixed_level_phases(*delta, d))?;
            Ok((out, EveRecord { acted: true, outcome: None, substituted: false }))
        }
        AttackSpec::ResendRandomPair => {
            let s = full(probe)?;
            let out = random_pair_state(s.dim(), rng)?;
            Ok((Probe::Full(out), EveRecord { acted: true, outcome: None, substituted: true }))
        }
        AttackSpec::ResendUniform => {
            let s = full(probe)?;
            let out = StateVector::uniform(s.dim())?;
            Ok((Probe::Full(out), EveRecord { acted: true, outcome: None, substituted: true }))
        }
        AttackSpec::ProjectiveResend { fraction } => {
            let s = full(probe)?;
            if !rng.gen_bool(*fraction) {
                return Ok((probe.clone(), EveRecord::idle()));
            }
            let level = projective_measure(&s, rng)?;
            let out = StateVector::basis(s.dim(), level)?;
            Ok((
                Probe::Full(out),
                EveRecord { acted: true, outcome: Some(format!("P{level}")), substituted: true },
            ))
        }
        AttackSpec::SuperpositionResend => {
            let s = full(probe)?;
            let d = s.dim();
            let k1 = projective_measure(&s, rng)?;
            let mut k2 = rng.gen_range(1..d);
            if k2 >= k1 {
                k2 += 1;
            }
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![Complex64::ZERO; d];
            amps[k1 - 1] = Complex64::new(r, 0.0);
            amps[k2 - 1] = Complex64::from_polar(r, theta);
            let out = StateVector::new(amps)?;
            Ok((
                Probe::Full(out),
                EveRecord { acted: true, outcome: Some(format!("P{k1}")), substituted: true },
            ))
        }
        AttackSpec::PairwisePovmResend { fraction } => {
            let s = full(probe)?;
            if !rng.gen_bool(*fraction) {
                return Ok((probe.clone(), EveRecord::idle()));
            }
            let (out, label) = pairwise_povm_attack(s.dim(), &s, rng)?;
            Ok((
                Probe::Full(out),
                EveRecord { acted: true, outcome: Some(label), substituted: true },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::encode_sequential;
    use crate::rng::{substream, TAG_EVE};
    use approx::assert_abs_diff_eq;

    fn encoded(d: usize, j: usize, k: usize, phi: f64, n: u32, sign: Sign) -> StateVector {
        let s = make_pair_superposition(d, j, k, sign).unwrap();
        encode_sequential(&s, phi, n, (j, k)).unwrap()
    }

    #[test]
    fn none_attack_is_identity() {
        let probe = Probe::Full(encoded(4, 1, 2, 0.3, 2, Sign::Plus));
        let mut rng = substream(1, TAG_EVE, 0);
        let (out, rec) = attack(&AttackSpec::None, &probe, &mut rng).unwrap();
        assert_eq!(out, probe);
        assert!(!rec.acted && rec.outcome.is_none() && !rec.substituted);
    }

    #[test]
    fn every_attack_emits_a_normalized_state() {
        let specs = [
            AttackSpec::None,
            AttackSpec::GaussianPhase { delta: 1.3 },
            AttackSpec::FixedPhase { delta: 0.9 },
            AttackSpec::ResendRandomPair,
            AttackSpec::ResendUniform,
            AttackSpec::ProjectiveResend { fraction: 1.0 },
            AttackSpec::SuperpositionResend,
            AttackSpec::PairwisePovmResend { fraction: 1.0 },
        ];
        let probe = Probe::Full(encoded(5, 2, 4, 0.7, 3, Sign::Minus));
        for (i, spec) in specs.iter().enumerate() {
            let mut rng = substream(9, TAG_EVE, i as u64);
            let (out, _) = attack(spec, &probe, &mut rng).unwrap();
            assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_zero_width_is_identity() {
        let probe = Probe::Full(encoded(4, 1, 4, 1.1, 2, Sign::Plus));
        let mut rng = substream(3, TAG_EVE, 0);
        let (out, _) = attack(&AttackSpec::GaussianPhase { delta: 0.0 }, &probe, &mut rng).unwrap();
        assert_eq!(out, probe);
    }

    #[test]
    fn gaussian_pairwise_shift_statistics() {
        // Delta_phi_jk = theta_k - theta_j: zero mean, variance delta^2,
        // antisymmetric.
        let delta = 1.0f64;
        let mut rng = substream(5, TAG_EVE, 1);
        let draws = 100_000;
        let d = 4;
        let mut stats = vec![vec![(0.0f64, 0.0f64); d]; d];
        for _ in 0..draws {
            let phases = gaussian_level_phases(delta, d, &mut rng);
            for j in 0..d {
                for k in 0..d {
                    let shift = phases[k] - phases[j];
                    stats[j][k].0 += shift;
                    stats[j][k].1 += shift * shift;
                }
            }
        }
        for j in 0..d {
            for k in 0..d {
                if j == k {
                    continue;
                }
                let mean = stats[j][k].0 / draws as f64;
                let var = stats[j][k].1 / draws as f64 - mean * mean;
                assert!(mean.abs() < 3.0 * delta / (draws as f64).sqrt());
                assert!((var - delta * delta).abs() / (delta * delta) < 0.05);
            }
        }
    }

    #[test]
    fn gaussian_average_probability_matches_attenuated_cosine() {
        // At phi = 0, delta = 1 the mean aligned probability is
        // (1 + e^{-1/2})/2.
        use crate::protocol::{build_pair_povm, Basis};
        let d = 3;
        let povm = build_pair_povm(d, 1, 2, Basis::Standard).unwrap();
        let mut rng = substream(17, TAG_EVE, 2);
        let rounds = 100_000;
        let mut sum_p = 0.0;
        for _ in 0..rounds {
            let probe = Probe::Full(encoded(d, 1, 2, 0.0, 1, Sign::Plus));
            let (out, _) =
                attack(&AttackSpec::GaussianPhase { delta: 1.0 }, &probe, &mut rng).unwrap();
            let Probe::Full(s) = out else { unreachable!() };
            sum_p += born_probabilities(&s, &povm).unwrap()[0];
        }
        let mean = sum_p / rounds as f64;
        let expect = (1.0 + (-0.5f64).exp()) / 2.0;
        // Var[cos(Delta)] bounded by 1; 3 sigma at 1e5 rounds.
        assert!((mean - expect).abs() < 3.0 / (rounds as f64).sqrt(), "{mean} vs {expect}");
    }

    #[test]
    fn fixed_phase_shift_differs_across_pairs() {
        let delta = 0.4;
        let spec = AttackSpec::FixedPhase { delta };
        let mut rng = substream(7, TAG_EVE, 0);
        let mut rel_shift = |j: usize, k: usize| -> f64 {
            let probe = Probe::Full(encoded(5, j, k, 0.0, 1, Sign::Plus));
            let (out, _) = attack(&spec, &probe, &mut rng).unwrap();
            let Probe::Full(s) = out else { unreachable!() };
            (s.amp(k) / s.amp(j)).arg()
        };
        assert_abs_diff_eq!(rel_shift(1, 2), delta, epsilon = 1e-12);
        assert_abs_diff_eq!(rel_shift(2, 5), 3.0 * delta, epsilon = 1e-12);
    }

    #[test]
    fn full_projective_resend_sends_a_pair_level() {
        let spec = AttackSpec::ProjectiveResend { fraction: 1.0 };
        let mut rng = substream(21, TAG_EVE, 0);
        let mut seen = [0usize; 2];
        for _ in 0..2000 {
            let probe = Probe::Full(encoded(4, 2, 3, 0.9, 2, Sign::Plus));
            let (out, rec) = attack(&spec, &probe, &mut rng).unwrap();
            assert!(rec.acted && rec.substituted);
            let Probe::Full(s) = out else { unreachable!() };
            // Output must be |2> or |3>, each with probability 1/2.
            if s.amp(2).norm_sqr() > 0.99 {
                seen[0] += 1;
            } else if s.amp(3).norm_sqr() > 0.99 {
                seen[1] += 1;
            } else {
                panic!("resend outside the encoded pair");
            }
        }
        let f = seen[0] as f64 / 2000.0;
        assert!((f - 0.5).abs() < 4.0 * (0.25f64 / 2000.0).sqrt());
    }

    #[test]
    fn projective_fraction_zero_never_acts() {
        let spec = AttackSpec::ProjectiveResend { fraction: 0.0 };
        let mut rng = substream(23, TAG_EVE, 0);
        let probe = Probe::Full(encoded(4, 1, 2, 0.3, 1, Sign::Plus));
        let (out, rec) = attack(&spec, &probe, &mut rng).unwrap();
        assert_eq!(out, probe);
        assert!(!rec.acted);
    }

    #[test]
    fn pairwise_povm_is_complete_for_all_small_d() {
        for d in 3..=16 {
            pairwise_povm(d).expect("complete PSD POVM");
        }
    }

    #[test]
    fn pairwise_exact_outcome_probability() {
        // P(P_jk) on the encoded pair = cos^2(n phi / 2)/(d - 1) for sign +.
        let d = 5;
        let n = 2u32;
        let phi = 0.8;
        let s = encoded(d, 2, 4, phi, n, Sign::Plus);
        let povm = pairwise_povm(d).unwrap();
        let probs = born_probabilities(&s, &povm).unwrap();
        let idx = povm
            .elements()
            .iter()
            .position(|e| e.label() == "P2,4")
            .unwrap();
        let expect = (n as f64 * phi / 2.0).cos().powi(2) / (d as f64 - 1.0);
        assert_abs_diff_eq!(probs[idx], expect, epsilon = 1e-12);
    }

    #[test]
    fn resend_attacks_reject_effective_probes() {
        let e = crate::encoding::encode_parallel(3, 0.2, (1, 2), Sign::Plus).unwrap();
        let probe = Probe::Effective(e);
        let mut rng = substream(2, TAG_EVE, 0);
        assert!(attack(&AttackSpec::ResendUniform, &probe, &mut rng).is_err());
        // Phase attacks still work on the effective representation.
        assert!(attack(&AttackSpec::GaussianPhase { delta: 0.5 }, &probe, &mut rng).is_ok());
    }

    #[test]
    fn random_pair_is_uniform() {
        let d = 5;
        let total = d * (d - 1) / 2;
        let mut rng = substream(31, TAG_EVE, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 50_000;
        for _ in 0..draws {
            let (j, k) = random_pair(d, &mut rng);
            assert!(j < k && k <= d);
            *counts.entry((j, k)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), total);
        let expect = draws as f64 / total as f64;
        for (_, c) in counts {
            assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt());
        }
    }
}
