//! Post-hoc analysis: phase estimation from revealed transcripts, Monte
//! Carlo precision experiments against the Cramér–Rao bound, detection
//! statistics, and the closed-form verification suite.

pub mod oracles;
pub mod report;
pub mod verify;

pub use verify::{verify_closed_forms, ClaimRow, Verdict, VerifyOptions, CLAIM_IDS};

use crate::encoding::Strategy;
use crate::exec::{indexed_map, Exec};
use crate::fisher::{cramer_rao, classical_fisher, fisher_matrix, FisherInfo, DEFAULT_STEP};
use crate::protocol::{
    run_protocol_with_exec, Basis, Outcome, ProtocolConfig, Transcript,
};
use crate::qudit::Sign;
use crate::rng::{mix, TAG_TRIAL};
use crate::{Error, Result};

/// Knobs passed to the single-parameter estimator.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorOptions {
    /// Known contrast of the aligned-outcome probability,
    /// P(aligned) = (1 + a cos(n phi))/2; the raw count ratio is divided by
    /// it before inversion. 1.0 means no correction.
    pub attenuation: f64,
    /// Branch index N for the rotated basis: the estimate is read off as
    /// (N pi + (-1)^N asin(s)) / n. Ignored by the standard basis, which
    /// reports on [0, pi/n].
    pub branch: i64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { attenuation: 1.0, branch: 0 }
    }
}

impl EstimatorOptions {
    /// Options implied by a run configuration: contrast from the declared
    /// attack and, for the rotated basis, the branch containing the true
    /// phase. The standard-basis contrast correction assumes Bob learns the
    /// channel noise level; the rotated estimator is deliberately left
    /// uncorrected (it is used at sin(n phi) ~ 0 where the raw read-off is
    /// already unbiased to first order).
    pub fn for_config(cfg: &ProtocolConfig) -> Self {
        let attenuation = match cfg.basis {
            Basis::Standard => oracles::attenuation(&cfg.attack).unwrap_or(1.0),
            Basis::Rotated => 1.0,
        };
        let branch = match cfg.basis {
            Basis::Standard => 0,
            Basis::Rotated => {
                let x = cfg.n as f64 * cfg.true_phases[0] / std::f64::consts::PI;
                (x + 0.5).floor() as i64
            }
        };
        Self { attenuation, branch }
    }
}

/// Aligned/anti-aligned outcome counts of a revealed single-parameter
/// transcript. "Aligned" means the outcome matching the prepared sign
/// (E1 for +, E2 for -).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub aligned: u64,
    pub anti: u64,
    pub aborts: u64,
}

impl Tally {
    pub fn usable(&self) -> u64 {
        self.aligned + self.anti
    }
}

/// Count aligned/anti outcomes. Needs the final reveal: without it the sign
/// bits are unknown and the outcome record carries no phase information.
pub fn tally_single(t: &Transcript) -> Result<Tally> {
    if t.strategy == Strategy::Multiparam {
        return Err(Error::Unsupported(
            "tally_single applies to the single-parameter strategies".into(),
        ));
    }
    let reveal = t.reveal.as_ref().ok_or(Error::MissingReveal)?;
    let mut tally = Tally::default();
    for (rec, (_, signs)) in t.rounds.iter().zip(reveal) {
        let aligned_outcome = match signs[0] {
            Sign::Plus => Outcome::E1,
            Sign::Minus => Outcome::E2,
        };
        match rec.outcome {
            o if o == aligned_outcome => tally.aligned += 1,
            Outcome::E1 | Outcome::E2 => tally.anti += 1,
            _ => tally.aborts += 1,
        }
    }
    Ok(tally)
}

fn invert_count_ratio(tally: &Tally, attenuation: f64) -> Result<f64> {
    if tally.usable() == 0 {
        return Err(Error::NoUsableRounds("no non-aborted outcomes".into()));
    }
    let p_hat = tally.aligned as f64 / tally.usable() as f64;
    let raw = 2.0 * p_hat - 1.0;
    Ok((raw / attenuation).clamp(-1.0, 1.0))
}

/// Single-parameter estimate from one revealed transcript.
///
/// Standard basis: phi_hat = arccos(c)/n on [0, pi/n]. Rotated basis:
/// phi_hat = (N pi + (-1)^N arcsin(s))/n with the branch N from `opts`.
pub fn estimate_phase(t: &Transcript, opts: &EstimatorOptions) -> Result<f64> {
    let tally = tally_single(t)?;
    let r = invert_count_ratio(&tally, opts.attenuation)?;
    let n = t.n as f64;
    Ok(match t.basis {
        Basis::Standard => r.acos() / n,
        Basis::Rotated => {
            let parity = if opts.branch.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            (opts.branch as f64 * std::f64::consts::PI + parity * r.asin()) / n
        }
    })
}

/// Combine standard- and rotated-basis runs: phi_hat = atan2(s, c)/n on
/// [0, 2 pi / n), resolving the cosine-branch ambiguity.
pub fn estimate_phase_two_basis(
    standard: &Transcript,
    rotated: &Transcript,
    opts: &EstimatorOptions,
) -> Result<f64> {
    if standard.basis != Basis::Standard || rotated.basis != Basis::Rotated {
        return Err(Error::Config("expected one standard and one rotated transcript".into()));
    }
    if standard.n != rotated.n {
        return Err(Error::Config("basis runs must share n".into()));
    }
    let c = invert_count_ratio(&tally_single(standard)?, opts.attenuation)?;
    let s = invert_count_ratio(&tally_single(rotated)?, opts.attenuation)?;
    let angle = s.atan2(c).rem_euclid(2.0 * std::f64::consts::PI);
    Ok(angle / standard.n as f64)
}

/// Multi-parameter estimate: for each parameter j, invert the aligned
/// fraction within the E_{j+}/E_{j-} block; range [0, pi/n] per component.
pub fn estimate_multiparam(t: &Transcript) -> Result<Vec<f64>> {
    if t.strategy != Strategy::Multiparam {
        return Err(Error::Unsupported("estimate_multiparam needs a multiparam transcript".into()));
    }
    let reveal = t.reveal.as_ref().ok_or(Error::MissingReveal)?;
    let m = reveal
        .first()
        .map(|(_, signs)| signs.len())
        .ok_or_else(|| Error::NoUsableRounds("empty reveal".into()))?;
    let mut aligned = vec![0u64; m];
    let mut anti = vec![0u64; m];
    for (rec, (_, signs)) in t.rounds.iter().zip(reveal) {
        if let Outcome::Mp { j, plus } = rec.outcome {
            let idx = j as usize - 1;
            if plus == (signs[idx] == Sign::Plus) {
                aligned[idx] += 1;
            } else {
                anti[idx] += 1;
            }
        }
    }
    let n = t.n as f64;
    let mf = m as f64;
    (0..m)
        .map(|j| {
            let total = aligned[j] + anti[j];
            if total == 0 {
                return Err(Error::NoUsableRounds(format!("no outcomes in block {}", j + 1)));
            }
            let q = aligned[j] as f64 / total as f64;
            let c = ((2.0 * q - 1.0) * (mf + 1.0) / (2.0 * mf.sqrt())).clamp(-1.0, 1.0);
            Ok(c.acos() / n)
        })
        .collect()
}

/// Headline result of a Monte Carlo precision experiment.
#[derive(Debug, Clone)]
pub struct PrecisionReport {
    pub strategy: String,
    pub basis: String,
    pub attack: String,
    pub d: usize,
    pub n: u32,
    pub nu: u64,
    pub trials: u64,
    /// Trials that completed without an abort and produced an estimate.
    pub completed: u64,
    pub true_phases: Vec<f64>,
    pub mean_estimate: Vec<f64>,
    /// Root-mean-square error against the true phases, per component.
    pub rmse: Vec<f64>,
    /// Analytic Cramér–Rao bound from the Fisher engine, when the attack
    /// admits a closed outcome model.
    pub crb: Option<Vec<f64>>,
    /// Selected published bound: (claim id, per-component values).
    pub published_bound: Option<(String, Vec<f64>)>,
    pub flags: Vec<String>,
}

/// Repeat run_protocol + estimate over `trials` independent substreams.
pub fn run_experiment(
    cfg: &ProtocolConfig,
    trials: u64,
    exec: Exec,
) -> Result<PrecisionReport> {
    cfg.validate()?;
    if trials < 2 {
        return Err(Error::Config("need at least 2 trials".into()));
    }
    let opts = EstimatorOptions::for_config(cfg);
    let results: Vec<Result<Option<Vec<f64>>>> = indexed_map(trials, exec, |i| {
        let mut c = cfg.clone();
        c.seed = mix(mix(cfg.seed, TAG_TRIAL), i);
        // Trials are the parallel grain; keep each protocol run sequential.
        let t = run_protocol_with_exec(&c, Exec::Sequential)?;
        if t.reveal.is_none() {
            return Ok(None);
        }
        let est = match cfg.strategy {
            Strategy::Multiparam => estimate_multiparam(&t)?,
            _ => vec![estimate_phase(&t, &opts)?],
        };
        Ok(Some(est))
    });

    let mut estimates = Vec::new();
    for r in results {
        if let Some(e) = r? {
            estimates.push(e);
        }
    }
    if estimates.is_empty() {
        return Err(Error::NoUsableRounds("every trial aborted".into()));
    }

    let m = cfg.true_phases.len();
    let completed = estimates.len() as u64;
    let mut mean = vec![0.0; m];
    let mut mse = vec![0.0; m];
    for e in &estimates {
        for j in 0..m {
            mean[j] += e[j];
            mse[j] += (e[j] - cfg.true_phases[j]).powi(2);
        }
    }
    for j in 0..m {
        mean[j] /= completed as f64;
        mse[j] /= completed as f64;
    }
    let rmse: Vec<f64> = mse.iter().map(|v| v.sqrt()).collect();

    let mut flags = Vec::new();
    let crb = analytic_crb(cfg)?;
    let published_bound = oracles::published_bound(cfg);
    if let Some((id, _)) = &published_bound {
        if id == "eq15" {
            flags.push("eq15-scaling-conflict".into());
        }
        if id == "eq22" {
            flags.push("eq22-argument-conflict".into());
        }
    }
    if matches!(cfg.basis, Basis::Rotated) {
        flags.push(format!("rotated-branch={}", opts.branch));
    }
    if near_singular_point(mean[0], cfg.n) && cfg.strategy != Strategy::Multiparam {
        flags.push("near-singular-rerun-rotated".into());
    }

    Ok(PrecisionReport {
        strategy: cfg.strategy.name().into(),
        basis: cfg.basis.name().into(),
        attack: cfg.attack.kind_name().into(),
        d: cfg.d,
        n: cfg.n,
        nu: cfg.nu,
        trials,
        completed,
        true_phases: cfg.true_phases.clone(),
        mean_estimate: mean,
        rmse,
        crb,
        published_bound,
        flags,
    })
}

/// Cramér–Rao bound for the configuration, from the Fisher engine on the
/// conditional outcome model. None when the attack has no closed model.
pub fn analytic_crb(cfg: &ProtocolConfig) -> Result<Option<Vec<f64>>> {
    match cfg.strategy {
        Strategy::Multiparam => {
            let model = oracles::multiparam_model(cfg.d, cfg.true_phases.len(), cfg.n, cfg.mp_coeff);
            let fim = fisher_matrix(model, &cfg.true_phases, DEFAULT_STEP)?;
            Ok(Some(cramer_rao(&FisherInfo::Matrix(fim), cfg.nu)?))
        }
        _ => {
            let Some(model) = oracles::single_param_model(cfg) else {
                return Ok(None);
            };
            let fi = classical_fisher(model, cfg.true_phases[0], DEFAULT_STEP)?;
            if fi <= 0.0 {
                return Ok(None);
            }
            Ok(Some(cramer_rao(&FisherInfo::Scalar(fi), cfg.nu)?))
        }
    }
}

/// Whether an estimate sits close enough to a multiple of pi/n that the
/// standard basis is uninformative and the run should be repeated in the
/// rotated basis.
pub fn near_singular_point(phi_hat: f64, n: u32) -> bool {
    let period = std::f64::consts::PI / n as f64;
    let frac = (phi_hat / period).round() * period;
    (phi_hat - frac).abs() < 0.1 / n as f64
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Two-sided p-value of a 1-degree-of-freedom chi-square test that two
/// counts are 50/50. Bob's countermeasure against the projective attack:
/// when the design predicts a biased E1/E2 split but the observed split is
/// this uniform, the run is suspect.
pub fn chi_square_uniform_p(a: u64, b: u64) -> f64 {
    let total = (a + b) as f64;
    if total == 0.0 {
        return 1.0;
    }
    let expected = total / 2.0;
    let x2 = ((a as f64 - expected).powi(2) + (b as f64 - expected).powi(2)) / expected;
    statrs::function::erf::erfc((x2 / 2.0).sqrt())
}

/// Aligned-vs-anti uniformity p-value after the reveal. The raw E1/E2 split
/// is 50/50 even on a clean run (the random sign bit masks the bias), so the
/// check only works on sign-matched counts: a clean run at cos(n phi) != 0
/// rejects uniformity, while a fully resent run cannot.
pub fn aligned_uniformity_p(t: &Transcript) -> Result<f64> {
    let tally = tally_single(t)?;
    Ok(chi_square_uniform_p(tally.aligned, tally.anti))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AttackSpec;
    use crate::protocol::{run_protocol, Mode};
    use approx::assert_abs_diff_eq;

    fn base(d: usize, n: u32, nu: u64, phi: f64, seed: u64) -> ProtocolConfig {
        ProtocolConfig::single(d, n, nu, phi, AttackSpec::None, seed)
    }

    #[test]
    fn all_aligned_outcomes_give_zero_phase() {
        // phi = 0 makes every outcome aligned, so c = 1 and phi_hat = 0.
        let cfg = base(3, 1, 400, 0.0, 2);
        let t = run_protocol(&cfg).unwrap();
        let tally = tally_single(&t).unwrap();
        assert_eq!(tally.anti, 0);
        assert_eq!(estimate_phase(&t, &EstimatorOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn clean_estimate_converges_to_truth() {
        let phi = 0.9;
        let cfg = base(4, 2, 100_000, phi, 5);
        let t = run_protocol(&cfg).unwrap();
        let est = estimate_phase(&t, &EstimatorOptions::default()).unwrap();
        // CRB at nu = 1e5, n = 2 is ~0.0016; allow 4 sigma.
        assert!((est - phi).abs() < 4.0 * 0.0016, "est = {est}");
    }

    #[test]
    fn two_basis_estimator_resolves_the_upper_branch() {
        // phi in (pi/n, 2 pi/n): arccos alone reflects it; atan2 does not.
        let phi = 4.0;
        let mut cfg = base(4, 1, 60_000, phi, 9);
        let std_t = run_protocol(&cfg).unwrap();
        cfg.basis = Basis::Rotated;
        cfg.seed = 10;
        let rot_t = run_protocol(&cfg).unwrap();
        let est =
            estimate_phase_two_basis(&std_t, &rot_t, &EstimatorOptions::default()).unwrap();
        assert!((est - phi).abs() < 0.02, "est = {est}");
        let folded = estimate_phase(&std_t, &EstimatorOptions::default()).unwrap();
        assert!((folded - (2.0 * std::f64::consts::PI - phi)).abs() < 0.02);
    }

    #[test]
    fn rotated_branch_hint_recovers_phase_near_pi() {
        let n = 2u32;
        let phi = std::f64::consts::PI / n as f64;
        let mut cfg = base(4, n, 100_000, phi, 31);
        cfg.basis = Basis::Rotated;
        let opts = EstimatorOptions::for_config(&cfg);
        assert_eq!(opts.branch, 1);
        let t = run_protocol(&cfg).unwrap();
        let est = estimate_phase(&t, &opts).unwrap();
        assert!((est - phi).abs() < 4.0 / (n as f64 * (cfg.nu as f64).sqrt()));
    }

    #[test]
    fn attenuation_correction_removes_gaussian_bias() {
        let phi = 0.4;
        let delta = 0.8f64;
        let mut cfg = base(4, 3, 200_000, phi, 13);
        cfg.attack = AttackSpec::GaussianPhase { delta };
        let t = run_protocol(&cfg).unwrap();
        let opts = EstimatorOptions::for_config(&cfg);
        assert_abs_diff_eq!(opts.attenuation, (-delta * delta / 2.0).exp(), epsilon = 1e-15);
        let corrected = estimate_phase(&t, &opts).unwrap();
        let naive = estimate_phase(&t, &EstimatorOptions::default()).unwrap();
        assert!((corrected - phi).abs() < 0.01, "corrected = {corrected}");
        assert!((naive - phi).abs() > 0.02, "uncorrected read-off must stay biased");
    }

    #[test]
    fn multiparam_estimates_hit_each_component() {
        let cfg = ProtocolConfig {
            d: 5,
            n: 2,
            nu: 100_000,
            strategy: Strategy::Multiparam,
            true_phases: vec![0.3, 0.5],
            attack: AttackSpec::None,
            basis: Basis::Standard,
            seed: 8,
            mode: Mode::Survey,
            mp_coeff: Default::default(),
            exact_fraction: false,
        };
        let t = run_protocol(&cfg).unwrap();
        let est = estimate_multiparam(&t).unwrap();
        let crb = analytic_crb(&cfg).unwrap().unwrap();
        for j in 0..2 {
            assert!(
                (est[j] - cfg.true_phases[j]).abs() < 4.0 * crb[j],
                "component {j}: est = {}, crb = {}",
                est[j],
                crb[j]
            );
        }
    }

    #[test]
    fn estimation_without_reveal_is_refused() {
        let mut cfg = base(4, 1, 200, 0.3, 6);
        cfg.attack = AttackSpec::ResendRandomPair;
        let t = run_protocol(&cfg).unwrap();
        assert!(matches!(
            estimate_phase(&t, &EstimatorOptions::default()),
            Err(Error::MissingReveal)
        ));
    }

    #[test]
    fn experiment_rmse_tracks_crb_scaling() {
        // RMSE(nu=40000) should be about 1/sqrt(20) of RMSE(nu=2000).
        let mut cfg = base(3, 1, 2_000, 0.7, 42);
        let coarse = run_experiment(&cfg, 40, Exec::Auto).unwrap();
        cfg.nu = 40_000;
        let fine = run_experiment(&cfg, 40, Exec::Auto).unwrap();
        let ratio = fine.rmse[0] / coarse.rmse[0];
        let expected = (2_000f64 / 40_000.0).sqrt();
        assert!(ratio < expected * 1.3, "ratio = {ratio}");
        let crb = fine.crb.as_ref().unwrap()[0];
        assert!((fine.rmse[0] - crb).abs() / crb < 0.3);
    }

    #[test]
    fn experiment_is_deterministic_across_exec_policies() {
        let mut cfg = base(4, 2, 3_000, 0.5, 77);
        cfg.attack = AttackSpec::GaussianPhase { delta: 0.4 };
        let a = run_experiment(&cfg, 16, Exec::Sequential).unwrap();
        let b = run_experiment(&cfg, 16, Exec::Auto).unwrap();
        assert_eq!(a.rmse, b.rmse);
        assert_eq!(a.mean_estimate, b.mean_estimate);
    }

    #[test]
    fn wilson_interval_behaves() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(hi - lo < 0.2);
        let (lo0, _) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo0, 0.0);
    }

    #[test]
    fn uniformity_test_flags_full_projective_attack() {
        // Under fraction-1 projective resend, E1/E2 are 50/50 even though
        // the clean design predicts a strong bias at phi = 0.3, n = 1.
        let mut cfg = base(4, 1, 50_000, 0.3, 3);
        cfg.attack = AttackSpec::ProjectiveResend { fraction: 1.0 };
        let attacked = run_protocol(&cfg).unwrap();
        assert!(aligned_uniformity_p(&attacked).unwrap() > 1e-3);
        cfg.attack = AttackSpec::None;
        let clean = run_protocol(&cfg).unwrap();
        assert!(aligned_uniformity_p(&clean).unwrap() < 1e-3);
    }

    #[test]
    fn singular_point_detector() {
        assert!(near_singular_point(0.02, 1));
        assert!(near_singular_point(std::f64::consts::PI - 0.05, 1));
        assert!(!near_singular_point(1.2, 1));
        assert!(near_singular_point(std::f64::consts::PI / 3.0 + 0.01, 3));
    }
}
