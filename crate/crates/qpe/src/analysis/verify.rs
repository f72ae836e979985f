//! The closed-form verification suite: every published claim is evaluated
//! three ways — independent oracle, Monte Carlo where sampling is
//! meaningful, and the literal formula — and tabulated with an explicit
//! verdict. Claims whose formulas are known to disagree with the oracle are
//! marked `known-mismatch`; a plain `mismatch` is always unexpected.

use std::fmt;

use crate::adversary::{pairwise_povm, AttackSpec};
use crate::analysis::{oracles, run_experiment, tally_single, wilson_interval};
use crate::encoding::{encode_parallel, encode_sequential};
use crate::exec::Exec;
use crate::fisher::{classical_fisher, cramer_rao, fisher_matrix, qfi_pure, FisherInfo, DEFAULT_STEP};
use crate::protocol::{
    build_pair_povm, build_parallel_povm, run_protocol, Basis, MpCoeff, Mode, ProtocolConfig,
};
use crate::qudit::{born_probabilities, make_pair_superposition, Sign};
use crate::rng::mix;
use crate::{Error, Result};

/// Verdict of one comparison row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    /// Unexpected disagreement — a bug somewhere, never acceptable.
    Mismatch,
    /// The formula is undefined/divergent at the chosen point.
    SingularPoint,
    /// The formula is documented to disagree with the oracle; the flag is
    /// the expected outcome.
    KnownMismatch,
}

impl Verdict {
    pub fn is_unexpected(self) -> bool {
        self == Verdict::Mismatch
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::SingularPoint => "singular-point",
            Verdict::KnownMismatch => "known-mismatch",
        })
    }
}

/// One row of the discrepancy table.
#[derive(Debug, Clone)]
pub struct ClaimRow {
    pub formula_id: String,
    pub params: String,
    pub oracle: f64,
    pub empirical: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub paper_value: f64,
    pub verdict: Verdict,
}

/// Scope of a verification run.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub d_min: usize,
    pub d_max: usize,
    pub nu: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { d_min: 3, d_max: 8, nu: 20_000, seed: 17 }
    }
}

/// Valid claim identifiers, in table order.
pub const CLAIM_IDS: &[&str] = &[
    "eq4",
    "eq8",
    "eq10",
    "eq11",
    "eq12",
    "eq13",
    "eq14",
    "eq15",
    "eq16",
    "eq17",
    "eq18",
    "eq19",
    "eq21",
    "eq22",
    "conceal_random_pair",
    "conceal_uniform",
    "conceal_superposition",
];

/// Run the selected claims ("all" or an explicit list) and return the rows.
pub fn verify_closed_forms(
    claims: &[String],
    opts: &VerifyOptions,
    exec: Exec,
) -> Result<Vec<ClaimRow>> {
    if opts.d_min < 3 || opts.d_max < opts.d_min || opts.d_max > 16 {
        return Err(Error::Config(format!(
            "d range must satisfy 3 <= min <= max <= 16, got {}:{}",
            opts.d_min, opts.d_max
        )));
    }
    let selected: Vec<&str> = if claims.is_empty() || claims.iter().any(|c| c == "all") {
        CLAIM_IDS.to_vec()
    } else {
        let mut out = Vec::new();
        for c in claims {
            let id = CLAIM_IDS
                .iter()
                .find(|&&k| k == c.as_str())
                .ok_or_else(|| {
                    Error::Config(format!(
                        "unknown claim id {c:?}; valid ids: {}",
                        CLAIM_IDS.join(", ")
                    ))
                })?;
            out.push(*id);
        }
        out
    };

    let mut rows = Vec::new();
    for id in selected {
        let claim_rows = match id {
            "eq4" => claim_eq4()?,
            "eq8" => claim_eq8()?,
            "eq10" => claim_eq10(opts)?,
            "eq11" => claim_eq11(opts, exec)?,
            "eq12" => claim_eq12()?,
            "eq13" => claim_eq13(opts, exec)?,
            "eq14" => claim_eq14(opts)?,
            "eq15" => claim_eq15(opts)?,
            "eq16" => claim_eq16(opts)?,
            "eq17" => claim_eq17(opts)?,
            "eq18" => claim_eq18(opts)?,
            "eq19" => claim_eq19()?,
            "eq21" => claim_eq21()?,
            "eq22" => claim_eq22(opts)?,
            "conceal_random_pair" => {
                claim_concealment(opts, AttackSpec::ResendRandomPair, "conceal_random_pair")?
            }
            "conceal_uniform" => {
                claim_concealment(opts, AttackSpec::ResendUniform, "conceal_uniform")?
            }
            "conceal_superposition" => claim_concealment(
                opts,
                AttackSpec::SuperpositionResend,
                "conceal_superposition",
            )?,
            other => unreachable!("unhandled claim {other}"),
        };
        rows.extend(claim_rows);
    }
    Ok(rows)
}

/// True when the table contains a verdict that should fail the run.
pub fn has_unexpected_mismatch(rows: &[ClaimRow]) -> bool {
    rows.iter().any(|r| r.verdict.is_unexpected())
}

/// Deterministic oracle-vs-formula verdict at a relative tolerance, with
/// absolute floor for near-zero values.
fn verdict_rel(oracle: f64, published: f64, rel_tol: f64, known: bool) -> Verdict {
    if !oracle.is_finite() || !published.is_finite() {
        return Verdict::SingularPoint;
    }
    let scale = oracle.abs().max(published.abs()).max(1e-12);
    if (oracle - published).abs() <= rel_tol * scale {
        Verdict::Match
    } else if known {
        Verdict::KnownMismatch
    } else {
        Verdict::Mismatch
    }
}

/// Downgrade the verdict to Mismatch when a Monte Carlo estimate fails to
/// corroborate the oracle within its sampling error.
fn check_empirical(verdict: Verdict, empirical: f64, oracle: f64, sigma: f64) -> Verdict {
    if (empirical - oracle).abs() > 4.0 * sigma.max(1e-12) {
        Verdict::Mismatch
    } else {
        verdict
    }
}

fn encoded_plus(d: usize, n: u32) -> impl Fn(f64) -> crate::qudit::StateVector {
    move |phi: f64| {
        let s = make_pair_superposition(d, 1, 2, Sign::Plus).expect("valid pair");
        encode_sequential(&s, phi, n, (1, 2)).expect("valid encoding")
    }
}

fn claim_eq4() -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();
    for n in [1u32, 2, 4, 8] {
        let qfi = qfi_pure(encoded_plus(3, n), 0.7, DEFAULT_STEP)?;
        let published = (n as f64).powi(2);
        rows.push(ClaimRow {
            formula_id: "eq4".into(),
            params: format!("n={n};phi=0.7"),
            oracle: qfi,
            empirical: None,
            ci: None,
            paper_value: published,
            verdict: verdict_rel(qfi, published, 1e-5, false),
        });
    }
    Ok(rows)
}

fn claim_eq8() -> Result<Vec<ClaimRow>> {
    let nu = 10_000u64;
    let mut rows = Vec::new();
    for n in [1u32, 4] {
        let crb = cramer_rao(&FisherInfo::Scalar((n as f64).powi(2)), nu)?[0];
        let published = oracles::published_bound_clean(n, nu);
        rows.push(ClaimRow {
            formula_id: "eq8".into(),
            params: format!("n={n};nu={nu}"),
            oracle: crb,
            empirical: None,
            ci: None,
            paper_value: published,
            verdict: verdict_rel(crb, published, 1e-12, false),
        });
    }
    Ok(rows)
}

fn claim_eq10(opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    let (n, phi, delta) = (3u32, 0.4, 0.8);
    let oracle = oracles::gaussian_marginal_p(n, phi, delta);
    let published = oracles::published_prob_gaussian(n, phi, delta);
    let mut cfg = ProtocolConfig::single(4, n, opts.nu, phi, AttackSpec::GaussianPhase { delta }, mix(opts.seed, 10));
    cfg.mode = Mode::Survey;
    let t = run_protocol(&cfg)?;
    let tally = tally_single(&t)?;
    let emp = tally.aligned as f64 / tally.usable() as f64;
    let ci = wilson_interval(tally.aligned, tally.usable(), 1.96);
    let sigma = (oracle * (1.0 - oracle) / tally.usable() as f64).sqrt();
    let verdict = check_empirical(verdict_rel(oracle, published, 1e-9, false), emp, oracle, sigma);
    Ok(vec![ClaimRow {
        formula_id: "eq10".into(),
        params: format!("d=4;n={n};phi={phi};delta={delta};nu={}", opts.nu),
        oracle,
        empirical: Some(emp),
        ci: Some(ci),
        paper_value: published,
        verdict,
    }])
}

fn claim_eq11(opts: &VerifyOptions, exec: Exec) -> Result<Vec<ClaimRow>> {
    let (n, phi, delta) = (3u32, 0.4, 0.8);
    let mut cfg = ProtocolConfig::single(4, n, opts.nu, phi, AttackSpec::GaussianPhase { delta }, mix(opts.seed, 11));
    let model = oracles::single_param_model(&cfg).expect("gaussian model exists");
    let fi = classical_fisher(model, phi, DEFAULT_STEP)?;
    let oracle = cramer_rao(&FisherInfo::Scalar(fi), opts.nu)?[0];
    let published = oracles::published_bound_gaussian_standard(n, opts.nu, phi, delta);

    let trials = 32;
    cfg.mode = Mode::Survey;
    let report = run_experiment(&cfg, trials, exec)?;
    let emp = report.rmse[0];
    // RMSE of a near-Gaussian estimator has relative sd ~ 1/sqrt(2 trials).
    let rel_sd = 1.0 / (2.0 * trials as f64).sqrt();
    let ci = (emp * (1.0 - 1.96 * rel_sd), emp * (1.0 + 1.96 * rel_sd));
    let verdict =
        check_empirical(verdict_rel(oracle, published, 1e-6, false), emp, oracle, oracle * rel_sd);
    let mut rows = vec![ClaimRow {
        formula_id: "eq11".into(),
        params: format!("n={n};phi={phi};delta={delta};nu={}", opts.nu),
        oracle,
        empirical: Some(emp),
        ci: Some(ci),
        paper_value: published,
        verdict,
    }];

    // At n phi = pi the bound diverges: singular point, no estimate there.
    let singular_phi = std::f64::consts::PI / n as f64;
    rows.push(ClaimRow {
        formula_id: "eq11".into(),
        params: format!("n={n};phi=pi/{n};delta={delta};nu={}", opts.nu),
        oracle: f64::INFINITY,
        empirical: None,
        ci: None,
        paper_value: oracles::published_bound_gaussian_standard(n, opts.nu, singular_phi, delta),
        verdict: Verdict::SingularPoint,
    });
    Ok(rows)
}

fn claim_eq12() -> Result<Vec<ClaimRow>> {
    let n = 2u32;
    let povm = build_pair_povm(4, 1, 2, Basis::Rotated)?;
    let enc = encoded_plus(4, n);
    let mut max_dev = 0.0f64;
    for i in 0..64 {
        let phi = i as f64 * 2.0 * std::f64::consts::PI / (n as f64 * 64.0);
        let p = born_probabilities(&enc(phi), &povm)?;
        let expect = (1.0 + (n as f64 * phi).sin()) / 2.0;
        max_dev = max_dev.max((p[0] - expect).abs());
    }
    Ok(vec![ClaimRow {
        formula_id: "eq12".into(),
        params: format!("n={n};grid=64"),
        oracle: max_dev,
        empirical: None,
        ci: None,
        paper_value: 0.0,
        verdict: if max_dev < 1e-12 { Verdict::Match } else { Verdict::Mismatch },
    }])
}

fn claim_eq13(opts: &VerifyOptions, exec: Exec) -> Result<Vec<ClaimRow>> {
    let (n, delta) = (2u32, 0.8);
    let phi = std::f64::consts::PI / n as f64;
    let mut cfg = ProtocolConfig::single(4, n, opts.nu, phi, AttackSpec::GaussianPhase { delta }, mix(opts.seed, 13));
    cfg.basis = Basis::Rotated;

    // FI-based bound at the singular point of the standard basis.
    let model = oracles::single_param_model(&cfg).expect("gaussian model exists");
    let fi = classical_fisher(model, phi, DEFAULT_STEP)?;
    let fi_bound = cramer_rao(&FisherInfo::Scalar(fi), opts.nu)?[0];
    let published = oracles::published_bound_gaussian_rotated(n, opts.nu, delta);
    let mut rows = vec![ClaimRow {
        formula_id: "eq13".into(),
        params: format!("n={n};phi=pi/{n};delta={delta};nu={};bound=fisher", opts.nu),
        oracle: fi_bound,
        empirical: None,
        ci: None,
        paper_value: published,
        verdict: verdict_rel(fi_bound, published, 0.05, true),
    }];

    // The uncorrected read-off phi_hat = (pi - asin(s))/n has RMSE
    // 1/(n sqrt(nu)) at this point, which does land near the published
    // value; that is the realizable-precision comparison.
    let trials = 32;
    let report = run_experiment(&cfg, trials, exec)?;
    let emp = report.rmse[0];
    let naive_rmse = 1.0 / (n as f64 * (opts.nu as f64).sqrt());
    let rel_sd = 1.0 / (2.0 * trials as f64).sqrt();
    let verdict = check_empirical(
        verdict_rel(naive_rmse, published, 0.2, true),
        emp,
        naive_rmse,
        naive_rmse * rel_sd,
    );
    rows.push(ClaimRow {
        formula_id: "eq13".into(),
        params: format!("n={n};phi=pi/{n};delta={delta};nu={};bound=rmse", opts.nu),
        oracle: naive_rmse,
        empirical: Some(emp),
        ci: Some((emp * (1.0 - 1.96 * rel_sd), emp * (1.0 + 1.96 * rel_sd))),
        paper_value: published,
        verdict,
    });
    Ok(rows)
}

fn claim_eq14(opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    let (n, phi) = (1u32, 0.3);
    let mut cfg = ProtocolConfig::single(
        4,
        n,
        opts.nu,
        phi,
        AttackSpec::ProjectiveResend { fraction: 1.0 },
        mix(opts.seed, 14),
    );
    cfg.mode = Mode::Survey;
    let model = oracles::single_param_model(&cfg).expect("projective model exists");
    let fi = classical_fisher(model, phi, DEFAULT_STEP)?;
    let t = run_protocol(&cfg)?;
    let tally = tally_single(&t)?;
    let emp = tally.aligned as f64 / tally.usable() as f64;
    let ci = wilson_interval(tally.aligned, tally.usable(), 1.96);
    let sigma = (0.25 / tally.usable() as f64).sqrt();
    let uniform_verdict = check_empirical(Verdict::Match, emp, 0.5, sigma);
    Ok(vec![
        ClaimRow {
            formula_id: "eq14".into(),
            params: format!("d=4;n={n};phi={phi};fraction=1;stat=fisher"),
            oracle: fi,
            empirical: None,
            ci: None,
            paper_value: 0.0,
            verdict: if fi.abs() < 1e-8 { Verdict::Match } else { Verdict::Mismatch },
        },
        ClaimRow {
            formula_id: "eq14".into(),
            params: format!("d=4;n={n};phi={phi};fraction=1;stat=p_aligned"),
            oracle: 0.5,
            empirical: Some(emp),
            ci: Some(ci),
            paper_value: 0.5,
            verdict: uniform_verdict,
        },
    ])
}

fn claim_eq15(opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    let (n, phi, fraction) = (2u32, 0.7, 0.2);
    let cfg = ProtocolConfig::single(
        4,
        n,
        opts.nu,
        phi,
        AttackSpec::ProjectiveResend { fraction },
        mix(opts.seed, 15),
    );
    let model = oracles::single_param_model(&cfg).expect("projective model exists");
    let fi = classical_fisher(model, phi, DEFAULT_STEP)?;
    let oracle = cramer_rao(&FisherInfo::Scalar(fi), opts.nu)?[0];
    let published = oracles::published_bound_partial_projective(
        n,
        opts.nu,
        phi,
        fraction * opts.nu as f64,
    );
    Ok(vec![ClaimRow {
        formula_id: "eq15".into(),
        params: format!("n={n};phi={phi};fraction={fraction};nu={}", opts.nu),
        oracle,
        empirical: None,
        ci: None,
        paper_value: published,
        verdict: verdict_rel(oracle, published, 0.05, true),
    }])
}

fn claim_eq16(opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();
    for d in opts.d_min..=opts.d_max {
        let povm = pairwise_povm(d)?;
        let mut sum = nalgebra::DMatrix::<num_complex::Complex64>::zeros(d, d);
        for e in povm.elements() {
            sum += e.matrix();
        }
        let mut dev = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let expect = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((sum[(r, c)] - num_complex::Complex64::new(expect, 0.0)).norm());
            }
        }
        rows.push(ClaimRow {
            formula_id: "eq16".into(),
            params: format!("d={d}"),
            oracle: dev,
            empirical: None,
            ci: None,
            paper_value: 0.0,
            verdict: if dev < 1e-10 { Verdict::Match } else { Verdict::Mismatch },
        });
    }
    Ok(rows)
}

fn claim_eq17(opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    let (n, phi) = (1u32, 0.9);
    let mut rows = Vec::new();
    for d in [3usize, 5, 8] {
        if d < opts.d_min || d > opts.d_max {
            continue;
        }
        let oracle = oracles::pairwise_concealment_oracle(d, n, phi)?;
        let published = oracles::published_concealment_pairwise(d);
        let mut cfg = ProtocolConfig::single(
            d,
            n,
            opts.nu,
            phi,
            AttackSpec::PairwisePovmResend { fraction: 1.0 },
            mix(opts.seed, 17 + d as u64),
        );
        cfg.mode = Mode::Survey;
        let (ok, total) = oracles::empirical_nonabort(&cfg)?;
        let emp = ok as f64 / total as f64;
        let ci = wilson_interval(ok, total, 1.96);
        let sigma = (oracle * (1.0 - oracle) / total as f64).sqrt();
        let verdict = check_empirical(verdict_rel(oracle, published, 1e-9, true), emp, oracle, sigma);
        rows.push(ClaimRow {
            formula_id: "eq17".into(),
            params: format!("d={d};n={n};phi={phi};nu={}", opts.nu),
            oracle,
            empirical: Some(emp),
            ci: Some(ci),
            paper_value: published,
            verdict,
        });
    }
    Ok(rows)
}

fn claim_eq18(opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    let (n, phi) = (1u32, 0.8);
    let mut rows = Vec::new();
    for d in [3usize, 5, 8] {
        if d < opts.d_min || d > opts.d_max {
            continue;
        }
        let fi = oracles::eve_pairwise_fi_oracle(d, n, phi)?;
        let oracle = cramer_rao(&FisherInfo::Scalar(fi), opts.nu)?[0];
        let published = oracles::published_bound_eve_pairwise(d, n, opts.nu, phi);
        rows.push(ClaimRow {
            formula_id: "eq18".into(),
            params: format!("d={d};n={n};phi={phi};nu={}", opts.nu),
            oracle,
            empirical: None,
            ci: None,
            paper_value: published,
            verdict: verdict_rel(oracle, published, 0.05, true),
        });
    }
    Ok(rows)
}

fn claim_eq19() -> Result<Vec<ClaimRow>> {
    let mut max_dev = 0.0f64;
    for n in 1..=8u32 {
        let seq_povm = build_pair_povm(3, 1, 2, Basis::Standard)?;
        let par_povm = build_parallel_povm(Basis::Standard)?;
        for i in 0..64 {
            let phi = i as f64 * 2.0 * std::f64::consts::PI / 64.0;
            for sign in [Sign::Plus, Sign::Minus] {
                let s = make_pair_superposition(3, 1, 2, sign)?;
                let seq = encode_sequential(&s, phi, n, (1, 2))?;
                let p_seq = born_probabilities(&seq, &seq_povm)?;
                let par = encode_parallel(n, phi, (1, 2), sign)?;
                let p_par = born_probabilities(&par.as_state_vector(), &par_povm)?;
                for o in 0..3 {
                    max_dev = max_dev.max((p_seq[o] - p_par[o]).abs());
                }
            }
        }
    }
    Ok(vec![ClaimRow {
        formula_id: "eq19".into(),
        params: "n=1..8;grid=64".into(),
        oracle: max_dev,
        empirical: None,
        ci: None,
        paper_value: 0.0,
        verdict: if max_dev < 1e-12 { Verdict::Match } else { Verdict::Mismatch },
    }])
}

fn claim_eq21() -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();
    for m in [2usize, 3] {
        let d = m + 2;
        let n = 1u32;
        let model = oracles::multiparam_model(d, m, n, MpCoeff::InvSqrtM);
        let p = model(&vec![0.0; m]);
        let published = oracles::published_prob_multiparam(m, n, 0.0, true);
        rows.push(ClaimRow {
            formula_id: "eq21".into(),
            params: format!("m={m};d={d};n={n};phi=0"),
            oracle: p[0],
            empirical: None,
            ci: None,
            paper_value: published,
            verdict: verdict_rel(p[0], published, 1e-9, false),
        });
    }
    // Away from zero the published cos(2 n phi_j) argument departs from the
    // Born rule; the deviation itself is the reported quantity.
    let m = 2usize;
    let model = oracles::multiparam_model(m + 2, m, 1, MpCoeff::InvSqrtM);
    let mut max_dev = 0.0f64;
    for i in 1..32 {
        let phi = i as f64 * std::f64::consts::PI / 32.0;
        let p = model(&[phi, 0.2]);
        let published = oracles::published_prob_multiparam(m, 1, phi, true);
        max_dev = max_dev.max((p[0] - published).abs());
    }
    rows.push(ClaimRow {
        formula_id: "eq21".into(),
        params: format!("m={m};d={};n=1;phi=grid32", m + 2),
        oracle: max_dev,
        empirical: None,
        ci: None,
        paper_value: 0.0,
        verdict: if max_dev > 1e-3 { Verdict::KnownMismatch } else { Verdict::Mismatch },
    });
    Ok(rows)
}

fn claim_eq22(opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    let (m, n) = (2usize, 2u32);
    let phases = [0.3f64, 0.5];
    let model = oracles::multiparam_model(m + 2, m, n, MpCoeff::InvSqrtM);
    let fim = fisher_matrix(|x| model(x), &phases, DEFAULT_STEP)?;
    let crb = cramer_rao(&FisherInfo::Matrix(fim), opts.nu)?;
    let mut rows = Vec::new();
    for j in 0..m {
        let published = oracles::published_bound_multiparam(m, n, opts.nu, phases[j]);
        rows.push(ClaimRow {
            formula_id: "eq22".into(),
            params: format!("m={m};n={n};j={};phi={};nu={}", j + 1, phases[j], opts.nu),
            oracle: crb[j],
            empirical: None,
            ci: None,
            paper_value: published,
            verdict: verdict_rel(crb[j], published, 0.05, true),
        });
    }
    Ok(rows)
}

fn claim_concealment(
    opts: &VerifyOptions,
    attack: AttackSpec,
    id: &str,
) -> Result<Vec<ClaimRow>> {
    let (n, phi) = (1u32, 0.3);
    let mut rows = Vec::new();
    for d in opts.d_min..=opts.d_max {
        let oracle = oracles::nonabort_oracle(&attack, d, n, phi)?;
        let published = match attack {
            AttackSpec::SuperpositionResend => oracles::published_concealment_superposition(d),
            _ => oracles::published_concealment_random_pair(d),
        };
        let known = matches!(attack, AttackSpec::SuperpositionResend);
        let mut cfg = ProtocolConfig::single(
            d,
            n,
            opts.nu,
            phi,
            attack,
            mix(opts.seed, 100 + d as u64),
        );
        cfg.mode = Mode::Survey;
        let (ok, total) = oracles::empirical_nonabort(&cfg)?;
        let emp = ok as f64 / total as f64;
        let ci = wilson_interval(ok, total, 1.96);
        let sigma = (oracle * (1.0 - oracle) / total as f64).sqrt();
        let verdict = check_empirical(verdict_rel(oracle, published, 1e-9, known), emp, oracle, sigma);
        rows.push(ClaimRow {
            formula_id: id.into(),
            params: format!("d={d};n={n};phi={phi};nu={}", opts.nu),
            oracle,
            empirical: Some(emp),
            ci: Some(ci),
            paper_value: published,
            verdict,
        });
    }
    Ok(rows)
}
