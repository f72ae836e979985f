//! The six-step estimation protocols as an explicit Alice/Bob state machine:
//! random preparation, encoding, announced POVM measurement, abort on the
//! out-of-subspace outcome, and the deferred state reveal that gates
//! estimation.
//!
//! Rounds are independent given per-round random substreams, so survey-mode
//! execution may run rounds concurrently and still produce a transcript
//! identical to sequential execution.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::adversary::{attack, AttackSpec, EveRecord, Probe};
use crate::encoding::{encode_multiparam, encode_parallel, encode_sequential, Strategy};
use crate::exec::{indexed_map, Exec};
use crate::qudit::{
    make_pair_superposition, sample_outcome, Povm, PovmElement, Sign,
};
use crate::rng::{substream, TAG_ALICE, TAG_BOB, TAG_EVE};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;

/// Measurement basis for the single-parameter protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Elements built from (|j> +/- |k>)/sqrt(2).
    Standard,
    /// Elements built from (e^{-i pi/4}|j> +/- e^{i pi/4}|k>)/sqrt(2); used
    /// to re-run the protocol near the singular points of the standard basis.
    Rotated,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Standard => "standard",
            Basis::Rotated => "rotated",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Basis::Standard),
            "rotated" => Ok(Basis::Rotated),
            other => Err(Error::Config(format!("unknown basis {other:?}"))),
        }
    }
}

/// Strict aborts at the first out-of-subspace outcome; survey runs all nu
/// rounds and tallies aborts (needed to measure concealment statistics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Survey,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Strict => "strict",
            Mode::Survey => "survey",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "survey" => Ok(Mode::Survey),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Coefficient on |k0> in the multi-parameter POVM vectors.
///
/// `InvSqrtM` keeps the POVM complete for every n; `InvSqrtN` is the literal
/// published variant, valid only when n >= m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpCoeff {
    #[default]
    InvSqrtM,
    InvSqrtN,
}

impl MpCoeff {
    pub fn name(self) -> &'static str {
        match self {
            MpCoeff::InvSqrtM => "inv_sqrt_m",
            MpCoeff::InvSqrtN => "inv_sqrt_n",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "inv_sqrt_m" => Ok(MpCoeff::InvSqrtM),
            "inv_sqrt_n" => Ok(MpCoeff::InvSqrtN),
            other => Err(Error::Config(format!("unknown mp_coeff {other:?}"))),
        }
    }
}

/// Full run configuration.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub d: usize,
    pub n: u32,
    pub nu: u64,
    pub strategy: Strategy,
    pub true_phases: Vec<f64>,
    pub attack: AttackSpec,
    pub basis: Basis,
    pub seed: u64,
    pub mode: Mode,
    pub mp_coeff: MpCoeff,
    /// When true, a `fraction` attack measures exactly round(fraction * nu)
    /// rounds instead of an independent per-round coin.
    pub exact_fraction: bool,
}

impl ProtocolConfig {
    pub fn single(d: usize, n: u32, nu: u64, phi: f64, attack: AttackSpec, seed: u64) -> Self {
        Self {
            d,
            n,
            nu,
            strategy: Strategy::Sequential,
            true_phases: vec![phi],
            attack,
            basis: Basis::Standard,
            seed,
            mode: Mode::Survey,
            mp_coeff: MpCoeff::default(),
            exact_fraction: false,
        }
    }

    pub fn m(&self) -> usize {
        match self.strategy {
            Strategy::Multiparam => self.true_phases.len(),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return Err(Error::Config(format!("d must be >= 3, got {}", self.d)));
        }
        if self.n < 1 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        self.attack.validate()?;
        match self.strategy {
            Strategy::Sequential | Strategy::Parallel => {
                if self.true_phases.len() != 1 {
                    return Err(Error::Config(format!(
                        "single-parameter strategy needs exactly one phase, got {}",
                        self.true_phases.len()
                    )));
                }
                if self.strategy == Strategy::Parallel && self.attack.is_resend() {
                    return Err(Error::Unsupported(
                        "resend attacks are modelled only for the sequential strategy".into(),
                    ));
                }
            }
            Strategy::Multiparam => {
                let m = self.true_phases.len();
                if m < 1 {
                    return Err(Error::Config("multiparam needs at least one phase".into()));
                }
                if self.d <= m + 1 {
                    return Err(Error::Config(format!(
                        "multiparam requires d > m + 1, got d = {}, m = {m}",
                        self.d
                    )));
                }
                if self.basis == Basis::Rotated {
                    return Err(Error::Unsupported(
                        "rotated basis applies to the single-parameter protocols".into(),
                    ));
                }
                if self.mp_coeff == MpCoeff::InvSqrtN && (self.n as usize) < m {
                    return Err(Error::Config(format!(
                        "inv_sqrt_n POVM is positive only for n >= m (n = {}, m = {m})",
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Bob's measurement outcome labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    E1,
    E2,
    /// Out-of-subspace outcome of the single-parameter POVM; aborts.
    E3,
    /// Multi-parameter element E_{j +/-} (j is 1-based).
    Mp { j: u8, plus: bool },
    /// Completing multi-parameter element; aborts.
    MpRest,
}

impl Outcome {
    pub fn is_abort(self) -> bool {
        matches!(self, Outcome::E3 | Outcome::MpRest)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::E1 => write!(f, "E1"),
            Outcome::E2 => write!(f, "E2"),
            Outcome::E3 => write!(f, "E3"),
            Outcome::Mp { j, plus } => write!(f, "E{j}{}", if *plus { '+' } else { '-' }),
            Outcome::MpRest => write!(f, "ER"),
        }
    }
}

impl Outcome {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "E1" => return Ok(Outcome::E1),
            "E2" => return Ok(Outcome::E2),
            "E3" => return Ok(Outcome::E3),
            "ER" => return Ok(Outcome::MpRest),
            _ => {}
        }
        let body = s
            .strip_prefix('E')
            .ok_or_else(|| Error::Config(format!("bad outcome label {s:?}")))?;
        let plus = body.ends_with('+');
        let j: u8 = body[..body.len() - 1]
            .parse()
            .map_err(|_| Error::Config(format!("bad outcome label {s:?}")))?;
        Ok(Outcome::Mp { j, plus })
    }
}

/// One protocol round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    /// Prepared levels: (j, k) for single-parameter, (k0..km) for
    /// multi-parameter.
    pub levels: Vec<usize>,
    /// Branch signs: one for single-parameter, m for multi-parameter.
    pub signs: Vec<Sign>,
    pub eve: EveRecord,
    pub outcome: Outcome,
    pub abort: bool,
}

/// The classical channel, as typed messages.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalMessage {
    EncodedStateSent { round: u64 },
    ReceiptAck { round: u64 },
    PovmAnnouncement { round: u64, descriptor: String },
    OutcomeReport { round: u64, label: String },
    Abort { round: u64 },
    FinalReveal { prepared: Vec<(Vec<usize>, Vec<Sign>)> },
}

/// Full run record. `reveal` is present only when every executed round
/// completed without an abort; estimation is impossible without it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub d: usize,
    pub n: u32,
    pub nu: u64,
    pub strategy: Strategy,
    pub basis: Basis,
    pub mode: Mode,
    pub seed: u64,
    pub attack_kind: String,
    pub rounds: Vec<RoundRecord>,
    pub reveal: Option<Vec<(Vec<usize>, Vec<Sign>)>>,
}

impl Transcript {
    pub fn aborts(&self) -> u64 {
        self.rounds.iter().filter(|r| r.abort).count() as u64
    }

    pub fn aborted(&self) -> bool {
        self.rounds.iter().any(|r| r.abort)
    }

    /// Canonical classical-message sequence for the executed rounds.
    pub fn messages(&self) -> Vec<ClassicalMessage> {
        let mut out = Vec::new();
        for r in &self.rounds {
            out.push(ClassicalMessage::EncodedStateSent { round: r.round });
            out.push(ClassicalMessage::ReceiptAck { round: r.round });
            out.push(ClassicalMessage::PovmAnnouncement {
                round: r.round,
                descriptor: format!("{}:{}", self.basis.name(), levels_str(&r.levels)),
            });
            out.push(ClassicalMessage::OutcomeReport {
                round: r.round,
                label: r.outcome.to_string(),
            });
            if r.abort {
                out.push(ClassicalMessage::Abort { round: r.round });
            }
        }
        if let Some(reveal) = &self.reveal {
            out.push(ClassicalMessage::FinalReveal { prepared: reveal.clone() });
        }
        out
    }
}

fn levels_str(levels: &[usize]) -> String {
    levels
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn signs_str(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.symbol().to_string()).collect::<Vec<_>>().join(";")
}

/// The announced single-parameter POVM {E1, E2, E3} on pair (j, k).
pub fn build_pair_povm(d: usize, j: usize, k: usize, basis: Basis) -> Result<Povm> {
    if j < 1 || k < 1 || j >= k || k > d {
        return Err(Error::InvalidLevels(format!("bad pair ({j}, {k}) for d = {d}")));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (wj, wk) = match basis {
        Basis::Standard => (Complex64::new(r, 0.0), Complex64::new(r, 0.0)),
        Basis::Rotated => (
            Complex64::from_polar(r, -std::f64::consts::FRAC_PI_4),
            Complex64::from_polar(r, std::f64::consts::FRAC_PI_4),
        ),
    };
    let mut v1 = vec![Complex64::ZERO; d];
    v1[j - 1] = wj;
    v1[k - 1] = wk;
    let mut v2 = vec![Complex64::ZERO; d];
    v2[j - 1] = wj;
    v2[k - 1] = -wk;
    let e1 = PovmElement::rank_one(&v1, "E1")?;
    let e2 = PovmElement::rank_one(&v2, "E2")?;
    let e3 = Povm::completion_element(&[e1.clone(), e2.clone()], d, "E3")?;
    Povm::new(vec![e1, e2, e3])
}

/// The parallel-strategy POVM on the two-branch effective subspace.
pub fn build_parallel_povm(basis: Basis) -> Result<Povm> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (wj, wk) = match basis {
        Basis::Standard => (Complex64::new(r, 0.0), Complex64::new(r, 0.0)),
        Basis::Rotated => (
            Complex64::from_polar(r, -std::f64::consts::FRAC_PI_4),
            Complex64::from_polar(r, std::f64::consts::FRAC_PI_4),
        ),
    };
    let e1 = PovmElement::rank_one(&[wj, wk], "E1")?;
    let e2 = PovmElement::rank_one(&[wj, -wk], "E2")?;
    let e3 = Povm::completion_element(&[e1.clone(), e2.clone()], 2, "E3")?;
    Povm::new(vec![e1, e2, e3])
}

/// Multi-parameter POVM: for each parameter j, rank-1 elements on
/// (c |k0> +/- |k_j>)/sqrt(2), plus the completing element.
pub fn build_multiparam_povm(
    d: usize,
    levels: &[usize],
    n: u32,
    coeff: MpCoeff,
) -> Result<Povm> {
    let m = levels.len().checked_sub(1).filter(|&m| m >= 1).ok_or_else(|| {
        Error::InvalidLevels("multiparam POVM needs at least two levels".into())
    })?;
    let c = match coeff {
        MpCoeff::InvSqrtM => 1.0 / (m as f64).sqrt(),
        MpCoeff::InvSqrtN => 1.0 / (n as f64).sqrt(),
    };
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = Vec::with_capacity(2 * m + 1);
    for j in 1..=m {
        for plus in [true, false] {
            let mut v = vec![Complex64::ZERO; d];
            v[levels[0] - 1] = Complex64::new(c * r, 0.0);
            v[levels[j] - 1] = Complex64::new(if plus { r } else { -r }, 0.0);
            elements.push(PovmElement::rank_one(
                &v,
                format!("E{j}{}", if plus { '+' } else { '-' }),
            )?);
        }
    }
    elements.push(Povm::completion_element(&elements, d, "ER")?);
    Povm::new(elements)
}

/// Dispatch on strategy/basis.
pub fn build_bob_povm(
    strategy: Strategy,
    basis: Basis,
    d: usize,
    levels: &[usize],
    n: u32,
    coeff: MpCoeff,
) -> Result<Povm> {
    match strategy {
        Strategy::Sequential => build_pair_povm(d, levels[0], levels[1], basis),
        Strategy::Parallel => build_parallel_povm(basis),
        Strategy::Multiparam => build_multiparam_povm(d, levels, n, coeff),
    }
}

fn alice_draw(cfg: &ProtocolConfig, rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<usize>, Vec<Sign>) {
    match cfg.strategy {
        Strategy::Sequential | Strategy::Parallel => {
            let (j, k) = crate::adversary::random_pair(cfg.d, rng);
            let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
            (vec![j, k], vec![sign])
        }
        Strategy::Multiparam => {
            let m = cfg.m();
            let mut all: Vec<usize> = (1..=cfg.d).collect();
            all.shuffle(rng);
            let levels = all[..m + 1].to_vec();
            let signs = (0..m)
                .map(|_| if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus })
                .collect();
            (levels, signs)
        }
    }
}

fn prepare_and_encode(
    cfg: &ProtocolConfig,
    levels: &[usize],
    signs: &[Sign],
) -> Result<Probe> {
    match cfg.strategy {
        Strategy::Sequential => {
            let (j, k) = (levels[0], levels[1]);
            let prepared = make_pair_superposition(cfg.d, j, k, signs[0])?;
            Ok(Probe::Full(encode_sequential(&prepared, cfg.true_phases[0], cfg.n, (j, k))?))
        }
        Strategy::Parallel => Ok(Probe::Effective(encode_parallel(
            cfg.n,
            cfg.true_phases[0],
            (levels[0], levels[1]),
            signs[0],
        )?)),
        Strategy::Multiparam => Ok(Probe::Full(encode_multiparam(
            cfg.d,
            levels,
            signs,
            &cfg.true_phases,
            cfg.n,
        )?)),
    }
}

struct PovmCache {
    pairs: HashMap<(usize, usize), Povm>,
    parallel: Option<Povm>,
}

impl PovmCache {
    fn build(cfg: &ProtocolConfig) -> Result<Self> {
        let mut pairs = HashMap::new();
        let mut parallel = None;
        match cfg.strategy {
            Strategy::Sequential => {
                for j in 1..cfg.d {
                    for k in (j + 1)..=cfg.d {
                        pairs.insert((j, k), build_pair_povm(cfg.d, j, k, cfg.basis)?);
                    }
                }
            }
            Strategy::Parallel => parallel = Some(build_parallel_povm(cfg.basis)?),
            Strategy::Multiparam => {}
        }
        Ok(Self { pairs, parallel })
    }
}

fn outcome_from_index(strategy: Strategy, index: usize, n_elements: usize) -> Outcome {
    match strategy {
        Strategy::Sequential | Strategy::Parallel => match index {
            0 => Outcome::E1,
            1 => Outcome::E2,
            _ => Outcome::E3,
        },
        Strategy::Multiparam => {
            if index + 1 == n_elements {
                Outcome::MpRest
            } else {
                Outcome::Mp { j: (index / 2 + 1) as u8, plus: index % 2 == 0 }
            }
        }
    }
}

/// Rounds where a `fraction` attack acts, when exact-count mode is on.
fn exact_fraction_rounds(cfg: &ProtocolConfig) -> Option<Vec<bool>> {
    if !cfg.exact_fraction {
        return None;
    }
    let fraction = match cfg.attack {
        AttackSpec::ProjectiveResend { fraction }
        | AttackSpec::PairwisePovmResend { fraction } => fraction,
        _ => return None,
    };
    let count = (fraction * cfg.nu as f64).round() as u64;
    let mut idx: Vec<u64> = (0..cfg.nu).collect();
    let mut rng = substream(cfg.seed, TAG_EVE, u64::MAX);
    idx.shuffle(&mut rng);
    let mut mask = vec![false; cfg.nu as usize];
    for &i in idx.iter().take(count as usize) {
        mask[i as usize] = true;
    }
    Some(mask)
}

fn effective_attack(cfg: &ProtocolConfig, mask: Option<&Vec<bool>>, round: u64) -> AttackSpec {
    let Some(mask) = mask else { return cfg.attack };
    let act = mask[round as usize];
    match cfg.attack {
        AttackSpec::ProjectiveResend { .. } => {
            AttackSpec::ProjectiveResend { fraction: if act { 1.0 } else { 0.0 } }
        }
        AttackSpec::PairwisePovmResend { .. } => {
            AttackSpec::PairwisePovmResend { fraction: if act { 1.0 } else { 0.0 } }
        }
        other => other,
    }
}

fn run_round_inner(
    cfg: &ProtocolConfig,
    cache: &PovmCache,
    mask: Option<&Vec<bool>>,
    round: u64,
) -> Result<RoundRecord> {
    let mut alice_rng = substream(cfg.seed, TAG_ALICE, round);
    let mut eve_rng = substream(cfg.seed, TAG_EVE, round);
    let mut bob_rng = substream(cfg.seed, TAG_BOB, round);

    let (levels, signs) = alice_draw(cfg, &mut alice_rng);
    let probe = prepare_and_encode(cfg, &levels, &signs)?;
    let spec = effective_attack(cfg, mask, round);
    let (received, eve) = attack(&spec, &probe, &mut eve_rng)?;

    let povm_owned;
    let povm = match cfg.strategy {
        Strategy::Sequential => &cache.pairs[&(levels[0], levels[1])],
        Strategy::Parallel => cache.parallel.as_ref().expect("parallel POVM cached"),
        Strategy::Multiparam => {
            povm_owned = build_multiparam_povm(cfg.d, &levels, cfg.n, cfg.mp_coeff)?;
            &povm_owned
        }
    };
    let state = match &received {
        Probe::Full(s) => s.clone(),
        Probe::Effective(e) => e.as_state_vector(),
    };
    let index = sample_outcome(&state, povm, &mut bob_rng)?;
    let outcome = outcome_from_index(cfg.strategy, index, povm.len());
    Ok(RoundRecord { round, levels, signs, eve, outcome, abort: outcome.is_abort() })
}

/// Run a single round (strict-mode building block; also useful in tests).
pub fn run_round(cfg: &ProtocolConfig, round: u64) -> Result<RoundRecord> {
    cfg.validate()?;
    let cache = PovmCache::build(cfg)?;
    run_round_inner(cfg, &cache, exact_fraction_rounds(cfg).as_ref(), round)
}

/// Run the full protocol with the default execution policy.
pub fn run_protocol(cfg: &ProtocolConfig) -> Result<Transcript> {
    run_protocol_with_exec(cfg, Exec::Auto)
}

/// Run the full protocol; survey mode may evaluate rounds concurrently.
pub fn run_protocol_with_exec(cfg: &ProtocolConfig, exec: Exec) -> Result<Transcript> {
    cfg.validate()?;
    let cache = PovmCache::build(cfg)?;
    let mask = exact_fraction_rounds(cfg);

    let rounds: Vec<RoundRecord> = match cfg.mode {
        Mode::Strict => {
            let mut out = Vec::new();
            for round in 0..cfg.nu {
                let rec = run_round_inner(cfg, &cache, mask.as_ref(), round)?;
                let stop = rec.abort;
                out.push(rec);
                if stop {
                    break;
                }
            }
            out
        }
        Mode::Survey => {
            let results = indexed_map(cfg.nu, exec, |round| {
                run_round_inner(cfg, &cache, mask.as_ref(), round)
            });
            results.into_iter().collect::<Result<Vec<_>>>()?
        }
    };

    let aborted = rounds.iter().any(|r| r.abort);
    let reveal = if aborted || cfg.nu == 0 {
        None
    } else {
        Some(rounds.iter().map(|r| (r.levels.clone(), r.signs.clone())).collect())
    };

    Ok(Transcript {
        d: cfg.d,
        n: cfg.n,
        nu: cfg.nu,
        strategy: cfg.strategy,
        basis: cfg.basis,
        mode: cfg.mode,
        seed: cfg.seed,
        attack_kind: cfg.attack.kind_name().to_string(),
        rounds,
        reveal,
    })
}

/// Serialize a transcript: a `#`-prefixed header block, then one flat line
/// per round with columns round, j, k, sign, eve_acted, eve_outcome,
/// bob_outcome, abort. Multi-parameter rounds pack the level list into the
/// j column (`;`-separated) and `-` into k.
pub fn write_transcript(t: &Transcript) -> String {
    let mut out = String::new();
    out.push_str("# qpe transcript v1\n");
    out.push_str(&format!(
        "# d={} n={} nu={} strategy={} basis={} mode={} seed={} attack={}\n",
        t.d,
        t.n,
        t.nu,
        t.strategy.name(),
        t.basis.name(),
        t.mode.name(),
        t.seed,
        t.attack_kind,
    ));
    out.push_str(&format!("# reveal={}\n", if t.reveal.is_some() { 1 } else { 0 }));
    out.push_str("# columns: round j k sign eve_acted eve_outcome bob_outcome abort\n");
    for r in &t.rounds {
        let (jcol, kcol) = match t.strategy {
            Strategy::Multiparam => (levels_str(&r.levels), "-".to_string()),
            _ => (r.levels[0].to_string(), r.levels[1].to_string()),
        };
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {}\n",
            r.round,
            jcol,
            kcol,
            signs_str(&r.signs),
            u8::from(r.eve.acted),
            r.eve.outcome.clone().unwrap_or_else(|| "-".into()),
            r.outcome,
            u8::from(r.abort),
        ));
    }
    out
}

/// Parse the serialized transcript form (round-trip partner of
/// [`write_transcript`]).
pub fn parse_transcript(text: &str) -> Result<Transcript> {
    let mut d = None;
    let mut n = None;
    let mut nu = None;
    let mut strategy = None;
    let mut basis = None;
    let mut mode = None;
    let mut seed = None;
    let mut attack_kind = None;
    let mut reveal_flag = false;
    let mut rounds = Vec::new();

    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest.starts_with("columns") || rest.starts_with("qpe transcript") {
                continue;
            }
            for token in rest.split_whitespace() {
                let Some((key, value)) = token.split_once('=') else { continue };
                match key {
                    "d" => d = Some(value.parse().map_err(|_| bad(line))?),
                    "n" => n = Some(value.parse().map_err(|_| bad(line))?),
                    "nu" => nu = Some(value.parse().map_err(|_| bad(line))?),
                    "strategy" => strategy = Some(Strategy::parse(value)?),
                    "basis" => basis = Some(Basis::parse(value)?),
                    "mode" => mode = Some(Mode::parse(value)?),
                    "seed" => seed = Some(value.parse().map_err(|_| bad(line))?),
                    "attack" => attack_kind = Some(value.to_string()),
                    "reveal" => reveal_flag = value == "1",
                    _ => return Err(Error::Config(format!("unknown header key {key:?}"))),
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 8 {
            return Err(bad(line));
        }
        let levels: Vec<usize> = if cols[2] == "-" {
            cols[1]
                .split(';')
                .map(|v| v.parse().map_err(|_| bad(line)))
                .collect::<Result<_>>()?
        } else {
            vec![
                cols[1].parse().map_err(|_| bad(line))?,
                cols[2].parse().map_err(|_| bad(line))?,
            ]
        };
        let signs: Vec<Sign> = cols[3]
            .split(';')
            .map(|s| {
                s.chars()
                    .next()
                    .ok_or_else(|| bad(line))
                    .and_then(Sign::from_symbol)
            })
            .collect::<Result<_>>()?;
        let eve = EveRecord {
            acted: cols[4] == "1",
            outcome: if cols[5] == "-" { None } else { Some(cols[5].to_string()) },
            substituted: cols[5] != "-",
        };
        let outcome = Outcome::parse(cols[6])?;
        rounds.push(RoundRecord {
            round: cols[0].parse().map_err(|_| bad(line))?,
            levels,
            signs,
            eve,
            outcome,
            abort: cols[7] == "1",
        });
    }

    let missing = |what: &str| Error::Config(format!("transcript header missing {what}"));
    let reveal = if reveal_flag {
        Some(rounds.iter().map(|r: &RoundRecord| (r.levels.clone(), r.signs.clone())).collect())
    } else {
        None
    };
    Ok(Transcript {
        d: d.ok_or_else(|| missing("d"))?,
        n: n.ok_or_else(|| missing("n"))?,
        nu: nu.ok_or_else(|| missing("nu"))?,
        strategy: strategy.ok_or_else(|| missing("strategy"))?,
        basis: basis.ok_or_else(|| missing("basis"))?,
        mode: mode.ok_or_else(|| missing("mode"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        attack_kind: attack_kind.ok_or_else(|| missing("attack"))?,
        rounds,
        reveal,
    })
}

fn bad(line: &str) -> Error {
    Error::Config(format!("malformed transcript line {line:?}"))
}
