//! Declarative run configuration: the file form of [`ProtocolConfig`] plus
//! experiment settings. Unknown keys are hard errors — a silently ignored
//! typo in an attack parameter would invalidate security conclusions.

use serde::Deserialize;

use crate::adversary::AttackSpec;
use crate::encoding::Strategy;
use crate::protocol::{Basis, Mode, MpCoeff, ProtocolConfig};
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

fn default_trials() -> u64 {
    32
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub kind: String,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub fraction: Option<f64>,
}

impl AttackConfig {
    pub fn to_spec(&self) -> Result<AttackSpec> {
        let delta = || {
            self.delta
                .ok_or_else(|| Error::Config(format!("attack {:?} needs delta", self.kind)))
        };
        let fraction = || {
            self.fraction
                .ok_or_else(|| Error::Config(format!("attack {:?} needs fraction", self.kind)))
        };
        let spec = match self.kind.as_str() {
            "none" => AttackSpec::None,
            "gaussian_phase" => AttackSpec::GaussianPhase { delta: delta()? },
            "fixed_phase" => AttackSpec::FixedPhase { delta: delta()? },
            "resend_random_pair" => AttackSpec::ResendRandomPair,
            "resend_uniform" => AttackSpec::ResendUniform,
            "superposition_resend" => AttackSpec::SuperpositionResend,
            "projective_resend" => AttackSpec::ProjectiveResend { fraction: fraction()? },
            "pairwise_povm_resend" => AttackSpec::PairwisePovmResend { fraction: fraction()? },
            other => return Err(Error::Config(format!("unknown attack kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub d: usize,
    pub n: u32,
    pub nu: u64,
    pub strategy: String,
    #[serde(default)]
    pub m: Option<usize>,
    pub phases: Vec<f64>,
    #[serde(default)]
    pub attack: Option<AttackConfig>,
    #[serde(default)]
    pub basis: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub mp_coeff: Option<String>,
    #[serde(default)]
    pub exact_fraction: bool,
}

/// Parse and version-check a config file body.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
    if cfg.version != CONFIG_VERSION {
        return Err(Error::Config(format!(
            "unsupported config version {} (expected {CONFIG_VERSION})",
            cfg.version
        )));
    }
    if let Some(m) = cfg.m {
        if m != cfg.phases.len() {
            return Err(Error::Config(format!(
                "m = {m} disagrees with {} phases",
                cfg.phases.len()
            )));
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Resolve into a validated ProtocolConfig. CLI-level overrides take
    /// precedence over file values.
    pub fn to_protocol(
        &self,
        seed_override: Option<u64>,
        mode_override: Option<Mode>,
    ) -> Result<ProtocolConfig> {
        let attack = match &self.attack {
            Some(a) => a.to_spec()?,
            None => AttackSpec::None,
        };
        let cfg = ProtocolConfig {
            d: self.d,
            n: self.n,
            nu: self.nu,
            strategy: Strategy::parse(&self.strategy)?,
            true_phases: self.phases.clone(),
            attack,
            basis: Basis::parse(self.basis.as_deref().unwrap_or("standard"))?,
            seed: seed_override.or(self.seed).unwrap_or(0),
            mode: match mode_override {
                Some(m) => m,
                None => Mode::parse(self.mode.as_deref().unwrap_or("survey"))?,
            },
            mp_coeff: match &self.mp_coeff {
                Some(s) => MpCoeff::parse(s)?,
                None => MpCoeff::default(),
            },
            exact_fraction: self.exact_fraction,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
