//! Command-line front end: run protocols from declarative configs, sweep
//! attack strengths, query the Fisher engine, and run the closed-form
//! verification suite. All outputs are deterministic functions of
//! (config, seed), so repeated runs are byte-identical.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qpe::adversary::AttackSpec;
use qpe::analysis::{
    report, run_experiment, verify_closed_forms, verify::has_unexpected_mismatch, oracles,
    VerifyOptions,
};
use qpe::config::parse_run_config;
use qpe::encoding::encode_sequential;
use qpe::fisher::{classical_fisher, cramer_rao, qfi_pure, FisherInfo, DEFAULT_STEP};
use qpe::protocol::{run_protocol, write_transcript, Basis, Mode, ProtocolConfig};
use qpe::qudit::{make_pair_superposition, Sign};
use qpe::{Error, Exec};

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_ABORT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "qpe", version, about = "qudit phase-estimation protocol simulator")]
struct Cli {
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "qpe-out")]
    out: PathBuf,
    /// Override the execution mode (strict | survey).
    #[arg(long, global = true)]
    mode: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol from a config file; write transcript and report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Verify published closed forms against oracles; write the table.
    Verify {
        /// Comma-separated claim ids, or "all".
        #[arg(long, default_value = "all")]
        claims: String,
        /// Dimension range, "min:max".
        #[arg(long, default_value = "3:8")]
        d_range: String,
        /// Rounds per Monte Carlo check.
        #[arg(long, default_value_t = 20_000)]
        nu: u64,
    },
    /// Precision curve along one axis (delta | fraction | n | d).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated grid values.
        #[arg(long)]
        grid: String,
    },
    /// Direct FI / QFI / Cramér–Rao queries.
    Fisher {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = 10_000)]
        nu: u64,
        /// Gaussian attack strength.
        #[arg(long)]
        delta: Option<f64>,
        /// Projective-resend fraction.
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long, default_value = "standard")]
        basis: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Some(threads) = cli.threads {
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        #[cfg(not(feature = "parallel"))]
        let _ = threads;
    }

    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn mode_override(cli: &Cli) -> qpe::Result<Option<Mode>> {
    cli.mode.as_deref().map(Mode::parse).transpose()
}

fn write_out(dir: &Path, name: &str, body: &str) -> qpe::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

fn load_protocol(cli: &Cli, path: &Path) -> qpe::Result<(ProtocolConfig, u64)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let rc = parse_run_config(&text)?;
    let cfg = rc.to_protocol(cli.seed, mode_override(cli)?)?;
    Ok((cfg, rc.trials))
}

fn run(cli: &Cli) -> qpe::Result<u8> {
    match &cli.command {
        Command::Simulate { config } => cmd_simulate(cli, config),
        Command::Verify { claims, d_range, nu } => cmd_verify(cli, claims, d_range, *nu),
        Command::Sweep { config, axis, grid } => cmd_sweep(cli, config, axis, grid),
        Command::Fisher { n, phi, nu, delta, fraction, basis } => {
            cmd_fisher(cli, *n, *phi, *nu, *delta, *fraction, basis)
        }
    }
}

fn cmd_simulate(cli: &Cli, config: &Path) -> qpe::Result<u8> {
    let (cfg, trials) = load_protocol(cli, config)?;
    let transcript = run_protocol(&cfg)?;
    write_out(&cli.out, "transcript.txt", &write_transcript(&transcript))?;

    let mut meta = vec![
        ("tool", "qpe".to_string()),
        ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
        ("subcommand", "simulate".to_string()),
        ("seed", cfg.seed.to_string()),
        ("mode", cfg.mode.name().to_string()),
        ("attack", cfg.attack.kind_name().to_string()),
        ("trials", trials.to_string()),
    ];

    if cfg.mode == Mode::Strict && transcript.aborted() {
        let round = transcript.rounds.last().map(|r| r.round).unwrap_or(0);
        meta.push(("abort_round", round.to_string()));
        write_out(&cli.out, "report.meta.toml", &report::metadata_sidecar(&meta_refs(&meta)))?;
        println!("protocol aborted at round {round}");
        return Ok(EXIT_ABORT);
    }

    match run_experiment(&cfg, trials, Exec::Auto) {
        Ok(precision) => {
            write_out(&cli.out, "report.csv", &report::precision_csv(&[precision.clone()]))?;
            meta.push(("completed_trials", precision.completed.to_string()));
            for (j, rmse) in precision.rmse.iter().enumerate() {
                println!(
                    "phi_{}: mean = {:.6}, rmse = {:.3e}{}",
                    j + 1,
                    precision.mean_estimate[j],
                    rmse,
                    precision
                        .crb
                        .as_ref()
                        .map(|c| format!(", crb = {:.3e}", c[j]))
                        .unwrap_or_default()
                );
            }
        }
        Err(Error::NoUsableRounds(why)) => {
            // Survey runs of always-detected attacks have no reveal; the
            // transcript (with its abort statistics) is the whole result.
            write_out(&cli.out, "report.csv", &report::precision_csv(&[]))?;
            meta.push(("estimation", format!("unavailable: {why}")));
            let aborts = transcript.aborts();
            println!(
                "no estimate ({why}); {aborts}/{} rounds aborted",
                transcript.rounds.len()
            );
        }
        Err(e) => return Err(e),
    }
    write_out(&cli.out, "report.meta.toml", &report::metadata_sidecar(&meta_refs(&meta)))?;
    Ok(EXIT_OK)
}

fn meta_refs(meta: &[(&'static str, String)]) -> Vec<(&'static str, String)> {
    meta.to_vec()
}

fn cmd_verify(cli: &Cli, claims: &str, d_range: &str, nu: u64) -> qpe::Result<u8> {
    let (d_min, d_max) = d_range
        .split_once(':')
        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
        .ok_or_else(|| Error::Config(format!("bad --d-range {d_range:?}, expected min:max")))?;
    let claim_list: Vec<String> = claims
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let opts = VerifyOptions { d_min, d_max, nu, seed: cli.seed.unwrap_or(17) };
    let rows = verify_closed_forms(&claim_list, &opts, Exec::Auto)?;

    let csv = report::claims_csv(&rows);
    write_out(&cli.out, "claims.csv", &csv)?;
    let meta = vec![
        ("tool", "qpe".to_string()),
        ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
        ("subcommand", "verify".to_string()),
        ("claims", claims.to_string()),
        ("d_range", format!("{d_min}:{d_max}")),
        ("nu", nu.to_string()),
        ("seed", opts.seed.to_string()),
    ];
    write_out(&cli.out, "claims.meta.toml", &report::metadata_sidecar(&meta))?;

    for row in &rows {
        println!(
            "{:<22} {:<36} oracle={:<13.6e} paper_value={:<13.6e} {}",
            row.formula_id, row.params, row.oracle, row.paper_value, row.verdict
        );
    }
    if has_unexpected_mismatch(&rows) {
        eprintln!("unexpected mismatch in verification table");
        return Ok(EXIT_MISMATCH);
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(cli: &Cli, config: &Path, axis: &str, grid: &str) -> qpe::Result<u8> {
    let (base, trials) = load_protocol(cli, config)?;
    let values: Vec<f64> = grid
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad grid value {s:?}")))
        })
        .collect::<qpe::Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Config("empty sweep grid".into()));
    }

    let mut points = Vec::new();
    for &v in &values {
        let mut cfg = base.clone();
        match axis {
            "delta" => match cfg.attack {
                AttackSpec::GaussianPhase { .. } => {
                    cfg.attack = AttackSpec::GaussianPhase { delta: v };
                }
                _ => {
                    return Err(Error::Config(
                        "--axis delta needs a gaussian_phase attack in the config".into(),
                    ))
                }
            },
            "fraction" => match cfg.attack {
                AttackSpec::ProjectiveResend { .. } => {
                    cfg.attack = AttackSpec::ProjectiveResend { fraction: v };
                }
                AttackSpec::PairwisePovmResend { .. } => {
                    cfg.attack = AttackSpec::PairwisePovmResend { fraction: v };
                }
                _ => {
                    return Err(Error::Config(
                        "--axis fraction needs a projective_resend or pairwise_povm_resend \
                         attack in the config"
                            .into(),
                    ))
                }
            },
            "n" => {
                cfg.n = v as u32;
                if (cfg.n as f64 - v).abs() > 0.0 {
                    return Err(Error::Config(format!("non-integer n grid value {v}")));
                }
            }
            "d" => {
                cfg.d = v as usize;
                if (cfg.d as f64 - v).abs() > 0.0 {
                    return Err(Error::Config(format!("non-integer d grid value {v}")));
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown sweep axis {other:?} (expected delta, fraction, n, or d)"
                )))
            }
        }
        let precision = run_experiment(&cfg, trials, Exec::Auto)?;
        points.push((v, precision));
    }

    // Attack-strength axes should degrade precision monotonically.
    let monotone = if axis == "delta" || axis == "fraction" {
        let mut ordered: Vec<&(f64, _)> = points.iter().collect();
        ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let ok = ordered.windows(2).all(|w| w[1].1.rmse[0] >= w[0].1.rmse[0] * 0.98);
        Some(ok)
    } else {
        None
    };

    write_out(&cli.out, "sweep.csv", &report::sweep_csv(axis, &points))?;
    let mut meta = vec![
        ("tool", "qpe".to_string()),
        ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
        ("subcommand", "sweep".to_string()),
        ("axis", axis.to_string()),
        ("grid", grid.to_string()),
        ("seed", base.seed.to_string()),
    ];
    if let Some(ok) = monotone {
        meta.push(("rmse_monotone", ok.to_string()));
        if !ok {
            eprintln!("warning: RMSE is not monotone along the {axis} axis");
        }
    }
    write_out(&cli.out, "sweep.meta.toml", &report::metadata_sidecar(&meta))?;
    for (v, p) in &points {
        println!("{axis}={v}: rmse = {:.4e}", p.rmse[0]);
    }
    Ok(EXIT_OK)
}

fn cmd_fisher(
    cli: &Cli,
    n: u32,
    phi: f64,
    nu: u64,
    delta: Option<f64>,
    fraction: Option<f64>,
    basis: &str,
) -> qpe::Result<u8> {
    if delta.is_some() && fraction.is_some() {
        return Err(Error::Config("--delta and --fraction are mutually exclusive".into()));
    }
    let attack = match (delta, fraction) {
        (Some(d), None) => AttackSpec::GaussianPhase { delta: d },
        (None, Some(f)) => AttackSpec::ProjectiveResend { fraction: f },
        _ => AttackSpec::None,
    };
    let mut cfg = ProtocolConfig::single(3, n, nu, phi, attack, 0);
    cfg.basis = Basis::parse(basis)?;
    cfg.validate()?;

    let model = oracles::single_param_model(&cfg).expect("closed model for these attacks");
    let fi = classical_fisher(model, phi, DEFAULT_STEP)?;
    let qfi = qfi_pure(
        move |x| {
            let s = make_pair_superposition(3, 1, 2, Sign::Plus).expect("valid pair");
            encode_sequential(&s, x, n, (1, 2)).expect("valid encoding")
        },
        phi,
        DEFAULT_STEP,
    )?;
    let crb = if fi > 0.0 {
        Some(cramer_rao(&FisherInfo::Scalar(fi), nu)?[0])
    } else {
        None
    };

    println!("fi  = {fi:.9e}");
    println!("qfi = {qfi:.9e}");
    match crb {
        Some(c) => println!("crb = {c:.9e} (nu = {nu})"),
        None => println!("crb = inf (zero Fisher information at this point)"),
    }

    let mut csv = String::from("n,phi,nu,delta,fraction,basis,fi,qfi,crb\n");
    csv.push_str(&format!(
        "{n},{phi},{nu},{},{},{},{fi:.12e},{qfi:.12e},{}\n",
        delta.map(|v| v.to_string()).unwrap_or_default(),
        fraction.map(|v| v.to_string()).unwrap_or_default(),
        cfg.basis.name(),
        crb.map(|c| format!("{c:.12e}")).unwrap_or_else(|| "inf".into()),
    ));
    write_out(&cli.out, "fisher.csv", &csv)?;
    Ok(EXIT_OK)
}
