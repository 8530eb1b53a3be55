use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entex_core::channels::{
    extract_kraus, phase_model, ruc_trajectory, traced_dynamics, zero_discord_family, CHOI_TOL, COMPLETENESS_TOL,
};
use entex_core::linalg::c64;
use entex_core::markov::{
    is_markov, make_markov_state, markov_necessary_witnesses, random_be_trials, random_qubit_markov_spec, CMI_TOL,
};
use entex_core::random::seeded_rng;
use entex_core::spin_star::{build_initial_state, build_omega0, LABEL_A, LABEL_B, LABEL_E, MAX_BRUTE_FORCE_SPINS};
use entex_core::sweep::{format_sig, run_sweep, write_csv, SweepConfig, CONSISTENCY_TOL};
use entex_core::{DensityMatrix, DimsSpec, EnvSize, Error, LogBase, PureState, SpinStarParams};
use rand::Rng;

mod svg;

/// Tolerance for the channel and ensemble checks.
const CHECK_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "entex", version, about = "Entanglement dynamics of a qubit pair with one qubit in a spin-star bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concurrence, mutual information and A;BE concurrence over a time grid, as CSV.
    Sweep(SweepArgs),
    /// Extract the Kraus channel and check completeness, positivity and the traced dynamics.
    KrausCheck(KrausArgs),
    /// Decide whether a built-in system-environment state is a Markov state.
    MarkovCheck(MarkovArgs),
    /// Hidden entanglement along a random-unitary phase channel on qubit B, as CSV.
    Hidden(HiddenArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Weight of the |ψ1⟩|1̄⟩ component.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Angle of ψ1 (radians, or forms like pi/4, 3pi/8).
    #[arg(long, default_value = "pi/4", value_parser = parse_angle)]
    alpha: f64,
    /// Angle of ψ2.
    #[arg(long, default_value = "pi/4", value_parser = parse_angle)]
    beta: f64,
    /// Number of bath spins.
    #[arg(long, value_name = "N", conflicts_with = "large_n")]
    env_spins: Option<usize>,
    /// Large-bath limit (the default).
    #[arg(long)]
    large_n: bool,
    /// Coupling g.
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
}

impl ModelArgs {
    fn params(&self) -> SpinStarParams {
        SpinStarParams {
            env: self.env_spins.map_or(EnvSize::LargeN, EnvSize::Finite),
            coupling: self.coupling,
            p: self.p,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// End time in units of 1/g (default 4π/Ω).
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid intervals.
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Logarithm base for the mutual information: 2, e or 10.
    #[arg(long, default_value = "10")]
    log_base: LogBase,
    /// Also evolve the full bath (needs --env-spins N, N ≤ 12).
    #[arg(long)]
    oracle: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Also write a static SVG plot.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KrausArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Scaled time Ωt.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Check random (α, β, probabilities, Ωt) draws from this seed instead.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random draws with --seed.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scenario {
    /// The classically-flagged spin-star state.
    Eq11,
    /// The W-like pure state with x = y = z = 1/√3.
    Omega0,
    /// ρ_AB ⊗ ρ_E built from the flagged state's marginals.
    Factorized,
    /// A random two-block Markov state.
    CustomMarkov,
}

#[derive(Args, Debug)]
struct MarkovArgs {
    #[arg(long, value_enum, default_value = "eq11")]
    scenario: Scenario,
    #[command(flatten)]
    model: ModelArgs,
    /// Seed for the random Markov state and the random U_BE trials.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Random localized unitaries tried on Markov verdicts.
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Args, Debug)]
struct HiddenArgs {
    /// End of the ωt grid (default 2π).
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    steps: usize,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace('π', "pi");
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| format!("bad angle '{s}'"))?),
        None => (t.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(|| format!("bad angle '{s}'"))?.trim_end_matches('*');
    let coeff = if coeff.is_empty() { 1.0 } else { coeff.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))? };
    Ok(coeff * std::f64::consts::PI / den)
}

enum Failure {
    Usage(String),
    Check(String),
    Io(io::Error),
    Other(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::OutsideTruncation(_) => Failure::Usage(e.to_string()),
            Error::Inconsistent(_) => Failure::Check(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let params = args.model.params();
    if args.oracle {
        match params.env {
            EnvSize::Finite(n) if n <= MAX_BRUTE_FORCE_SPINS => {}
            _ => return Err(Failure::Usage(format!("--oracle needs --env-spins N with N ≤ {MAX_BRUTE_FORCE_SPINS}"))),
        }
    }
    let config =
        SweepConfig { params, t_max: args.t_max, steps: args.steps, log_base: args.log_base, oracle: args.oracle };
    config.validate()?;
    let sweep = run_sweep(&config)?;
    let mut out = open_output(args.output.as_deref())?;
    write_csv(&sweep.rows, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.svg {
        std::fs::write(path, svg::render(&sweep.rows, config.omega_t_max(), args.log_base))?;
    }
    eprintln!("max |c_closed - c_numeric| = {:.3e}", sweep.max_closed_gap);
    if let Some(gap) = sweep.max_oracle_gap {
        eprintln!("max |c_numeric - c_brute_force| = {gap:.3e}");
    }
    if !sweep.is_consistent() {
        return Err(Failure::Check(format!("numeric routes disagree by more than {CONSISTENCY_TOL:e}")));
    }
    Ok(())
}

struct KrausStats {
    residual: f64,
    choi_min: f64,
    deviation: f64,
}

fn kraus_stats(params: &SpinStarParams, probs: Option<&[f64]>, omega_t: f64) -> Result<KrausStats, Failure> {
    let mut family = zero_discord_family(params)?;
    if let Some(probs) = probs {
        family = family.with_probabilities(probs)?;
    }
    let ch = extract_kraus(&family, params, omega_t)?;
    let out = ch.apply(&family.system_state()?)?;
    let reference = traced_dynamics(&family, params, omega_t)?;
    Ok(KrausStats {
        residual: ch.completeness_residual(),
        choi_min: ch.choi_min_eigenvalue()?,
        deviation: out.mat().max_abs_diff(reference.mat()),
    })
}

fn cmd_kraus_check(args: &KrausArgs) -> CmdResult {
    let base = args.model.params();
    base.validate()?;
    if args.t < 0.0 || !args.t.is_finite() {
        return Err(Failure::Usage(format!("--t must be a non-negative time, got {}", args.t)));
    }
    let mut worst = KrausStats { residual: 0.0, choi_min: f64::INFINITY, deviation: 0.0 };
    let mut absorb = |s: KrausStats| {
        worst.residual = worst.residual.max(s.residual);
        worst.choi_min = worst.choi_min.min(s.choi_min);
        worst.deviation = worst.deviation.max(s.deviation);
    };
    match args.seed {
        None => {
            absorb(kraus_stats(&base, None, args.t)?);
            let family = zero_discord_family(&base)?;
            let rho = family.system_state()?;
            let out = extract_kraus(&family, &base, args.t)?.apply(&rho)?;
            println!("omega_t: {}", format_sig(args.t));
            println!("change of the initial system state: {:.3e}", out.mat().max_abs_diff(rho.mat()));
        }
        Some(seed) => {
            let mut rng = seeded_rng(seed, 0);
            for _ in 0..args.trials {
                let params = SpinStarParams {
                    alpha: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                    beta: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                    ..base
                };
                let raw: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
                let total: f64 = raw.iter().sum();
                let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let omega_t = rng.gen_range(0.0..4.0 * std::f64::consts::PI);
                absorb(kraus_stats(&params, Some(&probs), omega_t)?);
            }
            println!("random draws: {} (seed {seed})", args.trials);
        }
    }
    println!("completeness residual: {:.3e}", worst.residual);
    println!("min Choi eigenvalue: {:.3e}", worst.choi_min);
    println!("max deviation from traced dynamics: {:.3e}", worst.deviation);
    if worst.residual > COMPLETENESS_TOL || worst.choi_min < -CHOI_TOL || worst.deviation > CHECK_TOL {
        return Err(Failure::Check("Kraus channel outside tolerance".into()));
    }
    println!("ok");
    Ok(())
}

fn cmd_markov_check(args: &MarkovArgs) -> CmdResult {
    let params = args.model.params();
    params.validate()?;
    let (rho, expect_markov): (DensityMatrix, bool) = match args.scenario {
        Scenario::Eq11 => (build_initial_state(&params)?, false),
        Scenario::Omega0 => {
            let s = 1.0 / 3f64.sqrt();
            (build_omega0(s, s, s)?.to_density(), false)
        }
        Scenario::Factorized => {
            let rho = build_initial_state(&params)?;
            (rho.partial_trace(&[LABEL_A, LABEL_B])?.tensor(&rho.partial_trace(&[LABEL_E])?)?, true)
        }
        Scenario::CustomMarkov => {
            let mut rng = seeded_rng(args.seed, u64::MAX);
            (make_markov_state(&random_qubit_markov_spec(3, &mut rng))?, true)
        }
    };
    let (markov, cmi) = is_markov(&rho, CMI_TOL)?;
    let witness = markov_necessary_witnesses(&rho)?;
    println!("scenario: {:?}", args.scenario);
    println!("conditional mutual information (bits): {}", format_sig(cmi));
    println!(
        "partial transpose of rho_{}{}: min eigenvalue {} ({})",
        witness.pair.0,
        witness.pair.1,
        format_sig(witness.min_eigenvalue),
        if witness.certifies_non_markov() { "NPT" } else { "PPT" }
    );
    println!("verdict: {}", if markov { "Markov" } else { "non-Markov" });
    if markov {
        let report = random_be_trials(&rho, args.trials, args.seed)?;
        println!(
            "localized U_BE trials: {} (seed {}), concurrence increases: {}",
            report.trials, args.seed, report.violations
        );
        if report.violations > 0 {
            return Err(Failure::Check("a Markov state gained system entanglement".into()));
        }
    }
    if markov != expect_markov {
        return Err(Failure::Check(format!(
            "expected {} for this scenario",
            if expect_markov { "Markov" } else { "non-Markov" }
        )));
    }
    Ok(())
}

fn cmd_hidden(args: &HiddenArgs) -> CmdResult {
    let end = args.t_max.unwrap_or(2.0 * std::f64::consts::PI);
    if !(end.is_finite() && end > 0.0) || args.steps == 0 {
        return Err(Failure::Usage("--t-max must be positive and --steps at least 1".into()));
    }
    let grid: Vec<f64> = (0..=args.steps).map(|k| end * k as f64 / args.steps as f64).collect();
    let h = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = c64(0.0, 0.0);
    let bell = PureState::new(vec![z, h, h, z], DimsSpec::qubits_ab())?.to_density();
    let points = ruc_trajectory(phase_model, &bell, &grid)?;
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "omega_t,c_mixture,c_ensemble_avg,c_hidden")?;
    for p in &points {
        writeln!(
            out,
            "{},{},{},{}",
            format_sig(p.omega_t),
            format_sig(p.c_mixture),
            format_sig(p.c_ensemble),
            format_sig(p.hidden)
        )?;
    }
    out.flush()?;
    let c0 = points[0].c_mixture;
    if let Some(p) = points.iter().find(|p| p.c_mixture > c0 + CHECK_TOL) {
        return Err(Failure::Check(format!("mixture concurrence exceeds its initial value at ωt = {}", p.omega_t)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::KrausCheck(a) => cmd_kraus_check(a),
        Command::MarkovCheck(a) => cmd_markov_check(a),
        Command::Hidden(a) => cmd_hidden(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
        // a closed pipe (e.g. `| head`) is a normal way to stop reading
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
