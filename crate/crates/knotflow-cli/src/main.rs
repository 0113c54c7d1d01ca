//! Command-line driver for the curve-flow library.
//!
//! Exit codes: 0 success (including time-limit termination), 1 validation or
//! internal failure, 2 configuration/input errors, 3 step collapse.

mod config;
mod formats;
mod manifest;
mod validate;

use anyhow::Context;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "knotflow", version, about = "Gradient flows of repulsive curve energies")]
struct Cli {
    /// Output directory for files this command writes.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Override the config's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel kernels (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a gradient flow from a config file.
    Flow {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the invariant suite against the pinned constants.
    Validate {
        /// Fixture file with the pinned constants.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Evaluate the energies of a curve file.
    Energy {
        curve: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Evaluate the gradient and flow velocity of a curve file, as CSV.
    Gradient {
        curve: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Fan out independent flow runs over a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Emit a table of heat-kernel values.
    Kernel {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 5.0)]
        xmax: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_COLLAPSE: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: building thread pool: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Flow { config } => cmd_flow(&config, &cli.out, cli.seed),
        Command::Validate { fixtures } => cmd_validate(fixtures.as_deref(), &cli.out),
        Command::Energy { curve, alpha, lambda } => cmd_energy(&curve, alpha, lambda),
        Command::Gradient { curve, alpha, lambda } => cmd_gradient(&curve, alpha, lambda, &cli.out),
        Command::Sweep { config } => cmd_sweep(&config, &cli.out, cli.seed),
        Command::Kernel { s, t, xmax, points } => cmd_kernel(s, t, xmax, points, &cli.out),
    }
}

fn cmd_flow(config_path: &Path, out: &Path, seed: Option<u64>) -> anyhow::Result<ExitCode> {
    // validate everything before creating any output file
    let (cfg, config_text) = match load_config(config_path) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let prepared = match prepare_run(&cfg, seed) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let exit = execute_run(&cfg, &config_text, prepared, out)?;
    Ok(exit)
}

struct PreparedRun {
    curve: knotflow::ClosedCurve<f64>,
    flow_cfg: knotflow::FlowConfig<f64>,
    seed: u64,
}

fn load_config(path: &Path) -> anyhow::Result<(config::RunConfig, String)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: config::RunConfig = toml::from_str(&text).context("parsing config")?;
    Ok((cfg, text))
}

fn prepare_run(cfg: &config::RunConfig, seed: Option<u64>) -> anyhow::Result<PreparedRun> {
    Ok(PreparedRun {
        curve: cfg.build_curve(seed)?,
        flow_cfg: cfg.flow_config()?,
        seed: seed.unwrap_or(cfg.run.seed),
    })
}

fn execute_run(
    cfg: &config::RunConfig,
    config_text: &str,
    prepared: PreparedRun,
    out: &Path,
) -> anyhow::Result<ExitCode> {
    std::fs::create_dir_all(out)?;
    let version = env!("CARGO_PKG_VERSION");
    let run_id = manifest::run_id(config_text, prepared.seed, version);
    let started = chrono::Utc::now().to_rfc3339();

    let run = knotflow::run_flow(&prepared.curve, &prepared.flow_cfg)?;

    formats::write_frames(
        &out.join("frames.jsonl"),
        &run_id,
        prepared.curve.dim(),
        &run.frames,
    )?;
    formats::write_diagnostics(&out.join("diagnostics.csv"), &run_id, &run.diagnostics)?;

    let fixture_path = default_fixtures_path();
    let man = manifest::Manifest {
        run_id: run_id.clone(),
        artifact_version: version.into(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        termination: manifest::termination_echo(run.termination),
        seed: prepared.seed,
        n: prepared.curve.n(),
        config: cfg.clone(),
        fixture_hashes: manifest::FixtureHashes {
            pinned_constants: manifest::hash_file(&fixture_path).unwrap_or_else(|_| "absent".into()),
            symbol_cache: manifest::hash_symbol_table(cfg.energy.alpha, prepared.curve.n())?,
        },
    };
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&man)?)?;

    let final_residual = run.final_state.residual;
    match run.termination {
        knotflow::TerminationCause::StepCollapse { step } => {
            eprintln!("step collapse at step {step}; outputs written to {}", out.display());
            Ok(ExitCode::from(EXIT_COLLAPSE))
        }
        cause => {
            println!(
                "run {run_id}: {cause:?} at t = {:.6}, residual {final_residual:.3e}, {} steps",
                run.final_state.t, run.final_state.step_index
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// The pinned-constants file shipped next to the crate; overridable on the
/// command line.
fn default_fixtures_path() -> PathBuf {
    let env_override = std::env::var_os("KNOTFLOW_FIXTURES").map(PathBuf::from);
    env_override.unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/pinned.json")
    })
}

fn cmd_validate(fixtures: Option<&Path>, out: &Path) -> anyhow::Result<ExitCode> {
    let path = fixtures.map(Path::to_path_buf).unwrap_or_else(default_fixtures_path);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: reading fixtures {}: {e}", path.display());
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let pinned: validate::PinnedConstants = match serde_json::from_str(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: parsing fixtures: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let checks = validate::run_validation(&pinned)?;
    validate::print_table(&checks);
    std::fs::create_dir_all(out)?;
    std::fs::write(
        out.join("validate_report.json"),
        serde_json::to_string_pretty(&checks)?,
    )?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(ExitCode::from(EXIT_FAIL))
    }
}

fn cmd_energy(curve_path: &Path, alpha: f64, lambda: f64) -> anyhow::Result<ExitCode> {
    let curve = match formats::read_curve_file(curve_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("curve file error: {e:#}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let params = knotflow::EnergyParams::new(alpha, lambda)?;
    let geom = knotflow::geometry(&curve)?;
    let e_alpha = knotflow::ohara_energy(&geom, &params)?;
    let total = e_alpha + lambda * geom.length;
    println!("e_alpha = {e_alpha:.17e}");
    println!("length  = {:.17e}", geom.length);
    println!("e_total = {total:.17e}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_gradient(curve_path: &Path, alpha: f64, lambda: f64, out: &Path) -> anyhow::Result<ExitCode> {
    let curve = match formats::read_curve_file(curve_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("curve file error: {e:#}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let params = knotflow::EnergyParams::new(alpha, lambda)?;
    let geom = knotflow::geometry(&curve)?;
    let gradient = knotflow::gradient_direct(&geom, alpha)?;
    let velocity = knotflow::flow_velocity(&geom, &params)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("gradient.csv");
    formats::write_gradient_csv(&path, &curve, &gradient.values, &velocity.values)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(config_path: &Path, out: &Path, seed: Option<u64>) -> anyhow::Result<ExitCode> {
    let (cfg, _) = match load_config(config_path) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let Some(sweep) = cfg.sweep.clone() else {
        eprintln!("config error: sweep requires a [sweep] section with alphas and lambdas");
        return Ok(ExitCode::from(EXIT_CONFIG));
    };
    std::fs::create_dir_all(out)?;
    let combos: Vec<(f64, f64)> = sweep
        .alphas
        .iter()
        .flat_map(|&a| sweep.lambdas.iter().map(move |&l| (a, l)))
        .collect();
    use rayon::prelude::*;
    let results: Vec<anyhow::Result<(String, String)>> = combos
        .par_iter()
        .map(|&(alpha, lambda)| {
            let mut sub = cfg.clone();
            sub.energy.alpha = alpha;
            sub.energy.lambda = lambda;
            sub.sweep = None;
            let dir = out.join(format!("a{alpha}_l{lambda}"));
            let text = toml::to_string(&sub)?;
            let prepared = prepare_run(&sub, seed)?;
            let code = execute_run(&sub, &text, prepared, &dir)?;
            let status = if code == ExitCode::from(EXIT_COLLAPSE) {
                "step_collapse"
            } else {
                "completed"
            };
            Ok((format!("a{alpha}_l{lambda}"), status.to_string()))
        })
        .collect();
    let mut summary = std::collections::BTreeMap::new();
    let mut had_error = false;
    for r in results {
        match r {
            Ok((name, status)) => {
                summary.insert(name, status);
            }
            Err(e) => {
                eprintln!("sweep run failed: {e:#}");
                had_error = true;
            }
        }
    }
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("sweep finished: {} runs", summary.len());
    Ok(if had_error {
        ExitCode::from(EXIT_FAIL)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_kernel(s: f64, t: f64, xmax: f64, points: usize, out: &Path) -> anyhow::Result<ExitCode> {
    let params = match knotflow::HeatKernelParams::new(s, t) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    std::fs::create_dir_all(out)?;
    let path = out.join("kernel.csv");
    let mut body = String::from("x,g\n");
    for i in 0..points {
        let x = -xmax + 2.0 * xmax * i as f64 / (points - 1).max(1) as f64;
        body.push_str(&format!("{x:.17e},{:.17e}\n", knotflow::heat_kernel(x, &params)?));
    }
    std::fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}
