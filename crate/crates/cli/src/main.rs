//! `twotone`: spectra and design points for two-tone driven
//! optomechanical cavities, written as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twotone_core::model::{PhysParams, Scheme};
use twotone_cli::config::{self, DriveSpec, SolverChoice};
use twotone_cli::{csvout, figures, optimize, run, CliError, Result};

#[derive(Parser)]
#[command(
    name = "twotone",
    version,
    about = "Output spectra of two-tone driven optomechanical cavities",
    after_help = "Exit codes: 0 success, 2 invalid input, 3 solver failure."
)]
struct Cli {
    /// Spectrum solver: `rwa` or `floquet` (overrides the config file).
    #[arg(long, global = true)]
    solver: Option<String>,

    /// Starting truncation order for the `floquet` solver (1-8).
    #[arg(long, global = true)]
    harmonics: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate output spectra for a scenario config file as CSV.
    Spectrum {
        /// Scenario file, key = value lines or a flat JSON object.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a named preset dataset (2a, 2b, 2c, 3, 4, 5) into a directory.
    Fig {
        /// Preset name.
        target: String,
        /// Directory the CSV files are written into.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the impedance-matched two-tone drive pair at a cooperativity.
    Match {
        /// Drive cooperativity (must be at least 1).
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa_out: f64,
        #[arg(long, default_value_t = 0.0)]
        kappa_int: f64,
        #[arg(long, default_value_t = 0.01)]
        gamma_m: f64,
    },
    /// Find the cooperativity where output squeezing reaches a target depth.
    Threshold {
        /// Target squeezing depth in dB below shot noise (positive).
        #[arg(long)]
        target: f64,
        /// Scheme: `dissipative` or `ponderomotive`.
        #[arg(long, default_value = "dissipative")]
        scheme: String,
        #[arg(long, default_value_t = 10.0)]
        n_th: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa_out: f64,
        #[arg(long, default_value_t = 2e-5)]
        gamma_m: f64,
        #[arg(long, default_value_t = 10.0)]
        omega_m: f64,
        /// Upper end of the cooperativity search bracket.
        #[arg(long, default_value_t = 1e9)]
        c_max: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum { config: path, out } => {
            let mut sc = config::load(&path)?;
            if let Some(word) = &cli.solver {
                sc.solver = SolverChoice::from_name(word)?;
            }
            if let Some(n) = cli.harmonics {
                sc.harmonics = Some(n);
            }
            config::validate_solver(sc.solver, sc.harmonics)?;
            let table = run::run_scenario(&sc)?;
            csvout::write_file(&out, &table)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Fig { target, out } => {
            if cli.solver.is_some() {
                eprintln!("note: presets choose their own solvers; --solver is ignored for `fig`");
            }
            let target = figures::FigTarget::from_name(&target)?;
            if let Some(n) = cli.harmonics {
                config::validate_solver(SolverChoice::Floquet, Some(n))?;
            }
            for path in figures::emit(target, &out, cli.harmonics)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Match {
            c,
            kappa_out,
            kappa_int,
            gamma_m,
        } => {
            let params = PhysParams {
                omega_m: 1.0,
                kappa_out,
                kappa_int,
                gamma_m,
                g0: 0.0,
                n_th: 0.0,
                gamma_l: 0.0,
            };
            params.validate()?;
            let drives = DriveSpec {
                auto_match_c: Some(c),
                g_minus: 0.0,
                g_plus: 0.0,
                g_zero: 0.0,
                a_zero: 0.0,
            }
            .resolve(Scheme::Dissipative, &params)?;
            let g2 = drives.g_minus * drives.g_minus - drives.g_plus * drives.g_plus;
            let r = if drives.g_plus > 0.0 {
                (drives.g_plus / drives.g_minus).atanh()
            } else {
                0.0
            };
            // e^{-2r} = (1 - tanh r)/(1 + tanh r) with tanh r = g_plus/g_minus.
            let e2r = (drives.g_minus - drives.g_plus) / (drives.g_minus + drives.g_plus);
            println!("c = {c}");
            println!("kappa_out = {kappa_out}");
            println!("kappa_int = {kappa_int}");
            println!("gamma_m = {gamma_m}");
            println!("g_minus = {}", drives.g_minus);
            println!("g_plus = {}", drives.g_plus);
            println!("squeeze_r = {r}");
            println!("exp_minus_2r = {e2r}");
            println!(
                "induced_damping_ratio = {}",
                4.0 * g2 / (params.kappa_tot() * gamma_m)
            );
            Ok(())
        }
        Command::Threshold {
            target,
            scheme,
            n_th,
            kappa_out,
            gamma_m,
            omega_m,
            c_max,
        } => {
            if cli.solver.as_deref() == Some("floquet") {
                return Err(CliError::validation(
                    "threshold searches use the rotating-wave solver only",
                ));
            }
            if !(target > 0.0) {
                return Err(CliError::validation(format!(
                    "--target must be a positive squeezing depth in dB, got {target}"
                )));
            }
            let ratio = 10f64.powf(-target / 10.0);
            let params = PhysParams {
                omega_m,
                kappa_out,
                kappa_int: 0.0,
                gamma_m,
                g0: 0.0,
                n_th,
                gamma_l: 0.0,
            };
            params.validate()?;
            let found = match scheme.as_str() {
                "dissipative" => optimize::dissipative_threshold(&params, ratio, c_max)?,
                "ponderomotive" => optimize::ponderomotive_threshold(&params, ratio, c_max)?,
                other => {
                    return Err(CliError::validation(format!(
                        "--scheme: expected `dissipative` or `ponderomotive`, got `{other}`"
                    )))
                }
            };
            println!("scheme = {scheme}");
            println!("target_db = {target}");
            println!("target_ratio = {ratio}");
            println!("c_min = {}", found.c);
            println!("achieved_ratio = {}", found.metric);
            Ok(())
        }
    }
}
