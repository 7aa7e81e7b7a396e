use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use volterra_picard::runner::{self, SpatialConfig, WaveSetup};
use volterra_picard::schrodinger::{GaussianPacket, SpatialGrid};
use volterra_picard::verify::{self, VerifyOptions};
use volterra_picard::PhysicalParams;

#[derive(Parser)]
#[command(name = "picard", version, about = "Picard iteration for Volterra equations of the second kind")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config and write report.json plus CSV files.
    Solve { config: PathBuf },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        #[arg(long)]
        parallel: bool,
        /// Multiplier on the kernel bound used by the majorants.
        #[arg(long, default_value_t = 1.0)]
        bound_scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Write the JSON summary here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Abel sweep of the damped Fresnel integral as CSV (alpha, re, im, abs_error).
    Fresnel {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 21)]
        schedule: usize,
    },
    /// Sup distance between the freely evolved standard Gaussian and its initial data, as CSV.
    Poisson {
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = 1024)]
        n_points: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config } => match runner::run(&config) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                runner::exit_code_for(&e)
            }
        },
        Command::Verify { parallel, bound_scale, seed, only, report } => {
            let opts = VerifyOptions { parallel, bound_scale, seed };
            let outcomes = verify::run_suite(&opts, &only);
            print!("{}", verify::summary_table(&outcomes));
            if let Some(path) = report {
                if let Err(e) = std::fs::write(&path, verify::suite_json(&outcomes)) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            if outcomes.iter().all(|o| o.passed) {
                0
            } else {
                1
            }
        }
        Command::Fresnel { n, schedule } => emit(runner::fresnel_csv(n, schedule)),
        Command::Poisson { t_list, n_points } => {
            let sc = SpatialConfig { n_points, ..SpatialConfig::default() };
            match SpatialGrid::new(sc.x_min, sc.x_max, sc.n_points) {
                Ok(grid) => {
                    let wave = WaveSetup { grid, params: PhysicalParams::default(), packet: GaussianPacket::standard() };
                    emit(runner::poisson_csv(&t_list, &wave))
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
    };
    ExitCode::from(code as u8)
}

fn emit(csv: volterra_picard::Result<String>) -> i32 {
    match csv {
        Ok(s) => {
            print!("{s}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
