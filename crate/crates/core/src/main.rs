use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cornerfem::cli::{self, CliError};

#[derive(Parser)]
#[command(name = "cornerfem", version, about = "Corner-corrected Galerkin FEM for 1D Burgers and reaction-diffusion problems")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the compatibility defects at both corners.
    Compat { config: PathBuf },
    /// Solve at mesh N, compare with the reference and write the CSV files.
    Solve { config: PathBuf },
    /// Run a convergence study over N_list and write convergence.csv.
    Convergence { config: PathBuf },
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Compat { config } => {
            let cfg = cli::load_config(&config)?;
            print!("{}", cli::cmd_compat(&cfg));
        }
        Command::Solve { config } => {
            let cfg = cli::load_config(&config)?;
            let out = cli::cmd_solve(&cfg)?;
            let (peak, k, j) = out.run.error.peak();
            println!(
                "level {} N {}: max error {peak:e} at t = {}, x = {}",
                cfg.level,
                cfg.n,
                out.run.error.times[k],
                out.run.error.mesh.node(j)
            );
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Convergence { config } => {
            let cfg = cli::load_config(&config)?;
            println!("level {}", cfg.level);
            let (table, path) = cli::cmd_convergence(&cfg, &mut |r| {
                println!("N {:5}  err_t0 {:.4e}  err_T {:.4e}", r.n, r.err_initial_step, r.err_final_time);
            })?;
            println!("order_t0 {:.3}  order_T {:.3}", table.order_initial_step, table.order_final_time);
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::from(cli::EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
