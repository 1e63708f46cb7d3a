use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use gaudin_lab::{report_json, report_lines, simulate, verify_suite};

#[derive(Parser)]
#[command(name = "gaudin-lab", version, about = "Gaudin model simulations and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a model along a multi-time curve and write CSV/JSON outputs.
    Simulate {
        /// Run config (JSON).
        config: PathBuf,
    },
    /// Run a verification suite: weierstrass, rational, elliptic, univar,
    /// multiform or all. Prints the JSON report on stdout.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match cli.command {
        Command::Simulate { config } => {
            let o = simulate(&config);
            eprintln!("{}", o.message);
            o.code
        }
        Command::Verify { suite, seed, out } => {
            let (o, report) = verify_suite(&suite, seed, out.as_deref());
            if let Some(r) = &report {
                for line in report_lines(r) {
                    eprintln!("{line}");
                }
                print!("{}", report_json(r));
            }
            eprintln!("{}", o.message);
            o.code
        }
    };
    eprintln!("elapsed {:.2} s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
