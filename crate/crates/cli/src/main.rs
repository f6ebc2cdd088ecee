use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Run one lpbk job described by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "lpbk", version)]
struct Args {
    /// Job config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving the reports.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Replaces the job seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to LPBK_THREADS.
    #[arg(long, env = "LPBK_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("lpbk: {e}");
            return ExitCode::from(2);
        }
    }
    match lpbk_cli::run_file(&args.config, &args.out, args.seed) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if !outcome.pass {
                eprintln!("lpbk: at least one check failed");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("lpbk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
