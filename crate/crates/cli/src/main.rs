#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod glyph;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// A user error that is not a library error: conflicting or missing flags.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<clap::Error>().is_some()
        {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<r3s2::Error>() {
            use r3s2::Error::*;
            return match e {
                Parameter(_)
                | Domain(_)
                | Shape(_)
                | SamplingMismatch(_)
                | Format { .. }
                | Truncated { .. }
                | Version(_)
                | Io(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

fn thread_pool() -> anyhow::Result<()> {
    if let Ok(s) = std::env::var("KERNELS_THREADS") {
        let n: usize = s
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("KERNELS_THREADS = '{s}' is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = thread_pool().and_then(|_| commands::run(cli, argv[1..].to_vec()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
