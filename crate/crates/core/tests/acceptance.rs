//! Runs every acceptance criterion at its stated tolerance. Plain binary so the
//! per-criterion lines are always printed.

use std::process::ExitCode;

use hypstab_core::acceptance::{run_acceptance, AcceptanceConfig};

fn main() -> ExitCode {
    // `cargo test -- <filter>` on other targets must not trigger the full suite
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let report = match run_acceptance(&AcceptanceConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("numerical failure in the acceptance suite: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &report.results {
        println!("{}", r.summary());
    }
    let failed: Vec<u8> = report.results.iter().filter(|r| !r.pass()).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", report.results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
