//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;

use kt_measure_cli::acceptance::run_all;

fn main() -> ExitCode {
    let results = run_all(None);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
