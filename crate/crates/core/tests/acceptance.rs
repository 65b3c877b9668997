//! The thirteen acceptance criteria, each at exact tolerance.
//!
//! Runs without the libtest harness so the PASS/FAIL line of every criterion
//! is always printed; exits non-zero if any criterion fails.

use std::process::ExitCode;

use fcrystal::verify::{run_check, CheckOutcome};

fn main() -> ExitCode {
    println!("running acceptance criteria");
    let outcomes: Vec<CheckOutcome> = (1..=13).map(|id| run_check(id).expect("known criterion")).collect();
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
