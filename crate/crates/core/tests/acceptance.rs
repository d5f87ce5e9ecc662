//! Runs the twelve acceptance criteria and prints one line per criterion.
//!
//! Criterion 11 additionally runs the CLI self-test with an injected
//! violation and expects exit code 4.

use std::process::{Command, ExitCode};
use std::time::Instant;

use fracheat::selftest::{run_criterion, SelftestOptions, CRITERIA};

/// Upper bound for the whole suite.
const BUDGET_SECONDS: f64 = 600.0;

fn injected_exit_code() -> Option<i32> {
    let out = Command::new(env!("CARGO_BIN_EXE_fracheat"))
        .args(["selftest", "--inject-violation", "--only", "11"])
        .output()
        .ok()?;
    out.status.code()
}

fn main() -> ExitCode {
    let opts = SelftestOptions { seed: 20_240_601, ..Default::default() };
    let start = Instant::now();
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let mut o = run_criterion(id, &opts);
        if id == 11 {
            let code = injected_exit_code();
            if code != Some(4) {
                o.passed = false;
            }
            o.summary = format!("{}; CLI injected run exit {:?}", o.summary, code);
        }
        if id == 12 {
            let total = start.elapsed().as_secs_f64();
            if total > BUDGET_SECONDS {
                o.passed = false;
            }
            o.summary = format!("{}; suite runtime {total:.1}s", o.summary);
        }
        println!("{}", o.line());
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
