//! Acceptance suite: prints one PASS/FAIL line per criterion at L = 64 with
//! the default seed, then exits non-zero if any criterion failed.

use std::process::ExitCode;

use roundsphere::selftest::{run_all, SelftestConfig};

fn main() -> ExitCode {
    let report = run_all(&SelftestConfig::default());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed: Vec<_> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!(
        "acceptance: {} of {} criteria passed ({:.1} s)",
        report.criteria.len() - failed.len(),
        report.criteria.len(),
        report.seconds
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
