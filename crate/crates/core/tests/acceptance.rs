//! Runs every acceptance criterion and prints one PASS/FAIL line each,
//! followed by the individual checks. Exits nonzero if any criterion fails.

use std::process::ExitCode;

use lqtraj_core::validation::Suite;

fn main() -> ExitCode {
    let report = Suite::default().run_all();
    println!("\nacceptance criteria");
    for c in &report.criteria {
        println!("{}", c.summary_line());
    }
    println!("\ndetails\n{}", report.render_text());
    if report.passed() {
        println!("all {} criteria passed", report.criteria.len());
        ExitCode::SUCCESS
    } else {
        let failed = report.criteria.iter().filter(|c| !c.passed()).count();
        println!("{failed} of {} criteria failed", report.criteria.len());
        ExitCode::FAILURE
    }
}
