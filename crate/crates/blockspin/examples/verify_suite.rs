//! Run the release-gate verification suite and print one line per check.
//!
//! Fast by default (sizes capped at 400 spins, chains at 10^5 sweeps); pass
//! `--full` for the reference thresholds. Exits nonzero on any failure.

use blockspin::verify::{verify_suite, Level};

fn main() {
    let level = if std::env::args().any(|a| a == "--full") {
        Level::Full
    } else {
        Level::Fast
    };
    let report = verify_suite(level);
    print!("{}", report.render());
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}
