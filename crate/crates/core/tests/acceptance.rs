//! Runs every acceptance criterion and prints one line per criterion.

use std::io::Write;

use petty_core::verify::{run_all, VerifyConfig};

#[test]
fn acceptance() {
    let report = run_all(&VerifyConfig::default()).expect("valid default config");
    // Written to the raw handle so the lines survive libtest's output capture.
    let mut err = std::io::stderr().lock();
    for outcome in &report.criteria {
        writeln!(err, "{}", outcome.line()).unwrap();
    }
    let failed: Vec<usize> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
