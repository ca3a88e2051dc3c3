//! The twelve acceptance criteria at their stated tolerances.

use dhg_core::suite::{run_criterion, SuiteConfig, CRITERIA};

#[test]
fn acceptance() {
    let cfg = SuiteConfig::default();
    let mut failed = Vec::new();
    for i in 0..CRITERIA.len() {
        let r = run_criterion(&cfg, i);
        println!("{}", r.summary());
        if !r.passed {
            failed.push(r.name.clone());
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
