//! Acceptance suite: one line per criterion, then a hard failure if any failed.

use mql_core::selftest::{run_criterion, CRITERIA, DEFAULT_SEED};

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for &(id, _) in &CRITERIA {
        let result = run_criterion(id, DEFAULT_SEED);
        println!("{result}");
        if !result.passed {
            failed.push(id);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        CRITERIA.len() - failed.len(),
        CRITERIA.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
