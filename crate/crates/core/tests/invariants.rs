//! Runs the built-in invariant battery, one assertion per check.

use dirac_mti_core::validate::run_invariant_suite;

#[test]
fn invariant_suite_passes() {
    let results = run_invariant_suite();
    assert!(!results.is_empty());
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {:40} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        if !r.pass {
            failed += 1;
        }
    }
    assert_eq!(failed, 0, "{failed} invariant checks failed");
}
