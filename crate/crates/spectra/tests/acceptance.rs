//! Acceptance gate: one test per criterion, each printing its PASS/FAIL
//! verdict (run with `--nocapture` to see them for passing tests too).

use spectra::verify::{self, CriterionResult};

fn report(r: CriterionResult) {
    println!("{}", r.summary_line());
    for d in &r.details {
        println!("    {d}");
    }
    assert!(r.passed, "{}", r.summary_line());
}

#[test]
fn uniform_segment_baseline() {
    report(verify::uniform_segment_baseline());
}

#[test]
fn gaussian_limit() {
    report(verify::gaussian_limit());
}

#[test]
fn symmetric_poincare_rate() {
    report(verify::symmetric_poincare_rate());
}

#[test]
fn asymmetric_poincare_rate() {
    report(verify::asymmetric_poincare_rate());
}

#[test]
fn quartic_poincare_rate() {
    report(verify::quartic_poincare_rate());
}

#[test]
fn lsi_rate() {
    report(verify::lsi_rate());
}

#[test]
fn conjecture_refutation() {
    report(verify::conjecture_refutation());
}

#[test]
fn consistency_identities() {
    report(verify::consistency_identities());
}

#[test]
fn partition_expansion() {
    report(verify::partition_expansion());
}

#[test]
fn property_suite() {
    report(verify::property_suite());
}

#[test]
fn langevin_cross_check() {
    report(verify::langevin_cross_check());
}
