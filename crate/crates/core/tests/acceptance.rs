//! The nine acceptance criteria, one test each; every test prints one pass/fail line.

use klr::scenarios::Status;
use klr::suite::{criterion, CRITERIA};

fn run(k: usize) {
    let r = criterion(k);
    let ok = r.passed();
    println!("criterion {k} ({}): {} [{} checks, {} ms]", CRITERIA[k - 1], if ok { "pass" } else { "FAIL" }, r.checks.len(), r.wall_ms);
    for c in r.checks.iter().filter(|c| c.status == Status::Fail) {
        println!("    failed: {} {}", c.name, c.details);
    }
    assert!(ok, "criterion {k} failed");
}

#[test]
fn criterion_1_relations() {
    run(1);
}

#[test]
fn criterion_2_order() {
    run(2);
}

#[test]
fn criterion_3_convolution_characters() {
    run(3);
}

#[test]
fn criterion_4_r_matrices() {
    run(4);
}

#[test]
fn criterion_5_right_braiders() {
    run(5);
}

#[test]
fn criterion_6_t_systems() {
    run(6);
}

#[test]
fn criterion_7_localization() {
    run(7);
}

#[test]
fn criterion_8_membership() {
    run(8);
}

#[test]
fn criterion_9_rigidity() {
    run(9);
}
