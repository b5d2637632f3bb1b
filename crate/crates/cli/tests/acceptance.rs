//! The twelve acceptance criteria, one test each, with pinned tolerances.

use std::path::Path;
use std::process::Command;

use cylas_cli::criteria::{self, VerifyConfig};

fn check(id: u32) {
    let dir = tempfile::tempdir().unwrap();
    let o = criteria::run(id, &VerifyConfig::new(dir.path()));
    println!("{}", o.line());
    assert!(o.checks_pass(), "criterion {id} failed: {}", o.line());
    assert!(o.within_budget(), "criterion {id} over budget: {}", o.line());
}

#[test]
fn criterion_01_chart_equivalence() {
    check(1);
}

#[test]
fn criterion_02_energy_structure() {
    check(2);
}

#[test]
fn criterion_03_closed_form_homoclinic() {
    check(3);
}

#[test]
fn criterion_04_period_duality() {
    check(4);
}

#[test]
fn criterion_05_decay_taxonomy() {
    check(5);
}

#[test]
fn criterion_06_orbit_stability() {
    check(6);
}

#[test]
fn criterion_07_pde_symmetrization() {
    check(7);
}

#[test]
fn criterion_08_laplace_beltrami_eigen() {
    check(8);
}

#[test]
fn criterion_09_bubble_and_kelvin() {
    check(9);
}

#[test]
fn criterion_10_exponent_identity() {
    check(10);
}

#[test]
fn criterion_11_symmetry_condition() {
    check(11);
}

fn verify_into(out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_cylas"))
        .args(["verify", "--only", "1,3,8,9,10,11,12", "--seed", "5", "--out"])
        .arg(out)
        .status()
        .unwrap()
        .code()
        .unwrap()
}

#[test]
fn criterion_12_determinism() {
    check(12);
    // the binary itself, twice
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(verify_into(a.path()), 0);
    assert_eq!(verify_into(b.path()), 0);
    let (count, differ) = criteria::compare_csv_trees(a.path(), b.path()).unwrap();
    println!("criterion 12 determinism (binary): {count} csv files, {} differ", differ.len());
    assert!(count > 1);
    assert!(differ.is_empty(), "differing: {differ:?}");
}
