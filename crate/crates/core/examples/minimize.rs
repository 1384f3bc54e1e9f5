//! Minimizing a redundant constraint system: implicit equalities are
//! detected, redundant rows dropped, and each step is certified.

use polycert::constraint::Constraint;
use polycert::domain::Polyhedron;

fn parse(cs: &[&str]) -> Vec<Constraint> {
    cs.iter().map(|c| c.parse().expect("constraint")).collect()
}

pub fn run_example() {
    let input = parse(&[
        "x0 + x1 <= 4",
        "x0 + x1 >= 4",
        "x0 >= 0",
        "x0 <= 10",
        "2*x0 <= 9",
        "x1 >= -3",
    ]);
    let r = Polyhedron::minimize(2, input);
    println!("minimized: {}", r.value);
    println!("{} equalities, {} inequalities", r.value.equalities().len(), r.value.inequalities().len());
    assert_eq!(r.value.equalities().len(), 1);
    assert!(r.value.check_invariants().is_empty());
    r.verify().expect("certificates check");
    println!("{} obligations verified", r.obligations.len());
}

fn main() {
    run_example();
}
