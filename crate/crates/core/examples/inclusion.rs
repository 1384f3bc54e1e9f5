//! Inclusion tests: a certificate when the inclusion holds, a separating
//! point when it does not.

use polycert::checker::check;
use polycert::domain::Polyhedron;

fn poly(dim: usize, cs: &[&str]) -> Polyhedron {
    Polyhedron::minimize(dim, cs.iter().map(|c| c.parse().expect("constraint")).collect()).value
}

pub fn run_example() {
    let small = poly(2, &["x0 >= 0", "x1 >= 0", "x0 + x1 <= 1"]);
    let big = poly(2, &["x0 >= -1", "x1 >= -1", "x0 + x1 < 3"]);

    let cert = small.incl(&big).expect("small ⊑ big");
    println!("certificate: {cert}");
    assert!(check(&small.to_checker(), &big.to_checker(), &cert).is_value());

    match big.incl_explain(&small) {
        Ok(_) => panic!("big is not included in small"),
        Err(pt) => {
            println!("counterexample: {pt:?}");
            assert!(big.satisfies(&pt) && !small.satisfies(&pt));
        }
    }
}

fn main() {
    run_example();
}
