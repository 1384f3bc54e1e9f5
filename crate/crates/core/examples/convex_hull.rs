//! Convex hull of two polyhedra, including strictness restored from the
//! operands.

use polycert::domain::Polyhedron;
use polycert::trace::oracle::check_hull;

fn poly(dim: usize, cs: &[&str]) -> Polyhedron {
    Polyhedron::minimize(dim, cs.iter().map(|c| c.parse().expect("constraint")).collect()).value
}

pub fn run_example() {
    let a = poly(2, &["x0 = 0", "x1 >= 0", "x1 < 1"]);
    let b = poly(2, &["x0 = 2", "x1 >= 1", "x1 < 2"]);
    let r = a.join(&b);
    println!("{a}  ⊔  {b}\n  = {}", r.value);
    r.verify().expect("certificates check");
    check_hull(&a, &b, &r.value).expect("hull matches the generator oracle");
    // The top edge touches neither operand, so it stays strict.
    assert!(r.value.entails(&"2*x1 < x0 + 2".parse().unwrap()));

    // A single point absorbed by a box: the box comes back unchanged.
    let pt = poly(2, &["x0 = 1", "x1 = 1"]);
    let bx = poly(2, &["x0 >= 0", "x0 <= 3", "x1 >= 0", "x1 <= 3"]);
    assert!(pt.join(&bx).value.same_as(&bx));
}

fn main() {
    run_example();
}
