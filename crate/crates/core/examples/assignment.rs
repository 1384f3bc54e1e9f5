//! Parallel affine assignment, invertible and not.

use polycert::domain::{LinExpr, Polyhedron};

fn poly(dim: usize, cs: &[&str]) -> Polyhedron {
    Polyhedron::minimize(dim, cs.iter().map(|c| c.parse().expect("constraint")).collect()).value
}

pub fn run_example() {
    let p = poly(2, &["x0 >= 0", "x0 <= 5", "x1 = 2*x0"]);

    // x0 := x0 + 1 is invertible and handled by substitution.
    let shift: LinExpr = "x0 + 1".parse().expect("expr");
    let r = p.assign(&[(0, shift)]);
    println!("x0 := x0 + 1   {}", r.value);
    r.verify().expect("certificates check");
    assert!(r.value.same_as(&poly(2, &["x0 >= 1", "x0 <= 6", "x1 = 2*x0 - 2"])));

    // x1 := 3 forgets the old x1.
    let r = p.assign(&[(1, "3".parse().expect("expr"))]);
    println!("x1 := 3        {}", r.value);
    assert!(r.value.same_as(&poly(2, &["x0 >= 0", "x0 <= 5", "x1 = 3"])));

    // Swap, done in parallel.
    let r = p.assign(&[(0, "x1".parse().unwrap()), (1, "x0".parse().unwrap())]);
    println!("swap           {}", r.value);
    assert!(r.value.same_as(&poly(2, &["x1 >= 0", "x1 <= 5", "x0 = 2*x1"])));
}

fn main() {
    run_example();
}
