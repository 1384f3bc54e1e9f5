//! Invariant inference for `i = 0; j = 10; while i < j { i += 1; j -= 1 }`
//! by Kleene iteration with widening.

use polycert::domain::{LinExpr, Polyhedron};

fn poly(dim: usize, cs: &[&str]) -> Polyhedron {
    Polyhedron::minimize(dim, cs.iter().map(|c| c.parse().expect("constraint")).collect()).value
}

pub fn run_example() {
    let init = poly(2, &["x0 = 0", "x1 = 10"]);
    let guard = poly(2, &["x0 < x1"]);
    let step: [(usize, LinExpr); 2] = [(0, "x0 + 1".parse().unwrap()), (1, "x1 - 1".parse().unwrap())];

    let mut head = init.clone();
    for round in 0.. {
        let body = head.meet(&guard).value.assign(&step).value;
        let next = init.join(&body).value;
        let widened = if round < 2 { next.clone() } else { head.widen(&next) };
        println!("round {round}: {widened}");
        if widened.incl(&head).is_some() {
            break;
        }
        head = widened;
    }
    // x0 + x1 = 10 survives widening.
    assert!(head.entails(&"x0 + x1 = 10".parse().unwrap()));
    assert!(head.entails(&"x0 >= 0".parse().unwrap()));
    let exit = head.meet(&poly(2, &["x0 >= x1"])).value;
    println!("at exit: {exit}");
}

fn main() {
    run_example();
}
