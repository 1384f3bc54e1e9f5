//! The standalone checker on hand-written certificates, accepted and
//! rejected.

use polycert::certificate::Cert;
use polycert::checker::{check, CheckOutcome, CheckerPolyhedron};

pub fn run_example() {
    let p1: CheckerPolyhedron = "1: x0 <= 1; 2: x1 <= 2".parse().expect("premise");
    let p2: CheckerPolyhedron = "7: x0 + x1 <= 4".parse().expect("conclusion");

    let good: Cert = "incl { 7: [(1, 1), (1, 2)] }".parse().expect("cert");
    let outcome = check(&p1, &p2, &good);
    println!("{good}  =>  {outcome:?}");
    assert!(outcome.is_value());

    let bad: Cert = "incl { 7: [(1, 1), (-1, 2)] }".parse().expect("cert");
    let outcome = check(&p1, &p2, &bad);
    println!("{bad}  =>  {outcome:?}");
    assert!(matches!(outcome, CheckOutcome::Error(_)));
}

fn main() {
    run_example();
}
