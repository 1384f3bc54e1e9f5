//! Existential projection by Fourier–Motzkin elimination.

use polycert::constraint::Constraint;
use polycert::domain::Polyhedron;

pub fn run_example() {
    let cs: Vec<Constraint> = ["x1 <= x0 + 1", "x0 <= 0", "x1 >= -4 - x0", "x0 >= -2"]
        .iter()
        .map(|c| c.parse().expect("constraint"))
        .collect();
    let p = Polyhedron::minimize(2, cs).value;
    let r = p.project(&[0]);
    println!("{p}  projected on x1: {}", r.value);
    for s in &r.fm_steps {
        println!("  step: {s:?}");
    }
    let expected = Polyhedron::minimize(2, vec!["x1 <= 1".parse().unwrap(), "x1 >= -4".parse().unwrap()]).value;
    assert!(r.value.same_as(&expected));
    r.verify().expect("certificates check");
}

fn main() {
    run_example();
}
