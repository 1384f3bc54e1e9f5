//! The incremental simplex: feasibility, Farkas witnesses, and retraction.

use polycert::constraint::{Constraint, ConstraintId};
use polycert::simplex::{SimplexOutcome, SimplexProblem};

pub fn run_example() {
    let cs: Vec<(ConstraintId, Constraint)> = ["x0 + x1 <= 2", "x0 - x1 >= 1", "x1 >= 0"]
        .iter()
        .enumerate()
        .map(|(i, c)| (ConstraintId(i as u64), c.parse().expect("constraint")))
        .collect();
    let mut s = SimplexProblem::build(cs.iter().map(|(id, c)| (*id, c)));
    match s.solve() {
        SimplexOutcome::Feasible(pt) => println!("feasible at {pt:?}"),
        SimplexOutcome::Infeasible(_) => panic!("system is feasible"),
    }

    let extra: Constraint = "x0 > 2".parse().unwrap();
    s.add_constraint(ConstraintId(9), &extra);
    let SimplexOutcome::Infeasible(w) = s.solve() else { panic!("system is infeasible") };
    println!("witness: {w:?}");
    assert!(w.coefficient(ConstraintId(9)) > polycert::numeric::Rational::zero());

    s.remove_constraint(ConstraintId(9));
    assert!(s.solve().is_feasible());
    assert!(s.invariant_holds());
    println!("{} pivots", s.pivot_count());
}

fn main() {
    run_example();
}
