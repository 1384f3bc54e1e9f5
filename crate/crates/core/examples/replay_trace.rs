//! Generating a synthetic trace and replaying it with certificate checks
//! and oracles.

use polycert::trace::gen::{gen, Profile};
use polycert::trace::{parse, print, replay, ReplayOptions};

pub fn run_example() {
    let text = print(&gen(3, Profile::Octagon, 30));
    let ops = parse(&text).expect("generated traces parse");
    let report = replay(&ops, ReplayOptions { check_certs: true, oracle: true }).expect("replay");
    print!("{}", report.table());
    assert!(report.passed());
}

fn main() {
    run_example();
}
