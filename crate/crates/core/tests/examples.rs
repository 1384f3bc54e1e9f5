// Every example asserts its own results; running them here keeps them honest.

#[allow(dead_code)]
#[path = "../examples/minimize.rs"]
mod minimize;
#[allow(dead_code)]
#[path = "../examples/projection.rs"]
mod projection;
#[allow(dead_code)]
#[path = "../examples/inclusion.rs"]
mod inclusion;
#[allow(dead_code)]
#[path = "../examples/convex_hull.rs"]
mod convex_hull;
#[allow(dead_code)]
#[path = "../examples/assignment.rs"]
mod assignment;
#[allow(dead_code)]
#[path = "../examples/loop_analysis.rs"]
mod loop_analysis;
#[allow(dead_code)]
#[path = "../examples/simplex.rs"]
mod simplex;
#[allow(dead_code)]
#[path = "../examples/checker.rs"]
mod checker;
#[allow(dead_code)]
#[path = "../examples/replay_trace.rs"]
mod replay_trace;

#[test]
fn minimize_example() {
    minimize::run_example();
}

#[test]
fn projection_example() {
    projection::run_example();
}

#[test]
fn inclusion_example() {
    inclusion::run_example();
}

#[test]
fn convex_hull_example() {
    convex_hull::run_example();
}

#[test]
fn assignment_example() {
    assignment::run_example();
}

#[test]
fn loop_analysis_example() {
    loop_analysis::run_example();
}

#[test]
fn simplex_example() {
    simplex::run_example();
}

#[test]
fn checker_example() {
    checker::run_example();
}

#[test]
fn replay_trace_example() {
    replay_trace::run_example();
}
