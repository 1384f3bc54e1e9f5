//! Deterministic random traces.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TraceOp;
use crate::constraint::{Cmp, Constraint};
use crate::domain::{LinExpr, Polyhedron};
use crate::numeric::{int, Rational, SparseVector, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Interval constraints `±x <= c`.
    Box,
    /// Two-variable constraints `±x ±y <= c`.
    Octagon,
    /// Abstract iteration of small loops up to a widened fixpoint.
    LoopChain,
    /// Arbitrary dense constraints and every operator.
    Mixed,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "box" => Ok(Profile::Box),
            "octagon" => Ok(Profile::Octagon),
            "loop-chain" => Ok(Profile::LoopChain),
            "mixed" => Ok(Profile::Mixed),
            _ => Err(format!("unknown profile `{s}` (expected box, octagon, loop-chain or mixed)")),
        }
    }
}

/// Shape of randomly generated constraint systems.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub nvars: usize,
    pub max_constraints: usize,
    /// Coefficients and bounds are drawn from `[-coeff, coeff]`.
    pub coeff: i64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { nvars: 4, max_constraints: 8, coeff: 10 }
    }
}

fn random_cmp(rng: &mut impl Rng) -> Cmp {
    match rng.gen_range(0..10) {
        0 => Cmp::Eq,
        1 | 2 => Cmp::Lt,
        _ => Cmp::Le,
    }
}

/// A constraint with a non-zero term over at most `shape.nvars` variables.
pub fn random_constraint(rng: &mut impl Rng, shape: &Shape) -> Constraint {
    loop {
        let mut term = SparseVector::new();
        for v in 0..shape.nvars {
            if rng.gen_bool(0.6) {
                term.set(v, int(rng.gen_range(-shape.coeff..=shape.coeff)));
            }
        }
        if term.is_empty() {
            continue;
        }
        let bound = int(rng.gen_range(-shape.coeff..=shape.coeff));
        return Constraint::new(term, random_cmp(rng), bound);
    }
}

pub fn random_constraints(rng: &mut impl Rng, shape: &Shape) -> Vec<Constraint> {
    let n = rng.gen_range(1..=shape.max_constraints);
    (0..n).map(|_| random_constraint(rng, shape)).collect()
}

/// A constraint system that is usually non-empty: bounds are shifted so a
/// random integer point satisfies every constraint, then a few are
/// tightened past it.
pub fn random_feasible_constraints(rng: &mut impl Rng, shape: &Shape) -> Vec<Constraint> {
    let point = SparseVector::from_entries((0..shape.nvars).map(|v| (v, int(rng.gen_range(-3..=3)))));
    random_constraints(rng, shape)
        .into_iter()
        .map(|c| {
            let at = c.term().dot(&point);
            let slack = int(rng.gen_range(0..=shape.coeff / 2));
            let bound = match c.cmp() {
                Cmp::Eq => at,
                Cmp::Le => at + slack,
                Cmp::Lt => at + slack + int(1),
            };
            Constraint::new(c.term().clone(), c.cmp(), bound)
        })
        .collect()
}

fn random_box(rng: &mut impl Rng, nvars: usize) -> Vec<Constraint> {
    let mut cs = Vec::new();
    for v in 0..nvars {
        let lo = rng.gen_range(-10..=5);
        let hi = lo + rng.gen_range(0..=10);
        if rng.gen_bool(0.9) {
            cs.push(Constraint::le(SparseVector::from_ints(&[(v, -1)]), int(-lo)));
        }
        if rng.gen_bool(0.9) {
            cs.push(Constraint::le(SparseVector::from_ints(&[(v, 1)]), int(hi)));
        }
    }
    cs
}

fn random_octagon(rng: &mut impl Rng, nvars: usize) -> Vec<Constraint> {
    let mut cs = random_box(rng, nvars);
    for _ in 0..rng.gen_range(1..=nvars * 2) {
        let i = rng.gen_range(0..nvars);
        let j = rng.gen_range(0..nvars);
        if i == j {
            continue;
        }
        let si = if rng.gen_bool(0.5) { 1 } else { -1 };
        let sj = if rng.gen_bool(0.5) { 1 } else { -1 };
        cs.push(Constraint::le(SparseVector::from_ints(&[(i, si), (j, sj)]), int(rng.gen_range(0..=15))));
    }
    cs
}

pub fn random_linexpr(rng: &mut impl Rng, shape: &Shape) -> LinExpr {
    let mut coeffs = SparseVector::new();
    for v in 0..shape.nvars {
        if rng.gen_bool(0.4) {
            coeffs.set(v, int(rng.gen_range(-3..=3)));
        }
    }
    LinExpr::new(coeffs, int(rng.gen_range(-5..=5)))
}

pub fn random_assignments(rng: &mut impl Rng, shape: &Shape) -> Vec<(Var, LinExpr)> {
    let mut targets: Vec<Var> = (0..shape.nvars).collect();
    targets.shuffle(rng);
    targets.truncate(rng.gen_range(1..=shape.nvars.min(2)));
    targets.into_iter().map(|x| (x, random_linexpr(rng, shape))).collect()
}

struct Builder {
    ops: Vec<TraceOp>,
    names: Vec<String>,
}

impl Builder {
    fn fresh(&mut self) -> String {
        let n = format!("P{}", self.names.len());
        self.names.push(n.clone());
        n
    }

    fn define(&mut self, nvars: usize, constraints: Vec<Constraint>) -> String {
        let name = self.fresh();
        self.ops.push(TraceOp::Define { name: name.clone(), nvars, constraints });
        name
    }

    /// One of the most recent names, so chains of operations build up.
    fn pick(&self, rng: &mut impl Rng) -> String {
        let k = self.names.len();
        self.names[rng.gen_range(k.saturating_sub(4)..k)].clone()
    }
}

/// Generates `nops` operations. The same seed and profile always give the
/// same trace.
pub fn gen(seed: u64, profile: Profile, nops: usize) -> Vec<TraceOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match profile {
        Profile::LoopChain => loop_chain(&mut rng, nops),
        _ => general(&mut rng, profile, nops, &Shape::default()),
    }
}

/// Random operations over `shape`; for criterion-style stress runs.
pub fn general(rng: &mut impl Rng, profile: Profile, nops: usize, shape: &Shape) -> Vec<TraceOp> {
    let mut b = Builder { ops: Vec::new(), names: Vec::new() };
    let n = shape.nvars;
    let define = |rng: &mut ChaCha8Rng| match profile {
        Profile::Box => random_box(rng, n),
        Profile::Octagon => random_octagon(rng, n),
        _ if rng.gen_bool(0.5) => random_feasible_constraints(rng, shape),
        _ => random_constraints(rng, shape),
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    while b.ops.len() < nops {
        if b.names.len() < 2 || local.gen_bool(0.25) {
            let cs = define(&mut local);
            b.define(n, cs);
            continue;
        }
        let a = b.pick(&mut local);
        let c = b.pick(&mut local);
        let op = match local.gen_range(0..7) {
            0 => TraceOp::Meet { dst: b.fresh(), a, b: c },
            1 => TraceOp::Join { dst: b.fresh(), a, b: c },
            2 => TraceOp::Widen { dst: b.fresh(), a, b: c },
            3 => {
                let mut vars: Vec<Var> = (0..n).collect();
                vars.shuffle(&mut local);
                vars.truncate(local.gen_range(1..=2));
                TraceOp::Project { dst: b.fresh(), a, vars }
            }
            4 => {
                let assigns = random_assignments(&mut local, shape);
                TraceOp::Assign { dst: b.fresh(), a, assigns }
            }
            _ => TraceOp::Incl { a, b: c, expected: None },
        };
        b.ops.push(op);
    }
    b.ops
}

/// Loops of the form `while guard { body }` over two or three counters,
/// iterated with join and widening until the head is stable. Each chain
/// ends with an `incl ... true` asserting the fixpoint.
fn loop_chain(rng: &mut ChaCha8Rng, nops: usize) -> Vec<TraceOp> {
    let mut b = Builder { ops: Vec::new(), names: Vec::new() };
    while b.ops.len() < nops {
        let n = rng.gen_range(2..=3);
        let shape = Shape { nvars: n, max_constraints: 2, coeff: 10 };
        let init: Vec<Constraint> = (0..n)
            .map(|v| Constraint::eq(SparseVector::unit(v), int(rng.gen_range(0..=3))))
            .collect();
        let limit = rng.gen_range(5..=50);
        let guard = vec![Constraint::le(SparseVector::unit(0), int(limit))];
        // x0 counts up; the others move by affine updates.
        let mut assigns = vec![(0, LinExpr::new(SparseVector::unit(0), int(rng.gen_range(1..=2))))];
        for v in 1..n {
            let mut e = random_linexpr(rng, &shape);
            e.coeffs.set(v, Rational::one());
            assigns.push((v, e));
        }

        let mut head_poly = Polyhedron::minimize(n, init.clone()).value;
        let mut head = b.define(n, init);
        let guard_name = b.define(n, guard.clone());
        let guard_poly = Polyhedron::minimize(n, guard).value;
        for iter in 0.. {
            let inside = b.fresh();
            b.ops.push(TraceOp::Meet { dst: inside.clone(), a: head.clone(), b: guard_name.clone() });
            let inside_poly = head_poly.meet(&guard_poly).value;
            let stepped = b.fresh();
            b.ops.push(TraceOp::Assign { dst: stepped.clone(), a: inside, assigns: assigns.clone() });
            let stepped_poly = inside_poly.assign(&assigns).value;
            if stepped_poly.incl(&head_poly).is_some() || iter >= 8 {
                b.ops.push(TraceOp::Incl { a: stepped, b: head.clone(), expected: Some(stepped_poly.incl(&head_poly).is_some()) });
                break;
            }
            let joined = b.fresh();
            b.ops.push(TraceOp::Join { dst: joined.clone(), a: head.clone(), b: stepped });
            let joined_poly = head_poly.join(&stepped_poly).value;
            // One plain join step before widening kicks in.
            if iter == 0 {
                head = joined;
                head_poly = joined_poly;
            } else {
                let next = b.fresh();
                b.ops.push(TraceOp::Widen { dst: next.clone(), a: head.clone(), b: joined });
                head_poly = head_poly.widen(&joined_poly);
                head = next;
            }
        }
    }
    b.ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{parse, print, replay, ReplayOptions};

    #[test]
    fn deterministic() {
        for p in [Profile::Box, Profile::Octagon, Profile::LoopChain, Profile::Mixed] {
            assert_eq!(gen(7, p, 40), gen(7, p, 40));
        }
        assert_ne!(gen(7, Profile::Mixed, 40), gen(8, Profile::Mixed, 40));
    }

    #[test]
    fn generated_traces_replay() {
        for p in [Profile::Box, Profile::Octagon, Profile::LoopChain, Profile::Mixed] {
            let text = print(&gen(3, p, 60));
            let ops = parse(&text).unwrap();
            let report = replay(&ops, ReplayOptions { check_certs: true, oracle: false }).unwrap();
            assert!(report.passed(), "{p:?}");
        }
    }

    #[test]
    fn loop_chains_reach_fixpoints() {
        let ops = gen(11, Profile::LoopChain, 30);
        assert!(ops.iter().any(|op| matches!(op, TraceOp::Incl { expected: Some(true), .. })));
    }
}
