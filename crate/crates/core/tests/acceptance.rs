//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines appear in order; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polycert::certificate::{Cert, CertFragment};
use polycert::checker::{check, CheckOutcome};
use polycert::constraint::{combine_many, Constraint, ConstraintId};
use polycert::domain::{CertifiedResult, FmStep, Polyhedron};
use polycert::numeric::{int, DeltaValue, SparseVector};
use polycert::simplex::{Side, SimplexOutcome, SimplexProblem};
use polycert::trace::gen::{random_assignments, random_constraints, random_feasible_constraints, Shape};
use polycert::trace::oracle::{check_hull, check_minimized, naive_project, same_set};
use polycert::trace::{bucket_label, parse, replay, ReplayOptions, RunReport, BUCKETS};

type Outcome = Result<String, String>;

const PROJECTION: &str = include_str!("../corpus/projection.trace");

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = replay(&parse(PROJECTION).map_err(|e| e.to_string())?, ReplayOptions { check_certs: true, oracle: true })
        .map_err(|e| e.to_string())?;
    let shown = report.records[1].result.clone().unwrap_or_default();
    if shown != "{ -1*x1 <= 4; 1*x1 <= 1 }" {
        return Err(format!("projection printed as {shown}"));
    }
    if !report.passed() {
        return Err("replay reported a failure".into());
    }

    let source: Vec<Constraint> = ["x1 <= 1", "2*x0 + x1 <= 2", "-x0 - x1 <= 1"].iter().map(|s| s.parse().unwrap()).collect();
    let p = Polyhedron::minimize(2, source).value;
    let r = p.project(&[0]);
    let ob = &r.obligations[0];
    if !ob.check().is_value() {
        return Err("checker rejected the projection certificate".into());
    }
    let lower: Constraint = "-x1 <= 4".parse().unwrap();
    let Cert::Incl(items) = &ob.cert else { return Err("expected an inclusion certificate".into()) };
    let target = ob.conclusion.constraints.iter().find(|(_, c)| *c == lower).map(|(id, _)| *id);
    let frag = items.iter().find(|(t, _)| Some(*t) == target).map(|(_, f)| f).ok_or("no item for -x1 <= 4")?;
    let coeff = |text: &str| {
        let c: Constraint = text.parse().unwrap();
        let id = ob.premise.constraints.iter().find(|(_, k)| *k == c).unwrap().0;
        frag.coefficient(id)
    };
    if frag.len() != 2 || coeff("2*x0 + x1 <= 2") != int(1) || coeff("-x0 - x1 <= 1") != int(2) {
        return Err(format!("unexpected fragment {frag}"));
    }
    let t = start.elapsed();
    if t > Duration::from_secs(1) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("{{ y <= 1, -y <= 4 }} with coefficients (1, 2), checker Value, {t:?}"))
}

/// One randomized operator call with its operands.
struct Call {
    operands: Vec<Polyhedron>,
    result: CertifiedResult,
}

fn operand(rng: &mut ChaCha8Rng, shape: &Shape, calls: &mut Vec<Call>) -> Polyhedron {
    let cs = if rng.gen_bool(0.85) { random_feasible_constraints(rng, shape) } else { random_constraints(rng, shape) };
    let r = Polyhedron::minimize(shape.nvars, cs);
    let p = r.value.clone();
    calls.push(Call { operands: Vec::new(), result: r });
    p
}

/// Every `meet`, `join`, `project`, `assign` and `incl` call, plus the
/// minimizations building their operands.
fn corpus_2(n: usize) -> (Vec<Call>, usize, Duration) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut calls = Vec::new();
    let mut incl_certs = 0;
    let mut time = Duration::ZERO;
    for i in 0..n {
        let shape = Shape { nvars: rng.gen_range(1..=4), max_constraints: 8, coeff: 10 };
        let a = operand(&mut rng, &shape, &mut calls);
        let b = operand(&mut rng, &shape, &mut calls);
        let start = Instant::now();
        let result = match i % 5 {
            0 => a.meet(&b),
            1 => a.join(&b),
            2 => {
                let vars: Vec<usize> = (0..shape.nvars).filter(|_| rng.gen_bool(0.5)).collect();
                a.project(&vars)
            }
            3 => a.assign(&random_assignments(&mut rng, &shape)),
            _ => {
                if let Some(cert) = a.incl(&b) {
                    incl_certs += 1;
                    if !check(&a.to_checker(), &b.to_checker(), &cert).is_value() {
                        panic!("inclusion certificate rejected: {a} in {b}");
                    }
                }
                time += start.elapsed();
                continue;
            }
        };
        time += start.elapsed();
        calls.push(Call { operands: vec![a, b], result });
    }
    (calls, incl_certs, time)
}

fn criterion_2(calls: &[Call], incl_certs: usize, time: Duration) -> Outcome {
    let mut checked = incl_certs;
    let mut rejected = Vec::new();
    for c in calls {
        for o in &c.result.obligations {
            checked += 1;
            if let CheckOutcome::Error(e) = o.check() {
                rejected.push(format!("{}: {e}", o.label));
            }
        }
    }
    if !rejected.is_empty() {
        return Err(format!("{} of {checked} certificates rejected, first: {}", rejected.len(), rejected[0]));
    }
    if time > Duration::from_secs(60) {
        return Err(format!("operators took {time:?}"));
    }
    Ok(format!("10000 calls, {checked} certificates accepted, operators {time:?}"))
}

fn criterion_3_and_7() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = Vec::new();
    let mut steps: Vec<FmStep> = Vec::new();
    for i in 0..1000 {
        let shape = Shape { nvars: rng.gen_range(1..=3), max_constraints: 8, coeff: 10 };
        let input = random_feasible_constraints(&mut rng, &shape);
        let p = Polyhedron::minimize(shape.nvars, input.clone()).value;
        if let Err(e) = check_minimized(&input, &p) {
            mismatches.push(format!("instance {i} minimize: {e}"));
        }
        let vars: Vec<usize> = (0..shape.nvars).filter(|_| rng.gen_bool(0.5)).collect();
        let r = p.project(&vars);
        if !same_set(&r.value, naive_project(&p.constraints(), &vars)) {
            mismatches.push(format!("instance {i} project {vars:?}"));
        }
        steps.extend(&r.fm_steps);
        let q = Polyhedron::minimize(shape.nvars, random_feasible_constraints(&mut rng, &shape)).value;
        let j = p.join(&q);
        if let Err(e) = check_hull(&p, &q, &j.value) {
            mismatches.push(format!("instance {i} join: {e}"));
        }
        steps.extend(&j.fm_steps);
    }
    let t = start.elapsed();
    let c3 = if !mismatches.is_empty() {
        Err(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))
    } else if t > Duration::from_secs(120) {
        Err(format!("took {t:?}"))
    } else {
        Ok(format!("1000 instances, minimize/project/join equal to oracles, {t:?}"))
    };
    let over: Vec<&FmStep> = steps.iter().filter(|s| s.produced > s.e0 + s.e_plus * s.e_minus).collect();
    let c7 = if over.is_empty() {
        let max = steps.iter().map(|s| s.produced).max().unwrap_or(0);
        Ok(format!("{} elimination steps within |E0| + |E+|*|E-|, largest produced {max}", steps.len()))
    } else {
        Err(format!("{} steps exceed the bound, first {:?}", over.len(), over[0]))
    };
    (c3, c7)
}

fn criterion_4(calls: &[Call]) -> Outcome {
    let mut outputs = 0;
    for c in calls {
        outputs += 1;
        let bad = c.result.value.check_invariants();
        if !bad.is_empty() {
            let ops: Vec<String> = c.operands.iter().map(|p| p.to_string()).collect();
            return Err(format!("{} from {ops:?}: {}", c.result.value, bad.join(", ")));
        }
    }
    Ok(format!("{outputs} operator outputs satisfy every representation invariant"))
}

fn mutate_frag(frag: &CertFragment, rng: &mut ChaCha8Rng, kind: usize) -> CertFragment {
    let mut pairs = frag.pairs().to_vec();
    let i = rng.gen_range(0..pairs.len());
    match kind {
        0 => pairs[i].1 = -pairs[i].1.clone(),
        1 => pairs[i].1 = &pairs[i].1 + &int(1),
        _ => {
            pairs.remove(i);
        }
    }
    CertFragment::from_pairs(pairs)
}

/// Sign flip, +1 perturbation or deletion of one coefficient, or deletion
/// of a whole item.
fn mutate(cert: &Cert, rng: &mut ChaCha8Rng, kind: usize) -> Option<Cert> {
    match cert {
        Cert::Empty(w) if !w.is_empty() && kind < 3 => Some(Cert::Empty(mutate_frag(w, rng, kind))),
        Cert::Empty(_) => None,
        Cert::Incl(items) if kind == 3 => {
            if items.is_empty() {
                return None;
            }
            let mut items = items.clone();
            items.remove(rng.gen_range(0..items.len()));
            Some(Cert::Incl(items))
        }
        Cert::Incl(items) => {
            let live: Vec<usize> = (0..items.len()).filter(|&i| !items[i].1.is_empty()).collect();
            if live.is_empty() {
                return None;
            }
            let mut items = items.clone();
            let i = live[rng.gen_range(0..live.len())];
            items[i].1 = mutate_frag(&items[i].1, rng, kind);
            Some(Cert::Incl(items))
        }
    }
}

fn criterion_5(calls: &[Call]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut valid, mut total, mut rejected) = (0, 0, 0);
    let mut survivors = Vec::new();
    'outer: for c in calls.iter().filter(|c| !c.operands.is_empty()) {
        for o in &c.result.obligations {
            if o.cert.size() == 0 || !o.check().is_value() {
                continue;
            }
            valid += 1;
            for kind in 0..4 {
                let Some(m) = mutate(&o.cert, &mut rng, kind) else { continue };
                total += 1;
                if check(&o.premise, &o.conclusion, &m).is_value() {
                    survivors.push(m);
                } else {
                    rejected += 1;
                }
            }
            if valid == 1000 {
                break 'outer;
            }
        }
    }
    let rate = rejected as f64 / total.max(1) as f64;
    let line = format!("{rejected} of {total} mutants of {valid} certificates rejected ({:.1}%)", rate * 100.0);
    if valid < 1000 || rate < 0.95 {
        Err(line)
    } else {
        Ok(line)
    }
}

fn random_system(rng: &mut ChaCha8Rng) -> Vec<Constraint> {
    let shape = Shape { nvars: rng.gen_range(1..=4), max_constraints: 8, coeff: 10 };
    random_constraints(rng, &shape)
}

/// A feasible point satisfies `active`; a witness uses only `active` ids and
/// combines to a trivially false constraint.
fn certified(cons: &[Constraint], active: &[usize], out: &SimplexOutcome) -> bool {
    match out {
        SimplexOutcome::Feasible(pt) => active.iter().all(|&i| cons[i].satisfies(pt)),
        SimplexOutcome::Infeasible(w) => {
            w.coefficients.iter().all(|(id, _)| active.contains(&(id.0 as usize)))
                && combine_many(w.coefficients.iter().map(|(id, k)| (k, &cons[id.0 as usize])))
                    .is_ok_and(|(t, c, b)| Constraint::new(t, c, b).is_trivially_false())
        }
    }
}

fn fresh(cons: &[Constraint], active: &[usize]) -> SimplexOutcome {
    SimplexProblem::build(active.iter().map(|&i| (ConstraintId(i as u64), &cons[i]))).solve()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 0..5000 {
        let cons = random_system(&mut rng);
        let active: Vec<usize> = (0..cons.len()).collect();
        let out = fresh(&cons, &active);
        if !certified(&cons, &active, &out) {
            return Err(format!("system {n}: uncertified outcome {out:?} for {cons:?}"));
        }
    }
    let mut steps = 0;
    for n in 0..1000 {
        let mut cons = random_system(&mut rng);
        let mut active: Vec<usize> = (0..cons.len()).collect();
        let mut s = SimplexProblem::build(active.iter().map(|&i| (ConstraintId(i as u64), &cons[i])));
        s.solve();
        for _ in 0..rng.gen_range(4..=10) {
            steps += 1;
            let var = rng.gen_range(0..4);
            let slot = s.var_for_term(&SparseVector::unit(var)).filter(|(_, f)| *f == int(1));
            match (rng.gen_range(0..3), slot) {
                (0, Some((x, _))) => {
                    let v = int(rng.gen_range(-10..=10));
                    let upper = rng.gen_bool(0.5);
                    let (side, c) = if upper {
                        (Side::Upper, Constraint::le(SparseVector::unit(var), v.clone()))
                    } else {
                        (Side::Lower, Constraint::le(SparseVector::unit(var).neg(), -&v))
                    };
                    let id = cons.len();
                    cons.push(c);
                    active.push(id);
                    s.set_bound(x, side, ConstraintId(id as u64), Some(DeltaValue::real(v)));
                }
                (1, _) if !active.is_empty() => {
                    let id = active.swap_remove(rng.gen_range(0..active.len()));
                    s.remove_constraint(ConstraintId(id as u64));
                }
                _ => {
                    let shape = Shape { nvars: 4, max_constraints: 1, coeff: 10 };
                    let id = cons.len();
                    cons.push(random_constraints(&mut rng, &shape).remove(0));
                    active.push(id);
                    s.add_constraint(ConstraintId(id as u64), &cons[id]);
                }
            }
            let a = s.solve();
            let b = fresh(&cons, &active);
            let agree = a.is_feasible() == b.is_feasible();
            let cert = certified(&cons, &active, &a);
            let inv = s.invariant_holds();
            if !(agree && cert && inv) {
                let sys: Vec<String> = active.iter().map(|&i| format!("#{i} {}", cons[i])).collect();
                return Err(format!(
                    "sequence {n}: incremental {a:?} vs fresh {b:?} (agree {agree}, certified {cert}, invariant {inv}) over {sys:?}"
                ));
            }
        }
    }
    Ok(format!("5000 systems certified, 1000 incremental sequences ({steps} steps) agree with fresh solves"))
}

fn criterion_8() -> Outcome {
    let labels: Vec<String> = (0..BUCKETS.len()).map(bucket_label).collect();
    let expected = ["0-1", "2-5", "6-10", "11-15", "16-20", "21-25", "26-30", "31+"];
    if labels != expected {
        return Err(format!("bucket labels {labels:?}"));
    }
    let ops = polycert::trace::gen::gen(8, polycert::trace::gen::Profile::Mixed, 300);
    let text = polycert::trace::print(&ops);
    let report: RunReport = replay(&parse(&text).unwrap(), ReplayOptions::default()).map_err(|e| e.to_string())?;
    let trivial = report.records.iter().filter(|r| r.trivial).count();
    if trivial == 0 {
        return Err("corpus has no trivial operation to exclude".into());
    }
    for k in &report.stats {
        let mine: Vec<_> = report.records.iter().filter(|r| r.kind == k.kind).collect();
        let counted: Vec<_> = mine.iter().filter(|r| r.size > 1).collect();
        let total: u128 = counted.iter().map(|r| r.time_ns).sum();
        let bucketed: usize = k.buckets.iter().map(|b| b.count).sum();
        if k.count != counted.len() || k.total_ns != total || bucketed != mine.len() {
            return Err(format!("totals for {} include trivial operations", k.kind));
        }
    }
    if !report.table().lines().next().is_some_and(|h| expected.iter().all(|l| h.contains(l))) {
        return Err("table header lacks a bucket".into());
    }
    Ok(format!("8 size buckets, {trivial} trivial operations bucketed but left out of totals"))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut line = |n: usize, o: Outcome| {
        match &o {
            Ok(m) => println!("criterion {n}: PASS  {m}"),
            Err(m) => println!("criterion {n}: FAIL  {m}"),
        }
        results.push((n, o));
    };
    line(1, criterion_1());
    let (calls, incl_certs, time) = corpus_2(10_000);
    line(2, criterion_2(&calls, incl_certs, time));
    let (c3, c7) = criterion_3_and_7();
    line(3, c3);
    line(4, criterion_4(&calls));
    line(5, criterion_5(&calls));
    line(6, criterion_6());
    line(7, c7);
    line(8, criterion_8());
    let failed = results.iter().filter(|(_, o)| o.is_err()).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
