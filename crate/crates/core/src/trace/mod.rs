//! Operation traces: text format, replay engine and run statistics.
//!
//! One operation per line, `#` starts a comment:
//!
//! ```text
//! P := poly 2 { 1*x1 <= 1; 2*x0 + 1*x1 <= 2; -1*x0 + -1*x1 <= 1 }
//! Q := project P x0
//! R := meet P Q
//! S := join P Q
//! W := widen P S
//! T := assign P x0 := x0 + 1, x1 := x0
//! incl P S true
//! assert_eq S S
//! ```

pub mod gen;
pub mod oracle;

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::checker::CheckOutcome;
use crate::constraint::{parse_var, Constraint};
use crate::domain::{CertifiedResult, FmStep, LinExpr, Polyhedron};
use crate::numeric::Var;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceOp {
    Define { name: String, nvars: usize, constraints: Vec<Constraint> },
    Meet { dst: String, a: String, b: String },
    Join { dst: String, a: String, b: String },
    Widen { dst: String, a: String, b: String },
    Project { dst: String, a: String, vars: Vec<Var> },
    Assign { dst: String, a: String, assigns: Vec<(Var, LinExpr)> },
    Incl { a: String, b: String, expected: Option<bool> },
    AssertEq { a: String, b: String },
}

impl TraceOp {
    pub fn kind(&self) -> &'static str {
        match self {
            TraceOp::Define { .. } => "define",
            TraceOp::Meet { .. } => "meet",
            TraceOp::Join { .. } => "join",
            TraceOp::Widen { .. } => "widen",
            TraceOp::Project { .. } => "project",
            TraceOp::Assign { .. } => "assign",
            TraceOp::Incl { .. } => "incl",
            TraceOp::AssertEq { .. } => "assert_eq",
        }
    }

    fn operands(&self) -> Vec<&str> {
        match self {
            TraceOp::Define { .. } => vec![],
            TraceOp::Meet { a, b, .. }
            | TraceOp::Join { a, b, .. }
            | TraceOp::Widen { a, b, .. }
            | TraceOp::Incl { a, b, .. }
            | TraceOp::AssertEq { a, b } => vec![a, b],
            TraceOp::Project { a, .. } | TraceOp::Assign { a, .. } => vec![a],
        }
    }

    fn target(&self) -> Option<&str> {
        match self {
            TraceOp::Define { name: dst, .. }
            | TraceOp::Meet { dst, .. }
            | TraceOp::Join { dst, .. }
            | TraceOp::Widen { dst, .. }
            | TraceOp::Project { dst, .. }
            | TraceOp::Assign { dst, .. } => Some(dst),
            TraceOp::Incl { .. } | TraceOp::AssertEq { .. } => None,
        }
    }
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceOp::Define { name, nvars, constraints } => {
                write!(f, "{name} := poly {nvars} {{")?;
                for (i, c) in constraints.iter().enumerate() {
                    write!(f, "{} {c}", if i > 0 { ";" } else { "" })?;
                }
                f.write_str(" }")
            }
            TraceOp::Meet { dst, a, b } => write!(f, "{dst} := meet {a} {b}"),
            TraceOp::Join { dst, a, b } => write!(f, "{dst} := join {a} {b}"),
            TraceOp::Widen { dst, a, b } => write!(f, "{dst} := widen {a} {b}"),
            TraceOp::Project { dst, a, vars } => {
                write!(f, "{dst} := project {a}")?;
                vars.iter().try_for_each(|v| write!(f, " x{v}"))
            }
            TraceOp::Assign { dst, a, assigns } => {
                write!(f, "{dst} := assign {a}")?;
                for (i, (x, e)) in assigns.iter().enumerate() {
                    write!(f, "{} x{x} := {e}", if i > 0 { "," } else { "" })?;
                }
                Ok(())
            }
            TraceOp::Incl { a, b, expected } => {
                write!(f, "incl {a} {b}")?;
                match expected {
                    Some(e) => write!(f, " {e}"),
                    None => Ok(()),
                }
            }
            TraceOp::AssertEq { a, b } => write!(f, "assert_eq {a} {b}"),
        }
    }
}

/// An operation with its 1-based source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub line: usize,
    pub op: TraceOp,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn parse_op(text: &str) -> Result<TraceOp, String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match words.as_slice() {
        ["incl", a, b] => return Ok(TraceOp::Incl { a: a.to_string(), b: b.to_string(), expected: None }),
        ["incl", a, b, e] => {
            let expected = match *e {
                "true" => true,
                "false" => false,
                _ => return Err(format!("expected `true` or `false`, found `{e}`")),
            };
            return Ok(TraceOp::Incl { a: a.to_string(), b: b.to_string(), expected: Some(expected) });
        }
        ["assert_eq", a, b] => return Ok(TraceOp::AssertEq { a: a.to_string(), b: b.to_string() }),
        _ => {}
    }
    let (dst, rhs) = text.split_once(":=").ok_or("expected `NAME := ...`, `incl` or `assert_eq`")?;
    let dst = dst.trim().to_string();
    if !is_name(&dst) {
        return Err(format!("bad name `{dst}`"));
    }
    let rhs = rhs.trim();
    let (head, rest) = rhs.split_once(char::is_whitespace).unwrap_or((rhs, ""));
    let rest = rest.trim();
    let operands: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    let two = |ctor: fn(String, String, String) -> TraceOp| match operands.as_slice() {
        [a, b] => Ok(ctor(dst.clone(), a.clone(), b.clone())),
        _ => Err(format!("`{head}` takes two operands")),
    };
    match head {
        "poly" => {
            let (n, body) = rest.split_once('{').ok_or("expected `poly N { ... }`")?;
            let nvars: usize = n.trim().parse().map_err(|_| format!("bad variable count `{}`", n.trim()))?;
            let body = body.trim().strip_suffix('}').ok_or("missing `}`")?;
            let constraints = body
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<Constraint>().map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(TraceOp::Define { name: dst, nvars, constraints })
        }
        "meet" => two(|dst, a, b| TraceOp::Meet { dst, a, b }),
        "join" => two(|dst, a, b| TraceOp::Join { dst, a, b }),
        "widen" => two(|dst, a, b| TraceOp::Widen { dst, a, b }),
        "project" => {
            let (a, vars) = operands.split_first().ok_or("`project` needs an operand")?;
            if vars.is_empty() {
                return Err("`project` needs at least one variable".into());
            }
            let vars = vars.iter().map(|v| parse_var(v)).collect::<Result<Vec<_>, _>>()?;
            Ok(TraceOp::Project { dst, a: a.clone(), vars })
        }
        "assign" => {
            let (a, body) = rest.split_once(char::is_whitespace).ok_or("`assign` needs assignments")?;
            let assigns = parse_assignments(body)?;
            Ok(TraceOp::Assign { dst, a: a.to_string(), assigns })
        }
        _ => Err(format!("unknown operation `{head}`")),
    }
}

/// `x<i> := expr` items; each `x<i> :=` starts a new item and commas
/// between items are optional.
fn parse_assignments(body: &str) -> Result<Vec<(Var, LinExpr)>, String> {
    let marks: Vec<usize> = body.match_indices(":=").map(|(i, _)| i).collect();
    if marks.is_empty() {
        return Err("`assign` needs at least one `x<i> := expr`".into());
    }
    // Start of each item: the variable token just before its `:=`.
    let starts: Vec<usize> = marks
        .iter()
        .map(|&m| body[..m].trim_end().rfind(|c: char| c.is_whitespace() || c == ',').map_or(0, |p| p + 1))
        .collect();
    if !body[..starts[0]].trim().is_empty() {
        return Err(format!("unexpected `{}`", body[..starts[0]].trim()));
    }
    let mut out = Vec::new();
    for (k, (&s, &m)) in starts.iter().zip(&marks).enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(body.len());
        let var = parse_var(&body[s..m])?;
        let expr = body[m + 2..end].trim().trim_end_matches(',').trim();
        out.push((var, expr.parse::<LinExpr>()?));
    }
    Ok(out)
}

/// Parses a trace, checking that operands are defined before use and that
/// variable indices are in range.
pub fn parse(input: &str) -> Result<Vec<TraceLine>, TraceError> {
    let mut dims: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let err = |message: String| TraceError { line, message };
        let op = parse_op(text).map_err(err)?;
        let mut dim = 0;
        for name in op.operands() {
            dim = dim.max(*dims.get(name).ok_or_else(|| err(format!("unknown name `{name}`")))?);
        }
        let max_var = match &op {
            TraceOp::Define { nvars, constraints, .. } => {
                dim = *nvars;
                constraints.iter().filter_map(|c| c.term().max_index()).max()
            }
            TraceOp::Project { vars, .. } => vars.iter().copied().max(),
            TraceOp::Assign { assigns, .. } => assigns
                .iter()
                .flat_map(|(x, e)| std::iter::once(*x).chain(e.coeffs.max_index()))
                .max(),
            _ => None,
        };
        if let Some(m) = max_var.filter(|&m| m >= dim) {
            return Err(err(format!("variable x{m} out of range (dimension {dim})")));
        }
        if let Some(t) = op.target() {
            dims.insert(t.to_string(), dim);
        }
        out.push(TraceLine { line, op });
    }
    Ok(out)
}

/// Prints a trace in the form [`parse`] reads.
pub fn print(ops: &[TraceOp]) -> String {
    ops.iter().map(|op| format!("{op}\n")).collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReplayOptions {
    /// Run every certificate through the checker.
    pub check_certs: bool,
    /// Compare results against the brute-force oracles.
    pub oracle: bool,
}

/// Oracles are run up to this many variables.
pub const ORACLE_MAX_VARS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "lowercase")]
pub enum OracleVerdict {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct OpRecord {
    pub line: usize,
    pub kind: &'static str,
    /// Sum of the constraint counts of the operands.
    pub size: usize,
    pub trivial: bool,
    pub time_ns: u128,
    pub result: Option<String>,
    pub eqs: usize,
    pub ineqs: usize,
    pub certs_checked: usize,
    pub cert_failures: Vec<String>,
    pub oracle: Option<OracleVerdict>,
    pub incl: Option<bool>,
    #[serde(skip)]
    pub fm_steps: Vec<FmStep>,
}

/// Bucket boundaries on problem size.
pub const BUCKETS: [(usize, Option<usize>); 8] = [
    (0, Some(1)),
    (2, Some(5)),
    (6, Some(10)),
    (11, Some(15)),
    (16, Some(20)),
    (21, Some(25)),
    (26, Some(30)),
    (31, None),
];

pub fn bucket_label(i: usize) -> String {
    match BUCKETS[i] {
        (lo, Some(hi)) => format!("{lo}-{hi}"),
        (lo, None) => format!("{lo}+"),
    }
}

pub fn bucket_of(size: usize) -> usize {
    BUCKETS
        .iter()
        .position(|&(lo, hi)| size >= lo && hi.is_none_or(|h| size <= h))
        .expect("buckets cover all sizes")
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BucketStats {
    pub label: String,
    pub count: usize,
    pub total_ns: u128,
    pub median_ns: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindStats {
    pub kind: String,
    pub buckets: Vec<BucketStats>,
    /// Over non-trivial operations only.
    pub count: usize,
    pub total_ns: u128,
    pub median_ns: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub records: Vec<OpRecord>,
    pub stats: Vec<KindStats>,
    pub certs_checked: usize,
    pub cert_failures: usize,
    pub oracle_failures: usize,
    pub oracle_skipped: usize,
}

fn median(mut xs: Vec<u128>) -> u128 {
    if xs.is_empty() {
        return 0;
    }
    xs.sort_unstable();
    xs[xs.len() / 2]
}

impl RunReport {
    pub fn from_records(records: Vec<OpRecord>) -> Self {
        let mut kinds: Vec<&'static str> = Vec::new();
        for r in &records {
            if !kinds.contains(&r.kind) {
                kinds.push(r.kind);
            }
        }
        let stats = kinds
            .iter()
            .map(|&k| {
                let of_kind: Vec<&OpRecord> = records.iter().filter(|r| r.kind == k).collect();
                let buckets = (0..BUCKETS.len())
                    .map(|b| {
                        let times: Vec<u128> = of_kind.iter().filter(|r| bucket_of(r.size) == b).map(|r| r.time_ns).collect();
                        BucketStats {
                            label: bucket_label(b),
                            count: times.len(),
                            total_ns: times.iter().sum(),
                            median_ns: median(times),
                        }
                    })
                    .collect();
                let counted: Vec<u128> = of_kind.iter().filter(|r| !r.trivial).map(|r| r.time_ns).collect();
                KindStats {
                    kind: k.to_string(),
                    buckets,
                    count: counted.len(),
                    total_ns: counted.iter().sum(),
                    median_ns: median(counted),
                }
            })
            .collect();
        let certs_checked = records.iter().map(|r| r.certs_checked).sum();
        let cert_failures = records.iter().map(|r| r.cert_failures.len()).sum();
        let oracle_failures = records.iter().filter(|r| matches!(r.oracle, Some(OracleVerdict::Fail(_)))).count();
        let oracle_skipped = records.iter().filter(|r| matches!(r.oracle, Some(OracleVerdict::Skipped(_)))).count();
        RunReport { records, stats, certs_checked, cert_failures, oracle_failures, oracle_skipped }
    }

    /// No certificate was rejected and no oracle disagreed.
    pub fn passed(&self) -> bool {
        self.cert_failures == 0 && self.oracle_failures == 0
    }

    /// Operation counts and median times per size bucket. Totals leave out
    /// trivial operations (size at most one).
    pub fn table(&self) -> String {
        let mut s = format!("{:<10}", "op");
        for b in 0..BUCKETS.len() {
            s += &format!(" {:>13}", bucket_label(b));
        }
        s += &format!(" {:>15}\n", "total (>1)");
        for k in &self.stats {
            s += &format!("{:<10}", k.kind);
            for b in &k.buckets {
                let cell = if b.count == 0 { "-".to_string() } else { format!("{}@{}us", b.count, b.median_ns / 1000) };
                s += &format!(" {cell:>13}");
            }
            s += &format!(" {:>15}\n", format!("{}@{}us", k.count, k.total_ns / 1000));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ReplayError {
    pub line: usize,
    pub message: String,
}

fn check_obligations<T>(r: &CertifiedResult<T>, rec: &mut OpRecord) {
    for o in &r.obligations {
        rec.certs_checked += 1;
        if let CheckOutcome::Error(e) = o.check() {
            rec.cert_failures.push(format!("{}: {e}", o.label));
        }
    }
}

fn verdict(r: Result<(), String>) -> OracleVerdict {
    match r {
        Ok(()) => OracleVerdict::Pass,
        Err(e) => OracleVerdict::Fail(e),
    }
}

fn oracle_for(op: &TraceOp, env: &HashMap<String, Polyhedron>, result: Option<&Polyhedron>, incl: Option<&Result<crate::certificate::Cert, crate::numeric::SparseVector>>) -> OracleVerdict {
    use oracle::*;
    let get = |n: &String| &env[n];
    let dim = op
        .operands()
        .iter()
        .map(|n| env[*n].dim())
        .chain(result.map(|r| r.dim()))
        .chain(match op {
            TraceOp::Define { nvars, .. } => Some(*nvars),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    if dim > ORACLE_MAX_VARS {
        return OracleVerdict::Skipped(format!("{dim} variables exceed the oracle limit of {ORACLE_MAX_VARS}"));
    }
    match (op, result) {
        (TraceOp::Define { constraints, .. }, Some(r)) => verdict(check_minimized(constraints, r)),
        (TraceOp::Meet { a, b, .. }, Some(r)) => {
            let mut input = get(a).constraints();
            input.extend(get(b).constraints());
            if get(a).is_bot() || get(b).is_bot() {
                return verdict(if r.is_bot() { Ok(()) } else { Err("meet with empty operand is non-empty".into()) });
            }
            verdict(check_minimized(&input, r))
        }
        (TraceOp::Project { a, vars, .. }, Some(r)) => {
            let p = get(a);
            if p.is_bot() {
                return verdict(if r.is_bot() { Ok(()) } else { Err("projection of empty is non-empty".into()) });
            }
            let o = naive_project(&p.constraints(), vars);
            verdict(if same_set(r, o) { Ok(()) } else { Err("differs from naive elimination".into()) })
        }
        (TraceOp::Assign { a, assigns, .. }, Some(r)) => {
            let p = get(a);
            if p.is_bot() {
                return verdict(if r.is_bot() { Ok(()) } else { Err("assignment on empty is non-empty".into()) });
            }
            let o = naive_assign(&p.constraints(), r.dim(), assigns);
            verdict(if same_set(r, o) { Ok(()) } else { Err("differs from naive assignment".into()) })
        }
        (TraceOp::Join { a, b, .. }, Some(r)) => verdict(check_hull(get(a), get(b), r)),
        (TraceOp::Widen { a, b, .. }, Some(r)) => {
            let ok = get(a).incl(r).is_some() && (!get(a).incl(get(b)).is_some() || get(b).incl(r).is_some());
            verdict(if ok { Ok(()) } else { Err("widening does not contain its operands".into()) })
        }
        (TraceOp::Incl { a, b, .. }, _) => match incl {
            Some(Err(pt)) => verdict(if get(a).satisfies(pt) && !get(b).satisfies(pt) {
                Ok(())
            } else {
                Err("counterexample does not separate the operands".into())
            }),
            _ => OracleVerdict::Pass,
        },
        _ => OracleVerdict::Skipped("no oracle".into()),
    }
}

/// Executes a parsed trace. Timings cover the domain operation only.
pub fn replay(ops: &[TraceLine], options: ReplayOptions) -> Result<RunReport, ReplayError> {
    let mut env: HashMap<String, Polyhedron> = HashMap::new();
    let mut records = Vec::new();
    for TraceLine { line, op } in ops {
        let line = *line;
        let fail = |message: String| ReplayError { line, message };
        for n in op.operands() {
            if !env.contains_key(n) {
                return Err(fail(format!("unknown name `{n}`")));
            }
        }
        let size = match op {
            TraceOp::Define { constraints, .. } => constraints.len(),
            _ => op.operands().iter().map(|n| env[*n].num_constraints()).sum(),
        };
        let mut rec = OpRecord {
            line,
            kind: op.kind(),
            size,
            trivial: size <= 1,
            time_ns: 0,
            result: None,
            eqs: 0,
            ineqs: 0,
            certs_checked: 0,
            cert_failures: Vec::new(),
            oracle: None,
            incl: None,
            fm_steps: Vec::new(),
        };
        let start = Instant::now();
        let mut incl_outcome = None;
        let certified: Option<CertifiedResult> = match op {
            TraceOp::Define { nvars, constraints, .. } => Some(Polyhedron::minimize(*nvars, constraints.clone())),
            TraceOp::Meet { a, b, .. } => Some(env[a].meet(&env[b])),
            TraceOp::Join { a, b, .. } => Some(env[a].join(&env[b])),
            TraceOp::Project { a, vars, .. } => Some(env[a].project(vars)),
            TraceOp::Assign { a, assigns, .. } => Some(env[a].assign(assigns)),
            TraceOp::Widen { a, b, .. } => {
                let w = env[a].widen(&env[b]);
                Some(CertifiedResult { value: w, obligations: Vec::new(), fm_steps: Vec::new() })
            }
            TraceOp::Incl { a, b, .. } => {
                incl_outcome = Some(env[a].incl_explain(&env[b]));
                None
            }
            TraceOp::AssertEq { .. } => None,
        };
        rec.time_ns = start.elapsed().as_nanos();

        match op {
            TraceOp::Incl { a, b, expected } => {
                let outcome = incl_outcome.as_ref().expect("computed above");
                let holds = outcome.is_ok();
                rec.incl = Some(holds);
                if let (true, Ok(cert)) = (options.check_certs, outcome) {
                    rec.certs_checked += 1;
                    if let CheckOutcome::Error(e) = crate::checker::check(&env[a].to_checker(), &env[b].to_checker(), cert) {
                        rec.cert_failures.push(format!("incl: {e}"));
                    }
                }
                if let Some(e) = expected.filter(|e| *e != holds) {
                    return Err(fail(format!("incl {a} {b}: expected {e}, got {holds}")));
                }
            }
            TraceOp::AssertEq { a, b }
                if !env[a].same_as(&env[b]) => {
                    return Err(fail(format!("assert_eq {a} {b}: `{}` differs from `{}`", env[a], env[b])));
                }
            _ => {}
        }
        if let Some(r) = &certified {
            rec.result = Some(r.value.to_string());
            rec.eqs = r.value.equalities().len();
            rec.ineqs = r.value.inequalities().len();
            rec.fm_steps = r.fm_steps.clone();
            if options.check_certs {
                check_obligations(r, &mut rec);
            }
        }
        if options.oracle && !matches!(op, TraceOp::AssertEq { .. }) {
            rec.oracle = Some(oracle_for(op, &env, certified.as_ref().map(|r| &r.value), incl_outcome.as_ref()));
        }
        if let (Some(t), Some(r)) = (op.target(), certified) {
            env.insert(t.to_string(), r.value);
        }
        records.push(rec);
    }
    Ok(RunReport::from_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROJECTION: &str = "P := poly 2 { 1*x1 <= 1; 2*x0 + 1*x1 <= 2; -1*x0 + -1*x1 <= 1 }\nQ := project P x0\n";

    #[test]
    fn parse_define() {
        let ops = parse(PROJECTION).unwrap();
        assert_eq!(ops.len(), 2);
        match &ops[0].op {
            TraceOp::Define { name, nvars, constraints } => {
                assert_eq!((name.as_str(), *nvars, constraints.len()), ("P", 2, 3));
            }
            o => panic!("{o:?}"),
        }
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = parse("\nQ := join P P\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("unknown name"));
        let e = parse("P := poly 1 { x1 <= 0 }").unwrap_err();
        assert!(e.message.contains("out of range"));
        let e = parse("P := poly 1 { x0 <= 0 }\nQ := frobnicate P").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn assignment_lists() {
        let ops = parse("P := poly 2 { x0 <= 1 }\nQ := assign P x0 := x0 + 1, x1 := -x0 - 2\nR := assign P x1 := x0 x0 := 3").unwrap();
        let TraceOp::Assign { assigns, .. } = &ops[1].op else { panic!() };
        assert_eq!(assigns.len(), 2);
        assert_eq!(assigns[1].1, "-1*x0 - 2".parse().unwrap());
        let TraceOp::Assign { assigns, .. } = &ops[2].op else { panic!() };
        assert_eq!(assigns[0].0, 1);
        assert_eq!(assigns[1].1, "3".parse().unwrap());
    }

    #[test]
    fn print_parse_roundtrip() {
        let text = "P := poly 2 { 1*x1 <= 1; 2*x0 + 1*x1 < 2; 1*x0 = 0 }\nQ := project P x0 x1\nR := meet P Q\nS := join P R\nW := widen P S\nT := assign P x0 := 1*x0 + 1, x1 := 1*x0 - 1/2\nincl P S true\nincl P S\nassert_eq S S\n";
        let ops: Vec<TraceOp> = parse(text).unwrap().into_iter().map(|l| l.op).collect();
        let printed = print(&ops);
        let again: Vec<TraceOp> = parse(&printed).unwrap().into_iter().map(|l| l.op).collect();
        assert_eq!(ops, again);
        assert_eq!(print(&again), printed);
    }

    #[test]
    fn replay_projection() {
        let report = replay(&parse(PROJECTION).unwrap(), ReplayOptions { check_certs: true, oracle: true }).unwrap();
        assert_eq!(report.records[1].result.as_deref(), Some("{ -1*x1 <= 4; 1*x1 <= 1 }"));
        assert!(report.passed());
        assert_eq!(report.certs_checked, 2);
    }

    #[test]
    fn replay_assertion_failure() {
        let e = replay(&parse("P := poly 1 { x0 <= 1 }\nQ := poly 1 { x0 <= 2 }\nincl Q P true").unwrap(), ReplayOptions::default()).unwrap_err();
        assert_eq!(e.line, 3);
        let e = replay(&parse("P := poly 1 { x0 <= 1 }\nQ := poly 1 { x0 <= 2 }\nassert_eq P Q").unwrap(), ReplayOptions::default()).unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn buckets() {
        let expect = [(0, "0-1"), (1, "0-1"), (2, "2-5"), (5, "2-5"), (6, "6-10"), (10, "6-10"), (11, "11-15"), (20, "16-20"), (21, "21-25"), (30, "26-30"), (31, "31+"), (400, "31+")];
        for (size, label) in expect {
            assert_eq!(bucket_label(bucket_of(size)), label, "size {size}");
        }
    }

    proptest::proptest! {
        #[test]
        fn generated_traces_roundtrip(seed in proptest::prelude::any::<u64>(), profile in 0usize..4, nops in 1usize..40) {
            let profile = [gen::Profile::Box, gen::Profile::Octagon, gen::Profile::LoopChain, gen::Profile::Mixed][profile];
            let ops = gen::gen(seed, profile, nops);
            let printed = print(&ops);
            let again: Vec<TraceOp> = parse(&printed).unwrap().into_iter().map(|l| l.op).collect();
            proptest::prop_assert_eq!(&ops, &again);
        }
    }
}
