//! Convex polyhedra in constraints-only form with certifying operators.
//!
//! A non-empty [`Polyhedron`] is kept minimized:
//! - equalities are in reduced echelon form, each defining its
//!   highest-index variable, which occurs nowhere else;
//! - inequalities mention no defined variable, contain no implicit equality
//!   and no redundant constraint;
//! - every constraint is canonical.
//!
//! The empty polyhedron is an explicit arm carrying the contradictory source
//! constraints and a witness over them.
//!
//! Operators return a [`CertifiedResult`] whose obligations are inclusions
//! `premise ⊑ conclusion`, each with a certificate the checker can verify.

use std::collections::BTreeMap;
use std::fmt;

use crate::certificate::{init_fragments, Cert, CertFragment, TaggedConstraint};
use crate::checker::{check, CheckError, CheckOutcome, CheckerPolyhedron};
use crate::constraint::{parse_linexpr, substitute, syntactic_incl, Cmp, Constraint, ConstraintId};
use crate::numeric::{Rational, SparseVector, Var, VarNames};
use crate::simplex::{SimplexOutcome, SimplexProblem, UnsatWitness};

const PROBE: ConstraintId = ConstraintId(u64::MAX);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equality {
    pub id: ConstraintId,
    /// The variable this equality defines.
    pub var: Var,
    pub cons: Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Bot {
        core: Vec<(ConstraintId, Constraint)>,
        witness: CertFragment,
    },
    NonEmpty {
        eqs: Vec<Equality>,
        ineqs: Vec<(ConstraintId, Constraint)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    dim: usize,
    repr: Repr,
}

/// An inclusion `premise ⊑ conclusion` justified by `cert`.
#[derive(Debug, Clone)]
pub struct Obligation {
    pub label: String,
    pub premise: CheckerPolyhedron,
    pub conclusion: CheckerPolyhedron,
    pub cert: Cert,
}

impl Obligation {
    pub fn check(&self) -> CheckOutcome {
        check(&self.premise, &self.conclusion, &self.cert)
    }
}

/// One Fourier–Motzkin step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FmStep {
    pub var: Var,
    pub e0: usize,
    pub e_plus: usize,
    pub e_minus: usize,
    /// Constraints present right after the step, before pruning.
    pub produced: usize,
}

#[derive(Debug, Clone)]
pub struct CertifiedResult<T = Polyhedron> {
    pub value: T,
    pub obligations: Vec<Obligation>,
    pub fm_steps: Vec<FmStep>,
}

impl<T> CertifiedResult<T> {
    fn new(value: T, obligations: Vec<Obligation>) -> Self {
        CertifiedResult {
            value,
            obligations,
            fm_steps: Vec::new(),
        }
    }

    /// Runs the checker on every obligation.
    pub fn verify(&self) -> Result<(), (String, CheckError)> {
        for o in &self.obligations {
            if let CheckOutcome::Error(e) = o.check() {
                return Err((o.label.clone(), e));
            }
        }
        Ok(())
    }
}

/// Affine expression `coeffs·x + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinExpr {
    pub coeffs: SparseVector,
    pub constant: Rational,
}

impl LinExpr {
    pub fn new(coeffs: SparseVector, constant: Rational) -> Self {
        LinExpr { coeffs, constant }
    }

    pub fn var(x: Var) -> Self {
        LinExpr::new(SparseVector::unit(x), Rational::zero())
    }
}

impl std::str::FromStr for LinExpr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (coeffs, constant) = parse_linexpr(s)?;
        Ok(LinExpr { coeffs, constant })
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "{}", self.constant);
        }
        write!(f, "{}", self.coeffs)?;
        if self.constant.is_negative() {
            write!(f, " - {}", self.constant.abs())
        } else if !self.constant.is_zero() {
            write!(f, " + {}", self.constant)
        } else {
            Ok(())
        }
    }
}

/// Outcome of minimizing a tagged constraint list.
enum Minimized {
    Empty(CertFragment),
    NonEmpty {
        eqs: Vec<(Var, TaggedConstraint)>,
        ineqs: Vec<TaggedConstraint>,
    },
}

/// Fragment proving a false constant constraint contradictory.
fn contradiction(t: &TaggedConstraint) -> CertFragment {
    match &t.rev {
        Some(rev) if t.cons.bound().is_positive() => rev.clone(),
        _ => t.frag.clone(),
    }
}

/// Lifts a simplex witness over `work` (ids are indices) to the sources.
fn lift_witness(w: &UnsatWitness, work: &[TaggedConstraint]) -> CertFragment {
    let parts: Vec<(Rational, &TaggedConstraint)> = w
        .coefficients
        .iter()
        .map(|(id, k)| (k.clone(), &work[id.0 as usize]))
        .collect();
    let t = TaggedConstraint::combination(&parts).expect("witness signs");
    debug_assert!(t.cons.is_trivially_false());
    contradiction(&t)
}

/// `Σ k·directed(work_id)` over the witness entries other than the probe,
/// divided by the probe's coefficient.
fn lift_probe_witness(
    w: &UnsatWitness,
    work: impl Fn(ConstraintId) -> TaggedConstraint,
) -> Option<CertFragment> {
    let lambda0 = w.coefficient(PROBE);
    if !lambda0.is_positive() {
        return None;
    }
    let inv = lambda0.recip();
    Some(CertFragment::from_pairs(
        w.coefficients
            .iter()
            .filter(|(id, _)| *id != PROBE)
            .flat_map(|(id, k)| work(*id).directed(&(k * &inv)).pairs().to_vec()),
    ))
}

fn substitute_tagged(c: &TaggedConstraint, defs: &[(Var, TaggedConstraint)]) -> TaggedConstraint {
    let mut cur = c.clone();
    for (v, d) in defs {
        let a = cur.cons.term().get(*v);
        if a.is_zero() {
            continue;
        }
        let k = -(&a / &d.cons.term().get(*v));
        cur = TaggedConstraint::combination(&[(Rational::one(), &cur), (k, d)]).expect("equality coefficient");
    }
    cur
}

/// Keeps the tightest inequality among those sharing a term, and one copy of
/// each repeated equality. Order of first occurrence is preserved.
fn dedupe_parallel(list: Vec<TaggedConstraint>) -> Vec<TaggedConstraint> {
    let mut best: BTreeMap<(SparseVector, Option<Rational>), usize> = BTreeMap::new();
    let mut out: Vec<TaggedConstraint> = Vec::new();
    for t in list {
        let eq_bound = (t.cons.cmp() == Cmp::Eq).then(|| t.cons.bound().clone());
        let key = (t.cons.term().clone(), eq_bound);
        match best.get(&key) {
            Some(&i) => {
                let cur = &out[i].cons;
                let tighter = t.cons.bound() < cur.bound()
                    || (t.cons.bound() == cur.bound() && t.cons.cmp() == Cmp::Lt && cur.cmp() == Cmp::Le);
                if tighter && t.cons.cmp() != Cmp::Eq {
                    out[i] = t;
                }
            }
            None => {
                best.insert(key, out.len());
                out.push(t);
            }
        }
    }
    out
}

/// Drops trivially true constants; a false one yields its contradiction.
fn drop_constants(list: Vec<TaggedConstraint>) -> Result<Vec<TaggedConstraint>, CertFragment> {
    let mut out = Vec::with_capacity(list.len());
    for t in list {
        if t.cons.is_constant() {
            if t.cons.is_trivially_false() {
                return Err(contradiction(&t));
            }
        } else {
            out.push(t);
        }
    }
    Ok(out)
}

/// Index of the unique constraint whose hyperplane the ray `z + t·dir`
/// (`t > 0`) crosses first, given `slack[j] = b_j - a_j·z > 0`. `None` on a
/// tie or when the ray never leaves.
fn first_hit(list: &[TaggedConstraint], alive: &[bool], slack: &[Rational], dir: &SparseVector) -> Option<usize> {
    let mut first: Option<(Rational, usize, bool)> = None;
    for (j, u) in list.iter().enumerate() {
        if !alive[j] {
            continue;
        }
        let rate = u.cons.term().dot(dir);
        if !rate.is_positive() {
            continue;
        }
        let hit = &slack[j] / &rate;
        first = match first {
            Some((best, k, unique)) if hit > best => Some((best, k, unique)),
            Some((best, k, _)) if hit == best => Some((best, k, false)),
            _ => Some((hit, j, true)),
        };
    }
    first.filter(|f| f.2).map(|f| f.1)
}

/// Removes inequalities entailed by the remaining constraints. Equalities
/// are kept. `inside` is reused as the interior point when it still
/// qualifies, and holds the point used afterwards.
fn remove_redundant(list: Vec<TaggedConstraint>, inside: &mut Option<SparseVector>) -> Vec<TaggedConstraint> {
    let n_ineq = list.iter().filter(|t| t.cons.cmp() != Cmp::Eq).count();
    if n_ineq == 0 || (n_ineq == 1 && list.len() == 1) {
        return list;
    }
    let strictly_inside = |z: &SparseVector| {
        list.iter().all(|t| t.cons.cmp() != Cmp::Eq && t.cons.term().dot(z) < *t.cons.bound())
    };
    if !inside.as_ref().is_some_and(strictly_inside) {
        *inside = interior_point(&list);
    }
    let keep = match inside {
        Some(z) => redundancy_by_rays(&list, z),
        None => redundancy_by_scan(&list),
    };
    list.into_iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t).collect()
}

/// Coordinates of `z` rounded down to multiples of `2^-bits`.
fn dyadic(z: &SparseVector, bits: u32) -> SparseVector {
    let scale = Rational::from_int(1i64 << bits);
    SparseVector::from_entries(z.entries().into_iter().map(|(v, x)| {
        let scaled = x * &scale;
        let floor = num_integer::Integer::div_floor(&scaled.numer(), &scaled.denom());
        (v, Rational::from(floor) / &scale)
    }))
}

/// A point satisfying every constraint strictly, when the list is pure
/// inequalities with a non-empty interior. A floating-point guess is tried
/// before the exact simplex.
fn interior_point(list: &[TaggedConstraint]) -> Option<SparseVector> {
    if list.iter().any(|t| t.cons.cmp() == Cmp::Eq) {
        return None;
    }
    let inside = |z: &SparseVector| list.iter().all(|t| t.cons.term().dot(z) < *t.cons.bound());
    if let Some(z) = float_center(list).and_then(|z| (0..30).map(|bits| dyadic(&z, bits)).find(inside)) {
        return Some(z);
    }
    let strict: Vec<Constraint> = list.iter().map(|t| t.cons.with_cmp(Cmp::Lt)).collect();
    let z = match SimplexProblem::build(strict.iter().enumerate().map(|(i, c)| (ConstraintId(i as u64), c))).solve() {
        SimplexOutcome::Feasible(z) => z,
        SimplexOutcome::Infeasible(_) => return None,
    };
    // The simplex point can carry large denominators; a nearby dyadic point
    // with the same property keeps the ray arithmetic small.
    (0..48).map(|bits| dyadic(&z, bits)).find(inside).or(Some(z))
}

/// Row `c` over the positions of `vars`, scaled to unit max-coefficient.
fn float_row(c: &Constraint, vars: &[Var]) -> (Vec<(usize, f64)>, f64) {
    let coeffs: Vec<(usize, f64)> = c
        .term()
        .entries()
        .into_iter()
        .map(|(v, a)| (vars.binary_search(&v).expect("collected"), a.to_f64()))
        .collect();
    let norm = coeffs.iter().fold(0.0f64, |m, (_, a)| m.max(a.abs()));
    (coeffs.into_iter().map(|(v, a)| (v, a / norm)).collect(), c.bound().to_f64() / norm)
}

fn support_vars<'a>(cs: impl Iterator<Item = &'a Constraint>) -> Vec<Var> {
    let mut vars: Vec<Var> = cs.flat_map(|c| c.term().support()).collect();
    vars.sort_unstable();
    vars.dedup();
    vars
}

/// A point deep inside the constraints and close to the origin, found in
/// floating point: the largest inscribed cube (capped at unit size) is
/// located first, then the smallest point keeping half that margin. The
/// caller checks the result exactly.
fn float_center(list: &[TaggedConstraint]) -> Option<SparseVector> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let vars = support_vars(list.iter().map(|t| &t.cons));
    let rows: Vec<_> = list.iter().map(|t| float_row(&t.cons, &vars)).collect();
    let solve = |radius: f64, min_margin: Option<f64>| {
        let direction = if min_margin.is_some() { OptimizationDirection::Minimize } else { OptimizationDirection::Maximize };
        let mut prob = Problem::new(direction);
        let xs: Vec<_> = vars.iter().map(|_| prob.add_var(0.0, (-radius, radius))).collect();
        let margin = match min_margin {
            Some(m) => prob.add_var(0.0, (m, 1.0)),
            None => prob.add_var(1.0, (0.0, 1.0)),
        };
        if min_margin.is_some() {
            for x in &xs {
                let u = prob.add_var(1.0, (0.0, f64::INFINITY));
                prob.add_constraint([(u, 1.0), (*x, -1.0)].as_slice(), ComparisonOp::Ge, 0.0);
                prob.add_constraint([(u, 1.0), (*x, 1.0)].as_slice(), ComparisonOp::Ge, 0.0);
            }
        }
        for (coeffs, b) in &rows {
            let l1: f64 = coeffs.iter().map(|(_, a)| a.abs()).sum();
            let mut expr: Vec<_> = coeffs.iter().map(|(v, a)| (xs[*v], *a)).collect();
            expr.push((margin, l1));
            prob.add_constraint(expr.as_slice(), ComparisonOp::Le, *b);
        }
        let sol = prob.solve().ok()?.into_solution().ok()?;
        let point: Vec<f64> = xs.iter().map(|x| sol.var_value(*x)).collect();
        Some((sol.var_value(margin), point))
    };
    let (radius, margin) = [1e3, 1e9]
        .into_iter()
        .find_map(|r| solve(r, None).filter(|(m, _)| *m > 0.0).map(|(m, _)| (r, m)))?;
    let (_, point) = solve(radius, Some(margin / 2.0))?;
    let exact: Option<Vec<(Var, Rational)>> = vars.iter().zip(&point).map(|(v, x)| Some((*v, Rational::from_f64(*x)?))).collect();
    Some(SparseVector::from_entries(exact?))
}

/// One simplex query per inequality against all the others still present,
/// scanning in order and never reconsidering a dropped one.
fn redundancy_by_scan(list: &[TaggedConstraint]) -> Vec<bool> {
    let mut s = SimplexProblem::build(
        list.iter()
            .enumerate()
            .map(|(i, t)| (ConstraintId(i as u64), &t.cons)),
    );
    let mut keep = vec![true; list.len()];
    for (i, t) in list.iter().enumerate() {
        if t.cons.cmp() == Cmp::Eq {
            continue;
        }
        let id = ConstraintId(i as u64);
        s.remove_constraint(id);
        s.add_constraint(PROBE, &t.cons.complement().expect("inequality"));
        let redundant = !s.solve().is_feasible();
        s.remove_constraint(PROBE);
        if redundant {
            keep[i] = false;
        } else {
            s.add_constraint(id, &t.cons);
        }
    }
    keep
}

/// Redundancy removal around an interior point `z`. A ray from `z` that
/// leaves through exactly one hyperplane proves that constraint irredundant,
/// since points just past the exit violate it alone. Irredundant
/// constraints found so far form a subsystem `K`; an inequality entailed by
/// `K` is redundant. Otherwise the simplex returns a point of `K` violating
/// it, and the ray from `z` towards that point exposes a new member of `K`.
/// Each round decides the inequality or grows `K`; ties fall back to a query
/// against everything still present.
fn redundancy_by_rays(list: &[TaggedConstraint], z: &SparseVector) -> Vec<bool> {
    let n = list.len();
    let slack: Vec<Rational> = list.iter().map(|t| t.cons.bound() - &t.cons.term().dot(z)).collect();
    let mut alive = vec![true; n];
    let mut known = vec![false; n];
    let mut k = SimplexProblem::new();
    let learn = |j: usize, known: &mut Vec<bool>, k: &mut SimplexProblem| {
        if !known[j] {
            known[j] = true;
            k.add_constraint(ConstraintId(j as u64), &list[j].cons);
        }
    };
    for i in 0..n {
        while !known[i] {
            // The floating-point guess only steers the search: a point
            // becomes a ray that `first_hit` evaluates exactly, and a tight
            // set is confirmed by an exact query on that set alone.
            match float_probe(list, &known, i, z) {
                Some(FloatGuess::Outside(p)) => {
                    if let Some(j) = first_hit(list, &alive, &slack, &p.sub(z)).filter(|&j| !known[j]) {
                        learn(j, &mut known, &mut k);
                        continue;
                    }
                }
                Some(FloatGuess::Inside(tight)) => {
                    let rows: Vec<usize> = (0..n).filter(|&j| known[j]).collect();
                    if float_support(list, &rows, i).is_some_and(|s| entailed_by_combination(list, &s, i)) {
                        alive[i] = false;
                        break;
                    }
                    let mut small = SimplexProblem::build(tight.iter().map(|&j| (ConstraintId(j as u64), &list[j].cons)));
                    small.add_constraint(PROBE, &list[i].cons.complement().expect("inequality"));
                    if !small.solve().is_feasible() {
                        alive[i] = false;
                        break;
                    }
                }
                None => {}
            }
            let mut q = k.clone();
            q.add_constraint(PROBE, &list[i].cons.complement().expect("inequality"));
            let out = q.solve();
            match out {
                SimplexOutcome::Infeasible(_) => {
                    alive[i] = false;
                    break;
                }
                SimplexOutcome::Feasible(p) => match first_hit(list, &alive, &slack, &p.sub(z)) {
                    Some(j) => learn(j, &mut known, &mut k),
                    None => {
                        let mut full = SimplexProblem::build(
                            (0..n)
                                .filter(|&j| alive[j] && j != i)
                                .map(|j| (ConstraintId(j as u64), &list[j].cons)),
                        );
                        full.add_constraint(PROBE, &list[i].cons.complement().expect("inequality"));
                        if full.solve().is_feasible() {
                            learn(i, &mut known, &mut k);
                        } else {
                            alive[i] = false;
                        }
                        break;
                    }
                },
            }
        }
    }
    alive
}

/// Rows carrying weight in a basic solution of `Σ λ_j·term_j = term_i`,
/// `λ ≥ 0`, minimizing the combined bound, found in floating point.
fn float_support(list: &[TaggedConstraint], rows: &[usize], i: usize) -> Option<Vec<usize>> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let target = &list[i].cons;
    let vars = support_vars(rows.iter().map(|&j| &list[j].cons).chain([target]));
    let mut prob = Problem::new(OptimizationDirection::Minimize);
    let scaled: Vec<_> = rows.iter().map(|&j| float_row(&list[j].cons, &vars)).collect();
    let lambda: Vec<_> = scaled.iter().map(|(_, b)| prob.add_var(*b, (0.0, f64::INFINITY))).collect();
    let (obj, _) = float_row(target, &vars);
    for v in 0..vars.len() {
        let expr: Vec<_> = scaled
            .iter()
            .zip(&lambda)
            .filter_map(|((coeffs, _), l)| coeffs.iter().find(|(w, _)| *w == v).map(|(_, a)| (*l, *a)))
            .collect();
        let rhs = obj.iter().find(|(w, _)| *w == v).map_or(0.0, |(_, a)| *a);
        prob.add_constraint(expr.as_slice(), ComparisonOp::Eq, rhs);
    }
    let sol = prob.solve().ok()?.into_solution().ok()?;
    Some(rows.iter().zip(&lambda).filter(|(_, l)| sol.var_value(**l) > 1e-9).map(|(j, _)| *j).collect())
}

/// Solves `Σ λ_j·term_j = term_i` over `rows` exactly and reports whether
/// the solution is nonnegative and its combination entails `list[i]`.
/// Only a unique solution is tried.
fn entailed_by_combination(list: &[TaggedConstraint], rows: &[usize], i: usize) -> bool {
    let target = &list[i].cons;
    let vars = support_vars(rows.iter().map(|&j| &list[j].cons).chain([target]));
    let r = rows.len();
    if r > vars.len() {
        return false;
    }
    // One equation per variable, unknowns λ_j, right-hand side last.
    let mut m: Vec<Vec<Rational>> = vars
        .iter()
        .map(|&v| {
            let mut row: Vec<Rational> = rows.iter().map(|&j| list[j].cons.term().get(v)).collect();
            row.push(target.term().get(v));
            row
        })
        .collect();
    for col in 0..r {
        let Some(p) = (col..m.len()).find(|&k| !m[k][col].is_zero()) else { return false };
        m.swap(col, p);
        let inv = m[col][col].recip();
        let pivot: Vec<Rational> = m[col].iter().map(|x| x * &inv).collect();
        for (k, row) in m.iter_mut().enumerate() {
            if k != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot).skip(col) {
                    *x -= &(&f * p);
                }
            }
        }
        m[col] = pivot;
    }
    if m[r..].iter().any(|row| !row[r].is_zero()) {
        return false;
    }
    let lambda: Vec<&Rational> = m[..r].iter().map(|row| &row[r]).collect();
    if lambda.iter().any(|l| l.is_negative()) {
        return false;
    }
    let mut bound = Rational::zero();
    let mut strict = false;
    for (l, &j) in lambda.iter().zip(rows) {
        if !l.is_zero() {
            bound += &(*l * list[j].cons.bound());
            strict |= list[j].cons.cmp() == Cmp::Lt;
        }
    }
    bound < *target.bound() || (bound == *target.bound() && (strict || target.cmp() == Cmp::Le))
}

enum FloatGuess {
    /// A point of `K` that appears to violate the probed constraint.
    Outside(SparseVector),
    /// Members of `K` tight where the probed term appears maximal.
    Inside(Vec<usize>),
}

/// Maximizes the term of `list[i]` over the known constraints in floating
/// point, inside a large box around `z`.
fn float_probe(list: &[TaggedConstraint], known: &[bool], i: usize, z: &SparseVector) -> Option<FloatGuess> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let rows: Vec<usize> = (0..list.len()).filter(|&j| known[j]).collect();
    let target = &list[i].cons;
    let vars = support_vars(rows.iter().map(|&j| &list[j].cons).chain([target]));
    let center: Vec<f64> = vars.iter().map(|&v| z.get(v).to_f64()).collect();
    let radius = 1e6 * (1.0 + center.iter().fold(0.0f64, |m, c| m.max(c.abs())));
    let scaled = |c: &Constraint| float_row(c, &vars);
    let (obj, obj_bound) = scaled(target);
    let mut objective = vec![0.0; vars.len()];
    for (v, a) in &obj {
        objective[*v] = *a;
    }
    let mut prob = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..vars.len())
        .map(|v| prob.add_var(objective[v], (center[v] - radius, center[v] + radius)))
        .collect();
    let scaled_rows: Vec<_> = rows.iter().map(|&j| scaled(&list[j].cons)).collect();
    for (coeffs, b) in &scaled_rows {
        let expr: Vec<_> = coeffs.iter().map(|(v, a)| (xs[*v], *a)).collect();
        prob.add_constraint(expr.as_slice(), ComparisonOp::Le, *b);
    }
    let sol = prob.solve().ok()?.into_solution().ok()?;
    let point: Vec<f64> = xs.iter().map(|x| sol.var_value(*x)).collect();
    let value = |coeffs: &[(usize, f64)]| coeffs.iter().map(|(v, a)| a * point[*v]).sum::<f64>();
    let tol = 1e-7 * (1.0 + obj_bound.abs());
    if value(&obj) > obj_bound + tol {
        let exact: Option<Vec<(Var, Rational)>> = vars.iter().zip(&point).map(|(v, x)| Some((*v, Rational::from_f64(*x)?))).collect();
        return Some(FloatGuess::Outside(SparseVector::from_entries(exact?)));
    }
    let tight: Vec<usize> = rows
        .iter()
        .zip(&scaled_rows)
        .filter(|(_, (coeffs, b))| b - value(coeffs) <= 1e-7 * (1.0 + b.abs()))
        .map(|(j, _)| *j)
        .collect();
    (!tight.is_empty()).then_some(FloatGuess::Inside(tight))
}

fn sort_by_cons(list: &mut [TaggedConstraint]) {
    list.sort_by(|a, b| Ord::cmp(&a.cons, &b.cons));
}

/// Full minimization: emptiness, implicit equalities, echelon form,
/// substitution, redundancy removal.
fn minimize_tagged(input: Vec<TaggedConstraint>) -> Minimized {
    let work = match drop_constants(input) {
        Ok(w) => dedupe_parallel(w),
        Err(frag) => return Minimized::Empty(frag),
    };
    let mut work = work;
    sort_by_cons(&mut work);

    let mut s = SimplexProblem::build(
        work.iter()
            .enumerate()
            .map(|(i, t)| (ConstraintId(i as u64), &t.cons)),
    );
    let first = match s.solve() {
        SimplexOutcome::Infeasible(w) => return Minimized::Empty(lift_witness(&w, &work)),
        SimplexOutcome::Feasible(p) => p,
    };

    // Implicit equalities: t ≤ b is one iff t < b is infeasible.
    let mut points = vec![first];
    let mut promoted: Vec<(usize, CertFragment)> = Vec::new();
    for (i, t) in work.iter().enumerate() {
        if t.cons.cmp() != Cmp::Le {
            continue;
        }
        let term = t.cons.term();
        if points.iter().any(|p| term.dot(p) < *t.cons.bound()) {
            continue;
        }
        s.add_constraint(PROBE, &Constraint::lt(term.clone(), t.cons.bound().clone()));
        let out = s.solve();
        s.remove_constraint(PROBE);
        match out {
            SimplexOutcome::Feasible(p) => points.push(p),
            SimplexOutcome::Infeasible(w) => {
                if let Some(ge) = lift_probe_witness(&w, |id| work[id.0 as usize].clone()) {
                    promoted.push((i, ge));
                }
            }
        }
    }
    for (i, ge) in promoted {
        let t = &mut work[i];
        let (cons, f) = Constraint::canonicalize(t.cons.term().clone(), Cmp::Eq, t.cons.bound().clone());
        let (frag, rev) = if f.is_negative() {
            (ge, t.frag.clone())
        } else {
            (t.frag.clone(), ge)
        };
        *t = TaggedConstraint {
            cons,
            frag: frag.scale(&f.abs()),
            rev: Some(rev.scale(&f.abs())),
        };
    }

    // Echelon form over the equalities.
    let mut defs: Vec<(Var, TaggedConstraint)> = Vec::new();
    for e in work.iter().filter(|t| t.cons.cmp() == Cmp::Eq) {
        let e = substitute_tagged(e, &defs);
        if e.cons.is_constant() {
            if e.cons.is_trivially_false() {
                return Minimized::Empty(contradiction(&e));
            }
            continue;
        }
        let v = e.cons.term().max_index().expect("non-constant");
        let av = e.cons.term().get(v);
        for (_, d) in defs.iter_mut() {
            let a = d.cons.term().get(v);
            if !a.is_zero() {
                let k = -(&a / &av);
                let nd = TaggedConstraint::combination(&[(Rational::one(), &*d), (k, &e)]).expect("equalities");
                *d = nd;
            }
        }
        defs.push((v, e));
    }
    defs.sort_by_key(|(v, _)| *v);

    let ineqs: Vec<TaggedConstraint> = work
        .iter()
        .filter(|t| t.cons.cmp() != Cmp::Eq)
        .map(|t| substitute_tagged(t, &defs))
        .collect();
    let mut ineqs = match drop_constants(ineqs) {
        Ok(w) => dedupe_parallel(w),
        Err(frag) => return Minimized::Empty(frag),
    };
    sort_by_cons(&mut ineqs);
    let ineqs = remove_redundant(ineqs, &mut None);
    Minimized::NonEmpty { eqs: defs, ineqs }
}

/// Variables to eliminate that still occur in `work`.
fn occurring(work: &[TaggedConstraint], vars: &[Var]) -> Vec<Var> {
    let mut out: Vec<Var> = vars
        .iter()
        .copied()
        .filter(|v| work.iter().any(|t| t.cons.term().contains(*v)))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Eliminates `vars`: by substitution when an equality mentions the
/// variable, otherwise by Fourier–Motzkin, greedily picking the variable
/// with the fewest generated pairs. Every Fourier–Motzkin step ends with
/// simplex-based redundancy removal. Callers minimize the result.
fn eliminate(
    mut work: Vec<TaggedConstraint>,
    vars: &[Var],
    steps: &mut Vec<FmStep>,
) -> Result<Vec<TaggedConstraint>, CertFragment> {
    // Stays strictly inside across Fourier–Motzkin steps, whose rows are
    // positive combinations of rows it satisfies strictly.
    let mut inside = None;
    loop {
        let remaining = occurring(&work, vars);
        if remaining.is_empty() {
            return Ok(work);
        }
        let by_eq = remaining.iter().find_map(|&v| {
            work.iter()
                .enumerate()
                .filter(|(_, t)| t.cons.cmp() == Cmp::Eq && t.cons.term().contains(v))
                .min_by_key(|(_, t)| t.cons.term().len())
                .map(|(i, _)| (v, i))
        });
        let substituted = by_eq.is_some();
        if let Some((v, i)) = by_eq {
            let e = work.swap_remove(i);
            let av = e.cons.term().get(v);
            work = work
                .iter()
                .map(|t| {
                    let a = t.cons.term().get(v);
                    if a.is_zero() {
                        t.clone()
                    } else {
                        TaggedConstraint::combination(&[(Rational::one(), t), (-(&a / &av), &e)])
                            .expect("equality coefficient")
                    }
                })
                .collect();
        } else {
            let count = |v: Var| {
                let pos = work.iter().filter(|t| t.cons.term().get(v).is_positive()).count();
                let neg = work.iter().filter(|t| t.cons.term().get(v).is_negative()).count();
                pos * neg
            };
            let v = *remaining.iter().min_by_key(|&&v| (count(v), v)).expect("non-empty");
            let (mut e0, mut ep, mut em) = (Vec::new(), Vec::new(), Vec::new());
            for t in work {
                let a = t.cons.term().get(v);
                if a.is_positive() {
                    ep.push((a, t));
                } else if a.is_negative() {
                    em.push((a, t));
                } else {
                    e0.push(t);
                }
            }
            let (n0, np, nm) = (e0.len(), ep.len(), em.len());
            let mut next = e0;
            for (ap, p) in &ep {
                for (am, m) in &em {
                    let c = TaggedConstraint::combination(&[(am.abs(), p), (ap.clone(), m)]).expect("positive coefficients");
                    next.push(c);
                }
            }
            steps.push(FmStep {
                var: v,
                e0: n0,
                e_plus: np,
                e_minus: nm,
                produced: next.len(),
            });
            work = next;
        }
        work = dedupe_parallel(drop_constants(work)?);
        // Substitution preserves redundancy status, so only new
        // Fourier–Motzkin rows need the simplex pass.
        if !substituted {
            work = remove_redundant(work, &mut inside);
        }
    }
}

impl Polyhedron {
    /// The unconstrained polyhedron over `dim` variables.
    pub fn top(dim: usize) -> Self {
        Polyhedron {
            dim,
            repr: Repr::NonEmpty {
                eqs: Vec::new(),
                ineqs: Vec::new(),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_bot(&self) -> bool {
        matches!(self.repr, Repr::Bot { .. })
    }

    pub fn equalities(&self) -> &[Equality] {
        match &self.repr {
            Repr::NonEmpty { eqs, .. } => eqs,
            Repr::Bot { .. } => &[],
        }
    }

    pub fn inequalities(&self) -> &[(ConstraintId, Constraint)] {
        match &self.repr {
            Repr::NonEmpty { ineqs, .. } => ineqs,
            Repr::Bot { .. } => &[],
        }
    }

    /// Number of constraints; the empty polyhedron counts as one.
    pub fn num_constraints(&self) -> usize {
        match &self.repr {
            Repr::NonEmpty { eqs, ineqs } => eqs.len() + ineqs.len(),
            Repr::Bot { .. } => 1,
        }
    }

    /// Flat identified form: equalities then inequalities, or the
    /// contradictory core of an empty polyhedron.
    pub fn to_checker(&self) -> CheckerPolyhedron {
        match &self.repr {
            Repr::Bot { core, .. } => CheckerPolyhedron::new(core.clone()),
            Repr::NonEmpty { eqs, ineqs } => CheckerPolyhedron::new(
                eqs.iter()
                    .map(|e| (e.id, e.cons.clone()))
                    .chain(ineqs.iter().cloned())
                    .collect(),
            ),
        }
    }

    /// Constraints without ids.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.to_checker().constraints.into_iter().map(|(_, c)| c).collect()
    }

    /// One past the largest id in use.
    fn id_span(&self) -> u64 {
        self.to_checker()
            .constraints
            .iter()
            .map(|(i, _)| i.0 + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn satisfies(&self, point: &SparseVector) -> bool {
        !self.is_bot() && self.constraints().iter().all(|c| c.satisfies(point))
    }

    /// Builds and minimizes the polyhedron given by `constraints`.
    pub fn from_constraints(dim: usize, constraints: Vec<Constraint>) -> Self {
        Polyhedron::minimize(dim, constraints).value
    }

    /// Minimizes a raw constraint list, identified by position.
    pub fn minimize(dim: usize, constraints: Vec<Constraint>) -> CertifiedResult {
        let premise: Vec<(ConstraintId, Constraint)> = constraints
            .into_iter()
            .enumerate()
            .map(|(i, c)| (ConstraintId(i as u64), c))
            .collect();
        Polyhedron::minimize_flat(dim, premise, "minimize")
    }

    fn minimize_flat(dim: usize, premise: Vec<(ConstraintId, Constraint)>, label: &str) -> CertifiedResult {
        let dim = dim.max(needed_dim(premise.iter().map(|(_, c)| c)));
        let m = minimize_tagged(init_fragments(&premise));
        let (value, cert) = Polyhedron::assemble(dim, m, &premise);
        let ob = Obligation {
            label: label.to_string(),
            premise: CheckerPolyhedron::new(premise),
            conclusion: value.to_checker(),
            cert,
        };
        CertifiedResult::new(value, vec![ob])
    }

    /// Assigns fresh ids to a minimized list and collects certificate items.
    fn assemble(dim: usize, m: Minimized, sources: &[(ConstraintId, Constraint)]) -> (Polyhedron, Cert) {
        match m {
            Minimized::Empty(witness) => {
                let core = sources
                    .iter()
                    .filter(|(id, _)| !witness.coefficient(*id).is_zero())
                    .cloned()
                    .collect();
                let cert = Cert::Empty(witness.clone());
                (Polyhedron { dim, repr: Repr::Bot { core, witness } }, cert)
            }
            Minimized::NonEmpty { eqs, ineqs } => {
                let mut items = Vec::new();
                let mut out_eqs = Vec::new();
                let mut out_ineqs = Vec::new();
                let mut next = 0u64;
                for (var, t) in eqs {
                    let id = ConstraintId(next);
                    next += 1;
                    items.extend(t.items(id));
                    out_eqs.push(Equality { id, var, cons: t.cons });
                }
                for t in ineqs {
                    let id = ConstraintId(next);
                    next += 1;
                    items.extend(t.items(id));
                    out_ineqs.push((id, t.cons));
                }
                let p = Polyhedron {
                    dim,
                    repr: Repr::NonEmpty {
                        eqs: out_eqs,
                        ineqs: out_ineqs,
                    },
                };
                (p, Cert::Incl(items))
            }
        }
    }

    fn tagged_sources(&self) -> Vec<TaggedConstraint> {
        init_fragments(&self.to_checker().constraints)
    }

    fn tagged_defs(&self) -> Vec<(Var, TaggedConstraint)> {
        self.equalities()
            .iter()
            .map(|e| (e.var, TaggedConstraint::source(e.id, e.cons.clone())))
            .collect()
    }

    /// Extends a point over the free variables with the defined ones.
    fn complete_point(&self, mut point: SparseVector) -> SparseVector {
        for e in self.equalities() {
            let a = e.cons.term().get(e.var);
            let mut rest = e.cons.term().clone();
            rest.set(e.var, Rational::zero());
            let v = (e.cons.bound() - &rest.dot(&point)) / a;
            point.set(e.var, v);
        }
        point
    }

    fn ineq_simplex(&self) -> SimplexProblem {
        SimplexProblem::build(self.inequalities().iter().map(|(i, c)| (*i, c)))
    }

    /// Some point of a non-empty polyhedron.
    pub fn sample(&self) -> Option<SparseVector> {
        if self.is_bot() {
            return None;
        }
        match self.ineq_simplex().solve() {
            SimplexOutcome::Feasible(p) => Some(self.complete_point(p)),
            SimplexOutcome::Infeasible(_) => None,
        }
    }

    /// Proves `self ⊑ {t ≤ b}` (or `<`) over the free variables. On failure
    /// returns a point of `self` violating it.
    fn prove_ineq(&self, target: &Constraint, s: &mut Option<SimplexProblem>) -> Result<CertFragment, SparseVector> {
        for (id, c) in self.inequalities() {
            if let Some(k) = syntactic_incl(c, target) {
                return Ok(CertFragment::single(*id, k));
            }
        }
        let s = s.get_or_insert_with(|| self.ineq_simplex());
        s.add_constraint(PROBE, &target.complement().expect("inequality"));
        let out = s.solve();
        s.remove_constraint(PROBE);
        match out {
            SimplexOutcome::Feasible(p) => Err(self.complete_point(p)),
            SimplexOutcome::Infeasible(w) => {
                let source = |id: ConstraintId| {
                    let c = self.inequalities().iter().find(|(i, _)| *i == id).map(|(_, c)| c.clone());
                    TaggedConstraint::source(id, c.expect("witness over inequalities"))
                };
                lift_probe_witness(&w, source).ok_or_else(|| self.sample().unwrap_or_default())
            }
        }
    }

    /// Proves `self ⊑ target` for a non-empty `self`.
    fn prove(&self, target: &Constraint, s: &mut Option<SimplexProblem>) -> Result<TaggedConstraint, SparseVector> {
        let defs = self.tagged_defs();
        let plain_defs: Vec<(Var, Constraint)> = defs.iter().map(|(v, t)| (*v, t.cons.clone())).collect();
        let (sub, coeffs, f) = substitute(target, &plain_defs);
        let proof_sub = if sub.is_constant() {
            if sub.is_trivially_false() {
                return Err(self.sample().unwrap_or_default());
            }
            TaggedConstraint {
                cons: sub.clone(),
                frag: CertFragment::new(),
                rev: (sub.cmp() == Cmp::Eq).then(CertFragment::new),
            }
        } else if sub.cmp() == Cmp::Eq {
            let up = self.prove_ineq(&Constraint::le(sub.term().clone(), sub.bound().clone()), s)?;
            let down = self.prove_ineq(&Constraint::le(sub.term().neg(), -sub.bound()), s)?;
            TaggedConstraint {
                cons: sub.clone(),
                frag: up,
                rev: Some(down),
            }
        } else {
            TaggedConstraint {
                cons: sub.clone(),
                frag: self.prove_ineq(&sub, s)?,
                rev: None,
            }
        };
        // target = (1/f)·sub - Σ coeffs_j·def_j
        let mut parts = vec![(f.recip(), &proof_sub)];
        for (k, (_, d)) in coeffs.iter().zip(&defs) {
            if !k.is_zero() {
                parts.push((-k, d));
            }
        }
        let t = TaggedConstraint::combination(&parts).expect("substitution coefficients");
        debug_assert_eq!(&t.cons, target);
        Ok(t)
    }

    /// Certificate for `self ⊑ other`, or `None` when a point of `self`
    /// outside `other` exists.
    pub fn incl(&self, other: &Polyhedron) -> Option<Cert> {
        self.incl_explain(other).ok()
    }

    /// Like [`Polyhedron::incl`] but returns the counterexample point.
    pub fn incl_explain(&self, other: &Polyhedron) -> Result<Cert, SparseVector> {
        if let Repr::Bot { witness, .. } = &self.repr {
            return Ok(Cert::Empty(witness.clone()));
        }
        let mut s = None;
        let mut items = Vec::new();
        for (id, target) in other.to_checker().constraints {
            let t = self.prove(&target, &mut s)?;
            items.extend(t.items(id));
        }
        Ok(Cert::Incl(items))
    }

    /// Does `self ⊑ {c}` hold?
    pub fn entails(&self, c: &Constraint) -> bool {
        self.is_bot() || self.prove(c, &mut None).is_ok()
    }

    /// Geometric equality by double inclusion.
    pub fn same_as(&self, other: &Polyhedron) -> bool {
        self.incl(other).is_some() && other.incl(self).is_some()
    }

    /// Intersection: both constraint sets, renamed apart, then minimized.
    pub fn meet(&self, other: &Polyhedron) -> CertifiedResult {
        let dim = self.dim.max(other.dim);
        if self.is_bot() || other.is_bot() {
            let b = if self.is_bot() { self } else { other };
            let mut value = b.clone();
            value.dim = dim;
            return CertifiedResult::new(value, b.emptiness_obligation("meet"));
        }
        let offset = self.id_span();
        let mut premise = self.to_checker().constraints;
        premise.extend(
            other
                .to_checker()
                .constraints
                .into_iter()
                .map(|(i, c)| (ConstraintId(i.0 + offset), c)),
        );
        Polyhedron::minimize_flat(dim, premise, "meet")
    }

    fn emptiness_obligation(&self, label: &str) -> Vec<Obligation> {
        match &self.repr {
            Repr::Bot { witness, .. } => vec![Obligation {
                label: format!("{label}: empty operand"),
                premise: self.to_checker(),
                conclusion: self.to_checker(),
                cert: Cert::Empty(witness.clone()),
            }],
            Repr::NonEmpty { .. } => Vec::new(),
        }
    }

    /// Existential projection of `vars`. The dimension is unchanged; the
    /// eliminated variables become unconstrained.
    pub fn project(&self, vars: &[Var]) -> CertifiedResult {
        if self.is_bot() {
            return CertifiedResult::new(self.clone(), self.emptiness_obligation("project"));
        }
        let sources = self.to_checker().constraints;
        let mut steps = Vec::new();
        let m = match eliminate(self.tagged_sources(), vars, &mut steps) {
            Ok(work) => minimize_tagged(work),
            Err(frag) => Minimized::Empty(frag),
        };
        let (value, cert) = Polyhedron::assemble(self.dim, m, &sources);
        let ob = Obligation {
            label: "project".into(),
            premise: CheckerPolyhedron::new(sources),
            conclusion: value.to_checker(),
            cert,
        };
        let mut r = CertifiedResult::new(value, vec![ob]);
        r.fm_steps = steps;
        r
    }

    /// Parallel assignment: every right-hand side is read over the old
    /// values.
    pub fn assign(&self, assignments: &[(Var, LinExpr)]) -> CertifiedResult {
        if self.is_bot() {
            return CertifiedResult::new(self.clone(), self.emptiness_obligation("assign"));
        }
        let needed = assignments
            .iter()
            .flat_map(|(x, e)| std::iter::once(*x + 1).chain(e.coeffs.max_index().map(|m| m + 1)))
            .max()
            .unwrap_or(0);
        let dim = self.dim.max(needed);
        let m = assignments.len();
        let offset = self.id_span();
        let mut premise = self.to_checker().constraints;
        for (i, (_, e)) in assignments.iter().enumerate() {
            let mut term = e.coeffs.neg();
            term.set(dim + i, Rational::one());
            premise.push((
                ConstraintId(offset + i as u64),
                Constraint::eq(term, e.constant.clone()),
            ));
        }
        let olds: Vec<Var> = assignments.iter().map(|(x, _)| *x).collect();
        let mut steps = Vec::new();
        let mm = match eliminate(init_fragments(&premise), &olds, &mut steps) {
            Ok(work) => minimize_tagged(work),
            Err(frag) => Minimized::Empty(frag),
        };
        let (fresh, cert) = Polyhedron::assemble(dim + m, mm, &premise);
        let ob = Obligation {
            label: "assign".into(),
            premise: CheckerPolyhedron::new(premise),
            conclusion: fresh.to_checker(),
            cert,
        };
        let value = if fresh.is_bot() {
            let mut b = fresh.clone();
            b.dim = dim;
            b
        } else {
            let rename = |v: Var| if v >= dim { olds[v - dim] } else { v };
            let renamed = fresh.constraints().iter().map(|c| c.rename(rename)).collect();
            Polyhedron::from_constraints(dim, renamed)
        };
        let mut r = CertifiedResult::new(value, vec![ob]);
        r.fm_steps = steps;
        r
    }

    /// Convex hull. Computed on the closures of the operands by projecting
    /// the lifted system; a result inequality is made strict again when both
    /// operands prove the strict version.
    pub fn join(&self, other: &Polyhedron) -> CertifiedResult {
        let dim = self.dim.max(other.dim);
        if self.is_bot() || other.is_bot() {
            let (b, p) = if self.is_bot() { (self, other) } else { (other, self) };
            let mut value = p.clone();
            value.dim = dim;
            let mut obs = b.emptiness_obligation("join");
            obs.push(Obligation {
                label: "join: non-empty operand".into(),
                premise: p.to_checker(),
                conclusion: p.to_checker(),
                cert: identity_cert(&p.to_checker()),
            });
            return CertifiedResult::new(value, obs);
        }
        // An operand containing the other is already the hull.
        for (inner, outer) in [(self, other), (other, self)] {
            if let Some(cert) = inner.incl(outer) {
                let mut value = outer.clone();
                value.dim = dim;
                let ob = |p: &Polyhedron, cert: Cert, side: &str| Obligation {
                    label: format!("join: {side} operand"),
                    premise: p.to_checker(),
                    conclusion: value.to_checker(),
                    cert,
                };
                let outer_cert = identity_cert(&outer.to_checker());
                let (c1, c2) = if std::ptr::eq(inner, self) { (cert, outer_cert) } else { (outer_cert, cert) };
                let obs = vec![ob(self, c1, "left"), ob(other, c2, "right")];
                return CertifiedResult::new(value, obs);
            }
        }
        let n = dim;
        let (a1, a2) = (3 * n, 3 * n + 1);
        let s1 = self.to_checker().constraints;
        let s2 = other.to_checker().constraints;
        // Row origin: (side, source id, g) with canonical row = g·raw.
        let mut origin: Vec<Option<(u8, ConstraintId, Rational)>> = Vec::new();
        let mut rows: Vec<Constraint> = Vec::new();
        for (side, src, shift, alpha) in [(1u8, &s1, n, a1), (2u8, &s2, 2 * n, a2)] {
            for (id, c) in src.iter() {
                let mut term = c.term().map_indices(|v| v + shift);
                term.set(alpha, -c.bound());
                let cmp = if c.cmp() == Cmp::Lt { Cmp::Le } else { c.cmp() };
                let (row, g) = Constraint::canonicalize(term, cmp, Rational::zero());
                rows.push(row);
                origin.push(Some((side, *id, g)));
            }
        }
        for i in 0..n {
            let t = SparseVector::from_ints(&[(i, 1), (n + i, -1), (2 * n + i, -1)]);
            rows.push(Constraint::eq(t, Rational::zero()));
            origin.push(None);
        }
        rows.push(Constraint::eq(SparseVector::from_ints(&[(a1, 1), (a2, 1)]), Rational::one()));
        rows.push(Constraint::le(SparseVector::from_ints(&[(a1, -1)]), Rational::zero()));
        rows.push(Constraint::le(SparseVector::from_ints(&[(a2, -1)]), Rational::zero()));
        origin.extend([None, None, None]);

        let bar: Vec<(ConstraintId, Constraint)> = rows
            .into_iter()
            .enumerate()
            .map(|(i, c)| (ConstraintId(i as u64), c))
            .collect();
        let aux: Vec<Var> = (n..3 * n + 2).collect();
        let mut steps = Vec::new();
        let projected = match eliminate(init_fragments(&bar), &aux, &mut steps) {
            Ok(work) => minimize_tagged(work),
            Err(_) => unreachable!("lifted system of non-empty operands is non-empty"),
        };
        let Minimized::NonEmpty { eqs, ineqs } = projected else {
            unreachable!("lifted system of non-empty operands is non-empty")
        };

        let split = |frag: &CertFragment, side: u8| {
            CertFragment::from_pairs(frag.pairs().iter().filter_map(|(id, k)| {
                origin[id.0 as usize]
                    .as_ref()
                    .filter(|(s, _, _)| *s == side)
                    .map(|(_, src, g)| (*src, k * g))
            }))
        };
        let side_tag = |t: &TaggedConstraint, side: u8| TaggedConstraint {
            cons: t.cons.clone(),
            frag: split(&t.frag, side),
            rev: t.rev.as_ref().map(|r| split(r, side)),
        };
        let lookup1 = |id: ConstraintId| s1.iter().find(|(i, _)| *i == id).map(|(_, c)| c);
        let lookup2 = |id: ConstraintId| s2.iter().find(|(i, _)| *i == id).map(|(_, c)| c);

        let mut side1 = Vec::new();
        let mut side2 = Vec::new();
        let mut restored = false;
        // Some operand is tight on every hull bound, and a closed operand
        // attains it, so two closed operands give a closed hull.
        let has_lt = |p: &Polyhedron| p.inequalities().iter().any(|(_, c)| c.cmp() == Cmp::Lt);
        let try_strict = has_lt(self) || has_lt(other);
        let (mut lp1, mut lp2) = (None, None);
        for t in eqs.iter().map(|(_, t)| t).chain(&ineqs) {
            let mut t1 = side_tag(t, 1);
            let mut t2 = side_tag(t, 2);
            if t.cons.cmp() == Cmp::Le && try_strict {
                let lt = t.cons.with_cmp(Cmp::Lt);
                if proves_strictly(&t1.frag, &t.cons, lookup1) && proves_strictly(&t2.frag, &t.cons, lookup2) {
                    t1.cons = lt.clone();
                    t2.cons = lt;
                    restored = true;
                } else if let Ok(p1) = self.prove(&lt, &mut lp1) {
                    if let Ok(p2) = other.prove(&lt, &mut lp2) {
                        t1 = p1;
                        t2 = p2;
                        restored = true;
                    }
                }
            }
            side1.push(t1);
            side2.push(t2);
        }

        let (final1, final2) = if restored {
            let mid: Vec<(ConstraintId, Constraint)> = side1
                .iter()
                .enumerate()
                .map(|(i, t)| (ConstraintId(i as u64), t.cons.clone()))
                .collect();
            let Minimized::NonEmpty { eqs, ineqs } = minimize_tagged(init_fragments(&mid)) else {
                unreachable!("contains a non-empty operand")
            };
            let lift = |list: &[TaggedConstraint]| {
                let inner = |id: ConstraintId| list[id.0 as usize].clone();
                let e: Vec<(Var, TaggedConstraint)> = eqs.iter().map(|(v, t)| (*v, t.compose(&inner))).collect();
                let i: Vec<TaggedConstraint> = ineqs.iter().map(|t| t.compose(&inner)).collect();
                Minimized::NonEmpty { eqs: e, ineqs: i }
            };
            (lift(&side1), lift(&side2))
        } else {
            let ne = eqs.len();
            let pack = |list: Vec<TaggedConstraint>| {
                let e = eqs.iter().map(|(v, _)| *v).zip(list[..ne].to_vec()).collect();
                Minimized::NonEmpty { eqs: e, ineqs: list[ne..].to_vec() }
            };
            (pack(side1), pack(side2))
        };
        let (value, cert1) = Polyhedron::assemble(dim, final1, &s1);
        let (_, cert2) = Polyhedron::assemble(dim, final2, &s2);
        let obs = vec![
            Obligation {
                label: "join: left operand".into(),
                premise: CheckerPolyhedron::new(s1.clone()),
                conclusion: value.to_checker(),
                cert: cert1,
            },
            Obligation {
                label: "join: right operand".into(),
                premise: CheckerPolyhedron::new(s2.clone()),
                conclusion: value.to_checker(),
                cert: cert2,
            },
        ];
        let mut r = CertifiedResult::new(value, obs);
        r.fm_steps = steps;
        r
    }

    /// Standard widening: the constraints of `self` that `other` entails.
    /// Equalities are split into two inequalities first.
    pub fn widen(&self, other: &Polyhedron) -> Polyhedron {
        let dim = self.dim.max(other.dim);
        if self.is_bot() {
            let mut p = other.clone();
            p.dim = dim;
            return p;
        }
        if other.is_bot() {
            let mut p = self.clone();
            p.dim = dim;
            return p;
        }
        let mut kept = Vec::new();
        for c in self.constraints() {
            if other.entails(&c) {
                kept.push(c);
            } else if c.cmp() == Cmp::Eq {
                let (a, b) = c.split_eq();
                kept.extend([a, b].into_iter().filter(|h| other.entails(h)));
            }
        }
        Polyhedron::from_constraints(dim, kept)
    }

    /// Variables occurring in some constraint.
    pub fn support(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.constraints().iter().flat_map(|c| c.term().support()).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Checks the representation invariants, returning the violations.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let flat = self.to_checker();
        match &self.repr {
            Repr::Bot { witness, .. } => {
                if check(&flat, &flat, &Cert::Empty(witness.clone())) != CheckOutcome::Value {
                    bad.push("empty polyhedron without a valid witness".to_string());
                }
                return bad;
            }
            Repr::NonEmpty { eqs, ineqs } => {
                for (_, c) in &flat.constraints {
                    if Constraint::new(c.term().clone(), c.cmp(), c.bound().clone()) != *c || c.is_constant() {
                        bad.push(format!("non-canonical constraint {c}"));
                    }
                }
                for (i, e) in eqs.iter().enumerate() {
                    if !e.cons.term().contains(e.var) || e.cons.cmp() != Cmp::Eq {
                        bad.push(format!("equality {} does not define x{}", e.cons, e.var));
                    }
                    let elsewhere = eqs
                        .iter()
                        .enumerate()
                        .any(|(j, f)| j != i && f.cons.term().contains(e.var))
                        || ineqs.iter().any(|(_, c)| c.term().contains(e.var));
                    if elsewhere {
                        bad.push(format!("defined variable x{} occurs elsewhere", e.var));
                    }
                }
                let mut s = self.ineq_simplex();
                if !s.solve().is_feasible() {
                    bad.push("non-empty arm is infeasible".to_string());
                }
                for (id, c) in ineqs {
                    if c.cmp() == Cmp::Le {
                        s.add_constraint(PROBE, &Constraint::lt(c.term().clone(), c.bound().clone()));
                        if !s.solve().is_feasible() {
                            bad.push(format!("implicit equality {c}"));
                        }
                        s.remove_constraint(PROBE);
                    }
                    s.remove_constraint(*id);
                    s.add_constraint(PROBE, &c.complement().expect("inequality"));
                    if !s.solve().is_feasible() {
                        bad.push(format!("redundant constraint {c}"));
                    }
                    s.remove_constraint(PROBE);
                    s.add_constraint(*id, c);
                }
            }
        }
        bad
    }

    pub fn fmt_with(&self, names: &VarNames, f: &mut impl fmt::Write) -> fmt::Result {
        if self.is_bot() {
            return f.write_str("bot");
        }
        f.write_str("{")?;
        for (n, c) in self.constraints().iter().enumerate() {
            f.write_str(if n > 0 { "; " } else { " " })?;
            c.fmt_with(names, f)?;
        }
        f.write_str(" }")
    }
}

/// Does `frag` prove the strict version of `c`?
fn proves_strictly<'a>(frag: &CertFragment, c: &Constraint, lookup: impl Fn(ConstraintId) -> Option<&'a Constraint>) -> bool {
    match frag.recombine(lookup) {
        Ok((_, cmp, b)) => b < *c.bound() || (b == *c.bound() && cmp == Cmp::Lt),
        Err(_) => false,
    }
}

/// `[(1, id)]` (or the two directions of an equality) for every constraint.
fn identity_cert(p: &CheckerPolyhedron) -> Cert {
    Cert::Incl(
        p.constraints
            .iter()
            .flat_map(|(id, c)| TaggedConstraint::source(*id, c.clone()).items(*id))
            .collect(),
    )
}

fn needed_dim<'a>(cs: impl Iterator<Item = &'a Constraint>) -> usize {
    cs.filter_map(|c| c.term().max_index()).map(|m| m + 1).max().unwrap_or(0)
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(&VarNames::default(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;

    fn c(s: &str) -> Constraint {
        s.parse().unwrap()
    }

    fn poly(dim: usize, cs: &[&str]) -> Polyhedron {
        let r = Polyhedron::minimize(dim, cs.iter().map(|s| c(s)).collect());
        r.verify().unwrap();
        r.value
    }

    fn cons(p: &Polyhedron) -> Vec<String> {
        p.constraints().iter().map(|c| c.to_string()).collect()
    }

    fn certified(r: &CertifiedResult) -> &Polyhedron {
        r.verify().unwrap_or_else(|e| panic!("{e:?}"));
        assert!(r.value.check_invariants().is_empty(), "{:?}", r.value.check_invariants());
        &r.value
    }

    #[test]
    fn top_contains_everything() {
        let t = Polyhedron::top(2);
        assert!(poly(2, &["x0 <= 1"]).incl(&t).is_some());
        assert!(poly(2, &["x0 <= 1", "-x0 <= -2"]).incl(&t).is_some());
        assert!(t.incl(&poly(2, &["x0 <= 1"])).is_none());
        assert!(t.satisfies(&SparseVector::from_ints(&[(0, 7), (1, -3)])));
        assert_eq!(Polyhedron::from_constraints(2, vec![]), t);
    }

    #[test]
    fn incl_sum_of_bounds() {
        let p1 = poly(2, &["x0 <= 1", "x1 <= 1"]);
        let p2 = poly(2, &["x0 + x1 <= 2"]);
        let cert = p1.incl(&p2).unwrap();
        assert_eq!(cert.to_string(), "incl { 0: [(1, 0), (1, 1)] }");
        assert!(check(&p1.to_checker(), &p2.to_checker(), &cert).is_value());
        assert!(p2.incl(&p1).is_none());
        let pt = p2.incl_explain(&p1).unwrap_err();
        assert!(p2.satisfies(&pt) && !p1.satisfies(&pt));
    }

    #[test]
    fn incl_from_empty() {
        let bot = poly(1, &["x0 <= 0", "-x0 <= -1"]);
        assert!(bot.is_bot());
        let cert = bot.incl(&poly(1, &["x0 <= -5"])).unwrap();
        assert!(matches!(cert, Cert::Empty(_)));
        assert!(check(&bot.to_checker(), &CheckerPolyhedron::default(), &cert).is_value());
        assert!(poly(1, &["x0 <= 0"]).incl(&bot).is_none());
    }

    #[test]
    fn incl_through_equalities() {
        let p1 = poly(3, &["x0 - x1 = 0", "x1 = 2", "x2 <= 1"]);
        let p2 = poly(3, &["x0 = 2", "x0 + x2 <= 3"]);
        let cert = p1.incl(&p2).unwrap();
        assert!(check(&p1.to_checker(), &p2.to_checker(), &cert).is_value());
    }

    #[test]
    fn meet_examples() {
        let r = poly(1, &["x0 <= 1"]).meet(&poly(1, &["x0 <= 2"]));
        assert_eq!(cons(certified(&r)), vec!["1*x0 <= 1"]);
        let r = poly(1, &["x0 <= 1"]).meet(&poly(1, &["-x0 <= -1"]));
        assert_eq!(cons(certified(&r)), vec!["1*x0 = 1"]);
        let r = poly(1, &["x0 <= 0"]).meet(&poly(1, &["-x0 <= -1"]));
        assert!(certified(&r).is_bot());
        assert!(matches!(r.obligations[0].cert, Cert::Empty(_)));
    }

    #[test]
    fn minimize_examples() {
        let r = Polyhedron::minimize(2, vec![c("x1 <= 1"), c("x0 <= 2"), c("x0 <= 2")]);
        assert_eq!(cons(certified(&r)), vec!["1*x0 <= 2", "1*x1 <= 1"]);
        let r = Polyhedron::minimize(2, vec![c("x0 + x1 <= 1"), c("x0 + x1 >= 1"), c("x0 <= 0")]);
        let p = certified(&r);
        assert_eq!(p.equalities().len(), 1);
        assert_eq!(p.equalities()[0].var, 1);
        assert_eq!(cons(p), vec!["1*x0 + 1*x1 = 1", "1*x0 <= 0"]);
    }

    #[test]
    fn minimize_strict_emptiness() {
        let r = Polyhedron::minimize(1, vec![c("x0 < 0"), c("x0 >= 0")]);
        assert!(certified(&r).is_bot());
        let r = Polyhedron::minimize(1, vec![c("x0 < 1"), c("x0 >= 0")]);
        assert_eq!(cons(certified(&r)), vec!["-1*x0 <= 0", "1*x0 < 1"]);
    }

    #[test]
    fn projection_example() {
        let p = poly(2, &["x1 <= 1", "2*x0 + x1 <= 2", "-x0 - x1 <= 1"]);
        let r = p.project(&[0]);
        assert_eq!(cons(certified(&r)), vec!["-1*x1 <= 4", "1*x1 <= 1"]);
        let Cert::Incl(items) = &r.obligations[0].cert else { panic!() };
        let src = |text: &str| p.to_checker().constraints.iter().find(|(_, k)| *k == c(text)).unwrap().0;
        let lower = r.value.to_checker().constraints.iter().find(|(_, k)| *k == c("-x1 <= 4")).unwrap().0;
        let frag = &items.iter().find(|(t, _)| *t == lower).unwrap().1;
        assert_eq!(frag.len(), 2);
        assert_eq!(frag.coefficient(src("2*x0 + x1 <= 2")), int(1));
        assert_eq!(frag.coefficient(src("-x0 - x1 <= 1")), int(2));
        assert_eq!(r.fm_steps[0].e_plus * r.fm_steps[0].e_minus, 1);
    }

    #[test]
    fn projecting_absent_variable_is_identity() {
        let p = poly(3, &["x0 <= 1", "x0 + x1 >= 0"]);
        let r = p.project(&[2]);
        assert_eq!(certified(&r), &p);
    }

    #[test]
    fn assign_examples() {
        let r = poly(1, &["x0 <= 1"]).assign(&[(0, "x0 + 1".parse().unwrap())]);
        assert_eq!(cons(certified(&r)), vec!["1*x0 <= 2"]);
        let swap = poly(2, &["x0 = 0", "x1 = 1"]).assign(&[(0, LinExpr::var(1)), (1, LinExpr::var(0))]);
        assert_eq!(cons(certified(&swap)), vec!["1*x0 = 1", "1*x1 = 0"]);
        let r = poly(3, &["x0 <= 1"]).assign(&[(0, "x1 + x2".parse().unwrap())]);
        assert_eq!(cons(certified(&r)), vec!["1*x0 + -1*x1 + -1*x2 = 0"]);
    }

    #[test]
    fn join_examples() {
        let r = poly(1, &["x0 = 0"]).join(&poly(1, &["x0 = 1"]));
        assert_eq!(cons(certified(&r)), vec!["-1*x0 <= 0", "1*x0 <= 1"]);
        let p = poly(2, &["x0 + x1 <= 3", "-x0 <= 0", "-x1 <= 1"]);
        assert!(certified(&p.join(&p)).same_as(&p));
        let b1 = poly(2, &["x0 >= 0", "x0 <= 1", "x1 >= 0", "x1 <= 1"]);
        let b2 = poly(2, &["x0 >= 2", "x0 <= 3", "x1 >= 0", "x1 <= 1"]);
        let r = b1.join(&b2);
        assert!(certified(&r).same_as(&poly(2, &["x0 >= 0", "x0 <= 3", "x1 >= 0", "x1 <= 1"])));
    }

    #[test]
    fn join_strictness() {
        let r = poly(1, &["x0 >= 0", "x0 < 1"]).join(&poly(1, &["x0 = 5"]));
        assert_eq!(cons(certified(&r)), vec!["-1*x0 <= 0", "1*x0 <= 5"]);
        let r = poly(1, &["x0 > 0", "x0 < 1"]).join(&poly(1, &["x0 > 2", "x0 < 3"]));
        assert_eq!(cons(certified(&r)), vec!["-1*x0 < 0", "1*x0 < 3"]);
    }

    #[test]
    fn join_with_bot() {
        let bot = poly(1, &["x0 <= 0", "x0 >= 1"]);
        let p = poly(1, &["x0 <= 4"]);
        assert_eq!(certified(&bot.join(&p)), &p);
        assert_eq!(certified(&p.join(&bot)), &p);
    }

    #[test]
    fn widen_examples() {
        let p1 = poly(1, &["x0 >= 0", "x0 <= 1"]);
        let p2 = poly(1, &["x0 >= 0", "x0 <= 2"]);
        assert_eq!(cons(&p1.widen(&p2)), vec!["-1*x0 <= 0"]);
        assert_eq!(p1.widen(&p1), p1);
        let eq = poly(2, &["x0 = 0", "x1 = 0"]);
        let grown = poly(2, &["x0 >= 0", "x0 <= 1", "x1 = 0"]);
        assert_eq!(cons(&eq.widen(&grown)), vec!["1*x1 = 0", "-1*x0 <= 0"]);
    }
}
