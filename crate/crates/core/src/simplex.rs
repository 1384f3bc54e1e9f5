//! Feasibility-only simplex over exact rationals.
//!
//! Every non-constant constraint `a·x ⋈ b` is split into a definition
//! `s = a'·x` (with `a'` the term scaled to a unit leading coefficient) and a
//! bound on `s`. Terms that agree up to scaling share one slack, which then
//! carries both an upper and a lower bound; single-variable terms bound the
//! variable directly. Program variables themselves are otherwise unbounded.
//!
//! The solver maintains the invariant that the current assignment satisfies
//! every row and every non-basic variable sits within its bounds. Each solve
//! either reaches a feasible assignment or stops on a row whose bounds are
//! mutually exclusive, which yields a Farkas witness over the source
//! constraints. Strict bounds are handled with symbolic `δ` values.
//!
//! Bounds can be installed and retracted between solves without rebuilding
//! the tableau, which is what makes the minimization queries cheap.

use std::collections::{BTreeMap, HashMap};

use crate::constraint::{Cmp, Constraint, ConstraintId};
use crate::numeric::{DeltaValue, Rational, SparseVector, Var};

/// Internal variable of a problem: either a program variable or a slack.
pub type SimplexVar = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// A bound contributed by one source constraint.
///
/// `factor` converts a unit weight on the bound inequality (`s ⋈ u` for an
/// upper bound, `-s ⋈ -l` for a lower one) into the weight on the source.
#[derive(Debug, Clone)]
struct BoundEntry {
    source: ConstraintId,
    value: DeltaValue,
    factor: Rational,
}

/// Farkas coefficients whose combination of source constraints is trivially
/// false. Inequalities carry nonnegative coefficients; equalities may carry
/// any sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsatWitness {
    pub coefficients: Vec<(ConstraintId, Rational)>,
}

impl UnsatWitness {
    pub fn coefficient(&self, id: ConstraintId) -> Rational {
        self.coefficients
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, k)| k.clone())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplexOutcome {
    /// A point over the program variables satisfying every active bound.
    Feasible(SparseVector),
    Infeasible(UnsatWitness),
}

impl SimplexOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SimplexOutcome::Feasible(_))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimplexProblem {
    /// `rows[v]` is `Some(r)` when `v` is basic and `v = Σ r[k]·cols[k]`.
    rows: Vec<Option<Vec<Rational>>>,
    /// Non-basic variables, one per tableau column.
    cols: Vec<SimplexVar>,
    /// Column of each non-basic variable.
    col_of: Vec<Option<usize>>,
    lower: Vec<Vec<BoundEntry>>,
    upper: Vec<Vec<BoundEntry>>,
    value: Vec<DeltaValue>,
    /// Program-variable index of each internal variable, `None` for slacks.
    program_var: Vec<Option<Var>>,
    internal: HashMap<Var, SimplexVar>,
    /// Unit-leading term each slack stands for.
    slack_of: HashMap<SparseVector, SimplexVar>,
    constants: Vec<(ConstraintId, Constraint)>,
    by_source: HashMap<ConstraintId, Vec<(SimplexVar, Side)>>,
    pivots: usize,
}

impl SimplexProblem {
    pub fn new() -> Self {
        SimplexProblem::default()
    }

    /// Builds a problem from identified constraints. Equalities become
    /// two-sided bounds.
    pub fn build<'a, I>(constraints: I) -> Self
    where
        I: IntoIterator<Item = (ConstraintId, &'a Constraint)>,
    {
        let mut p = SimplexProblem::new();
        for (id, c) in constraints {
            p.add_constraint(id, c);
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.rows.len()
    }

    /// Number of slack variables, i.e. tableau rows created at build time.
    pub fn num_slacks(&self) -> usize {
        self.program_var.iter().filter(|v| v.is_none()).count()
    }

    /// Variables carrying at least one bound.
    pub fn num_bounded(&self) -> usize {
        (0..self.num_vars())
            .filter(|&v| !self.lower[v].is_empty() || !self.upper[v].is_empty())
            .count()
    }

    pub fn pivot_count(&self) -> usize {
        self.pivots
    }

    /// The variable standing for `term` (up to scaling) and the scale `μ`
    /// with `term = μ·s`.
    pub fn var_for_term(&self, term: &SparseVector) -> Option<(SimplexVar, Rational)> {
        let (lead_idx, lead) = term.leading()?;
        if term.len() == 1 {
            return self.internal.get(&lead_idx).map(|&v| (v, lead));
        }
        let key = term.scale(&lead.recip());
        self.slack_of.get(&key).map(|&v| (v, lead))
    }

    /// Source constraints currently bounding `var`.
    pub fn origin(&self, var: SimplexVar) -> Vec<ConstraintId> {
        let mut ids: Vec<_> = self.lower[var]
            .iter()
            .chain(&self.upper[var])
            .map(|e| e.source)
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    fn new_var(&mut self, program: Option<Var>) -> SimplexVar {
        let v = self.rows.len();
        self.rows.push(None);
        self.col_of.push(Some(self.cols.len()));
        self.cols.push(v);
        for r in self.rows.iter_mut().flatten() {
            r.push(Rational::zero());
        }
        self.lower.push(Vec::new());
        self.upper.push(Vec::new());
        self.value.push(DeltaValue::zero());
        self.program_var.push(program);
        v
    }

    fn program(&mut self, x: Var) -> SimplexVar {
        if let Some(&v) = self.internal.get(&x) {
            return v;
        }
        let v = self.new_var(Some(x));
        self.internal.insert(x, v);
        v
    }

    fn slack(&mut self, key: SparseVector) -> SimplexVar {
        if let Some(&s) = self.slack_of.get(&key) {
            return s;
        }
        let xs: Vec<(SimplexVar, Rational)> = key.entries().into_iter().map(|(x, a)| (self.program(x), a.clone())).collect();
        let s = self.new_var(None);
        // The new variable's own column is dropped again below.
        let mut row = vec![Rational::zero(); self.cols.len()];
        let mut val = DeltaValue::zero();
        for (v, a) in &xs {
            match &self.rows[*v] {
                Some(r) => {
                    for (k, c) in r.iter().enumerate() {
                        if !c.is_zero() {
                            row[k] += &(a * c);
                        }
                    }
                }
                None => row[self.col_of[*v].expect("non-basic")] += a,
            }
            val = &val + &self.value[*v].scale(a);
        }
        self.remove_last_column(s);
        row.pop();
        self.rows[s] = Some(row);
        self.value[s] = val;
        self.slack_of.insert(key, s);
        s
    }

    /// Drops the column of `v`, which must be the last and all zero.
    fn remove_last_column(&mut self, v: SimplexVar) {
        debug_assert_eq!(self.cols.last(), Some(&v));
        self.cols.pop();
        self.col_of[v] = None;
        for r in self.rows.iter_mut().flatten() {
            r.pop();
        }
    }

    /// Non-zero entries of a basic variable's row, by variable index.
    fn row_entries(&self, basic: SimplexVar) -> Vec<(SimplexVar, Rational)> {
        let r = self.rows[basic].as_ref().expect("basic");
        let mut out: Vec<(SimplexVar, Rational)> = r
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (self.cols[k], c.clone()))
            .collect();
        out.sort_by_key(|(v, _)| *v);
        out
    }

    /// Installs the bounds implied by `c`, identified by `id`.
    pub fn add_constraint(&mut self, id: ConstraintId, c: &Constraint) {
        if c.is_constant() {
            self.constants.push((id, c.clone()));
            return;
        }
        let (lead_idx, mu) = c.term().leading().expect("non-constant");
        let var = if c.term().len() == 1 {
            self.program(lead_idx)
        } else {
            let key = c.term().scale(&mu.recip());
            self.slack(key)
        };
        let v = c.bound() / &mu;
        let strict = c.cmp() == Cmp::Lt;
        let upper_val = DeltaValue::new(v.clone(), if strict { -Rational::one() } else { Rational::zero() });
        let lower_val = DeltaValue::new(v, if strict { Rational::one() } else { Rational::zero() });
        let inv = mu.recip();
        match c.cmp() {
            Cmp::Eq => {
                self.install(var, Side::Upper, BoundEntry { source: id, value: upper_val, factor: inv.clone() });
                self.install(var, Side::Lower, BoundEntry { source: id, value: lower_val, factor: -inv });
            }
            _ if mu.is_positive() => {
                self.install(var, Side::Upper, BoundEntry { source: id, value: upper_val, factor: inv });
            }
            _ => {
                self.install(var, Side::Lower, BoundEntry { source: id, value: lower_val, factor: -inv });
            }
        }
    }

    /// Retracts every bound contributed by `id`.
    pub fn remove_constraint(&mut self, id: ConstraintId) {
        self.constants.retain(|(i, _)| *i != id);
        if let Some(places) = self.by_source.remove(&id) {
            for (var, side) in places {
                self.bounds_mut(var, side).retain(|e| e.source != id);
            }
        }
    }

    /// Installs (`Some`) or retracts (`None`) the bound contributed by
    /// `source` on one side of `var`. The bound inequality itself (`var ⋈ v`
    /// or `-var ⋈ -v`) is what `source` stands for in witnesses.
    pub fn set_bound(
        &mut self,
        var: SimplexVar,
        side: Side,
        source: ConstraintId,
        value: Option<DeltaValue>,
    ) {
        match value {
            Some(value) => self.install(
                var,
                side,
                BoundEntry {
                    source,
                    value,
                    factor: Rational::one(),
                },
            ),
            None => {
                self.bounds_mut(var, side).retain(|e| e.source != source);
                if let Some(places) = self.by_source.get_mut(&source) {
                    places.retain(|p| *p != (var, side));
                }
            }
        }
    }

    fn bounds_mut(&mut self, var: SimplexVar, side: Side) -> &mut Vec<BoundEntry> {
        match side {
            Side::Lower => &mut self.lower[var],
            Side::Upper => &mut self.upper[var],
        }
    }

    fn install(&mut self, var: SimplexVar, side: Side, entry: BoundEntry) {
        let source = entry.source;
        let list = self.bounds_mut(var, side);
        list.retain(|e| e.source != source);
        list.push(entry);
        let places = self.by_source.entry(source).or_default();
        if !places.contains(&(var, side)) {
            places.push((var, side));
        }
        if self.rows[var].is_none() {
            self.repair_nonbasic(var);
        }
    }

    fn active_lower(&self, var: SimplexVar) -> Option<&BoundEntry> {
        self.lower[var].iter().max_by(|a, b| a.value.cmp(&b.value))
    }

    fn active_upper(&self, var: SimplexVar) -> Option<&BoundEntry> {
        self.upper[var].iter().min_by(|a, b| a.value.cmp(&b.value))
    }

    /// Moves a non-basic variable back inside its bounds.
    fn repair_nonbasic(&mut self, var: SimplexVar) {
        let cur = &self.value[var];
        let target = if let Some(l) = self.active_lower(var).filter(|l| *cur < l.value) {
            l.value.clone()
        } else if let Some(u) = self.active_upper(var).filter(|u| *cur > u.value) {
            u.value.clone()
        } else {
            return;
        };
        self.update(var, target);
    }

    fn update(&mut self, nonbasic: SimplexVar, v: DeltaValue) {
        let k = self.col_of[nonbasic].expect("non-basic");
        let diff = &v - &self.value[nonbasic];
        for b in 0..self.rows.len() {
            if let Some(r) = &self.rows[b] {
                if !r[k].is_zero() {
                    let step = diff.scale(&r[k]);
                    self.value[b] = &self.value[b] + &step;
                }
            }
        }
        self.value[nonbasic] = v;
    }

    fn pivot_and_update(&mut self, basic: SimplexVar, entering: SimplexVar, v: DeltaValue) {
        let k = self.col_of[entering].expect("non-basic");
        let a = self.rows[basic].as_ref().expect("basic")[k].clone();
        let theta = (&v - &self.value[basic]).scale(&a.recip());
        self.value[basic] = v;
        self.value[entering] = &self.value[entering] + &theta;
        for b in 0..self.rows.len() {
            if b == basic {
                continue;
            }
            if let Some(r) = &self.rows[b] {
                if !r[k].is_zero() {
                    let step = theta.scale(&r[k]);
                    self.value[b] = &self.value[b] + &step;
                }
            }
        }
        self.pivot(basic, entering);
    }

    fn pivot(&mut self, basic: SimplexVar, entering: SimplexVar) {
        // basic = a·entering + rest  ⇒  entering = (basic - rest)/a, and
        // `basic` takes over the column of `entering`.
        let k = self.col_of[entering].expect("non-basic");
        let row = self.rows[basic].take().expect("basic");
        let inv = row[k].recip();
        let neg_inv = -&inv;
        let new_row: Vec<Rational> = row
            .iter()
            .enumerate()
            .map(|(j, c)| if j == k { inv.clone() } else if c.is_zero() { Rational::zero() } else { c * &neg_inv })
            .collect();
        for r in self.rows.iter_mut().flatten() {
            let c = std::mem::take(&mut r[k]);
            if c.is_zero() {
                continue;
            }
            for (j, e) in new_row.iter().enumerate() {
                if j == k {
                    r[j] = &c * e;
                } else if !e.is_zero() {
                    r[j] += &(&c * e);
                }
            }
        }
        self.rows[entering] = Some(new_row);
        self.cols[k] = basic;
        self.col_of[basic] = Some(k);
        self.col_of[entering] = None;
        self.pivots += 1;
    }

    /// Checks the simplex invariant: rows hold under the assignment and
    /// non-basic variables respect their (consistent) bounds.
    pub fn invariant_holds(&self) -> bool {
        for v in 0..self.rows.len() {
            match &self.rows[v] {
                Some(_) => {
                    let mut sum = DeltaValue::zero();
                    for (n, a) in self.row_entries(v) {
                        if self.rows[n].is_some() {
                            return false;
                        }
                        sum = &sum + &self.value[n].scale(&a);
                    }
                    if sum != self.value[v] {
                        return false;
                    }
                }
                None => {
                    let l = self.active_lower(v).map(|e| &e.value);
                    let u = self.active_upper(v).map(|e| &e.value);
                    let consistent = match (l, u) {
                        (Some(l), Some(u)) => l <= u,
                        _ => true,
                    };
                    if consistent
                        && (l.is_some_and(|l| self.value[v] < *l)
                            || u.is_some_and(|u| self.value[v] > *u))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Runs pivoting until a feasible assignment is found or a row exposes
    /// contradictory bounds. Bland's rule (smallest index first) guarantees
    /// termination.
    pub fn solve(&mut self) -> SimplexOutcome {
        if let Some((id, _)) = self.constants.iter().find(|(_, c)| c.is_trivially_false()) {
            return SimplexOutcome::Infeasible(UnsatWitness {
                coefficients: vec![(*id, Rational::one())],
            });
        }
        let conflict = |s: &Self, v: SimplexVar| match (s.active_lower(v), s.active_upper(v)) {
            (Some(l), Some(u)) => l.value > u.value,
            _ => false,
        };
        // A retraction can resolve a conflict that left a non-basic variable
        // outside its bounds.
        for v in 0..self.rows.len() {
            if self.rows[v].is_none() && !conflict(self, v) {
                self.repair_nonbasic(v);
            }
        }
        if let Some(v) = (0..self.rows.len()).find(|&v| conflict(self, v)) {
            let (l, u) = (self.active_lower(v).expect("conflict"), self.active_upper(v).expect("conflict"));
            let one = Rational::one();
            return SimplexOutcome::Infeasible(self.witness(&[(u, one.clone()), (l, one)]));
        }
        loop {
            let violated = (0..self.rows.len()).find_map(|v| {
                self.rows[v].as_ref()?;
                if let Some(l) = self.active_lower(v) {
                    if self.value[v] < l.value {
                        return Some((v, Side::Lower));
                    }
                }
                if let Some(u) = self.active_upper(v) {
                    if self.value[v] > u.value {
                        return Some((v, Side::Upper));
                    }
                }
                None
            });
            let Some((basic, side)) = violated else {
                return SimplexOutcome::Feasible(self.point());
            };
            let row = self.row_entries(basic);
            // To raise the basic variable, increase entries with a > 0 or
            // decrease those with a < 0; the reverse to lower it.
            let raise = side == Side::Lower;
            let entering = row.iter().find_map(|&(n, ref a)| {
                let up = a.is_positive() == raise;
                let movable = if up {
                    self.active_upper(n).is_none_or(|u| self.value[n] < u.value)
                } else {
                    self.active_lower(n).is_none_or(|l| self.value[n] > l.value)
                };
                movable.then_some(n)
            });
            match entering {
                Some(n) => {
                    let target = if raise {
                        self.active_lower(basic).unwrap().value.clone()
                    } else {
                        self.active_upper(basic).unwrap().value.clone()
                    };
                    self.pivot_and_update(basic, n, target);
                }
                None => {
                    let mut parts: Vec<(&BoundEntry, Rational)> = Vec::new();
                    if raise {
                        // -basic ≥ ... : lower of basic, uppers of a>0, lowers of a<0
                        parts.push((self.active_lower(basic).unwrap(), Rational::one()));
                        for (n, a) in &row {
                            if a.is_positive() {
                                parts.push((self.active_upper(*n).unwrap(), a.clone()));
                            } else {
                                parts.push((self.active_lower(*n).unwrap(), a.abs()));
                            }
                        }
                    } else {
                        parts.push((self.active_upper(basic).unwrap(), Rational::one()));
                        for (n, a) in &row {
                            if a.is_positive() {
                                parts.push((self.active_lower(*n).unwrap(), a.clone()));
                            } else {
                                parts.push((self.active_upper(*n).unwrap(), a.abs()));
                            }
                        }
                    }
                    return SimplexOutcome::Infeasible(self.witness(&parts));
                }
            }
        }
    }

    fn witness(&self, parts: &[(&BoundEntry, Rational)]) -> UnsatWitness {
        let mut acc: BTreeMap<ConstraintId, Rational> = BTreeMap::new();
        for (e, w) in parts {
            *acc.entry(e.source).or_default() += &(w * &e.factor);
        }
        let mut coefficients: Vec<_> = acc.into_iter().filter(|(_, k)| !k.is_zero()).collect();
        // Scale so the smallest positive coefficient is one.
        let pivot = coefficients
            .iter()
            .filter(|(_, k)| k.is_positive())
            .map(|(_, k)| k.clone())
            .min()
            .or_else(|| coefficients.iter().map(|(_, k)| k.abs()).min());
        if let Some(p) = pivot {
            let inv = p.recip();
            for (_, k) in &mut coefficients {
                *k = &*k * &inv;
            }
        }
        UnsatWitness { coefficients }
    }

    /// Picks a concrete `δ > 0` small enough for every bound, and evaluates
    /// the program variables.
    fn point(&self) -> SparseVector {
        let mut delta = Rational::one();
        for v in 0..self.rows.len() {
            let x = &self.value[v];
            if let Some(l) = self.active_lower(v) {
                if x.delta < l.value.delta {
                    let r = (&x.real - &l.value.real) / (&l.value.delta - &x.delta);
                    delta = delta.min(r);
                }
            }
            if let Some(u) = self.active_upper(v) {
                if x.delta > u.value.delta {
                    let r = (&u.value.real - &x.real) / (&x.delta - &u.value.delta);
                    delta = delta.min(r);
                }
            }
        }
        let delta = delta / Rational::from_int(2);
        let mut pt = SparseVector::new();
        for (v, prog) in self.program_var.iter().enumerate() {
            if let Some(x) = prog {
                pt.set(*x, self.value[v].at(&delta));
            }
        }
        pt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::combine_many;
    use crate::numeric::int;
    use proptest::prelude::*;

    fn c(s: &str) -> Constraint {
        s.parse().unwrap()
    }

    fn problem(cs: &[&str]) -> (SimplexProblem, Vec<Constraint>) {
        let cons: Vec<Constraint> = cs.iter().map(|s| c(s)).collect();
        let p = SimplexProblem::build(
            cons.iter()
                .enumerate()
                .map(|(i, k)| (ConstraintId(i as u64), k)),
        );
        (p, cons)
    }

    #[test]
    fn single_constraint_bounds_the_variable() {
        let (p, _) = problem(&["x0 <= 1"]);
        assert_eq!(p.num_slacks(), 0);
        assert_eq!(p.num_bounded(), 1);
    }

    #[test]
    fn shared_term_shares_a_slack() {
        let (mut p, _) = problem(&["x0 + x1 <= 2", "x0 + x1 < 5"]);
        assert_eq!(p.num_slacks(), 1);
        let (s, _) = p.var_for_term(&SparseVector::from_ints(&[(0, 1), (1, 1)])).unwrap();
        assert_eq!(p.active_upper(s).unwrap().value, DeltaValue::real(int(2)));
        assert!(p.solve().is_feasible());
    }

    #[test]
    fn projection_system_layout() {
        let (mut p, _) = problem(&["x1 <= 1", "2*x0 + x1 <= 2", "-x0 - x1 <= 1"]);
        assert_eq!(p.num_slacks(), 2);
        assert_eq!(p.num_bounded(), 3);
        assert!(p.solve().is_feasible());
    }

    #[test]
    fn feasible_interval() {
        let (mut p, cons) = problem(&["x0 <= 1", "-x0 <= 0"]);
        match p.solve() {
            SimplexOutcome::Feasible(pt) => assert!(cons.iter().all(|k| k.satisfies(&pt))),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn contradictory_pair() {
        let (mut p, _) = problem(&["x0 <= 0", "-x0 <= -1"]);
        match p.solve() {
            SimplexOutcome::Infeasible(w) => assert_eq!(
                w.coefficients,
                vec![(ConstraintId(0), int(1)), (ConstraintId(1), int(1))]
            ),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn strict_bounds_are_honoured() {
        let (mut p, cons) = problem(&["x0 < 1", "-x0 < 0", "x0 + x1 < 1", "-x1 <= 0"]);
        match p.solve() {
            SimplexOutcome::Feasible(pt) => assert!(cons.iter().all(|k| k.satisfies(&pt))),
            o => panic!("{o:?}"),
        }
        let (mut p, _) = problem(&["x0 < 1", "-x0 <= -1"]);
        assert!(!p.solve().is_feasible());
    }

    #[test]
    fn set_bound_conflict_gives_two_element_witness() {
        let (mut p, _) = problem(&["x0 + x1 <= 3", "-x0 - x1 <= 0"]);
        let (s, _) = p.var_for_term(&SparseVector::from_ints(&[(0, 1), (1, 1)])).unwrap();
        assert!(p.solve().is_feasible());
        p.set_bound(s, Side::Upper, ConstraintId(9), Some(DeltaValue::real(int(-1))));
        match p.solve() {
            SimplexOutcome::Infeasible(w) => {
                assert_eq!(w.coefficients.len(), 2);
                assert_eq!(w.coefficient(ConstraintId(9)), int(1));
            }
            o => panic!("{o:?}"),
        }
        p.set_bound(s, Side::Upper, ConstraintId(9), None);
        assert!(p.solve().is_feasible());
        assert!(p.invariant_holds());
    }

    #[test]
    fn retracting_absent_bound_is_noop() {
        let (mut p, _) = problem(&["x0 <= 3"]);
        let before = format!("{:?}", p);
        p.set_bound(0, Side::Lower, ConstraintId(42), None);
        assert_eq!(format!("{:?}", p), before);
    }

    #[test]
    fn equality_witness_may_be_negative() {
        let (mut p, _) = problem(&["x0 + x1 = 1", "x0 <= 0", "x1 <= 0"]);
        match p.solve() {
            SimplexOutcome::Infeasible(w) => {
                assert_eq!(w.coefficient(ConstraintId(0)), int(-1));
                assert_eq!(w.coefficient(ConstraintId(1)), int(1));
            }
            o => panic!("{o:?}"),
        }
    }

    fn arb_system() -> impl Strategy<Value = Vec<Constraint>> {
        let one = (proptest::collection::vec(-10i64..=10, 4), -10i64..=10, 0u8..3);
        proptest::collection::vec(one, 1..=8).prop_map(|cs| {
            cs.into_iter()
                .map(|(a, b, k)| {
                    let t = SparseVector::from_entries(a.iter().enumerate().map(|(i, &x)| (i, int(x))));
                    let cmp = [Cmp::Le, Cmp::Lt, Cmp::Eq][k as usize];
                    Constraint::new(t, cmp, int(b))
                })
                .collect()
        })
    }

    /// Feasible answers must come with a satisfying point, infeasible ones
    /// with a witness combining to a trivially false constraint.
    fn certified(cons: &[Constraint], ids: &[u64], out: &SimplexOutcome) -> bool {
        match out {
            SimplexOutcome::Feasible(pt) => ids.iter().all(|&i| cons[i as usize].satisfies(pt)),
            SimplexOutcome::Infeasible(w) => {
                let parts: Vec<_> = w
                    .coefficients
                    .iter()
                    .map(|(id, k)| (k, &cons[id.0 as usize]))
                    .collect();
                w.coefficients.iter().all(|(id, _)| ids.contains(&id.0))
                    && match combine_many(parts) {
                        Ok((t, c, b)) => Constraint::new(t, c, b).is_trivially_false(),
                        Err(_) => false,
                    }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn outcomes_are_certified(cons in arb_system()) {
            let mut p = SimplexProblem::build(cons.iter().enumerate().map(|(i, k)| (ConstraintId(i as u64), k)));
            let out = p.solve();
            let ids: Vec<u64> = (0..cons.len() as u64).collect();
            prop_assert!(certified(&cons, &ids, &out), "{:?} {:?}", cons, out);
            prop_assert!(p.invariant_holds());
        }

        #[test]
        fn incremental_matches_fresh(cons in arb_system(), split in 0usize..8, drop in 0usize..8) {
            let split = split.min(cons.len());
            let mut inc = SimplexProblem::new();
            for (i, k) in cons.iter().enumerate().take(split) {
                inc.add_constraint(ConstraintId(i as u64), k);
            }
            inc.solve();
            for (i, k) in cons.iter().enumerate().skip(split) {
                inc.add_constraint(ConstraintId(i as u64), k);
            }
            let a = inc.solve();
            let mut fresh = SimplexProblem::build(cons.iter().enumerate().map(|(i, k)| (ConstraintId(i as u64), k)));
            let b = fresh.solve();
            prop_assert_eq!(a.is_feasible(), b.is_feasible());
            let all: Vec<u64> = (0..cons.len() as u64).collect();
            prop_assert!(certified(&cons, &all, &a));

            let drop = drop % cons.len();
            inc.remove_constraint(ConstraintId(drop as u64));
            let rest: Vec<u64> = all.iter().copied().filter(|&i| i != drop as u64).collect();
            let a = inc.solve();
            let mut fresh = SimplexProblem::build(rest.iter().map(|&i| (ConstraintId(i), &cons[i as usize])));
            prop_assert_eq!(a.is_feasible(), fresh.solve().is_feasible());
            prop_assert!(certified(&cons, &rest, &a));
        }
    }
}
