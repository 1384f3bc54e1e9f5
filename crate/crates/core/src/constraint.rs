//! Linear constraints `a·x ⋈ b` with `⋈ ∈ {≤, <, =}`.
//!
//! A [`Constraint`] is always stored in canonical form: the term has integer
//! coefficients with collective gcd one, and equalities have a positive
//! lowest-index coefficient. Constructors report the positive (or, for
//! equalities, possibly negative) factor they applied so that certificate
//! bookkeeping can stay exact.

use std::fmt;
use std::str::FromStr;

use crate::numeric::{Rational, SparseVector, Var, VarNames};

/// Comparison kind of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "=",
        }
    }

    /// Does `lhs ⋈ rhs` hold?
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Eq => lhs == rhs,
        }
    }
}

/// Identifier of a constraint, unique within one polyhedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ConstraintId(pub u64);

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstraintError {
    #[error("negative coefficient {0} applied to an inequality")]
    NegativeCoefficient(Rational),
    #[error("equalities have no complement; split them first")]
    EqualityComplement,
    #[error("cannot parse constraint `{0}`: {1}")]
    Parse(String, String),
}

/// A linear constraint `term ⋈ bound` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    term: SparseVector,
    cmp: Cmp,
    bound: Rational,
}

impl Constraint {
    /// Builds the canonical form of `term ⋈ bound`.
    pub fn new(term: SparseVector, cmp: Cmp, bound: Rational) -> Self {
        Constraint::canonicalize(term, cmp, bound).0
    }

    /// Returns the canonical constraint together with the factor `f` such
    /// that canonical = `f`·(term ⋈ bound). `f > 0` unless `cmp` is `Eq`.
    pub fn canonicalize(term: SparseVector, cmp: Cmp, bound: Rational) -> (Self, Rational) {
        if term.is_empty() {
            return (Constraint { term, cmp, bound }, Rational::one());
        }
        let (norm, g) = term.gcd_normalize();
        let mut factor = g.recip();
        let mut term = norm;
        if cmp == Cmp::Eq && term.leading().is_some_and(|(_, c)| c.is_negative()) {
            term = term.neg();
            factor = -factor;
        }
        let bound = &bound * &factor;
        (Constraint { term, cmp, bound }, factor)
    }

    pub fn le(term: SparseVector, bound: Rational) -> Self {
        Constraint::new(term, Cmp::Le, bound)
    }

    pub fn lt(term: SparseVector, bound: Rational) -> Self {
        Constraint::new(term, Cmp::Lt, bound)
    }

    pub fn eq(term: SparseVector, bound: Rational) -> Self {
        Constraint::new(term, Cmp::Eq, bound)
    }

    pub fn term(&self) -> &SparseVector {
        &self.term
    }

    pub fn cmp(&self) -> Cmp {
        self.cmp
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn is_constant(&self) -> bool {
        self.term.is_empty()
    }

    /// `0 ⋈ b` that holds.
    pub fn is_trivially_true(&self) -> bool {
        self.is_constant() && self.cmp.holds(&Rational::zero(), &self.bound)
    }

    /// `0 ⋈ b` that fails.
    pub fn is_trivially_false(&self) -> bool {
        self.is_constant() && !self.cmp.holds(&Rational::zero(), &self.bound)
    }

    pub fn satisfies(&self, point: &SparseVector) -> bool {
        self.cmp.holds(&self.term.dot(point), &self.bound)
    }

    /// The complementary half-space: `a·x ≤ b` becomes `-a·x < -b`, and
    /// `a·x < b` becomes `-a·x ≤ -b`.
    pub fn complement(&self) -> Result<Constraint, ConstraintError> {
        let cmp = match self.cmp {
            Cmp::Le => Cmp::Lt,
            Cmp::Lt => Cmp::Le,
            Cmp::Eq => return Err(ConstraintError::EqualityComplement),
        };
        Ok(Constraint {
            term: self.term.neg(),
            cmp,
            bound: -&self.bound,
        })
    }

    /// The same constraint with a different comparison. Canonical form is
    /// re-established (only relevant when switching to `Eq`).
    pub fn with_cmp(&self, cmp: Cmp) -> Constraint {
        Constraint::new(self.term.clone(), cmp, self.bound.clone())
    }

    /// `a·x ≤ b` for `a·x ⋈ b`.
    pub fn closure(&self) -> Constraint {
        match self.cmp {
            Cmp::Lt => self.with_cmp(Cmp::Le),
            _ => self.clone(),
        }
    }

    /// The two halves `a·x ≤ b` and `-a·x ≤ -b` of an equality.
    pub fn split_eq(&self) -> (Constraint, Constraint) {
        (
            Constraint {
                term: self.term.clone(),
                cmp: Cmp::Le,
                bound: self.bound.clone(),
            },
            Constraint {
                term: self.term.neg(),
                cmp: Cmp::Le,
                bound: -&self.bound,
            },
        )
    }

    /// Renames variables; the result is re-canonicalized.
    pub fn rename(&self, f: impl FnMut(Var) -> Var) -> Constraint {
        Constraint::new(self.term.map_indices(f), self.cmp, self.bound.clone())
    }

    pub fn fmt_with(&self, names: &VarNames, f: &mut impl fmt::Write) -> fmt::Result {
        if self.term.is_empty() {
            f.write_str("0")?;
        } else {
            self.term.fmt_with(names, f)?;
        }
        write!(f, " {} {}", self.cmp.symbol(), self.bound)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(&VarNames::default(), f)
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Comparison of `k1·c1 + k2·c2`: operands with a zero coefficient do not
/// count; the result is `Eq` only if every counted operand is, and strict if
/// any counted inequality is strict.
fn combined_cmp(parts: &[(&Rational, Cmp)]) -> Cmp {
    let used: Vec<Cmp> = parts
        .iter()
        .filter(|(k, _)| !k.is_zero())
        .map(|(_, c)| *c)
        .collect();
    if used.iter().all(|c| *c == Cmp::Eq) {
        Cmp::Eq
    } else if used.contains(&Cmp::Lt) {
        Cmp::Lt
    } else {
        Cmp::Le
    }
}

fn check_sign(k: &Rational, c: &Constraint) -> Result<(), ConstraintError> {
    if c.cmp != Cmp::Eq && k.is_negative() {
        Err(ConstraintError::NegativeCoefficient(k.clone()))
    } else {
        Ok(())
    }
}

/// `k1·c1 + k2·c2` before canonicalization.
pub fn combine_raw(
    k1: &Rational,
    c1: &Constraint,
    k2: &Rational,
    c2: &Constraint,
) -> Result<(SparseVector, Cmp, Rational), ConstraintError> {
    check_sign(k1, c1)?;
    check_sign(k2, c2)?;
    let term = c1.term.scale(k1).add_scaled(k2, &c2.term);
    let bound = k1 * &c1.bound + k2 * &c2.bound;
    let cmp = combined_cmp(&[(k1, c1.cmp), (k2, c2.cmp)]);
    Ok((term, cmp, bound))
}

/// The positive combination `k1·c1 + k2·c2`, canonicalized. Coefficients on
/// equalities may have any sign.
pub fn combine(
    k1: &Rational,
    c1: &Constraint,
    k2: &Rational,
    c2: &Constraint,
) -> Result<Constraint, ConstraintError> {
    let (t, c, b) = combine_raw(k1, c1, k2, c2)?;
    Ok(Constraint::new(t, c, b))
}

/// `Σ k_i·c_i` before canonicalization.
pub fn combine_many<'a, I>(parts: I) -> Result<(SparseVector, Cmp, Rational), ConstraintError>
where
    I: IntoIterator<Item = (&'a Rational, &'a Constraint)>,
{
    let mut term = SparseVector::new();
    let mut bound = Rational::zero();
    let mut cmps = Vec::new();
    for (k, c) in parts {
        check_sign(k, c)?;
        term = term.add_scaled(k, &c.term);
        bound += &(k * &c.bound);
        cmps.push((k, c.cmp));
    }
    Ok((term, combined_cmp(&cmps), bound))
}

/// Single-constraint inclusion: returns `k > 0` with `k·a1 = a2` such that
/// `k·c1` entails `c2`.
///
/// Strictness: a strict source proves `≤` or `<` targets with `k·b1 ≤ b2`; a
/// non-strict source proves `≤` with `k·b1 ≤ b2` and `<` with `k·b1 < b2`; an
/// equality proves an equality only with `k·b1 = b2`. Inequalities never
/// prove equalities.
pub fn syntactic_incl(c1: &Constraint, c2: &Constraint) -> Option<Rational> {
    if c1.term.is_empty() || c2.term.is_empty() {
        return None;
    }
    let (i1, a1) = c1.term.leading()?;
    let (i2, a2) = c2.term.leading()?;
    if i1 != i2 {
        return None;
    }
    let k = &a2 / &a1;
    if !k.is_positive() || c1.term.scale(&k) != c2.term {
        return None;
    }
    let b1 = &k * &c1.bound;
    let ok = match (c1.cmp, c2.cmp) {
        (Cmp::Eq, Cmp::Eq) => b1 == c2.bound,
        (_, Cmp::Eq) => false,
        (Cmp::Le, Cmp::Lt) | (Cmp::Eq, Cmp::Lt) => b1 < c2.bound,
        _ => b1 <= c2.bound,
    };
    ok.then_some(k)
}

/// Eliminates the defined variables of `defs` from `c`.
///
/// Each definition is an equality used to remove its variable; later
/// definitions must not reintroduce earlier defined variables. Returns the
/// canonical result, the coefficient applied to each definition, and the
/// canonicalization factor, so that
/// `result = factor·(c + Σ coeffs[i]·defs[i])`.
pub fn substitute(c: &Constraint, defs: &[(Var, Constraint)]) -> (Constraint, Vec<Rational>, Rational) {
    let mut term = c.term.clone();
    let mut bound = c.bound.clone();
    let mut coeffs = Vec::with_capacity(defs.len());
    for (v, d) in defs {
        debug_assert_eq!(d.cmp, Cmp::Eq);
        let a = term.get(*v);
        if a.is_zero() {
            coeffs.push(Rational::zero());
            continue;
        }
        let k = -(&a / &d.term.get(*v));
        term = term.add_scaled(&k, &d.term);
        bound += &(&k * &d.bound);
        coeffs.push(k);
    }
    let (res, factor) = Constraint::canonicalize(term, c.cmp, bound);
    (res, coeffs, factor)
}

/// Parses `c*x<i> + ... + c` into a linear term and a constant.
///
/// Accepts `+`/`-` separators, bare `x<i>`, and `-x<i>`.
pub fn parse_linexpr(s: &str) -> Result<(SparseVector, Rational), String> {
    let mut term = SparseVector::new();
    let mut constant = Rational::zero();
    let src = s.trim();
    if src.is_empty() {
        return Err("empty expression".into());
    }
    // Split into signed summands, keeping a leading sign with its summand.
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut expect_operand = true;
    for ch in src.chars() {
        match ch {
            '+' | '-' if !expect_operand && !cur.trim_end().ends_with(['*', '/']) => {
                pieces.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
                expect_operand = true;
            }
            '-' if expect_operand && cur.trim().is_empty() => {
                neg = !neg;
            }
            '+' if expect_operand && cur.trim().is_empty() => {}
            c if c.is_whitespace() => cur.push(c),
            c => {
                cur.push(c);
                expect_operand = false;
            }
        }
    }
    if expect_operand {
        return Err(format!("dangling operator in `{src}`"));
    }
    pieces.push((neg, cur));
    for (neg, piece) in pieces {
        let p: String = piece.chars().filter(|c| !c.is_whitespace()).collect();
        let (coef, var) = match p.split_once('*') {
            Some((c, v)) => (parse_rational(c)?, Some(parse_var(v)?)),
            None if p.starts_with('x') => (Rational::one(), Some(parse_var(&p)?)),
            None => (parse_rational(&p)?, None),
        };
        let coef = if neg { -coef } else { coef };
        match var {
            Some(v) => {
                let cur = term.get(v);
                term.set(v, cur + coef);
            }
            None => constant += &coef,
        }
    }
    Ok((term, constant))
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

/// Parses `x<i>` into `i`.
pub fn parse_var(s: &str) -> Result<Var, String> {
    let s = s.trim();
    s.strip_prefix('x')
        .and_then(|d| if d.is_empty() { None } else { d.parse::<Var>().ok() })
        .ok_or_else(|| format!("expected a variable `x<i>`, found `{s}`"))
}

impl FromStr for Constraint {
    type Err = ConstraintError;

    /// Parses `lhs (<=|<|=|>=|>) rhs` where both sides are linear expressions.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |m: String| ConstraintError::Parse(s.to_string(), m);
        let ops = ["<=", ">=", "<", ">", "="];
        let (pos, op) = ops
            .iter()
            .filter_map(|op| s.find(op).map(|p| (p, *op)))
            .min_by_key(|(p, op)| (*p, std::cmp::Reverse(op.len())))
            .ok_or_else(|| err("missing comparison operator".into()))?;
        let (lhs, rhs) = (&s[..pos], &s[pos + op.len()..]);
        let (lt, lc) = parse_linexpr(lhs).map_err(err)?;
        let (rt, rc) = parse_linexpr(rhs).map_err(err)?;
        // lhs - rhs ⋈ 0  ⇔  (lt - rt)·x ⋈ rc - lc
        let term = lt.sub(&rt);
        let bound = rc - lc;
        let c = match op {
            "<=" => Constraint::new(term, Cmp::Le, bound),
            "<" => Constraint::new(term, Cmp::Lt, bound),
            "=" => Constraint::new(term, Cmp::Eq, bound),
            ">=" => Constraint::new(term.neg(), Cmp::Le, -bound),
            ">" => Constraint::new(term.neg(), Cmp::Lt, -bound),
            _ => unreachable!(),
        };
        Ok(c)
    }
}
