//! Independent certificate checker.
//!
//! Only recombination and comparison, written against the numeric layer and
//! the plain data types. Nothing here calls into the simplex or the domain
//! operators, so trusting a verdict means trusting this file and the
//! arithmetic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::certificate::{Cert, CertFragment};
use crate::constraint::{Cmp, Constraint, ConstraintId};
use crate::numeric::{Rational, SparseVector};

/// Flat list of identified constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckerPolyhedron {
    pub constraints: Vec<(ConstraintId, Constraint)>,
}

impl CheckerPolyhedron {
    pub fn new(constraints: Vec<(ConstraintId, Constraint)>) -> Self {
        CheckerPolyhedron { constraints }
    }

    pub fn get(&self, id: ConstraintId) -> Option<&Constraint> {
        self.constraints.iter().find(|(i, _)| *i == id).map(|(_, c)| c)
    }
}

impl fmt::Display for CheckerPolyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, c) in &self.constraints {
            writeln!(f, "{id}: {c}")?;
        }
        Ok(())
    }
}

/// Text form: `<id>: <constraint>` entries separated by newlines or `;`,
/// with `#` comments.
impl FromStr for CheckerPolyhedron {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut constraints = Vec::new();
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or("");
            for entry in line.split(';').map(str::trim).filter(|e| !e.is_empty()) {
                let (id, c) = entry
                    .split_once(':')
                    .ok_or_else(|| format!("expected `<id>: <constraint>`, got `{entry}`"))?;
                let id: u64 = id.trim().parse().map_err(|_| format!("bad id `{id}`"))?;
                let c: Constraint = c.parse().map_err(|e| format!("{e}"))?;
                constraints.push((ConstraintId(id), c));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some((id, _)) = constraints.iter().find(|(id, _)| !seen.insert(*id)) {
            return Err(format!("duplicate id {id}"));
        }
        Ok(CheckerPolyhedron { constraints })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckError {
    UnknownSource(ConstraintId),
    NegativeCoefficient(ConstraintId),
    /// The recombined constraint does not entail the target.
    Mismatch(ConstraintId),
    /// Empty witness whose combination is satisfiable.
    NotContradictory,
    UncoveredTarget(ConstraintId),
    UnknownTarget(ConstraintId),
    DuplicateItem(ConstraintId),
}

impl fmt::Display for CheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckError::UnknownSource(i) => write!(f, "unknown source id {i}"),
            CheckError::NegativeCoefficient(i) => write!(f, "negative coefficient on inequality {i}"),
            CheckError::Mismatch(i) => write!(f, "combination does not entail target {i}"),
            CheckError::NotContradictory => write!(f, "emptiness witness is not contradictory"),
            CheckError::UncoveredTarget(i) => write!(f, "target {i} has no certificate item"),
            CheckError::UnknownTarget(i) => write!(f, "certificate item for unknown target {i}"),
            CheckError::DuplicateItem(i) => write!(f, "target {i} has too many items"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Value,
    Error(CheckError),
}

impl CheckOutcome {
    pub fn is_value(&self) -> bool {
        *self == CheckOutcome::Value
    }
}

/// `term ⋈ bound` as recombined from a fragment.
struct Combined {
    term: SparseVector,
    strict: bool,
    equality: bool,
    bound: Rational,
}

fn recombine(p1: &HashMap<ConstraintId, &Constraint>, frag: &CertFragment) -> Result<Combined, CheckError> {
    let mut term = SparseVector::new();
    let mut bound = Rational::zero();
    let mut strict = false;
    let mut equality = true;
    for (id, k) in frag.pairs() {
        let c: &Constraint = p1.get(id).ok_or(CheckError::UnknownSource(*id))?;
        if k.is_zero() {
            continue;
        }
        if c.cmp() != Cmp::Eq {
            if k.is_negative() {
                return Err(CheckError::NegativeCoefficient(*id));
            }
            equality = false;
            strict |= c.cmp() == Cmp::Lt;
        }
        term = term.add_scaled(k, c.term());
        bound = bound + k * c.bound();
    }
    Ok(Combined { term, strict, equality, bound })
}

/// Does `comb` entail `term ≤ bound` (or `<` when `strict`)?
fn entails(comb: &Combined, term: &SparseVector, bound: &Rational, strict: bool) -> bool {
    comb.term == *term && (comb.bound < *bound || (comb.bound == *bound && (!strict || comb.strict)))
}

/// Verifies that `cert` proves `p1 ⊑ p2`.
pub fn check(p1: &CheckerPolyhedron, p2: &CheckerPolyhedron, cert: &Cert) -> CheckOutcome {
    match check_inner(p1, p2, cert) {
        Ok(()) => CheckOutcome::Value,
        Err(e) => CheckOutcome::Error(e),
    }
}

fn check_inner(p1: &CheckerPolyhedron, p2: &CheckerPolyhedron, cert: &Cert) -> Result<(), CheckError> {
    let sources: HashMap<ConstraintId, &Constraint> = p1.constraints.iter().map(|(i, c)| (*i, c)).collect();
    match cert {
        Cert::Empty(w) => {
            let comb = recombine(&sources, w)?;
            let zero = Rational::zero();
            let contradictory = comb.term.is_empty()
                && if comb.equality {
                    comb.bound != zero
                } else {
                    comb.bound < zero || (comb.bound == zero && comb.strict)
                };
            if contradictory {
                Ok(())
            } else {
                Err(CheckError::NotContradictory)
            }
        }
        Cert::Incl(items) => {
            let targets: HashMap<ConstraintId, &Constraint> =
                p2.constraints.iter().map(|(i, c)| (*i, c)).collect();
            let mut by_target: BTreeMap<ConstraintId, Vec<&CertFragment>> = BTreeMap::new();
            for (t, frag) in items {
                if !targets.contains_key(t) {
                    return Err(CheckError::UnknownTarget(*t));
                }
                by_target.entry(*t).or_default().push(frag);
            }
            for (id, target) in &p2.constraints {
                let frags = by_target.get(id).ok_or(CheckError::UncoveredTarget(*id))?;
                let combs = frags
                    .iter()
                    .map(|f| recombine(&sources, f))
                    .collect::<Result<Vec<_>, _>>()?;
                let (t, b) = (target.term(), target.bound());
                let ok = match (target.cmp(), combs.as_slice()) {
                    (Cmp::Le, [c]) => entails(c, t, b, false),
                    (Cmp::Lt, [c]) => entails(c, t, b, true),
                    (Cmp::Eq, [c]) => c.equality && c.term == *t && c.bound == *b,
                    (Cmp::Eq, [c1, c2]) => {
                        entails(c1, t, b, false) && entails(c2, &t.neg(), &-b, false)
                    }
                    _ => return Err(CheckError::DuplicateItem(*id)),
                };
                if !ok {
                    return Err(CheckError::Mismatch(*id));
                }
            }
            Ok(())
        }
    }
}
