//! Certificates: Farkas coefficients over identified source constraints.
//!
//! A [`CertFragment`] records how a derived constraint is obtained as a
//! linear combination of source constraints. Producers keep fragments in
//! lockstep with the constraints they derive ([`TaggedConstraint`]); a
//! [`Cert`] packages one fragment per target constraint (or a single
//! emptiness witness) for the checker.
//!
//! Fragments never carry bounds. Whoever recombines them recomputes the
//! bound from the source constraints.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::constraint::{combine_many, Cmp, Constraint, ConstraintError, ConstraintId};
use crate::numeric::{Rational, SparseVector};

/// Coefficients on source constraints, sorted by id, without zeros.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct CertFragment {
    pairs: Vec<(ConstraintId, Rational)>,
}

impl CertFragment {
    pub fn new() -> Self {
        CertFragment::default()
    }

    /// `[(1, id)]`.
    pub fn identity(id: ConstraintId) -> Self {
        CertFragment::single(id, Rational::one())
    }

    pub fn single(id: ConstraintId, k: Rational) -> Self {
        CertFragment::from_pairs([(id, k)])
    }

    /// Merges duplicate ids by summing and drops zero coefficients.
    pub fn from_pairs<I: IntoIterator<Item = (ConstraintId, Rational)>>(pairs: I) -> Self {
        let mut acc: BTreeMap<ConstraintId, Rational> = BTreeMap::new();
        for (id, k) in pairs {
            *acc.entry(id).or_default() += &k;
        }
        CertFragment {
            pairs: acc.into_iter().filter(|(_, k)| !k.is_zero()).collect(),
        }
    }

    pub fn pairs(&self) -> &[(ConstraintId, Rational)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn coefficient(&self, id: ConstraintId) -> Rational {
        self.pairs
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, k)| k.clone())
            .unwrap_or_default()
    }

    pub fn scale(&self, k: &Rational) -> CertFragment {
        if k.is_zero() {
            return CertFragment::new();
        }
        CertFragment {
            pairs: self.pairs.iter().map(|(i, c)| (*i, c * k)).collect(),
        }
    }

    pub fn neg(&self) -> CertFragment {
        self.scale(&-Rational::one())
    }

    pub fn add(&self, other: &CertFragment) -> CertFragment {
        CertFragment::from_pairs(self.pairs.iter().chain(&other.pairs).cloned())
    }

    /// Replaces every id through `f`.
    pub fn map_ids(&self, mut f: impl FnMut(ConstraintId) -> ConstraintId) -> CertFragment {
        CertFragment::from_pairs(self.pairs.iter().map(|(i, k)| (f(*i), k.clone())))
    }

    /// Rewrites a fragment over intermediate constraints into one over their
    /// sources, given a fragment for each intermediate id.
    pub fn compose(&self, mut inner: impl FnMut(ConstraintId) -> CertFragment) -> CertFragment {
        CertFragment::from_pairs(
            self.pairs
                .iter()
                .flat_map(|(i, k)| inner(*i).scale(k).pairs),
        )
    }

    /// `Σ k·C_id` over the constraints returned by `lookup`, before
    /// canonicalization.
    pub fn recombine<'a>(
        &self,
        lookup: impl Fn(ConstraintId) -> Option<&'a Constraint>,
    ) -> Result<(SparseVector, Cmp, Rational), CertError> {
        let mut parts = Vec::with_capacity(self.pairs.len());
        for (id, k) in &self.pairs {
            let c = lookup(*id).ok_or(CertError::UnknownSource(*id))?;
            parts.push((k, c));
        }
        Ok(combine_many(parts)?)
    }
}

/// `k1·f1 @ k2·f2`, merged by id.
pub fn frag_scale_concat(
    k1: &Rational,
    f1: &CertFragment,
    k2: &Rational,
    f2: &CertFragment,
) -> CertFragment {
    f1.scale(k1).add(&f2.scale(k2))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertError {
    #[error("unknown source constraint #{0}")]
    UnknownSource(ConstraintId),
    #[error(transparent)]
    Combination(#[from] ConstraintError),
    #[error("cannot parse certificate: {0}")]
    Parse(String),
}

impl fmt::Display for CertFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (n, (id, k)) in self.pairs.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({k}, {id})")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for CertFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for CertFragment {
    type Err = CertError;

    fn from_str(s: &str) -> Result<Self, CertError> {
        let err = || CertError::Parse(format!("bad fragment `{s}`"));
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(err)?
            .trim();
        let mut pairs = Vec::new();
        let mut rest = inner;
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(err)?;
            let close = open.find(')').ok_or_else(err)?;
            let (k, id) = open[..close].split_once(',').ok_or_else(err)?;
            let k: Rational = k.trim().parse().map_err(|_| err())?;
            let id: u64 = id.trim().trim_start_matches('#').parse().map_err(|_| err())?;
            pairs.push((ConstraintId(id), k));
            rest = open[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            }
        }
        Ok(CertFragment::from_pairs(pairs))
    }
}

/// Proof that one polyhedron is included in another, or that the first one
/// is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cert {
    /// One item per target constraint; equality targets may instead carry
    /// two items, one per direction.
    Incl(Vec<(ConstraintId, CertFragment)>),
    Empty(CertFragment),
}

impl Cert {
    /// Number of coefficients across all items.
    pub fn size(&self) -> usize {
        match self {
            Cert::Incl(items) => items.iter().map(|(_, f)| f.len()).sum(),
            Cert::Empty(w) => w.len(),
        }
    }
}

impl fmt::Display for Cert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cert::Empty(w) => write!(f, "empty {w}"),
            Cert::Incl(items) => {
                f.write_str("incl {")?;
                for (n, (id, frag)) in items.iter().enumerate() {
                    let sep = if n > 0 { ";" } else { "" };
                    write!(f, "{sep} {id}: {frag}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

impl FromStr for Cert {
    type Err = CertError;

    fn from_str(s: &str) -> Result<Self, CertError> {
        let s = s.trim();
        if let Some(w) = s.strip_prefix("empty") {
            return Ok(Cert::Empty(w.parse()?));
        }
        let body = s
            .strip_prefix("incl")
            .map(str::trim)
            .and_then(|r| r.strip_prefix('{'))
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| CertError::Parse("expected `incl { ... }` or `empty [...]`".into()))?;
        let mut items = Vec::new();
        for item in body.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            let (id, frag) = item
                .split_once(':')
                .ok_or_else(|| CertError::Parse(format!("bad item `{item}`")))?;
            let id: u64 = id
                .trim()
                .trim_start_matches('#')
                .parse()
                .map_err(|_| CertError::Parse(format!("bad target id `{id}`")))?;
            items.push((ConstraintId(id), frag.parse()?));
        }
        Ok(Cert::Incl(items))
    }
}

/// A derived constraint with the fragment proving it.
///
/// `frag` recombines to `cons.term ⋈' b'` with `b' ≤ cons.bound`, strict
/// whenever `cons` is strict and `b' = cons.bound`. Equalities also carry
/// `rev`, proving `-cons.term ≤ -cons.bound` the same way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedConstraint {
    pub cons: Constraint,
    pub frag: CertFragment,
    pub rev: Option<CertFragment>,
}

impl TaggedConstraint {
    /// A source constraint proving itself.
    pub fn source(id: ConstraintId, cons: Constraint) -> Self {
        let rev = (cons.cmp() == Cmp::Eq).then(|| CertFragment::single(id, -Rational::one()));
        TaggedConstraint {
            cons,
            frag: CertFragment::identity(id),
            rev,
        }
    }

    /// Fragment proving `k·cons` read as an inequality; negative `k` needs
    /// an equality.
    pub fn directed(&self, k: &Rational) -> CertFragment {
        if k.is_negative() {
            self.rev
                .as_ref()
                .expect("negative coefficient on an inequality")
                .scale(&k.abs())
        } else {
            self.frag.scale(k)
        }
    }

    /// `Σ k_i·t_i`, canonicalized, with fragments tracking the factor.
    pub fn combination(parts: &[(Rational, &TaggedConstraint)]) -> Result<TaggedConstraint, ConstraintError> {
        let (term, cmp, bound) = combine_many(parts.iter().map(|(k, t)| (k, &t.cons)))?;
        let (cons, f) = Constraint::canonicalize(term, cmp, bound);
        let up = CertFragment::from_pairs(parts.iter().flat_map(|(k, t)| t.directed(k).pairs));
        if cmp != Cmp::Eq {
            return Ok(TaggedConstraint {
                cons,
                frag: up.scale(&f),
                rev: None,
            });
        }
        let down = CertFragment::from_pairs(parts.iter().flat_map(|(k, t)| t.directed(&-k).pairs));
        let (frag, rev) = if f.is_negative() { (down, up) } else { (up, down) };
        let a = f.abs();
        Ok(TaggedConstraint {
            cons,
            frag: frag.scale(&a),
            rev: Some(rev.scale(&a)),
        })
    }

    /// Replaces the fragments by ones over the sources of the sources.
    pub fn compose(&self, inner: &impl Fn(ConstraintId) -> TaggedConstraint) -> TaggedConstraint {
        let lift = |frag: &CertFragment| {
            CertFragment::from_pairs(frag.pairs().iter().flat_map(|(id, k)| inner(*id).directed(k).pairs))
        };
        TaggedConstraint {
            cons: self.cons.clone(),
            frag: lift(&self.frag),
            rev: self.rev.as_ref().map(lift),
        }
    }

    /// Does an equality's proof consist of one equality combination?
    pub fn is_pure(&self) -> bool {
        self.rev.as_ref().is_some_and(|r| *r == self.frag.neg())
    }

    /// Certificate items proving this constraint as target `id`.
    pub fn items(&self, id: ConstraintId) -> Vec<(ConstraintId, CertFragment)> {
        match &self.rev {
            Some(rev) if !self.is_pure() => vec![(id, self.frag.clone()), (id, rev.clone())],
            _ => vec![(id, self.frag.clone())],
        }
    }

    /// Checks the fragment invariant against the sources.
    pub fn is_faithful<'a>(&self, lookup: impl Fn(ConstraintId) -> Option<&'a Constraint> + Copy) -> bool {
        let proves = |frag: &CertFragment, term: &SparseVector, bound: &Rational, strict: bool| match frag.recombine(lookup) {
            Ok((t, c, b)) => t == *term && (b < *bound || (b == *bound && (!strict || c == Cmp::Lt))),
            Err(_) => false,
        };
        let c = &self.cons;
        if !proves(&self.frag, c.term(), c.bound(), c.cmp() == Cmp::Lt) {
            return false;
        }
        match (&self.rev, c.cmp()) {
            (Some(rev), Cmp::Eq) => proves(rev, &c.term().neg(), &-c.bound(), false),
            (None, Cmp::Eq) => false,
            _ => true,
        }
    }
}

/// `[(1, id)]` for each constraint.
pub fn init_fragments(constraints: &[(ConstraintId, Constraint)]) -> Vec<TaggedConstraint> {
    constraints
        .iter()
        .map(|(id, c)| TaggedConstraint::source(*id, c.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use proptest::prelude::*;

    fn id(n: u64) -> ConstraintId {
        ConstraintId(n)
    }

    fn c(s: &str) -> Constraint {
        s.parse().unwrap()
    }

    #[test]
    fn scale_concat_examples() {
        let f1 = CertFragment::identity(id(2));
        let f2 = CertFragment::identity(id(3));
        let r = frag_scale_concat(&int(1), &f1, &int(2), &f2);
        assert_eq!(r.pairs(), &[(id(2), int(1)), (id(3), int(2))]);
        assert_eq!(frag_scale_concat(&int(3), &f1, &int(0), &f2), f1.scale(&int(3)));
        let m = frag_scale_concat(&int(1), &f1, &int(2), &f1);
        assert_eq!(m.pairs(), &[(id(2), int(3))]);
        let z = frag_scale_concat(&int(1), &f1, &int(-1), &f1);
        assert!(z.is_empty());
    }

    #[test]
    fn init_fragments_are_identities() {
        let cs = vec![(id(0), c("x1 <= 1")), (id(1), c("2*x0 + x1 <= 2")), (id(2), c("-x0 - x1 <= 1"))];
        let t = init_fragments(&cs);
        assert_eq!(t.len(), 3);
        for (i, tc) in t.iter().enumerate() {
            assert_eq!(tc.frag, CertFragment::identity(id(i as u64)));
        }
        assert!(init_fragments(&[]).is_empty());
    }

    #[test]
    fn projection_step_is_tracked() {
        let cs = vec![(id(0), c("x1 <= 1")), (id(1), c("2*x0 + x1 <= 2")), (id(2), c("-x0 - x1 <= 1"))];
        let t = init_fragments(&cs);
        let r = TaggedConstraint::combination(&[(int(1), &t[1]), (int(2), &t[2])]).unwrap();
        assert_eq!(r.cons, c("-x1 <= 4"));
        assert_eq!(r.frag.pairs(), &[(id(1), int(1)), (id(2), int(2))]);
        let lookup = |i: ConstraintId| cs.iter().find(|(j, _)| *j == i).map(|(_, c)| c);
        assert!(r.is_faithful(lookup));
    }

    #[test]
    fn equality_fragments_follow_sign_of_factor() {
        let cs = vec![(id(0), c("x0 - x1 = 0")), (id(1), c("x1 = 2"))];
        let t = init_fragments(&cs);
        // -(x0 - x1 = 0) - (x1 = 2) = -x0 = -2, canonical x0 = 2 (factor -1)
        let r = TaggedConstraint::combination(&[(int(-1), &t[0]), (int(-1), &t[1])]).unwrap();
        assert_eq!(r.cons, c("x0 = 2"));
        assert!(r.is_pure());
        assert_eq!(r.items(id(7)).len(), 1);
        let lookup = |i: ConstraintId| cs.iter().find(|(j, _)| *j == i).map(|(_, c)| c);
        assert!(r.is_faithful(lookup));
    }

    #[test]
    fn mixed_equality_proof_yields_two_items() {
        let cs = vec![(id(0), c("x0 <= 1")), (id(1), c("-x0 <= -1"))];
        let t = init_fragments(&cs);
        let tagged = TaggedConstraint {
            cons: c("x0 = 1"),
            frag: t[0].frag.clone(),
            rev: Some(t[1].frag.clone()),
        };
        let lookup = |i: ConstraintId| cs.iter().find(|(j, _)| *j == i).map(|(_, c)| c);
        assert!(tagged.is_faithful(lookup));
        assert_eq!(tagged.items(id(0)).len(), 2);
    }

    #[test]
    fn text_forms_roundtrip() {
        let f: CertFragment = "[(1, 2), (1/2, 3)]".parse().unwrap();
        assert_eq!(f.pairs(), &[(id(2), int(1)), (id(3), rat(1, 2))]);
        assert_eq!(f.to_string(), "[(1, 2), (1/2, 3)]");
        let cert = Cert::Incl(vec![(id(4), f.clone()), (id(5), CertFragment::identity(id(0)))]);
        assert_eq!(cert.to_string(), "incl { 4: [(1, 2), (1/2, 3)]; 5: [(1, 0)] }");
        assert_eq!(cert.to_string().parse::<Cert>().unwrap(), cert);
        let e = Cert::Empty(f);
        assert_eq!(e.to_string().parse::<Cert>().unwrap(), e);
        assert_eq!("incl { }".parse::<Cert>().unwrap(), Cert::Incl(vec![]));
        assert!("incl { 1 [(1, 2)] }".parse::<Cert>().is_err());
    }

    fn arb_frag() -> impl Strategy<Value = CertFragment> {
        proptest::collection::vec((0u64..4, 0i64..5), 0..5)
            .prop_map(|v| CertFragment::from_pairs(v.into_iter().map(|(i, k)| (id(i), int(k)))))
    }

    proptest! {
        #[test]
        fn merging_preserves_meaning(f1 in arb_frag(), f2 in arb_frag(), k1 in 0i64..4, k2 in 0i64..4) {
            let cs = [c("x0 <= 1"), c("x1 < 2"), c("x0 + x1 = 3"), c("x0 - 2*x1 <= 0")];
            let lookup = |i: ConstraintId| cs.get(i.0 as usize);
            let merged = frag_scale_concat(&int(k1), &f1, &int(k2), &f2);
            let (t1, _, b1) = f1.recombine(lookup).unwrap();
            let (t2, _, b2) = f2.recombine(lookup).unwrap();
            let (t, _, b) = merged.recombine(lookup).unwrap();
            prop_assert_eq!(t, t1.scale(&int(k1)).add_scaled(&int(k2), &t2));
            prop_assert_eq!(b, int(k1) * b1 + int(k2) * b2);
        }

        #[test]
        fn fragment_text_roundtrip(f in arb_frag()) {
            prop_assert_eq!(f.to_string().parse::<CertFragment>().unwrap(), f);
        }
    }
}
