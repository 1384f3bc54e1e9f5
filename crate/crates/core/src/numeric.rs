//! Exact scalars and sparse vectors.
//!
//! [`Rational`] wraps an arbitrary-precision rational that is always kept in
//! lowest terms. [`SparseVector`] stores the nonzero coefficients of a linear
//! term in a binary radix tree whose root-to-node path encodes the variable
//! index. [`DeltaValue`] is the `real + delta·δ` pair the simplex uses to
//! reason about strict bounds.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Positive `g` with every `c/g` integral and jointly coprime, when all the
/// inputs are small and the intermediate products fit.
fn small_content<'a>(cs: impl Iterator<Item = &'a Rational>) -> Option<Rational> {
    let (mut lcm, mut gcd) = (1i128, 0u128);
    let cs: Vec<(i64, i64)> = cs
        .map(|c| match c.0 {
            Repr::Small(n, d) => Some((n, d)),
            Repr::Big(_) => None,
        })
        .collect::<Option<_>>()?;
    for &(_, d) in &cs {
        let d = d as i128;
        lcm = (lcm / gcd_u128(lcm as u128, d as u128) as i128).checked_mul(d)?;
        if lcm > i64::MAX as i128 {
            return None;
        }
    }
    for &(n, d) in &cs {
        gcd = gcd_u128(gcd, (n as i128 * (lcm / d as i128)).unsigned_abs());
    }
    Some(Rational::from_i128(gcd as i128, lcm))
}

/// Exact rational number in reduced form with a positive denominator.
///
/// Values whose numerator and denominator fit in `i64` are stored inline and
/// combined with `i128` intermediates; anything larger falls back to
/// arbitrary precision. The representation of a value is unique.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// `n/d` with `d > 0`, `gcd(n, d) = 1` and `n != i64::MIN`.
    Small(i64, i64),
    /// Only for values that do not fit `Small`.
    Big(BigRational),
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64) as u128;
    }
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_int(n: i64) -> Self {
        Rational::from_i128(n as i128, 1)
    }

    /// Builds `numer/denom`; panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational::from_i128(numer as i128, denom as i128)
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational::from_big(BigRational::new(numer, denom))
    }

    /// `n/d` for any `d != 0` whose magnitudes stay below `2^127`.
    fn from_i128(n: i128, d: i128) -> Self {
        let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
        let (n, d) = if d == 1 {
            (n, d)
        } else {
            let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
            if g > 1 {
                (n / g, d / g)
            } else {
                (n, d)
            }
        };
        if n > i64::MIN as i128 && n <= i64::MAX as i128 && d <= i64::MAX as i128 {
            Rational(Repr::Small(n as i64, d as i64))
        } else {
            Rational(Repr::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d))))
        }
    }

    /// Takes a reduced big rational, demoting it when it fits.
    fn from_big(r: BigRational) -> Self {
        use num_traits::ToPrimitive;
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    /// Nearest `f64`, for floating-point heuristics only.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// The exact value of a finite `x`.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational::from_big)
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(n.abs(), *d)),
            Repr::Big(r) => Rational(Repr::Big(r.abs())),
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small(n, d) => Rational::from_i128(*d as i128, *n as i128),
            Repr::Big(r) => Rational::from_big(r.recip()),
        }
    }

    pub fn signum(&self) -> Ordering {
        match &self.0 {
            Repr::Small(n, _) => n.cmp(&0),
            Repr::Big(r) => r.numer().sign().cmp(&num_bigint::Sign::NoSign),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn add_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, 1), Repr::Small(c, 1)) => match a.checked_add(*c) {
                Some(n) if n != i64::MIN => Rational(Repr::Small(n, 1)),
                _ => Rational::from_i128(*a as i128 + *c as i128, 1),
            },
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if b == d {
                    Rational::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                    Rational::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Rational::from_big(self.to_big() + rhs.to_big()),
        }
    }

    fn sub_ref(&self, rhs: &Rational) -> Rational {
        self.add_ref(&-rhs)
    }

    fn mul_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, 1), Repr::Small(c, 1)) => match a.checked_mul(*c) {
                Some(n) if n != i64::MIN => Rational(Repr::Small(n, 1)),
                _ => Rational::from_i128(*a as i128 * *c as i128, 1),
            },
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                Rational::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rational::from_big(self.to_big() * rhs.to_big()),
        }
    }

    fn div_ref(&self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                Rational::from_i128(*a as i128 * *d as i128, *b as i128 * *c as i128)
            }
            _ => Rational::from_big(self.to_big() / rhs.to_big()),
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(n))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (t, None),
        };
        let numer = BigInt::from_str(n).map_err(|_| err())?;
        let denom = match d {
            Some(d) => BigInt::from_str(d).map_err(|_| err())?,
            None => BigInt::one(),
        };
        if denom.is_zero() || denom.is_negative() {
            return Err(err());
        }
        Ok(Rational::from_bigints(numer, denom))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                self.$imp(rhs)
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$imp(&rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                self.$imp(rhs)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$imp(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = self.add_ref(rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = self.sub_ref(rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = self.mul_ref(rhs);
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
            Repr::Big(r) => Rational(Repr::Big(-r)),
        }
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Shorthand for `Rational::new`.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

/// Shorthand for an integral `Rational`.
pub fn int(n: i64) -> Rational {
    Rational::from_int(n)
}

/// Index of a variable. Names live in a separate [`VarNames`] table.
pub type Var = usize;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Node {
    value: Option<Rational>,
    children: [Option<Box<Node>>; 2],
}

impl Node {
    fn is_vacant(&self) -> bool {
        self.value.is_none() && self.children[0].is_none() && self.children[1].is_none()
    }
}

fn prune(node: Node) -> Option<Box<Node>> {
    if node.is_vacant() {
        None
    } else {
        Some(Box::new(node))
    }
}

/// Bits of `index + 1` below its leading one, least significant first. The
/// leading one marks where the path stops.
fn path_key(index: Var) -> u64 {
    index as u64 + 1
}

/// Sparse map from variable index to nonzero coefficient.
///
/// The tree never stores a zero and never keeps an empty subtree, so two
/// vectors that are equal as functions are equal structurally, which makes
/// the derived `Eq` and `Hash` meaningful.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SparseVector {
    root: Option<Box<Node>>,
}

impl SparseVector {
    pub fn new() -> Self {
        SparseVector { root: None }
    }

    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (Var, Rational)>,
    {
        let mut v = SparseVector::new();
        for (i, c) in entries {
            let cur = v.get(i);
            v.set(i, cur + c);
        }
        v
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(entries: &[(Var, i64)]) -> Self {
        SparseVector::from_entries(entries.iter().map(|&(i, c)| (i, int(c))))
    }

    /// The unit vector `1·x_i`.
    pub fn unit(i: Var) -> Self {
        let mut v = SparseVector::new();
        v.set(i, Rational::one());
        v
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn get(&self, index: Var) -> Rational {
        self.get_ref(index).cloned().unwrap_or_default()
    }

    pub fn get_ref(&self, index: Var) -> Option<&Rational> {
        let mut key = path_key(index);
        let mut node = self.root.as_deref()?;
        while key != 1 {
            node = node.children[(key & 1) as usize].as_deref()?;
            key >>= 1;
        }
        node.value.as_ref()
    }

    pub fn contains(&self, index: Var) -> bool {
        self.get_ref(index).is_some()
    }

    /// Stores `value` at `index`; storing zero removes the entry.
    pub fn set(&mut self, index: Var, value: Rational) {
        fn go(node: Option<Box<Node>>, key: u64, value: Option<Rational>) -> Option<Box<Node>> {
            let mut n = match node {
                Some(n) => *n,
                None => {
                    value.as_ref()?;
                    Node {
                        value: None,
                        children: [None, None],
                    }
                }
            };
            if key == 1 {
                n.value = value;
            } else {
                let bit = (key & 1) as usize;
                let child = n.children[bit].take();
                n.children[bit] = go(child, key >> 1, value);
            }
            prune(n)
        }
        let value = if value.is_zero() { None } else { Some(value) };
        let root = self.root.take();
        self.root = go(root, path_key(index), value);
    }

    /// Entries in ascending index order.
    pub fn entries(&self) -> Vec<(Var, &Rational)> {
        fn walk<'a>(node: &'a Node, prefix: u64, depth: u32, out: &mut Vec<(Var, &'a Rational)>) {
            if let Some(v) = &node.value {
                let key = prefix | (1u64 << depth);
                out.push(((key - 1) as Var, v));
            }
            for bit in 0..2u64 {
                if let Some(c) = &node.children[bit as usize] {
                    walk(c, prefix | (bit << depth), depth + 1, out);
                }
            }
        }
        let mut out = Vec::new();
        if let Some(r) = &self.root {
            walk(r, 0, 0, &mut out);
        }
        out.sort_unstable_by_key(|(i, _)| *i);
        out
    }

    pub fn support(&self) -> Vec<Var> {
        self.entries().into_iter().map(|(i, _)| i).collect()
    }

    pub fn len(&self) -> usize {
        fn count(node: &Node) -> usize {
            node.value.is_some() as usize
                + node.children.iter().flatten().map(|c| count(c)).sum::<usize>()
        }
        self.root.as_deref().map_or(0, count)
    }

    /// Lowest-index entry.
    pub fn leading(&self) -> Option<(Var, Rational)> {
        self.entries().first().map(|(i, c)| (*i, (*c).clone()))
    }

    pub fn max_index(&self) -> Option<Var> {
        self.entries().last().map(|(i, _)| *i)
    }

    /// `self + k·other`, computed by walking both trees in lockstep.
    pub fn add_scaled(&self, k: &Rational, other: &SparseVector) -> SparseVector {
        fn scaled(node: &Node, k: &Rational) -> Option<Box<Node>> {
            prune(Node {
                value: node.value.as_ref().map(|v| v * k),
                children: [
                    node.children[0].as_deref().and_then(|c| scaled(c, k)),
                    node.children[1].as_deref().and_then(|c| scaled(c, k)),
                ],
            })
        }
        fn go(a: Option<&Node>, b: Option<&Node>, k: &Rational) -> Option<Box<Node>> {
            match (a, b) {
                (None, None) => None,
                (Some(a), None) => Some(Box::new(a.clone())),
                (None, Some(b)) => scaled(b, k),
                (Some(a), Some(b)) => {
                    let value = match (&a.value, &b.value) {
                        (x, None) => x.clone(),
                        (None, Some(y)) => Some(y * k),
                        (Some(x), Some(y)) => Some(x + y * k).filter(|s| !s.is_zero()),
                    };
                    prune(Node {
                        value,
                        children: [
                            go(a.children[0].as_deref(), b.children[0].as_deref(), k),
                            go(a.children[1].as_deref(), b.children[1].as_deref(), k),
                        ],
                    })
                }
            }
        }
        if k.is_zero() {
            return self.clone();
        }
        SparseVector {
            root: go(self.root.as_deref(), other.root.as_deref(), k),
        }
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        self.add_scaled(&Rational::one(), other)
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.add_scaled(&-Rational::one(), other)
    }

    pub fn scale(&self, k: &Rational) -> SparseVector {
        SparseVector::new().add_scaled(k, self)
    }

    pub fn neg(&self) -> SparseVector {
        self.scale(&-Rational::one())
    }

    /// `Σ_i self(i)·other(i)`.
    pub fn dot(&self, other: &SparseVector) -> Rational {
        fn go(a: &Node, b: &Node, acc: &mut Rational) {
            if let (Some(x), Some(y)) = (&a.value, &b.value) {
                *acc += &(x * y);
            }
            for bit in 0..2 {
                if let (Some(ca), Some(cb)) = (&a.children[bit], &b.children[bit]) {
                    go(ca, cb, acc);
                }
            }
        }
        let mut acc = Rational::zero();
        if let (Some(a), Some(b)) = (&self.root, &other.root) {
            go(a, b, &mut acc);
        }
        acc
    }

    /// Splits `self` into `(self/g, g)` with `g > 0` chosen so the result has
    /// integer coefficients whose collective gcd is one.
    ///
    /// Panics on the empty vector.
    pub fn gcd_normalize(&self) -> (SparseVector, Rational) {
        let entries = self.entries();
        assert!(!entries.is_empty(), "gcd_normalize of the empty vector");
        if let Some(g) = small_content(entries.iter().map(|(_, c)| *c)) {
            return (self.scale(&g.recip()), g);
        }
        let lcm = entries
            .iter()
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(&c.denom()));
        let gcd = entries.iter().fold(BigInt::zero(), |acc, (_, c)| {
            let scaled = c.numer() * (&lcm / &c.denom());
            acc.gcd(&scaled)
        });
        let g = Rational::from_bigints(gcd, lcm);
        let inv = g.recip();
        (self.scale(&inv), g)
    }

    /// Renames indices through `f`; colliding targets are summed.
    pub fn map_indices(&self, mut f: impl FnMut(Var) -> Var) -> SparseVector {
        SparseVector::from_entries(self.entries().into_iter().map(|(i, c)| (f(i), c.clone())))
    }

    /// Replaces variable `var` by the linear expression `expr`.
    pub fn substitute(&self, var: Var, expr: &SparseVector) -> SparseVector {
        match self.get_ref(var) {
            None => self.clone(),
            Some(c) => {
                let c = c.clone();
                let mut without = self.clone();
                without.set(var, Rational::zero());
                without.add_scaled(&c, expr)
            }
        }
    }

    /// Writes the vector as `c*x_i + ...` using `names`.
    pub fn fmt_with(&self, names: &VarNames, f: &mut impl fmt::Write) -> fmt::Result {
        for (k, (i, c)) in self.entries().into_iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*{}", c, names.name(i))?;
        }
        Ok(())
    }
}

impl PartialOrd for SparseVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SparseVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.entries().cmp(&other.entries())
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        self.fmt_with(&VarNames::default(), f)
    }
}

impl fmt::Debug for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries()).finish()
    }
}

impl FromIterator<(Var, Rational)> for SparseVector {
    fn from_iter<T: IntoIterator<Item = (Var, Rational)>>(iter: T) -> Self {
        SparseVector::from_entries(iter)
    }
}

/// Display names for variable indices; unnamed indices print as `x<i>`.
#[derive(Debug, Clone, Default)]
pub struct VarNames {
    names: Vec<Option<String>>,
}

impl VarNames {
    pub fn new() -> Self {
        VarNames::default()
    }

    pub fn set(&mut self, var: Var, name: impl Into<String>) {
        if self.names.len() <= var {
            self.names.resize(var + 1, None);
        }
        self.names[var] = Some(name.into());
    }

    pub fn name(&self, var: Var) -> String {
        match self.names.get(var) {
            Some(Some(n)) => n.clone(),
            _ => format!("x{var}"),
        }
    }
}

/// A value `real + delta·δ` for a positive infinitesimal `δ`.
///
/// Ordering is lexicographic on `(real, delta)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DeltaValue {
    pub real: Rational,
    pub delta: Rational,
}

impl DeltaValue {
    pub fn new(real: Rational, delta: Rational) -> Self {
        DeltaValue { real, delta }
    }

    pub fn real(real: Rational) -> Self {
        DeltaValue {
            real,
            delta: Rational::zero(),
        }
    }

    pub fn zero() -> Self {
        DeltaValue::default()
    }

    pub fn scale(&self, k: &Rational) -> DeltaValue {
        DeltaValue {
            real: &self.real * k,
            delta: &self.delta * k,
        }
    }

    /// Instantiates `δ` with a concrete positive rational.
    pub fn at(&self, delta: &Rational) -> Rational {
        &self.real + &self.delta * delta
    }
}

impl Add<&DeltaValue> for &DeltaValue {
    type Output = DeltaValue;
    fn add(self, rhs: &DeltaValue) -> DeltaValue {
        DeltaValue {
            real: &self.real + &rhs.real,
            delta: &self.delta + &rhs.delta,
        }
    }
}

impl Sub<&DeltaValue> for &DeltaValue {
    type Output = DeltaValue;
    fn sub(self, rhs: &DeltaValue) -> DeltaValue {
        DeltaValue {
            real: &self.real - &rhs.real,
            delta: &self.delta - &rhs.delta,
        }
    }
}

impl fmt::Debug for DeltaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.delta.is_zero() {
            write!(f, "{}", self.real)
        } else {
            write!(f, "{}{:+}δ", self.real, DisplaySigned(&self.delta))
        }
    }
}

struct DisplaySigned<'a>(&'a Rational);

impl fmt::Display for DisplaySigned<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if f.sign_plus() && !self.0.is_negative() {
            write!(f, "+")?;
        }
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(v: &SparseVector, n: usize) -> Vec<Rational> {
        (0..n).map(|i| v.get(i)).collect()
    }

    #[test]
    fn rational_text_form() {
        assert_eq!(rat(1, 2).to_string(), "1/2");
        assert_eq!(int(-3).to_string(), "-3");
        assert_eq!(rat(4, -6).to_string(), "-2/3");
        assert_eq!("6/4".parse::<Rational>().unwrap(), rat(3, 2));
        assert_eq!("-7".parse::<Rational>().unwrap(), int(-7));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn add_cancels_to_empty() {
        let u = SparseVector::from_ints(&[(0, 1)]);
        let v = SparseVector::from_ints(&[(0, -1)]);
        let s = u.add(&v);
        assert!(s.is_empty());
        assert_eq!(s, SparseVector::new());
    }

    #[test]
    fn add_componentwise() {
        let u = SparseVector::from_ints(&[(0, 2), (1, 1)]);
        let v = SparseVector::from_ints(&[(1, 1)]);
        assert_eq!(u.add(&v), SparseVector::from_ints(&[(0, 2), (1, 2)]));
    }

    #[test]
    fn scale_cases() {
        let v = SparseVector::from_ints(&[(0, 5)]);
        assert!(v.scale(&Rational::zero()).is_empty());
        let w = SparseVector::from_entries([(0, int(1)), (3, rat(-1, 2))]);
        assert_eq!(w.scale(&Rational::one()), w);
        assert_eq!(
            w.scale(&int(2)),
            SparseVector::from_ints(&[(0, 2), (3, -1)])
        );
    }

    #[test]
    fn dot_cases() {
        let u = SparseVector::from_ints(&[(0, 2), (1, 1)]);
        let p = SparseVector::from_ints(&[(0, 1)]);
        assert_eq!(u.dot(&p), int(2));
        assert_eq!(SparseVector::new().dot(&u), Rational::zero());
    }

    #[test]
    fn gcd_normalize_cases() {
        let (v, g) = SparseVector::from_ints(&[(0, 2), (1, 4)]).gcd_normalize();
        assert_eq!((v, g), (SparseVector::from_ints(&[(0, 1), (1, 2)]), int(2)));
        let (v, g) = SparseVector::from_entries([(0, rat(1, 2))]).gcd_normalize();
        assert_eq!((v, g), (SparseVector::from_ints(&[(0, 1)]), rat(1, 2)));
        let (v, g) = SparseVector::from_ints(&[(0, -3), (1, 6)]).gcd_normalize();
        assert_eq!((v, g), (SparseVector::from_ints(&[(0, -1), (1, 2)]), int(3)));
    }

    #[test]
    #[should_panic]
    fn gcd_normalize_rejects_empty() {
        SparseVector::new().gcd_normalize();
    }

    #[test]
    fn entries_are_ordered_and_keys_roundtrip() {
        let idx = [0usize, 1, 2, 3, 7, 8, 15, 16, 31, 100, 1023];
        let v = SparseVector::from_entries(idx.iter().map(|&i| (i, int(i as i64 + 1))));
        let got: Vec<_> = v.entries().into_iter().map(|(i, c)| (i, c.clone())).collect();
        let want: Vec<_> = idx.iter().map(|&i| (i, int(i as i64 + 1))).collect();
        assert_eq!(got, want);
        assert_eq!(v.len(), idx.len());
        assert_eq!(v.leading(), Some((0, int(1))));
        assert_eq!(v.max_index(), Some(1023));
    }

    #[test]
    fn removal_prunes_structure() {
        let mut v = SparseVector::from_ints(&[(5, 1), (9, 2)]);
        v.set(5, Rational::zero());
        v.set(9, Rational::zero());
        assert_eq!(v, SparseVector::new());
        assert!(v.root.is_none());
    }

    #[test]
    fn delta_ordering_is_lexicographic() {
        let a = DeltaValue::new(int(1), int(5));
        let b = DeltaValue::new(int(2), int(-5));
        let c = DeltaValue::new(int(2), int(0));
        assert!(a < b && b < c);
        assert_eq!(DeltaValue::new(int(1), int(-1)).at(&rat(1, 2)), rat(1, 2));
    }

    fn arb_vec() -> impl Strategy<Value = SparseVector> {
        proptest::collection::vec((0usize..12, -20i64..20, 1i64..5), 0..8).prop_map(|es| {
            SparseVector::from_entries(es.into_iter().map(|(i, n, d)| (i, rat(n, d))))
        })
    }

    fn no_zero_stored(v: &SparseVector) -> bool {
        fn ok(n: &Node) -> bool {
            !n.is_vacant()
                && n.value.as_ref().is_none_or(|x| !x.is_zero())
                && n.children.iter().flatten().all(|c| ok(c))
        }
        v.root.as_deref().is_none_or(ok)
    }

    fn big(r: &Rational) -> BigRational {
        BigRational::new(r.numer(), r.denom())
    }

    fn edge_i64() -> impl Strategy<Value = i64> {
        prop_oneof![
            -20i64..20,
            any::<i64>(),
            Just(i64::MAX),
            Just(i64::MIN),
            Just(i64::MIN + 1),
            (1i64..4).prop_map(|k| i64::MAX / k),
        ]
    }

    fn edge_rational() -> impl Strategy<Value = Rational> {
        (edge_i64(), edge_i64().prop_filter("nonzero", |d| *d != 0)).prop_map(|(n, d)| {
            Rational::from_bigints(BigInt::from(n), BigInt::from(d))
        })
    }

    #[test]
    fn boundary_values() {
        let max = Rational::from_int(i64::MAX);
        let two = max.clone() + Rational::one() + max.clone() + Rational::one();
        assert_eq!(two.to_string(), "18446744073709551616");
        assert_eq!(two - max.clone() - max.clone() - Rational::from_int(2), Rational::zero());
        let min = Rational::from_int(i64::MIN);
        assert_eq!(-min.clone(), Rational::from_bigints(BigInt::from(i64::MAX) + 1, BigInt::one()));
        assert_eq!(min.abs() + min, Rational::zero());
        assert_eq!(Rational::new(i64::MIN, i64::MIN), Rational::one());
        assert_eq!(Rational::new(3, -6), rat(-1, 2));
    }

    proptest! {
        #[test]
        fn arithmetic_matches_bignum(a in edge_rational(), b in edge_rational()) {
            prop_assert_eq!(big(&(&a + &b)), big(&a) + big(&b));
            prop_assert_eq!(big(&(&a - &b)), big(&a) - big(&b));
            prop_assert_eq!(big(&(&a * &b)), big(&a) * big(&b));
            if !b.is_zero() {
                prop_assert_eq!(big(&(&a / &b)), big(&a) / big(&b));
            }
            prop_assert_eq!(a.cmp(&b), big(&a).cmp(&big(&b)));
            prop_assert_eq!(big(&-&a), -big(&a));
            // Equal values have equal representations.
            let round = Rational::from_bigints(a.numer(), a.denom());
            prop_assert_eq!(&round, &a);
            let sum = &(&a + &b) - &b;
            prop_assert_eq!(sum, a);
        }

        #[test]
        fn add_matches_dense_oracle(u in arb_vec(), v in arb_vec()) {
            let s = u.add(&v);
            prop_assert!(no_zero_stored(&s));
            let du = dense(&u, 12);
            let dv = dense(&v, 12);
            let ds = dense(&s, 12);
            for i in 0..12 {
                prop_assert_eq!(&ds[i], &(&du[i] + &dv[i]));
            }
        }

        #[test]
        fn dot_matches_dense_oracle(u in arb_vec(), p in arb_vec()) {
            let du = dense(&u, 12);
            let dp = dense(&p, 12);
            let want: Rational = du.iter().zip(&dp).map(|(a, b)| a * b).sum();
            prop_assert_eq!(u.dot(&p), want);
        }

        #[test]
        fn dot_is_linear(u in arb_vec(), v in arb_vec(), p in arb_vec(), k in -9i64..9) {
            let k = int(k);
            prop_assert_eq!(u.add(&v).dot(&p), u.dot(&p) + v.dot(&p));
            let su = u.scale(&k);
            prop_assert!(no_zero_stored(&su));
            prop_assert_eq!(su.dot(&p), &k * &u.dot(&p));
        }

        #[test]
        fn gcd_normalize_postconditions(v in arb_vec()) {
            prop_assume!(!v.is_empty());
            let (n, g) = v.gcd_normalize();
            prop_assert!(g.is_positive());
            prop_assert_eq!(n.scale(&g), v.clone());
            let mut acc = BigInt::zero();
            for (_, c) in n.entries() {
                prop_assert!(c.is_integer());
                acc = acc.gcd(&c.numer());
            }
            prop_assert!(acc.is_one());
            prop_assert_eq!(n.leading().unwrap().1.signum(), v.leading().unwrap().1.signum());
        }
    }
}
