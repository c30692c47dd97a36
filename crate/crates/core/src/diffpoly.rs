//! Laurent differential polynomials over the rationals.
//!
//! Two families of differential indeterminates live side by side: the
//! geometric variables `y_j` and the generic coefficients `u_{ik}`. Every
//! derivative `v^{(k)}` is an independent algebraic variable ([`DerivVar`]);
//! the derivation acts on them by raising the order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffPolyError {
    #[error("norm form undefined for 0")]
    ZeroNormForm,
    #[error("parse error at offset {offset}: {msg}")]
    Parse { offset: usize, msg: String },
}

/// Base indeterminate. The derived order puts every `u` before every `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiffIndex {
    U { i: u32, k: u32 },
    Y { j: u32 },
}

/// A derivative `base^{(order)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivVar {
    pub base: DiffIndex,
    pub order: u32,
}

impl DerivVar {
    pub fn y(j: u32, order: u32) -> Self {
        DerivVar { base: DiffIndex::Y { j }, order }
    }

    pub fn u(i: u32, k: u32, order: u32) -> Self {
        DerivVar { base: DiffIndex::U { i, k }, order }
    }

    pub fn derive(self) -> Self {
        DerivVar { base: self.base, order: self.order + 1 }
    }

    pub fn is_y(&self) -> bool {
        matches!(self.base, DiffIndex::Y { .. })
    }

    pub fn is_u(&self) -> bool {
        matches!(self.base, DiffIndex::U { .. })
    }

    /// Block index `i` of a `u_{ik}` variable.
    pub fn block(&self) -> Option<u32> {
        match self.base {
            DiffIndex::U { i, .. } => Some(i),
            DiffIndex::Y { .. } => None,
        }
    }

    pub fn y_index(&self) -> Option<u32> {
        match self.base {
            DiffIndex::Y { j } => Some(j),
            DiffIndex::U { .. } => None,
        }
    }
}

impl fmt::Display for DerivVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base {
            DiffIndex::U { i, k } => write!(f, "u{i}_{k}")?,
            DiffIndex::Y { j } => write!(f, "y{j}")?,
        }
        match self.order {
            0 => Ok(()),
            1..=3 => write!(f, "{}", "'".repeat(self.order as usize)),
            k => write!(f, "^({k})"),
        }
    }
}

/// Laurent monomial: sorted `(variable, nonzero exponent)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(DerivVar, i64)>,
}

fn add_exp(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("exponent overflow")
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(v: DerivVar) -> Self {
        Monomial { exps: vec![(v, 1)] }
    }

    pub fn var_pow(v: DerivVar, e: i64) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial { exps: vec![(v, e)] }
        }
    }

    /// Builds a monomial from arbitrary pairs, merging repeats and dropping zeros.
    pub fn from_pairs<I: IntoIterator<Item = (DerivVar, i64)>>(pairs: I) -> Self {
        let mut map: BTreeMap<DerivVar, i64> = BTreeMap::new();
        for (v, e) in pairs {
            let slot = map.entry(v).or_insert(0);
            *slot = add_exp(*slot, e);
        }
        Monomial { exps: map.into_iter().filter(|(_, e)| *e != 0).collect() }
    }

    pub fn exps(&self) -> &[(DerivVar, i64)] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponent(&self, v: &DerivVar) -> i64 {
        match self.exps.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(pos) => self.exps[pos].1,
            Err(_) => 0,
        }
    }

    /// Sum of all exponents.
    pub fn degree(&self) -> i64 {
        self.exps.iter().map(|(_, e)| *e).sum()
    }

    pub fn is_polynomial(&self) -> bool {
        self.exps.iter().all(|(_, e)| *e > 0)
    }

    pub fn has_y(&self) -> bool {
        self.exps.iter().any(|(v, _)| v.is_y())
    }

    pub fn has_u(&self) -> bool {
        self.exps.iter().any(|(v, _)| v.is_u())
    }

    fn merge(&self, other: &Monomial, sign: i64) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut a, mut b) = (0, 0);
        while a < self.exps.len() || b < other.exps.len() {
            let ord = match (self.exps.get(a), other.exps.get(b)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(self.exps[a]);
                    a += 1;
                }
                Ordering::Greater => {
                    let (v, e) = other.exps[b];
                    out.push((v, e.checked_mul(sign).expect("exponent overflow")));
                    b += 1;
                }
                Ordering::Equal => {
                    let e = add_exp(self.exps[a].1, other.exps[b].1.checked_mul(sign).expect("exponent overflow"));
                    if e != 0 {
                        out.push((self.exps[a].0, e));
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
        Monomial { exps: out }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.merge(other, 1)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.merge(other, -1)
    }

    pub fn pow(&self, e: i64) -> Monomial {
        if e == 0 {
            return Monomial::one();
        }
        Monomial {
            exps: self.exps.iter().map(|(v, x)| (*v, x.checked_mul(e).expect("exponent overflow"))).collect(),
        }
    }

    pub fn inv(&self) -> Monomial {
        self.pow(-1)
    }

    /// Highest derivative order of variables satisfying `pred`.
    pub fn max_order_where<F: Fn(&DerivVar) -> bool>(&self, pred: F) -> Option<u32> {
        self.exps.iter().filter(|(v, _)| pred(v)).map(|(v, _)| v.order).max()
    }

    /// Restriction to the variables satisfying `pred`.
    pub fn restrict<F: Fn(&DerivVar) -> bool>(&self, pred: F) -> Monomial {
        Monomial { exps: self.exps.iter().filter(|(v, _)| pred(v)).copied().collect() }
    }

    /// Total degree in `y_j` (all derivative orders).
    pub fn y_degree(&self, j: u32) -> i64 {
        self.exps.iter().filter(|(v, _)| v.y_index() == Some(j)).map(|(_, e)| *e).sum()
    }

    /// Weighted order: sum of `order * exponent`.
    pub fn order_weight(&self) -> i64 {
        self.exps.iter().map(|(v, e)| v.order as i64 * e).sum()
    }

    /// The derivative `δ(self)` as a list of `(coefficient, monomial)` pairs.
    pub fn derivative_terms(&self) -> Vec<(i64, Monomial)> {
        let mut out = Vec::with_capacity(self.exps.len());
        for (v, e) in &self.exps {
            let step = Monomial::from_pairs([(*v, -1), (v.derive(), 1)]);
            out.push((*e, self.mul(&step)));
        }
        out
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then the exponent of the
    /// smallest variable in the global order is the most significant.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (mut a, mut b) = (0, 0);
        loop {
            match (self.exps.get(a), other.exps.get(b)) {
                (None, None) => return Ordering::Equal,
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    Ordering::Equal => {
                        if x.1 != y.1 {
                            return x.1.cmp(&y.1);
                        }
                        a += 1;
                        b += 1;
                    }
                    Ordering::Less => return x.1.cmp(&0),
                    Ordering::Greater => return 0.cmp(&y.1),
                },
                (Some(x), None) => return x.1.cmp(&0),
                (None, Some(y)) => return 0.cmp(&y.1),
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        for (idx, (v, e)) in self.exps.iter().enumerate() {
            if idx > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
            if *e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Monomial {
    type Err = DiffPolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_monomial(s)
    }
}

/// A finite rational combination of Laurent monomials, stored canonically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { terms }
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(Rational::one(), m)
    }

    pub fn var(v: DerivVar) -> Self {
        Self::monomial(Monomial::var(v))
    }

    pub fn from_terms<I: IntoIterator<Item = (Rational, Monomial)>>(iter: I) -> Self {
        let mut p = DiffPoly::zero();
        for (c, m) in iter {
            p.add_term(c, m);
        }
        p
    }

    pub fn add_term(&mut self, c: Rational, m: Monomial) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending term order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Greatest term under the term order.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect() }
    }

    pub fn pow(&self, e: u32) -> DiffPoly {
        let mut acc = DiffPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Applies the derivation once.
    pub fn differentiate(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (e, dm) in m.derivative_terms() {
                out.add_term(c * Rational::from_integer(BigInt::from(e)), dm);
            }
        }
        out
    }

    pub fn nth_derivative(&self, k: u32) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.differentiate();
        }
        p
    }

    /// Partial derivative with respect to an algebraic variable.
    pub fn partial(&self, v: &DerivVar) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e != 0 {
                let dm = m.mul(&Monomial::var_pow(*v, -1));
                out.add_term(c * Rational::from_integer(BigInt::from(e)), dm);
            }
        }
        out
    }

    /// Returns `(N, shift)` with `N = shift * self` polynomial and coprime.
    pub fn norm_form(&self) -> Result<(DiffPoly, Monomial), DiffPolyError> {
        if self.is_zero() {
            return Err(DiffPolyError::ZeroNormForm);
        }
        let mut mins: BTreeMap<DerivVar, i64> = BTreeMap::new();
        for m in self.terms.keys() {
            for (v, _) in m.exps() {
                mins.entry(*v).or_insert(0);
            }
        }
        // Absent variables count as exponent 0.
        let mut first = true;
        for m in self.terms.keys() {
            for (v, slot) in mins.iter_mut() {
                let e = m.exponent(v);
                if first {
                    *slot = e;
                } else {
                    *slot = (*slot).min(e);
                }
            }
            first = false;
        }
        let shift = Monomial::from_pairs(mins.into_iter().map(|(v, e)| (v, -e)));
        Ok((self.mul_monomial(&shift), shift))
    }

    /// Highest order of `base` in the polynomial, `None` for −∞.
    pub fn order_of(&self, base: DiffIndex) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.max_order_where(|v| v.base == base)).max()
    }

    /// Highest order of any `u_{ik}` in block `i`.
    pub fn order_in_block(&self, i: u32) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.max_order_where(|v| v.block() == Some(i))).max()
    }

    /// Highest derivative order over all variables.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.max_order_where(|_| true)).max()
    }

    pub fn vars(&self) -> BTreeSet<DerivVar> {
        self.terms.keys().flat_map(|m| m.exps().iter().map(|(v, _)| *v)).collect()
    }

    pub fn has_y(&self) -> bool {
        self.terms.keys().any(|m| m.has_y())
    }

    /// Maximal total degree of a term.
    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Degree of each term restricted to block `i`, if constant across terms.
    pub fn block_degree(&self, i: u32) -> Option<i64> {
        let mut degs = self.terms.keys().map(|m| m.restrict(|v| v.block() == Some(i)).degree());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// The differential Euler operator
    /// `Σ_k Σ_j C(k+r, r) u_{ij}^{(k)} ∂p/∂u_{ij}^{(k+r)}` on block `i`.
    pub fn euler_apply(&self, i: u32, r: u32) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for v in self.vars() {
            if v.block() != Some(i) || v.order < r {
                continue;
            }
            let k = v.order - r;
            let low = DerivVar { base: v.base, order: k };
            let c = Rational::from_integer(binomial(k + r, r));
            let dp = self.partial(&v).mul_monomial(&Monomial::var(low)).scale(&c);
            out = &out + &dp;
        }
        out
    }

    /// Multiplies by the lcm of denominators and divides by the content; the
    /// leading coefficient becomes positive. Returns the factor applied.
    pub fn primitive(&self) -> (DiffPoly, Rational) {
        if self.is_zero() {
            return (DiffPoly::zero(), Rational::one());
        }
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        let mut factor = Rational::new(den, num);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            factor = -factor;
        }
        (self.scale(&factor), factor)
    }
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    acc
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(c.clone(), m.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(-c.clone(), m.clone());
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                *acc.entry(a.mul(b)).or_insert_with(Rational::zero) += x * y;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        DiffPoly { terms: acc }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr for DiffPoly {
            type Output = DiffPoly;
            fn $f(self, rhs: DiffPoly) -> DiffPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl fmt::Display for DiffPoly {
    /// Prints terms from the leading one downwards.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for DiffPoly {
    type Err = DiffPolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_poly(s)
    }
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { src: s.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DiffPolyError> {
        Err(DiffPolyError::Parse { offset: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn peek_raw(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<String, DiffPolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn small(&mut self) -> Result<u32, DiffPolyError> {
        let at = self.pos;
        let d = self.digits()?;
        d.parse::<u32>().map_err(|_| DiffPolyError::Parse { offset: at, msg: "index too large".into() })
    }

    /// Variable name, derivative marks and an optional integer exponent.
    fn var_power(&mut self) -> Result<(DerivVar, i64), DiffPolyError> {
        self.skip_ws();
        let base = match self.peek_raw() {
            Some(b'y') => {
                self.pos += 1;
                let j = self.small()?;
                if j == 0 {
                    return self.err("variable indices start at 1");
                }
                DiffIndex::Y { j }
            }
            Some(b'u') => {
                self.pos += 1;
                let i = self.small()?;
                if self.peek_raw() != Some(b'_') {
                    return self.err("expected '_' in coefficient name");
                }
                self.pos += 1;
                let k = self.small()?;
                DiffIndex::U { i, k }
            }
            _ => return self.err("unknown variable"),
        };
        let mut order = 0u32;
        let mut primes = false;
        while self.peek_raw() == Some(b'\'') {
            self.pos += 1;
            order += 1;
            primes = true;
        }
        if self.peek_raw() == Some(b'^') && self.src.get(self.pos + 1) == Some(&b'(') {
            if primes {
                return self.err("malformed derivative mark: both primes and ^(k)");
            }
            self.pos += 2;
            order = self.small()?;
            if self.peek_raw() != Some(b')') {
                return self.err("malformed derivative mark: expected ')'");
            }
            self.pos += 1;
        }
        let mut exp = 1i64;
        if self.peek_raw() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek_raw() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.pos;
            let d = self.digits()?;
            let e: i64 = d.parse().map_err(|_| DiffPolyError::Parse { offset: at, msg: "exponent too large".into() })?;
            exp = if neg { -e } else { e };
            if exp == 0 {
                return Err(DiffPolyError::Parse { offset: at, msg: "zero exponent".into() });
            }
        }
        let v = DerivVar { base, order };
        if v.is_u() && exp < 0 {
            return self.err("coefficient variables cannot be inverted");
        }
        Ok((v, exp))
    }

    fn monomial(&mut self) -> Result<Monomial, DiffPolyError> {
        if self.peek() == Some(b'1') {
            self.pos += 1;
            return Ok(Monomial::one());
        }
        let mut pairs = vec![self.var_power()?];
        while self.eat(b'*') {
            pairs.push(self.var_power()?);
        }
        Ok(Monomial::from_pairs(pairs))
    }

    fn number(&mut self) -> Result<Rational, DiffPolyError> {
        let num: BigInt = self.digits()?.parse().expect("digits");
        if self.peek_raw() == Some(b'/') {
            self.pos += 1;
            let at = self.pos;
            let den: BigInt = self.digits()?.parse().expect("digits");
            if den.is_zero() {
                return Err(DiffPolyError::Parse { offset: at, msg: "zero denominator".into() });
            }
            return Ok(Rational::new(num, den));
        }
        Ok(Rational::from_integer(num))
    }

    fn term(&mut self) -> Result<(Rational, Monomial), DiffPolyError> {
        let mut coeff = Rational::one();
        let mut pairs = Vec::new();
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => coeff *= self.number()?,
                Some(b'y') | Some(b'u') => pairs.push(self.var_power()?),
                _ => return self.err("expected a number or a variable"),
            }
            if !self.eat(b'*') {
                break;
            }
        }
        Ok((coeff, Monomial::from_pairs(pairs)))
    }

    fn poly(&mut self) -> Result<DiffPoly, DiffPolyError> {
        let mut p = DiffPoly::zero();
        let mut sign = if self.eat(b'-') {
            -1
        } else {
            self.eat(b'+');
            1
        };
        loop {
            let (c, m) = self.term()?;
            p.add_term(if sign < 0 { -c } else { c }, m);
            if self.eat(b'+') {
                sign = 1;
            } else if self.eat(b'-') {
                sign = -1;
            } else {
                break;
            }
        }
        Ok(p)
    }

    fn finish(&mut self) -> Result<(), DiffPolyError> {
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(())
    }
}

/// Parses a monomial such as `y1^2*y1''*y2^(4)^-1` or `1`.
pub fn parse_monomial(s: &str) -> Result<Monomial, DiffPolyError> {
    let mut cur = Cursor::new(s);
    let m = cur.monomial()?;
    cur.finish()?;
    Ok(m)
}

/// Parses a polynomial in the printer's syntax, e.g. `3/2*u0_1*y1' - y1^-1`.
pub fn parse_poly(s: &str) -> Result<DiffPoly, DiffPolyError> {
    let mut cur = Cursor::new(s);
    if cur.eat(b'0') {
        cur.finish()?;
        return Ok(DiffPoly::zero());
    }
    let p = cur.poly()?;
    cur.finish()?;
    Ok(p)
}

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qq(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
