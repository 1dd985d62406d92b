//! Ordinals below epsilon-zero in Cantor normal form.
//!
//! An ordinal is a list of terms `w^e * k` with strictly decreasing
//! exponents and positive coefficients. Exponents are ordinals themselves,
//! so the representation is a finite tree. The derived lexicographic order
//! on the term list coincides with the ordinal order.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 32;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Term {
    pub exp: Ordinal,
    pub coeff: u64,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ordinal {
    terms: Arc<[Term]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Zero,
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Arc::from(Vec::new()) }
    }

    pub fn one() -> Self {
        Ordinal::nat(1)
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            return Ordinal::zero();
        }
        Ordinal { terms: Arc::from(vec![Term { exp: Ordinal::zero(), coeff: n }]) }
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::one())
    }

    /// `w^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal::monomial(e, 1)
    }

    /// `w^e * k`.
    pub fn monomial(e: Ordinal, k: u64) -> Self {
        if k == 0 {
            return Ordinal::zero();
        }
        Ordinal { terms: Arc::from(vec![Term { exp: e, coeff: k }]) }
    }

    /// Builds an ordinal from terms, rejecting non-canonical lists.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[0].exp <= w[1].exp {
                return Err(Error::invalid("exponents must strictly decrease"));
            }
        }
        if terms.iter().any(|t| t.coeff == 0) {
            return Err(Error::invalid("coefficients must be positive"));
        }
        Ok(Ordinal { terms: Arc::from(terms) })
    }

    fn from_terms_unchecked(terms: Vec<Term>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].exp > w[1].exp));
        Ordinal { terms: Arc::from(terms) }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_nat(&self) -> Option<u64> {
        match &*self.terms {
            [] => Some(0),
            [t] if t.exp.is_zero() => Some(t.coeff),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_nat().is_some()
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.terms.last(), Some(t) if !t.exp.is_zero())
    }

    pub fn is_successor(&self) -> bool {
        matches!(self.terms.last(), Some(t) if t.exp.is_zero())
    }

    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }

    /// Nesting depth of the term tree; zero has depth 0, naturals depth 1.
    pub fn depth(&self) -> usize {
        self.terms.iter().map(|t| 1 + t.exp.depth()).max().unwrap_or(0)
    }

    pub fn classify(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some(t) if t.exp.is_zero() => {
                let mut v = self.terms.to_vec();
                let last = v.last_mut().unwrap();
                if last.coeff == 1 {
                    v.pop();
                } else {
                    last.coeff -= 1;
                }
                Kind::Successor(Ordinal::from_terms_unchecked(v))
            }
            Some(_) => Kind::Limit,
        }
    }

    pub fn pred(&self) -> Option<Ordinal> {
        match self.classify() {
            Kind::Successor(p) => Some(p),
            _ => None,
        }
    }

    pub fn succ(&self) -> Ordinal {
        self + &Ordinal::one()
    }

    /// Ordinal sum; terms of `self` below the leading exponent of `other`
    /// are absorbed.
    pub fn checked_add(&self, other: &Ordinal) -> Option<Ordinal> {
        let Some(lead) = other.terms.first() else {
            return Some(self.clone());
        };
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut carry = 0u64;
        for t in self.terms.iter() {
            if t.exp > lead.exp {
                out.push(t.clone());
            } else {
                if t.exp == lead.exp {
                    carry = t.coeff;
                }
                break;
            }
        }
        let mut rest = other.terms.iter();
        let first = rest.next().unwrap();
        out.push(Term { exp: first.exp.clone(), coeff: first.coeff.checked_add(carry)? });
        out.extend(rest.cloned());
        Some(Ordinal::from_terms_unchecked(out))
    }

    /// The unique `x` with `self + x == other`, when `self <= other`.
    pub fn left_sub(&self, other: &Ordinal) -> Option<Ordinal> {
        if self > other {
            return None;
        }
        let a = &self.terms;
        let b = &other.terms;
        let mut i = 0;
        while i < a.len() && i < b.len() && a[i] == b[i] {
            i += 1;
        }
        if i == b.len() {
            return Some(Ordinal::zero());
        }
        if i == a.len() {
            return Some(Ordinal::from_terms_unchecked(b[i..].to_vec()));
        }
        let (ta, tb) = (&a[i], &b[i]);
        if ta.exp == tb.exp {
            let mut v = vec![Term { exp: tb.exp.clone(), coeff: tb.coeff - ta.coeff }];
            v.extend(b[i + 1..].iter().cloned());
            Some(Ordinal::from_terms_unchecked(v))
        } else {
            Some(Ordinal::from_terms_unchecked(b[i..].to_vec()))
        }
    }

    /// Splits a nonzero ordinal as `c + w^e`, peeling one copy of the last term.
    pub fn split_last(&self) -> Option<(Ordinal, Ordinal)> {
        let last = self.terms.last()?;
        let mut v = self.terms.to_vec();
        let l = v.last_mut().unwrap();
        if l.coeff == 1 {
            v.pop();
        } else {
            l.coeff -= 1;
        }
        Some((Ordinal::from_terms_unchecked(v), last.exp.clone()))
    }

    /// Writes `self` as `lambda + m` with `lambda` zero or a limit.
    pub fn limit_part(&self) -> (Ordinal, u64) {
        match self.terms.last() {
            Some(t) if t.exp.is_zero() => {
                let v = self.terms[..self.terms.len() - 1].to_vec();
                (Ordinal::from_terms_unchecked(v), t.coeff)
            }
            _ => (self.clone(), 0),
        }
    }

    /// `self + n` for a natural `n`.
    pub fn add_nat(&self, n: u64) -> Ordinal {
        self + &Ordinal::nat(n)
    }

    /// `w^e * self`, computed termwise.
    pub fn omega_pow_mul(&self, e: &Ordinal) -> Ordinal {
        let v = self
            .terms
            .iter()
            .map(|t| Term { exp: e + &t.exp, coeff: t.coeff })
            .collect();
        Ordinal::from_terms_unchecked(v)
    }

    /// The canonical fundamental sequence: for `c + w^(g+1)` it is
    /// `c + w^g * n`, for `c + w^l` with `l` a limit it is `c + w^(l[n])`.
    pub fn fund_seq(&self, n: u64) -> Result<Ordinal> {
        if !self.is_limit() {
            return Err(Error::NotLimit(self.clone()));
        }
        let (c, e) = self.split_last().unwrap();
        Ok(match e.classify() {
            Kind::Successor(g) => &c + &Ordinal::monomial(g, n),
            Kind::Limit => &c + &Ordinal::omega_pow(e.fund_seq(n)?),
            Kind::Zero => unreachable!(),
        })
    }

    /// Least `n` with `self[n] >= alpha`, for a limit `self` and `alpha < self`.
    pub fn ladder_index(&self, alpha: &Ordinal) -> Result<u64> {
        if !self.is_limit() {
            return Err(Error::NotLimit(self.clone()));
        }
        if alpha >= self {
            return Err(Error::pre(format!("{alpha} is not below {self}")));
        }
        let (c, e) = self.split_last().unwrap();
        if *alpha <= c {
            return Ok(0);
        }
        let rest = c.left_sub(alpha).unwrap();
        match e.classify() {
            Kind::Successor(g) => {
                let lead = rest.leading().unwrap();
                let (k, exact) = if lead.exp == g {
                    (lead.coeff, rest.terms.len() == 1)
                } else {
                    (0, false)
                };
                Ok(if exact { k } else { k + 1 })
            }
            Kind::Limit => {
                let lead = rest.leading().unwrap();
                let i = e.ladder_index(&lead.exp)?;
                let hit = e.fund_seq(i)? == lead.exp;
                let pure = rest.terms.len() == 1 && lead.coeff == 1;
                Ok(if hit && !pure { i + 1 } else { i })
            }
            Kind::Zero => unreachable!(),
        }
    }

    pub fn parse_with_depth(s: &str, max_depth: usize) -> Result<Ordinal> {
        let mut p = Parser::new(s);
        let o = p.ord()?;
        p.skip_ws();
        if let Some((pos, c)) = p.peek() {
            return Err(Error::Parse { pos, msg: format!("unexpected '{c}'") });
        }
        let depth = o.depth();
        if depth > max_depth {
            return Err(Error::DepthExceeded { depth, limit: max_depth });
        }
        Ok(o)
    }
}

impl Default for Ordinal {
    fn default() -> Self {
        Ordinal::zero()
    }
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: &Ordinal) -> Ordinal {
        self.checked_add(rhs).expect("ordinal coefficient overflow")
    }
}

impl std::ops::Add for Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: Ordinal) -> Ordinal {
        &self + &rhs
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::nat(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match t.exp.as_nat() {
                Some(0) => {
                    write!(f, "{}", t.coeff)?;
                    continue;
                }
                Some(1) => f.write_str("w")?,
                Some(n) => write!(f, "w^{n}")?,
                None => write!(f, "w^({})", t.exp)?,
            }
            if t.coeff > 1 {
                write!(f, "*{}", t.coeff)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Ordinal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ordinal::parse_with_depth(s, DEFAULT_MAX_DEPTH)
    }
}

impl serde::Serialize for Ordinal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Ordinal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some((_, c)) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<(usize, char)> {
        self.src[self.pos..].chars().next().map(|c| (self.pos, c))
    }

    fn peek(&mut self) -> Option<(usize, char)> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, want: char) -> bool {
        match self.peek() {
            Some((_, c)) if c == want => {
                self.pos += c.len_utf8();
                true
            }
            _ => false,
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        if self.eat(want) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{want}'")))
        }
    }

    fn error(&mut self, msg: String) -> Error {
        let pos = self.peek().map(|(p, _)| p).unwrap_or(self.src.len());
        Error::Parse { pos, msg }
    }

    fn number(&mut self) -> Result<u64> {
        let mut digits = String::new();
        while let Some((_, c)) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return Err(self.error("expected digits".into()));
        }
        digits.parse().map_err(|_| self.error("number too large".into()))
    }

    fn ord(&mut self) -> Result<Ordinal> {
        let mut acc = self.term()?;
        while self.eat('+') {
            let t = self.term()?;
            acc = acc.checked_add(&t).ok_or(Error::Overflow)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal> {
        match self.peek() {
            Some((_, 'w')) => {
                self.pos += 1;
                let exp = if self.eat('^') {
                    if self.eat('(') {
                        let e = self.ord()?;
                        self.expect(')')?;
                        e
                    } else {
                        Ordinal::nat(self.number()?)
                    }
                } else {
                    Ordinal::one()
                };
                let k = if self.eat('*') { self.number()? } else { 1 };
                Ok(Ordinal::monomial(exp, k))
            }
            Some((_, c)) if c.is_ascii_digit() => Ok(Ordinal::nat(self.number()?)),
            _ => Err(self.error("expected 'w' or digits".into())),
        }
    }
}

/// Half-open interval `[lo, hi)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub struct OrdinalInterval {
    pub lo: Ordinal,
    pub hi: Ordinal,
}

impl OrdinalInterval {
    pub fn new(lo: Ordinal, hi: Ordinal) -> Self {
        OrdinalInterval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        self.lo <= *x && *x < self.hi
    }

    /// Number of points, or `None` when `hi >= lo + w`.
    pub fn finite_len(&self) -> Option<u64> {
        if self.is_empty() {
            return Some(0);
        }
        self.lo.left_sub(&self.hi).unwrap().as_nat()
    }

    pub fn is_infinite(&self) -> bool {
        self.finite_len().is_none()
    }

    pub fn intersect(&self, other: &OrdinalInterval) -> OrdinalInterval {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        OrdinalInterval { lo, hi }
    }

    /// The points of a finite interval.
    pub fn points(&self) -> Option<Vec<Ordinal>> {
        let n = self.finite_len()?;
        Some((0..n).map(|i| self.lo.add_nat(i)).collect())
    }
}

impl fmt::Display for OrdinalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn parse_canonical_terms() {
        let x = o("w^2*3+w+5");
        let t = x.terms();
        assert_eq!(t.len(), 3);
        assert_eq!((t[0].exp.as_nat(), t[0].coeff), (Some(2), 3));
        assert_eq!((t[1].exp.as_nat(), t[1].coeff), (Some(1), 1));
        assert_eq!((t[2].exp.as_nat(), t[2].coeff), (Some(0), 5));
        assert_eq!(x.to_string(), "w^2*3+w+5");
    }

    #[test]
    fn parse_normalizes_by_absorption() {
        let x = o("w^(w)+w^(w)");
        assert_eq!(x.terms().len(), 1);
        assert_eq!(x.terms()[0].exp, Ordinal::omega());
        assert_eq!(x.terms()[0].coeff, 2);
        assert_eq!(x.to_string(), "w^(w)*2");
        assert_eq!(o("5+w").to_string(), "w");
        assert_eq!(o(" w ^ 2 + 3 ").to_string(), "w^2+3");
        assert_eq!(o("0"), Ordinal::zero());
        assert_eq!(o("w^0*4"), Ordinal::nat(4));
    }

    #[test]
    fn parse_errors_report_position() {
        match "w+".parse::<Ordinal>() {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!("w^(w".parse::<Ordinal>(), Err(Error::Parse { .. })));
        assert!(matches!("x".parse::<Ordinal>(), Err(Error::Parse { pos: 0, .. })));
    }

    #[test]
    fn depth_cap() {
        let mut s = "1".to_string();
        for _ in 0..40 {
            s = format!("w^({s})");
        }
        assert!(matches!(s.parse::<Ordinal>(), Err(Error::DepthExceeded { .. })));
        assert!(Ordinal::parse_with_depth(&s, 64).is_ok());
    }

    #[test]
    fn addition_absorbs() {
        assert_eq!(&o("w^2+w") + &o("w^2"), o("w^2*2"));
        assert_eq!(&o("3") + &o("w"), o("w"));
        assert_eq!(&o("w") + &o("3"), o("w+3"));
        assert_eq!(&o("w*2+1") + &o("w*3"), o("w*5"));
    }

    #[test]
    fn order_matches_ordinal_order() {
        let xs = ["0", "1", "5", "w", "w+1", "w*2", "w^2", "w^2+w*7", "w^3", "w^(w)", "w^(w)+1", "w^(w+1)"];
        for w in xs.windows(2) {
            assert!(o(w[0]) < o(w[1]), "{} < {}", w[0], w[1]);
        }
    }

    #[test]
    fn classification() {
        assert_eq!(Ordinal::zero().classify(), Kind::Zero);
        assert_eq!(o("w+3").classify(), Kind::Successor(o("w+2")));
        assert_eq!(o("w^2").classify(), Kind::Limit);
    }

    #[test]
    fn fundamental_sequences() {
        assert_eq!(o("w^2").fund_seq(2).unwrap(), o("w*2"));
        assert_eq!(o("w*2").fund_seq(2).unwrap(), o("w+2"));
        assert_eq!(o("w").fund_seq(7).unwrap(), o("7"));
        assert_eq!(o("w^(w)").fund_seq(3).unwrap(), o("w^3"));
        assert_eq!(o("w^(w)").fund_seq(0).unwrap(), o("1"));
        assert_eq!(o("w^(w+1)").fund_seq(2).unwrap(), o("w^(w)*2"));
        assert!(matches!(o("w+1").fund_seq(0), Err(Error::NotLimit(_))));
    }

    #[test]
    fn left_subtraction() {
        assert_eq!(o("w").left_sub(&o("w*3+2")), Some(o("w*2+2")));
        assert_eq!(o("5").left_sub(&o("w")), Some(o("w")));
        assert_eq!(o("w^2+w").left_sub(&o("w^2+w*4+1")), Some(o("w*3+1")));
        assert_eq!(o("w^2").left_sub(&o("w")), None);
    }

    #[test]
    fn ladder_index_matches_search() {
        let betas = ["w", "w*2", "w^2", "w^2*2+w", "w^3", "w^(w)", "w^(w)+w^2"];
        let alphas = ["0", "1", "4", "w", "w+3", "w*2", "w*5+1", "w^2", "w^2+w*3", "w^2*2", "w^3+1", "w^4", "w^(w)"];
        for b in betas {
            let b = o(b);
            for a in alphas {
                let a = o(a);
                if a >= b {
                    continue;
                }
                let mut n = 0;
                while b.fund_seq(n).unwrap() < a {
                    n += 1;
                }
                assert_eq!(b.ladder_index(&a).unwrap(), n, "beta={b} alpha={a}");
            }
        }
    }

    #[test]
    fn intervals() {
        let i = OrdinalInterval::new(o("w"), o("w+3"));
        assert_eq!(i.finite_len(), Some(3));
        assert!(!i.is_infinite());
        assert!(OrdinalInterval::new(o("3"), o("w")).is_infinite());
        assert_eq!(i.points().unwrap(), vec![o("w"), o("w+1"), o("w+2")]);
    }

    #[test]
    fn omega_power_multiplication() {
        assert_eq!(o("3").omega_pow_mul(&o("1")), o("w*3"));
        assert_eq!(o("w+2").omega_pow_mul(&o("2")), o("w^3+w^2*2"));
    }
}
