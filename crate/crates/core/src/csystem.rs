//! C-sequences: a cofinal set `C_b` attached to every ordinal `b`.
//!
//! Three variants are provided. The canonical variant uses the fundamental
//! sequence of a limit and the predecessor of a successor. The full variant
//! takes `C_b = b`. The table variant overrides finitely many ordinals with
//! explicit pieces (points and intervals); above the last explicit piece of a
//! limit the canonical ladder takes over, so cofinality is automatic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::{Kind, Ordinal, OrdinalInterval};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Piece {
    Point(Ordinal),
    Interval(OrdinalInterval),
}

impl Piece {
    fn lo(&self) -> &Ordinal {
        match self {
            Piece::Point(p) => p,
            Piece::Interval(i) => &i.lo,
        }
    }

    /// First ordinal above the piece.
    fn end(&self) -> Ordinal {
        match self {
            Piece::Point(p) => p.succ(),
            Piece::Interval(i) => i.hi.clone(),
        }
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Point(p) => write!(f, "{p}"),
            Piece::Interval(i) => write!(f, "[{},{})", i.lo, i.hi),
        }
    }
}

impl std::str::FromStr for Piece {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| Error::invalid(format!("interval '{s}' must end with ')'")))?;
            let (a, b) = split_top_comma(inner)
                .ok_or_else(|| Error::invalid(format!("interval '{s}' needs two endpoints")))?;
            Ok(Piece::Interval(OrdinalInterval::new(a.parse()?, b.parse()?)))
        } else {
            Ok(Piece::Point(t.parse()?))
        }
    }
}

fn split_top_comma(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Override {
    pieces: Vec<Piece>,
    /// For limits: first canonical ladder index used after the explicit pieces.
    tail_from: Option<u64>,
}

impl Override {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn has_intervals(&self) -> bool {
        self.pieces.iter().any(|p| matches!(p, Piece::Interval(_)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum CSystem {
    #[default]
    Canonical,
    Full,
    Table(BTreeMap<Ordinal, Override>),
}

/// Enumeration of a ladder-type `C_b` in increasing order.
pub(crate) enum Ladder<'a> {
    Finite(Vec<Ordinal>),
    Infinite { explicit: Vec<Ordinal>, beta: &'a Ordinal, tail_from: u64 },
}

impl Ladder<'_> {
    pub(crate) fn point(&self, j: u64) -> Result<Option<Ordinal>> {
        match self {
            Ladder::Finite(v) => Ok(v.get(j as usize).cloned()),
            Ladder::Infinite { explicit, beta, tail_from } => {
                let r = explicit.len() as u64;
                if j < r {
                    Ok(Some(explicit[j as usize].clone()))
                } else {
                    Ok(Some(beta.fund_seq(tail_from + (j - r))?))
                }
            }
        }
    }

    /// Number of ladder points strictly below `alpha`, for `alpha < b`.
    pub(crate) fn count_below(&self, alpha: &Ordinal) -> Result<u64> {
        match self {
            Ladder::Finite(v) => Ok(v.iter().filter(|p| *p < alpha).count() as u64),
            Ladder::Infinite { explicit, beta, tail_from } => {
                let e = explicit.iter().filter(|p| *p < alpha).count() as u64;
                Ok(e + beta.ladder_index(alpha)?.saturating_sub(*tail_from))
            }
        }
    }
}

impl CSystem {
    pub fn table(raw: BTreeMap<Ordinal, Vec<Piece>>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (beta, mut pieces) in raw {
            pieces.sort();
            let ov = validate_override(&beta, pieces)?;
            out.insert(beta, ov);
        }
        Ok(CSystem::Table(out))
    }

    fn get_override(&self, beta: &Ordinal) -> Option<&Override> {
        match self {
            CSystem::Table(m) => m.get(beta),
            _ => None,
        }
    }

    /// True when every `C_b` is finite below each `a < b`.
    pub fn is_ladder_system(&self) -> bool {
        match self {
            CSystem::Canonical => true,
            CSystem::Full => false,
            CSystem::Table(m) => m.values().all(|o| !o.has_intervals()),
        }
    }

    /// Whether any ordinal in `(lo, hi]` carries an override.
    pub(crate) fn overridden_in(&self, lo: &Ordinal, hi: &Ordinal) -> bool {
        match self {
            CSystem::Table(m) => {
                use std::ops::Bound::{Excluded, Included};
                m.range((Excluded(lo.clone()), Included(hi.clone()))).next().is_some()
            }
            _ => false,
        }
    }

    pub(crate) fn ladder<'a>(&self, beta: &'a Ordinal) -> Result<Ladder<'a>> {
        if let Some(ov) = self.get_override(beta) {
            if ov.has_intervals() {
                return Err(Error::Unsupported(format!("C_{beta} contains an interval")));
            }
            let explicit: Vec<Ordinal> = ov.pieces.iter().map(|p| p.lo().clone()).collect();
            return Ok(match ov.tail_from {
                Some(t) => Ladder::Infinite { explicit, beta, tail_from: t },
                None => Ladder::Finite(explicit),
            });
        }
        match self {
            CSystem::Full => Err(Error::Unsupported("the full C-system is not ladder-type".into())),
            _ => match beta.classify() {
                Kind::Zero => Ok(Ladder::Finite(vec![])),
                Kind::Successor(p) => Ok(Ladder::Finite(vec![p])),
                Kind::Limit => Ok(Ladder::Infinite { explicit: vec![], beta, tail_from: 0 }),
            },
        }
    }

    /// `min(C_b \ a)`, for `a < b`.
    pub fn min_above(&self, beta: &Ordinal, alpha: &Ordinal) -> Result<Ordinal> {
        if alpha >= beta {
            return Err(Error::pre(format!("min_above needs {alpha} < {beta}")));
        }
        if let Some(ov) = self.get_override(beta) {
            for p in &ov.pieces {
                match p {
                    Piece::Point(q) if q >= alpha => return Ok(q.clone()),
                    Piece::Interval(i) if alpha < &i.hi => return Ok(i.lo.clone().max(alpha.clone())),
                    _ => {}
                }
            }
            let t = ov.tail_from.expect("successor overrides contain the predecessor");
            let n = beta.ladder_index(alpha)?.max(t);
            return beta.fund_seq(n);
        }
        match self {
            CSystem::Full => Ok(alpha.clone()),
            _ => match beta.classify() {
                Kind::Successor(p) => Ok(p),
                Kind::Limit => beta.fund_seq(beta.ladder_index(alpha)?),
                Kind::Zero => unreachable!(),
            },
        }
    }

    /// Order type of `C_b ∩ a`, for `a <= b`.
    pub fn otp_below(&self, beta: &Ordinal, alpha: &Ordinal) -> Result<Ordinal> {
        if alpha > beta {
            return Err(Error::pre(format!("otp_below needs {alpha} <= {beta}")));
        }
        if let Some(ov) = self.get_override(beta) {
            let mut acc = Ordinal::zero();
            for p in &ov.pieces {
                match p {
                    Piece::Point(q) if q < alpha => acc = acc.succ(),
                    Piece::Interval(i) if &i.lo < alpha => {
                        let top = i.hi.clone().min(alpha.clone());
                        acc = &acc + &i.lo.left_sub(&top).unwrap();
                    }
                    _ => {}
                }
            }
            if let Some(t) = ov.tail_from {
                if alpha == beta {
                    acc = &acc + &Ordinal::omega();
                } else {
                    acc = acc.add_nat(beta.ladder_index(alpha)?.saturating_sub(t));
                }
            }
            return Ok(acc);
        }
        match self {
            CSystem::Full => Ok(alpha.clone()),
            _ => match beta.classify() {
                Kind::Zero => Ok(Ordinal::zero()),
                Kind::Successor(_) => Ok(Ordinal::nat(u64::from(alpha == beta))),
                Kind::Limit if alpha == beta => Ok(Ordinal::omega()),
                Kind::Limit => Ok(Ordinal::nat(beta.ladder_index(alpha)?)),
            },
        }
    }

    /// `max(C_b ∩ a)` with `max(∅) = 0`; an error when the maximum does not exist.
    pub fn max_below(&self, beta: &Ordinal, alpha: &Ordinal) -> Result<Ordinal> {
        match self.top_below(beta, alpha)? {
            Top::Empty => Ok(Ordinal::zero()),
            Top::Max(m) => Ok(m),
            Top::Sup(s) => Err(Error::pre(format!("C_{beta} ∩ {alpha} has supremum {s} but no maximum"))),
        }
    }

    /// `sup(C_b ∩ a)`, zero for the empty set.
    pub fn sup_below(&self, beta: &Ordinal, alpha: &Ordinal) -> Result<Ordinal> {
        Ok(match self.top_below(beta, alpha)? {
            Top::Empty => Ordinal::zero(),
            Top::Max(m) => m,
            Top::Sup(s) => s,
        })
    }

    fn top_below(&self, beta: &Ordinal, alpha: &Ordinal) -> Result<Top> {
        if alpha > beta {
            return Err(Error::pre(format!("{alpha} exceeds {beta}")));
        }
        if let Some(ov) = self.get_override(beta) {
            if let Some(tail) = ov.tail_from {
                if alpha == beta {
                    return Ok(Top::Sup(beta.clone()));
                }
                let n = beta.ladder_index(alpha)?;
                if n > tail {
                    return Ok(Top::Max(beta.fund_seq(n - 1)?));
                }
            }
            for p in ov.pieces.iter().rev() {
                match p {
                    Piece::Point(q) if q < alpha => return Ok(Top::Max(q.clone())),
                    Piece::Interval(i) if &i.lo < alpha => {
                        let e = i.hi.clone().min(alpha.clone());
                        return Ok(match e.pred() {
                            Some(m) => Top::Max(m),
                            None => Top::Sup(e),
                        });
                    }
                    _ => {}
                }
            }
            return Ok(Top::Empty);
        }
        match self {
            CSystem::Full => Ok(match alpha.classify() {
                Kind::Zero => Top::Empty,
                Kind::Successor(p) => Top::Max(p),
                Kind::Limit => Top::Sup(alpha.clone()),
            }),
            _ => match beta.classify() {
                Kind::Zero => Ok(Top::Empty),
                Kind::Successor(p) => Ok(if *alpha > p { Top::Max(p) } else { Top::Empty }),
                Kind::Limit if alpha == beta => Ok(Top::Sup(beta.clone())),
                Kind::Limit => {
                    let n = beta.ladder_index(alpha)?;
                    Ok(if n == 0 { Top::Empty } else { Top::Max(beta.fund_seq(n - 1)?) })
                }
            },
        }
    }

    /// Whether `a` is a limit point of `C_b ∩ a`.
    pub fn accumulates_at(&self, beta: &Ordinal, alpha: &Ordinal) -> Result<bool> {
        if !alpha.is_limit() {
            return Ok(false);
        }
        Ok(matches!(self.top_below(beta, alpha)?, Top::Sup(s) if &s == alpha))
    }
}

enum Top {
    Empty,
    Max(Ordinal),
    Sup(Ordinal),
}

fn validate_override(beta: &Ordinal, pieces: Vec<Piece>) -> Result<Override> {
    let bad = |msg: String| Error::invalid(format!("override for {beta}: {msg}"));
    if beta.is_zero() {
        return Err(bad("C_0 is empty and cannot be overridden".into()));
    }
    let mut end = Ordinal::zero();
    for (k, p) in pieces.iter().enumerate() {
        if let Piece::Interval(i) = p {
            if i.is_empty() {
                return Err(bad(format!("empty interval {i}")));
            }
        }
        if k > 0 && p.lo() < &end {
            return Err(bad(format!("piece {p} overlaps its predecessor")));
        }
        end = p.end();
        if &end > beta {
            return Err(bad(format!("piece {p} is not below {beta}")));
        }
    }
    match beta.classify() {
        Kind::Successor(pred) => {
            if end != beta.clone() {
                return Err(bad(format!("not cofinal: must contain {pred}")));
            }
            Ok(Override { pieces, tail_from: None })
        }
        Kind::Limit => {
            let tail_from = if end.is_zero() { 0 } else { beta.ladder_index(&end)? };
            Ok(Override { pieces, tail_from: Some(tail_from) })
        }
        Kind::Zero => unreachable!(),
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    variant: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    overrides: BTreeMap<String, Vec<String>>,
}

impl CSystem {
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        if let Some(s) = v.as_str() {
            return CSystem::from_name(s);
        }
        let w: Wire = serde_json::from_value(v.clone()).map_err(|e| Error::invalid(e.to_string()))?;
        match w.variant.as_str() {
            "canonical" | "full" if !w.overrides.is_empty() => {
                Err(Error::invalid("overrides are only allowed for the table variant"))
            }
            "canonical" => Ok(CSystem::Canonical),
            "full" => Ok(CSystem::Full),
            "table" => {
                let mut raw = BTreeMap::new();
                for (k, ps) in w.overrides {
                    let beta: Ordinal = k.parse()?;
                    let pieces = ps.iter().map(|s| s.parse()).collect::<Result<Vec<Piece>>>()?;
                    raw.insert(beta, pieces);
                }
                CSystem::table(raw)
            }
            other => Err(Error::invalid(format!("unknown C-system variant '{other}'"))),
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(CSystem::Canonical),
            "full" => Ok(CSystem::Full),
            other => Err(Error::invalid(format!("unknown C-system '{other}'"))),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let w = match self {
            CSystem::Canonical => Wire { variant: "canonical".into(), overrides: BTreeMap::new() },
            CSystem::Full => Wire { variant: "full".into(), overrides: BTreeMap::new() },
            CSystem::Table(m) => Wire {
                variant: "table".into(),
                overrides: m
                    .iter()
                    .map(|(k, o)| (k.to_string(), o.pieces.iter().map(|p| p.to_string()).collect()))
                    .collect(),
            },
        };
        serde_json::to_value(w).unwrap()
    }
}
