//! Finitely presented functions from an ordinal into an abelian group.
//!
//! Every body normalizes to a [`Combo`]: a step function plus a formal
//! combination of rho atoms `x ↦ coeff · rho_kind(x, top)`. Sums stay exact
//! because atoms with the same key add their coefficients. A comparison is
//! certified either by cancellation of atoms or by turning a pair of atoms
//! into a step function with `coherence_profile`; probes are only used to
//! find witnesses of failure.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::csystem::CSystem;
use crate::error::{Error, Result};
use crate::groups::{bigint_json, FgAbelianGroup, GroupElem};
use crate::ordinal::{Ordinal, OrdinalInterval};
use crate::sample;
use crate::walks::{self, Profile, RhoKind};

/// Upper bound on points enumerated out of a finite piece.
const MAX_ENUMERATED: u64 = 100_000;
/// Number of seeded random probes used by the fallback comparison.
const RANDOM_PROBES: usize = 64;

/// A step function on `[0, domain)`: pieces `[prev_upper, upper)` with a value each.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Step {
    pieces: Vec<(Ordinal, GroupElem)>,
}

impl Step {
    pub fn constant(domain: &Ordinal, v: GroupElem) -> Step {
        if domain.is_zero() {
            return Step::default();
        }
        Step { pieces: vec![(domain.clone(), v)] }
    }

    pub fn zero(domain: &Ordinal, g: &FgAbelianGroup) -> Step {
        Step::constant(domain, g.zero())
    }

    /// Builds a step function from disjoint intervals; uncovered points map to 0.
    pub fn from_intervals(domain: &Ordinal, g: &FgAbelianGroup, mut parts: Vec<(OrdinalInterval, GroupElem)>) -> Result<Step> {
        parts.retain(|(iv, v)| !iv.is_empty() && iv.lo < *domain && !v.is_zero());
        parts.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        let mut pieces = Vec::new();
        let mut cur = Ordinal::zero();
        for (iv, v) in parts {
            if iv.lo < cur {
                return Err(Error::invalid(format!("overlapping intervals at {}", iv.lo)));
            }
            if iv.lo > cur {
                pieces.push((iv.lo.clone(), g.zero()));
            }
            let hi = iv.hi.min(domain.clone());
            pieces.push((hi.clone(), v));
            cur = hi;
        }
        if cur < *domain {
            pieces.push((domain.clone(), g.zero()));
        }
        Ok(Step { pieces }.normalized())
    }

    pub fn from_points(domain: &Ordinal, g: &FgAbelianGroup, pts: &BTreeMap<Ordinal, GroupElem>) -> Step {
        let parts = pts.iter().map(|(p, v)| (OrdinalInterval::new(p.clone(), p.succ()), v.clone())).collect();
        Step::from_intervals(domain, g, parts).expect("points are disjoint")
    }

    pub fn from_pieces(domain: &Ordinal, pieces: Vec<(Ordinal, GroupElem)>) -> Result<Step> {
        let mut prev = Ordinal::zero();
        for (u, _) in &pieces {
            if *u <= prev {
                return Err(Error::invalid(format!("breakpoint {u} is not above {prev}")));
            }
            prev = u.clone();
        }
        if prev != *domain {
            return Err(Error::invalid(format!("last breakpoint {prev} differs from the domain {domain}")));
        }
        Ok(Step { pieces }.normalized())
    }

    fn normalized(mut self) -> Step {
        let mut out: Vec<(Ordinal, GroupElem)> = Vec::with_capacity(self.pieces.len());
        for (u, v) in self.pieces.drain(..) {
            match out.last_mut() {
                Some(last) if last.1 == v => last.0 = u,
                _ => out.push((u, v)),
            }
        }
        Step { pieces: out }
    }

    pub fn domain(&self) -> Ordinal {
        self.pieces.last().map(|p| p.0.clone()).unwrap_or_default()
    }

    pub fn pieces(&self) -> &[(Ordinal, GroupElem)] {
        &self.pieces
    }

    /// `([lo, hi), value)` for each piece.
    pub fn intervals(&self) -> impl Iterator<Item = (OrdinalInterval, &GroupElem)> {
        let mut lo = Ordinal::zero();
        self.pieces.iter().map(move |(u, v)| {
            let iv = OrdinalInterval::new(std::mem::replace(&mut lo, u.clone()), u.clone());
            (iv, v)
        })
    }

    pub fn eval(&self, x: &Ordinal) -> Option<&GroupElem> {
        let i = self.pieces.partition_point(|(u, _)| u <= x);
        self.pieces.get(i).map(|p| &p.1)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.1.is_zero())
    }

    pub fn restrict(&self, beta: &Ordinal) -> Step {
        let mut out = Vec::new();
        for (u, v) in &self.pieces {
            if u >= beta {
                if !beta.is_zero() {
                    out.push((beta.clone(), v.clone()));
                }
                break;
            }
            out.push((u.clone(), v.clone()));
        }
        Step { pieces: out }
    }

    pub fn map(&self, f: impl Fn(&GroupElem) -> GroupElem) -> Step {
        Step { pieces: self.pieces.iter().map(|(u, v)| (u.clone(), f(v))).collect() }.normalized()
    }

    /// Pointwise combination of two step functions on the same domain.
    pub fn zip(&self, other: &Step, f: impl Fn(&GroupElem, &GroupElem) -> GroupElem) -> Step {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.pieces.len() && j < other.pieces.len() {
            let (ua, va) = &self.pieces[i];
            let (ub, vb) = &other.pieces[j];
            out.push((ua.clone().min(ub.clone()), f(va, vb)));
            match ua.cmp(ub) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        Step { pieces: out }.normalized()
    }

    pub fn add(&self, other: &Step, g: &FgAbelianGroup) -> Step {
        self.zip(other, |a, b| g.add(a, b))
    }

    /// Whether every nonzero piece is a finite interval.
    pub fn has_finite_support(&self) -> bool {
        self.intervals().all(|(iv, v)| v.is_zero() || !iv.is_infinite())
    }

    /// The support as a point map; requires finite support.
    pub fn support(&self) -> Result<BTreeMap<Ordinal, GroupElem>> {
        let mut out = BTreeMap::new();
        for (iv, v) in self.intervals() {
            if v.is_zero() {
                continue;
            }
            let n = iv.finite_len().ok_or_else(|| Error::pre(format!("value is nonzero on the infinite interval {iv}")))?;
            if n > MAX_ENUMERATED {
                return Err(Error::Unsupported(format!("support of {n} points in {iv} is too large to enumerate")));
            }
            for k in 0..n {
                out.insert(iv.lo.add_nat(k), v.clone());
            }
        }
        Ok(out)
    }

    /// Limit points where the function is not locally constant.
    fn first_discontinuity(&self) -> Option<Ordinal> {
        let mut prev: Option<&GroupElem> = None;
        for (iv, v) in self.intervals() {
            if let Some(p) = prev {
                if iv.lo.is_limit() && p != v {
                    return Some(iv.lo);
                }
            }
            prev = Some(v);
        }
        None
    }
}

/// Identifies a rho atom `x ↦ rho_kind(x, top)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomKey {
    pub kind: RhoKind,
    pub c: Arc<CSystem>,
    pub top: Ordinal,
}

impl AtomKey {
    fn eval(&self, x: &Ordinal) -> Result<BigInt> {
        Ok(BigInt::from(walks::rho_nat(self.kind, &self.c, x, &self.top)?))
    }
}

/// Step part plus a formal combination of rho atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combo {
    pub step: Step,
    pub atoms: BTreeMap<AtomKey, GroupElem>,
}

impl Combo {
    fn eval(&self, g: &FgAbelianGroup, x: &Ordinal) -> Result<GroupElem> {
        let mut v = self.step.eval(x).cloned().ok_or_else(|| Error::pre(format!("{x} is outside the domain")))?;
        for (k, c) in &self.atoms {
            v = g.add(&v, &g.scale(c, &k.eval(x)?));
        }
        Ok(v)
    }

    fn add(&self, other: &Combo, g: &FgAbelianGroup) -> Combo {
        let mut atoms = self.atoms.clone();
        for (k, c) in &other.atoms {
            let e = atoms.entry(k.clone()).or_insert_with(|| g.zero());
            *e = g.add(e, c);
        }
        atoms.retain(|_, c| !c.is_zero());
        Combo { step: self.step.add(&other.step, g), atoms }
    }

    fn restrict(&self, beta: &Ordinal) -> Combo {
        Combo { step: self.step.restrict(beta), atoms: self.atoms.clone() }
    }

    fn scale(&self, g: &FgAbelianGroup, k: &BigInt) -> Combo {
        let mut atoms: BTreeMap<AtomKey, GroupElem> = self.atoms.iter().map(|(a, c)| (a.clone(), g.scale(c, k))).collect();
        atoms.retain(|_, c| !c.is_zero());
        Combo { step: self.step.map(|v| g.scale(v, k)), atoms }
    }

    /// Folds atoms with a closed form into the step part.
    fn simplify(mut self, g: &FgAbelianGroup) -> Combo {
        let domain = self.step.domain();
        let keys: Vec<AtomKey> = self.atoms.keys().cloned().collect();
        for k in keys {
            let closed = match (k.kind, &*k.c) {
                // one-step walks: rho_2 = 2 below the top
                (RhoKind::Two, CSystem::Full) => Some(BigInt::from(2)),
                // ladders have order type at most w, so nothing accumulates
                (RhoKind::Three, c) if c.is_ladder_system() => Some(BigInt::zero()),
                _ => None,
            };
            if let Some(n) = closed {
                let coeff = self.atoms.remove(&k).unwrap();
                let s = Step::constant(&domain, g.scale(&coeff, &n));
                self.step = self.step.add(&s, g);
            }
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoRule {
    pub kind: RhoKind,
    pub c: Arc<CSystem>,
    pub top: Ordinal,
    /// Image of 1; values of rho are multiplied by it.
    pub embed: GroupElem,
    pub offset: GroupElem,
    /// Pointwise overrides, applied last.
    pub patch: BTreeMap<Ordinal, GroupElem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    Piecewise(Step),
    FiniteSupport(BTreeMap<Ordinal, GroupElem>),
    Rho(RhoRule),
    Lazy(Combo),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinalFunction {
    domain: Ordinal,
    group: FgAbelianGroup,
    body: Body,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CompareMode {
    #[serde(rename = "modFinite")]
    ModFinite,
    #[serde(rename = "modBounded")]
    ModBounded,
    #[serde(rename = "modLocallyConstant")]
    ModLocallyConstant,
    #[serde(rename = "exact")]
    Exact,
}

impl std::str::FromStr for CompareMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modFinite" | "finite" => Ok(CompareMode::ModFinite),
            "modBounded" | "bounded" => Ok(CompareMode::ModBounded),
            "modLocallyConstant" | "locally-constant" => Ok(CompareMode::ModLocallyConstant),
            "exact" => Ok(CompareMode::Exact),
            _ => Err(Error::invalid(format!("unknown comparison mode '{s}'"))),
        }
    }
}

impl fmt::Display for CompareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareMode::ModFinite => "modFinite",
            CompareMode::ModBounded => "modBounded",
            CompareMode::ModLocallyConstant => "modLocallyConstant",
            CompareMode::Exact => "exact",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Point { at: Ordinal },
    Interval { interval: OrdinalInterval },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Point { at } => write!(f, "{at}"),
            Witness::Interval { interval } => write!(f, "{interval}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No { witness: Witness },
    Unknown { reason: String },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Del,
    DelInv,
    ShiftR,
    ShiftRInv,
}

impl std::str::FromStr for Transform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "del" => Ok(Transform::Del),
            "del_inv" | "del-inv" => Ok(Transform::DelInv),
            "shift_r" | "shift-r" => Ok(Transform::ShiftR),
            "shift_r_inv" | "shift-r-inv" => Ok(Transform::ShiftRInv),
            _ => Err(Error::invalid(format!("unknown transform '{s}'"))),
        }
    }
}

impl OrdinalFunction {
    pub fn zero(domain: Ordinal, group: FgAbelianGroup) -> Self {
        let s = Step::zero(&domain, &group);
        OrdinalFunction { domain, group, body: Body::Piecewise(s) }
    }

    pub fn constant(domain: Ordinal, group: FgAbelianGroup, v: GroupElem) -> Result<Self> {
        let v = group.check(&v)?;
        Ok(OrdinalFunction { body: Body::Piecewise(Step::constant(&domain, v)), domain, group })
    }

    pub fn piecewise(domain: Ordinal, group: FgAbelianGroup, pieces: Vec<(Ordinal, GroupElem)>) -> Result<Self> {
        let pieces = pieces.into_iter().map(|(u, v)| Ok((u, group.check(&v)?))).collect::<Result<Vec<_>>>()?;
        let s = Step::from_pieces(&domain, pieces)?;
        Ok(OrdinalFunction { domain, group, body: Body::Piecewise(s) })
    }

    pub fn from_step(group: FgAbelianGroup, step: Step) -> Self {
        OrdinalFunction { domain: step.domain(), group, body: Body::Piecewise(step) }
    }

    pub fn finite_support(domain: Ordinal, group: FgAbelianGroup, pts: BTreeMap<Ordinal, GroupElem>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (p, v) in pts {
            if p >= domain {
                return Err(Error::invalid(format!("support point {p} is outside the domain {domain}")));
            }
            let v = group.check(&v)?;
            if !v.is_zero() {
                out.insert(p, v);
            }
        }
        Ok(OrdinalFunction { domain, group, body: Body::FiniteSupport(out) })
    }

    pub fn rho(domain: Ordinal, group: FgAbelianGroup, rule: RhoRule) -> Result<Self> {
        if rule.top < domain {
            return Err(Error::invalid(format!("rho top {} is below the domain {domain}", rule.top)));
        }
        let embed = group.check(&rule.embed)?;
        let offset = group.check(&rule.offset)?;
        let mut patch = BTreeMap::new();
        for (p, v) in &rule.patch {
            if *p >= domain {
                return Err(Error::invalid(format!("patch point {p} is outside the domain {domain}")));
            }
            patch.insert(p.clone(), group.check(v)?);
        }
        let rule = RhoRule { embed, offset, patch, ..rule };
        Ok(OrdinalFunction { domain, group, body: Body::Rho(rule) })
    }

    fn from_combo(domain: Ordinal, group: FgAbelianGroup, combo: Combo) -> Self {
        let body = if combo.atoms.is_empty() { Body::Piecewise(combo.step) } else { Body::Lazy(combo) };
        OrdinalFunction { domain, group, body }
    }

    pub fn domain(&self) -> &Ordinal {
        &self.domain
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn eval(&self, x: &Ordinal) -> Result<GroupElem> {
        if *x >= self.domain {
            return Err(Error::pre(format!("{x} is outside the domain {}", self.domain)));
        }
        match &self.body {
            Body::Piecewise(s) => Ok(s.eval(x).cloned().expect("covered")),
            Body::FiniteSupport(m) => Ok(m.get(x).cloned().unwrap_or_else(|| self.group.zero())),
            Body::Rho(r) => {
                if let Some(v) = r.patch.get(x) {
                    return Ok(v.clone());
                }
                let n = walks::rho_nat(r.kind, &r.c, x, &r.top)?;
                Ok(self.group.add(&self.group.scale(&r.embed, &BigInt::from(n)), &r.offset))
            }
            Body::Lazy(c) => c.eval(&self.group, x),
        }
    }

    /// The step function, when the body has no rho atoms left after simplification.
    pub fn step(&self) -> Result<Option<Step>> {
        let c = self.combo()?;
        Ok(c.atoms.is_empty().then_some(c.step))
    }

    /// The step function or an error naming the unsupported body.
    pub fn require_step(&self) -> Result<Step> {
        self.step()?.ok_or_else(|| Error::Unsupported("operation needs a piecewise or finite-support body".into()))
    }

    pub fn combo(&self) -> Result<Combo> {
        let g = &self.group;
        let c = match &self.body {
            Body::Piecewise(s) => Combo { step: s.clone(), atoms: BTreeMap::new() },
            Body::FiniteSupport(m) => Combo { step: Step::from_points(&self.domain, g, m), atoms: BTreeMap::new() },
            Body::Lazy(c) => c.clone(),
            Body::Rho(r) => {
                let key = AtomKey { kind: r.kind, c: r.c.clone(), top: r.top.clone() };
                let mut corr = BTreeMap::new();
                for (p, v) in &r.patch {
                    let n = key.eval(p)?;
                    let base = g.add(&g.scale(&r.embed, &n), &r.offset);
                    corr.insert(p.clone(), g.sub(v, &base));
                }
                let step = Step::constant(&self.domain, r.offset.clone()).add(&Step::from_points(&self.domain, g, &corr), g);
                let mut atoms = BTreeMap::new();
                if !r.embed.is_zero() {
                    atoms.insert(key, r.embed.clone());
                }
                Combo { step, atoms }
            }
        };
        Ok(c.simplify(g))
    }

    /// Restriction, or extension by zero when `beta` exceeds the domain.
    pub fn resize(&self, beta: &Ordinal) -> Result<Self> {
        if *beta <= self.domain {
            return self.restrict(beta);
        }
        let g = &self.group;
        match &self.body {
            Body::FiniteSupport(m) => Ok(OrdinalFunction { domain: beta.clone(), group: g.clone(), body: Body::FiniteSupport(m.clone()) }),
            _ => {
                let s = self.require_step()?;
                let tail = OrdinalInterval::new(self.domain.clone(), beta.clone());
                let mut parts: Vec<(OrdinalInterval, GroupElem)> = s.intervals().map(|(iv, v)| (iv, v.clone())).collect();
                parts.push((tail, g.zero()));
                Ok(OrdinalFunction::from_step(g.clone(), Step::from_intervals(beta, g, parts)?))
            }
        }
    }

    pub fn restrict(&self, beta: &Ordinal) -> Result<Self> {
        if *beta > self.domain {
            return Err(Error::pre(format!("cannot restrict a function on {} to {beta}", self.domain)));
        }
        let body = match &self.body {
            Body::Piecewise(s) => Body::Piecewise(s.restrict(beta)),
            Body::FiniteSupport(m) => Body::FiniteSupport(m.range(..beta.clone()).map(|(k, v)| (k.clone(), v.clone())).collect()),
            Body::Rho(r) => Body::Rho(RhoRule {
                patch: r.patch.range(..beta.clone()).map(|(k, v)| (k.clone(), v.clone())).collect(),
                ..r.clone()
            }),
            Body::Lazy(c) => Body::Lazy(c.restrict(beta)),
        };
        Ok(OrdinalFunction { domain: beta.clone(), group: self.group.clone(), body })
    }

    pub fn neg(&self) -> Self {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let g = &self.group;
        let body = match &self.body {
            Body::Piecewise(s) => Body::Piecewise(s.map(|v| g.scale(v, k))),
            Body::FiniteSupport(m) => {
                let mut out: BTreeMap<Ordinal, GroupElem> = m.iter().map(|(p, v)| (p.clone(), g.scale(v, k))).collect();
                out.retain(|_, v| !v.is_zero());
                Body::FiniteSupport(out)
            }
            Body::Rho(r) => Body::Rho(RhoRule {
                embed: g.scale(&r.embed, k),
                offset: g.scale(&r.offset, k),
                patch: r.patch.iter().map(|(p, v)| (p.clone(), g.scale(v, k))).collect(),
                ..r.clone()
            }),
            Body::Lazy(c) => Body::Lazy(c.scale(g, k)),
        };
        OrdinalFunction { domain: self.domain.clone(), group: g.clone(), body }
    }

    /// Pointwise sum on the smaller of the two domains.
    pub fn add(&self, other: &OrdinalFunction) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::invalid(format!("group mismatch: {} vs {}", self.group, other.group)));
        }
        let d = self.domain.clone().min(other.domain.clone());
        let (a, b) = (self.restrict(&d)?, other.restrict(&d)?);
        let g = &self.group;
        match (&a.body, &b.body) {
            (Body::FiniteSupport(x), Body::FiniteSupport(y)) => {
                let mut out = x.clone();
                for (p, v) in y {
                    let e = out.entry(p.clone()).or_insert_with(|| g.zero());
                    *e = g.add(e, v);
                }
                out.retain(|_, v| !v.is_zero());
                return Ok(OrdinalFunction { domain: d, group: g.clone(), body: Body::FiniteSupport(out) });
            }
            (Body::Rho(_), Body::FiniteSupport(fs)) => return a.absorb_points(fs),
            (Body::FiniteSupport(fs), Body::Rho(_)) => return b.absorb_points(fs),
            _ => {}
        }
        let c = a.combo()?.add(&b.combo()?, g).simplify(g);
        Ok(OrdinalFunction::from_combo(d, g.clone(), c))
    }

    fn absorb_points(&self, fs: &BTreeMap<Ordinal, GroupElem>) -> Result<Self> {
        let Body::Rho(r) = &self.body else { unreachable!() };
        let mut patch = r.patch.clone();
        for (p, v) in fs {
            let cur = self.eval(p)?;
            patch.insert(p.clone(), self.group.add(&cur, v));
        }
        Ok(OrdinalFunction { body: Body::Rho(RhoRule { patch, ..r.clone() }), ..self.clone() })
    }

    pub fn sub(&self, other: &OrdinalFunction) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Whether the function is presented with finite support.
    pub fn is_finitely_supported(&self) -> bool {
        match &self.body {
            Body::FiniteSupport(_) => true,
            Body::Piecewise(s) => s.has_finite_support(),
            _ => false,
        }
    }

    /// Compares on the smaller domain.
    pub fn compare(&self, other: &OrdinalFunction, mode: CompareMode, fuel: u64) -> Result<Verdict> {
        if self.group != other.group {
            return Err(Error::invalid(format!("group mismatch: {} vs {}", self.group, other.group)));
        }
        if mode == CompareMode::ModBounded && !self.group.torsion.is_empty() {
            return Err(Error::Unsupported(format!(
                "bounded comparison needs a torsion-free group embedded coordinatewise in Z^r, got {}",
                self.group
            )));
        }
        let diff = self.sub(other)?;
        diff.compare_zero(mode, fuel)
    }

    /// Compares the function with 0.
    pub fn compare_zero(&self, mode: CompareMode, fuel: u64) -> Result<Verdict> {
        let g = &self.group;
        let combo = self.combo()?;
        match resolve_atoms(g, &combo, fuel)? {
            Resolved::Step(s) => Ok(decide_step(&s, mode)),
            Resolved::Open(reason) => self.probe_fallback(mode, reason),
        }
    }

    fn probe_fallback(&self, mode: CompareMode, reason: String) -> Result<Verdict> {
        if mode == CompareMode::Exact {
            for p in probe_points(&self.domain, &breakpoints(&self.body), RANDOM_PROBES) {
                match self.eval(&p) {
                    Ok(v) if !v.is_zero() => return Ok(Verdict::No { witness: Witness::Point { at: p } }),
                    Ok(_) => {}
                    Err(e) if e.is_fuel() => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(Verdict::Unknown { reason })
    }

    pub fn transform(&self, dir: Transform) -> Result<Self> {
        let s = self.require_step()?;
        let g = &self.group;
        let d = &self.domain;
        match dir {
            Transform::Del => {
                let mut pts = BTreeMap::new();
                let mut prev = g.zero();
                for (iv, v) in s.intervals() {
                    let jump = g.sub(v, &prev);
                    if !jump.is_zero() {
                        pts.insert(iv.lo.clone(), jump);
                    }
                    prev = v.clone();
                }
                OrdinalFunction::finite_support(d.clone(), g.clone(), pts)
            }
            Transform::DelInv => {
                let pts = s.support()?;
                let mut pieces = Vec::new();
                let mut acc = g.zero();
                for (p, v) in pts {
                    pieces.push((p.clone(), acc.clone()));
                    acc = g.add(&acc, &v);
                }
                if !d.is_zero() {
                    pieces.push((d.clone(), acc));
                }
                let pieces = pieces.into_iter().filter(|(u, _)| !u.is_zero()).collect();
                Ok(OrdinalFunction::from_step(g.clone(), Step::from_pieces(d, pieces)?))
            }
            Transform::ShiftR => {
                let w = Ordinal::omega();
                let mut parts = Vec::new();
                for (iv, v) in s.intervals() {
                    if v.is_zero() {
                        continue;
                    }
                    parts.push((OrdinalInterval::new(iv.lo.clone(), iv.hi.clone().min(w.clone())), v.clone()));
                    let a = iv.lo.clone().max(w.clone());
                    if a >= iv.hi {
                        continue;
                    }
                    // successors in (a, hi] inherit v, the limits there become 0
                    let mut start = a.succ();
                    for lam in limits_in(&a.succ(), &iv.hi.succ())? {
                        parts.push((OrdinalInterval::new(start, lam.clone()), v.clone()));
                        start = lam.succ();
                    }
                    parts.push((OrdinalInterval::new(start, iv.hi.succ()), v.clone()));
                }
                let out = Step::from_intervals(d, g, parts)?;
                Ok(self.with_step_like(out))
            }
            Transform::ShiftRInv => {
                let w = Ordinal::omega();
                if *d > w && !d.is_limit() {
                    return Err(Error::pre(format!("shift_r_inv reads x+1 and needs a limit domain, got {d}")));
                }
                let pre = |x: &Ordinal| x.pred().unwrap_or_else(|| x.clone());
                let mut parts = Vec::new();
                for (iv, v) in s.intervals() {
                    if v.is_zero() {
                        continue;
                    }
                    parts.push((OrdinalInterval::new(iv.lo.clone(), iv.hi.clone().min(w.clone())), v.clone()));
                    let a = iv.lo.clone().max(w.clone());
                    if a >= iv.hi {
                        continue;
                    }
                    parts.push((OrdinalInterval::new(pre(&a).max(w.clone()), pre(&iv.hi)), v.clone()));
                }
                let out = Step::from_intervals(d, g, parts)?;
                Ok(self.with_step_like(out))
            }
        }
    }

    /// Keeps finite-support presentations finite-support.
    fn with_step_like(&self, s: Step) -> Self {
        if matches!(self.body, Body::FiniteSupport(_)) && s.has_finite_support() {
            if let Ok(pts) = s.support() {
                return OrdinalFunction { domain: self.domain.clone(), group: self.group.clone(), body: Body::FiniteSupport(pts) };
            }
        }
        OrdinalFunction::from_step(self.group.clone(), s)
    }

    /// Values on consecutive intervals taken from different functions.
    pub fn glue(domain: &Ordinal, group: &FgAbelianGroup, parts: &[(OrdinalInterval, &OrdinalFunction)]) -> Result<Self> {
        let mut pieces = Vec::new();
        for (iv, f) in parts {
            let iv = iv.intersect(&OrdinalInterval::new(Ordinal::zero(), domain.clone()));
            if iv.is_empty() {
                continue;
            }
            if iv.hi > *f.domain() {
                return Err(Error::pre(format!("glued piece {iv} exceeds the domain {}", f.domain())));
            }
            for (jv, v) in f.require_step()?.intervals() {
                let k = jv.intersect(&iv);
                if !k.is_empty() {
                    pieces.push((k, v.clone()));
                }
            }
        }
        Ok(OrdinalFunction::from_step(group.clone(), Step::from_intervals(domain, group, pieces)?))
    }
}

enum Resolved {
    Step(Step),
    Open(String),
}

/// Replaces atom pairs by step functions computed from coherence profiles.
fn resolve_atoms(g: &FgAbelianGroup, combo: &Combo, fuel: u64) -> Result<Resolved> {
    let domain = combo.step.domain();
    let mut step = combo.step.clone();
    let mut groups: BTreeMap<(RhoKind, Arc<CSystem>), Vec<(Ordinal, GroupElem)>> = BTreeMap::new();
    for (k, c) in &combo.atoms {
        groups.entry((k.kind, k.c.clone())).or_default().push((k.top.clone(), c.clone()));
    }
    for ((kind, c), atoms) in groups {
        let total = atoms.iter().fold(g.zero(), |acc, (_, x)| g.add(&acc, x));
        if !total.is_zero() {
            return Ok(Resolved::Open(format!(
                "rho_{kind} atoms with coefficient sum {total} do not cancel; no certified comparison"
            )));
        }
        if kind == RhoKind::Three || !c.is_ladder_system() {
            return Ok(Resolved::Open(format!("no profile for rho_{kind} on this C-system")));
        }
        // sum a_i rho(., t_i) = sum_{i>0} a_i (rho(., t_i) - rho(., t_0)) when sum a_i = 0
        let (t0, _) = &atoms[0];
        for (ti, ai) in &atoms[1..] {
            let part = match walks::coherence_profile(kind, &c, t0, ti, fuel)? {
                Profile::PiecewiseDiff { pieces } => {
                    let parts = pieces.into_iter().map(|(iv, k)| (iv, g.scale(ai, &BigInt::from(k)))).collect();
                    Step::from_intervals(&domain, g, parts)?
                }
                Profile::FiniteDiff { points } => {
                    let mut pts = BTreeMap::new();
                    for p in points.into_iter().filter(|p| *p < domain) {
                        let d = BigInt::from(walks::rho_nat(kind, &c, &p, ti)?) - BigInt::from(walks::rho_nat(kind, &c, &p, t0)?);
                        pts.insert(p, g.scale(ai, &d));
                    }
                    Step::from_points(&domain, g, &pts)
                }
                Profile::InfiniteWitness { interval } => {
                    return Ok(Resolved::Open(format!("rho_{kind}({t0}) and rho_{kind}({ti}) differ on {interval}")));
                }
                Profile::FuelExhausted { spent } => {
                    return Ok(Resolved::Open(format!("profile of {t0} and {ti} ran out of fuel after {spent} steps")));
                }
            };
            step = step.add(&part, g);
        }
    }
    Ok(Resolved::Step(step))
}

fn decide_step(s: &Step, mode: CompareMode) -> Verdict {
    match mode {
        CompareMode::Exact => match s.intervals().find(|(_, v)| !v.is_zero()) {
            Some((iv, _)) => Verdict::No { witness: Witness::Interval { interval: iv } },
            None => Verdict::Yes,
        },
        CompareMode::ModFinite => match s.intervals().find(|(iv, v)| !v.is_zero() && iv.is_infinite()) {
            Some((iv, _)) => Verdict::No { witness: Witness::Interval { interval: iv } },
            None => Verdict::Yes,
        },
        // finitely many values
        CompareMode::ModBounded => Verdict::Yes,
        CompareMode::ModLocallyConstant => match s.first_discontinuity() {
            Some(at) => Verdict::No { witness: Witness::Point { at } },
            None => Verdict::Yes,
        },
    }
}

fn breakpoints(b: &Body) -> Vec<Ordinal> {
    match b {
        Body::Piecewise(s) => s.pieces.iter().map(|p| p.0.clone()).collect(),
        Body::FiniteSupport(m) => m.keys().cloned().collect(),
        Body::Rho(r) => r.patch.keys().cloned().collect(),
        Body::Lazy(c) => c.step.pieces.iter().map(|p| p.0.clone()).chain(c.atoms.keys().map(|k| k.top.clone())).collect(),
    }
}

/// Deterministic probe arguments below `domain`: small naturals, points near
/// the given breakpoints, and seeded random samples.
pub fn probe_points(domain: &Ordinal, marks: &[Ordinal], random: usize) -> Vec<Ordinal> {
    let mut out = std::collections::BTreeSet::new();
    if domain.is_zero() {
        return vec![];
    }
    for k in 0..16 {
        let x = Ordinal::nat(k);
        if x < *domain {
            out.insert(x);
        }
    }
    for m in marks {
        for k in 0..3 {
            let x = m.add_nat(k);
            if x < *domain {
                out.insert(x);
            }
        }
        if let Some(p) = m.pred() {
            if p < *domain {
                out.insert(p);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x00dd_5eed);
    for _ in 0..random {
        out.insert(sample::ordinal_below(&mut rng, domain, 4));
    }
    out.into_iter().collect()
}

/// Limit ordinals in `[lo, hi)`; an error when there are infinitely many.
pub fn limits_in(lo: &Ordinal, hi: &Ordinal) -> Result<Vec<Ordinal>> {
    if lo >= hi {
        return Ok(vec![]);
    }
    let (base, m) = lo.limit_part();
    let w = Ordinal::omega();
    let gap = base.left_sub(hi).expect("base <= hi");
    if gap >= Ordinal::omega_pow(Ordinal::nat(2)) {
        return Err(Error::Unsupported(format!("[{lo}, {hi}) contains infinitely many limits")));
    }
    let mut x = if m == 0 && !lo.is_zero() { lo.clone() } else { &base + &w };
    let mut out = Vec::new();
    while x < *hi {
        if out.len() as u64 >= MAX_ENUMERATED {
            return Err(Error::Unsupported(format!("[{lo}, {hi}) contains too many limits to enumerate")));
        }
        out.push(x.clone());
        x = &x + &w;
    }
    Ok(out)
}

// JSON

fn elem_to_json(g: &FgAbelianGroup, e: &GroupElem) -> Value {
    if g.ngens() == 1 {
        bigint_json::to_value(&e.0[0])
    } else {
        bigint_json::vec_to_value(&e.0)
    }
}

fn elem_from_json(g: &FgAbelianGroup, v: &Value) -> Result<GroupElem> {
    let coords = if g.ngens() == 0 && v.as_i64() == Some(0) {
        vec![]
    } else {
        bigint_json::vec_from_value(v).map_err(|e| Error::invalid(e.to_string()))?
    };
    g.check(&GroupElem(coords))
}

/// Group element in JSON form, as used in function bodies.
pub fn element_from_json(g: &FgAbelianGroup, v: &Value) -> Result<GroupElem> {
    elem_from_json(g, v)
}

pub fn element_to_json(g: &FgAbelianGroup, e: &GroupElem) -> Value {
    elem_to_json(g, e)
}

fn ord_field(v: &Value, key: &str) -> Result<Ordinal> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::invalid(format!("missing ordinal field '{key}'")))?
        .parse()
}

fn pieces_to_json(g: &FgAbelianGroup, s: &Step) -> Value {
    Value::Array(s.pieces.iter().map(|(u, v)| json!([u.to_string(), elem_to_json(g, v)])).collect())
}

fn pieces_from_json(g: &FgAbelianGroup, v: &Value) -> Result<Vec<(Ordinal, GroupElem)>> {
    let arr = v.as_array().ok_or_else(|| Error::invalid("pieces must be an array of [breakpoint, value]"))?;
    arr.iter()
        .map(|p| {
            let pair = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::invalid("piece must be [breakpoint, value]"))?;
            let u: Ordinal = pair[0].as_str().ok_or_else(|| Error::invalid("breakpoint must be a string"))?.parse()?;
            Ok((u, elem_from_json(g, &pair[1])?))
        })
        .collect()
}

fn points_to_json(g: &FgAbelianGroup, m: &BTreeMap<Ordinal, GroupElem>) -> Value {
    let mut obj = serde_json::Map::new();
    for (p, v) in m {
        obj.insert(p.to_string(), elem_to_json(g, v));
    }
    Value::Object(obj)
}

fn points_from_json(g: &FgAbelianGroup, v: Option<&Value>) -> Result<BTreeMap<Ordinal, GroupElem>> {
    let Some(v) = v else { return Ok(BTreeMap::new()) };
    let obj = v.as_object().ok_or_else(|| Error::invalid("point map must be an object"))?;
    obj.iter().map(|(k, x)| Ok((k.parse()?, elem_from_json(g, x)?))).collect()
}

fn embed_from_json(g: &FgAbelianGroup, v: Option<&Value>) -> Result<GroupElem> {
    match v {
        None => Ok(g.generator()),
        Some(Value::String(s)) if s == "id" => Ok(g.generator()),
        Some(x) => elem_from_json(g, x),
    }
}

impl OrdinalFunction {
    pub fn to_json(&self) -> Value {
        let g = &self.group;
        let body = match &self.body {
            Body::Piecewise(s) => json!({"type": "piecewise", "pieces": pieces_to_json(g, s)}),
            Body::FiniteSupport(m) => json!({"type": "finsupp", "support": points_to_json(g, m)}),
            Body::Rho(r) => json!({
                "type": "rho",
                "kind": u8::from(r.kind),
                "csystem": r.c.to_json(),
                "top": r.top.to_string(),
                "embed": elem_to_json(g, &r.embed),
                "offset": elem_to_json(g, &r.offset),
                "patch": points_to_json(g, &r.patch),
            }),
            Body::Lazy(c) => json!({
                "type": "lazy",
                "step": pieces_to_json(g, &c.step),
                "atoms": c.atoms.iter().map(|(k, x)| json!({
                    "kind": u8::from(k.kind),
                    "csystem": k.c.to_json(),
                    "top": k.top.to_string(),
                    "coeff": elem_to_json(g, x),
                })).collect::<Vec<_>>(),
            }),
        };
        json!({"domain": self.domain.to_string(), "group": serde_json::to_value(g).unwrap(), "body": body})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let domain = ord_field(v, "domain")?;
        let group: FgAbelianGroup = match v.get("group") {
            Some(gv) => serde_json::from_value(gv.clone()).map_err(|e| Error::invalid(e.to_string()))?,
            None => FgAbelianGroup::z(),
        };
        let body = v.get("body").ok_or_else(|| Error::invalid("missing 'body'"))?;
        let ty = body.get("type").and_then(Value::as_str).ok_or_else(|| Error::invalid("body needs a 'type'"))?;
        let g = &group;
        match ty {
            "piecewise" => {
                let pieces = pieces_from_json(g, body.get("pieces").unwrap_or(&Value::Null))?;
                OrdinalFunction::piecewise(domain, group, pieces)
            }
            "finsupp" => {
                let pts = points_from_json(g, body.get("support"))?;
                OrdinalFunction::finite_support(domain, group, pts)
            }
            "rho" => {
                let kind = body.get("kind").and_then(Value::as_u64).ok_or_else(|| Error::invalid("rho body needs 'kind'"))?;
                let kind = RhoKind::try_from(u8::try_from(kind).map_err(|_| Error::invalid("bad rho kind"))?)?;
                let c = match body.get("csystem") {
                    Some(cv) => CSystem::from_json(cv)?,
                    None => CSystem::Canonical,
                };
                let rule = RhoRule {
                    kind,
                    c: Arc::new(c),
                    top: ord_field(body, "top")?,
                    embed: embed_from_json(g, body.get("embed"))?,
                    offset: match body.get("offset") {
                        Some(x) => elem_from_json(g, x)?,
                        None => g.zero(),
                    },
                    patch: points_from_json(g, body.get("patch"))?,
                };
                OrdinalFunction::rho(domain, group, rule)
            }
            "lazy" => {
                let step = Step::from_pieces(&domain, pieces_from_json(g, body.get("step").unwrap_or(&Value::Null))?)?;
                let mut atoms = BTreeMap::new();
                for a in body.get("atoms").and_then(Value::as_array).cloned().unwrap_or_default() {
                    let kind = a.get("kind").and_then(Value::as_u64).ok_or_else(|| Error::invalid("atom needs 'kind'"))?;
                    let kind = RhoKind::try_from(u8::try_from(kind).map_err(|_| Error::invalid("bad rho kind"))?)?;
                    let c = match a.get("csystem") {
                        Some(cv) => CSystem::from_json(cv)?,
                        None => CSystem::Canonical,
                    };
                    let top = ord_field(&a, "top")?;
                    if top < domain {
                        return Err(Error::invalid(format!("atom top {top} is below the domain {domain}")));
                    }
                    let coeff = elem_from_json(g, a.get("coeff").unwrap_or(&Value::Null))?;
                    atoms.insert(AtomKey { kind, c: Arc::new(c), top }, coeff);
                }
                atoms.retain(|_, c: &mut GroupElem| !c.is_zero());
                Ok(OrdinalFunction::from_combo(domain, group, Combo { step, atoms }))
            }
            other => Err(Error::invalid(format!("unknown body type '{other}'"))),
        }
    }
}

/// The absolute value bound of an integer step function, for reports.
pub fn sup_norm(s: &Step) -> BigInt {
    s.pieces.iter().flat_map(|(_, v)| v.0.iter().map(|x| x.abs())).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn z() -> FgAbelianGroup {
        FgAbelianGroup::z()
    }

    fn e(n: i64) -> GroupElem {
        GroupElem(vec![BigInt::from(n)])
    }

    fn pw(domain: &str, pieces: &[(&str, i64)]) -> OrdinalFunction {
        OrdinalFunction::piecewise(o(domain), z(), pieces.iter().map(|(u, v)| (o(u), e(*v))).collect()).unwrap()
    }

    fn fs(domain: &str, pts: &[(&str, i64)]) -> OrdinalFunction {
        OrdinalFunction::finite_support(o(domain), z(), pts.iter().map(|(p, v)| (o(p), e(*v))).collect()).unwrap()
    }

    fn rho2(domain: &str, top: &str) -> OrdinalFunction {
        let rule = RhoRule {
            kind: RhoKind::Two,
            c: Arc::new(CSystem::Canonical),
            top: o(top),
            embed: e(1),
            offset: e(0),
            patch: BTreeMap::new(),
        };
        OrdinalFunction::rho(o(domain), z(), rule).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(pw("w*2", &[("w", 1), ("w*2", 0)]).eval(&o("w")).unwrap(), e(0));
        assert_eq!(fs("w", &[("3", 1)]).eval(&o("5")).unwrap(), e(0));
        assert_eq!(rho2("w", "w").eval(&o("2")).unwrap(), e(2));
        assert!(rho2("w", "w").eval(&o("w")).is_err());
    }

    #[test]
    fn combine_examples() {
        let one = pw("w", &[("w", 1)]);
        let s = one.add(&one.neg()).unwrap();
        assert!(s.require_step().unwrap().is_zero());
        let r = pw("w^2", &[("w", 1), ("w^2", 2)]).restrict(&o("w")).unwrap();
        assert_eq!(r, pw("w", &[("w", 1)]));
        let lazy = rho2("w", "w*2").add(&rho2("w", "w").neg()).unwrap();
        assert!(matches!(lazy.body(), Body::Lazy(_)));
        assert_eq!(lazy.eval(&o("3")).unwrap(), e(1));
    }

    #[test]
    fn compare_examples() {
        let a = pw("w*2", &[("5", 0), ("w", 1), ("w*2", 0)]);
        let b = pw("w*2", &[("w*2", 0)]);
        let v = a.compare(&b, CompareMode::ModFinite, 1000).unwrap();
        assert_eq!(v, Verdict::No { witness: Witness::Interval { interval: OrdinalInterval::new(o("5"), o("w")) } });
        let f = pw("w*2", &[("w", 3), ("w*2", 1)]);
        let g = f.add(&fs("w*2", &[("3", 1)])).unwrap();
        assert!(f.compare(&g, CompareMode::ModFinite, 1000).unwrap().is_yes());
        assert!(f.compare(&g, CompareMode::Exact, 1000).unwrap().is_no());
        let v = rho2("w*2", "w*2").restrict(&o("w")).unwrap();
        assert!(v.compare(&rho2("w", "w*2"), CompareMode::Exact, 1000).unwrap().is_yes());
        let v = rho2("w", "w*2").compare(&rho2("w", "w"), CompareMode::ModLocallyConstant, 10_000).unwrap();
        assert!(v.is_yes());
        let v = rho2("w", "w*2").compare(&rho2("w", "w"), CompareMode::ModFinite, 10_000).unwrap();
        assert!(v.is_no());
    }

    #[test]
    fn locally_constant_rule() {
        // jump at the limit w
        let f = pw("w*2", &[("w", 0), ("w*2", 1)]);
        let v = f.compare_zero(CompareMode::ModLocallyConstant, 10).unwrap();
        assert_eq!(v, Verdict::No { witness: Witness::Point { at: o("w") } });
        // jump at a successor is fine
        let g = pw("w*2", &[("w+1", 0), ("w*2", 1)]);
        assert!(g.compare_zero(CompareMode::ModLocallyConstant, 10).unwrap().is_yes());
    }

    #[test]
    fn bounded_needs_torsion_free() {
        let g2 = FgAbelianGroup::cyclic(2);
        let f = OrdinalFunction::zero(o("w"), g2);
        assert!(f.compare(&f, CompareMode::ModBounded, 10).is_err());
        let f = pw("w", &[("w", 4)]);
        assert!(f.compare_zero(CompareMode::ModBounded, 10).unwrap().is_yes());
    }

    #[test]
    fn transform_examples() {
        let one = pw("w", &[("w", 1)]);
        let d = one.transform(Transform::Del).unwrap();
        assert_eq!(d, fs("w", &[("0", 1)]));
        assert_eq!(d.transform(Transform::DelInv).unwrap(), one);
        let f = pw("w^2", &[("3", 2), ("w", 5), ("w*2+4", -1), ("w^2", 0)]);
        assert_eq!(f.transform(Transform::Del).unwrap().transform(Transform::DelInv).unwrap(), f);
    }

    #[test]
    fn shifts_match_pointwise_definition() {
        let psi = fs("w*3", &[("2", 1), ("w", 4), ("w+2", 3), ("w*2", 7)]);
        let r = psi.transform(Transform::ShiftR).unwrap();
        for x in ["0", "2", "w", "w+1", "w+3", "w*2", "w*2+1", "w*2+2"] {
            let x = o(x);
            let expect = if x.is_finite() {
                psi.eval(&x).unwrap()
            } else if x.is_limit() {
                e(0)
            } else {
                psi.eval(&x.pred().unwrap()).unwrap()
            };
            assert_eq!(r.eval(&x).unwrap(), expect, "at {x}");
        }
        let phi = pw("w*3", &[("w+1", 2), ("w*2", 5), ("w*3", 1)]);
        let ri = phi.transform(Transform::ShiftRInv).unwrap();
        for x in ["0", "5", "w", "w+1", "w*2", "w*2+3"] {
            let x = o(x);
            let expect = if x.is_finite() { phi.eval(&x).unwrap() } else { phi.eval(&x.succ()).unwrap() };
            assert_eq!(ri.eval(&x).unwrap(), expect, "at {x}");
        }
    }

    #[test]
    fn limits_enumeration() {
        assert_eq!(limits_in(&o("3"), &o("w*3+1")).unwrap(), vec![o("w"), o("w*2"), o("w*3")]);
        assert_eq!(limits_in(&o("w*2"), &o("w*2+5")).unwrap(), vec![o("w*2")]);
        assert!(limits_in(&o("0"), &o("w^2")).is_err());
    }

    #[test]
    fn json_round_trip() {
        for f in [
            pw("w*2", &[("w", 1), ("w*2", 0)]),
            fs("w", &[("3", 1)]),
            rho2("w", "w*2"),
            rho2("w", "w*2").add(&rho2("w", "w").neg()).unwrap(),
        ] {
            let back = OrdinalFunction::from_json(&f.to_json()).unwrap();
            assert_eq!(back, f);
        }
        let v = serde_json::json!({"domain": "w", "group": {"rank": 1, "torsion": []},
            "body": {"type": "rho", "kind": 2, "csystem": "canonical", "top": "w", "embed": "id"}});
        assert_eq!(OrdinalFunction::from_json(&v).unwrap().eval(&o("2")).unwrap(), e(2));
    }
}
