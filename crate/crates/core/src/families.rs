//! Indexed families of ordinal functions and the n-coherence calculus.
//!
//! An n-family on a finite index set `D` assigns to every increasing n-tuple
//! `a_0 < ... < a_{n-1}` of `D` a function with domain `a_0`. A 0-family has
//! a single entry at the empty tuple; its domain is arbitrary and the `d`
//! operator extends it by zero where needed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::csystem::CSystem;
use crate::error::{Error, Result};
use crate::finfun::{Body, CompareMode, OrdinalFunction, RhoRule, Verdict, Witness};
use crate::groups::{FgAbelianGroup, GroupElem};
use crate::ordinal::{Ordinal, OrdinalInterval};
use crate::walks::RhoKind;

pub type Tuple = Vec<Ordinal>;

/// All increasing `k`-tuples of `indices` (which must be sorted), in lexicographic order.
pub fn subsets(indices: &[Ordinal], k: usize) -> Vec<Tuple> {
    fn go(indices: &[Ordinal], k: usize, start: usize, cur: &mut Tuple, out: &mut Vec<Tuple>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..indices.len() {
            if indices.len() - i < k - cur.len() {
                break;
            }
            cur.push(indices[i].clone());
            go(indices, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(indices, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// The tuple with its `i`-th coordinate removed.
pub fn face(t: &[Ordinal], i: usize) -> Tuple {
    t.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect()
}

pub fn tuple_key(t: &[Ordinal]) -> String {
    t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|")
}

fn sign(i: usize) -> BigInt {
    if i.is_multiple_of(2) {
        BigInt::from(1)
    } else {
        BigInt::from(-1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedFamily {
    n: usize,
    indices: Vec<Ordinal>,
    group: FgAbelianGroup,
    entries: BTreeMap<Tuple, OrdinalFunction>,
}

impl IndexedFamily {
    pub fn new(n: usize, mut indices: Vec<Ordinal>, group: FgAbelianGroup, entries: BTreeMap<Tuple, OrdinalFunction>) -> Result<Self> {
        let before = indices.len();
        indices.sort();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::invalid("index set has repeated ordinals"));
        }
        let expected = subsets(&indices, n);
        if entries.len() != expected.len() {
            return Err(Error::invalid(format!(
                "a {n}-family on {} indices needs {} entries, got {}",
                indices.len(),
                expected.len(),
                entries.len()
            )));
        }
        for t in &expected {
            let f = entries.get(t).ok_or_else(|| Error::invalid(format!("missing entry for ({})", tuple_key(t))))?;
            if f.group() != &group {
                return Err(Error::invalid(format!("entry ({}) has group {}, family has {}", tuple_key(t), f.group(), group)));
            }
            if n > 0 && f.domain() != &t[0] {
                return Err(Error::invalid(format!("entry ({}) has domain {}, expected {}", tuple_key(t), f.domain(), t[0])));
            }
        }
        Ok(IndexedFamily { n, indices, group, entries })
    }

    pub fn zero(n: usize, indices: Vec<Ordinal>, group: FgAbelianGroup) -> Result<Self> {
        let mut sorted = indices.clone();
        sorted.sort();
        let top = sorted.last().cloned().unwrap_or_default();
        let entries = subsets(&sorted, n)
            .into_iter()
            .map(|t| {
                let d = if n == 0 { top.clone() } else { t[0].clone() };
                (t, OrdinalFunction::zero(d, group.clone()))
            })
            .collect();
        IndexedFamily::new(n, indices, group, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[Ordinal] {
        &self.indices
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn top(&self) -> Option<&Ordinal> {
        self.indices.last()
    }

    pub fn entries(&self) -> &BTreeMap<Tuple, OrdinalFunction> {
        &self.entries
    }

    pub fn entry(&self, t: &[Ordinal]) -> Result<&OrdinalFunction> {
        self.entries.get(t).ok_or_else(|| Error::invalid(format!("no entry at ({})", tuple_key(t))))
    }

    /// The subfamily on a subset of the indices.
    pub fn restrict_to(&self, s: &[Ordinal]) -> Result<Self> {
        let set: BTreeSet<&Ordinal> = self.indices.iter().collect();
        if let Some(x) = s.iter().find(|x| !set.contains(x)) {
            return Err(Error::invalid(format!("{x} is not an index of the family")));
        }
        let entries = if self.n == 0 {
            self.entries.clone()
        } else {
            let keep: BTreeSet<&Ordinal> = s.iter().collect();
            self.entries.iter().filter(|(t, _)| t.iter().all(|x| keep.contains(x))).map(|(t, f)| (t.clone(), f.clone())).collect()
        };
        IndexedFamily::new(self.n, s.to_vec(), self.group.clone(), entries)
    }

    /// The subfamily on the indices below `xi`.
    pub fn below(&self, xi: &Ordinal) -> Result<Self> {
        let s: Vec<Ordinal> = self.indices.iter().filter(|x| *x < xi).cloned().collect();
        self.restrict_to(&s)
    }

    /// Same entries on a larger index set, zero on the new tuples.
    pub fn zero_extend(&self, indices: &[Ordinal]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut sorted = indices.to_vec();
        sorted.sort();
        for t in subsets(&sorted, self.n) {
            let f = match self.entries.get(&t) {
                Some(f) => f.clone(),
                None => OrdinalFunction::zero(t[0].clone(), self.group.clone()),
            };
            entries.insert(t, f);
        }
        IndexedFamily::new(self.n, sorted, self.group.clone(), entries)
    }

    fn zip(&self, other: &IndexedFamily, f: impl Fn(&OrdinalFunction, &OrdinalFunction) -> Result<OrdinalFunction>) -> Result<Self> {
        if self.n != other.n || self.indices != other.indices || self.group != other.group {
            return Err(Error::invalid("families differ in shape"));
        }
        let mut entries = BTreeMap::new();
        for (t, a) in &self.entries {
            let b = &other.entries[t];
            let (a, b) = if self.n == 0 && a.domain() != b.domain() {
                let d = a.domain().clone().max(b.domain().clone());
                (a.resize(&d)?, b.resize(&d)?)
            } else {
                (a.clone(), b.clone())
            };
            entries.insert(t.clone(), f(&a, &b)?);
        }
        Ok(IndexedFamily { entries, ..self.clone() })
    }

    pub fn add(&self, other: &IndexedFamily) -> Result<Self> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &IndexedFamily) -> Result<Self> {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let entries = self.entries.iter().map(|(t, f)| (t.clone(), f.scale(k))).collect();
        IndexedFamily { entries, ..self.clone() }
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        for (t, f) in &self.entries {
            obj.insert(tuple_key(t), f.to_json());
        }
        json!({
            "n": self.n,
            "indices": self.indices.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "group": serde_json::to_value(&self.group).unwrap(),
            "entries": Value::Object(obj),
        })
    }

    /// Entries may omit `domain` and `group`; they default to the tuple's least
    /// index and the family group.
    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::invalid("family needs 'n'"))? as usize;
        let indices = v
            .get("indices")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("family needs 'indices'"))?
            .iter()
            .map(|x| x.as_str().ok_or_else(|| Error::invalid("indices must be strings"))?.parse())
            .collect::<Result<Vec<Ordinal>>>()?;
        let group: FgAbelianGroup = match v.get("group") {
            Some(g) => serde_json::from_value(g.clone()).map_err(|e| Error::invalid(e.to_string()))?,
            None => FgAbelianGroup::z(),
        };
        let mut entries = BTreeMap::new();
        let obj = v.get("entries").and_then(Value::as_object).ok_or_else(|| Error::invalid("family needs 'entries'"))?;
        for (k, fv) in obj {
            let t: Tuple = if k.trim().is_empty() {
                vec![]
            } else {
                k.split('|').map(|s| s.parse()).collect::<Result<Vec<Ordinal>>>()?
            };
            if t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("tuple key '{k}' is not increasing")));
            }
            let mut fv = fv.clone();
            if let Some(o) = fv.as_object_mut() {
                if !o.contains_key("domain") {
                    let d = match t.first() {
                        Some(x) => x.to_string(),
                        None => indices.iter().max().cloned().unwrap_or_default().to_string(),
                    };
                    o.insert("domain".into(), Value::from(d));
                }
                if !o.contains_key("group") {
                    o.insert("group".into(), serde_json::to_value(&group).unwrap());
                }
            }
            entries.insert(t, OrdinalFunction::from_json(&fv)?);
        }
        IndexedFamily::new(n, indices, group, entries)
    }
}

/// Verdict over all tuples, with the lexicographically least failing tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FamilyVerdict {
    Yes,
    No { tuple: Tuple, witness: Witness },
    Unknown { tuple: Tuple, reason: String },
}

impl FamilyVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, FamilyVerdict::Yes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, FamilyVerdict::No { .. })
    }

    fn fold(checks: impl Iterator<Item = Result<(Tuple, Verdict)>>) -> Result<FamilyVerdict> {
        let mut unknown = None;
        for c in checks {
            let (t, v) = c?;
            match v {
                Verdict::Yes => {}
                Verdict::No { witness } => return Ok(FamilyVerdict::No { tuple: t, witness }),
                Verdict::Unknown { reason } => {
                    if unknown.is_none() {
                        unknown = Some(FamilyVerdict::Unknown { tuple: t, reason });
                    }
                }
            }
        }
        Ok(unknown.unwrap_or(FamilyVerdict::Yes))
    }
}

impl fmt::Display for FamilyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyVerdict::Yes => f.write_str("yes"),
            FamilyVerdict::No { tuple, witness } => write!(f, "no at ({}): {witness}", tuple_key(tuple)),
            FamilyVerdict::Unknown { tuple, reason } => write!(f, "unknown at ({}): {reason}", tuple_key(tuple)),
        }
    }
}

/// `sum_i (-1)^i phi_{t^i}` restricted to `t_0`, for an (n+1)-tuple `t`.
pub fn alternating_sum(phi: &IndexedFamily, t: &[Ordinal]) -> Result<OrdinalFunction> {
    let dom = &t[0];
    if phi.n == 0 {
        return phi.entry(&[])?.resize(dom);
    }
    let mut acc = OrdinalFunction::zero(dom.clone(), phi.group.clone());
    for i in 0..t.len() {
        let f = phi.entry(&face(t, i))?.restrict(dom)?;
        acc = acc.add(&f.scale(&sign(i)))?;
    }
    Ok(acc)
}

/// The coboundary: an (n+1)-family of alternating sums.
pub fn d_operator(phi: &IndexedFamily) -> Result<IndexedFamily> {
    let mut entries = BTreeMap::new();
    for t in subsets(&phi.indices, phi.n + 1) {
        let f = alternating_sum(phi, &t)?;
        entries.insert(t, f);
    }
    IndexedFamily::new(phi.n + 1, phi.indices.clone(), phi.group.clone(), entries)
}

/// Whether every alternating sum over (n+1)-tuples vanishes in the given mode.
pub fn is_coherent(phi: &IndexedFamily, mode: CompareMode, fuel: u64) -> Result<FamilyVerdict> {
    coherent_on(phi, subsets(&phi.indices, phi.n + 1), mode, fuel)
}

/// Coherence restricted to the given (n+1)-tuples.
pub fn coherent_on(phi: &IndexedFamily, tuples: Vec<Tuple>, mode: CompareMode, fuel: u64) -> Result<FamilyVerdict> {
    FamilyVerdict::fold(tuples.into_iter().map(|t| {
        let s = alternating_sum(phi, &t)?;
        Ok((t, s.compare_zero(mode, fuel)?))
    }))
}

/// Whether `d(psi)` agrees with `phi` entrywise in the given mode.
pub fn is_trivialization(psi: &IndexedFamily, phi: &IndexedFamily, mode: CompareMode, fuel: u64) -> Result<FamilyVerdict> {
    if psi.n + 1 != phi.n || psi.indices != phi.indices || psi.group != phi.group {
        return Err(Error::invalid("trivializing family has the wrong shape"));
    }
    FamilyVerdict::fold(subsets(&phi.indices, phi.n).into_iter().map(|t| {
        let s = alternating_sum(psi, &t)?;
        Ok((t.clone(), s.compare(phi.entry(&t)?, mode, fuel)?))
    }))
}

/// `d(d(phi)) = 0` exactly.
pub fn verify_cocycle(phi: &IndexedFamily, fuel: u64) -> Result<FamilyVerdict> {
    let f = d_operator(phi)?;
    is_coherent(&f, CompareMode::Exact, fuel)
}

fn reject_incoherent(phi: &IndexedFamily, fuel: u64) -> Result<()> {
    if let FamilyVerdict::No { tuple, witness } = is_coherent(phi, CompareMode::ModFinite, fuel)? {
        return Err(Error::Incoherent { tuple, detail: format!("alternating sum is nonzero on {witness}") });
    }
    Ok(())
}

/// A trivialization read off the top index; the input must be coherent.
pub fn trivialize_with_top(phi: &IndexedFamily, fuel: u64) -> Result<IndexedFamily> {
    if phi.n == 0 {
        return Err(Error::pre("trivialization needs n >= 1"));
    }
    reject_incoherent(phi, fuel)?;
    trivialize_unchecked(phi)
}

/// The top-index candidate without the coherence check.
pub fn trivialize_unchecked(phi: &IndexedFamily) -> Result<IndexedFamily> {
    let n = phi.n;
    let g = phi.group.clone();
    let Some(top) = phi.top().cloned() else {
        return IndexedFamily::zero(n - 1, vec![], g);
    };
    let mut entries = BTreeMap::new();
    if n == 1 {
        entries.insert(vec![], phi.entry(&[top])?.clone());
    } else {
        let s = sign(n - 1);
        for t in subsets(&phi.indices, n - 1) {
            let f = if t.contains(&top) {
                OrdinalFunction::zero(t[0].clone(), g.clone())
            } else {
                let mut full = t.clone();
                full.push(top.clone());
                phi.entry(&full)?.scale(&s)
            };
            entries.insert(t, f);
        }
    }
    IndexedFamily::new(n - 1, phi.indices.clone(), g, entries)
}

/// Extends `psi`, a trivialization of `phi` on the indices below `xi`, to a
/// trivialization of all of `phi` that keeps the entries of `psi`.
pub fn extend_trivialization(phi: &IndexedFamily, psi: &IndexedFamily, xi: &Ordinal, fuel: u64) -> Result<IndexedFamily> {
    if phi.n == 0 {
        return Err(Error::pre("extension needs n >= 1"));
    }
    reject_incoherent(phi, fuel)?;
    let low = phi.below(xi)?;
    if psi.n + 1 != phi.n || psi.indices != low.indices {
        return Err(Error::pre(format!("the given trivialization must be an {}-family on the indices below {xi}", phi.n - 1)));
    }
    if let FamilyVerdict::No { tuple, witness } = is_trivialization(psi, &low, CompareMode::ModFinite, fuel)? {
        return Err(Error::pre(format!("the given family does not trivialize below {xi}: ({}) differs on {witness}", tuple_key(&tuple))));
    }
    extend_from_subset(phi, &low.indices, psi)
}

/// A trivialization of `phi` whose entries on tuples from `s` are those of `psi_s`.
pub fn extend_from_subset(phi: &IndexedFamily, s: &[Ordinal], psi_s: &IndexedFamily) -> Result<IndexedFamily> {
    let n = phi.n;
    let g = &phi.group;
    if n == 1 {
        let ups = trivialize_unchecked(phi)?;
        let Some(m) = s.iter().max() else { return Ok(ups) };
        let top = phi.top().unwrap().clone();
        let psi = psi_s.entry(&[])?.resize(m)?;
        let tail = phi.entry(std::slice::from_ref(&top))?;
        let glued = OrdinalFunction::glue(
            &top,
            g,
            &[(OrdinalInterval::new(Ordinal::zero(), m.clone()), &psi), (OrdinalInterval::new(m.clone(), top.clone()), tail)],
        )?;
        return IndexedFamily::new(0, phi.indices.clone(), g.clone(), BTreeMap::from([(vec![], glued)]));
    }
    let ups = trivialize_unchecked(phi)?;
    if subsets(s, n - 1).is_empty() {
        return Ok(ups);
    }
    let delta = ups.restrict_to(s)?.sub(psi_s)?;
    let theta = trivialize_unchecked(&delta)?;
    let theta_bar = theta.zero_extend(&phi.indices)?;
    let mut out = ups.sub(&d_operator(&theta_bar)?)?;
    for (t, f) in &psi_s.entries {
        out.entries.insert(t.clone(), f.clone());
    }
    Ok(out)
}

/// The club map `i ↦ eta_i` used to stretch a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClubRule {
    /// Natural `k` goes to the k-th ladder point of the target; the table overrides.
    Ladder {
        #[serde(default)]
        table: BTreeMap<Ordinal, Ordinal>,
    },
    /// `i ↦ offset + w^exp · i`.
    Scale { offset: Ordinal, exp: Ordinal },
}

impl ClubRule {
    pub fn identity() -> Self {
        ClubRule::Scale { offset: Ordinal::zero(), exp: Ordinal::zero() }
    }

    pub fn is_identity(&self) -> bool {
        *self == ClubRule::identity()
    }

    pub fn apply(&self, x: &Ordinal, delta: &Ordinal) -> Result<Ordinal> {
        match self {
            ClubRule::Ladder { table } => {
                if let Some(y) = table.get(x) {
                    return Ok(y.clone());
                }
                match x.as_nat() {
                    Some(k) if delta.is_limit() => delta.fund_seq(k),
                    _ => Err(Error::invalid(format!("club rule has no value at {x}"))),
                }
            }
            ClubRule::Scale { offset, exp } => {
                let y = x.omega_pow_mul(exp);
                offset.checked_add(&y).ok_or(Error::Overflow)
            }
        }
    }
}

/// Carries a family along the club: `phi'_{eta(t)}(eta_i) = phi_t(i)`, 0 off the club.
pub fn stretch(phi: &IndexedFamily, rule: &ClubRule, delta: &Ordinal) -> Result<IndexedFamily> {
    if rule.is_identity() {
        return Ok(phi.clone());
    }
    let g = &phi.group;
    let mut supports = BTreeMap::new();
    let mut used: BTreeSet<Ordinal> = phi.indices.iter().cloned().collect();
    for (t, f) in &phi.entries {
        let s = f.require_step()?;
        if !s.has_finite_support() {
            return Err(Error::Unsupported(format!("entry ({}) is not finitely supported; stretching needs finite support", tuple_key(t))));
        }
        let pts = s.support()?;
        used.extend(pts.keys().cloned());
        supports.insert(t.clone(), pts);
    }
    let mut image = BTreeMap::new();
    let mut prev: Option<(Ordinal, Ordinal)> = None;
    for x in &used {
        let y = rule.apply(x, delta)?;
        if y >= *delta {
            return Err(Error::invalid(format!("club value {y} at {x} is not below {delta}")));
        }
        if let Some((px, py)) = &prev {
            if y <= *py {
                return Err(Error::invalid(format!("club rule is not increasing: {px} ↦ {py}, {x} ↦ {y}")));
            }
        }
        prev = Some((x.clone(), y.clone()));
        image.insert(x.clone(), y);
    }
    let indices: Vec<Ordinal> = phi.indices.iter().map(|x| image[x].clone()).collect();
    let mut entries = BTreeMap::new();
    for (t, pts) in supports {
        let nt: Tuple = t.iter().map(|x| image[x].clone()).collect();
        let dom = if phi.n == 0 { indices.last().cloned().unwrap_or_default() } else { nt[0].clone() };
        let moved: BTreeMap<Ordinal, GroupElem> = pts.into_iter().map(|(p, v)| (image[&p].clone(), v)).collect();
        let moved = moved.into_iter().filter(|(p, _)| *p < dom).collect();
        entries.insert(nt, OrdinalFunction::finite_support(dom, g.clone(), moved)?);
    }
    IndexedFamily::new(phi.n, indices, g.clone(), entries)
}

/// The 1-family `{e ∘ rho_kind(., b) : b in indices}`.
pub fn rho_family(kind: RhoKind, c: &CSystem, indices: &[Ordinal], group: &FgAbelianGroup, embed: &GroupElem) -> Result<IndexedFamily> {
    let c = Arc::new(c.clone());
    let mut sorted = indices.to_vec();
    sorted.sort();
    let mut entries = BTreeMap::new();
    for b in &sorted {
        let rule = RhoRule {
            kind,
            c: c.clone(),
            top: b.clone(),
            embed: embed.clone(),
            offset: group.zero(),
            patch: BTreeMap::new(),
        };
        entries.insert(vec![b.clone()], OrdinalFunction::rho(b.clone(), group.clone(), rule)?);
    }
    IndexedFamily::new(1, sorted, group.clone(), entries)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub level: Ordinal,
    pub nodes: usize,
}

/// Distinct restrictions `phi_b ↾ a` (b >= a) per level `a`, told apart on the probes below `a`.
pub fn tree_report(phi: &IndexedFamily, probes: &[Ordinal]) -> Result<Vec<TreeLevel>> {
    if phi.n != 1 {
        return Err(Error::pre("tree reports are defined for 1-families"));
    }
    let mut out = Vec::new();
    for a in &phi.indices {
        let pts: Vec<&Ordinal> = probes.iter().filter(|p| *p < a).collect();
        let mut nodes = BTreeSet::new();
        for b in phi.indices.iter().filter(|b| *b >= a) {
            let f = phi.entry(std::slice::from_ref(b))?;
            let row = pts.iter().map(|p| f.eval(p)).collect::<Result<Vec<GroupElem>>>()?;
            nodes.insert(row);
        }
        out.push(TreeLevel { level: a.clone(), nodes: nodes.len() });
    }
    Ok(out)
}

/// Whether an entry is presented with finite support; a 0-triviality certificate.
pub fn is_zero_trivial(f: &OrdinalFunction) -> bool {
    matches!(f.body(), Body::FiniteSupport(_)) || f.is_finitely_supported()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupElem;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn z() -> FgAbelianGroup {
        FgAbelianGroup::z()
    }

    fn e(n: i64) -> GroupElem {
        GroupElem(vec![BigInt::from(n)])
    }

    fn pw(domain: &Ordinal, pieces: &[(&str, i64)]) -> OrdinalFunction {
        let mut ps: Vec<(Ordinal, GroupElem)> = pieces.iter().map(|(u, v)| (o(u), e(*v))).filter(|(u, _)| u < domain).collect();
        ps.push((domain.clone(), e(pieces.last().map_or(0, |p| p.1))));
        OrdinalFunction::piecewise(domain.clone(), z(), ps).unwrap()
    }

    fn one_family(fs: &[(&str, OrdinalFunction)]) -> IndexedFamily {
        let entries = fs.iter().map(|(i, f)| (vec![o(i)], f.clone())).collect();
        IndexedFamily::new(1, fs.iter().map(|(i, _)| o(i)).collect(), z(), entries).unwrap()
    }

    #[test]
    fn subsets_are_lexicographic() {
        let idx = vec![o("1"), o("2"), o("3"), o("4")];
        let s = subsets(&idx, 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![o("1"), o("2")]);
        assert_eq!(s[5], vec![o("3"), o("4")]);
        assert_eq!(subsets(&idx, 0), vec![Vec::<Ordinal>::new()]);
    }

    #[test]
    fn d_of_one_family() {
        let fa = pw(&o("w"), &[("3", 1), ("w", 2)]);
        let fb = pw(&o("w*2"), &[("5", 4), ("w*2", 7)]);
        let phi = one_family(&[("w", fa.clone()), ("w*2", fb.clone())]);
        let dphi = d_operator(&phi).unwrap();
        let f = dphi.entry(&[o("w"), o("w*2")]).unwrap();
        let expect = fb.restrict(&o("w")).unwrap().sub(&fa).unwrap();
        assert!(f.compare(&expect, CompareMode::Exact, 10).unwrap().is_yes());
        assert!(verify_cocycle(&phi, 10).unwrap().is_yes());
    }

    #[test]
    fn trivialize_examples() {
        let fam = IndexedFamily::zero(2, vec![o("w"), o("w*2"), o("w*3")], z()).unwrap();
        let psi = trivialize_with_top(&fam, 10).unwrap();
        assert!(psi.entries().values().all(|f| f.require_step().unwrap().is_zero()));
        let big = pw(&o("w^2"), &[("4", 1), ("w+2", 3), ("w^2", -1)]);
        let phi = one_family(&[("w", big.restrict(&o("w")).unwrap()), ("w*2", big.restrict(&o("w*2")).unwrap()), ("w^2", big.clone())]);
        let psi = trivialize_with_top(&phi, 10).unwrap();
        assert_eq!(psi.entry(&[]).unwrap(), &big);
        assert!(is_trivialization(&psi, &phi, CompareMode::Exact, 10).unwrap().is_yes());
    }

    #[test]
    fn incoherent_input_is_rejected() {
        let phi = one_family(&[("w", pw(&o("w"), &[("w", 0)])), ("w*2", pw(&o("w*2"), &[("5", 0), ("w*2", 1)]))]);
        match trivialize_with_top(&phi, 10) {
            Err(Error::Incoherent { tuple, .. }) => assert_eq!(tuple, vec![o("w"), o("w*2")]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rho_family_examples() {
        let phi = rho_family(RhoKind::Two, &CSystem::Canonical, &[o("w"), o("w*2")], &z(), &e(1)).unwrap();
        let d = d_operator(&phi).unwrap();
        assert_eq!(d.entry(&[o("w"), o("w*2")]).unwrap().eval(&o("3")).unwrap(), e(1));
        assert!(verify_cocycle(&phi, 1000).unwrap().is_yes());
        let full = rho_family(RhoKind::Two, &CSystem::Full, &[o("w"), o("w*2"), o("w^2")], &z(), &e(1)).unwrap();
        for f in full.entries().values() {
            assert_eq!(f.eval(&o("w").min(f.domain().clone()).pred().unwrap_or_default()).unwrap(), e(2));
        }
        let d = d_operator(&full).unwrap();
        assert!(d.entries().values().all(|f| f.compare_zero(CompareMode::Exact, 10).unwrap().is_yes()));
    }

    #[test]
    fn stretch_examples() {
        let f = |d: &str, pts: &[(&str, i64)]| {
            OrdinalFunction::finite_support(o(d), z(), pts.iter().map(|(p, v)| (o(p), e(*v))).collect()).unwrap()
        };
        let phi = one_family(&[("1", f("1", &[("0", 1)])), ("2", f("2", &[("0", 1), ("1", 2)])), ("3", f("3", &[("0", 1), ("1", 2)]))]);
        let s = stretch(&phi, &ClubRule::Ladder { table: BTreeMap::new() }, &o("w^2")).unwrap();
        assert_eq!(s.indices(), &[o("w"), o("w*2"), o("w*3")]);
        let top = s.entry(&[o("w*3")]).unwrap();
        assert_eq!(top.eval(&o("w")).unwrap(), e(2));
        assert_eq!(top.eval(&o("0")).unwrap(), e(1));
        assert_eq!(top.eval(&o("5")).unwrap(), e(0));
        assert!(is_coherent(&s, CompareMode::ModFinite, 10).unwrap().is_yes());
        assert_eq!(stretch(&phi, &ClubRule::identity(), &o("w")).unwrap(), phi);
        let bad = ClubRule::Ladder { table: BTreeMap::from([(o("2"), o("5"))]) };
        assert!(stretch(&phi, &bad, &o("w^2")).is_err());
    }

    #[test]
    fn tree_report_examples() {
        let phi = rho_family(RhoKind::Two, &CSystem::Canonical, &[o("w"), o("w*2"), o("w^2")], &z(), &e(1)).unwrap();
        let probes: Vec<Ordinal> = (1..=20).map(Ordinal::nat).collect();
        let r = tree_report(&phi, &probes).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|l| l.nodes >= 1));
        assert_eq!(r, tree_report(&phi, &probes).unwrap());
        let flat = tree_report(&phi, &[]).unwrap();
        assert!(flat.iter().all(|l| l.nodes == 1));
        let zero = IndexedFamily::zero(1, vec![o("w"), o("w*2")], z()).unwrap();
        assert!(tree_report(&zero, &probes).unwrap().iter().all(|l| l.nodes == 1));
    }

    #[test]
    fn json_round_trip() {
        let phi = rho_family(RhoKind::Two, &CSystem::Canonical, &[o("w"), o("w*2")], &z(), &e(1)).unwrap();
        let d = d_operator(&phi).unwrap();
        for fam in [phi, d] {
            assert_eq!(IndexedFamily::from_json(&fam.to_json()).unwrap(), fam);
        }
    }
}
