//! Cech cochain complexes of finite cover models.
//!
//! A cover is an ordered list of indices together with a label for every
//! nonempty tuple of indices (its intersection). Labels live in a finite
//! poset with a least element standing for the empty set. A presheaf assigns
//! a group to every label and a restriction map to every comparable pair.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::families::{alternating_sum, subsets, IndexedFamily};
use crate::finfun::{probe_points, CompareMode, OrdinalFunction, Verdict};
use crate::groups::{homology_at, CyclicSum, FgAbelianGroup, GroupElem, GroupHom, IntMatrix, Subquotient};
use crate::ordinal::Ordinal;

pub const DEFAULT_MAX_DEGREE: usize = 4;
const EMPTY_NAME: &str = "{}";

/// Labels ordered by inclusion, with a least label for the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Space {
    labels: Vec<String>,
    empty: usize,
    le: Vec<Vec<bool>>,
    points: Option<Vec<BTreeSet<String>>>,
}

impl Space {
    /// `subsets` lists pairs `(smaller, larger)`; the order is their reflexive-transitive closure.
    pub fn new(labels: Vec<String>, empty: &str, subsets: &[(String, String)]) -> Result<Self> {
        let pos = |s: &str| labels.iter().position(|l| l == s).ok_or_else(|| Error::invalid(format!("unknown label '{s}'")));
        let mut seen = BTreeSet::new();
        if let Some(d) = labels.iter().find(|l| !seen.insert(*l)) {
            return Err(Error::invalid(format!("label '{d}' is repeated")));
        }
        let e = pos(empty)?;
        let k = labels.len();
        let mut le = vec![vec![false; k]; k];
        for i in 0..k {
            le[i][i] = true;
            le[e][i] = true;
        }
        for (a, b) in subsets {
            le[pos(a)?][pos(b)?] = true;
        }
        for m in 0..k {
            for i in 0..k {
                if le[i][m] {
                    for j in 0..k {
                        if le[m][j] {
                            le[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                if le[i][j] && le[j][i] {
                    return Err(Error::invalid(format!("labels '{}' and '{}' contain each other", labels[i], labels[j])));
                }
            }
        }
        Ok(Space { labels, empty: e, le, points: None })
    }

    /// The space of the given point sets and the empty set, ordered by inclusion.
    pub fn from_point_sets(sets: impl IntoIterator<Item = BTreeSet<String>>) -> Self {
        let mut all: BTreeSet<BTreeSet<String>> = sets.into_iter().collect();
        all.insert(BTreeSet::new());
        let points: Vec<BTreeSet<String>> = all.into_iter().collect();
        let labels = points.iter().map(point_label).collect();
        let le = points.iter().map(|a| points.iter().map(|b| a.is_subset(b)).collect()).collect();
        let empty = points.iter().position(|s| s.is_empty()).unwrap();
        Space { labels, empty, le, points: Some(points) }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn empty(&self) -> usize {
        self.empty
    }

    pub fn name(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn label(&self, name: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == name).ok_or_else(|| Error::invalid(format!("unknown label '{name}'")))
    }

    /// `a` is contained in `b`.
    pub fn le(&self, a: usize, b: usize) -> bool {
        self.le[a][b]
    }

    fn point_label(&self, s: &BTreeSet<String>) -> Option<usize> {
        self.points.as_ref()?.iter().position(|p| p == s)
    }
}

fn point_label(s: &BTreeSet<String>) -> String {
    if s.is_empty() {
        EMPTY_NAME.to_string()
    } else {
        s.iter().cloned().collect::<Vec<_>>().join(",")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverModel {
    space: Space,
    indices: Vec<String>,
    intersections: BTreeMap<Vec<usize>, usize>,
}

impl CoverModel {
    /// Tuples missing from `intersections` are empty when one of their faces is.
    pub fn new(space: Space, indices: Vec<String>, intersections: BTreeMap<Vec<usize>, usize>) -> Result<Self> {
        let c = CoverModel { space, indices, intersections };
        for i in 0..c.indices.len() {
            if !c.intersections.contains_key(&vec![i]) {
                return Err(Error::invalid(format!("cover set '{}' has no label", c.indices[i])));
            }
        }
        for (t, &l) in &c.intersections {
            if t.is_empty() || t.windows(2).any(|w| w[0] >= w[1]) || t.iter().any(|&i| i >= c.indices.len()) {
                return Err(Error::invalid("intersection tuples must be increasing index positions"));
            }
            if t.len() > 1 {
                for i in 0..t.len() {
                    let f = c.label_of(&face(t, i))?;
                    if !c.space.le(l, f) {
                        return Err(Error::invalid(format!(
                            "intersection label '{}' of ({}) is not below '{}' of its face ({})",
                            c.space.name(l),
                            c.tuple_name(t),
                            c.space.name(f),
                            c.tuple_name(&face(t, i))
                        )));
                    }
                }
            }
        }
        Ok(c)
    }

    /// Covers given by point sets, sharing one space of all their intersections.
    pub fn from_point_sets(covers: &[Vec<(String, BTreeSet<String>)>]) -> Result<Vec<CoverModel>> {
        let mut all = Vec::new();
        let mut per_cover = Vec::new();
        for sets in covers {
            if sets.len() > 16 {
                return Err(Error::Unsupported("point-set covers with more than 16 sets".into()));
            }
            let mut inter = BTreeMap::new();
            for mask in 1u32..(1 << sets.len()) {
                let t: Vec<usize> = (0..sets.len()).filter(|i| mask & (1 << i) != 0).collect();
                let mut s = sets[t[0]].1.clone();
                for &i in &t[1..] {
                    s = s.intersection(&sets[i].1).cloned().collect();
                }
                all.push(s.clone());
                inter.insert(t, s);
            }
            per_cover.push(inter);
        }
        let space = Space::from_point_sets(all);
        covers
            .iter()
            .zip(per_cover)
            .map(|(sets, inter)| {
                let inter = inter.into_iter().map(|(t, s)| (t, space.point_label(&s).unwrap())).collect();
                CoverModel::new(space.clone(), sets.iter().map(|(n, _)| n.clone()).collect(), inter)
            })
            .collect()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn indices(&self) -> &[String] {
        &self.indices
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.indices.iter().position(|x| x == name).ok_or_else(|| Error::invalid(format!("unknown cover index '{name}'")))
    }

    pub fn tuple_name(&self, t: &[usize]) -> String {
        t.iter().map(|&i| self.indices[i].as_str()).collect::<Vec<_>>().join("|")
    }

    /// The label of the intersection over an increasing tuple of positions.
    pub fn label_of(&self, t: &[usize]) -> Result<usize> {
        if let Some(&l) = self.intersections.get(t) {
            return Ok(l);
        }
        if t.len() > 1 {
            for i in 0..t.len() {
                if self.label_of(&face(t, i))? == self.space.empty {
                    return Ok(self.space.empty);
                }
            }
        }
        Err(Error::invalid(format!("no intersection label for ({})", self.tuple_name(t))))
    }
}

fn face<T: Clone>(t: &[T], i: usize) -> Vec<T> {
    t.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect()
}

fn sign(i: usize) -> BigInt {
    if i.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafModel {
    space: Space,
    sections: Vec<FgAbelianGroup>,
    restrictions: BTreeMap<(usize, usize), GroupHom>,
}

impl PresheafModel {
    /// `restrictions` maps `(larger, smaller)` label pairs to homomorphisms.
    pub fn new(space: Space, sections: Vec<FgAbelianGroup>, restrictions: BTreeMap<(usize, usize), GroupHom>) -> Result<Self> {
        let k = space.labels.len();
        if sections.len() != k {
            return Err(Error::invalid(format!("{} section groups for {k} labels", sections.len())));
        }
        if !sections[space.empty].is_trivial() {
            return Err(Error::invalid("the empty set must carry the trivial group"));
        }
        let p = PresheafModel { space, sections, restrictions };
        for (&(u, v), h) in &p.restrictions {
            if !p.space.le(v, u) {
                return Err(Error::invalid(format!("restriction from '{}' to '{}' but the latter is not a subset", p.space.name(u), p.space.name(v))));
            }
            if h.domain != p.sections[u].cyclic_sum() || h.codomain != p.sections[v].cyclic_sum() {
                return Err(Error::invalid(format!("restriction '{}' -> '{}' has the wrong groups", p.space.name(u), p.space.name(v))));
            }
            if u == v && *h != GroupHom::identity(p.sections[u].cyclic_sum()) {
                let n = p.space.name(u).to_string();
                return Err(Error::Functoriality(n.clone(), n.clone(), n));
            }
        }
        for u in 0..k {
            for v in 0..k {
                if u != v && v != p.space.empty && p.space.le(v, u) && !p.restrictions.contains_key(&(u, v)) {
                    return Err(Error::invalid(format!("missing restriction from '{}' to '{}'", p.space.name(u), p.space.name(v))));
                }
            }
        }
        for u in 0..k {
            for v in 0..k {
                if !p.space.le(v, u) {
                    continue;
                }
                for w in 0..k {
                    if !p.space.le(w, v) {
                        continue;
                    }
                    let lhs = p.restriction(v, w).compose(&p.restriction(u, v))?;
                    if lhs != p.restriction(u, w) {
                        return Err(Error::Functoriality(p.space.name(u).into(), p.space.name(v).into(), p.space.name(w).into()));
                    }
                }
            }
        }
        Ok(p)
    }

    /// `A` on every nonempty label with identity restrictions.
    pub fn constant(space: &Space, group: &FgAbelianGroup) -> Self {
        let k = space.labels.len();
        let sections: Vec<FgAbelianGroup> = (0..k).map(|i| if i == space.empty { FgAbelianGroup::trivial() } else { group.clone() }).collect();
        let mut restrictions = BTreeMap::new();
        for u in 0..k {
            for v in 0..k {
                if u != v && v != space.empty && space.le(v, u) {
                    restrictions.insert((u, v), GroupHom::identity(group.cyclic_sum()));
                }
            }
        }
        PresheafModel { space: space.clone(), sections, restrictions }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn section(&self, label: usize) -> &FgAbelianGroup {
        &self.sections[label]
    }

    /// Restriction from `u` down to `v`; identity on `u = v` and zero into the empty set.
    pub fn restriction(&self, u: usize, v: usize) -> GroupHom {
        let (a, b) = (self.sections[u].cyclic_sum(), self.sections[v].cyclic_sum());
        if let Some(h) = self.restrictions.get(&(u, v)) {
            h.clone()
        } else if u == v {
            GroupHom::identity(a)
        } else {
            GroupHom::zero(a, b)
        }
    }
}

/// A map of presheaves on the same space, one homomorphism per label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafHom {
    pub source: PresheafModel,
    pub target: PresheafModel,
    pub maps: Vec<GroupHom>,
}

impl PresheafHom {
    pub fn new(source: PresheafModel, target: PresheafModel, maps: Vec<GroupHom>) -> Result<Self> {
        if source.space != target.space {
            return Err(Error::invalid("presheaves live on different spaces"));
        }
        let sp = &source.space;
        let k = sp.labels.len();
        if maps.len() != k {
            return Err(Error::invalid(format!("{} label maps for {k} labels", maps.len())));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.domain != source.sections[i].cyclic_sum() || m.codomain != target.sections[i].cyclic_sum() {
                return Err(Error::invalid(format!("map at '{}' has the wrong groups", sp.name(i))));
            }
        }
        for u in 0..k {
            for v in 0..k {
                if sp.le(v, u) {
                    let a = target.restriction(u, v).compose(&maps[u])?;
                    let b = maps[v].compose(&source.restriction(u, v))?;
                    if a != b {
                        return Err(Error::invalid(format!("label maps do not commute with restriction '{}' -> '{}'", sp.name(u), sp.name(v))));
                    }
                }
            }
        }
        Ok(PresheafHom { source, target, maps })
    }

    /// The same integer matrix at every nonempty label (e.g. multiplication by 2).
    pub fn uniform(source: PresheafModel, target: PresheafModel, matrix: &IntMatrix) -> Result<Self> {
        let k = source.space.labels.len();
        let maps = (0..k)
            .map(|i| {
                let (a, b) = (source.sections[i].cyclic_sum(), target.sections[i].cyclic_sum());
                if i == source.space.empty {
                    Ok(GroupHom::zero(a, b))
                } else {
                    GroupHom::new(a, b, matrix.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        PresheafHom::new(source, target, maps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplexModel {
    pub groups: Vec<FgAbelianGroup>,
    pub sums: Vec<CyclicSum>,
    /// Tuples of cover positions indexing the blocks of each degree.
    pub tuples: Vec<Vec<Vec<usize>>>,
    pub offsets: Vec<Vec<usize>>,
    pub differentials: Vec<GroupHom>,
    pub index_names: Vec<String>,
}

impl CochainComplexModel {
    pub fn top_degree(&self) -> usize {
        self.sums.len() - 1
    }

    fn block_of(&self, degree: usize, gen: usize) -> String {
        let k = self.offsets[degree].partition_point(|&o| o <= gen) - 1;
        self.tuples[degree][k].iter().map(|&i| self.index_names[i].as_str()).collect::<Vec<_>>().join("|")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "groups": self.groups.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "differentials": self.differentials.iter().map(|d| d.matrix.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

fn block_sum(tuples: &[Vec<usize>], group_of: impl Fn(&[usize]) -> Result<CyclicSum>) -> Result<(CyclicSum, Vec<usize>)> {
    let mut orders = Vec::new();
    let mut offsets = Vec::with_capacity(tuples.len());
    for t in tuples {
        offsets.push(orders.len());
        orders.extend(group_of(t)?.orders);
    }
    Ok((CyclicSum::new(orders), offsets))
}

fn put_block(m: &mut IntMatrix, r0: usize, c0: usize, block: &IntMatrix, s: &BigInt) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            let v = m.get(i + r0, j + c0) + s * block.get(i, j);
            m.set(i + r0, j + c0, v);
        }
    }
}

/// The ordered Cech complex in degrees `0..=max_degree`.
pub fn build_complex(cover: &CoverModel, p: &PresheafModel, max_degree: usize) -> Result<CochainComplexModel> {
    let c = assemble(cover, p, max_degree, None)?;
    check_complex(&c)?;
    Ok(c)
}

/// A mutant complex whose `d^degree` uses the wrong sign on face `face`; not checked.
pub fn build_complex_with_flipped_face(cover: &CoverModel, p: &PresheafModel, max_degree: usize, degree: usize, face: usize) -> Result<CochainComplexModel> {
    assemble(cover, p, max_degree, Some((degree, face)))
}

fn assemble(cover: &CoverModel, p: &PresheafModel, max_degree: usize, flip: Option<(usize, usize)>) -> Result<CochainComplexModel> {
    if cover.space != p.space {
        return Err(Error::invalid("cover and presheaf live on different spaces"));
    }
    let positions: Vec<usize> = (0..cover.indices.len()).collect();
    let mut tuples = Vec::new();
    let mut sums = Vec::new();
    let mut offsets = Vec::new();
    for j in 0..=max_degree {
        let ts = subsets_usize(&positions, j + 1);
        let (s, o) = block_sum(&ts, |t| Ok(p.section(cover.label_of(t)?).cyclic_sum()))?;
        tuples.push(ts);
        sums.push(s);
        offsets.push(o);
    }
    let mut differentials = Vec::new();
    for j in 0..max_degree {
        let mut m = IntMatrix::zeros(sums[j + 1].ngens(), sums[j].ngens());
        for (r, t) in tuples[j + 1].iter().enumerate() {
            let lt = cover.label_of(t)?;
            for i in 0..t.len() {
                let f = face(t, i);
                let c = tuples[j].binary_search(&f).unwrap();
                let block = p.restriction(cover.label_of(&f)?, lt).matrix;
                let s = if flip == Some((j, i)) { -sign(i) } else { sign(i) };
                put_block(&mut m, offsets[j + 1][r], offsets[j][c], &block, &s);
            }
        }
        differentials.push(GroupHom::new(sums[j].clone(), sums[j + 1].clone(), m)?);
    }
    Ok(CochainComplexModel {
        groups: sums.iter().map(CyclicSum::invariants).collect(),
        sums,
        tuples,
        offsets,
        differentials,
        index_names: cover.indices.clone(),
    })
}

fn subsets_usize(xs: &[usize], k: usize) -> Vec<Vec<usize>> {
    let ords: Vec<Ordinal> = xs.iter().map(|&x| Ordinal::nat(x as u64)).collect();
    subsets(&ords, k).into_iter().map(|t| t.iter().map(|o| o.as_nat().unwrap() as usize).collect()).collect()
}

/// Verifies that consecutive differentials compose to zero, naming the first offending block.
pub fn check_complex(c: &CochainComplexModel) -> Result<()> {
    for j in 0..c.differentials.len().saturating_sub(1) {
        let dd = c.differentials[j + 1].compose(&c.differentials[j])?;
        for r in 0..dd.matrix.rows() {
            for col in 0..dd.matrix.cols() {
                if !dd.matrix.get(r, col).is_zero() {
                    return Err(Error::NotExact(format!(
                        "d{} after d{} is nonzero in block ({}) <- ({})",
                        j + 1,
                        j,
                        c.block_of(j + 2, r),
                        c.block_of(j, col)
                    )));
                }
            }
        }
    }
    Ok(())
}

fn incoming(c: &CochainComplexModel, n: usize) -> GroupHom {
    if n == 0 {
        GroupHom::zero(CyclicSum::trivial(), c.sums[0].clone())
    } else {
        c.differentials[n - 1].clone()
    }
}

/// `ker d^n / im d^(n-1)` with a chosen basis.
pub fn cohomology_subquotient(c: &CochainComplexModel, n: usize) -> Result<Subquotient> {
    if n >= c.top_degree() {
        return Err(Error::pre(format!("degree {n} needs a complex built past degree {}", c.top_degree())));
    }
    Subquotient::new(&incoming(c, n), &c.differentials[n])
}

pub fn cohomology(c: &CochainComplexModel, n: usize) -> Result<FgAbelianGroup> {
    Ok(cohomology_subquotient(c, n)?.group())
}

#[derive(Clone, Debug)]
pub struct RefinementReport {
    pub chain_map: Vec<GroupHom>,
    pub source: Vec<FgAbelianGroup>,
    pub target: Vec<FgAbelianGroup>,
    /// Induced maps `H^n(V) -> H^n(W)` in the chosen bases.
    pub induced: Vec<GroupHom>,
}

impl RefinementReport {
    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "target": self.target.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "induced": self.induced.iter().map(hom_json).collect::<Vec<_>>(),
            "isomorphisms": self.induced.iter().map(|h| h.is_isomorphism().unwrap_or(false)).collect::<Vec<_>>(),
        })
    }
}

pub fn hom_json(h: &GroupHom) -> Value {
    json!({
        "domain": h.domain.orders.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "codomain": h.codomain.orders.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "matrix": h.matrix.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// The chain map `L(V) -> L(W)` of a refinement `r: W -> V` and its maps on cohomology.
pub fn refinement_map(v: &CoverModel, w: &CoverModel, r: &BTreeMap<String, String>, p: &PresheafModel, max_degree: usize) -> Result<RefinementReport> {
    if v.space != w.space {
        return Err(Error::invalid("the two covers live on different spaces"));
    }
    let rv: Vec<usize> = w
        .indices
        .iter()
        .map(|x| v.position(r.get(x).ok_or_else(|| Error::invalid(format!("refinement map misses '{x}'")))?))
        .collect::<Result<_>>()?;
    for (i, &j) in rv.iter().enumerate() {
        let (a, b) = (w.label_of(&[i])?, v.label_of(&[j])?);
        if !v.space.le(a, b) {
            return Err(Error::invalid(format!("'{}' is not inside '{}'", w.indices[i], v.indices[j])));
        }
    }
    let cv = build_complex(v, p, max_degree)?;
    let cw = build_complex(w, p, max_degree)?;
    let mut chain = Vec::new();
    for j in 0..=max_degree {
        let mut m = IntMatrix::zeros(cw.sums[j].ngens(), cv.sums[j].ngens());
        for (row, t) in cw.tuples[j].iter().enumerate() {
            let img: Vec<usize> = t.iter().map(|&i| rv[i]).collect();
            let Some((sorted, s)) = sort_with_sign(&img) else { continue };
            let (lw, lv) = (w.label_of(t)?, v.label_of(&sorted)?);
            if !v.space.le(lw, lv) {
                return Err(Error::invalid(format!("({}) is not inside ({})", w.tuple_name(t), v.tuple_name(&sorted))));
            }
            let col = cv.tuples[j].binary_search(&sorted).unwrap();
            put_block(&mut m, cw.offsets[j][row], cv.offsets[j][col], &p.restriction(lv, lw).matrix, &s);
        }
        chain.push(GroupHom::new(cv.sums[j].clone(), cw.sums[j].clone(), m)?);
    }
    for j in 0..max_degree {
        let a = cw.differentials[j].compose(&chain[j])?;
        let b = chain[j + 1].compose(&cv.differentials[j])?;
        if a != b {
            return Err(Error::NotExact(format!("refinement map does not commute with d{j}")));
        }
    }
    let mut induced = Vec::new();
    let (mut source, mut target) = (Vec::new(), Vec::new());
    for n in 0..max_degree {
        let a = cohomology_subquotient(&cv, n)?;
        let b = cohomology_subquotient(&cw, n)?;
        source.push(a.group());
        target.push(b.group());
        induced.push(a.induced(&b, &chain[n])?);
    }
    Ok(RefinementReport { chain_map: chain, source, target, induced })
}

/// The sorted tuple and the sign of the sorting permutation; `None` on repeats.
fn sort_with_sign(t: &[usize]) -> Option<(Vec<usize>, BigInt)> {
    let mut v = t.to_vec();
    let mut s = BigInt::one();
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                s = -s;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, s))
}

fn chain_map_of(c_src: &CochainComplexModel, c_dst: &CochainComplexModel, cover: &CoverModel, h: &PresheafHom, j: usize) -> Result<GroupHom> {
    let mut m = IntMatrix::zeros(c_dst.sums[j].ngens(), c_src.sums[j].ngens());
    for (k, t) in c_src.tuples[j].iter().enumerate() {
        let l = cover.label_of(t)?;
        put_block(&mut m, c_dst.offsets[j][k], c_src.offsets[j][k], &h.maps[l].matrix, &BigInt::one());
    }
    GroupHom::new(c_src.sums[j].clone(), c_dst.sums[j].clone(), m)
}

#[derive(Clone, Debug)]
pub struct LesReport {
    pub degree: usize,
    /// `H^n(P), H^n(E), H^n(F), H^(n+1)(P), H^(n+1)(E)`.
    pub groups: Vec<FgAbelianGroup>,
    pub connecting: GroupHom,
    /// Exactness at `H^n(E)`, `H^n(F)` and `H^(n+1)(P)`.
    pub exact_at: Vec<(String, bool)>,
}

impl LesReport {
    pub fn is_exact(&self) -> bool {
        self.exact_at.iter().all(|(_, b)| *b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "groups": self.groups.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "connecting": hom_json(&self.connecting),
            "connecting_is_zero": self.connecting.is_zero(),
            "exact_at": self.exact_at.iter().map(|(k, v)| json!({"position": k, "exact": v})).collect::<Vec<_>>(),
        })
    }
}

fn exact_between(f: &GroupHom, g: &GroupHom) -> Result<bool> {
    match homology_at(f, g) {
        Ok(h) => Ok(h.is_trivial()),
        Err(Error::NotExact(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// The segment `H^n(P) -> H^n(E) -> H^n(F) -> H^(n+1)(P) -> H^(n+1)(E)` of a short exact sequence of presheaves.
pub fn les_segment(cover: &CoverModel, inj: &PresheafHom, surj: &PresheafHom, n: usize) -> Result<LesReport> {
    if inj.target != surj.source {
        return Err(Error::invalid("the middle presheaves differ"));
    }
    let sp = &inj.source.space;
    for l in 0..sp.labels.len() {
        let (i, s) = (&inj.maps[l], &surj.maps[l]);
        let zero_in = GroupHom::zero(CyclicSum::trivial(), i.domain.clone());
        let zero_out = GroupHom::zero(s.codomain.clone(), CyclicSum::trivial());
        if !exact_between(&zero_in, i)? || !exact_between(i, s)? || !exact_between(s, &zero_out)? {
            return Err(Error::NotExact(format!("coefficients are not short exact at '{}'", sp.name(l))));
        }
    }
    let top = n + 2;
    let cp = build_complex(cover, &inj.source, top)?;
    let ce = build_complex(cover, &inj.target, top)?;
    let cf = build_complex(cover, &surj.target, top)?;
    let i_n = chain_map_of(&cp, &ce, cover, inj, n)?;
    let i_n1 = chain_map_of(&cp, &ce, cover, inj, n + 1)?;
    let s_n = chain_map_of(&ce, &cf, cover, surj, n)?;
    let (hp, he, hf) = (cohomology_subquotient(&cp, n)?, cohomology_subquotient(&ce, n)?, cohomology_subquotient(&cf, n)?);
    let (hp1, he1) = (cohomology_subquotient(&cp, n + 1)?, cohomology_subquotient(&ce, n + 1)?);
    let hi = hp.induced(&he, &i_n)?;
    let hs = he.induced(&hf, &s_n)?;
    let hi1 = hp1.induced(&he1, &i_n1)?;
    let mut cols = Vec::new();
    for k in 0..hf.cyclic_sum().ngens() {
        let z = hf.representative(k);
        let y = s_n.lift(&z).ok_or_else(|| Error::NotExact("cochain map onto F is not surjective".into()))?;
        let dy = ce.differentials[n].apply(&y);
        let x = i_n1.lift(&dy).ok_or_else(|| Error::NotExact("boundary of the lift is not in the image of P".into()))?;
        cols.push(hp1.coords(&x)?);
    }
    let m = IntMatrix::from_cols(hp1.cyclic_sum().ngens(), &cols);
    let delta = GroupHom::new(hf.cyclic_sum(), hp1.cyclic_sum(), m)?;
    let exact_at = vec![
        (format!("H{n}(E)"), exact_between(&hi, &hs)?),
        (format!("H{n}(F)"), exact_between(&hs, &delta)?),
        (format!("H{}(P)", n + 1), exact_between(&delta, &hi1)?),
    ];
    Ok(LesReport { degree: n, groups: vec![hp.group(), he.group(), hf.group(), hp1.group(), he1.group()], connecting: delta, exact_at })
}

/// A strictly increasing map on cover indices with `a < m(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftMap(BTreeMap<Ordinal, Ordinal>);

impl ShiftMap {
    pub fn new(c: &[Ordinal], table: BTreeMap<Ordinal, Ordinal>) -> Result<Self> {
        let cs: BTreeSet<&Ordinal> = c.iter().collect();
        if let Some(x) = c.iter().find(|x| !x.is_limit()) {
            return Err(Error::NotLimit(x.clone()));
        }
        let mut prev: Option<&Ordinal> = None;
        for (a, b) in &table {
            if !cs.contains(a) || !cs.contains(b) {
                return Err(Error::invalid(format!("shift {a} -> {b} leaves the index set")));
            }
            if b <= a {
                return Err(Error::invalid(format!("shift must move upward, got {a} -> {b}")));
            }
            if let Some(p) = prev {
                if *b <= table[p] {
                    return Err(Error::invalid(format!("shift is not increasing at {p} < {a}")));
                }
            }
            prev = Some(a);
        }
        Ok(ShiftMap(table))
    }

    /// Each index goes to the next one; the last is left undefined.
    pub fn successor(c: &[Ordinal]) -> Result<Self> {
        let mut s = c.to_vec();
        s.sort();
        ShiftMap::new(&s, s.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect())
    }

    pub fn apply(&self, a: &Ordinal) -> Result<Ordinal> {
        self.0.get(a).cloned().ok_or_else(|| Error::pre(format!("shift is undefined at {a}")))
    }

    pub fn table(&self) -> &BTreeMap<Ordinal, Ordinal> {
        &self.0
    }
}

/// `(a_0, ..., a_j, m(a_j), ..., m(a_last))`.
fn hybrid(t: &[Ordinal], m: &ShiftMap, j: usize) -> Result<Vec<Ordinal>> {
    let mut out = t[..=j].to_vec();
    for a in &t[j..] {
        out.push(m.apply(a)?);
    }
    Ok(out)
}

/// The prism operator applied to a cochain given by `eval`, at a tuple.
fn prism(eval: &dyn Fn(&[Ordinal]) -> Result<OrdinalFunction>, m: &ShiftMap, t: &[Ordinal], g: &FgAbelianGroup) -> Result<(OrdinalFunction, usize)> {
    let mut acc = OrdinalFunction::zero(t[0].clone(), g.clone());
    for j in 0..t.len() {
        let h = hybrid(t, m, j)?;
        acc = acc.add(&eval(&h)?.restrict(&t[0])?.scale(&sign(j)))?;
    }
    Ok((acc, t.len()))
}

#[derive(Clone, Debug)]
pub struct HomotopyReport {
    pub degree: usize,
    pub tuple: Vec<Ordinal>,
    /// `f(m(a)) - f(a)`.
    pub lhs: OrdinalFunction,
    /// `d s f + s d f`.
    pub rhs: OrdinalFunction,
    pub exact: Verdict,
    pub mod_finite: Verdict,
    /// Probe points and the values of both sides there.
    pub probes: Vec<(Ordinal, GroupElem, GroupElem)>,
    pub first_discrepancy: Option<Ordinal>,
    pub hybrid_terms: usize,
    /// All cochain values are finitely supported.
    pub finite_support: bool,
}

impl HomotopyReport {
    pub fn holds(&self) -> bool {
        self.exact.is_yes() && self.first_discrepancy.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "tuple": self.tuple.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "holds": self.holds(),
            "exact": serde_json::to_value(&self.exact).unwrap(),
            "mod_finite": serde_json::to_value(&self.mod_finite).unwrap(),
            "first_discrepancy": self.first_discrepancy.as_ref().map(|x| x.to_string()),
            "hybrid_terms": self.hybrid_terms,
            "finite_support": self.finite_support,
            "probes": self.probes.len(),
        })
    }
}

/// Checks `f(m(a)) - f(a) = d s f (a) + s d f (a)` for a degree-`k` cochain on the cover by initial segments.
pub fn homotopy_check(f: &IndexedFamily, m: &ShiftMap, k: usize, tuple: &[Ordinal], fuel: u64) -> Result<HomotopyReport> {
    if f.n() != k + 1 {
        return Err(Error::invalid(format!("a degree-{k} cochain has {}-tuples, got {}-tuples", k + 1, f.n())));
    }
    if tuple.len() != k + 1 || tuple.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("expected an increasing {}-tuple", k + 1)));
    }
    let g = f.group().clone();
    let a0 = tuple[0].clone();
    let eval_f = |t: &[Ordinal]| f.entry(t).cloned();
    let eval_df = |t: &[Ordinal]| alternating_sum(f, t);
    let image: Vec<Ordinal> = tuple.iter().map(|a| m.apply(a)).collect::<Result<_>>()?;
    let lhs = f.entry(&image)?.restrict(&a0)?.sub(f.entry(tuple)?)?;
    let (sdf, mut terms) = prism(&eval_df, m, tuple, &g)?;
    let mut rhs = sdf;
    if k > 0 {
        for i in 0..tuple.len() {
            let fc = face(tuple, i);
            let (s, t) = prism(&eval_f, m, &fc, &g)?;
            terms += t;
            rhs = rhs.add(&s.restrict(&a0)?.scale(&sign(i)))?;
        }
    }
    let exact = lhs.compare(&rhs, CompareMode::Exact, fuel)?;
    let mod_finite = lhs.compare(&rhs, CompareMode::ModFinite, fuel)?;
    let mut marks: Vec<Ordinal> = f.indices().to_vec();
    marks.extend(m.table().values().cloned());
    let mut probes = Vec::new();
    let mut first = None;
    for x in probe_points(&a0, &marks, 16) {
        let (l, r) = (lhs.eval(&x)?, rhs.eval(&x)?);
        if l != r && first.is_none() {
            first = Some(x.clone());
        }
        probes.push((x, l, r));
    }
    let finite_support = f.entries().values().all(OrdinalFunction::is_finitely_supported);
    Ok(HomotopyReport { degree: k, tuple: tuple.to_vec(), lhs, rhs, exact, mod_finite, probes, first_discrepancy: first, hybrid_terms: terms, finite_support })
}

pub mod json_io {
    //! Reading cover, presheaf and presheaf-map descriptions.
    use super::*;

    fn str_list(v: &Value, what: &str) -> Result<Vec<String>> {
        v.as_array()
            .ok_or_else(|| Error::invalid(format!("'{what}' must be a list")))?
            .iter()
            .map(|x| x.as_str().map(String::from).ok_or_else(|| Error::invalid(format!("'{what}' must hold strings"))))
            .collect()
    }

    fn point_sets(v: &Value) -> Result<Vec<(String, BTreeSet<String>)>> {
        let obj = v.as_object().ok_or_else(|| Error::invalid("'sets' must be an object"))?;
        let order = match v.get("order") {
            Some(o) => str_list(o, "order")?,
            None => obj.keys().cloned().collect(),
        };
        order
            .into_iter()
            .map(|k| {
                let pts = obj.get(&k).ok_or_else(|| Error::invalid(format!("no set named '{k}'")))?;
                Ok((k, str_list(pts, "points")?.into_iter().collect()))
            })
            .collect()
    }

    /// Builds the space from `"space"` or from the point sets of all named covers.
    pub fn covers(doc: &Value, keys: &[&str]) -> Result<Vec<CoverModel>> {
        let specs: Vec<&Value> = keys.iter().map(|k| doc.get(*k).ok_or_else(|| Error::invalid(format!("missing '{k}'")))).collect::<Result<_>>()?;
        if specs.iter().all(|s| s.get("sets").is_some()) {
            let sets = specs.iter().map(|s| point_sets(&s["sets"])).collect::<Result<Vec<_>>>()?;
            return CoverModel::from_point_sets(&sets);
        }
        let sp = doc.get("space").ok_or_else(|| Error::invalid("covers without point sets need a 'space'"))?;
        let labels = str_list(sp.get("labels").ok_or_else(|| Error::invalid("space needs 'labels'"))?, "labels")?;
        let empty = sp.get("empty").and_then(Value::as_str).unwrap_or(EMPTY_NAME).to_string();
        let pairs = match sp.get("subsets") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|p| {
                    let l = str_list(p, "subsets")?;
                    if l.len() != 2 {
                        return Err(Error::invalid("subset entries are [smaller, larger] pairs"));
                    }
                    Ok((l[0].clone(), l[1].clone()))
                })
                .collect::<Result<Vec<_>>>()?,
            _ => vec![],
        };
        let space = Space::new(labels, &empty, &pairs)?;
        specs
            .iter()
            .map(|s| {
                let idx = str_list(s.get("indices").ok_or_else(|| Error::invalid("cover needs 'indices'"))?, "indices")?;
                let mut inter = BTreeMap::new();
                for (k, lv) in s.get("intersections").and_then(Value::as_object).ok_or_else(|| Error::invalid("cover needs 'intersections'"))? {
                    let mut t = k
                        .split('|')
                        .map(|x| idx.iter().position(|y| y == x).ok_or_else(|| Error::invalid(format!("unknown index '{x}'"))))
                        .collect::<Result<Vec<_>>>()?;
                    t.sort();
                    let l = space.label(lv.as_str().ok_or_else(|| Error::invalid("intersection labels are strings"))?)?;
                    inter.insert(t, l);
                }
                CoverModel::new(space.clone(), idx, inter)
            })
            .collect()
    }

    fn group(v: &Value) -> Result<FgAbelianGroup> {
        serde_json::from_value(v.clone()).map_err(|e| Error::invalid(e.to_string()))
    }

    fn matrix(v: &Value) -> Result<IntMatrix> {
        let rows: Vec<Vec<BigInt>> = v
            .as_array()
            .ok_or_else(|| Error::invalid("matrix must be a list of rows"))?
            .iter()
            .map(|r| crate::groups::bigint_json::vec_from_value(r).map_err(|e| Error::invalid(e.to_string())))
            .collect::<Result<_>>()?;
        IntMatrix::from_rows(&rows)
    }

    /// `{"constant": group}` or `{"sections": {label: group}, "restrictions": [{"from","to","matrix"}]}`.
    pub fn presheaf(space: &Space, v: &Value) -> Result<PresheafModel> {
        if let Some(g) = v.get("constant") {
            return Ok(PresheafModel::constant(space, &group(g)?));
        }
        let secs = v.get("sections").and_then(Value::as_object).ok_or_else(|| Error::invalid("presheaf needs 'constant' or 'sections'"))?;
        let mut sections = vec![FgAbelianGroup::trivial(); space.labels().len()];
        let mut given = vec![false; sections.len()];
        for (k, g) in secs {
            let l = space.label(k)?;
            sections[l] = group(g)?;
            given[l] = true;
        }
        if let Some(l) = (0..sections.len()).find(|&l| l != space.empty() && !given[l]) {
            return Err(Error::invalid(format!("no section group for '{}'", space.name(l))));
        }
        let mut restrictions = BTreeMap::new();
        if let Some(rs) = v.get("restrictions").and_then(Value::as_array) {
            for r in rs {
                let u = space.label(r.get("from").and_then(Value::as_str).ok_or_else(|| Error::invalid("restriction needs 'from'"))?)?;
                let w = space.label(r.get("to").and_then(Value::as_str).ok_or_else(|| Error::invalid("restriction needs 'to'"))?)?;
                let m = matrix(r.get("matrix").ok_or_else(|| Error::invalid("restriction needs 'matrix'"))?)?;
                restrictions.insert((u, w), GroupHom::new(sections[u].cyclic_sum(), sections[w].cyclic_sum(), m)?);
            }
        }
        PresheafModel::new(space.clone(), sections, restrictions)
    }

    /// `{"matrix": m}` applied at every nonempty label, or `{"maps": {label: m}}`.
    pub fn presheaf_hom(source: &PresheafModel, target: &PresheafModel, v: &Value) -> Result<PresheafHom> {
        if let Some(m) = v.get("matrix") {
            return PresheafHom::uniform(source.clone(), target.clone(), &matrix(m)?);
        }
        let sp = source.space();
        let obj = v.get("maps").and_then(Value::as_object).ok_or_else(|| Error::invalid("presheaf map needs 'matrix' or 'maps'"))?;
        let maps = (0..sp.labels().len())
            .map(|l| {
                let (a, b) = (source.section(l).cyclic_sum(), target.section(l).cyclic_sum());
                match obj.get(sp.name(l)) {
                    Some(m) => GroupHom::new(a, b, matrix(m)?),
                    None if l == sp.empty() => Ok(GroupHom::zero(a, b)),
                    None => Err(Error::invalid(format!("no map at '{}'", sp.name(l)))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        PresheafHom::new(source.clone(), target.clone(), maps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn cover(sets: &[(&str, &[&str])]) -> CoverModel {
        let v: Vec<(String, BTreeSet<String>)> = sets.iter().map(|(n, p)| (n.to_string(), pts(p))).collect();
        CoverModel::from_point_sets(&[v]).unwrap().remove(0)
    }

    fn z() -> FgAbelianGroup {
        FgAbelianGroup::z()
    }

    #[test]
    fn discrete_singletons() {
        let c = cover(&[("a", &["a"]), ("b", &["b"]), ("c", &["c"])]);
        let cx = build_complex(&c, &PresheafModel::constant(c.space(), &z()), 3).unwrap();
        assert_eq!(cx.groups[0], FgAbelianGroup::free(3));
        assert!(cx.groups[1].is_trivial());
        assert_eq!(cohomology(&cx, 0).unwrap(), FgAbelianGroup::free(3));
    }

    #[test]
    fn two_overlapping_sets() {
        let c = cover(&[("U", &["a", "b"]), ("V", &["b", "c"])]);
        let cx = build_complex(&c, &PresheafModel::constant(c.space(), &z()), 3).unwrap();
        assert_eq!(cx.groups[0], FgAbelianGroup::free(2));
        assert_eq!(cx.groups[1], z());
        assert_eq!(cx.differentials[0].matrix, IntMatrix::from_rows(&[vec![-1, 1]]).unwrap());
        assert_eq!(cohomology(&cx, 0).unwrap(), z());
        assert!(cohomology(&cx, 1).unwrap().is_trivial());
        assert!(cohomology(&cx, 3).is_err());
    }

    #[test]
    fn hollow_triangle_has_a_loop() {
        let c = cover(&[("U", &["a", "b"]), ("V", &["b", "c"]), ("W", &["c", "a"])]);
        let cx = build_complex(&c, &PresheafModel::constant(c.space(), &z()), 3).unwrap();
        assert_eq!(cohomology(&cx, 0).unwrap(), z());
        assert_eq!(cohomology(&cx, 1).unwrap(), z());
        assert!(cohomology(&cx, 2).unwrap().is_trivial());
    }

    #[test]
    fn flipped_sign_is_located() {
        let c = cover(&[("U", &["a", "b"]), ("V", &["b", "c"]), ("W", &["c", "a", "b"])]);
        let mut cx = build_complex(&c, &PresheafModel::constant(c.space(), &z()), 3).unwrap();
        // negate the (U|V) <- (U) block of d0
        let v = cx.differentials[0].matrix.get(0, 0).clone();
        cx.differentials[0].matrix.set(0, 0, -v);
        match check_complex(&cx) {
            Err(Error::NotExact(msg)) => assert!(msg.contains("(U|V|W) <- (U)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn functoriality_is_checked() {
        let sp = Space::new(vec!["X".into(), "U".into(), "{}".into()], "{}", &[("U".into(), "X".into())]).unwrap();
        let two = GroupHom::new(z().cyclic_sum(), z().cyclic_sum(), IntMatrix::from_rows(&[vec![2]]).unwrap()).unwrap();
        let restr = BTreeMap::from([((0, 1), two.clone()), ((0, 0), two)]);
        match PresheafModel::new(sp, vec![z(), z(), FgAbelianGroup::trivial()], restr) {
            Err(Error::Functoriality(a, b, c)) => assert_eq!((a.as_str(), b.as_str(), c.as_str()), ("X", "X", "X")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sign_sorting() {
        assert_eq!(sort_with_sign(&[2, 0, 1]), Some((vec![0, 1, 2], BigInt::one())));
        assert_eq!(sort_with_sign(&[1, 0]), Some((vec![0, 1], -BigInt::one())));
        assert_eq!(sort_with_sign(&[1, 1]), None);
    }
}
