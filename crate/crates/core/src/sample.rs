//! Seeded random generation of ordinals, group elements and step functions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use crate::finfun::OrdinalFunction;
use crate::groups::{FgAbelianGroup, GroupElem};
use crate::ordinal::Ordinal;

/// A random ordinal below `bound` whose new coefficients are at most `max_coeff`.
pub fn ordinal_below<R: Rng>(rng: &mut R, bound: &Ordinal, max_coeff: u64) -> Ordinal {
    let terms = bound.terms();
    if terms.is_empty() {
        panic!("no ordinal below 0");
    }
    let i = rng.gen_range(0..terms.len());
    let mut acc = Ordinal::zero();
    for t in &terms[..i] {
        acc = &acc + &Ordinal::monomial(t.exp.clone(), t.coeff);
    }
    let t = &terms[i];
    let c = rng.gen_range(0..t.coeff);
    acc = &acc + &Ordinal::monomial(t.exp.clone(), c);
    &acc + &below_power(rng, &t.exp, max_coeff)
}

/// A random ordinal below `w^e`.
pub fn below_power<R: Rng>(rng: &mut R, e: &Ordinal, max_coeff: u64) -> Ordinal {
    if e.is_zero() || rng.gen_ratio(1, 4) {
        return Ordinal::zero();
    }
    let n = rng.gen_range(1..=3);
    let mut exps: Vec<Ordinal> = (0..n).map(|_| ordinal_below(rng, e, max_coeff)).collect();
    exps.sort();
    exps.dedup();
    let mut acc = Ordinal::zero();
    for x in exps.into_iter().rev() {
        acc = &acc + &Ordinal::monomial(x, rng.gen_range(1..=max_coeff));
    }
    acc
}

/// A random ordinal in `[lo, hi)`.
pub fn ordinal_in<R: Rng>(rng: &mut R, lo: &Ordinal, hi: &Ordinal, max_coeff: u64) -> Ordinal {
    let gap = lo.left_sub(hi).expect("lo <= hi");
    lo + &ordinal_below(rng, &gap, max_coeff)
}

/// `n` distinct ordinals below `bound`, sorted; fewer if the space is small.
pub fn distinct_below<R: Rng>(rng: &mut R, bound: &Ordinal, n: usize, max_coeff: u64) -> Vec<Ordinal> {
    let mut out = std::collections::BTreeSet::new();
    let mut tries = 0;
    while out.len() < n && tries < n * 50 {
        out.insert(ordinal_below(rng, bound, max_coeff));
        tries += 1;
    }
    out.into_iter().collect()
}

/// A limit ordinal in `(lo, hi)`, if the random draw finds one.
pub fn limit_between<R: Rng>(rng: &mut R, lo: &Ordinal, hi: &Ordinal, max_coeff: u64) -> Option<Ordinal> {
    for _ in 0..64 {
        let x = ordinal_in(rng, lo, hi, max_coeff);
        let (lam, _) = x.limit_part();
        if &lam > lo && !lam.is_zero() {
            return Some(lam);
        }
        let cand = &lam + &Ordinal::omega();
        if &cand > lo && &cand < hi {
            return Some(cand);
        }
    }
    None
}

/// A random element; free coordinates lie in `[-max, max]`.
pub fn element<R: Rng>(rng: &mut R, g: &FgAbelianGroup, max: i64) -> GroupElem {
    let v = g
        .cyclic_sum()
        .orders
        .iter()
        .map(|t| {
            if t.is_zero() {
                BigInt::from(rng.gen_range(-max..=max))
            } else {
                let t: i64 = t.try_into().unwrap_or(i64::MAX);
                BigInt::from(rng.gen_range(0..t))
            }
        })
        .collect();
    g.reduce(v)
}

/// A random step function on `domain` with at most `pieces` pieces.
pub fn step_function<R: Rng>(rng: &mut R, domain: &Ordinal, g: &FgAbelianGroup, pieces: usize, max: i64) -> OrdinalFunction {
    if domain.is_zero() {
        return OrdinalFunction::zero(domain.clone(), g.clone());
    }
    let k = rng.gen_range(0..pieces.max(1));
    let mut cuts = distinct_below(rng, domain, k, 3);
    cuts.retain(|c| !c.is_zero());
    cuts.push(domain.clone());
    let ps = cuts.into_iter().map(|u| (u, element(rng, g, max))).collect();
    OrdinalFunction::piecewise(domain.clone(), g.clone(), ps).expect("increasing cuts")
}

/// A random finitely supported function with at most `points` nonzero values.
pub fn finite_support<R: Rng>(rng: &mut R, domain: &Ordinal, g: &FgAbelianGroup, points: usize, max: i64) -> OrdinalFunction {
    let mut pts = BTreeMap::new();
    if !domain.is_zero() {
        let k = rng.gen_range(0..=points);
        for p in distinct_below(rng, domain, k, 3) {
            pts.insert(p, element(rng, g, max));
        }
    }
    OrdinalFunction::finite_support(domain.clone(), g.clone(), pts).expect("points below domain")
}
