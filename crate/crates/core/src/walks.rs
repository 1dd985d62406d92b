//! Minimal walks `b = b_0 > b_1 > ... > b_k = a` with `b_{i+1} = min(C_{b_i} \ a)`
//! and the characteristics computed along them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::csystem::CSystem;
use crate::error::{Error, Result};
use crate::ordinal::{Ordinal, OrdinalInterval};

pub const DEFAULT_WALK_FUEL: u64 = 1_000_000;
pub const DEFAULT_PROFILE_FUEL: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum RhoKind {
    /// Largest order type of `C_x ∩ a` met along the walk.
    One,
    /// Number of ordinals on the walk, endpoints included.
    Two,
    /// Whether the last ladder of the walk accumulates at `a`.
    Three,
}

impl TryFrom<u8> for RhoKind {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(RhoKind::One),
            2 => Ok(RhoKind::Two),
            3 => Ok(RhoKind::Three),
            _ => Err(Error::invalid(format!("rho kind must be 1, 2 or 3, got {k}"))),
        }
    }
}

impl From<RhoKind> for u8 {
    fn from(k: RhoKind) -> u8 {
        match k {
            RhoKind::One => 1,
            RhoKind::Two => 2,
            RhoKind::Three => 3,
        }
    }
}

impl fmt::Display for RhoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// The walk from `beta` down to `alpha`, both included.
pub fn trace(c: &CSystem, alpha: &Ordinal, beta: &Ordinal, fuel: u64) -> Result<Vec<Ordinal>> {
    if alpha > beta {
        return Err(Error::pre(format!("trace needs {alpha} <= {beta}")));
    }
    let mut out = vec![beta.clone()];
    let mut cur = beta.clone();
    let mut steps = 0u64;
    while &cur != alpha {
        steps += 1;
        if steps > fuel {
            return Err(Error::FuelExhausted(fuel));
        }
        cur = c.min_above(&cur, alpha)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Ordinal-valued characteristic; kinds 2 and 3 are always finite.
pub fn rho(kind: RhoKind, c: &CSystem, alpha: &Ordinal, beta: &Ordinal) -> Result<Ordinal> {
    rho_with_fuel(kind, c, alpha, beta, DEFAULT_WALK_FUEL)
}

pub fn rho_with_fuel(kind: RhoKind, c: &CSystem, alpha: &Ordinal, beta: &Ordinal, fuel: u64) -> Result<Ordinal> {
    let tr = trace(c, alpha, beta, fuel)?;
    rho_of_trace(kind, c, alpha, &tr)
}

pub(crate) fn rho_of_trace(kind: RhoKind, c: &CSystem, alpha: &Ordinal, tr: &[Ordinal]) -> Result<Ordinal> {
    match kind {
        RhoKind::One => {
            let mut m = Ordinal::zero();
            for x in &tr[..tr.len() - 1] {
                m = m.max(c.otp_below(x, alpha)?);
            }
            Ok(m)
        }
        RhoKind::Two => Ok(Ordinal::nat(tr.len() as u64)),
        RhoKind::Three => {
            if tr.len() < 2 {
                return Ok(Ordinal::zero());
            }
            let penultimate = &tr[tr.len() - 2];
            Ok(Ordinal::nat(u64::from(c.accumulates_at(penultimate, alpha)?)))
        }
    }
}

/// Integer-valued characteristic; an error when the value is infinite.
pub fn rho_nat(kind: RhoKind, c: &CSystem, alpha: &Ordinal, beta: &Ordinal) -> Result<u64> {
    let v = rho(kind, c, alpha, beta)?;
    v.as_nat()
        .ok_or_else(|| Error::Unsupported(format!("rho_{kind}({alpha},{beta}) = {v} is infinite")))
}

/// `max` over the walk (minus its last point) of `max(C_x ∩ alpha)`.
pub fn max_l(c: &CSystem, alpha: &Ordinal, beta: &Ordinal) -> Result<Ordinal> {
    let tr = trace(c, alpha, beta, DEFAULT_WALK_FUEL)?;
    let mut m = Ordinal::zero();
    for x in &tr[..tr.len() - 1] {
        m = m.max(c.max_below(x, alpha)?);
    }
    Ok(m)
}

/// Comparison of `rho(., beta)` with `rho(., gamma)` on `[0, beta)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Profile {
    /// The finite set of arguments where the two functions differ.
    FiniteDiff { points: Vec<Ordinal> },
    /// `rho_2(., gamma) - rho_2(., beta)` as constant pieces partitioning `[0, beta)`.
    PiecewiseDiff { pieces: Vec<(OrdinalInterval, i64)> },
    /// An infinite interval on which the functions differ.
    InfiniteWitness { interval: OrdinalInterval },
    FuelExhausted { spent: u64 },
}

#[derive(Clone, Debug)]
struct Side {
    k: u64,
    tau: Ordinal,
}

struct Cell {
    lo: Ordinal,
    hi: Ordinal,
    a: Side,
    b: Side,
}

struct Budget {
    left: u64,
    spent: u64,
}

impl Budget {
    fn take(&mut self, n: u64) -> bool {
        self.spent += n;
        if self.left < n {
            self.left = 0;
            return false;
        }
        self.left -= n;
        true
    }
}

/// Decomposes `rho(., gamma)` along ladder intervals until both sides meet.
///
/// On `(c_{j-1}, c_j]` the walk from `tau` steps to `c_j` first, so the
/// function is an offset copy of `rho(., c_j)`. Successor chains
/// `lambda + m` without overrides are collapsed in one step.
pub fn coherence_profile(kind: RhoKind, c: &CSystem, beta: &Ordinal, gamma: &Ordinal, fuel: u64) -> Result<Profile> {
    if beta >= gamma {
        return Err(Error::pre(format!("coherence_profile needs {beta} < {gamma}")));
    }
    if !c.is_ladder_system() {
        return Err(Error::Unsupported("coherence profiles need a ladder-type C-system".into()));
    }
    let mut budget = Budget { left: fuel, spent: 0 };
    let start = Cell {
        lo: Ordinal::zero(),
        hi: beta.clone(),
        a: Side { k: 0, tau: beta.clone() },
        b: Side { k: 0, tau: gamma.clone() },
    };
    match kind {
        RhoKind::One => profile_one(c, start, &mut budget),
        RhoKind::Two => profile_two(c, start, &mut budget),
        RhoKind::Three => Err(Error::Unsupported("profiles are defined for kinds 1 and 2".into())),
    }
}

enum Step {
    /// Both sides have the same limit part `lambda` and no overrides in between.
    SameLimit { lambda: Ordinal, ma: u64, mb: u64 },
    /// Replace the larger side.
    Reduce(Vec<(Ordinal, Ordinal, Side)>, bool),
}

/// Splits the larger side of a cell into pieces `(lo, hi, side)`.
fn reduce(kind: RhoKind, c: &CSystem, cell: &Cell, budget: &mut Budget) -> Result<Option<Step>> {
    let a_big = cell.a.tau > cell.b.tau;
    let (big, small) = if a_big { (&cell.a, &cell.b) } else { (&cell.b, &cell.a) };
    let (lam_b, m_b) = big.tau.limit_part();
    let (lam_s, m_s) = small.tau.limit_part();
    let clean = |lam: &Ordinal, tau: &Ordinal| !c.overridden_in(lam, tau);
    if m_b > 0 && clean(&lam_b, &big.tau) && (lam_b != lam_s || clean(&lam_s, &small.tau)) {
        if lam_b == lam_s {
            let (ma, mb) = if a_big { (m_b, m_s) } else { (m_s, m_b) };
            return Ok(Some(Step::SameLimit { lambda: lam_b, ma, mb }));
        }
        // small side lies below lambda, so the chain collapses
        let k = match kind {
            RhoKind::Two => big.k + m_b,
            _ => big.k,
        };
        let side = Side { k, tau: lam_b };
        return Ok(Some(Step::Reduce(vec![(cell.lo.clone(), cell.hi.clone(), side)], a_big)));
    }
    if big.tau.is_successor() && !c.overridden_in(&big.tau.pred().unwrap(), &big.tau) {
        let k = match kind {
            RhoKind::Two => big.k + 1,
            _ => big.k,
        };
        let side = Side { k, tau: big.tau.pred().unwrap() };
        return Ok(Some(Step::Reduce(vec![(cell.lo.clone(), cell.hi.clone(), side)], a_big)));
    }
    let ladder = c.ladder(&big.tau)?;
    let mut j = ladder.count_below(&cell.lo)?;
    let mut pieces = Vec::new();
    loop {
        if !budget.take(1) {
            return Ok(None);
        }
        let from = if j == 0 {
            Ordinal::zero()
        } else {
            ladder.point(j - 1)?.expect("ladder point below the cell").succ()
        };
        if from >= cell.hi {
            break;
        }
        let cj = ladder.point(j)?.expect("cell lies below the top of the ladder");
        let lo = from.max(cell.lo.clone());
        let hi = cj.succ().min(cell.hi.clone());
        let k = match kind {
            RhoKind::One => big.k.max(j),
            _ => big.k + 1,
        };
        pieces.push((lo, hi, Side { k, tau: cj }));
        j += 1;
    }
    Ok(Some(Step::Reduce(pieces, a_big)))
}

fn profile_one(c: &CSystem, start: Cell, budget: &mut Budget) -> Result<Profile> {
    let mut diff: Vec<OrdinalInterval> = Vec::new();
    let mut stack = vec![start];
    while let Some(cell) = stack.pop() {
        if cell.lo >= cell.hi {
            continue;
        }
        if !budget.take(1) {
            return Ok(Profile::FuelExhausted { spent: budget.spent });
        }
        if cell.a.tau == cell.b.tau {
            if cell.a.k != cell.b.k {
                let level = cell.a.k.max(cell.b.k);
                let iv = OrdinalInterval::new(cell.lo, cell.hi);
                if !level_set(c, iv, cell.a.tau, level, budget, &mut diff)? {
                    return Ok(Profile::FuelExhausted { spent: budget.spent });
                }
            }
            continue;
        }
        match reduce(RhoKind::One, c, &cell, budget)? {
            None => return Ok(Profile::FuelExhausted { spent: budget.spent }),
            Some(Step::SameLimit { lambda, .. }) => {
                // on [lambda, min tau] both walks only pass successors
                let top = cell.a.tau.clone().min(cell.b.tau.clone()).succ();
                let high = OrdinalInterval::new(lambda.clone(), top).intersect(&OrdinalInterval::new(cell.lo.clone(), cell.hi.clone()));
                if cell.a.k != cell.b.k && !high.is_empty() {
                    diff.push(high);
                }
                let hi = cell.hi.clone().min(lambda.clone());
                stack.push(Cell {
                    lo: cell.lo,
                    hi,
                    a: Side { k: cell.a.k, tau: lambda.clone() },
                    b: Side { k: cell.b.k, tau: lambda },
                });
            }
            Some(Step::Reduce(pieces, a_big)) => {
                for (lo, hi, side) in pieces.into_iter().rev() {
                    let (a, b) = if a_big { (side, cell.b.clone()) } else { (cell.a.clone(), side) };
                    stack.push(Cell { lo, hi, a, b });
                }
            }
        }
    }
    let mut points = Vec::new();
    for iv in diff {
        match iv.points() {
            Some(p) => points.extend(p),
            None => return Ok(Profile::InfiniteWitness { interval: iv }),
        }
    }
    points.sort();
    points.dedup();
    Ok(Profile::FiniteDiff { points })
}

/// Collects `{x in iv : rho_1(x, tau) < level}`; false when fuel runs out.
fn level_set(
    c: &CSystem,
    iv: OrdinalInterval,
    tau: Ordinal,
    level: u64,
    budget: &mut Budget,
    out: &mut Vec<OrdinalInterval>,
) -> Result<bool> {
    let mut stack = vec![(iv, tau)];
    while let Some((iv, tau)) = stack.pop() {
        if iv.is_empty() {
            continue;
        }
        if !budget.take(1) {
            return Ok(false);
        }
        let (lam, m) = tau.limit_part();
        if m > 0 && !c.overridden_in(&lam, &tau) {
            let high = iv.intersect(&OrdinalInterval::new(lam.clone(), tau.succ()));
            if !high.is_empty() {
                out.push(high);
            }
            stack.push((iv.intersect(&OrdinalInterval::new(Ordinal::zero(), lam.clone())), lam));
            continue;
        }
        if iv.contains(&tau) {
            out.push(OrdinalInterval::new(tau.clone(), tau.succ()));
        }
        if tau.is_zero() {
            continue;
        }
        if tau.is_successor() && !c.overridden_in(&tau.pred().unwrap(), &tau) {
            let p = tau.pred().unwrap();
            stack.push((iv.intersect(&OrdinalInterval::new(Ordinal::zero(), p.succ())), p));
            continue;
        }
        let ladder = c.ladder(&tau)?;
        let mut j = ladder.count_below(&iv.lo)?;
        while j < level {
            if !budget.take(1) {
                return Ok(false);
            }
            let from = if j == 0 { Ordinal::zero() } else { ladder.point(j - 1)?.unwrap().succ() };
            if from >= iv.hi {
                break;
            }
            let Some(cj) = ladder.point(j)? else { break };
            let sub = iv.intersect(&OrdinalInterval::new(from, cj.succ()));
            stack.push((sub, cj));
            j += 1;
        }
    }
    Ok(true)
}

fn profile_two(c: &CSystem, start: Cell, budget: &mut Budget) -> Result<Profile> {
    let mut pieces: Vec<(OrdinalInterval, i64)> = Vec::new();
    let mut stack = vec![start];
    let offset = |a: &Side, b: &Side, ma: u64, mb: u64| (b.k + mb) as i64 - (a.k + ma) as i64;
    while let Some(cell) = stack.pop() {
        if cell.lo >= cell.hi {
            continue;
        }
        if !budget.take(1) {
            return Ok(Profile::FuelExhausted { spent: budget.spent });
        }
        if cell.a.tau == cell.b.tau {
            let d = offset(&cell.a, &cell.b, 0, 0);
            pieces.push((OrdinalInterval::new(cell.lo, cell.hi), d));
            continue;
        }
        match reduce(RhoKind::Two, c, &cell, budget)? {
            None => return Ok(Profile::FuelExhausted { spent: budget.spent }),
            Some(Step::SameLimit { ma, mb, .. }) => {
                // rho_2(lambda + i, lambda + m) = m - i + 1 and below lambda it is m + rho_2(., lambda)
                let d = offset(&cell.a, &cell.b, ma, mb);
                pieces.push((OrdinalInterval::new(cell.lo, cell.hi), d));
            }
            Some(Step::Reduce(ps, a_big)) => {
                for (lo, hi, side) in ps.into_iter().rev() {
                    let (a, b) = if a_big { (side, cell.b.clone()) } else { (cell.a.clone(), side) };
                    stack.push(Cell { lo, hi, a, b });
                }
            }
        }
    }
    pieces.sort_by(|x, y| x.0.lo.cmp(&y.0.lo));
    let mut merged: Vec<(OrdinalInterval, i64)> = Vec::new();
    for (iv, d) in pieces {
        match merged.last_mut() {
            Some((last, v)) if *v == d && last.hi == iv.lo => last.hi = iv.hi,
            _ => merged.push((iv, d)),
        }
    }
    Ok(Profile::PiecewiseDiff { pieces: merged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    const C: CSystem = CSystem::Canonical;

    #[test]
    fn traces() {
        assert_eq!(trace(&C, &o("2"), &o("w"), 100).unwrap(), vec![o("w"), o("2")]);
        assert_eq!(trace(&C, &o("3"), &o("w*2"), 100).unwrap(), vec![o("w*2"), o("w"), o("3")]);
        assert_eq!(trace(&C, &o("w"), &o("w"), 100).unwrap(), vec![o("w")]);
        assert!(matches!(trace(&C, &o("0"), &o("w+50"), 10), Err(Error::FuelExhausted(10))));
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho_nat(RhoKind::Two, &C, &o("2"), &o("w")).unwrap(), 2);
        assert_eq!(rho_nat(RhoKind::One, &C, &o("2"), &o("w")).unwrap(), 2);
        assert_eq!(rho_nat(RhoKind::Two, &C, &o("w"), &o("w")).unwrap(), 1);
        assert_eq!(rho_nat(RhoKind::One, &C, &o("w"), &o("w")).unwrap(), 0);
        assert_eq!(rho_nat(RhoKind::Three, &C, &o("w"), &o("w^2")).unwrap(), 0);
        assert_eq!(max_l(&C, &o("3"), &o("w*2")).unwrap(), o("2"));
        assert_eq!(max_l(&C, &o("1"), &o("w")).unwrap(), o("0"));
    }

    #[test]
    fn full_system_walks_have_length_two() {
        for (a, b) in [("0", "w"), ("w+3", "w^2"), ("5", "6")] {
            assert_eq!(trace(&CSystem::Full, &o(a), &o(b), 10).unwrap().len(), 2);
        }
        assert_eq!(rho(RhoKind::One, &CSystem::Full, &o("w+3"), &o("w^2")).unwrap(), o("w+3"));
        assert_eq!(rho_nat(RhoKind::Three, &CSystem::Full, &o("w"), &o("w^2")).unwrap(), 1);
    }

    #[test]
    fn rho_three_with_interval_ladder() {
        let raw = [(o("w*2"), vec!["[0,w)".parse().unwrap()])].into_iter().collect();
        let c = CSystem::table(raw).unwrap();
        assert_eq!(trace(&c, &o("w"), &o("w*2"), 10).unwrap(), vec![o("w*2"), o("w")]);
        assert_eq!(rho_nat(RhoKind::Three, &c, &o("w"), &o("w*2")).unwrap(), 1);
        assert_eq!(rho_nat(RhoKind::Three, &c, &o("w+1"), &o("w*2")).unwrap(), 0);
    }

    #[test]
    fn profile_examples() {
        let p = coherence_profile(RhoKind::Two, &C, &o("w"), &o("w*2"), 1000).unwrap();
        assert_eq!(p, Profile::PiecewiseDiff { pieces: vec![(OrdinalInterval::new(o("0"), o("w")), 1)] });
        let p = coherence_profile(RhoKind::One, &C, &o("w"), &o("w*2"), 1000).unwrap();
        assert_eq!(p, Profile::FiniteDiff { points: vec![] });
        assert!(coherence_profile(RhoKind::One, &C, &o("w*2"), &o("w"), 1000).is_err());
    }

    #[test]
    fn profile_reports_exhaustion_as_value() {
        let p = coherence_profile(RhoKind::Two, &C, &o("w^3*4+w^2*9"), &o("w^3*9"), 3).unwrap();
        assert!(matches!(p, Profile::FuelExhausted { .. }));
    }
}
