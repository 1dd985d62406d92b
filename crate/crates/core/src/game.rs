//! The finite-stage extension game: Even keeps the even-stage subfamily exactly
//! coherent while Odd extends the current condition arbitrarily.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::families::{alternating_sum, coherent_on, extend_from_subset, subsets, trivialize_unchecked, FamilyVerdict, IndexedFamily, Tuple};
use crate::finfun::{CompareMode, OrdinalFunction};
use crate::groups::FgAbelianGroup;
use crate::ordinal::{Ordinal, OrdinalInterval};
use crate::sample;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameHistory {
    n: usize,
    group: FgAbelianGroup,
    conditions: Vec<IndexedFamily>,
}

impl GameHistory {
    pub fn new(n: usize, group: FgAbelianGroup) -> Result<Self> {
        if n == 0 {
            return Err(Error::pre("the game needs n >= 1"));
        }
        Ok(GameHistory { n, group, conditions: Vec::new() })
    }

    /// Rebuilds a history from its conditions, checking that each extends the last.
    pub fn from_conditions(n: usize, group: FgAbelianGroup, conditions: Vec<IndexedFamily>) -> Result<Self> {
        let mut h = GameHistory::new(n, group)?;
        for c in conditions {
            h.push(c)?;
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn conditions(&self) -> &[IndexedFamily] {
        &self.conditions
    }

    pub fn stage(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_even_turn(&self) -> bool {
        self.stage().is_multiple_of(2)
    }

    pub fn current(&self) -> Option<&IndexedFamily> {
        self.conditions.last()
    }

    pub fn tops(&self) -> Vec<Ordinal> {
        self.conditions.iter().map(|c| c.top().cloned().unwrap_or_default()).collect()
    }

    /// Tops of the conditions played at even stages.
    pub fn even_tops(&self) -> Vec<Ordinal> {
        self.tops().into_iter().step_by(2).collect()
    }

    /// Appends a condition; it must add exactly one larger index and keep all old entries.
    pub fn push(&mut self, p: IndexedFamily) -> Result<()> {
        if p.n() != self.n || p.group() != &self.group {
            return Err(Error::invalid("condition has the wrong arity or group"));
        }
        let tops = self.tops();
        let top = p.top().ok_or_else(|| Error::invalid("condition has no indices"))?;
        let mut expect = tops.clone();
        expect.push(top.clone());
        if p.indices() != expect.as_slice() {
            return Err(Error::invalid(format!("condition indices must be the earlier tops followed by a larger top {top}")));
        }
        if let Some(prev) = self.current() {
            for (t, f) in prev.entries() {
                if p.entry(t)? != f {
                    return Err(Error::invalid(format!("condition changes the entry at ({})", crate::families::tuple_key(t))));
                }
            }
        }
        self.conditions.push(p);
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "group": serde_json::to_value(&self.group).unwrap(),
            "conditions": self.conditions.iter().map(IndexedFamily::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::invalid("history needs 'n'"))? as usize;
        let group: FgAbelianGroup = match v.get("group") {
            Some(g) => serde_json::from_value(g.clone()).map_err(|e| Error::invalid(e.to_string()))?,
            None => FgAbelianGroup::z(),
        };
        let conds = v
            .get("conditions")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("history needs 'conditions'"))?
            .iter()
            .map(IndexedFamily::from_json)
            .collect::<Result<Vec<_>>>()?;
        GameHistory::from_conditions(n, group, conds)
    }
}

/// Exact vanishing of alternating sums on all (n+1)-tuples of even-stage tops.
pub fn dagger(h: &GameHistory, fuel: u64) -> Result<FamilyVerdict> {
    let Some(p) = h.current() else { return Ok(FamilyVerdict::Yes) };
    coherent_on(p, subsets(&h.even_tops(), h.n + 1), CompareMode::Exact, fuel)
}

/// Tuples of the condition that contain its top index.
fn tuples_with_top(p: &IndexedFamily) -> Vec<Tuple> {
    let Some(top) = p.top() else { return vec![] };
    subsets(p.indices(), p.n() + 1).into_iter().filter(|t| t.last() == Some(top)).collect()
}

/// Even's prescribed values on tuples of even tops, before completion.
fn formula_entries(p: &IndexedFamily, ev: &[Ordinal]) -> Result<IndexedFamily> {
    let n = p.n();
    let g = p.group();
    let s = if n % 2 == 1 { BigInt::from(1) } else { BigInt::from(-1) };
    let mut entries = BTreeMap::new();
    for b in subsets(ev, n - 1) {
        let dom = b.first().cloned().unwrap_or_else(|| ev.last().cloned().unwrap_or_default());
        let mut parts: Vec<(OrdinalInterval, OrdinalFunction)> = Vec::new();
        for w in ev.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            if b.first().is_some_and(|b0| hi >= b0) {
                // alpha_xi = beta_0: a repeated index, value 0
                break;
            }
            let mut t = vec![hi.clone()];
            t.extend(b.iter().cloned());
            parts.push((OrdinalInterval::new(lo.clone(), hi.clone()), p.entry(&t)?.scale(&s)));
        }
        let refs: Vec<(OrdinalInterval, &OrdinalFunction)> = parts.iter().map(|(i, f)| (i.clone(), f)).collect();
        entries.insert(b, OrdinalFunction::glue(&dom, g, &refs)?);
    }
    IndexedFamily::new(n - 1, ev.to_vec(), g.clone(), entries)
}

/// Even's move: a condition one index higher whose new entries follow the
/// even-stage formula and complete it to a trivialization of the current condition.
pub fn even_strategy_move(h: &GameHistory, fuel: u64) -> Result<IndexedFamily> {
    if !h.is_even_turn() {
        return Err(Error::pre(format!("stage {} belongs to Odd", h.stage())));
    }
    let n = h.n;
    let g = &h.group;
    let Some(p) = h.current() else {
        return IndexedFamily::zero(n, vec![Ordinal::zero()], g.clone());
    };
    if let FamilyVerdict::No { tuple, witness } = dagger(h, fuel)? {
        return Err(Error::Incoherent { tuple, detail: format!("even-stage alternating sum is nonzero on {witness}") });
    }
    let ev = h.even_tops();
    let top = p.top().unwrap().clone();
    let delta = top.succ();
    let sign = if n % 2 == 1 { BigInt::from(1) } else { BigInt::from(-1) };
    let psi_s = formula_entries(p, &ev)?.scale(&sign);
    let psi = extend_from_subset(p, &ev, &psi_s)?.scale(&sign);
    let mut entries = p.entries().clone();
    if n == 1 {
        entries.insert(vec![delta.clone()], psi.entry(&[])?.resize(&delta)?);
    } else {
        for (t, f) in psi.entries() {
            let mut full = t.clone();
            full.push(delta.clone());
            entries.insert(full, f.clone());
        }
    }
    let mut idx = p.indices().to_vec();
    idx.push(delta);
    IndexedFamily::new(n, idx, g.clone(), entries)
}

/// Settings for the random Odd player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Adversary {
    /// New tops are `max + w·k` with `1 <= k <= max_jump`.
    pub max_jump: u64,
    pub pieces: usize,
    pub max_value: i64,
    /// Finitely many points of each new entry get random offsets.
    pub noise: bool,
}

impl Default for Adversary {
    fn default() -> Self {
        Adversary { max_jump: 3, pieces: 3, max_value: 5, noise: false }
    }
}

/// Odd's move: the coboundary of a random extension of a trivialization of the current condition.
pub fn odd_move<R: Rng>(h: &GameHistory, adv: &Adversary, rng: &mut R) -> Result<IndexedFamily> {
    if h.is_even_turn() {
        return Err(Error::pre(format!("stage {} belongs to Even", h.stage())));
    }
    let p = h.current().unwrap();
    let n = h.n;
    let g = &h.group;
    let top = p.top().unwrap().clone();
    let k = rng.gen_range(1..=adv.max_jump.max(1));
    let delta = &top + &Ordinal::monomial(Ordinal::one(), k);
    let ups = trivialize_unchecked(p)?;
    let mut idx = p.indices().to_vec();
    idx.push(delta.clone());
    let mut u_entries = BTreeMap::new();
    if n == 1 {
        let tail = sample::step_function(rng, &delta, g, adv.pieces, adv.max_value);
        let f = OrdinalFunction::glue(
            &delta,
            g,
            &[(OrdinalInterval::new(Ordinal::zero(), top.clone()), ups.entry(&[])?), (OrdinalInterval::new(top.clone(), delta.clone()), &tail)],
        )?;
        u_entries.insert(vec![], f);
    } else {
        u_entries = ups.entries().clone();
        for t in subsets(p.indices(), n - 2) {
            let mut full = t.clone();
            full.push(delta.clone());
            let dom = full[0].clone();
            u_entries.insert(full, sample::step_function(rng, &dom, g, adv.pieces, adv.max_value));
        }
    }
    let ups_ext = IndexedFamily::new(n - 1, idx.clone(), g.clone(), u_entries)?;
    let mut entries = p.entries().clone();
    for t in subsets(p.indices(), n - 1) {
        let mut full = t.clone();
        full.push(delta.clone());
        let mut f = alternating_sum(&ups_ext, &full)?;
        if adv.noise {
            f = f.add(&sample::finite_support(rng, f.domain(), g, 2, adv.max_value))?;
        }
        entries.insert(full, f);
    }
    IndexedFamily::new(n, idx, g.clone(), entries)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub player: &'static str,
    pub top: String,
    /// Exact coherence on the tuples through the new top.
    pub coherent: FamilyVerdict,
    /// The even-stage condition after Even's move; absent on Odd's stages.
    pub dagger: Option<FamilyVerdict>,
}

#[derive(Clone, Debug)]
pub struct GameRecord {
    pub history: GameHistory,
    pub stages: Vec<StageReport>,
}

impl GameRecord {
    /// Every even stage kept the even-stage condition and every stage is exactly coherent.
    pub fn even_wins(&self) -> bool {
        self.stages.iter().all(|s| s.dagger.as_ref().is_none_or(FamilyVerdict::is_yes))
    }

    pub fn exactly_coherent(&self) -> bool {
        self.stages.iter().all(|s| s.coherent.is_yes())
    }
}

/// Plays `stages` moves, Even first, against a seeded random Odd.
pub fn play_game(n: usize, group: &FgAbelianGroup, stages: usize, seed: u64, adv: &Adversary, fuel: u64) -> Result<GameRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = GameHistory::new(n, group.clone())?;
    let mut reports = Vec::new();
    for stage in 0..stages {
        let even = h.is_even_turn();
        let p = if even { even_strategy_move(&h, fuel)? } else { odd_move(&h, adv, &mut rng)? };
        let coherent = coherent_on(&p, tuples_with_top(&p), CompareMode::Exact, fuel)?;
        h.push(p)?;
        let dagger = if even { Some(dagger(&h, fuel)?) } else { None };
        reports.push(StageReport {
            stage,
            player: if even { "even" } else { "odd" },
            top: h.current().unwrap().top().unwrap().to_string(),
            coherent,
            dagger,
        });
    }
    Ok(GameRecord { history: h, stages: reports })
}
