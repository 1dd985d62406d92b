//! Seeded acceptance battery.
//!
//! Each check draws its instances from its own ChaCha stream of the suite
//! seed, hashes a canonical description of every instance, and records up to
//! [`MAX_WITNESSES`] failing instances. Reports carry no timing so that two
//! runs with one seed serialize to identical bytes.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cech::{
    build_complex, build_complex_with_flipped_face, check_complex, cohomology, homotopy_check, les_segment, refinement_map, CochainComplexModel,
    CoverModel, PresheafHom, PresheafModel, ShiftMap, Space,
};
use crate::csystem::CSystem;
use crate::error::{Error, Result};
use crate::families::{
    alternating_sum, d_operator, extend_trivialization, is_coherent, is_trivialization, rho_family, subsets, trivialize_with_top, verify_cocycle,
    IndexedFamily,
};
use crate::finfun::{CompareMode, OrdinalFunction, Transform};
use crate::game::{play_game, Adversary};
use crate::groups::{FgAbelianGroup, GroupHom, IntMatrix};
use crate::ordinal::Ordinal;
use crate::walks::{coherence_profile, max_l, rho_nat, trace, Profile, RhoKind};
use crate::{oracle, sample};

pub const MAX_WITNESSES: usize = 5;
const FUEL: u64 = 10_000;
const PROFILE_FUEL: u64 = 100_000;
const WALK_FUEL: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteProfile {
    /// The instance counts of the acceptance criteria.
    Quick,
    /// Larger counts and grids.
    Full,
}

impl std::str::FromStr for SuiteProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(SuiteProfile::Quick),
            "full" => Ok(SuiteProfile::Full),
            _ => Err(Error::invalid(format!("unknown suite profile '{s}'"))),
        }
    }
}

/// Deliberate defects used to confirm that checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Mutation {
    /// Negate the sign of one face term in the differential of one degree.
    FlipFace { degree: usize, face: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub profile: SuiteProfile,
    pub mutation: Option<Mutation>,
}

impl SuiteConfig {
    pub fn new(seed: u64, profile: SuiteProfile) -> Self {
        SuiteConfig { seed, profile, mutation: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Unknown,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Unknown => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub property: String,
    pub outcome: Outcome,
    pub cases: usize,
    pub passed: usize,
    pub unknown: usize,
    pub inputs_digest: String,
    pub witnesses: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub command: String,
    pub seed: u64,
    pub profile: SuiteProfile,
    pub mutation: Option<Mutation>,
    pub outcome: Outcome,
    pub exit_code: i32,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Pretty-printed canonical JSON.
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes")
    }
}

type CheckFn = fn(&mut ChaCha8Rng, &Sizes, &SuiteConfig, &mut Tally);

/// Check ids sort in run order.
pub const CHECKS: [(&str, &str); 13] = [
    ("01-cochain-identity", "consecutive Cech differentials compose to zero in degrees up to 4"),
    ("02-discrete-h0", "zeroth cohomology of n disjoint singletons is the n-fold sum of the coefficients"),
    ("03-refinement-independence", "two refining maps induce equal maps on cohomology"),
    ("04-top-trivialization", "the top-index trivialization of a coherent family trivializes it mod finite"),
    ("05-extension", "a trivialization below xi extends to the whole family and keeps its lower part"),
    ("06-walk-laws", "traces match the step-loop oracle and concatenate when max_l is below the start"),
    ("07-rho1-finite-difference", "rho_1 coherence profiles are finite and agree with pointwise probes"),
    ("08-rho2-local-constancy", "rho_2 differences are constant on the computed pieces"),
    ("09-homotopy-identities", "del_inv undoes del and the prism homotopy identities hold exactly"),
    ("10-cocycle-law", "coboundaries of rho families are cocycles"),
    ("11-even-strategy", "Even's strategy keeps the even-stage condition and exact coherence"),
    ("12-long-exact-sequence", "coefficient sequences give exact cohomology segments, split ones with zero connecting map"),
    ("13-determinism", "a second run with the same seed reproduces every report byte for byte"),
];

const RUNNERS: [CheckFn; 12] = [
    cochain_identity,
    discrete_h0,
    refinement_independence,
    top_trivialization,
    extension,
    walk_laws,
    rho1_finite_difference,
    rho2_local_constancy,
    homotopy_identities,
    cocycle_law,
    even_strategy,
    long_exact_sequence,
];

struct Sizes {
    covers: usize,
    refinements: usize,
    families: usize,
    extensions: usize,
    grid: usize,
    rho1_pairs: usize,
    rho2_pairs: usize,
    probes: usize,
    functions: usize,
    cochains: usize,
    rho_sets: usize,
    games: usize,
    stages: usize,
    split_models: usize,
}

impl Sizes {
    fn of(p: SuiteProfile) -> Self {
        let q = Sizes {
            covers: 50,
            refinements: 20,
            families: 100,
            extensions: 50,
            grid: 200,
            rho1_pairs: 100,
            rho2_pairs: 50,
            probes: 1000,
            functions: 100,
            cochains: 30,
            rho_sets: 20,
            games: 25,
            stages: 20,
            split_models: 10,
        };
        match p {
            SuiteProfile::Quick => q,
            SuiteProfile::Full => Sizes {
                covers: 4 * q.covers,
                refinements: 4 * q.refinements,
                families: 4 * q.families,
                extensions: 4 * q.extensions,
                grid: 300,
                rho1_pairs: 4 * q.rho1_pairs,
                rho2_pairs: 4 * q.rho2_pairs,
                functions: 4 * q.functions,
                cochains: 4 * q.cochains,
                rho_sets: 4 * q.rho_sets,
                games: 2 * q.games,
                split_models: 4 * q.split_models,
                ..q
            },
        }
    }
}

/// Per-check counters, witnesses and input digest.
struct Tally {
    cases: usize,
    passed: usize,
    unknown: usize,
    failed: usize,
    witnesses: Vec<Value>,
    hasher: Sha256,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, passed: 0, unknown: 0, failed: 0, witnesses: Vec::new(), hasher: Sha256::new() }
    }

    fn input(&mut self, v: &Value) {
        self.hasher.update(v.to_string().as_bytes());
        self.hasher.update(b"\n");
    }

    fn fail(&mut self, w: Value) {
        self.failed += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    /// `Ok(Ok(()))` passes, `Ok(Err(w))` fails with witness `w`, fuel errors are unknown.
    fn record(&mut self, case: Value, r: Result<std::result::Result<(), Value>>) {
        self.cases += 1;
        match r {
            Ok(Ok(())) => self.passed += 1,
            Ok(Err(w)) => self.fail(json!({"case": case, "witness": w})),
            Err(e) if e.is_fuel() => {
                self.unknown += 1;
                if self.witnesses.len() < MAX_WITNESSES {
                    self.witnesses.push(json!({"case": case, "unknown": e.to_string()}));
                }
            }
            Err(e) => self.fail(json!({"case": case, "error": e.to_string()})),
        }
    }

    fn outcome(&self) -> Outcome {
        if self.failed > 0 {
            Outcome::Fail
        } else if self.unknown > 0 {
            Outcome::Unknown
        } else {
            Outcome::Pass
        }
    }

    fn finish(self, id: &str, property: &str, outcome: Outcome) -> CheckReport {
        CheckReport {
            id: id.into(),
            property: property.into(),
            outcome,
            cases: self.cases,
            passed: self.passed,
            unknown: self.unknown,
            inputs_digest: hex::encode(self.hasher.finalize()),
            witnesses: self.witnesses,
        }
    }
}

/// Hex SHA-256 of the concatenated parts, each followed by a newline.
pub fn digest<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn ensure(ok: bool, w: impl FnOnce() -> Value) -> std::result::Result<(), Value> {
    if ok {
        Ok(())
    } else {
        Err(w())
    }
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn run_one(index: usize, cfg: &SuiteConfig, sizes: &Sizes) -> CheckReport {
    let (id, property) = CHECKS[index];
    let mut rng = stream(cfg.seed, index);
    let mut t = Tally::new();
    RUNNERS[index](&mut rng, sizes, cfg, &mut t);
    let outcome = if index == 6 { rho1_outcome(&t) } else { t.outcome() };
    t.finish(id, property, outcome)
}

/// Runs one check by id.
pub fn run_check(id: &str, cfg: &SuiteConfig) -> Result<CheckReport> {
    let index = CHECKS.iter().position(|(c, _)| *c == id).ok_or_else(|| Error::invalid(format!("unknown check '{id}'")))?;
    let sizes = Sizes::of(cfg.profile);
    if index == 12 {
        return Ok(determinism(cfg, &sizes, &first_pass(cfg, &sizes)));
    }
    Ok(run_one(index, cfg, &sizes))
}

fn first_pass(cfg: &SuiteConfig, sizes: &Sizes) -> Vec<CheckReport> {
    (0..RUNNERS.len()).map(|i| run_one(i, cfg, sizes)).collect()
}

fn determinism(cfg: &SuiteConfig, sizes: &Sizes, first: &[CheckReport]) -> CheckReport {
    let (id, property) = CHECKS[12];
    let mut t = Tally::new();
    let second = first_pass(cfg, sizes);
    for (a, b) in first.iter().zip(&second) {
        let (x, y) = (serde_json::to_string(a).unwrap(), serde_json::to_string(b).unwrap());
        t.input(&json!(x));
        t.record(json!(a.id), Ok(ensure(x == y, || json!({"first": a.inputs_digest, "second": b.inputs_digest}))));
    }
    let outcome = t.outcome();
    t.finish(id, property, outcome)
}

/// All thirteen checks, sorted by id; the exit code is the largest member code.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let sizes = Sizes::of(cfg.profile);
    let mut checks = first_pass(cfg, &sizes);
    checks.push(determinism(cfg, &sizes, &checks));
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    let exit_code = checks.iter().map(|c| c.outcome.exit_code()).max().unwrap_or(0);
    let outcome = checks.iter().map(|c| c.outcome).max().unwrap_or(Outcome::Pass);
    SuiteReport { command: "suite".into(), seed: cfg.seed, profile: cfg.profile, mutation: cfg.mutation, outcome, exit_code, checks }
}

// ---------------------------------------------------------------------------
// Instance generators

type Sets = Vec<(String, BTreeSet<String>)>;

fn random_sets(rng: &mut ChaCha8Rng, k: usize, points: usize, prefix: &str) -> Sets {
    (0..k)
        .map(|i| {
            let mut s = BTreeSet::new();
            while s.is_empty() {
                for p in 0..points {
                    if rng.gen_ratio(1, 2) {
                        s.insert(format!("p{p}"));
                    }
                }
            }
            (format!("{prefix}{i}"), s)
        })
        .collect()
}

fn sets_json(s: &Sets) -> Value {
    json!(s.iter().map(|(n, p)| (n.clone(), p.iter().cloned().collect::<Vec<_>>())).collect::<BTreeMap<_, _>>())
}

/// At most three generators, torsion orders from {2, 3, 4, 6}.
fn random_group(rng: &mut ChaCha8Rng) -> FgAbelianGroup {
    let gens = rng.gen_range(1..=3);
    let orders: Vec<BigInt> = (0..gens).map(|_| BigInt::from([0, 2, 3, 4, 6][rng.gen_range(0..5)])).collect();
    FgAbelianGroup::from_orders(&orders)
}

/// `g` on every nonempty label; restriction multiplies by `2^(|U| - |V|)`.
fn weighted(space: &Space, g: &FgAbelianGroup) -> Result<PresheafModel> {
    let size = |l: usize| if l == space.empty() { 0 } else { space.name(l).split(',').count() };
    let k = space.labels().len();
    let sections: Vec<FgAbelianGroup> = (0..k).map(|l| if l == space.empty() { FgAbelianGroup::trivial() } else { g.clone() }).collect();
    let mut restr = BTreeMap::new();
    for u in 0..k {
        for v in 0..k {
            if u != v && v != space.empty() && space.le(v, u) {
                let f = BigInt::from(2u32).pow((size(u) - size(v)) as u32);
                let n = g.ngens();
                let m = IntMatrix::diagonal(&vec![f; n]);
                restr.insert((u, v), GroupHom::new(sections[u].cyclic_sum(), sections[v].cyclic_sum(), m)?);
            }
        }
    }
    PresheafModel::new(space.clone(), sections, restr)
}

fn presheaf(space: &Space, g: &FgAbelianGroup, twisted: bool) -> Result<PresheafModel> {
    if twisted {
        weighted(space, g)
    } else {
        Ok(PresheafModel::constant(space, g))
    }
}

fn ords(xs: &[Ordinal]) -> Value {
    json!(xs.iter().map(|x| x.to_string()).collect::<Vec<_>>())
}

fn distinct_in(rng: &mut ChaCha8Rng, lo: &Ordinal, hi: &Ordinal, k: usize) -> Vec<Ordinal> {
    let mut s = BTreeSet::new();
    let mut tries = 0;
    while s.len() < k && tries < 200 * k {
        s.insert(sample::ordinal_in(rng, lo, hi, 4));
        tries += 1;
    }
    s.into_iter().collect()
}

fn random_family(rng: &mut ChaCha8Rng, n: usize, idx: &[Ordinal], g: &FgAbelianGroup, pieces: usize) -> Result<IndexedFamily> {
    let top = idx.last().cloned().unwrap_or_default();
    let entries = subsets(idx, n)
        .into_iter()
        .map(|t| {
            let d = t.first().cloned().unwrap_or_else(|| top.clone());
            let f = sample::step_function(rng, &d, g, pieces, 5);
            (t, f)
        })
        .collect();
    IndexedFamily::new(n, idx.to_vec(), g.clone(), entries)
}

fn with_noise(rng: &mut ChaCha8Rng, phi: &IndexedFamily, points: usize) -> Result<IndexedFamily> {
    let g = phi.group().clone();
    let mut entries = BTreeMap::new();
    for (t, f) in phi.entries() {
        entries.insert(t.clone(), f.add(&sample::finite_support(rng, f.domain(), &g, points, 5))?);
    }
    IndexedFamily::new(phi.n(), phi.indices().to_vec(), g, entries)
}

/// A coherent n-family below `w^3`: a coboundary plus optional finite noise.
fn coherent_family(rng: &mut ChaCha8Rng, n: usize, max_indices: usize) -> Result<IndexedFamily> {
    let k = rng.gen_range(n.max(1)..=max_indices);
    let idx = distinct_in(rng, &Ordinal::one(), &Ordinal::omega_pow(Ordinal::nat(3)), k);
    let pieces = [4, 3, 2][(n - 1).min(2)];
    let psi = random_family(rng, n - 1, &idx, &FgAbelianGroup::z(), pieces)?;
    let phi = d_operator(&psi)?;
    let noise = if rng.gen_ratio(1, 2) { 1 } else { 0 };
    with_noise(rng, &phi, noise)
}

fn piece_count(f: &OrdinalFunction) -> Result<usize> {
    Ok(f.require_step()?.pieces().len())
}

fn pair_below(rng: &mut ChaCha8Rng, bound: &Ordinal) -> (Ordinal, Ordinal) {
    loop {
        let x = sample::ordinal_below(rng, bound, 4);
        let y = sample::ordinal_below(rng, bound, 4);
        if x != y && !x.is_zero() && !y.is_zero() {
            return if x < y { (x, y) } else { (y, x) };
        }
    }
}

fn w(k: u64) -> Ordinal {
    Ordinal::omega_pow(Ordinal::nat(k))
}

// ---------------------------------------------------------------------------
// Checks

fn complex_for(cover: &CoverModel, p: &PresheafModel, mutation: Option<Mutation>) -> Result<std::result::Result<CochainComplexModel, Value>> {
    let cx = match mutation {
        None => build_complex(cover, p, 4),
        Some(Mutation::FlipFace { degree, face }) => build_complex_with_flipped_face(cover, p, 4, degree, face),
    };
    match cx {
        Ok(c) => Ok(Ok(c)),
        Err(Error::NotExact(block)) => Ok(Err(json!({"located": block}))),
        Err(e) => Err(e),
    }
}

fn cochain_identity(rng: &mut ChaCha8Rng, s: &Sizes, cfg: &SuiteConfig, t: &mut Tally) {
    for case in 0..s.covers {
        let k = rng.gen_range(2..=6);
        let sets = random_sets(rng, k, 5, "U");
        let g = random_group(rng);
        let twisted = rng.gen_bool(0.5);
        let probe_seed: u64 = rng.gen();
        let desc = json!({"sets": sets_json(&sets), "group": g.to_string(), "twisted": twisted});
        t.input(&desc);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let cover = CoverModel::from_point_sets(std::slice::from_ref(&sets))?.remove(0);
            let p = presheaf(cover.space(), &g, twisted)?;
            let cx = match complex_for(&cover, &p, cfg.mutation)? {
                Ok(c) => c,
                Err(w) => return Ok(Err(w)),
            };
            if let Err(e) = check_complex(&cx) {
                return Ok(Err(json!({"located": e.to_string()})));
            }
            // second route: push random cochains through two differentials
            let mut prng = ChaCha8Rng::seed_from_u64(probe_seed);
            for j in 0..cx.differentials.len().saturating_sub(1) {
                for _ in 0..4 {
                    let x: Vec<BigInt> = cx.sums[j].orders.iter().map(|o| if o.is_zero() { BigInt::from(prng.gen_range(-9..=9)) } else { BigInt::from(prng.gen_range(0..6)) }).collect();
                    let y = cx.differentials[j + 1].apply(&cx.differentials[j].apply(&x));
                    if !cx.sums[j + 2].is_zero_elem(&y) {
                        return Ok(Err(json!({"degree": j, "cochain": x.iter().map(|v| v.to_string()).collect::<Vec<_>>()})));
                    }
                }
            }
            Ok(Ok(()))
        })();
        t.record(json!(case), r);
    }
}

fn discrete_h0(_rng: &mut ChaCha8Rng, _s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    let coefficients: [(&str, FgAbelianGroup, usize, Option<u32>); 3] =
        [("Z", FgAbelianGroup::z(), 1, None), ("Z/2", FgAbelianGroup::cyclic(2), 0, Some(2)), ("Z+Z/6", FgAbelianGroup::from_orders(&[BigInt::zero(), BigInt::from(6)]), 1, Some(6))];
    for (name, a, rank, tor) in &coefficients {
        for n in 1..=5usize {
            let desc = json!({"singletons": n, "coefficients": name});
            t.input(&desc);
            let expected = FgAbelianGroup { rank: rank * n, torsion: tor.map(|o| vec![BigInt::from(o); n]).unwrap_or_default() };
            let r = (|| -> Result<std::result::Result<(), Value>> {
                let sets: Sets = (0..n).map(|i| (format!("U{i}"), BTreeSet::from([format!("p{i}")]))).collect();
                let cover = CoverModel::from_point_sets(&[sets])?.remove(0);
                let cx = build_complex(&cover, &PresheafModel::constant(cover.space(), a), 1)?;
                let h = cohomology(&cx, 0)?;
                Ok(ensure(h == expected, || json!({"got": h.to_string(), "expected": expected.to_string()})))
            })();
            t.record(desc, r);
        }
    }
}

fn refinement_independence(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    for case in 0..s.refinements {
        // resample until some W set has two refining choices
        let (v, w, choices) = loop {
            let v = random_sets(rng, 3, 5, "V");
            let mut w = Vec::new();
            for i in 0..4 {
                let a = rng.gen_range(0..3);
                let b = if i == 0 { (a + 1) % 3 } else { rng.gen_range(0..3) };
                let base: BTreeSet<String> = v[a].1.intersection(&v[b].1).cloned().collect();
                let base = if base.is_empty() { v[a].1.clone() } else { base };
                let sub: BTreeSet<String> = base.iter().filter(|_| rng.gen_ratio(2, 3)).cloned().collect();
                w.push((format!("W{i}"), if sub.is_empty() { base } else { sub }));
            }
            let choices: Vec<Vec<String>> = w.iter().map(|(_, s)| v.iter().filter(|(_, t)| s.is_subset(t)).map(|(n, _)| n.clone()).collect()).collect();
            if choices.iter().any(|c| c.len() > 1) {
                break (v, w, choices);
            }
        };
        let r1: BTreeMap<String, String> = w.iter().zip(&choices).map(|((n, _), c)| (n.clone(), c[rng.gen_range(0..c.len())].clone())).collect();
        let mut r2 = r1.clone();
        let movable: Vec<usize> = (0..w.len()).filter(|&i| choices[i].len() > 1).collect();
        let i = movable[rng.gen_range(0..movable.len())];
        let others: Vec<&String> = choices[i].iter().filter(|c| **c != r1[&w[i].0]).collect();
        r2.insert(w[i].0.clone(), others[rng.gen_range(0..others.len())].clone());
        let coeff = rng.gen_range(0..3);
        let desc = json!({"v": sets_json(&v), "w": sets_json(&w), "r1": r1, "r2": r2, "coefficients": coeff});
        t.input(&desc);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let covers = CoverModel::from_point_sets(&[v.clone(), w.clone()])?;
            let p = match coeff {
                0 => PresheafModel::constant(covers[0].space(), &FgAbelianGroup::z()),
                1 => PresheafModel::constant(covers[0].space(), &FgAbelianGroup::cyclic(2)),
                _ => weighted(covers[0].space(), &FgAbelianGroup::z())?,
            };
            let a = refinement_map(&covers[0], &covers[1], &r1, &p, 3)?;
            let b = refinement_map(&covers[0], &covers[1], &r2, &p, 3)?;
            if a.chain_map == b.chain_map {
                return Ok(Err(json!("the two refining maps give the same chain map")));
            }
            for (deg, (x, y)) in a.induced.iter().zip(&b.induced).enumerate() {
                if x != y {
                    return Ok(Err(json!({"degree": deg})));
                }
            }
            Ok(Ok(()))
        })();
        t.record(json!(case), r);
    }
}

fn top_trivialization(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    for case in 0..s.families {
        let n = 1 + case % 3;
        let phi = coherent_family(rng, n, 6);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let phi = phi?;
            t.input(&phi.to_json());
            for f in phi.entries().values() {
                let p = piece_count(f)?;
                if p > 8 {
                    return Ok(Err(json!({"generator_pieces": p})));
                }
            }
            if !is_coherent(&phi, CompareMode::ModFinite, FUEL)?.is_yes() {
                return Ok(Err(json!("generated family is not coherent")));
            }
            let psi = trivialize_with_top(&phi, FUEL)?;
            let v = is_trivialization(&psi, &phi, CompareMode::ModFinite, FUEL)?;
            Ok(ensure(v.is_yes(), || json!(v.to_string())))
        })();
        t.record(json!({"case": case, "n": n}), r);
    }
}

fn extension(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    for case in 0..s.extensions {
        let n = 1 + case % 3;
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let phi = coherent_family(rng, n, 6)?;
            let idx = phi.indices().to_vec();
            let cut = rng.gen_range(0..=idx.len());
            let xi = idx.get(cut).cloned().unwrap_or_else(|| idx.last().unwrap().succ());
            let low = phi.below(&xi)?;
            let mut given = if low.indices().is_empty() { IndexedFamily::zero(n - 1, vec![], FgAbelianGroup::z())? } else { trivialize_with_top(&low, FUEL)? };
            if n >= 2 && low.indices().len() >= 2 {
                let extra = random_family(rng, n - 2, low.indices(), &FgAbelianGroup::z(), 3)?;
                given = given.add(&d_operator(&extra)?)?;
            }
            t.input(&json!({"family": phi.to_json(), "xi": xi.to_string(), "given": given.to_json()}));
            let ext = extend_trivialization(&phi, &given, &xi, FUEL)?;
            let v = is_trivialization(&ext, &phi, CompareMode::ModFinite, FUEL)?;
            if !v.is_yes() {
                return Ok(Err(json!({"trivialization": v.to_string()})));
            }
            if n == 1 {
                if let Some(m) = low.indices().last() {
                    let a = ext.entry(&[])?.restrict(m)?;
                    let b = given.entry(&[])?.resize(m)?;
                    let c = a.compare(&b, CompareMode::ModFinite, FUEL)?;
                    return Ok(ensure(c.is_yes(), || json!({"lower_part": format!("{c:?}")})));
                }
            } else {
                for (tu, f) in given.entries() {
                    let c = ext.entry(tu)?.compare(f, CompareMode::ModFinite, FUEL)?;
                    if !c.is_yes() {
                        return Ok(Err(json!({"lower_part": ords(tu)})));
                    }
                }
            }
            Ok(Ok(()))
        })();
        t.record(json!({"case": case, "n": n}), r);
    }
}

fn walk_laws(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    let c = CSystem::Canonical;
    let grid = sample::distinct_below(rng, &w(4), s.grid, 4);
    t.input(&ords(&grid));
    let m = grid.len();
    let mut traces: Vec<Vec<Option<Vec<Ordinal>>>> = vec![vec![None; m]; m];
    let mut maxl: Vec<Vec<Option<Ordinal>>> = vec![vec![None; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (&grid[i], &grid[j]);
            let case = json!({"alpha": a.to_string(), "beta": b.to_string()});
            let r = (|| -> Result<std::result::Result<(), Value>> {
                let tr = trace(&c, a, b, WALK_FUEL)?;
                let or = oracle::canonical_trace(a, b)?;
                maxl[i][j] = Some(max_l(&c, a, b)?);
                let ok = tr == or;
                traces[i][j] = Some(tr.clone());
                Ok(ensure(ok, || json!({"trace": ords(&tr), "oracle": ords(&or)})))
            })();
            t.record(case, r);
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let (Some(ml), Some(whole), Some(lo), Some(hi)) = (&maxl[j][k], &traces[i][k], &traces[i][j], &traces[j][k]) else { continue };
                if *ml >= grid[i] {
                    continue;
                }
                t.cases += 1;
                let joined = hi.iter().chain(lo.iter().skip(1));
                if whole.iter().eq(joined) {
                    t.passed += 1;
                } else {
                    t.fail(json!({"alpha": grid[i].to_string(), "beta": grid[j].to_string(), "gamma": grid[k].to_string()}));
                }
            }
        }
    }
}

fn rho1_outcome(t: &Tally) -> Outcome {
    if t.failed > 0 || t.passed * 100 < 95 * t.cases {
        Outcome::Fail
    } else {
        Outcome::Pass
    }
}

fn probe_set(rng: &mut ChaCha8Rng, beta: &Ordinal, forced: Vec<Ordinal>, total: usize) -> Vec<Ordinal> {
    let mut v = forced;
    v.push(Ordinal::zero());
    while v.len() < total {
        v.push(sample::ordinal_below(rng, beta, 6));
    }
    v
}

fn rho1_finite_difference(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    let c = CSystem::Canonical;
    for _ in 0..s.rho1_pairs {
        let (beta, gamma) = pair_below(rng, &w(4));
        let case = json!({"beta": beta.to_string(), "gamma": gamma.to_string()});
        t.input(&case);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let points = match coherence_profile(RhoKind::One, &c, &beta, &gamma, PROFILE_FUEL)? {
                Profile::FiniteDiff { points } => points,
                Profile::FuelExhausted { spent } => return Err(Error::FuelExhausted(spent)),
                other => return Ok(Err(serde_json::to_value(other).unwrap())),
            };
            for x in &points {
                if x >= &beta || oracle::canonical_rho1(x, &beta)? == oracle::canonical_rho1(x, &gamma)? {
                    return Ok(Err(json!({"listed_point_agrees": x.to_string()})));
                }
            }
            for x in probe_set(rng, &beta, points.clone(), s.probes) {
                let differs = oracle::canonical_rho1(&x, &beta)? != oracle::canonical_rho1(&x, &gamma)?;
                if differs != points.contains(&x) {
                    return Ok(Err(json!({"probe": x.to_string(), "differs": differs})));
                }
            }
            Ok(Ok(()))
        })();
        t.record(case, r);
    }
}

fn rho2_local_constancy(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    let c = CSystem::Canonical;
    for _ in 0..s.rho2_pairs {
        let (beta, gamma) = pair_below(rng, &w(4));
        let case = json!({"beta": beta.to_string(), "gamma": gamma.to_string()});
        t.input(&case);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let pieces = match coherence_profile(RhoKind::Two, &c, &beta, &gamma, PROFILE_FUEL)? {
                Profile::PiecewiseDiff { pieces } => pieces,
                Profile::FuelExhausted { spent } => return Err(Error::FuelExhausted(spent)),
                other => return Ok(Err(serde_json::to_value(other).unwrap())),
            };
            if pieces.first().map(|p| &p.0.lo) != Some(&Ordinal::zero()) || pieces.last().map(|p| &p.0.hi) != Some(&beta) || pieces.windows(2).any(|w| w[0].0.hi != w[1].0.lo) {
                return Ok(Err(json!("pieces do not partition [0, beta)")));
            }
            // every piece gets its left end and one interior point
            let mut forced = Vec::new();
            for (iv, _) in &pieces {
                forced.push(iv.lo.clone());
                forced.push(sample::ordinal_in(rng, &iv.lo, &iv.hi, 6));
            }
            for x in probe_set(rng, &beta, forced, s.probes) {
                let d = oracle::canonical_rho2(&x, &gamma)? as i64 - oracle::canonical_rho2(&x, &beta)? as i64;
                let Some((iv, v)) = pieces.iter().find(|(iv, _)| iv.contains(&x)) else {
                    return Ok(Err(json!({"uncovered": x.to_string()})));
                };
                if *v != d {
                    return Ok(Err(json!({"probe": x.to_string(), "piece": iv.to_string(), "piece_value": v, "pointwise": d})));
                }
            }
            Ok(Ok(()))
        })();
        t.record(case, r);
    }
}

fn homotopy_identities(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    let g = FgAbelianGroup::z();
    for case in 0..s.functions {
        let dom = sample::ordinal_in(rng, &Ordinal::one(), &w(3), 4);
        let f = sample::step_function(rng, &dom, &g, 8, 5);
        let probes: Vec<Ordinal> = (0..16).map(|_| sample::ordinal_below(rng, &dom, 5)).collect();
        t.input(&f.to_json());
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let back = f.transform(Transform::Del)?.transform(Transform::DelInv)?;
            let v = back.compare(&f, CompareMode::Exact, FUEL)?;
            if !v.is_yes() {
                return Ok(Err(json!({"del_inv_del": format!("{v:?}")})));
            }
            for x in &probes {
                if back.eval(x)? != f.eval(x)? {
                    return Ok(Err(json!({"probe": x.to_string()})));
                }
            }
            Ok(Ok(()))
        })();
        t.record(json!({"function": case}), r);
    }
    for case in 0..s.cochains {
        let size = rng.gen_range(3..=5);
        let mut cs = BTreeSet::new();
        while cs.len() < size {
            let (lam, _) = sample::ordinal_in(rng, &Ordinal::omega(), &w(3), 3).limit_part();
            if !lam.is_zero() {
                cs.insert(lam);
            }
        }
        let c: Vec<Ordinal> = cs.into_iter().collect();
        let k = rng.gen_range(0..=(size - 2).min(2));
        // even cases use step values, odd ones finitely supported values
        let finite = case % 2 == 1;
        let entries = subsets(&c, k + 1)
            .into_iter()
            .map(|tu| {
                let f = if finite { sample::finite_support(rng, &tu[0], &g, 4, 5) } else { sample::step_function(rng, &tu[0], &g, 4, 5) };
                (tu, f)
            })
            .collect();
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let f = IndexedFamily::new(k + 1, c.clone(), g.clone(), entries)?;
            t.input(&f.to_json());
            let m = ShiftMap::successor(&c)?;
            let domain = &c[..c.len() - 1];
            for tu in subsets(domain, k + 1) {
                let rep = homotopy_check(&f, &m, k, &tu, FUEL)?;
                if !rep.holds() {
                    return Ok(Err(rep.to_json()));
                }
                if k == 0 {
                    let d0 = alternating_sum(&f, &[tu[0].clone(), m.apply(&tu[0])?])?;
                    if !d0.compare(&rep.lhs, CompareMode::Exact, FUEL)?.is_yes() {
                        return Ok(Err(json!({"degree_zero": ords(&tu)})));
                    }
                }
            }
            Ok(Ok(()))
        })();
        t.record(json!({"cochain": case, "degree": k, "finite_support": finite}), r);
    }
}

fn cocycle_law(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    let c = CSystem::Canonical;
    for case in 0..s.rho_sets {
        let kind = [RhoKind::One, RhoKind::Two, RhoKind::Three][case % 3];
        let g = if kind == RhoKind::Three && case % 2 == 0 { FgAbelianGroup::cyclic(2) } else { FgAbelianGroup::z() };
        let k = rng.gen_range(3..=6);
        let idx = distinct_in(rng, &Ordinal::one(), &w(3), k);
        let probes: Vec<Ordinal> = (0..12).map(|_| sample::ordinal_below(rng, &idx[0], 5)).collect();
        let desc = json!({"kind": format!("{kind:?}"), "group": g.to_string(), "indices": ords(&idx)});
        t.input(&desc);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let phi = rho_family(kind, &c, &idx, &g, &g.generator())?;
            let v = verify_cocycle(&phi, FUEL)?;
            if !v.is_yes() {
                return Ok(Err(json!({"cocycle": v.to_string()})));
            }
            // second route: values against the walk and the vanishing of d(d(phi)) at probes
            for b in &idx {
                let f = phi.entry(std::slice::from_ref(b))?;
                for x in probes.iter().filter(|x| *x < b) {
                    let r = rho_nat(kind, &c, x, b)?;
                    if f.eval(x)? != g.scale(&g.generator(), &BigInt::from(r)) {
                        return Ok(Err(json!({"entry": b.to_string(), "probe": x.to_string()})));
                    }
                }
            }
            let dd = d_operator(&d_operator(&phi)?)?;
            for (tu, f) in dd.entries() {
                for x in probes.iter().filter(|x| *x < &tu[0]) {
                    if !f.eval(x)?.is_zero() {
                        return Ok(Err(json!({"tuple": ords(tu), "probe": x.to_string()})));
                    }
                }
            }
            Ok(Ok(()))
        })();
        t.record(desc, r);
    }
}

fn even_strategy(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    for case in 0..s.games {
        let n = 2 + case % 2;
        let g = if case % 5 == 4 { FgAbelianGroup::cyclic(6) } else { FgAbelianGroup::z() };
        let seed: u64 = rng.gen();
        let desc = json!({"n": n, "group": g.to_string(), "stages": s.stages, "seed": seed});
        t.input(&desc);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let rec = play_game(n, &g, s.stages, seed, &Adversary::default(), FUEL)?;
            if let Some(bad) = rec.stages.iter().find(|st| !st.coherent.is_yes() || st.dagger.as_ref().is_some_and(|d| !d.is_yes())) {
                return Ok(Err(serde_json::to_value(bad).unwrap()));
            }
            let last = rec.history.current().expect("stages were played");
            let v = is_coherent(last, CompareMode::Exact, FUEL)?;
            Ok(ensure(v.is_yes(), || json!({"final_condition": v.to_string()})))
        })();
        t.record(desc, r);
    }
}

fn uniform(source: &PresheafModel, target: &PresheafModel, rows: &[Vec<i64>]) -> Result<PresheafHom> {
    PresheafHom::uniform(source.clone(), target.clone(), &IntMatrix::from_rows(rows)?)
}

fn long_exact_sequence(rng: &mut ChaCha8Rng, s: &Sizes, _cfg: &SuiteConfig, t: &mut Tally) {
    let named = |v: &[(&str, &[&str])]| -> Sets { v.iter().map(|(n, p)| (n.to_string(), p.iter().map(|x| x.to_string()).collect())).collect() };
    let models = [named(&[("U", &["a", "b"]), ("V", &["b", "c"])]), named(&[("U", &["a", "b"]), ("V", &["b", "c"]), ("W", &["c", "a"])])];
    for (mi, sets) in models.iter().enumerate() {
        for n in 0..sets.len() - 1 {
            let desc = json!({"model": "2Z -> Z -> Z/2", "sets": sets_json(sets), "degree": n});
            t.input(&desc);
            let r = (|| -> Result<std::result::Result<(), Value>> {
                let c = CoverModel::from_point_sets(std::slice::from_ref(sets))?.remove(0);
                let z = PresheafModel::constant(c.space(), &FgAbelianGroup::z());
                let f = PresheafModel::constant(c.space(), &FgAbelianGroup::cyclic(2));
                let rep = les_segment(&c, &uniform(&z, &z, &[vec![2]])?, &uniform(&z, &f, &[vec![1]])?, n)?;
                Ok(ensure(rep.is_exact(), || rep.to_json()))
            })();
            t.record(json!({"model": mi, "degree": n}), r);
        }
    }
    for case in 0..s.split_models {
        let k = rng.gen_range(2..=4);
        let sets = random_sets(rng, k, 4, "U");
        let a = rng.gen_range(1..=2usize);
        let b = random_group(rng);
        let bn = b.ngens();
        // inj(x) = (x, g x), surj(x, y) = y - g x
        let gm: Vec<Vec<i64>> = (0..bn).map(|_| (0..a).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let desc = json!({"sets": sets_json(&sets), "sub": format!("Z^{a}"), "quotient": b.to_string(), "twist": gm});
        t.input(&desc);
        let r = (|| -> Result<std::result::Result<(), Value>> {
            let c = CoverModel::from_point_sets(std::slice::from_ref(&sets))?.remove(0);
            let pa = FgAbelianGroup::free(a);
            // free part first, so the normal form keeps the generator order
            let mut orders = vec![BigInt::zero(); a];
            orders.extend(b.cyclic_sum().orders);
            let eg = FgAbelianGroup::from_orders(&orders);
            if eg.cyclic_sum().orders != orders {
                return Err(Error::invalid("unexpected generator order in the middle group"));
            }
            let p = PresheafModel::constant(c.space(), &pa);
            let e = PresheafModel::constant(c.space(), &eg);
            let f = PresheafModel::constant(c.space(), &b);
            let mut inj_rows: Vec<Vec<i64>> = (0..a).map(|i| (0..a).map(|j| i64::from(i == j)).collect()).collect();
            inj_rows.extend(gm.iter().cloned());
            let surj_rows: Vec<Vec<i64>> = (0..bn).map(|i| gm[i].iter().map(|x| -x).chain((0..bn).map(|j| i64::from(i == j))).collect()).collect();
            let inj = uniform(&p, &e, &inj_rows)?;
            let surj = uniform(&e, &f, &surj_rows)?;
            for n in 0..k - 1 {
                let rep = les_segment(&c, &inj, &surj, n)?;
                if !rep.is_exact() || !rep.connecting.is_zero() {
                    return Ok(Err(json!({"degree": n, "report": rep.to_json()})));
                }
            }
            Ok(Ok(()))
        })();
        t.record(json!({"split": case}), r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flipped_face_is_located() {
        let mut cfg = SuiteConfig::new(3, SuiteProfile::Quick);
        cfg.mutation = Some(Mutation::FlipFace { degree: 1, face: 0 });
        let r = run_check("01-cochain-identity", &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Fail);
        let w = serde_json::to_string(&r.witnesses[0]).unwrap();
        assert!(w.contains("nonzero in block"), "{w}");
    }

    #[test]
    fn discrete_h0_passes() {
        let r = run_check("02-discrete-h0", &SuiteConfig::new(0, SuiteProfile::Quick)).unwrap();
        assert_eq!((r.outcome, r.cases), (Outcome::Pass, 15));
    }

    #[test]
    fn unknown_ids_are_rejected() {
        assert!(run_check("99-nothing", &SuiteConfig::new(0, SuiteProfile::Quick)).is_err());
    }
}
