use std::collections::BTreeMap;

use num_bigint::BigInt;
use ordwalk_core::families::*;
use ordwalk_core::finfun::{CompareMode, OrdinalFunction};
use ordwalk_core::game::{play_game, Adversary};
use ordwalk_core::groups::{FgAbelianGroup, GroupElem};
use ordwalk_core::ordinal::Ordinal;
use ordwalk_core::sample;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FUEL: u64 = 1000;

fn z() -> FgAbelianGroup {
    FgAbelianGroup::z()
}

fn w2() -> Ordinal {
    Ordinal::omega_pow(Ordinal::nat(2))
}

/// Indices in `[w, w^2)`.
fn indices(rng: &mut ChaCha8Rng, k: usize) -> Vec<Ordinal> {
    let mut v = Vec::new();
    while v.len() < k {
        let x = sample::ordinal_in(rng, &Ordinal::omega(), &w2(), 4);
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v.sort();
    v
}

fn random_family(rng: &mut ChaCha8Rng, n: usize, idx: &[Ordinal]) -> IndexedFamily {
    let top = idx.last().cloned().unwrap_or_default();
    let entries = subsets(idx, n)
        .into_iter()
        .map(|t| {
            let d = t.first().cloned().unwrap_or_else(|| top.clone());
            let f = sample::step_function(rng, &d, &z(), 4, 5);
            (t, f)
        })
        .collect();
    IndexedFamily::new(n, idx.to_vec(), z(), entries).unwrap()
}

fn with_noise(rng: &mut ChaCha8Rng, phi: &IndexedFamily) -> IndexedFamily {
    let entries: BTreeMap<_, _> = phi
        .entries()
        .iter()
        .map(|(t, f)| (t.clone(), f.add(&sample::finite_support(rng, f.domain(), &z(), 2, 5)).unwrap()))
        .collect();
    IndexedFamily::new(phi.n(), phi.indices().to_vec(), z(), entries).unwrap()
}

fn bump(phi: &IndexedFamily, t: &[Ordinal]) -> IndexedFamily {
    let mut entries = phi.entries().clone();
    let f = entries.get_mut(t).unwrap();
    let one = OrdinalFunction::constant(f.domain().clone(), z(), GroupElem(vec![BigInt::from(1)])).unwrap();
    *f = f.add(&one).unwrap();
    IndexedFamily::new(phi.n(), phi.indices().to_vec(), z(), entries).unwrap()
}

fn probes(rng: &mut ChaCha8Rng, dom: &Ordinal) -> Vec<Ordinal> {
    if dom.is_zero() {
        return vec![];
    }
    (0..12).map(|_| sample::ordinal_below(rng, dom, 5)).collect()
}

fn exact_zero(f: &OrdinalFunction) -> bool {
    f.compare_zero(CompareMode::Exact, FUEL).unwrap().is_yes()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn d_is_pointwise_alternating_sum(seed in any::<u64>(), n in 0usize..=3, k in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = indices(&mut rng, k);
        let phi = random_family(&mut rng, n, &idx);
        let d = d_operator(&phi).unwrap();
        for (t, f) in d.entries() {
            prop_assert_eq!(f.domain(), &t[0]);
            for x in probes(&mut rng, &t[0]) {
                let mut acc = BigInt::from(0);
                for i in 0..t.len() {
                    let face: Vec<Ordinal> = if n == 0 { vec![] } else { t.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| y.clone()).collect() };
                    let g = phi.entry(&face).unwrap();
                    let v = if x < *g.domain() { g.eval(&x).unwrap().0[0].clone() } else { BigInt::from(0) };
                    if i % 2 == 0 { acc += v } else { acc -= v }
                    if n == 0 { break; }
                }
                prop_assert_eq!(f.eval(&x).unwrap().0[0].clone(), acc);
            }
        }
    }

    #[test]
    fn d_squared_vanishes_and_is_linear(seed in any::<u64>(), n in 0usize..=3, k in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = indices(&mut rng, k);
        let a = random_family(&mut rng, n, &idx);
        let b = random_family(&mut rng, n, &idx);
        prop_assert!(verify_cocycle(&a, FUEL).unwrap().is_yes());
        let lhs = d_operator(&a.add(&b).unwrap()).unwrap();
        let rhs = d_operator(&a).unwrap().add(&d_operator(&b).unwrap()).unwrap();
        for (t, f) in lhs.entries() {
            prop_assert!(f.compare(rhs.entry(t).unwrap(), CompareMode::Exact, FUEL).unwrap().is_yes());
        }
    }

    #[test]
    fn coboundaries_are_coherent_and_trivialized(seed in any::<u64>(), n in 0usize..=2, k in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = indices(&mut rng, k);
        let psi = random_family(&mut rng, n, &idx);
        let phi = d_operator(&psi).unwrap();
        prop_assert!(is_coherent(&phi, CompareMode::Exact, FUEL).unwrap().is_yes());
        let t = trivialize_with_top(&phi, FUEL).unwrap();
        prop_assert!(is_trivialization(&t, &phi, CompareMode::Exact, FUEL).unwrap().is_yes());
        let noisy = with_noise(&mut rng, &phi);
        prop_assert!(is_coherent(&noisy, CompareMode::ModFinite, FUEL).unwrap().is_yes());
        let t = trivialize_with_top(&noisy, FUEL).unwrap();
        prop_assert!(is_trivialization(&t, &noisy, CompareMode::ModFinite, FUEL).unwrap().is_yes());
    }

    #[test]
    fn infinite_perturbation_names_least_tuple(seed in any::<u64>(), n in 1usize..=2, k in 3usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = indices(&mut rng, k);
        let psi = random_family(&mut rng, n - 1, &idx);
        let phi = d_operator(&psi).unwrap();
        let all = subsets(&idx, n);
        let t = all[rng.gen_range(0..all.len())].clone();
        let bad = bump(&phi, &t);
        let expected = subsets(&idx, n + 1).into_iter().find(|s| t.iter().all(|x| s.contains(x))).unwrap();
        match is_coherent(&bad, CompareMode::ModFinite, FUEL).unwrap() {
            FamilyVerdict::No { tuple, .. } => prop_assert_eq!(tuple, expected),
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn coherent_iff_prefixes_trivial(seed in any::<u64>(), n in 1usize..=2, k in 2usize..=5, perturb in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = indices(&mut rng, k);
        let psi = random_family(&mut rng, n - 1, &idx);
        let mut phi = with_noise(&mut rng, &d_operator(&psi).unwrap());
        if perturb {
            let all = subsets(&idx, n);
            let t = all[rng.gen_range(0..all.len())].clone();
            phi = bump(&phi, &t);
        }
        let coherent = is_coherent(&phi, CompareMode::ModFinite, FUEL).unwrap().is_yes();
        let prefixes = idx.iter().all(|g| {
            let seg: Vec<Ordinal> = idx.iter().filter(|x| *x <= g).cloned().collect();
            let p = phi.restrict_to(&seg).unwrap();
            let t = trivialize_unchecked(&p).unwrap();
            is_trivialization(&t, &p, CompareMode::ModFinite, FUEL).unwrap().is_yes()
        });
        prop_assert_eq!(coherent, prefixes);
    }

    #[test]
    fn extension_keeps_the_lower_part(seed in any::<u64>(), n in 1usize..=2, k in 2usize..=5, cut in 0usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = indices(&mut rng, k);
        let psi0 = random_family(&mut rng, n - 1, &idx);
        let phi = with_noise(&mut rng, &d_operator(&psi0).unwrap());
        let xi = idx.get(cut).cloned().unwrap_or_else(|| idx.last().unwrap().succ());
        let low = phi.below(&xi).unwrap();
        // a trivialization of the lower part that differs from the top-index one
        let mut given = if low.indices().is_empty() {
            IndexedFamily::zero(n - 1, vec![], z()).unwrap()
        } else {
            trivialize_with_top(&low, FUEL).unwrap()
        };
        if n == 2 && low.indices().len() >= 2 {
            let extra = random_family(&mut rng, 0, low.indices());
            given = given.add(&d_operator(&extra).unwrap()).unwrap();
        }
        let ext = extend_trivialization(&phi, &given, &xi, FUEL).unwrap();
        prop_assert!(is_trivialization(&ext, &phi, CompareMode::ModFinite, FUEL).unwrap().is_yes());
        if n == 1 {
            if let Some(m) = low.indices().last() {
                let a = ext.entry(&[]).unwrap().restrict(m).unwrap();
                let b = given.entry(&[]).unwrap().resize(m).unwrap();
                prop_assert!(a.compare(&b, CompareMode::ModFinite, FUEL).unwrap().is_yes());
            }
        } else {
            for (t, f) in given.entries() {
                prop_assert!(ext.entry(t).unwrap().compare(f, CompareMode::Exact, FUEL).unwrap().is_yes());
            }
        }
    }

    #[test]
    fn stretching_preserves_exact_coherence(seed in any::<u64>(), n in 1usize..=2, k in 2usize..=5, coherent in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<Ordinal> = {
            let mut v: Vec<u64> = Vec::new();
            while v.len() < k { let x = rng.gen_range(1..12); if !v.contains(&x) { v.push(x) } }
            v.sort();
            v.into_iter().map(Ordinal::nat).collect()
        };
        let fs = |rng: &mut ChaCha8Rng, d: &Ordinal| sample::finite_support(rng, d, &z(), 3, 4);
        let phi = if coherent {
            let top = idx.last().unwrap().clone();
            let entries = subsets(&idx, n - 1).into_iter().map(|t| {
                let d = t.first().cloned().unwrap_or_else(|| top.clone());
                let f = fs(&mut rng, &d);
                (t, f)
            }).collect();
            d_operator(&IndexedFamily::new(n - 1, idx.clone(), z(), entries).unwrap()).unwrap()
        } else {
            let entries = subsets(&idx, n).into_iter().map(|t| { let f = fs(&mut rng, &t[0]); (t, f) }).collect();
            IndexedFamily::new(n, idx.clone(), z(), entries).unwrap()
        };
        // d of finite-support entries may be a step body; rebuild as finite support
        let entries = phi.entries().iter().map(|(t, f)| {
            let pts = f.require_step().unwrap().support().unwrap();
            (t.clone(), OrdinalFunction::finite_support(f.domain().clone(), z(), pts).unwrap())
        }).collect();
        let phi = IndexedFamily::new(n, idx.clone(), z(), entries).unwrap();
        let rule = ClubRule::Scale { offset: Ordinal::zero(), exp: Ordinal::one() };
        let s = stretch(&phi, &rule, &w2()).unwrap();
        for (t, f) in s.entries() {
            prop_assert!(t.iter().all(|x| x.is_limit()));
            for (p, _) in f.require_step().unwrap().support().unwrap() {
                prop_assert!(p.is_zero() || p.is_limit());
            }
        }
        let before = is_coherent(&phi, CompareMode::Exact, FUEL).unwrap().is_yes();
        let after = is_coherent(&s, CompareMode::Exact, FUEL).unwrap().is_yes();
        prop_assert_eq!(before, after);
        if coherent {
            prop_assert!(after);
        }
    }
}

#[test]
fn zero_family_stretches_to_zero() {
    let idx: Vec<Ordinal> = (1..=3).map(Ordinal::nat).collect();
    let phi = IndexedFamily::zero(1, idx, z()).unwrap();
    let s = stretch(&phi, &ClubRule::Ladder { table: BTreeMap::new() }, &w2()).unwrap();
    assert!(s.entries().values().all(exact_zero));
}

#[test]
fn extension_below_all_indices_is_plain() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let idx = indices(&mut rng, 4);
    let phi = d_operator(&random_family(&mut rng, 1, &idx)).unwrap();
    let empty = IndexedFamily::zero(1, vec![], z()).unwrap();
    let ext = extend_trivialization(&phi, &empty, &Ordinal::zero(), FUEL).unwrap();
    assert_eq!(ext, trivialize_with_top(&phi, FUEL).unwrap());
}

#[test]
fn long_games_keep_even_tuples_exact() {
    for n in [2, 3] {
        for seed in 0..3 {
            let rec = play_game(n, &z(), 20, seed, &Adversary::default(), FUEL).unwrap();
            assert!(rec.even_wins(), "n={n} seed={seed}");
            assert!(rec.exactly_coherent(), "n={n} seed={seed}");
        }
        let noisy = Adversary { noise: true, ..Adversary::default() };
        let rec = play_game(n, &z(), 20, 99, &noisy, FUEL).unwrap();
        assert!(rec.even_wins());
    }
}

#[test]
fn family_json_defaults() {
    let v = serde_json::json!({
        "n": 1,
        "indices": ["w", "w*2"],
        "group": {"rank": 1, "torsion": []},
        "entries": {
            "w": {"body": {"type": "piecewise", "pieces": [["w", 1]]}},
            "w*2": {"body": {"type": "piecewise", "pieces": [["w*2", 1]]}}
        }
    });
    let phi = IndexedFamily::from_json(&v).unwrap();
    assert!(is_coherent(&phi, CompareMode::Exact, FUEL).unwrap().is_yes());
    assert_eq!(IndexedFamily::from_json(&phi.to_json()).unwrap(), phi);
}
