use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;
use ordwalk_core::cech::*;
use ordwalk_core::families::{alternating_sum, subsets, IndexedFamily};
use ordwalk_core::groups::{CyclicSum, FgAbelianGroup, GroupHom, IntMatrix};
use ordwalk_core::ordinal::Ordinal;
use ordwalk_core::sample;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

/// Z (or Z/m) on every label with restriction by `2^(|U| - |V|)`.
fn weighted(space: &Space, modulus: u64) -> PresheafModel {
    let g = if modulus == 0 { FgAbelianGroup::z() } else { FgAbelianGroup::cyclic(modulus) };
    let size = |l: usize| if l == space.empty() { 0 } else { space.name(l).split(',').count() };
    let k = space.labels().len();
    let sections: Vec<FgAbelianGroup> = (0..k).map(|l| if l == space.empty() { FgAbelianGroup::trivial() } else { g.clone() }).collect();
    let mut restr = BTreeMap::new();
    for u in 0..k {
        for v in 0..k {
            if u != v && v != space.empty() && space.le(v, u) {
                let f = BigInt::from(2u32).pow((size(u) - size(v)) as u32);
                let m = IntMatrix::from_rows(&[vec![f]]).unwrap();
                restr.insert((u, v), GroupHom::new(sections[u].cyclic_sum(), sections[v].cyclic_sum(), m).unwrap());
            }
        }
    }
    PresheafModel::new(space.clone(), sections, restr).unwrap()
}

fn elements(g: &CyclicSum) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![]];
    for n in &g.orders {
        let n: i64 = n.try_into().unwrap();
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |v| {
                    let mut q = p.clone();
                    q.push(BigInt::from(v));
                    q
                })
            })
            .collect();
    }
    out
}

/// `|ker d^n| / |im d^(n-1)|` by enumeration.
fn brute_order(c: &CochainComplexModel, n: usize) -> usize {
    let ker = elements(&c.sums[n]).into_iter().filter(|x| c.differentials[n].apply(x).iter().all(Zero::is_zero)).count();
    let im: BTreeSet<Vec<BigInt>> = if n == 0 {
        BTreeSet::from([vec![BigInt::zero(); c.sums[0].ngens()]])
    } else {
        elements(&c.sums[n - 1]).iter().map(|x| c.differentials[n - 1].apply(x)).collect()
    };
    ker / im.len()
}

fn rank(m: &IntMatrix) -> usize {
    ordwalk_core::groups::smith_normal_form(m).rank()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finite_coefficients_match_enumeration(seed in any::<u64>(), k in 2usize..=4, modulus in 2u64..=3, twist in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let covers = CoverModel::from_point_sets(&[random_sets(&mut rng, k, 4, "U")]).unwrap();
        let c = &covers[0];
        let p = if twist { weighted(c.space(), modulus) } else { PresheafModel::constant(c.space(), &FgAbelianGroup::cyclic(modulus)) };
        let cx = build_complex(c, &p, k).unwrap();
        for n in 0..k {
            if cx.sums[n].ngens() > 12 || (n > 0 && cx.sums[n - 1].ngens() > 12) {
                continue;
            }
            let h = cohomology(&cx, n).unwrap();
            prop_assert_eq!(h.rank, 0);
            let order: BigInt = h.torsion.iter().product();
            prop_assert_eq!(order, BigInt::from(brute_order(&cx, n)));
        }
    }

    #[test]
    fn integer_ranks_satisfy_euler(seed in any::<u64>(), k in 1usize..=5, twist in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let covers = CoverModel::from_point_sets(&[random_sets(&mut rng, k, 5, "U")]).unwrap();
        let c = &covers[0];
        let p = if twist { weighted(c.space(), 0) } else { PresheafModel::constant(c.space(), &FgAbelianGroup::z()) };
        let cx = build_complex(c, &p, k).unwrap();
        let mut chi_h = 0i64;
        let mut chi_l = 0i64;
        for n in 0..k {
            let h = cohomology(&cx, n).unwrap();
            let expected = cx.sums[n].ngens() - rank(&cx.differentials[n].matrix) - if n == 0 { 0 } else { rank(&cx.differentials[n - 1].matrix) };
            prop_assert_eq!(h.rank, expected);
            let s = if n % 2 == 0 { 1 } else { -1 };
            chi_h += s * h.rank as i64;
            chi_l += s * cx.sums[n].ngens() as i64;
        }
        prop_assert_eq!(chi_h, chi_l);
        prop_assert!(check_complex(&cx).is_ok());
    }

    #[test]
    fn refining_maps_induce_the_same_maps(seed in any::<u64>(), twist in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_sets(&mut rng, 3, 5, "V");
        // each W set sits inside one or two V sets
        let mut w = Vec::new();
        for i in 0..4 {
            let a = rng.gen_range(0..3);
            let b = rng.gen_range(0..3);
            let base: BTreeSet<String> = v[a].1.intersection(&v[b].1).cloned().collect();
            let base = if base.is_empty() { v[a].1.clone() } else { base };
            let s: BTreeSet<String> = base.iter().filter(|_| rng.gen_ratio(2, 3)).cloned().collect();
            let s = if s.is_empty() { base } else { s };
            w.push((format!("W{i}"), s));
        }
        let covers = CoverModel::from_point_sets(&[v.clone(), w.clone()]).unwrap();
        let p = if twist { weighted(covers[0].space(), 0) } else { PresheafModel::constant(covers[0].space(), &FgAbelianGroup::z()) };
        let choices: Vec<Vec<String>> = w.iter().map(|(_, s)| v.iter().filter(|(_, t)| s.is_subset(t)).map(|(n, _)| n.clone()).collect()).collect();
        let pick = |rng: &mut ChaCha8Rng| -> BTreeMap<String, String> {
            w.iter().zip(&choices).map(|((n, _), c)| (n.clone(), c[rng.gen_range(0..c.len())].clone())).collect()
        };
        let r1 = pick(&mut rng);
        let r2 = pick(&mut rng);
        let a = refinement_map(&covers[0], &covers[1], &r1, &p, 3).unwrap();
        let b = refinement_map(&covers[0], &covers[1], &r2, &p, 3).unwrap();
        prop_assert_eq!(a.induced, b.induced);
    }

    #[test]
    fn redundant_sets_do_not_change_cohomology(seed in any::<u64>(), twist in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_sets(&mut rng, 3, 5, "V");
        let mut w = v.clone();
        let extra: BTreeSet<String> = v[0].1.iter().take(1).cloned().collect();
        w.push(("X".into(), extra));
        let covers = CoverModel::from_point_sets(&[v.clone(), w.clone()]).unwrap();
        let p = if twist { weighted(covers[0].space(), 0) } else { PresheafModel::constant(covers[0].space(), &FgAbelianGroup::z()) };
        let mut r: BTreeMap<String, String> = v.iter().map(|(n, _)| (n.clone(), n.clone())).collect();
        r.insert("X".into(), v[0].0.clone());
        let rep = refinement_map(&covers[0], &covers[1], &r, &p, 3).unwrap();
        prop_assert!(rep.induced[0].is_isomorphism().unwrap());
        if !twist {
            for h in &rep.induced {
                prop_assert!(h.is_isomorphism().unwrap());
            }
        }
    }

    #[test]
    fn multiplication_sequences_are_exact(seed in any::<u64>(), k in 2usize..=4, m in 2u64..=4, twist in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let covers = CoverModel::from_point_sets(&[random_sets(&mut rng, k, 4, "U")]).unwrap();
        let c = &covers[0];
        let (pz, pm) = if twist {
            (weighted(c.space(), 0), weighted(c.space(), m))
        } else {
            (PresheafModel::constant(c.space(), &FgAbelianGroup::z()), PresheafModel::constant(c.space(), &FgAbelianGroup::cyclic(m)))
        };
        let inj = PresheafHom::uniform(pz.clone(), pz.clone(), &IntMatrix::from_rows(&[vec![m as i64]]).unwrap()).unwrap();
        let surj = PresheafHom::uniform(pz.clone(), pm, &IntMatrix::from_rows(&[vec![1]]).unwrap()).unwrap();
        for n in 0..k.min(3) {
            let rep = les_segment(c, &inj, &surj, n).unwrap();
            prop_assert!(rep.is_exact(), "{:?}", rep.exact_at);
        }
    }

    #[test]
    fn prism_identity_holds(seed in any::<u64>(), k in 0usize..=2, size in 3usize..=6, finite in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cs = BTreeSet::new();
        while cs.len() < size {
            let x = sample::ordinal_in(&mut rng, &Ordinal::omega(), &Ordinal::omega_pow(Ordinal::nat(3)), 3);
            let (lam, _) = x.limit_part();
            if !lam.is_zero() {
                cs.insert(lam);
            }
        }
        let c: Vec<Ordinal> = cs.into_iter().collect();
        let m = ShiftMap::successor(&c).unwrap();
        let g = FgAbelianGroup::z();
        let entries = subsets(&c, k + 1).into_iter().map(|t| {
            let f = if finite {
                sample::finite_support(&mut rng, &t[0], &g, 4, 5)
            } else {
                sample::step_function(&mut rng, &t[0], &g, 4, 5)
            };
            (t, f)
        }).collect();
        let f = IndexedFamily::new(k + 1, c.clone(), g, entries).unwrap();
        let domain: Vec<Ordinal> = c[..c.len() - 1].to_vec();
        for t in subsets(&domain, k + 1) {
            let rep = homotopy_check(&f, &m, k, &t, 1000).unwrap();
            prop_assert!(rep.holds(), "{:?}", rep.first_discrepancy);
            prop_assert_eq!(rep.finite_support, finite);
            if k == 0 {
                let d0 = alternating_sum(&f, &[t[0].clone(), m.apply(&t[0]).unwrap()]).unwrap();
                prop_assert!(d0.compare(&rep.lhs, ordwalk_core::finfun::CompareMode::Exact, 10).unwrap().is_yes());
            }
        }
    }
}

fn named(sets: &[(&str, &[&str])]) -> Sets {
    sets.iter().map(|(n, p)| (n.to_string(), p.iter().map(|s| s.to_string()).collect())).collect()
}

#[test]
fn even_integers_in_the_integers() {
    for sets in [named(&[("U", &["a", "b"]), ("V", &["b", "c"])]), named(&[("U", &["a", "b"]), ("V", &["b", "c"]), ("W", &["c", "a"])])] {
        let c = CoverModel::from_point_sets(&[sets]).unwrap().remove(0);
        let z = PresheafModel::constant(c.space(), &FgAbelianGroup::z());
        let f = PresheafModel::constant(c.space(), &FgAbelianGroup::cyclic(2));
        let inj = PresheafHom::uniform(z.clone(), z.clone(), &IntMatrix::from_rows(&[vec![2]]).unwrap()).unwrap();
        let surj = PresheafHom::uniform(z.clone(), f, &IntMatrix::from_rows(&[vec![1]]).unwrap()).unwrap();
        let rep = les_segment(&c, &inj, &surj, 0).unwrap();
        assert!(rep.is_exact());
        assert_eq!(rep.groups[2], FgAbelianGroup::cyclic(2));
        assert!(rep.connecting.is_zero());
    }
}

#[test]
fn trivial_quotient_and_split_sequences_have_zero_connecting_map() {
    let c = CoverModel::from_point_sets(&[named(&[("U", &["a", "b"]), ("V", &["b", "c"]), ("W", &["c", "a"])])]).unwrap().remove(0);
    let z = PresheafModel::constant(c.space(), &FgAbelianGroup::z());
    let zero = PresheafModel::constant(c.space(), &FgAbelianGroup::trivial());
    let id = PresheafHom::uniform(z.clone(), z.clone(), &IntMatrix::from_rows(&[vec![1]]).unwrap()).unwrap();
    let to_zero = PresheafHom::uniform(z.clone(), zero, &IntMatrix::zeros(0, 1)).unwrap();
    for n in 0..2 {
        let rep = les_segment(&c, &id, &to_zero, n).unwrap();
        assert!(rep.is_exact() && rep.connecting.is_zero());
    }
    let sum = PresheafModel::constant(c.space(), &FgAbelianGroup::new(1, vec![BigInt::from(2)]).unwrap());
    let f = PresheafModel::constant(c.space(), &FgAbelianGroup::cyclic(2));
    let inj = PresheafHom::uniform(z, sum.clone(), &IntMatrix::from_rows(&[vec![1], vec![0]]).unwrap()).unwrap();
    let surj = PresheafHom::uniform(sum, f, &IntMatrix::from_rows(&[vec![0, 1]]).unwrap()).unwrap();
    for n in 0..2 {
        let rep = les_segment(&c, &inj, &surj, n).unwrap();
        assert!(rep.is_exact() && rep.connecting.is_zero());
    }
}

#[test]
fn non_exact_coefficients_are_rejected() {
    let c = CoverModel::from_point_sets(&[named(&[("U", &["a"])])]).unwrap().remove(0);
    let z = PresheafModel::constant(c.space(), &FgAbelianGroup::z());
    let f = PresheafModel::constant(c.space(), &FgAbelianGroup::cyclic(2));
    let inj = PresheafHom::uniform(z.clone(), z.clone(), &IntMatrix::from_rows(&[vec![4]]).unwrap()).unwrap();
    let surj = PresheafHom::uniform(z, f, &IntMatrix::from_rows(&[vec![1]]).unwrap()).unwrap();
    assert!(les_segment(&c, &inj, &surj, 0).is_err());
}

#[test]
fn identity_refinement_is_the_identity() {
    let v = named(&[("U", &["a", "b"]), ("V", &["b", "c"])]);
    let covers = CoverModel::from_point_sets(&[v.clone(), v]).unwrap();
    let p = PresheafModel::constant(covers[0].space(), &FgAbelianGroup::z());
    let r = BTreeMap::from([("U".to_string(), "U".to_string()), ("V".to_string(), "V".to_string())]);
    let rep = refinement_map(&covers[0], &covers[1], &r, &p, 2).unwrap();
    for h in &rep.chain_map {
        assert_eq!(*h, GroupHom::identity(h.domain.clone()));
    }
    let bad = BTreeMap::from([("U".to_string(), "V".to_string()), ("V".to_string(), "V".to_string())]);
    assert!(refinement_map(&covers[0], &covers[1], &bad, &p, 2).is_err());
}

#[test]
fn zero_cochain_and_bad_shifts() {
    let c: Vec<Ordinal> = ["w", "w*2", "w^2"].iter().map(|s| s.parse().unwrap()).collect();
    let m = ShiftMap::successor(&c).unwrap();
    let f = IndexedFamily::zero(2, c.clone(), FgAbelianGroup::z()).unwrap();
    let rep = homotopy_check(&f, &m, 1, &c[..2], 10).unwrap();
    assert!(rep.holds());
    assert!(rep.lhs.require_step().unwrap().is_zero());
    assert!(ShiftMap::new(&c, BTreeMap::from([(c[1].clone(), c[0].clone())])).is_err());
    assert!(ShiftMap::new(&c, BTreeMap::from([(c[0].clone(), c[2].clone()), (c[1].clone(), c[2].clone())])).is_err());
    let succ: Vec<Ordinal> = vec!["w".parse().unwrap(), "w+1".parse().unwrap()];
    assert!(ShiftMap::successor(&succ).is_err());
}

#[test]
fn abstract_cover_from_json() {
    let doc = serde_json::json!({
        "space": {"labels": ["U", "V", "UV", "0"], "empty": "0", "subsets": [["UV", "U"], ["UV", "V"]]},
        "cover": {"indices": ["U", "V"], "intersections": {"U": "U", "V": "V", "U|V": "UV"}},
        "presheaf": {"sections": {"U": {"rank": 1, "torsion": []}, "V": {"rank": 1, "torsion": []}, "UV": {"rank": 0, "torsion": [2]}},
                     "restrictions": [{"from": "U", "to": "UV", "matrix": [[1]]}, {"from": "V", "to": "UV", "matrix": [[1]]}]}
    });
    let c = json_io::covers(&doc, &["cover"]).unwrap().remove(0);
    let p = json_io::presheaf(c.space(), &doc["presheaf"]).unwrap();
    let cx = build_complex(&c, &p, 2).unwrap();
    // d0: Z^2 -> Z/2, (x, y) -> y - x; kernel {x = y mod 2}, image everything
    assert_eq!(cohomology(&cx, 0).unwrap(), FgAbelianGroup::free(2));
    assert!(cohomology(&cx, 1).unwrap().is_trivial());
}
