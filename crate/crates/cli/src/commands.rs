use std::collections::BTreeMap;
use std::path::Path;

use ordwalk_core::cech::{self, json_io, homotopy_check, les_segment, refinement_map, ShiftMap, DEFAULT_MAX_DEGREE};
use ordwalk_core::csystem::CSystem;
use ordwalk_core::families::{
    d_operator, extend_trivialization, is_coherent, is_trivialization, rho_family, stretch, subsets, tree_report, trivialize_with_top, verify_cocycle,
    ClubRule, FamilyVerdict, IndexedFamily,
};
use ordwalk_core::finfun::{element_to_json, CompareMode, OrdinalFunction, Transform, Verdict};
use ordwalk_core::game::{dagger, even_strategy_move, play_game, Adversary, GameHistory};
use ordwalk_core::groups::FgAbelianGroup;
use ordwalk_core::ordinal::Kind;
use ordwalk_core::sample;
use ordwalk_core::suite::{run_check, run_suite, Mutation, Outcome, SuiteConfig, SuiteProfile};
use ordwalk_core::walks::{coherence_profile, max_l, rho_with_fuel, trace, Profile, RhoKind};
use ordwalk_core::{Error, Ordinal, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{Ctx, Report};
use crate::{CechCmd, CohCmd, FunCmd, OrdCmd, Pair, SuiteArgs, WalkCmd};

fn parse_ord(s: &str) -> Result<Ordinal> {
    s.parse()
}

fn strs(xs: &[Ordinal]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn csystem(ctx: &mut Ctx, s: &str) -> Result<CSystem> {
    match s {
        "canonical" | "full" => CSystem::from_name(s),
        path => CSystem::from_json(&ctx.read_json(Path::new(path))?),
    }
}

fn group(s: Option<&str>) -> Result<FgAbelianGroup> {
    match s {
        None => Ok(FgAbelianGroup::z()),
        Some(t) => serde_json::from_str(t).map_err(|e| Error::invalid(format!("bad group '{t}': {e}"))),
    }
}

fn function(ctx: &mut Ctx, p: &Path) -> Result<OrdinalFunction> {
    OrdinalFunction::from_json(&ctx.read_json(p)?)
}

fn family(ctx: &mut Ctx, p: &Path) -> Result<IndexedFamily> {
    IndexedFamily::from_json(&ctx.read_json(p)?)
}

fn verdict_report(v: Verdict, result: Value) -> Report {
    let text = format!("{v:?}");
    match &v {
        Verdict::Yes => Report::pass(result, "yes"),
        Verdict::No { witness } => Report::with(Outcome::Fail, result, vec![serde_json::to_value(witness).unwrap()], format!("no: differs at {witness}")),
        Verdict::Unknown { .. } => Report::with(Outcome::Unknown, result, vec![], text),
    }
}

fn family_verdict_report(v: FamilyVerdict, result: Value) -> Report {
    let text = v.to_string();
    let w = serde_json::to_value(&v).unwrap();
    match v {
        FamilyVerdict::Yes => Report::pass(result, text),
        FamilyVerdict::No { .. } => Report::with(Outcome::Fail, result, vec![w], text),
        FamilyVerdict::Unknown { .. } => Report::with(Outcome::Unknown, result, vec![w], text),
    }
}

pub fn ord(_ctx: &mut Ctx, c: &OrdCmd) -> Result<Report> {
    match c {
        OrdCmd::Parse { x } | OrdCmd::Classify { x } => {
            let x = parse_ord(x)?;
            let (class, pred) = match x.classify() {
                Kind::Zero => ("zero", None),
                Kind::Successor(p) => ("successor", Some(p.to_string())),
                Kind::Limit => ("limit", None),
            };
            let text = match &pred {
                Some(p) => format!("{x}: successor of {p}"),
                None => format!("{x}: {class}"),
            };
            Ok(Report::pass(json!({"canonical": x.to_string(), "class": class, "pred": pred, "depth": x.depth()}), text))
        }
        OrdCmd::Compare { a, b } => {
            let (a, b) = (parse_ord(a)?, parse_ord(b)?);
            let r = match a.cmp(&b) {
                std::cmp::Ordering::Less => "less",
                std::cmp::Ordering::Equal => "equal",
                std::cmp::Ordering::Greater => "greater",
            };
            Ok(Report::pass(json!({"order": r}), r))
        }
        OrdCmd::Add { a, b } => {
            let s = parse_ord(a)?.checked_add(&parse_ord(b)?).ok_or(Error::Overflow)?;
            Ok(Report::pass(json!({"sum": s.to_string()}), s.to_string()))
        }
        OrdCmd::Fund { x, n } => {
            let y = parse_ord(x)?.fund_seq(*n)?;
            Ok(Report::pass(json!({"term": y.to_string()}), y.to_string()))
        }
    }
}

fn pair(ctx: &mut Ctx, p: &Pair) -> Result<(CSystem, Ordinal, Ordinal)> {
    Ok((csystem(ctx, &p.csystem)?, parse_ord(&p.alpha)?, parse_ord(&p.beta)?))
}

pub fn walk(ctx: &mut Ctx, c: &WalkCmd) -> Result<Report> {
    match c {
        WalkCmd::Trace(p) => {
            let (cs, a, b) = pair(ctx, p)?;
            let steps = strs(&trace(&cs, &a, &b, ctx.fuel)?);
            Ok(Report::pass(json!({"steps": steps}), steps.join(" -> ")))
        }
        WalkCmd::Rho { kind, pair: p } => {
            let k = RhoKind::try_from(*kind)?;
            let (cs, a, b) = pair(ctx, p)?;
            let v = rho_with_fuel(k, &cs, &a, &b, ctx.fuel)?;
            Ok(Report::pass(json!({"kind": kind, "value": v.to_string()}), v.to_string()))
        }
        WalkCmd::Maxl(p) => {
            let (cs, a, b) = pair(ctx, p)?;
            let v = max_l(&cs, &a, &b)?;
            Ok(Report::pass(json!({"max_l": v.to_string()}), v.to_string()))
        }
        WalkCmd::Ladder(p) => {
            let (cs, a, b) = pair(ctx, p)?;
            let (lo, otp, hi) = (cs.min_above(&b, &a)?, cs.otp_below(&b, &a)?, cs.max_below(&b, &a)?);
            let text = format!("min above {lo}, order type below {otp}, max below {hi}");
            Ok(Report::pass(json!({"min_above": lo.to_string(), "otp_below": otp.to_string(), "max_below": hi.to_string()}), text))
        }
        WalkCmd::Profile { kind, csystem: s, beta, gamma } => {
            let k = RhoKind::try_from(*kind)?;
            let cs = csystem(ctx, s)?;
            let p = coherence_profile(k, &cs, &parse_ord(beta)?, &parse_ord(gamma)?, ctx.fuel)?;
            let v = serde_json::to_value(&p).unwrap();
            Ok(match &p {
                Profile::FiniteDiff { points } if points.is_empty() => Report::pass(v, "no differences"),
                Profile::FiniteDiff { points } => Report::pass(v, format!("finite difference at {} points: {}", points.len(), strs(points).join(", "))),
                Profile::PiecewiseDiff { pieces } => {
                    let parts: Vec<String> = pieces.iter().map(|(iv, d)| format!("{iv}: {d}")).collect();
                    Report::pass(v, format!("piecewise difference: {}", parts.join("; ")))
                }
                Profile::InfiniteWitness { interval } => {
                    let text = format!("differs on the infinite interval {interval}");
                    Report::with(Outcome::Fail, v.clone(), vec![v], text)
                }
                Profile::FuelExhausted { spent } => Report::with(Outcome::Unknown, v, vec![], format!("fuel exhausted after {spent} steps")),
            })
        }
    }
}

pub fn fun(ctx: &mut Ctx, c: &FunCmd) -> Result<Report> {
    match c {
        FunCmd::Eval { input, at } => {
            let f = function(ctx, input)?;
            let v = f.eval(&parse_ord(at)?)?;
            let j = element_to_json(f.group(), &v);
            let text = j.as_str().map(String::from).unwrap_or_else(|| j.to_string());
            Ok(Report::pass(json!({"value": j}), text))
        }
        FunCmd::Combine { op, input, with, beta } => {
            let f = function(ctx, input)?;
            let out = match op.as_str() {
                "sum" => {
                    let p = with.as_ref().ok_or_else(|| Error::invalid("sum needs --with"))?;
                    f.add(&function(ctx, p)?)?
                }
                "negate" => f.neg(),
                "restrict" => f.restrict(&parse_ord(beta.as_deref().ok_or_else(|| Error::invalid("restrict needs --beta"))?)?)?,
                other => return Err(Error::invalid(format!("unknown operation '{other}'"))),
            };
            let v = out.to_json();
            Ok(Report::pass(v.clone(), v.to_string()))
        }
        FunCmd::Compare { mode, input, with } => {
            let mode: CompareMode = mode.parse()?;
            let (f, g) = (function(ctx, input)?, function(ctx, with)?);
            let v = f.compare(&g, mode, ctx.fuel)?;
            Ok(verdict_report(v.clone(), json!({"mode": mode.to_string(), "verdict": v})))
        }
        FunCmd::Transform { dir, input } => {
            let d: Transform = dir.parse()?;
            let out = function(ctx, input)?.transform(d)?.to_json();
            Ok(Report::pass(out.clone(), out.to_string()))
        }
    }
}

pub fn coh(ctx: &mut Ctx, c: &CohCmd) -> Result<Report> {
    match c {
        CohCmd::Check { input, mode } => {
            let mode: CompareMode = mode.parse()?;
            let phi = family(ctx, input)?;
            let v = is_coherent(&phi, mode, ctx.fuel)?;
            Ok(family_verdict_report(v.clone(), json!({"mode": mode.to_string(), "verdict": v})))
        }
        CohCmd::D { input } => {
            let out = d_operator(&family(ctx, input)?)?.to_json();
            Ok(Report::pass(out.clone(), out.to_string()))
        }
        CohCmd::Trivialize { input } => {
            let phi = family(ctx, input)?;
            let psi = trivialize_with_top(&phi, ctx.fuel)?;
            let check = is_trivialization(&psi, &phi, CompareMode::ModFinite, ctx.fuel)?;
            let fam = psi.to_json();
            Ok(family_verdict_report(check.clone(), json!({"family": fam, "check": check})))
        }
        CohCmd::Extend { input, psi, xi } => {
            let phi = family(ctx, input)?;
            let given = family(ctx, psi)?;
            let ext = extend_trivialization(&phi, &given, &parse_ord(xi)?, ctx.fuel)?;
            let check = is_trivialization(&ext, &phi, CompareMode::ModFinite, ctx.fuel)?;
            Ok(family_verdict_report(check.clone(), json!({"family": ext.to_json(), "check": check})))
        }
        CohCmd::Stretch { input, rule, delta } => {
            let phi = family(ctx, input)?;
            let rule = match rule {
                Some(p) => serde_json::from_value(ctx.read_json(p)?).map_err(|e| Error::invalid(format!("bad club rule: {e}")))?,
                None => ClubRule::identity(),
            };
            let out = stretch(&phi, &rule, &parse_ord(delta)?)?.to_json();
            Ok(Report::pass(out.clone(), out.to_string()))
        }
        CohCmd::Game { n, stages, group: g, noise, input } => {
            if let Some(p) = input {
                let mut h = GameHistory::from_json(&ctx.read_json(p)?)?;
                if !h.is_even_turn() {
                    return Err(Error::pre("the saved history ends on Even's move; Odd plays next"));
                }
                let mv = even_strategy_move(&h, ctx.fuel)?;
                h.push(mv.clone())?;
                let v = dagger(&h, ctx.fuel)?;
                return Ok(family_verdict_report(v.clone(), json!({"move": mv.to_json(), "dagger": v})));
            }
            let g = group(g.as_deref())?;
            let adv = Adversary { noise: *noise, ..Adversary::default() };
            let rec = play_game(*n, &g, *stages, ctx.seed, &adv, ctx.fuel)?;
            // noisy adversaries only promise coherence mod finite
            let ok = rec.even_wins() && (*noise || rec.exactly_coherent());
            let bad: Vec<Value> = rec
                .stages
                .iter()
                .filter(|s| s.dagger.as_ref().is_some_and(|d| !d.is_yes()) || (!*noise && !s.coherent.is_yes()))
                .map(|s| serde_json::to_value(s).unwrap())
                .collect();
            let result = json!({
                "n": n,
                "group": g.to_string(),
                "tops": strs(&rec.history.tops()),
                "stages": rec.stages,
                "history": rec.history.to_json(),
            });
            let text = format!("{} stages, even-stage condition {}, exact coherence {}", rec.stages.len(), if rec.even_wins() { "kept" } else { "broken" }, if rec.exactly_coherent() { "kept" } else { "broken" });
            Ok(Report::with(if ok { Outcome::Pass } else { Outcome::Fail }, result, bad, text))
        }
        CohCmd::Tree { input, probe, random } => {
            let phi = family(ctx, input)?;
            let mut probes: Vec<Ordinal> = probe.iter().map(|s| parse_ord(s)).collect::<Result<_>>()?;
            if let Some(top) = phi.top().filter(|t| !t.is_zero()) {
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                probes.extend(sample::distinct_below(&mut rng, top, *random, 4));
            }
            probes.sort();
            probes.dedup();
            let levels = tree_report(&phi, &probes)?;
            let text = levels.iter().map(|l| format!("{}: {}", l.level, l.nodes)).collect::<Vec<_>>().join("\n");
            Ok(Report::pass(json!({"levels": levels, "probes": strs(&probes)}), text))
        }
        CohCmd::Rho { kind, csystem: s, indices, group: g } => {
            let k = RhoKind::try_from(*kind)?;
            let cs = csystem(ctx, s)?;
            let g = group(g.as_deref())?;
            let idx: Vec<Ordinal> = indices.iter().map(|s| parse_ord(s)).collect::<Result<_>>()?;
            let phi = rho_family(k, &cs, &idx, &g, &g.generator())?;
            let v = verify_cocycle(&phi, ctx.fuel)?;
            Ok(family_verdict_report(v.clone(), json!({"family": phi.to_json(), "cocycle": v})))
        }
    }
}

fn default_presheaf(doc: &Value, key: &str) -> Value {
    doc.get(key).cloned().unwrap_or_else(|| json!({"constant": {"rank": 1, "torsion": []}}))
}

fn doc_usize(doc: &Value, key: &str) -> Option<usize> {
    doc.get(key).and_then(Value::as_u64).map(|x| x as usize)
}

pub fn cech(ctx: &mut Ctx, c: &CechCmd) -> Result<Report> {
    match c {
        CechCmd::Complex { input, max_degree } => {
            let doc = ctx.read_json(input)?;
            let cover = json_io::covers(&doc, &["cover"])?.remove(0);
            let p = json_io::presheaf(cover.space(), &default_presheaf(&doc, "presheaf"))?;
            let md = max_degree.or(doc_usize(&doc, "max_degree")).unwrap_or(DEFAULT_MAX_DEGREE);
            let cx = cech::build_complex(&cover, &p, md)?;
            let text = cx.groups.iter().enumerate().map(|(j, g)| format!("L^{j} = {g}")).collect::<Vec<_>>().join("\n");
            Ok(Report::pass(cx.to_json(), text))
        }
        CechCmd::Cohomology { input, degree } => {
            let doc = ctx.read_json(input)?;
            let cover = json_io::covers(&doc, &["cover"])?.remove(0);
            let p = json_io::presheaf(cover.space(), &default_presheaf(&doc, "presheaf"))?;
            let degrees: Vec<usize> = match degree.or(doc_usize(&doc, "degree")) {
                Some(n) => vec![n],
                None => (0..DEFAULT_MAX_DEGREE).collect(),
            };
            let cx = cech::build_complex(&cover, &p, degrees.iter().max().unwrap() + 1)?;
            let mut groups = Vec::new();
            let mut lines = Vec::new();
            for &n in &degrees {
                let h = cech::cohomology(&cx, n)?;
                lines.push(format!("H^{n} = {h}"));
                groups.push(json!({"degree": n, "group": h.to_string(), "rank": h.rank, "torsion": h.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>()}));
            }
            Ok(Report::pass(json!({"cohomology": groups}), lines.join("\n")))
        }
        CechCmd::Refine { input, max_degree } => {
            let doc = ctx.read_json(input)?;
            let covers = json_io::covers(&doc, &["source", "target"])?;
            let p = json_io::presheaf(covers[0].space(), &default_presheaf(&doc, "presheaf"))?;
            let r: BTreeMap<String, String> =
                serde_json::from_value(doc.get("refinement").cloned().unwrap_or_default()).map_err(|e| Error::invalid(format!("bad 'refinement': {e}")))?;
            let md = max_degree.or(doc_usize(&doc, "max_degree")).unwrap_or(3);
            let rep = refinement_map(&covers[0], &covers[1], &r, &p, md)?;
            let text = rep.induced.iter().enumerate().map(|(n, h)| format!("H^{n}: {}", h.matrix.to_rows().iter().map(|r| format!("{r:?}")).collect::<Vec<_>>().join(" "))).collect::<Vec<_>>().join("\n");
            Ok(Report::pass(rep.to_json(), text))
        }
        CechCmd::Les { input, degree } => {
            let doc = ctx.read_json(input)?;
            let cover = json_io::covers(&doc, &["cover"])?.remove(0);
            let sp = cover.space();
            let pres = |k: &str| json_io::presheaf(sp, doc.get(k).ok_or_else(|| Error::invalid(format!("missing '{k}'")))?);
            let (sub, mid, quo) = (pres("sub")?, pres("middle")?, pres("quotient")?);
            let hom = |k: &str, a, b| json_io::presheaf_hom(a, b, doc.get(k).ok_or_else(|| Error::invalid(format!("missing '{k}'")))?);
            let inj = hom("inj", &sub, &mid)?;
            let surj = hom("surj", &mid, &quo)?;
            let n = degree.or(doc_usize(&doc, "degree")).unwrap_or(0);
            let rep = les_segment(&cover, &inj, &surj, n).map_err(|e| match e {
                Error::NotExact(m) => Error::invalid(format!("coefficient sequence is not short exact: {m}")),
                other => other,
            })?;
            let text = format!("degree {n}: connecting map {}, exact {}", if rep.connecting.is_zero() { "zero" } else { "nonzero" }, rep.is_exact());
            let v = rep.to_json();
            Ok(if rep.is_exact() { Report::pass(v, text) } else { Report::with(Outcome::Fail, v.clone(), vec![v], text) })
        }
        CechCmd::Homotopy { input, degree } => {
            let doc = ctx.read_json(input)?;
            let cs: Vec<Ordinal> = serde_json::from_value::<Vec<String>>(doc.get("c").cloned().unwrap_or_default())
                .map_err(|e| Error::invalid(format!("bad 'c': {e}")))?
                .iter()
                .map(|s| parse_ord(s))
                .collect::<Result<_>>()?;
            let m = match doc.get("shift") {
                Some(v) => {
                    let raw: BTreeMap<String, String> = serde_json::from_value(v.clone()).map_err(|e| Error::invalid(format!("bad 'shift': {e}")))?;
                    ShiftMap::new(&cs, raw.iter().map(|(a, b)| Ok((parse_ord(a)?, parse_ord(b)?))).collect::<Result<_>>()?)?
                }
                None => ShiftMap::successor(&cs)?,
            };
            let f = IndexedFamily::from_json(doc.get("cochain").ok_or_else(|| Error::invalid("missing 'cochain'"))?)?;
            let k = degree.or(doc_usize(&doc, "degree")).unwrap_or(f.n().saturating_sub(1));
            let tuples: Vec<Vec<Ordinal>> = match doc.get("tuple") {
                Some(t) => vec![serde_json::from_value::<Vec<String>>(t.clone()).map_err(|e| Error::invalid(e.to_string()))?.iter().map(|s| parse_ord(s)).collect::<Result<_>>()?],
                None => {
                    let dom: Vec<Ordinal> = m.table().keys().cloned().collect();
                    subsets(&dom, k + 1)
                }
            };
            let mut reports = Vec::new();
            let mut failing = Vec::new();
            for t in &tuples {
                let rep = homotopy_check(&f, &m, k, t, ctx.fuel)?;
                if !rep.holds() {
                    failing.push(rep.to_json());
                }
                reports.push(rep.to_json());
            }
            let text = format!("{} of {} tuples satisfy the homotopy identity in degree {k}", tuples.len() - failing.len(), tuples.len());
            let outcome = if failing.is_empty() { Outcome::Pass } else { Outcome::Fail };
            Ok(Report::with(outcome, json!({"degree": k, "tuples": reports}), failing, text))
        }
    }
}

pub fn suite(ctx: &mut Ctx, a: &SuiteArgs) -> Result<Report> {
    let profile: SuiteProfile = a.profile.parse()?;
    let mut cfg = SuiteConfig::new(ctx.seed, profile);
    if let Some(s) = &a.flip_face {
        let parts: Vec<usize> = s.split(',').map(|x| x.trim().parse().map_err(|_| Error::invalid(format!("bad --flip-face '{s}'")))).collect::<Result<_>>()?;
        let [degree, face] = parts[..] else { return Err(Error::invalid("--flip-face takes DEGREE,FACE")) };
        cfg.mutation = Some(Mutation::FlipFace { degree, face });
    }
    let checks = match &a.check {
        Some(id) => vec![run_check(id, &cfg)?],
        None => run_suite(&cfg).checks,
    };
    let outcome = checks.iter().map(|c| c.outcome).max().unwrap_or(Outcome::Pass);
    let text = checks
        .iter()
        .map(|c| format!("{} {} ({}/{} cases, {} unknown)", format!("{:?}", c.outcome).to_uppercase(), c.id, c.passed, c.cases, c.unknown))
        .collect::<Vec<_>>()
        .join("\n");
    let mut r = Report::with(outcome, json!({"profile": profile, "mutation": cfg.mutation, "checks": checks}), vec![], text);
    r.exit_code = Some(checks.iter().map(|c| c.outcome.exit_code()).max().unwrap_or(0));
    Ok(r)
}
