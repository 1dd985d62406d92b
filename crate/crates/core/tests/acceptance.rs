//! The thirteen acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p ordwalk-core --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use ordwalk_core::suite::{run_check, run_suite, Outcome, SuiteConfig, SuiteProfile, CHECKS};

const SEED: u64 = 0;

/// Wall-clock limits stated with some criteria.
fn limit(id: &str) -> Option<Duration> {
    let s = match id {
        "01-cochain-identity" | "06-walk-laws" => 10,
        "04-top-trivialization" => 30,
        "09-homotopy-identities" => 20,
        _ => return None,
    };
    Some(Duration::from_secs(s))
}

#[test]
fn acceptance() {
    let cfg = SuiteConfig::new(SEED, SuiteProfile::Quick);
    let mut failures = Vec::new();
    for (id, property) in CHECKS.iter().take(12) {
        let start = Instant::now();
        let r = run_check(id, &cfg).unwrap();
        let took = start.elapsed();
        let in_time = limit(id).is_none_or(|l| took <= l);
        let ok = r.outcome == Outcome::Pass && in_time;
        println!(
            "{} {id}: {property} ({}/{} cases, {} unknown, {:.2}s{})",
            if ok { "PASS" } else { "FAIL" },
            r.passed,
            r.cases,
            r.unknown,
            took.as_secs_f64(),
            limit(id).map(|l| format!(" of {}s", l.as_secs())).unwrap_or_default()
        );
        if !ok {
            failures.push(format!("{id}: {}", serde_json::to_string(&r.witnesses).unwrap()));
        }
    }
    let (id, property) = CHECKS[12];
    let a = run_suite(&cfg).render();
    let b = run_suite(&cfg).render();
    let inner = serde_json::from_str::<serde_json::Value>(&a).unwrap()["checks"][12]["outcome"] == "pass";
    let ok = a == b && inner;
    println!("{} {id}: {property} ({} bytes)", if ok { "PASS" } else { "FAIL" }, a.len());
    if !ok {
        failures.push(id.to_string());
    }
    assert!(failures.is_empty(), "failed criteria: {failures:#?}");
}
