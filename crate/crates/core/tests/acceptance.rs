//! Acceptance criteria 1-9, one PASS/FAIL line each. Every criterion is
//! evaluated on several seeds and passes only if all of its checks pass on
//! all of them.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use gaudin_core::verify::{run, Bound, Check, Suite};

const SEEDS: [u64; 5] = [1, 2, 3, 7, 11];

const CRITERIA: [(u8, &str, u64); 9] = [
    (1, "Weierstrass identities, quasi-periodicity, Legendre, dual algorithm", 5),
    (2, "rational involutivity, sl2 and sl3, N = 3", 10),
    (3, "rational dynamics: drifts, step halving, dense ODE oracle", 30),
    (4, "zero curvature on plaquettes", 10),
    (5, "elliptic structure: periodicity, residues, gluing, retrivialization", 15),
    (6, "elliptic involutivity, flow commutativity, Lax residual", 60),
    (7, "path independence of the on-shell action", 20),
    (8, "univariational toys: Noether, moment, gauge flatness", 5),
    (9, "gradient Taylor orders", 10),
];

/// Criteria exercised by each suite.
fn suite_criteria(s: Suite) -> &'static [u8] {
    match s {
        Suite::Weierstrass => &[1],
        Suite::Rational => &[2, 3, 9],
        Suite::Elliptic => &[5, 6, 9],
        Suite::Univar => &[8],
        Suite::Multiform => &[4, 7],
        Suite::All => &[],
    }
}

fn describe(c: &Check) -> String {
    let op = if c.bound == Bound::Max { "<=" } else { ">=" };
    match (c.measured, &c.error) {
        (Some(v), _) => format!("{}: {v:.3e} (need {op} {:e})", c.name, c.tolerance),
        (None, Some(e)) => format!("{}: error {e}", c.name),
        (None, None) => format!("{}: no measurement", c.name),
    }
}

#[test]
fn acceptance() {
    let suites = [Suite::Weierstrass, Suite::Rational, Suite::Elliptic, Suite::Univar, Suite::Multiform];
    let mut checks: BTreeMap<u8, Vec<(u64, Check)>> = BTreeMap::new();
    let mut time: BTreeMap<u8, Duration> = BTreeMap::new();
    let mut total = Duration::ZERO;
    for &seed in &SEEDS {
        for &s in &suites {
            let start = Instant::now();
            let report = run(s, seed);
            let dt = start.elapsed();
            total += dt;
            // a suite's time is charged to every criterion it exercises
            for &c in suite_criteria(s) {
                let slot = time.entry(c).or_default();
                *slot = (*slot).max(dt);
            }
            for c in report.checks {
                checks.entry(c.criterion).or_default().push((seed, c));
            }
        }
    }

    let mut failed = Vec::new();
    for (id, title, budget) in CRITERIA {
        let rows = checks.get(&id).map(Vec::as_slice).unwrap_or(&[]);
        let bad: Vec<&(u64, Check)> = rows.iter().filter(|(_, c)| !c.passed).collect();
        let elapsed = time.get(&id).copied().unwrap_or_default();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let pass = !rows.is_empty() && bad.is_empty() && in_budget;
        println!(
            "criterion {id}: {}  {title}  [{} checks over {} seeds, {:.2} s per seed, budget {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            rows.len() / SEEDS.len(),
            SEEDS.len(),
            elapsed.as_secs_f64(),
        );
        for (seed, c) in &bad {
            println!("    seed {seed}: {}", describe(c));
        }
        if !in_budget {
            println!("    over the runtime budget");
        }
        if !pass {
            failed.push(id);
        }
    }
    println!(
        "verify all: {:.2} s per seed (budget 120 s)",
        total.as_secs_f64() / SEEDS.len() as f64
    );
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
