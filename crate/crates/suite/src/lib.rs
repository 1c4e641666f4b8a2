//! Runner for numbered acceptance criteria: each criterion prints exactly one
//! `PASS` or `FAIL` line, and the process fails when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

/// Outcome of one criterion with the measured values behind it.
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Verdict {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

pub type Criterion = (u32, &'static str, fn() -> Result<Verdict, String>);

/// Runs the criteria whose number appears in `filter` (all when empty) and
/// returns the numbers that failed.
pub fn run_all(criteria: &[Criterion], filter: &[u32]) -> Vec<u32> {
    let mut failed = Vec::new();
    for &(id, name, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(Ok(v)) => v,
            Ok(Err(e)) => Verdict::new(false, format!("error: {e}")),
            Err(_) => Verdict::new(false, "panicked"),
        };
        println!(
            "{} criterion {id:>2} {name}: {} [{:.1} s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if !outcome.pass {
            failed.push(id);
        }
    }
    failed
}

/// Criterion numbers among the process arguments; flags are ignored.
pub fn filter_from_args() -> Vec<u32> {
    std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect()
}
