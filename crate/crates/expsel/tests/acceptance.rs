//! Acceptance suite: runs every criterion at its pinned tolerance and prints
//! one pass/fail line per criterion. `cargo test --test acceptance -- --nocapture`
//! shows the lines; the same functions back the `selftest` CLI subcommand.

use expsel::selftest;

#[test]
fn acceptance_criteria() {
    let (report, passed) = selftest::full_report(1);
    print!("{report}");
    assert!(passed, "acceptance criteria failed:\n{report}");
}

#[test]
fn criterion_budgets_hold() {
    // Each criterion carries its own runtime budget; `full_report` folds the
    // budget check into the pass flag, so here we only re-assert that the
    // measured times stay inside the stated limits on this machine.
    let results = selftest::run_core(1);
    let budgets_ms = [1000.0, 1000.0, 10_000.0, 30_000.0, 30_000.0, 10_000.0, 1000.0, 10_000.0, 1000.0];
    for (r, budget) in results.iter().zip(budgets_ms.iter()) {
        assert!(r.passed, "{}", r.line());
        assert!(
            r.elapsed_ms < *budget,
            "{} took {:.1} ms, budget {budget} ms",
            r.name,
            r.elapsed_ms
        );
    }
}
