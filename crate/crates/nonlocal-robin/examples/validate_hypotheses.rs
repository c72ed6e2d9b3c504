//! Hypothesis validation: every standing assumption is checked by dense
//! sampling and reported with a witness on failure.
//!
//! ```bash
//! cargo run --release --example validate_hypotheses
//! ```

use nonlocal_robin::config::{Problem, ProblemSpec};
use nonlocal_robin::exponents::validate_problem;

fn print_report(label: &str, prob: &Problem) {
    println!("== {label} ==");
    let report = validate_problem(prob);
    for check in &report.checks {
        print!("  [{:?}] {}", check.verdict, check.name);
        if let Some(w) = &check.witness {
            print!("  (witness at {:?}, value {:.6e})", w.location, w.value);
        }
        println!();
    }
    println!("  all pass: {}\n", report.all_pass());
}

fn main() {
    // the shipped 1-d reference configuration
    let prob = Problem::preset_1d(32).unwrap();
    print_report("reference configuration", &prob);

    // breaking (S): a fractional order outside (0,1)
    let mut bad_s = ProblemSpec::preset_1d(32);
    bad_s.s = 1.2;
    print_report("s = 1.2", &Problem::resolve(bad_s).unwrap());

    // breaking (P): scaling exactly to the critical line s·p⁺ = N
    let mut crit = ProblemSpec::preset_1d(32);
    crit.s = 0.5;
    print_report("s = 0.5, p ≡ 2 (s·p⁺ = N)", &Problem::resolve(crit).unwrap());
}
