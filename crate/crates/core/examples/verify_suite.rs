//! Runs one pinned-seed verification suite and prints its checks.
//!
//! `cargo run --release --example verify_suite -- fbm`

use fbm_ergodics::verify::{verify, Suite};

fn main() -> fbm_ergodics::Result<()> {
    let suite: Suite = std::env::args().nth(1).unwrap_or_else(|| "frac-calculus".into()).parse()?;
    let report = verify(suite)?;
    for c in &report.criteria {
        println!("{}", c.summary());
    }
    println!("{} in {:.1}s", if report.pass() { "pass" } else { "fail" }, report.wall_seconds);
    Ok(())
}
