//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! `ACCEPTANCE_CRITERIA=1,4,9` restricts the run.

use strip_euler::certify::{run_criterion, CertifyOptions, CRITERIA};

fn main() {
    let ids: Vec<u8> = match std::env::var("ACCEPTANCE_CRITERIA") {
        Ok(s) if !s.trim().is_empty() => s.split(',').map(|t| t.trim().parse().expect("criterion id")).collect(),
        _ => CRITERIA.to_vec(),
    };
    // `cargo test -- --list` and friends
    if std::env::args().any(|a| a == "--list") {
        for id in &ids {
            println!("criterion_{id}: test");
        }
        return;
    }
    let opts = CertifyOptions::default();
    let mut failed = 0;
    for id in ids {
        let o = run_criterion(id, &opts);
        println!("{o}");
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
