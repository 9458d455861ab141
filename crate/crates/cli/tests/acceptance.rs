//! The thirteen acceptance criteria at full size, one line each.

use std::process::Command;
use std::time::Instant;

use homog::report::Status;
use homog::suite::{criterion_name, run_criterion, SuiteOptions, CRITERIA};

const SEED: u64 = 7;

fn verify_all_quick() -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_homog"))
        .args(["verify-all", "--quick", "--seed", &SEED.to_string()])
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code())
}

/// Criterion 13 at the process level: two runs, same bytes, exit 0.
fn determinism() -> Result<String, String> {
    let (a, code_a) = verify_all_quick();
    let (b, code_b) = verify_all_quick();
    if a != b {
        let at = a.iter().zip(&b).position(|(x, y)| x != y);
        return Err(format!("reports differ (first difference at byte {at:?})"));
    }
    if code_a != Some(0) || code_b != Some(0) {
        return Err(format!("exit codes {code_a:?} and {code_b:?}"));
    }
    Ok(format!("{} identical bytes", a.len()))
}

fn main() {
    let opts = SuiteOptions::new(SEED);
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        let t = Instant::now();
        let verdict = if id == 13 {
            determinism()
        } else {
            let c = run_criterion(id, &opts);
            match c.status {
                // sampled membership may stay undecided; report how often
                Status::Ok if id == 5 => Ok(format!("inconclusive {}", c.stats["checks"][0]["stats"]["inconclusive_rate"])),
                Status::Ok => Ok(String::new()),
                s => Err(format!("{s:?}: {}", c.witness.map(|w| w.to_string()).unwrap_or_default())),
            }
        };
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(note) => println!("{}", format!("PASS {} ({secs:.1}s) {note}", criterion_name(id)).trim_end()),
            Err(why) => {
                println!("FAIL {} ({secs:.1}s) {why}", criterion_name(id));
                failed.push(id);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria pass", CRITERIA.len());
}
