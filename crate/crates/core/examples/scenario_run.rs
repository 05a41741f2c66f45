//! Parses a scenario file, runs its checks and writes the artifacts.
//!
//! `cargo run --example scenario_run -- scenarios/tight_p1.json out`

use std::path::PathBuf;

use nevlab::cli::{parse_scenario, run, Overrides};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/tight_p1.json").to_string()
    });
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let text = std::fs::read_to_string(&path).expect("readable scenario");
    let sc = match parse_scenario(&text) {
        Ok(sc) => sc,
        Err(d) => {
            eprintln!("{d}");
            std::process::exit(65);
        }
    };
    let summary = run(&sc, &out, &Overrides::default()).expect("artifacts written");
    print!("{}", summary.to_text());
    println!("artifacts in {}", out.display());
}
