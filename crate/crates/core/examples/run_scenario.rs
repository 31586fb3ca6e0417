//! Runs a scenario (JSON file or inline JSON) for each of its seeds and prints
//! a one-line summary per run.
//!
//! ```text
//! cargo run --release -p lbsim-core --example run_scenario -- '{"topology":{"k":4}}'
//! ```

use std::time::Instant;

use lbsim::scenario::parse_scenario;
use lbsim::sim::run_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args().nth(1).ok_or("usage: run_scenario <file|json>")?;
    let text = std::fs::read_to_string(&arg).unwrap_or(arg);
    let sc = parse_scenario(&text)?;
    for &seed in &sc.seeds {
        let t = Instant::now();
        let m = run_scenario(&sc, seed)?;
        println!(
            "seed {seed} {:?} norm {:.4} cct {:.3}ms worst {} drops {} trims {} spurious/flow {:.2} events {} conserved {} ({:.2}s)",
            m.status,
            m.normalized_cct(),
            m.cct.as_ms_f64(),
            m.worst_hit_flow(),
            m.network.data_drops,
            m.network.trims,
            m.mean_spurious_per_flow(),
            m.network.events,
            m.conservation_ok(),
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
