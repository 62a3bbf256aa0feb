//! Seven kitchen appliances over half an hour, behind a slightly soft supply.
//! Prints the event log and checks the panel power balance.

use std::path::Path;

use nilmsim::panel::{panel_power_identity, simulate, SimConfig, SourceParams};
use nilmsim::scenario::Scenario;

fn main() -> nilmsim::Result<()> {
    let scenario = Scenario::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/kitchen_evening.toml"))?;
    let source = SourceParams {
        source_resistance: 0.2,
        noise_std: 1.0,
        rng_seed: 7,
        ..SourceParams::default()
    };
    let d = simulate(&scenario, &source, &SimConfig::default())?;
    for e in &d.events {
        println!("{:8.2} s  {:<14} {:<14} -> {:<14} {}", e.time, e.appliance_id, e.state_from, e.state_to, e.note);
    }
    let peak = d.aggregate.iter().max_by(|a, b| a.p.total_cmp(&b.p)).unwrap();
    println!("\n{} ticks, peak {:.1} W at {:.2} s ({:.2} V)", d.ticks(), peak.p, peak.t, peak.v_rms);
    let id = panel_power_identity(&d);
    if let Some(k) = id.worst_tick {
        println!("largest power balance residual {:.2e} W at {:.2} s", id.max_residual, d.aggregate[k].t);
    }
    Ok(())
}
