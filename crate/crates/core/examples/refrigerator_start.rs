//! Compressor start of the refrigerator: the inrush through the cold PTC,
//! its decay as the thermistor heats up, and the door light.

use std::path::Path;

use nilmsim::panel::{simulate, SimConfig, SourceParams};
use nilmsim::scenario::{actions_in_interval, Scenario};

fn main() -> nilmsim::Result<()> {
    let full = Scenario::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/refrigerator_duty_cycle.toml"))?;
    let scenario = Scenario {
        duration: 240.0,
        appliances: full.appliances.clone(),
        schedule: actions_in_interval(&full, 0.0, 240.0).into_iter().cloned().collect(),
    };
    let d = simulate(&scenario, &SourceParams::default(), &SimConfig::default())?;
    for e in &d.events {
        println!("{:8.2} s  {} -> {}", e.time, e.state_from, e.state_to);
    }
    println!("\n   t (s)    I (A)     P (W)    Q (var)     pf");
    for r in d.per_appliance["refrigerator"]
        .iter()
        .filter(|r| (24.0..=34.0).contains(&r.t) || (r.t % 20.0).abs() < 1e-9)
        .step_by(2)
    {
        println!("{:8.2} {:8.3} {:9.2} {:10.2} {:6.3}", r.t, r.i_rms, r.p, r.q, r.pf);
    }
    Ok(())
}
