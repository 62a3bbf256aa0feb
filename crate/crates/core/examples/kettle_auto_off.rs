//! Boiling time of a kettle, from the energy balance and from the simulator,
//! with a stiff supply and behind 0.4 Ω of wiring.

use std::path::Path;

use nilmsim::appliances::{heater_auto_off_time, HeaterThermalParams};
use nilmsim::panel::{simulate, SimConfig, SourceParams};
use nilmsim::scenario::{Scenario, AUTO_NOTE};

fn main() -> nilmsim::Result<()> {
    let predicted = heater_auto_off_time(&HeaterThermalParams::water(1500.0, 1.5, 1.0))?;
    println!("energy balance at rated power: {predicted:.2} s");

    let scenario = Scenario::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/kettle.toml"))?;
    for r_src in [0.0, 0.4] {
        let source = SourceParams {
            source_resistance: r_src,
            ..SourceParams::default()
        };
        let d = simulate(&scenario, &source, &SimConfig::default())?;
        let off = d.events.iter().find(|e| e.note == AUTO_NOTE).expect("kettle never switched off");
        let v = d.per_appliance["kettle"][100].v_rms;
        println!("R_src {r_src:.1} Ω: terminal {v:.2} V, switched off at {:.2} s", off.time);
    }
    Ok(())
}
