//! Each operating state of the split air conditioner is a fixed impedance
//! sized from its metered mean P and Q. Metering it at nominal voltage gives
//! the targets back.

use std::f64::consts::PI;
use std::path::Path;

use nilmsim::appliances::{impedance_from_pq, step, ApplianceParams};
use nilmsim::metering::{meter_window, Waveform};
use nilmsim::scenario::{Action, Scenario};

fn main() -> nilmsim::Result<()> {
    let scenario = Scenario::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/split_ac.toml"))?;
    let ac = &scenario.appliances[0];
    let ApplianceParams::FsmTable(table) = &ac.params else {
        unreachable!("the fixture holds a state table")
    };
    let u = Waveform::from_fn(10_000, 400, 0.0, |t| 235.0 * 2f64.sqrt() * (2.0 * PI * 50.0 * t).sin())?;
    println!("{:<14} {:>16} {:>9} {:>9} {:>9} {:>9}", "state", "Z (Ω)", "P tgt", "P", "Q tgt", "Q");
    for state in &table.states {
        let z = impedance_from_pq(state.p_target, state.q_target, table.nominal_voltage)?;
        let (s, _) = ac.apply(&ac.initial_state(), &Action::SetState(state.name.clone()))?;
        let r = meter_window(&u, &step(ac, &s, &u, 50.0)?.current, 0.04)?;
        println!(
            "{:<14} {:>7.2}{:+8.2}j {:9.2} {:9.2} {:9.2} {:9.2}",
            state.name, z.re, z.im, state.p_target, r.p, state.q_target, r.q
        );
    }
    Ok(())
}
