//! Sweeps the firing angle of a triac dimmer on a 100 W lamp. Power falls
//! and the power factor drops as more of each half cycle is cut away.

use std::f64::consts::PI;

use nilmsim::appliances::{dimmer_current, DimmerParams};
use nilmsim::metering::{meter_window, Waveform};

fn main() -> nilmsim::Result<()> {
    let u = Waveform::from_fn(10_000, 400, 0.0, |t| 235.0 * 2f64.sqrt() * (2.0 * PI * 50.0 * t).sin())?;
    println!(" alpha (rad)    P (W)    Q (var)    S (VA)     pf");
    for step in 0..=10 {
        let alpha = step as f64 * 0.3;
        let lamp = DimmerParams {
            lamp_resistance: 235.0 * 235.0 / 100.0,
            firing_angle: alpha,
        };
        let r = meter_window(&u, &dimmer_current(&u, &lamp, 50.0)?, 0.04)?;
        println!("{alpha:12.2} {:8.2} {:10.2} {:9.2} {:6.3}", r.p, r.q, r.s_va, r.pf);
    }
    Ok(())
}
