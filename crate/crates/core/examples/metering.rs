//! Meters a distorted current against a clean mains voltage, then streams a
//! load step through the 20 Hz meter.

use std::f64::consts::PI;

use nilmsim::metering::{assp_stream, cycle_structure, meter_window, Waveform};

fn main() -> nilmsim::Result<()> {
    let rate = 10_000;
    let w = 2.0 * PI * 50.0;
    let u = Waveform::from_fn(rate, 400, 0.0, |t| 235.0 * 2f64.sqrt() * (w * t).sin())?;
    let i = Waveform::from_fn(rate, 400, 0.0, |t| 6.0 * (w * t - 0.5).sin() + 1.5 * (3.0 * w * t).sin())?;

    let info = cycle_structure(&u)?;
    println!("{} whole cycles at {:.3} Hz", info.cycles, info.freq);
    let r = meter_window(&u, &i, 0.04)?;
    println!(
        "V {:.2} V  I {:.3} A  P {:.2} W  Q {:.2} var  S {:.2} VA  pf {:.4}",
        r.v_rms, r.i_rms, r.p, r.q, r.s_va, r.pf
    );

    // a resistive load that doubles half a second in
    let u = Waveform::from_fn(rate, 10_000, 0.0, |t| 235.0 * 2f64.sqrt() * (w * t).sin())?;
    let i = u.with_samples(
        u.samples()
            .iter()
            .enumerate()
            .map(|(k, v)| if k < 5000 { v / 100.0 } else { v / 50.0 })
            .collect(),
    )?;
    for rec in assp_stream(&u, &i, 20.0)?.into_iter().flatten() {
        println!("t {:.2} s  P {:7.2} W", rec.t, rec.p);
    }
    Ok(())
}
