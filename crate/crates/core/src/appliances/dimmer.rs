//! Leading-edge triac dimmer driving a resistive lamp.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metering::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimmerParams {
    pub lamp_resistance: f64,
    /// Firing delay after each voltage zero, radians in `[0, π)`.
    #[serde(default)]
    pub firing_angle: f64,
}

impl DimmerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lamp_resistance > 0.0 && self.lamp_resistance.is_finite()) {
            return Err(Error::config("lamp_resistance must be positive"));
        }
        check_firing_angle(self.firing_angle)
    }
}

pub fn check_firing_angle(alpha: f64) -> Result<()> {
    if (0.0..PI).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::config(format!("firing angle {alpha} outside [0, π)")))
    }
}

/// Fraction of full-conduction power delivered at firing angle `alpha`.
pub fn conduction_power_fraction(alpha: f64) -> f64 {
    1.0 - alpha / PI + (2.0 * alpha).sin() / (2.0 * PI)
}

/// Length of `[lo, hi]` inside the conducting set of one half cycle, in phase
/// measured from the last zero: before that zero (the previous half cycle was
/// still conducting), `[α, π)`, and past `π + α` in the next half cycle.
fn conducting_measure(lo: f64, hi: f64, alpha: f64) -> f64 {
    let overlap = |a: f64, b: f64| (hi.min(b) - lo.max(a)).max(0.0);
    overlap(f64::NEG_INFINITY, 0.0) + overlap(alpha, PI) + overlap(PI + alpha, f64::INFINITY)
}

/// Lamp current behind a triac that fires `firing_angle` after every voltage
/// zero and holds until the next one. `u` is expected to start on a zero.
///
/// Each sample stands for one sampling interval, and the sample that contains
/// the firing instant conducts for the matching fraction of that interval.
pub fn dimmer_current(u: &Waveform, dp: &DimmerParams, mains_freq: f64) -> Result<Waveform> {
    dp.validate()?;
    if !(mains_freq > 0.0) {
        return Err(Error::invalid("mains frequency must be positive"));
    }
    let x = u.samples();
    let step = 2.0 * PI * mains_freq / u.sample_rate() as f64;
    let half = 0.5 * step;
    let mut last_zero = 0.0;
    let mut out = Vec::with_capacity(x.len());
    for n in 0..x.len() {
        if n > 0 && (x[n - 1] < 0.0) != (x[n] < 0.0) {
            last_zero = (n - 1) as f64 + x[n - 1] / (x[n - 1] - x[n]);
        }
        let phase = (n as f64 - last_zero) * step;
        let on = if dp.firing_angle == 0.0 {
            1.0
        } else {
            (conducting_measure(phase - half, phase + half, dp.firing_angle) / step).min(1.0)
        };
        out.push(on * x[n] / dp.lamp_resistance);
    }
    u.with_samples(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metering::meter_window;

    fn mains() -> Waveform {
        Waveform::from_fn(10_000, 400, 0.0, |t| 235.0 * 2f64.sqrt() * (2.0 * PI * 50.0 * t).sin()).unwrap()
    }

    fn params(alpha: f64) -> DimmerParams {
        DimmerParams {
            lamp_resistance: 235.0 * 235.0 / 1000.0,
            firing_angle: alpha,
        }
    }

    #[test]
    fn zero_angle_is_plain_resistor() {
        let u = mains();
        let i = dimmer_current(&u, &params(0.0), 50.0).unwrap();
        for (a, b) in i.samples().iter().zip(u.samples()) {
            assert_eq!(*a, b / params(0.0).lamp_resistance);
        }
        let rec = meter_window(&u, &i, 0.0).unwrap();
        assert!((rec.pf - 1.0).abs() < 1e-12);
        assert!((rec.p - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn quarter_cycle_delay_halves_power() {
        let u = mains();
        let i = dimmer_current(&u, &params(PI / 2.0), 50.0).unwrap();
        let rec = meter_window(&u, &i, 0.0).unwrap();
        assert!((rec.p / 1000.0 - 0.5).abs() < 1e-3, "p = {}", rec.p);
        assert!((rec.pf - 0.5f64.sqrt()).abs() < 5e-3, "pf = {}", rec.pf);
    }

    #[test]
    fn late_firing_conducts_almost_nothing() {
        let u = mains();
        let i = dimmer_current(&u, &params(PI - 1e-6), 50.0).unwrap();
        let rec = meter_window(&u, &i, 0.0).unwrap();
        assert!(rec.p < 1e-6 && rec.i_rms < 1e-3, "{rec:?}");
    }

    #[test]
    fn angle_out_of_range() {
        assert!(params(PI).validate().is_err());
        assert!(params(-0.1).validate().is_err());
    }
}
