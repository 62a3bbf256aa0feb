//! Refrigerator: resistance-start capacitor-run compressor motor with a PTC
//! start thermistor, plus a door light.
//!
//! The motor is solved per mains cycle as a linear phasor network whose only
//! time-varying element is the PTC resistance:
//!
//! ```text
//!        ┌── R_r ── L_r ─────────────────────────┐   run winding
//!   u ───┤                                        ├─── return
//!        └── R_st ── L_st ──┬── PTC ──┬──────────┘   start winding
//!                           └── C_run ┘
//! ```
//!
//! A cold PTC shorts the run capacitor and the start winding draws the
//! inrush current. Joule heating then trips the thermistor, its resistance
//! climbs to thousands of ohms and the capacitor takes over the start branch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Winding {
    /// Henries.
    pub inductance: f64,
    /// Ohms.
    pub resistance: f64,
}

impl Winding {
    fn impedance(&self, omega: f64) -> Complex64 {
        Complex64::new(self.resistance, omega * self.inductance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtcParams {
    pub r_cold: f64,
    pub r_hot: f64,
    /// Thermal time constant, seconds.
    pub time_constant: f64,
    /// Stored heat at which the resistance starts to climb, J.
    pub trip_energy: f64,
}

impl Default for PtcParams {
    fn default() -> Self {
        Self {
            r_cold: 22.0,
            r_hot: 100_000.0,
            time_constant: 60.0,
            trip_energy: 450.0,
        }
    }
}

impl PtcParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.r_cold, self.r_hot, self.time_constant, self.trip_energy];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("PTC parameters must be positive"));
        }
        if self.r_hot < 1000.0 * self.r_cold {
            return Err(Error::config(format!(
                "PTC r_hot ({}) must be at least 1000 × r_cold ({})",
                self.r_hot, self.r_cold
            )));
        }
        Ok(())
    }

    /// Resistance for a given stored heat: flat at `r_cold` up to the trip
    /// energy, then exponential in the stored heat until it reaches `r_hot`
    /// at twice the trip energy.
    pub fn resistance_at(&self, energy: f64) -> f64 {
        if energy <= self.trip_energy {
            return self.r_cold;
        }
        let x = ((energy - self.trip_energy) / self.trip_energy).min(1.0);
        self.r_cold * (self.r_hot / self.r_cold).powf(x)
    }
}

/// Thermal state of the PTC thermistor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtcState {
    /// Stored heat above ambient, J.
    pub energy: f64,
    pub resistance: f64,
    /// Time spent de-energized, s.
    pub off_time: f64,
}

impl PtcState {
    pub fn cold(params: &PtcParams) -> Self {
        Self {
            energy: 0.0,
            resistance: params.r_cold,
            off_time: 0.0,
        }
    }
}

/// Advances the thermistor by `dt` seconds carrying `i_rms` amperes.
///
/// Stored heat follows `dE/dt = I²·R − E/τ`, integrated exactly over the step
/// with `R` held at its value at the start of the step. While energized the
/// resistance never decreases. De-energized, the heat decays with the same
/// time constant and after five time constants the thermistor is back at
/// `r_cold`.
pub fn ptc_update(state: &PtcState, i_rms: f64, dt: f64, params: &PtcParams, energized: bool) -> PtcState {
    let decay = (-dt / params.time_constant).exp();
    let heating = if energized { i_rms * i_rms * state.resistance } else { 0.0 };
    let energy = state.energy * decay + heating * params.time_constant * (1.0 - decay);
    if energized {
        return PtcState {
            energy,
            resistance: state.resistance.max(params.resistance_at(energy)),
            off_time: 0.0,
        };
    }
    let off_time = state.off_time + dt;
    if off_time >= 5.0 * params.time_constant {
        return PtcState {
            energy: 0.0,
            resistance: params.r_cold,
            off_time,
        };
    }
    PtcState {
        energy,
        resistance: params.resistance_at(energy),
        off_time,
    }
}

fn default_door_light_power() -> f64 {
    1.5
}
fn default_nominal_voltage() -> f64 {
    super::DEFAULT_NOMINAL_VOLTAGE
}
fn default_run_winding() -> Winding {
    Winding {
        inductance: 0.75,
        resistance: 260.0,
    }
}
fn default_start_winding() -> Winding {
    Winding {
        inductance: 0.06,
        resistance: 18.0,
    }
}
fn default_run_capacitor() -> f64 {
    4.5e-6
}

/// Every field has a default; the defaults give about 6 A of inrush at
/// 235 V and 0.57 A once the thermistor has settled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefrigeratorParams {
    #[serde(default = "default_door_light_power")]
    pub door_light_power: f64,
    #[serde(default = "default_run_winding")]
    pub run_winding: Winding,
    #[serde(default = "default_start_winding")]
    pub start_winding: Winding,
    /// Farads.
    #[serde(default = "default_run_capacitor")]
    pub run_capacitor: f64,
    #[serde(default)]
    pub ptc: PtcParams,
    #[serde(default = "default_nominal_voltage")]
    pub nominal_voltage: f64,
}

impl Default for RefrigeratorParams {
    fn default() -> Self {
        Self {
            door_light_power: default_door_light_power(),
            run_winding: default_run_winding(),
            start_winding: default_start_winding(),
            run_capacitor: default_run_capacitor(),
            ptc: PtcParams::default(),
            nominal_voltage: default_nominal_voltage(),
        }
    }
}

impl RefrigeratorParams {
    pub fn validate(&self) -> Result<()> {
        let electrical = [
            self.run_winding.inductance,
            self.run_winding.resistance,
            self.start_winding.inductance,
            self.start_winding.resistance,
            self.run_capacitor,
            self.nominal_voltage,
        ];
        if electrical.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("refrigerator electrical values must be positive"));
        }
        if !(self.door_light_power >= 0.0 && self.door_light_power.is_finite()) {
            return Err(Error::config("door_light_power must be non-negative"));
        }
        self.ptc.validate()
    }

    /// Conductance of the door-light branch, siemens.
    pub fn door_light_conductance(&self) -> f64 {
        self.door_light_power / (self.nominal_voltage * self.nominal_voltage)
    }
}

/// Branch currents of the compressor network for one voltage phasor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RscrSolution {
    pub total: Complex64,
    pub run: Complex64,
    pub start: Complex64,
    /// Part of the start-branch current that flows through the thermistor.
    pub ptc: Complex64,
}

fn checked_inverse(z: Complex64, what: &str) -> Result<Complex64> {
    if z.norm() == 0.0 || !z.norm().is_finite() {
        return Err(Error::Numerical(format!("{what} impedance is singular")));
    }
    Ok(z.inv())
}

pub fn rscr_network(
    params: &RefrigeratorParams,
    r_ptc: f64,
    u_phasor: Complex64,
    omega: f64,
) -> Result<RscrSolution> {
    if !(r_ptc > 0.0) {
        return Err(Error::invalid(format!("PTC resistance must be positive, got {r_ptc}")));
    }
    let y_run = checked_inverse(params.run_winding.impedance(omega), "run winding")?;
    let y_parallel = Complex64::new(1.0 / r_ptc, omega * params.run_capacitor);
    let z_parallel = checked_inverse(y_parallel, "PTC/capacitor")?;
    let z_start = params.start_winding.impedance(omega) + z_parallel;
    let y_start = checked_inverse(z_start, "start branch")?;
    let run = u_phasor * y_run;
    let start = u_phasor * y_start;
    let ptc = start * z_parallel / r_ptc;
    Ok(RscrSolution {
        total: run + start,
        run,
        start,
        ptc,
    })
}

/// Total compressor current phasor for a supply phasor `u_phasor` at angular
/// frequency `omega`.
pub fn rscr_solve(params: &RefrigeratorParams, r_ptc: f64, u_phasor: Complex64, omega: f64) -> Result<Complex64> {
    Ok(rscr_network(params, r_ptc, u_phasor, omega)?.total)
}
