//! Branch-load models for household appliances.
//!
//! Every appliance is a branch across the panel node. Given the node voltage
//! for a stretch of whole mains cycles and its own state, it returns its branch
//! current and its advanced state. Stepping is a pure function so the panel can
//! re-evaluate a cycle while it settles the node voltage.
//!
//! | kind             | load class                                   |
//! |------------------|----------------------------------------------|
//! | `on_off_heater`  | on/off, optional boil-and-switch-off          |
//! | `incandescent`   | on/off, resistive                             |
//! | `fsm_table`      | finite-state, one linear branch per state     |
//! | `triac_dimmer`   | continuously variable                         |
//! | `standby_device` | permanent, always-on background load          |
//! | `refrigerator`   | compressor motor with PTC start, door light   |

pub mod dimmer;
pub mod heater;
pub mod linear;
pub mod refrigerator;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metering::{fundamental_phasor, synthesize, Waveform};
use crate::scenario::Action;

pub use dimmer::{dimmer_current, DimmerParams};
pub use heater::{heater_auto_off_time, HeaterParams, HeaterThermalParams};
pub use linear::{impedance_from_pq, PowerTarget};
pub use refrigerator::{ptc_update, rscr_solve, PtcParams, PtcState, RefrigeratorParams};

pub const DEFAULT_NOMINAL_VOLTAGE: f64 = 235.0;

fn default_nominal_voltage() -> f64 {
    DEFAULT_NOMINAL_VOLTAGE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplianceKind {
    OnOffHeater,
    Incandescent,
    StandbyDevice,
    FsmTable,
    TriacDimmer,
    Refrigerator,
}

impl ApplianceKind {
    pub const ALL: [ApplianceKind; 6] = [
        ApplianceKind::OnOffHeater,
        ApplianceKind::Incandescent,
        ApplianceKind::StandbyDevice,
        ApplianceKind::FsmTable,
        ApplianceKind::TriacDimmer,
        ApplianceKind::Refrigerator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ApplianceKind::OnOffHeater => "on_off_heater",
            ApplianceKind::Incandescent => "incandescent",
            ApplianceKind::StandbyDevice => "standby_device",
            ApplianceKind::FsmTable => "fsm_table",
            ApplianceKind::TriacDimmer => "triac_dimmer",
            ApplianceKind::Refrigerator => "refrigerator",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ApplianceKind::OnOffHeater => "resistive heater; optional energy-based auto-off (kettle, coffee machine, toaster)",
            ApplianceKind::Incandescent => "resistive lamp, on/off",
            ApplianceKind::StandbyDevice => "always-on background load (clock, router)",
            ApplianceKind::FsmTable => "finite set of (p, q) operating states, optional standby draw",
            ApplianceKind::TriacDimmer => "phase-angle dimmed resistive lamp",
            ApplianceKind::Refrigerator => "RSCR compressor with PTC start thermistor and door light",
        }
    }
}

impl fmt::Display for ApplianceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ApplianceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ApplianceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown appliance kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResistiveParams {
    pub rated_power: f64,
    #[serde(default = "default_nominal_voltage")]
    pub nominal_voltage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StandbyParams {
    pub power: f64,
    #[serde(default)]
    pub reactive_power: f64,
    #[serde(default = "default_nominal_voltage")]
    pub nominal_voltage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmState {
    pub name: String,
    pub p_target: f64,
    #[serde(default)]
    pub q_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmTableParams {
    #[serde(default = "default_nominal_voltage")]
    pub nominal_voltage: f64,
    pub states: Vec<FsmState>,
    /// State entered by `turn_on`; the first listed state when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_state: Option<String>,
    /// Always-on draw that persists while the appliance is off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standby: Option<PowerTarget>,
}

impl FsmTableParams {
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }
}

/// Kind-specific parameter block.
#[derive(Debug, Clone, PartialEq)]
pub enum ApplianceParams {
    OnOffHeater(HeaterParams),
    Incandescent(ResistiveParams),
    StandbyDevice(StandbyParams),
    FsmTable(FsmTableParams),
    TriacDimmer(DimmerParams),
    Refrigerator(RefrigeratorParams),
}

impl ApplianceParams {
    pub fn kind(&self) -> ApplianceKind {
        match self {
            ApplianceParams::OnOffHeater(_) => ApplianceKind::OnOffHeater,
            ApplianceParams::Incandescent(_) => ApplianceKind::Incandescent,
            ApplianceParams::StandbyDevice(_) => ApplianceKind::StandbyDevice,
            ApplianceParams::FsmTable(_) => ApplianceKind::FsmTable,
            ApplianceParams::TriacDimmer(_) => ApplianceKind::TriacDimmer,
            ApplianceParams::Refrigerator(_) => ApplianceKind::Refrigerator,
        }
    }

    /// Decodes a parameter table for `kind`.
    pub fn from_toml(kind: ApplianceKind, table: toml::Table) -> std::result::Result<Self, toml::de::Error> {
        let value = toml::Value::Table(table);
        Ok(match kind {
            ApplianceKind::OnOffHeater => ApplianceParams::OnOffHeater(value.try_into()?),
            ApplianceKind::Incandescent => ApplianceParams::Incandescent(value.try_into()?),
            ApplianceKind::StandbyDevice => ApplianceParams::StandbyDevice(value.try_into()?),
            ApplianceKind::FsmTable => ApplianceParams::FsmTable(value.try_into()?),
            ApplianceKind::TriacDimmer => ApplianceParams::TriacDimmer(value.try_into()?),
            ApplianceKind::Refrigerator => ApplianceParams::Refrigerator(value.try_into()?),
        })
    }

    pub fn to_toml(&self) -> std::result::Result<toml::Table, toml::ser::Error> {
        let value = match self {
            ApplianceParams::OnOffHeater(p) => toml::Value::try_from(p)?,
            ApplianceParams::Incandescent(p) => toml::Value::try_from(p)?,
            ApplianceParams::StandbyDevice(p) => toml::Value::try_from(p)?,
            ApplianceParams::FsmTable(p) => toml::Value::try_from(p)?,
            ApplianceParams::TriacDimmer(p) => toml::Value::try_from(p)?,
            ApplianceParams::Refrigerator(p) => toml::Value::try_from(p)?,
        };
        match value {
            toml::Value::Table(t) => Ok(t),
            _ => unreachable!("parameter structs serialize to tables"),
        }
    }
}

/// Parametric description of one branch load.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceSpec {
    pub id: String,
    pub label: String,
    pub params: ApplianceParams,
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{what} must be positive, got {v}")))
    }
}

impl ApplianceSpec {
    pub fn kind(&self) -> ApplianceKind {
        self.params.kind()
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = |e: Error| Error::config(format!("appliance `{}`: {e}", self.id));
        if self.id.trim().is_empty() {
            return Err(Error::config("appliance id is empty"));
        }
        match &self.params {
            ApplianceParams::OnOffHeater(p) => p.validate(),
            ApplianceParams::Incandescent(p) => {
                positive(p.rated_power, "rated_power").and(positive(p.nominal_voltage, "nominal_voltage"))
            }
            ApplianceParams::StandbyDevice(p) => {
                positive(p.nominal_voltage, "nominal_voltage")?;
                if !(p.power >= 0.0 && p.reactive_power.is_finite()) || (p.power == 0.0 && p.reactive_power == 0.0) {
                    return Err(Error::config("standby power must be non-negative and non-zero"));
                }
                Ok(())
            }
            ApplianceParams::FsmTable(p) => {
                positive(p.nominal_voltage, "nominal_voltage")?;
                if p.states.is_empty() {
                    return Err(Error::config("fsm_table needs at least one state"));
                }
                for (k, s) in p.states.iter().enumerate() {
                    if s.name.is_empty() || s.name == "off" && (s.p_target != 0.0 || s.q_target != 0.0) {
                        return Err(Error::config(format!("state #{k} has an empty or reserved name")));
                    }
                    if p.states[..k].iter().any(|o| o.name == s.name) {
                        return Err(Error::config(format!("duplicate state `{}`", s.name)));
                    }
                    if !(s.p_target >= 0.0 && s.q_target.is_finite()) {
                        return Err(Error::config(format!("state `{}` has negative or non-finite power", s.name)));
                    }
                    if s.name != "off" && s.p_target == 0.0 && s.q_target == 0.0 {
                        return Err(Error::config(format!("state `{}` draws no power", s.name)));
                    }
                }
                if let Some(d) = &p.default_state {
                    if p.state_index(d).is_none() {
                        return Err(Error::config(format!("default_state `{d}` is not a listed state")));
                    }
                }
                if let Some(s) = &p.standby {
                    if !(s.p_target >= 0.0 && s.q_target.is_finite()) {
                        return Err(Error::config("standby power must be non-negative"));
                    }
                }
                Ok(())
            }
            ApplianceParams::TriacDimmer(p) => p.validate(),
            ApplianceParams::Refrigerator(p) => p.validate(),
        }
        .map_err(ctx)
    }

    pub fn initial_state(&self) -> ApplianceState {
        let dynamics = match &self.params {
            ApplianceParams::OnOffHeater(_) => Dynamics::Heater {
                on: false,
                delivered_j: 0.0,
            },
            ApplianceParams::Incandescent(_) => Dynamics::Switch { on: false },
            ApplianceParams::StandbyDevice(_) => Dynamics::Switch { on: true },
            ApplianceParams::FsmTable(_) => Dynamics::Fsm { active: None },
            ApplianceParams::TriacDimmer(p) => Dynamics::Dimmer {
                on: false,
                firing_angle: p.firing_angle,
            },
            ApplianceParams::Refrigerator(p) => Dynamics::Refrigerator {
                compressor_on: false,
                door_open: false,
                ptc: PtcState::cold(&p.ptc),
            },
        };
        ApplianceState {
            time_in_state: 0.0,
            dynamics,
        }
    }

    /// Checks that `action` makes sense for this kind of appliance.
    pub fn accepts(&self, action: &Action) -> Result<()> {
        let kind = self.kind();
        let ok = match action {
            Action::Setpoint(_) => true,
            Action::TurnOn | Action::TurnOff => true,
            Action::SetState(name) => match &self.params {
                ApplianceParams::FsmTable(p) => {
                    if name != "off" && p.state_index(name).is_none() {
                        return Err(Error::config(format!(
                            "appliance `{}` has no state `{name}`",
                            self.id
                        )));
                    }
                    true
                }
                _ => false,
            },
            Action::SetDimmer(alpha) => {
                if kind == ApplianceKind::TriacDimmer {
                    dimmer::check_firing_angle(*alpha)?;
                }
                kind == ApplianceKind::TriacDimmer
            }
            Action::DoorOpen | Action::DoorClose | Action::CompressorOn | Action::CompressorOff => {
                kind == ApplianceKind::Refrigerator
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "action `{}` is not valid for {kind} appliance `{}`",
                action.name(),
                self.id
            )))
        }
    }

    /// Name of the operating mode `state` is in. Dimmer modes carry the firing
    /// angle, e.g. `on(alpha=2.5)`.
    pub fn mode(&self, state: &ApplianceState) -> String {
        match (&self.params, &state.dynamics) {
            (_, Dynamics::Switch { on }) | (_, Dynamics::Heater { on, .. }) => if *on { "on" } else { "off" }.to_string(),
            (_, Dynamics::Dimmer { on, firing_angle }) => {
                if *on {
                    format!("on(alpha={firing_angle})")
                } else {
                    "off".to_string()
                }
            }
            (ApplianceParams::FsmTable(p), Dynamics::Fsm { active }) => match active {
                Some(k) => p.states[*k].name.clone(),
                None => "off".to_string(),
            },
            (_, Dynamics::Fsm { .. }) => "off".to_string(),
            (_, Dynamics::Refrigerator { compressor_on, door_open, .. }) => {
                let base = if *compressor_on { "compressor_on" } else { "off" };
                if *door_open {
                    format!("{base}+door_open")
                } else {
                    base.to_string()
                }
            }
        }
    }

    /// Applies a scheduled action. The returned flag is false when the action
    /// left the electrical state unchanged.
    pub fn apply(&self, state: &ApplianceState, action: &Action) -> Result<(ApplianceState, bool)> {
        self.accepts(action)?;
        let mut next = state.clone();
        match (&mut next.dynamics, action) {
            (_, Action::Setpoint(_)) => return Ok((next, false)),
            (Dynamics::Switch { on }, Action::TurnOn) => *on = true,
            (Dynamics::Switch { on }, Action::TurnOff) => *on = false,
            (Dynamics::Heater { on, delivered_j }, Action::TurnOn) => {
                if !*on {
                    *on = true;
                    *delivered_j = 0.0;
                }
            }
            (Dynamics::Heater { on, .. }, Action::TurnOff) => *on = false,
            (Dynamics::Dimmer { on, .. }, Action::TurnOn) => *on = true,
            (Dynamics::Dimmer { on, .. }, Action::TurnOff) => *on = false,
            (Dynamics::Dimmer { firing_angle, .. }, Action::SetDimmer(alpha)) => *firing_angle = *alpha,
            (Dynamics::Fsm { active }, Action::TurnOn) => {
                if active.is_none() {
                    let ApplianceParams::FsmTable(p) = &self.params else {
                        return Err(self.mismatch());
                    };
                    let first = p.default_state.as_deref().and_then(|d| p.state_index(d)).unwrap_or(0);
                    *active = Some(first);
                }
            }
            (Dynamics::Fsm { active }, Action::TurnOff) => *active = None,
            (Dynamics::Fsm { active }, Action::SetState(name)) => {
                let ApplianceParams::FsmTable(p) = &self.params else {
                    return Err(self.mismatch());
                };
                *active = if name == "off" { None } else { p.state_index(name) };
            }
            (Dynamics::Refrigerator { compressor_on, .. }, Action::TurnOn | Action::CompressorOn) => {
                *compressor_on = true
            }
            (Dynamics::Refrigerator { compressor_on, .. }, Action::TurnOff | Action::CompressorOff) => {
                *compressor_on = false
            }
            (Dynamics::Refrigerator { door_open, .. }, Action::DoorOpen) => *door_open = true,
            (Dynamics::Refrigerator { door_open, .. }, Action::DoorClose) => *door_open = false,
            _ => return Err(self.mismatch()),
        }
        let changed = next.dynamics != state.dynamics;
        if changed {
            next.time_in_state = 0.0;
        }
        Ok((next, changed))
    }

    fn mismatch(&self) -> Error {
        Error::config(format!("state of appliance `{}` does not match its kind {}", self.id, self.kind()))
    }
}

/// Kind-specific dynamic state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Dynamics {
    Switch { on: bool },
    Heater { on: bool, delivered_j: f64 },
    Fsm { active: Option<usize> },
    Dimmer { on: bool, firing_angle: f64 },
    Refrigerator {
        compressor_on: bool,
        door_open: bool,
        ptc: PtcState,
    },
}

/// Runtime state of one appliance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplianceState {
    pub time_in_state: f64,
    pub dynamics: Dynamics,
}

/// A transition the appliance made on its own, such as a kettle switching off.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoTransition {
    pub time: f64,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub current: Waveform,
    pub state: ApplianceState,
    pub auto: Option<AutoTransition>,
}

fn whole_cycles(u: &Waveform, mains_hz: f64) -> Result<usize> {
    let cycles = u.duration() * mains_hz;
    let rounded = cycles.round();
    if rounded < 1.0 || (cycles - rounded).abs() > 1e-6 {
        return Err(Error::WindowAlignment(format!(
            "appliance step needs whole mains cycles, got {cycles:.4}"
        )));
    }
    Ok(rounded as usize)
}

fn scaled(u: &Waveform, g: f64) -> Vec<f64> {
    u.samples().iter().map(|v| v * g).collect()
}

fn add_into(acc: &mut [f64], other: &[f64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

/// Advances one appliance across the voltage window `u`, which must span a
/// whole number of cycles of `mains_hz` and start on an upward voltage zero.
pub fn step(spec: &ApplianceSpec, state: &ApplianceState, u: &Waveform, mains_hz: f64) -> Result<StepOutput> {
    let dt = u.duration();
    let mut next = state.clone();
    next.time_in_state += dt;
    let mut auto = None;
    let zeros = || vec![0.0; u.len()];

    let current = match (&spec.params, &mut next.dynamics) {
        (ApplianceParams::Incandescent(p), Dynamics::Switch { on }) => {
            if *on {
                scaled(u, p.rated_power / (p.nominal_voltage * p.nominal_voltage))
            } else {
                zeros()
            }
        }
        (ApplianceParams::StandbyDevice(p), Dynamics::Switch { on }) => {
            if *on {
                let y = PowerTarget {
                    p_target: p.power,
                    q_target: p.reactive_power,
                }
                .admittance(p.nominal_voltage)?;
                linear::branch_current(u, y, whole_cycles(u, mains_hz)?)
            } else {
                zeros()
            }
        }
        (ApplianceParams::OnOffHeater(p), Dynamics::Heater { on, delivered_j }) => {
            if !*on {
                zeros()
            } else {
                let i = scaled(u, 1.0 / p.resistance());
                let power = u.samples().iter().zip(&i).map(|(a, b)| a * b).sum::<f64>() / u.len() as f64;
                let before = *delivered_j;
                *delivered_j += power * dt;
                if let Some(thermal) = p.thermal() {
                    let needed = thermal.energy_required();
                    if *delivered_j >= needed && power > 0.0 {
                        let at = u.start_time() + ((needed - before) / power).clamp(0.0, dt);
                        *on = false;
                        next.time_in_state = u.end_time() - at;
                        auto = Some(AutoTransition {
                            time: at,
                            from: "on".into(),
                            to: "off".into(),
                        });
                    }
                }
                i
            }
        }
        (ApplianceParams::FsmTable(p), Dynamics::Fsm { active }) => {
            let mut y = Complex64::new(0.0, 0.0);
            if let Some(k) = active {
                let s = &p.states[*k];
                y += PowerTarget {
                    p_target: s.p_target,
                    q_target: s.q_target,
                }
                .admittance(p.nominal_voltage)?;
            }
            if let Some(standby) = &p.standby {
                y += standby.admittance(p.nominal_voltage)?;
            }
            if y.norm() == 0.0 {
                zeros()
            } else {
                linear::branch_current(u, y, whole_cycles(u, mains_hz)?)
            }
        }
        (ApplianceParams::TriacDimmer(p), Dynamics::Dimmer { on, firing_angle }) => {
            if *on {
                let params = DimmerParams {
                    lamp_resistance: p.lamp_resistance,
                    firing_angle: *firing_angle,
                };
                dimmer_current(u, &params, mains_hz)?.into_samples()
            } else {
                zeros()
            }
        }
        (ApplianceParams::Refrigerator(p), Dynamics::Refrigerator { compressor_on, door_open, ptc }) => {
            let mut i = if *door_open {
                scaled(u, p.door_light_conductance())
            } else {
                zeros()
            };
            let mut ptc_rms = 0.0;
            if *compressor_on {
                let cycles = whole_cycles(u, mains_hz)?;
                let voltage = fundamental_phasor(u.samples(), cycles);
                let sol = refrigerator::rscr_network(p, ptc.resistance, voltage, 2.0 * PI * mains_hz)?;
                add_into(&mut i, &synthesize(sol.total, u.len(), cycles));
                ptc_rms = sol.ptc.norm() / 2f64.sqrt();
            }
            *ptc = ptc_update(ptc, ptc_rms, dt, &p.ptc, *compressor_on);
            i
        }
        _ => return Err(spec.mismatch()),
    };

    Ok(StepOutput {
        current: u.with_samples(current)?,
        state: next,
        auto,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metering::meter_window;

    const RATE: u32 = 10_000;

    fn cycle(v_rms: f64, cycles: usize) -> Waveform {
        Waveform::from_fn(RATE, 200 * cycles, 0.0, |t| v_rms * 2f64.sqrt() * (2.0 * PI * 50.0 * t).sin()).unwrap()
    }

    fn spec(params: ApplianceParams) -> ApplianceSpec {
        ApplianceSpec {
            id: "dut".into(),
            label: "device under test".into(),
            params,
        }
    }

    fn run(spec: &ApplianceSpec, state: &ApplianceState, u: &Waveform) -> StepOutput {
        step(spec, state, u, 50.0).unwrap()
    }

    #[test]
    fn incandescent_is_resistive() {
        let s = spec(ApplianceParams::Incandescent(ResistiveParams {
            rated_power: 100.0,
            nominal_voltage: 235.0,
        }));
        let (on, _) = s.apply(&s.initial_state(), &Action::TurnOn).unwrap();
        let u = cycle(235.0, 2);
        let out = run(&s, &on, &u);
        let rec = meter_window(&u, &out.current, 0.0).unwrap();
        assert!((rec.p - 100.0).abs() < 1e-9);
        assert!((rec.pf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_appliances_draw_nothing() {
        let u = cycle(235.0, 1);
        let specs = [
            spec(ApplianceParams::Incandescent(ResistiveParams {
                rated_power: 60.0,
                nominal_voltage: 235.0,
            })),
            spec(ApplianceParams::TriacDimmer(DimmerParams {
                lamp_resistance: 900.0,
                firing_angle: 1.0,
            })),
            spec(ApplianceParams::Refrigerator(RefrigeratorParams::default())),
            spec(ApplianceParams::OnOffHeater(HeaterParams {
                rated_power: 2000.0,
                nominal_voltage: 235.0,
                water_mass: Some(1.0),
                specific_heat: 4200.0,
                boil_temp: 100.0,
                initial_temp: 25.0,
                efficiency: 1.0,
            })),
        ];
        for s in &specs {
            let out = run(s, &s.initial_state(), &u);
            assert!(out.current.samples().iter().all(|v| *v == 0.0), "{}", s.kind());
        }
    }

    #[test]
    fn standby_draws_configured_power() {
        let s = spec(ApplianceParams::StandbyDevice(StandbyParams {
            power: 2.0,
            reactive_power: 0.0,
            nominal_voltage: 235.0,
        }));
        let u = cycle(235.0, 2);
        let out = run(&s, &s.initial_state(), &u);
        let rec = meter_window(&u, &out.current, 0.0).unwrap();
        assert!((rec.p - 2.0).abs() < 0.01);
    }

    #[test]
    fn fsm_round_trips_targets() {
        let s = spec(ApplianceParams::FsmTable(FsmTableParams {
            nominal_voltage: 235.0,
            states: vec![FsmState {
                name: "cool_speed_1".into(),
                p_target: 1097.25,
                q_target: 210.88,
            }],
            default_state: None,
            standby: None,
        }));
        let (on, changed) = s.apply(&s.initial_state(), &Action::TurnOn).unwrap();
        assert!(changed);
        assert_eq!(s.mode(&on), "cool_speed_1");
        let u = cycle(235.0, 2);
        let rec = meter_window(&u, &run(&s, &on, &u).current, 0.0).unwrap();
        assert!(((rec.p - 1097.25) / 1097.25).abs() < 1e-6, "{}", rec.p);
        assert!(((rec.q - 210.88) / 210.88).abs() < 1e-6, "{}", rec.q);
    }

    #[test]
    fn heater_switches_itself_off() {
        let s = spec(ApplianceParams::OnOffHeater(HeaterParams {
            rated_power: 1500.0,
            nominal_voltage: 235.0,
            water_mass: Some(0.001),
            specific_heat: 4200.0,
            boil_temp: 100.0,
            initial_temp: 25.0,
            efficiency: 1.0,
        }));
        // 315 J at 1500 W → 0.21 s
        let (mut state, _) = s.apply(&s.initial_state(), &Action::TurnOn).unwrap();
        let mut t = 0.0;
        let mut auto = None;
        for _ in 0..20 {
            let u = Waveform::from_fn(RATE, 200, t, |x| 235.0 * 2f64.sqrt() * (2.0 * PI * 50.0 * x).sin()).unwrap();
            let out = run(&s, &state, &u);
            state = out.state;
            t += 0.02;
            if out.auto.is_some() {
                auto = out.auto;
                break;
            }
        }
        let auto = auto.expect("heater never switched off");
        assert!((auto.time - 0.21).abs() < 1e-9, "{}", auto.time);
        assert_eq!(s.mode(&state), "off");
    }

    #[test]
    fn wrong_actions_are_rejected() {
        let lamp = spec(ApplianceParams::TriacDimmer(DimmerParams {
            lamp_resistance: 900.0,
            firing_angle: 0.0,
        }));
        assert!(lamp.apply(&lamp.initial_state(), &Action::DoorOpen).is_err());
        assert!(lamp.apply(&lamp.initial_state(), &Action::SetDimmer(4.0)).is_err());
        let fridge = spec(ApplianceParams::Refrigerator(RefrigeratorParams::default()));
        assert!(fridge.apply(&fridge.initial_state(), &Action::SetState("x".into())).is_err());
    }

    #[test]
    fn duplicate_turn_on_is_a_no_op() {
        let lamp = spec(ApplianceParams::Incandescent(ResistiveParams {
            rated_power: 60.0,
            nominal_voltage: 235.0,
        }));
        let (on, changed) = lamp.apply(&lamp.initial_state(), &Action::TurnOn).unwrap();
        assert!(changed);
        let (again, changed) = lamp.apply(&on, &Action::TurnOn).unwrap();
        assert!(!changed);
        assert_eq!(again, on);
    }

    #[test]
    fn refrigerator_modes() {
        let s = spec(ApplianceParams::Refrigerator(RefrigeratorParams::default()));
        let st = s.initial_state();
        assert_eq!(s.mode(&st), "off");
        let (st, _) = s.apply(&st, &Action::CompressorOn).unwrap();
        assert_eq!(s.mode(&st), "compressor_on");
        let (st, _) = s.apply(&st, &Action::DoorOpen).unwrap();
        assert_eq!(s.mode(&st), "compressor_on+door_open");
    }

    #[test]
    fn state_kind_mismatch_is_a_configuration_error() {
        let lamp = spec(ApplianceParams::Incandescent(ResistiveParams {
            rated_power: 60.0,
            nominal_voltage: 235.0,
        }));
        let fridge = spec(ApplianceParams::Refrigerator(RefrigeratorParams::default()));
        let err = step(&lamp, &fridge.initial_state(), &cycle(235.0, 1), 50.0).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }
}
