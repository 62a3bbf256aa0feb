//! Resistive heating appliances with an optional boil-and-switch-off model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WATER_SPECIFIC_HEAT: f64 = 4200.0;
pub const BOILING_POINT_C: f64 = 100.0;
pub const ROOM_TEMPERATURE_C: f64 = 25.0;

fn default_nominal_voltage() -> f64 {
    super::DEFAULT_NOMINAL_VOLTAGE
}
fn default_specific_heat() -> f64 {
    WATER_SPECIFIC_HEAT
}
fn default_boil_temp() -> f64 {
    BOILING_POINT_C
}
fn default_initial_temp() -> f64 {
    ROOM_TEMPERATURE_C
}
fn default_efficiency() -> f64 {
    1.0
}

/// Heater as configured in a scenario. Setting `water_mass` enables the
/// automatic switch-off once the water reaches `boil_temp`; without it the
/// heater behaves like a toaster and only the schedule switches it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeaterParams {
    pub rated_power: f64,
    #[serde(default = "default_nominal_voltage")]
    pub nominal_voltage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub water_mass: Option<f64>,
    #[serde(default = "default_specific_heat")]
    pub specific_heat: f64,
    #[serde(default = "default_boil_temp")]
    pub boil_temp: f64,
    #[serde(default = "default_initial_temp")]
    pub initial_temp: f64,
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
}

impl HeaterParams {
    pub fn resistance(&self) -> f64 {
        self.nominal_voltage * self.nominal_voltage / self.rated_power
    }

    pub fn thermal(&self) -> Option<HeaterThermalParams> {
        self.water_mass.map(|water_mass| HeaterThermalParams {
            rated_power: self.rated_power,
            water_mass,
            specific_heat: self.specific_heat,
            boil_temp: self.boil_temp,
            initial_temp: self.initial_temp,
            efficiency: self.efficiency,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rated_power > 0.0 && self.nominal_voltage > 0.0) {
            return Err(Error::config("heater rated_power and nominal_voltage must be positive"));
        }
        if let Some(t) = self.thermal() {
            t.validate()?;
        }
        Ok(())
    }
}

/// Parameters of the time-to-boil relation `t = c·m·(T − T0) / (P·η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeaterThermalParams {
    pub rated_power: f64,
    pub water_mass: f64,
    pub specific_heat: f64,
    pub boil_temp: f64,
    pub initial_temp: f64,
    pub efficiency: f64,
}

impl HeaterThermalParams {
    /// Defaults for water boiled from room temperature.
    pub fn water(rated_power: f64, water_mass: f64, efficiency: f64) -> Self {
        Self {
            rated_power,
            water_mass,
            specific_heat: WATER_SPECIFIC_HEAT,
            boil_temp: BOILING_POINT_C,
            initial_temp: ROOM_TEMPERATURE_C,
            efficiency,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.rated_power,
            self.water_mass,
            self.specific_heat,
            self.boil_temp,
            self.initial_temp,
            self.efficiency,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("heater thermal parameters must be positive"));
        }
        if self.efficiency > 1.0 {
            return Err(Error::config("heater efficiency must be at most 1"));
        }
        if self.boil_temp < self.initial_temp {
            return Err(Error::config("boil_temp is below initial_temp"));
        }
        Ok(())
    }

    /// Heat the water must absorb, J.
    pub fn heat_required(&self) -> f64 {
        self.specific_heat * self.water_mass * (self.boil_temp - self.initial_temp)
    }

    /// Electrical energy the heater must deliver before switching off, J.
    pub fn energy_required(&self) -> f64 {
        self.heat_required() / self.efficiency
    }
}

/// Switch-off time at rated power, seconds.
pub fn heater_auto_off_time(hp: &HeaterThermalParams) -> Result<f64> {
    hp.validate()?;
    Ok(hp.heat_required() / (hp.rated_power * hp.efficiency))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_and_a_half_litres_at_1500_w() {
        let t = heater_auto_off_time(&HeaterThermalParams::water(1500.0, 1.5, 1.0)).unwrap();
        assert!((t - 315.0).abs() < 1e-9);
    }

    #[test]
    fn lossy_kettle() {
        let t = heater_auto_off_time(&HeaterThermalParams::water(2000.0, 1.0, 0.85)).unwrap();
        assert!((t - 4200.0 * 75.0 / 1700.0).abs() < 1e-9);
        assert!((t - 185.29).abs() < 0.01);
    }

    #[test]
    fn already_boiling_needs_no_time() {
        let mut hp = HeaterThermalParams::water(1500.0, 1.0, 1.0);
        hp.initial_temp = hp.boil_temp;
        assert_eq!(heater_auto_off_time(&hp).unwrap(), 0.0);
    }

    #[test]
    fn efficiency_above_one_is_rejected() {
        assert!(heater_auto_off_time(&HeaterThermalParams::water(1500.0, 1.0, 1.2)).is_err());
    }
}
