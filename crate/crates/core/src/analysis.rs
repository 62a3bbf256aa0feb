//! Steady-state statistics and trace comparison metrics.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metering::ElectricalRecord;
use crate::panel::Dataset;
use crate::scenario::GroundTruthEvent;

/// Seconds dropped after every event when picking steady segments.
pub const SETTLE_TIME: f64 = 5.0;

/// Name used for the panel channel in comparison reports.
pub const AGGREGATE_CHANNEL: &str = "aggregate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    IRms,
    P,
    Q,
    Pf,
}

impl Parameter {
    pub const ALL: [Parameter; 4] = [Parameter::IRms, Parameter::P, Parameter::Q, Parameter::Pf];

    /// Magnitude below which a reference value is treated as noise by
    /// [`percentage_error`]: 1 mA, 2 W, 2 var and 0.01 % of power factor.
    pub fn threshold(self) -> f64 {
        match self {
            Parameter::IRms => 0.001,
            Parameter::P => 2.0,
            Parameter::Q => 2.0,
            Parameter::Pf => 0.0001,
        }
    }

    pub fn of(self, r: &ElectricalRecord) -> f64 {
        match self {
            Parameter::IRms => r.i_rms,
            Parameter::P => r.p,
            Parameter::Q => r.q,
            Parameter::Pf => r.pf,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::IRms => "i_rms",
            Parameter::P => "p",
            Parameter::Q => "q",
            Parameter::Pf => "pf",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Parameter::IRms => "A",
            Parameter::P => "W",
            Parameter::Q => "var",
            Parameter::Pf => "",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateStatistics {
    pub parameter: Parameter,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
}

/// Mean and sample standard deviation, accumulated in one stable pass.
pub fn state_statistics(samples: &[f64], parameter: Parameter) -> Result<StateStatistics> {
    if samples.len() < 2 {
        return Err(Error::invalid(format!(
            "statistics need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &x) in samples.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok(StateStatistics {
        parameter,
        n: samples.len(),
        mean,
        std: (m2.max(0.0) / (samples.len() - 1) as f64).sqrt(),
    })
}

/// Pointwise percentage error of a model series `y` against a reference `x`.
///
/// Where the reference is within the parameter threshold of zero and the
/// difference is too, the error is 0. Where the reference is that small but
/// the difference is not, the threshold replaces the reference as the
/// denominator.
pub fn percentage_error(x: &[f64], y: &[f64], parameter: Parameter) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let theta = parameter.threshold();
    Ok(x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let diff = (a - b).abs();
            if a.abs() > theta {
                diff / a.abs() * 100.0
            } else if diff <= theta {
                0.0
            } else {
                diff / theta * 100.0
            }
        })
        .collect())
}

/// Pearson correlation coefficient as a fraction in [−1, 1].
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            if sxx == 0.0 { "reference series is constant" } else { "model series is constant" }.into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Comparison of one parameter on one channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterComparison {
    pub channel: String,
    pub parameter: Parameter,
    /// Percentage error per tick.
    pub errors: Vec<f64>,
    /// `None` when either series is constant.
    pub r: Option<f64>,
    pub max_error: f64,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Aggregate channel first, then appliances in name order.
    pub rows: Vec<ParameterComparison>,
    pub thresholds: Vec<(Parameter, f64)>,
}

impl ComparisonReport {
    pub fn get(&self, channel: &str, parameter: Parameter) -> Option<&ParameterComparison> {
        self.rows.iter().find(|r| r.channel == channel && r.parameter == parameter)
    }
}

fn compare_channel(name: &str, reference: &[ElectricalRecord], model: &[ElectricalRecord]) -> Result<Vec<ParameterComparison>> {
    if reference.len() != model.len() {
        return Err(Error::invalid(format!(
            "channel `{name}` has {} reference ticks but {} model ticks",
            reference.len(),
            model.len()
        )));
    }
    if let Some((k, _)) = reference
        .iter()
        .zip(model)
        .enumerate()
        .find(|(_, (a, b))| (a.t - b.t).abs() > 1e-6)
    {
        return Err(Error::invalid(format!("channel `{name}` timestamps differ at tick {k}")));
    }
    Parameter::ALL
        .into_iter()
        .map(|parameter| {
            let x: Vec<f64> = reference.iter().map(|r| parameter.of(r)).collect();
            let y: Vec<f64> = model.iter().map(|r| parameter.of(r)).collect();
            let errors = percentage_error(&x, &y, parameter)?;
            let r = match correlation(&x, &y) {
                Ok(r) => Some(r),
                Err(Error::UndefinedCorrelation(_)) => None,
                Err(e) => return Err(e),
            };
            let max_error = errors.iter().copied().fold(0.0, f64::max);
            let mean_error = if errors.is_empty() {
                0.0
            } else {
                errors.iter().sum::<f64>() / errors.len() as f64
            };
            Ok(ParameterComparison {
                channel: name.to_string(),
                parameter,
                errors,
                r,
                max_error,
                mean_error,
            })
        })
        .collect()
}

/// Compares every channel of `model` against `reference`.
pub fn compare_datasets(reference: &Dataset, model: &Dataset) -> Result<ComparisonReport> {
    let missing: Vec<&str> = reference
        .per_appliance
        .keys()
        .filter(|k| !model.per_appliance.contains_key(*k))
        .map(String::as_str)
        .collect();
    let extra: Vec<&str> = model
        .per_appliance
        .keys()
        .filter(|k| !reference.per_appliance.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::invalid(format!(
            "channel mismatch; missing from model: [{}], missing from reference: [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    let mut rows = compare_channel(AGGREGATE_CHANNEL, &reference.aggregate, &model.aggregate)?;
    for (id, records) in &reference.per_appliance {
        rows.extend(compare_channel(id, records, &model.per_appliance[id])?);
    }
    Ok(ComparisonReport {
        rows,
        thresholds: Parameter::ALL.into_iter().map(|p| (p, p.threshold())).collect(),
    })
}

/// Records in `[t0, t1]` that are at least [`SETTLE_TIME`] past every event.
/// With `appliance` set only that appliance's events count.
pub fn steady_segment<'a>(
    records: &'a [ElectricalRecord],
    events: &[GroundTruthEvent],
    appliance: Option<&str>,
    t0: f64,
    t1: f64,
) -> Vec<&'a ElectricalRecord> {
    let relevant: Vec<f64> = events
        .iter()
        .filter(|e| appliance.is_none_or(|id| e.appliance_id == id))
        .map(|e| e.time)
        .collect();
    records
        .iter()
        .filter(|r| r.t >= t0 && r.t <= t1)
        .filter(|r| !relevant.iter().any(|&t| r.t >= t && r.t < t + SETTLE_TIME))
        .collect()
}

/// Statistics of all four parameters over a set of records.
pub fn record_statistics(records: &[&ElectricalRecord]) -> Result<Vec<StateStatistics>> {
    Parameter::ALL
        .into_iter()
        .map(|p| {
            let xs: Vec<f64> = records.iter().map(|r| p.of(r)).collect();
            state_statistics(&xs, p)
        })
        .collect()
}
