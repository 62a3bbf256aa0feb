//! The combined house model: a noisy source behind a series resistance feeds
//! every appliance branch in parallel.
//!
//! The run advances one mains cycle at a time. Each cycle draws a new EMF
//! amplitude, settles the node voltage against the summed branch currents,
//! steps every appliance and, whenever a report tick falls due, meters the
//! last [`ASSP_WINDOW_CYCLES`] cycles of every channel. The aggregate meter
//! sits at the source terminals, upstream of the source resistance, so the
//! house power it sees is the appliance total plus the wiring loss.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::appliances::{step, ApplianceState};
use crate::error::{Error, Result};
use crate::metering::{meter_window, ElectricalRecord, Waveform, ASSP_WINDOW_CYCLES, MIN_SAMPLES_PER_CYCLE};
use crate::scenario::{emit_event, GroundTruthEvent, Scenario, AUTO_NOTE};

/// Largest node-voltage change accepted as converged, volts.
pub const NODE_VOLTAGE_TOLERANCE: f64 = 1e-6;
pub const MAX_NODE_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// RMS volts.
    pub v_nominal: f64,
    pub freq: f64,
    /// Standard deviation of the per-cycle RMS amplitude, volts.
    pub noise_std: f64,
    /// Series resistance between the source and the panel node, ohms.
    pub source_resistance: f64,
    pub rng_seed: u64,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            v_nominal: 235.0,
            freq: 50.0,
            noise_std: 0.0,
            source_resistance: 0.0,
            rng_seed: 0,
        }
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_nominal.is_finite() && self.v_nominal > 0.0) {
            return Err(Error::config("v_nominal must be positive"));
        }
        if !(self.freq.is_finite() && self.freq > 0.0) {
            return Err(Error::config("freq must be positive"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::config("noise_std must be non-negative"));
        }
        if !(self.source_resistance.is_finite() && self.source_resistance >= 0.0) {
            return Err(Error::config("source_resistance must be non-negative"));
        }
        Ok(())
    }
}

/// Sampling and reporting rates of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub report_hz: f64,
    pub wave_hz: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            report_hz: 20.0,
            wave_hz: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub wave_hz: u32,
    pub report_hz: f64,
    pub duration_s: f64,
    pub scenario_sha256: String,
    pub source: SourceParams,
    /// Appliance ids in scenario order.
    pub appliances: Vec<String>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub aggregate: Vec<ElectricalRecord>,
    pub per_appliance: BTreeMap<String, Vec<ElectricalRecord>>,
    /// Sorted by time; simultaneous events keep the order they happened in.
    pub events: Vec<GroundTruthEvent>,
    pub meta: DatasetMeta,
}

/// Waveforms of one simulated cycle, handed to an observer.
#[derive(Debug)]
pub struct CycleFrame<'a> {
    pub cycle: usize,
    pub start_time: f64,
    pub emf: &'a [f64],
    pub node: &'a [f64],
    /// Branch currents in scenario order.
    pub branches: &'a [Vec<f64>],
    pub total: &'a [f64],
}

/// Runs a scenario and meters every channel at `config.report_hz`.
pub fn simulate(scenario: &Scenario, source: &SourceParams, config: &SimConfig) -> Result<Dataset> {
    simulate_observed(scenario, source, config, |_| {})
}

/// Keeps the most recent cycles of one channel for metering.
struct History {
    cycles: Vec<Vec<f64>>,
}

impl History {
    fn new() -> Self {
        Self { cycles: Vec::new() }
    }

    fn push(&mut self, samples: Vec<f64>) {
        if self.cycles.len() == ASSP_WINDOW_CYCLES {
            self.cycles.remove(0);
        }
        self.cycles.push(samples);
    }

    fn window(&self, rate: u32, start: f64) -> Result<Waveform> {
        Waveform::new(rate, self.cycles.concat(), start)
    }
}

/// As [`simulate`], calling `observer` with the waveforms of every cycle.
pub fn simulate_observed(
    scenario: &Scenario,
    source: &SourceParams,
    config: &SimConfig,
    mut observer: impl FnMut(&CycleFrame<'_>),
) -> Result<Dataset> {
    scenario.validate()?;
    source.validate()?;
    let rate = config.wave_hz;
    let per_cycle_f = rate as f64 / source.freq;
    let per_cycle = per_cycle_f.round() as usize;
    if (per_cycle_f - per_cycle as f64).abs() > 1e-9 || per_cycle < MIN_SAMPLES_PER_CYCLE {
        return Err(Error::config(format!(
            "wave rate {rate} Hz must be a whole multiple of {} Hz with at least {MIN_SAMPLES_PER_CYCLE} samples per cycle",
            source.freq
        )));
    }
    if !(config.report_hz.is_finite() && config.report_hz > 0.0) {
        return Err(Error::config("report rate must be positive"));
    }
    let ticks_f = scenario.duration * config.report_hz;
    let ticks = ticks_f.round() as usize;
    if (ticks_f - ticks as f64).abs() > 1e-6 || ticks == 0 {
        return Err(Error::config(format!(
            "duration {} s is not a whole number of {} Hz report ticks",
            scenario.duration, config.report_hz
        )));
    }
    let tick_end = |k: usize| (k as f64 * rate as f64 / config.report_hz).round() as usize;
    if tick_end(1) / per_cycle < ASSP_WINDOW_CYCLES {
        return Err(Error::config(format!(
            "report period is shorter than the {ASSP_WINDOW_CYCLES}-cycle metering window"
        )));
    }
    let cycles = tick_end(ticks) / per_cycle;
    let cycle_len = 1.0 / source.freq;

    let unit: Vec<f64> = (0..per_cycle)
        .map(|n| (2.0 * std::f64::consts::PI * n as f64 / per_cycle as f64).sin())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(source.rng_seed);
    let noise = if source.noise_std > 0.0 {
        Some(Normal::new(0.0, source.noise_std).map_err(|e| Error::config(e.to_string()))?)
    } else {
        None
    };

    let specs = &scenario.appliances;
    let mut states: Vec<ApplianceState> = specs.iter().map(|s| s.initial_state()).collect();
    let index_of = |id: &str| specs.iter().position(|s| s.id == id);
    let effect_cycle = |t: f64| (t * source.freq - 1e-9).ceil().max(0.0) as usize;

    let mut events = Vec::with_capacity(scenario.schedule.len());
    let mut next_action = 0;
    let mut apply_due = |cycle: usize, states: &mut Vec<ApplianceState>, events: &mut Vec<GroundTruthEvent>, all: bool| -> Result<()> {
        while let Some(action) = scenario.schedule.get(next_action) {
            if !all && effect_cycle(action.time) > cycle {
                break;
            }
            let idx = index_of(&action.appliance_id)
                .ok_or_else(|| Error::config(format!("unknown appliance `{}`", action.appliance_id)))?;
            let (event, next) = emit_event(&specs[idx], &states[idx], action)?;
            states[idx] = next;
            events.push(event);
            next_action += 1;
        }
        Ok(())
    };

    let mut emf_history = History::new();
    let mut node_history = History::new();
    let mut branch_history: Vec<History> = specs.iter().map(|_| History::new()).collect();
    let mut total_history = History::new();

    let mut aggregate = Vec::with_capacity(ticks);
    let mut per_appliance: Vec<Vec<ElectricalRecord>> = specs.iter().map(|_| Vec::with_capacity(ticks)).collect();
    let mut tick = 1;

    for cycle in 0..cycles {
        apply_due(cycle, &mut states, &mut events, false)?;
        let t0 = cycle as f64 * cycle_len;
        let fail = |reason: String| Error::Simulation {
            t0,
            t1: t0 + cycle_len,
            reason,
        };

        let amplitude = 2f64.sqrt() * (source.v_nominal + noise.map_or(0.0, |n| n.sample(&mut rng)));
        let emf: Vec<f64> = unit.iter().map(|s| amplitude * s).collect();

        let mut node = emf.clone();
        let mut outputs = Vec::with_capacity(specs.len());
        let mut total = vec![0.0; per_cycle];
        for iteration in 0.. {
            let u = Waveform::new(rate, node.clone(), t0).map_err(|e| fail(e.to_string()))?;
            outputs.clear();
            total.iter_mut().for_each(|v| *v = 0.0);
            for (spec, state) in specs.iter().zip(&states) {
                let out = step(spec, state, &u, source.freq).map_err(|e| fail(format!("{}: {e}", spec.id)))?;
                for (acc, v) in total.iter_mut().zip(out.current.samples()) {
                    *acc += v;
                }
                outputs.push(out);
            }
            if source.source_resistance == 0.0 {
                break;
            }
            let mut change = 0f64;
            let next: Vec<f64> = emf
                .iter()
                .zip(&total)
                .zip(&node)
                .map(|((e, i), old)| {
                    let v = e - source.source_resistance * i;
                    change = change.max((v - old).abs());
                    v
                })
                .collect();
            if change < NODE_VOLTAGE_TOLERANCE {
                break;
            }
            if iteration + 1 >= MAX_NODE_ITERATIONS {
                return Err(fail(format!(
                    "node voltage did not settle within {MAX_NODE_ITERATIONS} iterations (last change {change:.3e} V)"
                )));
            }
            node = next;
        }

        let mut branches = Vec::with_capacity(specs.len());
        for (k, out) in outputs.into_iter().enumerate() {
            if let Some(auto) = &out.auto {
                events.push(GroundTruthEvent {
                    time: auto.time,
                    appliance_id: specs[k].id.clone(),
                    state_from: auto.from.clone(),
                    state_to: auto.to.clone(),
                    note: AUTO_NOTE.to_string(),
                    warning: false,
                });
            }
            states[k] = out.state;
            branches.push(out.current.into_samples());
        }
        observer(&CycleFrame {
            cycle,
            start_time: t0,
            emf: &emf,
            node: &node,
            branches: &branches,
            total: &total,
        });

        emf_history.push(emf);
        node_history.push(node);
        for (h, b) in branch_history.iter_mut().zip(branches) {
            h.push(b);
        }
        total_history.push(total);

        while tick <= ticks && tick_end(tick) / per_cycle == cycle + 1 {
            let t = tick as f64 / config.report_hz;
            let start = (cycle + 1 - ASSP_WINDOW_CYCLES) as f64 * cycle_len;
            let meter = |u: &History, i: &History| -> Result<ElectricalRecord> {
                meter_window(&u.window(rate, start)?, &i.window(rate, start)?, t)
            };
            aggregate.push(meter(&emf_history, &total_history).map_err(|e| fail(e.to_string()))?);
            for (k, h) in branch_history.iter().enumerate() {
                per_appliance[k].push(meter(&node_history, h).map_err(|e| fail(e.to_string()))?);
            }
            tick += 1;
        }
    }
    apply_due(cycles, &mut states, &mut events, true)?;
    events.sort_by(|a, b| a.time.total_cmp(&b.time));

    Ok(Dataset {
        aggregate,
        per_appliance: specs.iter().map(|s| s.id.clone()).zip(per_appliance).collect(),
        events,
        meta: DatasetMeta {
            seed: source.rng_seed,
            wave_hz: rate,
            report_hz: config.report_hz,
            duration_s: scenario.duration,
            scenario_sha256: scenario.content_hash()?,
            source: *source,
            appliances: specs.iter().map(|s| s.id.clone()).collect(),
        },
    })
}

/// Power balance of one report tick.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelAggregate {
    pub t: f64,
    /// Active power at the source terminals, W.
    pub p_o: f64,
    /// Active power of each appliance, in `meta.appliances` order.
    pub p_i: Vec<f64>,
    /// Joule loss in the source resistance, W.
    pub loss: f64,
}

impl PanelAggregate {
    pub fn residual(&self) -> f64 {
        (self.p_o - self.p_i.iter().sum::<f64>() - self.loss).abs()
    }
}

impl Dataset {
    pub fn ticks(&self) -> usize {
        self.aggregate.len()
    }

    pub fn panel_aggregate(&self, tick: usize) -> Option<PanelAggregate> {
        let agg = self.aggregate.get(tick)?;
        let p_i = self
            .meta
            .appliances
            .iter()
            .map(|id| self.per_appliance.get(id).and_then(|r| r.get(tick)).map(|r| r.p))
            .collect::<Option<Vec<_>>>()?;
        Some(PanelAggregate {
            t: agg.t,
            p_o: agg.p,
            p_i,
            loss: agg.i_rms * agg.i_rms * self.meta.source.source_resistance,
        })
    }
}

/// Worst power-balance residual over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// Largest `|p_o − Σp_i − E|`, W.
    pub max_residual: f64,
    /// Largest residual relative to the panel power of its tick; ticks with
    /// no panel power count only if their residual is non-zero.
    pub max_relative: f64,
    /// Tick holding `max_relative`.
    pub worst_tick: Option<usize>,
}

pub fn panel_power_identity(d: &Dataset) -> IdentityReport {
    let mut report = IdentityReport {
        max_residual: 0.0,
        max_relative: 0.0,
        worst_tick: None,
    };
    for k in 0..d.ticks() {
        let Some(agg) = d.panel_aggregate(k) else { continue };
        let r = agg.residual();
        let rel = if agg.p_o > 0.0 {
            r / agg.p_o
        } else if r == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        report.max_residual = report.max_residual.max(r);
        if rel > report.max_relative || report.worst_tick.is_none() {
            report.max_relative = rel;
            report.worst_tick = Some(k);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(text: &str) -> Scenario {
        Scenario::parse(text).unwrap()
    }

    const TWO_LAMPS: &str = r#"
duration_s = 1
[[appliance]]
id = "a"
kind = "incandescent"
params = { rated_power = 100 }
[[appliance]]
id = "b"
kind = "incandescent"
params = { rated_power = 100 }
[[action]]
t_s = 0
appliance = "a"
action = "turn_on"
[[action]]
t_s = 0
appliance = "b"
action = "turn_on"
"#;

    #[test]
    fn two_lamps_add_up() {
        let d = simulate(&scenario(TWO_LAMPS), &SourceParams::default(), &SimConfig::default()).unwrap();
        assert_eq!(d.ticks(), 20);
        for r in &d.aggregate {
            assert!((r.p - 200.0).abs() < 1e-6, "{}", r.p);
        }
        assert_eq!(d.events.len(), 2);
        assert!(panel_power_identity(&d).max_relative < 1e-9);
    }

    #[test]
    fn kettle_sags_the_node() {
        let text = r#"
duration_s = 1
[[appliance]]
id = "kettle"
kind = "on_off_heater"
params = { rated_power = 2000 }
[[action]]
t_s = 0
appliance = "kettle"
action = "turn_on"
"#;
        let source = SourceParams {
            source_resistance: 0.4,
            ..SourceParams::default()
        };
        let d = simulate(&scenario(text), &source, &SimConfig::default()).unwrap();
        // hand solution: I = 235 / (0.4 + 235²/2000)
        let r_kettle = 235.0 * 235.0 / 2000.0;
        let current = 235.0 / (0.4 + r_kettle);
        let kettle = &d.per_appliance["kettle"];
        let sag = 235.0 - kettle.last().unwrap().v_rms;
        assert!((sag - current * 0.4).abs() < 1e-4, "sag {sag}");
        assert!((3.3..3.4).contains(&sag));
        let agg = d.panel_aggregate(d.ticks() - 1).unwrap();
        assert!((agg.loss - current * current * 0.4).abs() < 1e-4);
        assert!(panel_power_identity(&d).max_relative < 1e-6);
    }

    #[test]
    fn empty_scenario_is_silent() {
        let d = simulate(&scenario("duration_s = 0.5"), &SourceParams::default(), &SimConfig::default()).unwrap();
        assert_eq!(d.ticks(), 10);
        assert!(d.aggregate.iter().all(|r| r.p == 0.0 && r.i_rms == 0.0));
        let report = panel_power_identity(&d);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn observer_sees_kcl() {
        let mut cycles = 0;
        simulate_observed(&scenario(TWO_LAMPS), &SourceParams::default(), &SimConfig::default(), |f| {
            cycles += 1;
            for n in 0..f.total.len() {
                let sum: f64 = f.branches.iter().map(|b| b[n]).sum();
                assert_eq!(sum, f.total[n]);
            }
        })
        .unwrap();
        assert_eq!(cycles, 50);
    }

    #[test]
    fn rejects_bad_rates() {
        let s = scenario(TWO_LAMPS);
        let src = SourceParams::default();
        let fast = SimConfig {
            report_hz: 40.0,
            ..SimConfig::default()
        };
        assert!(simulate(&s, &src, &fast).is_err());
        let odd = SimConfig {
            wave_hz: 10_001,
            ..SimConfig::default()
        };
        assert!(simulate(&s, &src, &odd).is_err());
    }
}
