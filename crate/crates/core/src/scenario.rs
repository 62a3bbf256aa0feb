//! Scripted appliance schedules and the ground-truth event log.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! duration_s = 1770
//!
//! [[appliance]]
//! id = "kettle"
//! kind = "on_off_heater"
//! label = "Kettle"
//! [appliance.params]
//! rated_power = 1800
//! water_mass = 1.2
//!
//! [[action]]
//! t_s = 810.15
//! appliance = "kettle"
//! action = "turn_on"
//! note = "optional free text"
//! ```
//!
//! Actions are `turn_on`, `turn_off`, `set_state` (with `state = "<name>"`),
//! `set_dimmer` (with `alpha = <radians>`), `door_open`, `door_close`,
//! `compressor_on`, `compressor_off` and `setpoint` (with `value = <°C>`).
//! Setpoints are logged but have no electrical effect.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::appliances::{ApplianceKind, ApplianceParams, ApplianceSpec, ApplianceState};
use crate::error::{Error, Result};

/// A user action addressed to one appliance.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    TurnOn,
    TurnOff,
    SetState(String),
    SetDimmer(f64),
    DoorOpen,
    DoorClose,
    CompressorOn,
    CompressorOff,
    Setpoint(f64),
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::TurnOn => "turn_on",
            Action::TurnOff => "turn_off",
            Action::SetState(_) => "set_state",
            Action::SetDimmer(_) => "set_dimmer",
            Action::DoorOpen => "door_open",
            Action::DoorClose => "door_close",
            Action::CompressorOn => "compressor_on",
            Action::CompressorOff => "compressor_off",
            Action::Setpoint(_) => "setpoint",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::SetState(s) => write!(f, "set_state({s})"),
            Action::SetDimmer(a) => write!(f, "set_dimmer({a})"),
            Action::Setpoint(v) => write!(f, "setpoint({v})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledAction {
    /// Seconds from the start of the run.
    pub time: f64,
    pub appliance_id: String,
    pub action: Action,
    pub note: Option<String>,
}

/// One labelled transition in the ground-truth log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthEvent {
    #[serde(rename = "t_s")]
    pub time: f64,
    #[serde(rename = "appliance")]
    pub appliance_id: String,
    #[serde(rename = "from")]
    pub state_from: String,
    #[serde(rename = "to")]
    pub state_to: String,
    pub note: String,
    /// Set when a scheduled action left the appliance unchanged.
    #[serde(skip)]
    pub warning: bool,
}

/// Note attached to transitions the appliance made by itself.
pub const AUTO_NOTE: &str = "auto";
/// Suffix added to the note of an action that changed nothing.
pub const NO_CHANGE_MARKER: &str = " [no change]";

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub duration: f64,
    pub appliances: Vec<ApplianceSpec>,
    /// Sorted by time; ties keep file order.
    pub schedule: Vec<ScheduledAction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    duration_s: Spanned<f64>,
    #[serde(default)]
    appliance: Vec<RawAppliance>,
    #[serde(default)]
    action: Vec<RawAction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAppliance {
    id: Spanned<String>,
    kind: Spanned<String>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    params: Option<Spanned<toml::Table>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    t_s: Spanned<f64>,
    appliance: Spanned<String>,
    action: Spanned<String>,
    #[serde(default)]
    state: Option<String>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Serialize)]
struct OutScenario<'a> {
    duration_s: f64,
    appliance: Vec<OutAppliance<'a>>,
    action: Vec<OutAction<'a>>,
}

#[derive(Serialize)]
struct OutAppliance<'a> {
    id: &'a str,
    kind: &'static str,
    label: &'a str,
    params: toml::Table,
}

#[derive(Serialize)]
struct OutAction<'a> {
    t_s: f64,
    appliance: &'a str,
    action: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_err<T>(text: &str, span: std::ops::Range<usize>, field: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        context: format!("line {}, {field}", line_of(text, span.start)),
        message: message.into(),
    })
}

fn build_action(raw: &RawAction, text: &str, idx: usize) -> Result<Action> {
    let field = format!("action[{idx}].action");
    let unexpected = |name: &str| -> Result<Action> {
        parse_err(text, raw.action.span(), &field, format!("`{name}` is not used by `{}`", raw.action.get_ref()))
    };
    let name = raw.action.get_ref().as_str();
    let needs_state = name == "set_state";
    let needs_alpha = name == "set_dimmer";
    let needs_value = name == "setpoint";
    if raw.state.is_some() && !needs_state {
        return unexpected("state");
    }
    if raw.alpha.is_some() && !needs_alpha {
        return unexpected("alpha");
    }
    if raw.value.is_some() && !needs_value {
        return unexpected("value");
    }
    let missing = |what: &str| parse_err(text, raw.action.span(), &field, format!("`{name}` needs `{what}`"));
    Ok(match name {
        "turn_on" => Action::TurnOn,
        "turn_off" => Action::TurnOff,
        "door_open" => Action::DoorOpen,
        "door_close" => Action::DoorClose,
        "compressor_on" => Action::CompressorOn,
        "compressor_off" => Action::CompressorOff,
        "set_state" => match &raw.state {
            Some(s) => Action::SetState(s.clone()),
            None => return missing("state"),
        },
        "set_dimmer" => match raw.alpha {
            Some(a) => Action::SetDimmer(a),
            None => return missing("alpha"),
        },
        "setpoint" => match raw.value {
            Some(v) if v.is_finite() => Action::Setpoint(v),
            _ => return missing("value"),
        },
        other => return parse_err(text, raw.action.span(), &field, format!("unknown action `{other}`")),
    })
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| {
            let context = match e.span() {
                Some(span) => format!("line {}", line_of(text, span.start)),
                None => "document".to_string(),
            };
            Error::Parse {
                context,
                message: e.message().to_string(),
            }
        })?;

        let duration = *raw.duration_s.get_ref();
        if !(duration.is_finite() && duration > 0.0) {
            return parse_err(text, raw.duration_s.span(), "duration_s", "must be positive");
        }

        let mut appliances = Vec::with_capacity(raw.appliance.len());
        let mut ids = HashSet::new();
        for (k, a) in raw.appliance.into_iter().enumerate() {
            let id = a.id.get_ref().clone();
            if !ids.insert(id.clone()) {
                return parse_err(text, a.id.span(), &format!("appliance[{k}].id"), format!("duplicate id `{id}`"));
            }
            let kind: ApplianceKind = match a.kind.get_ref().parse() {
                Ok(kind) => kind,
                Err(e) => return parse_err(text, a.kind.span(), &format!("appliance[{k}].kind"), e.to_string()),
            };
            let (params_span, table) = match a.params {
                Some(p) => (p.span(), p.into_inner()),
                None => (a.kind.span(), toml::Table::new()),
            };
            let params = match ApplianceParams::from_toml(kind, table) {
                Ok(p) => p,
                Err(e) => {
                    return parse_err(text, params_span, &format!("appliance[{k}].params"), e.message().to_string())
                }
            };
            let spec = ApplianceSpec {
                label: a.label.unwrap_or_else(|| id.clone()),
                id,
                params,
            };
            if let Err(e) = spec.validate() {
                return parse_err(text, a.kind.span(), &format!("appliance[{k}]"), e.to_string());
            }
            appliances.push(spec);
        }

        let mut schedule = Vec::with_capacity(raw.action.len());
        for (k, r) in raw.action.iter().enumerate() {
            let time = *r.t_s.get_ref();
            if !(time.is_finite() && (0.0..=duration).contains(&time)) {
                return parse_err(
                    text,
                    r.t_s.span(),
                    &format!("action[{k}].t_s"),
                    format!("time {time} outside [0, {duration}]"),
                );
            }
            let action = build_action(r, text, k)?;
            let id = r.appliance.get_ref();
            let Some(spec) = appliances.iter().find(|a| &a.id == id) else {
                return parse_err(
                    text,
                    r.appliance.span(),
                    &format!("action[{k}].appliance"),
                    format!("unknown appliance `{id}`"),
                );
            };
            if let Err(e) = spec.accepts(&action) {
                return parse_err(text, r.action.span(), &format!("action[{k}].action"), e.to_string());
            }
            schedule.push(ScheduledAction {
                time,
                appliance_id: id.clone(),
                action,
                note: r.note.clone(),
            });
        }
        schedule.sort_by(|a, b| a.time.total_cmp(&b.time));

        Ok(Self {
            duration,
            appliances,
            schedule,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { context, message } => Error::Parse {
                context: format!("{}: {context}", path.display()),
                message,
            },
            other => other,
        })
    }

    /// Checks the invariants `parse` enforces, for scenarios built in code.
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::config("duration must be positive"));
        }
        let mut ids = HashSet::new();
        for a in &self.appliances {
            if !ids.insert(a.id.as_str()) {
                return Err(Error::config(format!("duplicate appliance id `{}`", a.id)));
            }
            a.validate()?;
        }
        for (k, s) in self.schedule.iter().enumerate() {
            if !(s.time.is_finite() && (0.0..=self.duration).contains(&s.time)) {
                return Err(Error::config(format!("action #{k} at {} s is outside the run", s.time)));
            }
            if k > 0 && self.schedule[k - 1].time > s.time {
                return Err(Error::config("schedule is not sorted by time"));
            }
            self.appliance(&s.appliance_id)
                .ok_or_else(|| Error::config(format!("action #{k} names unknown appliance `{}`", s.appliance_id)))?
                .accepts(&s.action)?;
        }
        Ok(())
    }

    pub fn appliance(&self, id: &str) -> Option<&ApplianceSpec> {
        self.appliances.iter().find(|a| a.id == id)
    }

    /// Renders the scenario back to TOML; parsing the result gives an equal
    /// scenario.
    pub fn to_toml(&self) -> Result<String> {
        let ser = |e: toml::ser::Error| Error::config(format!("cannot serialize scenario: {e}"));
        let mut appliance = Vec::with_capacity(self.appliances.len());
        for a in &self.appliances {
            appliance.push(OutAppliance {
                id: &a.id,
                kind: a.kind().as_str(),
                label: &a.label,
                params: a.params.to_toml().map_err(ser)?,
            });
        }
        let action = self
            .schedule
            .iter()
            .map(|s| OutAction {
                t_s: s.time,
                appliance: &s.appliance_id,
                action: s.action.name(),
                state: match &s.action {
                    Action::SetState(name) => Some(name),
                    _ => None,
                },
                alpha: match s.action {
                    Action::SetDimmer(a) => Some(a),
                    _ => None,
                },
                value: match s.action {
                    Action::Setpoint(v) => Some(v),
                    _ => None,
                },
                note: s.note.as_deref(),
            })
            .collect();
        toml::to_string(&OutScenario {
            duration_s: self.duration,
            appliance,
            action,
        })
        .map_err(ser)
    }

    /// Hex SHA-256 of the canonical TOML rendering.
    pub fn content_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Actions with `t0 <= time < t1`, in schedule order.
pub fn actions_in_interval(s: &Scenario, t0: f64, t1: f64) -> Vec<&ScheduledAction> {
    s.schedule.iter().filter(|a| a.time >= t0 && a.time < t1).collect()
}

/// Applies `action` to an appliance in `state` and labels the transition.
/// The event carries the scheduled time, not the cycle at which the change
/// takes effect.
pub fn emit_event(
    spec: &ApplianceSpec,
    state: &ApplianceState,
    action: &ScheduledAction,
) -> Result<(GroundTruthEvent, ApplianceState)> {
    if spec.id != action.appliance_id {
        return Err(Error::config(format!(
            "action for `{}` dispatched to `{}`",
            action.appliance_id, spec.id
        )));
    }
    let (next, changed) = spec.apply(state, &action.action)?;
    let warning = !changed && !matches!(action.action, Action::Setpoint(_));
    let mut note = action.action.to_string();
    if let Some(user) = &action.note {
        note.push_str(": ");
        note.push_str(user);
    }
    if warning {
        note.push_str(NO_CHANGE_MARKER);
    }
    let event = GroundTruthEvent {
        time: action.time,
        appliance_id: spec.id.clone(),
        state_from: spec.mode(state),
        state_to: spec.mode(&next),
        note,
        warning,
    };
    Ok((event, next))
}
