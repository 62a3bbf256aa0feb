//! Dataset export and import, and the commands behind the `nilmsim` binary.
//!
//! A dataset directory holds:
//!
//! - `aggregate.csv` and `appliance_<id>.csv`, one row per report tick with
//!   header `time_s,v_rms,i_rms,p_w,q_var,s_va,pf,freq_hz`; appliance files
//!   report the panel node voltage;
//! - `events.jsonl`, one `{"t_s","appliance","from","to","note"}` object per
//!   ground-truth event;
//! - `meta.json`, the run settings and the scenario hash.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{record_statistics, steady_segment, ComparisonReport, StateStatistics, AGGREGATE_CHANNEL};
use crate::appliances::ApplianceKind;
use crate::error::{Error, Result};
use crate::metering::ElectricalRecord;
use crate::panel::{panel_power_identity, simulate, Dataset, DatasetMeta, IdentityReport, SimConfig, SourceParams};
use crate::scenario::{GroundTruthEvent, Scenario};

pub const CSV_HEADER: [&str; 8] = ["time_s", "v_rms", "i_rms", "p_w", "q_var", "s_va", "pf", "freq_hz"];
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const META_FILE: &str = "meta.json";
/// Environment variable that supplies the output directory when none is given.
pub const OUT_DIR_ENV: &str = "NILMSIM_OUT";

pub fn appliance_file(id: &str) -> String {
    format!("appliance_{id}.csv")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputFormat {
    AggregateCsv,
    PerApplianceCsv,
    EventsJsonl,
    MetaJson,
}

impl OutputFormat {
    pub const ALL: [OutputFormat; 4] = [
        OutputFormat::AggregateCsv,
        OutputFormat::PerApplianceCsv,
        OutputFormat::EventsJsonl,
        OutputFormat::MetaJson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::AggregateCsv => "aggregate_csv",
            OutputFormat::PerApplianceCsv => "per_appliance_csv",
            OutputFormat::EventsJsonl => "events_jsonl",
            OutputFormat::MetaJson => "meta_json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OutputFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = OutputFormat::ALL.iter().map(|f| f.as_str()).collect();
                Error::invalid(format!("unknown format `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportConfig {
    pub output_dir: PathBuf,
    pub formats: BTreeSet<OutputFormat>,
    pub decimal_places: usize,
}

impl ExportConfig {
    /// All formats at the default precision.
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            output_dir: output_dir.into(),
            formats: OutputFormat::ALL.into_iter().collect(),
            decimal_places: 6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.formats.is_empty() {
            return Err(Error::invalid("no output format selected"));
        }
        if self.decimal_places > 17 {
            return Err(Error::invalid("decimal_places must be at most 17"));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    #[serde(flatten)]
    meta: DatasetMeta,
    ticks: usize,
    events: usize,
    formats: Vec<String>,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            context: path.display().to_string(),
            message: format!("{other:?}"),
        },
    }
}

fn write_records(path: &Path, records: &[ElectricalRecord], dp: usize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        let row = [r.t, r.v_rms, r.i_rms, r.p, r.q, r.s_va, r.pf, r.freq].map(|v| format!("{v:.dp$}"));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_events(path: &Path, events: &[GroundTruthEvent]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in events {
        let line = serde_json::to_string(e).map_err(|err| Error::invalid(err.to_string()))?;
        writeln!(w, "{line}").map_err(|err| Error::io(path, err))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_meta(path: &Path, d: &Dataset, formats: &BTreeSet<OutputFormat>) -> Result<()> {
    let meta = MetaFile {
        meta: d.meta.clone(),
        ticks: d.ticks(),
        events: d.events.len(),
        formats: formats.iter().map(|f| f.as_str().to_string()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&meta).map_err(|e| Error::invalid(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the selected files. On failure every file this call created is
/// removed again.
pub fn write_dataset(d: &Dataset, cfg: &ExportConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let result = (|| -> Result<()> {
        let mut attempt = |name: String, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
            let path = dir.join(name);
            written.push(path.clone());
            f(&path)
        };
        for format in &cfg.formats {
            match format {
                OutputFormat::AggregateCsv => {
                    attempt(AGGREGATE_FILE.into(), &|p| write_records(p, &d.aggregate, cfg.decimal_places))?
                }
                OutputFormat::PerApplianceCsv => {
                    for id in &d.meta.appliances {
                        let records = d
                            .per_appliance
                            .get(id)
                            .ok_or_else(|| Error::invalid(format!("dataset lacks appliance `{id}`")))?;
                        attempt(appliance_file(id), &|p| write_records(p, records, cfg.decimal_places))?;
                    }
                }
                OutputFormat::EventsJsonl => attempt(EVENTS_FILE.into(), &|p| write_events(p, &d.events))?,
                OutputFormat::MetaJson => attempt(META_FILE.into(), &|p| write_meta(p, d, &cfg.formats))?,
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        for path in &written {
            let _ = std::fs::remove_file(path);
        }
        return Err(e);
    }
    Ok(written)
}

/// Reads records written by [`write_dataset`].
pub fn read_records(path: &Path) -> Result<Vec<ElectricalRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            context: format!("{}: header", path.display()),
            message: format!("expected `{}`", CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let mut v = [0.0; 8];
        for (k, field) in row.iter().enumerate().take(8) {
            v[k] = field.parse().map_err(|_| Error::Parse {
                context: format!("{}: line {}, {}", path.display(), line + 2, CSV_HEADER[k]),
                message: format!("`{field}` is not a number"),
            })?;
        }
        if row.len() != 8 {
            return Err(Error::Parse {
                context: format!("{}: line {}", path.display(), line + 2),
                message: format!("expected 8 fields, found {}", row.len()),
            });
        }
        out.push(ElectricalRecord {
            t: v[0],
            v_rms: v[1],
            i_rms: v[2],
            p: v[3],
            q: v[4],
            s_va: v[5],
            pf: v[6],
            freq: v[7],
        });
    }
    Ok(out)
}

pub fn read_events(path: &Path) -> Result<Vec<GroundTruthEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| Error::Parse {
            context: format!("{}: line {}", path.display(), k + 1),
            message: e.to_string(),
        })?;
        out.push(event);
    }
    Ok(out)
}

/// Loads a dataset directory. `meta.json` and `events.jsonl` are optional;
/// without the former the appliance list comes from the CSV file names.
pub fn read_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let aggregate = read_records(&dir.join(AGGREGATE_FILE))?;
    let meta_path = dir.join(META_FILE);
    let meta = if meta_path.exists() {
        let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let file: MetaFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: meta_path.display().to_string(),
            message: e.to_string(),
        })?;
        file.meta
    } else {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let name = entry.map_err(|e| Error::io(dir, e))?.file_name();
            let name = name.to_string_lossy();
            if let Some(id) = name.strip_prefix("appliance_").and_then(|n| n.strip_suffix(".csv")) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        let report_hz = match aggregate.first() {
            Some(r) if r.t > 0.0 => 1.0 / r.t,
            _ => SimConfig::default().report_hz,
        };
        DatasetMeta {
            seed: 0,
            wave_hz: SimConfig::default().wave_hz,
            report_hz,
            duration_s: aggregate.last().map_or(0.0, |r| r.t),
            scenario_sha256: String::new(),
            source: SourceParams::default(),
            appliances: ids,
        }
    };
    let mut per_appliance = BTreeMap::new();
    for id in &meta.appliances {
        let path = dir.join(appliance_file(id));
        if path.exists() {
            per_appliance.insert(id.clone(), read_records(&path)?);
        }
    }
    let events_path = dir.join(EVENTS_FILE);
    let events = if events_path.exists() {
        read_events(&events_path)?
    } else {
        Vec::new()
    };
    Ok(Dataset {
        aggregate,
        per_appliance,
        events,
        meta,
    })
}

/// Process exit status for an error: 74 for I/O, 65 for bad input data,
/// 70 for failures inside the simulation.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 74,
        Error::Simulation { .. } | Error::Numerical(_) => 70,
        _ => 65,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub duration: f64,
    pub ticks: usize,
    pub events: usize,
    pub warnings: usize,
    pub identity: IdentityReport,
    pub files: Vec<PathBuf>,
}

impl std::fmt::Display for SimulateSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "duration      {} s", self.duration)?;
        writeln!(f, "ticks         {}", self.ticks)?;
        writeln!(f, "events        {} ({} without effect)", self.events, self.warnings)?;
        writeln!(
            f,
            "power balance max |p_o - sum p_i - E| = {:.3e} W ({:.3e} relative)",
            self.identity.max_residual, self.identity.max_relative
        )?;
        write!(f, "files         {}", self.files.len())
    }
}

/// Runs a scenario file and exports the dataset.
pub fn cmd_simulate(
    scenario_path: &Path,
    source: &SourceParams,
    config: &SimConfig,
    export: &ExportConfig,
) -> Result<SimulateSummary> {
    export.validate()?;
    let scenario = Scenario::load(scenario_path)?;
    let dataset = simulate(&scenario, source, config)?;
    let files = write_dataset(&dataset, export)?;
    Ok(SimulateSummary {
        duration: scenario.duration,
        ticks: dataset.ticks(),
        events: dataset.events.len(),
        warnings: dataset.events.iter().filter(|e| e.warning || e.note.ends_with(crate::scenario::NO_CHANGE_MARKER)).count(),
        identity: panel_power_identity(&dataset),
        files,
    })
}

/// Mean and deviation of each parameter for one channel over `[t0, t1]`,
/// optionally skipping the settling time after events.
pub fn cmd_stats(dataset_dir: &Path, channel: &str, t0: f64, t1: f64, skip_settling: bool) -> Result<Vec<StateStatistics>> {
    let d = read_dataset(dataset_dir)?;
    let records = if channel == AGGREGATE_CHANNEL {
        &d.aggregate
    } else {
        d.per_appliance
            .get(channel)
            .ok_or_else(|| Error::invalid(format!("dataset has no channel `{channel}`")))?
    };
    let (first, last) = match (records.first(), records.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::invalid("dataset is empty")),
    };
    if !(t0 < t1) || t1 < first || t0 > last {
        return Err(Error::invalid(format!(
            "interval [{t0}, {t1}] is outside the dataset span [{first}, {last}]"
        )));
    }
    let selected: Vec<&ElectricalRecord> = if skip_settling {
        let appliance = (channel != AGGREGATE_CHANNEL).then_some(channel);
        steady_segment(records, &d.events, appliance, t0, t1)
    } else {
        records.iter().filter(|r| r.t >= t0 && r.t <= t1).collect()
    };
    record_statistics(&selected)
}

/// Renders statistics as a `mean±std` row per channel.
pub fn format_statistics(channel: &str, stats: &[StateStatistics]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<16} {:>18} {:>20} {:>18} {:>14} {:>6}", "channel", "I (A)", "P (W)", "Q (var)", "PF (%)", "n");
    let cell = |s: &StateStatistics| {
        if s.parameter == crate::analysis::Parameter::Pf {
            format!("{:.2}±{:.2}", s.mean * 100.0, s.std * 100.0)
        } else if s.parameter == crate::analysis::Parameter::IRms {
            format!("{:.3}±{:.3}", s.mean, s.std)
        } else {
            format!("{:.2}±{:.2}", s.mean, s.std)
        }
    };
    let _ = writeln!(
        out,
        "{:<16} {:>18} {:>20} {:>18} {:>14} {:>6}",
        channel,
        cell(&stats[0]),
        cell(&stats[1]),
        cell(&stats[2]),
        cell(&stats[3]),
        stats[0].n
    );
    out
}

pub fn cmd_compare(reference_dir: &Path, model_dir: &Path) -> Result<ComparisonReport> {
    let reference = read_dataset(reference_dir)?;
    let model = read_dataset(model_dir)?;
    crate::analysis::compare_datasets(&reference, &model)
}

/// One row per channel: correlation in percent for each parameter, followed
/// by the largest and mean percentage error.
pub fn format_comparison(report: &ComparisonReport) -> String {
    use crate::analysis::Parameter;
    let mut out = String::new();
    let _ = writeln!(out, "correlation coefficient r (%)");
    let _ = writeln!(out, "{:<16} {:>9} {:>9} {:>9} {:>9}", "channel", "I", "P", "Q", "PF");
    let mut channels: Vec<&str> = Vec::new();
    for row in &report.rows {
        if !channels.contains(&row.channel.as_str()) {
            channels.push(&row.channel);
        }
    }
    let fmt_r = |r: Option<f64>| r.map_or("n/a".to_string(), |r| format!("{:.2}", r * 100.0));
    for ch in &channels {
        let cells: Vec<String> = Parameter::ALL
            .iter()
            .map(|p| fmt_r(report.get(ch, *p).and_then(|c| c.r)))
            .collect();
        let _ = writeln!(out, "{:<16} {:>9} {:>9} {:>9} {:>9}", ch, cells[0], cells[1], cells[2], cells[3]);
    }
    let _ = writeln!(out, "\npercentage error max / mean (%)");
    let _ = writeln!(out, "{:<16} {:>17} {:>17} {:>17} {:>17}", "channel", "I", "P", "Q", "PF");
    for ch in &channels {
        let cells: Vec<String> = Parameter::ALL
            .iter()
            .map(|p| {
                report
                    .get(ch, *p)
                    .map_or("n/a".into(), |c| format!("{:.3}/{:.3}", c.max_error, c.mean_error))
            })
            .collect();
        let _ = writeln!(out, "{:<16} {:>17} {:>17} {:>17} {:>17}", ch, cells[0], cells[1], cells[2], cells[3]);
    }
    out
}

/// Writes the per-tick percentage errors as CSV, one column per channel and
/// parameter.
pub fn write_error_series(report: &ComparisonReport, times: &[f64], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["time_s".to_string()];
    header.extend(report.rows.iter().map(|r| format!("{}.{}", r.channel, r.parameter)));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (k, t) in times.iter().enumerate() {
        let mut row = vec![format!("{t:.6}")];
        row.extend(report.rows.iter().map(|r| r.errors.get(k).map_or(String::new(), |e| format!("{e:.6}"))));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Lines describing every appliance kind.
pub fn list_kinds() -> String {
    let mut out = String::new();
    for kind in ApplianceKind::ALL {
        let _ = writeln!(out, "{:<16} {}", kind.as_str(), kind.description());
    }
    out
}

/// Short description of a parsed scenario.
pub fn describe_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "duration {} s, {} appliances, {} actions",
        s.duration,
        s.appliances.len(),
        s.schedule.len()
    );
    for a in &s.appliances {
        let actions = s.schedule.iter().filter(|x| x.appliance_id == a.id).count();
        let _ = writeln!(out, "  {:<16} {:<16} {:<24} {actions} actions", a.id, a.kind().as_str(), a.label);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dataset {
        let s = Scenario::parse(
            r#"
duration_s = 1
[[appliance]]
id = "lamp"
kind = "incandescent"
params = { rated_power = 60 }
[[action]]
t_s = 0.2
appliance = "lamp"
action = "turn_on"
"#,
        )
        .unwrap();
        simulate(&s, &SourceParams::default(), &SimConfig::default()).unwrap()
    }

    #[test]
    fn csv_round_trip_to_precision() {
        let d = small();
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExportConfig::new(dir.path());
        let files = write_dataset(&d, &cfg).unwrap();
        assert_eq!(files.len(), 4);
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back.meta, d.meta);
        assert_eq!(back.events.len(), d.events.len());
        for (a, b) in back.aggregate.iter().zip(&d.aggregate) {
            for p in [a.t - b.t, a.p - b.p, a.v_rms - b.v_rms, a.pf - b.pf] {
                assert!(p.abs() <= 0.5e-6 + 1e-12);
            }
        }
        let header = std::fs::read_to_string(dir.path().join(AGGREGATE_FILE)).unwrap();
        assert!(header.starts_with("time_s,v_rms,i_rms,p_w,q_var,s_va,pf,freq_hz\n"));
    }

    #[test]
    fn events_have_exactly_the_documented_keys() {
        let d = small();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&d, &ExportConfig::new(dir.path())).unwrap();
        let text = std::fs::read_to_string(dir.path().join(EVENTS_FILE)).unwrap();
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 5);
        for k in ["t_s", "appliance", "from", "to", "note"] {
            assert!(keys.contains(&k.to_string()), "{k}");
        }
    }

    #[test]
    fn failed_export_leaves_nothing_behind() {
        let mut d = small();
        d.per_appliance.clear();
        let dir = tempfile::tempdir().unwrap();
        assert!(write_dataset(&d, &ExportConfig::new(dir.path())).is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn format_names_parse() {
        for f in OutputFormat::ALL {
            assert_eq!(f.as_str().parse::<OutputFormat>().unwrap(), f);
        }
        assert!("xlsx".parse::<OutputFormat>().is_err());
    }
}
