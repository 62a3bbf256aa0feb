//! Synthetic load-monitoring datasets for a single-phase household panel.
//!
//! A [`scenario::Scenario`] names the appliances behind the panel and a
//! schedule of user actions. [`panel::simulate`] drives a sampled mains
//! source through every appliance model cycle by cycle, meters the aggregate
//! and each branch at the report rate and logs every state change as a
//! ground-truth event. [`cli`] writes and reads the resulting CSV, JSONL and
//! JSON files, and [`analysis`] computes per-state statistics and compares
//! two datasets.
//!
//! ```no_run
//! use nilmsim::panel::{simulate, SimConfig, SourceParams};
//! use nilmsim::scenario::Scenario;
//!
//! let scenario = Scenario::load("kitchen.toml")?;
//! let dataset = simulate(&scenario, &SourceParams::default(), &SimConfig::default())?;
//! println!("{} ticks, {} events", dataset.ticks(), dataset.events.len());
//! # Ok::<(), nilmsim::Error>(())
//! ```

pub mod analysis;
pub mod appliances;
pub mod cli;
pub mod error;
pub mod metering;
pub mod panel;
pub mod scenario;

pub use error::{Error, Result};
