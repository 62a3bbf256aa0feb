//! Two runs of the same scenario with different voltage-noise seeds, compared
//! channel by channel.

use std::path::Path;

use nilmsim::analysis::compare_datasets;
use nilmsim::cli::format_comparison;
use nilmsim::panel::{simulate, SimConfig, SourceParams};
use nilmsim::scenario::Scenario;

fn main() -> nilmsim::Result<()> {
    let scenario = Scenario::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/kitchen_evening.toml"))?;
    let run = |seed| {
        let source = SourceParams {
            noise_std: 2.0,
            rng_seed: seed,
            ..SourceParams::default()
        };
        simulate(&scenario, &source, &SimConfig::default())
    };
    let report = compare_datasets(&run(1)?, &run(2)?)?;
    print!("{}", format_comparison(&report));
    Ok(())
}
