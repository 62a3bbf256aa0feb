//! Builds a scenario in code, prints its TOML form and exports a dataset to
//! a temporary directory.

use nilmsim::appliances::{ApplianceParams, ApplianceSpec, DimmerParams, ResistiveParams};
use nilmsim::cli::{write_dataset, ExportConfig};
use nilmsim::panel::{simulate, SimConfig, SourceParams};
use nilmsim::scenario::{Action, Scenario, ScheduledAction};

fn at(time: f64, id: &str, action: Action) -> ScheduledAction {
    ScheduledAction {
        time,
        appliance_id: id.into(),
        action,
        note: None,
    }
}

fn main() -> nilmsim::Result<()> {
    let scenario = Scenario {
        duration: 10.0,
        appliances: vec![
            ApplianceSpec {
                id: "desk_lamp".into(),
                label: "Desk lamp".into(),
                params: ApplianceParams::Incandescent(ResistiveParams {
                    rated_power: 60.0,
                    nominal_voltage: 235.0,
                }),
            },
            ApplianceSpec {
                id: "ceiling".into(),
                label: "Dimmed ceiling light".into(),
                params: ApplianceParams::TriacDimmer(DimmerParams {
                    lamp_resistance: 552.25,
                    firing_angle: 1.2,
                }),
            },
        ],
        schedule: vec![
            at(1.0, "desk_lamp", Action::TurnOn),
            at(2.5, "ceiling", Action::TurnOn),
            at(6.0, "ceiling", Action::SetDimmer(0.4)),
            at(8.0, "desk_lamp", Action::TurnOff),
        ],
    };
    scenario.validate()?;
    println!("{}", scenario.to_toml()?);
    println!("sha256 {}", scenario.content_hash()?);

    let source = SourceParams {
        noise_std: 0.5,
        rng_seed: 3,
        ..SourceParams::default()
    };
    let d = simulate(&scenario, &source, &SimConfig::default())?;
    let dir = std::env::temp_dir().join("nilmsim-scenario-builder");
    for path in write_dataset(&d, &ExportConfig::new(&dir))? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
