use std::path::PathBuf;

use nilmsim::analysis::AGGREGATE_CHANNEL;
use nilmsim::appliances::{ApplianceKind, ApplianceParams};
use nilmsim::cli::exit_code;
use nilmsim::panel::{simulate, SimConfig, SourceParams};
use nilmsim::scenario::{actions_in_interval, Scenario};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> Scenario {
    Scenario::load(fixture(name)).unwrap()
}

#[test]
fn refrigerator_duty_cycle_shape() {
    let s = load("refrigerator_duty_cycle.toml");
    assert_eq!(s.duration, 17000.0);
    assert_eq!(s.appliances.len(), 1);
    assert_eq!(s.schedule.len(), 10);
    assert!(s.schedule.windows(2).all(|w| w[0].time <= w[1].time));
    let first = actions_in_interval(&s, 0.0, 100.0);
    assert_eq!(first.len(), 1);
    assert_eq!(first[0].time, 24.25);
    assert_eq!(first[0].action.name(), "compressor_on");
}

#[test]
fn kitchen_evening_shape() {
    let s = load("kitchen_evening.toml");
    assert_eq!(s.duration, 1770.0);
    assert_eq!(s.appliances.len(), 7);
    assert_eq!(s.schedule.len(), 14);
    let kinds: Vec<ApplianceKind> = s.appliances.iter().map(|a| a.params.kind()).collect();
    for kind in [
        ApplianceKind::Incandescent,
        ApplianceKind::OnOffHeater,
        ApplianceKind::FsmTable,
        ApplianceKind::TriacDimmer,
    ] {
        assert!(kinds.contains(&kind), "no {kind:?}");
    }
}

#[test]
fn split_ac_states() {
    let s = load("split_ac.toml");
    let ApplianceParams::FsmTable(p) = &s.appliances[0].params else {
        panic!("expected a state table");
    };
    assert_eq!(p.states.len(), 8);
    let speed1 = p.states.iter().find(|st| st.name == "cool_speed_1").unwrap();
    assert_eq!((speed1.p_target, speed1.q_target), (1097.25, 210.88));
    assert_eq!(s.schedule.last().unwrap().time, 13260.0);
    assert!(s.duration > 13260.0);
}

#[test]
fn every_fixture_round_trips() {
    for name in [
        "kettle.toml",
        "refrigerator_brand_b.toml",
        "split_ac.toml",
        "refrigerator_duty_cycle.toml",
        "kitchen_evening.toml",
    ] {
        let s = load(name);
        let back = Scenario::parse(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s, "{name}");
        assert_eq!(back.content_hash().unwrap(), s.content_hash().unwrap());
    }
}

#[test]
fn other_refrigerator_keeps_its_inrush_signature() {
    let s = load("refrigerator_brand_b.toml");
    let d = simulate(&s, &SourceParams::default(), &SimConfig::default()).unwrap();
    let fridge = &d.per_appliance["refrigerator"];
    let peak = fridge.iter().map(|r| r.i_rms).fold(0.0, f64::max);
    let steady: Vec<f64> = fridge.iter().filter(|r| r.t > 50.0 && r.t <= 60.0).map(|r| r.i_rms).collect();
    let steady = steady.iter().sum::<f64>() / steady.len() as f64;
    assert!(peak >= 4.0 * steady, "peak {peak} steady {steady}");

    let default = load("refrigerator_duty_cycle.toml");
    let short = Scenario {
        duration: 120.0,
        appliances: default.appliances.clone(),
        schedule: actions_in_interval(&default, 0.0, 100.0).into_iter().cloned().collect(),
    };
    let d0 = simulate(&short, &SourceParams::default(), &SimConfig::default()).unwrap();
    let default_peak = d0.per_appliance["refrigerator"].iter().map(|r| r.i_rms).fold(0.0, f64::max);
    assert!((peak - default_peak).abs() > 0.1, "{peak} vs {default_peak}");

    // door light on with the compressor running
    let door = fridge.iter().find(|r| r.t > 65.0).unwrap().p;
    let before = fridge.iter().find(|r| r.t > 55.0).unwrap().p;
    assert!((door - before - 3.0).abs() < 0.2, "{door} - {before}");
    assert_eq!(d.aggregate.len(), 2400);
    assert!(!d.per_appliance.contains_key(AGGREGATE_CHANNEL));
}

#[test]
fn schedule_past_the_end_is_a_config_error() {
    let text = std::fs::read_to_string(fixture("kettle.toml")).unwrap().replace("t_s = 0", "t_s = 401");
    let e = Scenario::parse(&text).unwrap_err();
    assert_eq!(exit_code(&e), 65);
    assert!(e.to_string().contains("401"), "{e}");
}
