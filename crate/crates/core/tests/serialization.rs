use std::path::PathBuf;

use geomphase_core::experiments::{output, run_evolution, run_twin_pulse, ConfigMap, EvolutionSummary, ScenarioConfig};
use geomphase_core::phase::PhaseReport;

fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ScenarioConfig::from_map(&ConfigMap::from_file(&path).unwrap()).unwrap()
}

fn assert_round_trip(summary: &EvolutionSummary) {
    let first = output::to_json(summary).unwrap();
    let parsed: EvolutionSummary = serde_json::from_str(&first).unwrap();
    assert_eq!(&parsed, summary);
    assert_eq!(output::to_json(&parsed).unwrap(), first);
}

#[test]
fn evolution_summary_round_trips_byte_identically() {
    let out = run_evolution(&scenario("fig2.conf")).unwrap();
    assert_round_trip(&out.summary);
}

#[test]
fn twin_summary_round_trips_byte_identically() {
    let out = run_twin_pulse(&scenario("fig4.conf")).unwrap();
    assert_round_trip(&out.summary);
}

#[test]
fn undefined_phases_serialize_as_null() {
    let mut cfg = scenario("fig4.conf");
    cfg.method = geomphase_core::experiments::Method::Eigenbasis;
    let out = run_twin_pulse(&cfg).unwrap();
    let report: &PhaseReport = out.summary.report();
    assert!(report.big_gamma12.is_none());
    let json = output::to_json(report).unwrap();
    assert!(json.contains("\"Gamma12\": null"), "{json}");
    let back: PhaseReport = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, report);
}

#[test]
fn config_serializes_with_its_permutation_labels() {
    let out = run_twin_pulse(&scenario("fig4.conf")).unwrap();
    let json = output::to_json(&out.summary).unwrap();
    assert!(json.contains("\"expected_permutation\": [\n    3,\n    1,\n    2\n  ]"), "{json}");
}
