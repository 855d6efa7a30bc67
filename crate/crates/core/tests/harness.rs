use cat0ot::harness::{emit_report, run_batch, run_scenario, Experiment, Format, Report, Scenario};
use cat0ot::Error;

fn scenario(text: &str) -> Scenario {
    Scenario::from_json(text).unwrap()
}

const LINE: &str = r#"{"space": {"kind": "euclidean", "dim": 2}, "experiment": "solve",
    "params": {"source": {"points": [[0, 0, 0], [0, 1, 0]]}, "target": {"points": [[0, 2, 0], [0, 3, 0]]}},
    "seed": 1}"#;

#[test]
fn line_instance_costs_two() {
    let report = run_scenario(&scenario(LINE)).unwrap();
    assert!(report.pass);
    assert_eq!(report.metric("cost"), Some(2.0));
    assert_eq!(report.scenario.experiment, Experiment::Solve);
}

#[test]
fn square_shell_estimate() {
    let report = run_scenario(&scenario(
        r#"{"space": {"kind": "euclidean", "dim": 2}, "experiment": "eilenberg",
            "params": {"gamma": [[0, 0, 0], [0, 1, 0]],
                       "region": {"kind": "box", "chart": 0, "lo": [0, 0], "hi": [1, 1]}},
            "seed": 5}"#,
    ))
    .unwrap();
    assert!(report.pass);
    let lhs = report.metrics.iter().find(|m| m.name == "lhs").unwrap();
    let sigma = lhs.sigma.unwrap();
    assert!(sigma > 0.0 && sigma < 0.01);
    assert!((lhs.value - std::f64::consts::FRAC_PI_4).abs() < 4.0 * sigma + 0.01);
}

#[test]
fn malformed_space_is_a_config_error() {
    let s = scenario(r#"{"space": {"kind": "open_book", "pages": 0}, "experiment": "polar", "seed": 1}"#);
    assert!(matches!(run_scenario(&s), Err(Error::ConfigInvalid { path, .. }) if path == "space"));
    assert!(matches!(
        Scenario::from_json(r#"{"space": {"kind": "klein_bottle"}, "experiment": "polar", "seed": 1}"#),
        Err(Error::ConfigInvalid { .. })
    ));
}

#[test]
fn json_report_round_trips() {
    let report = run_scenario(&scenario(LINE)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    emit_report(&report, Format::Json, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back.metrics, report.metrics);
    assert_eq!(back.scenario, report.scenario);
    assert_eq!(back.to_json().unwrap(), text);
}

#[test]
fn csv_report_has_header_and_rows() {
    let report = run_scenario(&scenario(LINE)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit_report(&report, Format::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("metric,value,sigma"));
    assert_eq!(lines.count(), report.metrics.len());
}

#[test]
fn unwritable_path_is_an_io_failure() {
    let report = run_scenario(&scenario(LINE)).unwrap();
    let path = std::path::Path::new("/nonexistent/dir/r.json");
    assert!(matches!(emit_report(&report, Format::Json, path), Err(Error::Io(_))));
}

#[test]
fn batches_keep_input_order_and_match_single_runs() {
    let spaces = [
        r#"{"kind": "euclidean", "dim": 3}"#,
        r#"{"kind": "star", "legs": 4}"#,
        r#"{"kind": "open_book", "pages": 2}"#,
        r#"{"kind": "comb", "depth": 2, "grid": 2}"#,
    ];
    let scenarios: Vec<Scenario> = spaces
        .iter()
        .enumerate()
        .map(|(k, s)| {
            scenario(&format!(
                r#"{{"space": {s}, "experiment": "polar", "params": {{"instances": 5, "n": 6}}, "seed": {k}}}"#
            ))
        })
        .collect();
    let batch = run_batch(&scenarios);
    assert_eq!(batch.len(), scenarios.len());
    for (s, r) in scenarios.iter().zip(&batch) {
        let r = r.as_ref().unwrap();
        assert_eq!(&r.scenario, s);
        assert_eq!(r.to_json().unwrap(), run_scenario(s).unwrap().to_json().unwrap());
    }
}

#[test]
fn seeds_select_different_streams() {
    let base = r#"{"space": {"kind": "star", "legs": 3}, "experiment": "solve", "params": {"n": 6, "instances": 3}, "seed": SEED}"#;
    let a = run_scenario(&scenario(&base.replace("SEED", "1"))).unwrap();
    let b = run_scenario(&scenario(&base.replace("SEED", "1"))).unwrap();
    let c = run_scenario(&scenario(&base.replace("SEED", "2"))).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_ne!(a.metric("mean_cost"), c.metric("mean_cost"));
}

#[test]
fn identity_study_reports_every_pitch() {
    let report = run_scenario(&scenario(
        r#"{"space": {"kind": "euclidean", "dim": 2}, "experiment": "transport-identity", "params": {"levels": 3}, "seed": 1}"#,
    ))
    .unwrap();
    assert!(report.pass);
    for k in 0..3 {
        assert!(report.metric(&format!("residual_max_{k}")).is_some());
    }
    assert_eq!(report.metric("pitch_1"), Some(0.125));
    assert!(report.metric("fitted_order").unwrap() >= 0.9);
}
