use mtc_core::experiment::{linear_fit, ratio_sweep, to_csv, write_report, ExperimentConfig};
use mtc_core::transforms::SupLineConfig;
use mtc_core::Error;

fn tiny() -> ExperimentConfig {
    ExperimentConfig {
        c: Some(8.0),
        schedule: vec![2, 3, 4],
        dir_samples: 16,
        incidence_dirs: 300,
        resolution_dirs: 16,
        sup_line: SupLineConfig { budget: 40, refine_top: 2, max_evals: 200, seed: 1 },
        ..Default::default()
    }
}

#[test]
fn toml_file_drives_the_sweep() {
    let dir = std::env::temp_dir().join(format!("mtc-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cfg.toml");
    std::fs::write(&path, tiny().to_toml().unwrap()).unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg, tiny());

    let rep = ratio_sweep(&cfg).unwrap();
    let (csv_path, json_path) = write_report(&rep, &dir.join("out")).unwrap();
    let mut rd = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rd.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (rec, row) in rows.iter().zip(&rep.rows) {
        assert_eq!(rec[col("N")].parse::<usize>().unwrap(), row.n);
        assert_eq!(rec[col("ratio_conservative")].parse::<f64>().unwrap(), row.ratio_conservative);
        assert_eq!(rec[col("q_size")].parse::<usize>().unwrap(), row.q_size);
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
    assert_eq!(json["c"].as_f64().unwrap(), 8.0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn rows_are_ordered_and_fit_matches() {
    let rep = ratio_sweep(&tiny()).unwrap();
    assert!(rep.gates_passed && rep.ordered);
    for r in &rep.rows {
        assert!(r.ratio_conservative <= r.ratio_observed);
        assert!(r.sup_line_lower <= r.mixed_norm_upper);
        assert!((r.delta_vs_quadrature - 1.0).abs() < 0.5);
    }
    let x: Vec<f64> = rep.rows.iter().map(|r| r.log_r).collect();
    let y: Vec<f64> = rep.rows.iter().map(|r| r.ratio_conservative).collect();
    assert_eq!(rep.fit.unwrap(), linear_fit(&x, &y).unwrap());
}

#[test]
fn repeated_runs_are_identical() {
    let a = to_csv(&ratio_sweep(&tiny()).unwrap()).unwrap();
    let b = to_csv(&ratio_sweep(&tiny()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gate_stops_collapsed_families() {
    let cfg = ExperimentConfig { c: Some(1.05), b: 1.02, ..tiny() };
    assert!(matches!(ratio_sweep(&cfg), Err(Error::GateFailed(_))));
    let ungated = ExperimentConfig { gate: false, ..cfg };
    assert!(matches!(ratio_sweep(&ungated), Err(Error::NotSeparated { .. })));
}
