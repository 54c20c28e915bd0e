use std::collections::BTreeMap;

use rce_core::experiment::{
    csv_string, exp1_means, manifest_path, read_csv, run_exp1, run_exp2, run_exp3, spearman,
    write_csv, Exp1Row, Experiment, ExperimentConfig, Manifest, Preset,
};
use rce_core::sampler::{ChangeOp, Model};

fn config(which: Experiment, rule: &str, model: Model) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(which, rule.parse().unwrap(), model, Preset::Desk, 7);
    cfg.num_elections = 4;
    cfg.trials = 10;
    cfg
}

#[test]
fn exp1_row_count_zero_point_and_monotone_trend() {
    let cfg = config(Experiment::Exp1, "greedy-pav", Model::OneD { radius: 0.051 });
    let out = run_exp1(&cfg).unwrap();
    assert!(out.skipped.is_empty());
    assert_eq!(out.rows.len(), 4 * 3 * 15 * 10);
    assert!(out.rows.iter().filter(|r| r.pct_idx == 0).all(|r| r.distance == 0));
    let means = exp1_means(&out.rows);
    for op in ChangeOp::ALL {
        let curve: Vec<f64> = (0..15).map(|p| means[&(op, p)]).collect();
        let xs: Vec<f64> = cfg.pcts.clone();
        let rho = spearman(&xs, &curve).unwrap();
        assert!(rho > 0.9, "{op}: spearman {rho} over {curve:?}");
    }
}

#[test]
fn exp2_differences_are_non_negative() {
    let mut cfg = config(Experiment::Exp2, "greedy-cc", Model::TwoD { radius: 0.195 });
    cfg.pcts = vec![0.0, 0.0128, 0.05];
    let out = run_exp2(&cfg).unwrap();
    assert_eq!(out.rows.len(), 4 * 3 * 10);
    for r in &out.rows {
        assert_eq!(r.diff, r.dist_lexi - r.dist_opt);
        assert!(r.tied_found >= 1 && r.tied_found <= cfg.cap);
        if r.pct_idx == 0 {
            assert_eq!(r.dist_lexi, 0);
        }
    }
}

#[test]
fn exp3_shape() {
    let cfg = config(Experiment::Exp3, "greedy-cc", Model::Resampling { p: 0.1, phi: 0.75 });
    let out = run_exp3(&cfg).unwrap();
    assert_eq!(out.rows.len(), 4 * cfg.k);
    let mut per_election: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for r in &out.rows {
        assert!((0.0..=1.0).contains(&r.replaced_fraction));
        per_election.entry(r.election_idx).or_default().push(r.round_idx);
    }
    for rounds in per_election.values() {
        assert_eq!(rounds, &(1..=cfg.k).collect::<Vec<_>>());
    }
}

#[test]
fn csv_and_manifest_files() {
    let dir = tempfile_dir();
    let cfg = config(Experiment::Exp1, "greedy-cc", Model::OneD { radius: 0.051 });
    let out = run_exp1(&cfg).unwrap();
    let path = dir.join("exp1.csv");
    write_csv(std::fs::File::create(&path).unwrap(), &out.rows).unwrap();
    let back: Vec<Exp1Row> = read_csv(&path).unwrap();
    assert_eq!(back, out.rows);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), csv_string(&out.rows).unwrap());
    let manifest = Manifest::new(&cfg, out.rows.len(), &out.skipped).to_json();
    let json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(json["base_seed"], 7);
    assert_eq!(json["rule"], "greedy-cc");
    assert_eq!(json["rows"], out.rows.len());
    assert!(manifest_path(&path).to_string_lossy().ends_with("exp1.csv.manifest.json"));
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("rce-exp-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
