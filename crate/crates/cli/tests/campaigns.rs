//! Golden-file regression and determinism for the shipped campaign suite.
//!
//! Regenerate the golden payloads with `UPDATE_GOLDEN=1 cargo test -p modseq-cli`.

use std::path::{Path, PathBuf};

use modseq_cli::campaign::{emit_plot_data, run_campaign, CampaignResult};
use modseq_cli::config::CampaignConfig;

fn dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn suite() -> Vec<(String, CampaignConfig)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir("campaigns"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    assert!(!files.is_empty());
    files
        .into_iter()
        .map(|p| {
            let cfg = CampaignConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p.file_stem().unwrap().to_string_lossy().into_owned(), cfg)
        })
        .collect()
}

fn run_with_jobs(cfg: &CampaignConfig, jobs: usize) -> CampaignResult {
    let mut cfg = cfg.clone();
    cfg.jobs = Some(jobs);
    run_campaign(&cfg).unwrap()
}

fn payload_text(r: &CampaignResult) -> String {
    serde_json::to_string_pretty(&r.numerical_payload()).unwrap() + "\n"
}

#[test]
fn golden_payloads_match_for_one_and_eight_jobs() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (stem, cfg) in suite() {
        let one = payload_text(&run_with_jobs(&cfg, 1));
        let eight = payload_text(&run_with_jobs(&cfg, 8));
        assert_eq!(one, eight, "{stem}: payload depends on the job count");
        let path = dir("golden").join(format!("{stem}.json"));
        if update {
            std::fs::write(&path, &one).unwrap();
            continue;
        }
        let golden = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1", path.display()));
        assert_eq!(one, golden, "{stem}: payload differs from the golden file");
    }
}

#[test]
fn every_shipped_campaign_passes() {
    for (stem, cfg) in suite() {
        let r = run_with_jobs(&cfg, 2);
        let failed: Vec<_> = r.summary.iter().filter(|o| !o.passed).map(|o| &o.name).collect();
        assert!(r.passed, "{stem}: failed {failed:?}");
    }
}

#[test]
fn echoed_config_reruns_to_the_same_payload() {
    for (stem, cfg) in suite().into_iter().filter(|(s, _)| !s.starts_with("verify_clarkson")) {
        let first = run_campaign(&cfg).unwrap();
        let text = serde_json::to_string(&first.config).unwrap();
        let echoed = CampaignConfig::from_json(&text).unwrap_or_else(|e| panic!("{stem}: {e}"));
        assert_eq!(echoed, cfg, "{stem}");
        let second = run_campaign(&echoed).unwrap();
        assert_eq!(payload_text(&first), payload_text(&second), "{stem}");
    }
}

#[test]
fn plot_series_are_stable() {
    for (stem, cfg) in suite() {
        for &kind in &cfg.output.plots {
            let a = emit_plot_data(&run_with_jobs(&cfg, 1), kind).unwrap();
            let b = emit_plot_data(&run_with_jobs(&cfg, 4), kind).unwrap();
            assert_eq!(a, b, "{stem} {kind:?}");
        }
    }
}

#[test]
fn shipped_examples_report_expected_values() {
    let cfgs: std::collections::HashMap<_, _> = suite().into_iter().collect();

    let r = run_campaign(&cfgs["verify_clarkson_lp3_5"]).unwrap();
    let v = &r.summary[0];
    assert!(r.passed && v.value <= 1e-12, "{v:?}");

    let r = run_campaign(&cfgs["jvn_euclid5"]).unwrap();
    assert!((r.summary[0].value - 1.0).abs() <= 1e-9);

    let r = run_campaign(&cfgs["summand_lp4_2"]).unwrap();
    assert_eq!(r.summary[0].name, "no_summand");
    assert!(r.summary[0].value > 0.01);

    let r = run_campaign(&cfgs["norm_nakano_scalar"]).unwrap();
    let golden_ratio = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((r.summary[0].value - golden_ratio.sqrt()).abs() <= 1e-10);
}

#[test]
fn plot_columns() {
    let cfgs: std::collections::HashMap<_, _> = suite().into_iter().collect();
    let header = |stem: &str| {
        let cfg = &cfgs[stem];
        let csv = emit_plot_data(&run_campaign(cfg).unwrap(), cfg.output.plots[0]).unwrap();
        csv.lines().next().unwrap().to_string()
    };
    assert_eq!(header("iterate_counterexample"), "n,norm,residual,defect");
    assert_eq!(header("asymptotics_power"), "n,alpha,beta");
    assert_eq!(header("nakano_log"), "n,term,log_slope");
}
