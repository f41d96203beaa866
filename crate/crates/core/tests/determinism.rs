use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hccc_core::cli::run_one;
use hccc_core::traffic::Scheme;
use hccc_core::ScenarioConfig;

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn traced(scheme: Scheme) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.run.scheme = scheme;
    cfg.run.duration_s = 30.0;
    cfg.traffic.offered_load = 10.0;
    for t in ["mac", "hccc", "packets", "topology"] {
        assert!(cfg.trace.enable(t), "{t}");
    }
    cfg
}

#[test]
fn repeated_runs_write_identical_bytes() {
    for scheme in Scheme::ALL {
        let cfg = traced(scheme);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_one(&cfg, 17, a.path()).unwrap();
        run_one(&cfg, 17, b.path()).unwrap();
        let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
        assert!(sa.len() >= 5, "{scheme}: {:?}", sa.keys());
        assert_eq!(sa, sb, "{scheme}");
    }
}

#[test]
fn different_seeds_differ() {
    let cfg = traced(Scheme::Hccc);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_one(&cfg, 1, a.path()).unwrap();
    run_one(&cfg, 2, b.path()).unwrap();
    let pa = fs::read(a.path().join("hccc_seed1_n100_packets.csv")).unwrap();
    let pb = fs::read(b.path().join("hccc_seed2_n100_packets.csv")).unwrap();
    assert_ne!(pa, pb);
}
