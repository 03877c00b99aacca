use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, cmd: &str, config: &str) -> Output {
    let cfg = dir.join(format!("{cmd}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_tunnelsplit"))
        .args([cmd, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

const DW: &str = r#"{"model": "double_well", "roots": [-2, -1, 1, 2], "energy": 0,
    "hbar_grid": {"min": 10, "max": 12, "points": 3}, "sources": ["semiclassical", "exact"]}"#;

#[test]
fn double_well_topology_is_a_torus() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "topology", DW);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(d.path(), "topology.txt");
    assert!(t.contains("genus: 1, holes: 6"), "{t}");
    assert!(t.contains("transitive: true"));
    assert!(d.path().join("out/manifest.json").exists());
}

#[test]
fn normal_form_topology() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "topology", r#"{"model": "normal_form", "energy": 0.00619}"#);
    assert!(o.status.success());
    assert!(read(d.path(), "topology.txt").contains("genus: 9, holes: 28"));
}

#[test]
fn reducible_curve_warns_and_fails() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "topology", r#"{"model": "custom_polynomial", "terms": [[2, 0, 1], [0, 2, -1]], "energy": 0}"#);
    assert_eq!(o.status.code(), Some(3));
    assert!(read(d.path(), "topology.txt").contains("warning: intransitive"));
}

#[test]
fn bad_configs_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "topology", r#"{"model": "normal_form", "energy": 0.00619, "colour": 1}"#);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), "topology", r#"{"model": "double_well", "roots": [-2, 1, 2], "energy": 0}"#);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn actions_report_relations() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "actions", DW);
    assert!(o.status.success());
    let a = read(d.path(), "actions.txt");
    assert!(a.contains("S_L = S_R - S_inf+"), "{a}");
    assert!(a.contains("simultaneous_quantization:"));
    assert!(!a.contains("| false\n  S_"));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["inv_hbar", "source", "variant", "delta_E", "sign_flag", "error_code", "resonance"]
    );
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn double_well_rows_pair_up_and_rerun_is_identical() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), "splitting", DW).status.success());
    let first = read(d.path(), "splitting.csv");
    let rows = csv_rows(&first);
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][0], pair[1][0]);
        assert_eq!((pair[0][1].as_str(), pair[1][1].as_str()), ("semiclassical", "exact"));
        let (a, b): (f64, f64) = (pair[0][3].parse().unwrap(), pair[1][3].parse().unwrap());
        assert!((a / b).ln().abs() < 2.0, "{a} {b}");
    }
    assert!(run(d.path(), "splitting", DW).status.success());
    assert_eq!(first, read(d.path(), "splitting.csv"));
}

#[test]
fn normal_form_compare_has_three_series() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"model": "normal_form", "energy": 0.00619, "variants": ["red", "blue"],
        "hbar_grid": {"min": 100, "max": 110, "points": 2}}"#;
    let o = run(d.path(), "compare", cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&read(d.path(), "compare.csv"));
    let kinds: Vec<(&str, &str)> = rows.iter().take(3).map(|r| (r[1].as_str(), r[2].as_str())).collect();
    assert_eq!(kinds, [("semiclassical", "red"), ("semiclassical", "blue"), ("exact", "")]);
    assert!(read(d.path(), "compare.txt").contains("semiclassical/red"));
}

#[test]
fn triple_well_flags_resonance() {
    let d = tempfile::tempdir().unwrap();
    // 1/ħ = 5.13542 sits on a zero of the central-well cosine at level 3
    let cfg = r#"{"model": "triple_well", "roots": [-2.2, -1.4, -0.5, 0.5, 1.4, 2.2], "level": 3,
        "hbar_grid": {"min": 4.0, "max": 5.13542, "points": 2}}"#;
    assert!(run(d.path(), "splitting", cfg).status.success());
    let rows = csv_rows(&read(d.path(), "splitting.csv"));
    assert_eq!(rows[0][6], "0");
    assert_eq!(rows[1][6], "1");
}

#[test]
fn quantum_spectrum_is_written() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"model": "double_well", "roots": [-2, -1, 1, 2], "energy": 0, "hbar": 0.2, "basis_size": 512}"#;
    assert!(run(d.path(), "quantum", cfg).status.success());
    let s = read(d.path(), "spectrum.csv");
    assert!(s.starts_with("index,parity,energy\n0,1,"), "{s}");
}
