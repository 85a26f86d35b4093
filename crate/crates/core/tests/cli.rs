use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mhd_dg::io::{manifest_path, parse_field_dump, Manifest, DUMP_HEADER};

fn mhd_dg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhd-dg")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_run(dir: &Path, extra: &[&str]) -> Output {
    let d = dir.to_str().unwrap();
    let mut args = vec![
        "run", "--case", "orszag_tang", "--k", "2", "--nx", "6", "--ny", "6", "--t-final", "0.02",
        "--output-interval", "0.01", "--output-dir", d,
    ];
    args.extend_from_slice(extra);
    mhd_dg(&args)
}

#[test]
fn run_writes_dumps_manifests_and_entropy_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("run.cfg").exists());
    let entropy = fs::read_to_string(dir.path().join("entropy.csv")).unwrap();
    let mut lines = entropy.lines();
    assert_eq!(lines.next(), Some("t,total_entropy"));
    assert_eq!(lines.count(), 3);
    for idx in 0..3 {
        let dump = dir.path().join(format!("field_{idx:04}.csv"));
        let text = fs::read_to_string(&dump).unwrap();
        assert!(text.starts_with(DUMP_HEADER));
        let table = parse_field_dump(&text).unwrap();
        assert_eq!(table.rows.len(), 18 * 18);
        for row in &table.rows {
            assert!(row[2] > 0.0 && row[9] > 0.0);
            assert!(row[10].abs() < 1e-11, "divB = {}", row[10]);
        }
        let m = Manifest::from_text(&fs::read_to_string(manifest_path(&dump)).unwrap()).unwrap();
        assert_eq!((m.k, m.nx, m.ny, m.stride), (2, 6, 6, 1));
        assert_eq!(m.case, "orszag_tang");
    }
}

#[test]
fn single_thread_runs_are_bitwise_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = small_run(d.path(), &["--threads", "1"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["field_0002.csv", "entropy.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn stride_thins_the_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &["--stride", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = parse_field_dump(&fs::read_to_string(dir.path().join("field_0000.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 6 * 6);
}

#[test]
fn projecting_a_limited_dump_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let input = dir.path().join("field_0002.csv");
    let output = dir.path().join("projected.csv");
    let o = mhd_dg(&["project", "--input", input.to_str().unwrap(), "--output", output.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(manifest_path(&output).exists());
    let before = parse_field_dump(&fs::read_to_string(&input).unwrap()).unwrap();
    let after = parse_field_dump(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(before.rows.len(), after.rows.len());
    for (r0, r1) in before.rows.iter().zip(&after.rows) {
        for c in 0..10 {
            assert!((r0[c] - r1[c]).abs() < 1e-12 * (1.0 + r0[c].abs()), "column {c}: {} vs {}", r0[c], r1[c]);
        }
    }
}

#[test]
fn converge_prints_a_table() {
    let o = mhd_dg(&["converge", "--case", "alfven", "--k", "1", "--t-final", "0.01", "--grids", "4,8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,L2_error,L2_order,Linf_error,Linf_order");
    assert_eq!(lines.len(), 3);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "4");
    assert_eq!(first[2], "-");
    let second: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(second[0], "8");
    assert!(second[1].parse::<f64>().unwrap() < first[1].parse::<f64>().unwrap());
}

#[test]
fn certify_passes_on_a_small_sample() {
    let o = mhd_dg(&["certify", "--pairs", "500", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().last(), Some("PASS"));
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("a.cfg");
    let out = dir.path().join("out");
    fs::write(&cfg, format!("case = rotor\nk = 1\nnx = 4\nny = 4\nt_final = 0.001\noutput_dir = {}\n", out.display()))
        .unwrap();
    let o = mhd_dg(&["run", "--config", cfg.to_str().unwrap(), "--k", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = Manifest::from_text(&fs::read_to_string(out.join("field_0001.manifest")).unwrap()).unwrap();
    assert_eq!((m.case.as_str(), m.k, m.nx), ("rotor", 2, 4));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--case", "nope", "--output-dir", d],
        vec!["run", "--k", "0", "--output-dir", d],
        vec!["run", "--cfl", "-1", "--output-dir", d],
        vec!["run", "--config", "/nonexistent/x.cfg"],
        vec!["converge", "--case", "blast", "--grids", "4", "--t-final", "0.0"],
        vec!["run", "--bogus-flag"],
    ] {
        let o = mhd_dg(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "k = 2\nunknown_key = 1\n").unwrap();
    let o = mhd_dg(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn solver_failure_exits_with_one_and_names_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = mhd_dg(&[
        "run", "--case", "blast", "--nx", "8", "--ny", "8", "--cfl", "1", "--no-pp", "--no-oedg", "--t-final", "0.001",
        "--output-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("cell ("), "{err}");
}
