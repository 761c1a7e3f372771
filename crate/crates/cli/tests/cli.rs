//! End-to-end runs of the `salfuse` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use salfuse::dataset::{load_gray, save_gray};
use salfuse::imagecore::{normalize_minmax, GrayImage};
use tempfile::TempDir;

fn salfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_salfuse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ramp(w: usize, h: usize, offset: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| ((x * 7 + y * 13 + offset) % 200) as f64 / 255.0 + 0.1).unwrap()
}

/// Two branch dirs holding identical byte-valued maps.
fn identical_branches(root: &Path) -> Vec<PathBuf> {
    let dirs: Vec<PathBuf> = ["a", "b"].iter().map(|d| root.join(d)).collect();
    for i in 0..3 {
        let map = ramp(17, 11, i * 31);
        for d in &dirs {
            save_gray(&map, d.join(format!("m{i}.png"))).unwrap();
        }
    }
    dirs
}

#[test]
fn fuse_of_identical_branches_is_normalized_input() {
    let tmp = TempDir::new().unwrap();
    let dirs = identical_branches(tmp.path());
    let out = tmp.path().join("out");
    let run = salfuse(&[
        "fuse", "--branch", s(&dirs[0]), "--branch", s(&dirs[1]), "--out", s(&out), "--trace", "--jobs", "2",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("processed 3 samples"), "{stdout}");
    assert!(stdout.contains("mean iterations 1.00"), "{stdout}");
    assert!(stdout.contains("non-converged 0"), "{stdout}");

    for i in 0..3 {
        let input = load_gray(dirs[0].join(format!("m{i}.png"))).unwrap();
        let fused = load_gray(out.join(format!("m{i}.png"))).unwrap();
        let want = normalize_minmax(&input);
        for (a, b) in fused.pixels().iter().zip(want.pixels()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
        let log = fs::read_to_string(out.join("trace").join(format!("m{i}.log"))).unwrap();
        assert!(log.starts_with(&format!("sample=m{i}\niteration=1\tscores=1,1\tweights=0.5,0.5")));
        assert!(log.ends_with("iterations=1\tconverged=true\n"));
    }
}

#[test]
fn ablate_matches_fuse_on_identical_branches() {
    let tmp = TempDir::new().unwrap();
    let dirs = identical_branches(tmp.path());
    let (fused, added) = (tmp.path().join("fused"), tmp.path().join("added"));
    for (cmd, out) in [("fuse", &fused), ("ablate", &added)] {
        let run = salfuse(&[cmd, "--branch", s(&dirs[0]), "--branch", s(&dirs[1]), "--out", s(out)]);
        assert!(run.status.success());
    }
    for i in 0..3 {
        let name = format!("m{i}.png");
        assert_eq!(fs::read(fused.join(&name)).unwrap(), fs::read(added.join(&name)).unwrap());
    }
    assert!(!added.join("trace").exists());
}

#[test]
fn missing_branch_dir_fails_and_names_it() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nowhere");
    let run = salfuse(&["fuse", "--branch", s(&missing), "--out", s(&tmp.path().join("o"))]);
    assert!(!run.status.success());
    let stderr = String::from_utf8(run.stderr).unwrap();
    assert!(stderr.contains(s(&missing)), "{stderr}");
}

#[test]
fn eval_of_perfect_predictions() {
    let tmp = TempDir::new().unwrap();
    let gt = tmp.path().join("gt");
    for i in 0..3 {
        let map = GrayImage::from_fn(12, 9, |x, y| if (x + i) % 4 < 2 && y > 2 { 1.0 } else { 0.0 }).unwrap();
        save_gray(&map, gt.join(format!("g{i}.pgm"))).unwrap();
    }
    let out = tmp.path().join("report");
    let run = salfuse(&["eval", "--branch", s(&gt), "--gt", s(&gt), "--out", s(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert_eq!(stdout.trim(), "mae_mean .000  max_f 1.000  sm_mean 1.000");

    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "sample_id,mae,sm");
    assert_eq!(&lines[1..4], ["g0,0.000000,1.000000", "g1,0.000000,1.000000", "g2,0.000000,1.000000"]);
    assert_eq!(lines[4], "dataset.mae_mean,0.000000,");
    assert!(!report.contains('\r'));

    let pr = fs::read_to_string(out.join("pr.csv")).unwrap();
    assert_eq!(pr.lines().count(), 257);
    assert_eq!(pr.lines().nth(1).unwrap(), "0.000000,1.000000,1.000000");
}

#[test]
fn eval_requires_gt() {
    let tmp = TempDir::new().unwrap();
    let run = salfuse(&["eval", "--branch", s(tmp.path()), "--out", s(tmp.path())]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("--gt"));
}

#[test]
fn strict_mode_aborts_on_a_bad_image() {
    let tmp = TempDir::new().unwrap();
    let dirs = identical_branches(tmp.path());
    fs::write(dirs[1].join("m1.png"), b"not an image").unwrap();
    let out = tmp.path().join("out");
    let args = |strict: bool| {
        let mut v = vec!["fuse", "--branch", s(&dirs[0]), "--branch", s(&dirs[1]), "--out", s(&out)];
        if strict {
            v.push("--strict");
        }
        salfuse(&v)
    };

    let lenient = args(false);
    assert!(lenient.status.success());
    assert!(String::from_utf8_lossy(&lenient.stdout).contains("processed 2 samples"));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("failed m1"));

    let strict = args(true);
    assert!(!strict.status.success());
    assert!(String::from_utf8_lossy(&strict.stderr).contains("m1.png"));
}

#[test]
fn bench_reports_timing() {
    let tmp = TempDir::new().unwrap();
    let dirs = identical_branches(tmp.path());
    let out = tmp.path().join("bench");
    let run = salfuse(&["bench", "--branch", s(&dirs[0]), "--branch", s(&dirs[1]), "--jobs", "1", "--out", s(&out)]);
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("images 3\n"), "{stdout}");
    assert!(stdout.contains("images/second"));
    assert!(stdout.contains("mean iterations 1.00"));
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
