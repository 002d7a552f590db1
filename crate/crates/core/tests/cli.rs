use std::path::Path;
use std::process::{Command, Output};

fn pgist(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgist"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn pgist")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = pgist(&["bench", "--kind", "heavisine-1d", "--out", "x", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error"));
    assert_eq!(pgist(&["explode"], dir.path()).status.code(), Some(2));
}

#[test]
fn bench_writes_table_and_one_image_per_line_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = pgist(
        &["bench", "--kind", "phantom-radial", "--n", "32", "--lines", "5,9", "--seed", "7", "--out", "results"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("results/table.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "kind,n,param,noise_db,solver,iters,stop,mse,psnr_db,seconds");
    assert_eq!(lines.count(), 2);
    for k in [5, 9] {
        assert!(dir.path().join(format!("results/recon_k{k}_pg.pgm")).exists());
    }
    let log = std::fs::read_to_string(dir.path().join("results/run.log")).unwrap();
    assert!(log.contains("seed="));
}

#[test]
fn repeated_bench_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let o = pgist(
            &["bench", "--kind", "heavisine-1d", "--n", "256", "--m", "40,80", "--solver", "pg,ista", "--seed", "3", "--out", out],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join(out).join("table.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn sample_then_recover_round_trip_2d() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pgist(&["gen-phantom", "--n", "32", "--out", "truth.csv"], p).status.success());
    assert!(pgist(&["make-mask", "--n", "32", "--lines", "9", "--out", "mask.pgm"], p).status.success());
    let o = pgist(&["sample", "--input", "truth.csv", "--mask", "mask.pgm", "--seed", "4", "--out", "obs.csv"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = pgist(
        &["recover", "--obs", "obs.csv", "--mask", "mask.pgm", "--truth", "truth.csv", "--trace", "trace.csv", "--out", "rec.pgm", "--max-iter", "30"],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("psnr_db="));
    assert!(p.join("rec.pgm").exists());
    let trace = std::fs::read_to_string(p.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,rel_change,residual,mse"));
}

#[test]
fn recover_with_mismatched_mask_fails_with_shape_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pgist(&["sample", "--n", "32", "--lines", "9", "--out", "obs.csv"], p).status.success());
    assert!(pgist(&["make-mask", "--n", "32", "--lines", "11", "--out", "other.pgm"], p).status.success());
    let o = pgist(&["recover", "--obs", "obs.csv", "--mask", "other.pgm", "--out", "rec.pgm"], p);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error: shape mismatch"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn sample_then_recover_round_trip_1d() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pgist(&["gen-signal", "--n", "256", "--out", "sig.csv"], p).status.success());
    assert!(pgist(&["sample", "--input", "sig.csv", "--m", "100", "--seed", "2", "--out", "obs.csv"], p).status.success());
    let obs = std::fs::read_to_string(p.join("obs.csv")).unwrap();
    assert!(obs.lines().next().unwrap().contains("seed=2"));
    let o = pgist(&["recover", "--obs", "obs.csv", "--truth", "sig.csv", "--solver", "ista", "--out", "rec.csv"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = std::fs::read_to_string(p.join("rec.csv")).unwrap();
    assert_eq!(rec.lines().count(), 256);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("run.cfg"), "kind = heavisine-1d\nn = 128\nm = 30\nmax-iter = 3\n").unwrap();
    let o = pgist(&["bench", "--config", "run.cfg", "--max-iter", "2", "--out", "out"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(p.join("out/table.csv")).unwrap();
    assert!(table.contains("heavisine-1d,128,30,,pg,2,max-iter"), "{table}");
}

#[test]
fn noisy_kind_without_levels_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = pgist(&["bench", "--kind", "phantom-radial-noisy", "--noise-db", "", "--out", "o"], dir.path());
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn gen_phantom_reports_gradient_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = pgist(&["gen-phantom", "--out", "p.pgm"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("reference 2184"));
}
