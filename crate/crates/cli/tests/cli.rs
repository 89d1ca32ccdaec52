use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chaoskey::image::{read_pgm, to_pgm_bytes};
use chaoskey::testimage::moon_standin;
use chaoskey::GrayImage;

fn chaoskey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoskey"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = chaoskey(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_image(path: &Path, img: &GrayImage) {
    fs::write(path, to_pgm_bytes(img)).unwrap();
}

#[test]
fn generate_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    ok(&["generate", "henon", "--x0", "0.1,0.1", "--n", "10000", "--out", p(&csv)]);
    let text = fs::read_to_string(&csv).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 10_000);
}

#[test]
fn noisy_generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for f in [&a, &b] {
        ok(&[
            "generate",
            "henon",
            "--n",
            "500",
            "--sigma",
            "0.0001",
            "--seed",
            "7",
            "--out",
            p(f),
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(chaoskey(&["generate", "tent"]).status.code(), Some(2));
    assert_eq!(chaoskey(&["generate"]).status.code(), Some(2));
    assert_eq!(
        chaoskey(&["generate", "henon", "--x0", "0.1,0.2,0.3"]).status.code(),
        Some(2)
    );
    assert_eq!(chaoskey(&["bogus"]).status.code(), Some(2));
}

#[test]
fn identify_prints_henon_and_lozi() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let model = dir.path().join("h.model");
    ok(&["generate", "henon", "--n", "10000", "--out", p(&csv)]);
    let out = ok(&["identify", p(&csv), "--out", p(&model)]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("x' = 1 - 1.4*x^2 + y"), "{stdout}");
    assert!(stdout.contains("y' = 0.3*x"), "{stdout}");
    assert!(fs::read_to_string(&model).unwrap().starts_with("# map dim=2"));

    let lcsv = dir.path().join("l.csv");
    ok(&["generate", "lozi", "--n", "10000", "--out", p(&lcsv)]);
    let out = ok(&["identify", p(&lcsv), "--abs", "--max-degree", "2"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("x' = 1 - 1.7*|x| + y"), "{stdout}");
}

#[test]
fn identify_tiny_csv_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    ok(&["generate", "henon", "--n", "4", "--out", p(&csv)]);
    let out = chaoskey(&["identify", p(&csv)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("underdetermined"));
}

#[test]
fn model_file_drives_generation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let model = dir.path().join("h.model");
    ok(&["generate", "henon", "--n", "3000", "--out", p(&csv)]);
    ok(&["identify", p(&csv), "--out", p(&model)]);
    let again = dir.path().join("again.csv");
    ok(&["generate", "--model", p(&model), "--n", "3000", "--out", p(&again)]);
    let (a, b) = (fs::read_to_string(&csv).unwrap(), fs::read_to_string(&again).unwrap());
    assert_eq!(a.lines().count(), b.lines().count());
}

#[test]
fn encrypt_decrypt_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain.pgm");
    write_image(&plain, &moon_standin(256, 256, 3));
    let (c1, c2, back) = (
        dir.path().join("c1.pgm"),
        dir.path().join("c2.pgm"),
        dir.path().join("back.pgm"),
    );
    ok(&["encrypt", p(&plain), "--key", "0.2,0.3", "--out", p(&c1)]);
    ok(&["encrypt", p(&plain), "--key", "0.2,0.3", "--out", p(&c2)]);
    assert_eq!(fs::read(&c1).unwrap(), fs::read(&c2).unwrap());
    assert_ne!(fs::read(&c1).unwrap(), fs::read(&plain).unwrap());
    ok(&["decrypt", p(&c1), "--key", "0.2,0.3", "--out", p(&back)]);
    assert_eq!(fs::read(&back).unwrap(), fs::read(&plain).unwrap());
}

#[test]
fn single_pixel_image() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("one.pgm");
    write_image(&plain, &GrayImage::filled(1, 1, 77).unwrap());
    let (c, back) = (dir.path().join("c.pgm"), dir.path().join("b.pgm"));
    ok(&["encrypt", p(&plain), "--out", p(&c)]);
    ok(&["decrypt", p(&c), "--out", p(&back)]);
    assert_eq!(fs::read(&back).unwrap(), fs::read(&plain).unwrap());
}

#[test]
fn cipher_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pgm");
    fs::write(&bad, b"P5\n4 4\n255\n\x01\x02").unwrap();
    let out = chaoskey(&["encrypt", p(&bad), "--out", p(&dir.path().join("x.pgm"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte"));

    let good = dir.path().join("good.pgm");
    write_image(&good, &GrayImage::filled(4, 4, 1).unwrap());
    let out = chaoskey(&[
        "encrypt",
        p(&good),
        "--key",
        "0.2",
        "--out",
        p(&dir.path().join("x.pgm")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = chaoskey(&[
        "encrypt",
        p(&good),
        "--rounds",
        "3",
        "--out",
        p(&dir.path().join("x.pgm")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain.pgm");
    let cipher = dir.path().join("cipher.pgm");
    write_image(&plain, &moon_standin(256, 256, 11));
    ok(&["encrypt", p(&plain), "--out", p(&cipher)]);

    let only = ok(&["analyze", p(&plain)]);
    let v: serde_json::Value = serde_json::from_slice(&only.stdout).unwrap();
    assert!(v["plain"]["entropy"].is_number());
    assert!(v["npcr"].is_null());

    let a = ok(&["analyze", p(&plain), p(&cipher), "--seed", "3"]).stdout;
    let b = ok(&["analyze", p(&plain), p(&cipher), "--seed", "3"]).stdout;
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert!(v["cipher"]["entropy"].as_f64().unwrap() >= 7.99);
    assert_eq!(v["cipher"]["chi_square"]["pass"], true);
    assert!(v["npcr"].as_f64().unwrap() > 99.0);

    let same = ok(&["analyze", p(&plain), p(&plain)]).stdout;
    let v: serde_json::Value = serde_json::from_slice(&same).unwrap();
    assert_eq!(v["psnr"], "inf");

    let csvs = dir.path().join("csv");
    ok(&[
        "analyze",
        p(&plain),
        p(&cipher),
        "--hist",
        p(&csvs),
        "--scatter",
        p(&csvs),
    ]);
    assert!(csvs.join("cipher_hist.csv").exists());
    assert!(csvs.join("plain_horizontal.csv").exists());
}

#[test]
fn analyze_rejects_mismatched_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    write_image(&a, &GrayImage::filled(4, 4, 1).unwrap());
    write_image(&b, &GrayImage::filled(5, 4, 1).unwrap());
    assert_eq!(chaoskey(&["analyze", p(&a), p(&b)]).status.code(), Some(2));
}

#[test]
fn reproduce_t1_and_fig2_pass() {
    let dir = tempfile::tempdir().unwrap();
    for target in ["t1", "fig2"] {
        let out = ok(&["reproduce", target, "--workdir", p(dir.path())]);
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("PASS") && !stdout.contains("FAIL"), "{stdout}");
    }
    let fig2 = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(fig2.lines().count(), 11);
}

#[test]
fn reproduce_t7_with_supplied_image() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.pgm");
    write_image(&img, &moon_standin(256, 256, 2));
    ok(&["reproduce", "t7", "--workdir", p(dir.path()), "--image", p(&img)]);
    let t7 = fs::read_to_string(dir.path().join("t7.csv")).unwrap();
    assert!(t7.starts_with("image,entropy"));
    assert!(read_pgm(&fs::read(&img).unwrap()).is_ok());
}
