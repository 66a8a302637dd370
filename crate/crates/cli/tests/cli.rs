use std::fs;
use std::path::Path;
use std::process::Command;

use focuslab::io::{read_matrix_csv, read_profile_csv, read_wav};
use focuslab_cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv: Vec<&str> = std::iter::once("focuslab").chain(args.iter().copied()).collect();
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sine_wav(dir: &Path) -> std::path::PathBuf {
    let wav = dir.join("sine.wav");
    let (code, _, err) = call(&[
        "synth", "--freqs", "440", "--amps", "0.8", "--spikes", "0", "--noise", "0", "--duration", "0.5", "--out",
        p(&wav),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    wav
}

fn pgm_pixels(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = fs::read(path).unwrap();
    let header: Vec<&[u8]> = bytes.splitn(4, |&b| b == b'\n').collect();
    assert_eq!(header[0], b"P5");
    let dims = std::str::from_utf8(header[1]).unwrap();
    let (w, h) = dims.split_once(' ').unwrap();
    let (w, h): (usize, usize) = (w.parse().unwrap(), h.parse().unwrap());
    let pixels = header[3].to_vec();
    assert_eq!(pixels.len(), w * h);
    (w, h, pixels)
}

#[test]
fn stft_of_a_sine_is_one_bright_band() {
    let dir = tempfile::tempdir().unwrap();
    let wav = sine_wav(dir.path());
    let csv = dir.path().join("m.csv");
    let pgm = dir.path().join("m.pgm");
    let (code, _, err) = call(&["analyze", "--input", p(&wav), "--mode", "stft", "--out", p(&csv), "--pgm", p(&pgm)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let m = read_matrix_csv(&csv).unwrap();
    let (w, h, px) = pgm_pixels(&pgm);
    assert_eq!((w, h), (m.n_frames(), m.n_rows()));
    // image rows run from the highest frequency down
    let bright: Vec<f64> = (0..h)
        .filter(|&r| {
            let row = &px[r * w..(r + 1) * w];
            row[w / 4..3 * w / 4].iter().all(|&v| v > 200)
        })
        .map(|r| m.row_axis[h - 1 - r])
        .collect();
    // a single contiguous band of rows around 440 Hz, nothing at negative frequencies
    let step = m.row_axis[1] - m.row_axis[0];
    assert!(bright.windows(2).all(|w| (w[0] - w[1] - step).abs() < 1e-9), "{bright:?}");
    assert!(bright.iter().any(|f| (f - 440.0).abs() <= step / 2.0), "{bright:?}");
    assert!(bright.iter().all(|&f| f > 0.0));
}

#[test]
fn focus_csv_feeds_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let wav = sine_wav(dir.path());
    for mode in ["time", "freq"] {
        let prof = dir.path().join(format!("{mode}.csv"));
        let (code, _, err) = call(&["focus", "--input", p(&wav), "--mode", mode, "--out", p(&prof)]);
        assert_eq!(code, EXIT_OK, "{err}");
        let table = read_profile_csv(&prof).unwrap();
        assert!(table.sigma.iter().all(|&s| (1.0..=5.0).contains(&s)));
        let a = dir.path().join(format!("{mode}-a.csv"));
        let b = dir.path().join(format!("{mode}-b.csv"));
        assert_eq!(call(&["analyze", "--input", p(&wav), "--mode", mode, "--focused", "--out", p(&a)]).0, EXIT_OK);
        assert_eq!(call(&["analyze", "--input", p(&wav), "--mode", mode, "--sigma", p(&prof), "--out", p(&b)]).0, EXIT_OK);
        let (ma, mb) = (read_matrix_csv(&a).unwrap(), read_matrix_csv(&b).unwrap());
        let diff = ma
            .values()
            .iter()
            .zip(mb.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let scale = ma.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12 * scale, "{mode}: {diff}");
    }
}

#[test]
fn mismatched_profile_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let wav = sine_wav(dir.path());
    let prof = dir.path().join("t.csv");
    assert_eq!(call(&["focus", "--input", p(&wav), "--hop", "4", "--out", p(&prof)]).0, EXIT_OK);
    let out = dir.path().join("m.csv");
    let (code, _, err) = call(&["analyze", "--input", p(&wav), "--sigma", p(&prof), "--out", p(&out)]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("does not match"), "{err}");
}

#[test]
fn every_mode_writes_a_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let wav = sine_wav(dir.path());
    for mode in ["time", "freq", "cqt", "wavelet", "stft"] {
        let out = dir.path().join(format!("{mode}.csv"));
        let (code, _, err) = call(&["analyze", "--input", p(&wav), "--mode", mode, "--sigma", "const:2", "--out", p(&out)]);
        assert_eq!(code, EXIT_OK, "{mode}: {err}");
        let m = read_matrix_csv(&out).unwrap();
        assert!(m.n_rows() > 0 && m.n_frames() > 0);
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let wav = sine_wav(dir.path());
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# analysis\nmode = freq\nrows = 16\nfocused = true\n").unwrap();
    let out = dir.path().join("m.csv");
    let (code, _, err) = call(&["analyze", "--config", p(&conf), "--input", p(&wav), "--out", p(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(read_matrix_csv(&out).unwrap().n_rows(), 16);
    let out2 = dir.path().join("m2.csv");
    assert_eq!(
        call(&["analyze", "--config", p(&conf), "--rows", "8", "--input", p(&wav), "--out", p(&out2)]).0,
        EXIT_OK
    );
    assert_eq!(read_matrix_csv(&out2).unwrap().n_rows(), 8);
    fs::write(&conf, "no_such_key = 1\n").unwrap();
    assert_eq!(call(&["analyze", "--config", p(&conf), "--input", p(&wav), "--out", p(&out)]).0, EXIT_USAGE);
}

#[test]
fn synth_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    for path in [&a, &b] {
        let (code, _, _) = call(&["synth", "--kind", "spike-train", "--seed", "3", "--out", p(path)]);
        assert_eq!(code, EXIT_OK);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(read_wav(&a).unwrap().len(), 4000);
    let csv = dir.path().join("m.csv");
    assert_eq!(call(&["synth", "--seed", "3", "--out", p(&csv)]).0, EXIT_OK);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 16_001);
}

#[test]
fn loud_wav_warns_about_clipping() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("loud.wav");
    let (code, _, err) = call(&["synth", "--out", p(&wav)]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("clipped"));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["analyze", "--mode", "bogus", "--input", "x", "--out", "y"]).0, EXIT_USAGE);
    assert_eq!(call(&["verify", "--criteria", "13"]).0, EXIT_FAILURE);
    let (code, _, err) = call(&["analyze", "--input", "/nonexistent.wav", "--out", "/tmp/x.csv"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("nonexistent"));
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let (code, out, _) = call(&["verify", "--criteria", "1,7", "--out", p(&report)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().all(|l| l.starts_with("name=") || l.starts_with("suite ")));
    assert_eq!(out.lines().last().unwrap(), "suite pass=true n=4 failed=0");
    assert_eq!(fs::read_to_string(&report).unwrap(), out);

    let (code, out, _) = call(&["verify", "--criteria", "2", "--signals", "2", "--negative-control"]);
    assert_eq!(code, EXIT_FAILURE);
    let failed: Vec<&str> = out.lines().filter(|l| l.starts_with("name=") && l.contains("pass=false")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].starts_with("name=c2.upper "));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_focuslab");
    assert_eq!(Command::new(bin).arg("nope").output().unwrap().status.code(), Some(EXIT_USAGE));
    assert_eq!(
        Command::new(bin).args(["verify", "--criteria", "9"]).output().unwrap().status.code(),
        Some(EXIT_OK)
    );
}
