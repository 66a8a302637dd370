use std::fs;

use num_complex::Complex64;
use proptest::prelude::*;

use focuslab::io::{
    format_matrix_csv, parse_matrix_csv, read_matrix_csv, read_wav, render_pgm, write_matrix_csv, write_wav,
};
use focuslab::synth::{synth_multisine_spikes_noise, MultisineSpec};
use focuslab::{RealSignal, TimeFrequencyMatrix};

fn pcm16(path: &std::path::Path, channels: u16, samples: &[i16]) {
    let spec = hound::WavSpec {
        channels,
        sample_rate: 8000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
}

#[test]
fn wav_scaling_rule() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three.wav");
    pcm16(&path, 1, &[0, 16384, -32768]);
    let s = read_wav(&path).unwrap();
    assert_eq!(s.samples(), &[0.0, 0.5, -1.0]);
    assert_eq!(s.sample_rate(), 8000.0);
}

#[test]
fn wav_rejects_stereo_and_empty() {
    let dir = tempfile::tempdir().unwrap();
    let stereo = dir.path().join("stereo.wav");
    pcm16(&stereo, 2, &[1, 2, 3, 4]);
    assert!(read_wav(&stereo).unwrap_err().to_string().contains("mono"));
    let empty = dir.path().join("empty.wav");
    pcm16(&empty, 1, &[]);
    assert!(read_wav(&empty).is_err());
    let junk = dir.path().join("junk.wav");
    fs::write(&junk, b"RIFF not really").unwrap();
    assert!(read_wav(&junk).is_err());
}

#[test]
fn wav_round_trip_within_quantization() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rt.wav");
    let x = synth_multisine_spikes_noise(&MultisineSpec {
        n_spikes: 0,
        duration: 0.5,
        ..Default::default()
    })
    .unwrap()
    .scaled(0.2);
    write_wav(&x, &path).unwrap();
    let y = read_wav(&path).unwrap();
    assert_eq!(y.len(), x.len());
    let worst = x
        .samples()
        .iter()
        .zip(y.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1.0 / 32768.0, "{worst}");
    assert!(write_wav(&RealSignal::new(vec![0.0], 44100.5).unwrap(), &path).is_err());
}

fn random_matrix(rows: usize, cols: usize, vals: &[(f64, f64)]) -> TimeFrequencyMatrix {
    TimeFrequencyMatrix::new(
        vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
        rows,
        cols,
        (0..cols).map(|m| -0.25 + m as f64 * 0.125).collect(),
        (0..rows).map(|r| 10.0 * 1.5f64.powi(r as i32)).collect(),
        (0..rows).map(|r| 0.1 + r as f64).collect(),
        0.125,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_csv_round_trip_is_exact(
        rows in 1usize..6,
        cols in 1usize..6,
        seed in proptest::collection::vec((-1e6f64..1e6, -1e-6f64..1e-6), 36),
    ) {
        let m = random_matrix(rows, cols, &seed[..rows * cols]);
        prop_assert_eq!(parse_matrix_csv(&format_matrix_csv(&m)).unwrap(), m);
    }
}

#[test]
fn matrix_csv_file_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let vals: Vec<(f64, f64)> = (0..6).map(|i| (i as f64 / 7.0, -(i as f64).sqrt())).collect();
    let mut m = random_matrix(2, 3, &vals);
    m.warnings.push("row 1 truncated".into());
    write_matrix_csv(&m, &path).unwrap();
    assert_eq!(read_matrix_csv(&path).unwrap(), m);
    let text = fs::read_to_string(&path).unwrap();
    let headerless: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    assert!(parse_matrix_csv(&headerless).is_err());
    let no_weights: String = text
        .lines()
        .filter(|l| !l.starts_with("# row_weights"))
        .map(|l| format!("{l}\n"))
        .collect();
    assert!(parse_matrix_csv(&no_weights).is_err());
}

#[test]
fn pgm_is_deterministic_and_spans_the_range() {
    let floor = 10f64.powf(-80.0 / 20.0);
    let m = random_matrix(1, 2, &[(1.0, 0.0), (floor, 0.0)]);
    let a = render_pgm(&m, 80.0).unwrap();
    assert_eq!(a, render_pgm(&m, 80.0).unwrap());
    assert_eq!(&a[a.len() - 2..], &[255, 0]);
}
