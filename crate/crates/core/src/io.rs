//! WAV, CSV and PGM readers and writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{RealSignal, TimeFrequencyMatrix};

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

/// Reads 16-bit PCM mono WAV, scaling samples by `1/32768`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<RealSignal> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return format_err(format!("expected a mono file, found {} channels", spec.channels));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return format_err(format!(
            "expected 16-bit integer PCM, found {} bits {:?}",
            spec.bits_per_sample, spec.sample_format
        ));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if samples.is_empty() {
        return format_err("WAV file has no samples");
    }
    RealSignal::new(samples, spec.sample_rate as f64)
}

/// Writes 16-bit PCM mono WAV; samples are rounded to `x·32768` and clipped.
pub fn write_wav(signal: &RealSignal, path: impl AsRef<Path>) -> Result<()> {
    let rate = signal.sample_rate();
    if rate.fract() != 0.0 || rate < 1.0 || rate > u32::MAX as f64 {
        return format_err(format!("WAV needs an integer sample rate, got {rate}"));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &x in signal.samples() {
        w.write_sample((x * 32768.0).round().clamp(-32768.0, 32767.0) as i16)?;
    }
    w.finalize()?;
    Ok(())
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: '{}' is not a number", field.trim())))
}

/// One sample per line with an optional `# sample_rate=<Hz>` header (default 1).
pub fn parse_csv_signal(text: &str) -> Result<RealSignal> {
    let mut rate = 1.0;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("sample_rate=") {
                rate = parse_f64(v, i + 1)?;
            }
            continue;
        }
        samples.push(parse_f64(line, i + 1)?);
    }
    if samples.is_empty() {
        return format_err("signal CSV has no samples");
    }
    RealSignal::new(samples, rate)
}

pub fn format_csv_signal(signal: &RealSignal) -> String {
    let mut out = format!("# sample_rate={}\n", signal.sample_rate());
    for x in signal.samples() {
        let _ = writeln!(out, "{x}");
    }
    out
}

pub fn read_csv_signal(path: impl AsRef<Path>) -> Result<RealSignal> {
    parse_csv_signal(&fs::read_to_string(path)?)
}

pub fn write_csv_signal(signal: &RealSignal, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, format_csv_signal(signal))?)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Header lines `# key=value` followed by one line per row of interleaved
/// `re,im` pairs.
pub fn format_matrix_csv(m: &TimeFrequencyMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# rows={}", m.n_rows());
    let _ = writeln!(out, "# cols={}", m.n_frames());
    let _ = writeln!(out, "# frame_step={}", m.frame_step);
    let _ = writeln!(out, "# start_time={}", m.time_axis.first().copied().unwrap_or(0.0));
    let _ = writeln!(out, "# row_axis={}", join(&m.row_axis));
    let _ = writeln!(out, "# row_weights={}", join(&m.row_weights));
    for w in &m.warnings {
        let _ = writeln!(out, "# warning={}", w.replace('\n', " "));
    }
    for r in 0..m.n_rows() {
        let line = m
            .row(r)
            .iter()
            .map(|v| format!("{},{}", v.re, v.im))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn parse_list(v: &str, line: usize) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_f64(x, line)).collect()
}

pub fn parse_matrix_csv(text: &str) -> Result<TimeFrequencyMatrix> {
    let mut rows = None;
    let mut cols = None;
    let mut frame_step = None;
    let mut start_time = 0.0;
    let mut row_axis = None;
    let mut row_weights = None;
    let mut warnings = Vec::new();
    let mut values = Vec::new();
    let mut data_lines = 0usize;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let Some((key, val)) = h.trim().split_once('=') else {
                continue;
            };
            match key.trim() {
                "rows" => rows = Some(parse_f64(val, n)? as usize),
                "cols" => cols = Some(parse_f64(val, n)? as usize),
                "frame_step" => frame_step = Some(parse_f64(val, n)?),
                "start_time" => start_time = parse_f64(val, n)?,
                "row_axis" => row_axis = Some(parse_list(val, n)?),
                "row_weights" => row_weights = Some(parse_list(val, n)?),
                "warning" => warnings.push(val.to_string()),
                _ => {}
            }
            continue;
        }
        let (Some(_), Some(c)) = (rows, cols) else {
            return format_err(format!("line {n}: data before the rows/cols header"));
        };
        let fields = parse_list(line, n)?;
        if fields.len() != 2 * c {
            return format_err(format!("line {n}: expected {} numbers, found {}", 2 * c, fields.len()));
        }
        values.extend(fields.chunks(2).map(|p| Complex64::new(p[0], p[1])));
        data_lines += 1;
    }
    let (Some(r), Some(c), Some(step), Some(axis), Some(weights)) = (rows, cols, frame_step, row_axis, row_weights)
    else {
        return format_err("matrix CSV is missing one of rows, cols, frame_step, row_axis, row_weights");
    };
    if data_lines != r {
        return format_err(format!("header declares {r} rows, found {data_lines}"));
    }
    let time_axis = (0..c).map(|m| start_time + m as f64 * step).collect();
    let mut m = TimeFrequencyMatrix::new(values, r, c, time_axis, axis, weights, step)?;
    m.warnings = warnings;
    Ok(m)
}

pub fn write_matrix_csv(m: &TimeFrequencyMatrix, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, format_matrix_csv(m))?)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<TimeFrequencyMatrix> {
    parse_matrix_csv(&fs::read_to_string(path)?)
}

/// A focus profile as written by the CLI: one `position,sigma` line per frame
/// (time in seconds) or per scale row (center frequency in Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    /// `time` or `frequency`.
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_max: f64,
}

pub fn format_profile_csv(p: &ProfileTable) -> String {
    let mut out = format!("# axis={}\n# sigma_max={}\n", p.axis_name, p.sigma_max);
    for (x, s) in p.axis.iter().zip(&p.sigma) {
        let _ = writeln!(out, "{x},{s}");
    }
    out
}

pub fn parse_profile_csv(text: &str) -> Result<ProfileTable> {
    let mut axis_name = None;
    let mut sigma_max = None;
    let (mut axis, mut sigma) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            match h.trim().split_once('=') {
                Some(("axis", v)) => axis_name = Some(v.trim().to_string()),
                Some(("sigma_max", v)) => sigma_max = Some(parse_f64(v, n)?),
                _ => {}
            }
            continue;
        }
        let fields = parse_list(line, n)?;
        let [x, s] = fields[..] else {
            return format_err(format!("line {n}: expected 'position,sigma'"));
        };
        axis.push(x);
        sigma.push(s);
    }
    let (Some(axis_name), Some(sigma_max)) = (axis_name, sigma_max) else {
        return format_err("profile CSV needs '# axis=' and '# sigma_max=' headers");
    };
    if sigma.is_empty() {
        return format_err("profile CSV has no values");
    }
    Ok(ProfileTable {
        axis_name,
        axis,
        sigma,
        sigma_max,
    })
}

pub fn write_profile_csv(p: &ProfileTable, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, format_profile_csv(p))?)
}

pub fn read_profile_csv(path: impl AsRef<Path>) -> Result<ProfileTable> {
    parse_profile_csv(&fs::read_to_string(path)?)
}

/// Binary PGM (`P5`) log-magnitude image, highest row on top. Pixels map
/// `[dB_max - db_range, dB_max]` linearly onto `[0, 255]`; an all-zero
/// matrix renders black.
pub fn render_pgm(m: &TimeFrequencyMatrix, db_range: f64) -> Result<Vec<u8>> {
    if m.n_rows() == 0 || m.n_frames() == 0 {
        return format_err("cannot render an empty matrix");
    }
    if !(db_range.is_finite() && db_range > 0.0) {
        return format_err(format!("dB range must be positive, got {db_range}"));
    }
    let db: Vec<f64> = m.values().iter().map(|v| 20.0 * (v.norm() + 1e-300).log10()).collect();
    let all_zero = m.values().iter().all(|v| v.norm() == 0.0);
    let top = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", m.n_frames(), m.n_rows()).into_bytes();
    let cols = m.n_frames();
    for r in (0..m.n_rows()).rev() {
        for d in &db[r * cols..(r + 1) * cols] {
            let level = if all_zero {
                0.0
            } else {
                (255.0 * ((d - (top - db_range)) / db_range).clamp(0.0, 1.0)).round()
            };
            out.push(level as u8);
        }
    }
    Ok(out)
}

pub fn write_pgm(m: &TimeFrequencyMatrix, path: impl AsRef<Path>, db_range: f64) -> Result<()> {
    Ok(fs::write(path, render_pgm(m, db_range)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(values: Vec<Complex64>, rows: usize, cols: usize) -> TimeFrequencyMatrix {
        TimeFrequencyMatrix::new(
            values,
            rows,
            cols,
            (0..cols).map(|m| m as f64 * 0.5).collect(),
            (0..rows).map(|r| r as f64).collect(),
            vec![1.0; rows],
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn one_cell_csv_line() {
        let m = matrix(vec![Complex64::new(2.0, -3.0)], 1, 1);
        let text = format_matrix_csv(&m);
        assert_eq!(text.lines().last().unwrap(), "2,-3");
        assert_eq!(parse_matrix_csv(&text).unwrap(), m);
    }

    #[test]
    fn csv_errors() {
        assert!(parse_matrix_csv("1,2\n").is_err());
        let m = matrix(vec![Complex64::new(1.0, 0.0); 4], 2, 2);
        let text = format_matrix_csv(&m);
        let ragged = text.replacen("1,0,1,0\n", "1,0\n", 1);
        assert!(parse_matrix_csv(&ragged).is_err());
        assert!(parse_matrix_csv(&text.replace("1,0,1,0", "1,x,1,0")).is_err());
        assert!(parse_csv_signal("# sample_rate=8\n").is_err());
        assert!(parse_csv_signal("1\nfoo\n").is_err());
    }

    #[test]
    fn csv_signal_header() {
        let s = parse_csv_signal("# sample_rate=8000\n0.5\n-1\n").unwrap();
        assert_eq!(s.sample_rate(), 8000.0);
        assert_eq!(s.samples(), &[0.5, -1.0]);
        assert_eq!(parse_csv_signal("1\n2\n").unwrap().sample_rate(), 1.0);
        assert_eq!(parse_csv_signal(&format_csv_signal(&s)).unwrap(), s);
    }

    #[test]
    fn profile_round_trip() {
        let p = ProfileTable {
            axis_name: "time".into(),
            axis: vec![-0.005, 0.0, 0.005],
            sigma: vec![1.0, 4.25, 1.0 / 3.0 + 1.0],
            sigma_max: 5.0,
        };
        assert_eq!(parse_profile_csv(&format_profile_csv(&p)).unwrap(), p);
        assert!(parse_profile_csv("0,1\n").is_err());
        assert!(parse_profile_csv("# axis=time\n# sigma_max=5\n0,1,2\n").is_err());
    }

    #[test]
    fn pgm_levels() {
        let flat = matrix(vec![Complex64::new(0.0, 3.0); 6], 2, 3);
        let img = render_pgm(&flat, 80.0).unwrap();
        assert!(img.starts_with(b"P5\n3 2\n255\n"));
        assert!(img[img.len() - 6..].iter().all(|&p| p == 255));
        let zero = matrix(vec![Complex64::new(0.0, 0.0); 6], 2, 3);
        let img = render_pgm(&zero, 80.0).unwrap();
        assert!(img[img.len() - 6..].iter().all(|&p| p == 0));
        let two = matrix(vec![Complex64::new(1.0, 0.0), Complex64::new(1e-4, 0.0)], 2, 1);
        let img = render_pgm(&two, 80.0).unwrap();
        // top row of the image is the last matrix row
        assert_eq!(&img[img.len() - 2..], &[0, 255]);
    }
}
