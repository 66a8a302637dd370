//! Command-line front end: `synth`, `focus`, `analyze` and `verify`.
//!
//! Every subcommand parses its flags into an args struct and hands it to one
//! library call; [`run`] is the testable entry point.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use focuslab::focus::{entropy_freq_focus, time_focus, FocusKind, FocusSpec, DEFAULT_EDGE_ROWS};
use focuslab::freq_focus::{cqt_transform, transform_freq_focused, wavelet_transform, FreqFocusProfile, ScaleGrid};
use focuslab::io::{
    read_csv_signal, read_profile_csv, read_wav, write_csv_signal, write_matrix_csv, write_pgm, write_profile_csv,
    write_wav, ProfileTable,
};
use focuslab::synth::{synth_multisine_spikes_noise, synth_spike_train, MultisineSpec, SpikeTrainSpec};
use focuslab::time_focus::{transform_time_focused, FrameGrid, TimeFocusConfig, TimeFocusProfile};
use focuslab::verification::{summary_line, Suite, SuiteConfig, CRITERIA};
use focuslab::wavelet::cqt_reference_from_wavelet;
use focuslab::{hardy_project, AnalyticWavelet, ComplexSignal, RealSignal, ScaleMap, TimeFrequencyMatrix, Window};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Signal-adaptive time-frequency analysis.
#[derive(Debug, Parser)]
#[command(name = "focuslab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic test signal (WAV or CSV by extension).
    Synth(SynthArgs),
    /// Compute a focus profile and write it as CSV.
    Focus(FocusArgs),
    /// Compute a transform and write the matrix CSV (and optionally a PGM).
    Analyze(AnalyzeArgs),
    /// Run the bound-certification suite; exit 0 iff every check passes.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Multisine,
    SpikeTrain,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "multisine")]
    pub kind: SynthKind,
    /// Sine frequencies in Hz, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub freqs: Option<Vec<f64>>,
    /// Sine amplitudes, one per frequency.
    #[arg(long, value_delimiter = ',')]
    pub amps: Option<Vec<f64>>,
    /// Number of random spikes (multisine).
    #[arg(long)]
    pub spikes: Option<usize>,
    /// Spike amplitude range `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub spike_amp: Option<Vec<f64>>,
    /// White noise standard deviation.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Spike onsets in seconds (spike train).
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Spike amplitudes (spike train).
    #[arg(long, value_delimiter = ',')]
    pub spike_amps: Option<Vec<f64>>,
    /// Spike decay constant in seconds (spike train).
    #[arg(long)]
    pub decay: Option<f64>,
    /// Background tone `freq,amp`, or `none` (spike train).
    #[arg(long)]
    pub tone: Option<String>,
    /// Length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Sample rate in Hz.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; `.wav` writes 16-bit PCM, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FocusMode {
    Time,
    Freq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMode {
    Time,
    Freq,
    Cqt,
    Wavelet,
    Stft,
}

/// Time-axis analysis parameters.
#[derive(Debug, Clone, Args)]
pub struct TimeParams {
    /// `gauss:<ms>:<shape>` or `hann:<ms>`.
    #[arg(long, default_value = "gauss:10:3")]
    pub window: String,
    /// `identity`, `exp` or `sinh:<scale>`.
    #[arg(long, default_value = "identity")]
    pub gamma: String,
    #[arg(long, default_value_t = 8)]
    pub hop: usize,
    #[arg(long, default_value_t = 64)]
    pub fft_size: usize,
    /// Analyze the real signal itself rather than its analytic part
    /// (negative frequencies then mirror the positive ones).
    #[arg(long)]
    pub two_sided: bool,
}

/// Scale-axis analysis parameters.
#[derive(Debug, Clone, Args)]
pub struct ScaleParams {
    /// `bump:<xi0>:<width>:<halfwidth>`.
    #[arg(long, default_value = "bump:1:0.04:0.15")]
    pub wavelet: String,
    /// Band of row center frequencies `lo,hi` in Hz.
    #[arg(long, value_delimiter = ',', num_args = 2, default_value = "25,1600")]
    pub band: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub rows: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FocusParams {
    /// `moment:<n>`, `entropy` or `renyi:<alpha>` (time default `moment:1`,
    /// frequency default `entropy`).
    #[arg(long)]
    pub focus: Option<String>,
    #[arg(long, default_value_t = 5.0)]
    pub sigma_max: f64,
    /// Moving-average width applied to raw focus values (0 disables).
    #[arg(long, default_value_t = 0)]
    pub smoothing: usize,
}

#[derive(Debug, Args)]
pub struct FocusArgs {
    /// Input WAV or CSV signal.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "time")]
    pub mode: FocusMode,
    #[command(flatten)]
    pub time: TimeParams,
    #[command(flatten)]
    pub scale: ScaleParams,
    #[command(flatten)]
    pub focus: FocusParams,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input WAV or CSV signal.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "time")]
    pub mode: AnalyzeMode,
    /// Take σ from the focus function instead of σ ≡ 1.
    #[arg(long)]
    pub focused: bool,
    /// `auto` (focus function), `const:<v>` or a profile CSV written by `focus`.
    #[arg(long)]
    pub sigma: Option<String>,
    #[command(flatten)]
    pub time: TimeParams,
    #[command(flatten)]
    pub scale: ScaleParams,
    #[command(flatten)]
    pub focus: FocusParams,
    /// Matrix CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional log-magnitude PGM image.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    #[arg(long, default_value_t = 80.0)]
    pub db_range: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Bandlimited signals in the time-focus corpus.
    #[arg(long, default_value_t = 20)]
    pub signals: usize,
    /// Run only these criteria (comma separated numbers).
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u8>>,
    /// Halve the time-focus upper bound so the suite must fail.
    #[arg(long)]
    pub negative_control: bool,
    /// Also write the report lines to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const BOOL_FLAGS: [&str; 3] = ["focused", "negative-control", "two-sided"];

/// Reads `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value", i + 1))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

/// Removes `--config <path>` from `args` and appends its entries as flags
/// after the subcommand, unless the same flag is given on the command line.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut out = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => path = Some(it.next().ok_or_else(|| anyhow!("--config needs a path"))?),
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => out.push(a),
        }
    }
    let Some(path) = path else {
        return Ok(out);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let given = |key: &str| {
        out.iter().any(|a| {
            a.to_str()
                .is_some_and(|s| s == format!("--{key}") || s.starts_with(&format!("--{key}=")))
        })
    };
    let mut extra = Vec::new();
    for (k, v) in parse_config(&text)? {
        if given(&k) {
            continue;
        }
        if BOOL_FLAGS.contains(&k.as_str()) {
            match v.as_str() {
                "true" => extra.push(OsString::from(format!("--{k}"))),
                "false" => {}
                _ => bail!("config key {k} must be true or false"),
            }
        } else {
            extra.push(OsString::from(format!("--{k}={v}")));
        }
    }
    let at = out.len().min(2);
    out.splice(at..at, extra);
    Ok(out)
}

pub fn read_signal(path: &Path) -> Result<RealSignal> {
    let is_wav = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    let s = if is_wav { read_wav(path) } else { read_csv_signal(path) };
    s.with_context(|| format!("reading {}", path.display()))
}

fn write_signal(signal: &RealSignal, path: &Path) -> Result<()> {
    let is_wav = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        write_wav(signal, path)?;
    } else {
        write_csv_signal(signal, path)?;
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<RealSignal> {
    let signal = match args.kind {
        SynthKind::Multisine => {
            let d = MultisineSpec::default();
            let freqs = args.freqs.clone().unwrap_or(d.freqs);
            let amps = args.amps.clone().unwrap_or_else(|| vec![1.0; freqs.len()]);
            synth_multisine_spikes_noise(&MultisineSpec {
                freqs,
                amps,
                n_spikes: args.spikes.unwrap_or(d.n_spikes),
                spike_amp: args.spike_amp.as_deref().map_or(d.spike_amp, |v| (v[0], v[1])),
                noise_std: args.noise.unwrap_or(d.noise_std),
                duration: args.duration.unwrap_or(d.duration),
                sample_rate: args.sample_rate.unwrap_or(d.sample_rate),
                seed: args.seed,
            })?
        }
        SynthKind::SpikeTrain => {
            let d = SpikeTrainSpec::default();
            let times = args.times.clone().unwrap_or(d.times);
            let amps = args.spike_amps.clone().unwrap_or_else(|| {
                if times.len() == d.amps.len() {
                    d.amps.clone()
                } else {
                    vec![1.0; times.len()]
                }
            });
            let tone = match args.tone.as_deref() {
                None => d.tone,
                Some("none") => None,
                Some(s) => {
                    let (f, a) = s.split_once(',').ok_or_else(|| anyhow!("tone must be 'freq,amp' or 'none'"))?;
                    Some((f.trim().parse()?, a.trim().parse()?))
                }
            };
            synth_spike_train(&SpikeTrainSpec {
                times,
                amps,
                decay: args.decay.unwrap_or(d.decay),
                tone,
                duration: args.duration.unwrap_or(d.duration),
                sample_rate: args.sample_rate.unwrap_or(d.sample_rate),
            })?
        }
    };
    Ok(signal)
}

fn time_config(p: &TimeParams) -> Result<TimeFocusConfig> {
    let window: Window = p.window.parse()?;
    let gamma: ScaleMap = p.gamma.parse()?;
    Ok(TimeFocusConfig::with_gamma(window, gamma, p.hop, p.fft_size)?)
}

fn scale_setup(p: &ScaleParams, sample_rate: f64) -> Result<(ScaleGrid, AnalyticWavelet)> {
    let w: AnalyticWavelet = p.wavelet.parse()?;
    let grid = ScaleGrid::for_band(p.band[0], p.band[1], p.rows, w.xi0(), ScaleMap::exponential())?;
    grid.validate_band(&w, sample_rate)?;
    Ok((grid, w))
}

fn focus_spec(p: &FocusParams, default: FocusKind) -> Result<FocusSpec> {
    let kind = match &p.focus {
        Some(s) => s.parse()?,
        None => default,
    };
    let mut spec = FocusSpec::new(kind, p.sigma_max)?;
    spec.smoothing = p.smoothing;
    Ok(spec)
}

fn time_input(signal: &RealSignal, p: &TimeParams) -> ComplexSignal {
    if p.two_sided {
        signal.to_complex()
    } else {
        hardy_project(signal)
    }
}

fn time_profile(f: &ComplexSignal, cfg: &TimeFocusConfig, focus: &FocusParams) -> Result<TimeFocusProfile> {
    Ok(time_focus(f, &focus_spec(focus, FocusKind::Moment(1))?, cfg)?)
}

fn freq_profile(signal: &RealSignal, grid: &ScaleGrid, w: &AnalyticWavelet, focus: &FocusParams) -> Result<FreqFocusProfile> {
    let spec = focus_spec(focus, FocusKind::Shannon)?;
    Ok(entropy_freq_focus(&hardy_project(signal), &spec, grid, w, DEFAULT_EDGE_ROWS)?)
}

pub fn focus(args: &FocusArgs) -> Result<ProfileTable> {
    let signal = read_signal(&args.input)?;
    match args.mode {
        FocusMode::Time => {
            let cfg = time_config(&args.time)?;
            let p = time_profile(&time_input(&signal, &args.time), &cfg, &args.focus)?;
            Ok(ProfileTable {
                axis_name: "time".into(),
                axis: (0..p.len()).map(|m| p.time(m)).collect(),
                sigma: p.sigma,
                sigma_max: p.sigma_max,
            })
        }
        FocusMode::Freq => {
            let (grid, w) = scale_setup(&args.scale, signal.sample_rate())?;
            let p = freq_profile(&signal, &grid, &w, &args.focus)?;
            Ok(ProfileTable {
                axis_name: "frequency".into(),
                axis: grid.centers(w.xi0()),
                sigma: p.sigma,
                sigma_max: p.sigma_max,
            })
        }
    }
}

enum SigmaSource {
    Auto,
    Const(f64),
    File(PathBuf),
}

fn sigma_source(args: &AnalyzeArgs) -> Result<SigmaSource> {
    match args.sigma.as_deref() {
        None if args.focused => Ok(SigmaSource::Auto),
        None => Ok(SigmaSource::Const(1.0)),
        Some("auto") => Ok(SigmaSource::Auto),
        Some(s) => match s.strip_prefix("const:") {
            Some(v) => Ok(SigmaSource::Const(v.parse().with_context(|| format!("bad focus value '{v}'"))?)),
            None => Ok(SigmaSource::File(PathBuf::from(s))),
        },
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.abs().max(1e-12)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<TimeFrequencyMatrix> {
    let signal = read_signal(&args.input)?;
    let sr = signal.sample_rate();
    let source = sigma_source(args)?;
    let m = match args.mode {
        AnalyzeMode::Stft | AnalyzeMode::Time => {
            let cfg = time_config(&args.time)?;
            let f = time_input(&signal, &args.time);
            let grid = FrameGrid::of(&f, &cfg);
            let profile = match (args.mode, source) {
                (AnalyzeMode::Stft, _) => TimeFocusProfile::constant(&grid, 1.0)?,
                (_, SigmaSource::Auto) => time_profile(&f, &cfg, &args.focus)?,
                (_, SigmaSource::Const(v)) => TimeFocusProfile::new(
                    vec![v; grid.n_frames],
                    grid.time(0),
                    grid.frame_step(),
                    args.focus.sigma_max.max(v),
                )?,
                (_, SigmaSource::File(path)) => {
                    let t = read_profile_csv(&path)?;
                    if t.axis_name != "time" || t.sigma.len() != grid.n_frames || !close(t.axis[0], grid.time(0), grid.frame_step()) {
                        bail!(
                            "profile {} does not match the {} analysis frames starting at {} s",
                            path.display(),
                            grid.n_frames,
                            grid.time(0)
                        );
                    }
                    TimeFocusProfile::new(t.sigma, grid.time(0), grid.frame_step(), t.sigma_max)?
                }
            };
            transform_time_focused(&f, &profile, &cfg)?
        }
        AnalyzeMode::Freq => {
            let (grid, w) = scale_setup(&args.scale, sr)?;
            let profile = match source {
                SigmaSource::Auto => freq_profile(&signal, &grid, &w, &args.focus)?,
                SigmaSource::Const(v) => {
                    // σ - 1 must vanish on the first and last rows
                    let mut sigma = vec![v; grid.len()];
                    sigma[0] = 1.0;
                    sigma[grid.len() - 1] = 1.0;
                    FreqFocusProfile::new(sigma, args.focus.sigma_max.max(v))?
                }
                SigmaSource::File(path) => {
                    let t = read_profile_csv(&path)?;
                    if t.axis_name != "frequency" || t.sigma.len() != grid.len() {
                        bail!("profile {} does not match the {} scale rows", path.display(), grid.len());
                    }
                    FreqFocusProfile::new(t.sigma, t.sigma_max)?
                }
            };
            transform_freq_focused(&hardy_project(&signal), &profile, &grid, &w)?
        }
        AnalyzeMode::Wavelet => {
            let (grid, w) = scale_setup(&args.scale, sr)?;
            wavelet_transform(&hardy_project(&signal), &grid, &w)?
        }
        AnalyzeMode::Cqt => {
            let (grid, w) = scale_setup(&args.scale, sr)?;
            cqt_transform(&signal.to_complex(), &grid, &cqt_reference_from_wavelet(&w))?
        }
    };
    Ok(m)
}

pub fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let suite = Suite::new(SuiteConfig {
        seed: args.seed,
        n_signals: args.signals,
        corrupt_upper_bound: args.negative_control,
        ..Default::default()
    });
    let ids: Vec<u8> = match &args.criteria {
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|(c, _)| c == *id)) {
                bail!("no criterion {bad}");
            }
            ids.clone()
        }
        None => CRITERIA.iter().map(|(id, _)| *id).collect(),
    };
    let mut reports = Vec::new();
    let mut text = String::new();
    for id in ids {
        for r in suite.criterion(id) {
            let line = r.to_string();
            writeln!(out, "{line}")?;
            text.push_str(&line);
            text.push('\n');
            reports.push(r);
        }
    }
    let summary = summary_line(&reports);
    writeln!(out, "{summary}")?;
    if let Some(path) = &args.out {
        text.push_str(&summary);
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Synth(a) => {
            let s = synth(&a)?;
            let peak = s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let is_wav = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
            if is_wav && peak > 1.0 {
                writeln!(err, "warning: peak amplitude {peak:.3} exceeds 1 and is clipped in the WAV file")?;
            }
            write_signal(&s, &a.out)?;
        }
        Command::Focus(a) => {
            let table = focus(&a)?;
            match &a.out {
                Some(path) => write_profile_csv(&table, path)?,
                None => write!(out, "{}", focuslab::io::format_profile_csv(&table))?,
            }
        }
        Command::Analyze(a) => {
            let m = analyze(&a)?;
            for w in &m.warnings {
                writeln!(err, "warning: {w}")?;
            }
            write_matrix_csv(&m, &a.out)?;
            if let Some(pgm) = &a.pgm {
                write_pgm(&m, pgm, a.db_range)?;
            }
        }
        Command::Verify(a) => return verify(&a, out),
    }
    Ok(true)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = match expand_config(args.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

/// [`run`] on the process's standard streams.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    run(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
