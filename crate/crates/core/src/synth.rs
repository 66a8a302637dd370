//! Seeded synthetic test signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::signal::{dft_inverse, RealSignal, Spectrum};

/// Sines plus randomly placed spikes plus white Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct MultisineSpec {
    pub freqs: Vec<f64>,
    pub amps: Vec<f64>,
    pub n_spikes: usize,
    /// Spike amplitudes are uniform in `[lo, hi]`.
    pub spike_amp: (f64, f64),
    pub noise_std: f64,
    pub duration: f64,
    pub sample_rate: f64,
    pub seed: u64,
}

impl Default for MultisineSpec {
    fn default() -> Self {
        Self {
            freqs: vec![50.0, 120.0, 135.0, 400.0],
            amps: vec![1.0; 4],
            n_spikes: 50,
            spike_amp: (1.0, 5.0),
            noise_std: 0.1,
            duration: 4.0,
            sample_rate: 4000.0,
            seed: 0,
        }
    }
}

/// Exponentially damped impulses `a_k e^{-(t - t_k)/τ}` for `t ≥ t_k`, on top
/// of an optional steady tone.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrainSpec {
    pub times: Vec<f64>,
    pub amps: Vec<f64>,
    pub decay: f64,
    /// `(frequency, amplitude)` of the background tone.
    pub tone: Option<(f64, f64)>,
    pub duration: f64,
    pub sample_rate: f64,
}

impl Default for SpikeTrainSpec {
    fn default() -> Self {
        Self {
            times: (0..8).map(|k| 0.1 + 0.1 * k as f64 + 0.013 * (k % 3) as f64).collect(),
            amps: vec![1.0, 0.6, 1.4, 0.8, 1.2, 0.5, 1.0, 0.7],
            decay: 1e-3,
            tone: Some((440.0, 0.2)),
            duration: 1.0,
            sample_rate: 4000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthSpec {
    MultisineSpikesNoise(MultisineSpec),
    SpikeTrain(SpikeTrainSpec),
}

impl SynthSpec {
    pub fn generate(&self) -> Result<RealSignal> {
        match self {
            SynthSpec::MultisineSpikesNoise(s) => synth_multisine_spikes_noise(s),
            SynthSpec::SpikeTrain(s) => synth_spike_train(s),
        }
    }
}

fn sample_count(duration: f64, sample_rate: f64) -> Result<usize> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return invalid(format!("sample rate must be positive, got {sample_rate}"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return invalid(format!("duration must be positive, got {duration}"));
    }
    Ok((duration * sample_rate).round().max(1.0) as usize)
}

pub fn synth_multisine_spikes_noise(spec: &MultisineSpec) -> Result<RealSignal> {
    let len = sample_count(spec.duration, spec.sample_rate)?;
    if spec.freqs.len() != spec.amps.len() {
        return invalid("one amplitude per sine frequency is required");
    }
    if let Some(f) = spec.freqs.iter().find(|&&f| !(f >= 0.0 && f < 0.5 * spec.sample_rate)) {
        return invalid(format!("sine frequency {f} Hz is not below the Nyquist frequency"));
    }
    if spec.n_spikes > len {
        return invalid(format!("{} spikes do not fit in {len} samples", spec.n_spikes));
    }
    let (alo, ahi) = spec.spike_amp;
    if !(alo.is_finite() && ahi >= alo) {
        return invalid("spike amplitude range must be ordered");
    }
    if !(spec.noise_std.is_finite() && spec.noise_std >= 0.0) {
        return invalid("noise level must be non-negative");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 / spec.sample_rate;
            spec.freqs
                .iter()
                .zip(&spec.amps)
                .map(|(f, a)| a * (2.0 * PI * f * t).sin())
                .sum()
        })
        .collect();
    let mut positions = sample(&mut rng, len, spec.n_spikes).into_vec();
    positions.sort_unstable();
    for p in positions {
        x[p] += if ahi > alo { rng.gen_range(alo..=ahi) } else { alo };
    }
    if spec.noise_std > 0.0 {
        let normal = Normal::new(0.0, spec.noise_std).expect("finite noise level");
        for v in x.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    RealSignal::new(x, spec.sample_rate)
}

pub fn synth_spike_train(spec: &SpikeTrainSpec) -> Result<RealSignal> {
    let len = sample_count(spec.duration, spec.sample_rate)?;
    if spec.times.len() != spec.amps.len() {
        return invalid("one amplitude per spike is required");
    }
    if !(spec.decay.is_finite() && spec.decay > 0.0) {
        return invalid("spike decay must be positive");
    }
    let mut x = vec![0.0; len];
    if let Some((f, a)) = spec.tone {
        if !(f >= 0.0 && f < 0.5 * spec.sample_rate) {
            return invalid(format!("tone frequency {f} Hz is not below the Nyquist frequency"));
        }
        for (n, v) in x.iter_mut().enumerate() {
            *v = a * (2.0 * PI * f * n as f64 / spec.sample_rate).sin();
        }
    }
    let tail = (12.0 * spec.decay * spec.sample_rate).ceil() as usize;
    for (&t, &a) in spec.times.iter().zip(&spec.amps) {
        let start = (t * spec.sample_rate).round();
        if !(start >= 0.0 && (start as usize) < len) {
            return invalid(format!("spike time {t} s is outside the signal"));
        }
        let start = start as usize;
        for (i, v) in x[start..len.min(start + tail)].iter_mut().enumerate() {
            *v += a * (-(i as f64) / (spec.decay * spec.sample_rate)).exp();
        }
    }
    RealSignal::new(x, spec.sample_rate)
}

/// Real signal whose DFT bins are random (uniform real and imaginary parts in
/// `[-1, 1]`) on the bins with frequency in `[lo, hi]` and zero elsewhere.
pub fn bandlimited_signal(len: usize, sample_rate: f64, band: (f64, f64), seed: u64) -> Result<RealSignal> {
    if len < 2 {
        return invalid("bandlimited signal needs at least two samples");
    }
    let (lo, hi) = band;
    if !(lo >= 0.0 && hi > lo && hi < 0.5 * sample_rate) {
        return invalid(format!("band [{lo}, {hi}] is not inside (0, Nyquist)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let df = sample_rate / len as f64;
    let mut bins = vec![Complex64::new(0.0, 0.0); len];
    for k in 1..len.div_ceil(2) {
        let f = k as f64 * df;
        if f >= lo && f <= hi {
            let z = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            bins[k] = z;
            bins[len - k] = z.conj();
        }
    }
    let s = dft_inverse(&Spectrum {
        bins,
        freq_step: df,
        start_time: 0.0,
    })?;
    RealSignal::new(s.samples().iter().map(|z| z.re).collect(), sample_rate)
}
