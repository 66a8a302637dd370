//! Time-focused short-time Fourier transform, its kernel and energy bounds.
//!
//! Atoms are `h_{t,ω,σ}(x) = √(γ'(ω)σ) e^{2iπγ(ω)x} h(σ(x - t))`: the window is
//! compressed around `t` by the focus value `σ(t) ≥ 1`. Frames sit on the
//! sample lattice decimated by `hop`, extended by half a window length on
//! both sides so that the frames overlapping the signal edges are kept.
//!
//! The focus profile is interpreted in continuous time as piecewise constant:
//! frame `m` owns the cell `[t_m - Δ/2, t_m + Δ/2)` and the profile is 1
//! outside the frame range.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quad::{breakpoints, integrate_with_breaks, Tolerance};
use crate::scale_map::{Codomain, ScaleMap};
use crate::signal::{dft_forward, fft_in_place, ComplexSignal, Spectrum, TimeFrequencyMatrix};
use crate::window::Window;

/// Minimum number of samples under a rescaled window.
pub const MIN_WINDOW_SAMPLES: usize = 4;

/// Relative slack granted to the energy sandwich checks.
pub const SANDWICH_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeFocusConfig {
    pub window: Window,
    pub gamma: ScaleMap,
    /// Frame spacing in samples.
    pub hop: usize,
    /// FFT length of the fast path, i.e. the number of frequency rows.
    pub fft_size: usize,
}

impl TimeFocusConfig {
    pub fn new(window: Window, hop: usize, fft_size: usize) -> Result<Self> {
        Self::with_gamma(window, ScaleMap::identity(), hop, fft_size)
    }

    pub fn with_gamma(window: Window, gamma: ScaleMap, hop: usize, fft_size: usize) -> Result<Self> {
        if hop == 0 {
            return invalid("hop must be at least 1");
        }
        if fft_size < 2 {
            return invalid("fft size must be at least 2");
        }
        if gamma.codomain() != Codomain::AllReals {
            return invalid("time focus needs a scale map onto the whole real line");
        }
        Ok(Self {
            window,
            gamma,
            hop,
            fft_size,
        })
    }

    /// Half-width, in samples, of the window compressed by `sigma`.
    pub fn half_width_samples(&self, sample_rate: f64, sigma: f64) -> usize {
        let r = self.window.support_length() * sample_rate / (2.0 * sigma);
        (r * (1.0 + 1e-12)).floor() as usize
    }

    fn check_fft_size(&self, sample_rate: f64) -> Result<()> {
        let needed = 2 * self.half_width_samples(sample_rate, 1.0) + 1;
        if self.fft_size < needed {
            return invalid(format!(
                "fft size {} is smaller than the {} samples under the window",
                self.fft_size, needed
            ));
        }
        Ok(())
    }
}

/// Frame anchors: `t_m = start + (first + m·hop)/sample_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid {
    pub start_time: f64,
    pub sample_rate: f64,
    /// Sample index (relative to the signal start, possibly negative) of frame 0.
    pub first: i64,
    pub hop: usize,
    pub n_frames: usize,
}

impl FrameGrid {
    /// Frames covering a signal of `len` samples plus half a window on each side.
    pub fn for_signal(len: usize, sample_rate: f64, start_time: f64, cfg: &TimeFocusConfig) -> Self {
        let pad = (cfg.window.support_length() * sample_rate / 2.0).ceil() as i64;
        let span = len as i64 - 1 + 2 * pad;
        Self {
            start_time,
            sample_rate,
            first: -pad,
            hop: cfg.hop,
            n_frames: (span / cfg.hop as i64) as usize + 1,
        }
    }

    pub fn of(signal: &ComplexSignal, cfg: &TimeFocusConfig) -> Self {
        Self::for_signal(signal.len(), signal.sample_rate(), signal.start_time(), cfg)
    }

    pub fn center_index(&self, m: usize) -> i64 {
        self.first + (m * self.hop) as i64
    }

    pub fn time(&self, m: usize) -> f64 {
        self.start_time + self.center_index(m) as f64 / self.sample_rate
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_frames).map(|m| self.time(m)).collect()
    }

    pub fn frame_step(&self) -> f64 {
        self.hop as f64 / self.sample_rate
    }
}

/// Focus values `σ_m ∈ [1, σ_max]` on a frame grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFocusProfile {
    pub sigma: Vec<f64>,
    /// Time of frame 0.
    pub t0: f64,
    pub frame_step: f64,
    pub sigma_max: f64,
}

impl TimeFocusProfile {
    pub fn new(sigma: Vec<f64>, t0: f64, frame_step: f64, sigma_max: f64) -> Result<Self> {
        let p = Self {
            sigma,
            t0,
            frame_step,
            sigma_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(grid: &FrameGrid, value: f64) -> Result<Self> {
        Self::new(vec![value; grid.n_frames], grid.time(0), grid.frame_step(), value.max(1.0))
    }

    /// `value` on the frames whose time lies in `[a, b]`, 1 elsewhere.
    pub fn step(grid: &FrameGrid, value: f64, a: f64, b: f64) -> Result<Self> {
        let sigma = grid
            .times()
            .iter()
            .map(|&t| if t >= a && t <= b { value } else { 1.0 })
            .collect();
        Self::new(sigma, grid.time(0), grid.frame_step(), value.max(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma.is_empty() {
            return invalid("focus profile is empty");
        }
        if !(self.frame_step.is_finite() && self.frame_step > 0.0 && self.t0.is_finite()) {
            return invalid("focus profile needs a finite start and a positive frame step");
        }
        if !(self.sigma_max.is_finite() && self.sigma_max >= 1.0) {
            return invalid("sigma_max must be finite and at least 1");
        }
        let tol = 1e-12 * self.sigma_max;
        if let Some((m, s)) = self
            .sigma
            .iter()
            .enumerate()
            .find(|(_, &s)| !(s.is_finite() && s >= 1.0 - tol && s <= self.sigma_max + tol))
        {
            return invalid(format!("focus value {s} at frame {m} outside [1, {}]", self.sigma_max));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.frame_step
    }

    /// Continuous-time focus value: piecewise constant per frame cell, 1 outside.
    pub fn at(&self, t: f64) -> f64 {
        let pos = (t - self.t0) / self.frame_step + 0.5;
        if pos < 0.0 {
            return 1.0;
        }
        let m = pos.floor() as usize;
        self.sigma.get(m).copied().unwrap_or(1.0)
    }

    /// Edges of the frame cells: `t0 - Δ/2 + m·Δ`, `m = 0..=len`.
    pub fn cell_edges(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.sigma.len()).map(move |m| self.t0 + (m as f64 - 0.5) * self.frame_step)
    }

    pub fn matches(&self, grid: &FrameGrid) -> bool {
        self.sigma.len() == grid.n_frames
            && (self.frame_step - grid.frame_step()).abs() <= 1e-9 * grid.frame_step()
            && (self.t0 - grid.time(0)).abs() <= 1e-9 * grid.frame_step()
    }
}

/// Samples of `√(γ'(ω)σ) e^{2iπγ(ω)x} h(σ(x - t))` at `start + n/sample_rate`.
pub fn time_focused_atom(
    t: f64,
    omega: f64,
    sigma_val: f64,
    cfg: &TimeFocusConfig,
    sample_rate: f64,
    len: usize,
    start_time: f64,
) -> Result<ComplexSignal> {
    if !(sigma_val.is_finite() && sigma_val >= 1.0) {
        return invalid(format!("focus value must be at least 1, got {sigma_val}"));
    }
    let amp = (cfg.gamma.deriv(omega) * sigma_val).sqrt();
    let freq = cfg.gamma.eval(omega);
    let samples = (0..len)
        .map(|n| {
            let x = start_time + n as f64 / sample_rate;
            let h = cfg.window.eval(sigma_val * (x - t));
            Complex64::from_polar(amp * h, 2.0 * std::f64::consts::PI * freq * x)
        })
        .collect();
    ComplexSignal::with_start(samples, sample_rate, start_time)
}

fn check_profile(signal: &ComplexSignal, profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> Result<FrameGrid> {
    profile.validate()?;
    let grid = FrameGrid::of(signal, cfg);
    if !profile.matches(&grid) {
        return invalid(format!(
            "focus profile ({} frames from {} s, step {} s) does not match the frame grid ({} frames from {} s, step {} s)",
            profile.len(),
            profile.t0,
            profile.frame_step,
            grid.n_frames,
            grid.time(0),
            grid.frame_step()
        ));
    }
    for (m, &s) in profile.sigma.iter().enumerate() {
        let samples = 2 * cfg.half_width_samples(signal.sample_rate(), s) + 1;
        if samples < MIN_WINDOW_SAMPLES {
            return Err(Error::DegenerateWindow { frame: m, samples });
        }
    }
    Ok(grid)
}

/// `M^τf(t_m, ω_k) = ⟨f, h_{t_m,ω_k,σ_m}⟩` on the frame grid of `signal`.
///
/// With `γ = identity` rows are the FFT bins `ω_k = k·sr/fft_size`,
/// `k = -fft_size/2 .. fft_size/2 - 1`. Other maps use rows uniform in `ω`
/// over `[γ⁻¹(-sr/2), γ⁻¹(sr/2))`, evaluated by direct summation.
pub fn transform_time_focused(
    signal: &ComplexSignal,
    profile: &TimeFocusProfile,
    cfg: &TimeFocusConfig,
) -> Result<TimeFrequencyMatrix> {
    if cfg.gamma == ScaleMap::Identity {
        transform_fast(signal, profile, cfg)
    } else {
        transform_time_focused_direct(signal, profile, cfg)
    }
}

/// Indices `n_lo..=n_hi` of the signal samples under the window of frame `m`.
fn frame_span(grid: &FrameGrid, m: usize, half: usize, len: usize) -> Option<(usize, usize)> {
    let c = grid.center_index(m);
    let lo = (c - half as i64).max(0);
    let hi = (c + half as i64).min(len as i64 - 1);
    (lo <= hi).then_some((lo as usize, hi as usize))
}

fn transform_fast(
    signal: &ComplexSignal,
    profile: &TimeFocusProfile,
    cfg: &TimeFocusConfig,
) -> Result<TimeFrequencyMatrix> {
    let sr = signal.sample_rate();
    cfg.check_fft_size(sr)?;
    let grid = check_profile(signal, profile, cfg)?;
    let m_size = cfg.fft_size;
    let df = sr / m_size as f64;
    let dt = signal.dt();
    let half_rows = (m_size / 2) as i64;
    let x = signal.samples();
    let columns: Vec<Vec<Complex64>> = (0..grid.n_frames)
        .into_par_iter()
        .map(|m| {
            let sigma = profile.sigma[m];
            let mut col = vec![Complex64::new(0.0, 0.0); m_size];
            let half = cfg.half_width_samples(sr, sigma);
            let Some((lo, hi)) = frame_span(&grid, m, half, x.len()) else {
                return col;
            };
            let t = grid.time(m);
            let mut buf = vec![Complex64::new(0.0, 0.0); m_size];
            for n in lo..=hi {
                let xn = signal.time_at(n);
                buf[n - lo] = x[n] * cfg.window.eval(sigma * (xn - t));
            }
            fft_in_place(&mut buf, false);
            let x_first = signal.time_at(lo);
            let scale = sigma.sqrt() * dt;
            for (r, out) in col.iter_mut().enumerate() {
                let k = r as i64 - half_rows;
                let bin = k.rem_euclid(m_size as i64) as usize;
                let omega = k as f64 * df;
                let phase = Complex64::from_polar(scale, -2.0 * std::f64::consts::PI * omega * x_first);
                *out = buf[bin] * phase;
            }
            col
        })
        .collect();
    let rows: Vec<f64> = (0..m_size).map(|r| (r as i64 - half_rows) as f64 * df).collect();
    assemble(columns, &grid, rows, vec![df; m_size])
}

fn assemble(
    columns: Vec<Vec<Complex64>>,
    grid: &FrameGrid,
    row_axis: Vec<f64>,
    row_weights: Vec<f64>,
) -> Result<TimeFrequencyMatrix> {
    let n_rows = row_axis.len();
    let n_frames = columns.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n_rows * n_frames];
    for (m, col) in columns.into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            values[r * n_frames + m] = v;
        }
    }
    TimeFrequencyMatrix::new(values, n_rows, n_frames, grid.times(), row_axis, row_weights, grid.frame_step())
}

/// Direct-summation evaluation of [`transform_time_focused`], valid for any scale map.
pub fn transform_time_focused_direct(
    signal: &ComplexSignal,
    profile: &TimeFocusProfile,
    cfg: &TimeFocusConfig,
) -> Result<TimeFrequencyMatrix> {
    let sr = signal.sample_rate();
    let grid = check_profile(signal, profile, cfg)?;
    let n_rows = cfg.fft_size;
    let (row_axis, d_omega) = if cfg.gamma == ScaleMap::Identity {
        let df = sr / n_rows as f64;
        let half = (n_rows / 2) as i64;
        ((0..n_rows).map(|r| (r as i64 - half) as f64 * df).collect::<Vec<_>>(), df)
    } else {
        let lo = cfg.gamma.invert(-0.5 * sr)?;
        let hi = cfg.gamma.invert(0.5 * sr)?;
        let d = (hi - lo) / n_rows as f64;
        ((0..n_rows).map(|r| lo + r as f64 * d).collect(), d)
    };
    let dt = signal.dt();
    let x = signal.samples();
    let columns: Vec<Vec<Complex64>> = (0..grid.n_frames)
        .into_par_iter()
        .map(|m| {
            let sigma = profile.sigma[m];
            let half = cfg.half_width_samples(sr, sigma);
            let t = grid.time(m);
            let Some((lo, hi)) = frame_span(&grid, m, half, x.len()) else {
                return vec![Complex64::new(0.0, 0.0); n_rows];
            };
            let windowed: Vec<(f64, Complex64)> = (lo..=hi)
                .map(|n| {
                    let xn = signal.time_at(n);
                    (xn, x[n] * cfg.window.eval(sigma * (xn - t)))
                })
                .collect();
            row_axis
                .iter()
                .map(|&omega| {
                    let freq = cfg.gamma.eval(omega);
                    let amp = (cfg.gamma.deriv(omega) * sigma).sqrt() * dt;
                    let acc: Complex64 = windowed
                        .iter()
                        .map(|&(xn, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * freq * xn))
                        .sum();
                    acc * amp
                })
                .collect()
        })
        .collect();
    assemble(columns, &grid, row_axis, vec![d_omega; n_rows])
}

fn bound_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-16,
        rel: 1e-12,
    }
}

/// `∫ g(x, σ(x)) dx` over `|x - t| ≤ l/2`, split at the profile's cell edges
/// and clipped per piece to the compressed support `|x - t| ≤ l/(2σ)`.
fn integrate_around(profile: &TimeFocusProfile, t: f64, l: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let lo = t - 0.5 * l;
    let hi = t + 0.5 * l;
    let edges: Vec<f64> = {
        let first = ((lo - profile.t0) / profile.frame_step + 0.5).floor().max(0.0) as usize;
        let last = (((hi - profile.t0) / profile.frame_step + 0.5).ceil().max(0.0) as usize).min(profile.len());
        (first..=last).map(|m| profile.t0 + (m as f64 - 0.5) * profile.frame_step).collect()
    };
    let pts = breakpoints(lo, hi, edges);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let sigma = profile.at(mid);
        let reach = 0.5 * l / sigma;
        let a = w[0].max(t - reach);
        let b = w[1].min(t + reach);
        if b > a {
            let piece = breakpoints(a, b, [t]);
            total += integrate_with_breaks(|x| g(x, sigma), &piece, bound_tolerance());
        }
    }
    total
}

/// `Φ(t) = ∫ σ(x) |h(σ(x)(x - t))|² dx`, the inverse Fourier transform of the kernel.
pub fn inverse_kernel_profile(profile: &TimeFocusProfile, cfg: &TimeFocusConfig, t_grid: &[f64]) -> Vec<f64> {
    let l = cfg.window.support_length();
    t_grid
        .par_iter()
        .map(|&t| {
            integrate_around(profile, t, l, |x, s| {
                let h = cfg.window.eval(s * (x - t));
                s * h * h
            })
        })
        .collect()
}

/// `H(t) = ∫ |h((y - t)σ(y))|² dy`, whose infimum is the lower bound `c_f`.
pub fn lower_bound_profile(profile: &TimeFocusProfile, cfg: &TimeFocusConfig, t_grid: &[f64]) -> Vec<f64> {
    let l = cfg.window.support_length();
    t_grid
        .par_iter()
        .map(|&t| {
            integrate_around(profile, t, l, |y, s| {
                let h = cfg.window.eval(s * (y - t));
                h * h
            })
        })
        .collect()
}

/// Kernel `K_σ = F(Φ)` sampled through the DFT of `Φ` on a wrap-order grid.
#[derive(Debug, Clone)]
pub struct TimeKernel {
    /// `t_j = j·step` for `j < len/2`, `(j - len)·step` above.
    pub t_axis: Vec<f64>,
    pub phi: Vec<f64>,
    pub kernel: Spectrum,
}

pub fn kernel_time(profile: &TimeFocusProfile, cfg: &TimeFocusConfig, len: usize, step: f64) -> Result<TimeKernel> {
    if len == 0 || !(step.is_finite() && step > 0.0) {
        return invalid("kernel grid needs a positive length and step");
    }
    let t_axis: Vec<f64> = (0..len)
        .map(|j| if 2 * j < len { j as f64 * step } else { (j as f64 - len as f64) * step })
        .collect();
    let phi = inverse_kernel_profile(profile, cfg, &t_axis);
    let samples: Vec<Complex64> = phi.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    let kernel = dft_forward(&ComplexSignal::with_start(samples, 1.0 / step, 0.0)?)?;
    Ok(TimeKernel { t_axis, phi, kernel })
}

/// Grid on which [`kernel_time`] resolves the narrowest compressed window
/// (at least 8 points across `l/σ_max`) and covers the profile plus one
/// window length on both sides of the origin-centered wrap.
pub fn default_kernel_grid(profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> (usize, f64) {
    let l = cfg.window.support_length();
    let step = (l / (8.0 * profile.sigma_max)).min(profile.frame_step);
    let first = profile.time(0) - 0.5 * profile.frame_step;
    let last = profile.time(profile.len() - 1) + 0.5 * profile.frame_step;
    let reach = first.abs().max(last.abs()) + l;
    let len = (2.0 * reach / step).ceil() as usize + 2;
    (len.next_power_of_two(), step)
}

/// Both sides of an identity and their relative disagreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel: f64,
}

impl IdentityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let rel = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self { lhs, rhs, rel }
    }
}

/// `∫ K_σ(u) du` (as `Σ K Δu` over the DFT grid) against `C_f`.
pub fn l1_kernel_identity(profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> Result<IdentityCheck> {
    let (len, step) = default_kernel_grid(profile, cfg);
    let k = kernel_time(profile, cfg, len, step)?;
    let lhs: f64 = k.kernel.bins.iter().map(|b| b.re).sum::<f64>() * k.kernel.freq_step;
    Ok(IdentityCheck::new(lhs, upper_bound_cf(profile, cfg)))
}

/// `‖K_σ‖²` (as `Σ |K|² Δu` over the DFT grid) against `‖h‖² ∫ |h(σ(t)t)|² σ(t)² dt`.
pub fn l2_kernel_identity(profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> Result<IdentityCheck> {
    let (len, step) = default_kernel_grid(profile, cfg);
    let k = kernel_time(profile, cfg, len, step)?;
    let lhs = k.kernel.energy();
    let rhs = cfg.window.l2_norm_sq() * integrate_focused(profile, cfg, 2);
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `∫ |h(σ(t)t)|² σ(t)^power dt` by adaptive quadrature over the global
/// breakpoint set (cell edges and compressed support ends).
fn integrate_focused(profile: &TimeFocusProfile, cfg: &TimeFocusConfig, power: i32) -> f64 {
    let half = 0.5 * cfg.window.support_length();
    let mut interior: Vec<f64> = profile.cell_edges().collect();
    interior.extend(profile.sigma.iter().flat_map(|&s| [-half / s, half / s]));
    interior.push(0.0);
    let pts = breakpoints(-half, half, interior);
    integrate_with_breaks(
        |t| {
            let s = profile.at(t);
            let h = cfg.window.eval(s * t);
            h * h * s.powi(power)
        },
        &pts,
        bound_tolerance(),
    )
}

/// `C_f = ∫ |h(σ(t)t)|² σ(t) dt = ‖H_f‖²` with `H_f(t) = |h(σ(t)t)|√σ(t)`.
pub fn upper_bound_cf(profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> f64 {
    integrate_focused(profile, cfg, 1)
}

/// Frame grid refined four times, extended by a window length on both sides.
fn refined_grid(profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> Vec<f64> {
    let l = cfg.window.support_length();
    let step = profile.frame_step / 4.0;
    let first = profile.time(0) - l;
    let n = ((profile.time(profile.len() - 1) + l - first) / step).ceil() as usize + 1;
    (0..n).map(|i| first + i as f64 * step).collect()
}

/// Lower bound `c_f` and the `σ`-independent floors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    /// `min_t H(t)` over the refined frame grid.
    pub c_f: f64,
    /// `a·‖h‖∞²` with `a` the half-height radius of `|h|`.
    pub floor: f64,
    /// `a·‖h‖∞² / σ_max`, which holds for every profile bounded by `σ_max`.
    pub floor_sigma_max: f64,
}

pub fn lower_bound_cf(profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> LowerBound {
    let grid = refined_grid(profile, cfg);
    let c_f = lower_bound_profile(profile, cfg, &grid)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let floor = cfg.window.half_height_radius() * cfg.window.sup_norm().powi(2);
    LowerBound {
        c_f,
        floor,
        floor_sigma_max: floor / profile.sigma_max,
    }
}

/// `Σ |f(x_n)|² Φ(x_n) Δt`, the energy predicted by the kernel.
pub fn kernel_energy(signal: &ComplexSignal, profile: &TimeFocusProfile, cfg: &TimeFocusConfig) -> f64 {
    let times: Vec<f64> = (0..signal.len()).map(|n| signal.time_at(n)).collect();
    let phi = inverse_kernel_profile(profile, cfg, &times);
    signal
        .samples()
        .iter()
        .zip(&phi)
        .map(|(x, p)| x.norm_sqr() * p)
        .sum::<f64>()
        * signal.dt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeBoundReport {
    pub c_f: f64,
    pub upper: f64,
    pub sigma_independent_floor: f64,
    pub floor_sigma_max: f64,
    pub measured_energy: f64,
    pub signal_energy: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
    pub floor_pass: bool,
}

impl TimeBoundReport {
    pub fn pass(&self) -> bool {
        self.lower_pass && self.upper_pass
    }
}

/// `c_f‖f‖² ≤ ‖M^τf‖² ≤ C_f‖f‖²` with slack `SANDWICH_SLACK·C_f‖f‖²`.
pub fn check_time_bounds(
    signal: &ComplexSignal,
    profile: &TimeFocusProfile,
    cfg: &TimeFocusConfig,
) -> Result<TimeBoundReport> {
    let m = transform_time_focused(signal, profile, cfg)?;
    let measured = crate::signal::weighted_energy(&m)?;
    let energy = crate::signal::signal_energy(signal);
    let upper = upper_bound_cf(profile, cfg);
    let lb = lower_bound_cf(profile, cfg);
    let eps = SANDWICH_SLACK * upper * energy;
    Ok(TimeBoundReport {
        c_f: lb.c_f,
        upper,
        sigma_independent_floor: lb.floor,
        floor_sigma_max: lb.floor_sigma_max,
        measured_energy: measured,
        signal_energy: energy,
        lower_pass: measured >= lb.c_f * energy - eps,
        upper_pass: measured <= upper * energy + eps,
        floor_pass: lb.c_f >= lb.floor_sigma_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{signal_energy, weighted_energy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const SR: f64 = 4000.0;

    fn cfg(hop: usize) -> TimeFocusConfig {
        TimeFocusConfig::new(Window::hann(0.01).unwrap(), hop, 64).unwrap()
    }

    fn random_signal(len: usize, seed: u64) -> ComplexSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        ComplexSignal::new(x, SR).unwrap()
    }

    fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn atom_reduces_to_stft_atom() {
        let c = cfg(1);
        let a = time_focused_atom(0.05, 300.0, 1.0, &c, SR, 400, 0.0).unwrap();
        for (n, z) in a.samples().iter().enumerate() {
            let x = n as f64 / SR;
            let e = Complex64::from_polar(c.window.eval(x - 0.05), 2.0 * PI * 300.0 * x);
            assert!((z - e).norm() < 1e-12);
        }
        assert!(time_focused_atom(0.0, 0.0, 0.5, &c, SR, 10, 0.0).is_err());
    }

    #[test]
    fn atom_energy_independent_of_sigma() {
        let c = TimeFocusConfig::with_gamma(Window::hann(0.02).unwrap(), ScaleMap::sinh(500.0).unwrap(), 1, 128)
            .unwrap();
        let omega = 200.0;
        let expect = c.gamma.deriv(omega) * c.window.l2_norm_sq();
        for sigma in [1.0, 2.0, 5.0] {
            let a = time_focused_atom(0.1, omega, sigma, &c, SR, 800, 0.0).unwrap();
            let e = signal_energy(&a);
            assert!((e - expect).abs() < 1e-3 * expect, "sigma {sigma}: {e} vs {expect}");
            for (n, z) in a.samples().iter().enumerate() {
                if (n as f64 / SR - 0.1).abs() > 0.01 / sigma {
                    assert_eq!(z.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn frame_grid_extends_past_edges() {
        let c = cfg(4);
        let g = FrameGrid::for_signal(100, SR, 0.0, &c);
        assert_eq!(g.first, -20);
        assert!(g.time(g.n_frames - 1) >= 99.0 / SR + 20.0 / SR - 4.0 / SR);
        assert!((g.frame_step() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn profile_lookup_is_piecewise_constant() {
        let p = TimeFocusProfile::new(vec![2.0, 3.0], 0.0, 1.0, 3.0).unwrap();
        assert_eq!(p.at(-0.6), 1.0);
        assert_eq!(p.at(-0.4), 2.0);
        assert_eq!(p.at(0.49), 2.0);
        assert_eq!(p.at(0.5), 3.0);
        assert_eq!(p.at(1.6), 1.0);
        assert!(TimeFocusProfile::new(vec![0.5], 0.0, 1.0, 3.0).is_err());
        assert!(TimeFocusProfile::new(vec![4.0], 0.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn zero_signal_gives_zero_matrix() {
        let s = ComplexSignal::new(vec![Complex64::new(0.0, 0.0); 256], SR).unwrap();
        let c = cfg(8);
        let p = TimeFocusProfile::constant(&FrameGrid::of(&s, &c), 2.0).unwrap();
        let m = transform_time_focused(&s, &p, &c).unwrap();
        assert!(m.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn constant_focus_parseval() {
        let s = random_signal(1024, 1);
        let c = cfg(1);
        let p = TimeFocusProfile::constant(&FrameGrid::of(&s, &c), 1.0).unwrap();
        let e = weighted_energy(&transform_time_focused(&s, &p, &c).unwrap()).unwrap();
        let expect = c.window.l2_norm_sq() * signal_energy(&s);
        assert!((e - expect).abs() < 1e-3 * expect);
    }

    #[test]
    fn matches_plain_stft() {
        let s = random_signal(300, 2);
        let c = cfg(3);
        let grid = FrameGrid::of(&s, &c);
        let p = TimeFocusProfile::constant(&grid, 1.0).unwrap();
        let m = transform_time_focused(&s, &p, &c).unwrap();
        // textbook STFT: Σ x_n h(x_n - t) e^{-2iπωx_n} Δt
        for frame in [0, 7, grid.n_frames / 2, grid.n_frames - 1] {
            let t = grid.time(frame);
            for row in [0, 5, 32, 63] {
                let omega = m.row_axis[row];
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, v) in s.samples().iter().enumerate() {
                    let x = n as f64 / SR;
                    acc += v * c.window.eval(x - t) * Complex64::from_polar(1.0, -2.0 * PI * omega * x) / SR;
                }
                assert!((m.get(row, frame) - acc).norm() < 1e-10 * (1.0 + acc.norm()));
            }
        }
    }

    #[test]
    fn fast_path_equals_direct_path() {
        let s = random_signal(500, 3);
        let c = cfg(5);
        let grid = FrameGrid::of(&s, &c);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sigma = (0..grid.n_frames).map(|_| rng.gen_range(1.0..4.0)).collect();
        let p = TimeFocusProfile::new(sigma, grid.time(0), grid.frame_step(), 4.0).unwrap();
        let a = transform_time_focused(&s, &p, &c).unwrap();
        let b = transform_time_focused_direct(&s, &p, &c).unwrap();
        let scale = a.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn homogeneity_with_frozen_profile() {
        let s = random_signal(400, 5);
        let c = cfg(4);
        let grid = FrameGrid::of(&s, &c);
        let p = TimeFocusProfile::step(&grid, 3.0, 0.02, 0.06).unwrap();
        let a = transform_time_focused(&s, &p, &c).unwrap();
        let b = transform_time_focused(&s.scaled(4.0), &p, &c).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x * 4.0, *y);
        }
    }

    #[test]
    fn degenerate_window_rejected() {
        let s = random_signal(200, 6);
        let c = TimeFocusConfig::new(Window::hann(0.001).unwrap(), 1, 16).unwrap();
        let p = TimeFocusProfile::constant(&FrameGrid::of(&s, &c), 2.0).unwrap();
        assert!(matches!(
            transform_time_focused(&s, &p, &c),
            Err(Error::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn fft_size_must_cover_window() {
        let s = random_signal(200, 7);
        let c = TimeFocusConfig::new(Window::hann(0.01).unwrap(), 1, 32).unwrap();
        let p = TimeFocusProfile::constant(&FrameGrid::of(&s, &c), 1.0).unwrap();
        assert!(transform_time_focused(&s, &p, &c).is_err());
    }

    #[test]
    fn profile_grid_mismatch_rejected() {
        let s = random_signal(200, 8);
        let c = cfg(2);
        let p = TimeFocusProfile::new(vec![1.0; 5], 0.0, 1e-3, 1.0).unwrap();
        assert!(transform_time_focused(&s, &p, &c).is_err());
    }

    #[test]
    fn phi_constant_for_constant_profiles() {
        let c = cfg(4);
        let g = FrameGrid::for_signal(400, SR, 0.0, &c);
        let ts: Vec<f64> = (0..50).map(|i| 0.003 + i as f64 * 0.0017).collect();
        for v in [1.0, 2.5] {
            let p = TimeFocusProfile::constant(&g, v).unwrap();
            for phi in inverse_kernel_profile(&p, &c, &ts) {
                assert!((phi - c.window.l2_norm_sq()).abs() < 1e-10 * phi);
            }
        }
    }

    #[test]
    fn phi_matches_riemann_oracle_on_step() {
        let c = cfg(4);
        let g = FrameGrid::for_signal(4000, SR, 0.0, &c);
        let p = TimeFocusProfile::step(&g, 2.0, 0.3, 0.6).unwrap();
        for t in [0.295, 0.3, 0.303, 0.45, 0.598, 0.604] {
            let phi = inverse_kernel_profile(&p, &c, &[t])[0];
            let oracle = riemann(
                |x| {
                    let s = p.at(x);
                    s * c.window.eval(s * (x - t)).powi(2)
                },
                t - 0.006,
                t + 0.006,
                2_000_000,
            );
            assert!((phi - oracle).abs() < 1e-5 * oracle, "t={t}: {phi} vs {oracle}");
        }
    }

    #[test]
    fn upper_bound_substitution_cases() {
        let c = cfg(4);
        let g = FrameGrid::for_signal(400, SR, -0.05, &c);
        for v in [1.0, 2.0] {
            let p = TimeFocusProfile::constant(&g, v).unwrap();
            let cf = upper_bound_cf(&p, &c);
            assert!((cf - c.window.l2_norm_sq()).abs() < 1e-10 * cf);
        }
    }

    #[test]
    fn lower_bound_constant_focus() {
        let c = cfg(4);
        let g = FrameGrid::for_signal(400, SR, 0.0, &c);
        let p = TimeFocusProfile::constant(&g, 1.0).unwrap();
        let lb = lower_bound_cf(&p, &c);
        assert!((lb.c_f - c.window.l2_norm_sq()).abs() < 1e-10 * lb.c_f);
        assert!(lb.c_f > lb.floor);
    }

    #[test]
    fn lower_bound_step_matches_refined_oracle() {
        let c = cfg(8);
        let g = FrameGrid::for_signal(800, SR, 0.0, &c);
        let p = TimeFocusProfile::step(&g, 3.0, 0.05, 0.1).unwrap();
        let lb = lower_bound_cf(&p, &c);
        // 10x finer t grid, Riemann in y
        let l = 0.01;
        let first = p.time(0) - l;
        let last = p.time(p.len() - 1) + l;
        let n = ((last - first) / (p.frame_step / 40.0)) as usize;
        let mut min = f64::INFINITY;
        for i in 0..=n {
            let t = first + i as f64 * p.frame_step / 40.0;
            if !(0.04..=0.11).contains(&t) {
                continue;
            }
            let h = riemann(|y| c.window.eval((y - t) * p.at(y)).powi(2), t - l / 2.0, t + l / 2.0, 20_000);
            min = min.min(h);
        }
        assert!(lb.c_f >= min - 1e-4 * min);
        assert!((lb.c_f - min).abs() < 1e-2 * min, "{} vs {}", lb.c_f, min);
        assert!(lb.c_f >= lb.floor_sigma_max);
    }

    #[test]
    fn kernel_identity_discrete_exact() {
        // ‖M^τf‖² = Σ|f|²Φ_disc Δt holds exactly for the frame-sum Φ; the
        // continuous Φ agrees up to the frame discretization.
        let s = random_signal(800, 9);
        let c = cfg(2);
        let grid = FrameGrid::of(&s, &c);
        let p = TimeFocusProfile::step(&grid, 2.0, 0.05, 0.12).unwrap();
        let e = weighted_energy(&transform_time_focused(&s, &p, &c).unwrap()).unwrap();
        let k = kernel_energy(&s, &p, &c);
        assert!((e - k).abs() < 1e-2 * k, "{e} vs {k}");
    }

    #[test]
    fn l1_identity_and_homogeneity() {
        let c = cfg(4);
        let g = FrameGrid::for_signal(400, SR, -0.05, &c);
        let p = TimeFocusProfile::step(&g, 2.0, -0.002, 0.03).unwrap();
        let id = l1_kernel_identity(&p, &c).unwrap();
        assert!(id.rel < 1e-6, "{id:?}");
        let c2 = TimeFocusConfig::new(c.window.with_amplitude(2.0).unwrap(), 4, 64).unwrap();
        let id2 = l1_kernel_identity(&p, &c2).unwrap();
        assert!((id2.lhs - 4.0 * id.lhs).abs() < 1e-9 * id2.lhs);
        assert!((id2.rhs - 4.0 * id.rhs).abs() < 1e-9 * id2.rhs);
        let sq = l2_kernel_identity(&p, &c).unwrap();
        let sq2 = l2_kernel_identity(&p, &c2).unwrap();
        assert!((sq2.lhs - 16.0 * sq.lhs).abs() < 1e-9 * sq2.lhs);
        assert!((sq2.rhs - 16.0 * sq.rhs).abs() < 1e-9 * sq2.rhs);
    }

    #[test]
    fn kernel_is_hermitian_and_delta_for_unit_focus() {
        let c = cfg(4);
        let g = FrameGrid::for_signal(200, SR, 0.0, &c);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sigma = (0..g.n_frames).map(|_| rng.gen_range(1.0..3.0)).collect();
        let p = TimeFocusProfile::new(sigma, g.time(0), g.frame_step(), 3.0).unwrap();
        let k = kernel_time(&p, &c, 256, 2.5e-4).unwrap();
        let n = k.kernel.len();
        for j in 1..n {
            assert!((k.kernel.bins[j] - k.kernel.bins[n - j].conj()).norm() < 1e-12);
        }
        let unit = TimeFocusProfile::constant(&g, 1.0).unwrap();
        let k1 = kernel_time(&unit, &c, 256, 2.5e-4).unwrap();
        assert!(k1.kernel.bins[1..].iter().all(|b| b.norm() < 1e-12 * k1.kernel.bins[0].norm()));
    }

    #[test]
    fn sandwich_unit_focus_is_tight() {
        let s = random_signal(600, 11);
        let c = cfg(1);
        let p = TimeFocusProfile::constant(&FrameGrid::of(&s, &c), 1.0).unwrap();
        let r = check_time_bounds(&s, &p, &c).unwrap();
        assert!(r.pass());
        assert!((r.measured_energy - r.upper * r.signal_energy).abs() < 1e-3 * r.measured_energy);
        let z = ComplexSignal::new(vec![Complex64::new(0.0, 0.0); 100], SR).unwrap();
        let pz = TimeFocusProfile::constant(&FrameGrid::of(&z, &c), 1.0).unwrap();
        let rz = check_time_bounds(&z, &pz, &c).unwrap();
        assert!(rz.pass() && rz.measured_energy == 0.0);
    }
}
