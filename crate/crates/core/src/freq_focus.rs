//! Constant-Q and analytic wavelet transforms, and the frequency-focused
//! transform whose atoms are squeezed in frequency by `σ(u) ≥ 1`.
//!
//! Rows are scales `u_j` on a uniform grid; row `j` analyzes frequencies
//! around `γ(u_j)·ξ₀`. Every transform is evaluated per row in the Fourier
//! domain, so the time axis is the signal's own sample grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quad::{breakpoints, integrate_with_breaks, Tolerance};
use crate::scale_map::{Codomain, ScaleMap};
use crate::signal::{bin_frequency, dft_forward, dft_inverse, ComplexSignal, Spectrum, TimeFrequencyMatrix};
use crate::wavelet::{AnalyticWavelet, CqtReference};

/// Relative slack granted to the energy sandwich checks.
pub const SANDWICH_SLACK: f64 = 1e-2;

/// Uniform scale grid `u_j = u0 + j·Δu` with a positive scale map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    pub u: Vec<f64>,
    pub du: f64,
    pub gamma: ScaleMap,
}

impl ScaleGrid {
    pub fn new(u0: f64, du: f64, rows: usize, gamma: ScaleMap) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidGrid("scale grid needs at least one row".into()));
        }
        if !(du.is_finite() && du > 0.0 && u0.is_finite()) {
            return Err(Error::InvalidGrid("scale step must be positive".into()));
        }
        if gamma.codomain() != Codomain::PositiveReals {
            return Err(Error::InvalidGrid("scale map must be positive (use exp)".into()));
        }
        Ok(Self {
            u: (0..rows).map(|j| u0 + j as f64 * du).collect(),
            du,
            gamma,
        })
    }

    /// `rows` scales whose centers `γ(u)·ξ₀` run from `f_min` to `f_max`.
    pub fn for_band(f_min: f64, f_max: f64, rows: usize, xi0: f64, gamma: ScaleMap) -> Result<Self> {
        if !(f_min > 0.0 && f_max > f_min && f_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("bad band [{f_min}, {f_max}]")));
        }
        if rows < 2 {
            return Err(Error::InvalidGrid("a band needs at least two rows".into()));
        }
        let u0 = gamma.invert(f_min / xi0)?;
        let u1 = gamma.invert(f_max / xi0)?;
        Self::new(u0, (u1 - u0) / (rows - 1) as f64, rows, gamma)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn scale(&self, j: usize) -> f64 {
        self.gamma.eval(self.u[j])
    }

    /// `γ'(u_j)Δu`, the measure of the wavelet and frequency-focused transforms.
    pub fn wavelet_weights(&self) -> Vec<f64> {
        self.u.iter().map(|&u| self.gamma.deriv(u) * self.du).collect()
    }

    /// `γ'(u_j)/γ(u_j)·Δu`, the constant-Q measure in the scaled time variable `γ(u)·τ`.
    pub fn cqt_weights(&self) -> Vec<f64> {
        self.u
            .iter()
            .map(|&u| self.gamma.deriv(u) / self.gamma.eval(u) * self.du)
            .collect()
    }

    /// Center frequencies `γ(u_j)·ξ₀`.
    pub fn centers(&self, xi0: f64) -> Vec<f64> {
        self.u.iter().map(|&u| self.gamma.eval(u) * xi0).collect()
    }

    /// Index of the row whose center frequency is closest (in `u`) to `freq`.
    pub fn nearest_row(&self, freq: f64, xi0: f64) -> Result<usize> {
        let u = self.gamma.invert(freq / xi0)?;
        let j = ((u - self.u[0]) / self.du).round();
        Ok(j.clamp(0.0, (self.len() - 1) as f64) as usize)
    }

    /// Rejects grids whose top row reaches past the Nyquist frequency.
    pub fn validate_band(&self, w: &AnalyticWavelet, sample_rate: f64) -> Result<()> {
        let top = self.scale(self.len() - 1) * w.support().1;
        if top > 0.5 * sample_rate * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "top row reaches {top} Hz, above the Nyquist frequency {}",
                0.5 * sample_rate
            )));
        }
        Ok(())
    }

    /// Frequencies at which every row sweeps the full wavelet support:
    /// `[γ(u_0)·ξ_hi, γ(u_last)·ξ_lo]`.
    pub fn covered_band(&self, w: &AnalyticWavelet) -> (f64, f64) {
        let (lo, hi) = w.support();
        (self.scale(0) * hi, self.scale(self.len() - 1) * lo)
    }
}

/// Focus values on a scale grid, `1 ≤ σ ≤ σ_max`, equal to 1 on the first
/// and last row so that `σ - 1` vanishes outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqFocusProfile {
    pub sigma: Vec<f64>,
    pub sigma_max: f64,
}

impl FreqFocusProfile {
    pub fn new(sigma: Vec<f64>, sigma_max: f64) -> Result<Self> {
        let p = Self { sigma, sigma_max };
        p.validate()?;
        Ok(p)
    }

    pub fn unit(grid: &ScaleGrid) -> Self {
        Self {
            sigma: vec![1.0; grid.len()],
            sigma_max: 1.0,
        }
    }

    /// `value` on the rows whose scale `γ(u_j)` lies in `[a, b]`.
    pub fn indicator(grid: &ScaleGrid, value: f64, a: f64, b: f64) -> Result<Self> {
        let sigma = (0..grid.len())
            .map(|j| {
                let g = grid.scale(j);
                if g >= a && g <= b {
                    value
                } else {
                    1.0
                }
            })
            .collect();
        Self::new(sigma, value.max(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma.is_empty() {
            return invalid("focus profile is empty");
        }
        if !(self.sigma_max.is_finite() && self.sigma_max >= 1.0) {
            return invalid("sigma_max must be finite and at least 1");
        }
        let tol = 1e-12 * self.sigma_max;
        if let Some((j, s)) = self
            .sigma
            .iter()
            .enumerate()
            .find(|(_, &s)| !(s.is_finite() && s >= 1.0 - tol && s <= self.sigma_max + tol))
        {
            return invalid(format!("focus value {s} at row {j} outside [1, {}]", self.sigma_max));
        }
        let last = self.sigma.len() - 1;
        if self.sigma[0] != 1.0 || self.sigma[last] != 1.0 {
            return invalid("frequency focus must equal 1 on the first and last rows");
        }
        Ok(())
    }

    /// Continuous focus `σ(u)`: linear between grid nodes, 1 outside the grid.
    pub fn at(&self, grid: &ScaleGrid, u: f64) -> f64 {
        let pos = (u - grid.u[0]) / grid.du;
        if !(pos > 0.0) || pos >= (self.sigma.len() - 1) as f64 {
            return 1.0;
        }
        let j = pos.floor() as usize;
        let frac = pos - j as f64;
        self.sigma[j] * (1.0 - frac) + self.sigma[j + 1] * frac
    }

    fn check(&self, grid: &ScaleGrid) -> Result<()> {
        self.validate()?;
        if self.sigma.len() != grid.len() {
            return invalid(format!(
                "focus profile has {} rows, scale grid has {}",
                self.sigma.len(),
                grid.len()
            ));
        }
        Ok(())
    }
}

/// `ξ₁ = (σ - 1)·ξ₀`.
pub fn freq_shift(sigma_val: f64, w: &AnalyticWavelet) -> f64 {
    (sigma_val - 1.0) * w.xi0()
}

/// `β_u(ξ) = (σ/γ(u))·ξ - ξ₁`.
pub fn squeeze(xi: f64, u: f64, sigma_val: f64, gamma: &ScaleMap, w: &AnalyticWavelet) -> f64 {
    sigma_val / gamma.eval(u) * xi - freq_shift(sigma_val, w)
}

/// Frequencies where the squeezed atom of row `u` is nonzero.
pub fn squeezed_support(u: f64, sigma_val: f64, gamma: &ScaleMap, w: &AnalyticWavelet) -> (f64, f64) {
    let g = gamma.eval(u);
    let shift = freq_shift(sigma_val, w);
    let (lo, hi) = w.support();
    (g / sigma_val * (lo + shift), g / sigma_val * (hi + shift))
}

fn check_sigma(sigma_val: f64) -> Result<()> {
    if !(sigma_val.is_finite() && sigma_val >= 1.0) {
        return invalid(format!("focus value must be at least 1, got {sigma_val}"));
    }
    Ok(())
}

/// Fourier samples of `ψ_{t,u,σ}`: `(1/√γ(u)) ψ̂(β_u(ξ)) e^{-2iπξt}` on the
/// DFT grid of `len` bins at `sample_rate`. Also returns a warning when the
/// squeezed support reaches past the Nyquist frequency.
pub fn focused_atom_spectrum(
    t: f64,
    u: f64,
    sigma_val: f64,
    gamma: &ScaleMap,
    w: &AnalyticWavelet,
    sample_rate: f64,
    len: usize,
) -> Result<(Spectrum, Option<String>)> {
    check_sigma(sigma_val)?;
    if len == 0 {
        return invalid("atom grid is empty");
    }
    let df = sample_rate / len as f64;
    let norm = gamma.eval(u).sqrt();
    let bins = (0..len)
        .map(|k| {
            let xi = bin_frequency(k, len, df);
            w.eval(squeeze(xi, u, sigma_val, gamma, w)) / norm
                * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * xi * t)
        })
        .collect();
    let (_, top) = squeezed_support(u, sigma_val, gamma, w);
    let warning = (top > 0.5 * sample_rate)
        .then(|| format!("squeezed atom at u={u} reaches {top} Hz, truncated at Nyquist"));
    Ok((
        Spectrum {
            bins,
            freq_step: df,
            start_time: 0.0,
        },
        warning,
    ))
}

/// Per-row Fourier multiplier evaluation shared by every transform here.
fn rows_from_multipliers(
    signal: &ComplexSignal,
    grid: &ScaleGrid,
    row_weights: Vec<f64>,
    multiplier: impl Fn(usize, f64) -> Complex64 + Sync,
    post_phase: impl Fn(usize, f64) -> Complex64 + Sync,
) -> Result<TimeFrequencyMatrix> {
    let spec = dft_forward(signal)?;
    let n = spec.len();
    let times: Vec<f64> = (0..signal.len()).map(|i| signal.time_at(i)).collect();
    let rows: Vec<Vec<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let bins = spec
                .bins
                .iter()
                .enumerate()
                .map(|(k, b)| b * multiplier(j, bin_frequency(k, n, spec.freq_step)))
                .collect();
            let row = dft_inverse(&Spectrum {
                bins,
                freq_step: spec.freq_step,
                start_time: spec.start_time,
            })
            .map(|r| r.into_samples())?;
            Ok(row
                .into_iter()
                .zip(&times)
                .map(|(v, &t)| v * post_phase(j, t))
                .collect())
        })
        .collect::<Result<_>>()?;
    TimeFrequencyMatrix::from_rows(rows, times, grid.u.clone(), row_weights, signal.dt())
}

/// Constant-Q transform `Lf(t, u) = ⟨f, h_{t,u}⟩` with
/// `h_{t,u}(x) = √γ(u) e^{2iπγ(u)x} h(γ(u)x - t)`.
///
/// Column `n` holds the atoms centered at physical time `τ_n` (the signal
/// sample times), i.e. `t = γ(u)·τ_n`. The row weights `γ'(u)Δu` are the
/// constant-Q measure `γ'/γ du dt` expressed in `τ` (`dt = γ dτ`).
pub fn cqt_transform(signal: &ComplexSignal, grid: &ScaleGrid, reference: &CqtReference) -> Result<TimeFrequencyMatrix> {
    grid.validate_band(reference.wavelet(), signal.sample_rate())?;
    let scales: Vec<f64> = (0..grid.len()).map(|j| grid.scale(j)).collect();
    rows_from_multipliers(
        signal,
        grid,
        grid.wavelet_weights(),
        |j, xi| reference.eval(xi / scales[j] - 1.0).conj() / scales[j].sqrt(),
        |j, t| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * scales[j] * t),
    )
}

/// Analytic wavelet transform `Wf(t, u) = (1/√γ) ∫ f̂(ξ) conj ψ̂(ξ/γ(u)) e^{2iπξt} dξ`.
pub fn wavelet_transform(f_analytic: &ComplexSignal, grid: &ScaleGrid, w: &AnalyticWavelet) -> Result<TimeFrequencyMatrix> {
    transform_freq_focused(f_analytic, &FreqFocusProfile::unit(grid), grid, w)
}

/// Frequency-focused transform
/// `M^νf(t, u) = (1/√γ) ∫ f̂(ξ) conj ψ̂(β_u(ξ)) e^{2iπξt} dξ`.
pub fn transform_freq_focused(
    f_analytic: &ComplexSignal,
    profile: &FreqFocusProfile,
    grid: &ScaleGrid,
    w: &AnalyticWavelet,
) -> Result<TimeFrequencyMatrix> {
    profile.check(grid)?;
    grid.validate_band(w, f_analytic.sample_rate())?;
    let nyquist = 0.5 * f_analytic.sample_rate();
    let warnings: Vec<String> = (0..grid.len())
        .filter_map(|j| {
            let (_, top) = squeezed_support(grid.u[j], profile.sigma[j], &grid.gamma, w);
            (top > nyquist).then(|| format!("row {j}: squeezed support reaches {top} Hz, truncated at Nyquist"))
        })
        .collect();
    let mut m = rows_from_multipliers(
        f_analytic,
        grid,
        grid.wavelet_weights(),
        |j, xi| {
            let g = grid.scale(j);
            w.eval(squeeze(xi, grid.u[j], profile.sigma[j], &grid.gamma, w)).conj() / g.sqrt()
        },
        |_, _| Complex64::new(1.0, 0.0),
    )?;
    m.warnings = warnings;
    Ok(m)
}

fn kernel_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-11,
    }
}

/// `K_σ(ξ) = ∫_{ℝ₊} |ψ̂(β_{γ⁻¹(y)}(ξ))|² dy/y`, integrated over
/// `y ∈ (ξ/ξ_hi, ξ/ξ_lo)` (the only range where the integrand can be nonzero
/// since `σ ≥ 1` only narrows the support), split at the grid scales.
pub fn kernel_freq(profile: &FreqFocusProfile, grid: &ScaleGrid, w: &AnalyticWavelet, xi_grid: &[f64]) -> Result<Vec<f64>> {
    profile.check(grid)?;
    let (lo, hi) = w.support();
    let xi0 = w.xi0();
    let scales: Vec<f64> = (0..grid.len()).map(|j| grid.scale(j)).collect();
    xi_grid
        .par_iter()
        .map(|&xi| {
            if xi <= 0.0 {
                return Ok(0.0);
            }
            let pts = breakpoints(xi / hi, xi / lo, scales.iter().copied());
            Ok(integrate_with_breaks(
                |y| {
                    let s = profile.at(grid, grid.gamma.invert(y).unwrap_or(f64::NEG_INFINITY));
                    w.power(s * xi / y - (s - 1.0) * xi0) / y
                },
                &pts,
                kernel_tolerance(),
            ))
        })
        .collect()
}

/// The same kernel through the substitution `y ↦ ξ/y`:
/// `∫ |ψ̂(σ(γ⁻¹(ξ/y))·y - ξ₀(σ(γ⁻¹(ξ/y)) - 1))|² dy/y` over `y ∈ (ξ_lo, ξ_hi)`.
pub fn kernel_freq_corollary(
    profile: &FreqFocusProfile,
    grid: &ScaleGrid,
    w: &AnalyticWavelet,
    xi_grid: &[f64],
) -> Result<Vec<f64>> {
    profile.check(grid)?;
    let (lo, hi) = w.support();
    let xi0 = w.xi0();
    xi_grid
        .par_iter()
        .map(|&xi| {
            if xi <= 0.0 {
                return Ok(0.0);
            }
            let mut interior: Vec<f64> = (0..grid.len()).map(|j| xi / grid.scale(j)).collect();
            interior.extend_from_slice(w.breakpoints());
            let pts = breakpoints(lo, hi, interior);
            Ok(integrate_with_breaks(
                |y| {
                    let s = profile.at(grid, grid.gamma.invert(xi / y).unwrap_or(f64::NEG_INFINITY));
                    w.power(s * y - xi0 * (s - 1.0)) / y
                },
                &pts,
                kernel_tolerance(),
            ))
        })
        .collect()
}

/// `C_σ = c_ψ + A_ψ ∫_{ℝ₊} (σ(γ⁻¹(y)) - 1) dy/y`.
pub fn upper_bound_c(profile: &FreqFocusProfile, grid: &ScaleGrid, w: &AnalyticWavelet) -> Result<f64> {
    profile.check(grid)?;
    let scales: Vec<f64> = (0..grid.len()).map(|j| grid.scale(j)).collect();
    let pts = breakpoints(scales[0], scales[scales.len() - 1], scales.iter().copied());
    let excess = integrate_with_breaks(
        |y| (profile.at(grid, grid.gamma.invert(y).unwrap_or(f64::NEG_INFINITY)) - 1.0) / y,
        &pts,
        kernel_tolerance(),
    );
    Ok(w.c_psi() + w.a_psi() * excess)
}

/// `d_ψ = |ψ̂(ξ₀)|²/2 · ln(b/a)` with `(a, b)` the half-power interval.
pub fn lower_bound_d(w: &AnalyticWavelet) -> f64 {
    let (a, b) = w.halfpower();
    0.5 * w.peak_value().powi(2) * (b / a).ln()
}

/// Lower bound on `K_σ` valid for every profile with `σ ≤ σ_max`:
/// `|ψ̂(ξ₀)|²/2 · ln(b'/a')` with the half-power interval contracted towards
/// `ξ₀` by `σ_max`, `a' = ξ₀ - (ξ₀ - a)/σ_max`, `b' = ξ₀ + (b - ξ₀)/σ_max`.
/// Coincides with [`lower_bound_d`] when `σ_max = 1`.
pub fn lower_bound_d_sigma_max(w: &AnalyticWavelet, sigma_max: f64) -> f64 {
    let (a, b) = w.halfpower();
    let xi0 = w.xi0();
    let s = sigma_max.max(1.0);
    0.5 * w.peak_value().powi(2) * ((xi0 + (b - xi0) / s) / (xi0 - (xi0 - a) / s)).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqBoundReport {
    pub d_psi: f64,
    pub d_sigma_max: f64,
    pub c_sigma: f64,
    pub measured_energy: f64,
    pub signal_energy: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
    pub warnings: Vec<String>,
}

impl FreqBoundReport {
    pub fn pass(&self) -> bool {
        self.lower_pass && self.upper_pass
    }
}

/// `d_ψ‖f‖² ≤ ‖M^νf‖² ≤ C_σ‖f‖²`, each side with relative slack `SANDWICH_SLACK`.
pub fn check_freq_bounds(
    f_analytic: &ComplexSignal,
    profile: &FreqFocusProfile,
    grid: &ScaleGrid,
    w: &AnalyticWavelet,
) -> Result<FreqBoundReport> {
    let m = transform_freq_focused(f_analytic, profile, grid, w)?;
    let measured = crate::signal::weighted_energy(&m)?;
    let energy = crate::signal::signal_energy(f_analytic);
    let d_psi = lower_bound_d(w);
    let c_sigma = upper_bound_c(profile, grid, w)?;
    Ok(FreqBoundReport {
        d_psi,
        d_sigma_max: lower_bound_d_sigma_max(w, profile.sigma_max),
        c_sigma,
        measured_energy: measured,
        signal_energy: energy,
        lower_pass: measured >= d_psi * energy * (1.0 - SANDWICH_SLACK),
        upper_pass: measured <= c_sigma * energy * (1.0 + SANDWICH_SLACK),
        warnings: m.warnings,
    })
}

/// `Σ |f̂(ξ_k)|² K_σ(ξ_k) Δξ` over the positive DFT bins.
pub fn kernel_energy(
    f_analytic: &ComplexSignal,
    profile: &FreqFocusProfile,
    grid: &ScaleGrid,
    w: &AnalyticWavelet,
) -> Result<f64> {
    let spec = dft_forward(f_analytic)?;
    let n = spec.len();
    let (idx, xis): (Vec<usize>, Vec<f64>) = (1..n)
        .filter(|&k| 2 * k < n && spec.bins[k].norm_sqr() > 0.0)
        .map(|k| (k, bin_frequency(k, n, spec.freq_step)))
        .unzip();
    let kernel = kernel_freq(profile, grid, w, &xis)?;
    Ok(idx
        .iter()
        .zip(&kernel)
        .map(|(&k, kv)| spec.bins[k].norm_sqr() * kv)
        .sum::<f64>()
        * spec.freq_step)
}
