//! Focus functions: maps from a signal to a time- or frequency-focus profile,
//! computed from a fixed-focus reference transform.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::freq_focus::{wavelet_transform, FreqFocusProfile, ScaleGrid};
use crate::signal::ComplexSignal;
use crate::time_focus::{transform_time_focused, FrameGrid, TimeFocusConfig, TimeFocusProfile};
use crate::wavelet::AnalyticWavelet;

/// Rows at each end of a scale grid where the frequency focus is pinned to 1.
pub const DEFAULT_EDGE_ROWS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocusKind {
    /// `Σ |ω|ⁿ |Vf(t, ω)| Δω`.
    Moment(u32),
    Shannon,
    Renyi(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusSpec {
    pub kind: FocusKind,
    pub sigma_max: f64,
    /// Width of a centered moving average applied to the raw values; 0 or 1 disables it.
    pub smoothing: usize,
}

impl FocusSpec {
    pub fn new(kind: FocusKind, sigma_max: f64) -> Result<Self> {
        let s = Self {
            kind,
            sigma_max,
            smoothing: 0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_max.is_finite() && self.sigma_max >= 1.0) {
            return invalid(format!("sigma_max must be at least 1, got {}", self.sigma_max));
        }
        if let FocusKind::Renyi(a) = self.kind {
            check_alpha(a)?;
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha != 1.0) {
        return invalid(format!("renyi order must be positive and different from 1, got {alpha}"));
    }
    Ok(())
}

impl fmt::Display for FocusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FocusKind::Moment(n) => write!(f, "moment:{n}"),
            FocusKind::Shannon => write!(f, "entropy"),
            FocusKind::Renyi(a) => write!(f, "renyi:{a}"),
        }
    }
}

/// Parses `moment:<n>`, `entropy` (or `shannon`) and `renyi:<alpha>`.
impl FromStr for FocusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "entropy" || s == "shannon" {
            return Ok(FocusKind::Shannon);
        }
        if let Some(n) = s.strip_prefix("moment:") {
            return n
                .parse()
                .map(FocusKind::Moment)
                .map_err(|_| Error::InvalidInput(format!("bad moment order '{n}'")));
        }
        if let Some(a) = s.strip_prefix("renyi:") {
            let alpha: f64 = a
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad renyi order '{a}'")))?;
            check_alpha(alpha)?;
            return Ok(FocusKind::Renyi(alpha));
        }
        invalid(format!("unknown focus '{s}' (moment:<n> | entropy | renyi:<alpha>)"))
    }
}

/// Maps `raw` affinely onto `[1, σ_max]`; constant input gives `≡ 1`.
pub fn affine_renormalize(raw: &[f64], sigma_max: f64) -> Vec<f64> {
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return vec![1.0; raw.len()];
    }
    raw.iter()
        .map(|&v| {
            let out = 1.0 + (sigma_max - 1.0) * (v - lo) / (hi - lo);
            out.clamp(1.0, sigma_max)
        })
        .collect()
}

/// `-Σ p_k ln p_k` with `p_k = s_k / Σ s`.
pub fn shannon_entropy_slice(slice: &[f64]) -> Result<f64> {
    let total: f64 = slice.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedEntropy);
    }
    Ok(-slice
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| {
            let p = s / total;
            p * p.ln()
        })
        .sum::<f64>())
}

/// `(1/(1-α)) ln(Σ s^α Δ / (Σ s Δ)^α)`.
pub fn renyi_entropy_slice(slice: &[f64], alpha: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let l1: f64 = slice.iter().sum::<f64>() * delta;
    if !(l1 > 0.0) {
        return Err(Error::UndefinedEntropy);
    }
    let la: f64 = slice.iter().filter(|&&s| s > 0.0).map(|s| s.powf(alpha)).sum::<f64>() * delta;
    Ok((la.ln() - alpha * l1.ln()) / (1.0 - alpha))
}

fn entropy_or_zero(slice: &[f64], kind: FocusKind, delta: f64) -> Result<f64> {
    let r = match kind {
        FocusKind::Shannon => shannon_entropy_slice(slice),
        FocusKind::Renyi(a) => renyi_entropy_slice(slice, a, delta),
        FocusKind::Moment(_) => return invalid("moment focus is not an entropy"),
    };
    match r {
        Err(Error::UndefinedEntropy) => Ok(0.0),
        other => other,
    }
}

fn moving_average(raw: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return raw.to_vec();
    }
    let half = width / 2;
    (0..raw.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(raw.len() - 1);
            raw[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Raw per-frame values of a time focus, before renormalization.
pub fn time_focus_raw(f: &ComplexSignal, spec: &FocusSpec, cfg: &TimeFocusConfig) -> Result<Vec<f64>> {
    spec.validate()?;
    if f.is_empty() {
        return invalid("cannot focus an empty signal");
    }
    let grid = FrameGrid::of(f, cfg);
    let reference = transform_time_focused(f, &TimeFocusProfile::constant(&grid, 1.0)?, cfg)?;
    (0..reference.n_frames())
        .into_par_iter()
        .map(|m| {
            let col: Vec<f64> = reference.column(m).iter().map(|v| v.norm()).collect();
            match spec.kind {
                FocusKind::Moment(n) => Ok(col
                    .iter()
                    .zip(&reference.row_axis)
                    .zip(&reference.row_weights)
                    .map(|((v, w), dw)| w.abs().powi(n as i32) * v * dw)
                    .sum()),
                kind => entropy_or_zero(&col, kind, reference.row_weights[0]),
            }
        })
        .collect()
}

fn time_profile(f: &ComplexSignal, spec: &FocusSpec, cfg: &TimeFocusConfig) -> Result<TimeFocusProfile> {
    let raw = moving_average(&time_focus_raw(f, spec, cfg)?, spec.smoothing);
    let grid = FrameGrid::of(f, cfg);
    TimeFocusProfile::new(
        affine_renormalize(&raw, spec.sigma_max),
        grid.time(0),
        grid.frame_step(),
        spec.sigma_max,
    )
}

/// Moment time focus `Σ_k |ω_k|ⁿ |Vf(t_m, ω_k)| Δω` of the unfocused
/// transform, renormalized to `[1, σ_max]`.
pub fn moment_time_focus(f: &ComplexSignal, spec: &FocusSpec, cfg: &TimeFocusConfig) -> Result<TimeFocusProfile> {
    if !matches!(spec.kind, FocusKind::Moment(_)) {
        return invalid(format!("expected a moment focus, got {}", spec.kind));
    }
    time_profile(f, spec, cfg)
}

/// Entropy of the fixed-time slices of the unfocused transform (Shannon, or
/// Rényi when the spec asks for it), renormalized to `[1, σ_max]`.
pub fn shannon_entropy_time_focus(f: &ComplexSignal, spec: &FocusSpec, cfg: &TimeFocusConfig) -> Result<TimeFocusProfile> {
    if matches!(spec.kind, FocusKind::Moment(_)) {
        return invalid("expected an entropy focus, got a moment focus");
    }
    time_profile(f, spec, cfg)
}

/// Time focus of any kind.
pub fn time_focus(f: &ComplexSignal, spec: &FocusSpec, cfg: &TimeFocusConfig) -> Result<TimeFocusProfile> {
    time_profile(f, spec, cfg)
}

/// Raw per-row entropies of the fixed-scale slices `|Wf(·, u_j)|`.
pub fn freq_focus_raw(f_analytic: &ComplexSignal, spec: &FocusSpec, grid: &ScaleGrid, w: &AnalyticWavelet) -> Result<Vec<f64>> {
    spec.validate()?;
    if matches!(spec.kind, FocusKind::Moment(_)) {
        return invalid("frequency focus needs an entropy (entropy | renyi:<alpha>)");
    }
    let wt = wavelet_transform(f_analytic, grid, w)?;
    (0..wt.n_rows())
        .into_par_iter()
        .map(|j| {
            let row: Vec<f64> = wt.row(j).iter().map(|v| v.norm()).collect();
            entropy_or_zero(&row, spec.kind, wt.frame_step)
        })
        .collect()
}

/// Entropy frequency focus, renormalized to `[1, σ_max]` and pinned to 1 on
/// the `edge_rows` outermost rows at each end of the grid.
pub fn entropy_freq_focus(
    f_analytic: &ComplexSignal,
    spec: &FocusSpec,
    grid: &ScaleGrid,
    w: &AnalyticWavelet,
    edge_rows: usize,
) -> Result<FreqFocusProfile> {
    let raw = moving_average(&freq_focus_raw(f_analytic, spec, grid, w)?, spec.smoothing);
    let mut sigma = affine_renormalize(&raw, spec.sigma_max);
    let n = sigma.len();
    let edge = edge_rows.max(1).min(n.div_ceil(2));
    sigma[..edge].fill(1.0);
    sigma[n - edge..].fill(1.0);
    FreqFocusProfile::new(sigma, spec.sigma_max)
}
