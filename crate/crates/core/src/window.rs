//! Compactly supported analysis windows for the time-focused transform.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_with_breaks, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowKind {
    /// `exp(-x²/(2s²))` on `[-d/2, d/2]`, `s = d / (2·shape)`.
    TruncatedGaussian { duration: f64, shape: f64 },
    /// `0.5·(1 + cos(2πx/d))` on `[-d/2, d/2]`.
    Hann { duration: f64 },
}

/// Real, even window `h` supported on `[-l/2, l/2]`, with its norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    kind: WindowKind,
    amplitude: f64,
    l2_norm_sq: f64,
}

impl Window {
    pub fn truncated_gaussian(duration: f64, shape: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return invalid(format!("window duration must be positive, got {duration}"));
        }
        if !(shape.is_finite() && shape > 0.0) {
            return invalid(format!("gaussian shape must be positive, got {shape}"));
        }
        Ok(Self::build(WindowKind::TruncatedGaussian { duration, shape }, 1.0))
    }

    pub fn hann(duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return invalid(format!("window duration must be positive, got {duration}"));
        }
        Ok(Self::build(WindowKind::Hann { duration }, 1.0))
    }

    fn build(kind: WindowKind, amplitude: f64) -> Self {
        let mut w = Self {
            kind,
            amplitude,
            l2_norm_sq: 0.0,
        };
        let half = 0.5 * w.support_length();
        w.l2_norm_sq = integrate_with_breaks(
            |x| w.eval(x).powi(2),
            &[-half, 0.0, half],
            Tolerance::default(),
        );
        w
    }

    /// The same window multiplied by `factor`.
    pub fn with_amplitude(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor != 0.0) {
            return invalid("window amplitude must be finite and nonzero");
        }
        Ok(Self::build(self.kind, self.amplitude * factor))
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        let half = 0.5 * self.support_length();
        if x.abs() > half {
            return 0.0;
        }
        let shape = match self.kind {
            WindowKind::TruncatedGaussian { duration, shape } => {
                let s = duration / (2.0 * shape);
                (-x * x / (2.0 * s * s)).exp()
            }
            WindowKind::Hann { duration } => {
                0.5 * (1.0 + (2.0 * std::f64::consts::PI * x / duration).cos())
            }
        };
        self.amplitude * shape
    }

    /// The support length `l`.
    pub fn support_length(&self) -> f64 {
        match self.kind {
            WindowKind::TruncatedGaussian { duration, .. } | WindowKind::Hann { duration } => duration,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.amplitude.abs()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq.sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq
    }

    /// Largest `a ≤ l/2` with `|h(y)| ≥ ‖h‖∞/√2` on `(-a, a)`.
    pub fn half_height_radius(&self) -> f64 {
        let level = self.sup_norm() / std::f64::consts::SQRT_2;
        let half = 0.5 * self.support_length();
        if self.eval(half).abs() >= level {
            return half;
        }
        let (mut lo, mut hi) = (0.0, half);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid).abs() >= level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * half {
                break;
            }
        }
        lo
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WindowKind::TruncatedGaussian { duration, shape } => {
                write!(f, "gauss:{}:{}", duration * 1e3, shape)
            }
            WindowKind::Hann { duration } => write!(f, "hann:{}", duration * 1e3),
        }
    }
}

fn parse_num(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad {what} '{field}'")))
}

/// Parses `gauss:<ms>:<shape>` or `hann:<ms>`.
impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["gauss", ms, shape] => {
                Window::truncated_gaussian(parse_num(ms, "duration")? * 1e-3, parse_num(shape, "shape")?)
            }
            ["hann", ms] => Window::hann(parse_num(ms, "duration")? * 1e-3),
            _ => invalid(format!("unknown window '{s}' (gauss:<ms>:<shape> | hann:<ms>)")),
        }
    }
}
