//! Frequency-relabeling maps `γ` with derivative and inverse.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Codomain of a scale map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codomain {
    AllReals,
    PositiveReals,
}

/// Closed-form strictly increasing diffeomorphism `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleMap {
    Identity,
    /// `scale · sinh(u / scale)`.
    Sinh { scale: f64 },
    /// `e^u`.
    Exponential,
}

impl ScaleMap {
    pub fn identity() -> Self {
        ScaleMap::Identity
    }

    pub fn exponential() -> Self {
        ScaleMap::Exponential
    }

    pub fn sinh(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return invalid(format!("sinh scale must be positive, got {scale}"));
        }
        Ok(ScaleMap::Sinh { scale })
    }

    pub fn codomain(&self) -> Codomain {
        match self {
            ScaleMap::Exponential => Codomain::PositiveReals,
            _ => Codomain::AllReals,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            ScaleMap::Identity => u,
            ScaleMap::Sinh { scale } => scale * (u / scale).sinh(),
            ScaleMap::Exponential => u.exp(),
        }
    }

    pub fn deriv(&self, u: f64) -> f64 {
        match *self {
            ScaleMap::Identity => 1.0,
            ScaleMap::Sinh { scale } => (u / scale).cosh(),
            ScaleMap::Exponential => u.exp(),
        }
    }

    pub fn invert(&self, y: f64) -> Result<f64> {
        match *self {
            ScaleMap::Identity => Ok(y),
            ScaleMap::Sinh { scale } => Ok(scale * (y / scale).asinh()),
            ScaleMap::Exponential => {
                if y > 0.0 {
                    Ok(y.ln())
                } else {
                    Err(Error::Domain(format!("exponential map is not invertible at {y}")))
                }
            }
        }
    }
}

impl fmt::Display for ScaleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleMap::Identity => write!(f, "identity"),
            ScaleMap::Sinh { scale } => write!(f, "sinh:{scale}"),
            ScaleMap::Exponential => write!(f, "exp"),
        }
    }
}

impl FromStr for ScaleMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" => Ok(ScaleMap::Identity),
            "exp" => Ok(ScaleMap::Exponential),
            other => match other.strip_prefix("sinh:") {
                Some(v) => {
                    let scale: f64 = v
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad sinh scale '{v}'")))?;
                    ScaleMap::sinh(scale)
                }
                None => invalid(format!("unknown gamma '{other}' (identity | exp | sinh:<scale>)")),
            },
        }
    }
}
