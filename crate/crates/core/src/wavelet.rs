//! Analytic wavelets defined by their Fourier profile, with the constants the
//! frequency-focus bounds depend on.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quad::{breakpoints, integrate_with_breaks, Tolerance};

/// Fourier-domain profile `ξ ↦ ψ̂(ξ)`.
pub type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Points per support used for the derivative bound and the half-power scan.
const DENSE_GRID: usize = 20_000;

/// Analytic wavelet: `ψ̂` vanishes outside `(ξ_lo, ξ_hi)` with `ξ_lo > 0`.
#[derive(Clone)]
pub struct AnalyticWavelet {
    name: String,
    profile: Profile,
    support: (f64, f64),
    breaks: Vec<f64>,
    norm_sq: f64,
    xi0: f64,
    c_psi: f64,
    a_psi: f64,
    halfpower: (f64, f64),
    peak_value: f64,
}

impl fmt::Debug for AnalyticWavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticWavelet")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("xi0", &self.xi0)
            .field("c_psi", &self.c_psi)
            .field("a_psi", &self.a_psi)
            .field("halfpower", &self.halfpower)
            .field("peak_value", &self.peak_value)
            .finish()
    }
}

/// C^∞ transition from 1 at `s = 0` to 0 at `s = 1`.
fn smooth_step_down(s: f64) -> f64 {
    let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = g(1.0 - s);
        a / (a + g(s))
    }
}

impl AnalyticWavelet {
    /// Builds a wavelet from an arbitrary profile supported in `support`.
    /// `interior_breaks` lists points where `ψ̂` is not smooth.
    pub fn from_profile(
        name: impl Into<String>,
        profile: Profile,
        support: (f64, f64),
        interior_breaks: Vec<f64>,
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return invalid(format!("bad wavelet support ({lo}, {hi})"));
        }
        let mut w = Self {
            name: name.into(),
            profile,
            support,
            breaks: breakpoints(lo, hi, interior_breaks),
            norm_sq: 0.0,
            xi0: 0.0,
            c_psi: 0.0,
            a_psi: 0.0,
            halfpower: (0.0, 0.0),
            peak_value: 0.0,
        };
        w.norm_sq = w.integrate(|_, p| p);
        w.xi0 = frequency_localization(&w)?;
        w.c_psi = admissibility_constant(&w)?;
        w.peak_value = w.eval(w.xi0).norm();
        if w.peak_value == 0.0 {
            return Err(Error::InvalidInput(
                "wavelet profile vanishes at its frequency localization".into(),
            ));
        }
        w.a_psi = derivative_bound(&w);
        w.halfpower = halfpower_interval(&w);
        Ok(w)
    }

    /// Gaussian bump `exp(-(ξ-ξc)²/(2·width²))` times a C^∞ taper that is 1 on
    /// the inner 80% of `ξc ± halfwidth` and reaches 0 at the endpoints.
    pub fn bump(xi0_target: f64, width: f64, halfwidth: f64) -> Result<Self> {
        if !(xi0_target.is_finite() && width.is_finite() && halfwidth.is_finite()) {
            return invalid("bump parameters must be finite");
        }
        if width <= 0.0 || halfwidth <= 0.0 {
            return invalid("bump width and support halfwidth must be positive");
        }
        if xi0_target - halfwidth <= 0.0 {
            return invalid(format!(
                "bump support ({}, {}) reaches nonpositive frequencies",
                xi0_target - halfwidth,
                xi0_target + halfwidth
            ));
        }
        let profile: Profile = Arc::new(move |xi: f64| {
            let d = xi - xi0_target;
            let r = d.abs() / halfwidth;
            if r >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let taper = smooth_step_down((r - 0.8) / 0.2);
            Complex64::new((-d * d / (2.0 * width * width)).exp() * taper, 0.0)
        });
        let inner = 0.8 * halfwidth;
        Self::from_profile(
            format!("bump:{xi0_target}:{width}:{halfwidth}"),
            profile,
            (xi0_target - halfwidth, xi0_target + halfwidth),
            vec![xi0_target - inner, xi0_target, xi0_target + inner],
        )
    }

    /// `ψ̂(ξ/s)`: the profile stretched by `s` along the frequency axis.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return invalid("dilation factor must be positive");
        }
        let p = self.profile.clone();
        Self::from_profile(
            format!("{}/dilated:{s}", self.name),
            Arc::new(move |xi| p(xi / s)),
            (self.support.0 * s, self.support.1 * s),
            self.breaks.iter().map(|b| b * s).collect(),
        )
    }

    /// `k·ψ̂`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k != 0.0) {
            return invalid("amplitude factor must be finite and nonzero");
        }
        let p = self.profile.clone();
        Self::from_profile(
            format!("{}*{k}", self.name),
            Arc::new(move |xi| p(xi) * k),
            self.support,
            self.breaks.clone(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `ψ̂(ξ)`, zero outside the support and for every `ξ ≤ 0`.
    pub fn eval(&self, xi: f64) -> Complex64 {
        if xi <= 0.0 || xi <= self.support.0 || xi >= self.support.1 {
            Complex64::new(0.0, 0.0)
        } else {
            (self.profile)(xi)
        }
    }

    /// `|ψ̂(ξ)|²`.
    pub fn power(&self, xi: f64) -> f64 {
        self.eval(xi).norm_sqr()
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Support ends plus the interior non-smooth points, sorted.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// `‖ψ‖² = ∫|ψ̂|²`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn c_psi(&self) -> f64 {
        self.c_psi
    }

    pub fn a_psi(&self) -> f64 {
        self.a_psi
    }

    pub fn halfpower(&self) -> (f64, f64) {
        self.halfpower
    }

    pub fn peak_value(&self) -> f64 {
        self.peak_value
    }

    fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        integrate_with_breaks(|xi| f(xi, self.power(xi)), &self.breaks, tight())
    }
}

fn tight() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-13,
    }
}

/// `(1/‖ψ‖²) ∫ ξ |ψ̂(ξ)|² dξ`.
pub fn frequency_localization(w: &AnalyticWavelet) -> Result<f64> {
    let norm = w.integrate(|_, p| p);
    if norm <= 0.0 {
        return invalid("zero wavelet has no frequency localization");
    }
    Ok(w.integrate(|xi, p| xi * p) / norm)
}

/// `c_ψ = ∫_{ℝ₊} |ψ̂(y)|²/y dy`.
pub fn admissibility_constant(w: &AnalyticWavelet) -> Result<f64> {
    if w.support().0 <= 0.0 {
        return Err(Error::Divergence(
            "admissibility integral diverges: wavelet support reaches 0".into(),
        ));
    }
    let c = w.integrate(|xi, p| p / xi);
    if !(c > 0.0 && c.is_finite()) {
        return invalid("admissibility constant must be positive and finite");
    }
    Ok(c)
}

/// `sup |(|ψ̂|²)'(ξ)|·|ξ - ξ₀|` over a dense interior grid.
pub fn derivative_bound(w: &AnalyticWavelet) -> f64 {
    derivative_bound_on_grid(w, DENSE_GRID)
}

/// [`derivative_bound`] with an explicit number of grid cells, for refinement studies.
pub fn derivative_bound_on_grid(w: &AnalyticWavelet, cells: usize) -> f64 {
    let (lo, hi) = w.support();
    let step = (hi - lo) / cells as f64;
    let delta = 1e-3 * step;
    let xi0 = w.xi0();
    (0..cells)
        .map(|i| {
            let xi = lo + (i as f64 + 0.5) * step;
            let d = (w.power(xi + delta) - w.power(xi - delta)) / (2.0 * delta);
            d.abs() * (xi - xi0).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest interval `(a, b)` around `ξ₀` with `|ψ̂|² ≥ |ψ̂(ξ₀)|²/2`.
pub fn halfpower_interval(w: &AnalyticWavelet) -> (f64, f64) {
    let xi0 = w.xi0();
    let level = 0.5 * w.power(xi0);
    let (lo, hi) = w.support();
    let step = (hi - lo) / DENSE_GRID as f64;
    let edge = |dir: f64| {
        let limit = if dir > 0.0 { hi } else { lo };
        let mut inside = xi0;
        loop {
            let next = inside + dir * step;
            if (next - limit) * dir >= 0.0 {
                break limit;
            }
            if w.power(next) < level {
                let (mut a, mut b) = (inside, next);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if w.power(m) >= level {
                        a = m;
                    } else {
                        b = m;
                    }
                    if (b - a).abs() <= 1e-15 * xi0 {
                        break;
                    }
                }
                break a;
            }
            inside = next;
        }
    };
    (edge(-1.0), edge(1.0))
}

/// Reference waveform of the constant-Q transform built from a wavelet:
/// `ĥ(y) = ψ̂_s(y + 1)` where `ψ̂_s` is the Hermitian extension of `ψ̂`
/// (`ψ̂_s(-ξ) = conj ψ̂(ξ)`), i.e. the spectrum of the real wavelet `2·Re ψ`.
#[derive(Debug, Clone)]
pub struct CqtReference {
    wavelet: AnalyticWavelet,
    c_h: f64,
    c_h_negative: f64,
}

impl CqtReference {
    pub fn wavelet(&self) -> &AnalyticWavelet {
        &self.wavelet
    }

    /// `ĥ(y)`.
    pub fn eval(&self, y: f64) -> Complex64 {
        let xi = y + 1.0;
        if xi > 0.0 {
            self.wavelet.eval(xi)
        } else {
            self.wavelet.eval(-xi).conj()
        }
    }

    /// `∫_{-1}^{∞} |ĥ(y)|²/(y+1) dy`.
    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    /// `∫_{-∞}^{-1} |ĥ(y)|²/(-y-1) dy`; equals `c_h` for the symmetrized profile.
    pub fn c_h_negative(&self) -> f64 {
        self.c_h_negative
    }
}

pub fn cqt_reference_from_wavelet(w: &AnalyticWavelet) -> CqtReference {
    let mut r = CqtReference {
        wavelet: w.clone(),
        c_h: 0.0,
        c_h_negative: 0.0,
    };
    let pos: Vec<f64> = w.breakpoints().iter().map(|b| b - 1.0).collect();
    let neg: Vec<f64> = w.breakpoints().iter().rev().map(|b| -b - 1.0).collect();
    r.c_h = integrate_with_breaks(|y| r.eval(y).norm_sqr() / (y + 1.0), &pos, tight());
    r.c_h_negative = integrate_with_breaks(|y| r.eval(y).norm_sqr() / (-y - 1.0), &neg, tight());
    r
}

/// Parses `bump:<xi0>:<width>:<halfwidth>`.
impl std::str::FromStr for AnalyticWavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["bump", a, b, c] => {
                let num = |x: &str| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad bump parameter '{x}'")))
                };
                AnalyticWavelet::bump(num(a)?, num(b)?, num(c)?)
            }
            _ => invalid(format!("unknown wavelet '{s}' (bump:<xi0>:<width>:<halfwidth>)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rectangular(lo: f64, hi: f64) -> AnalyticWavelet {
        AnalyticWavelet::from_profile(
            "rect",
            Arc::new(|_| Complex64::new(1.0, 0.0)),
            (lo, hi),
            vec![],
        )
        .unwrap()
    }

    fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn bump_is_analytic_and_centered() {
        let w = AnalyticWavelet::bump(1.0, 0.2, 0.8).unwrap();
        for i in 0..1000 {
            assert_eq!(w.eval(-(i as f64) * 0.01).norm(), 0.0);
        }
        assert!((w.xi0() - 1.0).abs() < 1e-12);
        assert!((w.peak_value() - 1.0).abs() < 1e-12);
        let (a, b) = w.halfpower();
        assert!(a < w.xi0() && w.xi0() < b);
    }

    #[test]
    fn bump_rejects_nonpositive_support() {
        assert!(matches!(AnalyticWavelet::bump(1.0, 0.2, 1.0), Err(Error::InvalidInput(_))));
        assert!(AnalyticWavelet::bump(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn taper_is_one_in_inner_zone_and_smooth_at_edges() {
        let w = AnalyticWavelet::bump(1.0, 10.0, 0.5).unwrap();
        // very wide gaussian: inner zone nearly flat
        assert!((w.power(1.39) - (-0.39f64 * 0.39 / 100.0).exp()).abs() < 1e-14);
        assert!(w.power(1.4999) < 1e-100);
        assert!(w.power(1.45) > 0.0 && w.power(1.45) < w.power(1.4));
    }

    #[test]
    fn rectangular_constants() {
        let w = rectangular(1.0, 2.0);
        assert!((w.c_psi() - 2f64.ln()).abs() < 1e-12);
        assert!((w.xi0() - 1.5).abs() < 1e-12);
        let (a, b) = w.halfpower();
        assert!((a - 1.0).abs() < 1e-3 && (b - 2.0).abs() < 1e-3);
        assert_eq!(w.a_psi(), 0.0);
    }

    #[test]
    fn support_at_zero_diverges() {
        let r = AnalyticWavelet::from_profile("r", Arc::new(|_| Complex64::new(1.0, 0.0)), (0.0, 1.0), vec![]);
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn zero_profile_rejected() {
        let r = AnalyticWavelet::from_profile("z", Arc::new(|_| Complex64::new(0.0, 0.0)), (1.0, 2.0), vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn dilation_laws() {
        let w = AnalyticWavelet::bump(1.0, 0.2, 0.8).unwrap();
        let d = w.dilated(2.0).unwrap();
        assert!((d.xi0() - 2.0 * w.xi0()).abs() < 1e-11);
        assert!((d.c_psi() - w.c_psi()).abs() < 1e-11 * w.c_psi());
        assert!((d.norm_sq() - 2.0 * w.norm_sq()).abs() < 1e-11);
    }

    #[test]
    fn bump_constants_match_riemann_oracle() {
        let w = AnalyticWavelet::bump(1.0, 0.2, 0.8).unwrap();
        let (lo, hi) = w.support();
        let c = riemann(|x| w.power(x) / x, lo, hi, 400_000);
        assert!((w.c_psi() - c).abs() < 1e-9 * c);
        let n = riemann(|x| w.power(x), lo, hi, 400_000);
        assert!((w.norm_sq() - n).abs() < 1e-9 * n);
    }

    #[test]
    fn asymmetric_localization_matches_riemann() {
        let p: Profile = Arc::new(|x: f64| Complex64::new((x - 1.0) * (3.0 - x) * x.sqrt(), 0.0));
        let w = AnalyticWavelet::from_profile("asym", p, (1.0, 3.0), vec![]).unwrap();
        let num = riemann(|x| x * w.power(x), 1.0, 3.0, 200_000);
        let den = riemann(|x| w.power(x), 1.0, 3.0, 200_000);
        assert!((w.xi0() - num / den).abs() < 1e-8);
    }

    #[test]
    fn derivative_bound_stable_and_scales() {
        let w = AnalyticWavelet::bump(1.0, 0.2, 0.8).unwrap();
        let coarse = derivative_bound_on_grid(&w, 10_000);
        let fine = derivative_bound_on_grid(&w, 20_000);
        assert!((coarse - fine).abs() < 0.01 * fine);
        let w2 = w.scaled(2.0).unwrap();
        assert!((w2.a_psi() - 4.0 * w.a_psi()).abs() < 1e-9 * w.a_psi());
        // pointwise post-hoc check on a refined grid
        let (lo, hi) = w.support();
        for i in 0..40_000 {
            let xi = lo + (i as f64 + 0.25) * (hi - lo) / 40_000.0;
            let h = 1e-7;
            let d = (w.power(xi + h) - w.power(xi - h)) / (2.0 * h);
            assert!(d.abs() * (xi - w.xi0()).abs() <= w.a_psi() * (1.0 + 1e-3));
        }
    }

    #[test]
    fn gaussian_halfpower_closed_form() {
        // narrow gaussian, half-power points inside the taper-free zone
        let w = AnalyticWavelet::bump(1.0, 0.05, 0.5).unwrap();
        let r = 0.05 * 2f64.ln().sqrt();
        let (a, b) = w.halfpower();
        assert!((a - (1.0 - r)).abs() < 1e-6);
        assert!((b - (1.0 + r)).abs() < 1e-6);
        let level = 0.5 * w.power(w.xi0());
        for i in 1..1000 {
            let xi = a + (b - a) * i as f64 / 1000.0;
            assert!(w.power(xi) >= level);
        }
        assert!(w.power(a - 1e-5) < level && w.power(b + 1e-5) < level);
    }

    #[test]
    fn cqt_reference_constants() {
        let w = AnalyticWavelet::bump(1.0, 0.2, 0.8).unwrap();
        let r = cqt_reference_from_wavelet(&w);
        assert!((r.c_h() - w.c_psi()).abs() < 1e-12 * w.c_psi());
        assert!((r.c_h_negative() - r.c_h()).abs() < 1e-12 * r.c_h());
        assert_eq!(r.eval(w.xi0() - 1.0), w.eval(w.xi0()));
    }

    #[test]
    fn parse_bump() {
        let w: AnalyticWavelet = "bump:1:0.2:0.8".parse().unwrap();
        assert!((w.xi0() - 1.0).abs() < 1e-12);
        assert!("morlet:1".parse::<AnalyticWavelet>().is_err());
    }
}
