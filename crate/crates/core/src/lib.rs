//! Signal-adaptive time-frequency analysis.
//!
//! Two non-linear transforms whose atoms adapt to the analyzed signal: a
//! time-focused short-time Fourier transform, whose window is compressed by a
//! signal-dependent factor `σ(t) ≥ 1`, and a frequency-focused wavelet
//! transform, whose atoms are squeezed in frequency by `σ(u) ≥ 1` around a
//! fixed localization. Alongside the transforms the crate computes the
//! signal-dependent energy bounds of both and certifies them numerically.

pub mod error;
pub mod focus;
pub mod freq_focus;
pub mod io;
pub mod quad;
pub mod scale_map;
pub mod signal;
pub mod synth;
pub mod time_focus;
pub mod verification;
pub mod wavelet;
pub mod window;

pub use error::{Error, Result};
pub use scale_map::ScaleMap;
pub use signal::{
    dft_forward, dft_inverse, hardy_project, signal_energy, weighted_energy, ComplexSignal,
    RealSignal, Spectrum, TimeFrequencyMatrix,
};
pub use wavelet::AnalyticWavelet;
pub use window::Window;
