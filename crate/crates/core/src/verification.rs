//! Bound certification: brute-force oracles and the numbered acceptance checks.
//!
//! Each criterion returns one or more [`CheckReport`]s; a criterion passes
//! when all of its reports do.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::focus::{entropy_freq_focus, time_focus, FocusKind, FocusSpec, DEFAULT_EDGE_ROWS};
use crate::freq_focus::{
    check_freq_bounds, focused_atom_spectrum, kernel_energy as freq_kernel_energy, kernel_freq, lower_bound_d, lower_bound_d_sigma_max, squeeze,
    squeezed_support, transform_freq_focused, upper_bound_c, wavelet_transform, cqt_transform, FreqFocusProfile,
    ScaleGrid,
};
use crate::scale_map::ScaleMap;
use crate::signal::{hardy_project, signal_energy, weighted_energy, ComplexSignal, RealSignal};
use crate::synth::{bandlimited_signal, synth_multisine_spikes_noise, synth_spike_train, MultisineSpec, SpikeTrainSpec};
use crate::time_focus::{
    check_time_bounds, kernel_energy, l1_kernel_identity, l2_kernel_identity, time_focused_atom,
    transform_time_focused, FrameGrid, TimeFocusConfig, TimeFocusProfile, SANDWICH_SLACK,
};
use crate::wavelet::{cqt_reference_from_wavelet, AnalyticWavelet};
use crate::window::Window;

/// Outcome of one numerical check. `pass ⇔ rel ≤ tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel: f64,
    pub tol: f64,
    pub pass: bool,
    pub metadata: Vec<(String, String)>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, rel: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            rel,
            tol,
            pass: rel <= tol,
            metadata: Vec::new(),
        }
    }

    /// `|lhs - rhs| / max(|lhs|, |rhs|)` against `tol`.
    pub fn equality(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let rel = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self::new(name, lhs, rhs, rel, tol)
    }

    /// `lhs ≤ rhs`: `rel = max(0, lhs - rhs) / scale`.
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64, scale: f64, tol: f64) -> Self {
        let excess = (lhs - rhs).max(0.0);
        let rel = if excess == 0.0 { 0.0 } else { excess / scale.abs() };
        Self::new(name, lhs, rhs, rel, tol)
    }

    pub fn with(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    fn failed(name: impl Into<String>, error: impl fmt::Display) -> Self {
        Self::new(name, f64::NAN, f64::NAN, f64::INFINITY, 0.0).with("error", error)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "name={} lhs={:e} rhs={:e} rel={:e} tol={:e} pass={}",
            self.name, self.lhs, self.rhs, self.rel, self.tol, self.pass
        )?;
        for (k, v) in &self.metadata {
            write!(f, " {k}={}", v.replace(char::is_whitespace, "_"))?;
        }
        Ok(())
    }
}

/// `suite pass=<bool> n=<count> failed=<count>`.
pub fn summary_line(reports: &[CheckReport]) -> String {
    let failed = reports.iter().filter(|r| !r.pass).count();
    format!("suite pass={} n={} failed={}", failed == 0, reports.len(), failed)
}

/// Trapezoid `Σ w_n f_n conj(g_n) Δt`, endpoints weighted by 1/2.
pub fn quadrature_inner_product(f: &ComplexSignal, g: &ComplexSignal) -> Result<Complex64> {
    if f.len() != g.len() || f.sample_rate() != g.sample_rate() || f.start_time() != g.start_time() {
        return invalid("inner product needs both signals on the same grid");
    }
    let n = f.len();
    let sum: Complex64 = f
        .samples()
        .iter()
        .zip(g.samples())
        .enumerate()
        .map(|(i, (a, b))| {
            let w = if n > 1 && (i == 0 || i == n - 1) { 0.5 } else { 1.0 };
            a * b.conj() * w
        })
        .sum();
    Ok(sum * f.dt())
}

/// Time-domain samples of the squeezed wavelet atom `ψ_{t,u,σ}` at the given
/// offsets `x - t`, by trapezoid quadrature of its Fourier profile on a
/// frequency grid of step at most `dxi` (the sum is `1/step`-periodic in the
/// offset, so `dxi` must be well below the reciprocal of the offset span).
pub fn freq_atom_by_quadrature(
    offsets: &[f64],
    u: f64,
    sigma_val: f64,
    gamma: &ScaleMap,
    w: &AnalyticWavelet,
    dxi: f64,
) -> Vec<Complex64> {
    let (a, b) = squeezed_support(u, sigma_val, gamma, w);
    let m = ((b - a) / dxi).ceil().max(1.0) as usize;
    let h = (b - a) / m as f64;
    let norm = h / gamma.eval(u).sqrt();
    let profile: Vec<Complex64> = (0..=m)
        .map(|k| {
            let v = w.eval(squeeze(a + k as f64 * h, u, sigma_val, gamma, w));
            if k == 0 || k == m {
                0.5 * v
            } else {
                v
            }
        })
        .collect();
    offsets
        .par_iter()
        .map(|&d| {
            let step = Complex64::from_polar(1.0, 2.0 * PI * h * d);
            let mut phase = Complex64::from_polar(1.0, 2.0 * PI * a * d);
            let mut sum = Complex64::new(0.0, 0.0);
            for (k, v) in profile.iter().enumerate() {
                if k % 256 == 0 {
                    phase = Complex64::from_polar(1.0, 2.0 * PI * (a + k as f64 * h) * d);
                }
                sum += v * phase;
                phase *= step;
            }
            sum * norm
        })
        .collect()
}

/// Parameters of the verification suite.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub sample_rate: f64,
    /// Bandlimited signals per corpus (time-focus sandwich and kernel identity).
    pub n_signals: usize,
    pub window: Window,
    pub sigma_max: f64,
    pub wavelet: AnalyticWavelet,
    pub band: (f64, f64),
    /// Scale rows of the constant-Q and wavelet isometry checks.
    pub rows: usize,
    /// Scale rows of the frequency-focus checks; squeezed atoms are up to
    /// `sigma_max` times narrower, so the grid is denser.
    pub focus_rows: usize,
    /// Frame hop of the spike-train experiment.
    pub spike_hop: usize,
    /// Halves `C_f` in the time sandwich (negative control).
    pub corrupt_upper_bound: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            sample_rate: 4000.0,
            n_signals: 20,
            window: Window::truncated_gaussian(0.01, 3.0).expect("valid window"),
            sigma_max: 5.0,
            wavelet: default_wavelet(),
            band: (25.0, 1600.0),
            rows: 64,
            focus_rows: 256,
            spike_hop: 8,
            corrupt_upper_bound: false,
        }
    }
}

/// Bump wavelet narrow enough to separate tones a semitone apart.
pub fn default_wavelet() -> AnalyticWavelet {
    AnalyticWavelet::bump(1.0, 0.04, 0.15).expect("valid wavelet")
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "constant-focus Parseval"),
    (2, "time-focus energy sandwich"),
    (3, "time-focus kernel energy identity"),
    (4, "L1 and L2 kernel identities"),
    (5, "constant-Q isometry"),
    (6, "wavelet isometry and unit-focus reduction"),
    (7, "squeezed atom norm and localization"),
    (8, "frequency-focus energy and kernel sandwich"),
    (9, "spike-train time focus"),
    (10, "multisine frequency focus"),
    (11, "fast paths against quadrature oracles"),
];

struct TimeCase {
    label: String,
    measured: f64,
    energy: f64,
    c_f: f64,
    upper: f64,
    floor: f64,
    floor_sigma_max: f64,
    kernel_energy: f64,
}

/// The suite with its shared corpora computed on first use.
pub struct Suite {
    pub cfg: SuiteConfig,
    time_cases: OnceLock<std::result::Result<Vec<TimeCase>, String>>,
}

impl Suite {
    pub fn new(cfg: SuiteConfig) -> Self {
        Self {
            cfg,
            time_cases: OnceLock::new(),
        }
    }

    /// Runs criterion `id`; configuration errors become a failing report.
    pub fn criterion(&self, id: u8) -> Vec<CheckReport> {
        let start = Instant::now();
        let out = match id {
            1 => self.c1(),
            2 => self.c2(),
            3 => self.c3(),
            4 => self.c4(),
            5 => self.c5(),
            6 => self.c6(),
            7 => self.c7(),
            8 => self.c8(),
            9 => self.c9(),
            10 => self.c10(),
            11 => self.c11(),
            _ => invalid(format!("no criterion {id}")),
        };
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(reports) => reports.into_iter().map(|r| r.with("seconds", format!("{secs:.3}"))).collect(),
            Err(e) => vec![CheckReport::failed(format!("c{id}.error"), e)],
        }
    }

    pub fn run(&self) -> Vec<CheckReport> {
        CRITERIA.iter().flat_map(|(id, _)| self.criterion(*id)).collect()
    }

    fn time_cfg(&self, hop: usize) -> Result<TimeFocusConfig> {
        TimeFocusConfig::new(self.cfg.window.clone(), hop, 64)
    }

    fn scale_grid(&self) -> Result<ScaleGrid> {
        self.grid_with(self.cfg.rows)
    }

    fn focus_grid(&self) -> Result<ScaleGrid> {
        self.grid_with(self.cfg.focus_rows)
    }

    fn grid_with(&self, rows: usize) -> Result<ScaleGrid> {
        let (lo, hi) = self.cfg.band;
        ScaleGrid::for_band(lo, hi, rows, self.cfg.wavelet.xi0(), ScaleMap::exponential())
    }

    /// Middle half (in log-frequency) of the grid band, clipped to the
    /// frequencies every row covers.
    fn interior_band(&self, grid: &ScaleGrid) -> (f64, f64) {
        let (lo, hi) = self.cfg.band;
        let r = hi / lo;
        let (clo, chi) = grid.covered_band(&self.cfg.wavelet);
        ((lo * r.powf(0.25)).max(clo), (lo * r.powf(0.75)).min(chi))
    }

    fn c1(&self) -> Result<Vec<CheckReport>> {
        let start = Instant::now();
        let cfg = TimeFocusConfig::new(Window::hann(0.01)?, 1, 64)?;
        let f = bandlimited_signal(4096, self.cfg.sample_rate, (1.0, 1000.0), self.cfg.seed)?.to_complex();
        let profile = TimeFocusProfile::constant(&FrameGrid::of(&f, &cfg), 1.0)?;
        let m = transform_time_focused(&f, &profile, &cfg)?;
        let lhs = weighted_energy(&m)?;
        let rhs = cfg.window.l2_norm_sq() * signal_energy(&f);
        let secs = start.elapsed().as_secs_f64();
        Ok(vec![
            CheckReport::equality("c1.parseval", lhs, rhs, 1e-3).with("frames", m.n_frames()).with("rows", m.n_rows()),
            CheckReport::at_most("c1.runtime", secs, 5.0, 5.0, 0.0),
        ])
    }

    fn time_cases(&self) -> Result<&Vec<TimeCase>> {
        self.time_cases
            .get_or_init(|| self.build_time_cases().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| crate::error::Error::InvalidInput(e.clone()))
    }

    fn build_time_cases(&self) -> Result<Vec<TimeCase>> {
        let cfg = self.time_cfg(1)?;
        let sr = self.cfg.sample_rate;
        let seeds: Vec<u64> = (0..self.cfg.n_signals as u64).map(|i| self.cfg.seed * 1000 + i).collect();
        let cases: Vec<Vec<TimeCase>> = seeds
            .iter()
            .map(|&seed| {
                let f = bandlimited_signal(4096, sr, (20.0, 1000.0), seed)?.to_complex();
                let grid = FrameGrid::of(&f, &cfg);
                let profiles = [
                    ("moment", time_focus(&f, &FocusSpec::new(FocusKind::Moment(1), self.cfg.sigma_max)?, &cfg)?),
                    ("entropy", time_focus(&f, &FocusSpec::new(FocusKind::Shannon, self.cfg.sigma_max)?, &cfg)?),
                    ("step", TimeFocusProfile::step(&grid, 3.0, 0.3, 0.6)?),
                ];
                profiles
                    .into_iter()
                    .map(|(name, p)| {
                        let r = check_time_bounds(&f, &p, &cfg)?;
                        Ok(TimeCase {
                            label: format!("seed{seed}/{name}"),
                            measured: r.measured_energy,
                            energy: r.signal_energy,
                            c_f: r.c_f,
                            upper: r.upper,
                            floor: r.sigma_independent_floor,
                            floor_sigma_max: r.floor_sigma_max,
                            kernel_energy: kernel_energy(&f, &p, &cfg),
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(cases.into_iter().flatten().collect())
    }

    fn c2(&self) -> Result<Vec<CheckReport>> {
        let cases = self.time_cases()?;
        let factor = if self.cfg.corrupt_upper_bound { 0.5 } else { 1.0 };
        let (mut upper, mut lower) = (None::<CheckReport>, None::<CheckReport>);
        let (mut up_fail, mut lo_fail, mut below_floor) = (0, 0, 0);
        for c in cases {
            let cap = factor * c.upper * c.energy;
            let eps_scale = factor * c.upper * c.energy;
            let u = CheckReport::at_most("c2.upper", c.measured, cap, eps_scale, SANDWICH_SLACK).with("worst_case", &c.label);
            let l = CheckReport::at_most("c2.lower", c.c_f * c.energy, c.measured, eps_scale, SANDWICH_SLACK)
                .with("worst_case", &c.label);
            up_fail += usize::from(!u.pass);
            lo_fail += usize::from(!l.pass);
            below_floor += usize::from(c.c_f < c.floor);
            if upper.as_ref().is_none_or(|w| u.rel > w.rel || (u.rel == w.rel && u.lhs / u.rhs > w.lhs / w.rhs)) {
                upper = Some(u);
            }
            if lower.as_ref().is_none_or(|w| l.rel > w.rel) {
                lower = Some(l);
            }
        }
        let n = cases.len();
        let min_floor_ratio = cases
            .iter()
            .map(|c| c.c_f / c.floor_sigma_max)
            .fold(f64::INFINITY, f64::min);
        let mut out = Vec::new();
        if let Some(u) = upper {
            out.push(u.with("cases", n).with("violations", up_fail).with("corrupted", self.cfg.corrupt_upper_bound));
        }
        if let Some(l) = lower {
            out.push(
                l.with("cases", n)
                    .with("violations", lo_fail)
                    .with("cf_below_sigma_free_floor", below_floor)
                    .with("min_cf_over_floor_sigma_max", format!("{min_floor_ratio:.4}")),
            );
        }
        Ok(out)
    }

    fn c3(&self) -> Result<Vec<CheckReport>> {
        let cases = self.time_cases()?;
        let worst = cases
            .iter()
            .map(|c| (c, CheckReport::equality("c3.kernel_identity", c.measured, c.kernel_energy, 1e-2)))
            .max_by(|a, b| a.1.rel.total_cmp(&b.1.rel));
        let fails = cases
            .iter()
            .filter(|c| !CheckReport::equality("", c.measured, c.kernel_energy, 1e-2).pass)
            .count();
        Ok(worst
            .map(|(c, r)| r.with("worst_case", &c.label).with("cases", cases.len()).with("violations", fails))
            .into_iter()
            .collect())
    }

    fn c4(&self) -> Result<Vec<CheckReport>> {
        let cfg = self.time_cfg(1)?;
        let sr = self.cfg.sample_rate;
        let grid = FrameGrid::for_signal(1024, sr, 0.0, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let random_steps: Vec<f64> = {
            let mut s = vec![1.0; grid.n_frames];
            let mut m = 0;
            while m < s.len() {
                let len = rng.gen_range(20..120);
                let v = rng.gen_range(1.0..self.cfg.sigma_max);
                for x in s.iter_mut().skip(m).take(len) {
                    *x = v;
                }
                m += len;
            }
            s
        };
        let profiles = [
            ("step2", TimeFocusProfile::step(&grid, 2.0, 0.05, 0.1)?),
            ("step5", TimeFocusProfile::step(&grid, self.cfg.sigma_max, -0.005, 0.2)?),
            (
                "random_steps",
                TimeFocusProfile::new(random_steps, grid.time(0), grid.frame_step(), self.cfg.sigma_max)?,
            ),
        ];
        let mut out = Vec::new();
        for (name, p) in &profiles {
            let l1 = l1_kernel_identity(p, &cfg)?;
            out.push(CheckReport::equality(format!("c4.l1.{name}"), l1.lhs, l1.rhs, 1e-3));
            let l2 = l2_kernel_identity(p, &cfg)?;
            out.push(CheckReport::equality(format!("c4.l2.{name}"), l2.lhs, l2.rhs, 1e-3));
        }
        Ok(out)
    }

    fn interior_signals(&self, grid: &ScaleGrid, count: u64) -> Result<Vec<RealSignal>> {
        let band = self.interior_band(grid);
        (0..count)
            .map(|i| bandlimited_signal(8192, self.cfg.sample_rate, band, self.cfg.seed * 1000 + 500 + i))
            .collect()
    }

    fn c5(&self) -> Result<Vec<CheckReport>> {
        let start = Instant::now();
        let grid = self.scale_grid()?;
        let reference = cqt_reference_from_wavelet(&self.cfg.wavelet);
        let mut out = Vec::new();
        for (i, f) in self.interior_signals(&grid, 3)?.iter().enumerate() {
            let m = cqt_transform(&f.to_complex(), &grid, &reference)?;
            out.push(
                CheckReport::equality(format!("c5.cqt_isometry.{i}"), weighted_energy(&m)?, reference.c_h() * signal_energy(f), 1e-2)
                    .with("rows", m.n_rows()),
            );
        }
        let secs = start.elapsed().as_secs_f64();
        out.push(CheckReport::at_most("c5.runtime", secs, 10.0, 10.0, 0.0));
        Ok(out)
    }

    fn c6(&self) -> Result<Vec<CheckReport>> {
        let grid = self.scale_grid()?;
        let w = &self.cfg.wavelet;
        let mut out = Vec::new();
        for (i, f) in self.interior_signals(&grid, 3)?.iter().enumerate() {
            let fa = hardy_project(f);
            let wt = wavelet_transform(&fa, &grid, w)?;
            out.push(CheckReport::equality(
                format!("c6.wavelet_isometry.{i}"),
                weighted_energy(&wt)?,
                w.c_psi() * signal_energy(&fa),
                1e-2,
            ));
            if i == 0 {
                let mf = transform_freq_focused(&fa, &FreqFocusProfile::unit(&grid), &grid, w)?;
                let scale = wt.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
                let diff = wt
                    .values()
                    .iter()
                    .zip(mf.values())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                out.push(CheckReport::new("c6.unit_focus_equals_wavelet", diff, 0.0, diff / scale, 1e-12));
            }
        }
        Ok(out)
    }

    fn c7(&self) -> Result<Vec<CheckReport>> {
        let grid = self.scale_grid()?;
        let w = &self.cfg.wavelet;
        let sr = self.cfg.sample_rate;
        let rows: Vec<usize> = (0..5).map(|i| (grid.len() - 1) * (2 * i + 1) / 10).collect();
        let len = 1 << 19;
        let mut norm_worst = CheckReport::new("c7.atom_norm", 0.0, 0.0, 0.0, 1e-6);
        let mut loc_worst = CheckReport::new("c7.localization", 0.0, 0.0, 0.0, 1e-6);
        for &j in &rows {
            for sigma in [1.0, 2.0, 4.0] {
                let u = grid.u[j];
                let (spec, warning) = focused_atom_spectrum(0.0, u, sigma, &grid.gamma, w, sr, len)?;
                if let Some(msg) = warning {
                    return invalid(format!("row {j}: {msg}"));
                }
                let e = spec.energy();
                let mean = spec
                    .bins
                    .iter()
                    .enumerate()
                    .map(|(k, b)| spec.frequency(k) * b.norm_sqr())
                    .sum::<f64>()
                    * spec.freq_step
                    / e;
                let label = format!("row{j}/sigma{sigma}");
                let n = CheckReport::equality("c7.atom_norm", e, w.norm_sq() / sigma, 1e-6).with("worst_case", &label);
                if n.rel >= norm_worst.rel {
                    norm_worst = n;
                }
                let l = CheckReport::equality("c7.localization", mean, grid.scale(j) * w.xi0(), 1e-6).with("worst_case", &label);
                if l.rel >= loc_worst.rel {
                    loc_worst = l;
                }
            }
        }
        Ok(vec![norm_worst.with("cases", 15), loc_worst.with("cases", 15)])
    }

    fn c8(&self) -> Result<Vec<CheckReport>> {
        let grid = self.focus_grid()?;
        let w = &self.cfg.wavelet;
        let ms = synth_multisine_spikes_noise(&MultisineSpec {
            seed: self.cfg.seed,
            sample_rate: self.cfg.sample_rate,
            ..Default::default()
        })?;
        let ms_a = hardy_project(&ms);
        let entropy = entropy_freq_focus(
            &ms_a,
            &FocusSpec::new(FocusKind::Shannon, self.cfg.sigma_max)?,
            &grid,
            w,
            DEFAULT_EDGE_ROWS,
        )?;
        let profiles = [
            ("unit", FreqFocusProfile::unit(&grid)),
            ("octave2", FreqFocusProfile::indicator(&grid, 2.0, 100.0 / w.xi0(), 200.0 / w.xi0())?),
            ("entropy", entropy),
        ];
        let mut signals: Vec<(String, ComplexSignal)> = self
            .interior_signals(&grid, 2)?
            .iter()
            .enumerate()
            .map(|(i, f)| (format!("bandlimited{i}"), hardy_project(f)))
            .collect();
        signals.push(("multisine".into(), ms_a));
        let d = lower_bound_d(w);
        let mut e_lo: Option<CheckReport> = None;
        let mut e_up: Option<CheckReport> = None;
        let mut warnings = 0;
        let mut identity: Option<CheckReport> = None;
        for (sname, f) in &signals {
            for (pname, p) in &profiles {
                let r = check_freq_bounds(f, p, &grid, w)?;
                let k = freq_kernel_energy(f, p, &grid, w)?;
                let id = CheckReport::equality("c8.energy_identity", r.measured_energy, k, 1e-2)
                    .with("worst_case", format!("{sname}/{pname}"));
                if identity.as_ref().is_none_or(|x| id.rel > x.rel) {
                    identity = Some(id);
                }
                warnings += r.warnings.len();
                let label = format!("{sname}/{pname}");
                let lo_bound = r.d_psi * r.signal_energy;
                let lo = CheckReport::at_most("c8.energy_lower", lo_bound, r.measured_energy, lo_bound, SANDWICH_SLACK)
                    .with("worst_case", &label)
                    .with("sigma_max_floor_holds", r.measured_energy >= r.d_sigma_max * r.signal_energy);
                let up_bound = r.c_sigma * r.signal_energy;
                let up = CheckReport::at_most("c8.energy_upper", r.measured_energy, up_bound, up_bound, SANDWICH_SLACK)
                    .with("worst_case", &label);
                if e_lo.as_ref().is_none_or(|x| lo.rel > x.rel || (lo.rel == x.rel && lo.rhs / lo.lhs < x.rhs / x.lhs)) {
                    e_lo = Some(lo);
                }
                if e_up.as_ref().is_none_or(|x| up.rel > x.rel) {
                    e_up = Some(up);
                }
            }
        }
        let (lo, hi) = self.cfg.band;
        let xs: Vec<f64> = (0..256).map(|i| lo * (hi / lo).powf(i as f64 / 255.0)).collect();
        let mut out: Vec<CheckReport> = e_lo
            .into_iter()
            .chain(e_up)
            .map(|r| r.with("truncation_warnings", warnings))
            .chain(identity)
            .collect();
        for (pname, p) in &profiles {
            let k = kernel_freq(p, &grid, w, &xs)?;
            let kmin = k.iter().cloned().fold(f64::INFINITY, f64::min);
            let kmax = k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let c = upper_bound_c(p, &grid, w)?;
            let floor = lower_bound_d_sigma_max(w, p.sigma_max);
            out.push(
                CheckReport::at_most(format!("c8.kernel_lower.{pname}"), d, kmin, d, 1e-9)
                    .with("sigma_max_floor", format!("{floor:e}"))
                    .with("sigma_max_floor_holds", kmin >= floor),
            );
            out.push(CheckReport::at_most(format!("c8.kernel_upper.{pname}"), kmax, c, c, 1e-9));
            if *pname == "unit" {
                let worst = k.iter().map(|v| (v - w.c_psi()).abs()).fold(0.0, f64::max);
                out.push(CheckReport::new("c8.unit_kernel", worst, w.c_psi(), worst / w.c_psi(), 1e-4));
            }
        }
        Ok(out)
    }

    fn c9(&self) -> Result<Vec<CheckReport>> {
        let spec = SpikeTrainSpec {
            sample_rate: self.cfg.sample_rate,
            ..Default::default()
        };
        let f = synth_spike_train(&spec)?.to_complex();
        let cfg = self.time_cfg(self.cfg.spike_hop)?;
        let grid = FrameGrid::of(&f, &cfg);
        let nearest = |t: f64| {
            (0..grid.n_frames)
                .min_by(|&a, &b| (grid.time(a) - t).abs().total_cmp(&(grid.time(b) - t).abs()))
                .unwrap_or(0)
        };
        let is_local_max = |p: &[f64], i: usize| {
            let left = if i > 0 { p[i - 1] } else { f64::NEG_INFINITY };
            let right = p.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            p[i] >= left && p[i] >= right
        };
        let spikes = spec.times.len();
        let mut out = Vec::new();
        for (name, kind) in [("moment", FocusKind::Moment(1)), ("entropy", FocusKind::Shannon)] {
            let p = time_focus(&f, &FocusSpec::new(kind, self.cfg.sigma_max)?, &cfg)?;
            let found = spec
                .times
                .iter()
                .filter(|&&t| {
                    let m = nearest(t) as i64;
                    (m - 1..=m + 1).any(|i| i >= 0 && (i as usize) < p.len() && is_local_max(&p.sigma, i as usize))
                })
                .count();
            out.push(
                CheckReport::new(
                    format!("c9.{name}_peaks"),
                    found as f64,
                    spikes as f64,
                    (spikes - found) as f64 / spikes as f64,
                    0.0,
                )
                .with("hop", self.cfg.spike_hop),
            );
        }
        let spec_e = FocusSpec::new(FocusKind::Shannon, self.cfg.sigma_max)?;
        let base = time_focus(&f, &spec_e, &cfg)?;
        let mut worst: f64 = 0.0;
        for a in [2.0, 0.25] {
            let p = time_focus(&f.scaled(a), &spec_e, &cfg)?;
            worst = base.sigma.iter().zip(&p.sigma).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
        }
        out.push(CheckReport::new("c9.entropy_amplitude_invariance", worst, 0.0, worst, 0.0).with("factors", "2,0.25"));
        Ok(out)
    }

    fn c10(&self) -> Result<Vec<CheckReport>> {
        let grid = self.focus_grid()?;
        let w = &self.cfg.wavelet;
        let spec = FocusSpec::new(FocusKind::Shannon, self.cfg.sigma_max)?;
        let mut out = Vec::new();
        for (name, amps) in [("equal", vec![1.0; 4]), ("unequal", vec![1.0, 0.5, 2.0, 0.75])] {
            let ms = MultisineSpec {
                amps,
                seed: self.cfg.seed,
                sample_rate: self.cfg.sample_rate,
                ..Default::default()
            };
            let f = hardy_project(&synth_multisine_spikes_noise(&ms)?);
            let p = entropy_freq_focus(&f, &spec, &grid, w, DEFAULT_EDGE_ROWS)?;
            let mut sorted = p.sigma.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let threshold = sorted[(sorted.len() / 4).max(1) - 1];
            let rows: Vec<usize> = ms
                .freqs
                .iter()
                .map(|&fr| grid.nearest_row(fr, w.xi0()))
                .collect::<Result<_>>()?;
            let hits = rows.iter().filter(|&&j| p.sigma[j] >= threshold).count();
            let n = rows.len();
            out.push(
                CheckReport::new(format!("c10.top_quartile.{name}"), hits as f64, n as f64, (n - hits) as f64 / n as f64, 0.0)
                    .with("threshold", format!("{threshold:.4}"))
                    .with(
                        "row_values",
                        rows.iter().map(|&j| format!("{:.4}", p.sigma[j])).collect::<Vec<_>>().join(","),
                    ),
            );
        }
        Ok(out)
    }

    fn c11(&self) -> Result<Vec<CheckReport>> {
        let sr = self.cfg.sample_rate;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed + 11);

        // time focus, identity map: fast FFT path against ⟨f, h_{t,ω,σ}⟩
        let cfg = self.time_cfg(4)?;
        let f = bandlimited_signal(1024, sr, (20.0, 1500.0), self.cfg.seed + 11)?.to_complex();
        let grid = FrameGrid::of(&f, &cfg);
        let profile = time_focus(&f, &FocusSpec::new(FocusKind::Shannon, self.cfg.sigma_max)?, &cfg)?;
        let m = transform_time_focused(&f, &profile, &cfg)?;
        let half = (cfg.window.support_length() * sr / 2.0).ceil() as i64;
        let interior: Vec<usize> = (0..grid.n_frames)
            .filter(|&i| {
                let c = grid.center_index(i);
                c - half >= 1 && c + half <= f.len() as i64 - 2
            })
            .collect();
        let frames: Vec<usize> = sample(&mut rng, interior.len(), 8).into_iter().map(|i| interior[i]).collect();
        let rows: Vec<usize> = sample(&mut rng, m.n_rows(), 6).into_vec();
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for &fm in &frames {
            for &r in &rows {
                let atom = time_focused_atom(grid.time(fm), m.row_axis[r], profile.sigma[fm], &cfg, sr, f.len(), f.start_time())?;
                let oracle = quadrature_inner_product(&f, &atom)?;
                diff = diff.max((m.get(r, fm) - oracle).norm());
                scale = scale.max(oracle.norm());
            }
        }
        let time = CheckReport::new("c11.time_focus_oracle", diff, scale, diff / scale, 1e-6).with("cells", frames.len() * rows.len());

        // frequency focus rows against atoms synthesized by quadrature
        let sgrid = self.scale_grid()?;
        let w = &self.cfg.wavelet;
        let n = 16384;
        let f = hardy_project(&bandlimited_signal(n, sr, (20.0, 1500.0), self.cfg.seed + 12)?);
        // smooth bump over the upper half of the grid, where atoms are short
        let half = sgrid.len() / 2;
        let mut sigma: Vec<f64> = (0..sgrid.len())
            .map(|j| {
                let x = j.saturating_sub(half) as f64 / (sgrid.len() - 1 - half) as f64;
                1.0 + (self.cfg.sigma_max - 1.0) * (PI * x).sin().powi(2)
            })
            .collect();
        sigma[0] = 1.0;
        let last = sigma.len() - 1;
        sigma[last] = 1.0;
        let fprofile = FreqFocusProfile::new(sigma, self.cfg.sigma_max)?;
        let mf = transform_freq_focused(&f, &fprofile, &sgrid, w)?;
        let centers = [n / 2 - 257, n / 2, n / 2 + 389];
        let (lo_c, hi_c) = (centers[0] as i64, centers[2] as i64);
        // interior rows: the atom has decayed below 1e-10 of its peak before
        // reaching either end of the signal from every sampled center
        let margin = (n as i64 - hi_c).min(lo_c);
        let probes: Vec<f64> = std::iter::once(0.0)
            .chain((0..40).flat_map(|i| {
                let d = (margin + 50 * i) as f64 / sr;
                [d, -d]
            }))
            .collect();
        let rows: Vec<usize> = (sgrid.len() / 2..sgrid.len())
            .filter(|&j| {
                let a = freq_atom_by_quadrature(&probes, sgrid.u[j], fprofile.sigma[j], &sgrid.gamma, w, 0.05);
                a[1..].iter().all(|v| v.norm() < 1e-10 * a[0].norm())
            })
            .collect();
        if rows.len() < 3 {
            return invalid(format!("only {} interior rows for the frequency oracle", rows.len()));
        }
        let offsets: Vec<f64> = (-hi_c..n as i64 - lo_c).map(|d| d as f64 / sr).collect();
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for &j in &rows {
            // ψ_{t,u,σ}(x) depends on x - t only
            let atom = freq_atom_by_quadrature(&offsets, sgrid.u[j], fprofile.sigma[j], &sgrid.gamma, w, 0.05);
            for &c in &centers {
                let first = (hi_c - c as i64) as usize;
                let g = ComplexSignal::with_start(atom[first..first + n].to_vec(), sr, f.start_time())?;
                let oracle = quadrature_inner_product(&f, &g)?;
                diff = diff.max((mf.get(j, c) - oracle).norm());
                scale = scale.max(oracle.norm());
            }
        }
        let sigmas: Vec<String> = rows.iter().map(|&j| format!("{:.2}", fprofile.sigma[j])).collect();
        let freq = CheckReport::new("c11.freq_focus_oracle", diff, scale, diff / scale, 1e-6)
            .with("cells", rows.len() * centers.len())
            .with("rows", rows.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","))
            .with("sigmas", sigmas.join(","));
        Ok(vec![time, freq])
    }
}

/// Runs every criterion and returns the reports in declaration order.
pub fn run_suite(cfg: SuiteConfig) -> Vec<CheckReport> {
    Suite::new(cfg).run()
}
