//! Paired runs with and without the potential, difference maps and
//! residuals.
//!
//! Each experiment evolves the same excitation twice on the same window:
//! once under the drifting potential and once with `V = 0`. The power map
//! `P` of the first run and the difference map
//! `Q = |u - u_ref|^2 + |v - v_ref|^2` are recorded on request, and the
//! residual `r(m) = sum Q / sum P_ref` is tracked at every step.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::bands::ChannelSet;
use crate::error::{Error, Result};
use crate::lattice::{
    bloch_eigenpair, Band, CoinConfig, EvolveOptions, Evolver, LatticeState, ZeroPotential, DEFAULT_OVERFLOW_GUARD,
};
use crate::potentials::{DriftingPotential, SUPPORT_THRESHOLD};

/// Gaussian envelopes are cut where they drop below ~1e-16.
pub const PACKET_CUTOFF_WIDTHS: f64 = 8.6;

/// Extra sites added on each side of the excitation cone in the passage check.
pub const PASSAGE_MARGIN: f64 = 10.0;

/// Extra sites beyond the strict light cone in an automatic window.
const WINDOW_PAD: i64 = 2;

/// Initial condition shared by both runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Excitation {
    /// `u = v = 1` at `site`.
    Delta { site: i64 },
    /// Gaussian-enveloped Bloch wave of unit power.
    WavePacket { q: f64, width: f64, center: i64, band: Band },
}

impl Excitation {
    /// First and last site that may hold a nonzero amplitude at step 0.
    pub fn extent(&self) -> (i64, i64) {
        match *self {
            Excitation::Delta { site } => (site, site),
            Excitation::WavePacket { width, center, .. } => {
                let half = (PACKET_CUTOFF_WIDTHS * width).ceil() as i64;
                (center - half, center + half)
            }
        }
    }

    pub fn carrier(&self) -> Option<(f64, Band)> {
        match *self {
            Excitation::Delta { .. } => None,
            Excitation::WavePacket { q, band, .. } => Some((q, band)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Excitation extent plus the light cone of `M` steps.
    #[default]
    Auto,
    Explicit { lo: i64, hi: i64 },
}

/// Which maps to keep and how densely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordSpec {
    pub power: bool,
    pub difference: bool,
    /// Raw `u` and `v` of the potential-on run.
    pub fields: bool,
    /// Keep steps that are multiples of `stride`, plus the last one.
    pub stride: u64,
    /// Crop the maps to `lo..=hi`; the whole window when `None`.
    pub sites: Option<(i64, i64)>,
}

impl Default for RecordSpec {
    fn default() -> Self {
        Self { power: true, difference: true, fields: false, stride: 1, sites: None }
    }
}

impl RecordSpec {
    pub fn none() -> Self {
        Self { power: false, difference: false, fields: false, stride: 1, sites: None }
    }

    fn any(&self) -> bool {
        self.power || self.difference || self.fields
    }

    fn keeps(&self, step: u64, last: u64) -> bool {
        step % self.stride == 0 || step == last
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub coin: CoinConfig,
    pub potential: DriftingPotential,
    pub steps: u64,
    pub excitation: Excitation,
    pub window: Window,
    pub record: RecordSpec,
    pub overflow_guard: f64,
    /// Fail unless the potential has swept past the excitation by step `M`.
    pub require_passage: bool,
}

impl ExperimentConfig {
    pub fn new(coin: CoinConfig, potential: DriftingPotential, steps: u64, excitation: Excitation) -> Self {
        Self {
            coin,
            potential,
            steps,
            excitation,
            window: Window::Auto,
            record: RecordSpec::default(),
            overflow_guard: DEFAULT_OVERFLOW_GUARD,
            require_passage: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be positive".into()));
        }
        if self.record.stride == 0 {
            return Err(Error::InvalidParameter("record stride must be positive".into()));
        }
        if let Some((lo, hi)) = self.record.sites {
            if hi < lo {
                return Err(Error::InvalidParameter(format!("record sites [{lo}, {hi}] are empty")));
            }
        }
        if !(self.overflow_guard > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "overflow guard must be positive, got {}",
                self.overflow_guard
            )));
        }
        if let Excitation::WavePacket { q, width, .. } = self.excitation {
            check_packet(q, width)?;
        }
        let (lo, hi) = self.window_bounds()?;
        let (a, b) = self.excitation.extent();
        if a < lo || b > hi {
            return Err(Error::InvalidParameter(format!(
                "excitation [{a}, {b}] does not fit the window [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    pub fn window_bounds(&self) -> Result<(i64, i64)> {
        match self.window {
            Window::Auto => {
                let (a, b) = self.excitation.extent();
                let reach = i64::try_from(self.steps)
                    .map_err(|_| Error::InvalidParameter("step count too large".into()))?
                    + WINDOW_PAD;
                Ok((a - reach, b + reach))
            }
            Window::Explicit { lo, hi } => {
                if hi < lo {
                    return Err(Error::InvalidParameter(format!("window [{lo}, {hi}] is empty")));
                }
                Ok((lo, hi))
            }
        }
    }

    pub fn initial_state(&self) -> Result<LatticeState> {
        let (lo, hi) = self.window_bounds()?;
        match self.excitation {
            Excitation::Delta { site } => LatticeState::delta(site, lo, hi),
            Excitation::WavePacket { q, width, center, band } => {
                make_wavepacket(&self.coin, q, width, center, band)?.reframed(lo, hi)
            }
        }
    }

    /// Whether the potential support has left the excitation cone by step `M`.
    pub fn passage(&self) -> Passage {
        let support = self.potential.shape().support(SUPPORT_THRESHOLD);
        let m = self.steps as f64;
        let (a, b) = self.excitation.extent();
        let spread = self.coin.cos().abs() * m + PASSAGE_MARGIN;
        let cone = (a as f64 - spread, b as f64 + spread);
        let potential = support.map(|(lo, hi)| (lo - self.potential.drift() * m, hi - self.potential.drift() * m));
        let cleared = match potential {
            None => true,
            Some((lo, hi)) => hi < cone.0 || lo > cone.1,
        };
        Passage { potential, cone, cleared }
    }
}

/// Potential support and excitation cone, in lab sites, at the final step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Passage {
    /// `None` for an identically zero shape.
    pub potential: Option<(f64, f64)>,
    pub cone: (f64, f64),
    pub cleared: bool,
}

/// Site-by-step samples on `lo..=hi`, one row per recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap<T> {
    pub lo: i64,
    pub hi: i64,
    pub steps: Vec<u64>,
    pub values: Vec<T>,
}

pub type RealMap = FieldMap<f64>;
pub type ComplexMap = FieldMap<Complex64>;

impl<T: Copy> FieldMap<T> {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi, steps: Vec::new(), values: Vec::new() }
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn rows(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push_row(&mut self, step: u64, row: impl IntoIterator<Item = T>) {
        let before = self.values.len();
        self.values.extend(row);
        debug_assert_eq!(self.values.len() - before, self.width());
        self.steps.push(step);
    }

    pub fn row(&self, index: usize) -> &[T] {
        let w = self.width();
        &self.values[index * w..(index + 1) * w]
    }

    /// Value at `(step, site)` if that step was recorded and the site is in range.
    pub fn get(&self, step: u64, site: i64) -> Option<T> {
        if site < self.lo || site > self.hi {
            return None;
        }
        let r = self.steps.binary_search(&step).ok()?;
        Some(self.row(r)[(site - self.lo) as usize])
    }

    /// `(m, n, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (u64, i64, T)> + '_ {
        let w = self.width();
        self.values.iter().enumerate().map(move |(k, v)| (self.steps[k / w], self.lo + (k % w) as i64, *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub excitation: Excitation,
    pub coin: CoinConfig,
    pub drift: f64,
    pub window: (i64, i64),
    pub power: Option<RealMap>,
    pub difference: Option<RealMap>,
    pub u_field: Option<ComplexMap>,
    pub v_field: Option<ComplexMap>,
    /// `(m, r(m))` for `m = 0..=M`.
    pub residuals: Vec<(u64, f64)>,
    pub final_residual: f64,
    pub final_state: LatticeState,
    pub reference_state: LatticeState,
    pub passage: Passage,
    pub runtime: Duration,
}

fn check_packet(q: f64, width: f64) -> Result<()> {
    if !(q.abs() <= PI) {
        return Err(Error::InvalidParameter(format!("carrier q = {q} outside [-pi, pi]")));
    }
    if !(width >= 2.0) || !width.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "wave-packet width {width} below 2 sites; its spectrum would leak past the Brillouin zone"
        )));
    }
    Ok(())
}

/// Bloch wave of `band` at carrier `q` under a Gaussian envelope of
/// `width` sites centred on `center`, scaled to unit total power.
pub fn make_wavepacket(coin: &CoinConfig, q: f64, width: f64, center: i64, band: Band) -> Result<LatticeState> {
    check_packet(q, width)?;
    let (lo, hi) = Excitation::WavePacket { q, width, center, band }.extent();
    let (_, (a, b)) = bloch_eigenpair(coin, q, band);
    let mut u = Vec::with_capacity((hi - lo + 1) as usize);
    let mut v = Vec::with_capacity(u.capacity());
    for n in lo..=hi {
        let d = (n - center) as f64;
        let w = Complex64::from_polar((-d * d / (2.0 * width * width)).exp(), q * n as f64);
        u.push(a * w);
        v.push(b * w);
    }
    let state = LatticeState::new(0, lo, u, v)?;
    let norm = state.total_power().sqrt();
    Ok(state.scaled(Complex64::new(1.0 / norm, 0.0)))
}

struct Recorder {
    spec: RecordSpec,
    last: u64,
    lo: i64,
    hi: i64,
    power: Option<RealMap>,
    difference: Option<RealMap>,
    u_field: Option<ComplexMap>,
    v_field: Option<ComplexMap>,
}

impl Recorder {
    fn new(spec: RecordSpec, window: (i64, i64), last: u64) -> Self {
        let (lo, hi) = spec.sites.unwrap_or(window);
        Self {
            spec,
            last,
            lo,
            hi,
            power: spec.power.then(|| FieldMap::new(lo, hi)),
            difference: spec.difference.then(|| FieldMap::new(lo, hi)),
            u_field: spec.fields.then(|| FieldMap::new(lo, hi)),
            v_field: spec.fields.then(|| FieldMap::new(lo, hi)),
        }
    }

    fn record(&mut self, on: &LatticeState, reference: &LatticeState) {
        let m = on.step();
        if !self.spec.any() || !self.spec.keeps(m, self.last) {
            return;
        }
        let sites = self.lo..=self.hi;
        if let Some(map) = self.power.as_mut() {
            map.push_row(m, sites.clone().map(|n| {
                let (a, b) = on.amplitudes_at(n);
                a.norm_sqr() + b.norm_sqr()
            }));
        }
        if let Some(map) = self.difference.as_mut() {
            map.push_row(m, sites.clone().map(|n| {
                let (a, b) = on.amplitudes_at(n);
                let (c, d) = reference.amplitudes_at(n);
                (a - c).norm_sqr() + (b - d).norm_sqr()
            }));
        }
        if let Some(map) = self.u_field.as_mut() {
            map.push_row(m, sites.clone().map(|n| on.amplitudes_at(n).0));
        }
        if let Some(map) = self.v_field.as_mut() {
            map.push_row(m, sites.map(|n| on.amplitudes_at(n).1));
        }
    }
}

/// `sum Q / sum P_ref` at one step.
fn residual(on: &LatticeState, reference: &LatticeState) -> f64 {
    let q: f64 = on
        .u()
        .iter()
        .zip(reference.u())
        .chain(on.v().iter().zip(reference.v()))
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let p = reference.total_power();
    if q == 0.0 {
        0.0
    } else {
        q / p
    }
}

/// Evolve the excitation with and without the potential and compare.
pub fn run_pair(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();
    let passage = checked_passage(config)?;
    run_from(config, config.initial_state()?, passage, started)
}

fn checked_passage(config: &ExperimentConfig) -> Result<Passage> {
    let passage = config.passage();
    if config.require_passage && !passage.cleared {
        let (lo, hi) = passage.potential.unwrap_or((0.0, 0.0));
        return Err(Error::ScatteringIncomplete(format!(
            "after {} steps the potential support [{lo:.1}, {hi:.1}] still meets the excitation cone [{:.1}, {:.1}]",
            config.steps, passage.cone.0, passage.cone.1
        )));
    }
    Ok(passage)
}

/// [`run_pair`] from a caller-supplied initial state, which must live on
/// the config's window.
pub fn run_pair_from(config: &ExperimentConfig, initial: LatticeState) -> Result<ExperimentResult> {
    config.validate()?;
    let (lo, hi) = config.window_bounds()?;
    if initial.origin() != lo || initial.last_site() != hi || initial.step() != 0 {
        return Err(Error::InvalidParameter(format!(
            "initial state must cover the window [{lo}, {hi}] at step 0"
        )));
    }
    let started = Instant::now();
    run_from(config, initial, checked_passage(config)?, started)
}

fn run_from(config: &ExperimentConfig, initial: LatticeState, passage: Passage, started: Instant) -> Result<ExperimentResult> {
    if initial.total_power() == 0.0 {
        return Err(Error::InvalidParameter("excitation carries no power".into()));
    }
    let window = (initial.origin(), initial.last_site());
    let options = EvolveOptions { overflow_guard: config.overflow_guard };
    let mut on = Evolver::new(initial.clone(), options)?;
    let mut off = Evolver::new(initial, options)?;
    let mut recorder = Recorder::new(config.record, window, config.steps);
    recorder.record(on.state(), off.state());

    let mut residuals = Vec::with_capacity(config.steps as usize + 1);
    residuals.push((0, 0.0));
    for _ in 0..config.steps {
        on.advance(&config.coin, &config.potential)?;
        off.advance(&config.coin, &ZeroPotential)?;
        recorder.record(on.state(), off.state());
        residuals.push((on.state().step(), residual(on.state(), off.state())));
    }
    let final_residual = residuals.last().map(|r| r.1).unwrap_or(0.0);
    Ok(ExperimentResult {
        excitation: config.excitation,
        coin: config.coin,
        drift: config.potential.drift(),
        window,
        power: recorder.power,
        difference: recorder.difference,
        u_field: recorder.u_field,
        v_field: recorder.v_field,
        residuals,
        final_residual,
        final_state: on.into_state(),
        reference_state: off.into_state(),
        passage,
        runtime: started.elapsed(),
    })
}

/// `(m, r(m))` for every step of the run.
pub fn residual_series(result: &ExperimentResult) -> Vec<(u64, f64)> {
    result.residuals.clone()
}

/// Smallest step count for which `config` passes the passage check, if
/// the potential moves at all.
pub fn min_passage_steps(config: &ExperimentConfig) -> Option<u64> {
    let speed = config.potential.drift() - config.coin.cos().abs();
    let Some((_, hi)) = config.potential.shape().support(SUPPORT_THRESHOLD) else {
        return Some(1);
    };
    let (a, _) = config.excitation.extent();
    let gap = hi - (a as f64 - PASSAGE_MARGIN);
    if gap < 0.0 {
        return Some(1);
    }
    if speed <= 0.0 {
        return None;
    }
    Some((gap / speed).floor() as u64 + 1)
}

/// Projection of the scattered field onto one channel's Bloch wave.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredChannel {
    pub alpha: i32,
    pub band: Band,
    /// Moving-frame wavenumber.
    pub q: f64,
    /// `q` folded into `(-pi, pi]`.
    pub lab_q: f64,
    /// Same lab wave as the incident channel; only the sum is observable.
    pub aliased_with_incident: bool,
    /// Index of the first channel sharing this lab wave.
    pub alias_group: usize,
    /// Amplitude relative to the incident reference peak.
    pub raw_amplitude: f64,
    /// `raw_amplitude`, or zero when below ten times the leakage floor.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMeasurement {
    pub channels: Vec<MeasuredChannel>,
    /// Largest relative projection of the reference field onto a lab wave
    /// other than the incident one.
    pub leakage_floor: f64,
    /// `|<incident wave, reference field>|` before normalisation.
    pub incident_reference: f64,
}

impl ChannelMeasurement {
    /// Largest reported amplitude over channels not aliased with the incident one.
    pub fn max_scattered(&self) -> f64 {
        self.channels.iter().filter(|c| !c.aliased_with_incident).map(|c| c.amplitude).fold(0.0, f64::max)
    }

    pub fn max_scattered_raw(&self) -> f64 {
        self.channels.iter().filter(|c| !c.aliased_with_incident).map(|c| c.raw_amplitude).fold(0.0, f64::max)
    }
}

/// Fold into `(-pi, pi]`.
pub fn wrap_phase(q: f64) -> f64 {
    let r = (q + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

const ALIAS_TOLERANCE: f64 = 1e-6;

struct Projector {
    origin: i64,
    weights: Vec<f64>,
}

impl Projector {
    /// Hann window over `lo..=hi`.
    fn new(lo: i64, hi: i64) -> Self {
        let span = (hi - lo + 2) as f64;
        let weights = (lo..=hi).map(|n| (PI * (n - lo + 1) as f64 / span).sin().powi(2)).collect();
        Self { origin: lo, weights }
    }

    /// `|sum_n w_n <e(q, band), psi_n> e^{-iqn}|` with `e` the unit Bloch vector.
    fn project(&self, coin: &CoinConfig, field: &LatticeState, q: f64, band: Band) -> f64 {
        let (_, (a, b)) = bloch_eigenpair(coin, q, band);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a.conj() / norm, b.conj() / norm);
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, w) in self.weights.iter().enumerate() {
            let n = self.origin + k as i64;
            let (u, v) = field.amplitudes_at(n);
            sum += *w * (a * u + b * v) * Complex64::from_polar(1.0, -q * n as f64);
        }
        sum.norm()
    }
}

/// Spectral amplitudes of the scattered field `psi - psi_ref` at each
/// channel of `channels`, measured in the lab frame at the final step.
///
/// Channels whose lab wavenumbers coincide cannot be told apart and share
/// an `alias_group`.
pub fn transmitted_channel_analysis(result: &ExperimentResult, channels: &ChannelSet) -> Result<ChannelMeasurement> {
    let (q0, band0) = result.excitation.carrier().ok_or_else(|| {
        Error::InvalidParameter("channel analysis needs a wave-packet excitation with a carrier".into())
    })?;
    if band0 != Band::Upper || (q0 - channels.q0).abs() > ALIAS_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "channel set built for q0 = {} (upper band), run used q = {q0} on the {band0} band",
            channels.q0
        )));
    }
    if !result.passage.cleared {
        return Err(Error::ScatteringIncomplete("potential support still overlaps the wave packet".into()));
    }
    let coin = &result.coin;
    let diff = result.final_state.combine(
        Complex64::new(1.0, 0.0),
        &result.reference_state,
        Complex64::new(-1.0, 0.0),
    )?;
    // The window holds the whole field of both runs, so the taper truncates nothing.
    let projector = Projector::new(result.window.0, result.window.1);
    let incident_reference = projector.project(coin, &result.reference_state, wrap_phase(q0), Band::Upper);
    if incident_reference == 0.0 {
        return Err(Error::InvalidParameter("reference field has no weight at the carrier".into()));
    }

    let lab: Vec<(f64, Band)> = channels.channels.iter().map(|c| (wrap_phase(c.q), c.band)).collect();
    let same = |x: (f64, Band), y: (f64, Band)| {
        x.1 == y.1 && wrap_phase(x.0 - y.0).abs() < ALIAS_TOLERANCE
    };
    let incident_lab = (wrap_phase(q0), Band::Upper);

    let mut leakage_floor: f64 = 0.0;
    let mut measured = Vec::with_capacity(lab.len());
    for (k, (ch, &(lab_q, band))) in channels.channels.iter().zip(&lab).enumerate() {
        let aliased_with_incident = same((lab_q, band), incident_lab);
        let alias_group = (0..k).find(|&j| same(lab[j], (lab_q, band))).unwrap_or(k);
        if !aliased_with_incident {
            leakage_floor = leakage_floor.max(projector.project(coin, &result.reference_state, lab_q, band) / incident_reference);
        }
        let raw_amplitude = projector.project(coin, &diff, lab_q, band) / incident_reference;
        measured.push(MeasuredChannel {
            alpha: ch.alpha,
            band,
            q: ch.q,
            lab_q,
            aliased_with_incident,
            alias_group,
            raw_amplitude,
            amplitude: raw_amplitude,
        });
    }
    for m in &mut measured {
        if m.raw_amplitude < 10.0 * leakage_floor {
            m.amplitude = 0.0;
        }
    }
    Ok(ChannelMeasurement { channels: measured, leakage_floor, incident_reference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{enumerate_channels, group_velocity, MovingFrameParams, DEFAULT_ALPHA_RANGE};
    use crate::potentials::{KKMultiPole, Shape};

    fn coin() -> CoinConfig {
        CoinConfig::new(0.95 * PI / 2.0).unwrap()
    }

    fn zero_config(steps: u64, excitation: Excitation) -> ExperimentConfig {
        let potential = DriftingPotential::new(Shape::zero(), 0.2).unwrap();
        ExperimentConfig::new(coin(), potential, steps, excitation)
    }

    fn kk(drift: f64) -> DriftingPotential {
        let pole = KKMultiPole::single(Complex64::new(0.0, -1.0), Complex64::new(90.0, 1.0), 2).unwrap();
        DriftingPotential::new(Shape::MultiPole(pole), drift).unwrap()
    }

    #[test]
    fn zero_potential_has_zero_residual() {
        let res = run_pair(&zero_config(40, Excitation::Delta { site: 0 })).unwrap();
        assert_eq!(res.final_residual, 0.0);
        assert!(res.residuals.iter().all(|r| r.1 == 0.0));
        assert_eq!(res.residuals.len(), 41);
        assert!(res.difference.unwrap().values.iter().all(|q| *q == 0.0));
        assert_eq!(res.final_state, res.reference_state);
    }

    #[test]
    fn auto_window_contains_light_cone() {
        let cfg = zero_config(30, Excitation::Delta { site: 5 });
        assert_eq!(cfg.window_bounds().unwrap(), (5 - 32, 5 + 32));
        let res = run_pair(&cfg).unwrap();
        let p = res.power.unwrap();
        let last = p.row(p.rows() - 1);
        assert_eq!(last[0], 0.0);
        assert_eq!(last[last.len() - 1], 0.0);
    }

    #[test]
    fn wavepacket_is_normalised() {
        let s = make_wavepacket(&coin(), 1.0, 6.5, 3, Band::Lower).unwrap();
        assert!((s.total_power() - 1.0).abs() < 1e-12);
        assert!(make_wavepacket(&coin(), 1.0, 1.5, 0, Band::Upper).is_err());
        assert!(make_wavepacket(&coin(), 3.2, 5.0, 0, Band::Upper).is_err());
    }

    #[test]
    fn wavepacket_centroid_moves_at_group_velocity() {
        let c = CoinConfig::new(PI / 3.0).unwrap();
        for (q, band) in [(PI / 2.0, Band::Upper), (0.8, Band::Lower)] {
            let mut cfg = zero_config(50, Excitation::WavePacket { q, width: 10.0, center: 0, band });
            cfg.coin = c;
            let res = run_pair(&cfg).unwrap();
            let s = &res.final_state;
            let centroid: f64 = s.sites().zip(s.power_density()).map(|(n, p)| n as f64 * p).sum::<f64>() / s.total_power();
            let expected = group_velocity(&c, q, band);
            assert!((centroid / 50.0 - expected).abs() < 0.05 * expected.abs(), "{centroid} vs {expected}");
        }
    }

    #[test]
    fn passage_check_rejects_short_runs() {
        let cfg = ExperimentConfig::new(coin(), kk(0.2), 600, Excitation::Delta { site: 0 });
        assert!(matches!(run_pair(&cfg), Err(Error::ScatteringIncomplete(_))));
        let needed = min_passage_steps(&cfg).unwrap();
        let mut ok = cfg.clone();
        ok.steps = needed;
        assert!(ok.passage().cleared);
        ok.steps = needed - 1;
        assert!(!ok.passage().cleared);
    }

    #[test]
    fn overflow_reports_step() {
        let gain = DriftingPotential::new(
            Shape::Tabulated(crate::potentials::Tabulated::new(vec![-1e3, 1e3], vec![Complex64::new(0.0, 3.0); 2]).unwrap()),
            0.0,
        )
        .unwrap();
        let mut cfg = ExperimentConfig::new(coin(), gain, 100, Excitation::Delta { site: 0 });
        cfg.require_passage = false;
        match run_pair(&cfg) {
            Err(Error::Overflow { step, .. }) => assert!(step > 1 && step < 100),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn record_stride_and_crop() {
        let mut cfg = zero_config(10, Excitation::Delta { site: 0 });
        cfg.record = RecordSpec { power: true, difference: false, fields: true, stride: 4, sites: Some((-3, 3)) };
        let res = run_pair(&cfg).unwrap();
        let p = res.power.unwrap();
        assert_eq!(p.steps, vec![0, 4, 8, 10]);
        assert_eq!(p.width(), 7);
        assert!(res.difference.is_none());
        assert_eq!(res.u_field.unwrap().get(0, 0), Some(Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn rerun_is_bit_identical() {
        let mut cfg = ExperimentConfig::new(coin(), kk(0.2), 300, Excitation::Delta { site: 0 });
        cfg.require_passage = false;
        cfg.record = RecordSpec::none();
        let a = run_pair(&cfg).unwrap();
        let b = run_pair(&cfg).unwrap();
        assert_eq!(a.residuals, b.residuals);
        assert_eq!(a.final_state, b.final_state);
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI + 0.5) - (-PI + 0.5)).abs() < 1e-12);
        assert!((wrap_phase(0.3 - 4.0 * PI) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn channel_analysis_of_zero_potential_is_silent() {
        let exc = Excitation::WavePacket { q: PI / 2.0, width: 10.0, center: 0, band: Band::Upper };
        let res = run_pair(&zero_config(200, exc)).unwrap();
        let params = MovingFrameParams::new(coin().beta(), 0.2).unwrap();
        let set = enumerate_channels(&params, PI / 2.0, DEFAULT_ALPHA_RANGE).unwrap();
        let m = transmitted_channel_analysis(&res, &set).unwrap();
        assert_eq!(m.channels.len(), 22);
        assert!(m.channels.iter().all(|c| c.raw_amplitude < 1e-10));
        assert!(m.channels.iter().any(|c| c.aliased_with_incident));
    }

    #[test]
    fn channel_analysis_needs_a_carrier() {
        let res = run_pair(&zero_config(5, Excitation::Delta { site: 0 })).unwrap();
        let params = MovingFrameParams::new(coin().beta(), 0.2).unwrap();
        let set = enumerate_channels(&params, PI / 2.0, -1..=1).unwrap();
        assert!(transmitted_channel_analysis(&res, &set).is_err());
    }
}
