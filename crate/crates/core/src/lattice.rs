//! Two-amplitude lattice state and the mesh-lattice step map.
//!
//! One step advances the short-loop (`u`) and long-loop (`v`) amplitudes as
//!
//! ```text
//! u[n](m+1) = (cos b * u[n+1](m) + i sin b * v[n+1](m)) * exp(-i V[n, m+1])
//! v[n](m+1) =  cos b * v[n-1](m) + i sin b * u[n-1](m)
//! ```
//!
//! on a finite window of sites. Amplitudes outside the window are zero, so
//! callers size the window to contain the light cone of the excitation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default bound on `max |u|, |v|` before an evolution is aborted.
pub const DEFAULT_OVERFLOW_GUARD: f64 = 1e12;

/// Coupler mixing angle of the two fiber loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinConfig {
    beta: f64,
    cos: f64,
    sin: f64,
}

impl CoinConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 || beta >= PI {
            return Err(Error::InvalidParameter(format!(
                "coupling angle beta must lie in (0, pi), got {beta}"
            )));
        }
        Ok(Self { beta, cos: beta.cos(), sin: beta.sin() })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }
}

/// Band label for the two quasi-energy bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Upper,
    Lower,
}

impl Band {
    pub const BOTH: [Band; 2] = [Band::Upper, Band::Lower];

    pub fn sign(self) -> f64 {
        match self {
            Band::Upper => 1.0,
            Band::Lower => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Band::Upper => "+",
            Band::Lower => "-",
        }
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "upper" | "plus" => Ok(Band::Upper),
            "-" | "lower" | "minus" => Ok(Band::Lower),
            other => Err(Error::InvalidParameter(format!("unknown band '{other}'"))),
        }
    }
}

/// Complex space-time potential `V[n, m]` seen by the short loop.
pub trait PotentialField: Sync {
    fn value(&self, site: i64, step: u64) -> Complex64;

    /// True when the field is known to vanish everywhere; lets the stepper
    /// skip the modulator factor.
    fn is_identically_zero(&self) -> bool {
        false
    }
}

/// `V = 0` everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl PotentialField for ZeroPotential {
    fn value(&self, _site: i64, _step: u64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn is_identically_zero(&self) -> bool {
        true
    }
}

impl<F> PotentialField for F
where
    F: Fn(i64, u64) -> Complex64 + Sync,
{
    fn value(&self, site: i64, step: u64) -> Complex64 {
        self(site, step)
    }
}

/// Pulse amplitudes on the window `origin .. origin + len` at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    step: u64,
    origin: i64,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl LatticeState {
    pub fn new(step: u64, origin: i64, u: Vec<Complex64>, v: Vec<Complex64>) -> Result<Self> {
        if u.is_empty() || v.is_empty() {
            return Err(Error::EmptyState);
        }
        if u.len() != v.len() {
            return Err(Error::InvalidParameter(format!(
                "u and v must have equal length ({} != {})",
                u.len(),
                v.len()
            )));
        }
        Ok(Self { step, origin, u, v })
    }

    /// All-zero state covering sites `lo..=hi` at step 0.
    pub fn zeros(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::EmptyState);
        }
        let len = (hi - lo + 1) as usize;
        let zero = Complex64::new(0.0, 0.0);
        Self::new(0, lo, vec![zero; len], vec![zero; len])
    }

    /// `u = v = 1` at `site`, zero elsewhere on `lo..=hi`.
    pub fn delta(site: i64, lo: i64, hi: i64) -> Result<Self> {
        if site < lo || site > hi {
            return Err(Error::InvalidParameter(format!(
                "excitation site {site} outside window [{lo}, {hi}]"
            )));
        }
        let mut s = Self::zeros(lo, hi)?;
        let k = (site - lo) as usize;
        s.u[k] = Complex64::new(1.0, 0.0);
        s.v[k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Last stored site index.
    pub fn last_site(&self) -> i64 {
        self.origin + self.u.len() as i64 - 1
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.u.len() as i64).map(move |k| self.origin + k)
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    pub fn v(&self) -> &[Complex64] {
        &self.v
    }

    /// `(u, v)` at `site`, zero outside the window.
    pub fn amplitudes_at(&self, site: i64) -> (Complex64, Complex64) {
        let k = site - self.origin;
        if k < 0 || k >= self.u.len() as i64 {
            let zero = Complex64::new(0.0, 0.0);
            return (zero, zero);
        }
        (self.u[k as usize], self.v[k as usize])
    }

    /// `|u|^2 + |v|^2` per stored site.
    pub fn power_density(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }

    pub fn total_power(&self) -> f64 {
        self.u.iter().chain(&self.v).map(|a| a.norm_sqr()).sum()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.u.iter().chain(&self.v).map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Range of sites holding a nonzero amplitude, if any.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = |k: &usize| self.u[*k] != Complex64::new(0.0, 0.0) || self.v[*k] != Complex64::new(0.0, 0.0);
        let first = (0..self.u.len()).find(nz)?;
        let last = (0..self.u.len()).rev().find(nz)?;
        Some((self.origin + first as i64, self.origin + last as i64))
    }

    /// Copy onto the window `lo..=hi`; sites outside the old window are zero
    /// and stored sites outside the new window are dropped.
    pub fn reframed(&self, lo: i64, hi: i64) -> Result<Self> {
        let mut out = Self::zeros(lo, hi)?;
        out.step = self.step;
        for (k, n) in (lo..=hi).enumerate() {
            let (a, b) = self.amplitudes_at(n);
            out.u[k] = a;
            out.v[k] = b;
        }
        Ok(out)
    }

    /// Multiply every amplitude by `factor`.
    pub fn scaled(mut self, factor: Complex64) -> Self {
        for a in self.u.iter_mut().chain(self.v.iter_mut()) {
            *a *= factor;
        }
        self
    }

    /// `a * self + b * other` on a common window.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.origin != other.origin || self.len() != other.len() {
            return Err(Error::InvalidParameter("states live on different windows".into()));
        }
        let u = self.u.iter().zip(&other.u).map(|(x, y)| a * x + b * y).collect();
        let v = self.v.iter().zip(&other.v).map(|(x, y)| a * x + b * y).collect();
        Self::new(self.step, self.origin, u, v)
    }
}

/// Advance `state` by one step.
pub fn step(state: &LatticeState, coin: &CoinConfig, potential: &dyn PotentialField) -> Result<LatticeState> {
    if state.is_empty() {
        return Err(Error::EmptyState);
    }
    let mut next = state.clone();
    step_into(state, &mut next, coin, potential)?;
    Ok(next)
}

/// One step from `src` into `dst`, which must share the window of `src`.
///
/// Only sites within one of the current support are touched; the modulator
/// factor is skipped where the new `u` is exactly zero.
fn step_into(
    src: &LatticeState,
    dst: &mut LatticeState,
    coin: &CoinConfig,
    potential: &dyn PotentialField,
) -> Result<()> {
    let len = src.len();
    let (c, s) = (coin.cos(), coin.sin());
    let is = I * s;
    let zero = Complex64::new(0.0, 0.0);
    let next_step = src.step + 1;

    dst.origin = src.origin;
    dst.step = next_step;
    let (lo, hi) = match src.support() {
        Some((a, b)) => {
            let a = (a - src.origin - 1).max(0) as usize;
            let b = ((b - src.origin + 1) as usize).min(len - 1);
            (a, b)
        }
        None => {
            dst.u.fill(zero);
            dst.v.fill(zero);
            return Ok(());
        }
    };
    dst.u[..lo].fill(zero);
    dst.v[..lo].fill(zero);
    dst.u[hi + 1..].fill(zero);
    dst.v[hi + 1..].fill(zero);

    for k in lo..=hi {
        dst.u[k] = if k + 1 < len { c * src.u[k + 1] + is * src.v[k + 1] } else { zero };
        dst.v[k] = if k > 0 { c * src.v[k - 1] + is * src.u[k - 1] } else { zero };
    }

    if !potential.is_identically_zero() {
        for k in lo..=hi {
            if dst.u[k] == zero {
                continue;
            }
            let site = src.origin + k as i64;
            let value = potential.value(site, next_step);
            if !value.is_finite() {
                return Err(Error::NonFinitePotential { site, step: next_step, value: value.to_string() });
            }
            dst.u[k] *= (-I * value).exp();
        }
    }
    Ok(())
}

/// Repeated stepping with a reusable scratch buffer and an overflow guard.
#[derive(Debug, Clone)]
pub struct Evolver {
    current: LatticeState,
    scratch: LatticeState,
    options: EvolveOptions,
}

impl Evolver {
    pub fn new(state: LatticeState, options: EvolveOptions) -> Result<Self> {
        if state.is_empty() {
            return Err(Error::EmptyState);
        }
        let scratch = state.clone();
        Ok(Self { current: state, scratch, options })
    }

    pub fn state(&self) -> &LatticeState {
        &self.current
    }

    pub fn into_state(self) -> LatticeState {
        self.current
    }

    pub fn advance(&mut self, coin: &CoinConfig, potential: &dyn PotentialField) -> Result<&LatticeState> {
        step_into(&self.current, &mut self.scratch, coin, potential)?;
        std::mem::swap(&mut self.current, &mut self.scratch);
        let max_amplitude = self.current.max_amplitude();
        if !(max_amplitude <= self.options.overflow_guard) {
            return Err(Error::Overflow {
                step: self.current.step,
                max_amplitude,
                guard: self.options.overflow_guard,
            });
        }
        Ok(&self.current)
    }
}

/// Evolution settings beyond coin and potential.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub overflow_guard: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { overflow_guard: DEFAULT_OVERFLOW_GUARD }
    }
}

/// Apply [`step`] `steps` times. The recorder, if any, sees the state after
/// every step.
pub fn evolve(
    state: LatticeState,
    coin: &CoinConfig,
    potential: &dyn PotentialField,
    steps: u64,
    options: &EvolveOptions,
    mut recorder: Option<&mut dyn FnMut(&LatticeState)>,
) -> Result<LatticeState> {
    if steps == 0 {
        return Err(Error::InvalidParameter("evolve needs at least one step".into()));
    }
    let mut evolver = Evolver::new(state, *options)?;
    for _ in 0..steps {
        let current = evolver.advance(coin, potential)?;
        if let Some(rec) = recorder.as_mut() {
            rec(current);
        }
    }
    Ok(evolver.into_state())
}

/// Lab-frame quasi-energy `E(q)` and Bloch amplitudes `(U, V)` of `band`.
pub fn bloch_eigenpair(coin: &CoinConfig, q: f64, band: Band) -> (f64, (Complex64, Complex64)) {
    let energy = band.sign() * (coin.cos() * q.cos()).clamp(-1.0, 1.0).acos();
    let eiq = Complex64::from_polar(1.0, q);
    let upper = I * coin.sin() * eiq;
    let lower = Complex64::from_polar(1.0, -energy) - coin.cos() * eiq;
    (energy, (upper, lower))
}

/// Plane wave `(U, V) e^{iqn}` of `band` on `lo..=hi`.
pub fn bloch_plane_wave(coin: &CoinConfig, q: f64, band: Band, lo: i64, hi: i64) -> Result<LatticeState> {
    let (_, (a, b)) = bloch_eigenpair(coin, q, band);
    let mut state = LatticeState::zeros(lo, hi)?;
    for (k, n) in (lo..=hi).enumerate() {
        let phase = Complex64::from_polar(1.0, q * n as f64);
        state.u[k] = a * phase;
        state.v[k] = b * phase;
    }
    Ok(state)
}
