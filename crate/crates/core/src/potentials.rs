//! Drifting complex potentials and their spatial Fourier spectra.
//!
//! Spectra follow the convention `phi_hat(q) = ∫ dx phi(x) e^{-iqx}`. A
//! multi-pole shape with every pole in the upper half plane is analytic in
//! the lower half plane, so its spectrum vanishes for `q >= 0`; poles in the
//! lower half plane null the `q <= 0` side instead.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lattice::PotentialField;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative level below which a shape is treated as absent.
pub const SUPPORT_THRESHOLD: f64 = 1e-4;

/// Frequency spacing targeted by zero-padding in [`spectrum_fft`].
const MAX_FFT_DQ: f64 = 1e-3;
const MAX_FFT_LEN: usize = 1 << 22;

/// One term `A (x - x_l)^(-h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub amplitude: Complex64,
    pub position: Complex64,
    pub order: u32,
}

impl Pole {
    pub fn new(amplitude: Complex64, position: Complex64, order: u32) -> Self {
        Self { amplitude, position, order }
    }

    fn eval(&self, x: f64) -> Complex64 {
        self.amplitude * (Complex64::new(x, 0.0) - self.position).powi(-(self.order as i32))
    }

    /// Closed-contour value of `∫ A (x - x_l)^(-h) e^{-iqx} dx`.
    fn spectrum(&self, q: f64) -> Complex64 {
        let upper = self.position.im > 0.0;
        // e^{-iqx} decays in the lower half plane for q > 0.
        let encloses = if upper { q < 0.0 } else { q > 0.0 };
        if !encloses {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.order - 1;
        let factorial: f64 = (1..=k).map(f64::from).product();
        let residue = (-I * q).powi(k as i32) / factorial * (-I * q * self.position).exp();
        let orientation = if upper { 1.0 } else { -1.0 };
        2.0 * PI * I * orientation * self.amplitude * residue
    }
}

/// Kramers–Kronig multi-pole shape `phi(x) = sum_l A_l (x - x_l)^(-h_l)`.
///
/// All poles sit strictly on one side of the real axis and every order is at
/// least two. An empty pole list is the zero shape.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KKMultiPole {
    poles: Vec<Pole>,
}

impl KKMultiPole {
    pub fn new(poles: Vec<Pole>) -> Result<Self> {
        let mut side = None;
        for (l, p) in poles.iter().enumerate() {
            if p.order < 2 {
                return Err(Error::InvalidParameter(format!(
                    "pole {l}: order {} < 2 does not decay faster than 1/x",
                    p.order
                )));
            }
            if !p.amplitude.is_finite() || !p.position.is_finite() {
                return Err(Error::InvalidParameter(format!("pole {l}: non-finite parameters")));
            }
            if p.position.im == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "pole {l} at {} lies on the real axis",
                    p.position
                )));
            }
            let upper = p.position.im > 0.0;
            match side {
                None => side = Some(upper),
                Some(s) if s != upper => {
                    return Err(Error::InvalidParameter(
                        "poles must all lie in the same half of the complex plane".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(Self { poles })
    }

    pub fn single(amplitude: Complex64, position: Complex64, order: u32) -> Result<Self> {
        Self::new(vec![Pole::new(amplitude, position, order)])
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    /// `Some(true)` for upper-half-plane poles, `None` for the zero shape.
    pub fn upper_half(&self) -> Option<bool> {
        self.poles.first().map(|p| p.position.im > 0.0)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.poles.iter().map(|p| p.eval(x)).sum()
    }

    /// Residue evaluation of `phi_hat(q)`. Exactly zero on the null
    /// half-line, including `q = 0`.
    pub fn spectrum(&self, q: f64) -> Complex64 {
        self.poles.iter().map(|p| p.spectrum(q)).sum()
    }

    /// Upper bound on `|phi(x)|` for `x` at least `r` away from every pole's
    /// real part.
    fn tail_bound(&self, r: f64) -> f64 {
        self.poles.iter().map(|p| p.amplitude.norm() * r.powi(-(p.order as i32))).sum()
    }

    fn real_span(&self) -> Option<(f64, f64)> {
        let lo = self.poles.iter().map(|p| p.position.re).reduce(f64::min)?;
        let hi = self.poles.iter().map(|p| p.position.re).reduce(f64::max)?;
        Some((lo, hi))
    }
}

/// Samples `x_k -> phi(x_k)` with linear interpolation, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    values: Vec<Complex64>,
}

impl Tabulated {
    pub fn new(xs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::InvalidParameter(
                "tabulated shape needs at least two (x, value) samples of equal count".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("tabulated x grid must be finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated values must be finite".into()));
        }
        Ok(Self { xs, values })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.xs.len();
        if !(x >= self.xs[0] && x <= self.xs[n - 1]) {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.xs.partition_point(|&t| t <= x);
        if k >= n {
            return self.values[n - 1];
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let t = (x - x0) / (x1 - x0);
        self.values[k - 1] * (1.0 - t) + self.values[k] * t
    }
}

/// Shape function `x -> phi(x)` of a drifting potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    MultiPole(KKMultiPole),
    /// `Re(phi)` of a multi-pole shape: a Hermitian potential.
    RealPart(KKMultiPole),
    Tabulated(Tabulated),
}

impl Shape {
    pub fn zero() -> Self {
        Shape::MultiPole(KKMultiPole::default())
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Shape::MultiPole(p) => p.eval(x),
            Shape::RealPart(p) => Complex64::new(p.eval(x).re, 0.0),
            Shape::Tabulated(t) => t.eval(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Shape::MultiPole(p) | Shape::RealPart(p) => p.poles.is_empty(),
            Shape::Tabulated(t) => t.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)),
        }
    }

    /// Closed-form spectrum where one exists.
    pub fn spectrum_analytic(&self, q: f64) -> Option<Complex64> {
        match self {
            Shape::MultiPole(p) => Some(p.spectrum(q)),
            // F[conj phi](q) = conj(phi_hat(-q)).
            Shape::RealPart(p) => Some(0.5 * (p.spectrum(q) + p.spectrum(-q).conj())),
            Shape::Tabulated(_) => None,
        }
    }

    /// Smallest `[x_lo, x_hi]` outside which `|phi| <= rel * max |phi|`.
    pub fn support(&self, rel: f64) -> Option<(f64, f64)> {
        match self {
            Shape::MultiPole(p) | Shape::RealPart(p) => {
                let (lo, hi) = p.real_span()?;
                let dx = 0.05;
                let probe = |a: f64, b: f64| {
                    let n = ((b - a) / dx).ceil() as usize;
                    (0..=n).map(move |k| a + (b - a) * k as f64 / n.max(1) as f64)
                };
                let peak = probe(lo - 50.0, hi + 50.0).map(|x| self.eval(x).norm()).fold(0.0, f64::max);
                if peak == 0.0 {
                    return None;
                }
                let threshold = rel * peak;
                let mut reach = 1.0;
                while p.tail_bound(reach) > threshold {
                    reach *= 2.0;
                }
                let mut found: Option<(f64, f64)> = None;
                for x in probe(lo - reach, hi + reach) {
                    if self.eval(x).norm() > threshold {
                        found = Some(match found {
                            None => (x, x),
                            Some((a, _)) => (a, x),
                        });
                    }
                }
                found
            }
            Shape::Tabulated(t) => {
                let peak = t.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if peak == 0.0 {
                    return None;
                }
                let above: Vec<usize> =
                    (0..t.values.len()).filter(|&k| t.values[k].norm() > rel * peak).collect();
                let first = *above.first()?;
                let last = *above.last()?;
                // Linear interpolation reaches zero only at the neighbouring samples.
                let lo = t.xs[first.saturating_sub(1)];
                let hi = t.xs[(last + 1).min(t.xs.len() - 1)];
                Some((lo, hi))
            }
        }
    }

    /// Grid that resolves this shape for [`spectrum_fft`].
    pub fn default_fft_grid(&self) -> FftGrid {
        match self {
            Shape::MultiPole(p) | Shape::RealPart(p) => {
                let (lo, hi) = p.real_span().unwrap_or((0.0, 0.0));
                let centre = 0.5 * (lo + hi);
                // 2^20 samples at spacing 1/4: Nyquist 4*pi, half-width 131072.
                let half = 131_072.0;
                FftGrid { x_min: centre - half, x_max: centre + half, samples: 1 << 20 }
            }
            Shape::Tabulated(t) => {
                let (lo, hi) = (t.xs[0], t.xs[t.xs.len() - 1]);
                let width = hi - lo;
                let min_dx = t.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                let span = 4.0 * width;
                let needed = (span / min_dx).max(1024.0);
                let samples = (needed as usize).next_power_of_two().clamp(1024, 1 << 22);
                let centre = 0.5 * (lo + hi);
                FftGrid { x_min: centre - 0.5 * span, x_max: centre + 0.5 * span, samples }
            }
        }
    }
}

/// Anything that can be sampled as `x -> phi(x)`.
pub trait ShapeFunction {
    fn eval_at(&self, x: f64) -> Complex64;
}

impl ShapeFunction for Shape {
    fn eval_at(&self, x: f64) -> Complex64 {
        self.eval(x)
    }
}

impl<F: Fn(f64) -> Complex64> ShapeFunction for F {
    fn eval_at(&self, x: f64) -> Complex64 {
        self(x)
    }
}

/// Potential `V[n, m] = phi(n + m * v)`: the shape drifts toward lower `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftingPotential {
    shape: Shape,
    drift: f64,
}

impl DriftingPotential {
    pub fn new(shape: Shape, drift: f64) -> Result<Self> {
        if !drift.is_finite() || drift < 0.0 {
            return Err(Error::InvalidParameter(format!("drift speed must be finite and >= 0, got {drift}")));
        }
        Ok(Self { shape, drift })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Shape coordinate of lattice site `site` at step `step`.
    pub fn shape_coordinate(&self, site: i64, step: u64) -> f64 {
        site as f64 + step as f64 * self.drift
    }
}

impl PotentialField for DriftingPotential {
    fn value(&self, site: i64, step: u64) -> Complex64 {
        self.shape.eval(self.shape_coordinate(site, step))
    }

    fn is_identically_zero(&self) -> bool {
        self.shape.is_zero()
    }
}

/// Real part of `p`: the Hermitian truncation of a Kramers–Kronig shape.
pub fn hermitian_truncation(p: &KKMultiPole) -> Shape {
    Shape::RealPart(p.clone())
}

/// `count` poles at `base + l` (`l = 1..=count`) with `|A_l|` uniform in
/// `amp_range` and `arg A_l` uniform in `(0, 2 pi)`.
pub fn random_multipole(
    count: usize,
    base: Complex64,
    amp_range: (f64, f64),
    order: u32,
    seed: u64,
) -> Result<KKMultiPole> {
    if count == 0 {
        return Err(Error::InvalidParameter("random multipole needs at least one pole".into()));
    }
    if base.im == 0.0 {
        return Err(Error::InvalidParameter("pole base must have a nonzero imaginary part".into()));
    }
    let (a, b) = amp_range;
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid amplitude range ({a}, {b})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poles = (1..=count)
        .map(|l| {
            let modulus = rng.gen_range(a..b);
            let phase = rng.gen_range(0.0..2.0 * PI);
            Pole::new(Complex64::from_polar(modulus, phase), base + l as f64, order)
        })
        .collect();
    KKMultiPole::new(poles)
}

/// Uniform sample grid `x_k = x_min + k * (x_max - x_min) / samples`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FftGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub samples: usize,
}

impl FftGrid {
    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.samples as f64
    }

    /// Largest `|q|` the grid represents.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }
}

/// Output of [`spectrum_fft`].
#[derive(Debug, Clone)]
pub struct FftSpectrum {
    pub q: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `max(|phi(x_min)|, |phi(x_max)|)`.
    pub edge_magnitude: f64,
}

impl FftSpectrum {
    /// The shape was not negligible (`>= 1e-8`) at the grid edges.
    pub fn aliasing_risk(&self) -> bool {
        self.edge_magnitude >= 1e-8
    }
}

/// FFT approximation of `phi_hat(q) = ∫ dx phi(x) e^{-iqx}` at each `q`.
///
/// The sampled sum `dx * sum_k phi(x_k) e^{-i q x_k}` is evaluated on the
/// FFT frequency grid, zero-padded to a spacing of at most `1e-3`. Between grid points
/// the spectrum is interpolated linearly after removing the carrier phase
/// `e^{-i q x_c}` of the shape's peak position `x_c`.
pub fn spectrum_fft<S: ShapeFunction + ?Sized>(shape: &S, grid: &FftGrid, q_list: &[f64]) -> Result<FftSpectrum> {
    let n = grid.samples;
    if n < 1024 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("FFT size must be a power of two >= 1024, got {n}")));
    }
    if !(grid.x_max > grid.x_min) || !grid.x_min.is_finite() || !grid.x_max.is_finite() {
        return Err(Error::InvalidParameter("FFT grid needs finite x_min < x_max".into()));
    }
    let dx = grid.spacing();
    // Zero-pad until the frequency grid is fine enough for interpolation.
    let mut padded = n;
    while 2.0 * PI / (padded as f64 * dx) > MAX_FFT_DQ && padded < MAX_FFT_LEN {
        padded *= 2;
    }
    let dq = 2.0 * PI / (padded as f64 * dx);
    let half = (padded / 2) as i64;
    let q_top = (half - 1) as f64 * dq;
    if let Some(q) = q_list.iter().find(|q| !(q.abs() <= q_top)) {
        return Err(Error::InvalidParameter(format!("q = {q} outside the grid's band |q| <= {q_top}")));
    }

    let mut buf: Vec<Complex64> = (0..n).map(|k| shape.eval_at(grid.x_min + k as f64 * dx)).collect();
    buf.resize(padded, Complex64::new(0.0, 0.0));
    let edge_magnitude = shape.eval_at(grid.x_min).norm().max(shape.eval_at(grid.x_max).norm());
    if edge_magnitude >= 1e-8 {
        log::warn!(
            "shape is {edge_magnitude:e} at the FFT grid edges [{}, {}]; spectrum may alias",
            grid.x_min,
            grid.x_max
        );
    }
    let peak = buf
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let x_c = grid.x_min + peak as f64 * dx;

    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);

    // Demodulated spectrum on q_j = j * dq for j in [-n/2, n/2).
    let demod = |j: i64| -> Complex64 {
        let idx = if j < 0 { (j + padded as i64) as usize } else { j as usize };
        let q = j as f64 * dq;
        buf[idx] * dx * (-I * q * (grid.x_min - x_c)).exp()
    };

    let values = q_list
        .iter()
        .map(|&q| {
            let pos = q / dq;
            let j0 = pos.floor() as i64;
            let t = pos - j0 as f64;
            let d = if t == 0.0 { demod(j0) } else { demod(j0) * (1.0 - t) + demod(j0 + 1) * t };
            d * (-I * q * x_c).exp()
        })
        .collect();

    Ok(FftSpectrum { q: q_list.to_vec(), values, edge_magnitude })
}

/// `phi_hat(q)`, analytic when available, otherwise by FFT on the shape's
/// default grid.
pub fn spectrum(shape: &Shape, q_list: &[f64]) -> Result<Vec<Complex64>> {
    let analytic: Option<Vec<Complex64>> = q_list.iter().map(|&q| shape.spectrum_analytic(q)).collect();
    match analytic {
        Some(v) => Ok(v),
        None => Ok(spectrum_fft(shape, &shape.default_fft_grid(), q_list)?.values),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig3_pole() -> KKMultiPole {
        KKMultiPole::single(c(0.0, -1.0), c(90.0, 1.0), 2).unwrap()
    }

    #[test]
    fn fig3_pole_at_its_real_part() {
        let v = fig3_pole().eval(90.0);
        assert!((v - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_poles() {
        assert!(KKMultiPole::single(c(1.0, 0.0), c(0.0, 0.0), 2).is_err());
        assert!(KKMultiPole::single(c(1.0, 0.0), c(0.0, 1.0), 1).is_err());
        let mixed = vec![Pole::new(c(1.0, 0.0), c(0.0, 1.0), 2), Pole::new(c(1.0, 0.0), c(3.0, -1.0), 2)];
        assert!(KKMultiPole::new(mixed).is_err());
    }

    #[test]
    fn decays_beyond_outermost_pole() {
        let p = KKMultiPole::new(vec![
            Pole::new(c(0.3, 0.2), c(-4.0, 0.5), 2),
            Pole::new(c(-1.0, 0.7), c(6.0, 2.0), 3),
        ])
        .unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let x = 20.0 + 10.0 * k as f64;
            let m = p.eval(x).norm();
            assert!(m < prev);
            prev = m;
        }
        // Leading decay ~ |A| / x^2 from the order-2 term.
        let x = 1e5;
        let ratio = p.eval(x).norm() * x * x / c(0.3, 0.2).norm();
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn analytic_spectrum_null_half_line() {
        let p = fig3_pole();
        assert_eq!(p.spectrum(1.0), c(0.0, 0.0));
        assert_eq!(p.spectrum(0.0), c(0.0, 0.0));
        let q: f64 = -0.5;
        let expect = 2.0 * PI * c(0.0, -1.0) * q * (-I * q * c(90.0, 1.0)).exp();
        assert!((p.spectrum(q) - expect).norm() < 1e-14);

        let lower = KKMultiPole::single(c(1.0, 0.0), c(3.0, -2.0), 2).unwrap();
        assert_eq!(lower.spectrum(-0.7), c(0.0, 0.0));
        assert!(lower.spectrum(0.7).norm() > 0.0);
    }

    #[test]
    fn gaussian_fft_matches_closed_form() {
        let gauss = |x: f64| c((-x * x).exp(), 0.0);
        let grid = FftGrid { x_min: -32.0, x_max: 32.0, samples: 1024 };
        let qs: Vec<f64> = (0..=100).map(|k| -5.0 + 0.1 * k as f64).collect();
        let spec = spectrum_fft(&gauss, &grid, &qs).unwrap();
        assert!(!spec.aliasing_risk());
        for (q, v) in qs.iter().zip(&spec.values) {
            let expect = PI.sqrt() * (-q * q / 4.0).exp();
            assert!((v - c(expect, 0.0)).norm() < 1e-6, "q = {q}: {v} vs {expect}");
        }
    }

    #[test]
    fn tabulated_gaussian_spectrum() {
        let xs: Vec<f64> = (0..=4000).map(|k| -20.0 + 0.01 * k as f64).collect();
        let vals = xs.iter().map(|x| c((-x * x).exp(), 0.0)).collect();
        let shape = Shape::Tabulated(Tabulated::new(xs, vals).unwrap());
        assert!(shape.spectrum_analytic(0.0).is_none());
        let qs = [-2.0, 0.0, 1.5];
        let got = spectrum(&shape, &qs).unwrap();
        for (q, v) in qs.iter().zip(&got) {
            let expect = PI.sqrt() * (-q * q / 4.0).exp();
            // Piecewise-linear samples: error ~ dx^2.
            assert!((v - c(expect, 0.0)).norm() < 1e-4, "q = {q}: {v} vs {expect}");
        }
    }

    #[test]
    fn fft_rejects_bad_grid() {
        let shape = Shape::MultiPole(fig3_pole());
        let grid = FftGrid { x_min: -10.0, x_max: 10.0, samples: 1000 };
        assert!(spectrum_fft(&shape, &grid, &[0.0]).is_err());
        let grid = FftGrid { x_min: -10.0, x_max: 10.0, samples: 1024 };
        assert!(spectrum_fft(&shape, &grid, &[1000.0]).is_err());
    }

    #[test]
    fn fft_flags_edge_leakage() {
        let shape = Shape::MultiPole(fig3_pole());
        let grid = FftGrid { x_min: 0.0, x_max: 200.0, samples: 1024 };
        let s = spectrum_fft(&shape, &grid, &[0.0]).unwrap();
        assert!(s.aliasing_risk());
    }

    #[test]
    fn hermitian_truncation_values() {
        let h = hermitian_truncation(&fig3_pole());
        assert!(h.eval(90.0).norm() < 1e-15);
        for k in 0..500 {
            let x = -100.0 + k as f64 * 0.7;
            assert_eq!(h.eval(x).im, 0.0);
        }
    }

    #[test]
    fn random_multipole_layout_and_determinism() {
        let base = c(90.0, 1.0);
        let a = random_multipole(25, base, (0.0, 0.5), 2, 11).unwrap();
        let b = random_multipole(25, base, (0.0, 0.5), 2, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.poles().len(), 25);
        for (l, p) in a.poles().iter().enumerate() {
            assert_eq!(p.position, c(91.0 + l as f64, 1.0));
            let m = p.amplitude.norm();
            assert!((0.0..0.5).contains(&m));
        }
        let other = random_multipole(25, base, (0.0, 0.5), 2, 12).unwrap();
        assert_ne!(a, other);
        let one = random_multipole(1, base, (0.0, 0.5), 2, 3).unwrap();
        assert_eq!(one.poles().len(), 1);
        assert!(random_multipole(3, c(1.0, 0.0), (0.0, 0.5), 2, 3).is_err());
    }

    #[test]
    fn drifting_potential_matches_shape() {
        let d = DriftingPotential::new(Shape::MultiPole(fig3_pole()), 0.2).unwrap();
        for (n, m) in [(0i64, 0u64), (10, 7), (-40, 300), (95, 1)] {
            assert_eq!(d.value(n, m), d.shape().eval(n as f64 + m as f64 * 0.2));
        }
        assert!(DriftingPotential::new(Shape::zero(), -0.1).is_err());
    }

    #[test]
    fn support_of_fig3_pole() {
        let (lo, hi) = Shape::MultiPole(fig3_pole()).support(SUPPORT_THRESHOLD).unwrap();
        // |phi| = 1 / ((x - 90)^2 + 1) exceeds 1e-4 for |x - 90| < ~99.99.
        assert!((lo - (90.0 - 99.995)).abs() < 0.1, "lo {lo}");
        assert!((hi - (90.0 + 99.995)).abs() < 0.1, "hi {hi}");
        assert!(Shape::zero().support(SUPPORT_THRESHOLD).is_none());
    }

    #[test]
    fn tabulated_interpolation() {
        let t = Tabulated::new(vec![0.0, 1.0, 3.0], vec![c(0.0, 0.0), c(2.0, 2.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(t.eval(0.5), c(1.0, 1.0));
        assert_eq!(t.eval(2.0), c(1.0, 1.0));
        assert_eq!(t.eval(-0.1), c(0.0, 0.0));
        assert_eq!(t.eval(3.5), c(0.0, 0.0));
        assert_eq!(t.eval(3.0), c(0.0, 0.0));
        assert!(Tabulated::new(vec![0.0, 0.0], vec![c(0.0, 0.0); 2]).is_err());
    }
}
