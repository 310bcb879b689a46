//! Lab-frame and moving-frame band structure, and scattering channels.
//!
//! In the frame `x = n + v m` comoving with a drifting potential the
//! quasi-energies are `eps(q) = q v ± acos(cos b cos q)`. For `v > cos b`
//! both bands increase strictly with `q`, so every channel equation
//! `eps_band(q) = eps_0 + 2 pi alpha` has exactly one real root.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{bloch_eigenpair, Band, CoinConfig};
use crate::roots::bisect;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Bisection tolerance on channel roots.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Default channel orders `alpha = -5..=5`.
pub const DEFAULT_ALPHA_RANGE: RangeInclusive<i32> = -5..=5;

/// Coin and drift speed of the comoving frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingFrameParams {
    pub coin: CoinConfig,
    pub drift: f64,
}

impl MovingFrameParams {
    pub fn new(beta: f64, drift: f64) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidParameter(format!("drift speed must be finite, got {drift}")));
        }
        Ok(Self { coin: CoinConfig::new(beta)?, drift })
    }

    /// `v - cos b`, the smallest slope of either band when positive.
    pub fn min_slope(&self) -> f64 {
        self.drift - self.coin.cos().abs()
    }

    /// Both bands strictly increasing: `v > |cos b|`.
    pub fn is_monotone(&self) -> bool {
        self.min_slope() > 0.0
    }
}

/// `E(q) = ± acos(cos b cos q)`.
pub fn lab_energy(coin: &CoinConfig, q: f64, band: Band) -> f64 {
    bloch_eigenpair(coin, q, band).0
}

/// `dE/dq`, bounded in magnitude by `|cos b|`.
pub fn group_velocity(coin: &CoinConfig, q: f64, band: Band) -> f64 {
    let c = coin.cos();
    let cc = c * q.cos();
    let denom = (1.0 - cc * cc).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    band.sign() * c * q.sin() / denom
}

/// `eps(q) = q v ± acos(cos b cos q)` with the principal `acos` branch.
pub fn quasi_energy(params: &MovingFrameParams, q: f64, band: Band) -> f64 {
    q * params.drift + lab_energy(&params.coin, q, band)
}

/// `d eps / dq = v + dE/dq`.
pub fn quasi_energy_slope(params: &MovingFrameParams, q: f64, band: Band) -> f64 {
    params.drift + group_velocity(&params.coin, q, band)
}

/// Moving-frame Bloch amplitudes
/// `(i sin b e^{iq(1-v)}, e^{-i eps} - cos b e^{iq(1-v)})`.
pub fn moving_bloch_amplitudes(params: &MovingFrameParams, q: f64, band: Band) -> (Complex64, Complex64) {
    let eps = quasi_energy(params, q, band);
    let carrier = Complex64::from_polar(1.0, q * (1.0 - params.drift));
    let f = I * params.coin.sin() * carrier;
    let g = Complex64::from_polar(1.0, -eps) - params.coin.cos() * carrier;
    (f, g)
}

/// One band sample of a dispersion table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    pub q: f64,
    pub eps_upper: f64,
    pub eps_lower: f64,
}

/// `eps_±` at `points` wavenumbers evenly spaced over `(-pi, pi]`.
pub fn band_table(params: &MovingFrameParams, points: usize) -> Vec<BandRow> {
    (1..=points)
        .map(|k| {
            let q = -PI + 2.0 * PI * k as f64 / points as f64;
            BandRow {
                q,
                eps_upper: quasi_energy(params, q, Band::Upper),
                eps_lower: quasi_energy(params, q, Band::Lower),
            }
        })
        .collect()
}

/// One outgoing scattering channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub alpha: i32,
    pub band: Band,
    /// Root of `eps_band(q) = eps_0 + 2 pi alpha`.
    pub q: f64,
    pub bloch: (Complex64, Complex64),
    /// `phi_hat(q - q_0)` once a potential is attached.
    pub born_weight: Option<Complex64>,
}

impl Channel {
    pub fn is_incident(&self) -> bool {
        self.alpha == 0 && self.band == Band::Upper
    }
}

/// Channels reached from an upper-band incident wave `q_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub params: MovingFrameParams,
    pub q0: f64,
    pub eps0: f64,
    pub channels: Vec<Channel>,
}

impl ChannelSet {
    pub fn incident(&self) -> Option<&Channel> {
        self.channels.iter().find(|c| c.is_incident())
    }

    /// `|eps_band(q) - eps_0 - 2 pi alpha|` for each channel.
    pub fn residuals(&self) -> Vec<f64> {
        self.channels
            .iter()
            .map(|c| {
                let target = self.eps0 + 2.0 * PI * c.alpha as f64;
                (quasi_energy(&self.params, c.q, c.band) - target).abs()
            })
            .collect()
    }
}

/// Find every channel root for `alpha` in `alphas` and both bands.
pub fn enumerate_channels(params: &MovingFrameParams, q0: f64, alphas: RangeInclusive<i32>) -> Result<ChannelSet> {
    if !params.is_monotone() {
        return Err(Error::ChannelSearch(format!(
            "drift v = {} does not exceed cos(beta) = {}; quasi-energies are not monotone and roots are not unique",
            params.drift,
            params.coin.cos()
        )));
    }
    if !(q0 > -PI && q0 <= PI) {
        return Err(Error::InvalidParameter(format!("incident wavenumber {q0} outside (-pi, pi]")));
    }
    let v = params.drift;
    let eps0 = quasi_energy(params, q0, Band::Upper);
    let mut channels = Vec::new();
    for alpha in alphas {
        let target = eps0 + 2.0 * PI * alpha as f64;
        for band in Band::BOTH {
            let q = if alpha == 0 && band == Band::Upper {
                q0
            } else {
                // |acos| <= pi bounds the root.
                let lo = (target - PI) / v - 1.0;
                let hi = (target + PI) / v + 1.0;
                bisect(|q| quasi_energy(params, q, band) - target, lo, hi, ROOT_TOLERANCE).map_err(|e| {
                    Error::ChannelSearch(format!("alpha = {alpha}, band {band}: {e}"))
                })?
            };
            channels.push(Channel {
                alpha,
                band,
                q,
                bloch: moving_bloch_amplitudes(params, q, band),
                born_weight: None,
            });
        }
    }
    Ok(ChannelSet { params: *params, q0, eps0, channels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> MovingFrameParams {
        MovingFrameParams::new(PI / 3.0, 0.8).unwrap()
    }

    #[test]
    fn quasi_energy_special_points() {
        for v in [0.0, 0.3, 2.0] {
            let p = MovingFrameParams::new(1.2, v).unwrap();
            assert!((quasi_energy(&p, 0.0, Band::Upper) - 1.2).abs() < 1e-15);
            assert!((quasi_energy(&p, 0.0, Band::Lower) + 1.2).abs() < 1e-15);
        }
        let e = quasi_energy(&fig2(), PI / 2.0, Band::Upper);
        assert!((e - (0.8 * PI / 2.0 + PI / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn group_velocity_extremes() {
        let coin = CoinConfig::new(0.95 * PI / 2.0).unwrap();
        assert!((group_velocity(&coin, PI / 2.0, Band::Upper) - coin.cos()).abs() < 1e-15);
        assert!((group_velocity(&coin, -PI / 2.0, Band::Upper) + coin.cos()).abs() < 1e-15);
        assert_eq!(group_velocity(&coin, 0.0, Band::Upper), 0.0);
    }

    #[test]
    fn static_amplitudes_at_zero_drift() {
        let p = MovingFrameParams::new(0.8, 0.0).unwrap();
        for q in [-2.0, 0.1, 1.3] {
            for band in Band::BOTH {
                let (f, g) = moving_bloch_amplitudes(&p, q, band);
                let (_, (u, v)) = bloch_eigenpair(&p.coin, q, band);
                assert!((f - u).norm() < 1e-15 && (g - v).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn half_pi_coin_amplitudes() {
        let p = MovingFrameParams::new(PI / 2.0, 0.3).unwrap();
        let q: f64 = 0.7;
        let (f, g) = moving_bloch_amplitudes(&p, q, Band::Upper);
        let eps = quasi_energy(&p, q, Band::Upper);
        assert!((f - I * Complex64::from_polar(1.0, q * 0.7)).norm() < 1e-15);
        assert!((g - Complex64::from_polar(1.0, -eps)).norm() < 1e-15);
    }

    #[test]
    fn incident_channel_is_exact() {
        let set = enumerate_channels(&fig2(), 0.5, -3..=3).unwrap();
        assert_eq!(set.channels.len(), 14);
        let inc = set.incident().unwrap();
        assert_eq!(inc.q, 0.5);
    }

    #[test]
    fn rejects_non_monotone_kinematics() {
        let p = MovingFrameParams::new(PI / 3.0, 0.4).unwrap();
        assert!(matches!(enumerate_channels(&p, 0.5, -1..=1), Err(Error::ChannelSearch(_))));
        assert!(enumerate_channels(&fig2(), 4.0, -1..=1).is_err());
    }

    #[test]
    fn band_table_covers_brillouin_zone() {
        let rows = band_table(&fig2(), 8);
        assert_eq!(rows.len(), 8);
        assert!((rows.last().unwrap().q - PI).abs() < 1e-15);
        assert!(rows[0].q > -PI);
    }
}
