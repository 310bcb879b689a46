//! First-order channel weights.
//!
//! To first order in the potential, the amplitude of channel `(alpha, band)`
//! is proportional to `phi_hat(q_alpha - q_0)`. The proportionality constant
//! is not computed, so weights are also reported relative to the largest one.

use num_complex::Complex64;

use crate::bands::ChannelSet;
use crate::error::Result;
use crate::lattice::Band;
use crate::potentials::{spectrum, Shape};

#[derive(Debug, Clone, PartialEq)]
pub struct BornChannel {
    pub alpha: i32,
    pub band: Band,
    pub q: f64,
    /// `q - q_0`.
    pub transfer: f64,
    pub weight: Complex64,
    /// `|weight| / max |weight|`, zero when every weight vanishes.
    pub relative: f64,
}

impl BornChannel {
    pub fn is_incident(&self) -> bool {
        self.alpha == 0 && self.band == Band::Upper
    }
}

/// Born weights for one channel set. Absolute scale is left undetermined.
#[derive(Debug, Clone, PartialEq)]
pub struct BornPrediction {
    pub incident_q: f64,
    pub channels: Vec<BornChannel>,
}

impl BornPrediction {
    /// Largest `|weight|` over channels other than the incident one.
    pub fn max_scattered_weight(&self) -> f64 {
        self.channels
            .iter()
            .filter(|c| !c.is_incident())
            .map(|c| c.weight.norm())
            .fold(0.0, f64::max)
    }

    /// Copy the weights onto the matching channels of `set`.
    pub fn apply_to(&self, set: &mut ChannelSet) {
        for (ch, born) in set.channels.iter_mut().zip(&self.channels) {
            debug_assert!(ch.alpha == born.alpha && ch.band == born.band);
            ch.born_weight = Some(born.weight);
        }
    }
}

/// `phi_hat(q_alpha - q_0)` for every channel, analytic where the shape
/// allows it, FFT otherwise.
pub fn born_weights(set: &ChannelSet, shape: &Shape) -> Result<BornPrediction> {
    let transfers: Vec<f64> = set.channels.iter().map(|c| c.q - set.q0).collect();
    let weights = spectrum(shape, &transfers)?;
    let max = weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let channels = set
        .channels
        .iter()
        .zip(transfers)
        .zip(weights)
        .map(|((c, transfer), weight)| BornChannel {
            alpha: c.alpha,
            band: c.band,
            q: c.q,
            transfer,
            weight,
            relative: if max > 0.0 { weight.norm() / max } else { 0.0 },
        })
        .collect();
    Ok(BornPrediction { incident_q: set.q0, channels })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::bands::{enumerate_channels, MovingFrameParams, DEFAULT_ALPHA_RANGE};
    use crate::potentials::{hermitian_truncation, KKMultiPole};

    fn fig3_pole() -> KKMultiPole {
        KKMultiPole::single(Complex64::new(0.0, -1.0), Complex64::new(90.0, 1.0), 2).unwrap()
    }

    fn fig3a_channels() -> ChannelSet {
        let params = MovingFrameParams::new(0.95 * PI / 2.0, 0.2).unwrap();
        enumerate_channels(&params, PI / 2.0, DEFAULT_ALPHA_RANGE).unwrap()
    }

    #[test]
    fn kk_weights_vanish_on_null_side_and_at_incident() {
        let set = fig3a_channels();
        let pred = born_weights(&set, &Shape::MultiPole(fig3_pole())).unwrap();
        for ch in &pred.channels {
            if ch.transfer >= 0.0 {
                assert_eq!(ch.weight, Complex64::new(0.0, 0.0), "alpha {} band {}", ch.alpha, ch.band);
            }
        }
        let inc = pred.channels.iter().find(|c| c.is_incident()).unwrap();
        assert_eq!(inc.transfer, 0.0);
        assert_eq!(inc.weight, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hermitian_truncation_weights_are_two_sided() {
        let set = fig3a_channels();
        let shape = hermitian_truncation(&fig3_pole());
        let pred = born_weights(&set, &shape).unwrap();
        let positive = pred.channels.iter().filter(|c| c.transfer > 0.0).map(|c| c.weight.norm()).fold(0.0, f64::max);
        let negative = pred.channels.iter().filter(|c| c.transfer < 0.0).map(|c| c.weight.norm()).fold(0.0, f64::max);
        assert!(positive > 0.0 && negative > 0.0);
        assert!(pred.channels.iter().any(|c| c.relative == 1.0));
        // Slow drift pushes every transfer to |q - q0| ~ pi / v, where the
        // spectrum is ~ pi |q| e^{-|q|}.
        assert!(pred.max_scattered_weight() < 1e-4, "{}", pred.max_scattered_weight());

        let fast = MovingFrameParams::new(0.95 * PI / 2.0, 0.8).unwrap();
        let set = enumerate_channels(&fast, PI / 2.0, DEFAULT_ALPHA_RANGE).unwrap();
        let pred = born_weights(&set, &shape).unwrap();
        assert!(pred.max_scattered_weight() > 1e-3);
    }

    #[test]
    fn weights_attach_to_channel_set() {
        let mut set = fig3a_channels();
        let pred = born_weights(&set, &Shape::MultiPole(fig3_pole())).unwrap();
        pred.apply_to(&mut set);
        assert!(set.channels.iter().all(|c| c.born_weight.is_some()));
    }

    #[test]
    fn zero_shape_gives_zero_relative_weights() {
        let set = fig3a_channels();
        let pred = born_weights(&set, &Shape::zero()).unwrap();
        assert!(pred.channels.iter().all(|c| c.relative == 0.0));
        assert_eq!(pred.max_scattered_weight(), 0.0);
    }
}
