//! Imperfect knowledge of the channels towards the primary users.
//!
//! Attenuations are perturbed with zero-mean Gaussian noise and angular sines
//! are snapped onto a uniform scan grid, which is what a maximum-energy scan
//! over a single LOS path returns.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::array::{ChannelSet, Scenario};
use crate::{Error, Result};

/// How the configured fraction maps onto the attenuation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttenuationError {
    /// `σ_α² = fraction · α`.
    #[default]
    Variance,
    /// `σ_α = fraction · α`.
    StdDev,
}

impl AttenuationError {
    /// Error variance for a given true attenuation.
    pub fn variance(self, alpha: f64, fraction: f64) -> f64 {
        match self {
            AttenuationError::Variance => fraction * alpha,
            AttenuationError::StdDev => (fraction * alpha).powi(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationConfig {
    pub variance_fraction: f64,
    pub error_model: AttenuationError,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            variance_fraction: 0.01,
            error_model: AttenuationError::Variance,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance_fraction.is_finite() && self.variance_fraction >= 0.0) {
            return Err(Error::config(
                "estimation.variance_fraction",
                "must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

/// What the secondary network knows about the primary-user links.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Estimated BS→PU-j attenuations, always positive.
    pub sp_alpha_hat: [f64; 2],
    /// BS→PU-j angular sines on the `M_b` grid.
    pub sp_phi_hat: [f64; 2],
    /// PU-j→UE-k angular sines on the `M_u` grid, indexed `[j][k]`.
    pub ps_phi_hat: [Vec<f64>; 2],
    /// Attenuation error variance used for each PU.
    pub sigma_alpha_sq: [f64; 2],
}

/// Snaps `phi` to the nearest center of `grid` equal cells covering `[-1, 1]`.
///
/// Centers sit at `-1 + (2i + 1) / grid`, so the error never exceeds `1 / grid`.
pub fn quantize_angle(phi: f64, grid: usize) -> f64 {
    debug_assert!(grid >= 2, "grid needs at least two cells");
    let n = grid as f64;
    let cell = ((phi + 1.0) * n / 2.0).floor().clamp(0.0, n - 1.0);
    -1.0 + (2.0 * cell + 1.0) / n
}

/// Draws `α̂ = α + e`, `e ~ N(0, σ_α²)`, redrawing until the estimate is positive.
pub fn estimate_attenuation<R: Rng + ?Sized>(
    alpha: f64,
    rng: &mut R,
    variance_fraction: f64,
    model: AttenuationError,
) -> f64 {
    let variance = model.variance(alpha, variance_fraction);
    if variance == 0.0 {
        return alpha;
    }
    let noise = Normal::new(0.0, variance.sqrt()).expect("finite standard deviation");
    loop {
        let draw = alpha + noise.sample(rng);
        if draw > 0.0 {
            return draw;
        }
    }
}

/// Produces the estimate of the BS↔PU and PU→UE parameters.
pub fn estimate_channels<R: Rng + ?Sized>(
    channels: &ChannelSet,
    scenario: &Scenario,
    rng: &mut R,
    config: &EstimationConfig,
) -> ChannelEstimate {
    let fraction = config.variance_fraction;
    let model = config.error_model;
    let sp_alpha_hat = channels
        .sp
        .map(|link| estimate_attenuation(link.alpha, rng, fraction, model));
    let sigma_alpha_sq = channels.sp.map(|link| model.variance(link.alpha, fraction));
    let sp_phi_hat = channels.sp.map(|link| quantize_angle(link.phi, scenario.bs_antennas));
    let ue_grid = |links: &Vec<_>| {
        links
            .iter()
            .map(|link: &crate::array::LinkParams| quantize_angle(link.phi, scenario.ue_antennas))
            .collect::<Vec<_>>()
    };
    let ps_phi_hat = [ue_grid(&channels.ps[0]), ue_grid(&channels.ps[1])];
    ChannelEstimate {
        sp_alpha_hat,
        sp_phi_hat,
        ps_phi_hat,
        sigma_alpha_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{compute_channels, make_scenario, GeometryConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantize_hand_cases() {
        assert_eq!(quantize_angle(0.3, 4), 0.25);
        assert_eq!(quantize_angle(-0.3, 4), -0.25);
        assert_eq!(quantize_angle(1.0, 4), 0.75);
        assert_eq!(quantize_angle(-1.0, 4), -0.75);
        // 0 lies on a cell edge of an even grid: error is exactly 1/M
        assert_eq!((quantize_angle(0.0, 8) - 0.0).abs(), 0.125);
    }

    #[test]
    fn grid_centers_are_fixed_points() {
        for grid in [2usize, 3, 4, 16, 128, 256] {
            for i in 0..grid {
                let c = -1.0 + (2 * i + 1) as f64 / grid as f64;
                assert_eq!(quantize_angle(c, grid), c);
            }
        }
    }

    #[test]
    fn noiseless_attenuation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            estimate_attenuation(0.123, &mut rng, 0.0, AttenuationError::Variance),
            0.123
        );
    }

    #[test]
    fn attenuation_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let alpha = 1.0;
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| estimate_attenuation(alpha, &mut rng, 0.01, AttenuationError::Variance))
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sigma = (0.01f64 * alpha).sqrt();
        assert!((mean - alpha).abs() < 4.0 * sigma / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 0.01 * alpha).abs() < 0.1 * 0.01 * alpha, "variance {var}");
    }

    #[test]
    fn std_dev_model() {
        assert!((AttenuationError::StdDev.variance(2.0, 0.01) - 4e-4).abs() < 1e-18);
        assert_eq!(AttenuationError::Variance.variance(2.0, 0.01), 0.02);
    }

    #[test]
    fn estimates_respect_grid_bounds() {
        let cfg = GeometryConfig::reference();
        let est_cfg = EstimationConfig::default();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = make_scenario(&cfg, &mut rng).unwrap();
            let ch = compute_channels(&s, 2.0, &mut rng).unwrap();
            let est = estimate_channels(&ch, &s, &mut rng, &est_cfg);
            for j in 0..2 {
                assert!(est.sp_alpha_hat[j] > 0.0);
                assert!((est.sp_phi_hat[j] - ch.sp[j].phi).abs() <= 1.0 / 128.0);
                for k in 0..s.num_ues() {
                    assert!((est.ps_phi_hat[j][k] - ch.ps[j][k].phi).abs() <= 1.0 / 4.0);
                }
            }
        }
    }

    #[test]
    fn noise_free_estimate_equals_truth_on_grid() {
        let cfg = GeometryConfig::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = make_scenario(&cfg, &mut rng).unwrap();
        let mut ch = compute_channels(&s, 2.0, &mut rng).unwrap();
        for link in ch.sp.iter_mut() {
            link.phi = quantize_angle(link.phi, 128);
        }
        for link in ch.ps.iter_mut().flatten() {
            link.phi = quantize_angle(link.phi, 4);
        }
        let est = estimate_channels(
            &ch,
            &s,
            &mut rng,
            &EstimationConfig {
                variance_fraction: 0.0,
                ..Default::default()
            },
        );
        assert_eq!(est.sp_alpha_hat, ch.sp.map(|l| l.alpha));
        assert_eq!(est.sp_phi_hat, ch.sp.map(|l| l.phi));
        for j in 0..2 {
            assert_eq!(est.ps_phi_hat[j], ch.ps[j].iter().map(|l| l.phi).collect::<Vec<_>>());
        }
    }
}
