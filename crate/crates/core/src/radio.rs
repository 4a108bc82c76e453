//! MU-to-host channel rate from radio parameters, and a power-law gain
//! model for deriving the channel gain from geometry.

use serde::{Deserialize, Serialize};

use crate::model::RadioParams;

/// Uplink channel description: bandwidth plus the distance-to-gain law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Total bandwidth between MUs and MEC servers, Hz.
    pub bandwidth_hz: f64,
    /// Path-loss exponent theta; 4 is the usual urban value.
    pub pathloss_exponent: f64,
    /// Gain at the 1 m reference distance, dimensionless.
    pub reference_gain: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self { bandwidth_hz: 2.0e7, pathloss_exponent: 4.0, reference_gain: 1.0 }
    }
}

/// Shannon-Hartley channel rate in bits/s.
pub fn channel_rate(params: &RadioParams, model: &ChannelModel) -> f64 {
    let snr = params.tx_power_w * params.gain / (params.interference_w + params.noise_w);
    model.bandwidth_hz * (1.0 + snr).log2()
}

/// Channel gain at distance `d_m` under the power-law model. Distances
/// under 1 m are clamped to the reference distance.
pub fn gain_from_distance(d_m: f64, model: &ChannelModel) -> f64 {
    let d = d_m.max(1.0);
    model.reference_gain * d.powf(-model.pathloss_exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_equals_bandwidth_at_unit_snr() {
        // h*g == I + sigma^2 gives log2(2) = 1.
        let params = RadioParams { tx_power_w: 2.0, gain: 0.5, interference_w: 0.4, noise_w: 0.6 };
        let model = ChannelModel { bandwidth_hz: 1.7e7, ..ChannelModel::default() };
        assert!((channel_rate(&params, &model) - 1.7e7).abs() < 1e-6);
    }

    #[test]
    fn rate_zero_gain_is_zero() {
        let params = RadioParams { gain: 0.0, ..RadioParams::default() };
        assert_eq!(channel_rate(&params, &ChannelModel::default()), 0.0);
    }

    #[test]
    fn rate_reference_values() {
        // 1.5 W through gain 1e-6 against 1e-6 W of noise over 20 MHz.
        let params =
            RadioParams { tx_power_w: 1.5, gain: 1e-6, interference_w: 0.0, noise_w: 1e-6 };
        let model = ChannelModel::default();
        let r = channel_rate(&params, &model);
        let expected = 2e7 * 2.5f64.log2();
        assert!((r - expected).abs() < 1.0, "{r} vs {expected}");
        assert!((r - 2.6438561897747244e7).abs() < 1.0);
    }

    #[test]
    fn rate_monotone_in_each_parameter() {
        let base = RadioParams { tx_power_w: 1.5, gain: 1e-6, interference_w: 1e-7, noise_w: 1e-6 };
        let model = ChannelModel::default();
        let r0 = channel_rate(&base, &model);
        let up = |p: RadioParams| channel_rate(&p, &model);
        assert!(up(RadioParams { tx_power_w: 2.0, ..base }) > r0);
        assert!(up(RadioParams { gain: 2e-6, ..base }) > r0);
        assert!(up(RadioParams { interference_w: 2e-7, ..base }) < r0);
        assert!(up(RadioParams { noise_w: 2e-6, ..base }) < r0);
    }

    #[test]
    fn rate_scales_linearly_with_bandwidth() {
        let params = RadioParams::default();
        let m1 = ChannelModel { bandwidth_hz: 1e7, ..ChannelModel::default() };
        let m2 = ChannelModel { bandwidth_hz: 3e7, ..ChannelModel::default() };
        let r1 = channel_rate(&params, &m1);
        let r2 = channel_rate(&params, &m2);
        assert!((r2 - 3.0 * r1).abs() < 1e-6);
    }

    #[test]
    fn gain_power_law() {
        let model = ChannelModel { pathloss_exponent: 4.0, reference_gain: 1.0, ..ChannelModel::default() };
        assert_eq!(gain_from_distance(1.0, &model), 1.0);
        assert!((gain_from_distance(10.0, &model) - 1e-4).abs() < 1e-18);
        assert!((gain_from_distance(100.0, &model) - 1e-8).abs() < 1e-22);
    }

    #[test]
    fn gain_clamps_near_field() {
        let model = ChannelModel::default();
        assert_eq!(gain_from_distance(0.2, &model), gain_from_distance(1.0, &model));
    }
}
