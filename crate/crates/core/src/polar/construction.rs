//! Classical construction pieces: polarization-weight ordering and
//! Bhattacharyya-based predetermined index sets from the two extreme channel
//! states (every high cell sneak-affected vs. none).

use crate::channel::ChannelParams;
use crate::error::{Error, Result};

/// Indices of all message positions sorted from most to least reliable by
/// polarization weight: index `i` with binary digits `b_j` scores
/// `sum_j b_j * 2^(j/4)`.
pub fn pw_reliability(block_len: usize) -> Vec<usize> {
    assert!(block_len.is_power_of_two());
    let beta = 2f64.powf(0.25);
    let weight = |i: usize| -> f64 {
        let mut w = 0.0;
        let mut bit = 0;
        let mut v = i;
        while v > 0 {
            if v & 1 == 1 {
                w += beta.powi(bit);
            }
            v >>= 1;
            bit += 1;
        }
        w
    };
    let mut order: Vec<usize> = (0..block_len).collect();
    order.sort_by(|&a, &b| {
        weight(b)
            .partial_cmp(&weight(a))
            .unwrap()
            .then(b.cmp(&a))
    });
    order
}

/// Bhattacharyya parameter of binary signaling at two levels under Gaussian
/// noise: `exp(-d^2 / (8 sigma^2))` with `d` the level separation.
pub fn base_bhattacharyya(level_a: f64, level_b: f64, sigma: f64) -> f64 {
    let d = (level_a - level_b).abs();
    (-d * d / (8.0 * sigma * sigma)).exp()
}

/// Per-position Bhattacharyya upper bounds from a base value via the
/// polarization recursion `z- = 2z - z^2`, `z+ = z^2`. Position `i`'s split
/// sequence follows its binary digits, most significant first, matching the
/// natural-order transform.
pub fn bhattacharyya_profile(z_base: f64, block_len: usize) -> Vec<f64> {
    assert!(block_len.is_power_of_two());
    let mut profile = vec![z_base.clamp(0.0, 1.0)];
    while profile.len() < block_len {
        let mut next = Vec::with_capacity(profile.len() * 2);
        for &z in &profile {
            next.push((2.0 * z - z * z).clamp(0.0, 1.0));
            next.push(z * z);
        }
        profile = next;
    }
    profile
}

/// Exponents and design noise for the predetermined sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    /// Reliability exponent for the always-reliable set (0 < beta < 1/2).
    pub beta1: f64,
    /// Unreliability exponent for the always-frozen set (0 < beta < 1/2).
    pub beta2: f64,
    /// Noise standard deviation the construction is designed for.
    pub sigma_design: f64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        Self {
            beta1: 0.45,
            beta2: 0.45,
            sigma_design: 40.0,
        }
    }
}

impl ConstructionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0 < b && b < 0.5) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1/2), got {b}"
                )));
            }
        }
        if !(self.sigma_design > 0.0) {
            return Err(Error::InvalidParameter("sigma_design must be positive".into()));
        }
        Ok(())
    }
}

/// Compute the always-reliable and always-unreliable index sets.
///
/// The reliable set comes from the worst-case channel (every high cell
/// sneak-affected: levels `r_sneak` vs `r_low`), the unreliable set from the
/// best case (levels `r_high` vs `r_low`). Threshold: `2^(-N^beta) / N`.
pub fn predetermined_sets(
    params: &ConstructionParams,
    channel: &ChannelParams,
    block_len: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    params.validate()?;
    let z_worst = base_bhattacharyya(channel.r_sneak(), channel.r_low, params.sigma_design);
    let z_best = base_bhattacharyya(channel.r_high, channel.r_low, params.sigma_design);
    predetermined_sets_from_base(z_worst, z_best, block_len, params.beta1, params.beta2)
}

/// Same, but from explicit base Bhattacharyya values for the two states.
pub fn predetermined_sets_from_base(
    z_worst: f64,
    z_best: f64,
    block_len: usize,
    beta1: f64,
    beta2: f64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = block_len as f64;
    let reliable_threshold = 2f64.powf(-n.powf(beta1)) / n;
    let unreliable_threshold = 2f64.powf(-n.powf(beta2)) / n;

    let worst_profile = bhattacharyya_profile(z_worst, block_len);
    let best_profile = bhattacharyya_profile(z_best, block_len);

    let reliable: Vec<usize> = (0..block_len)
        .filter(|&i| worst_profile[i] < reliable_threshold)
        .collect();
    let unreliable: Vec<usize> = (0..block_len)
        .filter(|&i| best_profile[i] > unreliable_threshold)
        .collect();

    let overlap = reliable.iter().filter(|i| unreliable.contains(i)).count();
    if overlap > 0 {
        return Err(Error::PredeterminedOverlap(overlap));
    }
    Ok((reliable, unreliable))
}
