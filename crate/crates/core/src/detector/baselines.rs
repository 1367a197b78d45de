//! Reference detectors: the two-level nearest-neighbor threshold and the
//! mixture-LLR estimator that treats sneak interference as an i.i.d. error
//! with a rate estimated from per-array hard decisions.

use crate::channel::ChannelParams;
use crate::grid::Grid;

/// Hard two-level decision: 1 iff the readback is nearer the low level.
pub fn threshold_detect(values: &Grid<f64>, params: &ChannelParams) -> Grid<u8> {
    let mid = 0.5 * (params.r_low + params.r_high);
    let mut x_hat = Grid::filled(values.rows(), values.cols(), 0u8);
    for (b, &y) in x_hat.as_mut_slice().iter_mut().zip(values.iter()) {
        *b = u8::from(y < mid);
    }
    x_hat
}

/// Output of the mixture-LLR (elementary signal estimator) baseline.
#[derive(Debug, Clone)]
pub struct EseDetection {
    /// Per-cell LLR, positive favoring bit 0.
    pub llrs: Grid<f64>,
    pub x_hat: Grid<u8>,
    /// Estimated fraction of high cells that are sneak-affected.
    pub sneak_rate_estimate: f64,
}

/// Estimate the sneak rate from three-way nearest-level hard decisions:
/// `n_sneak / (n_sneak + n_high)`, or 0 when no cell reads high.
pub fn ese_rate_estimate(values: &Grid<f64>, params: &ChannelParams) -> f64 {
    let mut n_high = 0u64;
    let mut n_sneak = 0u64;
    let r_sneak = params.r_sneak();
    for &y in values.iter() {
        let s_high = params.ln_likelihood(y, params.r_high);
        let s_sneak = params.ln_likelihood(y, r_sneak);
        let s_low = params.ln_likelihood(y, params.r_low);
        if s_high >= s_sneak && s_high >= s_low {
            n_high += 1;
        } else if s_sneak >= s_low {
            n_sneak += 1;
        }
    }
    if n_high + n_sneak == 0 {
        0.0
    } else {
        n_sneak as f64 / (n_high + n_sneak) as f64
    }
}

/// Per-cell LLR of bit 0 versus bit 1 under the i.i.d. sneak mixture:
/// `ln[(eps * phi(y, r_sneak) + (1 - eps) * phi(y, r_high)) / phi(y, r_low)]`.
pub fn ese_llr(y: f64, eps: f64, params: &ChannelParams) -> f64 {
    let ll_high = params.ln_likelihood(y, params.r_high);
    let ll_sneak = params.ln_likelihood(y, params.r_sneak());
    let ll_low = params.ln_likelihood(y, params.r_low);
    let ln_mix = if eps <= 0.0 {
        ll_high
    } else if eps >= 1.0 {
        ll_sneak
    } else {
        // log-sum-exp of the two mixture components
        let a = eps.ln() + ll_sneak;
        let b = (1.0 - eps).ln() + ll_high;
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    };
    ln_mix - ll_low
}

/// Full mixture-LLR detection of one array.
pub fn ese_detect(values: &Grid<f64>, params: &ChannelParams) -> EseDetection {
    let eps = ese_rate_estimate(values, params);
    let mut llrs = Grid::filled(values.rows(), values.cols(), 0.0f64);
    let mut x_hat = Grid::filled(values.rows(), values.cols(), 0u8);
    for idx in 0..values.len() {
        let llr = ese_llr(values.as_slice()[idx], eps, params);
        llrs.as_mut_slice()[idx] = llr;
        x_hat.as_mut_slice()[idx] = u8::from(llr < 0.0);
    }
    EseDetection {
        llrs,
        x_hat,
        sneak_rate_estimate: eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        compute_sneak_events, read_array, sample_data, ChannelParams, NoiseModel,
    };
    use crate::rng::substream;

    fn params(sigma: f64) -> ChannelParams {
        ChannelParams::standard(8, 8, 0.001, sigma, NoiseModel::Gaussian).unwrap()
    }

    #[test]
    fn threshold_is_two_level_nearest() {
        let p = params(40.0);
        let y = Grid::from_vec(1, 3, vec![100.0, 1000.0, 230.769]);
        let x = threshold_detect(&y, &p);
        // The sneak level is nearer the low level, so it always errs.
        assert_eq!(x.as_slice(), &[1, 0, 1]);
    }

    #[test]
    fn llr_collapses_without_sneak_rate() {
        let p = params(40.0);
        let y = 700.0;
        let expect = p.ln_likelihood(y, p.r_high) - p.ln_likelihood(y, p.r_low);
        assert!((ese_llr(y, 0.0, &p) - expect).abs() < 1e-12);
    }

    #[test]
    fn llr_negative_at_low_level_with_mixture() {
        let p = params(40.0);
        assert!(ese_llr(100.0, 0.1, &p) < 0.0);
    }

    #[test]
    fn clean_quiet_array_has_no_errors_and_zero_rate() {
        let p = ChannelParams::standard(8, 8, 0.0, 1.0, NoiseModel::Gaussian).unwrap();
        let mut rng = substream(41, &[0]);
        let data = sample_data(&p, &mut rng);
        let failures = Grid::filled(8, 8, false);
        let read = read_array(&data, &failures, &p, &mut rng);
        assert!(compute_sneak_events(&data, &failures).iter().all(|&e| e == 0));
        let det = ese_detect(&read.values, &p);
        assert_eq!(det.sneak_rate_estimate, 0.0);
        assert_eq!(det.x_hat, data);
    }
}
