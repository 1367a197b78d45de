//! Crossbar read-channel model.
//!
//! Cells store a bit as a resistance: `r_high` for 0, `r_low` for 1. A read of
//! a high cell is corrupted when a sneak path forms through three
//! low-resistance cells whose diagonal cell has a failed selector; the
//! measured resistance then drops to the parallel combination
//! `(1/r_high + 1/(3 r_low))^-1`. On top of that the readback carries either
//! additive Gaussian noise or a lognormal resistance variation whose first two
//! moments match the nominal level and noise power.

use crate::error::{Error, Result};
use crate::grid::Grid;
use rand::Rng;
use rand_distr::StandardNormal;

/// Which readback noise model to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// `y = r + n`, `n ~ N(0, sigma^2)`.
    Gaussian,
    /// `ln y ~ N(mu(r), s^2(r))` with moments matched so that
    /// `E[y] = r` and `Var[y] = sigma^2`.
    Lognormal,
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::Gaussian => write!(f, "gaussian"),
            NoiseModel::Lognormal => write!(f, "lognormal"),
        }
    }
}

/// Array geometry, resistance levels, and channel probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Number of word lines (rows).
    pub rows: usize,
    /// Number of bit lines (columns).
    pub cols: usize,
    /// High resistance level, stores bit 0 (ohms).
    pub r_high: f64,
    /// Low resistance level, stores bit 1 (ohms).
    pub r_low: f64,
    /// Probability that a stored bit is 1.
    pub prob_one: f64,
    /// Independent per-cell selector failure probability.
    pub selector_fail_prob: f64,
    /// Noise standard deviation (ohms).
    pub sigma: f64,
    pub noise: NoiseModel,
}

impl ChannelParams {
    /// Validated constructor. Rejects parameter sets for which the
    /// sneak-affected level would not sit strictly between the low and high
    /// levels.
    pub fn new(
        rows: usize,
        cols: usize,
        r_high: f64,
        r_low: f64,
        prob_one: f64,
        selector_fail_prob: f64,
        sigma: f64,
        noise: NoiseModel,
    ) -> Result<Self> {
        let p = Self {
            rows,
            cols,
            r_high,
            r_low,
            prob_one,
            selector_fail_prob,
            sigma,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    /// Standard 1000/100 ohm levels with equiprobable data.
    pub fn standard(
        rows: usize,
        cols: usize,
        selector_fail_prob: f64,
        sigma: f64,
        noise: NoiseModel,
    ) -> Result<Self> {
        Self::new(
            rows,
            cols,
            1000.0,
            100.0,
            0.5,
            selector_fail_prob,
            sigma,
            noise,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter("array dimensions must be positive".into()));
        }
        if !(self.r_low > 0.0 && self.r_high > self.r_low) {
            return Err(Error::InvalidParameter(
                "resistance levels must satisfy r_high > r_low > 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.prob_one) {
            return Err(Error::InvalidParameter("prob_one must be in [0,1]".into()));
        }
        if !(0.0..=1.0).contains(&self.selector_fail_prob) {
            return Err(Error::InvalidParameter(
                "selector_fail_prob must be in [0,1]".into(),
            ));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        let rs = self.r_sneak();
        if !(self.r_low < rs && rs < self.r_high) {
            return Err(Error::InvalidParameter(
                "sneak-affected level must lie strictly between r_low and r_high".into(),
            ));
        }
        Ok(())
    }

    /// Resistance of a sneak-affected high cell: the high level in parallel
    /// with the three-cell path `3 * r_low`.
    #[inline]
    pub fn r_sneak(&self) -> f64 {
        1.0 / (1.0 / self.r_high + 1.0 / (3.0 * self.r_low))
    }

    /// Natural log of the readback density at `y` for a cell whose noiseless
    /// resistance is `level`, under this channel's noise model.
    ///
    /// Under the lognormal model, `y <= 0` has zero density and returns
    /// negative infinity.
    #[inline]
    pub fn ln_likelihood(&self, y: f64, level: f64) -> f64 {
        match self.noise {
            NoiseModel::Gaussian => ln_gaussian_likelihood(y, level, self.sigma),
            NoiseModel::Lognormal => ln_lognormal_likelihood(y, level, self.sigma),
        }
    }
}

/// Stored bits, one per cell.
pub type DataArray = Grid<u8>;

/// Per-cell selector failure indicators.
pub type SelectorFailureMap = Grid<bool>;

/// Per-cell sneak-path event indicators; an event implies the cell stores 0.
pub type SneakEventMap = Grid<u8>;

/// The generating state of a readback, carried for metrics and the genie
/// baseline only. Detector message updates never read it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub data: DataArray,
    pub failures: SelectorFailureMap,
    pub sneaks: SneakEventMap,
}

/// Noisy read of a whole array plus the ground truth that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadbackMatrix {
    /// Measured resistances (ohms).
    pub values: Grid<f64>,
    pub truth: GroundTruth,
}

/// Sample an i.i.d. Bernoulli(`prob_one`) data array.
pub fn sample_data<R: Rng>(params: &ChannelParams, rng: &mut R) -> DataArray {
    let mut bits = Grid::filled(params.rows, params.cols, 0u8);
    for b in bits.as_mut_slice() {
        *b = u8::from(rng.gen::<f64>() < params.prob_one);
    }
    bits
}

/// Sample i.i.d. selector failures with probability `selector_fail_prob`.
pub fn sample_selector_failures<R: Rng>(params: &ChannelParams, rng: &mut R) -> SelectorFailureMap {
    let mut failed = Grid::filled(params.rows, params.cols, false);
    for f in failed.as_mut_slice() {
        *f = rng.gen::<f64>() < params.selector_fail_prob;
    }
    failed
}

/// Mark every cell hit by a sneak path.
///
/// Cell `(i, j)` is affected iff it stores 0 and there exists a diagonal cell
/// `(i', j')` with a failed selector such that `(i', j)`, `(i, j')` and
/// `(i', j')` all store 1. Multiple simultaneous paths collapse to a single
/// event.
pub fn compute_sneak_events(data: &DataArray, failures: &SelectorFailureMap) -> SneakEventMap {
    assert!(
        data.same_shape(failures),
        "data and failure maps must have equal dimensions"
    );
    let rows = data.rows();
    let cols = data.cols();
    let mut events = Grid::filled(rows, cols, 0u8);

    // Ones per row/column let us visit only viable (target, source) pairs;
    // failures are sparse so we iterate over failed 1-cells as sources.
    let mut ones_in_row: Vec<Vec<usize>> = vec![Vec::new(); rows];
    let mut ones_in_col: Vec<Vec<usize>> = vec![Vec::new(); cols];
    for ((i, j), &bit) in data.enumerate() {
        if bit == 1 {
            ones_in_row[i].push(j);
            ones_in_col[j].push(i);
        }
    }

    for ((fi, fj), &failed) in failures.enumerate() {
        if !failed || data[(fi, fj)] != 1 {
            continue;
        }
        // Targets (i, j) with data[i][fj] = 1 and data[fi][j] = 1.
        for &i in &ones_in_col[fj] {
            if i == fi {
                continue;
            }
            for &j in &ones_in_row[fi] {
                if j != fj && data[(i, j)] == 0 {
                    events[(i, j)] = 1;
                }
            }
        }
    }
    events
}

/// Noiseless resistance of a single cell given its bit and sneak indicator.
///
/// Rejects the inconsistent combination `bit = 1` with an active sneak event.
pub fn noiseless_resistance(bit: u8, sneak: u8, params: &ChannelParams) -> Result<f64> {
    match (bit, sneak) {
        (1, 0) => Ok(params.r_low),
        (0, 0) => Ok(params.r_high),
        (0, 1) => Ok(params.r_sneak()),
        (1, 1) => Err(Error::InvalidParameter(
            "a stored 1 cannot carry a sneak-path event".into(),
        )),
        _ => Err(Error::InvalidParameter("bit and sneak must be 0/1".into())),
    }
}

/// Read a whole array: compute sneak events, apply noiseless levels, then the
/// configured noise model. The generating state rides along as ground truth.
pub fn read_array<R: Rng>(
    data: &DataArray,
    failures: &SelectorFailureMap,
    params: &ChannelParams,
    rng: &mut R,
) -> ReadbackMatrix {
    assert!(data.same_shape(failures));
    let sneaks = compute_sneak_events(data, failures);
    let mut values = Grid::filled(data.rows(), data.cols(), 0.0f64);

    // Lognormal parameters depend only on the level, so cache all three.
    let levels = [params.r_high, params.r_sneak(), params.r_low];
    let logn: Vec<(f64, f64)> = levels
        .iter()
        .map(|&r| lognormal_params(r, params.sigma))
        .collect();

    for i in 0..data.rows() {
        for j in 0..data.cols() {
            let r = if data[(i, j)] == 1 {
                params.r_low
            } else if sneaks[(i, j)] == 1 {
                params.r_sneak()
            } else {
                params.r_high
            };
            let z: f64 = rng.sample(StandardNormal);
            values[(i, j)] = match params.noise {
                NoiseModel::Gaussian => r + params.sigma * z,
                NoiseModel::Lognormal => {
                    let idx = levels.iter().position(|&l| l == r).unwrap();
                    let (mu, s2) = logn[idx];
                    (mu + s2.sqrt() * z).exp()
                }
            };
        }
    }

    ReadbackMatrix {
        values,
        truth: GroundTruth {
            data: data.clone(),
            failures: failures.clone(),
            sneaks,
        },
    }
}

/// Gaussian density of `y` around mean `r` with standard deviation `sigma`.
#[inline]
pub fn gaussian_likelihood(y: f64, r: f64, sigma: f64) -> f64 {
    ln_gaussian_likelihood(y, r, sigma).exp()
}

#[inline]
pub fn ln_gaussian_likelihood(y: f64, r: f64, sigma: f64) -> f64 {
    let d = (y - r) / sigma;
    -0.5 * d * d - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Lognormal `(mu, s^2)` such that the distribution of `y` has mean exactly
/// `r` and variance exactly `sigma^2`.
#[inline]
pub fn lognormal_params(r: f64, sigma: f64) -> (f64, f64) {
    let ratio = sigma / r;
    let mu = (r * r / (r * r + sigma * sigma).sqrt()).ln();
    let s2 = (1.0 + ratio * ratio).ln();
    (mu, s2)
}

/// Lognormal readback density; `y <= 0` is outside the support.
pub fn lognormal_likelihood(y: f64, r: f64, sigma: f64) -> Result<f64> {
    if y <= 0.0 {
        return Err(Error::InvalidParameter(
            "lognormal readback must be positive".into(),
        ));
    }
    Ok(ln_lognormal_likelihood(y, r, sigma).exp())
}

#[inline]
pub fn ln_lognormal_likelihood(y: f64, r: f64, sigma: f64) -> f64 {
    if y <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let (mu, s2) = lognormal_params(r, sigma);
    let s = s2.sqrt();
    let d = (y.ln() - mu) / s;
    -0.5 * d * d - y.ln() - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Closed-form probability that a stored 0 is sneak-affected,
/// `Pr(e = 1 | x = 0)`, from the row/column occupancy sums:
///
/// `1 - sum_{u,v} C(M-1,u) C(N-1,v) q^(u+v) (1-q)^((M-1-u)+(N-1-v)) (1-p_sf*q)^(u*v)`
pub fn theoretical_sneak_rate(params: &ChannelParams) -> f64 {
    let row_pmf = binomial_pmf(params.rows - 1, params.prob_one);
    let col_pmf = binomial_pmf(params.cols - 1, params.prob_one);
    let miss = 1.0 - params.selector_fail_prob * params.prob_one;

    let mut covered = 0.0;
    for (u, pu) in row_pmf.iter().enumerate() {
        for (v, pv) in col_pmf.iter().enumerate() {
            covered += pu * pv * miss.powi((u * v) as i32);
        }
    }
    (1.0 - covered).clamp(0.0, 1.0)
}

/// Binomial(n, p) probability mass function, computed in log space.
fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p == 0.0 {
        let mut pmf = vec![0.0; n + 1];
        pmf[0] = 1.0;
        return pmf;
    }
    if p == 1.0 {
        let mut pmf = vec![0.0; n + 1];
        pmf[n] = 1.0;
        return pmf;
    }
    let mut ln_fact = vec![0.0f64; n + 1];
    for k in 1..=n {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    (0..=n)
        .map(|k| {
            let ln_c = ln_fact[n] - ln_fact[k] - ln_fact[n - k];
            (ln_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
        })
        .collect()
}
