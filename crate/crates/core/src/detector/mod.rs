//! Sneak-path detection.
//!
//! The full pipeline labels confident high reads, promotes definite lows,
//! builds a graph over the remaining uncertain cells, and iterates messages
//! between failure and path roles of each node. Baseline detectors (threshold,
//! i.i.d. mixture LLR) and a genie variant with oracle failure knowledge share
//! the same result shape so experiment runners can swap them freely.

mod baselines;
mod graph;
mod labels;
mod messages;

pub use baselines::{ese_detect, ese_llr, ese_rate_estimate, threshold_detect, EseDetection};
pub use graph::{DetectionGraph, Edge};
pub use labels::{pre_detect, refine_definite_low, Label};
pub use messages::{sneak_mixture_weight, sneak_posterior, MessageState};

use crate::channel::{ChannelParams, ReadbackMatrix, SelectorFailureMap};
use crate::error::Error;
use crate::grid::Grid;

/// Which detector to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorVariant {
    /// Iterative graph detector.
    Bp,
    /// Same, with detection-aiding side information from confident highs.
    BpImproved,
    /// Mixture-LLR estimator with per-array sneak-rate estimate.
    Ese,
    /// Two-level nearest-neighbor hard decision.
    Threshold,
    /// Graph detector with failure beliefs pinned to the ground truth.
    Genie,
}

impl std::fmt::Display for DetectorVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DetectorVariant::Bp => "bp",
            DetectorVariant::BpImproved => "bp-improved",
            DetectorVariant::Ese => "ese",
            DetectorVariant::Threshold => "threshold",
            DetectorVariant::Genie => "genie",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for DetectorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "bp" => Ok(DetectorVariant::Bp),
            "bp-improved" | "improved" => Ok(DetectorVariant::BpImproved),
            "ese" => Ok(DetectorVariant::Ese),
            "threshold" => Ok(DetectorVariant::Threshold),
            "genie" => Ok(DetectorVariant::Genie),
            other => Err(Error::InvalidParameter(format!(
                "unknown detector '{other}' (expected bp|bp-improved|ese|threshold|genie)"
            ))),
        }
    }
}

/// Detector settings.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub variant: DetectorVariant,
    /// Message-passing iterations.
    pub max_iterations: usize,
    /// Failure posterior above which a selector counts as detected.
    pub sf_decision_threshold: f64,
    /// Apply the definite-low rule once instead of to a fixed point.
    pub single_pass_refine: bool,
}

impl DetectorConfig {
    pub fn new(variant: DetectorVariant) -> Self {
        Self {
            variant,
            max_iterations: 15,
            sf_decision_threshold: 0.99,
            single_pass_refine: false,
        }
    }

    pub fn with_iterations(mut self, iters: usize) -> Self {
        self.max_iterations = iters;
        self
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self::new(DetectorVariant::Bp)
    }
}

/// Hard and soft outputs of one detection.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Estimated bits.
    pub x_hat: Grid<u8>,
    /// Per-cell posterior Pr(bit = 1); 0/1 constants for decided cells.
    pub posterior_one: Grid<f64>,
    /// Per-cell selector-failure posterior (0 for cells outside the graph).
    pub sf_posterior: Grid<f64>,
}

/// Incremental graph detector holding labels, graph, and message state.
///
/// The joint loop needs to interleave a few detector iterations with decoder
/// iterations, replacing the bit priors in between; this type keeps that state
/// alive between passes. Message updates see only the readback values —
/// ground truth enters solely through [`SneakDetector::genie`].
pub struct SneakDetector {
    labels: Grid<Label>,
    graph: DetectionGraph,
    state: MessageState,
    use_aiders: bool,
}

impl SneakDetector {
    /// Build the three-stage state for the iterative detector.
    ///
    /// # Panics
    ///
    /// Panics if `config.variant` is not `Bp` or `BpImproved`; the baselines
    /// have no graph to build and the genie needs [`SneakDetector::genie`].
    pub fn new(values: &Grid<f64>, params: &ChannelParams, config: &DetectorConfig) -> Self {
        assert!(
            matches!(config.variant, DetectorVariant::Bp | DetectorVariant::BpImproved),
            "SneakDetector::new expects a graph-based variant"
        );
        Self::build(values, params, config, None)
    }

    /// Genie variant: failure beliefs pinned to the true failure map.
    pub fn genie(
        values: &Grid<f64>,
        failures: &SelectorFailureMap,
        params: &ChannelParams,
        config: &DetectorConfig,
    ) -> Self {
        Self::build(values, params, config, Some(failures))
    }

    fn build(
        values: &Grid<f64>,
        params: &ChannelParams,
        config: &DetectorConfig,
        pinned: Option<&SelectorFailureMap>,
    ) -> Self {
        let labels = refine_definite_low(&pre_detect(values, params), config.single_pass_refine);
        let graph = DetectionGraph::build(&labels);
        let mut state = MessageState::new(&graph, &labels, values, params);
        if let Some(failures) = pinned {
            state.pin_failures(&graph, failures);
        }
        Self {
            labels,
            graph,
            state,
            use_aiders: config.variant == DetectorVariant::BpImproved,
        }
    }

    /// Run `n` message-passing iterations.
    pub fn iterate(&mut self, n: usize) {
        for _ in 0..n {
            self.state.iterate(&self.graph, self.use_aiders);
        }
    }

    /// Replace the per-cell bit priors (decoder feedback).
    pub fn set_priors(&mut self, priors: &Grid<f64>) {
        self.state.set_priors(priors);
    }

    /// Reinitialize messages (strict re-detection mode); priors are kept.
    pub fn reset_messages(&mut self) {
        self.state.reset(&self.graph);
    }

    pub fn labels(&self) -> &Grid<Label> {
        &self.labels
    }

    pub fn graph(&self) -> &DetectionGraph {
        &self.graph
    }

    /// Current per-cell posterior Pr(bit = 1).
    pub fn posterior_one(&self) -> Grid<f64> {
        Grid::from_vec(
            self.labels.rows(),
            self.labels.cols(),
            self.state.posteriors().to_vec(),
        )
    }

    #[inline]
    pub fn posterior_at(&self, cell: usize) -> f64 {
        self.state.posterior(cell)
    }

    /// Snapshot hard estimates and posteriors.
    pub fn result(&self) -> DetectionResult {
        let rows = self.labels.rows();
        let cols = self.labels.cols();
        let mut x_hat = Grid::filled(rows, cols, 0u8);
        let mut sf_posterior = Grid::filled(rows, cols, 0.0f64);
        let posterior_one = self.posterior_one();
        for idx in 0..posterior_one.len() {
            x_hat.as_mut_slice()[idx] = u8::from(posterior_one.as_slice()[idx] >= 0.5);
        }
        for node in 0..self.graph.node_count() {
            let (i, j) = self.graph.node_cell(node);
            sf_posterior[(i, j)] = self.state.failure_posterior(node);
        }
        DetectionResult {
            x_hat,
            posterior_one,
            sf_posterior,
        }
    }

    #[cfg(test)]
    pub(crate) fn state_mut(&mut self) -> &mut MessageState {
        &mut self.state
    }

    #[cfg(test)]
    pub(crate) fn state(&self) -> &MessageState {
        &self.state
    }
}

/// Full iterative detection of one readback array.
pub fn run_detection(
    read: &ReadbackMatrix,
    params: &ChannelParams,
    config: &DetectorConfig,
) -> DetectionResult {
    let mut det = SneakDetector::new(&read.values, params, config);
    det.iterate(config.max_iterations);
    det.result()
}

/// Detection with oracle knowledge of the failed selectors; the failure pass
/// is skipped and its beliefs enter as 0/1 constants.
pub fn genie_detector(
    read: &ReadbackMatrix,
    params: &ChannelParams,
    config: &DetectorConfig,
) -> DetectionResult {
    let mut det = SneakDetector::genie(&read.values, &read.truth.failures, params, config);
    det.iterate(config.max_iterations);
    det.result()
}

/// Run whichever detector the config selects.
pub fn detect(
    read: &ReadbackMatrix,
    params: &ChannelParams,
    config: &DetectorConfig,
) -> DetectionResult {
    match config.variant {
        DetectorVariant::Bp | DetectorVariant::BpImproved => run_detection(read, params, config),
        DetectorVariant::Genie => genie_detector(read, params, config),
        DetectorVariant::Threshold => {
            let x_hat = baselines::threshold_detect(&read.values, params);
            let posterior_one = Grid::from_vec(
                x_hat.rows(),
                x_hat.cols(),
                x_hat.iter().map(|&b| b as f64).collect(),
            );
            DetectionResult {
                x_hat,
                posterior_one,
                sf_posterior: Grid::filled(read.values.rows(), read.values.cols(), 0.0),
            }
        }
        DetectorVariant::Ese => {
            let det = ese_detect(&read.values, params);
            let posterior_one = Grid::from_vec(
                det.llrs.rows(),
                det.llrs.cols(),
                det.llrs.iter().map(|&l| 1.0 / (1.0 + l.exp())).collect(),
            );
            DetectionResult {
                x_hat: det.x_hat,
                posterior_one,
                sf_posterior: Grid::filled(read.values.rows(), read.values.cols(), 0.0),
            }
        }
    }
}

/// Selector failure detection rate: the fraction of truly failed selectors
/// whose failure posterior exceeds the decision threshold. `None` when the
/// array has no failed selector (excluded from averages).
pub fn sfdr(
    result: &DetectionResult,
    truth: &SelectorFailureMap,
    config: &DetectorConfig,
) -> Option<f64> {
    let mut n_sf = 0u64;
    let mut n_det = 0u64;
    for ((i, j), &failed) in truth.enumerate() {
        if failed {
            n_sf += 1;
            if result.sf_posterior[(i, j)] > config.sf_decision_threshold {
                n_det += 1;
            }
        }
    }
    (n_sf > 0).then(|| n_det as f64 / n_sf as f64)
}
