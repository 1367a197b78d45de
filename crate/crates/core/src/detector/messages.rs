//! Iterative message passing over the detection graph.
//!
//! Two message families travel along each edge. A failure node sends the
//! posterior belief that its selector failed, built from the likelihood ratio
//! of its partners' readbacks under "this selector failed" versus the
//! unconditional mixture. A path node sends back both its sneak probability
//! and that probability conditioned on the receiving node's failure. The path
//! node also maintains the per-cell posterior that its resistance is the low
//! level, which is the detector's soft output.
//!
//! All densities are kept as per-cell scaled pairs derived from
//! log-likelihoods, so mixture ratios stay finite even when one hypothesis
//! underflows. Every stored probability is clamped away from 0 and 1.

use super::graph::DetectionGraph;
use super::labels::Label;
use crate::channel::{theoretical_sneak_rate, ChannelParams, SelectorFailureMap};
use crate::clamp_prob;
use crate::grid::Grid;

/// Probability that an uncertain cell is sneak-affected given its sneak
/// probability `p_sp` and its prior probability `p_one` of storing a 1.
#[inline]
fn sneak_weight(p_sp: f64, p_one: f64) -> f64 {
    let w = (1.0 - p_one) * p_sp;
    w / (w + p_one)
}

/// Per-edge and per-cell message state.
#[derive(Debug, Clone)]
pub struct MessageState {
    /// Scaled density pair per cell: (at `r_low`, at `r_sneak`), both divided
    /// by the larger of the two so the bigger one is exactly 1.
    like_low: Vec<f64>,
    like_sneak: Vec<f64>,
    /// Per-cell prior Pr(bit = 1); the channel's `prob_one` until decoder
    /// feedback replaces it.
    prior_one: Vec<f64>,
    /// Per-cell posterior Pr(resistance = r_low | y). Decided cells hold the
    /// constants 1 (Low) and 0 (High).
    posterior: Vec<f64>,
    /// Failure-node message per directed edge: P(SF | Y) toward the target.
    sf_out: Vec<f64>,
    /// Path-node message per directed edge: P(SP) toward the target.
    sp_out: Vec<f64>,
    /// Conditional path-node message per directed edge: P(SP | SF_target).
    sp_sf_out: Vec<f64>,
    /// Aggregate failure posterior per node (no edge exclusion).
    sf_post: Vec<f64>,
    /// When set (genie mode), failure messages are pinned to these constants
    /// and the failure pass is skipped.
    pinned_sf: Option<Vec<f64>>,
    sp_init: f64,
    sf_prior: f64,
    // Leave-one-out scratch, sized to the maximum node degree.
    scratch_f: Vec<f64>,
    scratch_pre: Vec<f64>,
}

impl MessageState {
    pub fn new(graph: &DetectionGraph, labels: &Grid<Label>, values: &Grid<f64>, params: &ChannelParams) -> Self {
        let cells = values.len();
        let mut like_low = vec![0.0; cells];
        let mut like_sneak = vec![0.0; cells];
        let r_sneak = params.r_sneak();
        for (c, &y) in values.iter().enumerate() {
            let ll_low = params.ln_likelihood(y, params.r_low);
            let ll_sneak = params.ln_likelihood(y, r_sneak);
            if ll_sneak <= ll_low {
                like_low[c] = 1.0;
                like_sneak[c] = (ll_sneak - ll_low).exp();
            } else {
                like_low[c] = (ll_low - ll_sneak).exp();
                like_sneak[c] = 1.0;
            }
        }

        let mut posterior = vec![0.0; cells];
        for (c, &l) in labels.as_slice().iter().enumerate() {
            posterior[c] = match l {
                Label::Low => 1.0,
                Label::High => 0.0,
                Label::Uncertain => 0.0, // set by reset()
            };
        }

        let max_deg = (0..graph.node_count())
            .map(|n| graph.partners(n).len())
            .max()
            .unwrap_or(0);

        let mut state = Self {
            like_low,
            like_sneak,
            prior_one: vec![clamp_prob(params.prob_one); cells],
            posterior,
            sf_out: vec![0.0; graph.edge_count()],
            sp_out: vec![0.0; graph.edge_count()],
            sp_sf_out: vec![0.0; graph.edge_count()],
            sf_post: vec![0.0; graph.node_count()],
            pinned_sf: None,
            sp_init: clamp_prob(theoretical_sneak_rate(params)),
            sf_prior: clamp_prob(params.selector_fail_prob),
            scratch_f: vec![0.0; max_deg],
            scratch_pre: vec![0.0; max_deg + 1],
        };
        state.reset(graph);
        state
    }

    /// Pin failure beliefs to the ground truth and skip failure updates.
    pub fn pin_failures(&mut self, graph: &DetectionGraph, failures: &SelectorFailureMap) {
        let mut pinned = vec![0.0; graph.node_count()];
        for (node, p) in pinned.iter_mut().enumerate() {
            let (i, j) = graph.node_cell(node);
            *p = if failures[(i, j)] { 1.0 } else { 0.0 };
        }
        for node in 0..graph.node_count() {
            let (s, e) = graph.adj_range(node);
            for idx in s..e {
                self.sf_out[idx] = pinned[node];
            }
            self.sf_post[node] = pinned[node];
        }
        self.pinned_sf = Some(pinned);
    }

    /// Reinitialize messages and posteriors, keeping priors and pinning.
    pub fn reset(&mut self, graph: &DetectionGraph) {
        // Posteriors of uncertain cells start from the blind sneak rate.
        for node in 0..graph.node_count() {
            let c = graph.node_flat(node);
            let eps = sneak_weight(self.sp_init, self.prior_one[c]);
            self.posterior[c] = self.cell_posterior(c, eps);
        }
        if let Some(pinned) = self.pinned_sf.clone() {
            for node in 0..graph.node_count() {
                let (s, e) = graph.adj_range(node);
                for idx in s..e {
                    self.sf_out[idx] = pinned[node];
                }
                self.sf_post[node] = pinned[node];
            }
        } else {
            self.sf_out.iter_mut().for_each(|m| *m = self.sf_prior);
            self.sf_post.iter_mut().for_each(|m| *m = self.sf_prior);
        }
        // Conditional sneak messages start from their defining product using
        // the initial posteriors and failure beliefs; the unconditional
        // message stays at the blind initial rate for the first failure pass.
        for node in 0..graph.node_count() {
            self.path_node_update(graph, node, false);
            let (s, e) = graph.adj_range(node);
            for idx in s..e {
                self.sp_out[idx] = self.sp_init;
            }
        }
    }

    /// Replace the per-cell prior Pr(bit = 1) (decoder feedback).
    pub fn set_priors(&mut self, priors: &Grid<f64>) {
        for (dst, &p) in self.prior_one.iter_mut().zip(priors.iter()) {
            *dst = clamp_prob(p);
        }
    }

    pub fn prior_one(&self, cell: usize) -> f64 {
        self.prior_one[cell]
    }

    /// Posterior Pr(resistance = r_low) for a cell given its sneak weight.
    #[inline]
    fn cell_posterior(&self, cell: usize, eps: f64) -> f64 {
        let num = self.like_low[cell] * (1.0 - eps);
        let den = num + self.like_sneak[cell] * eps;
        clamp_prob(num / den)
    }

    /// One full iteration: all failure-node messages, then all path-node
    /// messages and posteriors.
    pub fn iterate(&mut self, graph: &DetectionGraph, use_aiders: bool) {
        if self.pinned_sf.is_none() {
            for node in 0..graph.node_count() {
                self.failure_node_update(graph, node, use_aiders);
            }
        }
        for node in 0..graph.node_count() {
            self.path_node_update(graph, node, true);
        }
    }

    /// Failure-node update: prior times the leave-one-out likelihood-ratio
    /// product over the diagonal partners, optionally damped by the aiding
    /// cells' no-sneak evidence.
    fn failure_node_update(&mut self, graph: &DetectionGraph, node: usize, use_aiders: bool) {
        let (s, e) = graph.adj_range(node);
        let deg = e - s;
        let edges = graph.partners(node);

        for (k, edge) in edges.iter().enumerate() {
            let c = edge.nbr_cell as usize;
            let p_one = self.prior_one[c];
            let eps = sneak_weight(self.sp_out[edge.rev as usize], p_one);
            let eps_sf = sneak_weight(self.sp_sf_out[edge.rev as usize], p_one);
            let num = (1.0 - eps_sf) * self.like_low[c] + eps_sf * self.like_sneak[c];
            let den = (1.0 - eps) * self.like_low[c] + eps * self.like_sneak[c];
            self.scratch_f[k] = num / den;
        }

        let aid = if use_aiders {
            let c_self = graph.node_flat(node);
            let p_self = self.posterior[c_self];
            graph
                .aiders(node)
                .iter()
                .map(|&(col_bridge, row_bridge)| {
                    1.0 - self.posterior[col_bridge as usize]
                        * self.posterior[row_bridge as usize]
                        * p_self
                })
                .product()
        } else {
            1.0
        };

        // Leave-one-out products via prefix/suffix scans.
        self.scratch_pre[0] = 1.0;
        for k in 0..deg {
            self.scratch_pre[k + 1] = self.scratch_pre[k] * self.scratch_f[k];
        }
        let full = self.scratch_pre[deg];
        let mut suffix = 1.0;
        for k in (0..deg).rev() {
            let loo = self.scratch_pre[k] * suffix;
            suffix *= self.scratch_f[k];
            self.sf_out[s + k] = clamp_prob(self.sf_prior * loo * aid);
        }
        self.sf_post[node] = clamp_prob(self.sf_prior * full * aid);
    }

    /// Path-node update: per-edge sneak messages, the conditional variant,
    /// and (optionally) the refreshed posterior from the full product.
    fn path_node_update(&mut self, graph: &DetectionGraph, node: usize, update_posterior: bool) {
        let (s, e) = graph.adj_range(node);
        let deg = e - s;
        let edges = graph.partners(node);

        // Survival factor per partner: 1 - f * P(SF), where f is the product
        // of the low-level posteriors of the two bridges and the partner.
        for (k, edge) in edges.iter().enumerate() {
            let f = self.posterior[edge.row_bridge as usize]
                * self.posterior[edge.col_bridge as usize]
                * self.posterior[edge.nbr_cell as usize];
            self.scratch_f[k] = 1.0 - f * self.sf_out[edge.rev as usize];
        }

        self.scratch_pre[0] = 1.0;
        for k in 0..deg {
            self.scratch_pre[k + 1] = self.scratch_pre[k] * self.scratch_f[k];
        }
        let full = self.scratch_pre[deg];
        let mut suffix = 1.0;
        for k in (0..deg).rev() {
            let loo = self.scratch_pre[k] * suffix;
            suffix *= self.scratch_f[k];
            let edge = &edges[k];
            let f = self.posterior[edge.row_bridge as usize]
                * self.posterior[edge.col_bridge as usize]
                * self.posterior[edge.nbr_cell as usize];
            self.sp_out[s + k] = clamp_prob(1.0 - loo);
            // Conditioned on the target's failure, the sneak path through it
            // is blocked only when one of its three cells is not low (1 - f);
            // the other partners survive as usual.
            self.sp_sf_out[s + k] = clamp_prob(1.0 - (1.0 - f) * loo);
        }

        if update_posterior {
            let c = graph.node_flat(node);
            let eps = sneak_weight(clamp_prob(1.0 - full), self.prior_one[c]);
            self.posterior[c] = self.cell_posterior(c, eps);
        }
    }

    /// Per-cell posterior Pr(bit = 1); decided cells hold 0/1 constants.
    pub fn posterior(&self, cell: usize) -> f64 {
        self.posterior[cell]
    }

    pub fn posteriors(&self) -> &[f64] {
        &self.posterior
    }

    /// Aggregate failure posterior of a node.
    pub fn failure_posterior(&self, node: usize) -> f64 {
        self.sf_post[node]
    }

    #[cfg(test)]
    pub(crate) fn edge_sf(&self, edge: usize) -> f64 {
        self.sf_out[edge]
    }

    #[cfg(test)]
    pub(crate) fn edge_sp(&self, edge: usize) -> (f64, f64) {
        (self.sp_out[edge], self.sp_sf_out[edge])
    }

    #[cfg(test)]
    pub(crate) fn force_posterior(&mut self, cell: usize, value: f64) {
        self.posterior[cell] = value;
    }

    #[cfg(test)]
    pub(crate) fn sneak_init(&self) -> f64 {
        self.sp_init
    }
}

/// Sneak-affected weight for tests and the mixture-LLR baseline.
pub fn sneak_mixture_weight(p_sp: f64, p_one: f64) -> f64 {
    sneak_weight(p_sp, p_one)
}

/// Posterior Pr(resistance = r_low | y) of a single uncertain cell given the
/// probability `eps` that its read is sneak-affected:
/// `phi(y, r_low)(1 - eps) / [phi(y, r_low)(1 - eps) + phi(y, r_sneak) eps]`,
/// evaluated through scaled log-densities.
pub fn sneak_posterior(y: f64, eps: f64, params: &ChannelParams) -> f64 {
    let ll_low = params.ln_likelihood(y, params.r_low);
    let ll_sneak = params.ln_likelihood(y, params.r_sneak());
    let (a, b) = if ll_sneak <= ll_low {
        (1.0, (ll_sneak - ll_low).exp())
    } else {
        ((ll_low - ll_sneak).exp(), 1.0)
    };
    let num = a * (1.0 - eps);
    num / (num + b * eps)
}
