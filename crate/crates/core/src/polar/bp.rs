//! Iterative decoder over the polar factor graph.
//!
//! The graph mirrors the encoder's butterfly network: `log2(N) + 1` columns of
//! `N` variable positions, column 0 holding the message-side priors and column
//! `log2(N)` the channel inputs. Each butterfly couples `(s, j)`, `(s, j+h)`
//! with `(s+1, j)`, `(s+1, j+h)` (`h = 2^s`) through the kernel
//! `out_top = in_top xor in_bot`, `out_bot = in_bot`. Flooding updates sweep
//! leftward then rightward per iteration with the min-sum check rule, and all
//! messages are clamped to a fixed magnitude.

use super::PolarCodeSpec;

/// Message clamp; also the finite stand-in for the infinite frozen prior.
pub const LLR_CLAMP: f64 = 50.0;

/// Min-sum check-node combination.
#[inline]
fn boxplus(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) ^ (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs())
}

#[inline]
fn clamp_llr(v: f64) -> f64 {
    v.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// Decoder state reusable across calls and across outer joint iterations.
#[derive(Debug, Clone)]
pub struct PolarBpDecoder {
    block_len: usize,
    stages: usize,
    /// Leftward messages, `(stages + 1) x block_len`, row-major by column.
    left: Vec<f64>,
    /// Rightward messages, same layout.
    right: Vec<f64>,
    frozen_prior: Vec<f64>,
}

impl PolarBpDecoder {
    pub fn new(spec: &PolarCodeSpec) -> Self {
        let n = spec.block_len();
        let stages = n.trailing_zeros() as usize;
        let mut dec = Self {
            block_len: n,
            stages,
            left: vec![0.0; (stages + 1) * n],
            right: vec![0.0; (stages + 1) * n],
            frozen_prior: (0..n)
                .map(|i| if spec.is_info(i) { 0.0 } else { LLR_CLAMP })
                .collect(),
        };
        dec.reset();
        dec
    }

    /// Clear all messages; frozen priors stay pinned at column 0.
    pub fn reset(&mut self) {
        self.left.iter_mut().for_each(|v| *v = 0.0);
        self.right.iter_mut().for_each(|v| *v = 0.0);
        self.right[..self.block_len].copy_from_slice(&self.frozen_prior);
    }

    /// Load channel LLRs (positive favors bit 0) into the channel column.
    pub fn set_channel_llrs(&mut self, llrs: &[f64]) {
        assert_eq!(llrs.len(), self.block_len, "LLR length mismatch");
        let base = self.stages * self.block_len;
        for (dst, &v) in self.left[base..].iter_mut().zip(llrs) {
            *dst = clamp_llr(v);
        }
    }

    #[inline]
    fn idx(&self, stage: usize, pos: usize) -> usize {
        stage * self.block_len + pos
    }

    /// Run `count` flooding iterations (leftward sweep, then rightward).
    pub fn iterate(&mut self, count: usize) {
        let n = self.block_len;
        for _ in 0..count {
            for s in (0..self.stages).rev() {
                let h = 1 << s;
                let mut i = 0;
                while i < n {
                    for j in i..i + h {
                        let a = self.idx(s, j);
                        let b = self.idx(s, j + h);
                        let c = self.idx(s + 1, j);
                        let d = self.idx(s + 1, j + h);
                        let l_c = self.left[c];
                        let l_d = self.left[d];
                        let r_a = self.right[a];
                        let r_b = self.right[b];
                        self.left[a] = clamp_llr(boxplus(l_c, l_d + r_b));
                        self.left[b] = clamp_llr(boxplus(l_c, r_a) + l_d);
                    }
                    i += 2 * h;
                }
            }
            for s in 0..self.stages {
                let h = 1 << s;
                let mut i = 0;
                while i < n {
                    for j in i..i + h {
                        let a = self.idx(s, j);
                        let b = self.idx(s, j + h);
                        let c = self.idx(s + 1, j);
                        let d = self.idx(s + 1, j + h);
                        let l_c = self.left[c];
                        let l_d = self.left[d];
                        let r_a = self.right[a];
                        let r_b = self.right[b];
                        self.right[c] = clamp_llr(boxplus(r_a, r_b + l_d));
                        self.right[d] = clamp_llr(boxplus(r_a, l_c) + r_b);
                    }
                    i += 2 * h;
                }
            }
        }
    }

    /// Decision LLRs in the message domain (prior plus leftward belief).
    pub fn message_llrs(&self) -> Vec<f64> {
        (0..self.block_len)
            .map(|j| self.left[self.idx(0, j)] + self.right[self.idx(0, j)])
            .collect()
    }

    /// Extrinsic LLRs in the codeword domain: total belief minus the channel
    /// input, which is exactly the rightward message at the channel column.
    pub fn codeword_extrinsic(&self) -> &[f64] {
        &self.right[self.stages * self.block_len..]
    }

    /// Total codeword-domain LLRs (channel input plus extrinsic).
    pub fn codeword_llrs(&self) -> Vec<f64> {
        let base = self.stages * self.block_len;
        (0..self.block_len)
            .map(|j| self.left[base + j] + self.right[base + j])
            .collect()
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }
}

/// Result of a standalone decode.
#[derive(Debug, Clone)]
pub struct BpDecodeOutput {
    /// Message-domain decision LLRs (length N); positive favors 0.
    pub message_llrs: Vec<f64>,
    /// Codeword-domain extrinsic LLRs (length N).
    pub codeword_extrinsic: Vec<f64>,
}

impl BpDecodeOutput {
    /// Hard info-bit decisions at the spec's info set.
    pub fn info_bits(&self, spec: &PolarCodeSpec) -> Vec<u8> {
        spec.info_set()
            .iter()
            .map(|&i| u8::from(self.message_llrs[i] < 0.0))
            .collect()
    }
}

/// One-shot decode of channel LLRs.
pub fn bp_decode(
    channel_llrs: &[f64],
    spec: &PolarCodeSpec,
    iterations: usize,
) -> BpDecodeOutput {
    let mut dec = PolarBpDecoder::new(spec);
    dec.set_channel_llrs(channel_llrs);
    dec.iterate(iterations);
    BpDecodeOutput {
        message_llrs: dec.message_llrs(),
        codeword_extrinsic: dec.codeword_extrinsic().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{encode, polar_transform, pw_reliability, PolarCodeSpec};
    use super::*;
    use crate::rng::substream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn pw_spec(n: usize, k: usize) -> PolarCodeSpec {
        let info: Vec<usize> = pw_reliability(n).into_iter().take(k).collect();
        PolarCodeSpec::new(n, info).unwrap()
    }

    fn llrs_for(codeword: &[u8], magnitude: f64) -> Vec<f64> {
        codeword
            .iter()
            .map(|&b| if b == 0 { magnitude } else { -magnitude })
            .collect()
    }

    #[test]
    fn noiseless_codeword_decodes_to_its_info() {
        let spec = pw_spec(64, 32);
        let mut rng = substream(81, &[0]);
        for _ in 0..50 {
            let info: Vec<u8> = (0..32).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = encode(&info, &spec).unwrap();
            let out = bp_decode(&llrs_for(&cw, 50.0), &spec, 20);
            assert_eq!(out.info_bits(&spec), info);
        }
    }

    #[test]
    fn all_frozen_code_recovers_zero_codeword() {
        let spec = PolarCodeSpec::new(16, vec![]).unwrap();
        let mut rng = substream(82, &[0]);
        for _ in 0..20 {
            let llrs: Vec<f64> = (0..16).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let out = bp_decode(&llrs, &spec, 20);
            // No info bits; the re-encoded message word is all zeros.
            let mut u_hat: Vec<u8> = (0..16)
                .map(|i| u8::from(!spec.is_info(i) && false))
                .collect();
            polar_transform(&mut u_hat);
            assert_eq!(u_hat, vec![0u8; 16]);
            assert!(out.info_bits(&spec).is_empty());
            // Frozen priors dominate the message-domain decisions.
            for (i, &l) in out.message_llrs.iter().enumerate() {
                assert!(l >= 0.0, "frozen position {i} drifted negative: {l}");
            }
        }
    }

    #[test]
    fn high_snr_gaussian_frames_decode_error_free() {
        let spec = pw_spec(8, 4);
        let sigma = 0.35f64; // ~9 dB Eb/N0 at rate 1/2 BPSK
        let mut frame_errors = 0;
        for t in 0..1000u64 {
            let mut rng = substream(83, &[t]);
            let info: Vec<u8> = (0..4).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = encode(&info, &spec).unwrap();
            let llrs: Vec<f64> = cw
                .iter()
                .map(|&b| {
                    let tx = if b == 0 { 1.0 } else { -1.0 };
                    let noise: f64 = rng.sample(StandardNormal);
                    2.0 * (tx + sigma * noise) / (sigma * sigma)
                })
                .collect();
            let out = bp_decode(&llrs, &spec, 30);
            if out.info_bits(&spec) != info {
                frame_errors += 1;
            }
        }
        assert_eq!(frame_errors, 0);
    }

    #[test]
    fn noiseless_exact_at_practical_length() {
        let spec = pw_spec(256, 204);
        let mut rng = substream(84, &[0]);
        for _ in 0..100 {
            let info: Vec<u8> = (0..204).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = encode(&info, &spec).unwrap();
            let out = bp_decode(&llrs_for(&cw, 50.0), &spec, 30);
            assert_eq!(out.info_bits(&spec), info);
        }
    }

    #[test]
    fn messages_respect_clamp() {
        let spec = pw_spec(32, 16);
        let mut dec = PolarBpDecoder::new(&spec);
        dec.set_channel_llrs(&vec![1e9; 32]);
        dec.iterate(10);
        for &v in dec.message_llrs().iter() {
            assert!(v.abs() <= 2.0 * LLR_CLAMP + 1e-9);
        }
        for &v in dec.codeword_extrinsic() {
            assert!(v.abs() <= LLR_CLAMP + 1e-9);
        }
    }

    #[test]
    fn extrinsic_is_total_minus_channel_input() {
        let spec = pw_spec(16, 8);
        let mut rng = substream(85, &[0]);
        let llrs: Vec<f64> = (0..16).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut dec = PolarBpDecoder::new(&spec);
        dec.set_channel_llrs(&llrs);
        dec.iterate(5);
        let total = dec.codeword_llrs();
        let ext = dec.codeword_extrinsic();
        for j in 0..16 {
            assert!((total[j] - (llrs[j] + ext[j])).abs() < 1e-12);
        }
    }
}
