//! Polar code: parameters, encoder, iterative decoder, and construction.

mod bp;
mod construction;
mod gena;

pub use bp::{bp_decode, BpDecodeOutput, PolarBpDecoder, LLR_CLAMP};
pub use construction::{
    base_bhattacharyya, bhattacharyya_profile, predetermined_sets, predetermined_sets_from_base,
    pw_reliability, ConstructionParams,
};
pub use gena::{gena_construct, GenAConfig, GenAOutcome};

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Block length, dimension, and information-bit index set of a polar code.
/// Frozen positions (the complement of the info set) carry zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCodeSpec {
    block_len: usize,
    info_set: Vec<usize>,
    is_info: Vec<bool>,
}

impl PolarCodeSpec {
    pub fn new(block_len: usize, mut info_set: Vec<usize>) -> Result<Self> {
        if !block_len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "block length {block_len} is not a power of two"
            )));
        }
        info_set.sort_unstable();
        let before = info_set.len();
        info_set.dedup();
        if info_set.len() != before {
            return Err(Error::InvalidParameter("duplicate info indices".into()));
        }
        if info_set.iter().any(|&i| i >= block_len) {
            return Err(Error::InvalidParameter("info index out of range".into()));
        }
        let mut is_info = vec![false; block_len];
        for &i in &info_set {
            is_info[i] = true;
        }
        Ok(Self {
            block_len,
            info_set,
            is_info,
        })
    }

    #[inline]
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.info_set.len()
    }

    #[inline]
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    #[inline]
    pub fn is_info(&self, idx: usize) -> bool {
        self.is_info[idx]
    }

    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.block_len as f64
    }

    /// Two-line text form: `N K` then the ascending zero-based info indices.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.block_len, self.dimension());
        let indices: Vec<String> = self.info_set.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "{}", indices.join(" "));
        s
    }

    pub fn to_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn from_file_string(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::CodeFile("missing header line".into()))?;
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::CodeFile("bad block length".into()))?;
        let k: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::CodeFile("bad dimension".into()))?;
        let indices_line = lines.next().unwrap_or("");
        let info_set: Vec<usize> = indices_line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::CodeFile(format!("bad index '{t}'")))
            })
            .collect::<Result<_>>()?;
        if info_set.len() != k {
            return Err(Error::CodeFile(format!(
                "header promises {k} indices, found {}",
                info_set.len()
            )));
        }
        if info_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::CodeFile("indices must be ascending".into()));
        }
        Self::new(n, info_set)
    }

    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_file_string(&std::fs::read_to_string(path)?)
    }
}

/// In-place binary polar transform: the n-fold Kronecker power of the
/// `[[1,0],[1,1]]` kernel in natural (non-bit-reversed) order.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        let mut i = 0;
        while i < n {
            for j in i..i + h {
                bits[j] ^= bits[j + h];
            }
            i += 2 * h;
        }
        h *= 2;
    }
}

/// Encode: place info bits at the info set, zeros elsewhere, and apply the
/// polar transform.
pub fn encode(info_bits: &[u8], spec: &PolarCodeSpec) -> Result<Vec<u8>> {
    if info_bits.len() != spec.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} info bits, got {}",
            spec.dimension(),
            info_bits.len()
        )));
    }
    let mut x = vec![0u8; spec.block_len()];
    for (&bit, &idx) in info_bits.iter().zip(spec.info_set()) {
        x[idx] = bit & 1;
    }
    polar_transform(&mut x);
    Ok(x)
}
