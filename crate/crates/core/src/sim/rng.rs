//! Seeded pseudo-random streams.
//!
//! Each stream is a xorshift64* generator whose 64-bit state is derived from
//! `(seed, stream_id)` by two rounds of SplitMix64:
//!
//! ```text
//! state0 = splitmix64(splitmix64(seed ^ (stream_id * 0x9E3779B97F4A7C15)))
//! next:   x ^= x >> 12; x ^= x << 25; x ^= x >> 27; out = x * 0x2545F4914F6CDD1D
//! ```
//!
//! All arithmetic is wrapping `u64`, so the sequence for a given
//! `(seed, stream_id)` is identical on every platform.

use super::SimError;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const XORSHIFT_MULT: u64 = 0x2545_F491_4F6C_DD1D;

/// Stream id reserved for topology generation. Node streams use the node id.
pub const TOPOLOGY_STREAM: u64 = u64::MAX;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    state: u64,
    draws: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut state = splitmix64(splitmix64(seed ^ stream_id.wrapping_mul(GOLDEN_GAMMA)));
        if state == 0 {
            state = GOLDEN_GAMMA;
        }
        RandomStream {
            seed,
            stream_id,
            state,
            draws: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of raw 64-bit outputs consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        self.draws += 1;
        x.wrapping_mul(XORSHIFT_MULT)
    }

    /// Uniform integer in the inclusive range `[lo, hi]`, unbiased by rejection.
    pub fn uniform_int(&mut self, lo: i64, hi: i64) -> Result<i64, SimError> {
        if lo > hi {
            return Err(SimError::EmptyRange { lo, hi });
        }
        let span = (hi as i128 - lo as i128 + 1) as u128;
        if span > u64::MAX as u128 {
            return Ok(self.next_u64() as i64);
        }
        let span = span as u64;
        // 2^64 mod span values at the top of the range would bias the modulus.
        let rem = (u64::MAX % span + 1) % span;
        let threshold = u64::MAX - rem;
        loop {
            let v = self.next_u64();
            if v <= threshold {
                return Ok((lo as i128 + (v % span) as i128) as i64);
            }
        }
    }

    /// Uniform index in `[0, n)`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> Result<usize, SimError> {
        if n == 0 {
            return Err(SimError::EmptyRange { lo: 0, hi: -1 });
        }
        Ok(self.uniform_int(0, n as i64 - 1)? as usize)
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    pub fn uniform_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        self.uniform_f64() < p
    }

    /// Exponentially distributed value with the given mean.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * (1.0 - self.uniform_f64()).ln()
    }
}
