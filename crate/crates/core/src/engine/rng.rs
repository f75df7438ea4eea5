//! Counter-addressed uniform streams.
//!
//! Coordinate `c` of the `x` (flag 0) or `z` (flag 1) point of pair `i` in
//! replicate `r` is the 64-bit output at position `i·2d + flag·d + c` of the
//! ChaCha8 stream `r` keyed by the seed. Any pair can be generated without
//! generating the ones before it, so chunks can be filled independently.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Maps 64 random bits to `[0, 1)` with 53-bit resolution.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * INV_2_53
}

/// Supplies the `(x, z)` coordinates of a contiguous range of pairs.
pub trait PairSource: Sync {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    /// Writes pairs `start..start+count` into `x` and `z` (`count·d` values each).
    fn fill(&self, start: usize, count: usize, x: &mut [f64], z: &mut [f64]);
}

/// The seeded iid uniform stream of one replicate.
#[derive(Clone, Copy, Debug)]
pub struct StreamSource {
    pub seed: u64,
    pub replicate: u64,
    pub d: usize,
    pub n: usize,
}

impl StreamSource {
    fn rng_at(&self, pair: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.replicate);
        // two 32-bit words per u64, 2d u64 per pair
        rng.set_word_pos(pair as u128 * 4 * self.d as u128);
        rng
    }
}

impl PairSource for StreamSource {
    fn dim(&self) -> usize {
        self.d
    }

    fn len(&self) -> usize {
        self.n
    }

    fn fill(&self, start: usize, count: usize, x: &mut [f64], z: &mut [f64]) {
        let d = self.d;
        let mut rng = self.rng_at(start);
        for p in 0..count {
            for v in &mut x[p * d..(p + 1) * d] {
                *v = unit_f64(rng.next_u64());
            }
            for v in &mut z[p * d..(p + 1) * d] {
                *v = unit_f64(rng.next_u64());
            }
        }
    }
}

/// One pair drawn directly from its counter position.
pub fn draw_pair(seed: u64, replicate: u64, pair: usize, d: usize) -> (Vec<f64>, Vec<f64>) {
    let src = StreamSource { seed, replicate, d, n: pair + 1 };
    let (mut x, mut z) = (vec![0.0; d], vec![0.0; d]);
    src.fill(pair, 1, &mut x, &mut z);
    (x, z)
}

/// Explicit pairs, for exhaustive enumeration and replay.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSet {
    d: usize,
    x: Vec<f64>,
    z: Vec<f64>,
}

impl PairSet {
    pub fn new(d: usize) -> Self {
        Self { d, x: Vec::new(), z: Vec::new() }
    }

    pub fn push(&mut self, x: &[f64], z: &[f64]) {
        assert_eq!(x.len(), self.d, "x has the wrong dimension");
        assert_eq!(z.len(), self.d, "z has the wrong dimension");
        self.x.extend_from_slice(x);
        self.z.extend_from_slice(z);
    }

    pub fn n(&self) -> usize {
        self.x.len() / self.d
    }
}

impl PairSource for PairSet {
    fn dim(&self) -> usize {
        self.d
    }

    fn len(&self) -> usize {
        self.n()
    }

    fn fill(&self, start: usize, count: usize, x: &mut [f64], z: &mut [f64]) {
        let (a, b) = (start * self.d, (start + count) * self.d);
        x[..b - a].copy_from_slice(&self.x[a..b]);
        z[..b - a].copy_from_slice(&self.z[a..b]);
    }
}
