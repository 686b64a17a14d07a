//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream identified by a
//! `(seed, stream)` pair. Work items (sphere-sample chunks, certification
//! pairs, sampled triples) each own a stream, so results never depend on how
//! many worker threads pick them up.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Samples per Monte Carlo chunk. Chunks are the unit of parallel work.
pub const CHUNK: usize = 8192;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Combines two words into a well-mixed stream id (splitmix64 finalizer).
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(a << 6).wrapping_add(a >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id for a direction, keyed by its coordinates quantized to 12 decimals.
pub fn direction_stream(u: &[f64]) -> u64 {
    quantize(u)
        .into_iter()
        .fold(0x5eed_u64, |acc, q| mix(acc, q as u64))
}

/// Cache key for a direction: coordinates rounded to 12 decimal digits.
pub fn quantize(u: &[f64]) -> Vec<i64> {
    u.iter().map(|x| (x * 1e12).round() as i64).collect()
}

/// Fills `out` with a uniform point on the unit sphere of `out.len()` dimensions.
pub fn unit_vector<R: rand::Rng>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for x in out.iter_mut() {
            *x = StandardNormal.sample(rng);
            norm2 += *x * *x;
        }
        if norm2 > 1e-300 {
            if out.len() == 1 {
                out[0] = out[0].signum();
                return;
            }
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_stream_same_values() {
        let a: Vec<u64> = (0..8).map({
            let mut r = stream_rng(42, 7);
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..8).map({
            let mut r = stream_rng(42, 7);
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let x: u64 = stream_rng(42, 0).random();
        let y: u64 = stream_rng(42, 1).random();
        let z: u64 = stream_rng(43, 0).random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn quantization_merges_nearby_directions() {
        let u = [0.6, 0.8];
        let v = [0.6 + 1e-14, 0.8];
        assert_eq!(direction_stream(&u), direction_stream(&v));
        assert_ne!(direction_stream(&u), direction_stream(&[0.8, 0.6]));
    }
}
