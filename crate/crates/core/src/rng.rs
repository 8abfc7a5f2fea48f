//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every random draw in the library comes from a stream keyed by
//! `(master seed, purpose tag, index)`. Streams are ChaCha8 generators whose
//! 256-bit key is expanded from that triple with SplitMix64, so the stream a
//! trial sees does not depend on how many other trials ran before it or on
//! which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Derives a child seed; used to hand a sub-procedure its own master seed.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut s = master;
    let a = splitmix64(&mut s);
    let mut s = a ^ fnv1a(tag);
    let b = splitmix64(&mut s);
    let mut s = b ^ index.wrapping_mul(GOLDEN).rotate_left(17);
    splitmix64(&mut s)
}

/// Opens the stream for `(master, tag, index)`.
pub fn stream(master: u64, tag: &str, index: u64) -> Rng {
    let mut s = derive_seed(master, tag, index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

pub fn normal<T: Scalar>(rng: &mut Rng) -> T {
    let v: f64 = StandardNormal.sample(rng);
    T::of(v)
}

pub fn sign<T: Scalar>(rng: &mut Rng) -> T {
    if rand::Rng::random::<bool>(rng) {
        T::one()
    } else {
        -T::one()
    }
}

pub fn uniform<T: Scalar>(rng: &mut Rng, lo: f64, hi: f64) -> T {
    let u: f64 = rand::Rng::random(rng);
    T::of(lo + (hi - lo) * u)
}
