//! Per-trajectory random streams keyed by `(master seed, start, index)`.
//!
//! The master seed fixes the ChaCha key; the start state and trajectory
//! index select the 64-bit stream, so any trajectory can be replayed in
//! isolation and results do not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trajectory indices must fit below this.
pub const MAX_TRAJECTORIES: u64 = 1 << 40;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn key_from_seed(master_seed: u64) -> [u8; 32] {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

pub fn trajectory_rng(master_seed: u64, start: usize, index: u64) -> ChaCha8Rng {
    assert!(
        index < MAX_TRAJECTORIES,
        "trajectory index {index} too large"
    );
    assert!((start as u64) < (1 << 24), "start index {start} too large");
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(master_seed));
    rng.set_stream(((start as u64) << 40) | index);
    rng
}
