//! Named seed derivation. Every random stream in a run is seeded from the run
//! seed and a stable string id, so serial and parallel execution agree.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable across platforms and toolchains (unlike `std::hash`).
pub fn derive_seed(seed: u64, id: &str) -> u64 {
    let mut h = splitmix64(seed);
    for chunk in id.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = splitmix64(h ^ u64::from_le_bytes(word));
    }
    splitmix64(h ^ id.len() as u64)
}
