//! Counter-based seed derivation so that replication `r` draws the same
//! stream no matter which worker runs it.

/// Stream tags.
pub const COEFFICIENTS: u64 = 0x636f_6566;
pub const INNOVATIONS: u64 = 0x696e_6e6f;
pub const PROFILE: u64 = 0x7072_6f66;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under `master`.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)).wrapping_add(index))
}
