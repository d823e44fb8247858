//! Fixed, platform-independent hash functions used for routing and output
//! digests. These never change between runs or builds, which is what makes
//! plans and reports reproducible.

const VALUE_SALT: u64 = 0x6a09_e667_f3bc_c908;
const PAYLOAD_SALT: u64 = 0xbb67_ae85_84ca_a73b;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Common join-attribute hash `h(b)` shared by both relations.
#[inline]
pub fn hash_join_value(value: u32) -> u64 {
    mix64(u64::from(value) ^ VALUE_SALT)
}

/// Hash over the non-join payload, used to spread one value's tuples over a
/// processor group.
#[inline]
pub fn hash_payload(payload: u64) -> u64 {
    mix64(payload ^ PAYLOAD_SALT)
}

/// 128-bit hash of one joined triple. The two halves come from independent
/// mixing chains.
#[inline]
pub fn hash_triple(payload_r: u64, payload_s: u64, value: u32) -> u128 {
    let v = u64::from(value);
    let lo = mix64(mix64(mix64(payload_r ^ 0x3c6e_f372_fe94_f82b) ^ payload_s) ^ v);
    let hi = mix64(
        mix64(mix64(payload_s ^ 0xa54f_f53a_5f1d_36f1) ^ payload_r.rotate_left(17))
            ^ v.rotate_left(41),
    );
    (u128::from(hi) << 64) | u128::from(lo)
}

/// 32-bit FNV-1a, used to fold relation names into payload tokens.
pub fn fnv1a32(bytes: &[u8]) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in bytes {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}
