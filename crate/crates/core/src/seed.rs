//! Deterministic seed derivation.
//!
//! Every source of randomness in the crate flows from explicit seeds. When a
//! run needs several independent streams (per class, per epoch, per rerun)
//! the sub-seeds are derived here with an FNV-1a fold, so the streams are
//! stable across platforms and releases.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fold(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Derive an independent sub-seed from a base seed, a stream label and an
/// index within that stream.
pub fn derive_seed(base: u64, label: &str, index: u64) -> u64 {
    let mut h = fold(FNV_OFFSET, &base.to_le_bytes());
    h = fold(h, label.as_bytes());
    fold(h, &index.to_le_bytes())
}
