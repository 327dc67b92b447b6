//! Deterministic seed derivation.
//!
//! Every stochastic component in the crate draws its seed from a single base
//! seed through [`derive`], so a whole batch run is reproducible from one
//! `--seed` flag. The splitting rule: fold each salt word into the state with
//! an odd multiplier, then finalize with SplitMix64.

/// SplitMix64 finalizer (Steele et al.), a cheap full-avalanche mix.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a salt path such as
/// `[instance_index, planner_index]`.
pub fn derive(base: u64, salts: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &salt in salts {
        state = splitmix64(state ^ salt.wrapping_mul(0x9e3779b97f4a7c15));
    }
    state
}
