//! Halton-style radical-inverse sequences.

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in the base of the `dim`-th prime, in `[0, 1)`.
pub fn radical_inverse(mut index: u64, dim: usize) -> f64 {
    let base = PRIMES[dim % PRIMES.len()];
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    out
}

/// The `index`-th Halton point in `dims` dimensions, shifted off zero.
pub fn halton(index: u64, dims: usize) -> Vec<f64> {
    (0..dims).map(|d| radical_inverse(index + 1, d)).collect()
}
