//! Synthetic template generators standing in for real feature extraction.

use rand::Rng;

use super::{BiometricTemplate, DIM};

/// Enrollment-style template: each coordinate uniform in `[-1024, 1024]`.
pub fn template<R: Rng + ?Sized>(rng: &mut R) -> BiometricTemplate {
    let mut v = [0i16; DIM];
    for x in v.iter_mut() {
        *x = rng.gen_range(-1024..=1024);
    }
    BiometricTemplate::new(v)
}

/// A fresh capture of the same person: per-coordinate uniform noise in
/// `[-amplitude, amplitude]`, saturating at the i16 bounds (excluding -32768).
pub fn genuine_probe<R: Rng + ?Sized>(base: &BiometricTemplate, amplitude: i16, rng: &mut R) -> BiometricTemplate {
    let mut v = *base.values();
    for x in v.iter_mut() {
        let noisy = i32::from(*x) + rng.gen_range(-i32::from(amplitude)..=i32::from(amplitude));
        *x = noisy.clamp(-32767, 32767) as i16;
    }
    BiometricTemplate::new(v)
}

/// Default genuine-capture noise amplitude, in fixed-point units.
pub const GENUINE_NOISE: i16 = 16;
