//! Synthetic biometric templates, the scrambling transform and encrypted-domain
//! verification.
//!
//! Templates are 64 signed 16-bit fixed-point features (scale 1/1024). A
//! [`ScramblingKey`] permutes coordinates and flips signs, which is an exact
//! isometry of the squared Euclidean distance: a probe scrambled under the
//! actor's key can be matched against the scrambled enrollment without either
//! side ever being unscrambled.

mod key;
mod registry;
pub mod synthetic;
mod template;

pub use key::{derive_key, ScramblingKey};
pub use registry::{verify, ActorRecord, ActorRegistry, MatchDecision, Role};
pub use template::{BiometricTemplate, EncryptedTemplate};

use thiserror::Error;

/// Number of features in a template.
pub const DIM: usize = 64;

/// Fixed-point scale: a stored value `v` means `v / 1024` feature units.
pub const FIXED_POINT_SCALE: i32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BiometricError {
    #[error("template must have {DIM} values, got {0}")]
    Length(usize),
    #[error("template value {value} at index {index} is outside the signed 16-bit range")]
    ValueRange { index: usize, value: i64 },
    #[error("sign flip of -32768 at source index {index} overflows")]
    Overflow { index: usize },
    #[error("template component at index {index} is -32768 and cannot be enrolled")]
    TemplateRange { index: usize },
    #[error("encrypted templates under key {left} and key {right} are not comparable")]
    KeyMismatch { left: u32, right: u32 },
    #[error("actor {0} is already enrolled")]
    DuplicateActor(u32),
    #[error("actor {0} is not enrolled")]
    UnknownActor(u32),
    #[error("invalid scrambling key: {0}")]
    InvalidKey(String),
}

/// Exact squared Euclidean distance between two value vectors.
///
/// The worst case is 64 * 65535^2 < 2^38, so u64 cannot overflow.
pub(crate) fn squared_distance(a: &[i16; DIM], b: &[i16; DIM]) -> u64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum()
}
