use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{BiometricError, BiometricTemplate, EncryptedTemplate, DIM};
use crate::hash::Hash32;

#[derive(Serialize, Deserialize)]
struct KeyRepr {
    key_id: u32,
    #[serde(default)]
    seed_note: Option<String>,
    permutation: Vec<u64>,
    signs: Vec<i64>,
}

/// Permutation plus per-coordinate sign flip.
///
/// `scramble(t)[i] = signs[i] * t[permutation[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KeyRepr", into = "KeyRepr")]
pub struct ScramblingKey {
    key_id: u32,
    seed_note: Option<String>,
    permutation: [u8; DIM],
    signs: [i8; DIM],
}

impl ScramblingKey {
    pub fn new(key_id: u32, permutation: [u8; DIM], signs: [i8; DIM]) -> Result<Self, BiometricError> {
        let mut seen = [false; DIM];
        for &p in &permutation {
            let p = p as usize;
            if p >= DIM || seen[p] {
                return Err(BiometricError::InvalidKey(format!("permutation is not a bijection (index {p})")));
            }
            seen[p] = true;
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(BiometricError::InvalidKey(format!("sign {s} is not +1 or -1")));
        }
        Ok(Self { key_id, seed_note: None, permutation, signs })
    }

    pub fn identity(key_id: u32) -> Self {
        let mut permutation = [0u8; DIM];
        for (i, p) in permutation.iter_mut().enumerate() {
            *p = i as u8;
        }
        Self { key_id, seed_note: None, permutation, signs: [1; DIM] }
    }

    pub fn with_seed_note(mut self, note: impl Into<String>) -> Self {
        self.seed_note = Some(note.into());
        self
    }

    pub fn key_id(&self) -> u32 {
        self.key_id
    }

    pub fn seed_note(&self) -> Option<&str> {
        self.seed_note.as_deref()
    }

    pub fn permutation(&self) -> &[u8; DIM] {
        &self.permutation
    }

    pub fn signs(&self) -> &[i8; DIM] {
        &self.signs
    }

    pub fn scramble(&self, t: &BiometricTemplate) -> Result<EncryptedTemplate, BiometricError> {
        let src = t.values();
        let mut out = [0i16; DIM];
        for (i, slot) in out.iter_mut().enumerate() {
            let j = self.permutation[i] as usize;
            *slot = if self.signs[i] < 0 {
                src[j].checked_neg().ok_or(BiometricError::Overflow { index: j })?
            } else {
                src[j]
            };
        }
        Ok(EncryptedTemplate::new(self.key_id, out))
    }
}

impl TryFrom<KeyRepr> for ScramblingKey {
    type Error = BiometricError;

    fn try_from(repr: KeyRepr) -> Result<Self, Self::Error> {
        if repr.permutation.len() != DIM || repr.signs.len() != DIM {
            return Err(BiometricError::InvalidKey(format!(
                "expected {DIM} permutation entries and {DIM} signs, got {} and {}",
                repr.permutation.len(),
                repr.signs.len()
            )));
        }
        let mut permutation = [0u8; DIM];
        for (slot, &p) in permutation.iter_mut().zip(&repr.permutation) {
            *slot = u8::try_from(p)
                .ok()
                .filter(|&p| (p as usize) < DIM)
                .ok_or_else(|| BiometricError::InvalidKey(format!("permutation entry {p} out of range")))?;
        }
        let mut signs = [0i8; DIM];
        for (slot, &s) in signs.iter_mut().zip(&repr.signs) {
            *slot = match s {
                1 => 1,
                -1 => -1,
                other => return Err(BiometricError::InvalidKey(format!("sign {other} is not +1 or -1"))),
            };
        }
        let mut key = ScramblingKey::new(repr.key_id, permutation, signs)?;
        key.seed_note = repr.seed_note;
        Ok(key)
    }
}

impl From<ScramblingKey> for KeyRepr {
    fn from(k: ScramblingKey) -> Self {
        KeyRepr {
            key_id: k.key_id,
            seed_note: k.seed_note,
            permutation: k.permutation.iter().map(|&p| u64::from(p)).collect(),
            signs: k.signs.iter().map(|&s| i64::from(s)).collect(),
        }
    }
}

/// Uniform draw from `0..=bound` by rejection, so the shuffle is unbiased and
/// independent of any library range-sampling algorithm.
fn draw_at_most(rng: &mut ChaCha20Rng, bound: u32) -> u32 {
    let span = u64::from(bound) + 1;
    let limit = (1u64 << 32) / span * span;
    loop {
        let x = u64::from(rng.next_u32());
        if x < limit {
            return (x % span) as u32;
        }
    }
}

/// Deterministically derives a key from `(seed, key_id)`.
///
/// The stream is ChaCha20 keyed by `SHA-256("bbc/scrambling-key" || seed || key_id)`
/// (both big-endian). A Fisher-Yates shuffle consumes it first, then one fair
/// coin per coordinate picks the sign.
pub fn derive_key(seed: u64, key_id: u32) -> ScramblingKey {
    let mut material = Vec::with_capacity(30);
    material.extend_from_slice(b"bbc/scrambling-key");
    material.extend_from_slice(&seed.to_be_bytes());
    material.extend_from_slice(&key_id.to_be_bytes());
    let mut rng = ChaCha20Rng::from_seed(Hash32::digest(&material).0);

    let mut permutation = [0u8; DIM];
    for (i, p) in permutation.iter_mut().enumerate() {
        *p = i as u8;
    }
    for i in (1..DIM).rev() {
        let j = draw_at_most(&mut rng, i as u32) as usize;
        permutation.swap(i, j);
    }
    let mut signs = [1i8; DIM];
    for s in signs.iter_mut() {
        if rng.next_u32() & 1 == 1 {
            *s = -1;
        }
    }
    ScramblingKey { key_id, seed_note: Some(format!("seed={seed}")), permutation, signs }
}
