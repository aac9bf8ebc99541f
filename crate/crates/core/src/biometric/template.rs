use serde::{Deserialize, Serialize};

use super::{squared_distance, BiometricError, DIM};

#[derive(Serialize, Deserialize)]
struct ValuesRepr {
    values: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct EncryptedRepr {
    key_id: u32,
    values: Vec<i64>,
}

fn to_array(values: &[i64]) -> Result<[i16; DIM], BiometricError> {
    if values.len() != DIM {
        return Err(BiometricError::Length(values.len()));
    }
    let mut out = [0i16; DIM];
    for (index, (&value, slot)) in values.iter().zip(out.iter_mut()).enumerate() {
        *slot = i16::try_from(value).map_err(|_| BiometricError::ValueRange { index, value })?;
    }
    Ok(out)
}

/// A raw-domain feature vector. Never stored on the ledger.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ValuesRepr", into = "ValuesRepr")]
pub struct BiometricTemplate {
    values: [i16; DIM],
}

impl BiometricTemplate {
    pub fn new(values: [i16; DIM]) -> Self {
        Self { values }
    }

    /// Builds a template from wide integers, rejecting anything outside i16.
    pub fn from_slice(values: &[i64]) -> Result<Self, BiometricError> {
        to_array(values).map(Self::new)
    }

    pub fn values(&self) -> &[i16; DIM] {
        &self.values
    }

    pub fn distance(&self, other: &BiometricTemplate) -> u64 {
        squared_distance(&self.values, &other.values)
    }
}

impl std::fmt::Debug for BiometricTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BiometricTemplate").finish_non_exhaustive()
    }
}

impl TryFrom<ValuesRepr> for BiometricTemplate {
    type Error = BiometricError;

    fn try_from(repr: ValuesRepr) -> Result<Self, Self::Error> {
        Self::from_slice(&repr.values)
    }
}

impl From<BiometricTemplate> for ValuesRepr {
    fn from(t: BiometricTemplate) -> Self {
        ValuesRepr { values: t.values.iter().map(|&v| i64::from(v)).collect() }
    }
}

/// A template in the scrambled domain, tagged with the key it was scrambled under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EncryptedRepr", into = "EncryptedRepr")]
pub struct EncryptedTemplate {
    key_id: u32,
    values: [i16; DIM],
}

impl EncryptedTemplate {
    pub fn new(key_id: u32, values: [i16; DIM]) -> Self {
        Self { key_id, values }
    }

    pub fn key_id(&self) -> u32 {
        self.key_id
    }

    pub fn values(&self) -> &[i16; DIM] {
        &self.values
    }

    /// Squared distance in the scrambled domain. Operands under different keys
    /// are never compared.
    pub fn distance(&self, other: &EncryptedTemplate) -> Result<u64, BiometricError> {
        if self.key_id != other.key_id {
            return Err(BiometricError::KeyMismatch { left: self.key_id, right: other.key_id });
        }
        Ok(squared_distance(&self.values, &other.values))
    }
}

impl TryFrom<EncryptedRepr> for EncryptedTemplate {
    type Error = BiometricError;

    fn try_from(repr: EncryptedRepr) -> Result<Self, Self::Error> {
        Ok(Self::new(repr.key_id, to_array(&repr.values)?))
    }
}

impl From<EncryptedTemplate> for EncryptedRepr {
    fn from(t: EncryptedTemplate) -> Self {
        EncryptedRepr { key_id: t.key_id, values: t.values.iter().map(|&v| i64::from(v)).collect() }
    }
}
