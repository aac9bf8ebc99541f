use serde::{Deserialize, Serialize};

use super::event::{EventError, Stage, SupplyChainEvent};
use crate::biometric::{EncryptedTemplate, DIM};
use crate::codec::{DecodeError, Reader, Writer};
use crate::hash::Hash32;

/// Who signed off a step, as a scrambled-domain match against their enrollment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BiometricAttestation {
    pub actor_id: u32,
    pub encrypted_probe: EncryptedTemplate,
    pub match_score: u64,
    pub accepted: bool,
    pub verifier_node: u32,
    pub nonce: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub event: SupplyChainEvent,
    pub attestation: BiometricAttestation,
    /// SHA-256 of the canonical bytes, which exclude this field.
    pub tx_id: Hash32,
}

impl Transaction {
    pub fn new(event: SupplyChainEvent, attestation: BiometricAttestation) -> Result<Self, EventError> {
        event.check()?;
        let mut tx = Transaction { event, attestation, tx_id: Hash32::ZERO };
        tx.tx_id = tx.compute_id();
        Ok(tx)
    }

    pub fn compute_id(&self) -> Hash32 {
        Hash32::digest(&self.canonical_bytes())
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_capacity(512);
        self.encode_into(&mut w);
        w.into_bytes()
    }

    pub fn encode_into(&self, w: &mut Writer) {
        let e = &self.event;
        w.str(&e.item_id)
            .u8(e.stage as u8)
            .str(&e.batch_number)
            .str(&e.origin)
            .i32(e.storage_temp)
            .u64(e.expiry)
            .u64(e.event_time)
            .strs(&e.ingredients_added)
            .strs(&e.declared_label);
        let a = &self.attestation;
        w.u32(a.actor_id).u32(a.encrypted_probe.key_id());
        for &v in a.encrypted_probe.values() {
            w.i16(v);
        }
        w.u64(a.match_score).bool(a.accepted).u32(a.verifier_node).u64(a.nonce);
    }

    /// Reads the canonical bytes of one transaction. The returned value carries
    /// a zero `tx_id`; callers set it from storage or recompute it.
    pub fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let item_id = r.str()?;
        let at = r.position();
        let stage_code = r.u8()?;
        let stage = Stage::from_u8(stage_code).ok_or(DecodeError::InvalidTag {
            what: "stage",
            value: stage_code.into(),
            at,
        })?;
        let event = SupplyChainEvent {
            item_id,
            stage,
            batch_number: r.str()?,
            origin: r.str()?,
            storage_temp: r.i32()?,
            expiry: r.u64()?,
            event_time: r.u64()?,
            ingredients_added: r.strs()?,
            declared_label: r.strs()?,
        };
        let actor_id = r.u32()?;
        let key_id = r.u32()?;
        let mut values = [0i16; DIM];
        for (v, b) in values.iter_mut().zip(r.take(2 * DIM)?.chunks_exact(2)) {
            *v = i16::from_be_bytes([b[0], b[1]]);
        }
        let attestation = BiometricAttestation {
            actor_id,
            encrypted_probe: EncryptedTemplate::new(key_id, values),
            match_score: r.u64()?,
            accepted: r.bool()?,
            verifier_node: r.u32()?,
            nonce: r.u64()?,
        };
        Ok(Transaction { event, attestation, tx_id: Hash32::ZERO })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> Transaction {
        let event = SupplyChainEvent {
            item_id: "x".into(),
            stage: Stage::Retail,
            batch_number: "b".into(),
            origin: "o".into(),
            storage_temp: -5,
            expiry: 9,
            event_time: 3,
            ingredients_added: vec!["salt".into()],
            declared_label: vec!["salt".into()],
        };
        let attestation = BiometricAttestation {
            actor_id: 1,
            encrypted_probe: EncryptedTemplate::new(2, [3; DIM]),
            match_score: 4,
            accepted: true,
            verifier_node: 0,
            nonce: 77,
        };
        Transaction::new(event, attestation).unwrap()
    }

    #[test]
    fn tx_id_covers_canonical_bytes() {
        let tx = sample();
        assert_eq!(tx.tx_id, Hash32::digest(&tx.canonical_bytes()));
        let mut other = tx.clone();
        other.attestation.nonce += 1;
        assert_ne!(other.compute_id(), tx.tx_id);
    }

    #[test]
    fn encoding_length() {
        // item 4+1, stage 1, batch 4+1, origin 4+1, temp 4, expiry 8, time 8,
        // ingredients 4+4+4, label 4+4+4, actor 4, key 4, values 128, score 8,
        // accepted 1, node 4, nonce 8
        assert_eq!(sample().canonical_bytes().len(), 5 + 1 + 5 + 5 + 4 + 8 + 8 + 12 + 12 + 4 + 4 + 128 + 8 + 1 + 4 + 8);
    }

    #[test]
    fn decode_inverts_encode() {
        let tx = sample();
        let bytes = tx.canonical_bytes();
        let mut r = Reader::new(&bytes);
        let mut back = Transaction::decode_from(&mut r).unwrap();
        r.finish().unwrap();
        back.tx_id = back.compute_id();
        assert_eq!(back, tx);
    }

    #[test]
    fn invalid_event_rejected_at_construction() {
        let mut tx = sample();
        tx.event.stage = Stage::Farm;
        assert!(Transaction::new(tx.event, tx.attestation).is_err());
    }

    #[test]
    fn stage_byte_out_of_range() {
        let mut bytes = sample().canonical_bytes();
        bytes[5] = 4;
        assert!(matches!(
            Transaction::decode_from(&mut Reader::new(&bytes)),
            Err(DecodeError::InvalidTag { what: "stage", value: 4, at: 5 })
        ));
    }
}
