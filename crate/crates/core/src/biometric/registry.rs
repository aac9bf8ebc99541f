use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BiometricError, BiometricTemplate, EncryptedTemplate, ScramblingKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    Farmer,
    Processor,
    Shipper,
    Retailer,
}

/// An enrolled actor. Holds only the scrambled template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorRecord {
    pub actor_id: u32,
    pub role: Role,
    pub enrolled: EncryptedTemplate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub score: u64,
    pub threshold: u64,
    pub accepted: bool,
}

impl MatchDecision {
    pub fn from_score(score: u64, threshold: u64) -> Self {
        Self { score, threshold, accepted: score <= threshold }
    }
}

/// Compares a scrambled probe with an enrolled record. Pure threshold rule.
pub fn verify(
    probe: &EncryptedTemplate,
    record: &ActorRecord,
    threshold: u64,
) -> Result<MatchDecision, BiometricError> {
    let score = probe.distance(&record.enrolled)?;
    Ok(MatchDecision::from_score(score, threshold))
}

/// Actor registry; the in-process verification service validators call into.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorRegistry {
    #[serde(with = "actor_list")]
    actors: BTreeMap<u32, ActorRecord>,
}

impl ActorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.actors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actors.is_empty()
    }

    pub fn get(&self, actor_id: u32) -> Option<&ActorRecord> {
        self.actors.get(&actor_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActorRecord> {
        self.actors.values()
    }

    /// Scrambles `template` under `key` and stores the result. The raw template
    /// is not retained.
    pub fn enroll(
        &mut self,
        actor_id: u32,
        role: Role,
        template: &BiometricTemplate,
        key: &ScramblingKey,
    ) -> Result<&ActorRecord, BiometricError> {
        if self.actors.contains_key(&actor_id) {
            return Err(BiometricError::DuplicateActor(actor_id));
        }
        if let Some(index) = template.values().iter().position(|&v| v == i16::MIN) {
            return Err(BiometricError::TemplateRange { index });
        }
        let enrolled = key.scramble(template)?;
        Ok(self.actors.entry(actor_id).or_insert(ActorRecord { actor_id, role, enrolled }))
    }

    pub fn verify_actor(
        &self,
        actor_id: u32,
        probe: &EncryptedTemplate,
        threshold: u64,
    ) -> Result<MatchDecision, BiometricError> {
        let record = self.get(actor_id).ok_or(BiometricError::UnknownActor(actor_id))?;
        verify(probe, record, threshold)
    }
}

mod actor_list {
    use std::collections::BTreeMap;

    use serde::{de, Deserialize, Deserializer, Serializer};

    use super::ActorRecord;

    pub fn serialize<S: Serializer>(actors: &BTreeMap<u32, ActorRecord>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(actors.values())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, ActorRecord>, D::Error> {
        let list = Vec::<ActorRecord>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for record in list {
            let id = record.actor_id;
            if out.insert(id, record).is_some() {
                return Err(de::Error::custom(format!("actor {id} listed twice")));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biometric::{derive_key, DIM};

    fn template(fill: i16) -> BiometricTemplate {
        let mut v = [fill; DIM];
        v[0] = 100;
        BiometricTemplate::new(v)
    }

    #[test]
    fn enroll_then_lookup() {
        let mut reg = ActorRegistry::new();
        let rec = reg.enroll(7, Role::Farmer, &template(3), &derive_key(7, 1)).unwrap();
        assert_eq!(rec.actor_id, 7);
        assert_eq!(rec.enrolled.key_id(), 1);
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn duplicate_actor_rejected() {
        let mut reg = ActorRegistry::new();
        let key = derive_key(7, 1);
        reg.enroll(7, Role::Farmer, &template(3), &key).unwrap();
        assert_eq!(reg.enroll(7, Role::Shipper, &template(4), &key).unwrap_err(), BiometricError::DuplicateActor(7));
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn min_value_rejected_even_without_flip() {
        let mut reg = ActorRegistry::new();
        let mut v = [0i16; DIM];
        v[9] = i16::MIN;
        let err = reg.enroll(1, Role::Retailer, &BiometricTemplate::new(v), &ScramblingKey::identity(1));
        assert_eq!(err.unwrap_err(), BiometricError::TemplateRange { index: 9 });
        assert!(reg.is_empty());
    }

    #[test]
    fn exact_probe_scores_zero() {
        let mut reg = ActorRegistry::new();
        let rec = reg.enroll(2, Role::Processor, &template(-50), &derive_key(1, 9)).unwrap().clone();
        let d = verify(&rec.enrolled, &rec, 0).unwrap();
        assert_eq!(d, MatchDecision { score: 0, threshold: 0, accepted: true });
    }

    #[test]
    fn threshold_rule_is_inclusive() {
        assert!(MatchDecision::from_score(10, 10).accepted);
        assert!(!MatchDecision::from_score(11, 10).accepted);
    }

    #[test]
    fn verify_rejects_foreign_key() {
        let mut reg = ActorRegistry::new();
        reg.enroll(2, Role::Processor, &template(1), &derive_key(1, 9)).unwrap();
        let probe = derive_key(1, 10).scramble(&template(1)).unwrap();
        assert!(matches!(reg.verify_actor(2, &probe, u64::MAX), Err(BiometricError::KeyMismatch { .. })));
        assert_eq!(reg.verify_actor(3, &probe, 0).unwrap_err(), BiometricError::UnknownActor(3));
    }

    #[test]
    fn registry_json_is_actor_list() {
        let mut reg = ActorRegistry::new();
        reg.enroll(5, Role::Shipper, &template(2), &derive_key(3, 5)).unwrap();
        reg.enroll(1, Role::Farmer, &template(2), &derive_key(3, 1)).unwrap();
        let v = serde_json::to_value(&reg).unwrap();
        assert_eq!(v["actors"][0]["actor_id"], 1);
        assert_eq!(v["actors"][1]["role"], "SHIPPER");
        let back: ActorRegistry = serde_json::from_value(v).unwrap();
        assert_eq!(back, reg);
    }
}
