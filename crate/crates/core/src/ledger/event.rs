use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Supply-chain stage, encoded as one byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum Stage {
    Farm = 0,
    Processing = 1,
    Shipping = 2,
    Retail = 3,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Farm, Stage::Processing, Stage::Shipping, Stage::Retail];

    pub fn from_u8(v: u8) -> Option<Stage> {
        Stage::ALL.get(v as usize).copied()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Farm => "FARM",
            Stage::Processing => "PROCESSING",
            Stage::Shipping => "SHIPPING",
            Stage::Retail => "RETAIL",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

/// One logistics step for one item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupplyChainEvent {
    pub item_id: String,
    pub stage: Stage,
    pub batch_number: String,
    pub origin: String,
    /// Centi-degrees Celsius.
    pub storage_temp: i32,
    pub expiry: u64,
    pub event_time: u64,
    #[serde(default)]
    pub ingredients_added: Vec<String>,
    #[serde(default)]
    pub declared_label: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("declared_label is only allowed at RETAIL (stage is {0})")]
    LabelOutsideRetail(Stage),
    #[error("ingredient {0:?} listed twice")]
    DuplicateIngredient(String),
}

impl SupplyChainEvent {
    pub fn check(&self) -> Result<(), EventError> {
        if self.stage != Stage::Retail && !self.declared_label.is_empty() {
            return Err(EventError::LabelOutsideRetail(self.stage));
        }
        let mut seen = BTreeSet::new();
        for ingredient in &self.ingredients_added {
            if !seen.insert(ingredient.as_str()) {
                return Err(EventError::DuplicateIngredient(ingredient.clone()));
            }
        }
        Ok(())
    }
}
