use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mlp::ReluMLP;
use super::model::{Accounting, Mode};
use crate::numerics::CertifiedReal;

/// Named certified quantities produced during synthesis.
#[derive(Clone, Debug, Default)]
pub struct BoundLedger {
    entries: BTreeMap<String, CertifiedReal>,
}

impl BoundLedger {
    pub fn insert(&mut self, name: &str, v: CertifiedReal) {
        self.entries.insert(name.to_string(), v);
    }

    pub fn get(&self, name: &str) -> Option<&CertifiedReal> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &CertifiedReal)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> BTreeMap<String, LedgerEntry> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), LedgerEntry::from_real(v)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    /// Outward-rounded decimal enclosure.
    pub interval: String,
    pub approx: f64,
}

impl LedgerEntry {
    pub fn from_real(v: &CertifiedReal) -> Self {
        LedgerEntry { interval: v.interval_string(6), approx: v.to_f64() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub name: String,
    pub width: usize,
    pub depth: usize,
    pub param_count: u64,
    pub max_bit_complexity: u64,
}

impl ComponentReport {
    pub fn of(name: &str, net: &ReluMLP) -> Self {
        ComponentReport {
            name: name.to_string(),
            width: net.width(),
            depth: net.depth(),
            param_count: net.param_count(),
            max_bit_complexity: net.max_bit_complexity(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub variant: String,
    pub mode: Option<Mode>,
    #[serde(rename = "N")]
    pub n_sequences: usize,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "C")]
    pub num_classes: u64,
    pub seed: u64,
    /// Largest hidden dimension of the feed-forward stacks.
    pub width: usize,
    /// Largest dimension over all blocks, including attention.
    pub block_width: usize,
    pub depth: usize,
    pub param_count: u64,
    pub max_bit_complexity: u64,
    pub components: Vec<ComponentReport>,
    pub bound_ledger: BTreeMap<String, LedgerEntry>,
}

impl SynthesisReport {
    pub fn accounting(&self) -> Accounting {
        Accounting {
            width: self.width,
            depth: self.depth,
            param_count: self.param_count,
            max_bit_complexity: self.max_bit_complexity,
        }
    }

    pub fn ledger_value(&self, name: &str) -> Option<f64> {
        self.bound_ledger.get(name).map(|e| e.approx)
    }
}
