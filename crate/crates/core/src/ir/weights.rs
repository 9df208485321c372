use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Model;
use crate::error::{MemcapError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightHeader {
    pub variant: String,
    #[serde(rename = "N")]
    pub n_sequences: usize,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "C")]
    pub num_classes: u64,
    pub r: String,
    pub delta: String,
    pub seed: u64,
    pub bits_budget: Option<u64>,
    /// Ledger quantities as decimal interval strings.
    pub ledger: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub schema_version: u32,
    pub header: WeightHeader,
    pub model: Model,
}

impl WeightFile {
    pub fn new(header: WeightHeader, model: Model) -> Self {
        WeightFile { schema_version: SCHEMA_VERSION, header, model }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wf: WeightFile = serde_json::from_str(s)?;
        if wf.schema_version != SCHEMA_VERSION {
            return Err(MemcapError::Schema(format!(
                "unsupported schema version {}",
                wf.schema_version
            )));
        }
        Ok(wf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
