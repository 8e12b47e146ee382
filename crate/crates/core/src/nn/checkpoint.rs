use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BtcpNetwork, SgdState};
use crate::error::{contract, Result};

pub const CHECKPOINT_FORMAT: &str = "btcp-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Versioned JSON snapshot of network weights, optimizer velocities and the
/// generator state. Floats are written in shortest round-trip form, so a
/// save/load cycle is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub stage: String,
    pub epoch: usize,
    pub network: BtcpNetwork,
    pub optimizer: Option<SgdState>,
    pub rng_state: u64,
}

impl Checkpoint {
    pub fn new(
        stage: impl Into<String>,
        epoch: usize,
        network: BtcpNetwork,
        optimizer: Option<SgdState>,
        rng_state: u64,
    ) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_owned(),
            version: CHECKPOINT_VERSION,
            stage: stage.into(),
            epoch,
            network,
            optimizer,
            rng_state,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(contract(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        // Re-run constructor validation on the deserialized layers.
        BtcpNetwork::new(
            ck.network.encoder().clone(),
            ck.network.classifier().clone(),
            ck.network.uncertainty_head().clone(),
        )?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
