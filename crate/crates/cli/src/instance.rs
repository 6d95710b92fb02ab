use std::path::Path;

use serde::{Deserialize, Serialize};
use ssum_core::{ProductInstance, SimulInstance, SsumInstance, UbssumInstance};

use crate::error::CliError;

/// On-disk instance: one JSON object tagged by `kind`, with an optional
/// promise `k` on the number of solutions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceFile {
    Ssum {
        a: Vec<u64>,
        t: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u64>,
    },
    Simul {
        rows: Vec<Vec<u64>>,
        targets: Vec<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u64>,
    },
    Product {
        a: Vec<u64>,
        t: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u64>,
    },
    Ubssum {
        a: Vec<u64>,
        t: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u64>,
    },
}

#[derive(Debug, Clone)]
pub enum Instance {
    Ssum(SsumInstance),
    Simul(SimulInstance),
    Product(ProductInstance),
    Ubssum(UbssumInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Ssum(_) => "ssum",
            Instance::Simul(_) => "simul",
            Instance::Product(_) => "product",
            Instance::Ubssum(_) => "ubssum",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Instance::Ssum(i) => i.n(),
            Instance::Simul(i) => i.n(),
            Instance::Product(i) => i.n(),
            Instance::Ubssum(i) => i.a.len(),
        }
    }
}

impl InstanceFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Malformed(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))
    }

    pub fn into_instance(self) -> Result<(Instance, Option<u64>), CliError> {
        Ok(match self {
            InstanceFile::Ssum { a, t, k } => (Instance::Ssum(SsumInstance::new(a, t)?), k),
            InstanceFile::Simul { rows, targets, k } => {
                (Instance::Simul(SimulInstance::new(rows, targets)?), k)
            }
            InstanceFile::Product { a, t, k } => {
                (Instance::Product(ProductInstance::new(a, t)?), k)
            }
            InstanceFile::Ubssum { a, t, k } => (Instance::Ubssum(UbssumInstance::new(a, t)?), k),
        })
    }
}

impl From<&SsumInstance> for InstanceFile {
    fn from(i: &SsumInstance) -> Self {
        InstanceFile::Ssum {
            a: i.a.clone(),
            t: i.t,
            k: None,
        }
    }
}

impl From<&SimulInstance> for InstanceFile {
    fn from(i: &SimulInstance) -> Self {
        InstanceFile::Simul {
            rows: i.rows.clone(),
            targets: i.targets.clone(),
            k: None,
        }
    }
}
