//! JSON group files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, DEFAULT_SIZE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Permutation,
    Table,
}

/// On-disk group description: permutation generators (0-based image
/// arrays) or an explicit Cayley table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub name: String,
    pub kind: GroupKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
}

impl GroupFile {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<FiniteGroup> {
        self.build_with_cap(DEFAULT_SIZE_CAP)
    }

    pub fn build_with_cap(&self, cap: usize) -> Result<FiniteGroup> {
        match self.kind {
            GroupKind::Permutation => {
                let degree = self
                    .degree
                    .ok_or_else(|| Error::InvalidParameter("permutation group file needs \"degree\"".into()))?;
                let gens = self
                    .generators
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("permutation group file needs \"generators\"".into()))?;
                FiniteGroup::from_permutations(&self.name, degree, gens, cap)
            }
            GroupKind::Table => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("table group file needs \"table\"".into()))?;
                FiniteGroup::from_table(&self.name, table)
            }
        }
    }
}
