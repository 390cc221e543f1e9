//! The shipped group and character-table corpus, embedded at compile time.

use crate::characters::CharacterTable;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::io::GroupFile;

macro_rules! embedded {
    ($dir:literal: $($key:literal),* $(,)?) => {
        &[$(($key, include_str!(concat!("../data/", $dir, "/", $key, ".json")))),*]
    };
}

const GROUPS: &[(&str, &str)] = embedded!("groups":
    "z2", "z3", "z5", "z7", "z11", "z13", "z17", "z19", "z23", "z29", "z31",
    "z6", "q8", "d8", "a4", "s4", "a5", "s5", "a6", "a7",
    "psl2_7", "psl2_8", "psl2_11", "sl2_3",
    "z4", "z8", "z9", "z10", "z12", "s3",
);

const TABLES: &[(&str, &str)] = embedded!("tables":
    "z2", "z3", "z4", "z5", "z6", "z7", "z8", "z9", "z10", "z11", "z12",
    "s3", "d8", "q8", "a4", "s4", "a5", "s5", "psl2_7",
);

/// Keys of every shipped group file.
pub fn group_keys() -> impl Iterator<Item = &'static str> {
    GROUPS.iter().map(|(k, _)| *k)
}

/// Keys of every shipped character table; each names a group of the same key.
pub fn table_keys() -> impl Iterator<Item = &'static str> {
    TABLES.iter().map(|(k, _)| *k)
}

pub fn group_json(key: &str) -> Option<&'static str> {
    GROUPS.iter().find(|(k, _)| *k == key).map(|(_, s)| *s)
}

pub fn table_json(key: &str) -> Option<&'static str> {
    TABLES.iter().find(|(k, _)| *k == key).map(|(_, s)| *s)
}

pub fn group(key: &str) -> Result<FiniteGroup> {
    let s = group_json(key).ok_or_else(|| Error::InvalidParameter(format!("no corpus group {key:?}")))?;
    GroupFile::from_json(s)?.build()
}

pub fn table(key: &str) -> Result<CharacterTable> {
    let s = table_json(key).ok_or_else(|| Error::InvalidParameter(format!("no corpus table {key:?}")))?;
    CharacterTable::from_json(s)
}
